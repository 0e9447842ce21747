import numpy as np
import pytest

from cfloc.gpr import PositionEstimate
from cfloc.metrics import (TRIAL_CSV_HEADER, TrialRecord, ellipse_area,
                           ellipse_covers, localization_error, read_trials_csv,
                           write_trials_csv)


class TestLocalizationError:
    def test_identical_points(self):
        assert localization_error((3.0, 4.0), (3.0, 4.0)) == 0.0

    def test_three_four_five(self):
        assert localization_error((0.0, 0.0), (3.0, 4.0)) == pytest.approx(5.0)

    def test_matches_coordinate_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b = rng.uniform(-100, 100, 2), rng.uniform(-100, 100, 2)
            expected = np.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)
            assert localization_error(a, b) == pytest.approx(expected)


class TestEllipseArea:
    def test_unit_variances(self):
        assert ellipse_area((1.0, 1.0)) == pytest.approx(5.991 * np.pi)

    def test_four_one(self):
        assert ellipse_area((4.0, 1.0)) == pytest.approx(2 * 5.991 * np.pi)

    def test_linear_in_common_scale(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            v = rng.uniform(0.1, 10, 2)
            c = rng.uniform(0.5, 4.0)
            assert ellipse_area(c * v) == pytest.approx(c * ellipse_area(v))

    def test_symmetric(self):
        assert ellipse_area((2.0, 7.0)) == ellipse_area((7.0, 2.0))

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(ValueError):
            ellipse_area((0.0, 1.0))


class TestEllipseCovers:
    def test_center_covered(self):
        est = PositionEstimate(mean=(10.0, 20.0), var=(4.0, 9.0))
        assert ellipse_covers((10.0, 20.0), est)

    def test_outside_axis_point_not_covered(self):
        v1 = 4.0
        est = PositionEstimate(mean=(0.0, 0.0), var=(v1, 1.0))
        outside = (np.sqrt(5.991 * v1) + 1e-6, 0.0)
        assert not ellipse_covers(outside, est)

    def test_boundary_point_covered(self):
        # v1 chosen so dx^2 / (5.991 v1) is exactly 1.0 in floats: the
        # boundary inequality is inclusive
        v1 = 4.0 / 5.991
        est = PositionEstimate(mean=(0.0, 0.0), var=(v1, 1.0))
        assert ellipse_covers((2.0, 0.0), est)

    def test_calibration_quick(self):
        # estimates drawn exactly from the reported Gaussian: coverage ~ 95%
        rng = np.random.default_rng(2)
        n = 20000
        v = rng.uniform(0.5, 5.0, size=(n, 2))
        err = rng.standard_normal((n, 2)) * np.sqrt(v)
        hits = [
            ellipse_covers((0.0, 0.0),
                           PositionEstimate(mean=tuple(err[i]), var=tuple(v[i])))
            for i in range(n)
        ]
        assert np.mean(hits) == pytest.approx(0.95, abs=0.01)


class TestTrialCsv:
    def _records(self):
        est = PositionEstimate(mean=(10.0, 20.0), var=(4.0, 9.0))
        return [
            TrialRecord.from_estimate(0, 0, "dist_gpr-median", (11.0, 21.0), est),
            TrialRecord.from_estimate(0, 1, "cent_rss", (9.0, 19.0), est),
        ]

    def test_header_and_round_trip(self, tmp_path):
        path = tmp_path / "trials.csv"
        write_trials_csv(path, self._records())
        with open(path, encoding="utf-8") as fh:
            assert fh.readline().strip() == ",".join(TRIAL_CSV_HEADER)
        rows = read_trials_csv(path)
        assert len(rows) == 2
        assert rows[0]["method"] == "dist_gpr-median"
        assert rows[0]["err_m"] == pytest.approx(np.sqrt(2.0))
        assert rows[0]["covered"]

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_trials_csv(path, self._records())
        lines = path.read_text().splitlines()
        lines[2] = lines[2].replace("cent_rss", "cent_rss,oops")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="line 3"):
            read_trials_csv(path)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "wrong.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            read_trials_csv(path)

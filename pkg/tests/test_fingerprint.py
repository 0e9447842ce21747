import numpy as np
import pytest

from cfloc import ScenarioConfig, estimate_rss_db, music_aoa_deg, offline_aoa_deg
from cfloc.channel import ChannelStats, sample_received_signal, steering_vector
from cfloc.fingerprint import (FingerprintDB, MusicAoaEstimator,
                               fold_to_ula_cone_deg, music_search_grid)

NOISE_MW = 10 ** (-88.0 / 10.0)


class TestRss:
    def test_normalized_constant_blocks(self):
        # blocks with ||Y||_F^2 identically equal to the tx power give 0 dB
        rho = 100.0
        blocks = np.full((5, 4, 1), np.sqrt(rho / 4.0), dtype=complex)
        assert estimate_rss_db(blocks, rho) == pytest.approx(0.0)

    def test_matches_asymptotic_formula(self):
        cfg = ScenarioConfig(num_antennas=4, rss_samples=20000)
        beta = 1e-7
        stats = ChannelStats(beta_linear=beta, nominal_aoa_deg=45.0)
        blocks = sample_received_signal(stats, cfg, np.random.default_rng(3))
        expected = 10 * np.log10(
            cfg.pilot_length * 4 * beta + cfg.pilot_length * 4 * cfg.noise_power_mw / cfg.tx_power_mw
        )
        assert estimate_rss_db(blocks, cfg.tx_power_mw) == pytest.approx(expected, abs=0.05)

    def test_estimator_spread_shrinks_with_block_count(self):
        beta = 1e-7
        stats = ChannelStats(beta_linear=beta, nominal_aoa_deg=45.0)
        rng = np.random.default_rng(11)

        def spread(samples):
            cfg = ScenarioConfig(num_antennas=4, rss_samples=samples)
            vals = [estimate_rss_db(sample_received_signal(stats, cfg, rng), cfg.tx_power_mw)
                    for _ in range(80)]
            return np.std(vals)

        ratio = spread(50) / spread(800)
        assert ratio == pytest.approx(4.0, rel=0.35)  # 1/sqrt(S) scaling

    def test_zero_power_rejected(self):
        with pytest.raises(ValueError):
            estimate_rss_db(np.zeros((2, 2, 1), dtype=complex), 1.0)


class TestOfflineAoa:
    def test_zero_noise_gives_nominal(self, stub_rng):
        angle = offline_aoa_deg((0.0, 0.0), (1.0, 1.0), 2.0, stub_rng(0.0))
        assert angle == pytest.approx(45.0)

    def test_noise_variance(self):
        rng = np.random.default_rng(21)
        draws = np.array([offline_aoa_deg((0.0, 0.0), (10.0, 0.0), 2.0, rng)
                          for _ in range(100000)])
        assert np.var(draws) == pytest.approx(4.0, rel=0.05)

    def test_wraps_into_convention(self, stub_rng):
        # nominal 179.5 plus 1.0 of noise lands at -179.5
        angle = offline_aoa_deg((0.0, 0.0), (-np.cos(np.deg2rad(0.5)), np.sin(np.deg2rad(0.5))),
                                2.0, stub_rng(0.5))
        assert angle == pytest.approx(-179.5, abs=1e-9)


def _noiseless_point_source_blocks(theta, n, blocks=64, seed=0):
    rng = np.random.default_rng(seed)
    a = steering_vector(theta, n, 0.5)
    gains = (rng.standard_normal(blocks) + 1j * rng.standard_normal(blocks)) / np.sqrt(2)
    return gains[:, None, None] * a[None, :, None]


class TestMusic:
    def test_point_source_within_one_grid_step(self):
        blocks = _noiseless_point_source_blocks(60.0, 8)
        est = music_aoa_deg(blocks, 8, 0.5)
        assert abs(est - 60.0) <= 0.05

    def test_noise_subspace_orthogonal_at_truth(self):
        blocks = _noiseless_point_source_blocks(60.0, 8)
        estimator = MusicAoaEstimator(8, 0.5)
        cov = estimator.sample_covariance(blocks)
        _, vecs = np.linalg.eigh(cov)
        noise_basis = vecs[:, :-1]
        a = steering_vector(60.0, 8, 0.5)
        denom = np.linalg.norm(noise_basis.conj().T @ a) ** 2
        assert denom < 1e-18 * np.linalg.norm(a) ** 2

    def test_invariant_to_block_scaling(self):
        cfg = ScenarioConfig(num_antennas=8, angular_spread_deg=2.0, rss_samples=100)
        stats = ChannelStats(beta_linear=1e-8, nominal_aoa_deg=77.0)
        blocks = sample_received_signal(stats, cfg, np.random.default_rng(2))
        est = MusicAoaEstimator(8, 0.5)
        assert est.estimate(blocks).angle_deg == est.estimate(173.3 * blocks).angle_deg

    def test_sample_covariance_eigenvalues_real_nonnegative(self):
        cfg = ScenarioConfig(num_antennas=6, rss_samples=64)
        stats = ChannelStats(beta_linear=1e-8, nominal_aoa_deg=120.0)
        blocks = sample_received_signal(stats, cfg, np.random.default_rng(8))
        cov = MusicAoaEstimator(6, 0.5).sample_covariance(blocks)
        eigvals = np.linalg.eigvalsh(cov)
        assert eigvals.min() >= -1e-9 * np.trace(cov).real

    def test_degenerate_spectrum_flagged(self):
        blocks = np.zeros((4, 5, 1), dtype=complex)  # identically zero covariance
        result = MusicAoaEstimator(5, 0.5).estimate(blocks)
        assert result.degenerate

    def test_grid_stays_inside_open_interval(self):
        grid = music_search_grid()
        assert grid.min() > 0.0 and grid.max() < 180.0
        assert len(grid) == 3600

    def test_rmse_improves_with_antennas(self):
        # noise-limited regime: a small spread keeps the single-source
        # subspace model valid across apertures
        beta = NOISE_MW / 100.0  # 0 dB SNR
        rmse = []
        for n in (9, 16, 25, 36):
            cfg = ScenarioConfig(num_antennas=n, angular_spread_deg=1.0, rss_samples=200)
            estimator = MusicAoaEstimator(n, 0.5)
            rng = np.random.default_rng(11)
            stats = ChannelStats(beta_linear=beta, nominal_aoa_deg=75.0)
            errs = [estimator.estimate(sample_received_signal(stats, cfg, rng)).angle_deg - 75.0
                    for _ in range(150)]
            rmse.append(np.sqrt(np.mean(np.square(errs))))
        assert rmse[0] > rmse[1] > rmse[2] > rmse[3]

    def test_cone_fold(self):
        assert fold_to_ula_cone_deg(-120.0) == pytest.approx(120.0)
        assert fold_to_ula_cone_deg(200.0) == pytest.approx(160.0)


class TestFingerprintDb:
    def test_csv_round_trip(self, tmp_path):
        db = FingerprintDB(
            ap_index=3,
            rss_db=np.array([-50.0, -60.5]),
            aoa_deg=np.array([12.0, -170.25]),
            rp_positions=np.array([[10.0, 20.0], [30.0, 40.0]]),
        )
        path = tmp_path / "fp.csv"
        db.to_csv(path)
        back = FingerprintDB.from_csv(path, ap_index=3)
        np.testing.assert_allclose(back.rss_db, db.rss_db)
        np.testing.assert_allclose(back.aoa_deg, db.aoa_deg)
        np.testing.assert_allclose(back.rp_positions, db.rp_positions)

    def test_hybrid_row_alignment(self):
        db = FingerprintDB(0, np.array([-1.0, -2.0]), np.array([5.0, 6.0]),
                           np.array([[0.0, 0.0], [1.0, 1.0]]))
        np.testing.assert_array_equal(db.hybrid, [[-1.0, 5.0], [-2.0, 6.0]])

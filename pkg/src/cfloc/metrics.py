"""Localization error, the 95% error ellipse, and trial-record CSV schema."""

import csv
from dataclasses import dataclass

import numpy as np

#: 95th percentile of the chi-square distribution with 2 degrees of freedom
CHI2_95_2DOF = 5.991

TRIAL_CSV_HEADER = [
    "setup_id", "test_id", "method", "true_x", "true_y", "est_x", "est_y",
    "var_x", "var_y", "err_m", "ellipse_area_m2", "covered",
]


def localization_error(true_pos, est_pos) -> float:
    """Euclidean distance between true and estimated ground positions (m)."""
    t = np.asarray(true_pos, dtype=float)
    e = np.asarray(est_pos, dtype=float)
    return float(np.hypot(t[0] - e[0], t[1] - e[1]))


def ellipse_area(var) -> float:
    """Area of the 95% error ellipse: 5.991 * pi * sqrt(v1 * v2)."""
    v1, v2 = float(var[0]), float(var[1])
    if v1 <= 0 or v2 <= 0:
        raise ValueError("ellipse area needs strictly positive variances")
    return CHI2_95_2DOF * np.pi * np.sqrt(v1 * v2)


def ellipse_covers(true_pos, estimate) -> bool:
    """Whether the true position lies inside (or on) the 95% error ellipse."""
    v1, v2 = estimate.var
    if v1 <= 0 or v2 <= 0:
        raise ValueError("coverage test needs strictly positive variances")
    dx = true_pos[0] - estimate.mean[0]
    dy = true_pos[1] - estimate.mean[1]
    return bool(dx**2 / (CHI2_95_2DOF * v1) + dy**2 / (CHI2_95_2DOF * v2) <= 1.0)


@dataclass(frozen=True)
class TrialRecord:
    """One (test point, method) outcome, ready for CSV export."""

    setup_id: int
    test_id: int
    method: str
    true_pos: tuple
    est_pos: tuple
    var: tuple
    err_m: float
    ellipse_area_m2: float
    covered: bool

    @classmethod
    def from_estimate(cls, setup_id, test_id, method, true_pos, estimate):
        return cls(
            setup_id=setup_id,
            test_id=test_id,
            method=method,
            true_pos=(float(true_pos[0]), float(true_pos[1])),
            est_pos=(float(estimate.mean[0]), float(estimate.mean[1])),
            var=(float(estimate.var[0]), float(estimate.var[1])),
            err_m=localization_error(true_pos, estimate.mean),
            ellipse_area_m2=ellipse_area(estimate.var),
            covered=ellipse_covers(true_pos, estimate),
        )

    def to_row(self):
        fmt = "{:.10g}".format
        return [
            str(self.setup_id), str(self.test_id), self.method,
            fmt(self.true_pos[0]), fmt(self.true_pos[1]),
            fmt(self.est_pos[0]), fmt(self.est_pos[1]),
            fmt(self.var[0]), fmt(self.var[1]),
            fmt(self.err_m), fmt(self.ellipse_area_m2),
            "true" if self.covered else "false",
        ]


def write_trials_csv(path, records):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_CSV_HEADER)
        for rec in records:
            writer.writerow(rec.to_row())


def read_trials_csv(path):
    """Parse a trial CSV into a list of dicts with typed fields."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRIAL_CSV_HEADER:
            raise ValueError(
                f"unexpected trial CSV header {reader.fieldnames} in {path}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append({
                    "setup_id": int(row["setup_id"]),
                    "test_id": int(row["test_id"]),
                    "method": row["method"],
                    "true_x": float(row["true_x"]),
                    "true_y": float(row["true_y"]),
                    "est_x": float(row["est_x"]),
                    "est_y": float(row["est_y"]),
                    "var_x": float(row["var_x"]),
                    "var_y": float(row["var_y"]),
                    "err_m": float(row["err_m"]),
                    "ellipse_area_m2": float(row["ellipse_area_m2"]),
                    "covered": row["covered"] == "true",
                })
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed trial row at line {lineno} of {path}") from exc
    return rows

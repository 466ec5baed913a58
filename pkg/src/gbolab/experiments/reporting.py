"""Report containers and writers shared by the experiment suites.

Every artifact embeds the code version and the sign convention of the free
propagator so a saved report is interpretable without the producing session.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..spectral import sign_convention_label


@dataclass
class RatioStatistics:
    """Per-trial LHS/RHS ratios for one linear estimate, plus the ladder.

    ratios holds the finest-rung value for each trial; resolution_ladder
    holds (n_points, sup_ratio) pairs for each refinement rung, coarsest
    first.  A stable estimate keeps sup_ratio within a factor 2 along the
    ladder.
    """

    n_trials: int
    ratios: list
    sup_ratio: float
    resolution_ladder: list

    def __post_init__(self):
        arr = np.asarray(self.ratios, dtype=float)
        if arr.size and (np.any(~np.isfinite(arr)) or np.any(arr <= 0)):
            raise ValueError("ratios must be positive and finite")

    @property
    def ladder_drift(self) -> float:
        sups = [s for _, s in self.resolution_ladder]
        return max(sups) / min(sups)

    def passes(self, drift_limit: float = 2.0) -> bool:
        return self.ladder_drift < drift_limit


@dataclass
class ExperimentReport:
    """Uniform result record: inputs, per-point data, fit, verdict.

    The verdict is computed from the declared tolerance by the producing
    experiment, never patched afterwards.  slope/ci are None for
    experiments that do not fit anything.
    """

    experiment_id: str
    inputs: dict
    points: list
    slope: float | None = None
    ci: float | None = None
    verdict: str = "PASS"
    notes: list = field(default_factory=list)
    seed: int | None = None
    sign_convention: str = field(default_factory=sign_convention_label)
    code_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "id": self.experiment_id,
            "params": _plain(self.inputs),
            "points": _plain(self.points),
            "slope": _plain(self.slope),
            "ci": _plain(self.ci),
            "verdict": self.verdict,
            "notes": list(self.notes),
            "seed": self.seed,
            "sign_convention": self.sign_convention,
            "code_version": self.code_version,
        }


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def write_report_json(report: ExperimentReport, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(report: ExperimentReport, path: str) -> None:
    """Companion CSV: one row per point, columns from the point dicts."""
    points = [_plain(p) for p in report.points]
    if not points:
        with open(path, "w") as fh:
            fh.write("")
        return
    keys = sorted({k for p in points for k in p})
    lines = [",".join(keys)]
    for p in points:
        lines.append(",".join(_csv_cell(p.get(k)) for k in keys))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)

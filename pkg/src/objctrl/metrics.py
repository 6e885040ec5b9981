"""Object-motion alignment score between a target and an observed trajectory.

The score is the per-frame Euclidean pixel distance between the two
trajectories, averaged over frames; lower is better and 0 means pointwise
identical.  Distances are reported in raw pixels of whatever resolution the
trajectories live in.  Observed trajectories come from input files (tracked
externally); this module only measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .trajectory import load_trajectory, resample


@dataclass(frozen=True)
class ObjMCReport:
    per_frame: tuple
    mean: float
    frames_compared: int

    def to_dict(self) -> dict:
        return {
            "per_frame": list(self.per_frame),
            "mean": self.mean,
            "frames_compared": self.frames_compared,
        }


def objmc(target, tracked) -> ObjMCReport:
    """Mean per-frame Euclidean distance between two (x, y) trajectories.

    Unequal lengths are reconciled by arc-length resampling the longer
    trajectory to the shorter one's length (a symmetric rule, so
    objmc(a, b) == objmc(b, a) always holds).
    """
    a = np.asarray(target, dtype=np.float64)
    b = np.asarray(tracked, dtype=np.float64)
    for name, t in (("target", a), ("tracked", b)):
        if t.ndim != 2 or t.shape[1] != 2 or t.shape[0] < 1:
            raise ValidationError(f"{name} trajectory must be (N, 2) with N >= 1")
    if a.shape[0] != b.shape[0]:
        n = min(a.shape[0], b.shape[0])
        if n < 2:
            raise ValidationError(
                f"cannot reconcile lengths {a.shape[0]} and {b.shape[0]} by resampling"
            )
        a = resample(a, n) if a.shape[0] != n else a
        b = resample(b, n) if b.shape[0] != n else b
    dists = np.linalg.norm(a - b, axis=1)
    return ObjMCReport(
        per_frame=tuple(float(d) for d in dists),
        mean=float(dists.mean()),
        frames_compared=int(dists.size),
    )


def objmc_batch(pairs) -> dict:
    """Score a list of (target_path, tracked_path) pairs.

    Unreadable or invalid pairs are reported per item and do not abort the
    batch; the aggregate mean is the unweighted mean of the valid pair means.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("batch needs at least one trajectory pair")
    results = []
    means = []
    for target_path, tracked_path in pairs:
        entry = {"target": str(target_path), "tracked": str(tracked_path)}
        try:
            report = objmc(
                load_trajectory(target_path)[:, :2], load_trajectory(tracked_path)[:, :2]
            )
        except (OSError, ValidationError) as exc:
            entry["error"] = str(exc)
        else:
            entry.update(report.to_dict())
            means.append(report.mean)
        results.append(entry)
    return {
        "pairs": results,
        "mean": float(np.mean(means)) if means else None,
        "pairs_scored": len(means),
        "pairs_failed": len(results) - len(means),
    }

"""Trajectory and report serialization.

CSV columns are fixed: t, lambda1, lambda2, lambda3, p0, p1, p2, p3, F,
then gamma1..gamma3 when rates were requested.  An empty cell marks a
masked singular sample.  Numbers are written in full double precision;
identical inputs produce byte-identical files.  All writes are
whole-file atomic (write to a temporary name, then rename).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evolution_solver import TrajectorySet
from .markovianity import LocalRates

__all__ = ["write_text_atomic", "trajectory_csv", "trajectory_json",
           "RunReport"]

CSV_BASE_COLUMNS = ("t", "lambda1", "lambda2", "lambda3",
                    "p0", "p1", "p2", "p3", "F")
RATE_COLUMNS = ("gamma1", "gamma2", "gamma3")


def write_text_atomic(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.17e}"


def _trajectory_table(traj: TrajectorySet, rates: LocalRates | None):
    from . import config

    times = traj.times()
    # probabilities inside the negative tolerance band are clamped to zero
    # here, at formatting time only; computations keep the signed values
    probs = np.where((traj.probs < 0.0) & (traj.probs > -config.POSITIVITY_TOL),
                     0.0, traj.probs)
    cols = [times, traj.lambdas[1], traj.lambdas[2], traj.lambdas[3],
            probs[0], probs[1], probs[2], probs[3]]
    if traj.cumulative is not None:
        cols.append(traj.cumulative)
    else:
        cols.append(np.full(times.shape, np.nan))
    header = list(CSV_BASE_COLUMNS)
    if rates is not None:
        header.extend(RATE_COLUMNS)
        cols.extend([rates.gamma[0], rates.gamma[1], rates.gamma[2]])
    return header, cols


def trajectory_csv(traj: TrajectorySet, rates: LocalRates | None = None) -> str:
    header, cols = _trajectory_table(traj, rates)
    lines = [",".join(header)]
    n = len(cols[0])
    for i in range(n):
        lines.append(",".join(_cell(float(col[i])) for col in cols))
    return "\n".join(lines) + "\n"


def trajectory_json(traj: TrajectorySet, rates: LocalRates | None = None) -> str:
    header, cols = _trajectory_table(traj, rates)
    doc = {
        "provenance": traj.provenance,
        "columns": header,
        "rows": [[None if math.isnan(float(col[i])) else float(col[i])
                  for col in cols]
                 for i in range(len(cols[0]))],
    }
    if traj.notes:
        doc["notes"] = list(traj.notes)
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


@dataclass
class RunReport:
    """Everything a command run produced, regenerable from the CSVs.

    Identical inputs give identical reports except for the wall-time
    field (a timestamp-class value by design).
    """

    command: str
    spec_echo: dict
    verdicts: dict = field(default_factory=dict)
    classification: dict | None = None
    trajectory_files: list = field(default_factory=list)
    seed: int | None = None
    notes: list = field(default_factory=list)
    tool_version: str = ""
    wall_time_s: float = 0.0

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "spec": self.spec_echo,
            "verdicts": self.verdicts,
            "trajectory_files": list(self.trajectory_files),
            "tool_version": self.tool_version,
            "wall_time_s": self.wall_time_s,
        }
        if self.classification is not None:
            out["classification"] = self.classification
        if self.seed is not None:
            out["seed"] = self.seed
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True,
                          indent=1, allow_nan=False) + "\n"


def _jsonable(value):
    """Recursively convert to plain JSON values; inf -> "inf", nan -> None."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value

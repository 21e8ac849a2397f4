"""Run configuration and machine-readable reports.

A report is a block of ``key=value`` lines followed by a blank line and a
CSV block with one row per recorded candidate.  Every :class:`RunConfig`
field appears as a key, so a report is enough to repeat the run.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InputError

__all__ = ["PROBLEMS", "RunConfig", "format_report", "parse_report", "write_report"]

PROBLEMS = ("meb", "kcenter", "flat", "svm1", "svm2")


@dataclass
class RunConfig:
    problem: str = "meb"
    algorithm: str = "sublinear"
    epsilon: float = 0.5
    delta: float = 0.25
    gamma: float = 0.1
    gamma2: float | None = None
    eta1: float = 0.1
    eta2: float = 0.1
    z: int | None = None
    k: int = 2
    guess: str = "enumerate"
    nu: int | None = None
    M: int | None = None
    rounds: int | None = None
    convention: str = "p1-p2"
    seed: int = 0
    repeats: int = 1
    theory: bool = False
    budget: int = 100_000
    input: str | None = None
    input2: str | None = None
    report: str | None = None
    final: bool = True
    workers: int | None = None

    def validate(self) -> "RunConfig":
        if self.problem not in PROBLEMS:
            raise InputError(f"problem must be one of {', '.join(PROBLEMS)}")
        if self.algorithm not in ("linear", "sublinear"):
            raise InputError("algorithm must be linear or sublinear")
        if not 0.0 < self.epsilon <= 1.0:
            raise InputError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        for name in ("delta", "eta1", "eta2"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise InputError(f"{name} must lie in (0, 1), got {v}")
        for name in ("gamma", "gamma2"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v < 1.0:
                raise InputError(f"{name} must lie in [0, 1), got {v}")
        if self.repeats < 1 or self.k < 1 or self.budget < 1:
            raise InputError("repeats, k and budget must be positive")
        if self.guess not in ("enumerate", "random"):
            raise InputError("guess must be enumerate or random")
        if self.convention not in ("p1-p2", "p2-p1"):
            raise InputError("convention must be p1-p2 or p2-p1")
        return self


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "inf" if math.isinf(v) else format(v, ".17g")
    if isinstance(v, (tuple, list, np.ndarray)):
        return ";".join(_fmt(x) for x in np.asarray(v, dtype=object).reshape(-1))
    return str(v)


def format_report(config: RunConfig, result: dict, rows: list[dict] | None = None) -> str:
    """Render the report text.  ``result`` keys follow the config keys."""
    out = [f"{f.name}={_fmt(getattr(config, f.name))}" for f in fields(config)]
    for key, val in result.items():
        out.append(f"{key}={_fmt(val)}")
    text = "\n".join(out) + "\n"
    if rows:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
        text += "\n" + buf.getvalue()
    return text


def parse_report(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`format_report` (values stay strings)."""
    head, _, tail = text.partition("\n\n")
    kv = {}
    for line in head.splitlines():
        if "=" in line:
            k, _, v = line.partition("=")
            kv[k] = v
    rows = list(csv.DictReader(io.StringIO(tail))) if tail.strip() else []
    return kv, rows


def write_report(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def config_dict(config: RunConfig) -> dict:
    return asdict(config)

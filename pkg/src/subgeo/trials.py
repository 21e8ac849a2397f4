"""Repetition plumbing shared by all solvers: per-repetition random
streams, optional thread fan-out and the deterministic argmin merge."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BudgetError, InputError
from .geometry import EvalCounter, RngLike, RngStream
from .model import Candidate

__all__ = ["TrialResult", "base_stream", "rep_stream", "run_repeats", "check_budget", "default_workers"]


@dataclass
class TrialResult:
    """Outcome of one randomized trial: its winning candidate, every
    per-round candidate and the trial's own evaluation counter."""

    best: Candidate | None
    candidates: list = field(default_factory=list)
    counter: EvalCounter = field(default_factory=EvalCounter)
    fallbacks: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> float:
        return np.inf if self.best is None else self.best.size


def base_stream(rng: RngLike) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(0)
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    if isinstance(rng, np.random.Generator):
        return RngStream(int(rng.integers(0, 2**63)))
    raise InputError(f"cannot derive a random stream from {type(rng).__name__}")


def rep_stream(rng: RngLike, r: int) -> RngStream:
    """Stream of repetition ``r``: the base stream id shifted by ``r``."""
    b = base_stream(rng)
    return RngStream(b.seed, (b.stream_id + r) % 2**64, b.path)


def default_workers() -> int:
    env = os.environ.get("SUBGEO_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def check_budget(required: int, budget: int, what: str = "repetitions") -> None:
    if required > budget:
        raise BudgetError(
            f"theory mode needs {required} {what}, above the budget of {budget}",
            required=required,
            budget=budget,
        )


def run_repeats(
    trial: Callable[[RngStream], TrialResult],
    repeats: int,
    rng: RngLike,
    *,
    workers: int | None = None,
) -> tuple[TrialResult, int, EvalCounter, list]:
    """Run ``trial`` once per repetition stream and merge by argmin.

    Ties in size go to the smaller repetition id, so the merge does not
    depend on scheduling.  Returns ``(winner, winner_id, total_counter, all)``.
    """
    if repeats < 1:
        raise InputError("repeats must be >= 1")
    streams = [rep_stream(rng, r) for r in range(repeats)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or repeats == 1:
        results = [trial(s) for s in streams]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(trial, streams))
    total = EvalCounter()
    win, win_id = None, -1
    for r, res in enumerate(results):
        total += res.counter
        if win is None or res.size < win.size:
            win, win_id = res, r
    return win, win_id, total, results

"""Command-line entry point ``subgeo``.

Subcommands: ``gen``, ``solve``, ``oracle``, ``bench`` and ``validate``.
Exit codes: 0 success, 2 input error, 3 budget error, 4 infeasible.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import instances
from .errors import BudgetError, InfeasibleError, InputError, SubgeoError
from .io import read_points, write_points
from .model import BiCriteriaParams, OutlierInstance, TwoClassInstance
from .report import PROBLEMS, RunConfig, format_report, write_report

__all__ = ["main", "build_parser"]

_GEN_KINDS = ("meb", "kcenter", "line", "svm1", "svm2", "lowerbound")


def _add_params(p):
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--gamma2", type=float, default=None, help="second-class outlier fraction (svm2)")
    p.add_argument("--eta1", type=float, default=0.1)
    p.add_argument("--eta2", type=float, default=0.1)
    p.add_argument("--z", type=int, default=None, help="rounds per trial (default ceil(2/eps)+1)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="subgeo", description="Geometric optimization with outliers.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a planted instance")
    g.add_argument("--kind", choices=_GEN_KINDS, default="meb")
    g.add_argument("--n", type=int, default=10_000)
    g.add_argument("--n2", type=int, default=None, help="second class size (svm2)")
    g.add_argument("--d", type=int, default=10)
    g.add_argument("--gamma", type=float, default=0.1)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output path; svm2 also writes <out>.2")
    g.add_argument("--format", choices=("text", "binary"), default=None)

    s = sub.add_parser("solve", help="run a solver and emit a report")
    s.add_argument("--problem", choices=PROBLEMS, default="meb")
    s.add_argument("--algorithm", choices=("linear", "sublinear"), default="sublinear")
    _add_params(s)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--guess", choices=("enumerate", "random"), default="enumerate")
    s.add_argument("--nu", type=int, default=None, help="flat fitting rounds")
    s.add_argument("--M", type=int, default=None, help="candidate directions per anchor (flat)")
    s.add_argument("--rounds", type=int, default=None, help="Gilbert rounds (svm)")
    s.add_argument("--convention", choices=("p1-p2", "p2-p1"), default="p1-p2")
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--theory", action="store_true", help="use the analytic repetition count")
    s.add_argument("--budget", type=int, default=100_000)
    s.add_argument("--confirm-budget", action="store_true",
                   help="allow theory-mode counts above the budget")
    s.add_argument("--input", default=None, help="point file (planted instance when omitted)")
    s.add_argument("--input2", default=None, help="second class file (svm2)")
    s.add_argument("--n", type=int, default=10_000, help="size of the generated instance")
    s.add_argument("--d", type=int, default=10)
    s.add_argument("--report", default=None, help="report path (stdout when omitted)")
    s.add_argument("--no-final", action="store_true", help="skip the final coverage scan")
    s.add_argument("--serial", action="store_true", help="single worker")
    s.add_argument("--workers", type=int, default=None)

    o = sub.add_parser("oracle", help="reference solvers")
    o.add_argument("--kind", choices=("meb", "meb-exact", "meb-outliers", "kcenter", "polytope",
                                      "two-class"), default="meb")
    o.add_argument("--input", required=True)
    o.add_argument("--input2", default=None)
    o.add_argument("--gamma", type=float, default=0.0)
    o.add_argument("--k", type=int, default=2)
    o.add_argument("--tol", type=float, default=1e-6)

    b = sub.add_parser("bench", help="distance-evaluation sweep over n")
    b.add_argument("--ns", default="10000,100000,1000000")
    b.add_argument("--d", type=int, default=10)
    _add_params(b)
    b.add_argument("--algorithms", default="sublinear,linear")
    b.add_argument("--out", default=None, help="CSV path (stdout when omitted)")

    v = sub.add_parser("validate", help="Monte-Carlo checks of the sampling lemmas")
    v.add_argument("--lemma", type=int, choices=(1, 2), required=True)
    v.add_argument("--trials", type=int, default=10_000)
    v.add_argument("--n", type=int, default=100_000)
    v.add_argument("--d", type=int, default=10)
    v.add_argument("--family", choices=("ball", "kball", "slab"), default="ball")
    v.add_argument("--grid", default=None, help="settings as gamma:delta:eta,... (default: three settings)")
    v.add_argument("--margin", type=float, default=0.03)
    v.add_argument("--seed", type=int, default=0)
    return ap


# -- gen ---------------------------------------------------------------------


def _cmd_gen(a) -> int:
    if a.kind == "svm2":
        inst = instances.gen_planted_svm2(a.n, a.n2 or a.n, a.d, a.gamma, seed=a.seed)
        write_points(a.out, inst.P1, a.format)
        write_points(a.out + ".2", inst.P2, a.format)
        print(f"kind=svm2\nn1={inst.P1.n}\nn2={inst.P2.n}\nd={a.d}\nmargin={inst.margin!r}")
        return 0
    if a.kind == "meb":
        inst = instances.gen_planted_meb(a.n, a.d, a.gamma, seed=a.seed)
    elif a.kind == "kcenter":
        inst = instances.gen_planted_kcenter(a.n, a.d, a.k, a.gamma, seed=a.seed)
    elif a.kind == "line":
        inst = instances.gen_planted_line(a.n, a.d, a.gamma, seed=a.seed)
    elif a.kind == "svm1":
        inst = instances.gen_planted_svm1(a.n, a.d, a.gamma, seed=a.seed)
    else:
        inst = instances.gen_lower_bound(a.n, a.gamma, d=a.d)
    write_points(a.out, inst.P, a.format)
    size = inst.truth.size if inst.truth is not None else float("nan")
    print(f"kind={a.kind}\nn={inst.n}\nd={inst.d}\ngamma={inst.gamma!r}\nplanted_size={size!r}")
    return 0


# -- solve -------------------------------------------------------------------


def _config(a) -> RunConfig:
    return RunConfig(
        problem=a.problem, algorithm=a.algorithm, epsilon=a.epsilon, delta=a.delta, gamma=a.gamma,
        gamma2=a.gamma2, eta1=a.eta1, eta2=a.eta2, z=a.z, k=a.k, guess=a.guess, nu=a.nu, M=a.M,
        rounds=a.rounds, convention=a.convention, seed=a.seed, repeats=a.repeats, theory=a.theory,
        budget=a.budget, input=a.input, input2=a.input2, report=a.report, final=not a.no_final,
        workers=1 if a.serial else a.workers,
    ).validate()


def _instance(cfg: RunConfig, a):
    if cfg.problem == "svm2":
        g2 = cfg.gamma if cfg.gamma2 is None else cfg.gamma2
        if cfg.input:
            if not cfg.input2:
                raise InputError("svm2 needs --input and --input2")
            return TwoClassInstance(read_points(cfg.input), read_points(cfg.input2), cfg.gamma, g2)
        inst = instances.gen_planted_svm2(a.n, a.n, a.d, cfg.gamma, seed=cfg.seed)
        return TwoClassInstance(inst.P1, inst.P2, cfg.gamma, g2, margin=inst.margin)
    if cfg.input:
        return OutlierInstance(read_points(cfg.input), cfg.gamma)
    gen = {
        "meb": lambda: instances.gen_planted_meb(a.n, a.d, cfg.gamma, seed=cfg.seed),
        "kcenter": lambda: instances.gen_planted_kcenter(a.n, a.d, cfg.k, cfg.gamma, seed=cfg.seed),
        "flat": lambda: instances.gen_planted_line(a.n, a.d, cfg.gamma, seed=cfg.seed),
        "svm1": lambda: instances.gen_planted_svm1(a.n, a.d, cfg.gamma, seed=cfg.seed),
    }[cfg.problem]
    return gen()


def _theory_count(cfg: RunConfig, inst, params) -> int | None:
    if not cfg.theory:
        return None
    if cfg.problem == "meb":
        from .outliers import theory_repeats

        return theory_repeats(cfg.algorithm, inst.gamma, params)[0]
    if cfg.problem == "kcenter":
        from .kcenter import kcenter_branches, kcenter_theory_repeats

        n = kcenter_theory_repeats(cfg.k, inst.gamma, params, cfg.algorithm, cfg.guess)
        return n * (kcenter_branches(cfg.k, params) if cfg.guess == "enumerate" else 1)
    raise InputError(f"theory mode is not available for {cfg.problem}")


def _solve(cfg: RunConfig, inst, params):
    rng = cfg.seed
    if cfg.problem == "meb":
        from .outliers import algorithm1_linear, algorithm2_sublinear, repeat_best

        solver = algorithm1_linear if cfg.algorithm == "linear" else algorithm2_sublinear
        return repeat_best(solver, inst, params, rng, final=cfg.final, workers=cfg.workers)
    if cfg.problem == "kcenter":
        from .kcenter import kcenter_solve

        return kcenter_solve(inst, cfg.k, params, cfg.algorithm, cfg.guess, rng, final=cfg.final,
                             workers=cfg.workers)
    if cfg.problem == "flat":
        from .flat import FlatParams, flat_fit_outliers

        fp = FlatParams.from_params(params, nu=cfg.nu, M=cfg.M)
        return flat_fit_outliers(inst, params, fp, cfg.algorithm, rng, final=cfg.final,
                                 workers=cfg.workers)
    from .svm import svm1_outliers, svm2_outliers

    if cfg.problem == "svm1":
        return svm1_outliers(inst, None, params, cfg.algorithm, rng, rounds=cfg.rounds,
                             final=cfg.final, workers=cfg.workers)
    return svm2_outliers(inst, params, cfg.algorithm, rng, rounds=cfg.rounds,
                         convention=cfg.convention, final=cfg.final, workers=cfg.workers)


def _result_fields(cfg: RunConfig, inst, rep, wall: float) -> dict:
    out = {}
    if cfg.problem in ("svm1", "svm2"):
        n = (inst.P1.n, inst.P2.n) if cfg.problem == "svm2" else (inst.n,)
        out.update(n=n, d=(inst.P1.d if cfg.problem == "svm2" else inst.d), margin=rep.margin,
                   feasible=rep.feasible, direction=rep.direction, offset=rep.offset)
    else:
        out.update(n=inst.n, d=inst.d, size=rep.size)
        c = rep.center
        if cfg.problem == "flat" and c is not None:
            out.update(anchor=c.anchor, direction=c.basis[0])
        else:
            out.update(center=None if c is None else np.asarray(c))
    out.update(
        covered=rep.covered,
        excluded=rep.excluded,
        distance_evals=rep.counter.distance_evals,
        points_touched=rep.counter.points_touched,
        scan_evals=rep.scan_counter.distance_evals,
        repetitions_used=rep.repetitions_used,
        winner_repetition=rep.extra.get("winner_repetition"),
    )
    for k, v in sorted(rep.fallbacks.items()):
        out[f"fallback_{k}"] = v
    out["wall_time"] = wall
    return out


def _cmd_solve(a) -> int:
    cfg = _config(a)
    params = BiCriteriaParams(cfg.epsilon, cfg.delta, cfg.eta1, cfg.eta2, z=cfg.z, repeats=cfg.repeats,
                              theory=cfg.theory, budget=cfg.budget)
    inst = _instance(cfg, a)
    need = _theory_count(cfg, inst, params)
    if need is not None:
        print(f"theory_trials={need}", file=sys.stderr)
        if need > cfg.budget and not a.confirm_budget:
            raise BudgetError(
                f"theory mode needs {need} trials, above the budget of {cfg.budget}; "
                "pass --confirm-budget to run anyway",
                required=need,
                budget=cfg.budget,
            )
        if a.confirm_budget:
            params = params.replace(budget=max(need, cfg.budget))
    t0 = time.perf_counter()
    rep = _solve(cfg, inst, params)
    wall = time.perf_counter() - t0
    fields = _result_fields(cfg, inst, rep, wall)
    row = {k: fields[k] for k in ("covered", "excluded", "distance_evals", "points_touched", "wall_time")}
    row = {"problem": cfg.problem, "algorithm": cfg.algorithm, "seed": cfg.seed,
           "size": fields.get("size", fields.get("margin")), **row}
    text = format_report(cfg, fields, [row])
    if cfg.report:
        write_report(cfg.report, text)
    else:
        sys.stdout.write(text)
    if cfg.problem in ("svm1", "svm2") and not rep.feasible:
        raise InfeasibleError("no round produced a positive margin")
    if cfg.problem not in ("svm1", "svm2") and not np.isfinite(rep.size):
        raise InfeasibleError("no candidate with a finite size")
    return 0


# -- oracle ------------------------------------------------------------------


def _cmd_oracle(a) -> int:
    from . import oracles

    P = read_points(a.input)
    if a.kind == "meb":
        ball, lb = oracles.oracle_meb_bracket(P, a.tol)
        print(f"radius={ball.radius!r}\nlower={lb!r}\ncenter={';'.join(map(repr, ball.center.tolist()))}")
    elif a.kind == "meb-exact":
        ball = oracles.oracle_meb_exact_lowdim(P)
        print(f"radius={ball.radius!r}\ncenter={';'.join(map(repr, ball.center.tolist()))}")
    elif a.kind == "meb-outliers":
        r, S = oracles.oracle_meb_outliers_bruteforce(P, a.gamma)
        print(f"radius={r!r}\nsubset={';'.join(map(str, S.tolist()))}")
    elif a.kind == "kcenter":
        r, S, lab = oracles.oracle_kcenter_bruteforce(P, a.k, a.gamma)
        print(f"radius={r!r}\ninliers={';'.join(map(str, S.tolist()))}\nlabels={';'.join(map(str, lab.tolist()))}")
    elif a.kind == "polytope":
        lo, hi, _ = oracles.oracle_polytope_bracket(P, a.tol)
        print(f"lower={lo!r}\nupper={hi!r}")
    else:
        if not a.input2:
            raise InputError("two-class oracle needs --input2")
        lo, hi, _ = oracles.oracle_two_class_bracket(P, read_points(a.input2), a.tol)
        print(f"lower={lo!r}\nupper={hi!r}")
    return 0


# -- bench -------------------------------------------------------------------


def bench_rows(ns, d, params, algorithms, seed=0, gamma=0.1):
    """One row per ``(algorithm, n)``: per-trial counters and trial wall time
    (no final scan)."""
    from .outliers import algorithm1_linear, algorithm2_sublinear

    solvers = {"sublinear": algorithm2_sublinear, "linear": algorithm1_linear}
    rows = []
    for n in ns:
        inst = instances.gen_planted_meb(int(n), d, gamma, seed=seed)
        for alg in algorithms:
            if alg not in solvers:
                raise InputError(f"unknown algorithm {alg!r}")
            t0 = time.perf_counter()
            rep = solvers[alg](inst, params, seed, final=False)
            wall = time.perf_counter() - t0
            rows.append({"algorithm": alg, "n": int(n), "d": d, "distance_evals": rep.counter.distance_evals,
                         "points_touched": rep.counter.points_touched, "size": rep.size,
                         "wall_time": wall})
    return rows


def _cmd_bench(a) -> int:
    import csv

    try:
        ns = [int(float(x)) for x in a.ns.split(",") if x]
    except ValueError:
        raise InputError(f"bad --ns list {a.ns!r}") from None
    params = BiCriteriaParams(a.epsilon, a.delta, a.eta1, a.eta2, z=a.z)
    rows = bench_rows(ns, a.d, params, [x for x in a.algorithms.split(",") if x], a.seed, a.gamma)
    fh = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if a.out:
            fh.close()
    return 0


# -- validate ----------------------------------------------------------------


def _cmd_validate(a) -> int:
    from .validation import DEFAULT_GRID, format_table, run_suite

    grid = DEFAULT_GRID
    if a.grid:
        try:
            grid = [tuple(float(x) for x in item.split(":")) for item in a.grid.split(",")]
        except ValueError:
            raise InputError(f"bad --grid {a.grid!r}") from None
        if any(len(g) != 3 for g in grid):
            raise InputError("each grid item must be gamma:delta:eta")
    res = run_suite(a.lemma, grid, a.trials, n=a.n, kind=a.family, seed=a.seed, d=a.d, margin=a.margin)
    print(format_table(res))
    return 0


_COMMANDS = {"gen": _cmd_gen, "solve": _cmd_solve, "oracle": _cmd_oracle, "bench": _cmd_bench,
             "validate": _cmd_validate}


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return _COMMANDS[a.command](a)
    except SubgeoError as e:
        print(f"subgeo: error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, MemoryError) as e:
        print(f"subgeo: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

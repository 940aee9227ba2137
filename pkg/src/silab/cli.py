"""silab command line: run one lemma job, run a suite, or re-emit a report."""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import mideal
from .registry import REGISTRY, ConfigError, ExperimentConfig
from .report import SuiteReport, dumps, dumps_timing, emit, exit_code, load, run

USAGE_ERROR = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _set_mutation(flag: bool):
    mideal.MUTATE_ZERO_MEMBERSHIP = flag


def _mutation_requested(args) -> bool:
    return bool(getattr(args, "mutate", False)) or os.environ.get("SILAB_MUTATE", "") not in ("", "0")


def workers() -> int:
    raw = os.environ.get("SILAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"SILAB_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"SILAB_THREADS must be a positive integer, got {raw!r}")
    return n


def _run_one(args):
    cfg, profile = args
    return run(cfg, profile)


def run_suite(name: str, seed: int = 0, mutate: bool = False, n_workers: int | None = None) -> SuiteReport:
    if name not in ("fast", "full"):
        raise UsageError(f"unknown suite {name!r}")
    cfgs = [(ExperimentConfig(lemma, seed=seed), name) for lemma in REGISTRY]
    n = min(n_workers or workers(), len(cfgs))
    if n <= 1:
        old = mideal.MUTATE_ZERO_MEMBERSHIP
        _set_mutation(mutate)
        try:
            reports = [_run_one(c) for c in cfgs]
        finally:
            _set_mutation(old)
    else:
        # map() keeps registry order, so aggregation does not depend on worker count
        with ProcessPoolExecutor(n, initializer=_set_mutation, initargs=(mutate,)) as ex:
            reports = list(ex.map(_run_one, cfgs))
    return SuiteReport(name, seed, reports)


def _write(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}")


def build_parser():
    ap = _Parser(prog="silab", description="Seeded verification jobs for shifted M-ideal lemmas.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run one lemma job")
    r.add_argument("lemma")
    for name in ("p", "d", "s", "k", "N", "trials", "budget"):
        r.add_argument(f"--{name}", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--profile", choices=["fast", "full"], default="fast")
    r.add_argument("--out")
    r.add_argument("--mutate", action="store_true", help=argparse.SUPPRESS)

    s = sub.add_parser("suite", help="run every registered job")
    s.add_argument("name", choices=["fast", "full"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="report path (default silab-suite-<name>.json)")
    s.add_argument("--mutate", action="store_true", help=argparse.SUPPRESS)

    e = sub.add_parser("emit", help="render a saved report")
    e.add_argument("report")
    e.add_argument("--format", choices=["json", "csv", "markdown"], default="json")
    e.add_argument("--job", help="for suite reports, render this job's table")
    e.add_argument("--out")

    sub.add_parser("list", help="list lemma ids")
    return ap


def _cmd_run(args) -> int:
    cfg = ExperimentConfig(args.lemma, args.p, args.d, args.s, args.k, args.N, args.trials,
                           args.seed, args.budget)
    old = mideal.MUTATE_ZERO_MEMBERSHIP
    _set_mutation(_mutation_requested(args))
    try:
        rep = run(cfg, args.profile)
    except ConfigError as exc:
        raise UsageError(str(exc))
    finally:
        _set_mutation(old)
    _write(dumps(rep), args.out)
    print(f"{rep.config['lemma']}: {rep.outcome} ({rep.seconds:.2f}s)", file=sys.stderr)
    return exit_code(rep.outcome)


def _cmd_suite(args) -> int:
    if not 0 <= args.seed < 2 ** 32 - 64:
        raise UsageError("seed out of range")
    rep = run_suite(args.name, args.seed, _mutation_requested(args))
    out = args.out or f"silab-suite-{args.name}.json"
    _write(dumps(rep), out)
    _write(dumps_timing(rep.timing()), str(Path(out).with_suffix(".timing.json")))
    for j in rep.jobs:
        print(f"{j.config['lemma']:18s} {j.outcome:20s} {j.seconds:7.2f}s")
    c = rep.counts()
    print(f"suite {args.name}: {rep.outcome} ({c['pass']} pass, {c['fail']} fail, "
          f"{c['hypothesis-not-met']} hypothesis-not-met) -> {out}")
    return exit_code(rep.outcome)


def _cmd_emit(args) -> int:
    try:
        rep = load(args.report)
    except OSError as exc:
        raise UsageError(f"cannot read {args.report}: {exc.strerror}")
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        text = emit(rep, args.format, args.job)
    except (KeyError, StopIteration):
        raise UsageError(f"no job {args.job!r} in {args.report}")
    _write(text, args.out)
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.cmd == "run":
            return _cmd_run(args)
        if args.cmd == "suite":
            return _cmd_suite(args)
        if args.cmd == "emit":
            return _cmd_emit(args)
        print("\n".join(REGISTRY))
        return 0
    except UsageError as exc:
        print(f"silab: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

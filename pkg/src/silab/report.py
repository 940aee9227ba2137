"""Reports: canonical JSON plus CSV and markdown views.

The JSON body never contains wall-clock data, so two runs with the same
configs are byte-identical. Timings go to a sidecar file.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .polyring import BudgetExceeded
from .registry import REGISTRY, ExperimentConfig, JobResult, run_job

SCHEMA_VERSION = 1
COUNTING_COLUMNS = ["p", "d", "r", "exact", "main_term", "normalized_deviation"]
OUTCOMES = ("pass", "fail", "hypothesis-not-met")


def plain(obj):
    """Recursively turn exact/numpy/dataclass values into JSON-safe ones."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(x) for x in obj]
    if hasattr(obj, "to_json"):
        return plain(obj.to_json())
    if hasattr(obj, "to_text"):
        return obj.to_text()
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(plain(obj), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


@dataclass
class Report:
    config: dict
    outcome: str
    hypotheses: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    observed: dict = field(default_factory=dict)
    table: list = field(default_factory=list)
    anchor: str = ""
    seconds: float = 0.0  # kept out of the canonical JSON

    def to_json(self):
        return {"schema": SCHEMA_VERSION, "kind": "job", "lemma": self.config["lemma"],
                "anchor": self.anchor, "config": self.config, "outcome": self.outcome,
                "hypotheses": self.hypotheses, "counterexamples": self.counterexamples,
                "observed": self.observed, "table": self.table}


def run(cfg: ExperimentConfig, profile: str = "fast") -> Report:
    cfg = cfg.validate().resolved(profile)
    t0 = time.perf_counter()
    try:
        res = run_job(cfg)
    except BudgetExceeded as exc:
        # not a refutation: the instance is simply too large for the given budget
        res = JobResult("hypothesis-not-met", {"budget": exc.budget, "needed": exc.needed})
    except Exception as exc:  # a crash is a red job, not a crashed suite
        res = JobResult("fail", counterexamples=[{"error": f"{type(exc).__name__}: {exc}"}])
    dt = time.perf_counter() - t0
    if res.outcome not in OUTCOMES:
        raise ValueError(f"bad outcome {res.outcome!r}")
    return Report(cfg.to_json(), res.outcome, plain(res.hypotheses), plain(res.counterexamples),
                  plain(res.observed), plain(res.table), REGISTRY[cfg.lemma].anchor, dt)


def aggregate_outcome(outcomes) -> str:
    outcomes = list(outcomes)
    if "fail" in outcomes:
        return "fail"
    if "hypothesis-not-met" in outcomes:
        return "hypothesis-not-met"
    return "pass"


def exit_code(outcome: str) -> int:
    return {"pass": 0, "fail": 1, "hypothesis-not-met": 2}[outcome]


@dataclass
class SuiteReport:
    name: str
    seed: int
    jobs: list

    @property
    def outcome(self) -> str:
        return aggregate_outcome(r.outcome for r in self.jobs)

    def counts(self) -> dict:
        return {o: sum(r.outcome == o for r in self.jobs) for o in OUTCOMES}

    def to_json(self):
        return {"schema": SCHEMA_VERSION, "kind": "suite", "suite": self.name, "seed": self.seed,
                "outcome": self.outcome, "counts": self.counts(),
                "jobs": [r.to_json() for r in self.jobs]}

    def timing(self):
        return {"suite": self.name, "total_seconds": round(sum(r.seconds for r in self.jobs), 3),
                "jobs": {r.config["lemma"]: round(r.seconds, 3) for r in self.jobs}}


def dumps_timing(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load(path) -> dict:
    with open(path) as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or obj.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"{path}: not a schema-{SCHEMA_VERSION} report")
    return obj


def _job_rows(rep: dict) -> list:
    return list(rep.get("table") or [])


def _columns(rows) -> list:
    cols = []
    first = COUNTING_COLUMNS if rows and all(c in rows[0] for c in COUNTING_COLUMNS) else []
    cols.extend(first)
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    return cols


def _cell(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    if v is None:
        return ""
    return str(v)


def _suite_rows(rep: dict) -> list:
    return [{"lemma": j["lemma"], "anchor": j["anchor"], "outcome": j["outcome"],
             "counterexamples": len(j["counterexamples"]), "seed": j["config"]["seed"],
             "hypotheses": j["hypotheses"]} for j in rep["jobs"]]


def select_rows(rep: dict, job: str | None = None) -> list:
    if rep["kind"] == "suite":
        if job is None:
            return _suite_rows(rep)
        for j in rep["jobs"]:
            if j["lemma"] == job:
                return _job_rows(j)
        raise KeyError(f"no job {job!r} in suite report")
    return _job_rows(rep)


def to_csv(rows) -> str:
    cols = _columns(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def to_markdown(rows) -> str:
    cols = _columns(rows)
    if not cols:
        return "_empty table_\n"
    out = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for r in rows:
        out.append("| " + " | ".join(_cell(r.get(c)).replace("|", "\\|") for c in cols) + " |")
    return "\n".join(out) + "\n"


def emit(rep: dict, fmt: str, job: str | None = None) -> str:
    if fmt == "json":
        return dumps(rep if job is None else next(j for j in rep["jobs"] if j["lemma"] == job))
    rows = select_rows(rep, job)
    if fmt == "csv":
        return to_csv(rows)
    if fmt in ("markdown", "md"):
        return to_markdown(rows)
    raise ValueError(f"unknown format {fmt!r}")

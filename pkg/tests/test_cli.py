import csv
import io
import json

import pytest

from silab import cli, report
from silab.registry import REGISTRY, ExperimentConfig


def _run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_run_pass_writes_json(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = _run(["run", "thisisns", "--out", str(out)], capsys)
    assert code == 0 and "pass" in err
    rep = json.loads(out.read_text())
    assert rep["kind"] == "job" and rep["outcome"] == "pass" and rep["lemma"] == "thisisns"


def test_run_to_stdout(capsys):
    code, out, _ = _run(["run", "gr-1"], capsys)
    assert code == 0 and json.loads(out)["outcome"] == "pass"


@pytest.mark.parametrize("argv", [
    ["run", "no-such-lemma"],
    ["run", "counting01", "--p", "4"],
    ["run", "counting01", "--p", "seven"],
    ["bogus"],
    [],
    ["emit", "/nonexistent/report.json"],
])
def test_usage_errors(argv, capsys):
    assert cli.main(argv) == 3


def test_budget_gives_hypothesis_not_met(capsys):
    code, out, _ = _run(["run", "counting01", "--budget", "100"], capsys)
    assert code == 2
    rep = json.loads(out)
    assert rep["outcome"] == "hypothesis-not-met" and rep["hypotheses"]["needed"] > 100


def test_known_false_claim_exits_1(capsys):
    code, out, _ = _run(["run", "exex001"], capsys)
    assert code == 1 and json.loads(out)["counterexamples"]


def test_json_roundtrip_is_idempotent(tmp_path, capsys):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    cli.main(["run", "counting01", "--p", "7", "--out", str(a)])
    cli.main(["emit", str(a), "--format", "json", "--out", str(b)])
    assert a.read_text() == b.read_text()
    assert report.dumps(json.loads(b.read_text())) == b.read_text()


def test_counting_csv_row(tmp_path, capsys):
    a = tmp_path / "c.json"
    cli.main(["run", "counting01", "--p", "7", "--out", str(a)])
    code, out, _ = _run(["emit", str(a), "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0])[:6] == report.COUNTING_COLUMNS
    row = next(r for r in rows if (r["p"], r["d"], r["r"]) == ("7", "5", "0"))
    dev = int(row["exact"]) - int(row["main_term"])
    assert int(row["main_term"]) == 7 ** 4
    assert dev * dev <= 7 ** 5


def test_env_threads_validation(monkeypatch, capsys):
    monkeypatch.setenv("SILAB_THREADS", "zero")
    assert cli.main(["suite", "fast"]) == 3
    monkeypatch.setenv("SILAB_THREADS", "0")
    assert cli.main(["suite", "fast"]) == 3
    monkeypatch.setenv("SILAB_THREADS", "2")
    assert cli.workers() == 2


def test_config_validation():
    from silab.registry import ConfigError
    with pytest.raises(ConfigError):
        ExperimentConfig("counting01", p=9).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig("nope").validate()
    cfg = ExperimentConfig("counting01").validate().resolved("fast")
    assert cfg.p is not None and cfg.trials is not None


@pytest.fixture(scope="module")
def fast_suite(tmp_path_factory):
    d = tmp_path_factory.mktemp("suite")
    out = d / "fast.json"
    code = cli.main(["suite", "fast", "--out", str(out)])
    return code, out


def test_suite_outcomes(fast_suite):
    code, out = fast_suite
    rep = json.loads(out.read_text())
    assert rep["kind"] == "suite" and len(rep["jobs"]) == len(REGISTRY)
    failing = [j["lemma"] for j in rep["jobs"] if j["outcome"] != "pass"]
    # the only red job is the false Mycielski claim
    assert failing == ["exex001"]
    assert code == 1 and rep["outcome"] == "fail"
    assert out.with_suffix(".timing.json").exists()
    assert "seconds" not in out.read_text()


def test_suite_markdown_and_csv(fast_suite, capsys):
    _, out = fast_suite
    code, md, _ = _run(["emit", str(out), "--format", "markdown"], capsys)
    assert code == 0
    lines = md.strip().splitlines()
    assert len(lines) == 2 + len(REGISTRY)
    for lemma in REGISTRY:
        assert any(f"| {lemma} |" in ln for ln in lines)
    code, text, _ = _run(["emit", str(out), "--format", "csv", "--job", "counting01"], capsys)
    assert code == 0 and text.startswith(",".join(report.COUNTING_COLUMNS))
    assert cli.main(["emit", str(out), "--job", "nope"]) == 3


def test_suite_parallel_matches_serial():
    a = cli.run_suite("fast", seed=3, n_workers=1)
    b = cli.run_suite("fast", seed=3, n_workers=2)
    assert report.dumps(a) == report.dumps(b)


def test_mutation_turns_jobs_red():
    rep = cli.run_suite("fast", mutate=True, n_workers=1)
    red = {j.config["lemma"] for j in rep.jobs if j.outcome == "fail"}
    assert len(red - {"exex001"}) >= 1
    from silab import mideal
    assert mideal.MUTATE_ZERO_MEMBERSHIP is False


def test_list(capsys):
    code, out, _ = _run(["list"], capsys)
    assert code == 0 and out.split() == list(REGISTRY)

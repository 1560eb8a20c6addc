import json
import math

import pytest

from kgkms.bundled import corpus_path, entry
from kgkms.cli import main
from kgkms.graphio import load
from kgkms.kgraph import validate


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(text):
    return {rec["name"]: rec for rec in map(json.loads, text.splitlines())}


def report(capsys, name, *flags):
    code, out, _ = run(capsys, "report", str(corpus_path(name)), "--format", "jsonl", *flags)
    return code, records(out)


def test_validate_exit_codes(capsys):
    assert run(capsys, "validate", str(corpus_path("one-vertex-2-3")))[0] == 0
    code, out, _ = run(capsys, "validate", str(corpus_path("bad-missing-square")), "--format", "jsonl")
    assert code == 1 and "NotBijective" in out
    code, out, _ = run(capsys, "validate", str(corpus_path("twisted-cube")), "--format", "jsonl")
    assert code == 1 and "CubeInconsistent" in out


def test_usage_and_parse_errors(capsys, tmp_path):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "report", str(corpus_path("one-vertex-2-3")), "--r", "1,banana")[0] == 2
    broken = tmp_path / "broken.kg"
    broken.write_text("{ not json")
    code, _, err = run(capsys, "validate", str(broken))
    assert code == 2 and "parse error" in err
    assert run(capsys, "example", "single-vertex", "n1")[0] == 2
    assert run(capsys, "example", "single-vertex", "n1=0")[0] == 2


def test_critical_report_values(capsys):
    code, recs = report(capsys, "one-vertex-2-3", "--r", "1,ln3", "--exact")
    assert code == 0
    assert all(r["status"] != "fail" for r in recs.values())
    assert recs["normalize"]["value"]["K"] == [2]
    cj = recs["C_J"]["value"]
    assert cj["float"] == pytest.approx(1 - 2 / math.e, abs=1e-15) and cj["exact"] == "1 + -2*exp(-1)"
    assert recs["state-table"]["value"]["a0"]["float"] == pytest.approx(math.exp(-1), abs=1e-15)
    assert recs["kms-sweep"]["value"]["max_residual"] <= 1e-9
    assert recs["exact-mode"]["status"] == "pass"


def test_preferred_dynamics_skips_measures(capsys):
    code, recs = report(capsys, "one-vertex-2-3", "--r", "ln2,ln3")
    assert code == 0
    for name in ("C_J", "ck-defect", "consistency", "level-sums", "quasi-invariance", "support-eigen"):
        assert recs[name]["status"] == "skipped" and "J is empty" in recs[name]["detail"]
    assert recs[name]["anchor"]


def test_no_kms_below_critical(capsys):
    code, recs = report(capsys, "one-vertex-2-3", "--r", "1,ln3", "--beta", "0.9")
    assert code == 0
    assert recs["gate"]["value"]["verdict"] == "NoKMS"
    assert recs["kms-sweep"]["status"] == "skipped"


def test_supercritical_report(capsys):
    code, recs = report(capsys, "one-vertex-2-3", "--r", "1,ln3", "--beta", "2")
    assert code == 0
    assert recs["gate"]["value"]["verdict"] == "Supercritical"
    y = 1 / ((1 - 2 * math.exp(-2)) * (1 - 1 / 3))
    assert recs["y-vector"]["value"]["y"][0] == pytest.approx(y, abs=1e-9)
    assert recs["supercritical-table"]["value"]["a0"] == pytest.approx(math.exp(-2), abs=1e-12)


def test_degenerate_graph_fails(capsys):
    code, recs = report(capsys, "product-of-cycles-3", "--r", "1,1")
    assert code == 1 and recs["normalize"]["status"] == "fail"


def test_declared_K_mismatch_fails(capsys):
    code, recs = report(capsys, "one-vertex-2-3", "--r", "1,ln3", "--K", "1")
    assert code == 1 and recs["normalize"]["status"] == "fail"


def test_positivity_with_seed(capsys):
    code, recs = report(capsys, "one-vertex-2-3", "--r", "1,ln3", "--seed", "7")
    assert code == 0 and recs["positivity"]["status"] == "pass"


def test_reports_are_deterministic(capsys):
    args = ("report", str(corpus_path("two-vertex")), "--r", "1,ln3", "--format", "jsonl", "--seed", "3")
    first = run(capsys, *args)
    second = run(capsys, *args)
    assert first == second


def test_table_and_jsonl_agree(capsys):
    path = str(corpus_path("one-vertex-2-3"))
    _, jl, _ = run(capsys, "report", path, "--r", "1,ln3", "--format", "jsonl")
    _, table, _ = run(capsys, "report", path, "--r", "1,ln3", "--format", "table")
    for rec in records(jl).values():
        assert rec["name"] in table
        assert rec["anchor"][:40] in table


def test_every_corpus_graph_reports(capsys):
    for name in ("two-vertex", "three-vertex", "cube-2-2-3", "periodic-rank3", "red-single-loop"):
        rates = ",".join(entry(name).rates)
        code, recs = report(capsys, name, "--r", rates)
        assert code == 0, (name, [r for r in recs.values() if r["status"] == "fail"])


def test_example_round_trip(capsys, tmp_path):
    out = tmp_path / "g.kg"
    assert run(capsys, "example", "single-vertex", "n1=2", "n2=3", "-o", str(out))[0] == 0
    g = validate(*load(out))
    assert len(g.paths(None, (1, 1))) == 6
    assert run(capsys, "validate", str(out))[0] == 0
    trivial = tmp_path / "t.kg"
    assert run(capsys, "example", "single-vertex", "n1=1", "n2=1", "-o", str(trivial))[0] == 0
    assert len(validate(*load(trivial)).paths(None, (3, 3))) == 1
    cyc = tmp_path / "c.kg"
    assert run(capsys, "example", "product-of-cycles", "-o", str(cyc))[0] == 0
    code, out_text, _ = run(capsys, "report", str(cyc), "--format", "jsonl")
    assert code == 1 and "DegenerateCriticalBeta" in out_text


def test_example_to_stdout_is_deterministic(capsys):
    _, a, _ = run(capsys, "example", "cube", "sizes=2,2,3")
    _, b, _ = run(capsys, "example", "cube", "sizes=2,2,3")
    assert a == b and a.strip()

import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from qprob.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    return json.loads(out)


def test_pmf_bernoulli_exact(capsys):
    doc = run_json(capsys, "pmf", "bernoulli", "--n", "2", "--p", "1/2", "--q", "1/2")
    res = doc["result"]
    assert res["entries"] == {"0": "3/8", "1": "3/8", "2": "1/4"}
    assert res["values"]["2"] == "3/2"
    assert res["exact"] is True
    assert sum(F(v) for v in res["entries"].values()) == 1


def test_pmf_csv(capsys):
    code, out, _ = run(capsys, "pmf", "uniform", "--M", "2", "--q", "1/2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "kappa,value,lo,hi"
    assert lines[1:4] == ["0,0,4/7,4/7", "1,1,2/7,2/7", "2,3/2,1/7,1/7"]


def test_pmf_poisson_intervals(capsys):
    doc = run_json(capsys, "pmf", "poisson", "--lambda", "1/2", "--q", "1/2",
                   "--kappa-max", "3", "--eps", "1e-9")
    res = doc["result"]
    assert res["exact"] is False
    lo = sum(F(e["lo"]) for e in res["entries"].values()) + F(res["defect"]["lo"])
    hi = sum(F(e["hi"]) for e in res["entries"].values()) + F(res["defect"]["hi"])
    assert lo <= 1 <= hi


def test_moments(capsys):
    res = run_json(capsys, "moments", "bernoulli", "--n", "2", "--p", "1/2", "--q", "1/2")["result"]
    assert (res["mean"], res["second_moment"], res["variance"]) == ("3/4", "15/16", "3/8")
    res = run_json(capsys, "moments", "hypergeom", "--m", "2", "--u", "2", "--n", "2", "--q", "1")["result"]
    assert F(res["mean"]) == 1


def test_rational_arguments_round_trip(capsys):
    doc = run_json(capsys, "pmf", "bernoulli", "--n", "1", "--p", "0.25", "--q", "3/4")
    assert doc["params"]["p"] == "1/4" and doc["params"]["q"] == "3/4"


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "I2_39", "--grid", "max_int=4")
    assert code == 0
    assert json.loads(out)["summary"]["gate_passed"] is True
    with pytest.raises(SystemExit) as exc:
        main(["verify", "BOGUS"])
    assert exc.value.code != 0


def test_verify_watchlist_gate(capsys):
    code, out, _ = run(capsys, "verify", "I4_24_printed")
    assert code == 0
    assert json.loads(out)["results"][0]["outcome"] == "fail"
    code, _, _ = run(capsys, "verify", "I4_24_printed", "--include-watchlist")
    assert code == 1


def test_sample_is_reproducible(capsys):
    argv = ("sample", "contagious", "--m", "2", "--u", "2", "--s", "1", "--n", "3",
            "--q", "1/2", "--samples", "500", "--seed", "9")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    doc = json.loads(first)
    assert sum(doc["result"]["counts"].values()) == 500


def test_sample_seed_from_environment(capsys, monkeypatch):
    argv = ("sample", "bernoulli", "--n", "3", "--p", "1/2", "--q", "1/2", "--samples", "200")
    monkeypatch.setenv("QPROB_SEED", "42")
    env = json.loads(run(capsys, *argv)[1])
    explicit = json.loads(run(capsys, *argv, "--seed", "42")[1])
    assert env["seed"] == 42 and env["result"] == explicit["result"]


def test_limit_table(capsys):
    res = run_json(capsys, "limit", "L4_3", "--points", "5,10,20")["result"]
    assert res["strictly_decreasing"] is True
    his = [F(r["distance"]["hi"]) for r in res["rows"]]
    los = [F(r["distance"]["lo"]) for r in res["rows"]]
    assert all(h < l for l, h in zip(los, his[1:]))


def test_limit_zero_p(capsys):
    res = run_json(capsys, "limit", "L4_3", "--p", "0", "--points", "5,10")["result"]
    assert all(F(r["distance"]["hi"]) == 0 for r in res["rows"])


def test_domain_errors_exit_nonzero(capsys):
    code, _, err = run(capsys, "pmf", "bernoulli", "--n", "2", "--p", "2", "--q", "1/2")
    assert code == 2 and "error" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qprob", "pmf", "geometric", "--p", "1/2", "--q", "1/2",
         "--kappa-max", "2", "--eps", "1e-6"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["family"] == "geometric"

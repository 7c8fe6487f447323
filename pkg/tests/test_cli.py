import json

import pytest

from wfabounds.cli import run
from wfabounds.io import dumps_automaton, load_sample
from wfabounds.experiments import geometric_pfa
from wfabounds.sample_stats import ws_stat

from conftest import toy_automaton

FIG1 = dumps_automaton(toy_automaton())


@pytest.fixture
def files(tmp_path):
    (tmp_path / "toy.json").write_text(FIG1)
    (tmp_path / "geo.json").write_text(dumps_automaton(geometric_pfa(2, 0.5)))
    return tmp_path


def ok(argv):
    code, out, err = run([str(a) for a in argv])
    assert code == 0, err
    return out


def test_eval_toy(files):
    assert ok(["eval", "--automaton", files / "toy.json", "--string", "a b"]) == "52\n"
    assert ok(["eval", "--automaton", files / "toy.json", "--string", "ab"]) == "52\n"
    assert ok(["eval", "--automaton", files / "toy.json", "--string", "<eps>"]) == "9\n"


def test_norm_and_spectrum(files):
    out = ok(["norm", "--automaton", files / "toy.json", "--p", "1", "--length", "3"])
    assert "wfa_norm 8\n" in out
    assert "l2_squared.status truncated-lower-bound" in out
    out = ok(["spectrum", "--automaton", files / "geo.json", "--format", "json"])
    d = json.loads(out)
    assert d["numerical_rank"] == 1
    code, _, err = run(["spectrum", "--automaton", str(files / "toy.json")])
    assert code == 2 and "not certified bounded" in err


def test_stats_single_line(files):
    (files / "one.txt").write_text("a b a\n")
    out = ok(["stats", "--sample", files / "one.txt"])
    assert "L_S 3\nC_S 1\nW_S 1\n" in out


def test_bound_R2r():
    out = ok(["bound", "--class", "R2r", "--m", "4", "--r", "1"])
    assert "lower 0.35355339059327373\n" in out
    assert "upper 0.5\n" in out


def test_bound_variants():
    out = ok(["bound", "--class", "A", "--m", "100", "--n", "2", "--k", "2", "--L-S", "10",
              "--generalization", "--delta", "0.1", "--format", "json"])
    assert json.loads(out)["value"] == pytest.approx(2.7142865820863018, abs=1e-12)
    out = ok(["bound", "--class", "R1r", "--m", "2", "--C-S", "1", "--format", "csv"])
    assert out.splitlines()[1].startswith("R1r,0.83255461115769")
    code, _, err = run(["bound", "--class", "H1r", "--m", "3"])
    assert code == 2 and "--W-S" in err


def test_sample_round_trips_through_stats(files):
    out_path = files / "s.txt"
    ok(["sample", "--automaton", files / "geo.json", "--m", "12", "--seed", "5",
        "--output", out_path])
    S = load_sample(out_path)
    expected = ws_stat(S)
    out = ok(["stats", "--sample", out_path, "--automaton", files / "geo.json"])
    assert f"L_S {S.max_length}\nC_S {S.max_multiplicity}\nW_S {expected.value}\n" in out


def test_rademacher_subcommand(files):
    (files / "s.txt").write_text("a\nb\n")
    out = ok(["rademacher", "--sample", files / "s.txt", "--class", "R", "--p", "2"])
    assert out.startswith("value 0.70710678118654757\n")
    code, _, err = run(["rademacher", "--sample", str(files / "s.txt"), "--class", "R",
                        "--mode", "mc"])
    assert code == 1 and "--seed" in err


def test_exit_codes(files):
    assert run(["frobnicate"])[0] == 1
    assert run([])[0] == 1
    assert run(["eval", "--automaton", str(files / "toy.json"), "--string", "a",
                "--unknown"])[0] == 1
    # long flags only, no abbreviations
    assert run(["eval", "--auto", str(files / "toy.json"), "--string", "a"])[0] == 1
    assert run(["eval", "--automaton", str(files / "missing.json"), "--string", "a"])[0] == 2
    assert run(["eval", "--automaton", str(files / "toy.json"), "--string", "c"])[0] == 2
    assert run(["sample", "--automaton", str(files / "geo.json"), "--m", "2"])[0] == 1
    (files / "big.txt").write_text("a b a b a b a b\n" * 9)
    assert run(["stats", "--sample", str(files / "big.txt"), "--guard", "100"])[0] == 1
    assert run(["stats", "--sample", str(files / "big.txt"), "--guard", "100",
                "--seed", "1"])[0] == 0
    assert run(["rademacher", "--sample", str(files / "big.txt"), "--class", "R",
                "--p", "2", "--r", "nan"])[0] == 2


def test_experiment_and_check(files):
    spec = files / "spec.txt"
    spec.write_text("experiment = inequality\nm_grid = 2 4\ntrials = 3\n")
    assert run(["experiment", "--spec", str(spec)])[0] == 1
    out = ok(["experiment", "--spec", spec, "--seed", "2"])
    assert out.splitlines()[0].startswith("m,trial,seed,L_S")
    assert len(out.splitlines()) == 7
    out = ok(["check", "--seed", "1", "--m-grid", "2,3", "--trials", "2"])
    assert out.endswith("violations 0\nresult PASS\n")

import json

import numpy as np
import pytest

from trisdp.cli import main
from trisdp.problems_io import read_sdpa


def _gen(tmp_path, *args):
    assert main(["gen", *args, "--out", str(tmp_path)]) == 0


def _solve(path, out, *extra):
    return main(["solve", str(path), "--out", str(out), *extra])


def test_gen_maxcut_files(tmp_path, capsys):
    _gen(tmp_path, "--family", "maxcut", "--n", "20", "--density", "0.5", "--seed", "7")
    assert (tmp_path / "maxcut_n20_s7.dat-s").is_file()
    meta = json.loads((tmp_path / "maxcut_n20_s7.json").read_text())
    assert meta["family"] == "maxcut" and meta["seed"] == 7
    assert capsys.readouterr().out.strip().endswith("maxcut_n20_s7.dat-s")


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        _gen(d, "--family", "rand", "--n", "10", "--m", "30", "--seed", "1")
    name = "rand_n10_m30_s1"
    for ext in (".dat-s", ".json"):
        assert (a / (name + ext)).read_bytes() == (b / (name + ext)).read_bytes()


@pytest.mark.parametrize("args", [
    ["--family", "normmin", "--n", "10"],
    ["--family", "rand", "--n", "10"],
    ["--family", "maxcut", "--n", "10", "--p", "3"],
    ["--family", "maxcut", "--n", "10", "--density", "1.5"],
])
def test_gen_usage_errors(tmp_path, args, capsys):
    assert main(["gen", *args, "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_solve_maxcut(tmp_path):
    _gen(tmp_path, "--family", "maxcut", "--n", "20", "--seed", "7")
    out = tmp_path / "r.json"
    assert _solve(tmp_path / "maxcut_n20_s7.dat-s", out, "--model", "tnsdp") == 0
    rep = json.loads(out.read_text())
    assert rep["E"] <= 1e-8 and rep["certified"] and rep["family"] == "maxcut"
    F = np.array(rep["solution"]["F"])
    assert np.allclose(np.sum(F * F, axis=1), 1.0, atol=1e-8)
    assert len(rep["E_history"]) == rep["iters"] + 1


def test_models_agree(tmp_path):
    _gen(tmp_path, "--family", "rand", "--n", "8", "--m", "12", "--seed", "3")
    path = tmp_path / "rand_n8_m12_s3.dat-s"
    objs = []
    for model in ("nsdp", "tnsdp"):
        out = tmp_path / f"{model}.json"
        assert _solve(path, out, "--model", model) == 0
        rep = json.loads(out.read_text())
        assert rep["certified"]
        objs.append(rep["objective"])
    assert objs[0] == pytest.approx(objs[1], rel=1e-6)


def test_rank_too_small_fails(tmp_path):
    _gen(tmp_path, "--family", "maxcut", "--n", "20", "--seed", "7")
    code = _solve(tmp_path / "maxcut_n20_s7.dat-s", tmp_path / "r.json", "--rank", "1", "--max-iter", "20")
    assert code in (1, 3)
    if code == 1:
        assert not json.loads((tmp_path / "r.json").read_text())["certified"]


@pytest.mark.parametrize("rank", ["0", "x", "99"])
def test_bad_rank(tmp_path, rank):
    _gen(tmp_path, "--family", "rand", "--n", "5", "--m", "4", "--seed", "1")
    assert _solve(tmp_path / "rand_n5_m4_s1.dat-s", tmp_path / "r.json", "--rank", rank) == 2


def test_solve_missing_and_malformed(tmp_path):
    assert main(["solve", str(tmp_path / "nope.dat-s")]) == 2
    bad = tmp_path / "bad.dat-s"
    bad.write_text("1\n1\n2\n1\n1 1 2 1 1.0\n")
    assert main(["solve", str(bad)]) == 2


def test_solve_normmin_report(tmp_path):
    _gen(tmp_path, "--family", "normmin", "--p", "2", "--q", "2", "--m", "1", "--seed", "4")
    out = tmp_path / "r.json"
    assert _solve(tmp_path / "normmin_p2_q2_m1_s4.dat-s", out, "--probe-strictness") == 0
    rep = json.loads(out.read_text())
    nm = rep["normmin"]
    assert nm["value"] == pytest.approx(nm["norm_at_z"], abs=1e-7)
    assert nm["t"] == pytest.approx(nm["value"], abs=1e-7)
    assert rep["strictness"] is not None


def test_certify(tmp_path):
    _gen(tmp_path, "--family", "rand", "--n", "6", "--m", "8", "--seed", "2")
    prob = tmp_path / "rand_n6_m8_s2.dat-s"
    rep_path = tmp_path / "r.json"
    assert _solve(prob, rep_path) == 0
    out = tmp_path / "c.json"
    assert main(["certify", str(prob), str(rep_path), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["certified"]

    rep = json.loads(rep_path.read_text())
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(rep["solution"]))
    assert main(["certify", str(prob), str(bare), "--out", str(out)]) == 0

    # push mu along the first constraint until the slack loses definiteness
    p = read_sdpa(prob)
    mu = np.array(rep["solution"]["mu"])
    mu[0] += 10.0 / max(np.abs(np.linalg.eigvalsh(p.A[0])).max(), 1e-12)
    bare.write_text(json.dumps({"F": rep["solution"]["F"], "mu": mu.tolist()}))
    assert main(["certify", str(prob), str(bare), "--out", str(out)]) == 1
    assert json.loads(out.read_text())["margin"] < 0

    assert main(["certify", str(prob), str(tmp_path / "missing.json")]) == 2
    bare.write_text(json.dumps({"F": [[1.0]], "mu": [0.0]}))
    assert main(["certify", str(prob), str(bare)]) == 2


def _strip_times(text):
    rows = [line.split(",") for line in text.splitlines()]
    keep = [i for i, h in enumerate(rows[0]) if not h.endswith("_ms")]
    return [[r[i] for i in keep] for r in rows]


def test_bench_tab1_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"b{k}.csv"
        assert main(["bench", "--suite", "tab1", "--scale", "desk", "--seed", "1", "--out", str(out)]) == 0
        outs.append(out.read_text())
    rows = outs[0].splitlines()
    assert rows[0].split(",")[:6] == ["problem_id", "family", "n", "m", "r", "model"]
    assert len(rows) == 1 + 10 * 2
    assert _strip_times(outs[0]) == _strip_times(outs[1])


def test_bench_bad_args():
    assert main(["bench", "--suite", "tab1", "--jobs", "0"]) == 2
    with pytest.raises(SystemExit):
        main(["bench", "--suite", "nope"])

import csv
import io
import json
import math

import pytest

from stieltjes.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    return json.loads(err.strip().splitlines()[-1])["error"]


def test_solve_writes_round_trip_csv(capsys):
    code, out, _ = run(capsys, "solve", "--lambda", "-0.3", "--g", "h", "--space", "E", "--grid", "0.5,1,2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["x"] for r in rows] == ["0.5", "1", "2"]
    assert all(abs(float(r["im_f"])) < 1e-15 for r in rows)
    # 17 significant digits are enough to round-trip
    v = float(rows[1]["re_f"])
    assert repr(v) == repr(float(format(v, ".17g")))


def test_solve_to_file_is_deterministic(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"s{i}.csv"
        assert run(capsys, "solve", "--lambda", "0.2,0.1", "--g", "expneg", "--grid", "log:0.01:100:7",
                   "--out", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_parse_error_json(capsys):
    code, _, err = run(capsys, "solve", "--lambda", "0.2", "--g", "h +")
    e = error_of(err)
    assert code == 2
    assert e["code"] == "parse_error" and e["position"] == 3


def test_k_and_space_are_exclusive(capsys):
    code, _, err = run(capsys, "solve", "--lambda", "0.2", "--g", "h", "--k", "0.5", "--space", "E")
    assert code == 2 and error_of(err)["code"] == "usage_error"


def test_k_from_config_conflicts_with_space_flag(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"k": 0.5}))
    code, _, err = run(capsys, "solve", "--lambda", "0.2", "--g", "h", "--space", "E", "--config", str(cfg))
    assert code == 2 and error_of(err)["code"] == "usage_error"


def test_pure_imaginary_contract(capsys):
    code, out, err = run(capsys, "solve", "--lambda", "0,0.5", "--g", "h", "--space", "E")
    e = error_of(err)
    assert code == 3 and out == ""
    assert e["code"] == "pure_imaginary_unsolvable"
    assert "no solution in E" in e["message"]


def test_missing_option(capsys):
    code, _, err = run(capsys, "mellin", "--f", "h")
    assert code == 2 and "--s" in error_of(err)["message"]


def test_no_command(capsys):
    code, _, err = run(capsys)
    assert code == 2 and error_of(err)["code"] == "usage_error"


def test_bad_config_key(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"quad": {"nope": 1}}))
    code, _, err = run(capsys, "mellin", "--f", "h", "--s", "0.5", "--config", str(cfg))
    assert code == 2 and error_of(err)["code"] == "config_error"


def test_region_boundary_is_reported(capsys):
    # lambda = 1/pi gives alpha = 1/2 exactly, and k = 1/2 touches both boundaries
    code, _, err = run(capsys, "solve", "--lambda", repr(1 / math.pi), "--g", "expneg", "--k", "0.5")
    assert code == 1 and error_of(err)["code"] == "region_boundary"


def test_regions_by_k(capsys):
    code, out, _ = run(capsys, "verify", "--lambda", "0.3", "--g", "pow:0.1 * expneg", "--k", "0.9",
                       "--grid", "0.1,1,10")
    rep = json.loads(out)
    assert code == 0 and rep["max_rel_residual"] < 1e-6


def test_verify_reports_residual(capsys):
    code, out, _ = run(capsys, "verify", "--lambda", "0.25", "--g", "invlog2sq", "--grid", "log:1e-3:1e3:9")
    rep = json.loads(out)
    assert code == 0 and rep["max_rel_residual"] < 1e-5
    assert rep["solution"]["kernel"]["which"] == "R23"


def test_kernel_output(capsys):
    code, out, _ = run(capsys, "kernel", "--which", "r1", "--alpha", "-0.3", "--x", "1")
    re, im = (float(v) for v in out.split())
    assert code == 0 and re == pytest.approx(0.4 / (2 * math.cos(0.3 * math.pi)), rel=1e-15) and im == 0
    code, out, _ = run(capsys, "kernel", "--which", "R23", "--alpha", "0.25", "--x", "1,2", "--y", "1")
    assert code == 0 and len(out.splitlines()) == 2


def test_json_subcommands(capsys):
    code, out, _ = run(capsys, "mellin", "--f", "h", "--s", "0.5")
    assert code == 0 and json.loads(out)["value"][0] == pytest.approx(math.pi, rel=1e-8)
    code, out, _ = run(capsys, "norm", "--f", "h", "--space", "Ek:0.5")
    assert json.loads(out)["value"] == pytest.approx(math.pi, rel=1e-8)
    code, out, _ = run(capsys, "norm", "--f", "one", "--space", "E")
    assert json.loads(out)["value"] is None and json.loads(out)["diverged"]
    code, out, _ = run(capsys, "growth", "--f", "pow:-0.4", "--windows", "10:1000,0.001:0.1")
    fit = json.loads(out)
    assert fit["eps_hat"] == pytest.approx(0.4) and fit["windows"][0] == [10.0, 1000.0]
    code, out, _ = run(capsys, "tbeta", "--f", "h", "--beta", "1", "--x", "1")
    assert json.loads(out)["value"][0][0] == pytest.approx(1.0, rel=1e-9)
    code, out, _ = run(capsys, "bound", "--f", "h", "--eps", "0.5", "--eta", "0.5")
    rep = json.loads(out)
    assert rep["holds"] and rep["constants"][0] == pytest.approx(math.pi + 2)


def test_growth_of_particular_solution(capsys):
    code, out, _ = run(capsys, "growth", "--g", "expneg", "--lambda", "0.25")
    fit = json.loads(out)
    assert code == 0 and fit["alpha"][0] == pytest.approx(0.2875, abs=1e-3)


def test_table_input(capsys, tmp_path):
    path = tmp_path / "g.csv"
    path.write_text("x,re_f\n" + "".join(f"{10 ** (k / 20)!r},{1 / (1 + 10 ** (k / 20))!r}\n" for k in range(-200, 201)))
    code, out, _ = run(capsys, "norm", "--f", str(path), "--space", "E")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0, rel=1e-3)


def test_repro_only_mellin(capsys, tmp_path):
    code, out, _ = run(capsys, "repro", "--only", "mellin", "--out", str(tmp_path), "--no-figures")
    assert code == 0
    assert sorted(p.name for p in (tmp_path / "checks").iterdir()) == ["mellin.json"]
    assert "PASS mellin" in out


def test_repro_loose_tolerance_fails(capsys, tmp_path):
    code, out, err = run(capsys, "repro", "--only", "solver", "--rel-tol", "1", "--out", str(tmp_path),
                         "--no-figures")
    assert code != 0
    assert "solution_residuals" in json.loads(err)["failed"]


def test_repro_is_deterministic_with_figures(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        assert run(capsys, "repro", "--only", "kernels,tbeta", "--out", str(d))[0] == 0
    files = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*") if p.is_file())
    assert any(p.suffix == ".png" for p in files)
    assert any(p.name == "summary.csv" for p in files)
    for rel in files:
        assert (dirs[0] / rel).read_bytes() == (dirs[1] / rel).read_bytes(), rel

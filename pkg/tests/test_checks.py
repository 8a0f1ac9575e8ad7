import json

import numpy as np

from stieltjes import QuadConfig
from stieltjes import checks
from stieltjes.report import write_repro, write_summary


def test_registry_has_twelve_checks():
    names = checks.check_names()
    assert len(names) == 12 and len(set(names)) == 12
    grouped = {n for members in checks.GROUPS.values() for n in members}
    assert grouped == set(names)


def test_filter_by_group_and_name():
    res = checks.run_checks(only=["kernels"])
    assert [r.name for r in res] == ["fundamental_identity", "kernel_relations"]
    res = checks.run_checks(only=["mellin"])
    assert [r.name for r in res] == ["mellin"] and res[0].passed


def test_loose_tolerance_cannot_certify():
    ctx = checks.Context(QuadConfig(rel_tol=1.0))
    assert not ctx.certify(1e-6)
    assert checks.Context().certify(1e-6)


def test_crashing_check_is_a_failure(monkeypatch):
    def boom(ctx):
        raise RuntimeError("broken")

    monkeypatch.setattr(checks, "CHECKS", (boom,))
    monkeypatch.setitem(checks._NAMES, boom, "boom")
    (res,) = checks.run_checks()
    assert not res.passed and "broken" in res.details["exception"]


def test_bound_sweep_cases_are_seeded():
    a = checks.bound_sweep_cases(np.random.default_rng([0, 9]))
    b = checks.bound_sweep_cases(np.random.default_rng([0, 9]))
    assert len(a) == 20
    assert [c[1:] for c in a] == [c[1:] for c in b]


def test_result_json_and_summary(tmp_path):
    results = write_repro(tmp_path, only=["kernel_relations"], figures=False)
    data = json.loads((tmp_path / "checks" / "kernel_relations.json").read_text())
    assert data["passed"] and "seconds" not in data
    text = (tmp_path / "summary.txt").read_text()
    assert "kernel_relations" in text and "1/1 passed" in text
    bad = checks.CheckResult("x", "g", False, float("inf"), 1.0)
    write_summary(results + [bad], tmp_path)
    rows = (tmp_path / "summary.csv").read_text().splitlines()
    assert rows[0] == "check,group,passed,metric,threshold" and rows[-1].startswith("x,g,false,inf")
    assert bad.to_json()["metric"] == "inf"

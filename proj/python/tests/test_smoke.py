import json
from pathlib import Path

import pytest

import reflow

FIXTURES = Path(__file__).resolve().parents[2] / "fixtures"


def spec(name):
    return (FIXTURES / f"{name}.json").read_text()


@pytest.fixture(scope="module")
def storefront():
    return reflow.build(spec("storefront"))


def test_compile_counts():
    counts = reflow.compile_counts(spec("storefront"))
    assert counts["widgets"] == 41
    assert counts["soft"] == 4


def test_validation_and_errors():
    assert reflow.validate(spec("storefront")) == []
    with pytest.raises(reflow.SpecError):
        reflow.compile_counts('{"format": "reflow-layout", "version": 1, "bogus": 1}')


def test_build_and_solve(storefront):
    assert storefront["status"] == "clean"
    session = reflow.Session(storefront["bundle"])
    assert (session.min_width, session.max_width) == (1000, 2000)
    wide = session.solve(1800)
    ids = {w["id"] for w in wide["geometry"]}
    assert {"wide_bar", "3_col_table"} <= ids
    assert "thin_bar" not in ids
    step = session.update(1799)
    assert step["reasoning_reused"]
    thin = session.update(1200)
    assert "thin_bar" in {w["id"] for w in thin["geometry"]}
    with pytest.raises(reflow.RangeError):
        session.solve(999)
    rows = reflow.summary(session)["rows"]
    assert [(r["lo"], r["hi"]) for r in rows] == [(1500, 2000), (1000, 1499)]


def test_conflict_reports_core():
    out = reflow.build(spec("conflict"))
    assert out["status"] == "conflict"
    assert out["bundle"] is None
    assert {"user:box_50", "user:box_60"} <= set(out["core"])


def test_bad_bundle():
    with pytest.raises(reflow.BundleError):
        reflow.Session(json.dumps({"format": "reflow-bundle", "version": 9}))

import os
import pathlib

import pytest

import heapfix

CORPUS = pathlib.Path(os.environ.get("HEAPFIX_CORPUS", pathlib.Path(__file__).parents[2] / "corpus"))


def read(name):
    return (CORPUS / f"{name}.mc").read_text()


def test_analyze_running_example():
    out = heapfix.analyze(read("running_example"))
    assert [b["kind"] for b in out["bugs"]] == ["npe"]
    fp = {f["function"]: f for f in out["footprints"]}["VERIFY_PARAM_new"]
    assert len(fp["effects"]) == 2
    assert len(fp["meta_effects"]) == 2


def test_bug_free_fixture():
    assert heapfix.analyze(read("bug_free"))["bugs"] == []
    assert heapfix.repair(read("bug_free"))["bugs"] == []


LEAK = "fn make() {\n  p := malloc();\n  return NULL;\n}\n"


def test_format_round_trip():
    text = heapfix.format_program(LEAK)
    assert heapfix.format_program(text) == text


def test_repair_leak():
    report = heapfix.repair(LEAK, max_iters=500)
    (bug,) = report["bugs"]
    assert bug["kind"] == "leak"
    assert bug["fixed"]
    best = bug["classes"][0]
    assert best["validated"]
    fixed = heapfix.apply_patch(LEAK, best["validated_by"])
    assert "free(p);" in fixed
    assert heapfix.analyze(fixed)["bugs"] == []


def test_repair_is_deterministic():
    src = read("double_free")
    assert heapfix.repair(src, max_iters=100, seed=4) == heapfix.repair(src, max_iters=100, seed=4)


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        heapfix.analyze("fn f( {")
    with pytest.raises(heapfix.PatchError):
        heapfix.apply_patch(read("running_example"), "INSERT after nowhere#0: skip;")

import json
import os
import pathlib
import shutil
import subprocess

import pytest

CLI = os.environ.get("HEAPFIX_CLI")
CORPUS = pathlib.Path(os.environ.get("HEAPFIX_CORPUS", pathlib.Path(__file__).parents[2] / "corpus"))

pytestmark = pytest.mark.skipif(not CLI, reason="HEAPFIX_CLI not set")


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=300)


def test_analyze_exit_codes(tmp_path):
    ok = run("analyze", CORPUS / "bug_free.mc")
    assert ok.returncode == 0
    assert json.loads(ok.stdout)["bugs"] == []

    bad = tmp_path / "bad.mc"
    bad.write_text("fn f( { return 0; }\n")
    r = run("analyze", bad)
    assert r.returncode == 1
    assert r.stdout == ""
    assert r.stderr.startswith("error:")


def test_unfixed_bug_exits_2():
    r = run("repair", CORPUS / "hard_many_ingredients.mc", "--max-iters", 100)
    assert r.returncode == 2
    report = json.loads(r.stdout)
    assert [b["fixed"] for b in report["bugs"]] == [False]


def test_uniform_report_has_the_same_shape():
    learned = json.loads(run("repair", CORPUS / "running_example.mc", "--max-iters", 200).stdout)
    uniform = json.loads(run("repair", CORPUS / "running_example.mc", "--max-iters", 200, "--uniform").stdout)
    assert learned.keys() == uniform.keys()
    assert learned["bugs"][0].keys() == uniform["bugs"][0].keys()
    assert uniform["config"]["uniform"] is True


def test_emit_stats(tmp_path):
    stats = tmp_path / "stats.jsonl"
    r = run("repair", CORPUS / "cond_leak_b.mc", "--max-iters", 40, "--emit-stats", stats)
    assert r.returncode in (0, 2)
    lines = [json.loads(l) for l in stats.read_text().splitlines()]
    assert len(lines) == 40
    assert [l["iter"] for l in lines] == list(range(40))
    for l in lines:
        for rules in l["probabilities"].values():
            assert abs(sum(p[0] for p in rules.values()) - 1) < 1e-12
            assert abs(sum(p[1] for p in rules.values()) - 1) < 1e-12


def test_apply_best_writes_fixed_program(tmp_path):
    src = tmp_path / "leak.mc"
    shutil.copy(CORPUS / "leak_return_null.mc", src)
    r = run("repair", src, "--apply-best")
    assert r.returncode == 0
    fixed = tmp_path / "leak.fixed.mc"
    assert fixed.exists()
    assert json.loads(run("analyze", fixed).stdout)["bugs"] == []

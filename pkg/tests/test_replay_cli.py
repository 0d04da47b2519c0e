from __future__ import annotations

import json
import subprocess
import sys

import pytest

from aut120.cli import main
from aut120.groups import FactTable
from aut120.replay import (
    CITED,
    FAILED,
    VERIFIED,
    Context,
    PipelineError,
    load_pipelines,
    pipeline_ids,
    run_all,
)

PASSING = ["lemma-3.2", "lemma-3.3", "lemma-4.4", "lemma-5.1", "lemma-5.2", "prop-4.1", "prop-4.2", "theorem-c"]


@pytest.fixture(scope="module")
def reports():
    return {r.pipeline: r for r in run_all(Context(load_pipelines(), facts=FactTable.default()))}


def test_all_pipelines_present(reports):
    assert set(reports) == set(pipeline_ids())
    assert len(reports) == 13


@pytest.mark.parametrize("pid", PASSING)
def test_pipeline_passes(reports, pid):
    assert reports[pid].passed


def test_cited_steps_are_never_verified(reports):
    data = load_pipelines()
    for pid, rep in reports.items():
        for spec, step in zip(data["pipelines"][pid]["steps"], rep.steps):
            if spec["kind"] == "CitedFact":
                assert step.status in (CITED, FAILED)
            else:
                assert step.status in (VERIFIED, FAILED)


def test_reconstructions_are_flagged_and_hold(reports):
    flagged = [s for r in reports.values() for s in r.steps if s.payload.get("reconstruction")]
    assert flagged and all(s.status == VERIFIED for s in flagged)


def test_bad_pipeline_files_are_rejected():
    with pytest.raises(PipelineError):
        load_pipelines("pipelines:\n  x:\n    steps:\n      - {kind: Magic, action: check}\n")
    with pytest.raises(PipelineError):
        load_pipelines("pipelines:\n  x:\n    steps:\n      - {kind: CitedFact, action: check, description: d}\n")


def test_cli_exit_codes(capsys, tmp_path):
    assert main(["replay", "lemma-3.2"]) == 0
    assert main(["replay", "remark-5.6"]) == 1
    assert main(["replay", "no-such-pipeline"]) == 2
    assert main(["macwilliams", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.facts"
    bad.write_text("[fact]\nnonsense 1 | x\n")
    assert main(["orders", "--facts", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["krawtchouk", "x"])
    assert exc.value.code == 2


def test_cli_krawtchouk_and_macwilliams(capsys, tmp_path):
    assert main(["krawtchouk", "2", "1", "4"]) == 0
    assert capsys.readouterr().out.strip() == "0"
    gen = tmp_path / "h.txt"
    gen.write_text("8 4\n11110000\n00111100\n00001111\n01010101\n")
    assert main(["macwilliams", str(gen), "--format", "machine"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert lines[-1]["matches_brute_force"] is True
    assert {(l["weight"], l["dual_count"]) for l in lines[:-1]} == {("0", "1"), ("4", "14"), ("8", "1")}


def test_cli_exclude(capsys):
    assert main(["exclude", "3", "30", "31"]) == 2
    assert main(["exclude", "3", "30", "30"]) == 0
    assert "not a listed prime cycle type" in capsys.readouterr().out
    assert main(["exclude", "5", "24", "0"]) == 0
    assert "no exclusion pipeline" in capsys.readouterr().out
    assert main(["exclude", "3", "34", "18", "--format", "machine"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert json.loads(out[-1])["verdict"] == "PASS"


def test_machine_format_is_one_json_object_per_line(capsys):
    main(["replay", "lemma-5.1", "--format", "machine"])
    lines = capsys.readouterr().out.splitlines()
    records = [json.loads(l) for l in lines]
    assert all(json.dumps(r, sort_keys=True, separators=(",", ":")) == l for r, l in zip(records, lines))
    assert all("seconds" not in r for r in records)


def test_timing_is_opt_in(capsys):
    main(["replay", "lemma-4.4", "--format", "machine", "--timing"])
    assert any("seconds" in json.loads(l) for l in capsys.readouterr().out.splitlines())


def test_scenario_override_changes_the_result(tmp_path, capsys):
    from aut120.projection import dump_scenario, preset

    text = dump_scenario(preset("3-36-12")).replace("d = 24", "d = 20")
    assert text != dump_scenario(preset("3-36-12"))
    path = tmp_path / "weak.scn"
    path.write_text(text)
    assert main(["replay", "lemma-3.3", "--scenario", str(path)]) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "aut120", "krawtchouk", "1", "0", "5"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "5"

"""End-to-end command-line behaviour, exit codes and file outputs."""

import json
from pathlib import Path

from respgame.cli import run_cli

MODELS = Path(__file__).resolve().parent.parent / "models"


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_recurrence_model_table(capsys):
    code, out, _ = run(capsys, "analyze", str(MODELS / "recurrence_demo.json"),
                       "--mode", "optimistic")
    assert code == 0
    rows = [line.split() for line in out.splitlines()
            if line and line[0] == "s"]
    assert rows[0][0] == "s2" and rows[0][1] == "2/3"


def test_analyze_pessimistic_values(capsys):
    code, out, _ = run(capsys, "analyze", str(MODELS / "recurrence_demo.json"),
                       "--mode", "pessimistic", "--format", "records")
    assert code == 0
    doc = json.loads(out)
    values = {p["name"]: (p["numerator"], p["denominator"])
              for p in doc["players"]}
    assert values["s2"] == (3, 4) and values["s4"] == (1, 12)


def test_analyze_unwinnable_notes_degenerate_case(capsys):
    code, out, _ = run(capsys, "analyze", str(MODELS / "unwinnable.json"))
    assert code == 0
    assert "objective unsatisfiable; all responsibilities 0" in out
    assert "yes" not in out


def test_refine_worked_example_trace(capsys, tmp_path):
    code, out, _ = run(capsys, "refine", str(MODELS / "refinement_demo.json"),
                       "--refine", "frontier-random", "--seed", "7",
                       "--no-prune", "--explain")
    assert code == 0
    assert "iteration 1" in out
    for name, value in (("s2", "5/12"), ("s3", "5/12"), ("s6", "1/12"),
                        ("s8", "1/12")):
        assert f"{name}" in out and value in out


def test_refine_records_deterministic(capsys):
    args = ("refine", str(MODELS / "refinement_demo.json"), "--refine",
            "frontier-random", "--seed", "3", "--format", "records")
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["schema"] == "respgame-report-v1"
    assert "trace" in doc


def test_positivity_uses_fast_paths(capsys, tmp_path):
    model = tmp_path / "clouds3.json"
    code, _, _ = run(capsys, "generate", "--family", "clouds", "--size", "3",
                     "-o", str(model))
    assert code == 0
    code, out, _ = run(capsys, "positivity", str(model),
                       "--mode", "optimistic")
    assert code == 0 and "crit" in out
    code, out, _ = run(capsys, "positivity", str(MODELS / "recurrence_demo.json"),
                       "--mode", "optimistic")
    assert code == 0
    assert "s2" in out and "s4" not in out


def test_oracle_minimal_coalitions(capsys, tmp_path):
    model = tmp_path / "ladder.json"
    run(capsys, "generate", "--family", "exp-coalitions", "--size", "2",
        "-o", str(model))
    code, out, _ = run(capsys, "oracle", str(model), "--mode", "optimistic",
                       "--minimal-coalitions")
    assert code == 0
    assert "minimal winning coalitions: 4" in out


def test_export_records_file(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, _, _ = run(capsys, "export", str(MODELS / "recurrence_demo.json"),
                     "--mode", "optimistic", "-o", str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert len(doc["players"]) == 6
    top = doc["players"][0]
    assert top["name"] == "s2"
    assert (top["numerator"], top["denominator"]) == (2, 3)


def test_export_records_empty_player_set(capsys, tmp_path):
    model = tmp_path / "det.json"
    model.write_text(json.dumps({
        "states": ["a", "b"], "initial": "a",
        "transitions": [["a", "b"], ["b", "a"]],
        "objective": {"kind": "reachability", "target": []},
        "run": {"prefix": [], "loop": ["a", "b"]}}))
    out_file = tmp_path / "report.json"
    code, _, _ = run(capsys, "export", str(model), "-o", str(out_file))
    assert code == 0
    doc = json.loads(out_file.read_text())
    assert doc["schema"] == "respgame-report-v1"
    assert all(not p["positive"] for p in doc["players"])


def test_export_dot_highlights_responsible(capsys, tmp_path):
    out_file = tmp_path / "arena.dot"
    code, _, _ = run(capsys, "export", str(MODELS / "refinement_demo.json"),
                     "--using", "refine", "--format", "dot",
                     "-o", str(out_file))
    assert code == 0
    dot = out_file.read_text()
    highlighted = {line.split()[0] for line in dot.splitlines()
                   if "fillcolor=gold" in line}
    assert highlighted == {"n2", "n3", "n6", "n8"}


def test_generate_then_analyze_pipeline(capsys, tmp_path):
    model = tmp_path / "stress.json"
    code, _, _ = run(capsys, "generate", "--family", "frontier-stress-reach",
                     "--size", "2", "-o", str(model))
    assert code == 0
    code, out, _ = run(capsys, "analyze", str(model))
    assert code == 0
    rows = [line.split() for line in out.splitlines() if line]
    assert any(r[0] == "r" and r[1] == "1" for r in rows)


def test_nothing_to_explain_exit_zero(capsys, tmp_path):
    model = tmp_path / "fine.json"
    model.write_text(json.dumps({
        "states": ["a"], "initial": "a", "transitions": [["a", "a"]],
        "objective": {"kind": "safety", "target": []}}))
    code, out, _ = run(capsys, "analyze", str(model))
    assert code == 0
    assert "nothing to explain" in out


def test_player_cap_refusal_exit_one(capsys, tmp_path):
    model = tmp_path / "big.json"
    run(capsys, "generate", "--family", "clouds", "--size", "90",
        "-o", str(model))
    code, _, err = run(capsys, "analyze", str(model))
    assert code == 1
    assert "refused" in err and "cap" in err


def test_timeout_refusal(capsys):
    code, _, err = run(capsys, "refine", str(MODELS / "refinement_demo.json"),
                       "--timeout-s", "0")
    assert code == 1 and "timeout" in err


def test_input_error_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == 2 and "error" in err
    code, _, err = run(capsys, "analyze", str(tmp_path / "missing.json"))
    assert code == 2


def test_run_override_validated(capsys):
    code, _, err = run(capsys, "analyze", str(MODELS / "recurrence_demo.json"),
                       "--run-prefix", "s0", "--run-loop", "s1,s2,s1")
    assert code == 2 and "loop repeats" in err


def test_program_input_with_label_objective(capsys):
    code, out, _ = run(capsys, "analyze", str(MODELS / "clouds.prism"),
                       "--objective", "reachability", "--target-label",
                       "plus", "--mode", "optimistic")
    assert code == 0
    rows = [line.split() for line in out.splitlines() if line]
    assert any(r[0].startswith("loc=4") and r[1] == "1" for r in rows)


def test_group_by_module_pipeline(capsys):
    code, out, _ = run(capsys, "analyze", str(MODELS / "toggle.prism"),
                       "--objective", "buechi", "--target-label", "both",
                       "--group-by-module")
    assert code == 0
    assert "left" in out and "right" in out


def test_threads_flag_stable_output(capsys):
    base = ("analyze", str(MODELS / "recurrence_demo.json"), "--mode", "optimistic",
            "--format", "records")
    _, out1, _ = run(capsys, *base)
    _, out4, _ = run(capsys, *base, "--threads", "4")
    doc1, doc4 = json.loads(out1), json.loads(out4)
    assert doc1["players"] == doc4["players"]


def test_state_cap_flag(capsys):
    code, _, err = run(capsys, "analyze", str(MODELS / "clouds.prism"),
                       "--objective", "reachability", "--target-label",
                       "plus", "--state-cap", "5")
    assert code == 2 and "cap" in err

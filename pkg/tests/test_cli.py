import json
import subprocess
import sys


from girthforge.cli import main
from girthforge.graph import complete_graph, format_graph


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_gadget_sphere_text(capsys):
    code, out = run(capsys, "--format", "text", "gadget", "sphere", "--size", "3")
    assert code == 0
    assert "rooted_girth: 6" in out and "valid: True" in out


def test_gadget_fake_edge_json(capsys):
    code, out = run(capsys, "gadget", "fake-edge", "--q", "4")
    data = json.loads(out)
    assert code == 0 and data["behaves_like_edge"]


def test_fractional_infeasible_exit_two(capsys):
    code, out = run(capsys, "fractional", "C:6")
    assert code == 2
    assert json.loads(out)["error"] == "ProvenInfeasible"


def test_pack_and_verify_round_trip(capsys, tmp_path):
    code, out = run(capsys, "pack", "K:9", "--girth", "5")
    assert code == 0
    pk = tmp_path / "p.json"
    pk.write_text(out)
    g = tmp_path / "k9.txt"
    g.write_text(format_graph(complete_graph(9)))
    code, out = run(capsys, "verify", str(g), str(pk), "--girth", "5")
    assert code == 0 and json.loads(out)["girth_ok"]
    code, out = run(capsys, "girth", str(pk))
    assert json.loads(out)["girth"] == 5


def test_verify_rejects_wrong_packing(capsys, tmp_path):
    pk = tmp_path / "p.json"
    pk.write_text(json.dumps({"q": 3, "blocks": [[0, 1, 2]]}))
    code, out = run(capsys, "verify", "K:7", str(pk))
    assert code == 2 and not json.loads(out)["decomposition"]


def test_pack_proven_infeasible(capsys):
    code, _ = run(capsys, "pack", "K:7", "--girth", "5")
    assert code == 2


def test_pack_budget_exhausted(capsys):
    code, out = run(capsys, "--budget-ms", "300", "pack", "K:13", "--girth", "5")
    assert code == 3
    assert json.loads(out)["error"] == "BudgetExhausted"


def test_bad_input_exit_four(capsys, tmp_path):
    bad = tmp_path / "g.txt"
    bad.write_text("3 5\n0 1\n")
    code, _ = run(capsys, "pack", str(bad))
    assert code == 4
    code, _ = run(capsys, "pack", "K:x")
    assert code == 4
    code, _ = run(capsys, "pack", str(tmp_path / "missing.txt"))
    assert code == 4


def test_pipeline_c6_reports_stage(capsys):
    code, out = run(capsys, "pipeline", "C:6")
    data = json.loads(out)
    assert code == 2
    assert data["report"]["stages"][-1]["stage"] == "precheck"


def test_pipeline_k9(capsys):
    code, out = run(capsys, "pipeline", "K:9", "--girth", "4", "--seed", "2")
    data = json.loads(out)
    assert code == 0 and len(data["packing"]["blocks"]) == 12


def test_absorb_and_boost(capsys, tmp_path):
    x = tmp_path / "x.txt"
    x.write_text("13 3\n0 1\n1 2\n0 2\n")
    code, out = run(capsys, "absorb", "K:13", str(x))
    assert code == 0 and json.loads(out)["summary"]["divisible_subgraphs"] == 2


def test_boost_subcommand(capsys):
    code, out = run(capsys, "boost", "K:12")
    assert code == 0 and json.loads(out)["blocks"]


def test_stdin_graph_and_module_entry():
    text = format_graph(complete_graph(7))
    p = subprocess.run([sys.executable, "-m", "girthforge", "--format", "text", "pack", "-"], input=text,
                       capture_output=True, text=True, env={"GIRTHFORGE_THREADS": "2", "PATH": ""})
    assert p.returncode == 0, p.stderr
    assert "blocks" in p.stdout

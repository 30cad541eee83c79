import json
import subprocess
import sys

import pytest

jsonschema = pytest.importorskip("jsonschema")

from boxworld.cli import main


def run_cli(args, stdin=None):
    proc = subprocess.run(
        [sys.executable, "-m", "boxworld", *args],
        input=stdin,
        capture_output=True,
        text=True,
        timeout=300,
    )
    return proc


def load_schema(name):
    proc = run_cli(["--schema", name])
    assert proc.returncode == 0
    return json.loads(proc.stdout)


def validate(payload, schema_name):
    jsonschema.validate(payload, load_schema(schema_name))


def test_pr_chsh_pipeline():
    box = run_cli(["box", "make", "pr"])
    assert box.returncode == 0
    validate(json.loads(box.stdout), "box")
    chsh = run_cli(["box", "chsh"], stdin=box.stdout)
    assert chsh.returncode == 0
    payload = json.loads(chsh.stdout)
    validate(payload, "box_chsh")
    assert payload == {"chsh": "4/1"}


def test_box_check_and_local():
    box = run_cli(["box", "make", "pr"]).stdout
    check = run_cli(["box", "check"], stdin=box)
    assert check.returncode == 0
    validate(json.loads(check.stdout), "box_check")
    local = run_cli(["box", "local"], stdin=box)
    assert local.returncode == 1  # nonlocal is the negative outcome
    payload = json.loads(local.stdout)
    validate(payload, "box_local")
    assert payload["local"] is False


def test_box_local_positive_with_weights():
    import boxworld as bw

    noise = bw.uniform_box((2, 2), (2, 2))
    local = run_cli(["box", "local"], stdin=json.dumps(noise.to_json_dict()))
    assert local.returncode == 0
    payload = json.loads(local.stdout)
    validate(payload, "box_local")
    assert payload["local"] is True
    assert payload["weights"]


def test_box_marginal():
    box = run_cli(["box", "make", "pr"]).stdout
    marg = run_cli(["box", "marginal", "--parties", "0"], stdin=box)
    assert marg.returncode == 0
    payload = json.loads(marg.stdout)
    validate(payload, "box_marginal")
    assert all(entry["p"] == "1/2" for entry in payload["table"])


def test_fullcorr_make_and_verify_roundtrip(tmp_path):
    box = run_cli(["box", "make", "fullcorr", "--parties", "2", "--bits", "1", "--function", "0001"])
    assert box.returncode == 0
    target_file = tmp_path / "target.json"
    target_file.write_text(box.stdout)

    synth = run_cli(
        ["circuit", "synth"],
        stdin=json.dumps({"n_vars": 2, "bits": [0, 0, 0, 1]}),
    )
    assert synth.returncode == 0
    circuit = json.loads(synth.stdout)
    validate(circuit, "circuit")

    compiled = run_cli(
        ["compile", "--parties", "2", "--map", "x0;x1"],
        stdin=json.dumps(circuit),
    )
    assert compiled.returncode == 0
    compiled_payload = json.loads(compiled.stdout)
    validate(compiled_payload, "compile")

    verify = run_cli(
        ["verify", "--target", str(target_file)], stdin=compiled.stdout
    )
    assert verify.returncode == 0
    payload = json.loads(verify.stdout)
    validate(payload, "verify")
    assert payload["verified"] is True


def test_verify_mismatch_exits_one(tmp_path):
    wrong = run_cli(["box", "make", "fullcorr", "--parties", "2", "--bits", "1", "--function", "1110"])
    target_file = tmp_path / "t.json"
    target_file.write_text(wrong.stdout)
    synth = run_cli(["circuit", "synth"], stdin=json.dumps({"n_vars": 2, "bits": [0, 0, 0, 1]}))
    compiled = run_cli(["compile", "--parties", "2", "--map", "x0;x1"], stdin=synth.stdout)
    verify = run_cli(["verify", "--target", str(target_file)], stdin=compiled.stdout)
    assert verify.returncode == 1
    payload = json.loads(verify.stdout)
    validate(payload, "verify")
    assert payload["verified"] is False


def test_circuit_eval_and_table():
    netlist = "input x\ninput y\ng0 = NAND(x, y)\noutput g0\n"
    ev = run_cli(["circuit", "eval", "--assignment", "11"], stdin=netlist)
    assert json.loads(ev.stdout) == {"value": 0}
    validate(json.loads(ev.stdout), "circuit_eval")
    table = run_cli(["circuit", "table"], stdin=netlist)
    payload = json.loads(table.stdout)
    validate(payload, "circuit_table")
    assert payload == {"n_vars": 2, "bits": [1, 1, 1, 0]}


def test_simulate_exact_and_sample():
    synth = run_cli(["circuit", "synth"], stdin=json.dumps({"n_vars": 2, "bits": [0, 0, 0, 1]}))
    compiled = run_cli(["compile", "--parties", "2", "--map", "x0;x1"], stdin=synth.stdout)
    exact = run_cli(["simulate", "--exact", "--x", "1,1"], stdin=compiled.stdout)
    assert exact.returncode == 0
    payload = json.loads(exact.stdout)
    validate(payload, "simulate")
    outcomes = {tuple(e["a"]): e["p"] for e in payload["distribution"]["outcomes"]}
    assert outcomes == {(0, 1): "1/2", (1, 0): "1/2"}

    sample = run_cli(
        ["simulate", "--sample", "--x", "1,1", "--seed", "9", "--runs", "2000"],
        stdin=compiled.stdout,
    )
    assert sample.returncode == 0
    payload = json.loads(sample.stdout)
    validate(payload, "simulate")
    assert sum(c["n"] for c in payload["counts"]) == 2000
    assert all(tuple(c["a"]) in {(0, 1), (1, 0)} for c in payload["counts"])

    sample2 = run_cli(
        ["simulate", "--sample", "--x", "1,1", "--seed", "9", "--runs", "2000"],
        stdin=compiled.stdout,
    )
    assert sample2.stdout == sample.stdout  # byte-identical under same seed

    missing_seed = run_cli(["simulate", "--sample", "--x", "1,1"], stdin=compiled.stdout)
    assert missing_seed.returncode == 2


def test_cc_command():
    synth = run_cli(["circuit", "synth"], stdin=json.dumps({"n_vars": 2, "bits": [0, 0, 0, 1]}))
    compiled = run_cli(["compile", "--parties", "2", "--map", "x0;x1"], stdin=synth.stdout)
    cc = run_cli(["cc", "--x", "1,1"], stdin=compiled.stdout)
    assert cc.returncode == 0
    payload = json.loads(cc.stdout)
    validate(payload, "cc")
    assert payload["value"] == 1
    assert payload["bits_communicated"] == 1


def test_polytope_commands():
    verts = run_cli(["polytope", "vertices", "--inputs", "2,2", "--outputs", "2,2"])
    assert verts.returncode == 0
    payload = json.loads(verts.stdout)
    validate(payload, "polytope_vertices")
    assert payload["count"] == 24

    box = run_cli(["box", "make", "pr"]).stdout
    classify = run_cli(["polytope", "classify"], stdin=box)
    payload = json.loads(classify.stdout)
    validate(payload, "polytope_classify")
    assert payload["class"] == "pr-equivalent"

    decomp = run_cli(["polytope", "decompose"], stdin=box)
    payload = json.loads(decomp.stdout)
    validate(payload, "polytope_decompose")
    assert len(payload["weights"]) == 1
    assert payload["weights"][0]["w"] == "1/1"


def test_cluster_commands():
    constraints = run_cli(["cluster", "constraints"])
    payload = json.loads(constraints.stdout)
    validate(payload, "cluster_constraints")
    assert len(payload["constraints"]) == 6

    ghz = run_cli(["cluster", "ghz"])
    assert ghz.returncode == 0
    payload = json.loads(ghz.stdout)
    validate(payload, "cluster_ghz")
    assert payload == {"satisfying_assignments": 0, "max_simultaneous": 5, "space": 1024}


@pytest.mark.slow
def test_cluster_search_cli():
    search = run_cli(["cluster", "search", "--boxes", "1"])
    assert search.returncode == 0
    payload = json.loads(search.stdout)
    validate(payload, "cluster_search")
    assert payload["success"] is False
    assert payload["assignments_tested"] == 10

    inverted = run_cli(["cluster", "search", "--boxes", "1", "--inverted"])
    assert inverted.returncode == 1  # counterexample found
    payload = json.loads(inverted.stdout)
    validate(payload, "cluster_search")
    assert payload["success"] is True


def test_usage_errors_exit_two():
    assert run_cli(["box"]).returncode == 2
    assert run_cli(["nonsense"]).returncode == 2
    assert run_cli(["circuit", "eval", "--assignment", "11"], stdin="garbage netlist").returncode == 2


def test_determinism_byte_identical():
    a = run_cli(["box", "make", "pr"])
    b = run_cli(["box", "make", "pr"])
    assert a.stdout == b.stdout
    g1 = run_cli(["cluster", "ghz"])
    g2 = run_cli(["cluster", "ghz"])
    assert g1.stdout == g2.stdout


def test_threads_flag_accepted_and_output_identical():
    a = run_cli(["--threads", "1", "cluster", "ghz"])
    b = run_cli(["--threads", "4", "cluster", "ghz"])
    assert a.returncode == b.returncode == 0
    assert a.stdout == b.stdout


def test_schema_list():
    proc = run_cli(["--schema", "list"])
    names = json.loads(proc.stdout)["schemas"]
    assert "box" in names and "cluster_search" in names
    assert run_cli(["--schema", "nope"]).returncode == 2


def test_main_callable_directly(capsys):
    code = main(["box", "make", "pr"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["parties"] == 2

import io
import json
import sys

import pytest

from laminath import cli


def run_cli(argv):
    buf = io.StringIO()
    err = io.StringIO()
    old_out, old_err = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = buf, err
    try:
        code = cli.main(argv)
    finally:
        sys.stdout, sys.stderr = old_out, old_err
    return code, buf.getvalue(), err.getvalue()


def test_convergents_json():
    code, out, _ = run_cli(["--emit", "json", "convergents",
                            "--theta", "cf:[1;2]p", "--k", "4"])
    assert code == 0
    doc = json.loads(out)
    assert doc["convergents"][-1] == {"k": 4, "p": 41, "q": 29}


def test_simple_word_text():
    code, out, _ = run_cli(["simple-word", "--slope", "5/3", "--start", "1"])
    assert code == 0
    assert "(2,2,1)@ba" in out


def test_word_round_trip_revalidates():
    code, out, _ = run_cli(["--emit", "json", "inadmissible",
                            "--theta", "cf:[1;2]p", "--k", "3"])
    doc = json.loads(out)
    from laminath.words import BlockWord
    w = BlockWord.parse(doc["serialized"])
    assert w.letters() == doc["letters"]
    assert list(w.blocks) == doc["blocks"]


def test_segment_and_measure_round_trip(tmp_path):
    code, out, _ = run_cli(["--emit", "json", "segment",
                            "--theta", "cf:[1;2]p", "--k", "2"])
    doc = json.loads(out)
    path_file = tmp_path / "path.json"
    path_file.write_text(json.dumps(doc["path"]))
    code2, out2, _ = run_cli(["--emit", "json", "measure",
                              "--theta", "cf:[1;2]p",
                              "--path", str(path_file)])
    assert code2 == 0
    assert json.loads(out2)["measure"] == doc["measure"]


def test_admissible_block_query():
    code, out, _ = run_cli(["--emit", "json", "admissible",
                            "--theta", "cf:[1;2]p",
                            "--word", "(1,1,2,1,1)@ba", "--depth", "12"])
    doc = json.loads(out)
    assert doc["verdict"] == "inadmissible" and doc["aligned"]
    code2, out2, _ = run_cli(["--emit", "json", "admissible",
                              "--theta", "cf:[1;2]p", "--word", "babba"])
    assert json.loads(out2)["verdict"] == "admissible"


def test_admissible_sampling_respects_alignment():
    code, out, _ = run_cli(["--emit", "json", "--seed", "3", "admissible",
                            "--theta", "cf:[1;2]p",
                            "--word", "(1,1,2,1,1)@ba",
                            "--sample-letters", "20000"])
    doc = json.loads(out)
    assert doc["verdict"] == "inadmissible"
    assert doc["sampling"]["absent"]


def test_exotic_emits_ledger():
    code, out, _ = run_cli(["--emit", "json", "exotic", "--theta", "cf:[1;2]p",
                            "--indices", "2,4", "--prefix-blocks", "8"])
    doc = json.loads(out)
    assert doc["kept"] == [2, 4]
    assert len(doc["blocks"]) == 8
    assert len(doc["stages"]) == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        run_cli(["no-such-command"])
    assert exc.value.code == 2


def test_missing_theta_exits_2():
    code, _, err = run_cli(["--emit", "json", "factors", "--m", "3"])
    assert code == 2


def test_bad_numeric_arguments_exit_2():
    code, _, err = run_cli(["inadmissible", "--theta", "cf:[1;2]p", "--k", "-5"])
    assert code == 2
    assert json.loads(err)["error"] == "invalid-input"
    code2, _, _ = run_cli(["measure", "--theta", "cf:[1;2]p",
                           "--path", "/nonexistent/p.json"])
    assert code2 == 2


def test_ts_loop_budget_exit_3():
    code, _, err = run_cli(["ts", "loop", "--surface", "slit-tori",
                            "--k", "40", "--budget", "500"])
    assert code == 3
    assert json.loads(err)["error"] == "budget-exhausted"


def test_cylinder_exit_3(tmp_path):
    doc = json.dumps({
        "field": None,
        "polygons": [[["0", "0"], ["1", "1/3"], ["1", "4/3"], ["0", "1"]]],
        "identify": [[[0, 0], [0, 2]], [[0, 1], [0, 3]]],
    })
    f = tmp_path / "surf.json"
    f.write_text(doc)
    code, _, err = run_cli(["ts", "partition", "--surface", str(f), "--n", "4"])
    assert code == 3
    assert json.loads(err)["error"] == "cylinder-decomposition-detected"


def test_singular_cut_exit_2():
    code, _, err = run_cli(["--emit", "json", "cut", "--theta", "5/3",
                            "--start", "1/3", "--letters", "8"])
    assert code == 2
    assert json.loads(err)["error"] == "singular-hit"


def test_growth_csv():
    code, out, _ = run_cli(["--emit", "csv", "growth", "--theta", "cf:[1;2]p",
                            "--mode", "linear", "--direction", "0",
                            "--t-max", "4", "--samples", "4"])
    assert out == "t,I\n1,1*sqrt2\n2,2*sqrt2\n3,3*sqrt2\n4,4*sqrt2\n"


def test_determinism_byte_identical():
    argv_sets = [
        ["--emit", "json", "exotic", "--theta", "cf:[1;2]p", "--indices", "2,4"],
        ["--emit", "json", "ts", "loop", "--surface", "sheared-torus", "--k", "3"],
        ["--emit", "csv", "growth", "--theta", "cf:[1;1]p", "--mode",
         "prescribed", "--f", "sqrt", "--segments", "3"],
        ["--emit", "json", "--seed", "7", "admissible", "--theta", "cf:[1;2]p",
         "--word", "(2,2)@ba", "--sample-letters", "2000"],
    ]
    for argv in argv_sets:
        c1, out1, _ = run_cli(argv)
        c2, out2, _ = run_cli(argv)
        assert c1 == c2 == 0
        assert out1.encode() == out2.encode()


def test_measure_path_with_quadratic_coordinates(tmp_path):
    doc = {"field": "sqrt2",
           "vertices": [["1/7", "1/9"], ["1/7", "10/9"],
                        ["8/7", "10/9+1*sqrt2"]],
           "markers": ["start", "hop", "leaf"]}
    f = tmp_path / "p.json"
    f.write_text(json.dumps(doc))
    code, out, _ = run_cli(["--emit", "json", "measure",
                            "--theta", "cf:[1;2]p", "--path", str(f)])
    assert code == 0
    # vertical unit hop contributes 1, the leaf segment 0
    assert json.loads(out)["measure"] == "1"


def test_console_script_matches_in_process():
    import shutil
    import subprocess
    if shutil.which("laminath") is None:
        pytest.skip("console script not installed")
    argv = ["--emit", "json", "convergents", "--theta", "cf:[1;2]p", "--k", "6"]
    _code, out, _ = run_cli(argv)
    proc = subprocess.run(["laminath", *argv], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == out


def test_run_config_direct_dispatch(tmp_path):
    target = tmp_path / "a.json"
    cfg = cli.RunConfig(subcommand="simple-word", slope="7/5", start=2,
                        emit="json", out=str(target))
    assert cli.run(cfg) == 0
    assert json.loads(target.read_text())["blocks"] == [2, 1, 1, 2, 1]
    bad = cli.RunConfig(subcommand="inadmissible", theta="cf:[1;2]p", k=0)
    assert cli.run(bad) == 2


def test_out_file(tmp_path):
    target = tmp_path / "cvs.json"
    code, out, _ = run_cli(["--emit", "json", "--out", str(target),
                            "convergents", "--theta", "cf:[1;1]p", "--k", "3"])
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["convergents"][-1]["q"] == 3

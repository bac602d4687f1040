import csv
import json
import subprocess
import sys

import pytest

from gptlab.cli import cmd_verify, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def report(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 0, err
    return json.loads(out)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_space_builtin_and_polygon(capsys):
    rep = report(["space", "polygon", "4"], capsys)
    assert rep["kind"] == "space"
    assert rep["scalar"] == "exact"
    assert len(rep["result"]["space"]["rays"]) == 4
    rep = report(["space", "polygon", "5"], capsys)
    assert rep["scalar"] == "float"


def test_output_is_byte_identical(capsys):
    argv = ["tensor", "square", "square", "--kind", "max"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    assert json.loads(a)["timing"] is None


def test_timing_only_with_flag(capsys):
    rep = report(["space", "classical", "3", "--timing"], capsys)
    assert rep["timing"]["seconds"] >= 0
    assert "--timing" not in rep["command"]


def test_tensor_counts_entangled_rays(capsys):
    rep = report(["tensor", "square", "square"], capsys)
    assert rep["verdict"]["entangled"] == 8
    rep = report(["tensor", "classical2", "classical2"], capsys)
    assert rep["verdict"]["entangled"] == 0
    assert rep["verdict"]["min_equals_max"]


def test_distinguish_yes_and_no(capsys):
    yes = report(["distinguish", "square", "v0", "v2"], capsys)
    assert yes["verdict"]["distinguishable"]
    assert len(yes["certificates"]["effects"]) == 2
    no = report(["distinguish", "square", "v0", "v1", "v2"], capsys)
    assert not no["verdict"]["distinguishable"]
    assert set(no["certificates"]["farkas"]) == {"lam", "mu"}


def test_nondisturb_identity(capsys):
    rep = report(["nondisturb", "square", "--matrix", "1,0,0;0,1,0;0,0,1"], capsys)
    assert rep["verdict"]["nondisturbing"]


def test_bitcommit_csv(tmp_path, capsys):
    path = tmp_path / "binding.csv"
    rep = report(["bitcommit", "square", "--n", "1..4", "--runs", "200", "--csv", str(path)], capsys)
    assert rep["verdict"]["perfectly_hiding"] and rep["verdict"]["perfectly_sound"]
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode().splitlines()))
    assert rows[0] == ["n", "probability", "log2-probability"]
    assert [float(r[1]) for r in rows[1:]] == [0.5, 0.25, 0.125, 0.0625]
    assert [float(r[2]) for r in rows[1:]] == [-1.0, -2.0, -3.0, -4.0]


def test_teleport_modes(capsys):
    rep = report(["teleport", "square", "--group", "Z4"], capsys)
    assert rep["verdict"]["mode"] == "deterministic"
    rep = report(["teleport", "square", "--conclusive"], capsys)
    assert rep["kind"] == "teleport"
    rep = report(["teleport", "square", "--necessity"], capsys)
    assert rep["verdict"]


@pytest.mark.parametrize("argv", [
    ["space", "polygon", "4"],
    ["tensor", "square", "triangle", "--kind", "min"],
    ["distinguish", "square", "v0", "v1", "v2"],
    ["broadcast", "square", "v0", "v1"],
    ["nondisturb", "square", "--matrix", "1,0,0;0,0,0;0,0,1"],
    ["bitcommit", "square", "--n", "1..3", "--runs", "100"],
    ["teleport", "triangle", "--group", "S3"],
])
def test_reports_verify(tmp_path, capsys, argv):
    out = tmp_path / "r.json"
    assert main(argv + ["--out", str(out)]) == 0
    capsys.readouterr()
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 0
    assert text.startswith("PASS")


def test_tampered_effect_fails_verification(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["distinguish", "square", "v0", "v2", "--out", str(out)])
    rep = json.loads(out.read_text())
    rep["certificates"]["effects"][0][0] = "3/5"
    out.write_text(json.dumps(rep))
    code, text, _ = run(["verify", str(out)], capsys)
    assert code == 1
    assert text.startswith("FAIL")


def test_tampered_verdict_fails_verification(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["tensor", "square", "square", "--out", str(out)])
    rep = json.loads(out.read_text())
    rep["verdict"]["entangled"] = 7
    out.write_text(json.dumps(rep))
    assert run(["verify", str(out)], capsys)[0] == 1


def test_verify_with_second_tolerance(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["space", "polygon", "5", "--out", str(out)])
    code, text, _ = run(["verify", str(out), "--eps", "1e-12"], capsys)
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("PASS eps=1e-09")
    assert "eps=1e-12" in lines[1]
    assert code == (0 if lines[1].startswith("PASS") else 1)


def test_space_file_roundtrip(tmp_path, capsys):
    out = tmp_path / "sq.json"
    main(["space", "polygon", "4", "--out", str(out)])
    rep = report(["distinguish", str(out), "v0", "v2"], capsys)
    assert rep["verdict"]["distinguishable"]


def test_custom_space_that_does_not_span(tmp_path, capsys):
    path = write(tmp_path, "bad.json", {"rays": [["1", "0", "0"], ["0", "1", "0"]],
                                         "unit": ["1", "1", "1"]})
    code, _, err = run(["space", "custom", path], capsys)
    assert code == 2
    assert "NotGenerating" in err


def test_mixed_mode_is_rejected(tmp_path, capsys):
    path = write(tmp_path, "mixed.json", {"scalar": "exact", "rays": [[1.0, 0.5], ["1", "-1/2"]],
                                           "unit": ["1", "0"]})
    code, _, err = run(["space", "custom", path], capsys)
    assert code == 2
    assert "MixedModeError" in err
    good = tmp_path / "sq.json"
    main(["space", "polygon", "4", "--out", str(good)])
    capsys.readouterr()
    code, _, err = run(["distinguish", str(good), "v0", "--scalar", "float"], capsys)
    assert code == 2
    assert "MixedModeError" in err


@pytest.mark.parametrize("argv", [
    [],
    ["space", "hexagon", "4"],
    ["distinguish", "nosuchspace", "v0"],
    ["distinguish", "/nonexistent/space.json", "v0"],
    ["teleport", "square", "--group", "Z5"],
    ["teleport", "square"],
    ["bitcommit", "square", "--n", "x..y"],
    ["nondisturb", "square", "--matrix", "1,0;0,1"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(argv, capsys)[0] == 2


def test_budget_exceeded_exits_3(capsys):
    code, _, err = run(["broadcast", "square", "v0", "v1", "--budget", "1"], capsys)
    assert code == 3
    assert "budget" in err


def test_verify_missing_file_exit_2(capsys):
    assert run(["verify", "/nonexistent/report.json"], capsys)[0] == 2


def test_cmd_verify_writes_to_stream(tmp_path, capsys):
    out = tmp_path / "r.json"
    main(["space", "classical", "1", "--out", str(out)])
    lines = []

    class Sink:
        def write(self, s):
            lines.append(s)

    assert cmd_verify(str(out), out=Sink()) == 0
    assert "".join(lines).startswith("PASS")


def test_module_entry_point_prints_version():
    out = subprocess.run([sys.executable, "-m", "gptlab.cli", "--version"], capture_output=True,
                         text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("gpt-lab ")

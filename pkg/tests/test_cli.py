import csv
import io
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from collarkit import cli

ASINH1 = 0.88137358701954302523260932498


def call(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def records(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and " " not in line)


def checks(text):
    out = {}
    for line in text.splitlines():
        if line.startswith("check="):
            kv = dict(x.split("=", 1) for x in line.split())
            out[kv["check"]] = kv
    return out


def write_config(path, body):
    path.write_text(body, encoding="utf-8")
    return path


def test_collar_examples(capsys):
    code, out, _ = call(capsys, "collar", "--k", 1, "--length", 2)
    rec = records(out)
    assert code == 0
    assert float(rec["width"]) == pytest.approx(0.771937, abs=1e-6)
    assert float(rec["width_arccosh_coth"]) == pytest.approx(float(rec["width_arcsinh_cosech"]), abs=1e-9)
    assert float(rec["distance_bound"]) == pytest.approx(2 * 0.771936832905, abs=1e-9)
    assert {f"residual_{v}" for v in ("c", "c2", "c3", "c4")} <= rec.keys()
    _, out, _ = call(capsys, "collar", "--k", 1, "--length", 1.76275)
    assert float(records(out)["width"]) == pytest.approx(0.88137, abs=1e-5)


def test_collar_c4_threshold(capsys):
    x = 8 / 3 * ASINH1
    code, out, _ = call(capsys, "collar", "--variant", "c4", "--lgamma", repr(x), "--leta", repr(x))
    rec = records(out)
    assert code == 0 and rec["variant"] == "c4"
    assert abs(float(rec["residual"])) < 1e-12


def test_collar_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["collar", "--k", "abc", "--length", "2"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["collar", "--k", "-1", "--length", "2"])
    assert e.value.code == 2
    code, _, err = call(capsys, "collar", "--k", 1)
    assert code == 2 and "--length" in err


def test_collar_csv_and_flags_after_subcommand(capsys, tmp_path):
    code, _, _ = call(capsys, "collar", "--length", 2, "--out", tmp_path, "--csv", "collar.csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "collar.csv").read_text())))
    assert len(rows) == 1 and float(rows[0]["width"]) == pytest.approx(0.7719368329, abs=1e-9)


def test_triangle_solvers(capsys):
    code, out, _ = call(capsys, "triangle", "--solver", "opposite", "--b", repr(math.atanh(0.5)),
                        "--beta", repr(math.atan(0.5 / math.sinh(1.0))))
    assert code == 0 and float(records(out)["a"]) == pytest.approx(1.0, abs=1e-9)
    beta = math.atan(1.0 / math.sinh(1.0)) + 0.01
    _, out, _ = call(capsys, "triangle", "--solver", "leg-angle", "--a", 1, "--beta", repr(beta))
    rec = records(out)
    assert rec["open_ended"] == "true" and rec["b"] == "inf" and rec["alpha"] == "0"
    _, out, _ = call(capsys, "triangle", "--solver", "toponogov-a", "--a", 1, "--b", 1, "--c", 1)
    assert float(records(out)["gamma"]) == pytest.approx(0.918798, abs=1e-6)
    _, out, _ = call(capsys, "triangle", "--solver", "right", "--a", 1, "--b", 1)
    assert float(records(out)["c"]) == pytest.approx(1.513374, abs=1e-6)


def test_triangle_infeasible(capsys):
    code, _, err = call(capsys, "triangle", "--solver", "toponogov-a", "--a", 1, "--b", 1, "--c", 3)
    assert code == 2 and "triangle inequality" in err
    code, _, err = call(capsys, "triangle", "--solver", "legs", "--a", 1)
    assert code == 2 and "--a --b" in err


def test_flipflop_symmetric(capsys):
    code, out, err = call(capsys, "flipflop", "--preset", "symmetric")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["j", "s_j", "phi_j"]
    assert abs(float(rows[-1][2]) - math.pi / 2) < 1e-6
    s = [float(r[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(s, s[1:]))
    assert checks(err)["flipflop-symmetric"]["status"] == "pass"


def test_flipflop_presets_to_files(capsys, tmp_path):
    code, out, _ = call(capsys, "flipflop", "--preset", "divergent-rays", "--out", tmp_path)
    assert code == 0 and checks(out)["flipflop-divergent-rays-bounds"]["status"] == "pass"
    assert (tmp_path / "flipflop-divergent-rays.csv").read_text().startswith("j,s_j,phi_j\n")
    # asymptotic rays: perpendiculars shrink like j^(-1/2) and the angle never gets within 1e-6
    code, out, _ = call(capsys, "flipflop", "--preset", "parallel-rays", "--out", tmp_path, "--max-steps", 2000)
    c = checks(out)
    assert "relation=asymptotic" in out
    assert c["flipflop-parallel-rays-bounds"]["status"] == "pass"
    assert (code, c["flipflop-parallel-rays"]["status"]) == (1, "fail")


def test_flipflop_config_and_invalid_preset(capsys, tmp_path):
    cfg = write_config(tmp_path / "ff.ini", "[flipflop]\na_len = 2.0\nangle_q = 1.3\nangle_r = 1.3\nlabel = mine\n")
    code, out, _ = call(capsys, "flipflop", "--config", cfg, "--out", tmp_path)
    assert code == 0 and (tmp_path / "flipflop-mine.csv").exists()
    with pytest.raises(SystemExit) as e:
        cli.main(["flipflop", "--preset", "bogus"])
    assert e.value.code == 2
    code, _, _ = call(capsys, "flipflop")
    assert code == 2


SURFACE = "[experiment]\nn_r = 256\nn_theta = 128\n[metric]\nkind = preset\nname = {name}\n"


def test_surface_funnel_artifacts(capsys, tmp_path):
    cfg = write_config(tmp_path / "funnel.ini", SURFACE.format(name="funnel"))
    code, out, _ = call(capsys, "--config", cfg, "--out", tmp_path / "o", "surface")
    assert code == 0
    assert "d_star_is_r_max=true" in out
    o = tmp_path / "o"
    assert (o / "report.txt").read_text() == out
    head = (o / "curves.csv").read_text().splitlines()[0]
    assert head == "level,vertexIndex,r,theta,segmentLength"
    root = ET.parse(o / "sweep.svg").getroot()
    assert root.tag.endswith("svg") and len(root) > 2
    pgm = (o / "arms.pgm").read_text().splitlines()
    assert pgm[0] == "P2" and pgm[2] == "128 256"
    assert checks(out)["collar-width"]["status"] == "pass"


def test_surface_cactus_single_arm(capsys, tmp_path):
    cfg = write_config(tmp_path / "c.ini", SURFACE.format(name="cactus"))
    _, out, _ = call(capsys, "surface", "--config", cfg, "--out", tmp_path)
    assert "arms=1 " in out
    arm = [line for line in out.splitlines() if line.startswith("arm=1 ")]
    assert len(arm) == 1 and "d_a=" in arm[0]
    assert checks(out)["thin-cylinder"]["status"] == "inapplicable"


def test_surface_thin_preset(capsys, tmp_path):
    cfg = write_config(tmp_path / "t.ini", SURFACE.format(name="thin"))
    _, out, _ = call(capsys, "surface", "--config", cfg, "--out", tmp_path)
    assert checks(out)["thin-cylinder"]["status"] == "pass"
    assert "thin=true" in out


def test_surface_custom_metric(capsys, tmp_path):
    body = ("[experiment]\nn_r = 128\nn_theta = 64\nlipschitz_levels = 1.0\n"
            "[metric]\nkind = bump\nk = 0.6\nlength = 2\nbumps = 1.2 0.5 1.0 0.5 0.3 0.2; 2.0 0.6 0.0 0.05\n")
    cfg = write_config(tmp_path / "b.ini", body)
    code, out, _ = call(capsys, "surface", "--config", cfg, "--out", tmp_path)
    assert code == 0 and "metric=bump" in out


@pytest.mark.parametrize("body,msg", [
    ("[metric]\nkind = sphere\n", "kind"),
    ("[metric]\nkind = constant\nlength = 2\n", "missing key 'k'"),
    ("[metric]\nkind = constant\nk = one\nlength = 2\n", "not a valid"),
    ("[metric]\nkind = preset\nname = funnel\ncolour = red\n", "unknown keys"),
    ("[experiment]\nn_r = 10\n[metric]\nkind = preset\nname = funnel\n", "at least 64"),
    ("[results]\nx = 1\n", "unknown section"),
    ("not an ini file\n", "malformed"),
    ("[metric]\nkind = cactus\nlength = 3\narms = 1 2 3\n", "arms"),
])
def test_config_errors_exit_2(capsys, tmp_path, body, msg):
    cfg = write_config(tmp_path / "bad.ini", body)
    code, out, err = call(capsys, "surface", "--config", cfg, "--out", tmp_path / "o")
    assert code == 2 and msg in err and out == ""
    assert not (tmp_path / "o").exists()


def test_missing_config_and_bad_tol(capsys, tmp_path):
    code, _, err = call(capsys, "verify", "--config", tmp_path / "nope.ini")
    assert code == 2 and "cannot read" in err
    code, _, _ = call(capsys, "verify", "--tol", 0, "--only", "collar-identity")
    assert code == 2


def test_internal_error_writes_trace(capsys, tmp_path, monkeypatch):
    def boom(args, cfg):
        raise RuntimeError("diagnostic went wrong")

    monkeypatch.setitem(cli.COMMANDS, "collar", boom)
    code, _, err = call(capsys, "collar", "--length", 2, "--out", tmp_path)
    assert code == 3 and "trace" in err
    assert "diagnostic went wrong" in (tmp_path / cli.TRACE_FILE).read_text()


def test_verify_only_and_determinism(capsys, tmp_path):
    runs = []
    for d in ("a", "b"):
        code, out, _ = call(capsys, "verify", "--only", "collar-identity", "corollary-b", "--seed", 7,
                            "--out", tmp_path / d)
        assert code == 0
        runs.append(((tmp_path / d / "verify-report.txt").read_bytes(), out))
    assert runs[0] == runs[1]
    lines = runs[0][1].splitlines()
    assert lines[0].startswith("check=collar-identity status=pass value=")
    assert all(line.count("=") == 4 for line in lines)


def test_verify_unknown_check(capsys):
    code, _, err = call(capsys, "verify", "--only", "nonsense")
    assert code == 2 and "collar-identity" in err


def test_console_entry_point_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "collarkit.cli", "collar", "--length", "2"], capture_output=True)
    assert ok.returncode == 0 and b"width=0.7719368329" in ok.stdout
    bad = subprocess.run([sys.executable, "-m", "collarkit.cli", "collar", "--length", "x"], capture_output=True)
    assert bad.returncode == 2

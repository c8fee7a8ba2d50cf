import filecmp
import subprocess
import sys

import pytest

from circapprox.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_kwise_exact(capsys):
    code, out, _ = run(capsys, "verify-kwise", "--gen", "quad", "--k", 2)
    assert code == 0
    assert "0 1 2 3: EXACT UNIFORM" in out
    assert "failures = 0" in out


def test_verify_kwise_linear(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-kwise", "--gen", "linear", "--n", 4, "--quads", 5,
                       "--budget", 20000, "--out", tmp_path)
    assert code == 0 and "WITHIN 5 SIGMA" in out
    assert (tmp_path / "generator.txt").read_text().startswith("KWGEN linear n=4")


def test_anticoncentration(capsys):
    code, out, _ = run(capsys, "anticoncentration", "--k", 2, "--vectors", 3)
    assert code == 0 and out.count("fraction =") == 4


def test_enumerate_and_check(capsys, tmp_path):
    path = tmp_path / "min.txt"
    code, out, _ = run(capsys, "enumerate", "--n", 3, "--s", 2, "--out", path)
    assert code == 0 and "size 0:" in out
    code, out, _ = run(capsys, "enumerate", "--check", "--out", path)
    assert code == 0 and "FAIL" not in out
    lines = path.read_text().splitlines()
    lines[-1] = lines[-1].rsplit(" ", 1)[0] + " 9"
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "enumerate", "--check", "--out", path)
    assert code == 3 and "FAIL sizes recompute" in out


def test_enumerate_guard(capsys):
    code, _, err = run(capsys, "enumerate", "--n", 5, "--s", 1)
    assert code == 4 and "guard" in err


def test_gen_hard_and_check(capsys, tmp_path):
    code, out, _ = run(capsys, "gen-hard", "--n", 16, "--s", 64, "--delta", 0.25, "--out", tmp_path)
    assert code == 0 and "certificate_valid = 1" in out
    code, out, _ = run(capsys, "gen-hard", "--check", "--out", tmp_path)
    assert code == 0 and out.count("PASS") == 2
    cert = tmp_path / "cert.txt"
    cert.write_text(cert.read_text().replace("s = 64", "s = 65"))
    code, out, _ = run(capsys, "gen-hard", "--check", "--out", tmp_path)
    assert code == 3 and "FAIL certificate recomputes" in out


def test_gen_hard_invalid_certificate(capsys, tmp_path):
    code, _, err = run(capsys, "gen-hard", "--n", 8, "--s", 64, "--delta", 0.25, "--out", tmp_path)
    assert code == 2 and "valid certificate" in err


def test_approximate_bad_inputs(capsys, tmp_path):
    assert run(capsys, "approximate", "--n", 14, "--gamma", 0.1, "--out", tmp_path)[0] == 2
    assert run(capsys, "approximate", "--tt", tmp_path / "missing.tt", "--out", tmp_path)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["approximate", "--gen", "nope"])
    assert exc.value.code == 2


@pytest.mark.parametrize("dist", ["uniform", "smooth", "adversarial"])
def test_approximate_and_check(capsys, tmp_path, dist):
    args = ["approximate", "--n", 16, "--gamma", 0.12, "--ell", 2, "--dist", dist]
    code, out, _ = run(capsys, *args, "--out", tmp_path / "a")
    assert code == 0 and "achieved_agreement" in out
    code, out, _ = run(capsys, "approximate", "--check", "--out", tmp_path / "a")
    assert code == 0 and "FAIL" not in out
    code, _, _ = run(capsys, *args, "--out", tmp_path / "b")
    assert code == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert not mismatch and not errors


def test_approximate_check_detects_tampering(capsys, tmp_path):
    run(capsys, "approximate", "--n", 16, "--gamma", 0.12, "--ell", 2, "--out", tmp_path)
    rep = tmp_path / "report.txt"
    text = rep.read_text()
    line = next(ln for ln in text.splitlines() if ln.startswith("achieved_agreement"))
    rep.write_text(text.replace(line, "achieved_agreement = 0.99"))
    code, out, _ = run(capsys, "approximate", "--check", "--out", tmp_path)
    assert code == 3 and "FAIL agreement matches report" in out


def test_approximate_target_missed(capsys, tmp_path):
    code, _, err = run(capsys, "approximate", "--n", 12, "--gamma", 0.45, "--ell", 6, "--budget", 4,
                       "--out", tmp_path)
    assert code == 3 and "below" in err


@pytest.mark.parametrize("dist", ["uniform", "smooth", "adversarial"])
def test_demo_small_and_check(capsys, tmp_path, dist):
    extra = ["--ell", 2] if dist == "adversarial" else []
    code, out, _ = run(capsys, "demo-tightness", "--n", 16, "--s", 64, "--delta", 0.25, "--gamma", 0.3,
                       "--dist", dist, "--out", tmp_path, *extra)
    assert code == 0 and "certificate_valid = 1" in out
    code, out, _ = run(capsys, "demo-tightness", "--check", "--out", tmp_path)
    assert code == 0 and out.count("PASS") == 6


def test_size_sweep(capsys, tmp_path):
    code, out, _ = run(capsys, "size-sweep", "--ns", 12, "--gammas", "0.2", "--clamped-gamma", 0.45,
                       "--budget", 4, "--out", tmp_path / "s.txt")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 2 and all(r.split()[4] == r.split()[-1] for r in rows)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "circapprox", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "demo-tightness" in res.stdout


def test_demo_defaults_reproducible(capsys, tmp_path):
    code, out, _ = run(capsys, "demo-tightness", "--out", tmp_path / "a")
    assert code == 0
    rep = dict(ln.split(" = ", 1) for ln in out.splitlines())
    assert (rep["demo_n"], rep["ell"], rep["certificate_valid"]) == ("22", "2", "1")
    assert float(rep["agreement_full"]) >= 0.52
    code, out, _ = run(capsys, "demo-tightness", "--check", "--out", tmp_path / "a")
    assert code == 0 and "FAIL" not in out
    assert run(capsys, "demo-tightness", "--out", tmp_path / "b")[0] == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    assert not mismatch and not errors

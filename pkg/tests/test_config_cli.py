import csv
import json
import os

import pytest

from heisen import cli
from heisen.config import ConfigError, RunConfig, load_config, parse_config


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ----------------------------------------------------------------- config

def test_defaults():
    cfg = RunConfig()
    assert cfg.seed == 42
    assert cfg.get("grid", "n_lam") == 200
    assert load_config(None).values == cfg.values


def test_sections_and_top_level():
    cfg = parse_config("seed = 3   # trailing comment\nlam_min = 0.01\n[evolve]\nt_list = [0, 1.5]\n")
    assert cfg.seed == 3
    assert cfg.get("grid", "lam_min") == 0.01
    assert cfg.get("evolve", "t_list") == [0.0, 1.5]
    assert cfg.grid().lam_min == 0.01


@pytest.mark.parametrize("text,needle", [
    ("bogus = 1\n", "bogus"),
    ("[grid]\nwidth = 3\n", "width"),
    ("[nowhere]\n", "nowhere"),
    ("nu = 2\n", "ambiguous"),
    ("[grid]\nn_lam = x\n", "n_lam"),
    ("[grid]\nlam_min = 5\nlam_max = 1\n", "lam_min"),
    ("[evolve]\ninitial = flat\n", "initial"),
    ("[grid\n", "malformed"),
    ("seed\n", "key = value"),
])
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "absent.cfg"))


# -------------------------------------------------------------------- cli

def test_unknown_key_exit_2(tmp_path, capsys):
    rc = cli.main(["verify", "--config", write(tmp_path, "[grid]\nfrobnicate = 1\n"),
                   "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "frobnicate" in capsys.readouterr().err


def test_negative_seed_exit_2(tmp_path):
    assert cli.main(["algebra", "S", "--seed", "-1", "--out", str(tmp_path)]) == 2


def test_unknown_symbol_exit_2(tmp_path):
    cfg = write(tmp_path, "[symbol]\nsymbol = wobble(t=1)\n")
    assert cli.main(["kernel", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_kernel_heat_profile(tmp_path, capsys):
    cfg = write(tmp_path, "[grid]\nlam_min = 0.01\nlam_max = 100\nn_lam = 120\nn_max = 40\n"
                          "[kernel]\nn_rho = 9\nn_s = 11\n")
    out = tmp_path / "o"
    assert cli.main(["kernel", "--config", cfg, "--out", str(out)]) == 0
    tab = rows(out / "kernel_profile.csv")
    assert tab[0] == cli.PROFILE_HEADER
    body = [[float(v) for v in r] for r in tab[1:]]
    assert len(body) == 9 * 11
    at0 = [r for r in body if r[1] == 0.0]
    assert len(at0) == 9
    scale = max(abs(r[2]) for r in body)
    assert all(abs(r[3]) <= 1e-12 * scale for r in at0)
    info = json.loads((out / "kernel.json").read_text())
    assert info["admissible"] is True
    assert info["l2_norm"] == pytest.approx(0.125, rel=1e-12)
    assert "admissible = true" in capsys.readouterr().out
    assert rows(out / "kernel_coefficients.csv")[0][0] == "n"


def test_kernel_identity_inadmissible(tmp_path, capsys):
    cfg = write(tmp_path, "[symbol]\nsymbol = identity\n[grid]\nn_lam = 40\nn_max = 10\n")
    out = tmp_path / "o"
    assert cli.main(["kernel", "--config", cfg, "--out", str(out)]) == 0
    info = json.loads((out / "kernel.json").read_text())
    assert info["l2_norm"] == "inf" and info["admissible"] is False
    text = capsys.readouterr().out
    assert "l2_norm = inf" in text and "admissible = false" in text


def test_evolve_t0_equals_input(tmp_path):
    cfg = write(tmp_path, "[evolve]\nt_list = [0]\n[grid]\nn_lam = 30\nn_max = 10\n")
    out = tmp_path / "o"
    assert cli.main(["evolve", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "evolve_000.csv").read_bytes() == (out / "input.csv").read_bytes()
    log = rows(out / "conservation.csv")
    assert log[0] == ["t", "norm", "ratio"] and float(log[1][2]) == 1.0


def test_evolve_gaussian_and_conservation(tmp_path):
    cfg = write(tmp_path, "[evolve]\ninitial = gaussian\nnu = 0.5\nt_list = 1, 10, 100\n"
                          "[grid]\nn_lam = 40\nn_max = 20\n")
    out = tmp_path / "o"
    assert cli.main(["evolve", "--config", cfg, "--out", str(out)]) == 0
    ratios = [float(r[2]) for r in rows(out / "conservation.csv")[1:]]
    assert len(ratios) == 3 and all(abs(r - 1) <= 1e-12 for r in ratios)


def test_evolve_negative_time_exit_2(tmp_path):
    cfg = write(tmp_path, "[evolve]\nt_list = [-1]\n")
    assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_algebra_commutator(capsys, tmp_path):
    assert cli.main(["algebra", "X1*Y1 - Y1*X1", "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "-S"


def test_algebra_from_config_and_parse_error(tmp_path, capsys):
    cfg = write(tmp_path, "[algebra]\nexpr = Y1*X1\n")
    assert cli.main(["algebra", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "X1*Y1 + S"
    assert cli.main(["algebra", "X1*(Y1", "--out", str(tmp_path)]) == 2


def test_probe_miyachi_p2(tmp_path):
    out = tmp_path / "o"
    assert cli.main(["probe", "--out", str(out)]) == 0
    rep = json.loads((out / "probe.json").read_text())
    assert rep["pass"] is True
    assert set(rep) == {"name", "metrics", "exponent_fits", "pass"}


@pytest.mark.parametrize("body", ["probe = lp\nN = 2\n", "probe = sobolev\n",
                                  "probe = lemma25\nword = 3\n"])
def test_probe_variants(tmp_path, body):
    cfg = write(tmp_path, "[grid]\nlam_min = 0.01\nlam_max = 100\nn_lam = 40\nn_max = 30\n[probe]\n" + body)
    assert cli.main(["probe", "--config", cfg, "--out", str(tmp_path / "o")]) == 0


def test_probe_unknown_exit_2(tmp_path):
    cfg = write(tmp_path, "[probe]\nprobe = nothing\n")
    assert cli.main(["probe", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_unexpected_positional_exit_2(tmp_path):
    assert cli.main(["probe", "extra", "--out", str(tmp_path)]) == 2


def test_deterministic_outputs(tmp_path):
    cfg = write(tmp_path, "[grid]\nn_lam = 30\nn_max = 12\n[evolve]\nt_list = 0.5, 2\n"
                          "[kernel]\nn_rho = 5\nn_s = 5\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert cli.main(["evolve", "--config", cfg, "--out", str(out), "--seed", "5"]) == 0
        assert cli.main(["kernel", "--config", cfg, "--out", str(out)]) == 0
        outs.append({f: (out / f).read_bytes() for f in sorted(os.listdir(out))})
    assert outs[0] == outs[1]
    out = tmp_path / "o2"
    cli.main(["evolve", "--config", cfg, "--out", str(out), "--seed", "6"])
    assert (out / "input.csv").read_bytes() != outs[0]["input.csv"]


def test_write_atomic(tmp_path):
    p = tmp_path / "sub" / "f.txt"
    cli.write_atomic(str(p), "a")
    cli.write_atomic(str(p), "b")
    assert p.read_text() == "b"
    assert os.listdir(p.parent) == ["f.txt"]


def test_verify_default_and_under_resolved(tmp_path, capsys):
    out = tmp_path / "o"
    assert cli.main(["verify", "--out", str(out)]) == 0
    rep = json.loads((out / "verify.json").read_text())
    assert len(rep["suites"]) >= 12 and rep["pass"] is True and rep["seed"] == 42
    capsys.readouterr()
    # one Laguerre row cannot hold a short-time heat kernel
    cfg = write(tmp_path, "[grid]\nn_max = 1\n[symbol]\nsymbol = heat(t=0.05)\n")
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "o2")]) == 1
    text = capsys.readouterr().out
    assert "FAIL  biradial.kernel_tail" in text and "tail_fraction" in text

import json
import subprocess
import sys

import pytest

from ladder_synth import io as lio
from ladder_synth.cli import main, parse_angle, parse_noise
from ladder_synth.errors import InputError

PSI03 = {"n_max": 3, "amplitudes": [{"spin": "down", "n": 0, "re": 1.0}, {"spin": "down", "n": 3, "re": 1.0}]}
PSI_T = {"n_max": 2, "amplitudes": [{"spin": "down", "n": 0, "re": 0.64}, {"spin": "up", "n": 2, "re": 0.77}]}


@pytest.fixture
def files(tmp_path):
    (tmp_path / "psi03.json").write_text(json.dumps(PSI03))
    (tmp_path / "psi_t.json").write_text(json.dumps(PSI_T))
    return tmp_path


def compile_psi03(files, *extra):
    out = files / "prog.json"
    rc = main(["compile", str(files / "psi03.json"), "--calibrate-ratio", "0.60", "3", "0",
               "--out", str(out), *extra])
    assert rc == 0
    return out


def test_parse_angle():
    assert parse_angle("pi") == pytest.approx(3.141592653589793)
    assert parse_angle("0.5pi") == pytest.approx(1.5707963267948966)
    assert parse_angle("pi/4") == pytest.approx(0.7853981633974483)
    assert parse_angle("1.25") == 1.25
    with pytest.raises(InputError):
        parse_angle("half")


def test_parse_noise():
    n = parse_noise(["amp_jitter=0.01,seed=7", "decay_osc=none"], decay_osc=9.0)
    assert (n.amp_jitter, n.seed, n.decay_osc) == (0.01, 7, None)
    with pytest.raises(InputError):
        parse_noise(["colour=blue"])


def test_compile(files, capsys):
    out = compile_psi03(files)
    text = capsys.readouterr().out
    assert "effective pulses: 6" in text
    prog = lio.parse_program(out)
    assert prog.direction == "generation" and len(prog.effective) == 6


def test_compile_clearing(files):
    out = compile_psi03(files, "--direction", "clearing")
    assert lio.parse_program(out).direction == "clearing"


def test_simulate_writes_trajectory(files, capsys):
    prog = compile_psi03(files)
    traj = files / "traj.csv"
    assert main(["simulate", str(prog), "--trajectory", str(traj)]) == 0
    text = capsys.readouterr().out
    assert "steps: 7" in text and "final fidelity: 1.000000000000" in text
    data = lio.read_trajectory_csv(traj)
    assert len(data) == 7
    assert data[7][("down", 0)] == pytest.approx(0.5, abs=1e-11)


def test_simulate_noise_is_seeded(files, capsys):
    prog = compile_psi03(files)
    capsys.readouterr()
    args = ["simulate", str(prog), "--noise", "amp_jitter=0.02", "phase_jitter=0.05", "seed=11"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert "final fidelity: 1.0000" not in first


def test_tomo(files, capsys):
    prog = compile_psi03(files)
    out = files / "tomo"
    assert main(["tomo", str(prog), "--out-dir", str(out), "--seed", "3"]) == 0
    text = capsys.readouterr().out
    assert "target-state probability" in text
    for name in ("rabi_dn+0.csv", "rabi_dn+1.csv", "rabi_dn-1.csv", "fit_dn+0.json", "populations.csv"):
        assert (out / name).exists()
    table = lio.read_population_csv(out / "populations.csv")
    assert table.total() == pytest.approx(1.0, abs=1e-9)


def test_tomo_single_shot_still_normalized(files):
    out = files / "tomo1"
    rc = main(["tomo", str(files / "psi03.json"), "--shots", "1", "--out-dir", str(out)])
    assert rc in (0, 3)
    if rc == 0:
        assert lio.read_population_csv(out / "populations.csv").total() == pytest.approx(1.0, abs=1e-9)


def test_fringe(files, capsys):
    assert main(["fringe", str(files / "psi_t.json"), "--out", str(files / "f.csv")]) == 0
    text = capsys.readouterr().out
    assert "fidelity: 1.000000000000" in text
    assert (files / "f.csv").read_text().startswith("phase,p_down,shots")


def test_fringe_mixture(files, capsys):
    assert main(["fringe", str(files / "psi_t.json"), "--mixture"]) == 0
    text = capsys.readouterr().out
    assert "contrast: 0.000000" in text


def test_reproduce(tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["reproduce", "--out-dir", str(out)]) == 0
    assert "| Omega_34 / Omega_01 | 0.6000 | 0.60 |" in capsys.readouterr().out
    summary = json.loads((out / "summary.json").read_text())
    assert summary["effective generation pulses"] == "6"
    assert (out / "psi03_trajectory.csv").exists()


class TestExitCodes:
    def test_missing_file(self, tmp_path, capsys):
        assert main(["compile", str(tmp_path / "none.json"), "--eta", "0.7"]) == 2
        assert "error" in capsys.readouterr().err

    def test_index_out_of_range(self, files):
        bad = dict(PSI03, n_max=2)
        (files / "bad.json").write_text(json.dumps(bad))
        assert main(["compile", str(files / "bad.json"), "--eta", "0.7"]) == 2

    def test_digest_mismatch(self, files):
        prog = compile_psi03(files)
        doc = json.loads(prog.read_text())
        doc["target"]["amplitudes"][0]["re"] *= -1
        prog.write_text(json.dumps(doc))
        assert main(["simulate", str(prog)]) == 2
        assert main(["simulate", str(prog), "--force"]) == 0

    def test_no_root(self, files, capsys):
        rc = main(["compile", str(files / "psi03.json"), "--calibrate-ratio", "10", "3", "0"])
        assert rc == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_unphysical_coherence(self, files):
        assert main(["fringe", str(files / "psi_t.json"), "--coherence", "0.9"]) == 3

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["compile"])
        assert info.value.code == 2


def test_console_script_module(files):
    res = subprocess.run([sys.executable, "-m", "ladder_synth.cli", "compile", str(files / "psi03.json"),
                          "--eta", "0.7548016912767059"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "effective pulses: 6" in res.stdout


def test_ground_state_compiles_empty(tmp_path, capsys):
    (tmp_path / "g.json").write_text(json.dumps({"n_max": 2, "amplitudes": [{"spin": "down", "n": 0, "re": 1}]}))
    assert main(["compile", str(tmp_path / "g.json"), "--eta", "0.7", "--out", str(tmp_path / "p.json")]) == 0
    assert "effective pulses: 0" in capsys.readouterr().out


def test_clearing_program_returns_to_ground(files, capsys):
    prog = compile_psi03(files, "--direction", "clearing")
    traj = files / "clear.csv"
    assert main(["simulate", str(prog), "--trajectory", str(traj)]) == 0
    assert "final fidelity: 1.000000000000" in capsys.readouterr().out
    last = lio.read_trajectory_csv(traj)[7]
    assert last[("down", 0)] == pytest.approx(1.0, abs=1e-11)

import json
import math

import numpy as np
import pytest

from ladder_synth import io as lio
from ladder_synth.compiler import compile_clearing, compile_generation
from ladder_synth.errors import DigestMismatch, InputError
from ladder_synth.simulate import NoiseModel, run_program, simulate_fringe_scan, simulate_rabi_scan
from ladder_synth.state import JointState, ground_state
from ladder_synth.tomography import fit_rabi, rabi_tomography, scan_times


def random_target(seed):
    rng = np.random.default_rng(seed)
    n_max = int(rng.integers(0, 6))
    amps = rng.normal(size=(2, n_max + 1)) + 1j * rng.normal(size=(2, n_max + 1))
    amps[rng.random(amps.shape) < 0.4] = 0
    if not amps.any():
        amps[0, 0] = 1
    return JointState(amps / np.linalg.norm(amps))


def test_target_round_trip(psi_t):
    doc = lio.emit_target(psi_t)
    back = lio.parse_target(doc)
    np.testing.assert_array_equal(back.amps, psi_t.amps)


def test_target_from_file(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"n_max": 3, "amplitudes": [
        {"spin": "down", "n": 0, "re": 1.0}, {"spin": "down", "n": 3, "re": 1.0}]}))
    s = lio.parse_target(path)
    assert abs(s.amplitude("down", 3)) ** 2 == pytest.approx(0.5)


def test_duplicate_entry():
    doc = {"n_max": 1, "amplitudes": [{"spin": "up", "n": 1, "re": 1}, {"spin": "up", "n": 1, "re": 2}]}
    with pytest.raises(InputError, match="duplicate"):
        lio.parse_target(doc)


@pytest.mark.parametrize("doc", [
    {"amplitudes": []},
    {"n_max": 2, "amplitudes": [{"spin": "sideways", "n": 0, "re": 1}]},
    {"n_max": 2, "amplitudes": [{"spin": "up", "n": 3, "re": 1}]},
    "{not json",
])
def test_bad_target(doc):
    with pytest.raises(InputError):
        lio.parse_target(doc)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        lio.parse_target(tmp_path / "nope.json")


def test_program_round_trip_many(model):
    for seed in range(100):
        target = random_target(seed)
        prog = compile_generation(target, model) if seed % 2 else compile_clearing(target, model)
        back = lio.parse_program(lio.emit_program(prog))
        assert back == prog
        assert back.model == model
        np.testing.assert_array_equal(back.target.amps, target.amps)


def test_parsed_program_replays(psi03, model):
    prog = lio.parse_program(lio.emit_program(compile_generation(psi03, model)))
    final = run_program(ground_state(3), prog, prog.model)[-1]
    np.testing.assert_allclose(np.abs(final.amps) ** 2, np.abs(psi03.amps) ** 2, atol=1e-12)


def test_digest_mismatch(psi03, model):
    doc = lio.program_to_dict(compile_generation(psi03, model))
    # a sign flip keeps the embedded target normalized but changes its digest
    doc["target"]["amplitudes"][0]["re"] *= -1
    with pytest.raises(DigestMismatch):
        lio.parse_program(json.dumps(doc))
    assert lio.parse_program(doc, force=True).target is not None


def test_malformed_program():
    with pytest.raises(InputError):
        lio.parse_program({"pulses": [], "direction": "sideways"})


def test_trajectory_csv(tmp_path, psi03, model):
    traj = run_program(ground_state(3), compile_generation(psi03, model), model)
    path = tmp_path / "traj.csv"
    text = lio.trajectory_csv(traj, path)
    assert text.splitlines()[0] == "step,spin,n,re,im,prob"
    data = lio.read_trajectory_csv(path)
    assert sorted(data) == list(range(1, 8))
    for step in data.values():
        assert len(step) == 8
        assert sum(step.values()) == pytest.approx(1.0, abs=1e-9)
    assert data[7][("down", 3)] == pytest.approx(0.5, abs=1e-11)


def test_rabi_and_fringe_csv(tmp_path, psi03, psi_t, model):
    d = simulate_rabi_scan(psi03, 1, scan_times(1, model), NoiseModel(seed=1), model, shots=600)
    lio.rabi_csv(d, tmp_path / "r.csv")
    back = lio.read_rabi_csv(tmp_path / "r.csv", 1)
    assert back.shots == 600
    np.testing.assert_allclose(back.p_down, d.p_down, rtol=1e-11)
    np.testing.assert_allclose(back.times, d.times, rtol=1e-11)
    # the file alone is enough to refit
    assert fit_rabi(back, model, 4).omega_base == pytest.approx(fit_rabi(d, model, 4).omega_base, rel=1e-8)

    phases = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    f = simulate_fringe_scan(psi_t, math.pi / 2, phases, None, model)
    lio.fringe_csv(f, tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "phase,p_down,shots"
    np.testing.assert_allclose(lio.read_fringe_csv(tmp_path / "f.csv").p_down, f.p_down, rtol=1e-11)


def test_population_csv(tmp_path, psi03, model):
    table = rabi_tomography(psi03, model, noise=NoiseModel(decay_osc=9.0, seed=3)).table
    lio.population_csv(table, tmp_path / "p.csv")
    back = lio.read_population_csv(tmp_path / "p.csv")
    np.testing.assert_allclose(back.p, table.p, rtol=1e-11, atol=1e-15)
    np.testing.assert_allclose(back.sigma, table.sigma, rtol=1e-11)


def test_fit_report_is_json(psi03, model):
    d = simulate_rabi_scan(psi03, 0, scan_times(0, model), None, model, shots=0)
    rep = lio.fit_report(fit_rabi(d, model, 4))
    assert json.loads(json.dumps(rep))["delta_n"] == 0
    assert len(rep["components"]) == 4

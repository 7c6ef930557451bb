import cmath
import math

import numpy as np
import pytest

from ladder_synth.compiler import (
    CLEARING,
    GENERATION,
    NothingToClear,
    compile_clearing,
    compile_generation,
    invert_program,
    solve_clear,
    solve_clear_up,
)
from ladder_synth.coupling import rotation_matrix
from ladder_synth.simulate import run_program
from ladder_synth.state import DOWN, UP, JointState, basis_state, fidelity_pure, ground_state, make_state, populations

# clearing areas of Psi03 at eta(0.60), in units of pi (frozen from a reference run)
PSI03_CLEARING = [(1, 3, 1.0), (0, 2, 1.0), (1, 2, 1.0), (0, 1, 0.7906), (1, 1, 0.8559), (0, 0, 0.5562)]


def random_target(rng, n_max):
    amps = np.zeros((2, n_max + 1), dtype=complex)
    k = rng.integers(1, 2 * (n_max + 1) + 1)
    cells = rng.choice(2 * (n_max + 1), size=k, replace=False)
    for c in cells:
        amps[c // (n_max + 1), c % (n_max + 1)] = rng.normal() + 1j * rng.normal()
    return JointState(amps / np.linalg.norm(amps))


def test_solve_clear_random_pairs():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        theta, phi = solve_clear(a, b)
        out = rotation_matrix(theta, phi) @ np.array([a, b])
        assert abs(out[0]) < 1e-12
        assert abs(out[1]) == pytest.approx(math.hypot(abs(a), abs(b)), rel=1e-12)
        assert 0 <= phi < 2 * math.pi
        theta, phi = solve_clear_up(a, b)
        assert abs((rotation_matrix(theta, phi) @ np.array([a, b]))[1]) < 1e-12


def test_solve_clear_edge_cases():
    assert solve_clear(0j, 1 + 0j) == (0.0, 0.0)
    theta, _ = solve_clear(1j, 0j)
    assert theta == pytest.approx(math.pi)
    with pytest.raises(NothingToClear):
        solve_clear(0j, 0j)


class TestPsi03:
    def test_clearing_structure(self, psi03, model):
        prog = compile_clearing(psi03, model)
        assert prog.direction == CLEARING
        assert len(prog) == 6 and len(prog.effective) == 6
        for p, (dn, ref, area) in zip(prog.pulses, PSI03_CLEARING):
            assert (p.delta_n, p.ref_pair) == (dn, ref)
            assert p.area / math.pi == pytest.approx(area, abs=1e-4)
            assert p.phase == pytest.approx(0.0, abs=1e-12)

    def test_generation_alternates(self, psi03, model):
        prog = compile_generation(psi03, model)
        kinds = [p.kind for p in prog.effective]
        assert kinds == ["carrier", "sideband"] * 3
        assert all(p.phase == pytest.approx(math.pi) for p in prog.pulses)

    def test_generation_reaches_target(self, psi03, model):
        prog = compile_generation(psi03, model)
        traj = run_program(ground_state(3), prog, model)
        assert len(traj) == 7
        p = populations(traj[-1])
        assert p["down", 0] == pytest.approx(0.5, abs=1e-12)
        assert p["down", 3] == pytest.approx(0.5, abs=1e-12)

    def test_up_states_visited(self, psi03, model):
        traj = run_program(ground_state(3), compile_generation(psi03, model), model)
        up = max(populations(s).p[UP].max() for s in traj[1:-1])
        assert up > 0.5


def test_psi_t_prefix_is_five_pulses(psi_t, model):
    prog = compile_generation(psi_t, model)
    assert len(prog.effective) == 5
    final = run_program(ground_state(2), prog, model)[-1]
    assert fidelity_pure(final, psi_t) == pytest.approx(1.0, abs=1e-12)


def test_psi03_first_five_pulses(psi03, model):
    prog = compile_generation(psi03, model)
    s = run_program(ground_state(3), prog.truncated(5), model)[-1]
    p = populations(s)
    assert p["down", 0] + p["up", 2] == pytest.approx(1.0, abs=1e-12)


def test_invert_is_involution(psi03, model):
    prog = compile_clearing(psi03, model)
    back = invert_program(invert_program(prog))
    assert back.direction == CLEARING
    for p, q in zip(prog.pulses, back.pulses):
        assert p.delta_n == q.delta_n and p.ref_pair == q.ref_pair and p.area == q.area
        assert cmath.exp(1j * p.phase) == pytest.approx(cmath.exp(1j * q.phase), abs=1e-14)


def test_ground_state_compiles_to_empty(model):
    prog = compile_generation(ground_state(2), model)
    assert len(prog) == 0


def test_single_up_ground(model):
    prog = compile_generation(basis_state(0, UP, 0), model)
    assert len(prog.effective) == 1
    (p,) = prog.effective
    assert p.kind == "carrier" and p.area == pytest.approx(math.pi)


def test_global_phase_only_changes_phases(model):
    s = make_state(2, [("down", 1, 1), ("up", 2, 1j)])
    rotated = JointState(s.amps * cmath.exp(0.4j))
    a = compile_generation(s, model)
    b = compile_generation(rotated, model)
    assert [p.area for p in a.pulses] == pytest.approx([p.area for p in b.pulses], abs=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_random_round_trip(seed, model):
    rng = np.random.default_rng(seed)
    target = random_target(rng, int(rng.integers(0, 7)))
    prog = compile_generation(target, model)
    assert prog.direction == GENERATION
    assert len(prog) <= 2 * target.highest_level() + 1
    final = run_program(ground_state(target.n_max), prog, model)[-1]
    assert fidelity_pure(final, target) >= 1 - 1e-9
    # the clearing program drives the target back down
    clear = compile_clearing(target, model)
    cleared = run_program(target, clear, model)[-1]
    assert fidelity_pure(cleared, ground_state(target.n_max)) >= 1 - 1e-9

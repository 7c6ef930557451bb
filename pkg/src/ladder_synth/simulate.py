"""Exact pulse evolution and synthetic measurement records.

Scans use the *analysis* labelling of transitions, ``|down, n> <-> |up, n +
delta_n>``, which is the opposite sign to :class:`~ladder_synth.coupling.Pulse`
(``|down, n> <-> |up, n - delta_n>``).  A blue-sideband scan is therefore
``delta_n=+1`` here and ``Pulse(delta_n=-1, ...)`` at the pulse level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coupling import CouplingModel, Pulse, coupled_pairs, pair_rate, pair_rotations, rabi_rate
from .errors import DigestMismatch, InputError
from .state import DOWN, UP, JointState, ground_state


@dataclass(frozen=True)
class NoiseModel:
    """Imperfections for synthetic data.

    decay_osc
        1/e time of the oscillation envelope, in periods of the scan's
        reference transition (lowest pair).  ``None`` disables decay.
    prep_error
        weight of the ground-state signal mixed into every point.
    amp_jitter, phase_jitter
        per-pulse relative area error and absolute phase error (rad), Gaussian.
    per_component_decay
        give every pair its own envelope of ``decay_osc`` of *its* periods.
    """

    decay_osc: float | None = None
    prep_error: float = 0.001
    amp_jitter: float = 0.0
    phase_jitter: float = 0.0
    seed: int = 0
    per_component_decay: bool = False

    def __post_init__(self):
        if self.decay_osc is not None and not self.decay_osc > 0:
            raise InputError("decay_osc must be positive or None")
        if not 0 <= self.prep_error < 1:
            raise InputError("prep_error must lie in [0, 1)")
        if self.amp_jitter < 0 or self.phase_jitter < 0:
            raise InputError("jitter must be nonnegative")

    @classmethod
    def ideal(cls, seed: int = 0) -> "NoiseModel":
        return cls(prep_error=0.0, seed=seed)

    @property
    def has_jitter(self) -> bool:
        return self.amp_jitter > 0 or self.phase_jitter > 0

    def spawn(self, index: int) -> "NoiseModel":
        """Copy with an independent seed derived from (seed, index)."""
        child = np.random.SeedSequence([int(self.seed) & (2**64 - 1), int(index)])
        return replace(self, seed=int(child.generate_state(1, np.uint64)[0]))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(int(self.seed) & (2**64 - 1))


@dataclass(frozen=True, eq=False)
class RabiDataset:
    """P(down) versus pulse length on the ``delta_n`` analysis transition.

    ``shots`` is 0 for exact (unsampled) probabilities.
    """

    delta_n: int
    times: np.ndarray
    p_down: np.ndarray
    shots: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.p_down, dtype=float)
        if t.shape != p.shape or t.ndim != 1:
            raise InputError("times and p_down must be 1-d arrays of equal length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "p_down", p)


@dataclass(frozen=True, eq=False)
class FringeDataset:
    phases: np.ndarray
    p_down: np.ndarray
    shots: int = 0
    area: float = math.pi / 2

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        p = np.asarray(self.p_down, dtype=float)
        if ph.shape != p.shape or ph.ndim != 1:
            raise InputError("phases and p_down must be 1-d arrays of equal length")
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "p_down", p)


# -- exact evolution ---------------------------------------------------------


def apply_pulse(s: JointState, p: Pulse, m: CouplingModel) -> JointState:
    """Apply every pair rotation of ``p`` (pairs are disjoint)."""
    if p.noop or p.area == 0.0:
        return s
    amps = s.amps.copy()
    for r in pair_rotations(m, p, s.n_max):
        c = math.cos(r.theta / 2)
        sn = math.sin(r.theta / 2)
        a = amps[DOWN, r.n_down]
        b = amps[UP, r.n_up]
        amps[DOWN, r.n_down] = c * a - 1j * np.exp(-1j * r.phi) * sn * b
        amps[UP, r.n_up] = -1j * np.exp(1j * r.phi) * sn * a + c * b
    return JointState(amps)


def jittered(p: Pulse, rng: np.random.Generator, noise: NoiseModel) -> Pulse:
    if p.noop:
        return p
    area = p.area * (1.0 + noise.amp_jitter * rng.standard_normal())
    phase = p.phase + noise.phase_jitter * rng.standard_normal()
    return replace(p, area=abs(area), phase=phase if area >= 0 else phase + math.pi)


def run_program(s0: JointState, prog, m: CouplingModel, noise: NoiseModel | None = None,
                force: bool = False) -> list[JointState]:
    """Trajectory ``[s0, s1, ..., sN]`` of a :class:`PulseProgram`.

    The program must have been compiled against ``m``; clearing programs must
    also start from their own target.  ``force`` skips both checks.
    """
    if not force:
        if prog.model_digest and prog.model_digest != m.digest():
            raise DigestMismatch("program was compiled for a different coupling model")
        if prog.direction == "clearing" and prog.target_digest and s0.digest() != prog.target_digest:
            raise DigestMismatch("clearing program replayed on a state other than its target")
    rng = noise.rng() if noise is not None and noise.has_jitter else None
    out = [s0]
    s = s0
    for p in prog.pulses:
        if rng is not None:
            p = jittered(p, rng, noise)
        s = apply_pulse(s, p, m)
        out.append(s)
    return out


# -- synthetic measurements --------------------------------------------------


def _sample(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(p, 0.0, 1.0)
    if not shots:
        return p
    return rng.binomial(int(shots), p) / float(shots)


def _scan_pairs(s: JointState, delta_n: int):
    """Pad the state so no occupied level loses its partner, return pairs."""
    if abs(delta_n) > 2:
        raise InputError("analysis delta_n must be in -2..2")
    s = s.padded(s.n_max + abs(delta_n))
    return s, coupled_pairs(-delta_n, s.n_max)


def rabi_components(s: JointState, delta_n: int, m: CouplingModel):
    """Per-pair pieces of the exact Rabi signal.

    Returns ``(const, rows)``: ``const`` is the P(down) of down states with
    no partner, and each row ``(n_lower, rate, mean, cos_amp, cross)`` gives
    a pair's contribution ``mean + cos_amp*cos(rate*t) + Re(cross)*sin(rate*t)``
    with ``rate`` signed.
    """
    s, pairs = _scan_pairs(s, delta_n)
    coupled_down = set()
    rows = []
    for n_down, n_up in pairs:
        a = s.amps[DOWN, n_down]
        b = s.amps[UP, n_up]
        coupled_down.add(n_down)
        pa, pb = abs(a) ** 2, abs(b) ** 2
        cross = -1j * np.conj(a) * b
        rows.append((min(n_down, n_up), pair_rate(m, n_down, n_up), (pa + pb) / 2, (pa - pb) / 2, cross))
    const = sum(abs(s.amps[DOWN, n]) ** 2 for n in range(s.n_max + 1) if n not in coupled_down)
    return float(const), rows


def _rabi_signal(s, delta_n, times, m, noise: NoiseModel | None, rng):
    times = np.asarray(times, dtype=float)
    t_eff = times
    phase_err = np.zeros_like(times)
    if noise is not None and noise.has_jitter:
        t_eff = times * (1.0 + noise.amp_jitter * rng.standard_normal(times.shape))
        phase_err = noise.phase_jitter * rng.standard_normal(times.shape)
    const, rows = rabi_components(s, delta_n, m)
    ref = abs(rabi_rate(m, 0, abs(delta_n)))
    p = np.full_like(times, const)
    for _, rate, mean, cos_amp, cross in rows:
        theta = rate * t_eff
        osc = cos_amp * np.cos(theta) + np.sin(theta) * np.real(cross * np.exp(-1j * phase_err))
        if noise is not None and noise.decay_osc is not None:
            w = abs(rate) if noise.per_component_decay else ref
            if w > 0:
                osc = osc * np.exp(-times * w / (2 * math.pi * noise.decay_osc))
        p = p + mean + osc
    return p


def simulate_rabi_scan(s: JointState, delta_n: int, times, noise: NoiseModel | None,
                       m: CouplingModel, shots: int = 600) -> RabiDataset:
    """Synthetic Rabi-flopping record on ``|down,n> <-> |up,n+delta_n>``.

    ``shots=0`` returns the exact (noise-averaged) probabilities.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise InputError("scan times must be nonnegative and strictly increasing")
    noise = noise if noise is not None else NoiseModel.ideal()
    rng = noise.rng()
    p = _rabi_signal(s, delta_n, times, m, noise, rng)
    if noise.prep_error > 0:
        g = _rabi_signal(ground_state(s.n_max), delta_n, times, m, noise, rng)
        p = (1 - noise.prep_error) * p + noise.prep_error * g
    return RabiDataset(delta_n, times, _sample(p, shots, rng), int(shots))


def _fringe_signal(s, area, phases, m, mixture, noise, rng):
    s, pairs = _scan_pairs(s, 2)
    ref = pair_rate(m, 0, 2)
    phases = np.asarray(phases, dtype=float)
    area_eff = np.full_like(phases, area)
    phases_eff = phases
    if noise is not None and noise.has_jitter:
        area_eff = area * (1.0 + noise.amp_jitter * rng.standard_normal(phases.shape))
        phases_eff = phases + noise.phase_jitter * rng.standard_normal(phases.shape)
    coupled_down = {nd for nd, _ in pairs}
    p = np.full_like(phases, sum(abs(s.amps[DOWN, n]) ** 2 for n in range(s.n_max + 1) if n not in coupled_down))
    for n_down, n_up in pairs:
        # signed angle: a negative rate is the same rotation at phase + pi
        theta = area_eff * pair_rate(m, n_down, n_up) / ref
        phi = phases_eff
        a = s.amps[DOWN, n_down]
        b = s.amps[UP, n_up]
        c2 = np.cos(theta / 2) ** 2
        p = p + c2 * abs(a) ** 2 + (1 - c2) * abs(b) ** 2
        if not mixture:
            p = p + np.sin(theta) * np.real(-1j * np.exp(-1j * phi) * np.conj(a) * b)
    return p


def simulate_fringe_scan(s: JointState, analysis_area: float, phases, noise: NoiseModel | None,
                         m: CouplingModel, mixture_mode: bool = False, shots: int = 0) -> FringeDataset:
    """P(down) after an analysis pulse on ``|down,n> <-> |up,n+2>`` versus its phase.

    The pulse area is referenced to the ``(down 0, up 2)`` pair.  With
    ``mixture_mode`` the state is replaced by its dephased counterpart, so
    the interference term of every coupled pair vanishes.
    """
    noise = noise if noise is not None else NoiseModel.ideal()
    rng = noise.rng()
    p = _fringe_signal(s, analysis_area, phases, m, mixture_mode, noise, rng)
    if noise.prep_error > 0:
        g = _fringe_signal(ground_state(s.n_max), analysis_area, phases, m, mixture_mode, noise, rng)
        p = (1 - noise.prep_error) * p + noise.prep_error * g
    return FringeDataset(np.asarray(phases, dtype=float), _sample(p, shots, rng), int(shots), float(analysis_area))


def analysis_pulse(area: float = math.pi / 2, phase: float = 0.0) -> Pulse:
    """The ``|down,0> <-> |up,2>`` analysis pulse as a :class:`Pulse`."""
    return Pulse(delta_n=-2, ref_pair=0, area=area, phase=phase)


def scan_pulse(delta_n: int, t: float, m: CouplingModel, phase: float = 0.0) -> Pulse:
    """Pulse of length ``t`` seconds on the analysis transition ``delta_n``."""
    ref_down = 0 if delta_n >= 0 else -delta_n
    p = Pulse(delta_n=-delta_n, ref_pair=ref_down, area=0.0, phase=phase)
    return replace(p, area=abs(pair_rate(m, ref_down, ref_down + delta_n)) * t)

"""Ladder synthesis: clear a target state down the dual ladder to
``|down, 0>``, then run the clearing sequence backwards.

Clearing level ``k`` (highest occupied Fock index) takes two pulses:

1. a carrier on ``(down k, up k)`` that empties ``|up, k>`` into ``|down, k>``;
2. a red sideband on ``(down k, up k-1)`` that empties ``|down, k>``.

Each pulse also rotates every other pair it couples, by an angle scaled with
the ratio of Rabi rates, so the state is re-simulated after every pulse and
the next pulse is solved against the simulated amplitudes.  Lower pairs never
feed cleared levels: the carrier only mixes ``down k``/``up k`` (both empty
once cleared) and the sideband at level ``j < k`` reaches ``down k`` only
through ``up k-1``, which was emptied before.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .coupling import CouplingModel, Pulse
from .errors import CompileError, LadderError
from .simulate import apply_pulse
from .state import DOWN, UP, ZERO_TOL, JointState, fidelity_pure, ground_state

CLEARING = "clearing"
GENERATION = "generation"
TWO_PI = 2 * math.pi


class NothingToClear(LadderError):
    """Both amplitudes of a pair are zero; the caller should skip the pulse."""


def _wrap(phase: float) -> float:
    w = math.fmod(phase, TWO_PI)
    return w + TWO_PI if w < 0 else w


def solve_clear(a: complex, b: complex) -> tuple[float, float]:
    """Rotation ``(theta, phi)`` that sends the pair ``(a, b)`` to ``(0, b')``.

    ``a`` is the down-side amplitude of the pair, ``b`` the up-side.  Returns
    ``(0, 0)`` when ``a`` is already zero.
    """
    ma, mb = abs(a), abs(b)
    if ma <= ZERO_TOL and mb <= ZERO_TOL:
        raise NothingToClear("both amplitudes are zero")
    if ma <= ZERO_TOL:
        return 0.0, 0.0
    theta = 2.0 * math.atan2(ma, mb)
    if mb <= ZERO_TOL:
        return theta, 0.0
    # cos(t/2) a = i e^{-i phi} sin(t/2) b  =>  e^{-i phi} = -i (a/|a|)(|b|/b)
    phi = math.pi / 2 + math.atan2(b.imag, b.real) - math.atan2(a.imag, a.real)
    return theta, _wrap(phi)


def solve_clear_up(a: complex, b: complex) -> tuple[float, float]:
    """Rotation that empties the up-side amplitude ``b`` of ``(a, b)`` instead."""
    theta, phi = solve_clear(b, a)
    return theta, _wrap(-phi)


@dataclass(frozen=True)
class PulseProgram:
    pulses: tuple[Pulse, ...]
    direction: str
    target_digest: str
    model_digest: str
    model: CouplingModel | None = field(default=None, compare=False)
    target: JointState | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.direction not in (CLEARING, GENERATION):
            raise ValueError(f"unknown program direction {self.direction!r}")

    def __len__(self):
        return len(self.pulses)

    @property
    def effective(self) -> list[Pulse]:
        return [p for p in self.pulses if not p.noop]

    def truncated(self, n_effective: int) -> "PulseProgram":
        """Program cut after its first ``n_effective`` non-noop pulses."""
        out, seen = [], 0
        for p in self.pulses:
            if seen == n_effective:
                break
            out.append(p)
            seen += not p.noop
        return replace(self, pulses=tuple(out))

    def table(self) -> str:
        lines = [f"{'#':>3}  {'type':<8} {'dn':>3} {'ref':>4} {'area/pi':>9} {'phase':>9}"]
        for i, p in enumerate(self.pulses, 1):
            kind = "noop" if p.noop else p.kind
            lines.append(f"{i:>3}  {kind:<8} {p.delta_n:>3} {p.ref_pair:>4} {p.area / math.pi:>9.4f} {p.phase:>9.4f}")
        return "\n".join(lines)


def _strip_noops(pulses: list[Pulse]) -> list[Pulse]:
    lo, hi = 0, len(pulses)
    while lo < hi and pulses[lo].noop:
        lo += 1
    while hi > lo and pulses[hi - 1].noop:
        hi -= 1
    return pulses[lo:hi]


def compile_clearing(target: JointState, m: CouplingModel) -> PulseProgram:
    """Pulse sequence that maps ``target`` onto ``|down, 0>``."""
    s = target
    k_top = s.highest_level()
    pulses: list[Pulse] = []
    if not (k_top == 0 and abs(s.amps[UP, 0]) <= ZERO_TOL):
        for k in range(k_top, -1, -1):
            b = s.amps[UP, k]
            if abs(b) > ZERO_TOL:
                theta, phi = solve_clear_up(s.amps[DOWN, k], b)
                p = Pulse(delta_n=0, ref_pair=k, area=theta, phase=phi)
            else:
                p = Pulse(delta_n=0, ref_pair=k, area=0.0, noop=True)
            pulses.append(p)
            s = apply_pulse(s, p, m)
            if k == 0:
                break
            a = s.amps[DOWN, k]
            if abs(a) > ZERO_TOL:
                theta, phi = solve_clear(a, s.amps[UP, k - 1])
                p = Pulse(delta_n=1, ref_pair=k, area=theta, phase=phi)
            else:
                p = Pulse(delta_n=1, ref_pair=k, area=0.0, noop=True)
            pulses.append(p)
            s = apply_pulse(s, p, m)
        pulses = _strip_noops(pulses)
    if len(pulses) > 2 * (target.n_max + 1) + 1:
        raise CompileError(f"clearing did not terminate within {2 * (target.n_max + 1) + 1} pulses")
    f = fidelity_pure(s, ground_state(s.n_max))
    if f < 1 - 1e-9:
        raise CompileError(f"clearing ended with ground-state fidelity {f!r}")
    return PulseProgram(tuple(pulses), CLEARING, target.digest(), m.digest(), m, target)


def invert_program(p: PulseProgram) -> PulseProgram:
    """Time-reversed program: reversed order, every phase shifted by pi."""
    pulses = tuple(replace(q, phase=_wrap(q.phase + math.pi)) for q in reversed(p.pulses))
    direction = GENERATION if p.direction == CLEARING else CLEARING
    return replace(p, pulses=pulses, direction=direction)


def compile_generation(target: JointState, m: CouplingModel) -> PulseProgram:
    """Pulse sequence that maps ``|down, 0>`` onto ``target``."""
    return invert_program(compile_clearing(target, m))

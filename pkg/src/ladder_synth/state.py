"""Pure states of a spin-1/2 coupled to a truncated harmonic oscillator.

Amplitudes live in a dense ``(2, n_max + 1)`` complex array indexed as
``amps[spin, n]`` with ``spin`` 0 for down and 1 for up.  Everything here is
immutable; operations return new objects.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

#: amplitudes with modulus below this are exact zeros for support queries
ZERO_TOL = 1e-12
NORM_TOL = 1e-9


class SpinLabel(enum.IntEnum):
    DOWN = 0
    UP = 1

    @classmethod
    def parse(cls, value) -> "SpinLabel":
        if isinstance(value, SpinLabel):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            if key in ("down", "d", "dn", "↓"):
                return cls.DOWN
            if key in ("up", "u", "↑"):
                return cls.UP
            raise InputError(f"unknown spin label {value!r}")
        if value in (0, 1):
            return cls(int(value))
        raise InputError(f"unknown spin label {value!r}")

    @property
    def label(self) -> str:
        return self.name.lower()


DOWN = SpinLabel.DOWN
UP = SpinLabel.UP


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JointState:
    """Normalized joint amplitude vector over ``(spin, n)``.

    The constructor validates but never renormalizes, so a state rebuilt
    from its own amplitudes is bit-identical (and hashes identically).  Use
    :func:`make_state` to build from unnormalized entries.
    """

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[0] != 2 or amps.shape[1] < 1:
            raise InputError(f"amplitude array must have shape (2, n_max+1), got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise InputError("non-finite amplitude")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise InputError(f"state is not normalized (norm^2 = {norm2!r})")
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def n_max(self) -> int:
        return self.amps.shape[1] - 1

    def amplitude(self, spin, n: int) -> complex:
        spin = SpinLabel.parse(spin)
        if n < 0 or n > self.n_max:
            return 0j
        return complex(self.amps[spin, n])

    def support(self) -> list[tuple[SpinLabel, int]]:
        """Occupied basis states, ordered by (n, spin)."""
        occ = np.abs(self.amps) > ZERO_TOL
        return [(SpinLabel(s), int(n)) for n in range(self.n_max + 1) for s in (0, 1) if occ[s, n]]

    def highest_level(self) -> int:
        """Largest Fock index carrying amplitude in either spin (-1 if none)."""
        occ = np.nonzero(np.any(np.abs(self.amps) > ZERO_TOL, axis=0))[0]
        return int(occ[-1]) if occ.size else -1

    def padded(self, n_max: int) -> "JointState":
        if n_max == self.n_max:
            return self
        if n_max < self.highest_level():
            raise InputError(f"cannot truncate state with support up to n={self.highest_level()} to n_max={n_max}")
        out = np.zeros((2, n_max + 1), dtype=np.complex128)
        keep = min(n_max, self.n_max) + 1
        out[:, :keep] = self.amps[:, :keep]
        return JointState(out)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def digest(self) -> str:
        """Content hash of the exact amplitudes (independent of object identity)."""
        h = hashlib.sha256()
        h.update(f"n_max={self.n_max};".encode())
        # + 0.0 folds negative zeros so equal values hash equally
        h.update(np.ascontiguousarray(self.amps + 0.0, dtype="<c16").tobytes())
        return h.hexdigest()

    def __repr__(self):
        terms = []
        for spin, n in self.support():
            a = self.amps[spin, n]
            terms.append(f"({a.real:+.4f}{a.imag:+.4f}j)|{spin.label},{n}>")
        return f"JointState(n_max={self.n_max}: " + " ".join(terms) + ")"


@dataclass(frozen=True, eq=False)
class PopulationTable:
    """Populations ``p[spin, n]`` with standard uncertainties ``sigma``.

    ``raw`` optionally keeps estimates before nonnegativity projection.
    """

    p: np.ndarray
    sigma: np.ndarray
    raw: np.ndarray | None = field(default=None)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        sigma = np.array(self.sigma, dtype=float)
        if p.ndim != 2 or p.shape[0] != 2 or sigma.shape != p.shape:
            raise InputError("population and sigma arrays must share shape (2, n_max+1)")
        object.__setattr__(self, "p", _frozen(p))
        object.__setattr__(self, "sigma", _frozen(sigma))
        if self.raw is not None:
            object.__setattr__(self, "raw", _frozen(np.array(self.raw, dtype=float)))

    @property
    def n_max(self) -> int:
        return self.p.shape[1] - 1

    def __getitem__(self, key):
        spin, n = key
        return float(self.p[SpinLabel.parse(spin), n])

    def total(self) -> float:
        return float(self.p.sum())

    def probability_of(self, cells: Iterable[tuple]) -> float:
        """Summed population over the given (spin, n) cells."""
        return float(sum(self.p[SpinLabel.parse(s), n] for s, n in cells if 0 <= n <= self.n_max))

    def rows(self):
        for s in (DOWN, UP):
            for n in range(self.n_max + 1):
                yield s, n, float(self.p[s, n]), float(self.sigma[s, n])


def make_state(n_max: int, entries: Sequence[tuple]) -> JointState:
    """Build a normalized state from ``(spin, n, amplitude)`` triples.

    >>> s = make_state(3, [("down", 0, 1), ("down", 3, 1)])
    >>> round(abs(s.amplitude("down", 3)) ** 2, 12)
    0.5
    """
    if n_max < 0:
        raise InputError("n_max must be nonnegative")
    amps = np.zeros((2, n_max + 1), dtype=np.complex128)
    for spin, n, amp in entries:
        spin = SpinLabel.parse(spin)
        n = int(n)
        if n < 0 or n > n_max:
            raise InputError(f"Fock index n={n} out of range [0, {n_max}]")
        amp = complex(amp)
        if not np.isfinite(amp.real) or not np.isfinite(amp.imag):
            raise InputError(f"non-finite amplitude at ({spin.label}, {n})")
        amps[spin, n] += amp
    norm = np.sqrt(np.sum(np.abs(amps) ** 2))
    if norm <= ZERO_TOL:
        raise InputError("state has no nonzero amplitude")
    return JointState(amps / norm)


def basis_state(n_max: int, spin, n: int) -> JointState:
    return make_state(n_max, [(spin, n, 1.0)])


def ground_state(n_max: int = 0) -> JointState:
    return basis_state(n_max, DOWN, 0)


def overlap(a: JointState, b: JointState) -> complex:
    """<a|b>, zero-padding the shorter state."""
    n = max(a.n_max, b.n_max)
    return complex(np.vdot(a.padded(n).amps, b.padded(n).amps))


def fidelity_pure(a: JointState, b: JointState) -> float:
    return float(min(1.0, abs(overlap(a, b)) ** 2))


def populations(s: JointState) -> PopulationTable:
    p = np.abs(s.amps) ** 2
    return PopulationTable(p, np.zeros_like(p))

"""Spin-motion coupling: Rabi rates beyond the Lamb-Dicke limit and the
decomposition of a sideband/carrier pulse into independent two-level
rotations.

Rotation convention (used everywhere in the package).  A rotation
``(theta, phi)`` acting on the ordered pair ``(|down, n>, |up, n'>)`` with
amplitudes ``(a, b)`` is::

    a -> cos(theta/2) a - i exp(-i phi) sin(theta/2) b
    b -> -i exp(+i phi) sin(theta/2) a + cos(theta/2) b

Shifting ``phi`` by pi gives the inverse rotation.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import InputError, NoRootError, NumericError

LAGUERRE_MAX_N = 64
MAX_DELTA_N = 2

DEFAULT_OMEGA0 = 2 * math.pi * 50e3  # rad/s
TRAP_FREQ = 2.9e6  # Hz, axial mode; metadata only
HYPERFINE_SPLIT = 1.25e9  # Hz; metadata only


def laguerre(n: int, alpha: int, x: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(x) by upward recurrence."""
    if n < 0:
        raise InputError("Laguerre degree must be nonnegative")
    if n > LAGUERRE_MAX_N:
        raise InputError(f"Laguerre degree {n} exceeds guard {LAGUERRE_MAX_N}")
    if not math.isfinite(x):
        raise InputError("Laguerre argument must be finite")
    if n == 0:
        return 1.0
    l_prev, l_cur = 1.0, 1.0 + alpha - x
    for k in range(1, n):
        l_prev, l_cur = l_cur, ((2 * k + 1 + alpha - x) * l_cur - (k + alpha) * l_prev) / (k + 1)
    return l_cur


@dataclass(frozen=True)
class CouplingModel:
    """Base Rabi frequency ``omega0`` (rad/s) and Lamb-Dicke parameter ``eta``.

    ``trap_freq`` and ``hyperfine_split`` (Hz) are carried as metadata and
    never enter the rotating-frame dynamics.
    """

    omega0: float = DEFAULT_OMEGA0
    eta: float = 0.0
    trap_freq: float = TRAP_FREQ
    hyperfine_split: float = HYPERFINE_SPLIT

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise InputError("omega0 must be positive")
        if not (math.isfinite(self.eta) and 0 <= self.eta < 2):
            raise InputError("eta must lie in [0, 2)")

    @classmethod
    def from_ratio(cls, ratio: float, pair_a=(3, 1), pair_b=(0, 1), **kw) -> "CouplingModel":
        """Model whose eta reproduces rate(pair_a)/rate(pair_b) == ratio."""
        return cls(eta=eta_from_ratio(ratio, pair_a, pair_b), **kw)

    def with_eta(self, eta: float) -> "CouplingModel":
        return replace(self, eta=eta)

    def as_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "eta": self.eta,
            "trap_freq": self.trap_freq,
            "hyperfine_split": self.hyperfine_split,
        }

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


def rabi_rate(m: CouplingModel, n_lower: int, abs_dn: int) -> float:
    """Signed Rabi rate (rad/s) of the pair ``(n_lower, n_lower + abs_dn)``.

    The sign is that of the coupling matrix element; it matters only
    relative to other pairs of the same pulse.
    """
    if n_lower < 0:
        raise InputError("Fock index must be nonnegative")
    if abs_dn not in range(MAX_DELTA_N + 1):
        raise InputError(f"|delta_n| must be in 0..{MAX_DELTA_N}")
    eta2 = m.eta * m.eta
    fact_ratio = 1.0
    for k in range(n_lower + 1, n_lower + abs_dn + 1):
        fact_ratio /= k
    return (
        m.omega0
        * math.exp(-eta2 / 2)
        * m.eta**abs_dn
        * math.sqrt(fact_ratio)
        * laguerre(n_lower, abs_dn, eta2)
    )


def pair_rate(m: CouplingModel, n1: int, n2: int) -> float:
    """Rabi rate between Fock levels n1 and n2 (symmetric in the order)."""
    return rabi_rate(m, min(n1, n2), abs(n1 - n2))


def eta_from_ratio(target_ratio: float, pair_a, pair_b, grid: int = 20001) -> float:
    """Smallest eta in (0, 2) with rate(pair_a)/rate(pair_b) == target_ratio.

    Pairs are ``(n_lower, abs_dn)``.  The ratio is independent of omega0.
    """
    pair_a = (int(pair_a[0]), int(pair_a[1]))
    pair_b = (int(pair_b[0]), int(pair_b[1]))
    if pair_a == pair_b:
        raise InputError("degenerate pair: identical transitions have ratio 1 for every eta")
    if not target_ratio > 0:
        raise InputError("target ratio must be positive")
    probe = CouplingModel(omega0=1.0)

    def f(eta):
        m = probe.with_eta(eta)
        den = rabi_rate(m, *pair_b)
        if den == 0.0:
            return math.nan
        return rabi_rate(m, *pair_a) / den - target_ratio

    etas = np.linspace(0.0, 2.0, grid)[1:-1]
    vals = np.array([f(e) for e in etas])
    for i, v in enumerate(vals):
        if v == 0.0:
            return float(etas[i])
    for i in range(len(etas) - 1):
        lo, hi = vals[i], vals[i + 1]
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo * hi > 0:
            continue
        root = brentq(f, etas[i], etas[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        # sign flips across a pole of the ratio are not roots
        if abs(f(root)) < 1e-10:
            return float(root)
    raise NoRootError(
        f"no eta in (0, 2) gives rate{pair_a}/rate{pair_b} = {target_ratio}"
    )


@dataclass(frozen=True)
class Pulse:
    """One resonant pulse coupling ``|down, n>`` to ``|up, n - delta_n>``.

    ``area`` is the rotation angle accumulated on the reference pair
    ``(|down, ref_pair>, |up, ref_pair - delta_n>)``.  ``noop`` marks
    zero-area placeholders kept for a canonical sideband/carrier alternation.
    """

    delta_n: int
    ref_pair: int
    area: float
    phase: float = 0.0
    noop: bool = False

    def __post_init__(self):
        if int(self.delta_n) != self.delta_n or abs(self.delta_n) > MAX_DELTA_N:
            raise InputError(f"delta_n must be an integer in [-{MAX_DELTA_N}, {MAX_DELTA_N}]")
        if self.ref_pair < 0 or self.ref_pair - self.delta_n < 0:
            raise InputError(f"reference pair (down {self.ref_pair}, up {self.ref_pair - self.delta_n}) does not exist")
        if not (math.isfinite(self.area) and self.area >= 0):
            raise InputError("pulse area must be finite and nonnegative")
        if not math.isfinite(self.phase):
            raise InputError("pulse phase must be finite")

    @property
    def kind(self) -> str:
        return "carrier" if self.delta_n == 0 else "sideband"

    @property
    def ref_up(self) -> int:
        return self.ref_pair - self.delta_n

    def duration(self, m: CouplingModel) -> float:
        """Physical pulse length in seconds."""
        return self.area / abs(pair_rate(m, self.ref_pair, self.ref_up))


@dataclass(frozen=True)
class PairRotation:
    n_down: int
    n_up: int
    theta: float
    phi: float


def coupled_pairs(delta_n: int, n_max: int) -> list[tuple[int, int]]:
    """``(n_down, n_up)`` pairs of a delta_n pulse that fit inside 0..n_max."""
    lo = max(0, delta_n)
    hi = min(n_max, n_max + delta_n)
    return [(n, n - delta_n) for n in range(lo, hi + 1)]


def pair_rotations(m: CouplingModel, p: Pulse, n_max: int) -> list[PairRotation]:
    if p.ref_pair > n_max or p.ref_up > n_max:
        raise InputError(f"reference pair of {p} lies outside n_max={n_max}")
    ref_rate = pair_rate(m, p.ref_pair, p.ref_up)
    if ref_rate == 0.0:
        raise NumericError(f"reference pair ({p.ref_pair}, {p.ref_up}) has zero Rabi rate")
    out = []
    for n_down, n_up in coupled_pairs(p.delta_n, n_max):
        ratio = pair_rate(m, n_down, n_up) / ref_rate
        # a negative matrix element is the same rotation with phi + pi
        phi = p.phase + math.pi if ratio < 0 else p.phase
        out.append(PairRotation(n_down, n_up, p.area * abs(ratio), phi))
    return out


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """2x2 unitary of the package rotation convention on (down, up)."""
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]],
        dtype=np.complex128,
    )

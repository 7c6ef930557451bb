"""Population and coherence analysis of Rabi-flopping and fringe records.

Rabi signals are fit to a sum of cosines whose frequencies are locked to the
coupling model's rate ratios, so the only free frequency is the overall
scale ``omega_base``.  The cosine amplitudes and offsets of several scans
(carrier and both first sidebands) are then inverted jointly, by generalized
least squares with the normalization as a hard constraint, into a table of
populations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .coupling import CouplingModel, pair_rate
from .errors import FitError, InputError, UnderdeterminedError, UnphysicalCoherence
from .simulate import FringeDataset, NoiseModel, RabiDataset, simulate_rabi_scan
from .state import DOWN, UP, ZERO_TOL, JointState, PopulationTable, SpinLabel

N_STARTS = 16
START_SPAN = 0.2
#: per-point chi^2 below which two minima are indistinguishable
CHI2_FLOOR = 1e-24


@dataclass(frozen=True, eq=False)
class RabiFit:
    """Fitted Rabi signal.

    ``covariance`` is over the parameter vector
    ``(omega_base, gamma, offset, c_0, s_0, c_1, s_1, ...)`` with
    ``gamma = 1/tau`` and ``A_n cos(w t + phi_n) = c_n cos(w t) - s_n sin(w t)``.
    """

    delta_n: int
    omega_base: float
    components: tuple  # (n, A_n, phi_n)
    offset: float
    tau: float
    residual_rms: float
    covariance: np.ndarray
    ratios: np.ndarray
    degenerate: bool = False
    chi2: float = 0.0

    @property
    def n_pairs(self) -> int:
        return len(self.components)

    @property
    def gamma(self) -> float:
        return 0.0 if math.isinf(self.tau) else 1.0 / self.tau

    def frequencies(self) -> np.ndarray:
        return self.omega_base * self.ratios

    def signed_amplitudes(self) -> np.ndarray:
        """In-phase cosine amplitudes ``A_n cos(phi_n)``."""
        return np.array([a * math.cos(ph) for _, a, ph in self.components])

    def population_observables(self) -> tuple[np.ndarray, np.ndarray]:
        """``(offset, c_0, ..., c_{N-1})`` and their covariance."""
        idx = [2] + [3 + 2 * k for k in range(self.n_pairs)]
        y = np.concatenate([[self.offset], self.signed_amplitudes()])
        return y, self.covariance[np.ix_(idx, idx)]


def _model(params, t, ratios):
    omega, gamma, off = params[:3]
    cs = params[3:].reshape(-1, 2)
    arg = np.outer(t, omega * ratios)
    env = np.exp(-gamma * t)
    return off + env * (np.cos(arg) @ cs[:, 0] - np.sin(arg) @ cs[:, 1])


def _jacobian(params, t, ratios):
    omega, gamma, _ = params[:3]
    cs = params[3:].reshape(-1, 2)
    arg = np.outer(t, omega * ratios)
    cos, sin = np.cos(arg), np.sin(arg)
    env = np.exp(-gamma * t)[:, None]
    osc = cos @ cs[:, 0] - sin @ cs[:, 1]
    jac = np.empty((t.size, params.size))
    jac[:, 0] = env[:, 0] * ((-sin * ratios * t[:, None]) @ cs[:, 0] - (cos * ratios * t[:, None]) @ cs[:, 1])
    jac[:, 1] = -t * env[:, 0] * osc
    jac[:, 2] = 1.0
    jac[:, 3::2] = env * cos
    jac[:, 4::2] = -env * sin
    return jac


def rabi_signal(fit: RabiFit, t, clip: bool = True):
    """Evaluate the fitted signal; clipping to [0, 1] is for reporting only."""
    t = np.asarray(t, dtype=float)
    params = [fit.omega_base, fit.gamma, fit.offset]
    for _, a, ph in fit.components:
        params += [a * math.cos(ph), a * math.sin(ph)]
    p = _model(np.asarray(params), np.atleast_1d(t), fit.ratios)
    if clip:
        p = np.clip(p, 0.0, 1.0)
    return p if t.ndim else float(p[0])


def binomial_sigma(p, shots: int) -> np.ndarray:
    """Projection-noise standard deviation, floored at 1/(2 shots)."""
    p = np.asarray(p, dtype=float)
    if not shots:
        return np.ones_like(p)
    return np.maximum(np.sqrt(np.clip(p * (1 - p), 0, None) / shots), 1.0 / (2 * shots))


def component_ratios(m: CouplingModel, delta_n: int, n_pairs: int) -> np.ndarray:
    k = abs(delta_n)
    base = abs(pair_rate(m, 0, k))
    if base == 0.0:
        raise InputError(f"lowest pair of delta_n={delta_n} is uncoupled for this model")
    return np.array([abs(pair_rate(m, n, n + k)) / base for n in range(n_pairs)])


def _linear_start(t, p, w, omega, gamma, ratios):
    """Best offset and (c, s) for fixed omega and gamma."""
    arg = np.outer(t, omega * ratios)
    env = np.exp(-gamma * t)[:, None]
    basis = np.empty((t.size, 1 + 2 * ratios.size))
    basis[:, 0] = 1.0
    basis[:, 1::2] = env * np.cos(arg)
    basis[:, 2::2] = -env * np.sin(arg)
    coef, *_ = np.linalg.lstsq(basis * w[:, None], p * w, rcond=None)
    r = (basis @ coef - p) * w
    return coef, float(r @ r)


def fit_rabi(d: RabiDataset, m: CouplingModel, n_pairs: int, n_starts: int = N_STARTS,
             span: float = START_SPAN) -> RabiFit:
    """Weighted multi-start Levenberg-Marquardt fit of a Rabi record."""
    if not 1 <= n_pairs <= 8:
        raise InputError("n_pairs must be in 1..8")
    n_free = 3 + 2 * n_pairs
    t, p = d.times, d.p_down
    if t.size < 4 * n_free:
        raise InputError(f"{t.size} points cannot constrain {n_free} parameters (need {4 * n_free})")
    ratios = component_ratios(m, d.delta_n, n_pairs)
    w = 1.0 / binomial_sigma(p, d.shots)
    omega_pred = abs(pair_rate(m, 0, abs(d.delta_n)))
    t_span = float(t[-1] - t[0]) or 1.0

    def resid(x):
        return (_model(x, t, ratios) - p) * w

    def jac(x):
        return _jacobian(x, t, ratios) * w[:, None]

    results = []
    for omega0 in np.linspace(1 - span, 1 + span, n_starts) * omega_pred:
        gamma0, coef = 0.0, None
        for g in (0.0, 0.5 / t_span, 2.0 / t_span):
            c, cost = _linear_start(t, p, w, omega0, g, ratios)
            if coef is None or cost < coef[1]:
                gamma0, coef = g, (c, cost)
        x0 = np.concatenate([[omega0, gamma0], coef[0]])
        try:
            res = least_squares(resid, x0, jac=jac, method="lm", xtol=1e-12, ftol=1e-12, gtol=1e-12,
                                max_nfev=200 * n_free)
        except (ValueError, np.linalg.LinAlgError):
            continue
        if not np.all(np.isfinite(res.x)) or res.x[0] <= 0 or res.status <= 0:
            continue
        results.append(res)
    if not results:
        raise FitError(f"Rabi fit (delta_n={d.delta_n}) failed to converge from {n_starts} starts")
    # A record with a single populated pair fits about equally well with the
    # frequency scale aliased onto another component.  Minima whose chi^2 lie
    # within the statistic's own scatter, sqrt(2/dof) * chi2_min, are ties;
    # keep the one nearest the model, then the lowest omega.  The absolute
    # floor treats fits of exact data (chi2 at rounding level) as ties too.
    chi2_min = min(2 * r.cost for r in results)
    dof = max(t.size - n_free, 1)
    window = max(math.sqrt(2.0 / dof) * chi2_min, t.size * CHI2_FLOOR)
    tied = [r for r in results if 2 * r.cost - chi2_min <= window]
    best = min(tied, key=lambda r: (round(abs(r.x[0] / omega_pred - 1), 9), r.x[0]))

    x = best.x
    J = jac(x)
    sv = np.linalg.svd(J, compute_uv=False)
    degenerate = bool(sv[-1] <= sv[0] * 1e-10)
    cov = np.linalg.pinv(J.T @ J, hermitian=True)
    if not d.shots:
        # no projection noise to weight by: scale by the residual variance
        cov = cov * (2 * best.cost / dof)
    comps = []
    for k in range(n_pairs):
        c, s = x[3 + 2 * k], x[4 + 2 * k]
        comps.append((k, math.hypot(c, s), math.atan2(s, c)))
    gamma = x[1]
    model = _model(x, t, ratios)
    return RabiFit(
        delta_n=d.delta_n,
        omega_base=float(x[0]),
        components=tuple(comps),
        offset=float(x[2]),
        tau=math.inf if gamma <= 0 else 1.0 / gamma,
        residual_rms=float(np.sqrt(np.mean((model - p) ** 2))),
        covariance=cov,
        ratios=ratios,
        degenerate=degenerate,
        chi2=float(2 * best.cost),
    )


def _pair_cells(delta_n: int, n_lower: int):
    """(down n, up n') of the analysis pair with lower Fock index n_lower."""
    if delta_n >= 0:
        return n_lower, n_lower + delta_n
    return n_lower - delta_n, n_lower


def _design(delta_n: int, n_pairs: int, n_max: int) -> np.ndarray:
    size = 2 * (n_max + 1)

    def idx(spin, n):
        return spin * (n_max + 1) + n if 0 <= n <= n_max else None

    rows = np.zeros((1 + n_pairs, size))
    coupled_down = set()
    for n in range(n_max + 1):
        nd, nu = _pair_cells(delta_n, n)
        coupled_down.add(nd)
        for spin, nn in ((DOWN, nd), (UP, nu)):
            i = idx(spin, nn)
            if i is not None:
                rows[0, i] += 0.5
        if n < n_pairs:
            for spin, nn, sgn in ((DOWN, nd, 0.5), (UP, nu, -0.5)):
                i = idx(spin, nn)
                if i is not None:
                    rows[1 + n, i] += sgn
    for n in range(n_max + 1):
        if n not in coupled_down:
            rows[0, idx(DOWN, n)] += 1.0
    return rows


def invert_populations(fits: Sequence, n_max: int) -> PopulationTable:
    """Populations from fits on several transitions.

    ``fits`` holds :class:`RabiFit` objects or ``(delta_n, RabiFit)`` pairs.
    Each fit contributes its offset (mean P(down) over coupled and uncoupled
    states) and its in-phase amplitudes, ``(p_down - p_up)/2`` per pair;
    coherence inside a coupled pair is assumed absent.
    """
    size = 2 * (n_max + 1)
    normal = np.zeros((size, size))
    rhs = np.zeros(size)
    stacked = []
    for item in fits:
        fit = item[1] if isinstance(item, tuple) else item
        dn = item[0] if isinstance(item, tuple) else fit.delta_n
        y, cov = fit.population_observables()
        M = _design(dn, fit.n_pairs, n_max)
        W = np.linalg.pinv(cov, hermitian=True)
        normal += M.T @ W @ M
        rhs += M.T @ W @ y
        stacked.append(M)
    if not stacked:
        raise InputError("no fits supplied")
    ones = np.ones(size)
    structure = np.vstack(stacked + [ones])
    rank = np.linalg.matrix_rank(structure, tol=1e-9)
    if rank < size:
        _, _, vt = np.linalg.svd(structure)
        null = vt[rank:]
        loose = np.nonzero(np.max(np.abs(null), axis=0) > 1e-8)[0]
        cells = [(SpinLabel(i // (n_max + 1)).label, i % (n_max + 1)) for i in loose]
        raise UnderdeterminedError(f"populations not determined for cells {cells}", cells)

    kkt = np.zeros((size + 1, size + 1))
    kkt[:size, :size] = normal
    kkt[:size, size] = ones
    kkt[size, :size] = ones
    b = np.concatenate([rhs, [1.0]])
    kinv = np.linalg.pinv(kkt)
    raw = (kinv @ b)[:size]
    cov = kinv[:size, :size]
    sigma = np.sqrt(np.clip(np.diag(cov), 0, None))
    p = np.clip(raw, 0.0, None)
    p = p / p.sum()
    shape = (2, n_max + 1)
    return PopulationTable(p.reshape(shape), sigma.reshape(shape), raw.reshape(shape))


@dataclass(frozen=True)
class FringeFit:
    contrast: float
    offset: float
    phase0: float
    sigma_contrast: float
    sigma_offset: float
    sigma_phase0: float

    @property
    def sigmas(self) -> dict:
        return {"contrast": self.sigma_contrast, "offset": self.sigma_offset, "phase0": self.sigma_phase0}

    def __iter__(self):
        return iter((self.contrast, self.offset, self.phase0, self.sigmas))


def fringe_contrast(d: FringeDataset) -> FringeFit:
    """Fit ``offset + (contrast/2) cos(phase - phase0)``; contrast >= 0."""
    ph, p = d.phases, d.p_down
    if ph.size < 8:
        raise InputError("fringe fit needs at least 8 phase points")
    coverage = (ph.max() - ph.min()) * ph.size / (ph.size - 1)
    if coverage < 2 * math.pi - 1e-9:
        raise InputError("phase points must span a full 2*pi period")
    X = np.column_stack([np.ones_like(ph), np.cos(ph), np.sin(ph)])
    coef, *_ = np.linalg.lstsq(X, p, rcond=None)
    off, a, b = coef
    resid = p - X @ coef
    dof = max(ph.size - 3, 1)
    cov = np.linalg.inv(X.T @ X) * float(resid @ resid) / dof
    amp = math.hypot(a, b)
    if amp > 0:
        ga = np.array([0.0, a / amp, b / amp])
        gp = np.array([0.0, -b / amp**2, a / amp**2])
        s_amp = math.sqrt(max(ga @ cov @ ga, 0.0))
        s_ph = math.sqrt(max(gp @ cov @ gp, 0.0))
    else:
        s_amp = math.sqrt(max(cov[1, 1], cov[2, 2]))
        s_ph = math.pi
    return FringeFit(2 * amp, float(off), math.atan2(b, a), 2 * s_amp, math.sqrt(max(cov[0, 0], 0.0)), s_ph)


def coherence_from_fringe(fit: FringeFit, analysis_area: float = math.pi / 2,
                          calibration: float | None = None) -> tuple[float, float]:
    """Real part of rho(down n, up n+2) and its sigma from a fitted fringe.

    The fringe is ``P = offset + cal*|rho| cos(phase + pi/2 + arg rho)`` with
    ``cal = sin(analysis_area)`` unless an explicit calibration is given.
    """
    cal = math.sin(analysis_area) if calibration is None else calibration
    if abs(cal) < 1e-12:
        raise InputError("analysis pulse area carries no phase information")
    mag = fit.contrast / (2 * abs(cal))
    proj = math.cos(fit.phase0 + math.pi / 2) * (1 if cal > 0 else -1)
    sigma = math.hypot(fit.sigma_contrast / (2 * abs(cal)) * proj, mag * math.sin(fit.phase0 + math.pi / 2) * fit.sigma_phase0)
    return mag * proj, sigma


def coherence_from_state(s: JointState, cell1, cell2) -> float:
    """Re <cell1|rho|cell2> for a pure state."""
    a1 = s.amplitude(cell1[0], cell1[1])
    a2 = s.amplitude(cell2[0], cell2[1])
    return float((a1 * np.conj(a2)).real)


@dataclass(frozen=True)
class FidelityReport:
    f: float
    sigma_f: float
    rho_elements: dict
    alpha: float
    beta: float
    cells: tuple

    def recompute(self) -> float:
        r = self.rho_elements
        return self.alpha**2 * r["rho11"] + self.beta**2 * r["rho22"] + 2 * self.alpha * self.beta * r["coh_re"]


def two_term_target(target: JointState):
    """``(alpha, beta, cell1, cell2)`` with real alpha > 0 and real beta."""
    supp = target.support()
    if len(supp) != 2:
        raise InputError(f"target must have exactly two terms, found {len(supp)}")
    (s1, n1), (s2, n2) = supp
    a1 = target.amps[s1, n1]
    a2 = target.amps[s2, n2]
    ph = np.exp(-1j * np.angle(a1))
    a1, a2 = a1 * ph, a2 * ph
    if abs(a2.imag) > 1e-9:
        raise InputError("two-term target must have a real relative amplitude")
    return float(a1.real), float(a2.real), (s1, n1), (s2, n2)


def fidelity_estimate(pops: PopulationTable, coh_re: float, target: JointState,
                      sigma_coh: float = 0.0) -> FidelityReport:
    """Overlap of a two-term pure target with a partially known density matrix."""
    alpha, beta, c1, c2 = two_term_target(target)
    r11 = pops[c1]
    r22 = pops[c2]
    bound = math.sqrt(max(r11 * r22, 0.0))
    if abs(coh_re) > bound + 1e-12:
        raise UnphysicalCoherence(f"|coherence| {abs(coh_re):.6g} exceeds sqrt(rho11*rho22) = {bound:.6g}")
    f = alpha**2 * r11 + beta**2 * r22 + 2 * alpha * beta * coh_re
    s11 = pops.sigma[c1[0], c1[1]]
    s22 = pops.sigma[c2[0], c2[1]]
    sigma = math.sqrt((alpha**2 * s11) ** 2 + (beta**2 * s22) ** 2 + (2 * alpha * beta * sigma_coh) ** 2)
    rho = {"rho11": r11, "rho22": r22, "coh_re": float(coh_re)}
    return FidelityReport(float(f), sigma, rho, alpha, beta, (c1, c2))


def target_probability(pops: PopulationTable, target: JointState) -> float:
    """Population found on the target's support."""
    return pops.probability_of(target.support())


# -- pipeline ---------------------------------------------------------------


def scan_times(delta_n: int, m: CouplingModel, points: int = 120, n_osc: float = 12.0) -> np.ndarray:
    """Evenly spaced pulse lengths covering ``n_osc`` periods of the lowest pair."""
    period = 2 * math.pi / abs(pair_rate(m, 0, abs(delta_n)))
    return np.linspace(0.0, n_osc * period, points)


@dataclass
class TomographyResult:
    datasets: dict
    fits: dict
    table: PopulationTable | None
    errors: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.table is not None


def rabi_tomography(s: JointState, m: CouplingModel, deltas=(0, 1, -1), shots: int = 600,
                    noise: NoiseModel | None = None, points: int = 120, n_osc: float = 12.0,
                    n_max: int | None = None) -> TomographyResult:
    """Synthesize scans on each transition, fit them and invert to populations.

    Fit failures are collected in ``errors`` (the table is then ``None``) so
    callers can still write out the datasets.
    """
    n_max = s.n_max if n_max is None else n_max
    noise = noise if noise is not None else NoiseModel()
    datasets, fits, errors = {}, {}, {}
    for i, dn in enumerate(deltas):
        t = scan_times(dn, m, points, n_osc)
        datasets[dn] = d = simulate_rabi_scan(s, dn, t, noise.spawn(i), m, shots=shots)
        try:
            fits[dn] = fit_rabi(d, m, n_max + 1)
        except FitError as exc:
            errors[dn] = exc
    if errors:
        return TomographyResult(datasets, fits, None, errors)
    table = invert_populations([(dn, f) for dn, f in fits.items()], n_max)
    return TomographyResult(datasets, fits, table, errors)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ladder_synth.coupling import (
    CouplingModel,
    Pulse,
    coupled_pairs,
    eta_from_ratio,
    laguerre,
    pair_rate,
    pair_rotations,
    rabi_rate,
    rotation_matrix,
)
from ladder_synth.errors import InputError, NoRootError, NumericError

# frozen from the closed-form polynomial / bisection run once by hand
ETA_060 = 0.7548016912767058
ETA2_060 = 0.5697255931541756


def laguerre_sum(n, alpha, x):
    """Explicit series, independent of the recurrence."""
    return sum(
        (-1) ** i * math.comb(n + alpha, n - i) * x**i / math.factorial(i)
        for i in range(n + 1)
    )


class TestLaguerre:
    @pytest.mark.parametrize("n", range(7))
    @pytest.mark.parametrize("alpha", [0, 1, 2])
    @pytest.mark.parametrize("x", [0.0, 0.3, 0.57, 1.0, 2.5, 3.9])
    def test_matches_series(self, n, alpha, x):
        assert laguerre(n, alpha, x) == pytest.approx(laguerre_sum(n, alpha, x), rel=1e-12, abs=1e-12)

    def test_frozen_values(self):
        assert laguerre(0, 2, 1.7) == 1.0
        assert laguerre(1, 1, 0.5) == pytest.approx(1.5, abs=1e-15)
        assert laguerre(3, 1, 0.57) == pytest.approx(1.1989345, abs=1e-12)
        assert laguerre(2, 0, 1.0) == pytest.approx(-0.5, abs=1e-15)

    def test_value_at_zero_is_binomial(self):
        for n in range(10):
            assert laguerre(n, 1, 0.0) == pytest.approx(n + 1)

    def test_guards(self):
        with pytest.raises(InputError):
            laguerre(65, 0, 0.1)
        with pytest.raises(InputError):
            laguerre(-1, 0, 0.1)


class TestRabiRate:
    def test_carrier_at_zero_eta(self):
        m = CouplingModel(eta=0.0)
        for n in range(6):
            assert rabi_rate(m, n, 0) == pytest.approx(m.omega0)
            assert rabi_rate(m, n, 1) == 0.0

    def test_first_sideband_ground(self):
        m = CouplingModel(omega0=1.0, eta=0.3)
        assert rabi_rate(m, 0, 1) == pytest.approx(math.exp(-0.045) * 0.3, rel=1e-14)

    def test_small_eta_sqrt_n_scaling(self):
        m = CouplingModel(omega0=1.0, eta=1e-4)
        for n in range(1, 6):
            assert pair_rate(m, n, n - 1) / pair_rate(m, 0, 1) == pytest.approx(math.sqrt(n), rel=1e-6)

    def test_symmetric_pair_rate(self):
        m = CouplingModel(eta=0.5)
        assert pair_rate(m, 4, 2) == pair_rate(m, 2, 4)

    def test_sign_change_at_high_n(self, model):
        # L_6^1 changes sign near eta^2 = 0.57, so the (6,7) matrix element is negative
        assert pair_rate(model, 6, 7) < 0 < pair_rate(model, 0, 1)

    def test_bad_delta(self):
        with pytest.raises(InputError):
            rabi_rate(CouplingModel(eta=0.1), 0, 3)

    def test_model_validation(self):
        with pytest.raises(InputError):
            CouplingModel(eta=2.0)
        with pytest.raises(InputError):
            CouplingModel(omega0=-1.0)


class TestEtaFromRatio:
    def test_calibrated_value(self, model):
        assert model.eta == pytest.approx(ETA_060, abs=1e-12)
        ratio = pair_rate(model, 3, 4) / pair_rate(model, 0, 1)
        assert ratio == pytest.approx(0.60, abs=1e-12)

    def test_omega0_independent(self):
        a = CouplingModel.from_ratio(0.6, omega0=1.0)
        b = CouplingModel.from_ratio(0.6, omega0=123.0)
        assert a.eta == b.eta

    def test_degenerate_pair(self):
        with pytest.raises(InputError, match="degenerate"):
            eta_from_ratio(1.0, (2, 1), (2, 1))

    def test_no_root(self):
        # L_3(x) never reaches 5 for x = eta^2 in (0, 4)
        with pytest.raises(NoRootError):
            eta_from_ratio(5.0, (3, 0), (0, 0))

    def test_carrier_ratio_two_has_root(self):
        eta = eta_from_ratio(2.0, (3, 0), (0, 0))
        assert laguerre(3, 0, eta**2) == pytest.approx(2.0, abs=1e-9)
        assert 1.9 < eta < 1.95

    def test_smallest_root(self):
        # the ratio falls monotonically from 2 at eta=0, so 0.9 is reached before 0.6
        eta = eta_from_ratio(0.9, (3, 1), (0, 1))
        assert eta < ETA_060

    @given(st.floats(0.05, 1.4))
    @settings(max_examples=15, deadline=None)
    def test_round_trip(self, target):
        eta = eta_from_ratio(target, (1, 1), (0, 1))
        m = CouplingModel(omega0=1.0, eta=eta)
        assert pair_rate(m, 1, 2) / pair_rate(m, 0, 1) == pytest.approx(target, abs=1e-9)


class TestPulse:
    def test_reference_pair_must_exist(self):
        with pytest.raises(InputError):
            Pulse(delta_n=1, ref_pair=0, area=math.pi)
        with pytest.raises(InputError):
            Pulse(delta_n=3, ref_pair=3, area=1.0)
        with pytest.raises(InputError):
            Pulse(delta_n=0, ref_pair=0, area=-1.0)

    def test_kind_and_duration(self, model):
        p = Pulse(delta_n=1, ref_pair=1, area=math.pi)
        assert p.kind == "sideband" and p.ref_up == 0
        assert p.duration(model) == pytest.approx(math.pi / pair_rate(model, 0, 1))
        assert Pulse(0, 2, 1.0).kind == "carrier"

    def test_coupled_pairs(self):
        assert coupled_pairs(1, 3) == [(1, 0), (2, 1), (3, 2)]
        assert coupled_pairs(-2, 3) == [(0, 2), (1, 3)]
        assert coupled_pairs(0, 1) == [(0, 0), (1, 1)]

    def test_sideband_pi_on_top_pair(self, model):
        rots = pair_rotations(model, Pulse(delta_n=1, ref_pair=4, area=math.pi), 4)
        by_down = {r.n_down: r for r in rots}
        assert by_down[4].theta == pytest.approx(math.pi)
        # (down 1, up 0) is rotated by pi / 0.60
        assert by_down[1].theta == pytest.approx(math.pi / 0.60)

    def test_negative_ratio_shifts_phase(self, model):
        rots = pair_rotations(model, Pulse(delta_n=1, ref_pair=1, area=1.0, phase=0.2), 8)
        r = {x.n_down: x for x in rots}[7]
        assert r.theta > 0
        assert r.phi == pytest.approx(0.2 + math.pi)

    def test_zero_rate_reference(self):
        m = CouplingModel(eta=0.0)
        with pytest.raises(NumericError):
            pair_rotations(m, Pulse(delta_n=1, ref_pair=1, area=1.0), 2)


@given(st.floats(-10, 10), st.floats(-10, 10))
@settings(max_examples=100, deadline=None)
def test_rotation_unitary_and_inverse(theta, phi):
    u = rotation_matrix(theta, phi)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-13)
    np.testing.assert_allclose(rotation_matrix(theta, phi + math.pi) @ u, np.eye(2), atol=1e-13)


def test_model_digest_tracks_parameters():
    a = CouplingModel(eta=0.5)
    assert a.digest() == CouplingModel(eta=0.5).digest()
    assert a.digest() != a.with_eta(0.50001).digest()

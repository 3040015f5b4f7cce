import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiteleport.channels import (
    Channel,
    Distortion,
    channel_from_concurrence,
    channel_state,
    concurrence,
    correction_kraus,
)
from multiteleport.qcore import PureState, fidelity


def bisect_alpha2(c, tol=1e-15):
    """Smaller root of 2 sqrt(x (1 - x)) = c on [0, 1/2], by bisection."""
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if 2 * math.sqrt(mid * (1 - mid)) < c:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


class TestChannel:
    def test_canonicalizes(self):
        ch = Channel(-0.8, 0.6)
        assert (ch.alpha, ch.beta) == (0.6, 0.8)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Channel(0.5, 0.5)

    def test_state(self):
        np.testing.assert_allclose(channel_state(Channel(0.6, 0.8)).amplitudes, [0.6, 0, 0, 0.8])
        phi = channel_state(Channel.maximal())
        assert fidelity(phi, PureState([1, 0, 0, 1]).normalized()) == pytest.approx(1.0)

    def test_state_normalized(self):
        for a2 in np.random.default_rng(0).random(100):
            assert channel_state(Channel.from_alpha2(a2)).is_normalized()


class TestConcurrence:
    def test_values(self):
        assert concurrence(Channel.maximal()) == pytest.approx(1.0, abs=1e-15)
        assert concurrence(Channel(0.6, 0.8)) == pytest.approx(0.96, abs=1e-15)
        assert concurrence(Channel(0.0, 1.0)) == 0.0

    def test_inverse_values(self):
        assert channel_from_concurrence(1.0).alpha == pytest.approx(math.sqrt(0.5), abs=1e-15)
        assert channel_from_concurrence(0.0).alpha == 0.0
        # oracle: bisection on the concurrence formula
        assert bisect_alpha2(0.96) == pytest.approx(0.36, abs=1e-14)
        assert channel_from_concurrence(0.96).alpha2 == pytest.approx(0.36, abs=1e-14)

    def test_inverse_matches_bisection(self):
        for c in np.linspace(0.01, 0.99, 50):
            assert channel_from_concurrence(c).alpha2 == pytest.approx(bisect_alpha2(c), abs=1e-13)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            channel_from_concurrence(1.1)

    @settings(max_examples=1000, deadline=None)
    @given(st.floats(0.0, 1.0))
    def test_round_trip(self, c):
        assert concurrence(channel_from_concurrence(c)) == pytest.approx(c, abs=1e-12)


class TestDistortion:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Distortion(0.0, 1.0)

    def test_rescales_keep_ratio(self):
        d = Distortion(1e-9, 3e-9)
        assert max(d.u, d.v) == 1.0
        assert d.ratio == pytest.approx(1 / 3)

    def test_deep_products_do_not_underflow(self):
        d = Distortion.none()
        for _ in range(400):
            d = d * Distortion(0.1, 0.2)
        assert d.ratio == pytest.approx(0.5**400, rel=1e-9)


class TestCorrectionKraus:
    def test_single_hop_form(self):
        ch = Channel.from_alpha2(0.3)
        k = correction_kraus(Distortion(ch.alpha, ch.beta))
        np.testing.assert_allclose(k.e_success, np.diag([1, ch.alpha / ch.beta]), atol=1e-15)
        np.testing.assert_allclose(
            k.e_fail, np.diag([0, math.sqrt(1 - ch.alpha2 / ch.beta**2)]), atol=1e-15
        )

    def test_swapped_squared_form(self):
        ch = Channel.from_alpha2(0.3)
        k = correction_kraus(Distortion(ch.beta**2, ch.alpha2))
        np.testing.assert_allclose(k.e_success, np.diag([ch.alpha2 / ch.beta**2, 1]), atol=1e-15)
        np.testing.assert_allclose(
            k.e_fail, np.diag([math.sqrt(1 - ch.alpha2**2 / ch.beta**4), 0]), atol=1e-15
        )

    def test_balanced_is_identity(self):
        assert correction_kraus(Distortion(1, 1)).is_identity
        assert correction_kraus(Distortion(0.3, 0.3)).is_identity

    def test_complete_across_alpha(self):
        for alpha in np.linspace(1e-3, math.sqrt(0.5), 1000):
            ch = Channel.from_alpha(alpha)
            for d in (Distortion(ch.alpha, ch.beta), Distortion(ch.beta, ch.alpha)):
                assert correction_kraus(d).completeness_error() <= 1e-12

    def test_success_weight_is_min_squared(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            u, v = rng.uniform(1e-3, 1.0, size=2)
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            nrm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
            a, b = a / nrm, b / nrm
            k = correction_kraus(Distortion(u, v))
            distorted = np.array([u * a, v * b])
            weight = np.linalg.norm(k.e_success @ distorted) ** 2
            assert weight == pytest.approx(min(u, v) ** 2, abs=1e-12)
            post = PureState(k.e_success @ distorted).normalized()
            assert fidelity(post, PureState.qubit(a, b)) == pytest.approx(1.0, abs=1e-12)

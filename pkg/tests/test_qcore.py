import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiteleport.channels import Channel, channel_state
from multiteleport.qcore import (
    BELL_VECTORS,
    MAX_QUBITS,
    BellOutcome,
    CapacityError,
    KrausPair,
    PauliCorrection,
    PureState,
    RandomSource,
    apply_single_qubit,
    bell_branches,
    bell_measure,
    correction_for,
    fidelity,
    generalized_measure,
    pick_branch,
    tensor,
)

S = 1 / math.sqrt(2)


def random_state(rng, n=1):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState(v / np.linalg.norm(v))


angles = st.floats(0, 2 * math.pi, allow_nan=False)


@st.composite
def qubits(draw):
    theta = draw(st.floats(0, math.pi))
    phi = draw(angles)
    return complex(math.cos(theta / 2)), complex(math.sin(theta / 2) * np.exp(1j * phi))


class TestPureState:
    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            PureState(np.ones(3))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            PureState([np.nan, 1.0])

    def test_immutable(self):
        s = PureState.qubit(1, 0)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_basis(self):
        s = PureState.basis("101")
        assert s.num_qubits == 3
        assert s.amplitudes[5] == 1

    def test_capacity(self):
        a = PureState.basis("0" * 12)
        b = PureState.basis("0" * 13)
        assert MAX_QUBITS == 24
        with pytest.raises(CapacityError):
            tensor(a, b)


class TestTensor:
    def test_basis_product(self):
        out = tensor(PureState.basis("0"), PureState.basis("0"))
        np.testing.assert_array_equal(out.amplitudes, [1, 0, 0, 0])

    def test_payload_with_channel(self):
        a, b = 0.6, 0.8j
        ch = Channel.from_alpha2(0.3)
        out = tensor(PureState.qubit(a, b), channel_state(ch))
        expected = np.zeros(8, dtype=complex)
        expected[0b000] = a * ch.alpha
        expected[0b011] = a * ch.beta
        expected[0b100] = b * ch.alpha
        expected[0b111] = b * ch.beta
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)

    def test_norm_multiplicative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            out = tensor(random_state(rng, 2), random_state(rng, 1))
            assert out.is_normalized()


class TestSingleQubit:
    def test_x_flips(self):
        out = apply_single_qubit(PureState.basis("0"), 0, PauliCorrection.X.matrix)
        np.testing.assert_array_equal(out.amplitudes, [0, 1])

    def test_z_on_plus(self):
        out = apply_single_qubit(PureState.qubit(S, S), 0, PauliCorrection.Z.matrix)
        np.testing.assert_allclose(out.amplitudes, [S, -S])

    def test_iy_on_zero(self):
        out = apply_single_qubit(PureState.basis("0"), 0, PauliCorrection.IY.matrix)
        np.testing.assert_allclose(out.amplitudes, [0, -1])
        assert fidelity(out, PureState.basis("1")) == pytest.approx(1.0, abs=1e-15)

    def test_addresses_one_factor(self):
        rng = np.random.default_rng(0)
        a, b, c = (random_state(rng) for _ in range(3))
        op = PauliCorrection.X.matrix
        out = apply_single_qubit(tensor(tensor(a, b), c), 1, op)
        expected = tensor(tensor(a, PureState(op @ b.amplitudes)), c)
        np.testing.assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-15)

    def test_no_renormalization(self):
        out = apply_single_qubit(PureState.qubit(S, S), 0, np.diag([1.0, 0.0]))
        assert out.norm() == pytest.approx(S)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_single_qubit(PureState.basis("00"), 2, np.eye(2))


class TestBell:
    def test_wire_encoding(self):
        assert [o.value for o in BellOutcome] == [0, 1, 2, 3]
        assert BellOutcome.PSI_MINUS.parity == 1 and BellOutcome.PSI_MINUS.phase == 1
        for o in BellOutcome:
            assert BellOutcome.from_bits(o.parity, o.phase) is o

    def test_correction_table(self):
        assert correction_for(BellOutcome.PHI_PLUS) is PauliCorrection.IDENTITY
        assert correction_for(BellOutcome.PHI_MINUS) is PauliCorrection.Z
        assert correction_for(BellOutcome.PSI_PLUS) is PauliCorrection.X
        assert correction_for(BellOutcome.PSI_MINUS) is PauliCorrection.IY

    def test_bell_vectors_orthonormal(self):
        np.testing.assert_allclose(BELL_VECTORS @ BELL_VECTORS.conj().T, np.eye(4), atol=1e-15)

    def test_eigenstate(self):
        branches = bell_branches(PureState([S, 0, 0, S]), 0, 1)
        assert branches[0].outcome is BellOutcome.PHI_PLUS
        assert branches[0].probability == pytest.approx(1.0, abs=1e-15)
        for br in branches[1:]:
            assert br.probability < 1e-14 and br.state is None
        assert branches[0].state.num_qubits == 0

    def test_phi_plus_branch_of_teleport_register(self):
        a, b = 0.6, 0.8j
        ch = Channel.from_alpha2(0.3)
        reg = tensor(PureState.qubit(a, b), channel_state(ch))
        br = bell_branches(reg, 0, 1)[BellOutcome.PHI_PLUS]
        p1 = abs(a * ch.alpha) ** 2 + abs(b * ch.beta) ** 2
        assert br.probability == pytest.approx(p1 / 2, abs=1e-15)
        expected = PureState.qubit(ch.alpha * a, ch.beta * b).normalized()
        assert fidelity(br.state, expected) == pytest.approx(1.0, abs=1e-14)

    def test_sum_to_one_random(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            n = int(rng.integers(2, 5))
            q1, q2 = rng.choice(n, size=2, replace=False)
            branches = bell_branches(random_state(rng, n), int(q1), int(q2))
            assert abs(sum(b.probability for b in branches) - 1.0) <= 1e-12
            for br in branches:
                if br.state is not None:
                    assert br.state.is_normalized()
                    assert br.state.num_qubits == n - 2

    def test_nonadjacent_qubits(self):
        # Phi+ spread over qubits 0 and 2 with qubit 1 in |1>
        amps = np.zeros(8)
        amps[0b010] = amps[0b111] = S
        br = bell_branches(PureState(amps), 0, 2)
        assert br[0].probability == pytest.approx(1.0)
        np.testing.assert_allclose(br[0].state.amplitudes, [0, 1], atol=1e-15)

    def test_index_errors(self):
        s = PureState.basis("000")
        with pytest.raises(ValueError):
            bell_branches(s, 1, 1)
        with pytest.raises(IndexError):
            bell_branches(s, 0, 3)

    @settings(max_examples=200, deadline=None)
    @given(qubits(), st.floats(0.01, 0.5))
    def test_corrections_give_two_families(self, ab, alpha2):
        a, b = ab
        ch = Channel.from_alpha2(alpha2)
        reg = tensor(PureState.qubit(a, b), channel_state(ch))
        psi1 = PureState.qubit(ch.alpha * a, ch.beta * b).normalized()
        psi2 = PureState.qubit(ch.beta * a, ch.alpha * b).normalized()
        for br in bell_branches(reg, 0, 1):
            if br.state is None:
                continue
            fixed = apply_single_qubit(br.state, 0, correction_for(br.outcome).matrix)
            target = psi2 if br.outcome.parity else psi1
            assert fidelity(fixed, target) == pytest.approx(1.0, abs=1e-12)


class TestSampling:
    def test_pick_skips_zero(self):
        assert pick_branch([0.0, 0.5, 0.5], 0.0) == 1
        assert pick_branch([0.5, 0.5, 0.0], 0.999999999) == 1
        assert pick_branch([0.3, 0.7], 1.0) == 1

    def test_random_source_deterministic(self):
        a, b = RandomSource(42), RandomSource(42)
        assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]
        with pytest.raises(ValueError):
            RandomSource(-1)

    def test_phi_plus_always(self):
        rng = RandomSource(1)
        for _ in range(100):
            outcome, _, p = bell_measure(PureState([S, 0, 0, S]), 0, 1, rng)
            assert outcome is BellOutcome.PHI_PLUS

    def test_returned_probability_matches_enumeration(self):
        rng = RandomSource(7)
        state = random_state(np.random.default_rng(2), 3)
        table = {b.outcome: b.probability for b in bell_branches(state, 0, 2)}
        for _ in range(50):
            outcome, _, p = bell_measure(state, 0, 2, rng)
            assert p == table[outcome]

    def test_frequencies_match_branches(self):
        state = tensor(PureState.qubit(0.6, 0.8j), channel_state(Channel.from_alpha2(0.2)))
        probs = np.array([b.probability for b in bell_branches(state, 0, 1)])
        rng = RandomSource(2026)
        trials = 100_000
        u = np.random.default_rng(5).random(trials)
        counts = np.bincount([pick_branch(probs, x) for x in u], minlength=4)
        sigma = np.sqrt(probs * (1 - probs) / trials)
        assert np.all(np.abs(counts / trials - probs) <= 4 * sigma)
        # and through the public sampler on a smaller run
        n = 5_000
        counts = np.bincount([bell_measure(state, 0, 1, rng)[0] for _ in range(n)], minlength=4)
        assert np.all(np.abs(counts / n - probs) <= 4 * np.sqrt(probs * (1 - probs) / n))


class TestKraus:
    def test_completeness_checked(self):
        bad = KrausPair(np.eye(2), np.eye(2))
        assert not bad.is_complete()
        with pytest.raises(ValueError):
            generalized_measure(PureState.basis("0"), 0, bad, RandomSource(0))

    def test_identity_pair(self):
        s = PureState.qubit(0.6, 0.8)
        ok, post, p = generalized_measure(s, 0, KrausPair.identity(), RandomSource(0))
        assert ok and p == pytest.approx(1.0)
        np.testing.assert_allclose(post.amplitudes, s.amplitudes)

    def test_filter_restores_payload(self):
        a, b = 0.6, 0.8j
        ch = Channel.from_alpha2(0.2)
        psi1 = PureState.qubit(ch.alpha * a, ch.beta * b).normalized()
        es = np.diag([1.0, ch.alpha / ch.beta])
        ef = np.diag([0.0, math.sqrt(1 - ch.alpha2 / ch.beta**2)])
        kraus = KrausPair(es, ef)
        assert kraus.is_complete()
        rng = RandomSource(3)
        seen = False
        for _ in range(50):
            ok, post, _ = generalized_measure(psi1, 0, kraus, rng)
            if ok:
                seen = True
                assert fidelity(post, PureState.qubit(a, b)) == pytest.approx(1.0, abs=1e-14)
        assert seen


class TestFidelity:
    def test_basic(self):
        x = PureState.qubit(0.6, 0.8j)
        assert fidelity(x, x) == pytest.approx(1.0)
        assert fidelity(PureState.basis("0"), PureState.basis("1")) == 0.0
        rotated = PureState(np.exp(1j * math.pi / 3) * x.amplitudes)
        assert fidelity(x, rotated) == pytest.approx(1.0, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(PureState.basis("0"), PureState.basis("00"))

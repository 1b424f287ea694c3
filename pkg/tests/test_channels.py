import numpy as np
import pytest

from qwk import channels as ch
from qwk.channels import (
    ChannelError,
    ClassicalChannel,
    CQChannel,
    CompoundWiretapSpec,
    KrausChannel,
    StinespringIsometry,
    apply_channel,
    bsc,
    build_tau_net,
    choi_matrix,
    complementary_channel,
    classical_to_cq,
    depolarizing_kraus,
    diamond_distance,
    identity_kraus,
    kraus_equivalent,
    kraus_to_stinespring,
    mix_kraus,
    n_fold,
    nearest_in_net,
    pad_kraus,
    stinespring_to_kraus,
    tau_net_cardinality_bound,
)
from qwk.infotheory import coherent_information, von_neumann_entropy
from qwk.qcore import (
    DensityOperator,
    HilbertLabel,
    maximally_mixed,
    random_density,
    random_unitary,
    trace_norm,
)

Q = HilbertLabel("q", 2)


def random_kraus_channel(rng, d=2, k=2):
    """Random CPTP map from a Haar-ish isometry."""
    g = rng.normal(size=(d * k, d)) + 1j * rng.normal(size=(d * k, d))
    q, _ = np.linalg.qr(g)
    ops = [q[i * d : (i + 1) * d, :] for i in range(k)]
    l = HilbertLabel("q", d)
    return KrausChannel(l, l, ops)


class TestApplyAndNFold:
    def test_identity_kraus_apply(self):
        rho = maximally_mixed(Q)
        out = apply_channel(identity_kraus(), rho)
        assert np.allclose(out.matrix, rho.matrix)

    def test_bsc_row(self):
        out = apply_channel(bsc(0.1), 0)
        assert np.allclose(out, [0.9, 0.1])

    def test_fully_depolarizing_sends_to_maximally_mixed(self):
        rng = np.random.default_rng(0)
        rho = random_density(Q, rng)
        out = apply_channel(depolarizing_kraus(1.0), rho)
        # oracle: explicit Kraus sum with the four scaled Paulis
        oracle = sum(a @ rho.matrix @ a.conj().T for a in depolarizing_kraus(1.0).kraus_ops)
        assert np.allclose(out.matrix, oracle)
        assert np.allclose(out.matrix, np.eye(2) / 2, atol=1e-12)

    def test_n_fold_one_is_same_channel(self):
        c = bsc(0.1)
        assert n_fold(c, 1) is c

    def test_n_fold_bsc_product_rule(self):
        c2 = n_fold(bsc(0.1), 2)
        probs = apply_channel(c2, (0, 0))
        q, p = 0.9, 0.1
        assert np.allclose(probs, [q * q, q * p, p * q, p * p])

    def test_n_fold_quantum_acts_as_tensor_power(self):
        rng = np.random.default_rng(1)
        chan = random_kraus_channel(rng)
        c2 = n_fold(chan, 2)
        rho = random_density(Q, rng)
        sigma = random_density(Q, rng)
        joint = np.kron(rho.matrix, sigma.matrix)
        out2 = c2.apply_matrix(joint)
        expect = np.kron(chan.apply_matrix(rho.matrix), chan.apply_matrix(sigma.matrix))
        assert np.max(np.abs(out2 - expect)) < 1e-10

    def test_apply_channel_domain_mismatch(self):
        with pytest.raises(ChannelError):
            apply_channel(identity_kraus(), maximally_mixed(HilbertLabel("x", 3)))


class TestKrausStinespring:
    def test_identity_dilation(self):
        s = kraus_to_stinespring(identity_kraus())
        assert s.env_space.dim == 1
        assert np.allclose(s.isometry, np.eye(2))

    def test_bit_flip_round_trip_on_states(self):
        rng = np.random.default_rng(2)
        flip = KrausChannel(
            Q, Q, [np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * np.array([[0, 1], [1, 0]])]
        )
        s = kraus_to_stinespring(flip)
        assert s.env_space.dim == 2
        for _ in range(10):
            rho = random_density(Q, rng)
            assert np.max(np.abs(s.apply_matrix(rho.matrix) - flip.apply_matrix(rho.matrix))) < 1e-10

    def test_two_kraus_isometry_property(self):
        rng = np.random.default_rng(3)
        chan = random_kraus_channel(rng)
        s = kraus_to_stinespring(chan)
        u = s.isometry
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-10

    def test_round_trip_equivalence_100_random(self):
        rng = np.random.default_rng(4)
        for i in range(100):
            d = 2 if i % 3 else 3
            chan = random_kraus_channel(rng, d=d, k=2)
            back = stinespring_to_kraus(kraus_to_stinespring(chan))
            assert kraus_equivalent(chan, back)

    def test_complementary_identity_channel(self):
        comp = complementary_channel(kraus_to_stinespring(identity_kraus()))
        rng = np.random.default_rng(5)
        rho = random_density(Q, rng)
        env = comp.apply_matrix(rho.matrix)
        assert np.allclose(env, [[1.0]])

    def test_complementary_depolarizing_env_entropy(self):
        s = kraus_to_stinespring(depolarizing_kraus(1.0))
        env = s.env_matrix(np.eye(2) / 2)
        assert von_neumann_entropy(env) == pytest.approx(2.0, abs=1e-9)

    def test_coherent_information_identity_on_outputs(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            chan = random_kraus_channel(rng)
            s = kraus_to_stinespring(chan)
            comp = complementary_channel(s)
            rho = random_density(Q, rng)
            lhs = von_neumann_entropy(chan.apply_matrix(rho.matrix)) - von_neumann_entropy(
                comp.apply_matrix(rho.matrix)
            )
            assert lhs == pytest.approx(coherent_information(rho, chan), abs=1e-8)


class TestKrausEquivalence:
    def test_identity_equivalent_to_itself(self):
        assert kraus_equivalent(identity_kraus(), identity_kraus())

    def test_unitary_mixing_preserves_channel(self):
        z = np.array([[1, 0], [0, -1]], dtype=complex)
        k1 = KrausChannel(Q, Q, [np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * z])
        u = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        k2 = mix_kraus(k1, u)
        assert kraus_equivalent(k1, k2)

    def test_identity_vs_bit_flip_not_equivalent(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        flip = KrausChannel(Q, Q, [x])
        assert not kraus_equivalent(identity_kraus(), flip)

    def test_padding_keeps_channel(self):
        k = identity_kraus()
        padded = pad_kraus(k, 3)
        assert len(padded.kraus_ops) == 3
        assert kraus_equivalent(k, padded)

    def test_random_unitary_mixing(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            chan = random_kraus_channel(rng, k=3)
            u = random_unitary(3, rng)
            assert kraus_equivalent(chan, mix_kraus(chan, u))


class TestDiamondDistance:
    def test_self_distance_zero(self):
        assert diamond_distance(identity_kraus(), identity_kraus()) == pytest.approx(0.0, abs=1e-9)

    def test_identity_vs_bit_flip_is_two(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        flip = KrausChannel(Q, Q, [x])
        d = diamond_distance(identity_kraus(), flip, restarts=4, seed=1)
        assert d == pytest.approx(2.0, abs=1e-8)

    def test_identity_vs_depolarizing_in_band_and_reproducible(self):
        d1 = diamond_distance(identity_kraus(), depolarizing_kraus(1.0), restarts=6, seed=0)
        d2 = diamond_distance(identity_kraus(), depolarizing_kraus(1.0), restarts=6, seed=99)
        assert 1.0 <= d1 <= 2.0
        assert abs(d1 - d2) < 1e-6
        # known value 1.5 for identity vs fully depolarizing on a qubit
        assert d1 == pytest.approx(1.5, abs=1e-6)

    def test_lower_bounds_single_state_distances(self):
        rng = np.random.default_rng(8)
        n1 = random_kraus_channel(rng)
        n2 = random_kraus_channel(rng)
        est = diamond_distance(n1, n2, restarts=8, seed=3)
        for _ in range(20):
            rho = random_density(Q, rng)
            assert est + 1e-9 >= trace_norm(n1.apply_matrix(rho.matrix) - n2.apply_matrix(rho.matrix))

    def test_never_exceeds_two(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            n1, n2 = random_kraus_channel(rng), random_kraus_channel(rng)
            assert diamond_distance(n1, n2, restarts=2, seed=0) <= 2.0 + 1e-12


class TestTauNet:
    def test_cardinality_bound_value(self):
        assert tau_net_cardinality_bound(2, 1.0) == pytest.approx(3.0 ** 32)

    def test_large_tau_singleton(self):
        net = build_tau_net(2, 2, 2.0, budget=10)
        assert len(net.elements) == 1

    def test_budget_zero_rejected(self):
        with pytest.raises(ChannelError):
            build_tau_net(2, 2, 0.5, budget=0)

    def test_net_elements_are_cptp(self):
        net = build_tau_net(2, 2, 0.5, budget=6)
        assert 1 <= len(net.elements) <= 6
        for elem in net.elements:
            comp = sum(a.conj().T @ a for a in elem.kraus_ops)
            assert np.max(np.abs(comp - np.eye(2))) < 1e-8

    def test_net_is_deterministic(self):
        n1 = build_tau_net(2, 2, 0.5, budget=4)
        n2 = build_tau_net(2, 2, 0.5, budget=4)
        for e1, e2 in zip(n1.elements, n2.elements):
            assert np.max(np.abs(choi_matrix(e1) - choi_matrix(e2))) < 1e-12

    def test_nearest_with_identity_in_net(self):
        net = ch.TauNet(1.0, (identity_kraus(), depolarizing_kraus(1.0)), 3.0 ** 32, 2, 2)
        elem, dist = nearest_in_net(net, identity_kraus(), restarts=2, seed=0)
        assert dist == pytest.approx(0.0, abs=1e-9)
        assert kraus_equivalent(elem, identity_kraus())

    def test_singleton_net_returns_its_element(self):
        net = ch.TauNet(2.0, (depolarizing_kraus(0.3),), 1.0, 2, 2)
        elem, _ = nearest_in_net(net, identity_kraus())
        assert kraus_equivalent(elem, depolarizing_kraus(0.3))

    def test_empty_net_rejected(self):
        net = ch.TauNet(1.0, tuple(), 1.0, 2, 2)
        with pytest.raises(ChannelError):
            nearest_in_net(net, identity_kraus())

    def test_hand_built_net_covers_nearby_target(self):
        # lattice of targets built from mixtures of net members: nearest element
        # must sit within the declared radius
        tau = 1.0
        members = (
            identity_kraus(),
            depolarizing_kraus(0.5),
            depolarizing_kraus(1.0),
            KrausChannel(Q, Q, [np.array([[0, 1], [1, 0]], dtype=complex)]),
        )
        net = ch.TauNet(tau, members, tau_net_cardinality_bound(2, tau), 2, 2)
        for p in [0.05, 0.45, 0.95]:
            target = depolarizing_kraus(p)
            _, dist = nearest_in_net(net, target, restarts=2, seed=0)
            assert dist <= tau + 1e-9


class TestCompoundSpec:
    def test_variant_checked(self):
        with pytest.raises(ChannelError):
            CompoundWiretapSpec("bogus", ("t1",), (bsc(0.1),), (bsc(0.3),))

    def test_alphabet_mismatch_rejected(self):
        other = ClassicalChannel((0, 1, 2), (0, 1), [[1, 0], [0, 1], [0.5, 0.5]])
        with pytest.raises(ChannelError):
            CompoundWiretapSpec("classical", ("a", "b"), (bsc(0.1), other), (bsc(0.3), bsc(0.3)))

    def test_classical_embedding(self):
        cq = classical_to_cq(bsc(0.1))
        assert isinstance(cq, CQChannel)
        assert np.allclose(cq.state_matrix(0), np.diag([0.9, 0.1]))

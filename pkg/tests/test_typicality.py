import itertools

import numpy as np
import pytest

from qwk.channels import CQChannel
from qwk.qcore import (
    CapExceededError,
    DensityOperator,
    HilbertLabel,
    QcoreError,
    basis_state,
    maximally_mixed,
    psd_sqrt,
    random_density,
    trace_norm,
)
from qwk.typicality import (
    TypicalParams,
    averaged_output_projector,
    conditional_typical_projector,
    sandwiched_output,
    averaged_trace_check,
    truncated_typical,
    typical_projector,
    typical_set,
    word_probability,
)

A = HilbertLabel("A", 2)


class TestTypicalSet:
    def test_uniform_large_delta_keeps_everything(self):
        words = typical_set([0.5, 0.5], 2, 0.5)
        assert len(words) == 4

    def test_point_mass_keeps_only_constant_word(self):
        words = typical_set([1.0, 0.0], 5, 0.2)
        assert words == [(0, 0, 0, 0, 0)]

    def test_balanced_words_enumeration(self):
        words = typical_set([0.5, 0.5], 4, 0.1)
        # oracle: exhaustive enumeration of exactly balanced words
        oracle = [w for w in itertools.product(range(2), repeat=4) if sum(w) == 2]
        assert words == oracle
        assert len(words) == 6

    def test_cap_enforced(self):
        with pytest.raises(CapExceededError):
            typical_set([0.5, 0.5], 30, 0.1)


class TestTruncatedTypical:
    def test_point_mass(self):
        words, probs = truncated_typical([1.0, 0.0], 4, 0.1)
        assert words == [(0, 0, 0, 0)]
        assert probs[0] == pytest.approx(1.0)

    def test_uniform_large_delta(self):
        words, probs = truncated_typical([0.5, 0.5], 3, 0.6)
        assert len(words) == 8
        assert np.allclose(probs, 1 / 8)

    def test_weighted_masses_sum_to_one(self):
        words, probs = truncated_typical([0.8, 0.2], 5, 0.1)
        # with this slack only words with exactly one '1' qualify
        assert all(sum(w) == 1 for w in words)
        assert len(words) == 5
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        raw = np.array([word_probability([0.8, 0.2], w) for w in words])
        assert np.allclose(probs, raw / raw.sum())

    def test_empty_typical_set_rejected(self):
        with pytest.raises(QcoreError):
            truncated_typical([0.5, 0.5], 3, 0.01)


class TestTypicalProjector:
    def test_maximally_mixed_gives_identity(self):
        params = TypicalParams(n=3, alpha=1.0)
        proj = typical_projector(maximally_mixed(A), params)
        assert proj.rank == 8
        assert proj.trace_with_reference() == pytest.approx(1.0)
        assert np.allclose(proj.matrix, np.eye(8))

    def test_pure_state_gives_rank_one(self):
        params = TypicalParams(n=4, alpha=1.0)
        proj = typical_projector(basis_state(A, 0).to_density(), params)
        assert proj.rank == 1
        assert proj.trace_with_reference() == pytest.approx(1.0)

    def test_diag_07_03_all_bounds_pass_at_k1(self):
        rho = DensityOperator((A,), np.diag([0.7, 0.3]))
        params = TypicalParams(n=8, alpha=1.0, k_const=1.0)
        proj = typical_projector(rho, params)
        assert all(c.passed for c in proj.checks)
        assert proj.rank >= 1

    def test_projector_is_projector_and_commutes(self):
        rng = np.random.default_rng(0)
        rho = random_density(A, rng)
        params = TypicalParams(n=4, alpha=0.7)
        proj = typical_projector(rho, params)
        p = proj.matrix
        assert np.max(np.abs(p @ p - p)) < 1e-8
        assert np.max(np.abs(p - p.conj().T)) < 1e-10
        ref = rho.matrix
        full = np.array([[1.0 + 0j]])
        for _ in range(4):
            full = np.kron(full, ref)
        assert np.max(np.abs(p @ full - full @ p)) < 1e-8

    def test_trace_matches_dense_computation(self):
        rng = np.random.default_rng(1)
        rho = random_density(A, rng)
        params = TypicalParams(n=3, alpha=0.5)
        proj = typical_projector(rho, params)
        full = np.array([[1.0 + 0j]])
        for _ in range(3):
            full = np.kron(full, rho.matrix)
        dense = np.trace(full @ proj.matrix).real
        assert proj.trace_with_reference() == pytest.approx(dense, abs=1e-10)

    def test_bound_suite_qubits(self):
        rng = np.random.default_rng(2)
        states = [DensityOperator((A,), np.diag([0.7, 0.3]))]
        states += [random_density(A, rng) for _ in range(10)]
        for rho in states:
            for n in (4, 6, 8, 10):
                for alpha in (0.5, 1.0, 2.0):
                    proj = typical_projector(rho, TypicalParams(n=n, alpha=alpha))
                    for c in proj.checks:
                        assert c.passed, (
                            f"{c.bound_id} failed: lhs={c.lhs} rhs={c.rhs} "
                            f"n={n} alpha={alpha} eigs={np.linalg.eigvalsh(rho.matrix)}"
                        )

    def test_report_records(self):
        proj = typical_projector(maximally_mixed(A), TypicalParams(n=2))
        recs = proj.report()
        assert {r["bound_id"] for r in recs} == {"state-trace", "state-rank", "state-peak"}
        for r in recs:
            assert set(r) == {"bound_id", "lhs", "rhs", "pass", "min_k"}


def binary_cq(m0, m1):
    return CQChannel((0, 1), A, {0: np.asarray(m0, dtype=complex), 1: np.asarray(m1, dtype=complex)})


class TestConditionalProjector:
    def test_pure_outputs_rank_one(self):
        v = binary_cq(np.diag([1.0, 0.0]), [[0.5, 0.5], [0.5, 0.5]])
        params = TypicalParams(n=4, alpha=1.0)
        word = (0, 1, 0, 1)
        proj = conditional_typical_projector(v, word, [0.5, 0.5], params)
        assert proj.rank == 1
        assert proj.checks[0].lhs == pytest.approx(1.0)

    def test_constant_mixed_output_identity(self):
        v = binary_cq(np.eye(2) / 2, np.eye(2) / 2)
        params = TypicalParams(n=4, alpha=1.0)
        proj = conditional_typical_projector(v, (0, 0, 1, 1), [0.5, 0.5], params)
        assert proj.rank == 16

    def test_binary_channel_bounds_pass(self):
        v = binary_cq(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
        params = TypicalParams(n=6, alpha=1.0)
        proj = conditional_typical_projector(v, (0, 0, 0, 1, 1, 1), [0.5, 0.5], params)
        assert all(c.passed for c in proj.checks)

    def test_atypical_word_rejected(self):
        v = binary_cq(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
        params = TypicalParams(n=6, alpha=1.0, delta=0.1)
        with pytest.raises(QcoreError):
            conditional_typical_projector(v, (0, 0, 0, 0, 0, 0), [0.5, 0.5], params)

    def test_commutes_with_word_state(self):
        v = binary_cq(np.diag([0.7, 0.3]), [[0.6, 0.2], [0.2, 0.4]])
        params = TypicalParams(n=4, alpha=0.5)
        word = (0, 1, 1, 0)
        proj = conditional_typical_projector(v, word, [0.5, 0.5], params)
        state = np.array([[1.0 + 0j]])
        for x in word:
            state = np.kron(state, v.state_matrix(x))
        p = proj.matrix
        assert np.max(np.abs(p @ p - p)) < 1e-8
        assert np.max(np.abs(p @ state - state @ p)) < 1e-8


class TestAveragedProjector:
    def test_single_symbol_reduces_to_state_projector(self):
        v = CQChannel((0,), A, {0: np.diag([0.7, 0.3])})
        params = TypicalParams(n=4, alpha=1.0)
        proj = averaged_output_projector([1.0], v, params)
        base = typical_projector(
            DensityOperator((A,), np.diag([0.7, 0.3])),
            TypicalParams(n=4, alpha=1.0),
        )
        assert proj.rank == base.rank

    def test_pure_common_output_rank_one(self):
        v = binary_cq(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))
        proj = averaged_output_projector([0.5, 0.5], v, TypicalParams(n=3, alpha=1.0))
        assert proj.rank == 1

    def test_te7_passes_on_test_channel(self):
        v = binary_cq(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
        for n in (4, 6, 8):
            for alpha in (0.5, 1.0, 2.0):
                params = TypicalParams(n=n, alpha=alpha)
                word = tuple(i % 2 for i in range(n))
                proj = averaged_output_projector([0.5, 0.5], v, params)
                check = averaged_trace_check(proj, v, word, params)
                assert check.passed, f"te7 failed at n={n} alpha={alpha}"


class TestSandwich:
    def test_deviation_within_bound_random_words(self):
        rng = np.random.default_rng(3)
        v = binary_cq(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))
        for n in (4, 6, 8):
            params = TypicalParams(n=n, alpha=1.0)
            words = typical_set([0.5, 0.5], n, params.delta)
            pick = [words[i] for i in rng.choice(len(words), size=3, replace=False)]
            for word in pick:
                q, dev, bound = sandwiched_output(v, word, [0.5, 0.5], params)
                assert dev <= bound + 1e-9
                assert np.max(np.abs(q - q.conj().T)) < 1e-10

    def test_gentle_measurement_lemma_random_instances(self):
        rng = np.random.default_rng(4)
        label = HilbertLabel("X", 3)
        for _ in range(200):
            rho = random_density(label, rng)
            g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            h = g @ g.conj().T
            x = h / (np.linalg.eigvalsh(h).max() + rng.uniform(0.0, 1.0))
            lam = 1.0 - np.trace(rho.matrix @ x).real
            sx = psd_sqrt(x)
            dev = trace_norm(rho.matrix - sx @ rho.matrix @ sx)
            assert dev <= np.sqrt(8 * max(lam, 0.0)) + 1e-9

"""Classical and quantum information measures.

All logarithms are base 2 and all entropies are reported in bits.
Eigenvalues below 1e-12 are treated as exact zeros inside entropy sums.

Sign convention for the conditional quantum entropy: the entropy of the
full bipartite state minus the entropy of the reduced state on the
conditioning factor, which may be negative for entangled states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    CQChannel,
    ClassicalChannel,
    KrausChannel,
    StinespringIsometry,
    complementary_channel,
    kraus_to_stinespring,
)
from .qcore import (
    DensityOperator,
    HilbertLabel,
    QcoreError,
    partial_trace,
    purify,
)

_EIG_FLOOR = 1e-12


def _entropy_from_probs(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    mask = p > _EIG_FLOOR
    vals = p[mask]
    return float(-(vals * np.log2(vals)).sum())


def shannon_entropy(p) -> float:
    """Entropy of a probability vector in bits; 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    if p.min() < -1e-12:
        raise QcoreError("probabilities must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-9:
        raise QcoreError("probabilities must sum to 1")
    return _entropy_from_probs(p)


def binary_entropy(p: float) -> float:
    return shannon_entropy([p, 1.0 - p])


def mutual_information(prior, ch) -> float:
    """I(X;Y) for a prior on the input alphabet of a classical channel."""
    prior = np.asarray(prior, dtype=float)
    m = ch.matrix if isinstance(ch, ClassicalChannel) else np.asarray(ch, dtype=float)
    if prior.shape[0] != m.shape[0]:
        raise QcoreError("prior length does not match the input alphabet")
    p_out = prior @ m
    h_cond = sum(prior[i] * _entropy_from_probs(m[i]) for i in range(m.shape[0]))
    return max(0.0, _entropy_from_probs(p_out) - h_cond)


def von_neumann_entropy(rho) -> float:
    """S(rho) = -tr(rho log rho) in bits."""
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    ev = np.linalg.eigvalsh(m)
    return _entropy_from_probs(np.clip(ev, 0.0, None))


def conditional_qentropy(phi: DensityOperator, cond_on) -> float:
    """Entropy of the joint state minus the entropy of the reduced state.

    ``cond_on`` selects the factor(s) kept for the subtracted reduction.
    """
    name = cond_on if isinstance(cond_on, (list, tuple, set)) else [cond_on]
    reduced = partial_trace(phi, name)
    return von_neumann_entropy(phi) - von_neumann_entropy(reduced)


@dataclass(frozen=True)
class Ensemble:
    """A prior over labeled quantum states on one common space."""

    prior: np.ndarray
    states: tuple

    def __init__(self, prior, states):
        prior = np.asarray(prior, dtype=float)
        if prior.min() < -1e-12 or abs(prior.sum() - 1.0) > 1e-9:
            raise QcoreError("ensemble prior must be a distribution")
        states = tuple(states)
        if len(states) != prior.shape[0]:
            raise QcoreError("prior length does not match the state count")
        mats = []
        dim = None
        for s in states:
            m = s.matrix if isinstance(s, DensityOperator) else np.asarray(s, dtype=complex)
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise QcoreError("ensemble states live on different spaces")
            mats.append(m)
        prior.setflags(write=False)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "states", tuple(mats))


def holevo_chi(ensemble_or_prior, states=None) -> float:
    """Holevo quantity: S(average state) - average of state entropies."""
    if states is not None:
        ensemble = Ensemble(ensemble_or_prior, states)
    else:
        ensemble = ensemble_or_prior
    avg = sum(p * s for p, s in zip(ensemble.prior, ensemble.states))
    mean_entropy = sum(
        p * von_neumann_entropy(s) for p, s in zip(ensemble.prior, ensemble.states) if p > 0
    )
    return max(0.0, von_neumann_entropy(avg) - mean_entropy)


def coherent_information(rho: DensityOperator, ch) -> float:
    """S(N(rho)) minus the entropy of the joint output on reference (x) output.

    Computed through a purification of the input; the value is independent
    of which purification is chosen.
    """
    if isinstance(ch, KrausChannel):
        kraus = ch
    elif isinstance(ch, StinespringIsometry):
        from .channels import stinespring_to_kraus

        kraus = stinespring_to_kraus(ch)
    else:
        raise QcoreError("coherent information needs a quantum channel")
    if rho.dim != kraus.in_space.dim:
        raise QcoreError("state and channel input dimensions differ")
    out_entropy = von_neumann_entropy(kraus.apply_matrix(rho.matrix))
    ref = HilbertLabel("_ref", rho.dim)
    psi = purify(rho, ref)
    # system order of the purification is (original, ref)
    joint = np.outer(psi.vector, psi.vector.conj())
    din, dref, dout = rho.dim, ref.dim, kraus.out_space.dim
    lifted = np.zeros((dout * dref, dout * dref), dtype=complex)
    for a in kraus.kraus_ops:
        op = np.kron(a, np.eye(dref))
        lifted += op @ joint @ op.conj().T
    return out_entropy - von_neumann_entropy(lifted)


def conditional_channel_entropy(prior, v: CQChannel) -> float:
    """Average output entropy sum_x P(x) S(V(x))."""
    prior = np.asarray(prior, dtype=float)
    if prior.shape[0] != len(v.input_alphabet):
        raise QcoreError("prior length does not match the channel alphabet")
    return float(
        sum(
            prior[i] * von_neumann_entropy(v.state_matrix(x))
            for i, x in enumerate(v.input_alphabet)
            if prior[i] > 0
        )
    )


def cq_mutual_information(prior, v: CQChannel) -> float:
    """Holevo quantity of the ensemble a cq channel induces under a prior."""
    prior = np.asarray(prior, dtype=float)
    states = [v.state_matrix(x) for x in v.input_alphabet]
    return holevo_chi(prior, states)


def fannes_bound(dist: float, dim: int) -> float:
    """Entropy-continuity bound dist*log(d) - dist*log(dist) for trace-norm
    distance dist below 1/e."""
    if dist <= 0:
        return 0.0
    return dist * np.log2(dim) - dist * np.log2(dist)

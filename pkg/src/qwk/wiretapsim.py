"""Random-coding simulation for compound wiretap channels.

Codebooks are sampled i.i.d. from the truncated typical distribution;
decoding uses joint typicality (classical receivers) or the pretty-good
measurement over sandwiched outputs (quantum receivers).  Error statistics
are computed exactly whenever the output space is enumerable under the cap
and by Monte-Carlo otherwise; leakage is always computed exactly.

All randomness flows through a counter-based generator keyed by
(seed, stream, indices...), so any single sample is reproducible in
isolation.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .channels import (
    CQChannel,
    ClassicalChannel,
    CompoundWiretapSpec,
    apply_channel,
    cq_word_state,
)
from .infotheory import cq_mutual_information, von_neumann_entropy
from .qcore import CapExceededError, QcoreError, check_dim_cap, trace_norm
from .typicality import TypicalParams, sandwiched_output, truncated_typical

CLASSICAL_EXACT_CAP = 4096

_STREAM_CODEBOOK = 0
_STREAM_ERROR = 1
_STREAM_COVERING = 2
_STREAM_PROTOCOL = 3


def counter_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, key...)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class Codebook:
    """Array of input words indexed by (message j, randomization l)."""

    words: np.ndarray  # (J, L, n) symbol indices
    J: int
    L: int
    n: int
    source: dict

    def word(self, j: int, l: int) -> tuple:
        return tuple(int(x) for x in self.words[j, l])


@dataclass
class SimReport:
    kind: str
    per_t: dict
    stats: dict
    seed: int
    trials: int
    params: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# codebook sampling and sizing


def sample_codebook(p, n: int, J: int, L: int, seed: int, delta: float = 0.1) -> Codebook:
    """J*L words drawn i.i.d. from the truncated typical distribution."""
    if J < 1 or L < 1:
        raise QcoreError("J and L must be >= 1")
    words, probs = truncated_typical(p, n, delta)
    words_arr = np.asarray(words, dtype=int)
    out = np.zeros((J, L, n), dtype=int)
    for j in range(J):
        for l in range(L):
            rng = counter_rng(seed, _STREAM_CODEBOOK, j, l)
            out[j, l] = words_arr[rng.choice(len(words), p=probs)]
    return Codebook(out, J, L, n, {"p": list(np.asarray(p, float)), "delta": delta, "seed": seed})


def _wiretap_rate(p, ch) -> float:
    if isinstance(ch, ClassicalChannel):
        from .infotheory import mutual_information

        return mutual_information(p, ch)
    if isinstance(ch, CQChannel):
        return cq_mutual_information(p, ch)
    raise QcoreError("unsupported wiretap channel kind")


def sizes_from_rates(
    spec: CompoundWiretapSpec, p, n: int, rate_margin: float = 0.25, leak_margin: float = 0.0
):
    """Randomization depths and message count from the displayed size rules.

    Per state the randomization depth is ceil(2^(n(chi_t + 2*leak_margin)))
    and the message count is floor(2^(n min_t(I_t - log(L_t)/n - rate_margin)));
    a nonpositive exponent is flagged and J clamps to 1.
    """
    p = np.asarray(p, dtype=float)
    l_per_t = {}
    j_exponents = []
    for idx, name in enumerate(spec.names):
        chi = _wiretap_rate(p, spec.wiretap[idx])
        l_t = int(np.ceil(2 ** (n * (chi + 2 * leak_margin))))
        l_per_t[name] = l_t
        legit = _wiretap_rate(p, spec.legitimate[idx])
        j_exponents.append(legit - np.log2(l_t) / n - rate_margin)
    j_raw = 2 ** (n * min(j_exponents))
    degenerate = j_raw < 1.0
    j = max(1, int(np.floor(j_raw)))
    return j, l_per_t, degenerate


# ---------------------------------------------------------------------------
# decoders


def _conditional_counts(x: np.ndarray, y: np.ndarray, a: int, b: int) -> np.ndarray:
    counts = np.zeros((a, b))
    for xi, yi in zip(x, y):
        counts[xi, yi] += 1
    return counts


@dataclass
class TypicalityDecoder:
    """Joint-typicality decoding sets for a classical legitimate channel.

    y decodes to the smallest message with a conditionally typical codeword;
    anything left over is an error.
    """

    channel: ClassicalChannel
    codebook: Codebook
    delta: float

    def _typical_for(self, y: np.ndarray, x: np.ndarray) -> bool:
        w = self.channel.matrix
        a, b = w.shape
        counts = _conditional_counts(x, y, a, b)
        row_tot = counts.sum(axis=1)
        for ai in range(a):
            if row_tot[ai] == 0:
                continue
            emp = counts[ai] / row_tot[ai]
            if np.any(emp[w[ai] <= 0] > 0):
                return False
            if np.max(np.abs(emp - w[ai])) > self.delta + 1e-12:
                return False
        return True

    def decide(self, y) -> int | None:
        y = np.asarray(y, dtype=int)
        for j in range(self.codebook.J):
            for l in range(self.codebook.L):
                if self._typical_for(y, self.codebook.words[j, l]):
                    return j
        return None


@dataclass
class PrettyGoodDecoder:
    """Square-root measurement over sandwiched codeword outputs."""

    povm: list  # per-message operators
    leftover: np.ndarray

    @classmethod
    def build(cls, channel: CQChannel, codebook: Codebook, params: TypicalParams, prior=None):
        if prior is None:
            a = len(channel.input_alphabet)
            prior = np.full(a, 1.0 / a)
        sigmas = []
        for j in range(codebook.J):
            acc = None
            for l in range(codebook.L):
                q, _, _ = sandwiched_output(channel, codebook.word(j, l), prior, params)
                acc = q if acc is None else acc + q
            sigmas.append(acc / codebook.L)
        total = sum(sigmas)
        w, v = np.linalg.eigh(total)
        inv_sqrt = (v * np.where(w > 1e-12, 1.0 / np.sqrt(np.clip(w, 1e-300, None)), 0.0)) @ v.conj().T
        povm = [inv_sqrt @ s @ inv_sqrt for s in sigmas]
        leftover = np.eye(total.shape[0]) - sum(povm)
        return cls(povm, leftover)


def build_decoder(spec: CompoundWiretapSpec, codebook: Codebook, delta: float = 0.15,
                  params: TypicalParams | None = None, t_index: int = 0):
    """Decoder for the legitimate channel of the given state index."""
    legit = spec.legitimate[t_index]
    if isinstance(legit, ClassicalChannel):
        return TypicalityDecoder(legit, codebook, delta)
    if isinstance(legit, CQChannel):
        if params is None:
            params = TypicalParams(n=codebook.n)
        return PrettyGoodDecoder.build(legit, codebook, params)
    raise QcoreError("unsupported legitimate channel kind")


# ---------------------------------------------------------------------------
# error evaluation


def _word_output_probs(w: np.ndarray, x: np.ndarray, y_words: np.ndarray) -> np.ndarray:
    """W^n(y|x) for every enumerated output word (vectorized per letter)."""
    probs = np.ones(len(y_words))
    for i, xi in enumerate(x):
        probs *= w[xi, y_words[:, i]]
    return probs


def eval_error(
    spec: CompoundWiretapSpec,
    codebook: Codebook,
    decoder,
    trials: int = 2000,
    seed: int = 0,
) -> SimReport:
    """Per-state max-over-message average decoding error of the codebook.

    Classical outputs are enumerated exactly when |B|^n is under the cap;
    otherwise the error is estimated by Monte-Carlo with a standard error.
    Quantum receivers are always evaluated exactly.
    """
    if trials < 1:
        raise QcoreError("trials must be >= 1")
    per_t = {}
    for idx, name in enumerate(spec.names):
        legit = spec.legitimate[idx]
        if isinstance(legit, ClassicalChannel):
            b = len(legit.output_alphabet)
            if b ** codebook.n <= CLASSICAL_EXACT_CAP:
                per_t[name] = _exact_classical_error(legit, codebook, decoder)
            else:
                per_t[name] = _mc_classical_error(legit, codebook, decoder, trials, seed, idx)
        elif isinstance(legit, CQChannel):
            per_t[name] = _exact_quantum_error(legit, codebook, decoder)
        else:
            raise QcoreError("unsupported legitimate channel kind")
    return SimReport(
        kind="error",
        per_t=per_t,
        stats={"max_over_t": max(v["max_error"] for v in per_t.values())},
        seed=seed,
        trials=trials,
        params={"J": codebook.J, "L": codebook.L, "n": codebook.n},
    )


def _exact_classical_error(legit: ClassicalChannel, codebook: Codebook, decoder) -> dict:
    b = len(legit.output_alphabet)
    y_words = np.asarray(list(itertools.product(range(b), repeat=codebook.n)), dtype=int)
    decisions = np.array(
        [d if (d := decoder.decide(y)) is not None else -1 for y in y_words]
    )
    per_j = []
    for j in range(codebook.J):
        wrong_mask = decisions != j
        err = 0.0
        for l in range(codebook.L):
            probs = _word_output_probs(legit.matrix, codebook.words[j, l], y_words)
            err += probs[wrong_mask].sum() / codebook.L
        per_j.append(float(err))
    return {"max_error": float(max(per_j)), "per_j": per_j, "method": "exact"}


def _mc_classical_error(
    legit: ClassicalChannel, codebook: Codebook, decoder, trials: int, seed: int, t_idx: int
) -> dict:
    per_j = []
    per_j_se = []
    for j in range(codebook.J):
        wrong = 0
        for k in range(trials):
            rng = counter_rng(seed, _STREAM_ERROR, t_idx, j, k)
            l = int(rng.integers(codebook.L))
            x = codebook.words[j, l]
            y = np.array([rng.choice(legit.matrix.shape[1], p=legit.matrix[xi]) for xi in x])
            if decoder.decide(y) != j:
                wrong += 1
        p_hat = wrong / trials
        per_j.append(float(p_hat))
        per_j_se.append(float(np.sqrt(max(p_hat * (1 - p_hat), 1e-12) / trials)))
    worst = int(np.argmax(per_j))
    return {
        "max_error": per_j[worst],
        "per_j": per_j,
        "stderr": per_j_se[worst],
        "method": "mc",
    }


def _exact_quantum_error(legit: CQChannel, codebook: Codebook, decoder) -> dict:
    per_j = []
    for j in range(codebook.J):
        rho = None
        for l in range(codebook.L):
            m = cq_word_state(legit, [legit.input_alphabet[x] for x in codebook.words[j, l]]).matrix
            rho = m if rho is None else rho + m
        rho = rho / codebook.L
        good = np.trace(decoder.povm[j] @ rho).real
        per_j.append(float(1.0 - good))
    return {"max_error": float(max(per_j)), "per_j": per_j, "method": "exact"}


# ---------------------------------------------------------------------------
# leakage


def eval_leakage(spec: CompoundWiretapSpec, codebook: Codebook) -> SimReport:
    """Exact leakage of the uniform message through each wiretap channel."""
    per_t = {}
    for idx, name in enumerate(spec.names):
        wire = spec.wiretap[idx]
        if isinstance(wire, ClassicalChannel):
            per_t[name] = {"leakage": _classical_leakage(wire, codebook)}
        elif isinstance(wire, CQChannel):
            per_t[name] = {"leakage": _quantum_leakage(wire, codebook)}
        else:
            raise QcoreError("unsupported wiretap channel kind")
    return SimReport(
        kind="leakage",
        per_t=per_t,
        stats={"max_over_t": max(v["leakage"] for v in per_t.values()),
               "log2_J": float(np.log2(codebook.J))},
        seed=int(codebook.source.get("seed", 0)),
        trials=0,
        params={"J": codebook.J, "L": codebook.L, "n": codebook.n},
    )


def _classical_leakage(wire: ClassicalChannel, codebook: Codebook) -> float:
    b = len(wire.output_alphabet)
    if b ** codebook.n > CLASSICAL_EXACT_CAP:
        raise CapExceededError("classical leakage enumeration exceeds the cap")
    y_words = np.asarray(list(itertools.product(range(b), repeat=codebook.n)), dtype=int)
    dists = []
    for j in range(codebook.J):
        pj = np.zeros(len(y_words))
        for l in range(codebook.L):
            pj += _word_output_probs(wire.matrix, codebook.words[j, l], y_words)
        dists.append(pj / codebook.L)
    dists = np.stack(dists)
    avg = dists.mean(axis=0)

    def h(p):
        mask = p > 1e-15
        return float(-(p[mask] * np.log2(p[mask])).sum())

    return max(0.0, h(avg) - float(np.mean([h(d) for d in dists])))


def _quantum_leakage(wire: CQChannel, codebook: Codebook) -> float:
    check_dim_cap(wire.output_space.dim ** codebook.n, "wiretap block state")
    rhos = []
    for j in range(codebook.J):
        acc = None
        for l in range(codebook.L):
            m = cq_word_state(wire, [wire.input_alphabet[x] for x in codebook.words[j, l]]).matrix
            acc = m if acc is None else acc + m
        rhos.append(acc / codebook.L)
    avg = sum(rhos) / codebook.J
    return max(
        0.0,
        von_neumann_entropy(avg) - float(np.mean([von_neumann_entropy(r) for r in rhos])),
    )


# ---------------------------------------------------------------------------
# covering concentration


def covering_concentration(
    v: CQChannel,
    p,
    n: int,
    l_schedule: Sequence[int],
    trials: int,
    seed: int,
    params: TypicalParams | None = None,
    epsilon: float = 0.1,
) -> SimReport:
    """Distribution of the trace-norm gap between the depth-L empirical
    average of sandwiched outputs and their exact truncated-typical
    expectation, over i.i.d. draws.

    The expectation is computed exactly from the enumerated typical words; deviations are reported per randomization depth together with
    the empirical exceedance frequency at the given epsilon.
    """
    if params is None:
        params = TypicalParams(n=n)
    if trials < 1:
        raise QcoreError("trials must be >= 1")
    prior = np.asarray(p, dtype=float)
    words, probs = truncated_typical(prior, n, params.delta)
    q_ops = []
    for w in words:
        q, _, _ = sandwiched_output(v, w, prior, params)
        q_ops.append(q)
    q_ops = np.stack(q_ops)
    mean_op = np.einsum("w,wjk->jk", probs, q_ops)
    per_l = {}
    for l_depth in l_schedule:
        devs = np.zeros(trials)
        for k in range(trials):
            rng = counter_rng(seed, _STREAM_COVERING, l_depth, k)
            picks = rng.choice(len(words), size=l_depth, p=probs)
            avg = q_ops[picks].mean(axis=0)
            devs[k] = trace_norm(avg - mean_op)
        per_l[int(l_depth)] = {
            "median": float(np.median(devs)),
            "mean": float(devs.mean()),
            "exceed_frac": float((devs > epsilon).mean()),
        }
    return SimReport(
        kind="covering",
        per_t={},
        stats={"per_L": per_l, "epsilon": epsilon,
               "medians_decreasing": _strictly_decreasing([per_l[int(l)]["median"] for l in l_schedule])},
        seed=seed,
        trials=trials,
        params={"n": n, "L_schedule": [int(x) for x in l_schedule], "p": list(prior)},
    )


def _strictly_decreasing(vals) -> bool:
    return all(b < a for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# two-part protocol: state report first, then the state-specific code


def _min_rate_over_states(spec: CompoundWiretapSpec, resolution: int = 16) -> float:
    """Best worst-state single-letter rate of the legitimate family."""
    from .capacity import simplex_grid

    a = len(spec.legitimate[0].input_alphabet)
    grid = simplex_grid(resolution, a)
    best = 0.0
    for q in grid:
        rates = [_wiretap_rate(q, w) for w in spec.legitimate]
        best = max(best, min(rates))
    return best


def _cq_state_povm(spec: CompoundWiretapSpec, block1_words, n1: int):
    """Pretty-good measurement distinguishing the per-state block-1 outputs."""
    states = []
    for ti in range(len(spec)):
        ch = spec.legitimate[ti]
        word = [ch.input_alphabet[x] for x in block1_words[ti]]
        states.append(cq_word_state(ch, word).matrix)
    total = sum(states)
    w, v = np.linalg.eigh(total)
    inv_sqrt = (v * np.where(w > 1e-12, 1.0 / np.sqrt(np.clip(w, 1e-300, None)), 0.0)) @ v.conj().T
    return [inv_sqrt @ s @ inv_sqrt for s in states]


def _two_part_protocol_cq(spec, t_true, t_idx, n1, n2, J, L, seed, delta, p) -> SimReport:
    """Exact two-part run for classical-quantum receivers."""
    params = TypicalParams(n=n2, delta=delta)
    codebooks = {
        name: sample_codebook(p, n2, J, L, seed + 1000 + ti, delta=delta)
        for ti, name in enumerate(spec.names)
    }
    decoders = {
        name: build_decoder(spec, codebooks[name], delta=delta, params=params, t_index=ti)
        for ti, name in enumerate(spec.names)
    }
    if len(spec) == 1:
        b1_fail = 0.0
    else:
        a = len(spec.legitimate[0].input_alphabet)
        block1_words = np.zeros((len(spec), n1), dtype=int)
        for ti in range(len(spec)):
            rng = counter_rng(seed, _STREAM_PROTOCOL, 0, ti)
            block1_words[ti] = rng.integers(a, size=n1)
        povm = _cq_state_povm(spec, block1_words, n1)
        ch_true = spec.legitimate[t_idx]
        word = [ch_true.input_alphabet[x] for x in block1_words[t_idx]]
        out = cq_word_state(ch_true, word).matrix
        b1_fail = float(1.0 - np.trace(povm[t_idx] @ out).real)
    err2 = _exact_quantum_error(spec.legitimate[t_idx], codebooks[t_true], decoders[t_true])
    b2_given = err2["max_error"]
    total = b1_fail + b2_given * (1 - b1_fail)
    leak = eval_leakage(spec, codebooks[t_true])
    return SimReport(
        kind="two-part",
        per_t={name: {"leakage": leak.per_t[name]["leakage"]} for name in spec.names},
        stats={
            "degenerate": False,
            "block1_fail_rate": b1_fail,
            "block2_fail_given_success": b2_given,
            "total_error_rate": total,
            "t_true": str(t_true),
            "method": "exact",
        },
        seed=seed,
        trials=0,
        params={"n1": n1, "n2": n2, "J": J, "L": L, "delta": delta},
    )


def two_part_protocol(
    spec: CompoundWiretapSpec,
    t_true,
    n1: int,
    n2: int,
    J: int,
    L: int,
    trials: int,
    seed: int,
    delta: float = 0.15,
    p=None,
) -> SimReport:
    """Send the channel state with a short first block, then the message
    with the state-specific code; state mis-decodes count as errors.

    The first block is not required to be secure; leakage is evaluated on
    the second block only.
    """
    t_idx = list(spec.names).index(t_true)
    a = len(spec.legitimate[0].input_alphabet)
    if p is None:
        p = np.full(a, 1.0 / a)
    p = np.asarray(p, dtype=float)
    if _min_rate_over_states(spec) <= 1e-9:
        return SimReport(
            kind="two-part",
            per_t={},
            stats={"degenerate": True},
            seed=seed,
            trials=0,
            params={"reason": "state information cannot be transmitted"},
        )
    if isinstance(spec.legitimate[t_idx], CQChannel):
        return _two_part_protocol_cq(spec, t_true, t_idx, n1, n2, J, L, seed, delta, p)
    if len(spec) == 1:
        block1_words = None
    else:
        block1_words = np.zeros((len(spec), n1), dtype=int)
        for ti in range(len(spec)):
            rng = counter_rng(seed, _STREAM_PROTOCOL, 0, ti)
            block1_words[ti] = rng.integers(a, size=n1)
    codebooks = {
        name: sample_codebook(p, n2, J, L, seed + 1000 + ti, delta=delta)
        for ti, name in enumerate(spec.names)
    }
    decoders = {
        name: build_decoder(spec, codebooks[name], delta=delta, t_index=ti)
        for ti, name in enumerate(spec.names)
    }
    legit_true = spec.legitimate[t_idx]

    def decode_state(y1: np.ndarray) -> int:
        # maximum-likelihood partition over the hypothesis codewords
        best_t, best_ll = 0, -np.inf
        for ti in range(len(spec)):
            w = spec.legitimate[ti].matrix
            probs = w[block1_words[ti], y1]
            ll = np.sum(np.log(np.clip(probs, 1e-300, None)))
            if ll > best_ll + 1e-12:
                best_t, best_ll = ti, ll
        return best_t

    b1_fail = 0
    b2_fail_after_success = 0
    cb_true = codebooks[t_true]
    w_true = legit_true.matrix
    for k in range(trials):
        rng = counter_rng(seed, _STREAM_PROTOCOL, 1, k)
        j = int(rng.integers(J))
        l = int(rng.integers(L))
        if block1_words is None:
            t_hat = 0
        else:
            x1 = block1_words[t_idx]
            y1 = np.array([rng.choice(w_true.shape[1], p=w_true[xi]) for xi in x1])
            t_hat = decode_state(y1)
        if t_hat != t_idx:
            b1_fail += 1
            continue
        x2 = cb_true.words[j, l]
        y2 = np.array([rng.choice(w_true.shape[1], p=w_true[xi]) for xi in x2])
        if decoders[t_true].decide(y2) != j:
            b2_fail_after_success += 1
    b1_rate = b1_fail / trials
    successes = trials - b1_fail
    b2_given = b2_fail_after_success / successes if successes else 0.0
    total = (b1_fail + b2_fail_after_success) / trials
    leak = eval_leakage(spec, cb_true)
    return SimReport(
        kind="two-part",
        per_t={name: {"leakage": leak.per_t[name]["leakage"]} for name in spec.names},
        stats={
            "degenerate": False,
            "block1_fail_rate": b1_rate,
            "block2_fail_given_success": b2_given,
            "total_error_rate": total,
            "t_true": str(t_true),
        },
        seed=seed,
        trials=trials,
        params={"n1": n1, "n2": n2, "J": J, "L": L, "delta": delta},
    )

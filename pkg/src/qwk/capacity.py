"""Fixed-block-length solvers for the secrecy and entanglement rate formulas.

Every multi-letter expression is evaluated at a user-chosen finite block
length (default 1) and reports carry the formula id and the block length so
no value can be mistaken for a true asymptotic limit.  Objectives are
differences of entropies and are not concave, so each solver combines a
deterministic simplex grid with projected-gradient refinement and random
restarts; identical (spec, config, seed) inputs give bit-identical reports.

Negative optima are reported raw and clamped at zero (the trivial code
achieves rate zero).
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channels import (
    CQChannel,
    ClassicalChannel,
    CompoundWiretapSpec,
    KrausChannel,
    StinespringIsometry,
    complementary_channel,
    kraus_to_stinespring,
    n_fold,
    stinespring_to_kraus,
)
from .infotheory import von_neumann_entropy
from .qcore import (
    DensityOperator,
    HilbertLabel,
    QcoreError,
    check_dim_cap,
    random_unitary,
)

_GRID_BUDGET = 300_000
_EIG_FLOOR = 1e-12


class SolverError(ValueError):
    """A solver was invoked on an incompatible spec."""


@dataclass(frozen=True)
class SolverConfig:
    n: int = 1
    aux_card: int | None = None
    grid_resolution: int = 16
    refine_iters: int = 40
    restarts: int = 8
    seed: int = 0
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.aux_card is not None and self.aux_card < 1:
            raise SolverError("aux_card must be >= 1")
        if self.grid_resolution < 2:
            raise SolverError("grid_resolution must be >= 2")
        if self.n < 1:
            raise SolverError("n must be >= 1")


@dataclass
class CapacityReport:
    formula_id: str
    value: float
    value_raw: float
    n: int
    per_t: dict
    argmax: dict
    config: dict
    flags: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "formula_id": self.formula_id,
            "value": self.value,
            "value_raw": self.value_raw,
            "n": self.n,
            "per_t": self.per_t,
            "argmax": self.argmax,
            "config": self.config,
            "flags": self.flags,
        }


# ---------------------------------------------------------------------------
# simplex utilities


def simplex_grid(resolution: int, dim: int) -> np.ndarray:
    """All points k/resolution on the (dim-1)-simplex, lexicographic order."""
    pts = []
    for comp in itertools.combinations(range(resolution + dim - 1), dim - 1):
        parts = []
        prev = -1
        for c in comp:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + dim - 2 - prev)
        pts.append(parts)
    return np.asarray(pts, dtype=float) / resolution


def simplex_grid_size(resolution: int, dim: int) -> int:
    from math import comb

    return comb(resolution + dim - 1, dim - 1)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    cond = u - css / idx > 0
    rho = idx[cond][-1]
    theta = css[rho - 1] / rho
    return np.clip(v - theta, 0.0, None)


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    """Shannon entropy along the last axis, in bits."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > _EIG_FLOOR, -p * np.log2(np.where(p > _EIG_FLOOR, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def _entropy_batch(mats: np.ndarray) -> np.ndarray:
    """von Neumann entropy of a (..., d, d) stack, in bits."""
    ev = np.clip(np.linalg.eigvalsh(mats), 0.0, None)
    return _entropy_rows(ev)


def _kron_power(m: np.ndarray, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for _ in range(n):
        out = np.kron(out, m)
    return out


# ---------------------------------------------------------------------------
# objective terms: each maps (q over U, E rows U->A) to a scalar rate term


class _ClassicalTerm:
    """I(U;Y) through a stochastic matrix following the prefix channel E."""

    def __init__(self, matrix: np.ndarray):
        self.m = np.asarray(matrix, dtype=float)

    def batch(self, qs: np.ndarray, e: np.ndarray) -> np.ndarray:
        rows = e @ self.m
        h_rows = _entropy_rows(rows)
        p_out = qs @ rows
        return _entropy_rows(p_out) - qs @ h_rows


class _ChiPowerTerm:
    """(1/n) chi(U; Z^(x n)) where, given u, letters are i.i.d. E(.|u)."""

    def __init__(self, states: np.ndarray, n: int):
        self.states = np.asarray(states, dtype=complex)  # (a, d, d)
        self.n = n

    def batch(self, qs: np.ndarray, e: np.ndarray) -> np.ndarray:
        z = np.einsum("ua,adk->udk", e, self.states)
        zn = np.stack([_kron_power(z[u], self.n) for u in range(z.shape[0])])
        s_u = _entropy_batch(zn)
        avg = np.einsum("qu,ujk->qjk", qs, zn)
        return (_entropy_batch(avg) - qs @ s_u) / self.n


class _ChiMixTerm:
    """(1/n) chi(U; .) over fixed word states mixed by E."""

    def __init__(self, word_states: np.ndarray, n: int):
        self.word_states = np.asarray(word_states, dtype=complex)  # (W, D, D)
        self.n = n

    def batch(self, qs: np.ndarray, e: np.ndarray) -> np.ndarray:
        z = np.einsum("uw,wjk->ujk", e, self.word_states)
        s_u = _entropy_batch(z)
        avg = np.einsum("qu,ujk->qjk", qs, z)
        return (_entropy_batch(avg) - qs @ s_u) / self.n


def _objective_single(legit_term, wiretap_term):
    def f(qs, e):
        return legit_term.batch(qs, e) - wiretap_term.batch(qs, e)

    return f


def _objective_compound(legit_terms, wiretap_terms):
    def f(qs, e):
        legs = np.stack([t.batch(qs, e) for t in legit_terms])
        wires = np.stack([t.batch(qs, e) for t in wiretap_terms])
        return legs.min(axis=0) - wires.max(axis=0)

    return f


# ---------------------------------------------------------------------------
# the aux-channel maximizer


def _grid_resolutions(g: int, m: int, a: int) -> tuple[int, int]:
    """Shrink per-simplex resolutions until the product grid fits the budget."""
    gq, ge = g, g

    def total(gq, ge):
        return simplex_grid_size(gq, m) * simplex_grid_size(ge, a) ** m

    while total(gq, ge) > _GRID_BUDGET:
        if ge > 2:
            ge = max(2, int(ge * 0.7))
        elif gq > 2:
            gq = max(2, int(gq * 0.7))
        else:
            break
    return gq, ge


def _special_prefixes(m: int, a: int) -> list[np.ndarray]:
    """Deterministic prefix-channel starts: identity-like and uniform rows."""
    outs = []
    e = np.zeros((m, a))
    for u in range(m):
        e[u, u % a] = 1.0
    outs.append(e)
    outs.append(np.full((m, a), 1.0 / a))
    return outs


def _refine(objective, q0, e0, iters, tol):
    """Projected-gradient ascent over the prior and the prefix rows."""
    m, a = e0.shape
    q, e = q0.copy(), e0.copy()

    def val(q, e):
        return float(objective(q[None, :], e)[0])

    best = val(q, e)
    step = 0.25
    h = 1e-5
    for _ in range(iters):
        grad_q = np.zeros(m)
        for i in range(m):
            qp = q.copy()
            qp[i] += h
            qp = project_simplex(qp)
            grad_q[i] = (val(qp, e) - best) / h
        grad_e = np.zeros((m, a))
        for u in range(m):
            for x in range(a):
                ep = e.copy()
                ep[u, x] += h
                ep[u] = project_simplex(ep[u])
                grad_e[u, x] = (val(q, ep) - best) / h
        improved = False
        while step > 1e-6:
            q_new = project_simplex(q + step * grad_q)
            e_new = np.vstack([project_simplex(e[u] + step * grad_e[u]) for u in range(m)])
            cand = val(q_new, e_new)
            if cand > best + tol:
                q, e, best = q_new, e_new, cand
                improved = True
                break
            step /= 2.0
        if not improved:
            break
    return best, q, e


def _maximize_prior(objective, a: int, cfg: SolverConfig, tag: int):
    """Maximize a batched objective over a single prior (no prefix channel)."""
    res = cfg.grid_resolution
    while simplex_grid_size(res, a) > _GRID_BUDGET and res > 2:
        res = max(2, int(res * 0.7))
    q_grid = simplex_grid(res, a)
    eye = np.eye(a)
    vals = objective(q_grid, eye)
    order = np.argsort(-vals)
    starts = [q_grid[k] for k in order[:6]]
    starts.append(np.full(a, 1.0 / a))
    rng = np.random.default_rng([cfg.seed, tag])
    for _ in range(cfg.restarts):
        starts.append(rng.dirichlet(np.ones(a)))
    best = (-np.inf, None)

    def val(q):
        return float(objective(q[None, :], eye)[0])

    for q0 in starts:
        q = np.asarray(q0, dtype=float)
        cur = val(q)
        step, h = 0.25, 1e-5
        for _ in range(cfg.refine_iters):
            grad = np.zeros(a)
            for i in range(a):
                qp = project_simplex(q + h * eye[i])
                grad[i] = (val(qp) - cur) / h
            improved = False
            while step > 1e-6:
                q_new = project_simplex(q + step * grad)
                cand = val(q_new)
                if cand > cur + cfg.tolerance:
                    q, cur = q_new, cand
                    improved = True
                    break
                step /= 2.0
            if not improved:
                break
        if cur > best[0] + 1e-15:
            best = (cur, q)
    return best


def _maximize_aux(objective_factory, a: int, cfg: SolverConfig, tag: int):
    """Maximize over prior and prefix channel, scanning aux cardinalities.

    ``objective_factory(m)`` returns the batched objective for aux size m.
    Scanning sizes 1..aux_card and keeping the best makes the optimum
    monotone in aux_card by construction.
    """
    aux_card = cfg.aux_card if cfg.aux_card is not None else a + 1
    best = (-np.inf, None, None, None)
    for m in range(1, aux_card + 1):
        objective = objective_factory(m)
        gq, ge = _grid_resolutions(cfg.grid_resolution, m, a)
        q_grid = simplex_grid(gq, m)
        row_grid = simplex_grid(ge, a)
        candidates = []
        for rows in itertools.product(range(len(row_grid)), repeat=m):
            e = row_grid[list(rows)]
            vals = objective(q_grid, e)
            k = int(np.argmax(vals))
            candidates.append((float(vals[k]), q_grid[k], e))
        candidates.sort(key=lambda c: -c[0])
        starts = [(c[1], c[2]) for c in candidates[:6]]
        for e in _special_prefixes(m, a):
            starts.append((np.full(m, 1.0 / m), e))
        rng = np.random.default_rng([cfg.seed, tag, m])
        for _ in range(cfg.restarts):
            starts.append((rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(a), size=m)))
        for q0, e0 in starts:
            v, q, e = _refine(objective, np.asarray(q0), np.asarray(e0), cfg.refine_iters, cfg.tolerance)
            if v > best[0] + 1e-15:
                best = (v, q, e, m)
    return best


# ---------------------------------------------------------------------------
# spec plumbing


def _require_variant(spec: CompoundWiretapSpec, variant: str, formula: str):
    if spec.variant != variant:
        raise SolverError(
            f"formula {formula} needs variant {variant!r}, spec is {spec.variant!r}"
        )


def _cq_states_array(ch: CQChannel) -> np.ndarray:
    return np.stack([ch.state_matrix(x) for x in ch.input_alphabet])


def _clamped_report(formula_id, raw, n, per_t, argmax, cfg, extra_flags=None):
    flags = {"fixed_n_evaluation": True, "clamped": bool(raw < 0)}
    if extra_flags:
        flags.update(extra_flags)
    return CapacityReport(
        formula_id=formula_id,
        value=float(max(0.0, raw)),
        value_raw=float(raw),
        n=n,
        per_t=per_t,
        argmax=argmax,
        config=asdict(cfg),
        flags=flags,
    )


# ---------------------------------------------------------------------------
# classical compound wiretap


def classical_csi_capacity(spec: CompoundWiretapSpec, cfg: SolverConfig) -> CapacityReport:
    """Worst state of the per-state best prefix rates (sender knows the state)."""
    _require_variant(spec, "classical", "b1")
    a = len(spec.legitimate[0].input_alphabet)
    per_t = {}
    argmax = {}
    values = []
    for idx, name in enumerate(spec.names):
        legit = _ClassicalTerm(spec.legitimate[idx].matrix)
        wire = _ClassicalTerm(spec.wiretap[idx].matrix)

        def factory(m, legit=legit, wire=wire):
            return _objective_single(legit, wire)

        v, q, e, m = _maximize_aux(factory, a, cfg, tag=idx)
        lt = float(legit.batch(q[None, :], e)[0])
        wt = float(wire.batch(q[None, :], e)[0])
        per_t[name] = {"legit": lt, "wiretap": wt, "value": v}
        argmax[name] = {"prior": q.tolist(), "prefix_rows": e.tolist(), "aux_card_used": m}
        values.append(v)
    raw = min(values)
    return _clamped_report("b1", raw, 1, per_t, argmax, cfg)


def classical_nocsi_lower(spec: CompoundWiretapSpec, cfg: SolverConfig) -> CapacityReport:
    """One prefix for all states: min legitimate rate minus max leakage rate."""
    _require_variant(spec, "classical", "b1prime")
    a = len(spec.legitimate[0].input_alphabet)
    legit_terms = [_ClassicalTerm(w.matrix) for w in spec.legitimate]
    wire_terms = [_ClassicalTerm(v.matrix) for v in spec.wiretap]

    def factory(m):
        return _objective_compound(legit_terms, wire_terms)

    raw, q, e, m = _maximize_aux(factory, a, cfg, tag=0)
    per_t = {}
    for idx, name in enumerate(spec.names):
        per_t[name] = {
            "legit": float(legit_terms[idx].batch(q[None, :], e)[0]),
            "wiretap": float(wire_terms[idx].batch(q[None, :], e)[0]),
        }
    argmax = {"prior": q.tolist(), "prefix_rows": e.tolist(), "aux_card_used": m}
    return _clamped_report("b1prime", raw, 1, per_t, argmax, cfg)


# ---------------------------------------------------------------------------
# classical compound channel with quantum wiretapper


def qwiretap_csi_capacity(spec: CompoundWiretapSpec, cfg: SolverConfig) -> CapacityReport:
    """Classical legitimate term, quantum leakage term at block length n."""
    _require_variant(spec, "classical-quantum-wiretap", "CSIcap")
    a = len(spec.legitimate[0].input_alphabet)
    d = spec.wiretap[0].output_space.dim
    check_dim_cap(d ** cfg.n, "wiretap block state")
    per_t, argmax, values = {}, {}, []
    for idx, name in enumerate(spec.names):
        legit = _ClassicalTerm(spec.legitimate[idx].matrix)
        wire = _ChiPowerTerm(_cq_states_array(spec.wiretap[idx]), cfg.n)

        def factory(m, legit=legit, wire=wire):
            return _objective_single(legit, wire)

        v, q, e, m = _maximize_aux(factory, a, cfg, tag=idx)
        per_t[name] = {
            "legit": float(legit.batch(q[None, :], e)[0]),
            "wiretap": float(wire.batch(q[None, :], e)[0]),
            "value": v,
        }
        argmax[name] = {"prior": q.tolist(), "prefix_rows": e.tolist(), "aux_card_used": m}
        values.append(v)
    raw = min(values)
    return _clamped_report("CSIcap", raw, cfg.n, per_t, argmax, cfg)


def qwiretap_nocsi_lower(spec: CompoundWiretapSpec, cfg: SolverConfig) -> CapacityReport:
    """Single-letter quantum leakage exactly as the formula prints it."""
    _require_variant(spec, "classical-quantum-wiretap", "noCSIcap")
    a = len(spec.legitimate[0].input_alphabet)
    legit_terms = [_ClassicalTerm(w.matrix) for w in spec.legitimate]
    wire_terms = [_ChiPowerTerm(_cq_states_array(v), 1) for v in spec.wiretap]

    def factory(m):
        return _objective_compound(legit_terms, wire_terms)

    raw, q, e, m = _maximize_aux(factory, a, cfg, tag=0)
    per_t = {}
    for idx, name in enumerate(spec.names):
        per_t[name] = {
            "legit": float(legit_terms[idx].batch(q[None, :], e)[0]),
            "wiretap": float(wire_terms[idx].batch(q[None, :], e)[0]),
        }
    argmax = {"prior": q.tolist(), "prefix_rows": e.tolist(), "aux_card_used": m}
    return _clamped_report("noCSIcap", raw, 1, per_t, argmax, cfg)


# ---------------------------------------------------------------------------
# compound classical-quantum wiretap channel


def _word_states(ch: CQChannel, n: int) -> np.ndarray:
    folded = n_fold(ch, n)
    return np.stack([folded.state_matrix(w) for w in folded.input_alphabet])


def cq_csi_capacity(spec: CompoundWiretapSpec, cfg: SolverConfig) -> CapacityReport:
    """Per-state best prior over n-fold input words, then the worst state."""
    _require_variant(spec, "cq", "e1q")
    n = cfg.n
    check_dim_cap(spec.legitimate[0].output_space.dim ** n, "legitimate block state")
    check_dim_cap(spec.wiretap[0].output_space.dim ** n, "wiretap block state")
    n_words = len(spec.legitimate[0].input_alphabet) ** n
    per_t, argmax, values = {}, {}, []
    eye = np.eye(n_words)
    for idx, name in enumerate(spec.names):
        legit = _ChiMixTerm(_word_states(spec.legitimate[idx], n), n)
        wire = _ChiMixTerm(_word_states(spec.wiretap[idx], n), n)
        objective = _objective_single(legit, wire)
        v, q = _maximize_prior(objective, n_words, cfg, tag=idx)
        per_t[name] = {
            "legit": float(legit.batch(q[None, :], eye)[0]),
            "wiretap": float(wire.batch(q[None, :], eye)[0]),
            "value": v,
        }
        argmax[name] = {"word_prior": q.tolist()}
        values.append(v)
    raw = min(values)
    return _clamped_report("e1q", raw, n, per_t, argmax, cfg)


def _with_aux(cfg: SolverConfig, aux: int) -> SolverConfig:
    return SolverConfig(
        n=cfg.n,
        aux_card=aux,
        grid_resolution=cfg.grid_resolution,
        refine_iters=cfg.refine_iters,
        restarts=cfg.restarts,
        seed=cfg.seed,
        tolerance=cfg.tolerance,
    )


def cq_nocsi_capacity(spec: CompoundWiretapSpec, cfg: SolverConfig) -> CapacityReport:
    """One auxiliary variable for all states over n-fold input words."""
    _require_variant(spec, "cq", "qnocsie1q")
    n = cfg.n
    check_dim_cap(spec.legitimate[0].output_space.dim ** n, "legitimate block state")
    check_dim_cap(spec.wiretap[0].output_space.dim ** n, "wiretap block state")
    n_words = len(spec.legitimate[0].input_alphabet) ** n
    legit_terms = [_ChiMixTerm(_word_states(w, n), n) for w in spec.legitimate]
    wire_terms = [_ChiMixTerm(_word_states(v, n), n) for v in spec.wiretap]

    def factory(m):
        return _objective_compound(legit_terms, wire_terms)

    raw, q, e, m = _maximize_aux(factory, n_words, cfg, tag=0)
    per_t = {}
    for idx, name in enumerate(spec.names):
        per_t[name] = {
            "legit": float(legit_terms[idx].batch(q[None, :], e)[0]),
            "wiretap": float(wire_terms[idx].batch(q[None, :], e)[0]),
        }
    argmax = {"prior": q.tolist(), "prefix_rows": e.tolist(), "aux_card_used": m}
    return _clamped_report("qnocsie1q", raw, n, per_t, argmax, cfg)


# ---------------------------------------------------------------------------
# entanglement generation


def _as_stinespring(ch) -> StinespringIsometry:
    if isinstance(ch, StinespringIsometry):
        return ch
    if isinstance(ch, KrausChannel):
        return kraus_to_stinespring(ch)
    raise SolverError("entanglement solvers need quantum channels")


def entgen_lower_bound(family: Sequence, cfg: SolverConfig) -> CapacityReport:
    """Worst-state receiver Holevo rate minus best-state environment rate,
    maximized over priors and orthonormal input bases."""
    isos = [_as_stinespring(ch) for ch in family]
    d = isos[0].in_space.dim
    if any(s.in_space.dim != d for s in isos):
        raise SolverError("family members act on different input spaces")
    rng = np.random.default_rng([cfg.seed, 77])
    bases = [np.eye(d, dtype=complex)]
    for _ in range(cfg.restarts):
        bases.append(random_unitary(d, rng))
    best = (-np.inf, None, None)
    for u in bases:
        q_states = []
        e_states = []
        for s in isos:
            qs, es = [], []
            for x in range(d):
                phi = u[:, x]
                rho = np.outer(phi, phi.conj())
                qs.append(s.apply_matrix(rho))
                es.append(s.env_matrix(rho))
            q_states.append(np.stack(qs))
            e_states.append(np.stack(es))
        legit_terms = [_ChiMixTerm(qs, 1) for qs in q_states]
        wire_terms = [_ChiMixTerm(es, 1) for es in e_states]
        objective = _objective_compound(legit_terms, wire_terms)
        v, q = _maximize_prior(objective, d, cfg, tag=99)
        if v > best[0] + 1e-15:
            best = (v, q, u)
    raw, prior, u = best
    per_t = {}
    for idx, (s, name) in enumerate(zip(isos, _family_names(family))):
        qs = np.stack([s.apply_matrix(np.outer(u[:, x], u[:, x].conj())) for x in range(d)])
        es = np.stack([s.env_matrix(np.outer(u[:, x], u[:, x].conj())) for x in range(d)])
        per_t[name] = {
            "legit": float(_ChiMixTerm(qs, 1).batch(prior[None, :], np.eye(d))[0]),
            "wiretap": float(_ChiMixTerm(es, 1).batch(prior[None, :], np.eye(d))[0]),
        }
    argmax = {
        "prior": prior.tolist(),
        "basis_real": u.real.tolist(),
        "basis_imag": u.imag.tolist(),
    }
    return _clamped_report("entheorem", raw, 1, per_t, argmax, cfg)


def _family_names(family) -> list[str]:
    return [f"t{i+1}" for i in range(len(family))]


def _coherent_information_matrix(rho_m: np.ndarray, kraus: KrausChannel) -> float:
    din = kraus.in_space.dim
    w, v = np.linalg.eigh(rho_m)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    psi = np.zeros((kraus.in_space.dim * din,), dtype=complex)
    for i in range(len(w)):
        ref = np.zeros(din)
        ref[i] = 1.0
        psi += np.sqrt(w[i]) * np.kron(v[:, i], ref)
    joint = np.outer(psi, psi.conj())
    out = None
    for a in kraus.kraus_ops:
        op = np.kron(a, np.eye(din))
        term = op @ joint @ op.conj().T
        out = term if out is None else out + term
    s_out = von_neumann_entropy(kraus.apply_matrix(rho_m))
    return s_out - von_neumann_entropy(out)


def entgen_csi_capacity(family: Sequence, cfg: SolverConfig) -> CapacityReport:
    """Worst state of the per-state best coherent information at block n."""
    isos = [_as_stinespring(ch) for ch in family]
    d = isos[0].in_space.dim
    if any(s.in_space.dim != d for s in isos):
        raise SolverError("family members act on different input spaces")
    per_t, argmax, values = {}, {}, []
    for idx, (s, name) in enumerate(zip(isos, _family_names(family))):
        kraus = stinespring_to_kraus(s)
        folded = n_fold(kraus, cfg.n) if cfg.n > 1 else kraus
        dim = folded.in_space.dim
        check_dim_cap(dim * dim, "coherent-information reference")

        def objective(params, folded=folded, dim=dim):
            m = params[: dim * dim].reshape(dim, dim) + 1j * params[dim * dim :].reshape(dim, dim)
            g = m @ m.conj().T
            tr = np.trace(g).real
            if tr < 1e-14:
                return -np.inf
            return _coherent_information_matrix(g / tr, folded)

        rng = np.random.default_rng([cfg.seed, 88, idx])
        starts = []
        eye = np.eye(dim) / np.sqrt(dim)
        starts.append(np.concatenate([eye.reshape(-1), np.zeros(dim * dim)]))
        for b in range(dim):
            m0 = np.zeros((dim, dim))
            m0[b, b] = 1.0
            starts.append(np.concatenate([m0.reshape(-1), np.zeros(dim * dim)]))
        for _ in range(cfg.restarts):
            starts.append(rng.normal(size=2 * dim * dim))
        best_v, best_p = -np.inf, None
        for p0 in starts:
            v, p = _ascend_unconstrained(objective, np.asarray(p0, dtype=float), cfg.refine_iters)
            if v > best_v:
                best_v, best_p = v, p
        m = best_p[: dim * dim].reshape(dim, dim) + 1j * best_p[dim * dim :].reshape(dim, dim)
        g = m @ m.conj().T
        rho = g / np.trace(g).real
        per_t[name] = {"coherent_information": best_v / cfg.n, "value": best_v / cfg.n}
        argmax[name] = {"rho_real": rho.real.tolist(), "rho_imag": rho.imag.tolist()}
        values.append(best_v / cfg.n)
    raw = min(values)
    return _clamped_report("propo1", raw, cfg.n, per_t, argmax, cfg)


def _ascend_unconstrained(objective, p0: np.ndarray, iters: int):
    p = p0.copy()
    best = objective(p)
    step = 0.2
    h = 1e-5
    for _ in range(iters):
        grad = np.zeros_like(p)
        for i in range(len(p)):
            pp = p.copy()
            pp[i] += h
            grad[i] = (objective(pp) - best) / h
        norm = np.linalg.norm(grad)
        if norm < 1e-12:
            break
        improved = False
        while step > 1e-7:
            cand = p + step * grad / norm
            cv = objective(cand)
            if cv > best + 1e-12:
                p, best = cand, cv
                improved = True
                break
            step /= 2.0
        if not improved:
            break
    return best, p


FORMULAS: dict[str, tuple[str, Callable]] = {
    "b1": ("classical", classical_csi_capacity),
    "b1prime": ("classical", classical_nocsi_lower),
    "csicap": ("classical-quantum-wiretap", qwiretap_csi_capacity),
    "nocsicap": ("classical-quantum-wiretap", qwiretap_nocsi_lower),
    "e1q": ("cq", cq_csi_capacity),
    "qnocsie1q": ("cq", cq_nocsi_capacity),
}

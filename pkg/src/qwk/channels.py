"""Channel representations and the operations connecting them.

Covers classical stochastic matrices, classical-quantum maps, quantum
channels in Kraus or Stinespring form, interconversions, complementary
channels, a diamond-distance lower-bound estimator, and finite tau-nets
over the CPTP set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    CapExceededError,
    DensityOperator,
    HilbertLabel,
    QcoreError,
    TOL_RECON,
    TOL_TRACE,
    check_dim_cap,
    hermitian_eigensystem,
    maximally_entangled,
    psd_sqrt,
    random_unitary,
    trace_norm,
    total_dim,
)


class ChannelError(ValueError):
    """A channel failed validation or was applied out of domain."""


@dataclass(frozen=True)
class ClassicalChannel:
    """Row-stochastic transition matrix between finite alphabets."""

    input_alphabet: tuple
    output_alphabet: tuple
    matrix: np.ndarray

    def __init__(self, input_alphabet, output_alphabet, matrix):
        object.__setattr__(self, "input_alphabet", tuple(input_alphabet))
        object.__setattr__(self, "output_alphabet", tuple(output_alphabet))
        m = np.asarray(matrix, dtype=float)
        if m.shape != (len(self.input_alphabet), len(self.output_alphabet)):
            raise ChannelError(f"matrix shape {m.shape} does not match alphabets")
        if m.min() < -1e-12 or m.max() > 1 + 1e-12:
            raise ChannelError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(m.sum(axis=1) - 1.0)) > TOL_TRACE:
            raise ChannelError("rows must sum to 1 within tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def row(self, x) -> np.ndarray:
        return self.matrix[self.input_alphabet.index(x)]


@dataclass(frozen=True)
class CQChannel:
    """Classical inputs, quantum outputs: each symbol maps to a fixed state."""

    input_alphabet: tuple
    output_space: HilbertLabel
    states: dict

    def __init__(self, input_alphabet, output_space, states):
        object.__setattr__(self, "input_alphabet", tuple(input_alphabet))
        object.__setattr__(self, "output_space", output_space)
        st = dict(states)
        for x in self.input_alphabet:
            if x not in st:
                raise ChannelError(f"missing output state for symbol {x!r}")
            rho = st[x]
            if not isinstance(rho, DensityOperator):
                rho = DensityOperator((output_space,), rho)
                st[x] = rho
            if rho.dim != output_space.dim:
                raise ChannelError(f"state for {x!r} has wrong dimension")
        object.__setattr__(self, "states", st)

    def state_matrix(self, x) -> np.ndarray:
        return self.states[x].matrix


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    in_space: HilbertLabel
    out_space: HilbertLabel
    kraus_ops: tuple

    def __init__(self, in_space, out_space, kraus_ops):
        object.__setattr__(self, "in_space", in_space)
        object.__setattr__(self, "out_space", out_space)
        ops = tuple(np.asarray(a, dtype=complex) for a in kraus_ops)
        if not ops:
            raise ChannelError("at least one Kraus operator required")
        for a in ops:
            if a.shape != (out_space.dim, in_space.dim):
                raise ChannelError(f"Kraus operator shape {a.shape} mismatch")
            a.setflags(write=False)
        comp = sum(a.conj().T @ a for a in ops)
        if np.max(np.abs(comp - np.eye(in_space.dim))) > TOL_RECON:
            raise ChannelError("Kraus operators do not satisfy completeness")
        object.__setattr__(self, "kraus_ops", ops)

    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        return sum(a @ rho @ a.conj().T for a in self.kraus_ops)


@dataclass(frozen=True)
class StinespringIsometry:
    """Isometry into output (x) environment representing a quantum channel."""

    in_space: HilbertLabel
    out_space: HilbertLabel
    env_space: HilbertLabel
    isometry: np.ndarray

    def __init__(self, in_space, out_space, env_space, isometry):
        object.__setattr__(self, "in_space", in_space)
        object.__setattr__(self, "out_space", out_space)
        object.__setattr__(self, "env_space", env_space)
        u = np.asarray(isometry, dtype=complex)
        if u.shape != (out_space.dim * env_space.dim, in_space.dim):
            raise ChannelError(f"isometry shape {u.shape} mismatch")
        if np.max(np.abs(u.conj().T @ u - np.eye(in_space.dim))) > TOL_RECON:
            raise ChannelError("matrix is not an isometry within tolerance")
        if env_space.dim > in_space.dim ** 2 * out_space.dim:
            raise ChannelError("environment dimension is unnecessarily large")
        u.setflags(write=False)
        object.__setattr__(self, "isometry", u)

    def dilate_vector(self, v: np.ndarray) -> np.ndarray:
        """Image of an input vector on out (x) env."""
        return self.isometry @ v

    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        """Channel output: trace the environment out of U rho U*."""
        big = self.isometry @ rho @ self.isometry.conj().T
        do, de = self.out_space.dim, self.env_space.dim
        return np.trace(big.reshape(do, de, do, de), axis1=1, axis2=3)

    def env_matrix(self, rho: np.ndarray) -> np.ndarray:
        """Environment output: trace the main output out of U rho U*."""
        big = self.isometry @ rho @ self.isometry.conj().T
        do, de = self.out_space.dim, self.env_space.dim
        return np.trace(big.reshape(do, de, do, de), axis1=0, axis2=2)


@dataclass(frozen=True)
class CompoundWiretapSpec:
    """Indexed family of (legitimate, wiretap) channel pairs."""

    variant: str
    names: tuple
    legitimate: tuple
    wiretap: tuple

    VARIANTS = ("classical", "classical-quantum-wiretap", "cq", "quantum")

    def __init__(self, variant, names, legitimate, wiretap):
        if variant not in self.VARIANTS:
            raise ChannelError(f"unknown variant {variant!r}")
        names = tuple(names)
        legitimate = tuple(legitimate)
        wiretap = tuple(wiretap)
        if not names:
            raise ChannelError("state set must be nonempty")
        if not (len(names) == len(legitimate) == len(wiretap)):
            raise ChannelError("names and channel lists must align")
        first = legitimate[0]
        for ch in legitimate + tuple(w for w in wiretap if w is not None):
            if _input_signature(ch) != _input_signature(first):
                raise ChannelError("all members must share the input alphabet/space")
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "legitimate", legitimate)
        object.__setattr__(self, "wiretap", wiretap)

    def __len__(self):
        return len(self.names)


def _input_signature(ch):
    if isinstance(ch, (ClassicalChannel, CQChannel)):
        return ("alphabet", ch.input_alphabet)
    if isinstance(ch, KrausChannel):
        return ("space", ch.in_space.dim)
    if isinstance(ch, StinespringIsometry):
        return ("space", ch.in_space.dim)
    raise ChannelError(f"not a channel: {ch!r}")


# ---------------------------------------------------------------------------
# application and n-fold extension


def apply_channel(ch, inp):
    """Apply any channel kind to a matching input.

    Classical channels take a symbol (or word) and return a probability
    vector; cq channels take a symbol (or word) and return a DensityOperator;
    Kraus/Stinespring channels take a DensityOperator.
    """
    if isinstance(ch, ClassicalChannel):
        if inp in ch.input_alphabet:
            return ch.row(inp).copy()
        if isinstance(inp, (tuple, list)):
            out = np.array([1.0])
            for x in inp:
                out = np.kron(out, ch.row(x))
            return out
        raise ChannelError(f"symbol {inp!r} not in the input alphabet")
    if isinstance(ch, CQChannel):
        if inp in ch.input_alphabet:
            return ch.states[inp]
        if isinstance(inp, (tuple, list)):
            return cq_word_state(ch, inp)
        raise ChannelError(f"symbol {inp!r} not in the input alphabet")
    if isinstance(ch, (KrausChannel, StinespringIsometry)):
        if not isinstance(inp, DensityOperator):
            raise ChannelError("quantum channels take a DensityOperator input")
        if inp.dim != ch.in_space.dim:
            raise ChannelError("input dimension mismatch")
        out = ch.apply_matrix(inp.matrix)
        return DensityOperator((ch.out_space,), out)
    raise ChannelError(f"not a channel: {ch!r}")


def cq_word_state(ch: CQChannel, word) -> DensityOperator:
    """Tensor-product output state of a cq channel for an input word."""
    dim = ch.output_space.dim ** len(word)
    check_dim_cap(dim, "cq word output")
    out = np.array([[1.0 + 0j]])
    for x in word:
        out = np.kron(out, ch.state_matrix(x))
    label = HilbertLabel(f"{ch.output_space.name}^{len(word)}", dim)
    return DensityOperator((label,), out)


def n_fold(ch, n: int):
    """Memoryless n-fold extension acting on words / product inputs."""
    if n < 1:
        raise ChannelError("n must be >= 1")
    if n == 1:
        return ch
    if isinstance(ch, ClassicalChannel):
        a, b = len(ch.input_alphabet), len(ch.output_alphabet)
        if (a * b) ** n > 2 ** 24:
            raise CapExceededError("n-fold classical channel exceeds the cap")
        words_in = list(itertools.product(ch.input_alphabet, repeat=n))
        words_out = list(itertools.product(ch.output_alphabet, repeat=n))
        m = np.array([[1.0]])
        for _ in range(n):
            m = np.kron(m, ch.matrix)
        return ClassicalChannel(words_in, words_out, m)
    if isinstance(ch, CQChannel):
        dim = ch.output_space.dim ** n
        check_dim_cap(dim, "n-fold cq channel")
        words = list(itertools.product(ch.input_alphabet, repeat=n))
        label = HilbertLabel(f"{ch.output_space.name}^{n}", dim)
        states = {w: cq_word_state(ch, w).matrix for w in words}
        return CQChannel(words, label, states)
    if isinstance(ch, KrausChannel):
        din, dout = ch.in_space.dim ** n, ch.out_space.dim ** n
        check_dim_cap(max(din, dout), "n-fold Kraus channel")
        n_ops = len(ch.kraus_ops) ** n
        if n_ops * din * dout > 2 ** 24:
            raise CapExceededError("n-fold Kraus operator count exceeds the cap")
        ops = [np.array([[1.0 + 0j]])]
        for _ in range(n):
            ops = [np.kron(o, a) for o in ops for a in ch.kraus_ops]
        return KrausChannel(
            HilbertLabel(f"{ch.in_space.name}^{n}", din),
            HilbertLabel(f"{ch.out_space.name}^{n}", dout),
            ops,
        )
    if isinstance(ch, StinespringIsometry):
        return kraus_to_stinespring(n_fold(stinespring_to_kraus(ch), n))
    raise ChannelError(f"not a channel: {ch!r}")


# ---------------------------------------------------------------------------
# Kraus <-> Stinespring


def kraus_to_stinespring(k: KrausChannel) -> StinespringIsometry:
    """Stack Kraus operators into an isometry with one environment slot each."""
    denv = len(k.kraus_ops)
    u = np.zeros((k.out_space.dim * denv, k.in_space.dim), dtype=complex)
    for j, a in enumerate(k.kraus_ops):
        for o in range(k.out_space.dim):
            u[o * denv + j, :] = a[o, :]
    env = HilbertLabel(f"{k.in_space.name}_env", denv)
    return StinespringIsometry(k.in_space, k.out_space, env, u)


def stinespring_to_kraus(s: StinespringIsometry) -> KrausChannel:
    """Read Kraus operators off the environment slots of the isometry."""
    de = s.env_space.dim
    ops = []
    for j in range(de):
        a = np.zeros((s.out_space.dim, s.in_space.dim), dtype=complex)
        for o in range(s.out_space.dim):
            a[o, :] = s.isometry[o * de + j, :]
        ops.append(a)
    return KrausChannel(s.in_space, s.out_space, ops)


def complementary_channel(s: StinespringIsometry) -> KrausChannel:
    """Map to the environment: trace the main output out of the dilation."""
    de, do = s.env_space.dim, s.out_space.dim
    ops = []
    for o in range(do):
        b = np.zeros((de, s.in_space.dim), dtype=complex)
        for e in range(de):
            b[e, :] = s.isometry[o * de + e, :]
        ops.append(b)
    return KrausChannel(s.in_space, s.env_space, ops)


def choi_matrix(ch) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) N(|i><j|)."""
    if isinstance(ch, StinespringIsometry):
        ch = stinespring_to_kraus(ch)
    if not isinstance(ch, KrausChannel):
        raise ChannelError("choi_matrix expects a quantum channel")
    din, dout = ch.in_space.dim, ch.out_space.dim
    j = np.zeros((din * dout, din * dout), dtype=complex)
    for a in ch.kraus_ops:
        vec = a.T.reshape(-1)  # vec of A in |i>(x)|out> ordering
        j += np.outer(vec, vec.conj())
    return j


def kraus_equivalent(k1: KrausChannel, k2: KrausChannel, tol: float = TOL_RECON) -> bool:
    """Whether two Kraus lists describe the same channel (Choi comparison).

    Shorter lists are conceptually padded with zero operators; padding does
    not change the Choi matrix, so the comparison is direct.
    """
    if (k1.in_space.dim, k1.out_space.dim) != (k2.in_space.dim, k2.out_space.dim):
        raise ChannelError("channels act between different spaces")
    return bool(np.max(np.abs(choi_matrix(k1) - choi_matrix(k2))) <= tol)


def pad_kraus(k: KrausChannel, count: int) -> KrausChannel:
    """Append zero operators so the list has exactly ``count`` entries."""
    if count < len(k.kraus_ops):
        raise ChannelError("cannot pad to fewer operators")
    zero = np.zeros((k.out_space.dim, k.in_space.dim))
    ops = list(k.kraus_ops) + [zero] * (count - len(k.kraus_ops))
    return KrausChannel(k.in_space, k.out_space, ops)


def mix_kraus(k: KrausChannel, unitary: np.ndarray) -> KrausChannel:
    """Equivalent Kraus list B_i = sum_j u_ij A_j (unitary freedom)."""
    u = np.asarray(unitary, dtype=complex)
    kk = len(k.kraus_ops)
    if u.shape != (kk, kk):
        raise ChannelError("mixing matrix size must match the Kraus count")
    ops = [sum(u[i, j] * k.kraus_ops[j] for j in range(kk)) for i in range(kk)]
    return KrausChannel(k.in_space, k.out_space, ops)


# ---------------------------------------------------------------------------
# diamond-distance lower bound


def _as_kraus(ch) -> KrausChannel:
    if isinstance(ch, KrausChannel):
        return ch
    if isinstance(ch, StinespringIsometry):
        return stinespring_to_kraus(ch)
    raise ChannelError("expected a quantum channel")


def _apply_ref(ops, rho, dref):
    """Apply sum_k (id_ref (x) A_k) rho (...)* without forming big krons."""
    out = None
    for a in ops:
        lifted = np.kron(np.eye(dref), a)
        term = lifted @ rho @ lifted.conj().T
        out = term if out is None else out + term
    return out


def diamond_distance(n1, n2, restarts: int = 4, seed: int = 0) -> float:
    """Lower-bound estimate of the diamond distance between two channels.

    Maximizes the trace norm of (id (x) (N1 - N2)) over pure inputs on a
    reference (x) input system by see-saw ascent (Helstrom observable, then
    top eigenvector), from deterministic plus ``restarts`` random starts.
    The result is a certified LOWER bound only.
    """
    k1, k2 = _as_kraus(n1), _as_kraus(n2)
    if (k1.in_space.dim, k1.out_space.dim) != (k2.in_space.dim, k2.out_space.dim):
        raise ChannelError("channels act between different spaces")
    din = k1.in_space.dim
    dref = din

    def delta(rho):
        return _apply_ref(k1.kraus_ops, rho, dref) - _apply_ref(k2.kraus_ops, rho, dref)

    def delta_adj(obs):
        out = None
        for ops, sign in ((k1.kraus_ops, 1.0), (k2.kraus_ops, -1.0)):
            for a in ops:
                lifted = np.kron(np.eye(dref), a)
                term = sign * (lifted.conj().T @ obs @ lifted)
                out = term if out is None else out + term
        return out

    def value(psi):
        rho = np.outer(psi, psi.conj())
        return float(np.abs(np.linalg.eigvalsh(delta(rho))).sum())

    def seesaw(psi):
        best = value(psi)
        for _ in range(40):
            rho = np.outer(psi, psi.conj())
            w, v = np.linalg.eigh(delta(rho))
            obs = (v * np.sign(w)) @ v.conj().T
            h = delta_adj(obs)
            hw, hv = np.linalg.eigh(h)
            cand = hv[:, -1]
            cv = value(cand)
            if cv <= best + 1e-12:
                break
            psi, best = cand, cv
        return best

    starts = []
    me = maximally_entangled(HilbertLabel("r", dref), HilbertLabel("i", din))
    starts.append(me.vector)
    for i in range(din):
        for r in range(dref):
            v = np.zeros(dref * din, dtype=complex)
            v[r * din + i] = 1.0
            starts.append(v)
    if din == 2:
        for bx, by, bz in [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]:
            theta = math.acos(bz)
            phi = math.atan2(by, bx)
            q = np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])
            ref0 = np.zeros(dref)
            ref0[0] = 1.0
            starts.append(np.kron(ref0, q))
    for i in range(restarts):
        rng = np.random.default_rng([seed, i])
        v = rng.normal(size=dref * din) + 1j * rng.normal(size=dref * din)
        starts.append(v / np.linalg.norm(v))
    best = 0.0
    for s in starts:
        best = max(best, seesaw(s))
    return min(best, 2.0)


# ---------------------------------------------------------------------------
# tau-nets over the CPTP set


@dataclass(frozen=True)
class TauNet:
    """Finite family of channels declared to cover the CPTP set to radius tau."""

    tau: float
    elements: tuple
    cardinality_bound: float
    d_in: int
    d_out: int


def tau_net_cardinality_bound(d_in: int, tau: float):
    """The covering-number bound (3/tau)^(2 d_in^4).

    Returns an exact integer when 3/tau is integral, else a float
    (inf on overflow).
    """
    expo = 2 * d_in ** 4
    ratio = 3.0 / tau
    if abs(ratio - round(ratio)) < 1e-12:
        return int(round(ratio)) ** expo
    try:
        return ratio ** expo
    except OverflowError:
        return math.inf


def _hermitian_basis(dim: int):
    """Orthogonal Hermitian basis: diagonal units, then re/im off-diagonal pairs."""
    basis = []
    for i in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[i, i] = 1.0
        basis.append(m)
    for i in range(dim):
        for j in range(i + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = m[j, i] = 1.0 / np.sqrt(2)
            basis.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = -1j / np.sqrt(2)
            m[j, i] = 1j / np.sqrt(2)
            basis.append(m)
    return basis


def project_cptp(j: np.ndarray, d_in: int, d_out: int, iters: int = 200) -> np.ndarray:
    """Alternating projections of a Hermitian Choi matrix onto the CPTP set."""
    eye_in = np.eye(d_in)
    for _ in range(iters):
        w, v = np.linalg.eigh(j)
        w = np.clip(w, 0.0, None)
        j = (v * w) @ v.conj().T
        tr_out = np.trace(j.reshape(d_in, d_out, d_in, d_out), axis1=1, axis2=3)
        corr = (eye_in - tr_out) / d_out
        j = j + np.kron(corr, np.eye(d_out))
        if np.min(np.linalg.eigvalsh(j)) > -1e-12:
            break
    w, v = np.linalg.eigh(j)
    w = np.clip(w, 0.0, None)
    j = (v * w) @ v.conj().T
    tr_out = np.trace(j.reshape(d_in, d_out, d_in, d_out), axis1=1, axis2=3)
    j = j + np.kron((eye_in - tr_out) / d_out, np.eye(d_out))
    return j


def choi_to_kraus(j: np.ndarray, d_in: int, d_out: int) -> KrausChannel:
    w, v = hermitian_eigensystem(j)
    ops = []
    for i in range(len(w)):
        if w[i] > 1e-12:
            ops.append(np.sqrt(w[i]) * v[:, i].reshape(d_in, d_out).T)
    inl = HilbertLabel("in", d_in)
    outl = HilbertLabel("out", d_out)
    comp = sum(a.conj().T @ a for a in ops)
    # tolerate alternating-projection residue by a final isometric repair
    fix = np.linalg.pinv(psd_sqrt(comp))
    ops = [a @ fix for a in ops]
    return KrausChannel(inl, outl, ops)


def _lattice_offsets(n_params: int, budget: int):
    """Deterministic enumeration of integer offset vectors by L1 shells."""
    yield (0,) * n_params
    produced = 1
    shell = 1
    while produced < budget:
        found = False
        for signs in itertools.product((0, 1, -1), repeat=n_params):
            if sum(abs(s) for s in signs) == shell:
                found = True
                yield signs
                produced += 1
                if produced >= budget:
                    return
        if not found:
            return
        shell += 1


def build_tau_net(d_in: int, d_out: int, tau: float, budget: int) -> TauNet:
    """Deterministic lattice discretization of Choi matrices, CPTP-projected.

    The declared covering radius is ``tau``; the cardinality never exceeds
    min(budget, ceil((3/tau)^(2 d_in^4))).  Any two CPTP maps are within
    diamond distance 2, so a request with tau >= 2 yields a singleton net.
    """
    if budget == 0:
        raise ChannelError("budget must be positive")
    if not 0 < tau:
        raise ChannelError("tau must be positive")
    bound = tau_net_cardinality_bound(d_in, tau)
    center = np.kron(np.eye(d_in), np.eye(d_out) / d_out)
    if tau >= 2:
        elems = (choi_to_kraus(center, d_in, d_out),)
        return TauNet(tau, elems, bound, d_in, d_out)
    limit = budget if math.isinf(bound) else min(budget, int(math.ceil(bound)))
    dim = d_in * d_out
    basis = _hermitian_basis(dim)
    step = tau / (2.0 * dim)
    elements = []
    seen = set()
    for offsets in _lattice_offsets(len(basis), limit * 4):
        j = center.copy()
        for coeff, b in zip(offsets, basis):
            if coeff:
                j = j + step * coeff * b
        j = project_cptp(j, d_in, d_out)
        key = tuple(np.round(j, 8).reshape(-1).view(float))
        if key in seen:
            continue
        seen.add(key)
        elements.append(choi_to_kraus(j, d_in, d_out))
        if len(elements) >= limit:
            break
    return TauNet(tau, tuple(elements), bound, d_in, d_out)


def nearest_in_net(net: TauNet, target, restarts: int = 2, seed: int = 0):
    """Net element with the smallest diamond-distance estimate to ``target``."""
    if not net.elements:
        raise ChannelError("net is empty")
    best = None
    best_d = math.inf
    for elem in net.elements:
        d = diamond_distance(elem, target, restarts=restarts, seed=seed)
        if d < best_d:
            best, best_d = elem, d
    return best, best_d


# ---------------------------------------------------------------------------
# small constructors shared by tests and the CLI


def bsc(p: float) -> ClassicalChannel:
    return ClassicalChannel((0, 1), (0, 1), [[1 - p, p], [p, 1 - p]])


def identity_kraus(dim: int = 2) -> KrausChannel:
    l = HilbertLabel("q", dim)
    return KrausChannel(l, l, [np.eye(dim)])


def depolarizing_kraus(p: float) -> KrausChannel:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    l = HilbertLabel("q", 2)
    ops = [
        np.sqrt(1 - 3 * p / 4) * np.eye(2),
        np.sqrt(p / 4) * sx,
        np.sqrt(p / 4) * sy,
        np.sqrt(p / 4) * sz,
    ]
    return KrausChannel(l, l, ops)


def classical_to_cq(ch: ClassicalChannel) -> CQChannel:
    """Embed a classical channel as a cq channel with diagonal outputs."""
    d = len(ch.output_alphabet)
    label = HilbertLabel("z", d)
    states = {x: np.diag(ch.row(x)).astype(complex) for x in ch.input_alphabet}
    return CQChannel(ch.input_alphabet, label, states)

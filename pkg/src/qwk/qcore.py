"""Exact finite-dimensional complex linear algebra for quantum states.

States and operators live on labeled Hilbert spaces so that multipartite
bookkeeping (tensor products, partial traces, purifications) stays explicit.
All values are immutable after construction and every operation is a pure
function; the module is safe to use from concurrent workers without
coordination.

Inputs outside tolerance are rejected, not silently repaired.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-9
TOL_PSD = 1e-9
TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_RECON = 1e-8

_DEFAULT_HILBERT_CAP = 2 ** 14


class QcoreError(ValueError):
    """A state or operator failed validation."""


class CapExceededError(RuntimeError):
    """A requested construction exceeds the configured dimension cap."""


def hilbert_dim_cap() -> int:
    """Total-dimension cap for dense constructions (QWK_CAP_DIM overrides)."""
    raw = os.environ.get("QWK_CAP_DIM")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise QcoreError(f"QWK_CAP_DIM must be an integer, got {raw!r}")
    return _DEFAULT_HILBERT_CAP


def check_dim_cap(dim: int, what: str = "construction") -> None:
    cap = hilbert_dim_cap()
    if dim > cap:
        raise CapExceededError(f"{what} needs dimension {dim} > cap {cap}")


@dataclass(frozen=True)
class HilbertLabel:
    """A named finite-dimensional Hilbert space factor."""

    name: str
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise QcoreError(f"dimension of space {self.name!r} must be >= 1")


def _as_complex(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    arr.setflags(write=False)
    return arr


def _check_labels(system: Sequence[HilbertLabel]) -> tuple[HilbertLabel, ...]:
    labels = tuple(system)
    names = [s.name for s in labels]
    if len(set(names)) != len(names):
        raise QcoreError(f"duplicate space names in system {names}")
    return labels


def total_dim(system: Sequence[HilbertLabel]) -> int:
    d = 1
    for s in system:
        d *= s.dim
    return d


@dataclass(frozen=True)
class DensityOperator:
    """Positive semi-definite, unit-trace Hermitian matrix on a labeled system."""

    system: tuple[HilbertLabel, ...]
    matrix: np.ndarray

    def __init__(self, system: Sequence[HilbertLabel], matrix):
        object.__setattr__(self, "system", _check_labels(system))
        m = _as_complex(matrix)
        d = total_dim(self.system)
        if m.shape != (d, d):
            raise QcoreError(f"matrix shape {m.shape} does not match system dim {d}")
        if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
            raise QcoreError("matrix is not Hermitian within tolerance")
        ev = np.linalg.eigvalsh(m)
        if ev.min() < -TOL_PSD:
            raise QcoreError(f"matrix has negative eigenvalue {ev.min():.3e}")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL_TRACE:
            raise QcoreError(f"trace {tr} deviates from 1 beyond tolerance")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return total_dim(self.system)

    def label_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.system)


@dataclass(frozen=True)
class PureState:
    """Unit vector on a labeled system."""

    system: tuple[HilbertLabel, ...]
    vector: np.ndarray

    def __init__(self, system: Sequence[HilbertLabel], vector):
        object.__setattr__(self, "system", _check_labels(system))
        v = _as_complex(vector).reshape(-1)
        d = total_dim(self.system)
        if v.shape != (d,):
            raise QcoreError(f"vector length {v.shape} does not match system dim {d}")
        if abs(np.linalg.norm(v) - 1.0) > TOL_NORM:
            raise QcoreError("vector is not normalized within tolerance")
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return total_dim(self.system)

    def to_density(self) -> DensityOperator:
        return DensityOperator(self.system, np.outer(self.vector, self.vector.conj()))


def tensor_product(a, b):
    """Kronecker product of two states of the same kind on disjoint systems."""
    overlap = set(s.name for s in a.system) & set(s.name for s in b.system)
    if overlap:
        raise QcoreError(f"system label collision: {sorted(overlap)}")
    system = tuple(a.system) + tuple(b.system)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(system, np.kron(a.matrix, b.matrix))
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(system, np.kron(a.vector, b.vector))
    raise QcoreError("tensor_product requires two states of the same kind")


def partial_trace(rho: DensityOperator, keep: Iterable) -> DensityOperator:
    """Trace out every factor not in ``keep`` (labels or their names)."""
    keep_names = set(s.name if isinstance(s, HilbertLabel) else s for s in keep)
    names = rho.label_names()
    unknown = keep_names - set(names)
    if unknown:
        raise QcoreError(f"unknown labels in keep set: {sorted(unknown)}")
    dims = [s.dim for s in rho.system]
    kept = [i for i, s in enumerate(rho.system) if s.name in keep_names]
    if len(kept) == len(dims):
        return rho
    m = rho.matrix.reshape(dims + dims)
    n = len(dims)
    traced = [i for i in range(n) if i not in kept]
    for offset, i in enumerate(sorted(traced, reverse=True)):
        k = n - offset
        m = np.trace(m, axis1=i, axis2=i + k)
    new_system = tuple(rho.system[i] for i in kept)
    d = total_dim(new_system)
    return DensityOperator(new_system, m.reshape(d, d))


def hermitian_eigensystem(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.

    Eigenvectors are phase-fixed (first nonzero component real positive) and
    degenerate eigenvalues are ordered by the lexicographic key of the fixed
    vectors, so the output is deterministic.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise QcoreError("expected a square matrix")
    if np.max(np.abs(m - m.conj().T)) > TOL_HERM:
        raise QcoreError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(m)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    cols = []
    for i in range(v.shape[1]):
        col = v[:, i]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size:
            col = col * np.exp(-1j * np.angle(col[nz[0]]))
        cols.append(col)
    # stable tie-break inside degenerate groups
    def lex_key(c):
        r = np.round(c, 10)
        return tuple(x for pair in zip(r.real, r.imag) for x in pair)

    i = 0
    ordered = []
    idx = list(range(len(cols)))
    while i < len(idx):
        j = i
        while j + 1 < len(idx) and abs(w[idx[j + 1]] - w[idx[i]]) <= 1e-10:
            j += 1
        group = sorted(idx[i : j + 1], key=lambda k: lex_key(cols[k]))
        ordered.extend(group)
        i = j + 1
    w = w[ordered]
    vecs = np.column_stack([cols[k] for k in ordered])
    return w, vecs


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise QcoreError("trace norm expects a square matrix")
    return float(np.linalg.svd(m, compute_uv=False).sum())


def psd_sqrt(m) -> np.ndarray:
    """Matrix square root via eigen-decomposition, clamping rounding negatives."""
    m = np.asarray(m, dtype=complex)
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Fidelity ``|| sqrt(rho) sqrt(sigma) ||_1^2`` of two states on one system."""
    if rho.label_names() != sigma.label_names():
        raise QcoreError("fidelity requires states on the same system")
    f = trace_norm(psd_sqrt(rho.matrix) @ psd_sqrt(sigma.matrix)) ** 2
    return float(min(max(f, 0.0), 1.0 + 1e-9))


def purify(rho: DensityOperator, ancilla: HilbertLabel) -> PureState:
    """A purification of ``rho`` using ``ancilla`` (dim >= rank required)."""
    w, v = hermitian_eigensystem(rho.matrix)
    support = np.nonzero(w > TOL_PSD)[0]
    rank = len(support)
    if ancilla.dim < rank:
        raise QcoreError(f"ancilla dim {ancilla.dim} smaller than rank {rank}")
    if ancilla.name in rho.label_names():
        raise QcoreError(f"ancilla label {ancilla.name!r} collides with system")
    vec = np.zeros(rho.dim * ancilla.dim, dtype=complex)
    for slot, i in enumerate(support):
        anc = np.zeros(ancilla.dim)
        anc[slot] = 1.0
        vec += np.sqrt(w[i]) * np.kron(v[:, i], anc)
    vec /= np.linalg.norm(vec)
    return PureState(tuple(rho.system) + (ancilla,), vec)


# ---------------------------------------------------------------------------
# constructors used across the package and its tests


def basis_state(label: HilbertLabel, index: int) -> PureState:
    v = np.zeros(label.dim, dtype=complex)
    v[index] = 1.0
    return PureState((label,), v)


def maximally_mixed(label: HilbertLabel) -> DensityOperator:
    return DensityOperator((label,), np.eye(label.dim) / label.dim)


def maximally_entangled(a: HilbertLabel, b: HilbertLabel) -> PureState:
    if a.dim != b.dim:
        raise QcoreError("maximally entangled state needs equal dimensions")
    v = np.zeros(a.dim * b.dim, dtype=complex)
    for i in range(a.dim):
        v[i * b.dim + i] = 1.0
    return PureState((a, b), v / np.sqrt(a.dim))


def random_pure(label: HilbertLabel, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=label.dim) + 1j * rng.normal(size=label.dim)
    return PureState((label,), v / np.linalg.norm(v))


def random_density(label: HilbertLabel, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Hilbert-Schmidt style random state (Ginibre factor with given rank)."""
    k = rank if rank is not None else label.dim
    g = rng.normal(size=(label.dim, k)) + 1j * rng.normal(size=(label.dim, k))
    m = g @ g.conj().T
    return DensityOperator((label,), m / np.trace(m).real)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))

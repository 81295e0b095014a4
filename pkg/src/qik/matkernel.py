"""Dense complex linear algebra for small matrices (n <= 16).

Eigenvalue clustering on top of the complex Schur form, generalised
eigenprojectors via Sylvester equations, and Jordan structure recovered from
the nullities of powers.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DecompositionError, ShapeError

MAX_DIM = 16

__all__ = [
    "EigenCluster",
    "JordanType",
    "JordanAnalysis",
    "as_matrix",
    "schur_eigen_clusters",
    "generalized_eigenprojectors",
    "jordan_type",
    "jordan_basis_single_eigenvalue",
    "nullity",
    "rank",
]


def as_matrix(a, square: bool = False) -> np.ndarray:
    """Validate and coerce ``a`` to a finite complex 2-d array.

    Raises
    ------
    ShapeError
        If ``a`` is not 2-d, exceeds the supported size, contains non-finite
        entries, or ``square`` is requested and rows != cols.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got ndim={m.ndim}")
    if max(m.shape, default=0) > MAX_DIM:
        raise ShapeError(f"matrix size {m.shape} exceeds the supported {MAX_DIM}")
    if m.size and not np.all(np.isfinite(m)):
        raise ShapeError("matrix has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    return m


def default_tol(a: np.ndarray) -> float:
    # 1e-8 * ||A||_F: moment-map solving upstream leaves ~1e-9 noise.
    return 1e-8 * max(1.0, float(np.linalg.norm(a)))


def rank(a: np.ndarray, tol: float) -> int:
    """Numerical rank with threshold ``tol * max(shape) * sigma_max``."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * max(a.shape) * s[0]))


def nullity(a: np.ndarray, tol: float) -> int:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return a.shape[1] if a.ndim == 2 else 0
    return a.shape[1] - rank(a, tol)


def kernel_basis(a: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of ``a``."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.size == 0 or not np.any(a):
        return np.eye(n, dtype=complex)
    u, s, vh = np.linalg.svd(a)
    r = int(np.sum(s > tol * max(a.shape) * s[0])) if s[0] > 0 else 0
    return vh[r:].conj().T


def range_basis(a: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical column space of ``a``."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0 or not np.any(a):
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, vh = np.linalg.svd(a)
    r = int(np.sum(s > tol * max(a.shape) * s[0])) if s[0] > 0 else 0
    return u[:, :r]


@dataclass
class EigenCluster:
    """One cluster of nearby eigenvalues with its invariant subspace.

    ``subspace`` has orthonormal columns spanning an A-invariant subspace;
    ``value`` is the mean of the clustered eigenvalues.
    """

    value: complex
    multiplicity: int
    subspace: np.ndarray

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ShapeError("cluster multiplicity must be positive")
        if self.subspace.shape[1] != self.multiplicity:
            raise ShapeError("subspace width does not match multiplicity")


@dataclass
class JordanType:
    """Jordan block sizes (weakly decreasing) at one eigenvalue."""

    eigenvalue: complex
    partition: tuple[int, ...]

    def __post_init__(self):
        p = tuple(int(x) for x in self.partition)
        if any(x <= 0 for x in p) or any(p[i] < p[i + 1] for i in range(len(p) - 1)):
            raise ShapeError(f"not a weakly decreasing positive partition: {p}")
        self.partition = p

    @property
    def multiplicity(self) -> int:
        return sum(self.partition)


@dataclass
class JordanAnalysis:
    """Jordan types per eigenvalue cluster, plus an ill-conditioning flag.

    ``gap_warning`` is set when two clusters are separated by less than ten
    times the working tolerance, in which case the block structure is
    unreliable.
    """

    types: list[JordanType] = field(default_factory=list)
    gap_warning: bool = False

    def partition_at(self, value: complex, tol: float) -> tuple[int, ...]:
        for t in self.types:
            if abs(t.eigenvalue - value) <= tol:
                return t.partition
        raise KeyError(f"no cluster near {value}")


def _cluster_values(eigs: np.ndarray, tol: float) -> list[list[int]]:
    """Union-find clustering of eigenvalues at pairwise distance <= tol."""
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    # deterministic order: by first occurrence in the spectrum
    return sorted(groups.values(), key=lambda g: min(g))


def schur_eigen_clusters(a, tol: float | None = None) -> list[EigenCluster]:
    """Cluster the spectrum of ``a`` and return invariant-subspace bases.

    Eigenvalues within ``tol`` of each other share a cluster; for each
    cluster the leading Schur vectors after reordering span an invariant
    subspace with residual ``||A B - B (B* A B)|| <= 10 tol``.

    The Schur iteration comes with LAPACK's internal iteration cap; failure
    to converge surfaces as ``DecompositionError``.
    """
    a = as_matrix(a, square=True)
    if tol is None:
        tol = default_tol(a)
    if tol <= 0:
        raise ShapeError("tol must be positive")
    n = a.shape[0]
    if n == 0:
        return []
    try:
        t, z = scipy.linalg.schur(a, output="complex")
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK cap
        raise DecompositionError(f"Schur iteration did not converge: {exc}")
    eigs = np.diag(t)
    groups = _cluster_values(eigs, tol)
    values = [complex(np.mean(eigs[idx])) for idx in groups]
    clusters = []
    for which, idx in enumerate(groups):
        mult = len(idx)
        if mult == n:
            clusters.append(EigenCluster(value=values[which], multiplicity=n,
                                         subspace=z))
            continue
        # re-run Schur sorting this cluster (nearest-value assignment) first
        ts, zs, sdim = scipy.linalg.schur(
            a, output="complex", sort=_nearest_value_predicate(values, which))
        if sdim != mult:
            raise DecompositionError(
                f"cluster at {values[which]:.3g} could not be isolated "
                f"(sdim={sdim}, expected {mult}); eigenvalue gap is below tolerance")
        clusters.append(EigenCluster(value=values[which], multiplicity=mult,
                                     subspace=zs[:, :mult]))
    return clusters


def _nearest_value_predicate(values, which):
    def pred(lam):
        d = [abs(lam - v) for v in values]
        return int(np.argmin(d)) == which
    return pred


def generalized_eigenprojectors(a, tol: float | None = None) -> list[np.ndarray]:
    """Spectral projectors P_t per eigenvalue cluster of ``a``.

    Satisfy sum(P) = I, P_s P_t = delta_st P_s and [A, P_t] = 0 up to
    ``10 tol``; rank P_t equals the cluster multiplicity.
    """
    a = as_matrix(a, square=True)
    if tol is None:
        tol = default_tol(a)
    n = a.shape[0]
    clusters = schur_eigen_clusters(a, tol)
    values = [c.value for c in clusters]
    projectors = []
    for which, c in enumerate(clusters):
        if c.multiplicity == n:
            projectors.append(np.eye(n, dtype=complex))
            continue
        # reorder so the cluster leads, then solve T11 Y - Y T22 = T12 for
        # the (oblique) spectral projector Z [[I, Y], [0, 0]] Z*.
        t, z, sdim = scipy.linalg.schur(
            a, output="complex", sort=_nearest_value_predicate(values, which))
        m = sdim
        if m != c.multiplicity:
            raise DecompositionError(
                f"projector for cluster at {c.value:.3g} is ill-posed")
        t11, t12, t22 = t[:m, :m], t[:m, m:], t[m:, m:]
        y = scipy.linalg.solve_sylvester(t11, -t22, t12)
        pt = np.zeros((n, n), dtype=complex)
        pt[:m, :m] = np.eye(m)
        pt[:m, m:] = y
        projectors.append(z @ pt @ z.conj().T)
    return projectors


def jordan_type(a, tol: float | None = None) -> JordanAnalysis:
    """Jordan block structure of ``a`` from nullities of powers.

    For each eigenvalue cluster t with multiplicity m the partition is read
    off from ``nullity((A - tI)^k)`` for k = 1..m: the number of blocks of
    size >= k is the k-th nullity increment, and the partition is the
    conjugate of that increment sequence.
    """
    a = as_matrix(a, square=True)
    if tol is None:
        tol = default_tol(a)
    clusters = schur_eigen_clusters(a, tol)
    gap_warning = False
    values = [c.value for c in clusters]
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if abs(values[i] - values[j]) < 10 * tol:
                gap_warning = True
    types = []
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    for c in clusters:
        shifted = a - c.value * eye
        prev = 0
        increments = []
        power = eye.copy()
        for _ in range(c.multiplicity):
            power = power @ shifted
            nk = min(nullity(power, tol), c.multiplicity)
            increments.append(nk - prev)
            prev = nk
            if nk == c.multiplicity:
                break
        if prev != c.multiplicity:
            # powers never exhausted the cluster: separation trouble
            gap_warning = True
            increments.append(c.multiplicity - prev)
        if any(increments[i] < increments[i + 1] for i in range(len(increments) - 1)):
            gap_warning = True
            increments.sort(reverse=True)
        partition = _conjugate_partition(increments)
        types.append(JordanType(eigenvalue=c.value, partition=partition))
    if gap_warning:
        warnings.warn("eigenvalue clusters are separated by less than 10*tol; "
                      "Jordan structure may be unreliable", stacklevel=2)
    return JordanAnalysis(types=types, gap_warning=gap_warning)


def _conjugate_partition(parts: list[int]) -> tuple[int, ...]:
    parts = [p for p in parts if p > 0]
    if not parts:
        return ()
    out = []
    for k in range(1, max(parts) + 1):
        out.append(sum(1 for p in parts if p >= k))
    # conjugating the nullity increments yields the block sizes
    return tuple(sorted(out, reverse=True))


def jordan_basis_single_eigenvalue(a, value: complex, tol: float | None = None):
    """Columns of an (approximate) Jordan basis of ``a`` at ``value``.

    ``a`` must have ``value`` as its only eigenvalue (up to tol); returns
    ``(basis, sizes)`` where ``basis[:, j]`` are chain vectors ordered block
    by block, blocks by weakly decreasing size, and within each block from
    chain head to chain tail: N b_i = b_{i-1} with N = A - value I and
    N b_0 = 0.

    The basis is built by the classical staircase: pick chain tails spanning
    ker N^q modulo ker N^{q-1} + N ker N^{q+1}, then push down with N.
    """
    a = as_matrix(a, square=True)
    n = a.shape[0]
    if tol is None:
        tol = default_tol(a)
    if n == 0:
        return np.zeros((0, 0), dtype=complex), ()
    nmat = a - value * np.eye(n, dtype=complex)
    # kernels of increasing powers
    kers = [np.zeros((n, 0), dtype=complex)]
    power = np.eye(n, dtype=complex)
    q = 0
    while kers[-1].shape[1] < n:
        power = power @ nmat
        q += 1
        kb = kernel_basis(power, tol)
        if kb.shape[1] <= kers[-1].shape[1]:
            raise DecompositionError(
                f"matrix is not nilpotent at {value!r} within tolerance")
        kers.append(kb)
        if q > n:
            raise DecompositionError("power nullities failed to stabilise")
    chains: list[list[np.ndarray]] = []
    # `used` spans ker N^{k-1} together with N-images of taller chains
    for k in range(q, 0, -1):
        span_cols = [kers[k - 1]]
        for ch in chains:
            if len(ch) >= k:
                span_cols.append(ch[len(ch) - k].reshape(-1, 1))
        used = np.hstack(span_cols) if span_cols else np.zeros((n, 0), dtype=complex)
        qq, _ = np.linalg.qr(used) if used.shape[1] else (used, None)
        # candidates: ker N^k components orthogonal to `used`
        cand = kers[k]
        proj = cand - qq @ (qq.conj().T @ cand) if used.shape[1] else cand
        u, s, vh = np.linalg.svd(proj) if proj.size else (None, np.zeros(0), None)
        count = int(np.sum(s > tol * max(1, n) * max(1.0, s[0] if len(s) else 1.0)))
        for i in range(count):
            tail = u[:, i]
            chain = [tail]
            for _ in range(k - 1):
                chain.append(nmat @ chain[-1])
            chain.reverse()  # head (killed by N) first
            chains.append(chain)
    chains.sort(key=len, reverse=True)
    sizes = tuple(len(c) for c in chains)
    if sum(sizes) != n:
        raise DecompositionError(
            f"Jordan chains span {sum(sizes)} of {n} dimensions")
    basis = np.column_stack([v for ch in chains for v in ch])
    return basis, sizes

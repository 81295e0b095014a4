"""Diagonal quiver configurations and the torus picture.

A diagonal configuration stores one complex scalar pair ``(nu^k_i, mu^k_i)``
per quaternionic coordinate, ``1 <= i <= k <= n-1``.  Embedding the scalars
into the staircase matrix patterns makes every composition appearing in the
moment equations diagonal, so the full equations collapse to scalar chains.

Sign conventions for the scalar chains are *inherited* from the quiver-level
evaluators (the cross-module agreement is pinned by tests), never derived
independently here.

Coordinates on the torus side: an arrangement point carries both the
``s``-coordinates (one R^3 triple per circle factor, the moment-value side)
and the ``tau``-coordinates (n centred triples); the single source of truth
for their relation is ``s_j = tau_{j+1} + ... + tau_n``.  Moment triples map
to tau-differences via ``lam_j = tau_j - tau_{j+1}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .quiver import MomentValue, Quiver

__all__ = [
    "DiagonalQuiver",
    "ArrangementPoint",
    "build_diagonal",
    "torus_moment_residual",
    "is_diag_hks",
    "root_arrangement_stratum",
    "stabilizer_subtorus",
    "diagonal_from_quiver",
]


@dataclass
class DiagonalQuiver:
    """Ragged scalar data ``nu[k][i]``, ``mu[k][i]`` for k = 1..n-1, i <= k.

    ``nu[k-1]`` and ``mu[k-1]`` are length-k complex vectors (0-based lists).
    """

    n: int
    nu: list[np.ndarray]
    mu: list[np.ndarray]

    def __post_init__(self):
        if self.n < 1:
            raise ShapeError("n must be positive")
        if len(self.nu) != self.n - 1 or len(self.mu) != self.n - 1:
            raise ShapeError(f"need n-1 = {self.n - 1} scalar rows")
        self.nu = [np.asarray(row, dtype=complex) for row in self.nu]
        self.mu = [np.asarray(row, dtype=complex) for row in self.mu]
        for k, (nrow, mrow) in enumerate(zip(self.nu, self.mu), start=1):
            if nrow.shape != (k,) or mrow.shape != (k,):
                raise ShapeError(f"row {k} must have length {k}")

    @classmethod
    def zero(cls, n: int) -> "DiagonalQuiver":
        return cls(n, [np.zeros(k, dtype=complex) for k in range(1, n)],
                   [np.zeros(k, dtype=complex) for k in range(1, n)])

    @classmethod
    def random(cls, n: int, rng: np.random.Generator,
               scale: float = 1.0) -> "DiagonalQuiver":
        def row(k):
            return scale * (rng.standard_normal(k) + 1j * rng.standard_normal(k))
        return cls(n, [row(k) for k in range(1, n)],
                   [row(k) for k in range(1, n)])

    def to_json(self) -> dict:
        enc = lambda rows: [[[float(x.real), float(x.imag)] for x in row]
                            for row in rows]
        return {"n": self.n, "nu": enc(self.nu), "mu": enc(self.mu)}

    @classmethod
    def from_json(cls, obj) -> "DiagonalQuiver":
        if isinstance(obj, str):
            obj = json.loads(obj)
        dec = lambda rows: [np.array([complex(x[0], x[1]) for x in row],
                                     dtype=complex) for row in rows]
        return cls(int(obj["n"]), dec(obj["nu"]), dec(obj["mu"]))


def build_diagonal(dq: DiagonalQuiver) -> Quiver:
    """Embed the scalars into the staircase patterns of a full-flag quiver.

    ``alpha_k`` is the (k+1) x k diagonal injection with entries nu^k, and
    ``beta_k`` the k x (k+1) diagonal projection with entries mu^k; every
    composition entering the moment equations is then diagonal.
    """
    n = dq.n
    dims = tuple(range(1, n + 1))
    alphas, betas = [], []
    for k in range(1, n):
        a = np.zeros((k + 1, k), dtype=complex)
        b = np.zeros((k, k + 1), dtype=complex)
        for i in range(k):
            a[i, i] = dq.nu[k - 1][i]
            b[i, i] = dq.mu[k - 1][i]
        alphas.append(a)
        betas.append(b)
    return Quiver(dims, alphas, betas)


def diagonal_from_quiver(q: Quiver, tol: float = 1e-12) -> DiagonalQuiver:
    """Extract the scalar data of a quiver in diagonal shape; raises if the
    off-pattern entries exceed ``tol`` (relative)."""
    if not q.is_full_flag:
        raise ShapeError("diagonal configurations are full-flag")
    nu, mu = [], []
    for k in range(1, q.n):
        a, b = q.alphas[k - 1], q.betas[k - 1]
        nrow = np.array([a[i, i] for i in range(k)], dtype=complex)
        mrow = np.array([b[i, i] for i in range(k)], dtype=complex)
        a_pat = np.zeros_like(a)
        b_pat = np.zeros_like(b)
        for i in range(k):
            a_pat[i, i] = nrow[i]
            b_pat[i, i] = mrow[i]
        scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
        if (np.linalg.norm(a - a_pat) > tol * scale
                or np.linalg.norm(b - b_pat) > tol * scale):
            raise ShapeError(f"edge {k} is not in diagonal shape")
        nu.append(nrow)
        mu.append(mrow)
    return DiagonalQuiver(q.n, nu, mu)


def torus_moment_residual(dq: DiagonalQuiver):
    """Scalar-chain moment levels and residuals.

    Mirrors the quiver-level evaluators exactly: at level k the complex
    entries are ``nu^{k-1}_i mu^{k-1}_i (i < k, else 0) - nu^k_i mu^k_i``
    and the real entries
    ``|nu^{k-1}_i|^2 - |mu^{k-1}_i|^2 (i < k, else 0) + |mu^k_i|^2 -
    |nu^k_i|^2``; levels are trace averages, residuals Frobenius norms of
    the deviation vectors, maximised over levels.

    Returns ``(MomentValue, residual)``.
    """
    n = dq.n
    lam_c = np.zeros(n - 1, dtype=complex)
    lam_r = np.zeros(n - 1, dtype=float)
    res = 0.0
    for k in range(1, n):
        below_c = np.zeros(k, dtype=complex)
        below_r = np.zeros(k, dtype=float)
        if k >= 2:
            below_c[:k - 1] = dq.nu[k - 2] * dq.mu[k - 2]
            below_r[:k - 1] = np.abs(dq.nu[k - 2]) ** 2 - np.abs(dq.mu[k - 2]) ** 2
        c_entries = below_c - dq.nu[k - 1] * dq.mu[k - 1]
        r_entries = (below_r + np.abs(dq.mu[k - 1]) ** 2
                     - np.abs(dq.nu[k - 1]) ** 2)
        lam_c[k - 1] = c_entries.mean()
        lam_r[k - 1] = r_entries.mean()
        res = max(res,
                  float(np.linalg.norm(c_entries - lam_c[k - 1])),
                  float(np.linalg.norm(r_entries - lam_r[k - 1])))
    return MomentValue(lam_c, lam_r), res


def is_diag_hks(dq: DiagonalQuiver) -> bool:
    """True iff no scalar pair ``(nu^k_i, mu^k_i)`` vanishes simultaneously."""
    for nrow, mrow in zip(dq.nu, dq.mu):
        if np.any((nrow == 0) & (mrow == 0)):
            return False
    return True


@dataclass
class ArrangementPoint:
    """A point of the torus Lie algebra tensored with R^3.

    ``s`` has shape (n-1, 3) (the circle-factor coordinates, equal to the
    moment triples), ``tau`` has shape (n, 3) with columns summing to zero.
    The conversion ``s_j = tau_{j+1} + ... + tau_n`` is enforced on
    construction.
    """

    s: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.tau = np.asarray(self.tau, dtype=float)
        n = self.tau.shape[0]
        if self.tau.shape != (n, 3) or self.s.shape != (n - 1, 3):
            raise ShapeError("inconsistent coordinate shapes")
        if np.linalg.norm(self.tau.sum(axis=0)) > 1e-9 * max(
                1.0, np.linalg.norm(self.tau)):
            raise ShapeError("tau coordinates must sum to zero")
        expect = np.array([self.tau[j + 1:].sum(axis=0) for j in range(n - 1)])
        if np.linalg.norm(expect - self.s) > 1e-9 * max(1.0, np.linalg.norm(self.s)):
            raise ShapeError("s and tau coordinates disagree")

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    @classmethod
    def from_tau(cls, tau: np.ndarray) -> "ArrangementPoint":
        tau = np.asarray(tau, dtype=float)
        tau = tau - tau.mean(axis=0)
        n = tau.shape[0]
        s = np.array([tau[j + 1:].sum(axis=0) for j in range(n - 1)])
        return cls(s, tau)

    @classmethod
    def from_moment(cls, mu: MomentValue) -> "ArrangementPoint":
        """Moment triples map to tau-differences: lam_j = tau_j - tau_{j+1}."""
        lam = mu.triples()
        n = len(mu) + 1
        tau = np.zeros((n, 3))
        for j in range(1, n):
            tau[j] = tau[j - 1] - lam[j - 1]
        return cls.from_tau(tau)

    def to_moment(self) -> MomentValue:
        lam = self.tau[:-1] - self.tau[1:]
        return MomentValue.from_triples(lam)


def root_arrangement_stratum(p: ArrangementPoint, tol: float = 1e-7):
    """Partition of {1..n} by coincidence of tau coordinates.

    ``i ~ j`` iff ``tau_i - tau_j`` vanishes at ``tol``; agrees with the
    moment-level equivalence through the coordinate change.  Returns the
    classes as a tuple of tuples (1-based, ordered by minimal element) --
    the same canonical form used by the stratification module.
    """
    n = p.n
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(p.tau[i] - p.tau[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i + 1)
    return tuple(tuple(sorted(g)) for g in
                 sorted(groups.values(), key=min))


def stabilizer_subtorus(pairs, n: int):
    """Interval generators ``e_ij`` and a basis of their integer span.

    ``e_ij`` has ones in slots i..j-1 of a length n-1 vector.  Returns
    ``(generators, basis)`` where ``basis`` is an independent subset of the
    generators spanning the same subspace.
    """
    gens = []
    for (i, j) in pairs:
        if not (1 <= i < j <= n):
            raise ShapeError(f"malformed pair {(i, j)}")
        v = np.zeros(n - 1, dtype=int)
        v[i - 1:j - 1] = 1
        gens.append(v)
    basis: list[np.ndarray] = []
    for v in gens:
        cand = basis + [v]
        if np.linalg.matrix_rank(np.array(cand, dtype=float)) == len(cand):
            basis.append(v)
    return gens, basis

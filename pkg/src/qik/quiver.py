"""Quiver configurations, their moment maps and group actions.

A quiver here is a chain of complex vector spaces ``V_1, ..., V_n`` with
``dim V_n = n``, together with maps ``alpha_l: V_l -> V_{l+1}`` and
``beta_l: V_{l+1} -> V_l``.  The two families of moment-map expressions live
on the levels ``V_1 .. V_{n-1}``:

* complex:  ``D_l = alpha_{l-1} beta_{l-1} - beta_l alpha_l``
* real:     ``E_l = alpha_{l-1} alpha_{l-1}* - beta_{l-1}* beta_{l-1}
  + beta_l beta_l* - alpha_l* alpha_l``

and a configuration solves the equations at level ``lam`` when
``D_l = lam_c[l] I`` and ``E_l = lam_r[l] I``.  Evaluators below never assume
exactness: they orthogonally project onto the scalars (trace average) and
report the residual.

Moment triples
--------------
The per-level moment value is packaged as a point of R^3 as
``(Re lam_c, Im lam_c, lam_r / 2)``.  The factor 1/2 on the real coordinate
is a normalisation choice: with it the rotation of complex structures by a
unit quaternion acts on the triples by an honest orthogonal matrix (see
:func:`su2_rotation_matrix`).  Zero-sets, and hence all equivalence-relation
logic downstream, are unaffected by the scaling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import RankError, ShapeError
from .matkernel import MAX_DIM, rank as _rank

__all__ = [
    "Quiver",
    "MomentValue",
    "UnitQuaternion",
    "GroupElement",
    "complex_moment_residual",
    "real_moment_residual",
    "moment_value",
    "apply_group",
    "rotate_structure",
    "su2_rotation_matrix",
    "big_x",
    "is_hk_stable",
    "ScalarChain",
    "direct_sum",
    "quiver_to_json",
    "quiver_from_json",
    "random_unit_quaternion",
]

_HERMITICITY_TOL = 1e-10


@dataclass
class Quiver:
    """Dimension vector plus the two families of chain maps.

    ``dims[k]`` is dim V_{k+1}; there are always ``n`` levels and
    ``dims[-1] == n``.  ``alphas[e]`` has shape ``(dims[e+1], dims[e])`` and
    ``betas[e]`` the transposed shape.  Zero-dimensional levels are legal
    (general flags ``0 = m_0 <= m_1 <= ... <= m_n = n``).
    """

    dims: tuple[int, ...]
    alphas: list[np.ndarray]
    betas: list[np.ndarray]

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        n = len(self.dims)
        if n == 0 or self.dims[-1] != n:
            raise ShapeError(f"need dims[-1] == number of levels, got {self.dims}")
        if n > MAX_DIM:
            raise ShapeError(f"rank {n} exceeds the supported {MAX_DIM}")
        if any(d < 0 for d in self.dims):
            raise ShapeError("negative dimension")
        if len(self.alphas) != n - 1 or len(self.betas) != n - 1:
            raise ShapeError("need exactly n-1 alpha and beta maps")
        self.alphas = [np.asarray(a, dtype=complex) for a in self.alphas]
        self.betas = [np.asarray(b, dtype=complex) for b in self.betas]
        for e in range(n - 1):
            want_a = (self.dims[e + 1], self.dims[e])
            if self.alphas[e].shape != want_a:
                raise ShapeError(
                    f"alpha[{e}] has shape {self.alphas[e].shape}, want {want_a}")
            if self.betas[e].shape != want_a[::-1]:
                raise ShapeError(
                    f"beta[{e}] has shape {self.betas[e].shape}, want {want_a[::-1]}")
            for m in (self.alphas[e], self.betas[e]):
                if m.size and not np.all(np.isfinite(m)):
                    raise ShapeError("non-finite map entries")

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def is_full_flag(self) -> bool:
        return self.dims == tuple(range(1, self.n + 1))

    def copy(self) -> "Quiver":
        return Quiver(self.dims, [a.copy() for a in self.alphas],
                      [b.copy() for b in self.betas])

    @classmethod
    def zero(cls, dims) -> "Quiver":
        dims = tuple(int(d) for d in dims)
        alphas = [np.zeros((dims[e + 1], dims[e]), dtype=complex)
                  for e in range(len(dims) - 1)]
        betas = [np.zeros((dims[e], dims[e + 1]), dtype=complex)
                 for e in range(len(dims) - 1)]
        return cls(dims, alphas, betas)

    @classmethod
    def random(cls, dims, rng: np.random.Generator, scale: float = 1.0) -> "Quiver":
        dims = tuple(int(d) for d in dims)

        def rnd(r, c):
            return scale * (rng.standard_normal((r, c))
                            + 1j * rng.standard_normal((r, c)))

        alphas = [rnd(dims[e + 1], dims[e]) for e in range(len(dims) - 1)]
        betas = [rnd(dims[e], dims[e + 1]) for e in range(len(dims) - 1)]
        return cls(dims, alphas, betas)

    @classmethod
    def random_full_flag(cls, n: int, rng: np.random.Generator,
                         scale: float = 1.0) -> "Quiver":
        return cls.random(tuple(range(1, n + 1)), rng, scale)


@dataclass
class MomentValue:
    """Per-level torus moment values ``lam = (lam_c, lam_r)``.

    ``nu(i)`` returns the tail sum ``lam_c[i] + ... + lam_c[n-1]`` in
    1-based level indexing, the quantity entering the spectral identity for
    the top composition.
    """

    lambda_c: np.ndarray
    lambda_r: np.ndarray

    def __post_init__(self):
        self.lambda_c = np.asarray(self.lambda_c, dtype=complex)
        self.lambda_r = np.asarray(self.lambda_r, dtype=float)
        if self.lambda_c.shape != self.lambda_r.shape or self.lambda_c.ndim != 1:
            raise ShapeError("lambda_c and lambda_r must be 1-d of equal length")
        if not (np.all(np.isfinite(self.lambda_c))
                and np.all(np.isfinite(self.lambda_r))):
            raise ShapeError("non-finite moment values")

    def __len__(self) -> int:
        return len(self.lambda_c)

    def nu(self, i: int) -> complex:
        """Tail sum of complex levels from 1-based index ``i``; nu(n) = 0."""
        if not 1 <= i <= len(self) + 1:
            raise ShapeError(f"nu index {i} out of range")
        return complex(np.sum(self.lambda_c[i - 1:]))

    def triples(self) -> np.ndarray:
        """(n-1, 3) array of R^3 triples ``(Re c, Im c, r/2)``."""
        return np.column_stack([self.lambda_c.real, self.lambda_c.imag,
                                self.lambda_r / 2.0])

    @classmethod
    def from_triples(cls, t: np.ndarray) -> "MomentValue":
        t = np.asarray(t, dtype=float)
        return cls(t[:, 0] + 1j * t[:, 1], 2.0 * t[:, 2])

    def interval_sum(self, i: int, j: int) -> np.ndarray:
        """R^3 sum of triples over levels i..j-1 (1-based, i < j)."""
        return self.triples()[i - 1:j - 1].sum(axis=0)


@dataclass
class UnitQuaternion:
    """``a + j b`` with ``|a|^2 + |b|^2 = 1``."""

    a: complex
    b: complex

    def __post_init__(self):
        self.a = complex(self.a)
        self.b = complex(self.b)
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ShapeError(f"quaternion norm^2 = {norm}, not 1 within 1e-12")

    @classmethod
    def one(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0)

    @classmethod
    def j(cls) -> "UnitQuaternion":
        return cls(0.0, 1.0)

    def __mul__(self, other: "UnitQuaternion") -> "UnitQuaternion":
        # (a + jb)(c + jd) = (ac - conj(d) b) + j(da + conj(c) b)
        a, b, c, d = self.a, self.b, other.a, other.b
        return UnitQuaternion(a * c - np.conj(d) * b, d * a + np.conj(c) * b)


def random_unit_quaternion(rng: np.random.Generator) -> UnitQuaternion:
    v = rng.standard_normal(4)
    v /= np.linalg.norm(v)
    return UnitQuaternion(v[0] + 1j * v[1], v[2] + 1j * v[3])


@dataclass
class GroupElement:
    """Per-level invertible factors ``g_1..g_{n-1}`` plus optional ``g_n``.

    ``claims`` records membership assertions ("unitary", "special") that are
    verified by :func:`check_claims` when a caller relies on them; they are
    not enforced on construction.
    """

    factors: list[np.ndarray]
    top: np.ndarray | None = None
    claims: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        self.factors = [np.asarray(g, dtype=complex) for g in self.factors]
        for g in self.factors:
            if g.ndim != 2 or g.shape[0] != g.shape[1]:
                raise ShapeError("group factors must be square")
        if self.top is not None:
            self.top = np.asarray(self.top, dtype=complex)
            if self.top.ndim != 2 or self.top.shape[0] != self.top.shape[1]:
                raise ShapeError("top factor must be square")
        self.claims = frozenset(self.claims)

    @classmethod
    def identity(cls, dims, with_top: bool = False) -> "GroupElement":
        facs = [np.eye(d, dtype=complex) for d in dims[:-1]]
        top = np.eye(dims[-1], dtype=complex) if with_top else None
        return cls(facs, top)

    def check_claims(self, tol: float = 1e-9) -> None:
        mats = list(self.factors) + ([self.top] if self.top is not None else [])
        for g in mats:
            if g.shape[0] == 0:
                continue
            if "unitary" in self.claims:
                if np.linalg.norm(g @ g.conj().T - np.eye(g.shape[0])) > tol:
                    raise RankError("factor violates its unitarity claim")
            if "special" in self.claims:
                if abs(np.linalg.det(g) - 1.0) > tol:
                    raise RankError("factor violates its det=1 claim")

    def frobenius_norm(self) -> float:
        mats = list(self.factors) + ([self.top] if self.top is not None else [])
        return float(np.sqrt(sum(np.linalg.norm(g) ** 2 for g in mats)))


# ---------------------------------------------------------------------------
# moment evaluators


def _level_blocks_complex(q: Quiver):
    """Yield (level_dim, D_l) for l = 1..n-1."""
    for e in range(q.n - 1):
        d = q.dims[e]
        below = (q.alphas[e - 1] @ q.betas[e - 1] if e >= 1
                 else np.zeros((d, d), dtype=complex))
        yield d, below - q.betas[e] @ q.alphas[e]


def complex_moment_residual(q: Quiver):
    """Trace-averaged complex levels and the worst traceless deviation.

    Returns ``(lambda_c, residual)`` with ``lambda_c[l] = tr(D_l)/dim`` and
    ``residual = max_l ||D_l - lambda_c[l] I||_F``.  Zero-dimensional levels
    contribute a zero level and no residual.
    """
    lam = np.zeros(q.n - 1, dtype=complex)
    res = 0.0
    for l, (d, block) in enumerate(_level_blocks_complex(q)):
        if d == 0:
            continue
        lam[l] = np.trace(block) / d
        res = max(res, float(np.linalg.norm(block - lam[l] * np.eye(d))))
    return lam, res


def _level_blocks_real(q: Quiver):
    for e in range(q.n - 1):
        d = q.dims[e]
        a_lo = q.alphas[e - 1] if e >= 1 else np.zeros((d, 0), dtype=complex)
        b_lo = q.betas[e - 1] if e >= 1 else np.zeros((0, d), dtype=complex)
        block = (a_lo @ a_lo.conj().T - b_lo.conj().T @ b_lo
                 + q.betas[e] @ q.betas[e].conj().T
                 - q.alphas[e].conj().T @ q.alphas[e])
        yield d, block


def real_moment_residual(q: Quiver):
    """Trace-averaged real levels and the worst traceless deviation.

    Each level block is Hermitian by construction; a skew part beyond 1e-10
    signals an internal arithmetic fault and raises.
    """
    lam = np.zeros(q.n - 1, dtype=float)
    res = 0.0
    for l, (d, block) in enumerate(_level_blocks_real(q)):
        if d == 0:
            continue
        skew = np.linalg.norm(block - block.conj().T)
        if skew > _HERMITICITY_TOL * max(1.0, np.linalg.norm(block)):
            raise ShapeError(f"real moment block at level {l + 1} is not "
                             f"Hermitian (skew {skew:.3e})")
        tr = np.trace(block) / d
        if abs(tr.imag) > 1e-12 * max(1.0, abs(tr)):
            raise ShapeError("real moment trace has an imaginary part")
        lam[l] = tr.real
        res = max(res, float(np.linalg.norm(block - lam[l] * np.eye(d))))
    return lam, res


def moment_value(q: Quiver) -> tuple[MomentValue, float]:
    """Full moment value and the max of the two residual norms."""
    lc, rc = complex_moment_residual(q)
    lr, rr = real_moment_residual(q)
    return MomentValue(lc, lr), max(rc, rr)


# ---------------------------------------------------------------------------
# group actions


def apply_group(q: Quiver, g: GroupElement) -> Quiver:
    """Transform by ``alpha_l -> g_{l+1} alpha_l g_l^-1``, ``beta_l -> g_l
    beta_l g_{l+1}^-1`` (with ``g_n`` acting only when supplied).

    Unitary factors preserve both residual norms; the complex levels are
    invariant under every invertible choice.
    """
    if len(g.factors) != q.n - 1:
        raise ShapeError(f"need {q.n - 1} factors, got {len(g.factors)}")
    for e, fac in enumerate(g.factors):
        if fac.shape[0] != q.dims[e]:
            raise ShapeError(f"factor {e} has size {fac.shape[0]}, "
                             f"level needs {q.dims[e]}")
    if g.top is not None and g.top.shape[0] != q.dims[-1]:
        raise ShapeError("top factor size mismatch")

    def inv_right(m, fac):
        # m @ fac^{-1} without forming the inverse
        if fac.shape[0] == 0 or m.size == 0:
            return m
        try:
            return np.linalg.solve(fac.T, m.T).T
        except np.linalg.LinAlgError:
            raise RankError("singular group factor")

    def left(fac, m):
        return fac @ m if fac.shape[0] else m

    gs = list(g.factors) + [g.top if g.top is not None
                            else np.eye(q.dims[-1], dtype=complex)]
    alphas, betas = [], []
    for e in range(q.n - 1):
        alphas.append(inv_right(left(gs[e + 1], q.alphas[e]), gs[e]))
        betas.append(inv_right(left(gs[e], q.betas[e]), gs[e + 1]))
    return Quiver(q.dims, alphas, betas)


def rotate_structure(q: Quiver, u: UnitQuaternion) -> Quiver:
    """Rotate the complex structures: per edge,

    ``alpha' = a alpha - b beta*``, ``beta' = a beta + b alpha*``.

    Restricted to 1x1 blocks this is right multiplication of the quaternion
    ``gamma = alpha + j beta`` by ``u = a + j b``; on moment triples it acts
    by :func:`su2_rotation_matrix(u)`.
    """
    a, b = u.a, u.b
    alphas, betas = [], []
    for e in range(q.n - 1):
        al, be = q.alphas[e], q.betas[e]
        alphas.append(a * al - b * be.conj().T)
        betas.append(a * be + b * al.conj().T)
    return Quiver(q.dims, alphas, betas)


def su2_rotation_matrix(u: UnitQuaternion) -> np.ndarray:
    """The SO(3) matrix by which ``rotate_structure`` moves moment triples.

    Acting on ``(Re c, Im c, h)`` with ``c`` a complex moment level and
    ``h`` half the real level:

    ``c' = a^2 c - b^2 conj(c) + 2 a b h`` and
    ``h' = (|a|^2 - |b|^2) h - 2 Re(a conj(b) c)``.
    """
    a, b = u.a, u.b
    cols = []
    for c, h in ((1.0, 0.0), (1j, 0.0), (0.0, 1.0)):
        c_new = a * a * c - b * b * np.conj(c) + 2 * a * b * h
        h_new = (abs(a) ** 2 - abs(b) ** 2) * h - 2 * (a * np.conj(b) * c).real
        cols.append([c_new.real, c_new.imag, h_new])
    return np.array(cols, dtype=float).T


def big_x(q: Quiver):
    """Top composition ``X = alpha_{n-1} beta_{n-1}`` and its traceless part."""
    x = q.alphas[-1] @ q.betas[-1]
    n = q.dims[-1]
    x0 = x - (np.trace(x) / n) * np.eye(n, dtype=complex)
    return x, x0


# ---------------------------------------------------------------------------
# stability


def _full_rank_everywhere(q: Quiver, tol: float) -> bool:
    for e in range(q.n - 1):
        if q.dims[e] == 0:
            continue
        if _rank(q.alphas[e], tol) < q.dims[e]:
            return False
        if _rank(q.betas[e], tol) < q.dims[e]:
            return False
    return True


def _diagonal_scalars(q: Quiver, tol: float = 1e-12):
    """If every map has the diagonal-injection/projection shape, return the
    per-edge scalar vectors (nu, mu); otherwise None."""
    nus, mus = [], []
    for e in range(q.n - 1):
        al, be = q.alphas[e], q.betas[e]
        r, c = al.shape
        if r != c + 1:
            return None
        nu = np.diag(al[:c, :]).copy() if c else np.zeros(0, dtype=complex)
        mu = np.diag(be[:, :c]).copy() if c else np.zeros(0, dtype=complex)
        scale = max(1.0, float(np.linalg.norm(al)), float(np.linalg.norm(be)))
        if (np.linalg.norm(al - _diag_tall(nu, r, c)) > tol * scale
                or np.linalg.norm(be - _diag_wide(mu, c, r)) > tol * scale):
            return None
        nus.append(nu)
        mus.append(mu)
    return nus, mus


def _diag_tall(v, rows, cols):
    m = np.zeros((rows, cols), dtype=complex)
    for i, x in enumerate(v):
        m[i, i] = x
    return m


def _diag_wide(v, rows, cols):
    m = np.zeros((rows, cols), dtype=complex)
    for i, x in enumerate(v):
        m[i, i] = x
    return m


def is_hk_stable(q: Quiver, tol: float = 1e-9, samples: int = 32,
                 seed: int = 0) -> str:
    """Sampled test for stability under rotations of complex structures.

    Returns ``"stable"`` when the identity or one of ``samples`` seeded
    random rotations makes every alpha full column rank and every beta full
    row rank at ``tol``; ``"unstable"`` on an exact certificate (an edge pair
    that is identically zero, or a diagonal configuration with a
    simultaneously vanishing scalar pair); ``"inconclusive"`` otherwise.
    """
    if samples < 1:
        raise ShapeError("samples must be >= 1")
    # exact certificates: rotation mixes alpha with beta*, so a jointly zero
    # pair (at one edge, or one diagonal slot) stays zero under every u
    for e in range(q.n - 1):
        if q.dims[e] == 0:
            continue
        if np.linalg.norm(q.alphas[e]) == 0.0 and np.linalg.norm(q.betas[e]) == 0.0:
            return "unstable"
    diag = _diagonal_scalars(q)
    if diag is not None:
        nus, mus = diag
        for nu, mu in zip(nus, mus):
            if any(abs(n_) == 0.0 and abs(m_) == 0.0 for n_, m_ in zip(nu, mu)):
                return "unstable"
    if _full_rank_everywhere(q, tol):
        return "stable"
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        u = random_unit_quaternion(rng)
        if _full_rank_everywhere(rotate_structure(q, u), tol):
            return "stable"
    return "inconclusive"


# ---------------------------------------------------------------------------
# direct sums


@dataclass
class ScalarChain:
    """A ``d x d`` scalar summand occupying levels ``start .. stop-1``
    (1-based, ``stop <= n``), with scalar edge values between its levels.

    ``alphas[k]``/``betas[k]`` is the scalar on the edge ``start+k ->
    start+k+1``; the maps entering and leaving the occupied range are zero.
    """

    start: int
    stop: int
    dim: int
    alphas: tuple[complex, ...] = ()
    betas: tuple[complex, ...] = ()

    def __post_init__(self):
        if not (1 <= self.start < self.stop):
            raise ShapeError(f"need 1 <= start < stop, got {(self.start, self.stop)}")
        if self.dim < 1:
            raise ShapeError("chain dimension must be positive")
        want = self.stop - self.start - 1
        if len(self.alphas) != want or len(self.betas) != want:
            raise ShapeError(f"chain spans {want} edges, got "
                             f"{len(self.alphas)} alphas / {len(self.betas)} betas")
        self.alphas = tuple(complex(a) for a in self.alphas)
        self.betas = tuple(complex(b) for b in self.betas)

    def covers(self, level: int) -> bool:
        return self.start <= level < self.stop


def direct_sum(main: Quiver, chains: list[ScalarChain]) -> Quiver:
    """Orthogonal direct sum of a flag-shaped quiver with scalar chains.

    The space at level ``k`` is ``C^{m_k}`` (from ``main``) plus one
    ``C^{d_h}`` block per chain covering ``k``; blocks are laid out in the
    order [main, chains as given].  The assembled dimensions must come out
    weakly increasing and end at ``n`` (the usual flag bookkeeping), else a
    ShapeError is raised.
    """
    n = main.n
    for ch in chains:
        if ch.stop > n:
            raise ShapeError(f"chain {ch.start, ch.stop} exceeds n={n}")
    dims = []
    for k in range(1, n + 1):
        dims.append(main.dims[k - 1]
                    + sum(ch.dim for ch in chains if ch.covers(k)))
    if dims[-1] != n:
        raise ShapeError(f"assembled top dimension {dims[-1]} != {n} "
                         "(chains may not reach the top level)")
    if any(dims[k] > k + 1 for k in range(n)) or any(
            dims[k + 1] < dims[k] for k in range(n - 1)):
        raise ShapeError(f"assembled dims {dims} violate the flag constraints")

    alphas, betas = [], []
    for e in range(n - 1):
        lo, hi = e + 1, e + 2  # 1-based levels joined by this edge
        blocks_lo = [(main.dims[e], None)] + [
            (ch.dim, ch) for ch in chains if ch.covers(lo)]
        blocks_hi = [(main.dims[e + 1], None)] + [
            (ch.dim, ch) for ch in chains if ch.covers(hi)]
        a = np.zeros((dims[e + 1], dims[e]), dtype=complex)
        b = np.zeros((dims[e], dims[e + 1]), dtype=complex)
        # main block
        a[:main.dims[e + 1], :main.dims[e]] = main.alphas[e]
        b[:main.dims[e], :main.dims[e + 1]] = main.betas[e]
        # chain blocks: offset bookkeeping on each side
        off_lo = main.dims[e]
        for d, ch in blocks_lo[1:]:
            if ch.covers(hi):
                off_hi = main.dims[e + 1]
                for d2, ch2 in blocks_hi[1:]:
                    if ch2 is ch:
                        break
                    off_hi += d2
                k = lo - ch.start
                a[off_hi:off_hi + d, off_lo:off_lo + d] = (
                    ch.alphas[k] * np.eye(d))
                b[off_lo:off_lo + d, off_hi:off_hi + d] = (
                    ch.betas[k] * np.eye(d))
            off_lo += d
        alphas.append(a)
        betas.append(b)
    return Quiver(tuple(dims), alphas, betas)


# ---------------------------------------------------------------------------
# JSON wire format: complex numbers as [re, im], matrices row-major


def _mat_to_json(m: np.ndarray):
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _mat_from_json(rows, shape):
    m = np.array([[complex(x[0], x[1]) for x in row] for row in rows],
                 dtype=complex) if rows else np.zeros(shape, dtype=complex)
    if m.size == 0:
        m = m.reshape(shape)
    if m.shape != tuple(shape):
        raise ShapeError(f"matrix in JSON has shape {m.shape}, want {shape}")
    return m


def quiver_to_json(q: Quiver) -> dict:
    return {
        "n": q.n,
        "dims": list(q.dims),
        "alphas": [_mat_to_json(a) for a in q.alphas],
        "betas": [_mat_to_json(b) for b in q.betas],
    }


def quiver_from_json(obj) -> Quiver:
    if isinstance(obj, str):
        obj = json.loads(obj)
    dims = tuple(int(d) for d in obj["dims"])
    n = len(dims)
    if int(obj.get("n", n)) != n:
        raise ShapeError("field 'n' disagrees with len(dims)")
    alphas = [_mat_from_json(rows, (dims[e + 1], dims[e]))
              for e, rows in enumerate(obj["alphas"])]
    betas = [_mat_from_json(rows, (dims[e], dims[e + 1]))
             for e, rows in enumerate(obj["betas"])]
    return Quiver(dims, alphas, betas)

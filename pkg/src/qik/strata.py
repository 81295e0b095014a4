"""Stratum classification of quiver configurations.

The pipeline refines a solved configuration through five stages:

1. *generic rotation* -- rotate complex structures so that an R^3 interval
   sum of moment triples vanishes exactly when its complex part does;
2. *level equivalence* -- the relation ``i ~ j  iff  lam_i + ... +
   lam_{j-1} = 0`` in R^3, one class per coincident eigenvalue group;
3. *eigenspace decomposition* -- split every level into the generalised
   eigenspaces of the edge compositions; the chains are anchored by the
   predicted eigenvalues ``tau_{l,C} = nu_l - nu_{c}`` (tail sums of the
   complex levels), one chain per equivalence class;
4. *contraction* -- compose away the edges on which the chain eigenvalue is
   nonzero (they are isomorphisms), leaving a configuration supported on the
   class members with all accumulated levels zero;
5. *splitting* -- write the contracted piece as (injective/surjective part)
   + (all-maps-zero part).

The label assembles the equivalence relation, one nilpotent-orbit partition
per class (from the rank sequence of the star part), and the equivalent
interval data ``(S, delta)`` with its flag ``m_0 <= ... <= m_n`` and the
modification count ``ell``.

Ordering conventions: classes by minimal element; Jordan blocks by weakly
decreasing size; interval pairs sorted by their upper endpoints (which are
automatically distinct, as are the lower ones).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (DecompositionError, RankError, RegularityError,
                     ShapeError)
from .matkernel import kernel_basis, range_basis
from .quiver import (GroupElement, MomentValue, Quiver, UnitQuaternion,
                     apply_group, big_x, moment_value, random_unit_quaternion,
                     rotate_structure)

__all__ = [
    "EquivRelation",
    "StratumLabel",
    "Fragment",
    "SubquiverDecomposition",
    "ClassifyResult",
    "equivalence_from_levels",
    "generic_rotation",
    "decompose_by_eigenspaces",
    "contract",
    "split_closed_orbit_quiver",
    "classify",
    "check_kostant_identity",
    "kappa_spectrum",
    "symplectic_stratum",
    "enumerate_labels",
    "label_from_sim_orbits",
    "label_to_json",
    "label_from_json",
]

RESIDUAL_GATE = 1e-8   # inputs with worse moment residuals are rejected


# ---------------------------------------------------------------------------
# equivalence relations


@dataclass(frozen=True)
class EquivRelation:
    """Partition of {1..n} into classes, each sorted, ordered by minimum."""

    classes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = sorted(x for c in self.classes for x in c)
        n = len(seen)
        if seen != list(range(1, n + 1)):
            raise ShapeError(f"classes do not partition 1..n: {self.classes}")
        canon = tuple(tuple(sorted(c)) for c in
                      sorted(self.classes, key=min))
        object.__setattr__(self, "classes", canon)

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.classes)

    def class_of(self, i: int) -> tuple[int, ...]:
        for c in self.classes:
            if i in c:
                return c
        raise KeyError(i)

    def related(self, i: int, j: int) -> bool:
        return j in self.class_of(i)

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "EquivRelation":
        parent = list(range(n + 1))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in pairs:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
        groups: dict[int, list[int]] = {}
        for i in range(1, n + 1):
            groups.setdefault(find(i), []).append(i)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def singletons(cls, n: int) -> "EquivRelation":
        return cls(tuple((i,) for i in range(1, n + 1)))


def equivalence_from_levels(mu: MomentValue, tol: float = 1e-7) -> EquivRelation:
    """``i ~ j`` iff the R^3 sum of moment triples over i..j-1 is <= tol.

    Transitivity holds exactly for exact data (sums of sums); at finite
    tolerance it is enforced by closing under union-find.
    """
    if tol <= 0:
        raise ShapeError("tol must be positive")
    n = len(mu) + 1
    pairs = []
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            if np.linalg.norm(mu.interval_sum(i, j)) <= tol:
                pairs.append((i, j))
    return EquivRelation.from_pairs(n, pairs)


def level_margin(mu: MomentValue, tol: float = 1e-7) -> float:
    """Smallest nonzero interval-sum norm (distance to the next-coarser
    relation); inf when every sum vanishes."""
    n = len(mu) + 1
    vals = [np.linalg.norm(mu.interval_sum(i, j))
            for i in range(1, n) for j in range(i + 1, n + 1)]
    nonzero = [v for v in vals if v > tol]
    return float(min(nonzero)) if nonzero else float("inf")


# ---------------------------------------------------------------------------
# generic rotation


def _regularity_holds(mu: MomentValue, tol: float) -> bool:
    n = len(mu) + 1
    for i in range(1, n):
        for j in range(i + 1, n + 1):
            s3 = np.linalg.norm(mu.interval_sum(i, j))
            sc = abs(np.sum(mu.lambda_c[i - 1:j - 1]))
            if s3 > tol and sc <= tol:
                return False
    return True


def generic_rotation(q: Quiver, tol: float = 1e-7, seed: int = 0,
                     max_tries: int = 64):
    """Rotate complex structures until interval sums vanish in R^3 exactly
    when their complex parts do.

    The identity is tried first; then seeded uniform rotations.  Failure
    after ``max_tries`` samples (a measure-zero event for genuine data)
    raises RegularityError.
    """
    mu, _ = moment_value(q)
    if _regularity_holds(mu, tol):
        return q, UnitQuaternion.one()
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        u = random_unit_quaternion(rng)
        q_rot = rotate_structure(q, u)
        mu_rot, _ = moment_value(q_rot)
        if _regularity_holds(mu_rot, tol):
            return q_rot, u
    raise RegularityError(f"no generic rotation found in {max_tries} tries")


# ---------------------------------------------------------------------------
# fragments and eigenspace decomposition


@dataclass
class Fragment:
    """A sub- or contracted quiver supported on a sublist of levels.

    ``levels`` are 1-based original level indices (strictly increasing),
    ``dims[t]`` the dimension at ``levels[t]`` and ``alphas/betas`` the maps
    between consecutive listed levels.  ``tau[t]``, when present, is the
    eigenvalue of the edge composition on the fragment at ``levels[t]``.
    """

    levels: tuple[int, ...]
    dims: tuple[int, ...]
    alphas: list[np.ndarray]
    betas: list[np.ndarray]
    tau: np.ndarray | None = None

    def __post_init__(self):
        self.levels = tuple(int(x) for x in self.levels)
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.levels) != len(self.dims):
            raise ShapeError("levels/dims length mismatch")
        if any(self.levels[t] >= self.levels[t + 1]
               for t in range(len(self.levels) - 1)):
            raise ShapeError("levels must be strictly increasing")
        if len(self.alphas) != max(len(self.dims) - 1, 0):
            raise ShapeError("need one alpha per consecutive level pair")
        self.alphas = [np.asarray(a, dtype=complex) for a in self.alphas]
        self.betas = [np.asarray(b, dtype=complex) for b in self.betas]
        for t in range(len(self.dims) - 1):
            if self.alphas[t].shape != (self.dims[t + 1], self.dims[t]):
                raise ShapeError(f"fragment alpha[{t}] shape mismatch")
            if self.betas[t].shape != (self.dims[t], self.dims[t + 1]):
                raise ShapeError(f"fragment beta[{t}] shape mismatch")
        if self.tau is not None:
            self.tau = np.asarray(self.tau, dtype=complex)
            if self.tau.shape != (len(self.levels),):
                raise ShapeError("tau must have one entry per level")

    def top_operator(self) -> np.ndarray:
        if len(self.dims) == 1:
            return np.zeros((self.dims[0], self.dims[0]), dtype=complex)
        return self.alphas[-1] @ self.betas[-1]

    def scale(self) -> float:
        return max([1.0] + [float(np.linalg.norm(m))
                            for m in self.alphas + self.betas])


@dataclass
class SubquiverDecomposition:
    """Eigenvalue-chain pieces plus the change of basis producing them.

    ``pieces`` maps each equivalence class (tuple of 1-based levels) to a
    Fragment covering all n levels (zero dims where the chain is absent).
    Applying ``change_of_basis`` to the original quiver block-diagonalises
    it with the pieces as blocks, to within the reported residual.
    """

    sim: EquivRelation
    pieces: list[tuple[tuple[int, ...], Fragment]]
    change_of_basis: GroupElement
    residual: float = 0.0


def _predicted_taus(mu: MomentValue, sim: EquivRelation) -> dict:
    """tau[(C, l)] = nu_l - nu_{min C}: the eigenvalue of the level-l edge
    composition on the class-C chain (nu = tail sums, nu_n = 0)."""
    n = len(mu) + 1
    out = {}
    for cls in sim.classes:
        anchor = mu.nu(min(cls))
        for l in range(1, n + 1):
            out[(cls, l)] = (mu.nu(l) if l <= n else 0.0) - anchor
    return out


def _class_dim_profile(cls, n):
    return [sum(1 for c in cls if c <= l) for l in range(1, n + 1)]


def decompose_by_eigenspaces(q: Quiver, tol: float = 1e-7) -> SubquiverDecomposition:
    """Split each level into generalised eigenspaces of the edge compositions.

    Chains are anchored by predicted eigenvalues computed from the moment
    levels (one chain per equivalence class), and eigenvalues are assigned
    to the nearest prediction.  Chains whose predictions collide at some
    level within ``10 tol`` make the decomposition ill-posed and raise.
    """
    mu, resid = moment_value(q)
    _, c_res = _complex_only(q)
    if c_res > RESIDUAL_GATE:
        raise RegularityError(
            f"complex residual {c_res:.2e} exceeds {RESIDUAL_GATE}")
    if not _regularity_holds(mu, tol):
        raise RegularityError("moment levels are not in generic position; "
                              "apply generic_rotation first")
    n = q.n
    sim = equivalence_from_levels(mu, tol)
    taus = _predicted_taus(mu, sim)
    classes = sim.classes

    # per-level invariant subspaces, assigned by nearest predicted value
    bases: dict[tuple, np.ndarray] = {}
    for l in range(1, n + 1):
        d = q.dims[l - 1]
        present = [c for c in classes if _class_dim_profile(c, n)[l - 1] > 0]
        vals = [taus[(c, l)] for c in present]
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                if abs(vals[i] - vals[j]) < 10 * tol:
                    raise DecompositionError(
                        f"chain eigenvalues at level {l} are closer than "
                        f"10*tol: {vals[i]:.3g} vs {vals[j]:.3g}")
        if d == 0:
            for c in present:
                bases[(c, l)] = np.zeros((0, 0), dtype=complex)
            continue
        a_op = (q.alphas[l - 2] @ q.betas[l - 2] if l >= 2
                else np.zeros((d, d), dtype=complex))
        eigs = np.linalg.eigvals(a_op)
        assign = [int(np.argmin([abs(e - v) for v in vals])) for e in eigs]
        counts = [assign.count(i) for i in range(len(present))]
        expected = [_class_dim_profile(c, n)[l - 1] for c in present]
        if counts != expected:
            raise DecompositionError(
                f"eigenvalue multiplicities at level {l} are {counts}, "
                f"predicted {expected}; the configuration does not lie on "
                "a stratum at this tolerance")
        for which, c in enumerate(present):
            if counts[which] == d:
                bases[(c, l)] = np.eye(d, dtype=complex)
                continue
            t, z, sdim = scipy.linalg.schur(
                a_op, output="complex",
                sort=_nearest(vals, which))
            if sdim != counts[which]:
                raise DecompositionError(
                    f"could not isolate the chain at level {l}")
            # invariant subspace -> spectral (oblique) basis so the
            # complementary chains do not leak into this block
            m = sdim
            t11, t12, t22 = t[:m, :m], t[:m, m:], t[m:, m:]
            y = scipy.linalg.solve_sylvester(t11, -t22, t12)
            # columns of Z [[I],[0]] span the subspace; the oblique
            # projector is Z [[I, Y],[0,0]] Z*; its range basis is the same
            # but we need the orthogonal complement split below, so keep
            # the plain Schur basis here.
            bases[(c, l)] = z[:, :m]

    # assemble the change of basis level by level
    factors = []
    top = None
    order = list(classes)  # canonical: classes by minimal element
    for l in range(1, n + 1):
        cols = [bases[(c, l)] for c in order if bases.get((c, l)) is not None
                and bases[(c, l)].shape[1] > 0]
        d = q.dims[l - 1]
        p = (np.hstack(cols) if cols else np.zeros((d, 0), dtype=complex))
        if p.shape != (d, d):
            raise DecompositionError(f"basis at level {l} is not square")
        if d and np.linalg.cond(p) > 1e8:
            raise DecompositionError(f"basis at level {l} is ill-conditioned")
        g = np.linalg.inv(p) if d else p
        if l < n:
            factors.append(g)
        else:
            top = g
    witness = GroupElement(factors, top)
    q_block = apply_group(q, witness)

    # slice out the blocks and measure the off-block residual
    offsets = {}
    for l in range(1, n + 1):
        off = 0
        for c in order:
            w = bases[(c, l)].shape[1] if (c, l) in bases else 0
            offsets[(c, l)] = (off, off + w)
            off += w
    residual = 0.0
    pieces = []
    scale = max(1.0, max(float(np.linalg.norm(m))
                         for m in q_block.alphas + q_block.betas))
    for c in order:
        dims = [offsets[(c, l)][1] - offsets[(c, l)][0] for l in range(1, n + 1)]
        alphas, betas = [], []
        for e in range(n - 1):
            lo = offsets[(c, e + 1)]
            hi = offsets[(c, e + 2)]
            alphas.append(q_block.alphas[e][hi[0]:hi[1], lo[0]:lo[1]].copy())
            betas.append(q_block.betas[e][lo[0]:lo[1], hi[0]:hi[1]].copy())
            # leakage out of the block
            amask = q_block.alphas[e][:, lo[0]:lo[1]].copy()
            amask[hi[0]:hi[1], :] = 0
            bmask = q_block.betas[e][:, hi[0]:hi[1]].copy()
            bmask[lo[0]:lo[1], :] = 0
            residual = max(residual,
                           float(np.linalg.norm(amask)),
                           float(np.linalg.norm(bmask)))
        frag = Fragment(levels=tuple(range(1, n + 1)), dims=tuple(dims),
                        alphas=alphas, betas=betas,
                        tau=np.array([taus[(c, l)] for l in range(1, n + 1)]))
        pieces.append((c, frag))
    if residual > 10 * tol * scale:
        raise DecompositionError(
            f"off-block residual {residual:.2e} exceeds 10*tol*scale")
    return SubquiverDecomposition(sim=sim, pieces=pieces,
                                  change_of_basis=witness, residual=residual)


def _nearest(values, which):
    def pred(lam):
        return int(np.argmin([abs(lam - v) for v in values])) == which
    return pred


def _complex_only(q: Quiver):
    from .quiver import complex_moment_residual
    return complex_moment_residual(q)


# ---------------------------------------------------------------------------
# contraction


def contract(piece: Fragment, mu: MomentValue, tol: float = 1e-7) -> Fragment:
    """Compose away the designated isomorphism edges of a chain piece.

    Levels where the chain eigenvalue is nonzero carry isomorphisms; they
    are removed by ``alpha -> alpha_up alpha_iso`` and ``beta ->
    alpha_iso^{-1} beta_up``.  Top levels above the last vanishing
    eigenvalue are dropped (they are pure identifications).  The result is
    supported on the levels with vanishing eigenvalue; its remaining
    complex equations hold with all accumulated levels zero, which is
    verified to ``10 tol``.
    """
    if piece.tau is None:
        raise ShapeError("piece must carry its eigenvalue trace")
    scale = piece.scale()
    zero_tau = [abs(piece.tau[t]) <= 10 * tol * max(1.0, scale)
                for t in range(len(piece.levels))]
    levels = list(piece.levels)
    dims = list(piece.dims)
    alphas = [a.copy() for a in piece.alphas]
    betas = [b.copy() for b in piece.betas]
    taus = list(piece.tau)

    # trim empty bottom levels
    while dims and dims[0] == 0:
        levels.pop(0), dims.pop(0), taus.pop(0), zero_tau.pop(0)
        if alphas:
            alphas.pop(0), betas.pop(0)

    # drop non-member top levels (pure iso identifications)
    while len(dims) >= 2 and not zero_tau[-1]:
        a_top = alphas[-1]
        if dims[-1] != dims[-2] or _min_sv(a_top) <= tol * max(1.0, scale):
            raise RankError("designated top contraction edge is not an "
                            "isomorphism")
        levels.pop(), dims.pop(), taus.pop(), zero_tau.pop()
        alphas.pop(), betas.pop()

    # contract interior iso levels, highest first
    while True:
        interior = [t for t in range(1, len(dims) - 1) if not zero_tau[t]]
        if not interior:
            break
        t = interior[-1]
        a_lo, b_lo = alphas[t - 1], betas[t - 1]
        a_hi, b_hi = alphas[t], betas[t]
        if dims[t] != dims[t - 1] or _min_sv(a_lo) <= tol * max(1.0, scale):
            raise RankError(f"designated contraction edge into level "
                            f"{levels[t]} is not an isomorphism")
        alphas[t - 1] = a_hi @ a_lo
        betas[t - 1] = np.linalg.solve(a_lo, b_hi)
        del alphas[t], betas[t]
        del levels[t], dims[t], taus[t], zero_tau[t]

    out = Fragment(levels=tuple(levels), dims=tuple(dims),
                   alphas=alphas, betas=betas,
                   tau=np.array(taus, dtype=complex))
    # all remaining accumulated levels vanish: check the complex blocks
    for t in range(len(dims) - 1):
        d = dims[t]
        if d == 0:
            continue
        below = (out.alphas[t - 1] @ out.betas[t - 1] if t >= 1
                 else np.zeros((d, d), dtype=complex))
        dblock = below - out.betas[t] @ out.alphas[t]
        if np.linalg.norm(dblock) > 10 * tol * max(1.0, out.scale() ** 2):
            raise DecompositionError(
                f"contracted equations fail at level {out.levels[t]}: "
                f"|D| = {np.linalg.norm(dblock):.2e}")
    return out


def _min_sv(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# star/zero splitting


def split_closed_orbit_quiver(piece: Fragment, tol: float = 1e-7):
    """Split a contracted piece into star and zero summands.

    The star subspace at each level is the image of the downward beta
    compositions from the top; the zero subspace is the kernel of the
    outgoing alpha.  For a configuration with closed orbit these are
    complementary, the star part has injective alphas and surjective betas,
    and the zero part carries no maps; each claim is checked to ``10 tol``
    and a failure raises RankError (the split does not exist).

    Returns ``(star, zero)`` as Fragments on the same levels.
    """
    s = len(piece.dims)
    scale = max(1.0, piece.scale())
    if s == 0:
        empty = Fragment((), (), [], [])
        return empty, empty
    u_bases = [None] * s
    u_bases[s - 1] = np.eye(piece.dims[-1], dtype=complex)
    comp = np.eye(piece.dims[-1], dtype=complex)
    for t in range(s - 2, -1, -1):
        comp = piece.betas[t] @ comp
        u_bases[t] = range_basis(comp, tol)
    z_bases = []
    for t in range(s - 1):
        z_bases.append(kernel_basis(piece.alphas[t], tol))
    z_bases.append(np.zeros((piece.dims[-1], 0), dtype=complex))

    star_dims, zero_dims, ps = [], [], []
    for t in range(s):
        u, z = u_bases[t], z_bases[t]
        if u.shape[1] + z.shape[1] != piece.dims[t]:
            raise RankError(
                f"star/zero dimensions {u.shape[1]}+{z.shape[1]} do not fill "
                f"level {piece.levels[t]} (dim {piece.dims[t]}); orbit is "
                "not closed at this tolerance")
        p = np.hstack([u, z]) if piece.dims[t] else np.zeros((0, 0), complex)
        if piece.dims[t] and np.linalg.cond(p) > 1e8:
            raise RankError("star/zero split is ill-conditioned")
        star_dims.append(u.shape[1])
        zero_dims.append(z.shape[1])
        ps.append(p)

    def _inv(p):
        return np.linalg.inv(p) if p.shape[0] else p

    star_a, star_b, zero_a, zero_b = [], [], [], []
    worst = 0.0
    for t in range(s - 1):
        a_new = _inv(ps[t + 1]) @ piece.alphas[t] @ ps[t]
        b_new = _inv(ps[t]) @ piece.betas[t] @ ps[t + 1]
        v_lo, v_hi = star_dims[t], star_dims[t + 1]
        star_a.append(a_new[:v_hi, :v_lo].copy())
        star_b.append(b_new[:v_lo, :v_hi].copy())
        zero_a.append(np.zeros((zero_dims[t + 1], zero_dims[t]), complex))
        zero_b.append(np.zeros((zero_dims[t], zero_dims[t + 1]), complex))
        off = max(float(np.linalg.norm(a_new[v_hi:, :v_lo])),
                  float(np.linalg.norm(a_new[:, v_lo:])),
                  float(np.linalg.norm(b_new[v_lo:, :])),
                  float(np.linalg.norm(b_new[:v_lo, v_hi:])))
        worst = max(worst, off)
    if worst > 10 * tol * scale:
        raise RankError(f"zero-part leakage {worst:.2e} exceeds 10*tol*scale; "
                        "orbit is not closed at this tolerance")
    star = Fragment(piece.levels, tuple(star_dims), star_a, star_b)
    zero = Fragment(piece.levels, tuple(zero_dims), zero_a, zero_b)
    # star quality: injective alphas, surjective betas
    for t in range(s - 1):
        if star_dims[t] == 0:
            continue
        if (_min_sv(star.alphas[t]) <= tol * scale
                or _min_sv(star.betas[t]) <= tol * scale):
            raise RankError("star part is not injective/surjective at "
                            f"level {piece.levels[t]}")
    return star, zero


# ---------------------------------------------------------------------------
# labels


@dataclass(frozen=True)
class StratumLabel:
    """Full stratum data: the level equivalence relation, one nilpotent
    partition per class, and the equivalent interval bookkeeping."""

    sim: EquivRelation
    orbit: tuple[tuple[int, ...], ...]          # one partition per class
    pairs: tuple[tuple[int, int], ...]          # S, sorted by upper endpoint
    delta: tuple[int, ...]
    m_dims: tuple[int, ...]                     # m_0 .. m_n
    ell: int

    def __post_init__(self):
        if len(self.orbit) != len(self.sim.classes):
            raise ShapeError("need one partition per class")
        for c, p in zip(self.sim.classes, self.orbit):
            if sum(p) != len(c):
                raise ShapeError(f"partition {p} does not sum to |{c}|")


def label_from_sim_orbits(sim: EquivRelation, orbits) -> StratumLabel:
    """Assemble the interval data implied by (sim, per-class partitions).

    For class {c_1 < ... < c_s} with partition p the star dimensions are
    ``v_t = sum_b max(0, p_b - (s - t))`` (the rank sequence of the
    nilpotent), the zero-part dimensions ``z_t = t - v_t``, and each step
    with ``z_t > 0`` contributes the interval ``(c_t, c_{t+1})`` with
    multiplicity ``z_t``.
    """
    n = sim.n
    orbits = tuple(tuple(sorted((int(x) for x in p), reverse=True))
                   for p in orbits)
    chains = []
    for cls, p in zip(sim.classes, orbits):
        s = len(cls)
        if sum(p) != s:
            raise ShapeError(f"partition {p} does not sum to {s}")
        for t in range(1, s):
            v_t = sum(max(0, b - (s - t)) for b in p)
            z_t = t - v_t
            if z_t < 0:
                raise ShapeError(f"partition {p} has an invalid rank sequence")
            if z_t > 0:
                chains.append((cls[t - 1], cls[t], z_t))
    chains.sort(key=lambda c: c[1])
    pairs = tuple((i, j) for i, j, _ in chains)
    delta = tuple(d for _, _, d in chains)
    m = []
    for k in range(n + 1):
        cover = sum(d for (i, j, d) in chains if i <= k < j)
        m.append(k - cover)
    if m[0] != 0 or m[-1] != n or any(m[k] > m[k + 1] for k in range(n)):
        raise ShapeError(f"invalid flag {m} from chain data {chains}")
    ell = sum(j - i - 1 for (i, j, _) in chains)
    return StratumLabel(sim=sim, orbit=orbits, pairs=pairs, delta=delta,
                        m_dims=tuple(m), ell=ell)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _int_partitions(s):
    def gen(s, maxpart):
        if s == 0:
            yield ()
            return
        for first in range(min(s, maxpart), 0, -1):
            for rest in gen(s - first, first):
                yield (first,) + rest
    return list(gen(s, s))


def enumerate_labels(n: int) -> list[StratumLabel]:
    """All stratum labels at rank n: equivalence relations on {1..n} paired
    with one nilpotent partition per class."""
    labels = []
    for part in _set_partitions(list(range(1, n + 1))):
        sim = EquivRelation(tuple(tuple(sorted(c)) for c in part))
        choices = [_int_partitions(len(c)) for c in sim.classes]

        def rec(i, acc):
            if i == len(choices):
                labels.append(label_from_sim_orbits(sim, tuple(acc)))
                return
            for p in choices[i]:
                rec(i + 1, acc + [p])
        rec(0, [])
    # deterministic order
    labels.sort(key=lambda L: (L.sim.classes, L.orbit))
    return labels


def label_to_json(label: StratumLabel) -> dict:
    return {
        "sim": [list(c) for c in label.sim.classes],
        "orbit": [list(p) for p in label.orbit],
        "S": [list(p) for p in label.pairs],
        "delta": list(label.delta),
        "m": list(label.m_dims),
        "ell": label.ell,
    }


def label_from_json(obj) -> StratumLabel:
    if isinstance(obj, str):
        obj = json.loads(obj)
    sim = EquivRelation(tuple(tuple(int(x) for x in c) for c in obj["sim"]))
    return label_from_sim_orbits(sim, [tuple(p) for p in obj["orbit"]])


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassifyResult:
    label: StratumLabel
    rotation: UnitQuaternion
    residual: float
    level_margin: float
    eigen_margin: float
    jordan_crosscheck: bool
    messages: list[str] = field(default_factory=list)


def classify(q: Quiver, tol: float = 1e-7, seed: int = 0) -> ClassifyResult:
    """Full stratum classification of a solved full-flag configuration.

    Rejects inputs whose moment residuals exceed the 1e-8 gate.  Runs the
    rotation / equivalence / decomposition / contraction / splitting
    pipeline, reads the per-class nilpotent partition off the star
    dimensions, cross-checks it against the Jordan structure of the top
    composition, and reassembles the interval data.
    """
    if not q.is_full_flag:
        raise ShapeError("classification expects a full-flag configuration")
    mu0, resid = moment_value(q)
    if resid > RESIDUAL_GATE:
        raise RegularityError(
            f"moment residual {resid:.2e} exceeds the gate {RESIDUAL_GATE}; "
            "solve the configuration first")
    q_rot, u = generic_rotation(q, tol, seed)
    mu, _ = moment_value(q_rot)
    dec = decompose_by_eigenspaces(q_rot, tol)
    sim = dec.sim
    margin = level_margin(mu, tol)

    orbits = []
    eigen_margin = float("inf")
    crosscheck = True
    messages: list[str] = []
    zero_dims_by_class = {}
    for cls, frag in dec.pieces:
        contracted = contract(frag, mu, tol)
        star, zero = split_closed_orbit_quiver(contracted, tol)
        s = len(cls)
        if len(star.dims) != s:
            raise DecompositionError(
                f"contracted chain for class {cls} has {len(star.dims)} "
                f"levels, expected {s}")
        if zero.dims and zero.dims[-1] != 0:
            raise DecompositionError(
                f"zero part of class {cls} reaches the top level")
        v = list(star.dims)
        increments = [v[s - 1 - p] - (v[s - 2 - p] if s - 2 - p >= 0 else 0)
                      for p in range(s)]
        if any(increments[i] < increments[i + 1] for i in range(s - 1)):
            raise DecompositionError(
                f"star dimensions {v} of class {cls} are not a nilpotent "
                "rank sequence")
        partition = _conjugate(increments)
        orbits.append(partition)
        zero_dims_by_class[cls] = list(zero.dims)
        # cross-check against the power nullities of the top composition
        # (eigenvalue clouds of a perturbed nilpotent spread like eps^(1/m),
        # but power nullities stay resolvable at the working tolerance)
        x_block = frag.top_operator()
        kappa = complex(frag.tau[-1]) if frag.tau is not None else 0.0
        if x_block.shape[0]:
            jt = _partition_by_nullities(x_block, kappa, tol)
            if jt != partition:
                crosscheck = False
                messages.append(
                    f"class {cls}: rank-sequence partition {partition} "
                    f"disagrees with power-nullity partition {jt}")
    eigen_margin = _class_gap(mu, sim)

    orbits_t = tuple(orbits)
    label = label_from_sim_orbits(sim, orbits_t)
    # consistency: the zero parts must reproduce the interval data
    for cls, zdims in zero_dims_by_class.items():
        s = len(cls)
        for t in range(1, s + 1):
            v_t = sum(max(0, b - (s - t)) for b in
                      orbits_t[sim.classes.index(cls)])
            if zdims[t - 1] != t - v_t:
                raise DecompositionError(
                    f"zero part of class {cls} has dims {zdims}, "
                    "inconsistent with its star rank sequence")
    return ClassifyResult(label=label, rotation=u, residual=resid,
                          level_margin=margin, eigen_margin=eigen_margin,
                          jordan_crosscheck=crosscheck, messages=messages)


def _class_gap(mu: MomentValue, sim: EquivRelation) -> float:
    """Smallest distance between distinct class eigenvalues of the top
    composition (the assignment margin)."""
    vals = [-mu.nu(min(c)) for c in sim.classes]
    gaps = [abs(vals[i] - vals[j]) for i in range(len(vals))
            for j in range(i + 1, len(vals))]
    return float(min(gaps)) if gaps else float("inf")


def _partition_by_nullities(x_block: np.ndarray, value: complex,
                            tol: float) -> tuple[int, ...]:
    """Jordan partition of ``x_block`` at its (single) eigenvalue ``value``
    from the nullities of shifted powers."""
    from .matkernel import nullity
    m = x_block.shape[0]
    shifted = x_block - value * np.eye(m)
    increments = []
    prev = 0
    power = np.eye(m, dtype=complex)
    for _ in range(m):
        power = power @ shifted
        nk = min(nullity(power, tol), m)
        increments.append(nk - prev)
        prev = nk
        if nk == m:
            break
    if prev != m:
        increments.append(m - prev)
    increments.sort(reverse=True)
    return _conjugate(increments)


def _conjugate(parts):
    parts = [p for p in parts if p > 0]
    if not parts:
        return ()
    return tuple(sorted((sum(1 for p in parts if p >= k)
                         for k in range(1, max(parts) + 1)), reverse=True))


# ---------------------------------------------------------------------------
# spectral identities


def check_kostant_identity(q: Quiver, tol: float = 1e-7):
    """Residual of ``X (X + nu_1) ... (X + nu_{n-1}) = 0`` and the Hausdorff
    distance between spec(X0) and the closed-form kappa spectrum.

    The kappa formula describes the beta-surjective locus; away from it only
    the polynomial residual is meaningful.
    """
    mu, _ = moment_value(q)
    x, x0 = big_x(q)
    n = q.n
    poly = x.copy()
    for i in range(1, n):
        poly = poly @ (x + mu.nu(i) * np.eye(n))
    poly_residual = float(np.linalg.norm(poly))
    kappas = kappa_spectrum(mu.lambda_c, n)
    eigs = np.linalg.eigvals(x0)
    mismatch = _hausdorff(eigs, kappas)
    return poly_residual, float(mismatch)


def kappa_spectrum(lambda_c, n: int) -> np.ndarray:
    """Closed-form eigenvalues of the traceless top composition:

    ``kappa_j = (sum_{k<j} k lam_k - sum_{k>=j} (n-k) lam_k) / n``.
    """
    lam = np.asarray(lambda_c, dtype=complex)
    if lam.shape != (n - 1,):
        raise ShapeError("lambda_c must have length n-1")
    out = np.zeros(n, dtype=complex)
    for j in range(1, n + 1):
        acc = 0.0 + 0.0j
        for k in range(1, n):
            acc += k * lam[k - 1] if k < j else -(n - k) * lam[k - 1]
        out[j - 1] = acc / n
    return out


def _hausdorff(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if len(a) == 0 and len(b) == 0:
        return 0.0
    d1 = max(min(abs(x - y) for y in b) for x in a)
    d2 = max(min(abs(x - y) for y in a) for x in b)
    return max(d1, d2)


# ---------------------------------------------------------------------------
# alpha-only (symplectic) stratification


def symplectic_stratum(alphas, tol: float = 1e-9) -> tuple[int, ...]:
    """Ordered partition of n attached to an alpha-only chain.

    At each level either alpha is injective or the level splits as
    ``image + kernel``; the injective summand's dimensions, after removing
    repeats, form a strictly increasing sequence ending at n whose
    difference vector is the ordered partition.  A level that neither is
    injective nor splits raises RankError.
    """
    alphas = [np.asarray(a, dtype=complex) for a in alphas]
    r = len(alphas) + 1
    n = alphas[-1].shape[0]
    dims = [alphas[0].shape[1]] + [a.shape[0] for a in alphas]
    m = []
    m_prev = 0
    for i in range(1, r):
        a = alphas[i - 1]
        d = dims[i - 1]
        scale = max(1.0, float(np.linalg.norm(a)))
        inj = d == 0 or _min_sv(a) > tol * scale
        if inj:
            m_i = d
        else:
            prev = alphas[i - 2] if i >= 2 else np.zeros((d, 0), dtype=complex)
            im_basis = range_basis(prev, tol)
            ker = kernel_basis(a, tol)
            if im_basis.shape[1] + ker.shape[1] != d:
                raise RankError(
                    f"level {i}: image ({im_basis.shape[1]}) + kernel "
                    f"({ker.shape[1]}) do not fill dimension {d}")
            joint = np.hstack([im_basis, ker])
            if d and np.linalg.cond(joint) > 1e8:
                raise RankError(f"level {i}: image and kernel do not split "
                                "the space")
            m_i = im_basis.shape[1]
            if m_i != m_prev:
                raise RankError(f"level {i}: image dimension {m_i} breaks "
                                f"the chain (expected {m_prev})")
        m.append(m_i)
        m_prev = m_i
    m.append(n)
    seq = []
    for v in m:
        if v > 0 and (not seq or v > seq[-1]):
            seq.append(v)
    parts = [seq[0]] + [seq[t + 1] - seq[t] for t in range(len(seq) - 1)]
    return tuple(parts)

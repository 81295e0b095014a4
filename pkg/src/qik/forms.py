"""Standard forms for solved configurations.

Three normal forms, each produced together with the group element (witness)
realising it:

* *beta standard form*: every downward map becomes ``(0 | I)`` exactly, by
  a bottom-up choice of adapted bases;
* *Jordan form*: the top composition is put into exact Jordan canonical
  form, classes ordered by minimal element and blocks by size; each block's
  edges are normalised to the rigid patterns ``alpha in {I, [I;0]}`` and
  ``beta in {J(tau), [0|I]}``, and the all-zero summands to scalar blocks;
* *diagonal image*: dropping the superdiagonal entries of the betas of a
  Jordan-form configuration yields a configuration built from diagonal
  scalar blocks with the same diagonal data (the complex levels are
  untouched because the diagonal of every composition is preserved).

Entries in mandated zero positions are snapped to exact zeros after the
numerical change of basis; the largest snapped magnitude is reported and
oversize snaps raise FormError.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import FormError, RankError, RegularityError, ShapeError
from .matkernel import jordan_basis_single_eigenvalue, kernel_basis, rank
from .quiver import (GroupElement, MomentValue, Quiver, apply_group, big_x,
                     complex_moment_residual, moment_value)
from .strata import (Fragment, StratumLabel, _regularity_holds,
                     decompose_by_eigenspaces, label_from_sim_orbits)

__all__ = [
    "StandardizedQuiver",
    "standardize_beta",
    "alpha_from_x",
    "to_jcf",
    "to_diagonal",
    "jcf_layout",
    "xi_from_diagonal",
    "find_torus_transition",
]

RESIDUAL_GATE = 1e-8


@dataclass
class StandardizedQuiver:
    """A configuration in one of the standard forms, with its witness.

    ``apply_group(original, witness)`` reproduces ``quiver`` up to
    ``reproduction_error`` (the largest entry snapped to an exact zero or
    pattern value).
    """

    quiver: Quiver
    witness: GroupElement
    form: str                      # betaStd | jcf | diagonal
    reproduction_error: float = 0.0
    label: StratumLabel | None = None

    def __post_init__(self):
        if self.form not in ("betaStd", "jcf", "diagonal"):
            raise ShapeError(f"unknown form {self.form!r}")


def _snap_tol(tol: float, scale: float) -> float:
    # the documented floor is 1e-9; solver noise scales with tol
    return max(1e-9, 10 * tol * max(1.0, scale))


# ---------------------------------------------------------------------------
# beta standardisation


def standardize_beta(q: Quiver, tol: float = 1e-9) -> StandardizedQuiver:
    """Bring every beta to ``(0 | I)`` exactly.

    Requires all betas surjective and the complex equations to hold.  Bases
    are chosen bottom-up: the first ``k`` vectors at each level span the
    kernel of the downward map and the rest are preimages of the level
    below, which makes the matrix of beta exactly ``(0 | I)``.  The witness
    has arbitrary invertible inner factors and a determinant-one top factor.
    The complex levels are untouched.
    """
    _, c_res = complex_moment_residual(q)
    if c_res > RESIDUAL_GATE:
        raise RegularityError(f"complex residual {c_res:.2e} too large")
    n = q.n
    for e in range(n - 1):
        if rank(q.betas[e], tol) < q.dims[e]:
            raise RankError(f"beta at edge {e + 1} is not surjective")

    ps: list[np.ndarray] = [np.eye(q.dims[0], dtype=complex)]
    for l in range(2, n + 1):
        b = q.betas[l - 2]                      # V_l -> V_{l-1}
        ker = kernel_basis(b, tol)
        if ker.shape[1] != q.dims[l - 1] - q.dims[l - 2]:
            raise RankError(f"kernel of beta into level {l - 1} has "
                            "unexpected dimension")
        pre, *_ = np.linalg.lstsq(b, ps[-1], rcond=None)
        p = np.hstack([ker, pre])
        if np.linalg.cond(p) > 1e10:
            raise RankError(f"adapted basis at level {l} is ill-conditioned")
        ps.append(p)

    factors = [np.linalg.inv(p) for p in ps[:-1]]
    top = np.linalg.inv(ps[-1])
    # uniform rescaling of every factor leaves the transformed maps
    # untouched, so it can be used to make the top factor determinant one
    s = np.linalg.det(top) ** (1.0 / n)
    factors = [f / s for f in factors]
    top = top / s
    witness = GroupElement(factors, top)
    q_std = apply_group(q, witness)

    snap = 0.0
    betas = []
    for e in range(n - 1):
        m_lo, m_hi = q.dims[e], q.dims[e + 1]
        pattern = np.hstack([np.zeros((m_lo, m_hi - m_lo), dtype=complex),
                             np.eye(m_lo, dtype=complex)])
        dev = float(np.abs(q_std.betas[e] - pattern).max()) if m_lo else 0.0
        if dev > _snap_tol(tol, _scale(q_std)):
            raise FormError(f"beta at edge {e + 1} failed to standardise "
                            f"(deviation {dev:.2e})")
        snap = max(snap, dev)
        betas.append(pattern)
    out = Quiver(q.dims, [a.copy() for a in q_std.alphas], betas)
    return StandardizedQuiver(quiver=out, witness=witness, form="betaStd",
                              reproduction_error=snap)


def _scale(q: Quiver) -> float:
    return max([1.0] + [float(np.linalg.norm(m)) for m in q.alphas + q.betas])


def beta_standard_diagonal_pattern(mu: MomentValue, dims) -> np.ndarray:
    """Expected diagonal of the top composition in beta standard form:
    ``k_i`` copies of ``-(lam_{n-1} + ... + lam_{i+1})``, blocks from the
    top down (k_i = m_{i+1} - m_i, k_0 = m_1)."""
    n = len(dims)
    lam = mu.lambda_c
    out = []
    for i in range(n - 1, -1, -1):
        k_i = dims[i] - (dims[i - 1] if i >= 1 else 0)
        val = -np.sum(lam[i:n - 1]) if i < n - 1 else 0.0
        out.extend([val] * k_i)
    return np.asarray(out, dtype=complex)


# ---------------------------------------------------------------------------
# reconstruction of the maps from the top composition


def alpha_from_x(x0: np.ndarray, m_dims, lambda_c=None,
                 tol: float = 1e-9) -> Quiver:
    """Rebuild the full configuration from a traceless top composition.

    ``m_dims`` is the flag ``(m_0, ..., m_n)``; ``x0`` must be block upper
    triangular with scalar diagonal blocks in the flag blocking (blocks of
    size ``k_i = m_{i+1} - m_i``, top-down), and each reconstructed alpha
    must reach rank ``m_i``.  With betas in standard form the alphas are

        ``alpha_i = X_i + nu_{i+1} (0; I)``

    where ``X_i`` is the bottom-right ``m_{i+1} x m_i`` block and
    ``nu_{i+1} = -tr(X_ii)/k_i`` is read off the matching diagonal block
    (or from ``lambda_c`` where ``k_i = 0`` leaves it undetermined).
    The result satisfies the complex equations to 1e-10.
    """
    x0 = np.asarray(x0, dtype=complex)
    m = tuple(int(v) for v in m_dims)
    n = x0.shape[0]
    if x0.shape != (n, n):
        raise ShapeError("x0 must be square")
    if len(m) != n + 1 or m[0] != 0 or m[-1] != n or any(
            m[i] > m[i + 1] for i in range(n)):
        raise ShapeError(f"invalid flag {m}")
    scale = max(1.0, float(np.linalg.norm(x0)))
    if abs(np.trace(x0)) > 1e-9 * scale * n:
        raise ShapeError("x0 must be traceless")

    # flag blocking: block i (i = n-1 .. 0) occupies rows n-m[i+1] .. n-m[i]
    def block_range(i):
        return n - m[i + 1], n - m[i]

    snapped = x0.copy()
    stol = _snap_tol(tol, scale)
    nus = {}
    for i in range(n - 1, -1, -1):
        r0, r1 = block_range(i)
        k_i = r1 - r0
        if k_i == 0:
            continue
        block = snapped[r0:r1, r0:r1]
        mean = np.trace(block) / k_i
        if np.linalg.norm(block - mean * np.eye(k_i)) > stol:
            raise FormError(f"diagonal block {i} is not scalar")
        snapped[r0:r1, r0:r1] = mean * np.eye(k_i)
        nus[i + 1] = -mean
        # strictly lower blocks must vanish
        if np.abs(snapped[r1:, r0:r1]).max(initial=0.0) > stol:
            raise FormError(f"x0 has entries below the flag block {i}")
        snapped[r1:, r0:r1] = 0.0

    lam_given = (np.asarray(lambda_c, dtype=complex)
                 if lambda_c is not None else None)
    # fill nus at empty blocks by the level recursion nu_i = lam_i + nu_{i+1}
    for i in range(n - 1, 0, -1):
        if i + 1 in nus:
            continue
        if lam_given is None:
            raise ShapeError(f"flag block {i} is empty (k_i = 0); "
                             "lambda_c is required to fix the level there")
        if i + 2 not in nus and i + 1 <= n:
            # nu_{n+1} is 0 by convention; recursion runs from the top
            pass
        upper = nus.get(i + 2, 0.0 if i + 1 == n else None)
        if upper is None:
            raise ShapeError("cannot propagate levels through empty blocks")
        nus[i + 1] = lam_given[i] + upper

    alphas, betas = [], []
    for i in range(1, n):
        m_lo, m_hi = m[i], m[i + 1]
        k_i = m_hi - m_lo
        x_i = snapped[n - m_hi:, n - m_lo:]
        pad = np.vstack([np.zeros((k_i, m_lo), dtype=complex),
                         np.eye(m_lo, dtype=complex)])
        alpha = x_i + nus[i + 1] * pad
        if rank(alpha, tol) < m_lo:
            raise RankError(f"reconstructed alpha at edge {i} has rank "
                            f"below {m_lo}; x0 lies outside the open set")
        alphas.append(alpha)
        betas.append(np.hstack([np.zeros((m_lo, k_i), dtype=complex),
                                np.eye(m_lo, dtype=complex)]))
    out = Quiver(m[1:], alphas, betas)
    lam, res = complex_moment_residual(out)
    if res > 1e-10 * scale ** 2:
        raise FormError(f"reconstruction violates the complex equations "
                        f"({res:.2e})")
    if lam_given is not None:
        drift = np.abs(lam - lam_given).max() if n > 1 else 0.0
        if drift > 1e-8 * scale:
            raise FormError(f"reconstructed levels differ from lambda_c "
                            f"by {drift:.2e}")
    return out


# ---------------------------------------------------------------------------
# Jordan standard form


@dataclass
class _ClassPlan:
    cls: tuple[int, ...]
    block_sizes: tuple[int, ...]
    runs: list[tuple[int, int, int]]     # (start, stop, dim) in original levels
    kappa: complex


def jcf_layout(label: StratumLabel):
    """Widths of the per-level blocks of the Jordan standard form.

    Returns ``layout[l]`` (l = 1..n, 1-based key) as a list of
    ``(class_index, kind, block_index, width)`` with kind ``"jordan"`` or
    ``"chain"``; Jordan blocks come first (by decreasing size), then the
    chain run covering the level, class by class.
    """
    n = label.sim.n
    layout = {l: [] for l in range(1, n + 1)}
    for ci, (cls, part) in enumerate(zip(label.sim.classes, label.orbit)):
        s = len(cls)
        for l in range(1, n + 1):
            for bi, size in enumerate(part):
                span = cls[s - size:]
                w = sum(1 for c in span if c <= l)
                if w:
                    layout[l].append((ci, "jordan", bi, w))
            for ri, (i, j, d) in enumerate(
                    [(i, j, d) for (i, j), d in
                     zip(label.pairs, label.delta) if i in cls]):
                if i <= l < j:
                    layout[l].append((ci, "chain", ri, d))
    return layout


def to_jcf(q: Quiver, tol: float = 1e-7) -> StandardizedQuiver:
    """Jordan standard form of a solved configuration.

    The moment levels must already be in generic position (apply
    ``strata.generic_rotation`` first; this operation cannot absorb a
    rotation into its witness).  The output has the top composition in
    exact Jordan canonical form -- classes ordered by minimal element,
    blocks by weakly decreasing size -- with each block's edges in the
    rigid patterns (alpha an identity column block, beta a shifted identity
    or a single Jordan block) and each zero summand a scalar block.
    """
    mu, resid = moment_value(q)
    if resid > RESIDUAL_GATE:
        raise RegularityError(f"moment residual {resid:.2e} exceeds the gate")
    if not _regularity_holds(mu, tol):
        raise RegularityError("levels not generic; rotate first")
    n = q.n
    dec = decompose_by_eigenspaces(q, tol)
    sim = dec.sim
    scale = _scale(q)
    stol = _snap_tol(tol, scale)

    plans: list[_ClassPlan] = []
    class_bases: list[list[np.ndarray]] = []   # per class, per level
    for cls, frag in dec.pieces:
        plan, bases = _standardize_class_piece(cls, frag, tol)
        plans.append(plan)
        class_bases.append(bases)

    label = label_from_sim_orbits(
        sim, tuple(p.block_sizes for p in plans))

    # per-level change of basis: block diagonal over the decomposition
    # blocks (one block per class, in class order)
    factors = []
    top = None
    for l in range(1, n + 1):
        blocks = [class_bases[ci][l - 1] for ci in range(len(plans))]
        p = scipy.linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))
        p = np.asarray(p, dtype=complex)
        d = q.dims[l - 1]
        if p.shape != (d, d):
            raise FormError(f"Jordan bases at level {l} do not fill the space")
        g = np.linalg.inv(p) if d else p
        if l < n:
            factors.append(g)
        else:
            top = g
    inner = GroupElement(factors, top)

    # compose with the decomposition witness: apply_group(q, total) equals
    # apply_group(apply_group(q, dec.witness), inner)
    w0 = dec.change_of_basis
    total_factors = [fi @ f0 for fi, f0 in zip(inner.factors, w0.factors)]
    total_top = inner.top @ w0.top
    # uniform rescaling leaves the maps unchanged; use it for det(top) = 1
    s = np.linalg.det(total_top) ** (1.0 / n)
    total = GroupElement([f / s for f in total_factors], total_top / s)

    q_new = apply_group(q, total)
    q_snapped, snap = _snap_to_jcf_patterns(q_new, label, mu, stol)
    return StandardizedQuiver(quiver=q_snapped, witness=total, form="jcf",
                              reproduction_error=snap, label=label)


def _standardize_class_piece(cls, frag: Fragment, tol: float):
    """Canonical bases of one chain piece: Jordan blocks of the star part
    plus scalar chain runs; returns the plan and per-level basis columns
    (in the piece's own coordinates)."""
    n = len(frag.levels)
    s = len(cls)
    scale = max(1.0, frag.scale())
    kappa = complex(frag.tau[-1])

    # chain runs: kernels of the upward alpha compositions
    comp_up = [None] * n           # alpha composition level l -> top
    comp_up[n - 1] = np.eye(frag.dims[-1], dtype=complex)
    for l in range(n - 2, -1, -1):
        comp_up[l] = comp_up[l + 1] @ frag.alphas[l]
    z_dim = [kernel_basis(comp_up[l], tol).shape[1] if frag.dims[l] else 0
             for l in range(n)]

    # star top: Jordan basis at the class eigenvalue
    top_op = frag.top_operator()
    basis_top, sizes = jordan_basis_single_eigenvalue(
        top_op, kappa, max(tol, 1e-9 * scale ** 2))
    # block boundaries at the top
    members = set(cls)
    # propagate block bases downwards
    per_level: list[list[np.ndarray] | None] = [None] * n
    blocks = [basis_top[:, sum(sizes[:b]):sum(sizes[:b + 1])]
              for b in range(len(sizes))]
    per_level[n - 1] = blocks
    for l in range(n - 1, 0, -1):
        # propagate from 1-based level l+1 down to level l across the edge
        # alphas[l-1]; the edge is a crossing iff the upper level is a member
        lower_blocks = []
        crossing = (l + 1) in members
        al = frag.alphas[l - 1]
        be = frag.betas[l - 1]
        for blk in per_level[l]:
            m_b = blk.shape[1]
            if m_b == 0:
                lower_blocks.append(np.zeros((frag.dims[l - 1], 0), complex))
                continue
            if crossing:
                head = be @ blk[:, :1]
                if np.linalg.norm(head) > 10 * tol * scale:
                    raise FormError(
                        f"chain head at level {l} does not die "
                        f"({np.linalg.norm(head):.2e})")
                lower_blocks.append(be @ blk[:, 1:])
            else:
                sol, *_ = np.linalg.lstsq(al, blk, rcond=None)
                if np.linalg.norm(al @ sol - blk) > 10 * tol * scale:
                    raise FormError(f"iso edge into level {l + 1} is not "
                                    "invertible on the block")
                lower_blocks.append(sol)
        per_level[l - 1] = lower_blocks

    # chain runs: consecutive-member intervals with positive kernel width
    runs = []
    covered = [0] * n
    for t in range(s - 1):
        lo, hi = cls[t], cls[t + 1]
        width = z_dim[lo - 1]
        if width:
            runs.append((lo, hi, width))
            for l in range(lo, hi):
                covered[l - 1] += width
    for l in range(n):
        if z_dim[l] != covered[l]:
            raise FormError(
                f"zero-part width {z_dim[l]} at level {l + 1} does not "
                "match consecutive-member runs")

    # chain bases: kernel at the top of each run, propagated down by
    # preimages (alpha is invertible on the run interior)
    run_bases: dict[tuple[int, int], np.ndarray] = {}
    for (lo, hi, width) in runs:
        zb = kernel_basis(comp_up[hi - 2], tol)
        if zb.shape[1] != width:
            raise FormError("run kernel width changed unexpectedly")
        level_vecs = {hi - 1: zb}       # keyed by 1-based level
        for l in range(hi - 1, lo, -1):
            al = frag.alphas[l - 2]     # edge (l-1) -> l
            sol, *_ = np.linalg.lstsq(al, level_vecs[l], rcond=None)
            if np.linalg.norm(al @ sol - level_vecs[l]) > 10 * tol * scale:
                raise FormError(f"chain run {lo, hi} is not invertible at "
                                f"level {l}")
            level_vecs[l - 1] = sol
        for l, v in level_vecs.items():
            run_bases[(lo, l)] = v

    bases = []
    for l in range(1, n + 1):
        cols = [b for b in per_level[l - 1] if b.shape[1] > 0]
        for (lo, hi, width) in runs:
            if lo <= l < hi:
                cols.append(run_bases[(lo, l)])
        d = frag.dims[l - 1]
        p = np.hstack(cols) if cols else np.zeros((d, 0), dtype=complex)
        if p.shape != (d, d):
            raise FormError(f"class {cls}: bases at level {l} have "
                            f"width {p.shape[1]}, dimension is {d}")
        bases.append(p)
    plan = _ClassPlan(cls=cls, block_sizes=tuple(sizes), runs=runs,
                      kappa=kappa)
    return plan, bases


def _snap_to_jcf_patterns(q: Quiver, label: StratumLabel, mu: MomentValue,
                          stol: float):
    """Replace the transformed maps by their exact patterns, verifying the
    deviation stays below the snap tolerance."""
    layout = jcf_layout(label)
    n = q.n
    taus = _tau_table(label, mu)
    worst = 0.0
    alphas, betas = [], []
    for e in range(n - 1):
        lo, hi = e + 1, e + 2
        a_pat = np.zeros_like(q.alphas[e])
        b_pat = np.zeros_like(q.betas[e])
        off_lo = 0
        off_hi_map = {}
        off = 0
        for (ci, kind, bi, w) in layout[hi]:
            off_hi_map[(ci, kind, bi)] = (off, w)
            off += w
        for (ci, kind, bi, w_lo) in layout[lo]:
            key = (ci, kind, bi)
            if key in off_hi_map:
                o_hi, w_hi = off_hi_map[key]
                if kind == "jordan":
                    tau_hi = taus[(ci, hi)]
                    if w_hi == w_lo + 1:
                        # crossing: the chain head occupies the first slot
                        # upstairs; alpha = [I; 0], beta = [0 | I]
                        a_pat[o_hi:o_hi + w_lo,
                              off_lo:off_lo + w_lo] = np.eye(w_lo)
                        b_pat[off_lo:off_lo + w_lo,
                              o_hi + 1:o_hi + 1 + w_lo] = np.eye(w_lo)
                    elif w_hi == w_lo:
                        a_pat[o_hi:o_hi + w_hi,
                              off_lo:off_lo + w_lo] = np.eye(w_lo)
                        b_pat[off_lo:off_lo + w_lo, o_hi:o_hi + w_hi] = (
                            _jordan_block(w_lo, tau_hi))
                    else:
                        raise FormError("block widths change by more than 1")
                else:
                    # chain run: alpha identity, beta the scalar tau
                    tau_hi = taus[(ci, hi)]
                    a_pat[o_hi:o_hi + w_hi, off_lo:off_lo + w_lo] = np.eye(w_lo)
                    b_pat[off_lo:off_lo + w_lo, o_hi:o_hi + w_hi] = (
                        tau_hi * np.eye(w_lo))
            off_lo += w_lo
        dev = 0.0
        if q.alphas[e].size:
            dev = max(dev, float(np.abs(q.alphas[e] - a_pat).max()))
        if q.betas[e].size:
            dev = max(dev, float(np.abs(q.betas[e] - b_pat).max()))
        if dev > stol:
            raise FormError(f"edge {e + 1} deviates from its Jordan pattern "
                            f"by {dev:.2e} (snap tolerance {stol:.2e})")
        worst = max(worst, dev)
        alphas.append(a_pat)
        betas.append(b_pat)
    return Quiver(q.dims, alphas, betas), worst


def _jordan_block(m: int, tau: complex) -> np.ndarray:
    j = tau * np.eye(m, dtype=complex)
    for r in range(m - 1):
        j[r, r + 1] = 1.0
    return j


def _tau_table(label: StratumLabel, mu: MomentValue):
    """Edge-composition eigenvalue of each class at each level."""
    out = {}
    n = label.sim.n
    for ci, cls in enumerate(label.sim.classes):
        anchor = mu.nu(min(cls))
        for l in range(1, n + 1):
            out[(ci, l)] = complex(mu.nu(l) - anchor)
    return out


# ---------------------------------------------------------------------------
# the diagonal image


@dataclass
class DiagonalBlockData:
    """Scalar data of one block of the diagonal image: per covered level
    the diagonal entries of alpha (nu) and beta (mu)."""

    class_index: int
    kind: str                      # jordan | chain
    block_index: int
    levels: tuple[int, ...]        # 1-based levels on which the block sits
    nu: list[np.ndarray] = field(default_factory=list)
    mu: list[np.ndarray] = field(default_factory=list)


def to_diagonal(std: StandardizedQuiver, tol: float = 1e-9):
    """The diagonal image: drop the superdiagonal (xi) entries of the betas.

    Input must be in (possibly torus-scaled) Jordan form: per block, alpha
    supported on its diagonal (with an extra zero row at crossings) and
    beta on its diagonal and superdiagonal.  The diagonal of every
    composition, and hence every complex level, is preserved exactly.

    Returns ``(diagonal_std, blocks)`` with ``blocks`` the extracted scalar
    data per block.
    """
    if std.form != "jcf" or std.label is None:
        raise FormError("to_diagonal expects a Jordan-form input")
    q = std.quiver
    label = std.label
    layout = jcf_layout(label)
    n = q.n
    scale = _scale(q)
    stol = _snap_tol(tol, scale)

    blocks: dict[tuple, DiagonalBlockData] = {}
    for l in range(1, n + 1):
        for (ci, kind, bi, w) in layout[l]:
            key = (ci, kind, bi)
            if key not in blocks:
                blocks[key] = DiagonalBlockData(ci, kind, bi, (l,))
            else:
                blocks[key].levels = blocks[key].levels + (l,)

    alphas, betas = [], []
    worst = 0.0
    for e in range(n - 1):
        lo, hi = e + 1, e + 2
        a = q.alphas[e].copy()
        b = q.betas[e].copy()
        off_hi_map = {}
        off = 0
        for (ci, kind, bi, w) in layout[hi]:
            off_hi_map[(ci, kind, bi)] = (off, w)
            off += w
        off_lo = 0
        a_new = np.zeros_like(a)
        b_new = np.zeros_like(b)
        for (ci, kind, bi, w_lo) in layout[lo]:
            key = (ci, kind, bi)
            if key in off_hi_map:
                o_hi, w_hi = off_hi_map[key]
                a_blk = a[o_hi:o_hi + w_hi, off_lo:off_lo + w_lo]
                b_blk = b[off_lo:off_lo + w_lo, o_hi:o_hi + w_hi]
                nu, mu_d, dev = _extract_block_scalars(a_blk, b_blk, w_lo,
                                                       w_hi)
                if dev > stol:
                    raise FormError(
                        f"block {key} at edge {lo} is not in the "
                        f"diagonal/bidiagonal pattern (off by {dev:.2e})")
                worst = max(worst, dev)
                blocks[key].nu.append(nu)
                blocks[key].mu.append(mu_d)
                a_diag = np.zeros_like(a_blk)
                b_diag = np.zeros_like(b_blk)
                for r in range(w_lo):
                    a_diag[r, r] = nu[r]
                    b_diag[r, r] = mu_d[r]
                a_new[o_hi:o_hi + w_hi, off_lo:off_lo + w_lo] = a_diag
                b_new[off_lo:off_lo + w_lo, o_hi:o_hi + w_hi] = b_diag
            off_lo += w_lo
        # everything outside the matched blocks must already be zero
        if float(np.abs(a - _keep_blocks(a, layout, lo, hi, off_hi_map))
                 .max(initial=0.0)) > stol:
            raise FormError(f"alpha at edge {lo} has entries outside blocks")
        alphas.append(a_new)
        betas.append(b_new)
    out = Quiver(q.dims, alphas, betas)
    return (StandardizedQuiver(quiver=out, witness=std.witness,
                               form="diagonal", reproduction_error=worst,
                               label=label),
            sorted(blocks.values(), key=lambda blk: (blk.class_index,
                                                     blk.kind, blk.block_index)))


def _extract_block_scalars(a_blk, b_blk, w_lo, w_hi):
    """nu (diagonal of alpha), mu (diagonal of beta) and the deviation from
    the allowed patterns, for one block edge.

    alpha may only populate its diagonal (the extra row at a crossing stays
    zero); beta its diagonal (mu) and superdiagonal (xi)."""
    dev = 0.0
    nu = np.zeros(w_lo, dtype=complex)
    mu_d = np.zeros(w_lo, dtype=complex)
    allowed_a = np.zeros_like(a_blk, dtype=bool)
    allowed_b = np.zeros_like(b_blk, dtype=bool)
    for r in range(w_lo):
        allowed_a[r, r] = True
        nu[r] = a_blk[r, r]
        allowed_b[r, r] = True
        mu_d[r] = b_blk[r, r]
        if r + 1 < w_hi:
            allowed_b[r, r + 1] = True   # xi entries
    if a_blk.size:
        dev = max(dev, float(np.abs(a_blk[~allowed_a]).max(initial=0.0)))
    if b_blk.size:
        dev = max(dev, float(np.abs(b_blk[~allowed_b]).max(initial=0.0)))
    return nu, mu_d, dev


def _keep_blocks(m, layout, lo, hi, off_hi_map):
    out = np.zeros_like(m)
    off_lo = 0
    for (ci, kind, bi, w_lo) in layout[lo]:
        key = (ci, kind, bi)
        if key in off_hi_map:
            o_hi, w_hi = off_hi_map[key]
            out[o_hi:o_hi + w_hi, off_lo:off_lo + w_lo] = (
                m[o_hi:o_hi + w_hi, off_lo:off_lo + w_lo])
        off_lo += w_lo
    return out


def xi_from_diagonal(nu_levels, mu_levels, x_superdiag):
    """Reconstruct the dropped superdiagonal entries of one Jordan block.

    ``nu_levels[k]``/``mu_levels[k]`` are the diagonal scalars on the k-th
    edge of the block (lengths increasing by one per crossing);
    ``x_superdiag`` are the superdiagonal entries of the top composition on
    the block.  The complex equations force, per edge,

        ``nu^k_r xi^k_r = xi^{k+1}_r nu^{k+1}_{r+1}``

    anchored at the top by ``nu^top_r xi^top_r = X_{r,r+1}``.
    """
    edges = len(nu_levels)
    xis = [None] * edges
    top = edges - 1
    nu_top = np.asarray(nu_levels[top], dtype=complex)
    xs = np.asarray(x_superdiag, dtype=complex)
    if len(xs) != len(nu_top):
        raise ShapeError("superdiagonal length mismatch at the top edge")
    xis[top] = xs / nu_top
    for k in range(top - 1, -1, -1):
        nu_k = np.asarray(nu_levels[k], dtype=complex)
        nu_up = np.asarray(nu_levels[k + 1], dtype=complex)
        w = len(nu_k)
        up = np.asarray(xis[k + 1], dtype=complex)
        xis[k] = np.array([up[r] * nu_up[r + 1] / nu_k[r]
                           for r in range(min(w, len(up)))], dtype=complex)
    return xis


# ---------------------------------------------------------------------------
# torus transitions between Jordan-form configurations


def find_torus_transition(q1: Quiver, q2: Quiver, label: StratumLabel,
                          tol: float = 1e-7):
    """Find a torus element carrying one Jordan-form configuration to
    another with the same top composition and complex levels.

    The unknowns are one scalar per inner level (the residual torus) and
    one scalar per Jordan block of the top composition (a block-constant
    diagonal determinant-one element acting on the top).  Solved in log
    space by least squares over the nonzero entries, then verified by
    applying the element; returns ``(group_element, residual)``.
    """
    if q1.dims != q2.dims:
        raise ShapeError("configurations have different dimension vectors")
    n = q1.n
    layout = jcf_layout(label)
    top_blocks = [(ci, kind, bi, w) for (ci, kind, bi, w) in layout[n]]
    nblk = len(top_blocks)
    block_of = {}
    off = 0
    for idx, (ci, kind, bi, w) in enumerate(top_blocks):
        for r in range(off, off + w):
            block_of[r] = idx
        off += w

    rows = []
    rhs = []
    # unknowns: log c_1..log c_{n-1}, log s_1..log s_nblk
    nunk = (n - 1) + nblk

    def add_entry(val1, val2, coeffs):
        if abs(val1) < 1e-12 or abs(val2) < 1e-12:
            return
        row = np.zeros(nunk, dtype=complex)
        for idx, co in coeffs:
            row[idx] += co
        rows.append(row)
        rhs.append(np.log(val2 / val1))

    for e in range(n - 1):
        a1, a2 = q1.alphas[e], q2.alphas[e]
        b1, b2 = q1.betas[e], q2.betas[e]
        for r in range(a1.shape[0]):
            for c in range(a1.shape[1]):
                coeffs = []
                # alpha_e -> g_{e+2} alpha g_{e+1}^{-1}
                if e + 2 <= n - 1:
                    coeffs.append((e + 1, 1.0))
                elif e + 2 == n:
                    coeffs.append(((n - 1) + block_of[r], 1.0))
                coeffs.append((e, -1.0))
                add_entry(a1[r, c], a2[r, c], coeffs)
        for r in range(b1.shape[0]):
            for c in range(b1.shape[1]):
                coeffs = [(e, 1.0)]
                if e + 2 <= n - 1:
                    coeffs.append((e + 1, -1.0))
                elif e + 2 == n:
                    coeffs.append(((n - 1) + block_of[c], -1.0))
                add_entry(b1[r, c], b2[r, c], coeffs)
    # determinant-one constraint on the top factor
    det_row = np.zeros(nunk, dtype=complex)
    for idx, (ci, kind, bi, w) in enumerate(top_blocks):
        det_row[(n - 1) + idx] = w
    rows.append(det_row * 10.0)
    rhs.append(0.0)

    a_mat = np.array(rows, dtype=complex)
    b_vec = np.array(rhs, dtype=complex)
    sol, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    log_c = sol[:n - 1]
    log_s = sol[n - 1:]

    factors = [np.exp(log_c[e]) * np.eye(q1.dims[e], dtype=complex)
               for e in range(n - 1)]
    top_diag = np.zeros(n, dtype=complex)
    off = 0
    for idx, (ci, kind, bi, w) in enumerate(top_blocks):
        top_diag[off:off + w] = np.exp(log_s[idx])
        off += w
    ge = GroupElement(factors, np.diag(top_diag))
    moved = apply_group(q1, ge)
    err = max([0.0] + [float(np.abs(m1 - m2).max())
                       for m1, m2 in zip(moved.alphas + moved.betas,
                                         q2.alphas + q2.betas)
                       if m1.size])
    if err > tol * max(1.0, _scale(q2)):
        raise FormError(f"no torus transition found (residual {err:.2e})")
    return ge, err

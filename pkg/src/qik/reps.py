"""Constructors for solved configurations and stratum representatives.

Three families:

* diagonal configurations solving both moment equations exactly, per
  scalar coordinate (products fixed by the complex levels, moduli by the
  real levels);
* generic solved full-flag configurations: a solved diagonal moved by a
  random unitary gauge and rotation (both preserve the equations);
* exact stratum representatives for an arbitrary label: the star part is
  rebuilt from a designed traceless top composition (block upper
  triangular, scalar diagonal blocks, one coupling chain per Jordan
  block), and the scalar chains are appended as a direct sum.  The result
  satisfies the complex equations to machine precision and flows to the
  real equations without leaving its stratum.

The moment design used throughout keeps the real levels at zero and gives
each equivalence class its own complex anchor, so the genericity condition
holds without any rotation.
"""

from __future__ import annotations

import numpy as np

from .errors import RankError, ShapeError
from .forms import alpha_from_x
from .hypertoric import DiagonalQuiver, build_diagonal
from .quiver import (GroupElement, MomentValue, Quiver, ScalarChain,
                     apply_group, direct_sum)
from .strata import StratumLabel

__all__ = [
    "design_moment",
    "solved_diagonal",
    "random_solved_diagonal",
    "random_solved_full_flag",
    "build_representative",
    "random_unitary_gauge",
]


def design_moment(label: StratumLabel, seed: int = 0,
                  spread: float = 1.0) -> MomentValue:
    """Moment levels realising the label's equivalence relation exactly.

    Real levels are zero; complex levels come from per-class anchors with
    pairwise separation at least ``spread/2``, so interval sums vanish in
    R^3 exactly when the endpoints are equivalent.
    """
    rng = np.random.default_rng(seed)
    n = label.sim.n
    k = len(label.sim.classes)
    anchors = {}
    for idx, cls in enumerate(label.sim.classes):
        # well-separated deterministic anchors plus seeded jitter
        base = spread * (idx + 1) * np.exp(2j * np.pi * idx / max(k, 1))
        jitter = 0.1 * spread * (rng.standard_normal()
                                 + 1j * rng.standard_normal())
        anchors[cls] = base + jitter
    tau = np.array([anchors[label.sim.class_of(i)] for i in range(1, n + 1)])
    lam_c = tau[:-1] - tau[1:]
    return MomentValue(lam_c, np.zeros(n - 1))


def _scalar_pair(p: complex, r: float):
    """(nu, mu) with nu*mu = p and |nu|^2 - |mu|^2 = r; requires
    (p, r) != (0, 0)."""
    if p == 0 and r == 0:
        raise ShapeError("degenerate scalar pair requested")
    x = (r + np.sqrt(r * r + 4 * abs(p) ** 2)) / 2.0
    if x <= 0:
        return 0.0 + 0.0j, complex(np.sqrt(-r))
    nu = complex(np.sqrt(x))
    mu = p / nu if nu != 0 else complex(np.sqrt(max(-r, 0.0)))
    return nu, mu


def solved_diagonal(mu: MomentValue, phases=None) -> DiagonalQuiver:
    """Diagonal configuration solving both equations at the given levels.

    Scalar products follow ``nu^k_i mu^k_i = -(lam^C_i + ... + lam^C_k)``
    and moduli ``|nu|^2 - |mu|^2 = -(lam^R_i + ... + lam^R_k)``; every such
    partial sum must be nonzero as a pair (the diagonal locus only carries
    the strata whose classes are singletons).  ``phases[k][i]`` optionally
    twists each coordinate inside its circle orbit.
    """
    n = len(mu) + 1
    nu_rows, mu_rows = [], []
    for k in range(1, n):
        nrow = np.zeros(k, dtype=complex)
        mrow = np.zeros(k, dtype=complex)
        for i in range(1, k + 1):
            p = -complex(np.sum(mu.lambda_c[i - 1:k]))
            r = -float(np.sum(mu.lambda_r[i - 1:k]))
            nu, m_ = _scalar_pair(p, r)
            if phases is not None:
                ph = np.exp(1j * phases[k - 1][i - 1])
                nu, m_ = nu * ph, m_ / ph
            nrow[i - 1] = nu
            mrow[i - 1] = m_
        nu_rows.append(nrow)
        mu_rows.append(mrow)
    return DiagonalQuiver(n, nu_rows, mu_rows)


def random_solved_diagonal(n: int, rng: np.random.Generator,
                           scale: float = 1.0) -> DiagonalQuiver:
    """Random diagonal configuration solving both equations with generic
    (singleton-class) levels."""
    while True:
        lam_c = scale * (rng.standard_normal(n - 1)
                         + 1j * rng.standard_normal(n - 1))
        lam_r = scale * rng.standard_normal(n - 1)
        mu = MomentValue(lam_c, lam_r)
        sums = [abs(np.sum(lam_c[i:k + 1])) + abs(np.sum(lam_r[i:k + 1]))
                for k in range(n - 1) for i in range(k + 1)]
        if min(sums, default=1.0) > 0.05 * scale:
            break
    phases = [2 * np.pi * rng.random(k) for k in range(1, n)]
    return solved_diagonal(mu, phases)


def random_unitary_gauge(dims, rng: np.random.Generator,
                         with_top: bool = False) -> GroupElement:
    factors = []
    for d in dims[:-1]:
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        qmat, r = np.linalg.qr(m) if d else (np.zeros((0, 0), complex), None)
        factors.append(qmat)
    top = None
    if with_top:
        m = rng.standard_normal((dims[-1], dims[-1])) \
            + 1j * rng.standard_normal((dims[-1], dims[-1]))
        top, _ = np.linalg.qr(m)
        top = top / np.linalg.det(top) ** (1.0 / dims[-1])
    return GroupElement(factors, top, claims=frozenset({"unitary"}))


def random_solved_full_flag(n: int, rng: np.random.Generator,
                            scale: float = 1.0) -> Quiver:
    """A generic solved configuration: solved diagonal data moved by a
    random unitary gauge (equations and levels are preserved)."""
    q = build_diagonal(random_solved_diagonal(n, rng, scale))
    return apply_group(q, random_unitary_gauge(q.dims, rng))


# ---------------------------------------------------------------------------
# stratum representatives


def _design_x0(label: StratumLabel, mu: MomentValue, couplings=None):
    """Traceless top composition in the flag pattern realising the label.

    Diagonal: the flag block at a crossing carries the class value; one
    coupling chain per Jordan block links its crossing slots (strictly
    upper entries).  Returns ``(x0, slot_map)``.
    """
    n = label.sim.n
    m = label.m_dims
    # flag block i occupies rows n - m[i+1] .. n - m[i]; its slots belong to
    # the class crossing at level i+1
    block_rows = {}
    for i in range(n):
        r0, r1 = n - m[i + 1], n - m[i]
        if r1 > r0:
            block_rows[i + 1] = (r0, r1)     # keyed by crossing level
    x = np.zeros((n, n), dtype=complex)
    for level, (r0, r1) in block_rows.items():
        x[r0:r1, r0:r1] = -mu.nu(level) * np.eye(r1 - r0)

    slot_map = {}
    for ci, (cls, part) in enumerate(zip(label.sim.classes, label.orbit)):
        s = len(cls)
        # assign one slot per alive Jordan block at each crossing, blocks
        # in decreasing-size order
        for t, c in enumerate(cls, start=1):
            alive = [bi for bi, size in enumerate(part) if size >= s - t + 1]
            if c not in block_rows:
                if alive:
                    raise ShapeError(f"no flag block at level {c} for "
                                     f"{len(alive)} alive Jordan blocks")
                continue
            r0, r1 = block_rows[c]
            if len(alive) != r1 - r0:
                raise ShapeError(
                    f"flag block at level {c} has {r1 - r0} slots, "
                    f"{len(alive)} Jordan blocks alive")
            for off, bi in enumerate(alive):
                slot_map[(ci, bi, c)] = r0 + off
        for bi, size in enumerate(part):
            span = cls[s - size:]
            for t in range(len(span) - 1):
                row = slot_map[(ci, bi, span[t + 1])]
                col = slot_map[(ci, bi, span[t])]
                if row >= col:
                    raise ShapeError("coupling would not be upper triangular")
                val = 1.0 if couplings is None else couplings[(ci, bi, t)]
                x[row, col] = val
    x -= (np.trace(x) / n) * np.eye(n)
    return x, slot_map


def build_representative(label: StratumLabel, seed: int = 0):
    """Exact complex-level representative of a stratum.

    Returns ``(quiver, mu)``: the direct sum of the reconstructed star part
    and the scalar chains, solving the complex equations to machine
    precision at the designed levels; the real equations are left for the
    flow.  Raises RankError only if no jitter of the coupling values makes
    the reconstruction regular (not observed in practice).
    """
    mu = design_moment(label, seed)
    rng = np.random.default_rng(seed + 1)
    last_err: Exception | None = None
    for attempt in range(8):
        couplings = None
        if attempt > 0:
            couplings = {}
            for ci, part in enumerate(label.orbit):
                for bi, size in enumerate(part):
                    for t in range(size - 1):
                        couplings[(ci, bi, t)] = 0.5 + rng.random()
        try:
            x0, _ = _design_x0(label, mu, couplings)
            star = alpha_from_x(x0, label.m_dims, mu.lambda_c)
            break
        except RankError as exc:      # pragma: no cover - jitter path
            last_err = exc
    else:                             # pragma: no cover
        raise RankError(f"could not realise the star part: {last_err}")

    chains = []
    for (i, j), d in zip(label.pairs, label.delta):
        alphas, betas = [], []
        for k in range(i, j - 1):
            p = complex(np.sum(mu.lambda_c[k:j - 1]))
            r = float(np.sum(mu.lambda_r[k:j - 1]))
            a, b = _scalar_pair(p, r)
            alphas.append(a)
            betas.append(b)
        chains.append(ScalarChain(start=i, stop=j, dim=d,
                                  alphas=alphas, betas=betas))
    q = direct_sum(star, chains)
    return q, mu

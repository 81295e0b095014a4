"""Matrix Nahm flows: integration, gauge action, asymptotics, pseudometric.

Solutions are quadruples ``(T_0, T_1, T_2, T_3)`` of anti-Hermitian n x n
matrices on a time grid obeying

    ``dT_i/dt + [T_0, T_i] = [T_j, T_k]``   ((ijk) cyclic in (123)).

The inner product throughout is ``<A, B> = -tr(A B)``, positive definite on
anti-Hermitian matrices (the compact-group pairing up to an overall
constant, which never matters for convergence questions).

Half-line quantities are handled by truncation to ``[0, T_max]`` with a
two-parameter tail model ``T_i ~ tau_i + sigma_i / t``; all asymptotic
statements are least-squares fits over the trailing half of the grid and
are reported together with their residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ShapeError

__all__ = [
    "NahmSolution",
    "AsymptoticData",
    "inner",
    "nahm_residual",
    "integrate",
    "gauge_transform",
    "fit_asymptotics",
    "common_centralizer",
    "bielawski_norm",
    "su2_triple",
    "nahm_to_json",
    "nahm_from_json",
]

BLOWUP_NORM = 1e8
ANTIHERM_TOL = 1e-10


def inner(a: np.ndarray, b: np.ndarray) -> float:
    """Positive-definite pairing ``-tr(ab)`` on anti-Hermitian matrices."""
    v = -np.trace(a @ b)
    return float(v.real)


def _check_antihermitian(m: np.ndarray, tol: float = ANTIHERM_TOL) -> None:
    dev = np.linalg.norm(m + m.conj().T)
    if dev > tol * max(1.0, np.linalg.norm(m)):
        raise ShapeError(f"matrix is not anti-Hermitian (deviation {dev:.2e})")


@dataclass
class NahmSolution:
    """Grid of times plus the quadruple values, shape (M, 4, n, n).

    ``truncated`` marks a run cut short by blow-up detection; ``messages``
    carries diagnostics.
    """

    ts: np.ndarray
    values: np.ndarray
    truncated: bool = False
    messages: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.ts = np.asarray(self.ts, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.ts.ndim != 1 or len(self.ts) < 1:
            raise ShapeError("need a 1-d time grid")
        if np.any(np.diff(self.ts) <= 0):
            raise ShapeError("time grid must be strictly increasing")
        m = len(self.ts)
        if self.values.ndim != 4 or self.values.shape[:2] != (m, 4):
            raise ShapeError(f"values must have shape (M, 4, n, n), got "
                             f"{self.values.shape}")
        if self.values.shape[2] != self.values.shape[3]:
            raise ShapeError("matrices must be square")

    @property
    def n(self) -> int:
        return self.values.shape[2]

    def check_antihermitian(self, tol: float = ANTIHERM_TOL) -> float:
        worst = 0.0
        for sample in self.values:
            for m in sample:
                worst = max(worst, float(np.linalg.norm(m + m.conj().T)))
        if worst > tol * max(1.0, float(np.abs(self.values).max())):
            raise ShapeError(f"solution is not anti-Hermitian ({worst:.2e})")
        return worst


@dataclass
class AsymptoticData:
    """Tail-fit data ``T_i ~ tau_i + sigma_i / t`` plus invariant residuals.

    Genuine solutions of the flow have a commuting triple ``tau``, tail
    coefficients obeying ``[sigma_j, sigma_k] = -sigma_i`` cyclically (the
    orientation is forced by matching the 1/t^2 terms of the flow; the
    sigmas are minus a Lie-algebra homomorphism image), and
    ``[tau_a, sigma_b] = 0``.  The three residuals bound the corresponding
    deviations; ``fit_residual`` is a per-coefficient uncertainty estimate,
    so the residuals of a genuine solution sit within a small multiple of
    it.
    """

    tau: np.ndarray          # (3, n, n)
    sigma: np.ndarray        # (3, n, n)
    tau0: np.ndarray         # (n, n): limit of the gauge component
    fit_residual: float
    commuting_residual: float = 0.0
    su2_residual: float = 0.0
    mixed_residual: float = 0.0


def su2_triple(n: int = 2) -> np.ndarray:
    """Anti-Hermitian basis with ``[e_1, e_2] = e_3`` cyclically, embedded
    in the top-left 2x2 block of n x n matrices."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    out = np.zeros((3, n, n), dtype=complex)
    for i, s in enumerate((sx, sy, sz)):
        out[i, :2, :2] = -0.5j * s
    return out


def nahm_residual(sol: NahmSolution) -> float:
    """Max over interior samples and cyclic triples of
    ``|dT_i/dt + [T_0, T_i] - [T_j, T_k]|`` with central differences."""
    if len(sol.ts) < 3:
        raise ShapeError("need at least 3 samples")
    worst = 0.0
    ts, v = sol.ts, sol.values
    for m in range(1, len(ts) - 1):
        dt = ts[m + 1] - ts[m - 1]
        t0 = v[m, 0]
        for (i, j, k) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
            dti = (v[m + 1, i] - v[m - 1, i]) / dt
            lhs = dti + t0 @ v[m, i] - v[m, i] @ t0 \
                - (v[m, j] @ v[m, k] - v[m, k] @ v[m, j])
            worst = max(worst, float(np.linalg.norm(lhs)))
    return worst


def _rhs(t123, t0):
    out = np.empty_like(t123)
    for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        out[i] = -(t0 @ t123[i] - t123[i] @ t0) \
            + (t123[j] @ t123[k] - t123[k] @ t123[j])
    return out


def _project_antihermitian(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - m.conj().T)


def integrate(t_init, t0_profile=None, interval=(0.0, 10.0),
              step: float = 1e-3) -> NahmSolution:
    """Classical fourth-order integration of the flow.

    ``t_init`` is the quadruple at the left endpoint; ``t0_profile``
    optionally supplies the gauge component as a function of t (defaults to
    the constant initial one).  Every step re-projects onto anti-Hermitian
    matrices (drift <= 1e-12 per step).  A norm passing 1e8 stops the run
    early and returns the truncated solution with a diagnostic.
    """
    t_init = np.asarray(t_init, dtype=complex)
    if t_init.ndim != 3 or t_init.shape[0] != 4:
        raise ShapeError("t_init must be a quadruple of square matrices")
    for m in t_init:
        _check_antihermitian(m)
    if step <= 0:
        raise ShapeError("step must be positive")
    t_start, t_end = float(interval[0]), float(interval[1])
    if t_end <= t_start:
        raise ShapeError("empty integration interval")
    n = t_init.shape[1]
    prof = (lambda t: t_init[0]) if t0_profile is None else t0_profile

    nsteps = int(round((t_end - t_start) / step))
    ts = [t_start]
    vals = [np.concatenate([prof(t_start)[None], t_init[1:]], axis=0)]
    y = t_init[1:].copy()
    truncated = False
    messages: list[str] = []
    t = t_start
    for _ in range(nsteps):
        h = step
        k1 = _rhs(y, prof(t))
        k2 = _rhs(y + 0.5 * h * k1, prof(t + 0.5 * h))
        k3 = _rhs(y + 0.5 * h * k2, prof(t + 0.5 * h))
        k4 = _rhs(y + h * k3, prof(t + h))
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        y = np.stack([_project_antihermitian(m) for m in y])
        t += h
        if not np.all(np.isfinite(y)) or np.abs(y).max() > BLOWUP_NORM:
            truncated = True
            messages.append(f"blow-up detected at t = {t:.6g}; the flow can "
                            "reach a pole in finite time")
            break
        ts.append(t)
        vals.append(np.concatenate([prof(t)[None], y], axis=0))
    if len(ts) < 2:
        raise ConvergenceError("integration blew up immediately")
    return NahmSolution(np.array(ts), np.stack(vals), truncated=truncated,
                        messages=messages)


def gauge_transform(sol: NahmSolution, g_path, g_dot=None) -> NahmSolution:
    """Apply ``T_0 -> g T_0 g^-1 - g' g^-1``, ``T_i -> g T_i g^-1``.

    ``g_path(t)`` must be unitary to 1e-10 at the samples; its derivative is
    central-differenced when ``g_dot`` is not supplied.  The flow residual
    is preserved up to finite-difference error.
    """
    ts, v = sol.ts, sol.values
    out = np.empty_like(v)
    for m, t in enumerate(ts):
        g = np.asarray(g_path(t), dtype=complex)
        if np.linalg.norm(g @ g.conj().T - np.eye(sol.n)) > 1e-10 * sol.n:
            raise ShapeError(f"gauge path is not unitary at t = {t:.6g}")
        gi = g.conj().T
        if g_dot is not None:
            gd = np.asarray(g_dot(t), dtype=complex)
        else:
            h = 1e-6 * max(1.0, abs(t))
            gd = (np.asarray(g_path(t + h), dtype=complex)
                  - np.asarray(g_path(t - h), dtype=complex)) / (2 * h)
        out[m, 0] = g @ v[m, 0] @ gi - gd @ gi
        for i in (1, 2, 3):
            out[m, i] = g @ v[m, i] @ gi
        out[m] = np.stack([_project_antihermitian(x) for x in out[m]])
    return NahmSolution(ts.copy(), out)


def fit_asymptotics(sol: NahmSolution, window: float = 0.5) -> AsymptoticData:
    """Least-squares fit of the tail model ``tau + sigma/t``.

    Fits over the trailing ``window`` fraction of the grid (the final time
    should be >= 10 for the model to separate the two terms).  The model is
    fitted with an extra 1/t^2 nuisance term so that the reported ``sigma``
    is not biased by the next order of the expansion; ``fit_residual`` is a
    coefficient-level uncertainty (the pseudoinverse gain applied to the
    misfit), the scale on which the algebraic residuals of a genuine
    solution live.
    """
    ts, v = sol.ts, sol.values
    if ts[-1] < 10:
        raise ShapeError("tail window too short: integrate to t >= 10")
    mask = ts >= (1 - window) * ts[-1]
    if int(mask.sum()) < 5:
        raise ShapeError("not enough samples in the tail window")
    tt = ts[mask]
    design = np.column_stack([np.ones_like(tt), 1.0 / tt, 1.0 / tt ** 2])
    cond = np.linalg.cond(design)
    if cond > 1e10:
        raise ConvergenceError(f"tail fit is ill-conditioned ({cond:.2e})")
    gain = float(np.linalg.norm(np.linalg.pinv(design), 2))
    n = sol.n
    tau = np.zeros((3, n, n), dtype=complex)
    sigma = np.zeros((3, n, n), dtype=complex)
    tau0 = np.zeros((n, n), dtype=complex)
    resid = 0.0
    for i in range(4):
        y = v[mask, i].reshape(len(tt), -1)
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        misfit = max(float(np.linalg.norm(design @ coef[:, c] - y[:, c]))
                     for c in range(y.shape[1])) if y.shape[1] else 0.0
        resid = max(resid, gain * misfit)
        if i == 0:
            tau0 = coef[0].reshape(n, n)
        else:
            tau[i - 1] = coef[0].reshape(n, n)
            sigma[i - 1] = coef[1].reshape(n, n)

    def comm(a, b):
        return a @ b - b @ a

    commuting = max(float(np.linalg.norm(comm(tau[a], tau[b])))
                    for a in range(3) for b in range(3))
    # bracket orientation forced by the flow: [sigma_j, sigma_k] = -sigma_i
    su2 = max(float(np.linalg.norm(comm(sigma[j], sigma[k]) + sigma[i]))
              for (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)))
    mixed = max(float(np.linalg.norm(comm(tau[a], sigma[b])))
                for a in range(3) for b in range(3))
    return AsymptoticData(tau=tau, sigma=sigma, tau0=tau0,
                          fit_residual=resid, commuting_residual=commuting,
                          su2_residual=su2, mixed_residual=mixed)


def common_centralizer(mats, tol: float = 1e-9):
    """Common centraliser of anti-Hermitian matrices inside the traceless
    anti-Hermitian algebra.

    Returns ``(dimension, basis)`` where ``basis`` is an orthonormal (in
    the real pairing) list of traceless anti-Hermitian matrices spanning
    the kernel of ``h -> ([m_1, h], [m_2, h], ...)``.
    """
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if not mats:
        raise ShapeError("need at least one matrix")
    n = mats[0].shape[0]
    for m in mats:
        _check_antihermitian(m)
    basis = _antihermitian_traceless_basis(n)
    a = np.zeros((len(mats) * 2 * n * n, len(basis)))
    for col, b in enumerate(basis):
        chunks = []
        for m in mats:
            c = m @ b - b @ m
            chunks.append(np.concatenate([c.real.ravel(), c.imag.ravel()]))
        a[:, col] = np.concatenate(chunks)
    scale = max(1.0, float(max(np.linalg.norm(m) for m in mats)))
    s = np.linalg.svd(a, compute_uv=False) if a.size else np.zeros(0)
    _, _, vh = np.linalg.svd(a)
    r = int(np.sum(s > tol * scale * n)) if len(s) else 0
    dim = len(basis) - r
    out = []
    for c in vh[r:]:
        h = sum(ci * bi for ci, bi in zip(c, basis))
        out.append(h / np.sqrt(max(inner(h, h), 1e-300)))
    return dim, out


def _antihermitian_traceless_basis(n: int):
    basis = []
    for r in range(n):
        for c in range(r + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[r, c], m[c, r] = 1.0, -1.0
            basis.append(m / np.sqrt(2))
            m = np.zeros((n, n), dtype=complex)
            m[r, c] = 1j
            m[c, r] = 1j
            basis.append(m / np.sqrt(2))
    for r in range(n - 1):
        m = np.zeros((n, n), dtype=complex)
        m[r, r] = 1j
        m[r + 1, r + 1] = -1j
        basis.append(m / np.sqrt(2))
    return basis


def bielawski_norm(sol: NahmSolution, tangent: NahmSolution, c: float = 1.0):
    """Regularised squared pairing of a tangent field along a solution.

    ``value = int_0^Tmax sum_i (<X_i, X_i> - <X_i(inf), X_i(inf)>) dt
    + c sum_i <X_i(inf), X_i(inf)>`` with ``X_i(inf)`` from the tail fit of
    the tangent.  ``convergent`` is True iff the integrand's fitted tail
    decays faster than ``1/t^1.1`` (log-log slope over doubling windows);
    the fitted decay rate is returned as ``tail_slope``.

    The quadratic form is reported as computed; no definiteness claim is
    attached to it.
    """
    if tangent.values.shape != sol.values.shape or \
            not np.allclose(tangent.ts, sol.ts):
        raise ShapeError("tangent must live on the solution's grid")
    fit = fit_asymptotics(tangent)
    limits = np.concatenate([fit.tau0[None], fit.tau], axis=0)
    ts = sol.ts
    integrand = np.zeros(len(ts))
    for m in range(len(ts)):
        acc = 0.0
        for i in range(4):
            x = tangent.values[m, i]
            acc += inner(x, x) - inner(limits[i], limits[i])
        integrand[m] = acc
    value = float(np.trapezoid(integrand, ts)) + c * sum(
        inner(limits[i], limits[i]) for i in range(4))

    slope = _tail_slope(ts, integrand)
    convergent = bool(slope > 1.1)
    return value, convergent, slope


def _tail_slope(ts, integrand) -> float:
    """Decay rate p of |integrand| ~ t^-p from doubling-window averages."""
    t_max = ts[-1]
    windows = []
    hi = t_max
    while hi / 2 >= max(1.0, ts[0] + 1e-9):
        lo = hi / 2
        mask = (ts >= lo) & (ts <= hi)
        if int(mask.sum()) >= 3:
            mean = float(np.mean(np.abs(integrand[mask])))
            windows.append((np.sqrt(lo * hi), mean))
        hi = lo
    windows = [(t, v) for t, v in windows if v > 0]
    if len(windows) < 2:
        return float("inf")     # integrand vanishes on the tail
    windows.sort()
    x = np.log([t for t, _ in windows])
    y = np.log([v for _, v in windows])
    x -= x.mean()
    denom = float(x @ x)
    if denom == 0:
        return float("inf")
    return float(-(x @ (y - y.mean())) / denom)


# ---------------------------------------------------------------------------
# serialisation (binary-free JSON)


def nahm_to_json(sol: NahmSolution) -> dict:
    m, _, n, _ = sol.values.shape
    return {
        "n": n,
        "grid": [float(t) for t in sol.ts],
        "values": [[[[ [float(x.real), float(x.imag)] for x in row]
                     for row in mat] for mat in quad] for quad in sol.values],
        "truncated": sol.truncated,
        "messages": list(sol.messages),
    }


def nahm_from_json(obj) -> NahmSolution:
    import json as _json
    if isinstance(obj, str):
        obj = _json.loads(obj)
    ts = np.array(obj["grid"], dtype=float)
    vals = np.array([[[[complex(x[0], x[1]) for x in row]
                       for row in mat] for mat in quad]
                     for quad in obj["values"]], dtype=complex)
    return NahmSolution(ts, vals, truncated=bool(obj.get("truncated", False)),
                        messages=list(obj.get("messages", [])))

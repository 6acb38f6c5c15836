"""Separable (G = I) machinery and brute-force global oracles.

For one coordinate the penalized objective is

    f(b) = 1/2 (b - t)^2 + lam * |b|^p / p

whose nonzero critical points solve ``b - t + lam * sgn(b) |b|^(p-1) = 0``.
On the side of ``t`` this has zero, one (double) or two roots; the smaller
one is a local maximum and the larger one a local minimum of ``f``.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .config import DEFAULT
from .errors import NonOrthogonalInstanceError
from .model import F_p, f_lambda, is_positive_definite, phi

BRANCH_MIN = "A"
BRANCH_MAX = "B"
BRANCH_ZERO = "C"


@dataclass(frozen=True)
class ScalarCriticalSet:
    beta_target: float
    lam: float
    roots: tuple = ()
    tags: tuple = ()
    always_zero: bool = True


def _scalar_f(b, t, lam, p):
    return 0.5 * (b - t) ** 2 + lam * np.abs(b) ** p / p


def _root(fun, lo, hi):
    return optimize.brentq(fun, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def scalar_critical_points(beta_target, lam, p):
    """Nonzero critical points of the one-coordinate penalized objective."""
    t = float(beta_target)
    lam = float(lam)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if t == 0.0:
        return ScalarCriticalSet(t, lam, (), (), lam > 0)
    if lam == 0.0:
        return ScalarCriticalSet(t, lam, (t,), ("local-min",), False)
    b = abs(t)
    s = np.sign(t)

    def g(x):
        return x - b + lam * x ** (p - 1.0)

    x_infl = ((1.0 - p) * lam) ** (1.0 / (2.0 - p))
    g_min = g(x_infl)
    if g_min > 0.0:
        return ScalarCriticalSet(t, lam)
    if g_min == 0.0:
        return ScalarCriticalSet(t, lam, (s * x_infl,), ("degenerate",))
    # the small root behaves like (lam / b)^(1/(1-p)) as lam -> 0
    lo = min(x_infl, 0.5 * (lam / b) ** (1.0 / (1.0 - p)))
    while lo > 0.0 and g(lo) <= 0.0:
        lo *= 0.5
    if lo == 0.0:
        # small root below the smallest float: only the large root is representable
        return ScalarCriticalSet(t, lam, (s * _root(g, x_infl, b),), ("local-min",))
    small = _root(g, lo, x_infl)
    # g(b) = lam * b^(p-1) > 0 brackets the larger root
    large = _root(g, x_infl, b)
    return ScalarCriticalSet(t, lam, (s * small, s * large), ("local-max", "local-min"))


def lambda_bar(beta_target, p):
    """Largest lambda for which two nonzero scalar critical points exist."""
    return (1.0 - p) ** (1.0 - p) * (abs(beta_target) / (2.0 - p)) ** (2.0 - p)


def beta_bar(beta_target, p):
    """Location of the double root at ``lambda_bar``."""
    return beta_target * (1.0 - p) / (2.0 - p)


def lambda_global_jump(beta_target, p):
    """``(lam_gl, beta_gl)`` where the nonzero local minimum ties the origin.

    Below ``lam_gl`` the global minimiser is the nonzero root; above it the
    origin wins.
    """
    t = float(beta_target)
    lbar = lambda_bar(t, p)

    def gap(lam):
        roots = scalar_critical_points(t, lam, p).roots
        b = roots[-1]
        return _scalar_f(b, t, lam, p) - _scalar_f(0.0, t, lam, p)

    lam_gl = _root(gap, lbar * 1e-12, lbar * (1.0 - 1e-12))
    beta_gl = scalar_critical_points(t, lam_gl, p).roots[-1]
    return lam_gl, beta_gl


@dataclass
class OrthogonalCriticalPoint:
    beta: np.ndarray
    labels: tuple


def _require_identity(inst):
    if not np.allclose(inst.G, np.eye(inst.n), atol=1e-12, rtol=0.0):
        raise NonOrthogonalInstanceError("enumeration requires G = I")


def coordinate_branches(beta_target, lam, p):
    """``[(label, value), ...]`` of the scalar critical points, zero included."""
    crit = scalar_critical_points(beta_target, lam, p)
    out = [(BRANCH_ZERO, 0.0)]
    for root, tag in zip(crit.roots, crit.tags):
        if tag == "local-min":
            out.append((BRANCH_MIN, root))
        elif tag == "local-max":
            out.append((BRANCH_MAX, root))
        else:
            out.append((BRANCH_MIN, root))
    return out


def enumerate_orthogonal_critical_points(inst, lam):
    """Every critical point of ``phi + lam F_p`` when G = I.

    The objective separates per coordinate, so the critical set is the
    Cartesian product of the per-coordinate branches (A: nonzero local min,
    B: nonzero local max, C: zero).
    """
    _require_identity(inst)
    per_coord = [coordinate_branches(t, lam, inst.p) for t in inst.beta_star]
    out = []
    for combo in itertools.product(*per_coord):
        labels = tuple(lbl for lbl, _ in combo)
        beta = np.array([v for _, v in combo], dtype=float)
        out.append(OrthogonalCriticalPoint(beta, labels))
    return out


@dataclass
class OracleResult:
    beta: np.ndarray
    value: float
    ties: list = field(default_factory=list)


def _axis_points(n, settings):
    m = settings.grid_points
    while n > 1 and m**n > settings.grid_max_total and m > 11:
        m = int(m * 0.8)
    return m | 1  # odd so that 0 is on the grid


def _grid_chunks(axes, chunk=200_000):
    """Yield blocks of the tensor grid spanned by ``axes`` as (k, n) arrays."""
    shape = [len(a) for a in axes]
    total = int(np.prod(shape))
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        idx = np.unravel_index(flat, shape)
        yield np.column_stack([a[i] for a, i in zip(axes, idx)])


def _f_batch(inst, B, lam):
    D = B - inst.beta_star
    val = 0.5 * np.einsum("ij,jk,ik->i", D, inst.G, D) + inst.gamma
    if lam:
        val = val + lam * np.sum(np.abs(B) ** inst.p, axis=1) / inst.p
    return val


def _best_on_grid(inst, axes, lam, keep):
    best_vals = np.full(0, np.inf)
    best_pts = np.zeros((0, inst.n))
    for block in _grid_chunks(axes):
        vals = _f_batch(inst, block, lam)
        k = min(keep, vals.size)
        sel = np.argpartition(vals, k - 1)[:k]
        best_vals = np.concatenate([best_vals, vals[sel]])
        best_pts = np.vstack([best_pts, block[sel]])
        order = np.argsort(best_vals)[:keep]
        best_vals, best_pts = best_vals[order], best_pts[order]
    return best_pts, best_vals


def _newton_q(inst, beta, lam, iters=50):
    """Newton polish of the restricted gradient of phi + lam F_p on supp(beta)."""
    idx = np.flatnonzero(beta != 0.0)
    if idx.size == 0:
        return beta
    x = beta.copy()
    G_II = inst.G[np.ix_(idx, idx)]
    p = inst.p
    for _ in range(iters):
        b = x[idx]
        g = (inst.G @ (x - inst.beta_star))[idx] + lam * np.sign(b) * np.abs(b) ** (p - 1.0)
        K = G_II + lam * np.diag(-(1.0 - p) * np.abs(b) ** (p - 2.0))
        try:
            step = np.linalg.solve(K, g)
        except np.linalg.LinAlgError:
            return x
        t = 1.0
        while np.any(np.sign(b - t * step) != np.sign(b)) and t > 1e-8:
            t *= 0.5
        x[idx] = b - t * step
        if np.linalg.norm(t * step) < 1e-15 * (1.0 + np.linalg.norm(b)):
            break
    return x


def _polish_q(inst, beta, lam, radius):
    idx = np.flatnonzero(beta != 0.0)
    if idx.size == 0:
        return beta
    signs = np.sign(beta[idx])
    bounds = [(0.0, radius) if s > 0 else (-radius, 0.0) for s in signs]

    def fun(z):
        full = np.zeros(inst.n)
        full[idx] = z
        return f_lambda(inst, full, lam)

    def jac(z):
        full = np.zeros(inst.n)
        full[idx] = z
        g = (inst.G @ (full - inst.beta_star))[idx]
        if lam:
            az = np.maximum(np.abs(z), 1e-300)
            g = g + lam * np.sign(z) * az ** (inst.p - 1.0)
        return g

    res = optimize.minimize(fun, beta[idx], jac=jac, method="L-BFGS-B", bounds=bounds,
                            options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 2000})
    z = np.where(np.abs(res.x) < 1e-12, 0.0, res.x)
    cand = np.zeros(inst.n)
    cand[idx] = z
    polished = _newton_q(inst, cand, lam)
    if f_lambda(inst, polished, lam) <= f_lambda(inst, cand, lam) + 1e-15:
        return polished
    return cand


def _collect(cands, values, tie_tol):
    order = np.argsort(values)
    best = values[order[0]]
    ties = []
    for k in order:
        if values[k] - best > tie_tol * (1.0 + abs(best)):
            break
        if not any(np.allclose(cands[k], t, atol=1e-7) for t in ties):
            ties.append(cands[k])
    return OracleResult(ties[0], float(best), ties)


def brute_force_global_Q(inst, lam, settings=DEFAULT, keep=12):
    """Global minimiser of ``phi + lam F_p`` by grid scan plus per-support polish (n <= 4)."""
    if inst.n > 4:
        raise ValueError("grid oracle supports n <= 4")
    if lam == 0.0 and is_positive_definite(inst.G):
        beta = np.array(inst.beta_star)
        return OracleResult(beta, phi(inst, beta), [beta])
    radius = 1.5 * max(float(np.max(np.abs(inst.beta_star))), 1e-12)
    m = _axis_points(inst.n, settings)
    axes = [np.linspace(-radius, radius, m)] * inst.n
    pts, _ = _best_on_grid(inst, axes, lam, keep)
    h = 2.0 * radius / (m - 1)
    for _ in range(settings.grid_refine):
        centre = pts[0]
        axes = [np.linspace(c - 2 * h, c + 2 * h, 41) for c in centre]
        axes = [np.union1d(a, [0.0]) if a[0] < 0 < a[-1] else a for a in axes]
        fine, _ = _best_on_grid(inst, axes, lam, keep)
        pts = np.vstack([fine, pts])
        h /= 10.0
    pts = np.vstack([pts, np.zeros(inst.n)])
    cands = [_polish_q(inst, q, lam, 2 * radius) for q in pts]
    values = np.array([f_lambda(inst, q, lam) for q in cands])
    return _collect(cands, values, settings.tie_tol)


def _simplex_grid(dim, m):
    """Points of the probability simplex in ``dim`` coordinates at resolution ``m``."""
    k = m - 1
    if dim == 1:
        return np.ones((1, 1))
    axes = np.meshgrid(*[np.arange(k + 1)] * (dim - 1), indexing="ij")
    head = np.column_stack([a.ravel() for a in axes])
    head = head[head.sum(axis=1) <= k]
    counts = np.column_stack([head, k - head.sum(axis=1)])
    return counts.astype(float) / k


def _kkt_polish(inst, beta, c, iters=60):
    """Newton on grad_I phi + mu grad_I F = 0, F_p = c with fixed signs."""
    idx = np.flatnonzero(beta != 0.0)
    if idx.size <= 1:
        return beta
    p = inst.p
    x = beta.copy()
    gI = (inst.G @ (x - inst.beta_star))[idx]
    dF = np.sign(x[idx]) * np.abs(x[idx]) ** (p - 1.0)
    mu = max(float(-(gI @ dF) / (dF @ dF)), 0.0)
    G_II = inst.G[np.ix_(idx, idx)]
    for _ in range(iters):
        b = x[idx]
        dF = np.sign(b) * np.abs(b) ** (p - 1.0)
        r = np.concatenate([(inst.G @ (x - inst.beta_star))[idx] + mu * dF, [F_p(inst, x) - c]])
        J = np.zeros((idx.size + 1, idx.size + 1))
        J[:-1, :-1] = G_II + mu * np.diag(-(1.0 - p) * np.abs(b) ** (p - 2.0))
        J[:-1, -1] = dF
        J[-1, :-1] = dF
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            return beta
        t = 1.0
        while np.any(np.sign(b - t * step[:-1]) != np.sign(b)) and t > 1e-8:
            t *= 0.5
        x[idx] = b - t * step[:-1]
        mu -= t * step[-1]
        if np.linalg.norm(t * step) < 1e-15 * (1.0 + np.linalg.norm(b)):
            break
    if abs(F_p(inst, x) - c) > 1e-9 * (1.0 + c) or phi(inst, x) > phi(inst, beta) + 1e-12:
        return beta
    return x


def _boundary_points(inst, c, shares, signs):
    p = inst.p
    mags = (p * c * shares) ** (1.0 / p)
    return (signs[:, None, :] * mags[None, :, :]).reshape(-1, inst.n)


def brute_force_global_P(inst, c, settings=DEFAULT, keep=12):
    """Global minimiser of phi over ``{F_p(beta) <= c}`` (n <= 4).

    The constraint is active unless ``beta*`` is feasible; the boundary is
    scanned through budget shares ``w`` on the simplex,
    ``|beta_i| = (p c w_i)^(1/p)``, over all sign patterns, then refined and
    polished with a KKT Newton solve on the winning support.
    """
    if inst.n > 4:
        raise ValueError("grid oracle supports n <= 4")
    if c <= 0.0:
        zero = np.zeros(inst.n)
        return OracleResult(zero, phi(inst, zero), [zero])
    if F_p(inst, inst.beta_star) <= c:
        beta = np.array(inst.beta_star)
        return OracleResult(beta, phi(inst, beta), [beta])
    n = inst.n
    m = settings.grid_points
    while n > 1 and m ** (n - 1) > settings.grid_max_total and m > 11:
        m = int(m * 0.8)
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    shares = _simplex_grid(n, m)
    pts = _boundary_points(inst, c, shares, signs)
    vals = np.array([phi(inst, q) for q in pts]) if pts.shape[0] < 64 else _f_batch(inst, pts, 0.0)
    order = np.argsort(vals)[:keep]
    best = pts[order]
    # refine around the incumbent's shares
    for q in best[: min(3, len(best))]:
        w0 = np.abs(q) ** inst.p / (inst.p * c)
        s0 = np.sign(q) + (q == 0)
        span = 2.0 / (m - 1)
        for _ in range(settings.grid_refine):
            local = np.clip(w0[None, :] + span * (_simplex_grid(n, 9) - 1.0 / n), 0.0, None)
            local = local / local.sum(axis=1, keepdims=True)
            cand = _boundary_points(inst, c, local, s0[None, :])
            cv = _f_batch(inst, cand, 0.0)
            k = int(np.argmin(cv))
            w0 = local[k]
            best = np.vstack([best, cand[k]])
            span /= 4.0
    cands = [_kkt_polish(inst, q, c) for q in best]
    values = np.array([phi(inst, q) for q in cands])
    return _collect(cands, values, settings.tie_tol)

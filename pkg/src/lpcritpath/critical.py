"""Criticality tests and local-minimality classification.

A point ``beta`` with support ``I`` is critical for some ``lam >= 0`` when
``grad_I phi(beta) + lam * grad_I F_p(beta) = 0``.  The same point can be
classified as a critical point of the penalized problem (``Q``, fixed
``lam``) or of the constrained problem (``P``, fixed ``c = F_p(beta)``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .config import DEFAULT
from .errors import NotCriticalError
from .model import F_p, Support, full_gradient, grad_F, grad_phi, hessian_K, phi

LOCAL_MIN = "local-min"
LOCAL_MAX = "local-max"
SADDLE = "saddle"
DEGENERATE = "degenerate"
BREAKPOINT = "breakpoint"
TAGS = (LOCAL_MIN, LOCAL_MAX, SADDLE, DEGENERATE, BREAKPOINT)


@dataclass(frozen=True)
class Classification:
    tag: str
    problem: str
    # (smallest, largest) eigenvalue of the decisive matrix; None when empty
    eigen_summary: tuple | None = None


@dataclass(frozen=True)
class ImpliedLambda:
    value: float
    spread: float
    consistent: bool
    per_index: np.ndarray


def criticality_residual(inst, beta, lam, settings=DEFAULT):
    """``grad_I phi + lam * grad_I F_p`` on ``I = supp(beta)``; empty at the origin."""
    beta = np.asarray(beta, dtype=float)
    sup = Support.of(beta, settings.zero_tol)
    if len(sup) == 0:
        return np.zeros(0)
    return grad_phi(inst, beta, sup) + lam * grad_F(inst, beta, sup)


def residual_scale(inst, beta, settings=DEFAULT):
    return 1.0 + float(np.linalg.norm(grad_phi(inst, beta, Support.of(beta, settings.zero_tol))))


def implied_lambda(inst, beta, settings=DEFAULT):
    """Common value of ``-d_i phi / psi_p'(beta_i)`` over the active indices.

    Small negative values (within tolerance) are clamped to zero.  When the
    per-index values disagree, or the common value is clearly negative,
    ``consistent`` is False and ``spread`` reports the disagreement.
    """
    beta = np.asarray(beta, dtype=float)
    sup = Support.of(beta, settings.zero_tol)
    if len(sup) == 0:
        return ImpliedLambda(0.0, 0.0, True, np.zeros(0))
    lams = -grad_phi(inst, beta, sup) / grad_F(inst, beta, sup)
    spread = float(lams.max() - lams.min())
    value = float(np.mean(lams))
    tol = settings.lambda_tol * (1.0 + float(np.max(np.abs(lams))))
    consistent = spread <= tol and value >= -tol
    if consistent:
        value = max(value, 0.0)
    return ImpliedLambda(value, spread, consistent, lams)


def is_breakpoint(inst, beta, tol=None, settings=DEFAULT):
    """Restricted-OLS test: zero lambda, zero active gradient, some inactive gradient."""
    tol = settings.breakpoint_tol if tol is None else tol
    beta = np.asarray(beta, dtype=float)
    sup = Support.of(beta, settings.zero_tol)
    g = full_gradient(inst, beta)
    scale = 1.0 + float(np.max(np.abs(inst.G @ inst.beta_star)))
    if len(sup):
        gI = g[sup.array]
        if np.max(np.abs(gI)) > tol * scale:
            return False
        lams = -gI / grad_F(inst, beta, sup)
        if np.max(np.abs(lams)) > tol * scale:
            return False
    inactive = sup.complement().array
    return bool(inactive.size) and bool(np.max(np.abs(g[inactive])) > tol * scale)


def _require_critical(inst, beta, lam, settings):
    r = criticality_residual(inst, beta, lam, settings)
    if r.size and np.linalg.norm(r) > settings.critical_tol * residual_scale(inst, beta, settings):
        raise NotCriticalError(
            f"residual {np.linalg.norm(r):.3e} too large for lambda={lam:.6g}"
        )


def _eig_tol(K, settings):
    return settings.degeneracy_tol * (1.0 + np.linalg.norm(K, 2))


def _q_tag(eigs, tol, has_inactive, lam):
    lo, hi = eigs[0], eigs[-1]
    if lo > tol:
        return LOCAL_MIN
    if abs(lo) <= tol:
        return DEGENERATE
    if hi < -tol:
        # zero coordinates are strict minima of the penalized objective once lam > 0
        return SADDLE if has_inactive and lam > 0 else LOCAL_MAX
    if abs(hi) <= tol:
        return DEGENERATE
    return SADDLE


def classify_Q(inst, beta, lam, settings=DEFAULT):
    """Local-minimality class of ``beta`` for ``phi + lam * F_p``."""
    beta = np.asarray(beta, dtype=float)
    _require_critical(inst, beta, lam, settings)
    if is_breakpoint(inst, beta, settings=settings) and lam <= settings.breakpoint_tol:
        return Classification(BREAKPOINT, "Q")
    sup = Support.of(beta, settings.zero_tol)
    if len(sup) == 0:
        return Classification(LOCAL_MIN, "Q")
    K = hessian_K(inst, beta, lam, sup)
    eigs = np.linalg.eigvalsh(K)
    tag = _q_tag(eigs, _eig_tol(K, settings), len(sup) < inst.n, lam)
    return Classification(tag, "Q", (float(eigs[0]), float(eigs[-1])))


def _probe_single(inst, beta, i, settings):
    """Sign pattern of phi changes when moving into inactive coordinates on ``F_p = c``."""
    p = inst.p
    c = F_p(inst, beta)
    base = phi(inst, beta)
    deltas = []
    for j in np.flatnonzero(np.abs(beta) < settings.zero_tol):
        step = settings.probe_step * max(1.0, abs(beta[i]))
        budget = p * c - step**p
        if budget <= 0:
            continue
        for s in (-1.0, 1.0):
            trial = beta.copy()
            trial[j] = s * step
            trial[i] = np.sign(beta[i]) * budget ** (1.0 / p)
            deltas.append(phi(inst, trial) - base)
    return np.array(deltas)


def classify_P(inst, beta, settings=DEFAULT):
    """Local-minimality class of ``beta`` for min phi subject to ``F_p <= F_p(beta)``."""
    beta = np.asarray(beta, dtype=float)
    est = implied_lambda(inst, beta, settings)
    if not est.consistent:
        raise NotCriticalError(f"no common lambda (spread {est.spread:.3e})")
    lam = est.value
    _require_critical(inst, beta, lam, settings)
    if is_breakpoint(inst, beta, settings=settings):
        return Classification(BREAKPOINT, "P")
    sup = Support.of(beta, settings.zero_tol)
    if len(sup) == 0:
        return Classification(LOCAL_MIN, "P")
    K = hessian_K(inst, beta, lam, sup)
    tol = _eig_tol(K, settings)
    eigs = np.linalg.eigvalsh(K)
    if eigs[0] > tol:
        return Classification(LOCAL_MIN, "P", (float(eigs[0]), float(eigs[-1])))
    has_inactive = len(sup) < inst.n
    if len(sup) == 1:
        if abs(eigs[0]) <= tol:
            return Classification(DEGENERATE, "P", (float(eigs[0]), float(eigs[0])))
        deltas = _probe_single(inst, beta, sup.indices[0], settings)
        if deltas.size == 0 or np.all(deltas > 0):
            tag = LOCAL_MIN
        elif np.all(deltas < 0):
            tag = LOCAL_MAX
        else:
            tag = SADDLE
        return Classification(tag, "P", (float(eigs[0]), float(eigs[0])))
    basis = null_space(grad_F(inst, beta, sup)[None, :])
    t_eigs = np.linalg.eigvalsh(basis.T @ K @ basis)
    summary = (float(t_eigs[0]), float(t_eigs[-1]))
    if t_eigs[0] > tol:
        return Classification(LOCAL_MIN, "P", summary)
    if abs(t_eigs[0]) <= tol or eigs[0] >= -tol:
        return Classification(DEGENERATE, "P", summary)
    if t_eigs[-1] < -tol:
        tag = SADDLE if has_inactive and lam > 0 else LOCAL_MAX
        return Classification(tag, "P", summary)
    if abs(t_eigs[-1]) <= tol:
        return Classification(DEGENERATE, "P", summary)
    return Classification(SADDLE, "P", summary)

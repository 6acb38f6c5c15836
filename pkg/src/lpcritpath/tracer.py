"""Pseudo-arclength continuation of critical curves on a fixed support.

On a support ``I`` the critical curve is the zero set of

    R_i(beta, lam) = d_i phi(beta) + lam * psi_p'(beta_i),   i in I,

which is singular where a component vanishes.  The tracer works in the
coordinates ``u_i = sgn(beta_i) |beta_i|^(1-p)``; multiplying ``R_i`` by
``u_i`` gives

    H_i(u, lam) = u_i * d_i phi(beta(u)) + lam,

which is smooth through ``u_i = 0``.  A vanishing component is therefore an
ordinary sign change of ``u_i`` (and of ``lam``), and breakpoints are
regular points of the curve.  On the curve the Jacobian factors as
``diag(u) K diag(dbeta/du)``, so turning points (``lam' = 0``) are exactly
the points where ``K`` is singular.  Points and tangents handed back to the
caller are expressed in ``beta``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .config import DEFAULT
from .critical import classify_P, classify_Q, is_breakpoint
from .errors import (
    BranchPointError,
    NotCriticalError,
    SeedCorrectionError,
    SegmentMismatchError,
    ZeroComponentError,
)
from .model import (
    F_p,
    PathPoint,
    Support,
    full_gradient,
    grad_F,
    hessian_K,
    restricted_ols,
)

log = logging.getLogger(__name__)

COMPONENT_VANISHES = "component-vanishes"
BREAKPOINT = "breakpoint"
TURNING_POINT = "turning-point"
REACHED_OLS = "reached-OLS"
REACHED_ORIGIN = "reached-origin"
STALLED = "stalled"
BRANCH_POINT = "branch-point"
EVENT_KINDS = (
    COMPONENT_VANISHES, BREAKPOINT, TURNING_POINT, REACHED_OLS, REACHED_ORIGIN, STALLED, BRANCH_POINT,
)


@dataclass
class Event:
    kind: str
    location: PathPoint
    indices: tuple = ()
    note: str = ""


@dataclass
class Segment:
    support: Support
    points: list
    start_event: Event
    end_event: Event
    orientation: int
    turning_points: list = field(default_factory=list)
    # unit beta-space tangents at the two ends, in the direction of travel
    start_tangent: np.ndarray | None = None
    end_tangent: np.ndarray | None = None
    indefinite_K: bool = False


class _Curve:
    """Residual, Jacobian and coordinate maps for one support."""

    def __init__(self, inst, support):
        self.inst = inst
        self.idx = support.array
        self.s = len(self.idx)
        self.q = 1.0 / (1.0 - inst.p)
        self.G_I = inst.G[self.idx]
        self.G_II = inst.G[np.ix_(self.idx, self.idx)]
        self.b_I = (inst.G @ inst.beta_star)[self.idx]

    def beta_I(self, u):
        return np.sign(u) * np.abs(u) ** self.q

    def dbeta_du(self, u):
        return self.q * np.abs(u) ** (self.q - 1.0)

    def u_of(self, beta):
        b = np.asarray(beta, dtype=float)[self.idx]
        return np.sign(b) * np.abs(b) ** (1.0 - self.inst.p)

    def beta(self, x):
        out = np.zeros(self.inst.n)
        out[self.idx] = self.beta_I(x[:-1])
        return out

    def grad(self, x):
        return self.G_II @ self.beta_I(x[:-1]) - self.b_I

    def H(self, x):
        return x[:-1] * self.grad(x) + x[-1]

    def J(self, x):
        u = x[:-1]
        Ju = np.diag(self.grad(x)) + u[:, None] * self.G_II * self.dbeta_du(u)[None, :]
        return np.hstack([Ju, np.ones((self.s, 1))])

    def tangent(self, x, orient=None):
        J = self.J(x)
        _, sv, vt = np.linalg.svd(J)
        if sv[-1] <= 1e-10 * max(1.0, sv[0]):
            raise BranchPointError(
                f"augmented Jacobian rank deficient on support {self.idx.tolist()} "
                f"(singular values {sv.tolist()})"
            )
        t = vt[-1]
        if orient is not None and t @ orient < 0:
            t = -t
        return t

    def beta_tangent(self, x, t):
        """Unit tangent of the curve in full beta-space (direction of ``t``)."""
        v = np.zeros(self.inst.n)
        v[self.idx] = self.dbeta_du(x[:-1]) * t[:-1]
        nrm = np.linalg.norm(v)
        return v / nrm if nrm > 0 else v

    def correct(self, xp, t, settings):
        """Newton on H(x) = 0, t.(x - xp) = 0.  Returns (x, iterations) or (None, k)."""
        x = xp.copy()
        A = np.zeros((self.s + 1, self.s + 1))
        A[-1] = t
        rhs = np.zeros(self.s + 1)
        for k in range(1, settings.newton_maxiter + 1):
            A[:-1] = self.J(x)
            rhs[:-1] = self.H(x)
            rhs[-1] = t @ (x - xp)
            try:
                dx = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                return None, k
            if not np.all(np.isfinite(dx)):
                return None, k
            x = x - dx
            if np.linalg.norm(dx) <= settings.newton_tol * (1.0 + np.linalg.norm(x)):
                # one more sweep to settle at rounding level
                A[:-1] = self.J(x)
                rhs[:-1] = self.H(x)
                rhs[-1] = t @ (x - xp)
                try:
                    x = x - np.linalg.solve(A, rhs)
                except np.linalg.LinAlgError:
                    pass
                return x, k
        return None, settings.newton_maxiter


def _as_support(inst, support):
    if isinstance(support, Support):
        return support
    return Support(tuple(sorted(int(i) for i in support)), inst.n)


def tangent_direction(inst, point, previous=None):
    """Unit null vector ``(dbeta_I, dlam)`` of ``[K | grad_I F_p]``.

    The sign follows ``previous`` when given, otherwise ``dlam >= 0``.
    Raises :class:`BranchPointError` when the augmented Jacobian has rank
    below ``|I|``.
    """
    beta = np.asarray(point.beta, dtype=float)
    sup = point.support
    if len(sup) == 0:
        raise ZeroComponentError("tangent needs a nonempty support")
    K = hessian_K(inst, beta, point.lam, sup)
    A = np.hstack([K, grad_F(inst, beta, sup)[:, None]])
    _, sv, vt = np.linalg.svd(A)
    if sv[-1] <= 1e-10 * max(1.0, sv[0]):
        raise BranchPointError("augmented Jacobian [K | grad F] is rank deficient")
    t = vt[-1]
    if previous is not None:
        if t @ np.asarray(previous, dtype=float) < 0:
            t = -t
    elif t[-1] < 0:
        t = -t
    return t[:-1], float(t[-1])


def _make_point(inst, curve, x, s, settings):
    beta = curve.beta(x)
    beta[np.abs(beta) < settings.zero_tol] = 0.0
    lam = max(float(x[-1]), 0.0)
    pt = PathPoint(beta=beta, lam=lam, c=F_p(inst, beta), support=Support.of(beta, settings.zero_tol),
                   arclength=s)
    try:
        pt.class_Q = classify_Q(inst, beta, lam, settings).tag
    except NotCriticalError:
        pt.class_Q = "unclassified"
    try:
        pt.class_P = classify_P(inst, beta, settings).tag
    except NotCriticalError:
        pt.class_P = "unclassified"
    if len(pt.support):
        try:
            pt.det_K = float(np.linalg.det(hessian_K(inst, beta, lam, pt.support)))
        except ZeroComponentError:
            pt.det_K = None
    return pt


def _snap_point(inst, beta, settings):
    """Exact breakpoint / OLS point with classification tags."""
    beta = np.array(beta, dtype=float)
    pt = PathPoint(beta=beta, lam=0.0, c=F_p(inst, beta), support=Support.of(beta, settings.zero_tol))
    pt.class_Q = classify_Q(inst, beta, 0.0, settings).tag
    pt.class_P = classify_P(inst, beta, settings).tag
    if len(pt.support):
        pt.det_K = float(np.linalg.det(hessian_K(inst, beta, 0.0, pt.support)))
    return pt


class _Tracer:
    def __init__(self, inst, support, settings):
        self.inst = inst
        self.settings = settings
        self.curve = _Curve(inst, support)
        self.support = support

    def corrected(self, x0, t0, h):
        x, _ = self.curve.correct(x0 + h * t0, t0, self.settings)
        return x

    def locate(self, x0, t0, h, fun):
        """Smallest-bracket root of ``fun(corrected point)`` along the step."""
        def g(hh):
            if hh == 0.0:
                return fun(x0, t0)
            x = self.corrected(x0, t0, hh)
            if x is None:
                raise NotCriticalError("corrector failed during event location")
            return fun(x, self.curve.tangent(x, t0))

        hh = optimize.brentq(g, 0.0, h, xtol=self.settings.event_tol, rtol=4 * np.finfo(float).eps)
        x = self.corrected(x0, t0, hh) if hh > 0 else x0.copy()
        return hh, x


def trace_segment(inst, start, initial_direction=1.0, support=None, settings=DEFAULT):
    """Follow the critical curve on ``support`` from ``start`` to its first terminating event.

    ``start`` must be critical on ``support`` (components outside
    ``supp(start)`` but inside ``support`` may be zero: that is how a new
    coordinate enters).  ``initial_direction`` is either the desired sign
    of ``dlam/ds`` or a :class:`PathPoint` on the curve close to ``start``
    that fixes the direction of travel.

    Turning points are recorded on the segment without ending it.  The
    segment ends when ``lam`` returns to zero, at which point either some
    components vanish (the end is snapped to the restricted OLS point on
    the remaining support) or the restricted OLS point of ``support``
    itself has been reached.
    """
    st = settings
    support = _as_support(inst, support if support is not None else start.support)
    tr = _Tracer(inst, support, st)
    cv = tr.curve
    x = np.append(cv.u_of(start.beta), start.lam)
    if np.linalg.norm(cv.H(x)) > 1e-8 * (1.0 + np.linalg.norm(cv.b_I)):
        raise NotCriticalError("start point is not on the critical curve of the given support")

    if isinstance(initial_direction, PathPoint):
        target = np.append(cv.u_of(initial_direction.beta), initial_direction.lam)
        orient = target - x
    else:
        orient = np.zeros(cv.s + 1)
        orient[-1] = 1.0 if float(initial_direction) >= 0 else -1.0
    try:
        t = cv.tangent(x, orient)
    except BranchPointError as exc:
        first = _snap_like(inst, start, st)
        ev = Event(BRANCH_POINT, first, note=str(exc))
        return Segment(support, [first], ev, ev, 0)

    first = _snap_like(inst, start, st)
    start_kind = BREAKPOINT if first.class_Q == "breakpoint" else REACHED_OLS
    if len(first.support) == 0:
        start_kind = REACHED_ORIGIN
    start_event = Event(start_kind, first)
    seg = Segment(support, [first], start_event, None, int(np.sign(t[-1]) or 1))
    seg.start_tangent = cv.beta_tangent(x, t)
    # arclength of the continuation itself, in (u, lam); smooth through breakpoints
    first.arclength = float(start.arclength)
    last = {"x": x, "s": first.arclength}

    def emit(xx):
        last["s"] += float(np.linalg.norm(xx - last["x"]))
        last["x"] = xx
        pt = _make_point(inst, cv, xx, last["s"], st)
        seg.points.append(pt)
        return pt

    # approach points leaving the start
    h = st.step_init
    for j in range(st.approach_levels, 0, -1):
        xx = tr.corrected(x, t, h * 2.0**-j)
        if xx is not None and xx[-1] > 0:
            emit(xx)

    for _ in range(st.max_steps):
        x_new, iters = cv.correct(x + h * t, t, st)
        ok = x_new is not None and np.linalg.norm(x_new - (x + h * t)) <= 0.5 * h
        if ok:
            try:
                t_new = cv.tangent(x_new, t)
            except BranchPointError as exc:
                pt = emit(x_new)
                seg.end_event = Event(BRANCH_POINT, pt, note=str(exc))
                return _finish(seg)
            ok = t_new @ t > 0.98
        if not ok:
            h *= 0.5
            if h < st.step_min:
                pt = seg.points[-1]
                seg.end_event = Event(STALLED, pt, note="step size underflow")
                return _finish(seg)
            continue

        # lam returning to zero ends the segment
        if x_new[-1] < 0.0:
            h_e, x_e = tr.locate(x, t, h, lambda xx, tt: xx[-1])
            if x_e is None:
                h *= 0.5
                continue
            t_e = cv.tangent(x_e, t)
            _record_turning(tr, seg, x, t, h_e, emit)
            for j in range(1, st.approach_levels + 1):
                xx = tr.corrected(x, t, h_e * (1.0 - 2.0**-j))
                if xx is not None and xx[-1] > 0 and _no_tiny(xx, cv, st):
                    emit(xx)
            seg.end_tangent = cv.beta_tangent(x_e, t_e)
            _close_at_zero_lambda(inst, seg, cv, x_e, last["s"] + float(np.linalg.norm(x_e - last["x"])), st)
            return _finish(seg)

        _record_turning(tr, seg, x, t, h, emit, t_new)
        emit(x_new)
        x, t = x_new, t_new
        if iters <= 3:
            h = min(1.5 * h, st.step_max)
        elif iters > 8:
            h = max(0.5 * h, st.step_min)
    seg.end_event = Event(STALLED, seg.points[-1], note="maximum number of steps")
    return _finish(seg)


def _no_tiny(x, cv, st):
    b = np.abs(cv.beta_I(x[:-1]))
    return bool(np.all(b >= 1e3 * st.zero_tol))


def _record_turning(tr, seg, x, t, h, emit, t_new=None):
    cv = tr.curve
    if t_new is None:
        xe = tr.corrected(x, t, h)
        if xe is None:
            return
        t_new = cv.tangent(xe, t)
    if np.sign(t_new[-1]) == np.sign(t[-1]) or t[-1] == 0.0:
        return
    try:
        _, x_tp = tr.locate(x, t, h, lambda xx, tt: tt[-1])
    except (ValueError, NotCriticalError):
        return
    pt = emit(x_tp)
    seg.turning_points.append(Event(TURNING_POINT, pt))


def _snap_like(inst, start, st):
    """Re-tag a caller-supplied start point."""
    beta = np.array(start.beta, dtype=float)
    beta[np.abs(beta) < st.zero_tol] = 0.0
    pt = PathPoint(beta=beta, lam=float(start.lam), c=F_p(inst, beta), support=Support.of(beta, st.zero_tol))
    try:
        pt.class_Q = classify_Q(inst, beta, pt.lam, st).tag
        pt.class_P = classify_P(inst, beta, st).tag
    except NotCriticalError:
        pt.class_Q = pt.class_P = "unclassified"
    if len(pt.support):
        pt.det_K = float(np.linalg.det(hessian_K(inst, beta, pt.lam, pt.support)))
    return pt


def _close_at_zero_lambda(inst, seg, cv, x_e, s_end, st):
    u = x_e[:-1]
    scale = 1.0 + np.linalg.norm(u)
    vanished = tuple(int(cv.idx[k]) for k in np.flatnonzero(np.abs(u) <= 1e-6 * scale))
    remaining = seg.support.remove(*vanished)
    bp = restricted_ols(inst, remaining)
    drift = np.linalg.norm(bp - cv.beta(x_e))
    pt = _snap_point(inst, bp, st)
    pt.arclength = s_end
    seg.points.append(pt)
    if drift > 1e-6 * (1.0 + np.linalg.norm(bp)):
        seg.end_event = Event(STALLED, pt, vanished, note=f"snap drift {drift:.3e}")
        return
    if vanished:
        kind = REACHED_ORIGIN if len(remaining) == 0 else COMPONENT_VANISHES
        seg.end_event = Event(kind, pt, vanished)
        for i in vanished:
            log.debug("component %d vanished; |beta|^(1-p)/lam tends to 1/|d_i phi| = %.6g",
                      i, 1.0 / max(abs(full_gradient(inst, bp)[i]), 1e-300))
    elif np.max(np.abs(full_gradient(inst, bp))) <= st.breakpoint_tol * (1.0 + np.max(np.abs(cv.b_I))):
        seg.end_event = Event(REACHED_OLS, pt)
    else:
        seg.end_event = Event(BREAKPOINT, pt)


def _finish(seg):
    seg.indefinite_K = any(p.det_K is not None and p.class_Q in ("saddle", "local-max") for p in seg.points)
    return seg


def enter_coordinate(inst, bp, new_index, sign, settings=DEFAULT):
    """Seed the first point of a curve on which ``new_index`` becomes active.

    ``beta[new_index]`` is fixed at ``sign * eps`` for each ``eps`` of the
    seed ladder and the remaining active coordinates and ``lam`` are
    Newton-corrected onto the critical curve of the enlarged support.
    """
    new_index = int(new_index)
    if new_index in bp.support:
        raise ValueError(f"index {new_index} is already active")
    if not (len(bp.support) == 0 or is_breakpoint(inst, bp.beta, settings=settings)):
        raise SeedCorrectionError("enter_coordinate needs a breakpoint or the origin")
    support = bp.support.add(new_index)
    cv = _Curve(inst, support)
    k_new = int(np.searchsorted(cv.idx, new_index))
    others = np.array([k for k in range(cv.s) if k != k_new], dtype=int)
    g_new = full_gradient(inst, bp.beta)[new_index]
    base = max(1.0, float(np.max(np.abs(inst.beta_star))))
    for eps in (1e-3 * base, 1e-4 * base, 1e-5 * base):
        u_new = np.sign(sign) * eps ** (1.0 - inst.p)
        x = np.append(cv.u_of(bp.beta), 0.0)
        x[k_new] = u_new
        x[-1] = -u_new * g_new
        if x[-1] <= 0:
            raise SeedCorrectionError(
                f"sign {sign:+g} gives negative lambda for index {new_index}; use {-np.sign(g_new):+g}"
            )
        free = np.append(others, cv.s)
        for _ in range(settings.newton_maxiter):
            r = cv.H(x)
            J = cv.J(x)[:, free]
            try:
                dz = np.linalg.solve(J, r)
            except np.linalg.LinAlgError:
                break
            x[free] -= dz
            if np.linalg.norm(dz) <= settings.newton_tol * (1.0 + np.linalg.norm(x)):
                break
        beta = cv.beta(x)
        ok = (
            np.linalg.norm(cv.H(x)) <= 1e-10
            and x[-1] > 0
            and np.all(np.sign(x[others]) == np.sign(cv.u_of(bp.beta)[others]))
        )
        if ok:
            return _make_point(inst, cv, x, 0.0, settings) if np.all(np.abs(beta[support.array]) >= settings.zero_tol) \
                else PathPoint(beta=beta, lam=float(x[-1]), c=F_p(inst, beta), support=support)
    raise SeedCorrectionError(f"could not seed index {new_index} from the given breakpoint")


@dataclass
class ConnectionReport:
    angle: float
    extrapolated_angle: float
    new_component: float
    passed: bool
    breakpoint: np.ndarray


def _angle(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return float("nan")
    c = min(1.0, abs(float(a @ b)) / (na * nb))
    return float(np.arccos(c))


def _extrapolated_tangent(points):
    """Derivative of beta(s) at the last point from a quadratic fit through the last five."""
    pts = points[-5:]
    s = np.array([p.arclength for p in pts])
    B = np.array([p.beta for p in pts])
    s0 = s[-1]
    coef = np.polyfit(s - s0, B, deg=min(2, len(pts) - 1))
    d = coef[-2]
    nrm = np.linalg.norm(d)
    return d / nrm if nrm > 0 else d


def verify_tangential_connection(seg_a, seg_b, settings=DEFAULT):
    """Angle between the two curves where ``seg_a`` ends and ``seg_b`` starts.

    Tangents are compared as lines (orientation ignored).  The limiting
    tangents come from the continuation itself; a second estimate is
    extrapolated from the five points nearest the breakpoint on each side,
    and the component along coordinates active on only one side must vanish
    in that estimate.
    """
    end_a = seg_a.points[-1].beta
    start_b = seg_b.points[0].beta
    if np.linalg.norm(end_a - start_b) > 1e-8 * (1.0 + np.linalg.norm(end_a)):
        raise SegmentMismatchError("segments do not share an endpoint")
    ta = seg_a.end_tangent if seg_a.end_tangent is not None else _extrapolated_tangent(seg_a.points)
    tb = seg_b.start_tangent if seg_b.start_tangent is not None else \
        -_extrapolated_tangent(seg_b.points[::-1])
    angle = _angle(ta, tb)
    ea = _extrapolated_tangent(seg_a.points)
    eb = _extrapolated_tangent(seg_b.points[::-1])
    ext_angle = _angle(ea, eb)
    diff = sorted(set(seg_a.support.indices) ^ set(seg_b.support.indices))
    new_comp = float(max((abs(v[i]) for v in (ea, eb) for i in diff), default=0.0))
    passed = bool(angle < settings.tangency_tol and ext_angle < settings.tangency_tol)
    return ConnectionReport(angle, ext_angle, new_comp, passed, np.array(end_a))

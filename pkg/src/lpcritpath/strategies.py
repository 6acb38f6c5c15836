"""Main, greedy and modified greedy paths, the greedy direction, and OMP.

The main path starts at the OLS point with every index active and drops
an index each time a component reaches zero.  The greedy path starts at
the origin and adds, at each breakpoint, the inactive index with the
largest gradient magnitude; the modified variant only admits indices whose
gradient sign opposes the sign of the OLS coefficient.  OMP produces the
same breakpoints without any tracing, by solving restricted normal
equations.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .critical import implied_lambda
from .errors import SingularHessianError, VariantMismatchError
from .model import PathPoint, Support, full_gradient, hessian_K, psi_p, restricted_ols
from .tracer import (
    BRANCH_POINT,
    BREAKPOINT,
    COMPONENT_VANISHES,
    REACHED_OLS,
    REACHED_ORIGIN,
    STALLED,
    Event,
    enter_coordinate,
    trace_segment,
)

log = logging.getLogger(__name__)

MAIN = "main"
GREEDY = "greedy"
MODIFIED_GREEDY = "modified-greedy"
CUSTOM = "custom"


@dataclass
class Path:
    kind: str
    segments: list
    breakpoints: list
    terminal: Event
    # ("add" | "drop", index) in the order the support changed
    active_order: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    instance: object = field(default=None, repr=False)

    @property
    def points(self):
        """All points of all segments, shared endpoints listed once."""
        out = []
        for seg in self.segments:
            out.extend(seg.points if not out else seg.points[1:])
        return out

    @property
    def endpoint(self):
        return self.terminal.location

    def added(self):
        return [i for op, i in self.active_order if op == "add"]


@dataclass
class MinkowskianDirection:
    vector: np.ndarray
    regime: str
    pseudo_norm_value: float | None


def pseudo_norm(inst, beta, a, settings=DEFAULT):
    """Position-dependent pseudo-norm: K-norm on the support plus a scaled l_p term off it."""
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    sup = Support.of(beta, settings.zero_tol)
    off = sup.complement().array
    val = np.sum(psi_p(inst, a[off])) / inst.p
    if len(sup):
        K = hessian_K(inst, beta, implied_lambda(inst, beta, settings).value, sup)
        aI = a[sup.array]
        val += np.sqrt(max(float(aI @ K @ aI), 0.0))
    return float(val)


def _grad_scale(inst):
    return 1.0 + float(np.max(np.abs(inst.G @ inst.beta_star)))


def _candidates(inst, beta, support, modified, settings):
    """Inactive indices eligible to enter, with the gradient at ``beta``."""
    g = full_gradient(inst, beta)
    tol = settings.breakpoint_tol * _grad_scale(inst)
    cand = [i for i in support.complement() if abs(g[i]) > tol]
    if modified:
        # strict: beta*_i = 0 never qualifies
        cand = [i for i in cand if g[i] * inst.beta_star[i] < 0]
    return cand, g


def _pick(cand, g):
    # argmax over |g|, ties to the smallest index
    if not cand:
        return None
    mags = np.abs(g[cand])
    return int(cand[int(np.argmax(mags))])


def minkowskian_direction(inst, beta, settings=DEFAULT):
    """Greedy direction ``-grad_GM phi`` at ``beta``.

    At the origin and at breakpoints the direction is a signed standard
    basis vector; in the interior of a support it is ``-K^{-1} grad_I phi``,
    normalised.  Where ``K`` is indefinite the opposite sign is returned
    (the greedy path travels with ``lam`` increasing there) and the regime
    is tagged ``indefinite-K``.  At the OLS point the gradient vanishes and
    the regime is ``terminal`` with a zero vector.
    """
    beta = np.asarray(beta, dtype=float)
    sup = Support.of(beta, settings.zero_tol)
    g = full_gradient(inst, beta)
    tol = settings.breakpoint_tol * _grad_scale(inst)
    n = inst.n
    if np.max(np.abs(g)) <= tol:
        return MinkowskianDirection(np.zeros(n), "terminal", None)
    gI = g[sup.array]
    if len(sup) == 0 or np.max(np.abs(gI)) <= tol:
        off = list(sup.complement())
        i = _pick(off, g)
        v = np.zeros(n)
        v[i] = -np.sign(g[i])
        regime = "origin" if len(sup) == 0 else "breakpoint"
        return MinkowskianDirection(v, regime, pseudo_norm(inst, beta, -v, settings))
    lam = implied_lambda(inst, beta, settings).value
    K = hessian_K(inst, beta, lam, sup)
    eigs = np.linalg.eigvalsh(K)
    if np.min(np.abs(eigs)) <= settings.degeneracy_tol * (1.0 + np.max(np.abs(eigs))):
        raise SingularHessianError("K is singular; the greedy direction is undefined here")
    a = np.linalg.solve(K, gI)
    v = np.zeros(n)
    if eigs[0] > 0:
        v[sup.array] = -a
        regime, qval = "interior", float(np.sqrt(gI @ a))
    else:
        v[sup.array] = a
        regime, qval = "indefinite-K", None
    return MinkowskianDirection(v / np.linalg.norm(v), regime, qval)


def _origin(inst):
    z = np.zeros(inst.n)
    return PathPoint(beta=z, lam=0.0, c=0.0, support=Support((), inst.n), class_Q="local-min", class_P="local-min")


def main_path(inst, settings=DEFAULT):
    """Critical path from the OLS point to the origin.

    Starts with the support of the OLS point and ``lam = 0`` and drops the
    vanishing index at each breakpoint.  A branch point or a stall ends the
    path early; the partial path is returned with that terminal event.
    """
    beta0 = np.array(inst.beta_star, dtype=float)
    start = PathPoint.at(inst, beta0, 0.0, settings.zero_tol)
    if len(start.support) == 0:
        return Path(MAIN, [], [], Event(REACHED_ORIGIN, _origin(inst)))
    support = start.support
    segs, bps, order = [], [], []
    while True:
        seg = trace_segment(inst, start, 1.0, support, settings)
        segs.append(seg)
        ev = seg.end_event
        if ev.kind == COMPONENT_VANISHES:
            bps.append(ev.location)
            order.extend(("drop", i) for i in ev.indices)
            if len(ev.indices) > 1:
                log.warning("main path dropped %d indices at once at %s", len(ev.indices), ev.location.beta)
            start, support = ev.location, ev.location.support
            continue
        if ev.kind == REACHED_ORIGIN:
            order.extend(("drop", i) for i in ev.indices)
        path = Path(MAIN, segs, bps, ev, order)
        _note_indefinite(path, inst)
        return path


def greedy_path(inst, modified=False, settings=DEFAULT):
    """Critical path from the origin, adding one index per breakpoint.

    The path ends at the OLS point (``reached-OLS``), or with ``stalled``
    when a component vanishes along a leg or when no admissible index is
    left to add.
    """
    kind = MODIFIED_GREEDY if modified else GREEDY
    bp = _origin(inst)
    segs, bps, order, notes = [], [], [], []
    while True:
        cand, g = _candidates(inst, bp.beta, bp.support, modified, settings)
        i = _pick(cand, g)
        if i is None:
            done = np.max(np.abs(g)) <= settings.breakpoint_tol * _grad_scale(inst)
            if done:
                term = Event(REACHED_OLS, bp)
            else:
                term = Event(STALLED, bp, note="no admissible index to add")
                notes.append("no admissible index at " + np.array2string(bp.beta, precision=6))
            if bps and bps[-1] is bp:
                bps.pop()
            path = Path(kind, segs, bps, term, order, notes)
            _note_indefinite(path, inst)
            return path
        sign = -np.sign(g[i])
        seed = enter_coordinate(inst, bp, i, sign, settings)
        order.append(("add", i))
        seg = trace_segment(inst, bp, seed, bp.support.add(i), settings)
        segs.append(seg)
        ev = seg.end_event
        if ev.kind == BREAKPOINT:
            bp = ev.location
            bps.append(bp)
            continue
        if ev.kind == REACHED_OLS:
            path = Path(kind, segs, bps, ev, order, notes)
            _note_indefinite(path, inst)
            return path
        if ev.kind in (COMPONENT_VANISHES, REACHED_ORIGIN):
            notes.append(f"component(s) {list(ev.indices)} vanished; greedy path stops")
            term = Event(STALLED, ev.location, ev.indices, note="component vanished along a greedy leg")
        else:
            term = ev
        path = Path(kind, segs, bps, term, order, notes)
        _note_indefinite(path, inst)
        return path


def _note_indefinite(path, inst=None):
    path.instance = inst
    for k, seg in enumerate(path.segments):
        if seg.indefinite_K and path.kind != MAIN:
            path.notes.append(f"segment {k}: K indefinite before the lambda peak; greedy direction sign flipped there")
        if seg.end_event.kind == BRANCH_POINT:
            path.notes.append(f"segment {k}: branch point, path not continued")


@dataclass
class OMPRun:
    steps: list
    order: list
    status: str
    modified: bool


def omp(inst, modified=False, settings=DEFAULT, max_steps=None):
    """Orthogonal matching pursuit, optionally with the sign filter.

    Each step adds the admissible index with the largest gradient magnitude
    and re-solves the normal equations on the active set.  ``status`` is
    ``reached-OLS``, ``no-candidates`` or ``max-steps``.
    """
    max_steps = inst.n if max_steps is None else max_steps
    beta = np.zeros(inst.n)
    support = Support((), inst.n)
    steps, order = [], []
    for _ in range(max_steps):
        cand, g = _candidates(inst, beta, support, modified, settings)
        i = _pick(cand, g)
        if i is None:
            break
        support = support.add(i)
        order.append(i)
        beta = restricted_ols(inst, support)
        steps.append(beta)
    else:
        g = full_gradient(inst, beta)
        status = "reached-OLS" if np.max(np.abs(g)) <= settings.breakpoint_tol * _grad_scale(inst) else "max-steps"
        return OMPRun(steps, order, status, modified)
    g = full_gradient(inst, beta)
    status = "reached-OLS" if np.max(np.abs(g)) <= settings.breakpoint_tol * _grad_scale(inst) else "no-candidates"
    return OMPRun(steps, order, status, modified)


@dataclass
class CoincidenceReport:
    passed: bool
    max_deviation: float
    max_implied_lambda: float
    order_matches: bool
    detail: str = ""


def check_omp_coincidence(path, omp_run, settings=DEFAULT):
    """Compare greedy breakpoints plus endpoint with OMP step solutions."""
    want = MODIFIED_GREEDY if omp_run.modified else GREEDY
    if path.kind != want:
        raise VariantMismatchError(f"path kind {path.kind!r} does not match OMP variant {want!r}")
    if path.terminal.kind != REACHED_OLS:
        return CoincidenceReport(False, float("inf"), float("nan"), False,
                                 f"path terminal is {path.terminal.kind}, not reached-OLS")
    traced = [bp.beta for bp in path.breakpoints] + [path.endpoint.beta]
    if len(traced) != len(omp_run.steps):
        return CoincidenceReport(False, float("inf"), float("nan"), False,
                                 f"{len(traced)} path points vs {len(omp_run.steps)} OMP steps")
    dev = max(float(np.max(np.abs(a - b))) for a, b in zip(traced, omp_run.steps))
    if path.instance is not None:
        lam = max((abs(implied_lambda(path.instance, bp.beta, settings).value) for bp in path.breakpoints),
                  default=0.0)
    else:
        lam = max((bp.lam for bp in path.breakpoints), default=0.0)
    order_ok = path.added() == list(omp_run.order)
    passed = dev <= settings.coincidence_tol and lam < 1e-6 and order_ok
    return CoincidenceReport(passed, dev, lam, order_ok)


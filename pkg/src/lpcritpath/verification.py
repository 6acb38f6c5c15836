"""Acceptance checks on the bundled fixtures.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs a
selection of them.  The command line ``verify`` subcommand and the test
suite both go through this module, so the two always agree.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path as FsPath

import numpy as np

from .config import DEFAULT
from .critical import classify_Q, implied_lambda, is_breakpoint
from .errors import FixtureMissingError
from .model import F_p, Support, f_lambda, full_gradient, grad_F, grad_phi, hessian_K, load_instance, phi
from .scalar import (
    brute_force_global_P,
    brute_force_global_Q,
    enumerate_orthogonal_critical_points,
    lambda_bar,
    lambda_global_jump,
)
from .strategies import check_omp_coincidence, greedy_path, main_path, omp
from .tracer import verify_tangential_connection

FIXTURE_NAMES = ("ex1d", "ex2", "ex2_nonorth", "ex_p07", "ex3d", "ex5d")


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    seconds: float
    limit: float | None
    details: list = field(default_factory=list)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit:g} s)" if self.limit else ""
        return f"[{status}] {self.key} {self.title}: {self.seconds:.2f} s{lim}"

    def to_dict(self):
        return {
            "key": self.key,
            "title": self.title,
            "passed": self.passed,
            "seconds": self.seconds,
            "limit": self.limit,
            "details": [{"check": c, "passed": ok, "info": info} for c, ok, info in self.details],
        }


class _Recorder:
    def __init__(self):
        self.details = []

    def check(self, name, ok, info=""):
        self.details.append((name, bool(ok), str(info)))
        return bool(ok)

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.details)


def fixture_dir():
    return resources.files("lpcritpath") / "fixtures"


def load_fixtures(directory=None):
    base = FsPath(directory) if directory is not None else FsPath(str(fixture_dir()))
    out = {}
    for name in FIXTURE_NAMES:
        path = base / f"{name}.json"
        if not path.is_file():
            raise FixtureMissingError(f"fixture {path} not found")
        out[name] = load_instance(path)
    return out


def _close(a, b, tol):
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))) <= tol


def check_scalar_1d(fx, st):
    r = _Recorder()
    inst = fx["ex1d"]
    lb = lambda_bar(1.0, 0.5)
    r.check("lambda_bar = 2(1/3)^1.5", abs(lb - 2 * (1 / 3) ** 1.5) <= 1e-10, f"{lb!r}")
    path = main_path(inst, st)
    pts = path.points
    betas = np.array([p.beta[0] for p in pts])
    r.check("main path covers [0, 1]", abs(betas.max() - 1.0) < 1e-12 and abs(betas.min()) < 1e-12
            and path.terminal.kind == "reached-origin", f"{betas.min():.3g}..{betas.max():.3g}")
    r.check("at least 101 samples", len(pts) >= 101, len(pts))
    tps = [e.location.lam for s in path.segments for e in s.turning_points]
    r.check("turning point at lambda_bar (1e-6)", len(tps) == 1 and abs(tps[0] - lb) <= 1e-6, tps)
    lam_gl, beta_gl = lambda_global_jump(1.0, 0.5)
    r.check("lambda_gl in (0.2, 0.3)", 0.2 < lam_gl < 0.3, f"{lam_gl!r}")
    gap = abs(f_lambda(inst, [0.0], lam_gl) - f_lambda(inst, [beta_gl], lam_gl))
    r.check("f(0) = f(beta_gl) at lambda_gl (1e-9)", gap <= 1e-9, f"{gap:.2e}")
    below = brute_force_global_Q(inst, lam_gl * (1 - 1e-3), st).beta[0]
    above = brute_force_global_Q(inst, lam_gl * (1 + 1e-3), st).beta[0]
    r.check("Q oracle jumps at lambda_gl", abs(below - beta_gl) < 1e-2 and above == 0.0, f"{below:.4f} -> {above}")
    return r


def _pattern(labels):
    return "".join(labels)


def check_orthogonal_2d(fx, st):
    r = _Recorder()
    inst = fx["ex2"]
    g = greedy_path(inst, False, st)
    bps = [b.beta for b in g.breakpoints]
    r.check("greedy breakpoints {[2,0]}", len(bps) == 1 and _close(bps[0], [2, 0], 1e-6), [b.tolist() for b in bps])
    r.check("greedy endpoint [2,1]", g.terminal.kind == "reached-OLS" and _close(g.endpoint.beta, [2, 1], 1e-8))
    run = omp(inst, False, st)
    r.check("OMP steps [2,0], [2,1]", len(run.steps) == 2 and _close(run.steps[0], [2, 0], 1e-12)
            and _close(run.steps[1], [2, 1], 1e-12))
    rep = check_omp_coincidence(g, run, st)
    r.check("OMP coincidence", rep.passed, f"deviation {rep.max_deviation:.2e}")
    lam = implied_lambda(inst, bps[0], st).value if bps else np.inf
    r.check("implied lambda at breakpoint < 1e-6", lam < 1e-6, lam)
    pts = enumerate_orthogonal_critical_points(inst, 0.1)
    r.check("9 critical points at lambda=0.1", len(pts) == 9, len(pts))
    tags = {_pattern(p.labels): classify_Q(inst, p.beta, 0.1, st).tag for p in pts}
    want = {"AA": "local-min", "AC": "local-min", "CA": "local-min", "CC": "local-min", "BB": "local-max",
            "AB": "saddle", "BA": "saddle", "BC": "saddle", "CB": "saddle"}
    r.check("A/B/C pattern (one max, four min, four saddle)", tags == want, tags)
    return r


def check_greedy_3d(fx, st):
    r = _Recorder()
    inst = fx["ex3d"]
    Gq = [[Fraction(s) for s in row] for row in (("1", "-0.7", "-0.6"), ("-0.7", "1", "-0.1"), ("-0.6", "-0.1", "1"))]
    bq = [Fraction("0.2"), Fraction("0.8"), Fraction("1")]
    exact = [-sum(a * b for a, b in zip(row, bq)) for row in Gq]
    r.check("rational grad phi(0) = [0.96, -0.56, -0.8]",
            exact == [Fraction("0.96"), Fraction("-0.56"), Fraction("-0.8")], [str(x) for x in exact])
    g0 = full_gradient(inst, np.zeros(3))
    r.check("float grad phi(0) matches", _close(g0, [float(x) for x in exact], 1e-15), g0.tolist())

    mg = greedy_path(inst, True, st)
    bps = [b.beta for b in mg.breakpoints]
    published = ([0, 0, 0.8], [0, 0.6465, 0.8646])
    r.check("modified breakpoints (1e-3)", len(bps) == 2 and all(_close(a, b, 1e-3) for a, b in zip(bps, published)),
            [b.tolist() for b in bps])
    G, bs = np.array(inst.G), np.array(inst.beta_star)
    rhs = G @ bs
    ind1 = np.array([0, 0, rhs[2] / G[2, 2]])
    sol = np.linalg.solve(G[1:, 1:], rhs[1:])
    ind2 = np.array([0.0, sol[0], sol[1]])
    r.check("modified breakpoints = independent normal equations (1e-8)",
            len(bps) == 2 and _close(bps[0], ind1, 1e-8) and _close(bps[1], ind2, 1e-8))
    r.check("modified endpoint beta*", mg.terminal.kind == "reached-OLS" and _close(mg.endpoint.beta, bs, 1e-8))

    ug = greedy_path(inst, False, st)
    ubps = [b.beta for b in ug.breakpoints]
    published_u = ([-0.96, 0, 0], [-0.75, 0, 0.35])
    r.check("unmodified breakpoints (1e-3)", len(ubps) == 2 and all(_close(a, b, 1e-3) for a, b in zip(ubps, published_u)),
            [b.tolist() for b in ubps])
    r.check("unmodified path stalls near [0,0,0.8]", ug.terminal.kind == "stalled"
            and _close(ug.endpoint.beta, [0, 0, 0.8], 1e-3), f"{ug.terminal.kind} at {ug.endpoint.beta.tolist()}")
    return r


def check_greedy_5d(fx, st):
    r = _Recorder()
    inst = fx["ex5d"]
    g = greedy_path(inst, False, st)
    r.check("greedy reaches beta*", g.terminal.kind == "reached-OLS" and _close(g.endpoint.beta, inst.beta_star, 1e-8))
    r.check("activation order 1..5", g.added() == [0, 1, 2, 3, 4], [i + 1 for i in g.added()])
    rep = check_omp_coincidence(g, omp(inst, False, st), st)
    r.check("OMP coincidence", rep.passed, f"deviation {rep.max_deviation:.2e}")
    peaks = [max(p.lam for p in s.points) for s in g.segments]
    expect = [lambda_bar(abs(b), inst.p) for b in inst.beta_star]
    r.check("lambda peaks descending", all(a > b for a, b in zip(peaks, peaks[1:])), [round(x, 6) for x in peaks])
    r.check("lambda peaks = lambda_bar(|beta*_i|) (1e-6)", _close(peaks, expect, 1e-6))
    return r


def _p_oracle_jump(inst, st, c_hi, m=60):
    """Largest jump of the constrained global minimiser over a c-grid, refined by bisection."""
    cs = np.linspace(0.02, c_hi, m)
    sols = [brute_force_global_P(inst, c, st).beta for c in cs]
    gaps = [np.linalg.norm(b - a) for a, b in zip(sols, sols[1:])]
    k = int(np.argmax(gaps))
    lo, hi = cs[k], cs[k + 1]
    a, b = sols[k], sols[k + 1]
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        s = brute_force_global_P(inst, mid, st).beta
        if np.linalg.norm(s - a) < np.linalg.norm(s - b):
            lo, a = mid, s
        else:
            hi, b = mid, s
    return 0.5 * (lo + hi), a, b


def check_p07(fx, st):
    r = _Recorder()
    inst = fx["ex_p07"]
    path = main_path(inst, st)
    cs = np.array([p.c for p in path.points])
    d = np.diff(cs)
    r.check("c non-monotonic along the main path", np.any(d > 1e-12) and np.any(d < -1e-12))
    interior_max, interior_min, joint_max = [], [], []
    for s in path.segments:
        c = np.array([p.c for p in s.points])
        for i in range(1, len(c) - 1):
            if c[i] > c[i - 1] and c[i] > c[i + 1]:
                interior_max.append(s.points[i].beta.tolist())
            if c[i] < c[i - 1] and c[i] < c[i + 1]:
                interior_min.append(s.points[i].beta.tolist())
    for a, b in zip(path.segments, path.segments[1:]):
        if a.points[-2].c < a.points[-1].c and b.points[1].c < b.points[0].c:
            joint_max.append(a.points[-1].beta.tolist())
    r.check("strict local max of c in a segment interior", bool(interior_max),
            f"segment-interior maxima {interior_max}; segment-interior minima {np.round(interior_min, 4).tolist()}; "
            f"strict maxima at segment joints {joint_max}")

    c_star, left, right = _p_oracle_jump(inst, st, F_p(inst, inst.beta_star) * 0.99)
    jump = float(np.linalg.norm(right - left))
    r.check("P oracle jump exceeds 0.5", jump > 0.5,
            f"jump {jump:.4f} at c = {c_star:.8f}: {left.round(4).tolist()} -> {right.round(4).tolist()}")
    r.check("P oracle discontinuous (jump exceeds 0.1)", jump > 0.1, f"{jump:.4f}")

    seg = path.segments[0]
    i_sq = int(np.argmin([p.c for p in seg.points]))
    portion = [p for p in seg.points[1:i_sq] if p.class_P != "degenerate"]
    tp = seg.turning_points[0].location.beta if seg.turning_points else None
    p_min = all(p.class_P == "local-min" for p in portion)
    q_non = [p for p in portion if p.class_Q not in ("local-min", "degenerate")]
    r.check("P local-min from the c-minimum to beta*", p_min and len(portion) > 0, f"{len(portion)} points")
    r.check("Q non-min on part of that portion", len(q_non) > 0,
            f"{len(q_non)} points, between the c-minimum and the turning point {None if tp is None else tp.round(4).tolist()}")
    return r


def _all_paths(fx, st):
    out = []
    for name, inst in fx.items():
        out.append((name, "main", inst, main_path(inst, st)))
        out.append((name, "greedy", inst, greedy_path(inst, False, st)))
        out.append((name, "greedy-modified", inst, greedy_path(inst, True, st)))
    return out


def check_structural(fx, st, paths=None):
    r = _Recorder()
    paths = _all_paths(fx, st) if paths is None else paths

    # (a) global Q solutions are global P solutions at their own c; not conversely
    for name in ("ex1d", "ex2"):
        inst = fx[name]
        worst, all_min = 0.0, True
        nonzero_norms = []
        for lam in np.logspace(-4, 1, 16):
            bq = brute_force_global_Q(inst, lam, st).beta
            if np.any(bq != 0):
                nonzero_norms.append(np.linalg.norm(bq))
                all_min &= classify_Q(inst, bq, lam, st).tag == "local-min"
            bp = brute_force_global_P(inst, F_p(inst, bq), st).beta
            worst = max(worst, float(np.max(np.abs(bp - bq))))
        r.check(f"(a) {name}: Q-global is P-global at its c (1e-6)", worst <= 1e-6, f"{worst:.2e}")
        r.check(f"(a) {name}: Q-global points are local minima", all_min)
        small = brute_force_global_P(inst, 1e-3, st).beta
        r.check(f"(a) {name}: small-c P solution is no Q solution", 0 < np.linalg.norm(small) < min(nonzero_norms),
                f"|beta_P(1e-3)| = {np.linalg.norm(small):.3e}, smallest nonzero Q norm {min(nonzero_norms):.3f}")

    # (b) origin: Q jumps, P is continuous
    inst = fx["ex1d"]
    lam_gl, beta_gl = lambda_global_jump(1.0, inst.p)
    left = np.linalg.norm(brute_force_global_Q(inst, lam_gl * (1 - 1e-6), st).beta)
    right = np.linalg.norm(brute_force_global_Q(inst, lam_gl * (1 + 1e-6), st).beta)
    r.check("(b) Q path jumps by at least beta_gl/2", left - right >= beta_gl / 2, f"{left:.4f} -> {right:.4f}")
    norms = [np.linalg.norm(brute_force_global_P(inst, c, st).beta) for c in 10.0 ** -np.arange(1, 9)]
    r.check("(b) P path continuous at the origin",
            all(a > b for a, b in zip(norms, norms[1:])) and norms[-1] < 1e-6, f"{norms[-1]:.2e}")

    # (c) breakpoints solve the restricted normal equations with lambda = 0
    worst_lam, worst_g, bad = 0.0, 0.0, []
    for name, kind, inst, path in paths:
        for bp in path.breakpoints:
            lam = abs(implied_lambda(inst, bp.beta, st).value)
            gI = grad_phi(inst, bp.beta, bp.support)
            gmax = float(np.max(np.abs(gI))) if gI.size else 0.0
            worst_lam, worst_g = max(worst_lam, lam), max(worst_g, gmax)
            if not (lam < 1e-6 and gmax < 1e-8 and is_breakpoint(inst, bp.beta, settings=st)):
                bad.append(f"{name}/{kind} {bp.beta.tolist()}")
    r.check("(c) breakpoint conditions at every breakpoint", not bad,
            f"max lambda {worst_lam:.1e}, max restricted gradient {worst_g:.1e}; failures {bad}")

    # (d) tangential connection
    worst, bad = 0.0, []
    for name, kind, inst, path in paths:
        for a, b in zip(path.segments, path.segments[1:]):
            rep = verify_tangential_connection(a, b, st)
            worst = max(worst, rep.angle, rep.extrapolated_angle)
            if not rep.passed:
                bad.append(f"{name}/{kind} at {rep.breakpoint.tolist()}")
    r.check("(d) tangency angle < 1e-3 rad at every breakpoint", not bad, f"worst {worst:.2e} rad; failures {bad}")

    # (e) det K changes sign only at flagged turning points
    bad, flips_total = [], 0
    for name, kind, inst, path in paths:
        for k, seg in enumerate(path.segments):
            flips, marked = _det_flips(seg)
            flips_total += len(flips)
            if flips != marked:
                bad.append(f"{name}/{kind} segment {k}: flips {flips} turning points {marked}")
    r.check("(e) det K sign changes only at turning points", not bad, f"{flips_total} sign changes; {bad}")

    # (f) derivatives against central differences
    r.check("(f) gradient / Hessian finite differences", *_fd_suite(fx))
    return r


def _det_flips(seg):
    """Indices (into interior points) where det K changes sign, and of turning points."""
    pts = [p for p in seg.points if p.support == seg.support and p.det_K is not None]
    tp_ids = {id(e.location) for e in seg.turning_points}
    flips, marked = [], []
    prev_sign, prev_i = 0, None
    for i, p in enumerate(pts):
        if id(p) in tp_ids:
            marked.append(i)
            continue
        sgn = int(np.sign(p.det_K))
        if sgn == 0:
            continue
        if prev_sign and sgn != prev_sign:
            # attribute the flip to the turning point between, if any
            between = [j for j in marked if prev_i < j < i]
            flips.append(between[0] if between else i)
        prev_sign, prev_i = sgn, i
    return flips, marked


def _fd_suite(fx, seed=20240531):
    rng = np.random.default_rng(seed)
    worst_g = worst_h = 0.0
    for inst in fx.values():
        for _ in range(5):
            beta = rng.uniform(0.2, 1.5, inst.n) * rng.choice([-1.0, 1.0], inst.n)
            lam = float(rng.uniform(0.0, 1.0))
            sup = Support.full(inst.n)

            def f(b):
                return phi(inst, b) + lam * F_p(inst, b)

            def grad(b):
                return grad_phi(inst, b, sup) + lam * grad_F(inst, b, sup)

            h = 1e-6
            E = np.eye(inst.n)
            fd_g = np.array([(f(beta + h * e) - f(beta - h * e)) / (2 * h) for e in E])
            g = grad(beta)
            worst_g = max(worst_g, float(np.max(np.abs(fd_g - g)) / (1 + np.max(np.abs(g)))))
            h2 = 1e-5
            fd_H = np.array([(grad(beta + h2 * e) - grad(beta - h2 * e)) / (2 * h2) for e in E])
            K = hessian_K(inst, beta, lam, sup)
            worst_h = max(worst_h, float(np.max(np.abs(fd_H - K)) / (1 + np.max(np.abs(K)))))
    return worst_g < 1e-6 and worst_h < 1e-5, f"gradient {worst_g:.1e}, Hessian {worst_h:.1e}"


CHECKS = {
    "1": ("1d fixture: threshold, turning point, global jump", check_scalar_1d, 1.0, ("scalar", "1d")),
    "2": ("2D orthogonal fixture: greedy, OMP, enumeration", check_orthogonal_2d, 5.0, ("greedy", "omp", "2d")),
    "3": ("3D fixture: modified and unmodified greedy", check_greedy_3d, 10.0, ("greedy", "3d")),
    "4": ("5D fixture: greedy, OMP, lambda peaks", check_greedy_5d, 10.0, ("greedy", "omp", "5d")),
    "5": ("p=0.7 fixture: c profile, P oracle jump, P/Q classes", check_p07, 30.0, ("p07", "oracle")),
    "6": ("structural property suite", check_structural, 120.0,
          ("structural", "breakpoints", "tangency", "turning-points", "derivatives")),
}


def run_checks(only=None, fixtures=None, settings=DEFAULT):
    """Run the selected acceptance checks.

    ``only`` is an iterable of check keys (``"1"`` .. ``"6"``) or tags
    (``"breakpoints"``, ``"greedy"``, ...); None runs everything.
    """
    fx = load_fixtures(fixtures)
    wanted = None if not only else set(only)
    results = []
    for key, (title, fn, limit, tags) in CHECKS.items():
        if wanted is not None and key not in wanted and not wanted & set(tags):
            continue
        t0 = time.perf_counter()
        rec = fn(fx, settings)
        dt = time.perf_counter() - t0
        passed = rec.passed and dt < limit
        rec.details.append(("runtime", dt < limit, f"{dt:.2f} s < {limit:g} s"))
        results.append(CheckResult(key, title, passed, dt, limit, rec.details))
    return results

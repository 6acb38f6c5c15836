"""Property-based checks with hypothesis."""

import json

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from lpcritpath import io as pio
from lpcritpath.config import DEFAULT, parse_overrides
from lpcritpath.critical import criticality_residual, residual_scale
from lpcritpath.errors import ConfigError
from lpcritpath.model import PathPoint, ProblemInstance, psi_p, psi_p_prime, psi_p_second, restricted_ols
from lpcritpath.scalar import (
    beta_bar,
    enumerate_orthogonal_critical_points,
    lambda_bar,
    scalar_critical_points,
)
from lpcritpath.strategies import greedy_path, main_path

ps = st.floats(0.1, 0.9)
targets = st.floats(0.05, 20.0) | st.floats(-20.0, -0.05)


@given(p=ps, b=st.floats(0.05, 10.0) | st.floats(-10.0, -0.05))
def test_psi_derivatives_match_finite_differences(p, b):
    h = 1e-6 * abs(b)
    d1 = (psi_p(p, b + h) - psi_p(p, b - h)) / (2 * h)
    d2 = (psi_p_prime(p, b + h) - psi_p_prime(p, b - h)) / (2 * h)
    assert d1 == pytest.approx(psi_p_prime(p, b), rel=1e-6)
    assert d2 == pytest.approx(psi_p_second(p, b), rel=1e-5)


@given(p=ps, t=targets, frac=st.floats(0.0, 2.0))
def test_scalar_roots(p, t, frac):
    lam = frac * lambda_bar(t, p)
    crit = scalar_critical_points(t, lam, p)
    if frac < 0.999:
        # the small root underflows for lambda near zero
        if lam == 0:
            assert len(crit.roots) == 1
        elif (lam / abs(t)) ** (1 / (1 - p)) > 1e-300:
            assert len(crit.roots) == 2
    elif frac > 1.001:
        assert crit.roots == ()
    for r in crit.roots:
        assert np.sign(r) == np.sign(t) and abs(r) <= abs(t)
        resid = r - t + lam * np.sign(r) * abs(r) ** (p - 1)
        assert abs(resid) <= 1e-9 * (1 + abs(t))
    if len(crit.roots) == 2:
        small, large = sorted(crit.roots, key=abs)
        assert abs(small) < abs(beta_bar(t, p)) < abs(large)


@given(p=ps, t=targets)
def test_double_root_conditions(p, t):
    lam, b = lambda_bar(t, p), beta_bar(t, p)
    # first and second derivative of the scalar objective vanish together
    g1 = b - t + lam * np.sign(b) * abs(b) ** (p - 1)
    g2 = 1 - (1 - p) * lam * abs(b) ** (p - 2)
    assert abs(g1) <= 1e-10 * (1 + abs(t))
    assert abs(g2) <= 1e-10


@given(p=ps, bs=st.lists(targets, min_size=1, max_size=3), frac=st.floats(0.0, 1.5))
def test_enumerated_points_are_critical(p, bs, frac):
    inst = ProblemInstance.from_gram(np.eye(len(bs)), bs, p)
    lam = frac * max(lambda_bar(b, p) for b in bs)
    pts = enumerate_orthogonal_critical_points(inst, lam)
    counts = [1 + len(scalar_critical_points(b, lam, p).roots) for b in bs]
    assert lam > 0 or counts == [2] * len(bs)
    assert len(pts) == int(np.prod(counts))
    for pt in pts:
        r = criticality_residual(inst, pt.beta, lam)
        assert np.all(np.abs(r) <= 1e-9 * residual_scale(inst, pt.beta))


names = st.text("abcdefghijklmnopqrstuvwxyz_", min_size=1, max_size=12)


@given(key=names)
def test_unknown_settings_rejected(key):
    assume(not hasattr(DEFAULT, key))
    with pytest.raises(ConfigError):
        DEFAULT.with_overrides(parse_overrides([f"{key}=1"]))


@given(v=st.floats(1e-8, 1.0))
def test_known_setting_override(v):
    s = DEFAULT.with_overrides(parse_overrides([f"step_max={v!r}"]))
    assert s.step_max == v and s.zero_tol == DEFAULT.zero_tol


finite = st.floats(-1e6, 1e6, allow_subnormal=True)


@given(beta=st.lists(finite, min_size=1, max_size=5), lam=st.floats(0, 1e3), p=ps)
def test_pathpoint_json_round_trip(beta, lam, p):
    pt = PathPoint.at(p, beta, lam)
    pt.arclength, pt.det_K = lam / 3, (None if lam > 500 else -lam)
    back = pio.point_from_dict(json.loads(json.dumps(pio.point_to_dict(pt))))
    assert np.array_equal(back.beta, pt.beta) and back.lam == pt.lam and back.c == pt.c
    assert back.support == pt.support and back.det_K == pt.det_K and back.arclength == pt.arclength


@st.composite
def near_identity(draw):
    n = draw(st.integers(1, 3))
    E = np.array(draw(st.lists(st.floats(-0.2, 0.2), min_size=n * n, max_size=n * n))).reshape(n, n)
    G = np.eye(n) + 0.5 * (E + E.T) / n
    mags = draw(st.lists(st.floats(0.3, 3.0), min_size=n, max_size=n, unique=True))
    signs = draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=n, max_size=n))
    return ProblemInstance.from_gram(G, np.array(mags) * signs, draw(st.sampled_from([0.3, 0.5, 0.7])))


def _path_invariants(path, inst):
    for pt in path.points:
        assert pt.lam >= -1e-12
        r = criticality_residual(inst, pt.beta, max(pt.lam, 0.0))
        assert np.all(np.abs(r) <= 1e-6 * residual_scale(inst, pt.beta))
    for bp in path.breakpoints:
        assert np.allclose(bp.beta, restricted_ols(inst, bp.support), atol=1e-8)


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(inst=near_identity())
def test_random_main_path(inst):
    path = main_path(inst)
    assume(path.terminal.kind not in ("branch-point",))
    assert path.terminal.kind == "reached-origin"
    np.testing.assert_array_equal(path.points[0].beta, inst.beta_star)
    _path_invariants(path, inst)


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(inst=near_identity())
def test_random_greedy_path(inst):
    path = greedy_path(inst)
    assume(path.terminal.kind not in ("branch-point",))
    _path_invariants(path, inst)
    if path.terminal.kind == "reached-OLS":
        np.testing.assert_allclose(path.endpoint.beta, inst.beta_star, atol=1e-8)

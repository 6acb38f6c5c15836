import numpy as np
import pytest

from lpcritpath import strategies
from lpcritpath.errors import VariantMismatchError
from lpcritpath.model import ProblemInstance, restricted_ols
from lpcritpath.scalar import lambda_bar, scalar_critical_points
from lpcritpath.tracer import tangent_direction


def _bps(path):
    return [b.beta for b in path.breakpoints]


def test_main_path_example2(paths):
    path = paths["ex2", "main"]
    assert path.terminal.kind == "reached-origin"
    np.testing.assert_allclose(_bps(path), [[2.0, 0.0]], atol=1e-12)
    assert path.active_order == [("drop", 1), ("drop", 0)]


def test_main_path_1d(paths):
    path = paths["ex1d", "main"]
    assert len(path.segments) == 1 and not path.breakpoints
    betas = [p.beta[0] for p in path.points]
    assert max(betas) == 1.0 and min(betas) == 0.0


def test_main_path_3d_is_reversed_modified_greedy(paths):
    main, mg = paths["ex3d", "main"], paths["ex3d", "greedy-modified"]
    np.testing.assert_allclose(_bps(main), _bps(mg)[::-1], atol=1e-12)
    np.testing.assert_allclose(_bps(main), [[0, 64 / 99, 428 / 495], [0, 0, 0.8]], atol=1e-12)


def test_greedy_3d_variants(paths):
    g = paths["ex3d", "greedy"]
    np.testing.assert_allclose(_bps(g), [[-0.96, 0, 0], [-0.75, 0, 0.35]], atol=1e-12)
    assert g.terminal.kind == "stalled"
    np.testing.assert_allclose(g.endpoint.beta, [0, 0, 0.8], atol=1e-12)
    assert set(g.terminal.indices) == {0, 1}
    mg = paths["ex3d", "greedy-modified"]
    assert mg.added() == [2, 1, 0]
    assert mg.terminal.kind == "reached-OLS"


def test_support_monotonicity(paths):
    for (name, kind), path in paths.items():
        sizes = [len(s.support) for s in path.segments]
        if kind == "main":
            assert all(a > b for a, b in zip(sizes, sizes[1:])), name
        elif path.terminal.kind != "stalled":
            assert all(a < b for a, b in zip(sizes, sizes[1:])), name
        for a, b in zip(path.segments, path.segments[1:]):
            assert np.array_equal(a.points[-1].beta, b.points[0].beta)
            assert len(set(a.support.indices) ^ set(b.support.indices)) == 1


def test_breakpoints_are_restricted_ols(paths):
    for path in paths.values():
        for bp in path.breakpoints:
            np.testing.assert_allclose(bp.beta, restricted_ols(path.instance, bp.support), atol=1e-8)
            assert bp.lam == 0.0


def test_example2_greedy_is_union_of_branch_combinations(paths):
    path = paths["ex2", "greedy"]
    for p in path.points:
        if p.lam <= 0:
            continue
        for coord, t in enumerate((2.0, 1.0)):
            options = (0.0,) + scalar_critical_points(t, p.lam, 0.5).roots
            assert min(abs(p.beta[coord] - o) for o in options) < 1e-6


def test_greedy_5d_peaks(paths, ex5d):
    g = paths["ex5d", "greedy"]
    peaks = [max(p.lam for p in s.points) for s in g.segments]
    expect = [lambda_bar(abs(b), 0.5) for b in ex5d.beta_star]
    np.testing.assert_allclose(peaks, expect, atol=1e-9)


def test_modified_filter_excludes_zero_ols_coordinate():
    inst = ProblemInstance.from_gram([[1, 0.3], [0.3, 1]], [1.0, 0.0], 0.5)
    run = strategies.omp(inst, modified=True)
    assert run.order == [0]
    unmod = strategies.omp(inst)
    assert unmod.order == [0] and unmod.status == "reached-OLS"


def test_argmax_ties_to_smallest_index():
    inst = ProblemInstance.from_gram(np.eye(3), [1.0, -1.0, 1.0], 0.5)
    assert strategies.omp(inst).order == [0, 1, 2]
    d = strategies.minkowskian_direction(inst, np.zeros(3))
    np.testing.assert_array_equal(d.vector, [1.0, 0.0, 0.0])


def test_omp_examples(ex2, ex3d, ex1d):
    np.testing.assert_allclose(strategies.omp(ex2).steps, [[2, 0], [2, 1]])
    run = strategies.omp(ex3d, modified=True)
    np.testing.assert_allclose(run.steps, [[0, 0, 0.8], [0, 64 / 99, 428 / 495], [0.2, 0.8, 1.0]], atol=1e-14)
    assert strategies.omp(ex1d).steps[0].tolist() == [1.0]


def test_omp_empty_candidates_status():
    # only a negative-product index would qualify, so the modified run stops immediately
    inst = ProblemInstance.from_gram([[1, 0.9], [0.9, 1]], [1.0, 0.5], 0.5)
    run = strategies.omp(inst, modified=True)
    assert run.status in ("reached-OLS", "no-candidates")
    if run.status == "no-candidates":
        assert len(run.steps) < 2


def test_coincidence_checks(paths, ex2, ex5d):
    g = paths["ex2", "greedy"]
    assert strategies.check_omp_coincidence(g, strategies.omp(ex2)).passed
    g5 = paths["ex5d", "greedy"]
    assert strategies.check_omp_coincidence(g5, strategies.omp(ex5d)).passed
    run = strategies.omp(ex5d)
    run.steps = run.steps[::-1]
    assert not strategies.check_omp_coincidence(g5, run).passed
    with pytest.raises(VariantMismatchError):
        strategies.check_omp_coincidence(g, strategies.omp(ex2, modified=True))


def test_minkowskian_origin_and_breakpoint(ex3d, ex2):
    d = strategies.minkowskian_direction(ex3d, np.zeros(3))
    assert d.regime == "origin"
    np.testing.assert_array_equal(d.vector, [-1.0, 0.0, 0.0])
    d = strategies.minkowskian_direction(ex2, [2.0, 0.0])
    assert d.regime == "breakpoint"
    np.testing.assert_array_equal(d.vector, [0.0, 1.0])
    d = strategies.minkowskian_direction(ex2, [2.0, 1.0])
    assert d.regime == "terminal" and not np.any(d.vector)


def test_minkowskian_matches_tangent_on_greedy_segment(paths, ex2n):
    seg = paths["ex2_nonorth", "greedy"].segments[1]
    peak = int(np.argmax([p.lam for p in seg.points]))
    checked = 0
    for p in seg.points[peak + 3:-3]:
        if p.support != seg.support:
            continue
        d = strategies.minkowskian_direction(ex2n, p.beta)
        if d.regime != "interior":
            continue
        t, _ = tangent_direction(ex2n, p)
        t = t / np.linalg.norm(t)
        cos = abs(float(d.vector[list(p.support)] @ t))
        assert np.arccos(min(1.0, cos)) < 1e-6
        checked += 1
    assert checked > 10


def test_minkowskian_indefinite_regime(paths, ex2):
    seg = paths["ex2", "greedy"].segments[1]
    peak = int(np.argmax([p.lam for p in seg.points]))
    p = seg.points[peak // 2]
    d = strategies.minkowskian_direction(ex2, p.beta)
    assert d.regime == "indefinite-K" and d.pseudo_norm_value is None


def test_minkowskian_scale_invariance(ex3d):
    scaled = ProblemInstance.from_gram(3.7 * np.asarray(ex3d.G), ex3d.beta_star, ex3d.p)
    for beta in (np.zeros(3), np.array([0.0, 0.0, 0.8])):
        a = strategies.minkowskian_direction(ex3d, beta)
        b = strategies.minkowskian_direction(scaled, beta)
        np.testing.assert_array_equal(a.vector, b.vector)


def test_every_point_critical_to_1e_8(paths):
    from lpcritpath.critical import criticality_residual

    for key, path in paths.items():
        for p in path.points:
            r = criticality_residual(path.instance, p.beta, max(p.lam, 0.0))
            assert np.all(np.abs(r) < 1e-8), key

import json

import numpy as np
import pytest

from lpcritpath import model
from lpcritpath.errors import (
    DimensionMismatchError,
    InstanceParseError,
    NotPositiveDefiniteError,
    PenaltyDerivativeAtZero,
    ZeroComponentError,
)
from lpcritpath.model import ProblemInstance, Support


def test_from_gram_rejects_bad_input():
    with pytest.raises(NotPositiveDefiniteError):
        ProblemInstance.from_gram([[1, 2], [2, 1]], [1, 1], 0.5)
    with pytest.raises(DimensionMismatchError):
        ProblemInstance.from_gram(np.eye(2), [1, 2, 3], 0.5)
    with pytest.raises(InstanceParseError):
        ProblemInstance.from_gram(np.eye(2), [1, 2], 1.0)
    with pytest.raises(InstanceParseError):
        ProblemInstance.from_gram([[1, 0.1], [0.2, 1]], [1, 2], 0.5)


def test_from_design_exact_fit():
    # X is (n, d): two coefficients, three observations
    inst = ProblemInstance.from_design([[1, 0, 1], [0, 1, 1]], [1, 2, 3], 0.5)
    np.testing.assert_allclose(inst.G, [[2, 1], [1, 2]])
    np.testing.assert_allclose(inst.beta_star, [1, 2], atol=1e-14)
    assert inst.gamma == pytest.approx(0.0, abs=1e-13)


def test_from_design_gamma_keeps_phi_equal_to_half_rss():
    X = np.array([[1, 0, 1], [0, 1, 1]], dtype=float)
    y = np.array([1, 2, 4], dtype=float)
    inst = ProblemInstance.from_design(X, y, 0.5)
    np.testing.assert_allclose(inst.beta_star, [4 / 3, 7 / 3], atol=1e-14)
    assert inst.gamma == pytest.approx(1 / 6, abs=1e-14)
    for beta in ([0.0, 0.0], [0.3, -1.2], [2.0, 1.0]):
        rss = 0.5 * np.sum((y - X.T @ beta) ** 2)
        assert model.phi(inst, beta) == pytest.approx(rss, abs=1e-12)


def test_instance_files(tmp_path):
    good = tmp_path / "g.json"
    good.write_text(json.dumps({"G": [[1, 0], [0, 1]], "beta_star": [2, 1], "p": 0.5}))
    inst = model.load_instance(good)
    np.testing.assert_array_equal(inst.beta_star, [2, 1])
    cases = [
        "not json",
        json.dumps({"G": [[1]], "beta_star": [1]}),
        json.dumps({"G": [[1]], "beta_star": [1], "X": [[1]], "y": [1], "p": 0.5}),
        json.dumps({"X": [[1, 1]], "y": [1, 2], "gamma": 3, "p": 0.5}),
        json.dumps({"G": [["a"]], "beta_star": [1], "p": 0.5}),
    ]
    for k, text in enumerate(cases):
        f = tmp_path / f"bad{k}.json"
        f.write_text(text)
        with pytest.raises((InstanceParseError, DimensionMismatchError)):
            model.load_instance(f)


def test_phi_and_penalty_values(ex2):
    assert model.phi(ex2, [0, 0]) == pytest.approx(2.5)
    assert model.F_p(ex2, [1, 4]) == pytest.approx(2 * (1 + 2))
    assert model.f_lambda(ex2, [1, 4], 0.5) == pytest.approx(0.5 * (1 + 9) + 0.5 * 6)
    with pytest.raises(ValueError):
        model.f_lambda(ex2, [1, 4], -0.1)


def test_penalty_derivatives():
    assert model.psi_p_prime(0.5, 4.0) == pytest.approx(0.5)
    assert model.psi_p_prime(0.5, -4.0) == pytest.approx(-0.5)
    assert model.psi_p_second(0.5, 4.0) == pytest.approx(-0.5 * 4.0**-1.5)
    with pytest.raises(PenaltyDerivativeAtZero):
        model.psi_p_prime(0.5, 0.0)
    with pytest.raises(PenaltyDerivativeAtZero):
        model.psi_p_second(0.5, [1.0, 0.0])


def test_hessian_K(ex1d, ex2):
    np.testing.assert_allclose(model.hessian_K(ex1d, [1.0], 0.2), [[0.9]])
    np.testing.assert_allclose(model.hessian_K(ex2, [1.0, 1.0], 0.0), np.eye(2))
    with pytest.raises(ZeroComponentError):
        model.hessian_K(ex2, [1.0, 0.0], 0.1, Support((0, 1), 2))


def test_restricted_ols_example_3d(ex3d):
    np.testing.assert_allclose(model.restricted_ols(ex3d, Support((2,), 3)), [0, 0, 0.8], atol=1e-15)
    np.testing.assert_allclose(model.restricted_ols(ex3d, Support((1, 2), 3)), [0, 64 / 99, 428 / 495], atol=1e-15)
    np.testing.assert_allclose(model.restricted_ols(ex3d, Support((0, 2), 3)), [-0.75, 0, 0.35], atol=1e-15)
    np.testing.assert_allclose(model.restricted_ols(ex3d, Support.full(3)), [0.2, 0.8, 1.0], atol=1e-14)


def test_restricted_ols_singular_block():
    X = np.array([[1.0, 1.0], [1.0, 1.0]])
    inst = ProblemInstance.from_design(X, [1.0, 2.0], 0.5)
    assert not inst.positive_definite
    np.testing.assert_allclose(model.ols_solution(inst), [0.75, 0.75])
    with pytest.raises(NotPositiveDefiniteError):
        model.restricted_ols(inst, Support.full(2))


def test_support_type():
    s = Support.of([0.0, 2.0, -1e-12, 3.0])
    assert s.indices == (1, 3)
    assert s.complement().indices == (0, 2)
    assert s.add(0).indices == (0, 1, 3)
    assert s.remove(3).indices == (1,)
    assert 3 in s and 2 not in s and len(s) == 2
    with pytest.raises(ValueError):
        Support((2, 1), 3)
    with pytest.raises(ValueError):
        Support((0, 5), 3)

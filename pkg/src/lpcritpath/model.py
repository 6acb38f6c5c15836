"""Problem data, objective and penalty evaluation, and their derivatives.

The least-squares term is kept in its quadratic form

    phi(beta) = 1/2 (beta - beta*)^T G (beta - beta*) + gamma

and the penalty is ``F_p(beta) = sum_i psi_p(beta_i)`` with
``psi_p(b) = |b|^p / p``.  Indices are 0-based throughout the Python API.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import DEFAULT
from .errors import (
    DimensionMismatchError,
    InstanceParseError,
    NotPositiveDefiniteError,
    PenaltyDerivativeAtZero,
    ZeroComponentError,
)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def is_positive_definite(M):
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return True
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return False
    # a singular PSD matrix can slip through with a rounding-level pivot
    d = np.diag(L)
    return bool(np.all(np.isfinite(L)) and d.min() ** 2 > 1e-12 * d.max() ** 2)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Immutable least-squares instance.

    Build one with :meth:`from_gram` (the ``(G, beta*)`` form) or
    :meth:`from_design` (the ``(X, y)`` form, with ``G = X X^T`` and ``X``
    of shape ``(n, d)``).
    """

    G: np.ndarray
    beta_star: np.ndarray
    p: float
    gamma: float = 0.0
    X: np.ndarray | None = None
    y: np.ndarray | None = None
    positive_definite: bool = field(default=True)

    @property
    def n(self):
        return self.G.shape[0]

    @property
    def d(self):
        return None if self.y is None else self.y.shape[0]

    @classmethod
    def from_gram(cls, G, beta_star, p, gamma=0.0):
        G = np.atleast_2d(np.asarray(G, dtype=float))
        beta_star = np.atleast_1d(np.asarray(beta_star, dtype=float))
        _check_p(p)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatchError(f"G must be square, got shape {G.shape}")
        if beta_star.shape != (G.shape[0],):
            raise DimensionMismatchError(
                f"beta_star has shape {beta_star.shape}, expected ({G.shape[0]},)"
            )
        _check_symmetric(G)
        if not is_positive_definite(G):
            raise NotPositiveDefiniteError("G is not positive definite")
        return cls(G=_frozen(G), beta_star=_frozen(beta_star), p=float(p), gamma=float(gamma))

    @classmethod
    def from_design(cls, X, y, p):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        _check_p(p)
        if X.ndim != 2 or y.ndim != 1 or X.shape[1] != y.shape[0]:
            raise DimensionMismatchError(
                f"X must be (n, d) with d = len(y); got X {X.shape}, y {y.shape}"
            )
        G = X @ X.T
        G = 0.5 * (G + G.T)
        pd = is_positive_definite(G)
        if pd:
            beta_star = np.linalg.solve(G, X @ y)
        else:
            # min-norm OLS point, (X^T)^+ y
            beta_star = np.linalg.pinv(X.T) @ y
        resid = G @ beta_star - X @ y
        if np.linalg.norm(resid) > 1e-10 * max(1.0, np.linalg.norm(X @ y)):
            raise NotPositiveDefiniteError("normal equations could not be solved accurately")
        gamma = 0.5 * (y @ y - beta_star @ G @ beta_star)
        return cls(
            G=_frozen(G),
            beta_star=_frozen(beta_star),
            p=float(p),
            gamma=float(gamma),
            X=_frozen(X),
            y=_frozen(y),
            positive_definite=pd,
        )

    def to_dict(self):
        out = {"p": self.p}
        if self.X is not None:
            out["X"] = self.X.tolist()
            out["y"] = self.y.tolist()
        else:
            out["G"] = self.G.tolist()
            out["beta_star"] = self.beta_star.tolist()
            if self.gamma:
                out["gamma"] = self.gamma
        return out


def _check_p(p):
    if not isinstance(p, (int, float)) or not 0.0 < float(p) < 1.0:
        raise InstanceParseError(f"p must be a number in (0, 1), got {p!r}")


def _check_symmetric(G):
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.T)) > 1e-12 * scale:
        raise InstanceParseError("G is not symmetric")


def load_instance(path):
    """Read an instance JSON file.

    The object must carry ``p`` and either ``X`` + ``y`` or ``G`` +
    ``beta_star`` (optionally ``gamma``).
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InstanceParseError(f"cannot read instance {path}: {exc}") from exc
    return instance_from_dict(data)


def instance_from_dict(data):
    if not isinstance(data, dict):
        raise InstanceParseError("instance must be a JSON object")
    if "p" not in data:
        raise InstanceParseError("instance is missing 'p'")
    has_xy = "X" in data or "y" in data
    has_g = "G" in data or "beta_star" in data
    if has_xy == has_g:
        raise InstanceParseError("instance needs exactly one of (X, y) or (G, beta_star)")
    try:
        if has_xy:
            if "X" not in data or "y" not in data:
                raise InstanceParseError("both 'X' and 'y' are required")
            if "gamma" in data:
                raise InstanceParseError("'gamma' is derived from (X, y) and may not be given")
            X = np.array(data["X"], dtype=float)
            y = np.array(data["y"], dtype=float)
            return ProblemInstance.from_design(X, y, data["p"])
        if "G" not in data or "beta_star" not in data:
            raise InstanceParseError("both 'G' and 'beta_star' are required")
        G = np.array(data["G"], dtype=float)
        beta_star = np.array(data["beta_star"], dtype=float)
        gamma = float(data.get("gamma", 0.0))
    except (TypeError, ValueError) as exc:
        raise InstanceParseError(f"non-numeric instance data: {exc}") from exc
    if G.ndim == 0 or beta_star.ndim != 1:
        raise DimensionMismatchError("G must be a matrix and beta_star a vector")
    return ProblemInstance.from_gram(G, beta_star, data["p"], gamma)


@dataclass(frozen=True)
class Support:
    """Sorted set of active indices out of ``range(n)``."""

    indices: tuple
    n: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"support indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise ValueError(f"support indices out of range for n={self.n}: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, beta, zero_tol=DEFAULT.zero_tol):
        beta = np.asarray(beta, dtype=float)
        return cls(tuple(np.flatnonzero(np.abs(beta) >= zero_tol)), beta.shape[0])

    @classmethod
    def full(cls, n):
        return cls(tuple(range(n)), n)

    def complement(self):
        active = set(self.indices)
        return Support(tuple(i for i in range(self.n) if i not in active), self.n)

    def add(self, i):
        return Support(tuple(sorted(set(self.indices) | {int(i)})), self.n)

    def remove(self, *idx):
        drop = {int(i) for i in idx}
        return Support(tuple(i for i in self.indices if i not in drop), self.n)

    @property
    def array(self):
        return np.array(self.indices, dtype=int)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return int(i) in self.indices


@dataclass
class PathPoint:
    """A critical point together with its lambda, penalty level and tags."""

    beta: np.ndarray
    lam: float
    c: float
    support: Support
    class_Q: str = ""
    class_P: str = ""
    arclength: float = 0.0
    det_K: float | None = None

    @classmethod
    def at(cls, inst, beta, lam, zero_tol=DEFAULT.zero_tol, **kw):
        beta = np.array(beta, dtype=float)
        beta[np.abs(beta) < zero_tol] = 0.0
        return cls(beta=beta, lam=float(lam), c=F_p(inst, beta), support=Support.of(beta, zero_tol), **kw)


def _support_array(inst, beta, support):
    if support is None:
        return Support.of(beta).array
    if isinstance(support, Support):
        return support.array
    return np.asarray(support, dtype=int)


def _p(inst):
    return inst.p if isinstance(inst, ProblemInstance) else float(inst)


def phi(inst, beta):
    r = np.asarray(beta, dtype=float) - inst.beta_star
    return 0.5 * float(r @ inst.G @ r) + inst.gamma


def full_gradient(inst, beta):
    return inst.G @ (np.asarray(beta, dtype=float) - inst.beta_star)


def grad_phi(inst, beta, support=None):
    """Gradient of phi restricted to ``support`` (defaults to ``supp(beta)``)."""
    idx = _support_array(inst, beta, support)
    r = np.asarray(beta, dtype=float) - inst.beta_star
    return inst.G[idx] @ r


def psi_p(inst, b):
    p = _p(inst)
    return np.abs(b) ** p / p


def _require_nonzero(b):
    b = np.asarray(b, dtype=float)
    if np.any(b == 0.0):
        raise PenaltyDerivativeAtZero("psi_p derivative is unbounded at 0")
    return b


def psi_p_prime(inst, b):
    b = _require_nonzero(b)
    return np.sign(b) * np.abs(b) ** (_p(inst) - 1.0)


def psi_p_second(inst, b):
    p = _p(inst)
    b = _require_nonzero(b)
    return -(1.0 - p) * np.abs(b) ** (p - 2.0)


def F_p(inst, beta):
    return float(np.sum(psi_p(inst, np.asarray(beta, dtype=float))))


def f_lambda(inst, beta, lam):
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return phi(inst, beta) + lam * F_p(inst, beta)


def grad_F(inst, beta, support=None):
    idx = _support_array(inst, beta, support)
    return psi_p_prime(inst, np.asarray(beta, dtype=float)[idx])


def hessian_K(inst, beta, lam, support=None):
    """Hessian of ``phi + lam * F_p`` with respect to the active coordinates."""
    idx = _support_array(inst, beta, support)
    b = np.asarray(beta, dtype=float)[idx]
    if np.any(b == 0.0):
        raise ZeroComponentError(f"zero component among active indices {idx.tolist()}")
    K = inst.G[np.ix_(idx, idx)] + lam * np.diag(psi_p_second(inst, b))
    return 0.5 * (K + K.T)


def ols_solution(inst):
    """OLS minimiser of phi: normal-equation solve, or min-norm when G is singular."""
    if inst.X is None:
        return np.array(inst.beta_star)
    if inst.positive_definite:
        return np.linalg.solve(inst.G, inst.X @ inst.y)
    return np.linalg.pinv(inst.X.T) @ inst.y


def restricted_ols(inst, support):
    """Minimiser of phi over vectors supported on ``support`` (zero elsewhere).

    Solves ``G_II beta_I = (G beta*)_I``.
    """
    idx = _support_array(inst, None, support) if support is not None else np.arange(inst.n)
    beta = np.zeros(inst.n)
    if idx.size == 0:
        return beta
    G_II = inst.G[np.ix_(idx, idx)]
    if not is_positive_definite(G_II):
        raise NotPositiveDefiniteError(f"G restricted to {idx.tolist()} is not positive definite")
    beta[idx] = np.linalg.solve(G_II, (inst.G @ inst.beta_star)[idx])
    return beta

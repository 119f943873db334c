"""
Local objectives and the centralized ground truth.

Each node ``i`` holds a quadratic

    f_i(x) = (scale / 2) ||H_i x - b_i||^2 + (r / 2) ||x||^2

whose curvature ``Q_i = scale H_i^T H_i + r I`` is constant, so the conjugate
argmin ``argmin_x f_i(x) - y^T x`` is a linear solve against ``Q_i``.

Stacked network quantities are ``(n, p)`` arrays with one row per node.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


class NotStronglyConvexError(ValueError):
    pass


class QuadraticLocalObjective:
    """Ridge term of one node."""

    def __init__(self, H, b, r, scale=1.0):
        self.H = np.atleast_2d(np.asarray(H, dtype=float))
        self.b = np.atleast_1d(np.asarray(b, dtype=float))
        if self.H.shape[0] != self.b.shape[0]:
            raise ValueError(f"H has {self.H.shape[0]} rows but b has length {self.b.shape[0]}")
        if r < 0 or scale <= 0:
            raise ValueError("ridge weight must be >= 0 and scale > 0")
        self.r = float(r)
        self.scale = float(scale)
        self.p = self.H.shape[1]
        self.Q = self.scale * self.H.T @ self.H + self.r * np.eye(self.p)
        self.h = self.scale * self.H.T @ self.b
        self._chol = None

    @property
    def factor(self):
        # Q is iteration independent; factor once.
        if self._chol is None:
            try:
                self._chol = cho_factor(self.Q)
            except LinAlgError:
                raise NotStronglyConvexError("objective not strongly convex") from None
        return self._chol

    def value(self, x):
        res = self.H @ x - self.b
        return 0.5 * self.scale * res @ res + 0.5 * self.r * x @ x

    def gradient(self, x):
        return self.scale * self.H.T @ (self.H @ np.asarray(x, dtype=float) - self.b) + self.r * x

    def conjugate_argmin(self, y):
        """Minimiser of ``f_i(x) - y^T x``, i.e. the solution of ``Q_i x = y + scale H_i^T b_i``."""
        return cho_solve(self.factor, np.asarray(y, dtype=float) + self.h)

    def curvature_bounds(self):
        ev = np.linalg.eigvalsh(self.Q)
        return float(ev[0]), float(ev[-1])


class ObjectiveSet:
    """
    The stacked objective ``f(x) = sum_i f_i(x_i)``.

    Local objectives only need ``conjugate_argmin``, ``gradient`` and
    ``curvature_bounds``. When all of them are quadratic the per-node solves
    are batched through cached inverses of ``Q_i``.
    """

    def __init__(self, objectives):
        self.objectives = list(objectives)
        if not self.objectives:
            raise ValueError("need at least one local objective")
        self.n = len(self.objectives)
        self.p = self.objectives[0].p
        self._batched = all(isinstance(o, QuadraticLocalObjective) for o in self.objectives)
        self._Qinv = None
        if self._batched:
            self._Q = np.stack([o.Q for o in self.objectives])
            self._h = np.stack([o.h for o in self.objectives])

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self.objectives)

    def __getitem__(self, i):
        return self.objectives[i]

    def conjugate_argmin(self, Y):
        if self._batched:
            if self._Qinv is None:
                eye = np.eye(self.p)
                self._Qinv = np.stack([cho_solve(o.factor, eye) for o in self.objectives])
            return np.einsum("nij,nj->ni", self._Qinv, Y + self._h)
        return np.stack([o.conjugate_argmin(y) for o, y in zip(self.objectives, Y)])

    def gradient(self, X):
        if self._batched:
            return np.einsum("nij,nj->ni", self._Q, X) - self._h
        return np.stack([o.gradient(x) for o, x in zip(self.objectives, X)])


def _as_set(objs):
    return objs if isinstance(objs, ObjectiveSet) else ObjectiveSet(objs)


@dataclass(frozen=True)
class ProblemConstants:
    mu: float
    L: float

    @property
    def kappa(self):
        return self.L / self.mu

    def to_dict(self):
        return {"mu": self.mu, "L": self.L, "kappa": self.kappa}


def constants(objs):
    """
    Strong convexity and gradient Lipschitz constants of the stacked objective.

    The Hessian of ``f`` is block diagonal, so ``mu`` is the smallest and ``L``
    the largest eigenvalue over all local curvature matrices.
    """
    bounds = [o.curvature_bounds() for o in _as_set(objs)]
    mu = min(lo for lo, _ in bounds)
    L = max(hi for _, hi in bounds)
    if mu <= 0:
        raise NotStronglyConvexError("objective not strongly convex")
    return ProblemConstants(mu=mu, L=L)


def centralized_optimum(objs):
    """Exact minimiser of ``sum_i f_i`` over a single shared ``x``."""
    objs = _as_set(objs)
    Q = sum(o.Q for o in objs)
    h = sum(o.h for o in objs)
    if np.linalg.eigvalsh(Q)[0] <= 0:
        raise NotStronglyConvexError("aggregate objective is singular")
    return np.linalg.solve(Q, h)


def dual_optimum(objs, x_star):
    """Stacked dual optimum ``y*_i = grad f_i(x*)``; its rows sum to zero."""
    objs = _as_set(objs)
    X = np.tile(np.asarray(x_star, dtype=float), (objs.n, 1))
    return objs.gradient(X)


@dataclass(frozen=True)
class OptimalPair:
    x_star: np.ndarray
    y_star: np.ndarray

    @classmethod
    def of(cls, objs):
        x = centralized_optimum(objs)
        return cls(x_star=x, y_star=dual_optimum(objs, x))

    def stacked_x(self):
        return np.tile(self.x_star, (self.y_star.shape[0], 1))

"""
PANDA, DIGing and dual decomposition over a time-varying graph.

All three share one loop: at iteration ``k`` the active edge set ``E(k)`` is
drawn from the schedule and turned into a Metropolis-Hastings matrix (PANDA,
DIGing) or a graph Laplacian (dual decomposition), then one step is applied
to every node. Node variables are ``(n, p)`` arrays, so ``(W kron I_p) z`` is
just ``W @ z``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import graphs
from .objectives import ObjectiveSet

ALGORITHMS = ("panda", "diging", "dual_decomp")

# Tolerance used when validating mixing matrices inside the iteration loop.
MIXING_TOL = 1e-10


@dataclass(frozen=True)
class AlgorithmState:
    """
    Per-node variables at iteration ``k``.

    ``z`` tracks the network average of ``x`` (PANDA only) and ``g`` tracks the
    average gradient (DIGing only); unused fields are ``None``.
    """

    x: np.ndarray
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    g: np.ndarray | None = None
    k: int = 0


def _objset(objs):
    return objs if isinstance(objs, ObjectiveSet) else ObjectiveSet(objs)


def panda_step(state, objs, W, c):
    """
    One PANDA iteration.

    Every node solves its conjugate subproblem, mixes the tracker ``z`` with
    its neighbours (the only communicated quantity) and corrects it with the
    change in its own primal iterate, then takes a dual step along
    ``x - z``.
    """
    if c <= 0:
        raise ValueError("step size must be positive")
    graphs.check_mixing(W, tol=MIXING_TOL)
    objs = _objset(objs)
    x_new = objs.conjugate_argmin(state.y)
    z_new = W @ state.z + x_new - state.x
    y_new = state.y - c * (x_new - z_new)
    return AlgorithmState(x=x_new, y=y_new, z=z_new, k=state.k + 1)


def diging_step(state, objs, W, alpha):
    """
    One DIGing iteration: ``x <- W x - alpha g`` followed by the
    gradient-tracking update ``g <- W g + grad f(x_new) - grad f(x_old)``.
    """
    if alpha <= 0:
        raise ValueError("step size must be positive")
    graphs.check_mixing(W, tol=MIXING_TOL)
    objs = _objset(objs)
    x_new = W @ state.x - alpha * state.g
    g_new = W @ state.g + objs.gradient(x_new) - objs.gradient(state.x)
    return AlgorithmState(x=x_new, g=g_new, k=state.k + 1)


def dual_decomposition_step(state, objs, Lap, c):
    """Dual ascent with Laplacian weights: ``x <- grad f*(y)``, ``y <- y - c L x``."""
    if c <= 0:
        raise ValueError("step size must be positive")
    objs = _objset(objs)
    x_new = objs.conjugate_argmin(state.y)
    y_new = state.y - c * (Lap @ x_new)
    return AlgorithmState(x=x_new, y=y_new, k=state.k + 1)


def initial_state(algorithm, objs, x0=None, y0=None, z0=None):
    """
    Documented starting point: ``x(0) = z(0) = 0`` and ``y(0) = 0``; DIGing
    starts its tracker at ``g(0) = grad f(x(0))``.
    """
    objs = _objset(objs)
    zeros = np.zeros((objs.n, objs.p))
    x = zeros.copy() if x0 is None else np.array(x0, dtype=float)
    if algorithm == "panda":
        y = zeros.copy() if y0 is None else np.array(y0, dtype=float)
        z = x.copy() if z0 is None else np.array(z0, dtype=float)
        return AlgorithmState(x=x, y=y, z=z)
    if algorithm == "diging":
        return AlgorithmState(x=x, g=objs.gradient(x))
    if algorithm == "dual_decomp":
        y = zeros.copy() if y0 is None else np.array(y0, dtype=float)
        return AlgorithmState(x=x, y=y)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


@dataclass(frozen=True)
class Trace:
    """
    Full history of a run.

    ``x``, ``y``, ``z`` and ``g`` have shape ``(iterations + 1, n, p)`` (or are
    ``None`` when the algorithm has no such variable). ``matrices[k]`` is the
    mixing matrix or Laplacian applied at iteration ``k``.
    """

    algorithm: str
    x: np.ndarray
    y: np.ndarray | None
    z: np.ndarray | None
    g: np.ndarray | None
    matrices: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.x.shape[0]

    @property
    def iterations(self):
        return len(self) - 1

    def state(self, k):
        pick = lambda a: None if a is None else a[k]
        return AlgorithmState(x=self.x[k], y=pick(self.y), z=pick(self.z), g=pick(self.g), k=k)


def _step_matrix(algorithm, schedule, k, mh_variant):
    edges = graphs.sample_edges(schedule, k)
    if algorithm == "dual_decomp":
        return graphs.laplacian(edges, schedule.n)
    return graphs.metropolis_weights(edges, schedule.n, variant=mh_variant)


def run(algorithm, objs, schedule, step, iterations, *, x0=None, y0=None, z0=None,
        matrices=None, mh_variant="max", metadata=None):
    """
    Run ``algorithm`` for ``iterations`` steps and record every state.

    Parameters
    ----------
    algorithm : {"panda", "diging", "dual_decomp"}
    objs : ObjectiveSet or sequence of local objectives
    schedule : graphs.GraphSchedule
        Source of the edge sets ``E(0), E(1), ...``.
    step : float
        ``c`` for PANDA and dual decomposition, ``alpha`` for DIGing.
    iterations : int
    x0, y0, z0 : ndarray, optional
        Override the documented zero initialisation.
    matrices : sequence of ndarray, optional
        Use these per-iteration matrices instead of building them from
        ``schedule``.
    mh_variant : {"max", "max+1"}
        Metropolis-Hastings weights for PANDA and DIGing, see
        :func:`graphs.metropolis_weights`.
    metadata : dict, optional
        Extra entries merged into the trace metadata.

    Returns
    -------
    Trace
    """
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    if step <= 0:
        raise ValueError("step size must be positive")
    objs = _objset(objs)
    if schedule.n != objs.n:
        raise ValueError(f"schedule has {schedule.n} nodes but there are {objs.n} objectives")
    state = initial_state(algorithm, objs, x0=x0, y0=y0, z0=z0)
    step_fn = {"panda": panda_step, "diging": diging_step,
               "dual_decomp": dual_decomposition_step}[algorithm]

    n, p = objs.n, objs.p
    T = iterations + 1
    hist = {name: np.empty((T, n, p)) for name in ("x", "y", "z", "g")
            if getattr(state, name) is not None}
    mats = np.empty((iterations, n, n))
    for name, arr in hist.items():
        arr[0] = getattr(state, name)
    for k in range(iterations):
        if matrices is not None:
            M = np.asarray(matrices[k])
        else:
            M = _step_matrix(algorithm, schedule, k, mh_variant)
        mats[k] = M
        state = step_fn(state, objs, M, step)
        for name, arr in hist.items():
            arr[k + 1] = getattr(state, name)

    meta = {
        "algorithm": algorithm,
        "step": float(step),
        "iterations": int(iterations),
        "schedule": schedule.to_dict(),
        "rng": graphs.RNG_NAME,
        "matrix": "laplacian" if algorithm == "dual_decomp" else f"metropolis[{mh_variant}]",
    }
    if matrices is not None:
        meta["matrix"] = "explicit"
    meta.update(metadata or {})
    return Trace(algorithm=algorithm, x=hist["x"], y=hist.get("y"), z=hist.get("z"),
                 g=hist.get("g"), matrices=mats, metadata=meta)


def fixed_point_state(opt):
    """PANDA state sitting exactly at the primal-dual optimum."""
    X = opt.stacked_x()
    return AlgorithmState(x=X, y=np.array(opt.y_star, dtype=float), z=X.copy())


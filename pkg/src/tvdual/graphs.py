"""
Time-varying undirected graphs and the matrices built on them.

Edge sets are ``(m, 2)`` integer arrays whose rows ``(i, j)`` satisfy
``i < j``; each row stands for the bidirectional arc between ``i`` and ``j``.
Functions that consume edge sets accept any iterable of pairs in either
orientation and normalise it with :func:`canonical_edges`.
"""

import json
from functools import lru_cache
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

#: Generator used for random schedules; the k-th edge set is drawn from
#: ``Generator(PCG64(SeedSequence([seed, k])))``.
RNG_NAME = "numpy.PCG64/SeedSequence([seed, k])"


class InvalidMixingMatrixError(ValueError):
    pass


def canonical_edges(edges, n=None):
    """Return ``edges`` as a sorted, duplicate-free ``(m, 2)`` array with ``i < j``."""
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    lo, hi = arr[:, 0], arr[:, 1]
    if lo.min() >= 0 and (n is None or hi.max() < n) and np.all(lo < hi):
        keys = lo * (hi.max() + 1) + hi
        if np.all(keys[1:] > keys[:-1]):
            return arr  # already canonical
    if np.any(arr[:, 0] == arr[:, 1]):
        raise ValueError("edge set contains a self-loop")
    if np.any(arr < 0) or (n is not None and np.any(arr >= n)):
        raise ValueError(f"edge endpoints must lie in [0, {n})")
    arr = np.sort(arr, axis=1)
    return np.unique(arr, axis=0)


def adjacency(edges, n):
    """Symmetric 0/1 adjacency matrix of an edge set."""
    e = canonical_edges(edges, n)
    A = np.zeros((n, n))
    A[e[:, 0], e[:, 1]] = 1.0
    A[e[:, 1], e[:, 0]] = 1.0
    return A


@dataclass(frozen=True)
class GraphSchedule:
    """
    Seeded generator of per-iteration edge sets on ``n`` nodes.

    In ``random`` mode every unordered pair is an edge with probability ``pi``,
    independently across pairs and iterations. The edge set at iteration ``k``
    is a pure function of ``(n, pi, seed, k)``, so schedules can be evaluated
    out of order or in parallel.

    In ``scripted`` mode ``edge_sets[k % len(edge_sets)]`` is returned, i.e.
    the script repeats periodically.
    """

    n: int
    pi: float = 0.5
    seed: int = 0
    mode: str = "random"
    edge_sets: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("a schedule needs at least 2 nodes")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.pi}")
        if self.mode not in ("random", "scripted"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == "scripted":
            if not self.edge_sets:
                raise ValueError("scripted schedule needs at least one edge set")
            sets = tuple(canonical_edges(e, self.n) for e in self.edge_sets)
            object.__setattr__(self, "edge_sets", sets)

    @classmethod
    def scripted(cls, n, edge_sets):
        return cls(n=n, pi=0.0, seed=0, mode="scripted", edge_sets=tuple(edge_sets))

    @classmethod
    def from_json(cls, path, n=None):
        """
        Load a scripted schedule from a JSON file.

        The file holds a list of edge lists with zero-indexed node ids, or an
        object ``{"n": ..., "edge_sets": [...]}``. Without an explicit ``n``
        the node count is one more than the largest id found.
        """
        data = json.loads(Path(path).read_text())
        if isinstance(data, dict):
            n = data.get("n", n)
            data = data["edge_sets"]
        if n is None:
            ids = [v for es in data for e in es for v in e]
            n = max(ids) + 1 if ids else 2
        return cls.scripted(int(n), data)

    def to_dict(self):
        d = {"n": self.n, "mode": self.mode}
        if self.mode == "random":
            d.update(pi=self.pi, seed=self.seed, rng=RNG_NAME)
        else:
            d["edge_sets"] = [e.tolist() for e in self.edge_sets]
        return d


@lru_cache(maxsize=64)
def _triu_pairs(n):
    i, j = np.triu_indices(n, k=1)
    pairs = np.column_stack([i, j]).astype(np.int64)
    pairs.flags.writeable = False
    return pairs


def sample_edges(schedule, k):
    """
    Edge set active at iteration ``k``.

    Examples
    --------
    >>> sample_edges(GraphSchedule(n=3, pi=1.0), 0).tolist()
    [[0, 1], [0, 2], [1, 2]]
    """
    if k < 0:
        raise ValueError("iteration index must be non-negative")
    if schedule.mode == "scripted":
        return schedule.edge_sets[k % len(schedule.edge_sets)]
    pairs = _triu_pairs(schedule.n)
    if schedule.pi == 0.0:
        return pairs[:0]
    rng = np.random.default_rng([schedule.seed, k])
    keep = rng.random(len(pairs)) < schedule.pi
    return pairs[keep]


def metropolis_weights(edges, n, variant="max"):
    """
    Metropolis-Hastings mixing matrix of an undirected graph.

    With ``variant="max"`` the weight on edge ``(i, j)`` is
    ``1 / max(d_i, d_j)``; ``variant="max+1"`` uses ``1 / (1 + max(d_i, d_j))``,
    which keeps a positive self-weight and turns the complete graph into
    exact averaging. The diagonal absorbs the remainder of each row, so the
    result is symmetric and doubly stochastic with entries in ``[0, 1]``.
    """
    if variant not in ("max", "max+1"):
        raise ValueError(f"unknown Metropolis-Hastings variant {variant!r}")
    A = adjacency(edges, n)
    deg = A.sum(axis=1)
    denom = np.maximum.outer(deg, deg) + (1.0 if variant == "max+1" else 0.0)
    W = A / np.maximum(denom, 1.0)
    # off-diagonal rows sum to at most one; clip the rounding residue
    W[np.diag_indices(n)] = np.maximum(1.0 - W.sum(axis=1), 0.0)
    return W


def laplacian(edges, n):
    """Combinatorial graph Laplacian ``D - A``."""
    A = adjacency(edges, n)
    return np.diag(A.sum(axis=1)) - A


def check_mixing(W, edges=None, tol=1e-12):
    """
    Raise :class:`InvalidMixingMatrixError` unless ``W`` is doubly stochastic
    (within ``tol``) and, when ``edges`` is given, supported on those edges.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidMixingMatrixError("invalid mixing matrix: not square")
    if (np.max(np.abs(W.sum(axis=1) - 1.0)) > tol
            or np.max(np.abs(W.sum(axis=0) - 1.0)) > tol):
        raise InvalidMixingMatrixError("invalid mixing matrix: not doubly stochastic")
    if edges is not None:
        n = W.shape[0]
        allowed = adjacency(edges, n) + np.eye(n)
        if np.any((allowed == 0) & (W != 0)):
            raise InvalidMixingMatrixError("invalid mixing matrix: weight outside the edge set")
    return W


def averaging_matrix(n):
    return np.full((n, n), 1.0 / n)


def window_product(mixing, k, B):
    """``W(k) W(k-1) ... W(k-B+1)``; the identity when ``B == 0``."""
    n = np.asarray(mixing[0]).shape[0]
    P = np.eye(n)
    for t in range(k - B + 1, k + 1):
        P = np.asarray(mixing[t]) @ P
    return P


@dataclass(frozen=True)
class ContractionEstimate:
    """
    Joint contraction factor of a realised mixing sequence.

    ``delta`` is the largest ``sigma_max(W_B(k) - 11^T/n)`` over the windows
    ``k in k_range``; it says nothing about iterations beyond the sequence.
    """

    delta: float
    B: int
    k_range: tuple
    per_k: np.ndarray = field(repr=False, compare=False)


def contraction_delta(mixing, B):
    """
    Supremum over all complete windows of ``sigma_max(W_B(k) - (1/n) 1 1^T)``.

    ``mixing[k]`` is the matrix applied at iteration ``k``. Each window
    product is formed explicitly and decomposed with a full SVD.
    """
    mixing = list(mixing)
    if B < 1:
        raise ValueError("window length must be at least 1")
    if len(mixing) < B:
        raise ValueError("insufficient history: fewer mixing matrices than the window length")
    n = np.asarray(mixing[0]).shape[0]
    J = averaging_matrix(n)
    per_k = np.empty(len(mixing) - B + 1)
    for idx, k in enumerate(range(B - 1, len(mixing))):
        per_k[idx] = np.linalg.svd(window_product(mixing, k, B) - J, compute_uv=False)[0]
    return ContractionEstimate(delta=float(per_k.max()), B=B,
                               k_range=(B - 1, len(mixing) - 1), per_k=per_k)


def is_connected(edges, n):
    e = canonical_edges(edges, n)
    if n == 1:
        return True
    g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    ncomp, _ = connected_components(g, directed=False)
    return ncomp == 1


def window_connected(schedule, k, B):
    """True iff the union of the edge sets ``E(k-B+1), ..., E(k)`` is connected."""
    if B < 1 or k < B - 1:
        raise ValueError("window must satisfy B >= 1 and k >= B - 1")
    union = [sample_edges(schedule, t) for t in range(k - B + 1, k + 1)]
    return is_connected(np.concatenate(union), schedule.n)


def smallest_connected_window(schedule, horizon, max_B=50):
    """
    Smallest ``B`` for which every window ending in ``B-1, ..., horizon-1`` is
    connected, or ``None`` if no ``B <= max_B`` works.
    """
    for B in range(1, min(max_B, horizon) + 1):
        if all(window_connected(schedule, k, B) for k in range(B - 1, horizon)):
            return B
    return None

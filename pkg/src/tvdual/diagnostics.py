"""
Runtime checks of the PANDA convergence argument on realised trajectories.

A PANDA trace is reduced to five scalar sequences

    r(k)    = ||y(k) - y*||
    xperp(k) = ||(Pi_perp kron I) x(k)||
    zperp(k) = ||(Pi_perp kron I) z(k)||
    dy(k)   = ||y(k) - y(k-1)||,   dy(0) = 0
    dxz(k)  = ||xperp(k) - zperp(k)||     (norm of the difference vector)

with ``Pi_perp = I - 11^T/n``. The cycle r -> xperp -> dxz -> dy -> zperp -> r
of weighted sup-norm inequalities is then evaluated arrow by arrow.
"""

from dataclasses import dataclass

import numpy as np

from .rates import gains, small_gain_bound


def center(X):
    """Apply ``Pi_perp`` blockwise: subtract the node average from every row."""
    X = np.asarray(X, dtype=float)
    return X - X.mean(axis=-2, keepdims=True)


def _norms(A):
    return np.sqrt(np.sum(A * A, axis=(-2, -1)))


@dataclass(frozen=True)
class DerivedSequences:
    r: np.ndarray
    xperp: np.ndarray
    zperp: np.ndarray
    dy: np.ndarray
    dxz: np.ndarray
    dx: np.ndarray | None = None

    def __len__(self):
        return len(self.r)


def derived_sequences(trace, opt):
    """Scalar sequences of a PANDA trace relative to the optimum ``opt``."""
    if opt is None:
        raise ValueError("derived sequences need the optimal pair")
    if trace.y is None or trace.z is None:
        raise ValueError("derived sequences need a PANDA trace (x, y and z)")
    xp = center(trace.x)
    zp = center(trace.z)
    dy = np.zeros(len(trace))
    dy[1:] = _norms(np.diff(trace.y, axis=0))
    dx = np.zeros(len(trace))
    dx[1:] = _norms(np.diff(trace.x, axis=0))
    return DerivedSequences(
        r=_norms(trace.y - opt.y_star),
        xperp=_norms(xp),
        zperp=_norms(zp),
        dy=dy,
        dxz=_norms(xp - zp),
        dx=dx,
    )


def _horizon(seq, K):
    seq = np.asarray(seq, dtype=float)
    if seq.size == 0:
        raise ValueError("empty sequence")
    K = len(seq) - 1 if K is None else K
    if not 0 <= K <= len(seq) - 1:
        raise ValueError(f"horizon K={K} outside [0, {len(seq) - 1}]")
    return seq[:K + 1]


def weighted_terms(seq, lam, K=None):
    """``lam^-k seq(k)`` for ``k = 0..K``."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    s = _horizon(seq, K)
    with np.errstate(over="ignore"):
        return s * np.power(lam, -np.arange(len(s), dtype=float))


def weighted_sup_norm(seq, lam, K=None):
    """
    ``max_{k <= K} lam^-k seq(k)``.

    Examples
    --------
    >>> weighted_sup_norm([0.0, 0.0, 5.0], 0.5, 2)
    20.0
    """
    return float(np.max(weighted_terms(seq, lam, K)))


def weighted_sup_argmax(seq, lam, K=None):
    """Index at which the weighted sup-norm is attained."""
    return int(np.argmax(weighted_terms(seq, lam, K)))


@dataclass(frozen=True)
class Arrow:
    name: str
    gamma: float
    omega: float
    lhs: float
    rhs: float

    @property
    def slack(self):
        return self.rhs - self.lhs

    def row(self):
        return {"arrow": self.name, "gamma": self.gamma, "omega": self.omega,
                "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack}


def _initial_offset(seq, lam, B):
    # lam^B / (lam^B - delta) is applied by the caller
    return sum(lam ** (1 - t) * seq[t - 1] for t in range(1, B + 1))


def arrow_slacks(seqs, lam, K=None, *, mu, L, c, delta, B=1, startup_correction=False):
    """
    Evaluate the five arrows at rate ``lam`` over ``k = 0..K``.

    Each arrow bounds the weighted sup-norm of its target sequence (``lhs``)
    by ``gamma * ||source|| + omega`` (``rhs``). The offsets of arrows A2 and
    A4 use the first ``B`` entries of ``dxz`` and ``zperp``.

    With ``startup_correction=True`` arrow A4 also carries the term
    ``||x(1) - x(0)|| / (lam^B - delta)``. The zero start gives ``x(0) = 0``,
    which is not the conjugate gradient of any dual iterate, so the first
    primal change is not controlled by ``dy`` and the uncorrected A4 can fail
    on real trajectories.

    Returns
    -------
    list of Arrow
        In cycle order ``A1, ..., A5``.
    """
    K = len(seqs) - 1 if K is None else K
    if K < B:
        raise ValueError(f"horizon K={K} shorter than the window B={B}")
    g1, g2, g3, g4, g5 = gains(lam, c, mu, L, delta, B)
    lift = lam ** B / (lam ** B - delta)
    norm = lambda s: weighted_sup_norm(s, lam, K)

    w2 = lift * _initial_offset(seqs.dxz, lam, B)
    w4 = lift * _initial_offset(seqs.zperp, lam, B)
    if startup_correction:
        if seqs.dx is None:
            raise ValueError("startup correction needs the primal increments dx")
        w4 += seqs.dx[1] / (lam ** B - delta)
    w5 = 2.0 * seqs.r[0]

    r, xp, dxz, dy, zp = (norm(s) for s in (seqs.r, seqs.xperp, seqs.dxz, seqs.dy, seqs.zperp))
    return [
        Arrow("A1", g1, 0.0, xp, g1 * r),
        Arrow("A2", g2, w2, dxz, g2 * xp + w2),
        Arrow("A3", g3, 0.0, dy, g3 * dxz),
        Arrow("A4", g4, w4, zp, g4 * dy + w4),
        Arrow("A5", g5, w5, r, g5 * zp + w5),
    ]


def tracking_identity_gap(seqs, c):
    """Pointwise ``| dy(k) - c dxz(k) |``; zero in exact arithmetic."""
    return np.abs(np.asarray(seqs.dy) - c * np.asarray(seqs.dxz))


def cycle_bound(arrows):
    """Small-gain bound on ``||r||^lam`` implied by the arrows' gains and offsets."""
    return small_gain_bound([a.gamma for a in arrows], [a.omega for a in arrows])

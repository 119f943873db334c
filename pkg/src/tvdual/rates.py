"""
Step-size intervals, convergence rates and small-gain certificates for PANDA.

Inputs are the strong convexity constant ``mu``, the gradient Lipschitz
constant ``L`` (``kappa = L / mu``), the joint contraction factor ``delta`` of
the mixing sequence and its window length ``B``.

The crossover step ``c_bar`` is where the two admissible-step curves

    lower(lam) = 2 L (1 - lam^(2B))
    upper(lam) = mu (lam^B - delta)^2 / (2 sqrt(kappa))

intersect. Below it the rate is set by the lower curve, above it by the upper
one.
"""

import math
from dataclasses import dataclass


def _check(mu, L, delta):
    if not (mu > 0 and L >= mu):
        raise ValueError("need L >= mu > 0")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if delta >= 1:
        raise ValueError("no contraction: delta must be < 1")


def step_size_interval(mu, L, delta):
    """Open interval ``(0, mu (1 - delta)^2 / (2 sqrt(kappa)))`` of certified step sizes."""
    _check(mu, L, delta)
    return 0.0, mu * (1.0 - delta) ** 2 / (2.0 * math.sqrt(L / mu))


def crossover_lambda_power(mu, L, delta):
    """``lam^B`` at the intersection of the lower and upper step-size curves."""
    _check(mu, L, delta)
    k32 = (L / mu) ** 1.5
    a = 1.0 + 4.0 * k32
    return (delta + math.sqrt(delta ** 2 + (4.0 * k32 - delta ** 2) * a)) / a


def crossover_c(mu, L, delta, B=1, form="intersection"):
    """
    Crossover step size ``c_bar``.

    ``form="intersection"`` evaluates the upper curve at the root of the
    intersection quadratic. ``"kappa32"`` and ``"kappa52"`` return two
    closed forms in circulation (exponent 3/2 and 5/2 on ``kappa`` in the
    leading term); they disagree with the intersection and are kept for
    comparison only.
    """
    _check(mu, L, delta)
    kappa = L / mu
    if form == "intersection":
        u = crossover_lambda_power(mu, L, delta)
        return mu * (u - delta) ** 2 / (2.0 * math.sqrt(kappa))
    lead = {"kappa32": 1.5, "kappa52": 2.5}.get(form)
    if lead is None:
        raise ValueError(f"unknown crossover form {form!r}")
    return 0.5 * mu * (16.0 * kappa ** lead - 4.0 * kappa * (1.0 - delta ** 2)) \
        / (1.0 + 4.0 * kappa ** 1.5) ** 2


def lower_step_bound(lam, L, B):
    return 2.0 * L * (1.0 - lam ** (2 * B))


def upper_step_bound(lam, mu, L, delta, B):
    return mu * (lam ** B - delta) ** 2 / (2.0 * math.sqrt(L / mu))


def theoretical_lambda(c, mu, L, delta, B=1):
    """
    Certified R-linear rate for step size ``c``.

    >>> round(theoretical_lambda(0.1, 1.0, 1.0, 0.0, 1) ** 2, 12)
    0.95
    """
    _, hi = step_size_interval(mu, L, delta)
    if not 0.0 < c < hi:
        raise ValueError(f"step size infeasible: c={c} outside (0, {hi})")
    if c <= crossover_c(mu, L, delta, B):
        return (1.0 - c / (2.0 * L)) ** (1.0 / (2 * B))
    return (delta + math.sqrt(2.0 * c * math.sqrt(L / mu) / mu)) ** (1.0 / B)


def _geometric_sum(lam, B):
    # (1 - lam^B) / (1 - lam), stable near lam = 1
    return sum(lam ** s for s in range(B))


def gains(lam, c, mu, L, delta, B=1):
    """The five arrow gains ``(gamma_1, ..., gamma_5)``."""
    if not delta ** (1.0 / B) < lam < 1.0:
        raise ValueError("arrows A2/A4 undefined: need delta^(1/B) < lambda < 1")
    gap = lam ** B - delta
    s = _geometric_sum(lam, B)
    return (
        1.0 / (mu * lam),
        2.0 * s / gap,
        c,
        s / (mu * gap),
        math.sqrt(L * mu),
    )


@dataclass(frozen=True)
class RateCertificate:
    mu: float
    L: float
    delta: float
    B: int
    c: float
    lam: float
    gammas: tuple
    crossover_c: float
    feasible: bool

    @property
    def kappa(self):
        return self.L / self.mu

    @property
    def product(self):
        return math.prod(self.gammas)

    def row(self):
        return {"c": self.c, "lambda": self.lam,
                **{f"gamma{i + 1}": g for i, g in enumerate(self.gammas)},
                "product": self.product, "feasible": self.feasible}


def small_gain_certificate(lam, c, mu, L, delta, B=1):
    """
    Evaluate the small-gain conditions at ``(lam, c)``.

    The certificate is feasible when the exact gain product is below one,
    ``c`` lies in the certified interval, ``c <= mu / 2`` and
    ``lam >= sqrt(1 - c / (2 L))``.
    """
    _check(mu, L, delta)
    g = gains(lam, c, mu, L, delta, B)
    _, hi = step_size_interval(mu, L, delta)
    # the lower branch at B = 1 meets the lambda condition with equality;
    # allow for the rounding of pow against sqrt
    lam_floor = math.sqrt(1.0 - c / (2.0 * L)) * (1.0 - 1e-14)
    feasible = (math.prod(g) < 1.0 and 0.0 < c < hi and c <= mu / 2.0 and lam >= lam_floor)
    return RateCertificate(mu=mu, L=L, delta=delta, B=B, c=c, lam=lam, gammas=g,
                           crossover_c=crossover_c(mu, L, delta, B), feasible=bool(feasible))


def certificate_for_step(c, mu, L, delta, B=1):
    """Certificate at the rate ``theoretical_lambda(c)``."""
    return small_gain_certificate(theoretical_lambda(c, mu, L, delta, B), c, mu, L, delta, B)


def small_gain_bound(gammas, omegas):
    """
    Bound on the first sequence of a cycle of arrows with gains ``gammas``
    and offsets ``omegas``; infinite when the gain product is not below one.
    """
    m = len(gammas)
    prod = math.prod(gammas)
    if prod >= 1.0:
        return math.inf
    total = sum(omegas[i] * math.prod(gammas[i + 1:]) for i in range(m))
    return total / (1.0 - prod)


def sweep(mu, L, delta, B, c_values):
    """Certificates for each admissible ``c``; infeasible steps are skipped."""
    _, hi = step_size_interval(mu, L, delta)
    return [certificate_for_step(c, mu, L, delta, B) for c in c_values if 0.0 < c < hi]

"""Closed-form mean extinction times and the laws they are built from.

All four models start from one colony holding one individual, with unit
catastrophe rate.  Writing F(p, lam) for the infinite growth product
evaluated by :mod:`binomcat.qproduct`:

* no dispersion:        E[tau_A] = (F(p, lam) - 1) / lam          (certified interval)
* tree dispersion, d=2: E[tau_2] = (lp+1)(lp+2)/(lam p^2 (lam+1)) * log(...)
* tree dispersion, d=3: E[tau_3] = (2 lp+3)/(2 r) * log(...), r the cubic radical
* free dispersion:      E[tau_*] = 1 - (lam+1)/lam * log(1 - lam p/(1-p))

with lp = lam*p.  The dispersing formulas follow from viewing the colony
count as a continuous-time branching process with unit-rate particle death:
the survivor count right after a catastrophe is Z = Binomial(1 + Poisson(lam*J), p)
with J ~ Exp(1), whose law is beta at zero and a geometric tail alpha*c^n
(:func:`survivor_law`), and the offspring (new colony) count is Z pushed
through the label-collision map (:func:`offspring_pmf`).  The generic
branching formulas for binary, ternary and geometric offspring live in
:func:`branching_mean_time_binary` / ``_ternary`` / ``_geometric`` and give
a second, independent route to each closed form; the two routes agree to
full float precision and the test suite holds them to 1e-10.

Numerical care: log arguments are evaluated through ``log1p`` / ``atanh``
so that means near p -> 0 (where every model tends to the single Exp(1)
catastrophe clock, mean 1) do not suffer cancellation.  Within relative
distance 1e-12 of a critical threshold the means are reported as infinite
rather than as meaningless huge floats.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    FreeDispersion,
    InvalidParameterError,
    MeanExtinction,
    ModelParams,
    Regime,
    TreeDispersion,
    classify,
    critical_survival,
)
from .qproduct import CertifiedInterval, product_bounds_tight

__all__ = [
    "MeanAboveOneError",
    "SurvivorLaw",
    "OffspringPMF",
    "survivor_law",
    "offspring_pmf",
    "count_surjections",
    "label_distribution",
    "tree3_radical",
    "mean_time_no_dispersion",
    "mean_time_tree2",
    "mean_time_tree3",
    "mean_time_free",
    "branching_mean_time_binary",
    "branching_mean_time_ternary",
    "branching_mean_time_geometric",
]

# relative distance to a critical threshold below which means report infinite
_BOUNDARY_BAND = 1e-12
# tolerance on pmf normalization and on mean-vs-1 criticality for the generic formulas
_PMF_TOL = 1e-12


class MeanAboveOneError(ValueError):
    """Offspring mean exceeds 1: the branching process is supercritical."""


@dataclass(frozen=True)
class SurvivorLaw:
    """Law of the survivor count Z right after a catastrophe.

    P(Z = 0) = beta and P(Z = n) = alpha * c^n for n >= 1, where

        beta  = (1-p) / (lam p + 1)
        alpha = (lam+1) / (lam (lam p + 1))
        c     = lam p / (lam p + 1)

    Total mass: beta + alpha*c/(1-c) = 1.  This is also the offspring law
    of the free-dispersion colony process (every survivor founds a colony).
    """

    beta: float
    alpha: float
    c: float

    def __post_init__(self):
        if not (0 < self.beta < 1 and self.alpha > 0 and 0 < self.c < 1):
            raise InvalidParameterError(
                f"invalid survivor law beta={self.beta}, alpha={self.alpha}, c={self.c}"
            )

    @property
    def mass(self) -> float:
        return self.beta + self.alpha * self.c / (1.0 - self.c)

    @property
    def mean(self) -> float:
        return self.alpha * self.c / (1.0 - self.c) ** 2

    def pmf(self, n: int) -> float:
        if n == 0:
            return self.beta
        return self.alpha * self.c**n


@dataclass(frozen=True)
class OffspringPMF:
    """Distribution of the number of colonies created by one catastrophe, d sites."""

    d: int
    probs: "tuple[float, ...]"  # index k = 0 .. d

    def __post_init__(self):
        if len(self.probs) != self.d + 1:
            raise InvalidParameterError(f"need d+1 = {self.d + 1} entries, got {len(self.probs)}")
        if any(q < -_PMF_TOL or q > 1 + _PMF_TOL for q in self.probs):
            raise InvalidParameterError(f"pmf entries outside [0, 1]: {self.probs}")
        if abs(sum(self.probs) - 1.0) > _PMF_TOL:
            raise InvalidParameterError(f"pmf does not sum to 1: sum={sum(self.probs)!r}")

    @property
    def mean(self) -> float:
        return sum(k * q for k, q in enumerate(self.probs))


def survivor_law(params: ModelParams) -> SurvivorLaw:
    lam, p = params.lam_f, params.p_f
    lp1 = lam * p + 1.0
    return SurvivorLaw(
        beta=(1.0 - p) / lp1,
        alpha=(lam + 1.0) / (lam * lp1),
        c=lam * p / lp1,
    )


def count_surjections(n: int, k: int) -> int:
    """Number of surjections from an n-set onto a k-set, by inclusion-exclusion."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    if k > n:
        return 0
    if k == 0:
        return 1 if n == 0 else 0
    return sum((-1) ** j * math.comb(k, j) * (k - j) ** n for j in range(k + 1))


def label_distribution(n: int, d: int) -> "list[Fraction]":
    """Exact law of the number of distinct labels among n uniform draws from d labels.

    Entry k-1 is P(exactly k distinct) = C(d, k) * surjections(n, k) / d^n for
    k = 1 .. min(n, d).  Exact rational arithmetic; the vector sums to 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if d < 2:
        raise ValueError("d must be >= 2")
    total = d**n
    return [
        Fraction(math.comb(d, k) * count_surjections(n, k), total)
        for k in range(1, min(n, d) + 1)
    ]


def _offspring_series(law: SurvivorLaw, d: int, tail_tol: float = 1e-14) -> "list[float]":
    """p_k = alpha * C(d,k) * sum_{n>=k} surjections(n,k) (c/d)^n for k = 1..d-1.

    The summand u(n, k) = surjections(n, k) * x^n obeys
    u(n, k) = k*x*(u(n-1, k) + u(n-1, k-1)), which keeps every term in
    float range.  Terms are nonnegative and the tail after n is below
    (k x)^(n+1) / (1 - k x); the loop stops once the worst k's bound
    drops under ``tail_tol``.
    """
    x = law.c / d
    kmax = d - 1
    u = [0.0] * (kmax + 1)  # u[k] for current n; n = 1 row is x at k = 1
    u[1] = x
    sums = [0.0] * (kmax + 1)
    sums[1] = x
    n = 1
    worst = kmax * x
    while worst ** (n + 1) / (1.0 - worst) >= tail_tol:
        prev = u
        u = [0.0] * (kmax + 1)
        n += 1
        for k in range(1, min(n, kmax) + 1):
            u[k] = k * x * (prev[k] + prev[k - 1])
            sums[k] += u[k]
    return [law.alpha * math.comb(d, k) * sums[k] for k in range(1, kmax + 1)]


def offspring_pmf(params: ModelParams, d: int) -> OffspringPMF:
    """Colony-offspring law for tree dispersion over d sites.

    p_0 is the no-survivor mass beta.  For d = 2 and d = 3 the label
    collision sums collapse to closed forms

        d=2: p_1 = 2 alpha c / (2 - c)
        d=3: p_1 = 3 alpha c / (3 - c),  p_2 = 6 alpha c^2 / ((3-2c)(3-c))

    and for general d they are evaluated by a truncated positive series
    with a certified geometric tail.  The top entry p_d absorbs the
    remaining mass.
    """
    if d < 2:
        raise InvalidParameterError(f"need d >= 2, got {d}")
    law = survivor_law(params)
    beta, alpha, c = law.beta, law.alpha, law.c
    if d == 2:
        body = [2.0 * alpha * c / (2.0 - c)]
    elif d == 3:
        body = [3.0 * alpha * c / (3.0 - c), 6.0 * alpha * c**2 / ((3.0 - 2.0 * c) * (3.0 - c))]
    else:
        body = _offspring_series(law, d)
    top = 1.0 - beta - sum(body)
    return OffspringPMF(d=d, probs=(beta, *body, max(top, 0.0)))


def tree3_radical(params: ModelParams) -> float:
    """Radical entering the d = 3 mean lifetime,

        sqrt(lam^2 p^3 (lam+1) (6 + lam p - 3p) / ((lam p + 3)(lam p + 1))).

    Strictly positive on the parameter domain and vanishing like p^(3/2)
    as p -> 0.  It equals (2 lp + 3)/2 times the discriminant radical
    sqrt(4 p0 p3 + (p2+p3)^2) of the ternary offspring law.
    """
    lam, p = params.lam_f, params.p_f
    radicand = lam * lam * p**3 * (lam + 1.0) * (6.0 + lam * p - 3.0 * p) / (
        (lam * p + 3.0) * (lam * p + 1.0)
    )
    return math.sqrt(radicand)


def mean_time_no_dispersion(
    params: ModelParams, rel_width: float = 1e-13, M_max: int = 4096
) -> CertifiedInterval:
    """Certified interval for the no-dispersion mean lifetime (F - 1) / lam.

    Always finite: the single-colony process dies out almost surely for
    every lam > 0, p in (0, 1).  M doubles until the bracket's relative
    width reaches ``rel_width``, stops shrinking (float floor), or hits
    ``M_max``.
    """
    lam = params.lam_f
    M = 8
    best = product_bounds_tight(params, M)
    while M < M_max:
        if math.isfinite(best.width) and best.width <= rel_width * best.mid:
            break
        M *= 2
        nxt = product_bounds_tight(params, M)
        if math.isfinite(best.width) and nxt.width >= best.width:
            break  # rounding floor reached; more terms cannot help
        best = nxt
    return best.affine(-1.0, 1.0 / lam)


def _near_threshold(params: ModelParams, topo) -> bool:
    thr = float(critical_survival(topo, params.lam_f))
    return abs(params.p_f - thr) <= _BOUNDARY_BAND * thr


def mean_time_tree2(params: ModelParams) -> MeanExtinction:
    """Mean lifetime of the two-site tree dispersion process.

    Finite below the threshold p = 2/(lam+2), infinite exactly at it, and
    supercritical above.  The log argument N / (N - lam p^2 (lam+1)) with
    N = (1-p)(lam p + 2) is evaluated as -log1p(-y) for stability.
    """
    regime = classify(params, TreeDispersion(2))
    if regime is Regime.SUPERCRITICAL:
        return MeanExtinction.supercritical()
    if regime is Regime.CRITICAL or _near_threshold(params, TreeDispersion(2)):
        return MeanExtinction.infinite()
    lam, p = params.lam_f, params.p_f
    lp = lam * p
    numer = (1.0 - p) * (lp + 2.0)
    y = lam * p * p * (lam + 1.0) / numer
    if y >= 1.0:  # rounding pushed the argument past the pole
        return MeanExtinction.infinite()
    value = (lp + 1.0) * (lp + 2.0) / (lam * p * p * (lam + 1.0)) * (-math.log1p(-y))
    return MeanExtinction.finite(value)


def mean_time_tree3(params: ModelParams) -> MeanExtinction:
    """Mean lifetime of the three-site tree dispersion process.

    Finite below p = 3/(2 lam + 3), infinite at it.  With r the radical of
    :func:`tree3_radical` and A = 3 - 3p - lam p, the closed form is
    (2 lam p + 3)/(2r) * log((A+r)/(A-r)) = (2 lam p + 3) * atanh(r/A) / r.
    """
    regime = classify(params, TreeDispersion(3))
    if regime is Regime.SUPERCRITICAL:
        return MeanExtinction.supercritical()
    if regime is Regime.CRITICAL or _near_threshold(params, TreeDispersion(3)):
        return MeanExtinction.infinite()
    lam, p = params.lam_f, params.p_f
    r = tree3_radical(params)
    a = 3.0 - 3.0 * p - lam * p
    if r >= a:  # rounding pushed the ratio past the pole
        return MeanExtinction.infinite()
    value = (2.0 * lam * p + 3.0) * math.atanh(r / a) / r
    return MeanExtinction.finite(value)


def mean_time_free(params: ModelParams) -> MeanExtinction:
    """Mean lifetime of the free dispersion process.

    Finite below p = 1/(lam+1), where it equals
    1 - (lam+1)/lam * log(1 - lam p/(1-p)); infinite at the threshold.
    """
    regime = classify(params, FreeDispersion())
    if regime is Regime.SUPERCRITICAL:
        return MeanExtinction.supercritical()
    if regime is Regime.CRITICAL or _near_threshold(params, FreeDispersion()):
        return MeanExtinction.infinite()
    lam, p = params.lam_f, params.p_f
    y = lam * p / (1.0 - p)
    if y >= 1.0:
        return MeanExtinction.infinite()
    value = 1.0 - (lam + 1.0) / lam * math.log1p(-y)
    return MeanExtinction.finite(value)


def _check_pmf(probs, tol=1e-9):
    if any(q < -tol for q in probs):
        raise InvalidParameterError(f"negative probability in {probs}")
    if abs(sum(probs) - 1.0) > tol:
        raise InvalidParameterError(f"probabilities must sum to 1, got {sum(probs)!r}")


def branching_mean_time_binary(p0: float, p1: float, p2: float) -> MeanExtinction:
    """Mean extinction time of unit-rate branching with offspring in {0, 1, 2}.

    Requires p2 > 0.  Subcritical (mean p1 + 2 p2 < 1) gives
    (1/p2) * log(p0 / (p0 - p2)); mean exactly 1 gives infinity.
    """
    _check_pmf((p0, p1, p2))
    if p2 <= 0:
        raise InvalidParameterError("binary formula needs p2 > 0")
    mean = p1 + 2.0 * p2
    if mean > 1.0 + _PMF_TOL:
        raise MeanAboveOneError(f"offspring mean {mean} > 1")
    if mean >= 1.0 - _PMF_TOL:
        return MeanExtinction.infinite()
    return MeanExtinction.finite(-math.log1p(-p2 / p0) / p2)


def branching_mean_time_ternary(p0: float, p1: float, p2: float, p3: float) -> MeanExtinction:
    """Mean extinction time of unit-rate branching with offspring in {0, .., 3}.

    Requires p3 > 0.  With r = sqrt(4 p0 p3 + (p2+p3)^2) and
    A = 2 p0 - p2 - p3, the subcritical mean is (1/r) * log((A+r)/(A-r));
    A^2 - r^2 = 4 p0 (p0 - p2 - 2 p3) is positive exactly when the
    offspring mean is below 1.
    """
    _check_pmf((p0, p1, p2, p3))
    if p3 <= 0:
        raise InvalidParameterError("ternary formula needs p3 > 0")
    mean = p1 + 2.0 * p2 + 3.0 * p3
    if mean > 1.0 + _PMF_TOL:
        raise MeanAboveOneError(f"offspring mean {mean} > 1")
    if mean >= 1.0 - _PMF_TOL:
        return MeanExtinction.infinite()
    r = math.sqrt(4.0 * p0 * p3 + (p2 + p3) ** 2)
    a = 2.0 * p0 - p2 - p3
    if r >= a:
        return MeanExtinction.infinite()
    return MeanExtinction.finite(2.0 * math.atanh(r / a) / r)


def branching_mean_time_geometric(law: SurvivorLaw) -> MeanExtinction:
    """Mean extinction time of unit-rate branching with geometric-tail offspring.

    For offspring mass beta at 0 and alpha*c^n for n >= 1 (total mass 1),
    the offspring mean alpha*c/(1-c)^2 is below 1 exactly when c < beta,
    and then the mean lifetime is 1 - (1-beta)/c * log(1 - c/beta).
    """
    if abs(law.mass - 1.0) > 1e-9:
        raise InvalidParameterError(f"offspring law mass is {law.mass!r}, not 1")
    mean = law.mean
    if mean > 1.0 + _PMF_TOL:
        raise MeanAboveOneError(f"offspring mean {mean} > 1")
    if mean >= 1.0 - _PMF_TOL:
        return MeanExtinction.infinite()
    y = law.c / law.beta
    if y >= 1.0:
        return MeanExtinction.infinite()
    return MeanExtinction.finite(1.0 - (1.0 - law.beta) / law.c * math.log1p(-y))

"""Certified comparison of dispersion against non-dispersion mean lifetimes.

For tree dispersion over d sites (d = 2, 3) and for free dispersion, the
question "which strategy has the shorter mean lifetime?" is equivalent to
comparing the growth product F(p, lam) against the closed-form quantity

    G = 1 + lam * E[tau_dispersed],

since E[tau_A] = (F - 1) / lam.  G is evaluated directly; F is bracketed
by certified truncation bounds, with the truncation depth M doubled until
the bracket falls entirely on one side of G or a cap M_max is reached:

* bracket.hi < G  ->  E[tau_A] < E[tau_dispersed]   (non-dispersion dies sooner)
* bracket.lo > G  ->  E[tau_dispersed] < E[tau_A]   (dispersion dies sooner)
* overlap at M_max -> Indeterminate, reported honestly (exact-equality
  points can never be separated by disjoint intervals).

On top of the pointwise verdicts sit :func:`trace_crossings`, which
bisects along p at fixed lam for the curve where the two mean lifetimes
cross, and :func:`scan_region`, which classifies a (lam, p) grid into the
phase-diagram regions.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from .formulas import mean_time_free, mean_time_tree2, mean_time_tree3
from .model import (
    FreeDispersion,
    MeanKind,
    ModelParams,
    Regime,
    Topology,
    TreeDispersion,
    classify,
    critical_survival,
)
from .qproduct import CertifiedInterval, TailBoundParams, product_bounds

__all__ = [
    "OutOfRegimeError",
    "NoCrossingError",
    "IndeterminateBandError",
    "CertificationError",
    "Verdict",
    "ComparisonResult",
    "Region",
    "RegionPoint",
    "CrossingPair",
    "DEFAULT_M_MAX",
    "compare_d2",
    "compare_d3",
    "compare_free",
    "find_crossings",
    "trace_crossings",
    "scan_region",
]

DEFAULT_M_MAX = 4096

_TAILS = {2: TailBoundParams(2, 1), 3: TailBoundParams(3, 2), "free": TailBoundParams(1, 1)}


class OutOfRegimeError(ValueError):
    """Both mean lifetimes must be finite for the comparison to make sense."""


class NoCrossingError(ValueError):
    """No sign change of the lifetime difference was found on the scan grid."""


class IndeterminateBandError(RuntimeError):
    """Bisection stalled on a band where verdicts stay indeterminate at M_max."""

    def __init__(self, lo: float, hi: float, M_max: int):
        super().__init__(
            f"verdicts indeterminate at M_max={M_max} across [{lo}, {hi}] (width {hi - lo:.3e})"
        )
        self.lo = lo
        self.hi = hi
        self.M_max = M_max


class CertificationError(RuntimeError):
    """Certified numerics contradicted a proven strict inequality."""


class Verdict(Enum):
    NO_DISPERSION_SHORTER = "no-dispersion-shorter"  # E[tau_A] < E[tau_dispersed]
    DISPERSION_SHORTER = "dispersion-shorter"  # E[tau_dispersed] < E[tau_A]
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ComparisonResult:
    """Verdict plus the evidence: final F bracket, the RHS value, and M used."""

    verdict: Verdict
    f_bounds: CertifiedInterval
    rhs: float
    M_used: int

    @property
    def is_strict(self) -> bool:
        return self.verdict is not Verdict.INDETERMINATE


class Region(Enum):
    GRAY = "gray"  # E[tau_A] < E[tau_dispersed]: dispersion is the longevity winner
    YELLOW = "yellow"  # E[tau_dispersed] < E[tau_A]: non-dispersion wins
    WHITE = "white"  # dispersion survives with positive probability
    BOUNDARY_BAND = "boundary-band"  # indeterminate at M_max (on the crossing curve)


@dataclass(frozen=True)
class RegionPoint:
    lam: float
    p: float
    region: Region


@dataclass(frozen=True)
class CrossingPair:
    """Crossing points of the two mean lifetimes along p at fixed lam.

    ``p_l`` and ``p_u`` are the first and last crossings found (equal if a
    single crossing was found); ``crossings`` holds all of them in
    increasing order, each located to within ``tol``.
    """

    lam: float
    d: int
    tol: float
    p_l: float
    p_u: float
    crossings: "tuple[float, ...]"

    def __post_init__(self):
        if not self.crossings:
            raise NoCrossingError("a crossing pair needs at least one crossing")
        if self.p_l > self.p_u:
            raise ValueError("crossings out of order")


def _schedule(M_max: int):
    M = 8
    while True:
        yield min(M, M_max)
        if M >= M_max:
            return
        M *= 2


def _decide(params: ModelParams, tail: TailBoundParams, rhs: float, M_max: int) -> ComparisonResult:
    bounds = None
    M = 0
    for M in _schedule(M_max):
        bounds = product_bounds(params, tail, M)
        if bounds.strictly_below(rhs):
            return ComparisonResult(Verdict.NO_DISPERSION_SHORTER, bounds, rhs, M)
        if bounds.strictly_above(rhs):
            return ComparisonResult(Verdict.DISPERSION_SHORTER, bounds, rhs, M)
    return ComparisonResult(Verdict.INDETERMINATE, bounds, rhs, M)


def _require_subcritical(params: ModelParams, topo: Topology) -> None:
    if classify(params, topo) is not Regime.SUBCRITICAL:
        thr = float(critical_survival(topo, params.lam_f))
        raise OutOfRegimeError(
            f"comparison needs p < {thr} (both lifetimes finite); got p={params.p_f}"
        )


def _rhs_from_mean(params: ModelParams, mean) -> float:
    # G = 1 + lam * E[tau_dispersed]; infinite mean (threshold band) gives +inf,
    # which every certified F bracket is strictly below.
    if mean.kind is MeanKind.FINITE:
        return 1.0 + params.lam_f * mean.time
    return math.inf


def compare_d2(params: ModelParams, M_max: int = DEFAULT_M_MAX) -> ComparisonResult:
    """Certified verdict between no dispersion and two-site tree dispersion."""
    _require_subcritical(params, TreeDispersion(2))
    return _decide(params, _TAILS[2], _rhs_from_mean(params, mean_time_tree2(params)), M_max)


def compare_d3(params: ModelParams, M_max: int = DEFAULT_M_MAX) -> ComparisonResult:
    """Certified verdict between no dispersion and three-site tree dispersion."""
    _require_subcritical(params, TreeDispersion(3))
    return _decide(params, _TAILS[3], _rhs_from_mean(params, mean_time_tree3(params)), M_max)


def compare_free(params: ModelParams, M_max: int = DEFAULT_M_MAX) -> ComparisonResult:
    """Certified verdict between no dispersion and free dispersion.

    Whenever both lifetimes are finite the no-dispersion one is provably
    shorter, so any certified DISPERSION_SHORTER verdict would mean the
    numerics are broken and raises :class:`CertificationError`.
    Indeterminate remains possible: at tiny p the true gap can sit below
    the float resolution of the brackets.
    """
    _require_subcritical(params, FreeDispersion())
    result = _decide(params, _TAILS["free"], _rhs_from_mean(params, mean_time_free(params)), M_max)
    if result.verdict is Verdict.DISPERSION_SHORTER:
        raise CertificationError(
            f"certified bracket {result.f_bounds} landed above rhs={result.rhs} "
            f"at lam={params.lam_f}, p={params.p_f}, contradicting the proven inequality"
        )
    return result


def _compare_fn(d: int) -> Callable[[ModelParams, int], ComparisonResult]:
    if d == 2:
        return compare_d2
    if d == 3:
        return compare_d3
    raise ValueError(f"crossing trace supports d in {{2, 3}}, got {d}")


def _sign(verdict: Verdict) -> int:
    if verdict is Verdict.NO_DISPERSION_SHORTER:
        return +1
    if verdict is Verdict.DISPERSION_SHORTER:
        return -1
    return 0


def find_crossings(
    lam: float,
    d: int,
    tol: float,
    M_max: int = DEFAULT_M_MAX,
    grid_step: float = 1e-3,
) -> "tuple[float, ...]":
    """All crossings of the two mean lifetimes along p in (0, threshold).

    Scans a uniform grid of step ``grid_step`` for verdict sign changes,
    then bisects each bracket down to ``tol``.  Nothing is assumed about
    how many crossings exist; whatever the scan finds is returned (possibly
    an empty tuple).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    compare = _compare_fn(d)
    thr = float(critical_survival(TreeDispersion(d), lam))
    crossings: "list[float]" = []
    prev_p: Optional[float] = None
    prev_sign = 0
    i = 1
    while True:
        p = i * grid_step
        i += 1
        if p >= thr:
            break
        sign = _sign(compare(ModelParams(lam, p), M_max).verdict)
        if sign == 0:
            # exact-equality grid point: it is itself a located crossing
            crossings.append(p)
            prev_p, prev_sign = p, 0
            continue
        if prev_sign != 0 and sign != prev_sign:
            crossings.append(_bisect(compare, lam, prev_p, p, prev_sign, tol, M_max))
        prev_p, prev_sign = p, sign
    return tuple(crossings)


def _bisect(compare, lam, lo, hi, lo_sign, tol, M_max) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        sign = _sign(compare(ModelParams(lam, mid), M_max).verdict)
        if sign == 0:
            raise IndeterminateBandError(lo, hi, M_max)
        if sign == lo_sign:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def trace_crossings(lam: float, d: int, tol: float, M_max: int = DEFAULT_M_MAX) -> CrossingPair:
    """Locate the lower and upper lifetime crossings at fixed lam.

    Raises :class:`NoCrossingError` when the scan finds no sign change.
    """
    crossings = find_crossings(lam, d, tol, M_max)
    if not crossings:
        raise NoCrossingError(f"no lifetime crossing found for lam={lam}, d={d}")
    return CrossingPair(
        lam=lam, d=d, tol=tol, p_l=crossings[0], p_u=crossings[-1], crossings=crossings
    )


def scan_region(
    lams: Sequence[float],
    ps: Sequence[float],
    d: int,
    M_max: int = DEFAULT_M_MAX,
) -> "list[RegionPoint]":
    """Classify every (lam, p) grid point into a phase-diagram region.

    White is exactly the supercritical set p > threshold(d, lam); critical
    points are gray (the dispersed lifetime is infinite while the
    no-dispersion one is finite); subcritical points carry the certified
    verdict, with indeterminate ones reported as the boundary band.
    Points are emitted in grid order, lam outer, p inner; results do not
    depend on evaluation order.
    """
    compare = _compare_fn(d)
    out: "list[RegionPoint]" = []
    for lam in lams:
        for p in ps:
            params = ModelParams(float(lam), float(p))
            regime = classify(params, TreeDispersion(d))
            if regime is Regime.SUPERCRITICAL:
                region = Region.WHITE
            elif regime is Regime.CRITICAL:
                region = Region.GRAY
            else:
                verdict = compare(params, M_max).verdict
                if verdict is Verdict.NO_DISPERSION_SHORTER:
                    region = Region.GRAY
                elif verdict is Verdict.DISPERSION_SHORTER:
                    region = Region.YELLOW
                else:
                    region = Region.BOUNDARY_BAND
            out.append(RegionPoint(params.lam_f, params.p_f, region))
    return out

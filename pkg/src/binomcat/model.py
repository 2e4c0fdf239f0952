"""Domain types and phase-regime classification.

A population lives in colonies. Each colony gains individuals at rate
``lam`` (a Poisson process per colony) and is struck by catastrophes at
rate 1. A catastrophe keeps each individual alive independently with
probability ``p`` (a binomial thinning). Survivors follow one of three
dispersion rules:

* ``NoDispersion``     - survivors stay in the single colony,
* ``TreeDispersion(d)`` - each survivor picks one of d sites; survivors
  colliding on a site are reduced to one founder,
* ``FreeDispersion``   - every survivor founds its own colony.

For each rule there is a critical survival probability.  Strictly below
it the population dies out with a finite mean lifetime, exactly at it
extinction is still certain but the mean lifetime is infinite, and above
it the population survives forever with positive probability (so the
mean is not a finite number either).  The no-dispersion process dies out
almost surely for every parameter choice.

Threshold comparisons are exact: when both parameters are rational
(``int`` or ``fractions.Fraction``) the comparison is carried out in
exact rational arithmetic; float inputs are compared against the float
threshold with plain ``==`` / ``<``, no epsilon band.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Union

Number = Union[int, float, Fraction]

__all__ = [
    "InvalidParameterError",
    "ModelParams",
    "NoDispersion",
    "TreeDispersion",
    "FreeDispersion",
    "Topology",
    "Regime",
    "MeanKind",
    "MeanExtinction",
    "critical_survival",
    "classify",
]


class InvalidParameterError(ValueError):
    """A model parameter violates its domain (lam > 0, 0 < p < 1, d >= 2)."""


@dataclass(frozen=True)
class ModelParams:
    """Growth rate ``lam`` and per-individual catastrophe survival probability ``p``.

    The catastrophe rate is fixed at 1 (a general rate only rescales time)
    and every process starts from a single colony with a single individual.
    """

    lam: Number
    p: Number

    def __post_init__(self):
        if not (self.lam > 0):
            raise InvalidParameterError(f"growth rate must be positive, got {self.lam!r}")
        if not (0 < self.p < 1):
            raise InvalidParameterError(f"survival probability must lie in (0, 1), got {self.p!r}")

    @property
    def lam_f(self) -> float:
        return float(self.lam)

    @property
    def p_f(self) -> float:
        return float(self.p)

    @property
    def is_exact(self) -> bool:
        """True when both parameters are rational, enabling exact threshold tests."""
        return isinstance(self.lam, Rational) and isinstance(self.p, Rational)


@dataclass(frozen=True)
class NoDispersion:
    """Survivors remain together in the single colony."""


@dataclass(frozen=True)
class TreeDispersion:
    """Survivors spread over ``d`` sites; collisions leave one founder per site."""

    d: int

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 2:
            raise InvalidParameterError(f"tree dispersion needs an integer d >= 2, got {self.d!r}")


@dataclass(frozen=True)
class FreeDispersion:
    """Every survivor founds a new colony, without collisions."""


Topology = Union[NoDispersion, TreeDispersion, FreeDispersion]


class Regime(Enum):
    """Phase of a (params, topology) pair."""

    SUBCRITICAL = "subcritical"  # certain extinction, finite mean lifetime
    CRITICAL = "critical"  # certain extinction, infinite mean lifetime
    SUPERCRITICAL = "supercritical"  # survives forever with positive probability


class MeanKind(Enum):
    FINITE = "finite"
    INFINITE = "infinite"  # critical boundary: extinction certain, mean diverges
    SUPERCRITICAL = "supercritical"  # survival probability positive, mean undefined


@dataclass(frozen=True)
class MeanExtinction:
    """Tri-state mean extinction time: a positive number, or one of two infinities."""

    kind: MeanKind
    time: Union[float, None] = None

    def __post_init__(self):
        if self.kind is MeanKind.FINITE:
            if self.time is None or not (self.time > 0):
                raise InvalidParameterError(f"finite mean lifetime must be positive, got {self.time!r}")
        elif self.time is not None:
            raise InvalidParameterError("non-finite mean lifetime carries no time value")

    @classmethod
    def finite(cls, time: float) -> "MeanExtinction":
        return cls(MeanKind.FINITE, float(time))

    @classmethod
    def infinite(cls) -> "MeanExtinction":
        return cls(MeanKind.INFINITE)

    @classmethod
    def supercritical(cls) -> "MeanExtinction":
        return cls(MeanKind.SUPERCRITICAL)

    @property
    def is_finite(self) -> bool:
        return self.kind is MeanKind.FINITE


def _threshold_fraction(topo: Topology) -> "tuple[int, int]":
    """Return (a, b) so the critical survival probability is a / (a + b*lam)."""
    if isinstance(topo, TreeDispersion):
        return topo.d, topo.d - 1
    if isinstance(topo, FreeDispersion):
        return 1, 1
    raise InvalidParameterError(f"topology {topo!r} has no critical threshold")


def critical_survival(topo: Topology, lam: Number) -> Number:
    """Critical survival probability of a dispersing topology at growth rate ``lam``.

    Equals d / (d + (d-1)*lam) for tree dispersion over d sites and
    1 / (1 + lam) for free dispersion.  Returns a ``Fraction`` when ``lam``
    is rational, a float otherwise.  ``NoDispersion`` has no threshold
    (extinction is certain everywhere) and is rejected.
    """
    a, b = _threshold_fraction(topo)
    if isinstance(lam, Rational):
        return Fraction(a, 1) / (a + b * Fraction(lam))
    return a / (a + b * lam)


def classify(params: ModelParams, topo: Topology) -> Regime:
    """Classify (params, topo) into one of the three phase regimes.

    ``NoDispersion`` is always subcritical.  For the dispersing
    topologies, ``p`` strictly below the critical survival probability is
    subcritical, exact equality is critical, and above is supercritical.
    Rational inputs are compared exactly; float inputs are compared
    against the float-evaluated threshold without tolerance.
    """
    if isinstance(topo, NoDispersion):
        return Regime.SUBCRITICAL
    if params.is_exact:
        thr = critical_survival(topo, Fraction(params.lam))
        p: Union[Fraction, float] = Fraction(params.p)
    else:
        thr = critical_survival(topo, params.lam_f)
        p = params.p_f
    if p < thr:
        return Regime.SUBCRITICAL
    if p == thr:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL

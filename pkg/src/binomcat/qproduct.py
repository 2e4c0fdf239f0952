"""Certified evaluation of the growth factor F(p, lam) = prod_{k>=0} (1 + lam * p^k).

The mean lifetime of the no-dispersion process is (F - 1) / lam, and every
strategy comparison in this package reduces to deciding whether F lies above
or below a closed-form right-hand side.  F has no closed form, so it is
bracketed by certified two-sided truncation bounds:

    P_M <= F <= P_M * exp(tail_M),      P_M = prod_{k=0}^{M} (1 + lam p^k).

Two tail bounds are provided.

* ``product_bounds`` uses tail_M = (a/b) * p^M for positive integers (a, b)
  with p < a / (b*lam + a).  This is the documented contract used by the
  comparison procedure; the precondition matches exactly the parameter
  region where each comparison is meaningful.
* ``product_bounds_tight`` uses the sharper tail_M = lam * p^(M+1) / (1-p),
  which needs no side condition and is valid for every p in (0, 1).  It is
  the natural choice when only the value of F is wanted.

Kernels accumulate in the widest hardware float (80-bit extended on x86).
The returned endpoints are double floats pushed outward by the accumulated
rounding-error bound plus one ulp, so the true F is guaranteed to lie
inside the interval.  The interval width cannot shrink below a few double
ulps of F; above that floor it decays geometrically like p^M.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams

__all__ = [
    "PreconditionViolatedError",
    "CertifiedInterval",
    "TailBoundParams",
    "product_bounds",
    "product_bounds_tight",
    "product_lower",
    "product_via_log_series",
]

_LD = np.longdouble
_EPS_LD = float(np.finfo(_LD).eps)


class PreconditionViolatedError(ValueError):
    """The requested bound is not valid for these parameters."""


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval [lo, hi] guaranteed to contain a true real value.

    The lower endpoint is always finite; hi may be +inf when only a lower
    bound is known (e.g. the truncation-tail factor overflowed), which is a
    valid, if weak, certificate.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not math.isfinite(self.lo) or math.isnan(self.hi):
            raise ValueError(f"invalid interval endpoints [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def strictly_below(self, x: float) -> bool:
        """Certified: the bracketed value is < x."""
        return self.hi < x

    def strictly_above(self, x: float) -> bool:
        """Certified: the bracketed value is > x."""
        return self.lo > x

    def affine(self, offset: float, scale: float) -> "CertifiedInterval":
        """Certified image under x -> (x + offset) * scale with scale > 0.

        Each endpoint sees two float roundings, so two outward ulp steps
        keep the containment guarantee.
        """
        if not scale > 0:
            raise ValueError("affine rescaling requires a positive scale")
        lo = _down(_down((self.lo + offset) * scale))
        hi = _up(_up((self.hi + offset) * scale))
        return CertifiedInterval(lo, hi)


@dataclass(frozen=True)
class TailBoundParams:
    """Integers (a, b) selecting the truncation tail exp((a/b) * p^M).

    The tail bound is valid only where p < a / (b*lam + a), equivalently
    lam < (a/b) * (1-p) / p.
    """

    a: int
    b: int

    def __post_init__(self):
        if not (isinstance(self.a, int) and self.a >= 1 and isinstance(self.b, int) and self.b >= 1):
            raise ValueError(f"tail parameters must be positive integers, got a={self.a!r}, b={self.b!r}")

    @property
    def ratio(self) -> float:
        return self.a / self.b

    def admits(self, params: ModelParams) -> bool:
        return params.p_f * (self.b * params.lam_f + self.a) < self.a

    @classmethod
    def minimal_for(cls, params: ModelParams) -> "TailBoundParams":
        """Smallest (a, 1) valid at these parameters: a = floor(lam*p/(1-p)) + 1."""
        a = int(math.floor(params.lam_f * params.p_f / (1.0 - params.p_f))) + 1
        tail = cls(a, 1)
        while not tail.admits(params):  # floor may land on the boundary
            tail = cls(tail.a + 1, 1)
        return tail


def _partial_product(lam: float, p: float, M: int):
    """Longdouble P_M = prod_{k=0}^{M}(1 + lam p^k), p^M, and a relative error bound.

    Each iteration performs three roundings that enter the product directly
    (lam*p^k, the add, the running multiply) and one that feeds forward
    through p^k.  The forward effect of the p^k error on log P_M is bounded
    by eps * lam * p / (1-p)^2, since the k-th factor is damped by p^k.
    """
    lam_ld = _LD(lam)
    p_ld = _LD(p)
    prod = _LD(1.0)
    pk = _LD(1.0)
    for _ in range(M + 1):
        prod *= _LD(1.0) + lam_ld * pk
        pk *= p_ld
    rel_err = _EPS_LD * (2.0 * (M + 1) + lam * p / (1.0 - p) ** 2 + 4.0)
    return prod, pk, rel_err


def _bounds_from_tail(lam: float, p: float, M: int, log_tail_ld) -> CertifiedInterval:
    prod, _, rel_err = _partial_product(lam, p, M)
    lo = _down(float(prod * _LD(1.0 - rel_err)))
    if not math.isfinite(lo):
        raise OverflowError(
            f"growth factor at lam={lam}, p={p} exceeds the double range; "
            "no representable certified bound exists"
        )
    # exp() and the tail-argument powers contribute a few more eps each
    tail_factor = np.exp(log_tail_ld)
    rel_hi = rel_err + _EPS_LD * (M + 4.0) * (1.0 + float(log_tail_ld))
    hi_ld = prod * tail_factor * _LD(1.0 + rel_hi)
    hi = math.inf if not np.isfinite(hi_ld) else _up(float(hi_ld))
    return CertifiedInterval(lo, hi)


def product_bounds(params: ModelParams, tail: TailBoundParams, M: int) -> CertifiedInterval:
    """Certified bracket of F(p, lam) with truncation tail exp((a/b) * p^M).

    Requires p < a / (b*lam + a); raises PreconditionViolatedError otherwise
    (the lower bound would still hold, but the upper one would not).
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    if not tail.admits(params):
        raise PreconditionViolatedError(
            f"tail (a={tail.a}, b={tail.b}) needs p < a/(b*lam+a); "
            f"got p={params.p_f}, lam={params.lam_f}"
        )
    lam, p = params.lam_f, params.p_f
    _, pk, _ = _partial_product(lam, p, M)
    p_M = pk / _LD(p)  # pk is p^(M+1)
    return _bounds_from_tail(lam, p, M, _LD(tail.a) / _LD(tail.b) * p_M)


def product_bounds_tight(params: ModelParams, M: int) -> CertifiedInterval:
    """Certified bracket of F(p, lam) with tail exp(lam * p^(M+1) / (1-p)).

    Valid for every p in (0, 1); this tail is what the sum of the dropped
    logarithms is actually bounded by, before any rounding up to (a/b)*p^M.
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    lam, p = params.lam_f, params.p_f
    _, pk, _ = _partial_product(lam, p, M)
    return _bounds_from_tail(lam, p, M, _LD(lam) * pk / (_LD(1.0) - _LD(p)))


def product_lower(params: ModelParams, M: int) -> float:
    """Certified lower bound P_M for F; available for every p in (0, 1)."""
    if M < 0:
        raise ValueError("M must be >= 0")
    prod, _, rel_err = _partial_product(params.lam_f, params.p_f, M)
    return _down(float(prod * _LD(1.0 - rel_err)))


def product_via_log_series(params: ModelParams, terms: int) -> float:
    """Evaluate F through its logarithmic series, as an independent cross-check.

    log of the k>=1 part of the product rearranges (absolutely, when
    lam*p < 1-p) into

        sum_{n>=1} ((-1)^(n+1) / n) * (lam*p)^n / (1 - p^n),

    so F = (1 + lam) * exp(partial sum).  Not certified: the caller owns
    the truncation-error budget (the tail is dominated by the geometric
    series in lam*p / (1-p)).
    """
    lam, p = params.lam_f, params.p_f
    if not lam * p < 1.0 - p:
        raise PreconditionViolatedError(
            f"log-series needs lam*p < 1-p; got lam={lam}, p={p}"
        )
    if terms < 1:
        raise ValueError("terms must be >= 1")
    acc = _LD(0.0)
    lp = _LD(lam) * _LD(p)
    lp_n = _LD(1.0)
    p_ld = _LD(p)
    p_n = _LD(1.0)
    for n in range(1, terms + 1):
        lp_n *= lp
        p_n *= p_ld
        term = lp_n / (_LD(n) * (_LD(1.0) - p_n))
        acc += term if n % 2 == 1 else -term
    return float((_LD(1.0) + _LD(lam)) * np.exp(acc))

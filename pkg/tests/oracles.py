"""Independent oracles for the test suite.

Everything here is deliberately implemented through routes the package does
not use: extended-precision arithmetic (mpmath), quadrature, exhaustive
enumeration, and a plain-``random`` Monte Carlo.  Expected values frozen
into the tests were produced by these oracles.
"""

import itertools
import math
import random
from fractions import Fraction

import mpmath as mp


def mp_product(p, lam, dps: int = 50):
    """prod_{k>=0}(1 + lam p^k) to ``dps`` digits, truncated far past that."""
    with mp.workdps(dps + 10):
        p = mp.mpf(p)
        lam = mp.mpf(lam)
        acc = mp.mpf(1)
        pk = mp.mpf(1)
        cutoff = mp.mpf(10) ** (-(dps + 8))
        while True:
            acc *= 1 + lam * pk
            pk *= p
            if lam * pk / (1 - p) < cutoff:
                return +acc


def quad_branching_mean(pgf, dps: int = 30):
    """Mean extinction time of unit-rate branching with offspring PGF ``pgf``.

    Uses the classical identity E[tau] = int_0^1 (1 - s) / (pgf(s) - s) ds,
    which never touches the package's closed forms.
    """
    with mp.workdps(dps):
        return +mp.quad(lambda s: (1 - s) / (pgf(s) - s), [0, 1])


def enumerate_label_distribution(n: int, d: int):
    """Exact distinct-label law by enumerating all d^n labelings."""
    counts = {}
    for labels in itertools.product(range(d), repeat=n):
        k = len(set(labels))
        counts[k] = counts.get(k, 0) + 1
    total = d**n
    return [Fraction(counts.get(k, 0), total) for k in range(1, min(n, d) + 1)]


def mc_branching_mean(probs, replicates: int, seed: int):
    """Monte Carlo mean extinction time for a finite offspring pmf.

    Plain ``random`` module, depth-first over the branching tree; only the
    maximum death time matters.  Returns (mean, standard error).
    """
    rng = random.Random(seed)
    cum = []
    acc = 0.0
    for q in probs:
        acc += q
        cum.append(acc)

    def draw_offspring() -> int:
        u = rng.random()
        for k, edge in enumerate(cum):
            if u <= edge:
                return k
        return len(cum) - 1

    totals = 0.0
    totals_sq = 0.0
    for _ in range(replicates):
        stack = [0.0]  # birth times
        t_max = 0.0
        while stack:
            death = stack.pop() + rng.expovariate(1.0)
            if death > t_max:
                t_max = death
            for _ in range(draw_offspring()):
                stack.append(death)
        totals += t_max
        totals_sq += t_max * t_max
    mean = totals / replicates
    var = (totals_sq - replicates * mean * mean) / (replicates - 1)
    return mean, math.sqrt(var / replicates)

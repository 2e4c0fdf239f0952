"""Monte Carlo oracle: event-driven simulation of all three dispersion models.

The simulator is deliberately independent of the closed forms so that it can
cross-validate them.  Dynamics per replicate:

* no dispersion: the individual count is a jump chain started at 1; the two
  competing exponential clocks (birth at rate lam, catastrophe at rate 1)
  are simulated jump by jump, and a catastrophe thins the count to
  Binomial(size, p).  The extinction time is the first hit of 0.
* tree / free dispersion: colonies are the particles.  A colony born at
  time t lives J ~ Exp(1); its size at the catastrophe is 1 + Poisson(lam*J)
  (no interior event is needed, the Poisson increment over the lifetime is
  exact), survivors are Binomial(size, p), and the offspring colonies are
  the number of distinct sites chosen by the survivors among d (tree), or
  the survivor count itself (free).  Pending catastrophes are processed in
  time order from a heap; extinction is the instant the last colony dies.

Reproducibility: replicate i draws from its own counter-based stream, a
Philox generator keyed by (seed, replicate_index).  Identical configs give
bit-identical results, and splitting a run into chunks via
``replicate_offset`` reproduces exactly the per-replicate outcomes of the
serial run.

Censoring: a replicate stops early when the next event would pass
``time_cap`` or when the live colony count exceeds ``colony_cap`` (for the
no-dispersion model the cap applies to individuals, its only unbounded
state).  Stopped runs are excluded from the mean and reported via
``censored_fraction``; cap-on-growth stops are additionally counted in
``survival_fraction``, the natural estimate of the survival probability in
a supercritical regime.
"""

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import (
    FreeDispersion,
    InvalidParameterError,
    ModelParams,
    NoDispersion,
    Topology,
    TreeDispersion,
)

__all__ = [
    "SimConfig",
    "SimEstimate",
    "replicate_rng",
    "simulate",
    "simulate_no_dispersion",
    "simulate_tree",
    "simulate_free",
    "sample_survivor_counts",
    "sample_offspring_counts",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    topo: Topology
    replicates: int = 100_000
    seed: int = 0
    time_cap: float = 1e4
    colony_cap: int = 10_000_000
    replicate_offset: int = 0  # first replicate index; enables chunked parallel runs

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidParameterError("replicates must be >= 1")
        if not self.time_cap > 0:
            raise InvalidParameterError("time_cap must be positive")
        if self.colony_cap < 1:
            raise InvalidParameterError("colony_cap must be >= 1")
        if self.replicate_offset < 0:
            raise InvalidParameterError("replicate_offset must be >= 0")


@dataclass(frozen=True)
class SimEstimate:
    """Aggregated extinction-time estimate over the uncensored replicates."""

    mean: float
    std_error: float
    censored_fraction: float
    survival_fraction: float
    replicates_used: int


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Stream for one replicate: Philox keyed by (seed, replicate_index)."""
    key = np.array([seed & _MASK64, replicate & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _aggregate(times, censored, survived, trace_rows, trace) -> SimEstimate:
    n = len(censored)
    times_arr = np.asarray(times, dtype=float)
    used = times_arr.size
    if used > 0:
        mean = float(times_arr.mean())
        std_error = float(times_arr.std(ddof=1) / math.sqrt(used)) if used > 1 else math.nan
    else:
        mean = math.nan
        std_error = math.nan
    if trace is not None:
        trace.extend(trace_rows)
    return SimEstimate(
        mean=mean,
        std_error=std_error,
        censored_fraction=sum(censored) / n,
        survival_fraction=sum(survived) / n,
        replicates_used=used,
    )


def simulate_no_dispersion(config: SimConfig, trace: Optional[list] = None) -> SimEstimate:
    """Simulate the single-colony model and estimate its mean extinction time."""
    if not isinstance(config.topo, NoDispersion):
        raise InvalidParameterError("config.topo must be NoDispersion")
    lam, p = config.params.lam_f, config.params.p_f
    rate = lam + 1.0
    birth_prob = lam / rate
    times, censored, survived, rows = [], [], [], []
    for i in range(config.replicate_offset, config.replicate_offset + config.replicates):
        rng = replicate_rng(config.seed, i)
        t = 0.0
        size = 1
        max_size = 1
        cens = surv = False
        while True:
            t += rng.exponential(1.0 / rate)
            if t > config.time_cap:
                cens = True
                break
            if rng.random() < birth_prob:
                size += 1
                if size > max_size:
                    max_size = size
                if size > config.colony_cap:
                    cens = surv = True
                    break
            else:
                size = int(rng.binomial(size, p))
                if size == 0:
                    break
        censored.append(cens)
        survived.append(surv)
        if not cens:
            times.append(t)
        if trace is not None:
            rows.append((i, math.nan if cens else t, max_size, cens))
    return _aggregate(times, censored, survived, rows, trace)


def _offspring_tree(rng, z: int, d: int) -> int:
    if z == 0:
        return 0
    return int(np.count_nonzero(rng.multinomial(z, [1.0 / d] * d)))


def _simulate_branching(config: SimConfig, offspring, trace) -> SimEstimate:
    lam, p = config.params.lam_f, config.params.p_f
    times, censored, survived, rows = [], [], [], []
    for i in range(config.replicate_offset, config.replicate_offset + config.replicates):
        rng = replicate_rng(config.seed, i)
        heap = [(rng.exponential(), 0.0)]  # (catastrophe time, birth time)
        max_colonies = 1
        last = 0.0
        cens = surv = False
        while heap:
            t_death, t_birth = heap[0]
            if t_death > config.time_cap:
                cens = True
                break
            heapq.heappop(heap)
            last = t_death
            size = 1 + int(rng.poisson(lam * (t_death - t_birth)))
            z = int(rng.binomial(size, p))
            for _ in range(offspring(rng, z)):
                heapq.heappush(heap, (t_death + rng.exponential(), t_death))
            if len(heap) > max_colonies:
                max_colonies = len(heap)
            if len(heap) > config.colony_cap:
                cens = surv = True
                break
        censored.append(cens)
        survived.append(surv)
        if not cens:
            times.append(last)
        if trace is not None:
            rows.append((i, math.nan if cens else last, max_colonies, cens))
    return _aggregate(times, censored, survived, rows, trace)


def simulate_tree(config: SimConfig, trace: Optional[list] = None) -> SimEstimate:
    """Simulate tree dispersion over d sites (any d >= 2)."""
    if not isinstance(config.topo, TreeDispersion):
        raise InvalidParameterError("config.topo must be TreeDispersion")
    d = config.topo.d
    return _simulate_branching(config, lambda rng, z: _offspring_tree(rng, z, d), trace)


def simulate_free(config: SimConfig, trace: Optional[list] = None) -> SimEstimate:
    """Simulate free dispersion: every survivor founds a colony."""
    if not isinstance(config.topo, FreeDispersion):
        raise InvalidParameterError("config.topo must be FreeDispersion")
    return _simulate_branching(config, lambda rng, z: z, trace)


def simulate(config: SimConfig, trace: Optional[list] = None) -> SimEstimate:
    """Dispatch on the configured topology."""
    if isinstance(config.topo, NoDispersion):
        return simulate_no_dispersion(config, trace)
    if isinstance(config.topo, TreeDispersion):
        return simulate_tree(config, trace)
    return simulate_free(config, trace)


def sample_survivor_counts(params: ModelParams, n: int, seed: int = 0) -> np.ndarray:
    """Draw n samples of the post-catastrophe survivor count Z.

    Z = Binomial(1 + Poisson(lam*J), p) with J ~ Exp(1); its law should
    match :class:`binomcat.formulas.SurvivorLaw`.
    """
    rng = replicate_rng(seed, 0)
    life = rng.exponential(size=n)
    size = 1 + rng.poisson(params.lam_f * life)
    return rng.binomial(size, params.p_f)


def sample_offspring_counts(params: ModelParams, d: int, n: int, seed: int = 0) -> np.ndarray:
    """Draw n samples of the colony-offspring count for tree dispersion.

    Pushes the survivor count through the label-collision map; the law
    should match :func:`binomcat.formulas.offspring_pmf`.
    """
    if d < 2:
        raise InvalidParameterError("need d >= 2")
    rng = replicate_rng(seed, 0)
    life = rng.exponential(size=n)
    size = 1 + rng.poisson(params.lam_f * life)
    z = rng.binomial(size, params.p_f)
    counts = rng.multinomial(z, [1.0 / d] * d)
    return np.count_nonzero(counts, axis=1)

import math

import numpy as np
import pytest
from scipy.stats import chisquare

from binomcat.formulas import (
    mean_time_free,
    mean_time_no_dispersion,
    mean_time_tree2,
    offspring_pmf,
    survivor_law,
)
from binomcat.model import (
    FreeDispersion,
    InvalidParameterError,
    ModelParams,
    NoDispersion,
    TreeDispersion,
)
from binomcat.simulator import (
    SimConfig,
    replicate_rng,
    sample_offspring_counts,
    sample_survivor_counts,
    simulate,
    simulate_free,
    simulate_no_dispersion,
    simulate_tree,
)


def _config(topo, lam, p, n, seed=17, **kw):
    return SimConfig(ModelParams(lam, p), topo, replicates=n, seed=seed, **kw)


class TestConfig:
    def test_validation(self):
        params = ModelParams(1.0, 0.5)
        with pytest.raises(InvalidParameterError):
            SimConfig(params, NoDispersion(), replicates=0)
        with pytest.raises(InvalidParameterError):
            SimConfig(params, NoDispersion(), time_cap=0.0)
        with pytest.raises(InvalidParameterError):
            SimConfig(params, NoDispersion(), colony_cap=0)
        with pytest.raises(InvalidParameterError):
            SimConfig(params, NoDispersion(), replicate_offset=-1)

    def test_topology_mismatch_rejected(self):
        cfg = _config(NoDispersion(), 1.0, 0.5, 10)
        with pytest.raises(InvalidParameterError):
            simulate_tree(cfg)
        with pytest.raises(InvalidParameterError):
            simulate_free(cfg)


class TestStreams:
    def test_distinct_replicate_streams(self):
        a = replicate_rng(7, 0).random(4)
        b = replicate_rng(7, 1).random(4)
        assert not np.allclose(a, b)
        assert np.array_equal(a, replicate_rng(7, 0).random(4))

    def test_bit_identical_reruns(self):
        cfg = _config(TreeDispersion(2), 0.5, 0.5, 400)
        tr_a, tr_b = [], []
        assert simulate(cfg, trace=tr_a) == simulate(cfg, trace=tr_b)
        assert tr_a == tr_b

    def test_chunked_equals_serial(self):
        serial, chunked = [], []
        simulate(_config(FreeDispersion(), 1.0, 0.25, 600, seed=3), trace=serial)
        simulate(_config(FreeDispersion(), 1.0, 0.25, 250, seed=3), trace=chunked)
        simulate(_config(FreeDispersion(), 1.0, 0.25, 350, seed=3, replicate_offset=250), trace=chunked)
        assert chunked == serial


class TestAgainstClosedForms:
    def test_no_dispersion(self):
        est = simulate_no_dispersion(_config(NoDispersion(), 1.0, 0.5, 20_000))
        truth = mean_time_no_dispersion(ModelParams(1.0, 0.5)).mid
        assert abs(est.mean - truth) < 3 * est.std_error
        assert est.censored_fraction == 0.0

    def test_tree2(self):
        est = simulate_tree(_config(TreeDispersion(2), 0.5, 0.5, 20_000))
        truth = mean_time_tree2(ModelParams(0.5, 0.5)).time
        assert abs(est.mean - truth) < 3 * est.std_error

    def test_free(self):
        est = simulate_free(_config(FreeDispersion(), 1.0, 0.25, 20_000))
        truth = mean_time_free(ModelParams(1.0, 0.25)).time
        assert abs(est.mean - truth) < 3 * est.std_error

    def test_tiny_p_single_clock(self):
        est = simulate_no_dispersion(_config(NoDispersion(), 1.0, 1e-6, 20_000))
        assert abs(est.mean - 1.0) < 3 * est.std_error


class TestSupercriticalAndCensoring:
    def test_tree_supercritical_survival(self):
        est = simulate_tree(_config(TreeDispersion(2), 0.5, 0.9, 400, colony_cap=200))
        assert est.survival_fraction > 0
        assert est.censored_fraction >= est.survival_fraction

    def test_free_supercritical_survival(self):
        est = simulate_free(_config(FreeDispersion(), 1.0, 0.6, 400, colony_cap=200))
        assert est.survival_fraction > 0

    def test_censoring_rare_well_inside_subcritical(self):
        # p at 90% of the threshold: heavy tails, but < 1% of runs hit time_cap 1e4
        thr = 0.8
        est = simulate_tree(_config(TreeDispersion(2), 0.5, 0.9 * thr, 10_000, time_cap=1e4))
        assert est.censored_fraction < 0.01
        assert est.replicates_used > 9_900

    def test_all_censored_gives_nan_mean(self):
        est = simulate_no_dispersion(_config(NoDispersion(), 1.0, 0.5, 50, time_cap=1e-9))
        assert math.isnan(est.mean)
        assert est.censored_fraction == 1.0
        assert est.replicates_used == 0

    def test_trace_rows_schema(self):
        rows = []
        simulate_tree(_config(TreeDispersion(2), 0.5, 0.9, 60, colony_cap=50), trace=rows)
        assert len(rows) == 60
        for rep, t, max_colonies, censored in rows:
            assert max_colonies >= 1
            assert censored == math.isnan(t)


class TestDistributionalLaws:
    def test_survivor_counts_match_geometric_law(self):
        params = ModelParams(1.0, 0.25)
        z = sample_survivor_counts(params, 20_000, seed=3)
        law = survivor_law(params)
        K = 12
        obs = np.bincount(np.minimum(z, K), minlength=K + 1)
        probs = [law.beta] + [law.pmf(n) for n in range(1, K)]
        probs.append(1.0 - sum(probs))
        _, pval = chisquare(obs, np.array(probs) * len(z))
        assert pval > 0.01

    def test_offspring_counts_match_collision_law(self):
        params = ModelParams(0.5, 0.5)
        k = sample_offspring_counts(params, 2, 20_000, seed=4)
        pmf = offspring_pmf(params, 2)
        obs = np.bincount(k, minlength=3)
        _, pval = chisquare(obs, np.array(pmf.probs) * len(k))
        assert pval > 0.01

    def test_offspring_counts_match_for_d5(self):
        params = ModelParams(2.0, 0.4)
        k = sample_offspring_counts(params, 5, 20_000, seed=5)
        pmf = offspring_pmf(params, 5)
        obs = np.bincount(k, minlength=6).astype(float)
        exp = np.array(pmf.probs) * len(k)
        while exp[-1] < 5:  # fold sparse top bins into their neighbour
            exp[-2] += exp[-1]
            obs[-2] += obs[-1]
            exp, obs = exp[:-1], obs[:-1]
        _, pval = chisquare(obs, exp * obs.sum() / exp.sum())
        assert pval > 0.01

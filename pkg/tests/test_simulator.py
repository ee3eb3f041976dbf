import dataclasses
import math

import numpy as np
import pytest

from fdtc.beamforming import BeamformerSet, Strategy
from fdtc.channel import AntennaConfig, ChannelSet
from fdtc.geometry import DeploymentParams, sample_network
from fdtc.simulator import (
    SystemParams,
    dump_trials,
    estimate_outage,
    run_trial,
    simulated_tc,
    trial_rng,
    trial_sinr,
)


def make_params(**overrides):
    base = dict(config=AntennaConfig(7, 3), strategy=Strategy.PROPOSED_FD,
                density=0.1, link_distance=1.0, power=1.0, alpha=4.0,
                beta=1.0, epsilon=0.1, sigma2_si=0.1, mean_pairs=200.0)
    base.update(overrides)
    return SystemParams(**base)


class TestSystemParams:
    def test_rate(self):
        assert make_params(beta=1.0).rate == 1.0
        assert make_params(beta=3.0).rate == 2.0

    def test_thresholds(self):
        assert make_params(beta=1.0).sinr_threshold() == 1.0
        hd = make_params(beta=1.0, strategy=Strategy.HALF_DUPLEX)
        assert hd.sinr_threshold() == 3.0
        hd2 = make_params(beta=math.sqrt(2.0) - 1.0,
                          strategy=Strategy.HALF_DUPLEX)
        assert hd2.sinr_threshold() == pytest.approx(1.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            make_params(alpha=2.0)
        with pytest.raises(ValueError):
            make_params(beta=0.0)
        with pytest.raises(ValueError):
            make_params(epsilon=1.0)
        with pytest.raises(ValueError):
            make_params(sigma2_si=-0.1)
        with pytest.raises(ValueError):
            make_params(density=-1.0)

    def test_deployment_mean_pairs(self):
        dep = make_params().deployment()
        assert dep.mean_pairs == pytest.approx(200.0)


class TestTrialAssembly:
    def test_textbook_point(self):
        # no interferers, no loopback error, unit-norm receive vector,
        # |z^H v|^2 = 1, P = 1, L = 1, gain 4  ->  SINR = 4
        config = AntennaConfig(2, 2)
        params = make_params(config=config, density=0.0, sigma2_si=0.0)
        realization = sample_network(
            DeploymentParams(density=0.0, pair_distance=1.0, disk_radius=1.0),
            np.random.default_rng(0))
        z = np.array([1.0 + 0.0j, 0.0j])
        channels = ChannelSet(config=config,
                              h_desired=np.eye(2, dtype=complex),
                              h_interferer_b=np.zeros((0, 2, 2), complex),
                              h_interferer_a=np.zeros((0, 2, 2), complex),
                              h_si_estimated=np.zeros((2, 2), complex),
                              h_si_error=np.zeros((2, 2), complex),
                              h_si_actual=np.zeros((2, 2), complex),
                              sigma2_si=0.0)
        beamformers = BeamformerSet(strategy=Strategy.PROPOSED_FD, config=config,
                                    w_typical_tx=np.array([1.0 + 0.0j, 0.0j]),
                                    w_partner_tx=np.array([1.0 + 0.0j, 0.0j]),
                                    w_interferers=np.zeros((0, 2, 2), complex),
                                    z_typical_rx=z,
                                    desired_direction=z,
                                    cancelled_pair_count=0,
                                    effective_gain=4.0,
                                    degenerate_alignment=False)
        noise = np.array([1.0 + 0.0j, 123.0j])   # z^H v = 1
        out = trial_sinr(params, realization, channels, beamformers,
                         np.zeros((0, 2, 2), complex), [], noise)
        assert out.sinr == pytest.approx(4.0, rel=1e-12)
        assert out.desired_power == 4.0
        assert out.interference_power == 0.0
        assert out.residual_si_power == 0.0
        assert out.noise_power == pytest.approx(1.0)
        assert out.outage == (out.sinr < params.sinr_threshold())
        assert not out.outage

    def test_noise_uses_actual_receive_vector_scale(self):
        # z deliberately not unit norm: the noise term must carry |z^H v|^2
        # with no hidden renormalization
        config = AntennaConfig(2, 2)
        params = make_params(config=config, density=0.0, sigma2_si=0.0,
                             power=4.0)
        realization = sample_network(
            DeploymentParams(density=0.0, pair_distance=1.0, disk_radius=1.0),
            np.random.default_rng(0))
        z = np.array([3.0 + 0.0j, 0.0j])
        channels = ChannelSet(config=config,
                              h_desired=np.eye(2, dtype=complex),
                              h_interferer_b=np.zeros((0, 2, 2), complex),
                              h_interferer_a=np.zeros((0, 2, 2), complex),
                              h_si_estimated=np.zeros((2, 2), complex),
                              h_si_error=np.zeros((2, 2), complex),
                              h_si_actual=np.zeros((2, 2), complex),
                              sigma2_si=0.0)
        beamformers = BeamformerSet(strategy=Strategy.PROPOSED_FD,
                                    config=config,
                                    w_typical_tx=np.array([1.0 + 0.0j, 0.0j]),
                                    w_partner_tx=np.array([1.0 + 0.0j, 0.0j]),
                                    w_interferers=np.zeros((0, 2, 2), complex),
                                    z_typical_rx=z,
                                    desired_direction=z / 3.0,
                                    cancelled_pair_count=0,
                                    effective_gain=1.0,
                                    degenerate_alignment=False)
        noise = np.array([2.0 + 0.0j, 0.0j])   # z^H v = 6
        out = trial_sinr(params, realization, channels, beamformers,
                         np.zeros((0, 2, 2), complex), [], noise)
        assert out.noise_power == pytest.approx(36.0 / 4.0, rel=1e-12)

    def test_tiny_threshold_never_outage(self):
        params = make_params(beta=1e-9)
        out = run_trial(params, seed=0, trial_index=0)
        assert not out.outage

    def test_outcome_identity(self):
        params = make_params()
        out = run_trial(params, seed=3, trial_index=5)
        recomputed = out.desired_power / (out.interference_power
                                          + out.residual_si_power
                                          + out.noise_power)
        assert out.sinr == pytest.approx(recomputed, rel=1e-12)
        assert out.outage == (out.sinr < params.sinr_threshold())

    def test_cancelled_terms_negligible(self):
        params = make_params(config=AntennaConfig(11, 5))
        for i in range(10):
            out = run_trial(params, seed=11, trial_index=i)
            assert out.cancelled_interference_power \
                <= 1e-20 * max(out.interference_power, 1e-300)

    def test_hd_trial_has_no_loopback(self):
        params = make_params(strategy=Strategy.HALF_DUPLEX)
        out = run_trial(params, seed=2, trial_index=0)
        assert out.residual_si_power == 0.0


class TestDeterminism:
    def test_bit_identical_estimates(self):
        params = make_params()
        a = estimate_outage(params, 150, seed=9)
        b = estimate_outage(params, 150, seed=9)
        assert a == b

    def test_chunking_invariance(self):
        params = make_params(config=AntennaConfig(4, 4))
        a = estimate_outage(params, 120, seed=5, chunk_trials=11)
        b = estimate_outage(params, 120, seed=5, chunk_trials=120)
        assert a == b

    @pytest.mark.parametrize("strategy", [Strategy.PROPOSED_FD,
                                          Strategy.SVD_ONLY_FD,
                                          Strategy.SVD_PARTIAL_ZF_FD,
                                          Strategy.PARTIAL_ZF_ONLY_FD,
                                          Strategy.HALF_DUPLEX])
    def test_single_trial_reference_matches_engine(self, strategy):
        config = AntennaConfig(7, 3) if strategy is Strategy.PROPOSED_FD \
            else AntennaConfig(5, 3)
        params = make_params(config=config, strategy=strategy)
        p_hat, _ = estimate_outage(params, 60, seed=21, chunk_trials=13)
        ref = sum(run_trial(params, 21, i).outage for i in range(60)) / 60
        assert p_hat == ref

    def test_substream_independence_of_order(self):
        params = make_params()
        direct = [run_trial(params, 7, i).sinr for i in (4, 2, 9)]
        reverse = [run_trial(params, 7, i).sinr for i in (9, 2, 4)]
        assert direct == reverse[::-1]

    def test_trial_rng_streams_differ(self):
        a = trial_rng(1, 0).standard_normal(4)
        b = trial_rng(1, 1).standard_normal(4)
        assert not np.allclose(a, b)


class TestStatisticalBehaviour:
    def test_outage_monotone_in_density(self):
        params = make_params(config=AntennaConfig(4, 4))
        probs = [estimate_outage(dataclasses.replace(params, density=lam),
                                 800, seed=31)[0]
                 for lam in (0.02, 0.1, 0.5)]
        # allow 3-sigma wiggle on the coarse grid
        tol = 3.0 * math.sqrt(0.25 / 800)
        assert probs[0] <= probs[1] + tol
        assert probs[1] <= probs[2] + tol

    def test_outage_monotone_in_threshold(self):
        params = make_params()
        probs = [estimate_outage(dataclasses.replace(params, beta=b),
                                 800, seed=32)[0]
                 for b in (0.25, 1.0, 4.0)]
        tol = 3.0 * math.sqrt(0.25 / 800)
        assert probs[0] <= probs[1] + tol
        assert probs[1] <= probs[2] + tol

    def test_outage_monotone_in_si_error(self):
        params = make_params()
        probs = [estimate_outage(dataclasses.replace(params, sigma2_si=s),
                                 800, seed=33)[0]
                 for s in (0.0, 0.1, 1.0)]
        tol = 3.0 * math.sqrt(0.25 / 800)
        assert probs[0] <= probs[1] + tol
        assert probs[1] <= probs[2] + tol

    def test_huge_threshold_always_outage(self):
        params = make_params(beta=1e12)
        p, _ = estimate_outage(params, 50, seed=1)
        assert p == 1.0

    def test_clean_isolated_link_never_outage(self):
        params = make_params(density=0.0, sigma2_si=0.0, power=1e9,
                             beta=0.01)
        p, _ = estimate_outage(params, 50, seed=2)
        assert p == 0.0


class TestSimulatedTc:
    def test_zero_when_floor_exceeds_target(self):
        params = make_params(config=AntennaConfig(11, 5),
                             strategy=Strategy.PARTIAL_ZF_ONLY_FD)
        result = simulated_tc(params, trials=800, seed=3)
        assert result.zero_tc
        assert result.capacity == 0.0
        assert len(result.probes) == 1

    def test_capacity_formula_fd(self):
        params = make_params(config=AntennaConfig(4, 4), epsilon=0.1, beta=1.0)
        result = simulated_tc(params, trials=400, seed=4, bisect_steps=6)
        if not result.zero_tc:
            assert result.capacity == pytest.approx(
                result.density_solved * 0.9 * 1.0, rel=1e-12)

    def test_capacity_formula_hd_doubles(self):
        params = make_params(strategy=Strategy.HALF_DUPLEX, epsilon=0.1,
                             beta=1.0)
        result = simulated_tc(params, trials=400, seed=5, bisect_steps=6)
        if not result.zero_tc:
            assert result.capacity == pytest.approx(
                2.0 * result.density_solved * 0.9 * 1.0, rel=1e-12)

    def test_deterministic(self):
        params = make_params(config=AntennaConfig(4, 4))
        a = simulated_tc(params, trials=200, seed=6, bisect_steps=4)
        b = simulated_tc(params, trials=200, seed=6, bisect_steps=4)
        assert a == b

    def test_probe_densities_bracket(self):
        params = make_params(config=AntennaConfig(4, 4))
        result = simulated_tc(params, trials=200, seed=7, bisect_steps=4)
        if not (result.zero_tc or result.bracket_failed):
            densities = [d for d, _ in result.probes]
            assert result.density_solved <= max(densities)
            assert result.density_solved >= min(densities)


class TestTrialDump:
    def test_jsonl_matches_reference_path(self, tmp_path):
        import json

        params = make_params()
        path = tmp_path / "trials.jsonl"
        dump_trials(params, 5, seed=17, path=path)
        lines = path.read_text().splitlines()
        assert len(lines) == 5
        for i, line in enumerate(lines):
            doc = json.loads(line)
            out = run_trial(params, 17, i)
            assert doc["trial"] == i
            assert doc["sinr"] == out.sinr
            assert doc["outage"] == out.outage
            assert doc["residual_si_power"] == out.residual_si_power

"""Network generation, pathloss, association, and coherence tests."""

import itertools
import math

import numpy as np
import pytest

from bscluster.network import (
    INFINITE_COHERENCE,
    ScenarioConfig,
    coherence_block_length,
    deployment_square_side,
    derive_rng,
    dbm_to_watts,
    generate_network,
    greedy_associate,
    link_gains,
    noise_power_dbm,
    pathloss_db,
)


class TestDeploymentSquare:
    def test_single_cell(self):
        assert deployment_square_side(1, 250.0) == pytest.approx(465.30, abs=0.01)

    def test_four_cells_doubles_side(self):
        assert deployment_square_side(4, 250.0) == pytest.approx(
            2 * deployment_square_side(1, 250.0), rel=1e-12
        )

    def test_rejects_zero_apothem(self):
        with pytest.raises(ValueError):
            deployment_square_side(1, 0.0)


class TestPathloss:
    def test_one_meter(self):
        assert pathloss_db(1.0) == pytest.approx(15.3, abs=1e-12)

    def test_one_kilometer(self):
        # 15.3 + 37.6*3; equals the 128.1 + 37.6*log10(d_km) form at 1 km
        assert pathloss_db(1000.0) == pytest.approx(128.1, abs=1e-9)

    def test_clamps_below_one_meter(self):
        assert pathloss_db(0.2) == pathloss_db(1.0)


class TestNoisePower:
    def test_ten_megahertz(self):
        cfg = ScenarioConfig(
            num_users=1, bs_antennas=2, ms_antennas=2,
            noise_psd_dbm_hz=-174.0, system_bandwidth_hz=10e6, noise_figure_db=9.0,
        )
        assert noise_power_dbm(cfg) == pytest.approx(-95.0, abs=1e-9)

    def test_unit_bandwidth_identity(self):
        cfg = ScenarioConfig(
            num_users=1, bs_antennas=2, ms_antennas=2,
            noise_psd_dbm_hz=-174.0, system_bandwidth_hz=1.0,
            coherence_bandwidth_hz=1.0, noise_figure_db=0.0,
        )
        assert noise_power_dbm(cfg) == pytest.approx(-174.0, abs=1e-12)

    def test_coherence_bandwidth_case(self):
        cfg = ScenarioConfig(
            num_users=1, bs_antennas=2, ms_antennas=2,
            noise_psd_dbm_hz=-174.0, system_bandwidth_hz=300e3, noise_figure_db=9.0,
        )
        assert noise_power_dbm(cfg) == pytest.approx(-110.23, abs=0.005)


class TestCoherenceBlock:
    def test_paper_anchor_exact(self):
        assert coherence_block_length(30.0, 2e9, 300e3) == 2700.0

    def test_inverse_in_speed(self):
        assert coherence_block_length(60.0, 2e9, 300e3) == pytest.approx(1350.0)

    def test_linear_in_coherence_bandwidth(self):
        assert coherence_block_length(30.0, 2e9, 600e3) == pytest.approx(5400.0)

    def test_zero_speed_sentinel(self):
        assert coherence_block_length(0.0, 2e9, 300e3) == INFINITE_COHERENCE

    def test_speed_times_length_constant(self):
        values = [coherence_block_length(v, 2e9, 300e3) * v for v in (3, 7.5, 30, 240)]
        assert all(x == pytest.approx(values[0], rel=1e-12) for x in values)

    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            coherence_block_length(-1.0, 2e9, 300e3)


class TestScenarioConfig:
    def test_rejects_multi_stream(self):
        with pytest.raises(ValueError):
            ScenarioConfig(num_users=2, bs_antennas=4, ms_antennas=2, streams=2)

    def test_rejects_fewer_bs_antennas(self):
        with pytest.raises(ValueError):
            ScenarioConfig(num_users=2, bs_antennas=2, ms_antennas=4)

    def test_rejects_wide_coherence_bandwidth(self):
        with pytest.raises(ValueError):
            ScenarioConfig(
                num_users=2, bs_antennas=4, ms_antennas=2,
                system_bandwidth_hz=1e5, coherence_bandwidth_hz=3e5,
            )


class TestGreedyAssociate:
    def test_diagonal_dominant(self):
        gains = np.array([[10.0, 1.0], [1.0, 10.0]])
        assert greedy_associate(gains) == (0, 1)

    def test_swap(self):
        gains = np.array([[1.0, 5.0], [5.0, 1.0]])
        assert greedy_associate(gains) == (1, 0)

    def test_matches_brute_force_trace(self):
        # the greedy pick sequence is the lexicographically largest sorted
        # gain tuple over all bijections - brute-force that definition
        rng = np.random.default_rng(77)
        for _ in range(25):
            gains = rng.uniform(0.1, 1.0, size=(4, 4))
            best_perm, best_trace = None, None
            for perm in itertools.permutations(range(4)):
                trace = tuple(sorted((gains[perm[l], l] for l in range(4)), reverse=True))
                if best_trace is None or trace > best_trace:
                    best_trace, best_perm = trace, perm
            assert greedy_associate(gains) == best_perm

    def test_bijection_and_scale_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            gains = rng.uniform(0.01, 1.0, size=(6, 6))
            assoc = greedy_associate(gains)
            assert sorted(assoc) == list(range(6))
            assert greedy_associate(gains * 1234.5) == assoc


class TestGenerateNetwork:
    CFG = ScenarioConfig(num_users=2, bs_antennas=4, ms_antennas=2)

    def test_deterministic_given_seed(self):
        a = generate_network(self.CFG, derive_rng(42, 0))
        b = generate_network(self.CFG, derive_rng(42, 0))
        assert np.array_equal(a.gamma, b.gamma)
        assert np.array_equal(a.bs_positions, b.bs_positions)
        assert a.association == b.association

    def test_different_streams_differ(self):
        a = generate_network(self.CFG, derive_rng(42, 0))
        b = generate_network(self.CFG, derive_rng(42, 1))
        assert not np.array_equal(a.gamma, b.gamma)

    def test_direct_gain_formula(self):
        # single link at 100 m with no shadowing
        gains = link_gains(
            np.array([[0.0, 0.0]]), np.array([[100.0, 0.0]]), np.zeros((1, 1))
        )
        assert gains[0, 0] == pytest.approx(10 ** (-(15.3 + 37.6 * 2) / 10), rel=1e-12)

    def test_gain_monotone_in_distance(self):
        bs = np.array([[0.0, 0.0]])
        for d1, d2 in ((5, 10), (10, 100), (100, 5000)):
            g1 = link_gains(bs, np.array([[d1, 0.0]]), np.zeros((1, 1)))[0, 0]
            g2 = link_gains(bs, np.array([[d2, 0.0]]), np.zeros((1, 1)))[0, 0]
            assert g1 > g2

    def test_association_reindexing(self):
        cfg = ScenarioConfig(num_users=4, bs_antennas=4, ms_antennas=2, shadow_std_db=0.0)
        net = generate_network(cfg, derive_rng(7, 0))
        raw = link_gains(net.bs_positions, net.ms_positions, np.zeros((4, 4)))
        for k in range(4):
            assert net.gamma[k, k] == pytest.approx(raw[net.association[k], k], rel=1e-12)

    def test_noise_and_power_in_watts(self):
        net = generate_network(self.CFG, derive_rng(0, 0))
        assert net.noise_power_w == pytest.approx(dbm_to_watts(-95.0), rel=1e-12)
        assert net.tx_power_w == pytest.approx(dbm_to_watts(18.2), rel=1e-12)

    def test_mean_pair_distance_matches_uniform_square(self):
        # Monte Carlo oracle: mean distance between independent uniform
        # points on the deployment square, sampled with raw numpy draws
        cfg = ScenarioConfig(num_users=8, bs_antennas=4, ms_antennas=2)
        side = deployment_square_side(8, cfg.cell_apothem_m)

        samples = []
        for seed in range(500):
            net = generate_network(cfg, derive_rng(1000, seed))
            diff = net.ms_positions[:, None, :] - net.bs_positions[None, :, :]
            samples.append(np.hypot(diff[..., 0], diff[..., 1]).ravel())
        observed = np.concatenate(samples)

        oracle_rng = np.random.default_rng(31337)
        a = oracle_rng.uniform(0, side, size=(40_000, 2))
        b = oracle_rng.uniform(0, side, size=(40_000, 2))
        oracle = np.hypot(*(a - b).T)

        se = math.sqrt(
            observed.var() / observed.size + oracle.var() / oracle.size
        )
        assert abs(observed.mean() - oracle.mean()) < 3 * se

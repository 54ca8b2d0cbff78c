"""Random network realizations and statistical channel gains.

K base stations and K mobile stations are dropped uniformly on a square
sized so the average cell area matches hexagonal cells with the configured
apothem.  Large-scale gains combine 3GPP-style log-distance pathloss with
i.i.d. log-normal shadowing; a greedy association pairs each BS with one
MS, after which the gain matrix is re-indexed so user k is the pair
(BS k, its associated MS).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 3e8
#: Distances below this are clamped before the pathloss evaluation.
MIN_PATHLOSS_DISTANCE_M = 1.0
#: Coherence block length reported for a static (zero-speed) channel.
INFINITE_COHERENCE = math.inf


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and dimensional parameters of a symmetric (N x M, d)^K network."""

    num_users: int
    bs_antennas: int
    ms_antennas: int
    streams: int = 1
    tx_power_dbm: float = 18.2
    carrier_freq_hz: float = 2e9
    system_bandwidth_hz: float = 10e6
    coherence_bandwidth_hz: float = 300e3
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 9.0
    shadow_std_db: float = 8.0
    cell_apothem_m: float = 250.0
    ms_speed_kmh: float = 30.0

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.bs_antennas < 1 or self.ms_antennas < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.streams != 1:
            raise ValueError("only single-stream (d=1) scenarios are supported")
        if self.bs_antennas < self.ms_antennas:
            # joint feedback estimation needs M >= N
            raise ValueError("bs_antennas must be >= ms_antennas")
        if self.coherence_bandwidth_hz > self.system_bandwidth_hz:
            raise ValueError("coherence bandwidth cannot exceed system bandwidth")
        if self.system_bandwidth_hz <= 0 or self.carrier_freq_hz <= 0:
            raise ValueError("bandwidth and carrier frequency must be positive")
        if self.shadow_std_db < 0 or self.cell_apothem_m <= 0:
            raise ValueError("shadow std must be >= 0 and apothem > 0")
        if self.ms_speed_kmh < 0:
            raise ValueError("ms_speed_kmh must be >= 0")


@dataclass(frozen=True, eq=False)
class Network:
    """One realization of positions, association, and statistical CSI.

    ``gamma[k, l]`` is the linear-scale average gain from BS l to the MS of
    user k (post-association, 0-based indexing internally).
    """

    bs_positions: np.ndarray
    ms_positions: np.ndarray
    association: tuple[int, ...]
    gamma: np.ndarray
    noise_power_w: float
    tx_power_w: float

    @property
    def num_users(self) -> int:
        return self.gamma.shape[0]


def derive_rng(seed: int, *stream: int) -> np.random.Generator:
    """Reproducible generator for (seed, stream...); same inputs, same draws."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.default_rng(ss)


def deployment_square_side(num_users: int, apothem_m: float) -> float:
    """Side of the square whose area equals K hexagonal cells of given apothem."""
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    if apothem_m <= 0:
        raise ValueError("apothem must be > 0")
    hex_area = 2.0 * math.sqrt(3.0) * apothem_m**2
    return math.sqrt(num_users * hex_area)


def pathloss_db(distance_m: float) -> float:
    """Log-distance pathloss 15.3 + 37.6*log10(d[m]), clamped below 1 m."""
    d = max(float(distance_m), MIN_PATHLOSS_DISTANCE_M)
    return 15.3 + 37.6 * math.log10(d)


def noise_power_dbm(config: ScenarioConfig) -> float:
    """Thermal noise over the full system bandwidth plus the receiver noise figure."""
    return (
        config.noise_psd_dbm_hz
        + 10.0 * math.log10(config.system_bandwidth_hz)
        + config.noise_figure_db
    )


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def coherence_block_length(
    speed_kmh: float, carrier_freq_hz: float, coherence_bw_hz: float
) -> float:
    """Coherence block length T_c * W_c in symbols, T_c = c / (2 v f_c).

    A zero speed means a static channel; the infinite-coherence sentinel is
    returned and maps to a unit pre-log factor downstream.
    """
    if speed_kmh < 0:
        raise ValueError("speed must be >= 0")
    if speed_kmh == 0:
        return INFINITE_COHERENCE
    speed_m_s = speed_kmh / 3.6
    coherence_time_s = SPEED_OF_LIGHT_M_S / (2.0 * speed_m_s * carrier_freq_hz)
    return coherence_time_s * coherence_bw_hz


def greedy_associate(gains: np.ndarray) -> tuple[int, ...]:
    """Greedy BS-MS association on a K x K gain matrix (rows: MS, cols: BS).

    Repeatedly assigns the globally largest remaining entry and removes its
    row and column; ties break toward the lowest (ms, bs) index pair.
    Returns ``assoc`` with ``assoc[bs] = ms``.
    """
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 2 or gains.shape[0] != gains.shape[1]:
        raise ValueError("gains must be a square matrix")
    num = gains.shape[0]
    free_ms = [True] * num
    free_bs = [True] * num
    assoc = [-1] * num
    for _ in range(num):
        best = None
        best_val = -math.inf
        for k in range(num):
            if not free_ms[k]:
                continue
            for l in range(num):
                if free_bs[l] and gains[k, l] > best_val:
                    best_val = gains[k, l]
                    best = (k, l)
        assert best is not None
        k, l = best
        assoc[l] = k
        free_ms[k] = False
        free_bs[l] = False
    return tuple(assoc)


def link_gains(
    bs_positions: np.ndarray,
    ms_positions: np.ndarray,
    shadow_db: np.ndarray,
) -> np.ndarray:
    """Linear gains 10^-((PL(d) + shadow)/10) for every MS-BS pair.

    Row k, column l is the link from BS l to MS k; ``shadow_db`` must have
    that same orientation.
    """
    bs = np.asarray(bs_positions, dtype=float)
    ms = np.asarray(ms_positions, dtype=float)
    diff = ms[:, None, :] - bs[None, :, :]
    dist = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), MIN_PATHLOSS_DISTANCE_M)
    pl_db = 15.3 + 37.6 * np.log10(dist)
    return 10.0 ** (-(pl_db + np.asarray(shadow_db, dtype=float)) / 10.0)


def generate_network(config: ScenarioConfig, rng: np.random.Generator) -> Network:
    """Draw one network realization; a pure function of (config, rng state).

    Draw order is fixed: BS positions, MS positions, then the K x K shadow
    matrix, so a given (seed, stream) always produces the same network.
    """
    num = config.num_users
    side = deployment_square_side(num, config.cell_apothem_m)
    bs_positions = rng.uniform(0.0, side, size=(num, 2))
    ms_positions = rng.uniform(0.0, side, size=(num, 2))
    shadow_db = rng.normal(0.0, config.shadow_std_db, size=(num, num))
    raw_gains = link_gains(bs_positions, ms_positions, shadow_db)
    association = greedy_associate(raw_gains)
    # user k = (BS k, its associated MS): permute rows so gamma[k, k] is direct
    gamma = raw_gains[np.array(association), :]
    return Network(
        bs_positions=bs_positions,
        ms_positions=ms_positions,
        association=association,
        gamma=gamma,
        noise_power_w=dbm_to_watts(noise_power_dbm(config)),
        tx_power_w=dbm_to_watts(config.tx_power_dbm),
    )

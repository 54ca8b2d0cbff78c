"""Long-term throughput model for clustered interference networks.

For a coalition structure S, each user's per-stream SNR treats all
out-of-coalition interference as noise:

    rho_k(S) = (gamma_kk * P / d) / (sum_{l not in k's coalition} gamma_kl * P + sigma^2)

The long-term spectral efficiency is the Rayleigh-fading average
d * e^(1/rho) * E1(1/rho) (reported in bits/channel use), and the
throughput scales it by a pre-log factor alpha(S) that pays for CSI
acquisition overhead out of the coherence block, gated to zero whenever
interference alignment is infeasible for the user's coalition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import Network, ScenarioConfig, coherence_block_length
from .partitions import CoalitionStructure
from .specfun import exp_scaled_e1

LOG2_E = math.log2(math.e)


@dataclass(frozen=True, eq=False)
class RateContext:
    """Everything the throughput map needs about one network realization."""

    gamma: np.ndarray
    tx_power_w: float
    noise_power_w: float
    bs_antennas: int
    ms_antennas: int
    streams: int
    coherence_block_symbols: float  # math.inf means a static channel

    def __post_init__(self) -> None:
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise ValueError("gamma must be a square matrix")
        if np.any(gamma <= 0):
            raise ValueError("gamma entries must be strictly positive")
        object.__setattr__(self, "gamma", gamma)
        if self.tx_power_w <= 0 or self.noise_power_w <= 0:
            raise ValueError("powers must be positive")
        if self.streams != 1:
            raise ValueError("only d=1 is supported")
        if self.coherence_block_symbols <= 0:
            raise ValueError("coherence block length must be positive")

    @property
    def num_users(self) -> int:
        return self.gamma.shape[0]

    @classmethod
    def from_network(cls, network: Network, config: ScenarioConfig) -> "RateContext":
        return cls(
            gamma=network.gamma,
            tx_power_w=network.tx_power_w,
            noise_power_w=network.noise_power_w,
            bs_antennas=config.bs_antennas,
            ms_antennas=config.ms_antennas,
            streams=config.streams,
            coherence_block_symbols=coherence_block_length(
                config.ms_speed_kmh,
                config.carrier_freq_hz,
                config.coherence_bandwidth_hz,
            ),
        )


@dataclass(frozen=True)
class ThroughputReport:
    """Per-user throughputs for one structure, plus the shared pre-log."""

    per_user: tuple[float, ...]  # bits/channel use, user order 1..K
    prelog: float
    feasible_flags: tuple[bool, ...]  # aligned with the structure's blocks
    sum: float


def ia_feasible(
    coalition_size: int, bs_antennas: int, ms_antennas: int, streams: int
) -> bool:
    """Properness test for a symmetric coalition-size-user (N x M, d) channel.

    Alignment is proper iff d <= (M + N) / (|C| + 1); for generic
    single-stream MIMO channels properness coincides with feasibility.
    """
    if min(coalition_size, bs_antennas, ms_antennas, streams) < 1:
        raise ValueError("arguments must be positive integers")
    return streams * (coalition_size + 1) <= bs_antennas + ms_antennas


def per_stream_snr(ctx: RateContext, structure: CoalitionStructure, user: int) -> float:
    """rho_k(S): desired power per stream over out-of-coalition interference plus noise."""
    row = ctx.gamma[user - 1]
    coalition = structure.coalition_of(user)
    in_coalition = sum(row[l - 1] for l in coalition)
    interference = (float(row.sum()) - in_coalition) * ctx.tx_power_w
    desired = row[user - 1] * ctx.tx_power_w / ctx.streams
    return desired / (interference + ctx.noise_power_w)


def longterm_se(ctx: RateContext, structure: CoalitionStructure, user: int) -> float:
    """Average spectral efficiency d * e^(1/rho) * E1(1/rho), in bits/channel use."""
    rho = per_stream_snr(ctx, structure, user)
    return ctx.streams * exp_scaled_e1(1.0 / rho) * LOG2_E


def csi_overhead_symbols(
    coalition_size: int, bs_antennas: int, ms_antennas: int, streams: int
) -> int:
    """Symbol intervals a coalition spends acquiring CSI at the transmitters.

    DL training (c*M) + UL training (c*N) + analog feedback (c^2*M) + DL
    effective-channel training (c*d); the feedback term dominates for large
    coalitions.
    """
    c = coalition_size
    if c < 1:
        raise ValueError("coalition_size must be >= 1")
    return c * bs_antennas + c * ms_antennas + c * c * bs_antennas + c * streams


def prelog(structure: CoalitionStructure, ctx: RateContext) -> float:
    """Fraction of the coherence block left for data, clamped to [0, 1]."""
    if math.isinf(ctx.coherence_block_symbols):
        return 1.0
    total = sum(
        csi_overhead_symbols(len(b), ctx.bs_antennas, ctx.ms_antennas, ctx.streams)
        for b in structure.blocks
    )
    return max(0.0, 1.0 - total / ctx.coherence_block_symbols)


def throughput(ctx: RateContext, structure: CoalitionStructure) -> ThroughputReport:
    """Long-term throughput t_k(S) for every user under structure S.

    t_k = alpha(S) * r_k(S) when alignment is feasible for k's coalition,
    otherwise 0.
    """
    if structure.num_users != ctx.num_users:
        raise ValueError("structure and context disagree on K")
    alpha = prelog(structure, ctx)
    flags = tuple(
        ia_feasible(len(b), ctx.bs_antennas, ctx.ms_antennas, ctx.streams)
        for b in structure.blocks
    )
    per_user = [0.0] * ctx.num_users
    if alpha > 0.0:
        for block, feasible in zip(structure.blocks, flags):
            if not feasible:
                continue
            for user in block:
                per_user[user - 1] = alpha * longterm_se(ctx, structure, user)
    return ThroughputReport(
        per_user=tuple(per_user),
        prelog=alpha,
        feasible_flags=flags,
        sum=math.fsum(per_user),
    )

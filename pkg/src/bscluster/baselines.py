"""Benchmark clustering methods: exhaustive optimum, geographic k-means, and
the trivial grand / singleton / random structures."""

from __future__ import annotations

import enum
import math
from functools import lru_cache

import numpy as np

from .partitions import (
    ENUMERATION_CAP,
    CoalitionStructure,
    enumerate_partitions,
)
from .rate_model import (
    LOG2_E,
    RateContext,
    csi_overhead_symbols,
    ia_feasible,
    throughput,
)
from .specfun import exp_scaled_e1


class MethodId(enum.Enum):
    """Clustering methods known to the experiment harness."""

    FORMATION = "formation"
    EXHAUSTIVE = "exhaustive"
    GRAND = "grand"
    SINGLETONS = "singletons"
    RANDOM = "random"
    KMEANS = "kmeans"

    def __str__(self) -> str:
        return self.value


@lru_cache(maxsize=4)
def _all_partitions(num_users: int) -> tuple[CoalitionStructure, ...]:
    return tuple(enumerate_partitions(num_users))


def _partition_stream(num_users: int):
    # cache the full list only while it is comfortably small
    if num_users <= 10:
        return _all_partitions(num_users)
    return enumerate_partitions(num_users)


def exhaustive_best(ctx: RateContext) -> tuple[CoalitionStructure, float]:
    """Globally optimal structure by enumerating every partition.

    Sum throughput decomposes as alpha(S) * sum over coalitions of a
    per-coalition rate sum, so per-coalition values are cached and each
    partition costs only a few lookups.  Ties keep the earliest partition
    in canonical enumeration order.
    """
    num = ctx.num_users
    if num > ENUMERATION_CAP:
        raise ValueError(f"K={num} exceeds the enumeration cap {ENUMERATION_CAP}")
    gamma = ctx.gamma
    row_totals = gamma.sum(axis=1)
    power = ctx.tx_power_w
    noise = ctx.noise_power_w
    d = ctx.streams

    rate_cache: dict[tuple[int, ...], float] = {}
    overhead_cache: dict[int, int] = {}

    def coalition_rate_sum(block: tuple[int, ...]) -> float:
        cached = rate_cache.get(block)
        if cached is not None:
            return cached
        if not ia_feasible(len(block), ctx.bs_antennas, ctx.ms_antennas, d):
            rate_cache[block] = 0.0
            return 0.0
        total = 0.0
        for user in block:
            row = gamma[user - 1]
            inside = sum(row[l - 1] for l in block)
            rho = (row[user - 1] * power / d) / (
                (row_totals[user - 1] - inside) * power + noise
            )
            total += d * exp_scaled_e1(1.0 / rho) * LOG2_E
        rate_cache[block] = total
        return total

    def coalition_overhead(size: int) -> int:
        cached = overhead_cache.get(size)
        if cached is None:
            cached = csi_overhead_symbols(size, ctx.bs_antennas, ctx.ms_antennas, d)
            overhead_cache[size] = cached
        return cached

    l_coh = ctx.coherence_block_symbols
    best_structure: CoalitionStructure | None = None
    best_sum = -math.inf
    for structure in _partition_stream(num):
        if math.isinf(l_coh):
            alpha = 1.0
        else:
            overhead = sum(coalition_overhead(len(b)) for b in structure.blocks)
            alpha = 1.0 - overhead / l_coh
        if alpha <= 0.0:
            total = 0.0
        else:
            total = alpha * math.fsum(
                coalition_rate_sum(b) for b in structure.blocks
            )
        if total > best_sum or (
            total == best_sum
            and best_structure is not None
            and structure.blocks < best_structure.blocks
        ):
            best_sum = total
            best_structure = structure
    assert best_structure is not None
    return best_structure, best_sum


def kmeans_clusters(
    bs_positions: np.ndarray, num_clusters: int, rng: np.random.Generator
) -> CoalitionStructure:
    """Lloyd's algorithm on BS coordinates, mapped to a coalition structure.

    Centers are seeded farthest-point style (first pick from the rng, each
    next center the point farthest from the chosen set).  Points are
    assigned closest-first, and assignment ties break toward the smaller
    current cluster, then the lower center index, so symmetric layouts
    split evenly.  Emptied clusters are reseeded from the point farthest
    from its assigned center.
    """
    positions = np.asarray(bs_positions, dtype=float)
    num = positions.shape[0]
    if not 1 <= num_clusters <= num:
        raise ValueError("num_clusters must be in 1..K")

    center_idx = [int(rng.integers(num))]
    dist_to_set = np.linalg.norm(positions - positions[center_idx[0]], axis=1)
    while len(center_idx) < num_clusters:
        dist_to_set[center_idx] = -1.0
        nxt = int(np.argmax(dist_to_set))
        center_idx.append(nxt)
        dist_to_set = np.minimum(
            dist_to_set, np.linalg.norm(positions - positions[nxt], axis=1)
        )
    centers = positions[center_idx].copy()

    assignment = np.full(num, -1, dtype=int)
    for _ in range(200):
        counts = [0] * num_clusters
        new_assignment = np.empty(num, dtype=int)
        d2_all = np.sum(
            (positions[:, None, :] - centers[None, :, :]) ** 2, axis=2
        )
        visit_order = np.argsort(d2_all.min(axis=1), kind="stable")
        for i in visit_order:
            d2 = d2_all[i]
            best = np.min(d2)
            candidates = [j for j in range(num_clusters) if d2[j] == best]
            chosen = min(candidates, key=lambda j: (counts[j], j))
            new_assignment[i] = chosen
            counts[chosen] += 1
        # reseed any emptied cluster from the globally farthest point
        for j in range(num_clusters):
            if counts[j] == 0:
                residual = np.array(
                    [
                        np.linalg.norm(positions[i] - centers[new_assignment[i]])
                        for i in range(num)
                    ]
                )
                moved = int(np.argmax(residual))
                counts[new_assignment[moved]] -= 1
                new_assignment[moved] = j
                counts[j] += 1
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for j in range(num_clusters):
            members = positions[assignment == j]
            if len(members):
                centers[j] = members.mean(axis=0)

    blocks = [
        tuple(int(i) + 1 for i in np.flatnonzero(assignment == j))
        for j in range(num_clusters)
    ]
    return CoalitionStructure.from_blocks([b for b in blocks if b], num)


def kmeans_best(
    ctx: RateContext, bs_positions: np.ndarray, rng: np.random.Generator
) -> CoalitionStructure:
    """Geographic k-means swept over every cluster count, best model score.

    Cluster composition still ignores overhead and feasibility (scoring
    only picks the count), so oversized clusters can zero out; that is the
    known weakness of the geographic baseline.
    """
    num = ctx.num_users
    best_structure: CoalitionStructure | None = None
    best_sum = -math.inf
    for count in range(1, num + 1):
        structure = kmeans_clusters(bs_positions, count, rng)
        total = throughput(ctx, structure).sum
        if total > best_sum:
            best_sum = total
            best_structure = structure
    assert best_structure is not None
    return best_structure

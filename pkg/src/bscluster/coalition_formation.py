"""Distributed coalition formation for base-station clustering.

Players (users) start in the grand coalition and take turns deviating: a
player ranks the coalitions it would rather join, asks the most attractive
one first, and moves on the first request that every member of the target
coalition accepts.  Utilities are long-term throughputs restricted by two
devices that force convergence: a history set (no profit from rejoining a
coalition the player already left) and a communication budget (a player
whose question counter has passed its budget gets zero utility everywhere).

Asking a coalition costs the asker one unit of budget; answering is free.
Both the candidate ranking and the admissibility test therefore evaluate
the deviator as if the question has already been charged, matching the
counter-increment-then-test order of the underlying protocol.

Deviations compare utilities lexicographically: throughput first, and on
exact throughput ties the structure with less total CSI overhead wins.
The refinement only matters on the zero-throughput plateau (very short
coherence blocks, where even one split cannot yet make the pre-log
positive); there it lets players shed overhead step by step until the
pre-log turns positive, instead of freezing in a structure nobody can
escape with a single move.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .partitions import Coalition, CoalitionStructure, grand
from .rate_model import RateContext, csi_overhead_symbols, throughput

#: Comparable game utility: (throughput, -total CSI overhead).
GameUtility = tuple[float, float]


@dataclass
class PlayerState:
    """Per-player history set, question counter, and budget."""

    budget: int
    comm_count: int = 0
    history: set[Coalition] = field(default_factory=set)

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError("budget must be a positive integer")
        if self.comm_count < 0:
            raise ValueError("comm_count must be >= 0")


@dataclass(frozen=True)
class DeviationRecord:
    """One asked question: who, from where, to where, and the outcome."""

    visit: int
    player: int
    source: tuple[int, ...]
    target: tuple[int, ...]  # () encodes the empty coalition
    accepted: bool
    utility_before: float
    utility_after: float
    overhead_before: float
    overhead_after: float

    def to_dict(self) -> dict:
        return {
            "visit": self.visit,
            "player": self.player,
            "source": list(self.source),
            "target": list(self.target),
            "accepted": self.accepted,
            "utility_before": self.utility_before,
            "utility_after": self.utility_after,
            "overhead_before": self.overhead_before,
            "overhead_after": self.overhead_after,
        }


@dataclass
class FormationTrace:
    """Full record of a formation run, serializable to JSON lines."""

    records: list[DeviationRecord] = field(default_factory=list)
    final_structure: CoalitionStructure | None = None
    final_states: dict[int, "PlayerState"] | None = None
    num_passes: int = 0

    @property
    def num_deviations(self) -> int:
        return sum(1 for r in self.records if r.accepted)

    @property
    def num_attempts(self) -> int:
        return len(self.records)

    def attempts_by_player(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for r in self.records:
            counts[r.player] = counts.get(r.player, 0) + 1
        return counts

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_dict(), sort_keys=True) for r in self.records]
        if self.final_structure is not None:
            lines.append(
                json.dumps(
                    {
                        "final_structure": self.final_structure.to_text(),
                        "num_passes": self.num_passes,
                        "num_deviations": self.num_deviations,
                        "num_attempts": self.num_attempts,
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"


def _total_overhead(structure: CoalitionStructure, ctx: RateContext) -> float:
    return float(
        sum(
            csi_overhead_symbols(len(b), ctx.bs_antennas, ctx.ms_antennas, ctx.streams)
            for b in structure.blocks
        )
    )


def _utility(
    user: int,
    structure: CoalitionStructure,
    history: set[Coalition],
    comm_count: int,
    budget: int,
    ctx: RateContext,
) -> GameUtility:
    """Comparable game utility of ``user`` under the given restrictions.

    The first component is the restricted throughput (zero once the budget
    is exhausted or the coalition is in the history set); the second breaks
    exact throughput ties toward less total CSI overhead.  An exhausted
    budget flattens the utility entirely so no move can look attractive.
    """
    if comm_count > budget:
        return (0.0, 0.0)
    scalar = (
        0.0
        if structure.coalition_of(user) in history
        else throughput(ctx, structure).per_user[user - 1]
    )
    return (scalar, -_total_overhead(structure, ctx))


def restricted_utility(
    user: int,
    structure: CoalitionStructure,
    state: PlayerState,
    ctx: RateContext,
) -> float:
    """Throughput t_k(S), zeroed if k's coalition is in its history or the
    question counter has exceeded the budget."""
    return _utility(user, structure, state.history, state.comm_count, state.budget, ctx)[0]


def _candidate_targets(
    user: int, structure: CoalitionStructure
) -> list[Coalition]:
    own = structure.coalition_of(user)
    targets: list[Coalition] = [frozenset()]
    targets.extend(c for c in structure.coalitions() if c != own)
    return targets


def acceptable_coalitions(
    user: int,
    structure: CoalitionStructure,
    states: Mapping[int, PlayerState],
    ctx: RateContext,
) -> list[Coalition]:
    """Targets whose hypothetical structure strictly improves the player.

    The player's utility on both sides is evaluated with the question
    already charged (counter + 1).  Sorted by the player's utility in the
    hypothetical structure, decreasing; ties fall back to canonical
    coalition order with the empty coalition first.
    """
    state = states[user]
    charged = state.comm_count + 1
    base = _utility(user, structure, state.history, charged, state.budget, ctx)
    ranked: list[tuple[float, float, tuple[int, ...], Coalition]] = []
    for target in _candidate_targets(user, structure):
        hypothetical = structure.move_user(user, target)
        gain = _utility(user, hypothetical, state.history, charged, state.budget, ctx)
        if gain > base:
            ranked.append((-gain[0], -gain[1], tuple(sorted(target)), target))
    ranked.sort()
    return [target for *_, target in ranked]


def is_admissible(
    user: int,
    target: Iterable[int] | None,
    structure: CoalitionStructure,
    states: Mapping[int, PlayerState],
    ctx: RateContext,
) -> bool:
    """Whether the move of ``user`` into ``target`` would go through.

    The deviator must strictly improve (with the question charged to its
    counter) and every current member of the target must weakly improve at
    its own unmodified state.  An empty target has no members to object.
    """
    target_set = frozenset(target) if target is not None else frozenset()
    hypothetical = structure.move_user(user, target_set)  # validates target
    state = states[user]
    charged = state.comm_count + 1
    before = _utility(user, structure, state.history, charged, state.budget, ctx)
    after = _utility(user, hypothetical, state.history, charged, state.budget, ctx)
    if not after > before:
        return False
    for member in target_set:
        member_state = states[member]
        member_before = _utility(
            member, structure, member_state.history,
            member_state.comm_count, member_state.budget, ctx,
        )
        member_after = _utility(
            member, hypothetical, member_state.history,
            member_state.comm_count, member_state.budget, ctx,
        )
        if member_after < member_before:
            return False
    return True


def is_individually_stable(
    structure: CoalitionStructure,
    states: Mapping[int, PlayerState],
    ctx: RateContext,
) -> bool:
    """Exhaustive check: no player has an admissible deviation left."""
    for user in range(1, structure.num_users + 1):
        for target in _candidate_targets(user, structure):
            if is_admissible(user, target, structure, states, ctx):
                return False
    return True


def resolve_budgets(
    budgets: int | Sequence[int] | Mapping[int, int] | None, num_users: int
) -> dict[int, int]:
    """Normalize a scalar / sequence / mapping budget argument to {user: budget}."""
    if budgets is None:
        return {k: num_users for k in range(1, num_users + 1)}
    if isinstance(budgets, int):
        return {k: budgets for k in range(1, num_users + 1)}
    if isinstance(budgets, Mapping):
        resolved = {int(k): int(v) for k, v in budgets.items()}
    else:
        seq = list(budgets)
        if len(seq) != num_users:
            raise ValueError(f"expected {num_users} budgets, got {len(seq)}")
        resolved = {k + 1: int(b) for k, b in enumerate(seq)}
    if set(resolved) != set(range(1, num_users + 1)):
        raise ValueError("budgets must cover exactly users 1..K")
    return resolved


def run_formation(
    ctx: RateContext,
    budgets: int | Sequence[int] | Mapping[int, int] | None = None,
    initial: CoalitionStructure | None = None,
    order: str = "ascending",
    rng: np.random.Generator | None = None,
) -> tuple[CoalitionStructure, FormationTrace]:
    """Run the deviate-until-stable loop from the given starting structure.

    Each full pass visits every player (ascending index by default, or a
    seed-shuffled order with ``order="shuffled"``); a player walks its
    acceptable coalitions greedily, pays one budget unit per question, and
    takes the first admissible move.  The loop ends after a pass with no
    accepted deviation, which under the budget accounting above leaves no
    admissible deviation anywhere.
    """
    num_users = ctx.num_users
    structure = initial if initial is not None else grand(num_users)
    if structure.num_users != num_users:
        raise ValueError("initial structure and context disagree on K")
    resolved = resolve_budgets(budgets, num_users)
    states = {k: PlayerState(budget=resolved[k]) for k in range(1, num_users + 1)}

    if order == "ascending":
        visiting = list(range(1, num_users + 1))
    elif order == "shuffled":
        if rng is None:
            raise ValueError('order="shuffled" requires an rng')
        visiting = [int(k) + 1 for k in rng.permutation(num_users)]
    else:
        raise ValueError(f"unknown visiting order {order!r}")

    trace = FormationTrace()
    visit = 0
    while True:
        deviated_this_pass = False
        trace.num_passes += 1
        for player in visiting:
            visit += 1
            state = states[player]
            if state.comm_count >= state.budget:
                continue  # cannot afford another question
            for target in acceptable_coalitions(player, structure, states, ctx):
                if state.comm_count >= state.budget:
                    break
                accepted = is_admissible(player, target, structure, states, ctx)
                charged = state.comm_count + 1
                before = _utility(
                    player, structure, state.history, charged, state.budget, ctx
                )
                hypothetical = structure.move_user(player, target)
                after = _utility(
                    player, hypothetical, state.history, charged, state.budget, ctx
                )
                state.comm_count = charged
                trace.records.append(
                    DeviationRecord(
                        visit=visit,
                        player=player,
                        source=tuple(sorted(structure.coalition_of(player))),
                        target=tuple(sorted(target)),
                        accepted=accepted,
                        utility_before=before[0],
                        utility_after=after[0],
                        overhead_before=-before[1],
                        overhead_after=-after[1],
                    )
                )
                if accepted:
                    state.history.add(structure.coalition_of(player))
                    structure = hypothetical
                    deviated_this_pass = True
                    break
        if not deviated_this_pass:
            break

    trace.final_structure = structure
    trace.final_states = states
    return structure, trace

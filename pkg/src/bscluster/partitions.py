"""Set partitions of the user set {1..K}: coalition structures and friends.

A coalition structure is a canonical partition of {1..K} into nonempty,
disjoint blocks (coalitions).  Canonical form sorts members inside each
block and orders blocks by their minimum element, so structural equality
and hashing are well defined; that makes history-set membership checks in
the formation game a plain ``in``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: Largest K accepted by enumerate_partitions (Bell(12) is ~4.2M).
ENUMERATION_CAP = 12
#: Largest K accepted by bell_number / random_partition.
BELL_CAP = 25

Coalition = frozenset[int]


def _canonical_blocks(blocks: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    sorted_blocks = [tuple(sorted(b)) for b in blocks]
    sorted_blocks.sort(key=lambda b: b[0] if b else -1)
    return tuple(sorted_blocks)


@dataclass(frozen=True)
class CoalitionStructure:
    """Canonical partition of {1..num_users} into coalitions."""

    blocks: tuple[tuple[int, ...], ...]
    num_users: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", _canonical_blocks(self.blocks))
        self.validate()

    def validate(self) -> None:
        """Raise ValueError unless this is a valid canonical partition."""
        if self.num_users < 1:
            raise ValueError(f"num_users must be >= 1, got {self.num_users}")
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("empty coalition in structure")
            for user in block:
                if not isinstance(user, int) or not 1 <= user <= self.num_users:
                    raise ValueError(f"user {user!r} outside 1..{self.num_users}")
                if user in seen:
                    raise ValueError(f"user {user} appears in two coalitions")
                seen.add(user)
        if len(seen) != self.num_users:
            missing = set(range(1, self.num_users + 1)) - seen
            raise ValueError(f"users missing from structure: {sorted(missing)}")

    @classmethod
    def from_blocks(
        cls, blocks: Iterable[Iterable[int]], num_users: int | None = None
    ) -> "CoalitionStructure":
        block_list = [tuple(sorted(b)) for b in blocks]
        if num_users is None:
            num_users = sum(len(b) for b in block_list)
        return cls(tuple(block_list), num_users)

    @property
    def num_coalitions(self) -> int:
        return len(self.blocks)

    @property
    def max_coalition_size(self) -> int:
        return max(len(b) for b in self.blocks)

    def coalitions(self) -> tuple[Coalition, ...]:
        return tuple(frozenset(b) for b in self.blocks)

    def coalition_of(self, user: int) -> Coalition:
        """The unique coalition containing ``user``."""
        for block in self.blocks:
            if user in block:
                return frozenset(block)
        raise ValueError(f"unknown user {user} (structure has 1..{self.num_users})")

    def move_user(
        self, user: int, target: Iterable[int] | None
    ) -> "CoalitionStructure":
        """Structure after ``user`` leaves its coalition and joins ``target``.

        ``target`` is an existing coalition of this structure (not already
        containing ``user``) or None / an empty set, which opens a new
        singleton.  Leaving a singleton for the empty coalition is a
        structural no-op.
        """
        target_set = frozenset(target) if target is not None else frozenset()
        if user in target_set:
            raise ValueError(f"target coalition already contains user {user}")
        self.coalition_of(user)  # validates the user
        if target_set and tuple(sorted(target_set)) not in self.blocks:
            raise ValueError(f"target {sorted(target_set)} is not a coalition here")
        new_blocks: list[tuple[int, ...]] = []
        for block in self.blocks:
            members = set(block)
            members.discard(user)
            if target_set and members == target_set:
                members.add(user)
            if members:
                new_blocks.append(tuple(sorted(members)))
        if not target_set:
            new_blocks.append((user,))
        return CoalitionStructure(tuple(new_blocks), self.num_users)

    def to_text(self) -> str:
        """Serialize as sorted blocks, e.g. ``{1,3}|{2}``."""
        return "|".join("{" + ",".join(str(u) for u in b) + "}" for b in self.blocks)

    @classmethod
    def from_text(cls, text: str, num_users: int | None = None) -> "CoalitionStructure":
        blocks = []
        for chunk in text.split("|"):
            chunk = chunk.strip()
            if not (chunk.startswith("{") and chunk.endswith("}")):
                raise ValueError(f"malformed coalition {chunk!r}")
            blocks.append(tuple(int(u) for u in chunk[1:-1].split(",") if u))
        return cls.from_blocks(blocks, num_users)

    def __str__(self) -> str:
        return self.to_text()


def grand(num_users: int) -> CoalitionStructure:
    """The one-block structure containing every user."""
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    return CoalitionStructure((tuple(range(1, num_users + 1)),), num_users)


def singletons(num_users: int) -> CoalitionStructure:
    """The all-singletons structure."""
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    return CoalitionStructure(
        tuple((u,) for u in range(1, num_users + 1)), num_users
    )


@lru_cache(maxsize=None)
def _bell_triangle_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _bell_triangle_row(n - 1)
    row = [prev[-1]]
    for value in prev:
        row.append(row[-1] + value)
    return tuple(row)


def bell_number(num_users: int) -> int:
    """Exact Bell number B(K) via the Bell-triangle recurrence (K <= 25)."""
    if num_users < 0:
        raise ValueError("K must be >= 0")
    if num_users > BELL_CAP:
        raise ValueError(f"K={num_users} exceeds the Bell-number cap {BELL_CAP}")
    return _bell_triangle_row(num_users)[0]


def enumerate_partitions(num_users: int) -> Iterator[CoalitionStructure]:
    """Yield every partition of {1..K} exactly once, in restricted-growth order."""
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    if num_users > ENUMERATION_CAP:
        raise ValueError(
            f"K={num_users} exceeds the enumeration cap {ENUMERATION_CAP}"
        )
    rgs = [0] * num_users
    while True:
        num_blocks = max(rgs) + 1
        blocks: list[list[int]] = [[] for _ in range(num_blocks)]
        for idx, label in enumerate(rgs):
            blocks[label].append(idx + 1)
        yield CoalitionStructure(tuple(tuple(b) for b in blocks), num_users)
        # advance the restricted-growth string: a[i] <= max(a[:i]) + 1
        i = num_users - 1
        while i > 0:
            if rgs[i] <= max(rgs[:i]):
                rgs[i] += 1
                for j in range(i + 1, num_users):
                    rgs[j] = 0
                break
            i -= 1
        else:
            return


def random_partition(num_users: int, rng: np.random.Generator) -> CoalitionStructure:
    """Sample uniformly over all B(K) partitions of {1..K}.

    Uses the conditional block-size construction: the block containing the
    smallest remaining element has size s with probability
    C(n-1, s-1) * B(n-s) / B(n), with the other s-1 members drawn uniformly.
    Weights are exact integers, so the law is exactly uniform.
    """
    if num_users < 1:
        raise ValueError("num_users must be >= 1")
    if num_users > BELL_CAP:
        raise ValueError(f"K={num_users} exceeds the Bell-number cap {BELL_CAP}")
    remaining = list(range(1, num_users + 1))
    blocks: list[tuple[int, ...]] = []
    while remaining:
        n = len(remaining)
        total = bell_number(n)
        draw = int(rng.integers(0, total))
        cumulative = 0
        size = n
        binom = 1  # C(n-1, s-1) built incrementally
        for s in range(1, n + 1):
            cumulative += binom * bell_number(n - s)
            if draw < cumulative:
                size = s
                break
            binom = binom * (n - s) // s
        head, rest = remaining[0], remaining[1:]
        others = sorted(
            rng.choice(len(rest), size=size - 1, replace=False).tolist()
        ) if size > 1 else []
        members = [head] + [rest[i] for i in others]
        blocks.append(tuple(members))
        member_set = set(members)
        remaining = [u for u in remaining if u not in member_set]
    return CoalitionStructure(tuple(blocks), num_users)

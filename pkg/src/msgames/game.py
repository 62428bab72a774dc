"""Game semantics: rounds, Spoiler moves, the oblivious Duplicator, the
discard rule, win detection, and lockstep scheduling of parallel sub-games.

The game is played on a pair of board sets.  Each round the Spoiler places a
fresh pebble color on every board of one side; the Duplicator answers by
copying each board on the other side once per universe element.  Boards whose
atomic type then has no partner on the opposite side can be removed without
changing the outcome, and this engine always removes them (the removal is a
fixed point after a single type-intersection pass).  The Spoiler wins a
finished game iff no left/right pair of boards has equal atomic types.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .structures import (
    MIN,
    LinearOrder,
    PebbledBoard,
    atomic_type,
    capped_board,
    capped_children,
    render_board,
)

EXISTS = "E"
FORALL = "A"
SIDES = (EXISTS, FORALL)

Pattern = tuple[str, ...]
Boards = frozenset[PebbledBoard]


def complement(pattern: Iterable[str]) -> Pattern:
    return tuple(FORALL if q == EXISTS else EXISTS for q in pattern)


def pattern_text(pattern: Iterable[str]) -> str:
    return "".join(pattern)


class IllegalMove(ValueError):
    pass


class BranchTypeCollision(RuntimeError):
    """Two parallel sub-games produced boards of a shared atomic type."""


@dataclass(frozen=True, slots=True)
class GameState:
    left: Boards
    right: Boards
    round: int = 0
    history: tuple[tuple[str, int], ...] = ()

    def side(self, q: str) -> Boards:
        return self.left if q == EXISTS else self.right

    def boards(self) -> Iterable[PebbledBoard]:
        return list(self.left) + list(self.right)


def make_state(left: Iterable[PebbledBoard], right: Iterable[PebbledBoard]) -> GameState:
    return GameState(frozenset(left), frozenset(right))


@dataclass(slots=True)
class SpoilerMove:
    side: str
    color: int
    placement: Mapping[PebbledBoard, int]


def apply_spoiler_move(state: GameState, move: SpoilerMove) -> GameState:
    """Half-round: put the new pebble on every board of the chosen side."""
    used = {color for _, color in state.history}
    if move.color in used:
        raise IllegalMove(f"color {move.color} already used")
    boards = state.side(move.side)
    missing = [b for b in boards if b not in move.placement]
    if missing:
        raise IllegalMove(f"placement missing {len(missing)} board(s)")
    moved = frozenset(b.with_pebble(move.color, move.placement[b]) for b in boards)
    if move.side == EXISTS:
        return GameState(moved, state.right, state.round, state.history)
    return GameState(state.left, moved, state.round, state.history)


def oblivious_expand(state: GameState, side: str, color: int) -> GameState:
    """All possible responses on the named side, deduplicated; the round
    counter advances (this completes the round the Spoiler opened)."""
    boards = state.side(side)
    expanded = frozenset(
        b.with_pebble(color, pos) for b in boards for pos in b.base.universe
    )
    hist = state.history + ((EXISTS if side == FORALL else FORALL, color),)
    if side == EXISTS:
        return GameState(expanded, state.right, state.round + 1, hist)
    return GameState(state.left, expanded, state.round + 1, hist)


def _type_sets(state: GameState) -> tuple[dict, dict]:
    lt: dict = {}
    rt: dict = {}
    for b in state.left:
        lt.setdefault(atomic_type(b), []).append(b)
    for b in state.right:
        rt.setdefault(atomic_type(b), []).append(b)
    return lt, rt


def discard_unmatched(state: GameState) -> GameState:
    """Remove every board whose atomic type has no partner opposite.

    One pass reaches the fixed point: keeping exactly the types present on
    both sides leaves every survivor matched.
    """
    lt, rt = _type_sets(state)
    keep = lt.keys() & rt.keys()
    left = frozenset(b for t in keep for b in lt[t])
    right = frozenset(b for t in keep for b in rt[t])
    return GameState(left, right, state.round, state.history)


def has_matching_pair(state: GameState) -> bool:
    lt = {atomic_type(b) for b in state.left}
    return any(atomic_type(b) in lt for b in state.right)


class StrategyPlayer:
    """Base class for Spoiler plans.

    A player declares a pattern and, each round, supplies a placement for
    every board it owns on the active side via `step`; when the round's side
    does not match its next scheduled move it fills in with dummy pebbles so
    composites can run several players in lockstep.  Ownership is threaded
    through rounds by `observe` using the engine's provenance map (each new
    board points at the board it extends).  Players are single-use per run.
    """

    pattern: Pattern = ()

    def begin(self, left: Boards, right: Boards) -> None:
        self.left_owned: set[PebbledBoard] = set(left)
        self.right_owned: set[PebbledBoard] = set(right)

    def set_owned(self, left: Iterable[PebbledBoard], right: Iterable[PebbledBoard]) -> None:
        self.left_owned = set(left)
        self.right_owned = set(right)

    def owned(self, side: str) -> set[PebbledBoard]:
        return self.left_owned if side == EXISTS else self.right_owned

    def step(self, state: GameState, color: int, side: str) -> dict[PebbledBoard, int]:
        raise NotImplementedError

    def placements(self, state: GameState, round_index: int) -> dict[PebbledBoard, int]:
        return self.step(state, round_index, self.pattern[round_index - 1])

    def observe(
        self,
        state: GameState,
        provenance: Mapping[PebbledBoard, PebbledBoard],
        round_index: int,
    ) -> None:
        left, right = set(), set()
        for nb, parent in provenance.items():
            if parent in self.left_owned and nb in state.left:
                left.add(nb)
            elif parent in self.right_owned and nb in state.right:
                right.add(nb)
        self.left_owned, self.right_owned = left, right


@dataclass(frozen=True, slots=True)
class RoundRecord:
    side: str
    color: int
    placements: tuple[tuple[PebbledBoard, int], ...]
    pre_left: Boards
    pre_right: Boards
    left: Boards
    right: Boards


@dataclass(slots=True)
class Transcript:
    initial_pre_left: Boards
    initial_pre_right: Boards
    initial_left: Boards
    initial_right: Boards
    rounds: list[RoundRecord] = field(default_factory=list)
    won: bool = False

    @property
    def pattern(self) -> Pattern:
        return tuple(r.side for r in self.rounds)

    def final_pre_state(self) -> tuple[Boards, Boards]:
        if not self.rounds:
            return self.initial_pre_left, self.initial_pre_right
        last = self.rounds[-1]
        return last.pre_left, last.pre_right

    def to_json_lines(self) -> str:
        """Line-oriented record: one JSON object per round with the move and
        the post-discard board census."""
        lines = [
            json.dumps(
                {
                    "round": 0,
                    "census": {
                        "left": sorted(render_board(b) for b in self.initial_left),
                        "right": sorted(render_board(b) for b in self.initial_right),
                    },
                },
                sort_keys=True,
            )
        ]
        for i, r in enumerate(self.rounds, start=1):
            lines.append(
                json.dumps(
                    {
                        "round": i,
                        "side": r.side,
                        "color": r.color,
                        "placements": sorted(
                            [render_board(b), p] for b, p in r.placements
                        ),
                        "census": {
                            "left": sorted(render_board(b) for b in r.left),
                            "right": sorted(render_board(b) for b in r.right),
                        },
                    },
                    sort_keys=True,
                )
            )
        lines.append(json.dumps({"won": self.won}, sort_keys=True))
        return "\n".join(lines)


@dataclass(slots=True)
class RunResult:
    won: bool
    pattern: Pattern
    transcript: Transcript


def _canon_state(
    state: GameState, budget: int
) -> tuple[GameState, dict[PebbledBoard, PebbledBoard]]:
    mapping: dict[PebbledBoard, PebbledBoard] = {}
    left, right = set(), set()
    for b in state.left:
        cb = capped_board(b, budget)
        mapping[b] = cb
        left.add(cb)
    for b in state.right:
        cb = capped_board(b, budget)
        mapping[b] = cb
        right.add(cb)
    return GameState(frozenset(left), frozenset(right), state.round, state.history), mapping


def _expand_round(
    state: GameState,
    move: SpoilerMove,
    budget: int,
    reduce: bool,
) -> tuple[GameState, dict[PebbledBoard, PebbledBoard]]:
    """One full round: apply the move, expand the other side, and (in reduce
    mode) collapse boards to capped representatives; provenance maps each new
    board to the board it extends.

    Reduce mode only enumerates `reduced_positions` for the expansion, which
    realizes the same set of capped forms as the full universe would.
    """
    color = move.color
    moved: set[PebbledBoard] = set()
    prov: dict[PebbledBoard, PebbledBoard] = {}
    for b, pos in move.placement.items():
        nb = b.with_pebble(color, pos)
        if reduce:
            nb = capped_board(nb, budget)
        moved.add(nb)
        prov[nb] = b
    expanded: set[PebbledBoard] = set()
    other_boards = state.right if move.side == EXISTS else state.left
    for b in other_boards:
        if reduce and isinstance(b.base, LinearOrder):
            children = capped_children(b, color, budget)
        else:
            children = [b.with_pebble(color, pos) for pos in b.base.universe]
        for nb in children:
            if nb not in expanded:
                expanded.add(nb)
                prov[nb] = b
    hist = state.history + ((move.side, color),)
    if move.side == EXISTS:
        new = GameState(frozenset(moved), frozenset(expanded), state.round + 1, hist)
    else:
        new = GameState(frozenset(expanded), frozenset(moved), state.round + 1, hist)
    return new, prov


def run_strategy(
    initial: GameState,
    player: StrategyPlayer,
    rounds: int,
    *,
    reduce: bool = False,
) -> RunResult:
    """Drive `player` for `rounds` rounds against the oblivious Duplicator.

    With ``reduce=True`` linear-order boards are collapsed each round to
    representatives indistinguishable within the remaining round budget; this
    keeps board sets small and is outcome preserving for players whose
    placement rules depend only on the collapsed form (all players in this
    package do).  The transcript records every pre- and post-discard state
    for separating-sentence synthesis.
    """
    if rounds < 0:
        raise ValueError("rounds must be >= 0")
    if len(player.pattern) < rounds:
        raise IllegalMove(
            f"player pattern {pattern_text(player.pattern)} shorter than {rounds} rounds"
        )
    state = initial
    if reduce:
        state, _ = _canon_state(state, rounds)
    pre = state
    state = discard_unmatched(pre)
    transcript = Transcript(pre.left, pre.right, state.left, state.right)
    player.begin(state.left, state.right)

    for k in range(1, rounds + 1):
        side = player.pattern[k - 1]
        color = k
        placement = player.placements(state, k)
        boards = state.side(side)
        if any(b not in placement for b in boards):
            raise IllegalMove("placement missing a board")
        move = SpoilerMove(side, color, placement)
        full, provenance = _expand_round(state, move, rounds - k, reduce)
        post = discard_unmatched(full)
        transcript.rounds.append(
            RoundRecord(
                side,
                color,
                tuple(sorted(placement.items(), key=lambda kv: kv[0].sort_key())),
                full.left,
                full.right,
                post.left,
                post.right,
            )
        )
        state = post
        player.observe(state, provenance, k)

    won = not has_matching_pair(state)
    transcript.won = won
    return RunResult(won, transcript.pattern, transcript)


def _greedy_embedding(sub: Pattern, master: Pattern) -> tuple[int, ...] | None:
    """Leftmost positions embedding `sub` into `master` as a subsequence."""
    out = []
    j = 0
    for q in sub:
        while j < len(master) and master[j] != q:
            j += 1
        if j == len(master):
            return None
        out.append(j)
        j += 1
    return tuple(out)


class ParallelPlayer(StrategyPlayer):
    """Plays prebound sub-strategies in lockstep against a master pattern.

    Each sub-player's pattern must embed into the master as a subsequence;
    rounds a sub-pattern skips are filled with a dummy pebble on that
    sub-game's `min` anchor.  Sub-games must stay pairwise type-disjoint;
    a collision raises `BranchTypeCollision` since it would let a board from
    one sub-game match a board from another.
    """

    def __init__(
        self,
        subs: Sequence[tuple[StrategyPlayer, Pattern]],
        master: Pattern,
    ) -> None:
        self.pattern = tuple(master)
        self.subs = [p for p, _ in subs]
        for _, pat in subs:
            if _greedy_embedding(tuple(pat), self.pattern) is None:
                raise IllegalMove(
                    f"sub-pattern {pattern_text(pat)} does not embed in master "
                    f"{pattern_text(self.pattern)}"
                )

    def begin(self, left: Boards, right: Boards) -> None:
        super().begin(left, right)
        claimed_l: set[PebbledBoard] = set()
        claimed_r: set[PebbledBoard] = set()
        for sub in self.subs:
            # Boards a sub-player claimed may have been removed by the
            # initial discard; restrict claims to what actually survived.
            sub.left_owned &= set(left)
            sub.right_owned &= set(right)
            claimed_l |= sub.left_owned
            claimed_r |= sub.right_owned
        if claimed_l != set(left) or claimed_r != set(right):
            raise IllegalMove("sub-players do not partition the instance")

    def step(self, state: GameState, color: int, side: str) -> dict[PebbledBoard, int]:
        out: dict[PebbledBoard, int] = {}
        for sub in self.subs:
            out.update(sub.step(state, color, side))
        return out

    def observe(self, state, provenance, round_index: int) -> None:
        super().observe(state, provenance, round_index)
        for sub in self.subs:
            sub.observe(state, provenance, round_index)
        check_type_disjoint(
            [(sub.left_owned, sub.right_owned) for sub in self.subs]
        )


def check_type_disjoint(groups: Sequence[tuple[set, set]]) -> None:
    seen: dict = {}
    for i, (left, right) in enumerate(groups):
        for b in list(left) + list(right):
            t = atomic_type(b)
            j = seen.setdefault(t, i)
            if j != i:
                raise BranchTypeCollision(
                    f"type {t} appears in sub-games {j} and {i}"
                )


def schedule_parallel(
    sub_players: Sequence[tuple[StrategyPlayer, Pattern]],
    master: Pattern,
) -> ParallelPlayer:
    """Compose prebound sub-strategies into one player for the master pattern."""
    return ParallelPlayer(sub_players, master)


class SwappedPlayer(StrategyPlayer):
    """Runs an inner strategy with the two sides exchanged.

    Winning the swapped game negates the separating sentence, so the emitted
    pattern is the complement of the inner pattern.
    """

    def __init__(self, inner: StrategyPlayer) -> None:
        self.inner = inner
        self.pattern = complement(inner.pattern)

    def begin(self, left: Boards, right: Boards) -> None:
        super().begin(left, right)
        self.inner.begin(right, left)

    def set_owned(self, left, right) -> None:
        super().set_owned(left, right)
        self.inner.set_owned(right, left)

    def step(self, state: GameState, color: int, side: str) -> dict[PebbledBoard, int]:
        swapped = GameState(state.right, state.left, state.round, state.history)
        other = FORALL if side == EXISTS else EXISTS
        return self.inner.step(swapped, color, other)

    def observe(self, state, provenance, round_index: int) -> None:
        super().observe(state, provenance, round_index)
        swapped = GameState(state.right, state.left, state.round, state.history)
        self.inner.observe(swapped, provenance, round_index)

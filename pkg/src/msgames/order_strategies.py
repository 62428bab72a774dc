"""Length-separation strategies for linear orders.

Centerpiece is a divide-and-conquer Spoiler plan that plays the closest-to-
midpoint of its active segment, alternates sides, and splits each game into
two parallel half-length sub-games.  The number of rounds it needs is given
by a pair of mutually recursive budget functions, tabulated here for
regression, and is at most one more than the quantifier rank needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cache
from typing import Iterable

from .game import (
    EXISTS,
    FORALL,
    Boards,
    BranchTypeCollision,
    GameState,
    Pattern,
    StrategyPlayer,
    SwappedPlayer,
    complement,
    make_state,
    pattern_text,
)
from .structures import (
    MAX,
    MIN,
    LinearOrder,
    PebbledBoard,
    Segment,
    atomic_type,
    closest_to_midpoint,
    make_linear_order,
)


def opposite(q: str) -> str:
    return FORALL if q == EXISTS else EXISTS


# ---------------------------------------------------------------------------
# Round budgets
# ---------------------------------------------------------------------------

def q_rank(length: int) -> int:
    """Minimal quantifier rank separating lengths <= `length` from longer
    ones: 1 + floor(log2(length))."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return length.bit_length()


@cache
def q_star_forall(length: int) -> int:
    """Rounds the midpoint strategy needs with a forced universal opening."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if length == 1:
        return 1
    if length == 2:
        return 2
    return q_star_exists(length // 2) + 1


@cache
def q_star_exists(length: int) -> int:
    """Rounds the midpoint strategy needs with a forced existential opening."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if length == 1:
        return 2
    return q_star_forall((length + 1) // 2) + 1


def q_star(length: int) -> int:
    return min(q_star_forall(length), q_star_exists(length))


def q_star_side(q: str, length: int) -> int:
    return q_star_exists(length) if q == EXISTS else q_star_forall(length)


@dataclass(frozen=True, slots=True)
class Budget:
    """All four budget values for one length."""

    length: int
    rank: int
    q_star_forall: int
    q_star_exists: int
    q_star: int


def budget(length: int) -> Budget:
    return Budget(
        length,
        q_rank(length),
        q_star_forall(length),
        q_star_exists(length),
        q_star(length),
    )


# Expected budget values for lengths 1..127, as (first, last, forall,
# exists, combined, rank) ranges.  Regression data for the golden test.
GOLDEN_RANGES: tuple[tuple[int, int, int, int, int, int], ...] = (
    (1, 1, 1, 2, 1, 1),
    (2, 2, 2, 2, 2, 2),
    (3, 3, 3, 3, 3, 2),
    (4, 4, 3, 3, 3, 3),
    (5, 5, 3, 4, 3, 3),
    (6, 7, 4, 4, 4, 3),
    (8, 9, 4, 4, 4, 4),
    (10, 10, 5, 4, 4, 4),
    (11, 15, 5, 5, 5, 4),
    (16, 18, 5, 5, 5, 5),
    (19, 21, 5, 6, 5, 5),
    (22, 31, 6, 6, 6, 5),
    (32, 37, 6, 6, 6, 6),
    (38, 42, 7, 6, 6, 6),
    (43, 63, 7, 7, 7, 6),
    (64, 74, 7, 7, 7, 7),
    (75, 85, 7, 8, 7, 7),
    (86, 127, 8, 8, 8, 7),
)


def golden_budgets() -> dict[int, Budget]:
    out: dict[int, Budget] = {}
    for first, last, qa, qe, qs, rk in GOLDEN_RANGES:
        for length in range(first, last + 1):
            out[length] = Budget(length, rk, qa, qe, qs)
    return out


# ---------------------------------------------------------------------------
# Game family descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class MslSpec:
    """A length-separation game with a forced first-move side: `rounds`
    rounds on (orders of length <= `length`, orders longer than that)."""

    q: str
    rounds: int
    length: int

    def __post_init__(self) -> None:
        if self.q not in (EXISTS, FORALL):
            raise ValueError(f"bad side {self.q!r}")
        if self.rounds < 1 or self.length < 1:
            raise ValueError("rounds and length must be >= 1")


def _split_lengths(q: str, length: int) -> tuple[int, int]:
    """(shorter-segment target, longer-segment target) after one midpoint
    move in a game about `length` with opening side `q`."""
    if q == EXISTS:
        return length // 2, (length + 1) // 2
    return (length + 1) // 2 - 1, length // 2


def is_irreducible(q: str, length: int) -> bool:
    return length == 1 or (length == 2 and q == FORALL)


def split(spec: MslSpec) -> tuple[MslSpec, MslSpec]:
    """The two sub-games one midpoint move reduces `spec` to, larger first."""
    if is_irreducible(spec.q, spec.length):
        raise ValueError(f"{spec} is irreducible; it is played by a base-case script")
    if spec.rounds < 2:
        raise ValueError(f"{spec} cannot split: sub-games need at least one round")
    lo_len, hi_len = _split_lengths(spec.q, spec.length)
    qb = opposite(spec.q)
    return MslSpec(qb, spec.rounds - 1, hi_len), MslSpec(qb, spec.rounds - 1, lo_len)


def surrogate_above(length: int, rounds: int) -> tuple[LinearOrder, ...]:
    """Finite stand-in for the infinite set of longer orders.

    Orders of length >= 2**rounds are pairwise indistinguishable within the
    round budget, so lengths up to max(2*length + 2, 2**(rounds + 1)) cover
    every behavior the full set exhibits while keeping both halves of a
    midpoint split representable.
    """
    if length < 1 or rounds < 1:
        raise ValueError("length and rounds must be >= 1")
    top = max(2 * length + 2, 1 << (rounds + 1))
    return tuple(make_linear_order(m) for m in range(length + 1, top + 1))


def msl_instance(spec: MslSpec) -> GameState:
    left = [PebbledBoard(make_linear_order(m)) for m in range(1, spec.length + 1)]
    right = [PebbledBoard(b) for b in surrogate_above(spec.length, spec.rounds)]
    return make_state(left, right)


# ---------------------------------------------------------------------------
# Plans: static strategy trees
# ---------------------------------------------------------------------------

MID = "mid"
MID2 = "mid2"
DUMMY = "dummy"


@dataclass(frozen=True, slots=True)
class Script:
    steps: tuple[tuple[str, str], ...]  # (side, action)


@dataclass(frozen=True, slots=True)
class SplitPlan:
    q: str
    length: int
    lo: "Plan"
    hi: "Plan"


@dataclass(frozen=True, slots=True)
class PrefixDummies:
    sides: tuple[str, ...]
    inner: "Plan"


Plan = Script | SplitPlan | PrefixDummies


def plan_pattern(plan: Plan) -> Pattern:
    if isinstance(plan, Script):
        return tuple(side for side, _ in plan.steps)
    if isinstance(plan, PrefixDummies):
        return plan.sides + plan_pattern(plan.inner)
    return (plan.q,) + plan_pattern(plan.hi)


def embeds(sub: Pattern, master: Pattern) -> bool:
    j = 0
    for q in sub:
        while j < len(master) and master[j] != q:
            j += 1
        if j == len(master):
            return False
        j += 1
    return True


@cache
def cma_plan(q: str, length: int) -> Plan:
    """The tight midpoint-strategy plan for one game family."""
    if length == 1:
        if q == FORALL:
            return Script(((FORALL, MID),))
        return Script(((EXISTS, DUMMY), (FORALL, MID)))
    if length == 2 and q == FORALL:
        return Script(((FORALL, MID), (FORALL, MID2)))
    lo_len, hi_len = _split_lengths(q, length)
    lo = cma_plan(opposite(q), lo_len)
    hi = cma_plan(opposite(q), hi_len)
    if not embeds(plan_pattern(lo), plan_pattern(hi)):
        raise BranchTypeCollision(
            f"sub-plan patterns fail to align for {q} length {length}"
        )
    return SplitPlan(q, length, lo, hi)


def _strictly_alternating(pattern: Pattern) -> bool:
    return all(pattern[i] != pattern[i + 1] for i in range(len(pattern) - 1))


@cache
def strict_plan(q: str, length: int) -> Plan | None:
    """A plan with a strictly alternating pattern ending universally, using
    exactly q_star_side(q, length) rounds; None when no such plan exists."""
    tight = cma_plan(q, length)
    pat = plan_pattern(tight)
    if _strictly_alternating(pat) and pat[-1] == FORALL:
        return tight
    qb = opposite(q)
    if q_star_side(q, length) == q_star_side(qb, length) + 1:
        inner = strict_plan(qb, length)
        if inner is not None:
            return PrefixDummies((q,), inner)
    if not is_irreducible(q, length):
        lo_len, hi_len = _split_lengths(q, length)
        hi = strict_plan(qb, hi_len)
        if hi is not None:
            hi_pat = plan_pattern(hi)
            for lo in (cma_plan(qb, lo_len), strict_plan(qb, lo_len)):
                if lo is not None and embeds(plan_pattern(lo), hi_pat):
                    return SplitPlan(q, length, lo, hi)
    return None


def _alternating(start: str, n: int) -> Pattern:
    return tuple(start if i % 2 == 0 else opposite(start) for i in range(n))


# ---------------------------------------------------------------------------
# Plan execution
# ---------------------------------------------------------------------------

class _Branch:
    """One live sub-game of a plan player: a plan node bound to a segment
    and to the boards currently inside it."""

    __slots__ = (
        "plan", "lo", "hi", "pattern", "cursor", "lefts", "rights", "split_color",
    )

    def __init__(self, plan: Plan, lo: int, hi: int,
                 lefts: set[PebbledBoard], rights: set[PebbledBoard]) -> None:
        self.plan = plan
        self.lo = lo
        self.hi = hi
        self.pattern = plan_pattern(plan)
        self.cursor = 0
        self.lefts = lefts
        self.rights = rights
        self.split_color: int | None = None

    def boards(self, side: str) -> set[PebbledBoard]:
        return self.lefts if side == EXISTS else self.rights

    def seglen(self, b: PebbledBoard) -> int:
        return b.resolve(self.hi) - b.resolve(self.lo)

    def _mid(self, b: PebbledBoard) -> int:
        lo = b.resolve(self.lo)
        hi = b.resolve(self.hi)
        if hi == lo:
            return lo
        return closest_to_midpoint(Segment(lo, hi))

    def act(self, color: int, side: str):
        """Placements for this branch's real move; may return replacement
        branches (plan morphing) and a pending passive-board split."""
        plan = self.plan
        if isinstance(plan, Script):
            step_side, action = plan.steps[self.cursor]
            assert step_side == side
            self.cursor += 1
            boards = self.boards(side)
            if action == MID:
                return {b: self._mid(b) for b in boards}, None, None
            if action == MID2:
                out = {}
                for b in boards:
                    s = self.seglen(b)
                    if s < 3:
                        raise BranchTypeCollision(
                            f"two-interior script needs segment length >= 3, got {s}"
                        )
                    out[b] = b.resolve(self.lo) + s // 2 + 1
                return out, None, None
            return {b: b.resolve(self.lo) for b in boards}, None, None

        if isinstance(plan, PrefixDummies):
            assert plan.sides[self.cursor] == side
            boards = self.boards(side)
            out = {b: b.resolve(self.lo) for b in boards}
            self.cursor += 1
            if self.cursor == len(plan.sides):
                inner = _Branch(plan.inner, self.lo, self.hi, self.lefts, self.rights)
                return out, [inner], None
            return out, None, None

        if self.cursor == 0:
            assert plan.q == side
            self.cursor = 1
            self.split_color = color
            boards = self.boards(side)
            return {b: self._mid(b) for b in boards}, None, None

        # Second move of a split: partition the active side by segment
        # length and hand both halves to freshly spawned sub-branches.
        assert self.split_color is not None
        c0 = self.split_color
        lo_len, hi_len = _split_lengths(plan.q, plan.length)
        lo_active: set[PebbledBoard] = set()
        hi_active: set[PebbledBoard] = set()
        active = self.boards(side)
        passive = self.rights if side == EXISTS else self.lefts
        for b in active:
            head = b.position_of(c0) - b.resolve(self.lo)
            tail = b.resolve(self.hi) - b.position_of(c0)
            if plan.q == EXISTS:
                # Active side here is the right side: long boards.
                if head > lo_len:
                    lo_active.add(b)
                elif tail > hi_len:
                    hi_active.add(b)
                else:
                    raise BranchTypeCollision(f"board fits neither half: {b}")
            else:
                # Active side here is the left side: short boards.
                if head <= lo_len:
                    lo_active.add(b)
                elif tail <= hi_len:
                    hi_active.add(b)
                else:
                    raise BranchTypeCollision(f"board fits neither half: {b}")
        if side == EXISTS:
            lo_branch = _Branch(plan.lo, self.lo, c0, lo_active, set())
            hi_branch = _Branch(plan.hi, c0, self.hi, hi_active, set())
        else:
            lo_branch = _Branch(plan.lo, self.lo, c0, set(), lo_active)
            hi_branch = _Branch(plan.hi, c0, self.hi, set(), hi_active)

        out: dict[PebbledBoard, int] = {}
        replacement: list[_Branch] = []
        for child in (lo_branch, hi_branch):
            placements, repl, pend = child.act(color, side)
            assert pend is None
            out.update(placements)
            replacement.extend(repl if repl is not None else [child])
        pending = _PendingSplit(lo_branch, hi_branch, c0, set(passive))
        return out, replacement, pending


@dataclass(slots=True)
class _PendingSplit:
    lo_branch: _Branch
    hi_branch: _Branch
    split_color: int
    passive: set[PebbledBoard]

    def assign(self, nb: PebbledBoard, new_color: int) -> _Branch | None:
        p = nb.position_of(new_color)
        p_lo = nb.resolve(self.lo_branch.lo)
        p_c0 = nb.position_of(self.split_color)
        p_hi = nb.resolve(self.hi_branch.hi)
        if p_lo <= p < p_c0:
            return self.lo_branch
        if p_c0 <= p < p_hi:
            return self.hi_branch
        return None


class PlanPlayer(StrategyPlayer):
    """Executes a plan tree round by round.

    Every live branch either makes its scripted move (when the active side
    matches the next entry of its pattern) or stalls with a dummy pebble on
    its segment's lower anchor.  Boards are re-assigned to branches each
    round by provenance, with midpoint splits routing the expanded side by
    the region its new pebble landed in.  Branches must stay pairwise
    type-disjoint; collisions raise immediately.
    """

    def __init__(self, plan: Plan, pattern: Pattern | None = None,
                 lo: int = MIN, hi: int = MAX) -> None:
        self.plan = plan
        self.lo = lo
        self.hi = hi
        tight = plan_pattern(plan)
        self.pattern = tight if pattern is None else tuple(pattern)
        if not embeds(tight, self.pattern):
            raise ValueError(
                f"plan pattern {pattern_text(tight)} does not embed in "
                f"{pattern_text(self.pattern)}"
            )
        self.branches: list[_Branch] = []
        self.pending: list[_PendingSplit] = []

    def begin(self, left: Boards, right: Boards) -> None:
        super().begin(left, right)
        self.branches = [_Branch(self.plan, self.lo, self.hi, set(left), set(right))]
        self.pending = []

    def set_owned(self, left, right) -> None:
        super().set_owned(left, right)
        if len(self.branches) != 1:
            raise RuntimeError("cannot rebind a plan player after it has split")
        self.branches[0].lefts = set(left)
        self.branches[0].rights = set(right)

    def step(self, state: GameState, color: int, side: str) -> dict[PebbledBoard, int]:
        out: dict[PebbledBoard, int] = {}
        new_branches: list[_Branch] = []
        for br in self.branches:
            if br.cursor < len(br.pattern) and br.pattern[br.cursor] == side:
                placements, replacement, pending = br.act(color, side)
                out.update(placements)
                new_branches.extend(replacement if replacement is not None else [br])
                if pending is not None:
                    self.pending.append(pending)
            else:
                for b in br.boards(side):
                    out[b] = b.resolve(br.lo)
                new_branches.append(br)
        self.branches = new_branches
        return out

    def observe(self, state: GameState, provenance, color: int) -> None:
        super().observe(state, provenance, color)
        owner: dict[PebbledBoard, _Branch] = {}
        pending_of: dict[PebbledBoard, _PendingSplit] = {}
        for br in self.branches:
            for b in br.lefts | br.rights:
                owner[b] = br
        for pend in self.pending:
            for b in pend.passive:
                pending_of[b] = pend
        new_lefts: dict[int, set] = {id(br): set() for br in self.branches}
        new_rights: dict[int, set] = {id(br): set() for br in self.branches}
        for nb in state.left:
            self._route(nb, provenance, owner, pending_of, color, new_lefts)
        for nb in state.right:
            self._route(nb, provenance, owner, pending_of, color, new_rights)
        for br in self.branches:
            br.lefts = new_lefts[id(br)]
            br.rights = new_rights[id(br)]
        self.pending = []
        self._check_disjoint()

    def _route(self, nb, provenance, owner, pending_of, color, target) -> None:
        parent = provenance.get(nb)
        br = owner.get(parent)
        if br is None:
            pend = pending_of.get(parent)
            if pend is not None:
                br = pend.assign(nb, color)
            if br is None:
                raise BranchTypeCollision(
                    f"board {nb} survived outside every branch region"
                )
        target.setdefault(id(br), set()).add(nb)

    def _check_disjoint(self) -> None:
        seen: dict = {}
        for i, br in enumerate(self.branches):
            for b in br.lefts | br.rights:
                t = atomic_type(b)
                if seen.setdefault(t, i) != i:
                    raise BranchTypeCollision(
                        "two sub-games share an atomic type; parallel play "
                        "would be unsound here"
                    )


# ---------------------------------------------------------------------------
# Public strategy constructors
# ---------------------------------------------------------------------------

def cma_player(spec: MslSpec) -> PlanPlayer:
    """Midpoint-with-alternation player for a winnable spec.

    Refuses specs whose round budget is below what the strategy needs.  With
    extra rounds the tight plan is stretched over an alternating master
    pattern by dummy moves.
    """
    need = q_star_side(spec.q, spec.length)
    if spec.rounds < need:
        raise ValueError(
            f"{spec} is not winnable by the midpoint strategy; "
            f"needs {need} rounds"
        )
    plan = cma_plan(spec.q, spec.length)
    if spec.rounds == need:
        master = plan_pattern(plan)
    else:
        master = _alternating(spec.q, spec.rounds)
        if not embeds(plan_pattern(plan), master):
            raise ValueError(
                f"tight pattern does not stretch to {spec.rounds} rounds"
            )
    return PlanPlayer(plan, master)


def cma_pattern(q: str, length: int) -> Pattern:
    return plan_pattern(cma_plan(q, length))


def alternating_separator(length: int) -> PlanPlayer:
    """Player separating lengths <= `length` from longer ones with a
    strictly alternating pattern of q_star(length) rounds ending
    universally."""
    best = q_star(length)
    for q in (FORALL, EXISTS):
        if q_star_side(q, length) == best:
            plan = strict_plan(q, length)
            if plan is not None:
                player = PlanPlayer(plan)
                pat = player.pattern
                assert _strictly_alternating(pat) and pat[-1] == FORALL
                return player
    raise RuntimeError(
        f"no strictly alternating separator of {best} rounds for length {length}"
    )


def _strict_sub_plan(length: int) -> Plan:
    best = q_star(length)
    for q in (FORALL, EXISTS):
        if q_star_side(q, length) == best:
            plan = strict_plan(q, length)
            if plan is not None:
                return plan
    raise RuntimeError(f"no strict plan for length {length}")


def exact_length_pattern(length: int) -> Pattern:
    if length == 1:
        return plan_pattern(_strict_sub_plan(1))
    p2 = plan_pattern(_strict_sub_plan(length))
    master = (FORALL,) + complement(p2)
    if master[-1] == EXISTS:
        master = master + (FORALL,)
    return master


class ExactLengthPlayer(StrategyPlayer):
    """Separates boards whose [lo, hi] segment has exactly the target length
    from boards of every other segment length.

    Round 1 is universal: the sub-instance whose own strategy opens
    universally makes its real move (never on the segment's top anchor),
    while the other sub-instance's boards are marked on that anchor.  The
    mark splits the game into a shorter-than and a longer-than sub-game
    played in lockstep from round 2.
    """

    def __init__(self, length: int, lo: int = MIN, hi: int = MAX) -> None:
        if length < 1:
            raise ValueError("length must be >= 1")
        self.length = length
        self.lo = lo
        self.hi = hi
        self.pattern = exact_length_pattern(length)
        if length == 1:
            self.longer: StrategyPlayer = PlanPlayer(_strict_sub_plan(1), lo=lo, hi=hi)
            self.shorter = None
        else:
            p2 = _strict_sub_plan(length)
            p2_pat = plan_pattern(p2)
            p1 = _strict_sub_plan(length - 1)
            ext = len(p2_pat) - len(plan_pattern(p1))
            if ext:
                p1 = PrefixDummies(p2_pat[:ext], p1)
            if plan_pattern(p1) != p2_pat:
                raise RuntimeError("sub-separator patterns failed to line up")
            self.longer = PlanPlayer(p2, lo=lo, hi=hi)
            self.shorter = SwappedPlayer(PlanPlayer(p1, lo=lo, hi=hi))
        subs = [self.longer] if self.shorter is None else [self.longer, self.shorter]
        starters = [s for s in subs if s.pattern and s.pattern[0] == FORALL]
        if len(starters) != 1:
            raise RuntimeError("exactly one sub-strategy must open universally")
        self.opener = starters[0]
        self.marked = next((s for s in subs if s is not self.opener), None)

    def begin(self, left: Boards, right: Boards) -> None:
        super().begin(left, right)
        shorter_r = set()
        longer_r = set()
        for b in right:
            s = b.resolve(self.hi) - b.resolve(self.lo)
            if s < self.length:
                shorter_r.add(b)
            elif s > self.length:
                longer_r.add(b)
            else:
                raise ValueError("right side contains the target length itself")
        self.longer.begin(frozenset(left), frozenset(longer_r))
        if self.shorter is not None:
            self.shorter.begin(frozenset(left), frozenset(shorter_r))
        elif shorter_r:
            raise ValueError("length 1 admits no shorter boards")

    def step(self, state: GameState, color: int, side: str) -> dict[PebbledBoard, int]:
        if color == 1 and self.marked is not None:
            assert side == FORALL
            out = self.opener.step(state, color, side)
            self.mark_color = color
            for b in self.marked.right_owned:
                out[b] = b.resolve(self.hi)
            return out
        out = self.opener.step(state, color, side)
        if self.marked is not None:
            out.update(self.marked.step(state, color, side))
        return out

    def observe(self, state: GameState, provenance, color: int) -> None:
        super().observe(state, provenance, color)
        if color == 1 and self.marked is not None:
            hi_marked = set()
            unmarked = set()
            for nb in state.left:
                if nb.position_of(1) == nb.resolve(self.hi):
                    hi_marked.add(nb)
                else:
                    unmarked.add(nb)
            for sub, lefts in ((self.opener, unmarked), (self.marked, hi_marked)):
                rights = {
                    nb for nb in state.right
                    if provenance.get(nb) in sub.right_owned
                }
                sub.set_owned(lefts, rights)
            return
        self.opener.observe(state, provenance, color)
        if self.marked is not None:
            self.marked.observe(state, provenance, color)


def exact_length_separator(length: int) -> ExactLengthPlayer:
    return ExactLengthPlayer(length)


def exact_length_instance(length: int, extra_rounds: int = 0) -> GameState:
    """({the one order of this length}, every other length up to a finite
    horizon wide enough for the separator's round budget)."""
    rounds = len(exact_length_pattern(length)) + extra_rounds
    left = [PebbledBoard(make_linear_order(length))]
    right = [
        PebbledBoard(make_linear_order(m))
        for m in range(1, length)
    ] + [PebbledBoard(b) for b in surrogate_above(length, rounds)]
    return make_state(left, right)

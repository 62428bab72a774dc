"""Finite ordered structures, pebbled boards, and the partial-isomorphism test.

Two vocabularies are supported: linear orders (a strict total order with
``min``/``max`` constants, universe 0..length) and binary strings (the same
plus a unary bit predicate, universe 1..n).  Everything here is immutable and
hashable so boards can live in sets and serve as memoization keys.  Boards
sit on the engine's hottest paths, so they cache their hash and atomic type
and offer validation-free internal constructors.
"""

from __future__ import annotations

# Constants are encoded as negative pseudo-colors so that a block of
# coinciding elements sorts as (min, max, color 1, color 2, ...).
MIN = -2
MAX = -1

_COLOR_NAMES = {1: "r", 2: "b", 3: "g"}


def color_name(color: int) -> str:
    return _COLOR_NAMES.get(color, f"p{color}")


class VocabularyMismatch(TypeError):
    """Raised when boards from different vocabularies are compared."""


class LinearOrder:
    """A linear order of `length` edges; the universe is positions 0..length."""

    __slots__ = ("length",)

    def __init__(self, length: int) -> None:
        if length < 1:
            raise ValueError(f"linear order length must be >= 1, got {length}")
        self.length = length

    @property
    def min_pos(self) -> int:
        return 0

    @property
    def max_pos(self) -> int:
        return self.length

    @property
    def universe(self) -> range:
        return range(0, self.length + 1)

    def bit(self, pos: int) -> None:
        return None

    def __eq__(self, other) -> bool:
        return isinstance(other, LinearOrder) and other.length == self.length

    def __hash__(self) -> int:
        return hash((0, self.length))

    def __repr__(self) -> str:
        return f"LinearOrder({self.length})"


class BinaryString:
    """A binary string w_1..w_n; the universe is positions 1..n."""

    __slots__ = ("bits", "_hash")

    def __init__(self, bits: tuple[int, ...]) -> None:
        bits = tuple(bits)
        if len(bits) < 1:
            raise ValueError("binary string must have length >= 1")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        self.bits = bits
        self._hash = hash((1, bits))

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def min_pos(self) -> int:
        return 1

    @property
    def max_pos(self) -> int:
        return len(self.bits)

    @property
    def universe(self) -> range:
        return range(1, len(self.bits) + 1)

    def bit(self, pos: int) -> int:
        return self.bits[pos - 1]

    def text(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryString) and other.bits == self.bits

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"BinaryString({self.text()!r})"


Base = LinearOrder | BinaryString

_ORDER_CACHE: dict[int, LinearOrder] = {}


def make_linear_order(length: int) -> LinearOrder:
    """The unique linear order with `length` edges (length >= 1)."""
    order = _ORDER_CACHE.get(length)
    if order is None:
        order = _ORDER_CACHE.setdefault(length, LinearOrder(length))
    return order


def make_binary_string(text: str) -> BinaryString:
    return BinaryString(tuple(int(c) for c in text))


class Segment:
    """A closed interval [lo, hi] of positions on one board."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: int, hi: int) -> None:
        if lo > hi:
            raise ValueError(f"segment requires lo <= hi, got [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def __eq__(self, other) -> bool:
        return isinstance(other, Segment) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Segment({self.lo}, {self.hi})"


def closest_to_midpoint(seg: Segment) -> int:
    """Midpoint of the segment for even length, the element just left of it
    for odd length.  Never returns seg.hi."""
    if seg.hi <= seg.lo:
        raise ValueError("closest_to_midpoint requires a nonempty segment")
    return seg.lo + (seg.hi - seg.lo) // 2


class PebbledBoard:
    """A structure plus an ordered record of colored pebble placements.

    Placements are (color, position) pairs in play order.  At most one
    placement per color; several colors may share a position.
    """

    __slots__ = ("base", "placements", "_hash", "_type")

    def __init__(self, base: Base, placements: tuple[tuple[int, int], ...] = ()) -> None:
        placements = tuple(placements)
        seen: set[int] = set()
        uni = base.universe
        for color, pos in placements:
            if color <= 0:
                raise ValueError(f"colors are positive integers, got {color}")
            if color in seen:
                raise ValueError(f"color {color} placed twice")
            seen.add(color)
            if pos not in uni:
                raise ValueError(f"position {pos} outside universe of {base!r}")
        self.base = base
        self.placements = placements
        self._hash = hash((base, placements))
        self._type: tuple | None = None

    @classmethod
    def _make(cls, base: Base, placements: tuple[tuple[int, int], ...]) -> "PebbledBoard":
        """Validation-free constructor for engine-internal use."""
        b = cls.__new__(cls)
        b.base = base
        b.placements = placements
        b._hash = hash((base, placements))
        b._type = None
        return b

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PebbledBoard)
            and other._hash == self._hash
            and other.placements == self.placements
            and other.base == self.base
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"PebbledBoard({self.base!r}, {self.placements!r})"

    @property
    def colors(self) -> frozenset[int]:
        return frozenset(c for c, _ in self.placements)

    def position_of(self, color: int) -> int:
        for c, p in self.placements:
            if c == color:
                return p
        raise KeyError(f"no pebble of color {color} on this board")

    def with_pebble(self, color: int, pos: int) -> "PebbledBoard":
        if pos not in self.base.universe:
            raise ValueError(f"position {pos} outside universe of {self.base!r}")
        if any(c == color for c, _ in self.placements):
            raise ValueError(f"color {color} placed twice")
        return PebbledBoard._make(self.base, self.placements + ((color, pos),))

    def without_last(self) -> "PebbledBoard":
        if not self.placements:
            raise ValueError("board has no pebbles")
        return PebbledBoard._make(self.base, self.placements[:-1])

    def resolve(self, anchor: int) -> int:
        """Position of an anchor: MIN, MAX, or a pebble color."""
        if anchor == MIN:
            return self.base.min_pos
        if anchor == MAX:
            return self.base.max_pos
        return self.position_of(anchor)

    def sort_key(self) -> tuple:
        if isinstance(self.base, LinearOrder):
            return (0, self.base.length, (), self.placements)
        return (1, self.base.n, self.base.bits, self.placements)


def board(base: Base, *placements: tuple[int, int]) -> PebbledBoard:
    return PebbledBoard(base, tuple(placements))


def atomic_type(b: PebbledBoard) -> tuple:
    """Canonical quantifier-free type of the pebbled elements and constants.

    Elements are grouped into blocks of coinciding positions, sorted by
    position.  Each block lists its member names (constants first, then
    colors ascending) and, for strings, carries the bit at that position.
    Two boards with equal color sets form a matching pair iff their atomic
    types are equal.
    """
    t = b._type
    if t is not None:
        return t
    base = b.base
    named: dict[int, list[int]] = {base.min_pos: [MIN]}
    named.setdefault(base.max_pos, []).append(MAX)
    for color, pos in b.placements:
        named.setdefault(pos, []).append(color)
    t = tuple(
        (tuple(sorted(named[pos])), base.bit(pos)) for pos in sorted(named)
    )
    b._type = t
    return t


def is_matching_pair(a: PebbledBoard, b: PebbledBoard) -> bool:
    """Whether mapping a's pebbles and constants onto b's is a partial
    isomorphism of the induced substructures.

    Implemented directly from the definition (build the map, check it is
    well defined, order preserving in both directions, and bit preserving);
    `atomic_type` equality is the fast equivalent and is tested against this.
    """
    if type(a.base) is not type(b.base):
        raise VocabularyMismatch(f"cannot match {a.base!r} against {b.base!r}")
    if a.colors != b.colors:
        raise ValueError("matching requires equal color sets")

    pairs = [(a.base.min_pos, b.base.min_pos), (a.base.max_pos, b.base.max_pos)]
    pos_b = dict(b.placements)
    for color, pa in a.placements:
        pairs.append((pa, pos_b[color]))

    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    for pa, pb in pairs:
        if fwd.setdefault(pa, pb) != pb or bwd.setdefault(pb, pa) != pa:
            return False
    for pa, pb in fwd.items():
        if a.base.bit(pa) != b.base.bit(pb):
            return False
    items = list(fwd.items())
    for i, (pa, pb) in enumerate(items):
        for pa2, pb2 in items[i + 1:]:
            if (pa < pa2) != (pb < pb2):
                return False
    return True


def render_board(b: PebbledBoard) -> str:
    """Stable text form, e.g. ``L(5)[r@2]`` or ``S(001000)[r@3,b@5]``."""
    if isinstance(b.base, LinearOrder):
        head = f"L({b.base.length})"
    else:
        head = f"S({b.base.text()})"
    inner = ",".join(f"{color_name(c)}@{p}" for c, p in b.placements)
    return f"{head}[{inner}]"


def parse_board(text: str) -> PebbledBoard:
    """Inverse of render_board."""
    head, _, rest = text.partition("[")
    if not rest.endswith("]"):
        raise ValueError(f"malformed board text: {text!r}")
    inner = rest[:-1]
    if head.startswith("L(") and head.endswith(")"):
        base: Base = make_linear_order(int(head[2:-1]))
    elif head.startswith("S(") and head.endswith(")"):
        base = make_binary_string(head[2:-1])
    else:
        raise ValueError(f"malformed board text: {text!r}")
    placements = []
    by_name = {v: k for k, v in _COLOR_NAMES.items()}
    if inner:
        for part in inner.split(","):
            name, _, pos = part.partition("@")
            color = by_name.get(name)
            if color is None:
                if not name.startswith("p"):
                    raise ValueError(f"unknown pebble name {name!r}")
                color = int(name[1:])
            placements.append((color, int(pos)))
    return PebbledBoard(base, tuple(placements))


def _anchors(b: PebbledBoard) -> list[int]:
    out = {0, b.base.length}
    for _, p in b.placements:
        out.add(p)
    return sorted(out)


def capped_board(b: PebbledBoard, budget: int) -> PebbledBoard:
    """Representative of `b` up to distinguishability with `budget` further
    quantifiers.

    For linear orders, the segments between consecutive named elements are
    indistinguishable beyond length 2**budget by any formula of quantifier
    rank <= budget (and a formula with <= budget quantifiers has at most that
    rank), so each gap is capped at 2**budget.  Strings are returned
    unchanged: their content admits no such collapse.
    """
    if not isinstance(b.base, LinearOrder):
        return b
    cap = 1 << max(budget, 0)
    anchors = _anchors(b)
    new_pos = {anchors[0]: 0}
    cur = 0
    for i in range(1, len(anchors)):
        cur += min(anchors[i] - anchors[i - 1], cap)
        new_pos[anchors[i]] = cur
    if cur == b.base.length:
        return b
    return PebbledBoard._make(
        make_linear_order(cur), tuple((c, new_pos[p]) for c, p in b.placements)
    )


def capped_children(b: PebbledBoard, color: int, budget: int) -> list[PebbledBoard]:
    """All one-pebble extensions of a linear-order board, already collapsed
    to capped form at 2**budget; exactly the capped image of the full
    universe of placements.

    Enumerates per gap: each distinct (left part, right part) split of the
    gap after capping gets one representative, assembled arithmetically from
    prefix sums instead of building and re-capping every raw placement.
    """
    base = b.base
    if not isinstance(base, LinearOrder):
        raise VocabularyMismatch("capped_children applies to linear orders")
    cap = 1 << max(budget, 0)
    placements = b.placements
    anchors = _anchors(b)
    n_gaps = len(anchors) - 1
    cpos = [0] * len(anchors)
    for i in range(1, len(anchors)):
        cpos[i] = cpos[i - 1] + min(anchors[i] - anchors[i - 1], cap)
    total = cpos[-1]
    pos_map = {a: cpos[i] for i, a in enumerate(anchors)}
    capped_pl = tuple((c, pos_map[p]) for c, p in placements)

    out: list[PebbledBoard] = []
    for i in range(n_gaps):
        g = anchors[i + 1] - anchors[i]
        left_c = cpos[i]
        old = cpos[i + 1] - cpos[i]
        pairs: set[tuple[int, int]] = set()
        if g <= 2 * cap + 1:
            for u in range(0, g):
                pairs.add((min(u, cap), min(g - u, cap)))
        else:
            for u in range(0, cap + 1):
                pairs.add((u, cap))
            for v in range(1, cap + 1):
                pairs.add((cap, v))
            pairs.add((cap, cap))
        for u, v in pairs:
            shift = u + v - old
            if shift:
                pl = tuple(
                    (c, q if q <= left_c else q + shift) for c, q in capped_pl
                )
            else:
                pl = capped_pl
            out.append(
                PebbledBoard._make(
                    make_linear_order(total + shift),
                    pl + ((color, left_c + u),),
                )
            )
    out.append(
        PebbledBoard._make(
            make_linear_order(total), capped_pl + ((color, total),)
        )
    )
    return out


def reduced_positions(b: PebbledBoard, budget: int) -> list[int]:
    """A position subset whose one-pebble extensions, after gap capping at
    2**budget, realize exactly the capped forms the full universe realizes.

    Within a gap of length g, offsets beyond the cap from both ends all
    collapse to the same capped form, so one representative suffices.
    """
    if not isinstance(b.base, LinearOrder):
        return list(b.base.universe)
    cap = 1 << max(budget, 0)
    out: set[int] = set()
    anchors = _anchors(b)
    out.update(anchors)
    for i in range(1, len(anchors)):
        x, y = anchors[i - 1], anchors[i]
        g = y - x
        near = min(cap, g)
        for a in range(1, near + 1):
            out.add(x + a)
            out.add(y - a)
        if g >= 2 * cap + 2:
            out.add(x + cap + 1)
    return sorted(out)

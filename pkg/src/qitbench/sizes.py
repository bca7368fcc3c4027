"""Well-founded tree sizes under the plump order.

Sizes are finite trees over a size signature (at least one nullary and
one binary operator).  The order is the mutual structural recursion

    le(node(a, cs), j)  iff  every c in cs has lt(c, j)
    lt(i, node(a, cs))  iff  some c in cs has le(i, c)

which is transitive, has joins as strict upper bounds, and admits
height as a ranking function; totality is deliberately not assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .errors import ArityMismatch, CycleDetected, InfinitaryArity, ParseError
from .terms import Equation, Signature, SystemOfEquations


@dataclass(frozen=True)
class SizeSig:
    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.ops]
        if len(set(names)) != len(names):
            raise ArityMismatch("duplicate size operator")
        if not any(a == 0 for _, a in self.ops) or not any(a == 2 for _, a in self.ops):
            raise ArityMismatch("size signature needs a nullary and a binary operator")

    @classmethod
    def minimal(cls) -> "SizeSig":
        return cls((("zero", 0), ("join", 2)))

    def arity(self, name: str) -> int:
        for n, a in self.ops:
            if n == name:
                return a
        raise ArityMismatch(f"unknown size operator {name!r}")

    @property
    def nullary(self) -> str:
        return next(n for n, a in self.ops if a == 0)

    @property
    def binary(self) -> str:
        return next(n for n, a in self.ops if a == 2)

    def zero(self) -> "SizeVal":
        return SizeVal(self.nullary, ())

    def join(self, i: "SizeVal", j: "SizeVal") -> "SizeVal":
        return SizeVal(self.binary, (i, j))

    def suc(self, i: "SizeVal") -> "SizeVal":
        return self.join(i, i)

    def upper_bound(self, op: str, family: Sequence["SizeVal"]) -> "SizeVal":
        """A size strictly above every member of the family: the node
        whose children are exactly the family."""
        if len(family) != self.arity(op):
            raise ArityMismatch(f"{op} expects {self.arity(op)} children, got {len(family)}")
        return SizeVal(op, tuple(family))


class SizeVal:
    """Immutable size tree with a precomputed hash (the order procedures
    memoize on node pairs, so hashing must not re-walk the tree)."""

    __slots__ = ("op", "children", "_hash")

    def __init__(self, op: str, children: tuple["SizeVal", ...] = ()):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "_hash", hash((op, children)))

    def __setattr__(self, *_):
        raise AttributeError("SizeVal is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, SizeVal):
            return NotImplemented
        return self._hash == other._hash and self.op == other.op and self.children == other.children

    def __repr__(self):
        return show_size(self)


def show_size(i: SizeVal) -> str:
    if not i.children:
        return f"(sz {i.op})"
    return f"(sz {i.op} " + " ".join(show_size(c) for c in i.children) + ")"


def parse_size(text: str, sig: Optional[SizeSig] = None) -> SizeVal:
    from .sexpr import _Reader, _form

    r = _Reader(text)
    item = _form(r)
    r.done()

    def build(it) -> SizeVal:
        if isinstance(it, tuple) and isinstance(it[0], str):
            raise ParseError(f"expected (sz ...), got atom {it[0]!r}", it[1], it[2])
        items, line, col = it
        if not items or not (isinstance(items[0], tuple) and items[0][0] == "sz"):
            raise ParseError("expected (sz <op> <child>...)", line, col)
        if len(items) < 2 or not isinstance(items[1][0], str):
            raise ParseError("sz needs an operator name", line, col)
        op = items[1][0]
        children = tuple(build(c) for c in items[2:])
        if sig is not None and sig.arity(op) != len(children):
            raise ArityMismatch(f"size operator {op} expects {sig.arity(op)} children")
        return SizeVal(op, children)

    return build(item)


def height(i: SizeVal) -> int:
    return 1 + max((height(c) for c in i.children), default=0)


class PlumpOrder:
    """Memoized decision procedures for the plump order."""

    def __init__(self):
        self._lt: dict[tuple[SizeVal, SizeVal], bool] = {}
        self._le: dict[tuple[SizeVal, SizeVal], bool] = {}

    def le(self, i: SizeVal, j: SizeVal) -> bool:
        key = (i, j)
        hit = self._le.get(key)
        if hit is None:
            hit = all(self.lt(c, j) for c in i.children)
            self._le[key] = hit
        return hit

    def lt(self, i: SizeVal, j: SizeVal) -> bool:
        key = (i, j)
        hit = self._lt.get(key)
        if hit is None:
            hit = any(self.le(i, c) for c in j.children)
            self._lt[key] = hit
        return hit


_shared = PlumpOrder()


def le(i: SizeVal, j: SizeVal) -> bool:
    return _shared.le(i, j)


def lt(i: SizeVal, j: SizeVal) -> bool:
    return _shared.lt(i, j)


def size_signature_for(sig: Signature, sys: SystemOfEquations) -> SizeSig:
    """Nullary and binary structural operators, plus one operator per
    signature operator (arity of its child family) and one per equation
    (arity of its variable family)."""
    ops: list[tuple[str, int]] = [("zero", 0), ("join", 2)]
    for d in sig.ops:
        if not d.arity.finite:
            raise InfinitaryArity(f"{d.op.show()} has countable arity")
        ops.append(("op_" + "_".join(d.op.show().split()), d.arity.count))
    for e in sys.equations:
        names = e.var_names()
        if names is None:
            raise InfinitaryArity(f"equation {e.name} has a countable variable family")
        ops.append(("eq_" + "_".join(e.name.split()), len(names)))
    return SizeSig(tuple(ops))


class SizeUniverse:
    """All sizes of height <= h over a signature, with the order and the
    strict down-segments precomputed.  Immutable once built."""

    def __init__(self, sig: SizeSig, height_bound: int, members: Optional[Sequence[SizeVal]] = None):
        if height_bound < 1:
            raise ArityMismatch("height bound must be at least 1")
        self.sig = sig
        self.height = height_bound
        self.order = PlumpOrder()

        if members is None:
            exact: list[list[SizeVal]] = []
            for h in range(1, height_bound + 1):
                level: list[SizeVal] = []
                pool = [m for lvl in exact for m in lvl]
                for name, arity in sig.ops:
                    if arity == 0:
                        if h == 1:
                            level.append(SizeVal(name))
                        continue
                    if h == 1:
                        continue
                    for combo in itertools.product(pool, repeat=arity):
                        if max(height(c) for c in combo) == h - 1:
                            level.append(SizeVal(name, combo))
                exact.append(level)
            members = [m for lvl in exact for m in lvl]
        self.members: tuple[SizeVal, ...] = tuple(members)
        self._position = {m: p for p, m in enumerate(self.members)}
        self.below: dict[SizeVal, tuple[SizeVal, ...]] = {
            i: tuple(j for j in self.members if self.order.lt(j, i)) for i in self.members
        }

    @classmethod
    def chain(cls, sig: SizeSig, height_bound: int) -> "SizeUniverse":
        """The linearly ordered sub-universe of iterated successors.
        Unlike the full tree universe, every truncation of it is
        directed below its single maximal member."""
        steps = [sig.zero()]
        while len(steps) < height_bound:
            steps.append(sig.suc(steps[-1]))
        return cls(sig, height_bound, members=steps)

    def __contains__(self, i: SizeVal) -> bool:
        return i in self._position

    def position(self, i: SizeVal) -> int:
        return self._position[i]

    def lt(self, i: SizeVal, j: SizeVal) -> bool:
        return self.order.lt(i, j)

    def le(self, i: SizeVal, j: SizeVal) -> bool:
        return self.order.le(i, j)


def wf_rec(
    u: SizeUniverse,
    step: Callable[[SizeVal, Mapping[SizeVal, object]], object],
    schedule: Optional[Sequence[SizeVal]] = None,
) -> dict[SizeVal, object]:
    """Well-founded recursion over the universe: step receives a member
    and the finished values of everything strictly below it.  The result
    is schedule-independent; a cycle in the order would surface as
    CycleDetected."""
    values: dict[SizeVal, object] = {}
    in_progress: set[SizeVal] = set()

    def visit(i: SizeVal):
        if i in values:
            return values[i]
        if i in in_progress:
            raise CycleDetected(show_size(i))
        in_progress.add(i)
        partial = {j: visit(j) for j in u.below[i]}
        values[i] = step(i, partial)
        in_progress.discard(i)
        return values[i]

    for i in schedule if schedule is not None else u.members:
        visit(i)
    return values

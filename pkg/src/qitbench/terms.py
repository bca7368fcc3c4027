"""Signatures, terms, and equational systems.

A signature is an ordered list of operator declarations.  Operators are
symbols with a base name plus parameter tags, so a family like ``cons x``
instantiated at carrier elements a, b yields the distinct operators
``cons a`` and ``cons b``.  Arities are finite (FIN n) or countable (NAT);
countable child families are kept symbolic as comprehensions over an
index variable rather than materialized.

Terms form the free monad over the signature: variables are the unit,
operator nodes the free layer, and bind is substitution of behaviours
for variables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    ArityMismatch,
    InfinitaryArity,
    NameClash,
    UnboundVariable,
    UnknownOp,
)


@dataclass(frozen=True)
class Arity:
    """FIN(n) indexes children by 0..n-1; count None encodes NAT."""

    count: Optional[int]

    def __post_init__(self):
        if self.count is not None and self.count < 0:
            raise ValueError("negative arity")

    @property
    def finite(self) -> bool:
        return self.count is not None

    def __repr__(self) -> str:
        return "NAT" if self.count is None else f"FIN({self.count})"


def fin(n: int) -> Arity:
    return Arity(n)


NAT = Arity(None)


@dataclass(frozen=True, order=True)
class OpSym:
    """Operator symbol: base name plus instantiation parameters."""

    name: str
    params: tuple[str, ...] = ()

    def show(self) -> str:
        return " ".join((self.name,) + self.params)

    @staticmethod
    def parse(text: str) -> "OpSym":
        parts = tuple(text.split())
        if not parts:
            raise ValueError("empty operator name")
        return OpSym(parts[0], parts[1:])


def _op(op: Union[OpSym, str]) -> OpSym:
    return op if isinstance(op, OpSym) else OpSym.parse(op)


@dataclass(frozen=True)
class OpDecl:
    op: OpSym
    arity: Arity
    # Target index and per-child indices for indexed runs; None otherwise.
    sort: Optional[str] = None
    child_sorts: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.child_sorts is not None:
            if not self.arity.finite or len(self.child_sorts) != self.arity.count:
                raise ArityMismatch(f"child sorts of {self.op.show()} do not match arity")


@dataclass(frozen=True)
class Signature:
    ops: tuple[OpDecl, ...]

    def __post_init__(self):
        names = [d.op for d in self.ops]
        if len(set(names)) != len(names):
            raise NameClash("duplicate operator in signature")
        object.__setattr__(self, "_decls", {d.op: (i, d) for i, d in enumerate(self.ops)})

    def decl(self, op: Union[OpSym, str]) -> OpDecl:
        op = _op(op)
        entry = self._decls.get(op)
        if entry is None:
            raise UnknownOp(f"unknown operator {op.show()!r}")
        return entry[1]

    def op_index(self, op: Union[OpSym, str]) -> int:
        op = _op(op)
        entry = self._decls.get(op)
        if entry is None:
            raise UnknownOp(f"unknown operator {op.show()!r}")
        return entry[0]

    def has_op(self, op: Union[OpSym, str]) -> bool:
        return _op(op) in self._decls

    @property
    def sorts(self) -> Optional[tuple[str, ...]]:
        """Target indices in first-appearance order, or None if unsorted."""
        seen: list[str] = []
        for d in self.ops:
            if d.sort is not None and d.sort not in seen:
                seen.append(d.sort)
        return tuple(seen) or None


def signature(ops: Iterable[tuple]) -> Signature:
    """Build a Signature from (name, arity[, sort, child_sorts]) rows.

    Arities may be given as ints (FIN) or the NAT sentinel.
    """
    decls = []
    for row in ops:
        name, arity, rest = row[0], row[1], row[2:]
        if isinstance(arity, int):
            arity = fin(arity)
        sort = rest[0] if len(rest) > 0 else None
        child_sorts = tuple(rest[1]) if len(rest) > 1 and rest[1] is not None else None
        decls.append(OpDecl(_op(name), arity, sort, child_sorts))
    return Signature(tuple(decls))


# --- index expressions (used by comprehensions and indexed signatures) ---


@dataclass(frozen=True)
class IxV:
    name: str


@dataclass(frozen=True)
class IxC:
    n: int


@dataclass(frozen=True)
class IxApp:
    fn: str
    arg: "IndexExpr"


IndexExpr = Union[IxV, IxC, IxApp]


@dataclass(frozen=True)
class IndexMap:
    """A declared total map on naturals: finite exception table, identity
    (or a declared variable shift) beyond it."""

    name: str
    table: tuple[tuple[int, int], ...] = ()

    def apply(self, n: int) -> int:
        for src, dst in self.table:
            if src == n:
                return dst
        return n


def eval_ix(expr: IndexExpr, env: Mapping[str, int], maps: Mapping[str, IndexMap]) -> int:
    match expr:
        case IxC(n):
            return n
        case IxV(name):
            if name not in env:
                raise UnboundVariable(f"unbound index variable {name!r}")
            return env[name]
        case IxApp(fn, arg):
            if fn not in maps:
                raise UnboundVariable(f"unknown index map {fn!r}")
            return maps[fn].apply(eval_ix(arg, env, maps))
    raise TypeError(f"not an index expression: {expr!r}")


# --- terms ---


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class IxVar:
    """A variable of a countable family, named by an index expression.
    Only meaningful under an enclosing comprehension binder."""

    expr: IndexExpr


@dataclass(frozen=True)
class Tab:
    entries: tuple["Term", ...]


@dataclass(frozen=True)
class Comp:
    ivar: str
    body: "Term"


ArityMap = Union[Tab, Comp]


@dataclass(frozen=True)
class Node:
    op: OpSym
    children: ArityMap


Term = Union[Var, IxVar, Node]


def mk_node(sig: Signature, op: Union[OpSym, str], children) -> Node:
    """Checked node construction.

    children: a sequence of terms for FIN operators, or a Comp for NAT.
    Child target indices are validated when both sides declare them.
    """
    decl = sig.decl(op)
    if decl.arity.finite:
        if isinstance(children, Comp):
            raise ArityMismatch(f"{decl.op.show()} takes {decl.arity.count} children, got a comprehension")
        entries = tuple(children.entries if isinstance(children, Tab) else children)
        if len(entries) != decl.arity.count:
            raise ArityMismatch(
                f"{decl.op.show()} takes {decl.arity.count} children, got {len(entries)}"
            )
        if decl.child_sorts is not None:
            for child, want in zip(entries, decl.child_sorts):
                if isinstance(child, Node):
                    got = sig.decl(child.op).sort
                    if got is not None and got != want:
                        raise ArityMismatch(
                            f"{decl.op.show()} wants a child at index {want}, got {got}"
                        )
        return Node(decl.op, Tab(entries))
    if not isinstance(children, Comp):
        raise ArityMismatch(f"{decl.op.show()} has countable arity and needs a comprehension")
    return Node(decl.op, children)


def depth(t: Term) -> int:
    """Var depth 1, nullary node depth 1, node depth 1 + max child."""
    match t:
        case Var(_) | IxVar(_):
            return 1
        case Node(_, Tab(entries)):
            return 1 + max((depth(c) for c in entries), default=0)
        case Node(op, Comp(_, _)):
            raise InfinitaryArity(f"depth undefined under countable operator {op.show()}")
    raise TypeError(f"not a term: {t!r}")


def weighted_depth(t: Term, weights: Optional[Mapping[str, int]] = None) -> int:
    """Depth with variables counting at assigned leaf weights (default 1)."""
    weights = weights or {}
    match t:
        case Var(name):
            return weights.get(name, 1)
        case IxVar(_):
            return 1
        case Node(_, Tab(entries)):
            return 1 + max((weighted_depth(c, weights) for c in entries), default=0)
        case Node(op, Comp(_, _)):
            raise InfinitaryArity(f"depth undefined under countable operator {op.show()}")
    raise TypeError(f"not a term: {t!r}")


def free_vars(t: Term) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case IxVar(_):
            return set()
        case Node(_, Tab(entries)):
            out: set[str] = set()
            for c in entries:
                out |= free_vars(c)
            return out
        case Node(_, Comp(_, body)):
            return free_vars(body)
    raise TypeError(f"not a term: {t!r}")


def substitute(t: Term, env: Mapping[str, Term], *, partial: bool = False) -> Term:
    """Replace named variables by terms.  Index variables live in their own
    namespace, so comprehension binders cannot capture."""
    match t:
        case Var(name):
            if name in env:
                return env[name]
            if partial:
                return t
            raise UnboundVariable(f"unbound variable {name!r}")
        case IxVar(_):
            return t
        case Node(op, Tab(entries)):
            return Node(op, Tab(tuple(substitute(c, env, partial=partial) for c in entries)))
        case Node(op, Comp(ivar, body)):
            return Node(op, Comp(ivar, substitute(body, env, partial=partial)))
    raise TypeError(f"not a term: {t!r}")


def map_term(t: Term, rename: Callable[[str], str]) -> Term:
    """Functorial action on variable names."""
    match t:
        case Var(name):
            return Var(rename(name))
        case IxVar(_):
            return t
        case Node(op, Tab(entries)):
            return Node(op, Tab(tuple(map_term(c, rename) for c in entries)))
        case Node(op, Comp(ivar, body)):
            return Node(op, Comp(ivar, map_term(body, rename)))
    raise TypeError(f"not a term: {t!r}")


def instantiate_comp(comp: Comp, k: int, maps: Mapping[str, IndexMap] | None = None) -> Term:
    """The k-th child of a comprehension: index variables under the binder
    evaluate to decimal variable names."""
    maps = maps or {}

    def go(t: Term, env: Mapping[str, int]) -> Term:
        match t:
            case Var(_):
                return t
            case IxVar(expr):
                return Var(str(eval_ix(expr, env, maps)))
            case Node(op, Tab(entries)):
                return Node(op, Tab(tuple(go(c, env) for c in entries)))
            case Node(op, Comp(ivar, body)):
                return Node(op, Comp(ivar, t))  # pragma: no cover - nested tabulation unused
        raise TypeError(f"not a term: {t!r}")

    return go(comp.body, {comp.ivar: k})


DEFAULT_SAMPLE_POINTS = tuple(range(9))


def terms_equal(
    a: Term,
    b: Term,
    maps: Mapping[str, IndexMap] | None = None,
    points: Sequence[int] = DEFAULT_SAMPLE_POINTS,
) -> bool:
    """Structural equality; comprehensions compare by instantiation at the
    sample points, which also absorbs index variable renaming."""
    if type(a) is not type(b):
        return False
    match a, b:
        case (Var(x), Var(y)):
            return x == y
        case (IxVar(e1), IxVar(e2)):
            return e1 == e2
        case (Node(op1, ch1), Node(op2, ch2)):
            if op1 != op2:
                return False
            if isinstance(ch1, Tab) and isinstance(ch2, Tab):
                return len(ch1.entries) == len(ch2.entries) and all(
                    terms_equal(x, y, maps, points) for x, y in zip(ch1.entries, ch2.entries)
                )
            if isinstance(ch1, Comp) and isinstance(ch2, Comp):
                return all(
                    terms_equal(instantiate_comp(ch1, k, maps), instantiate_comp(ch2, k, maps), maps, points)
                    for k in points
                )
            return False
    return False


def term_key(sig: Signature, t: Term):
    """Total deterministic order: by depth, variables first, then operator
    declaration order, then children lexicographically."""
    match t:
        case Var(name):
            return (1, 0, name)
        case Node(_, Tab(entries)):
            return (depth(t), 1, sig.op_index(t.op), tuple(term_key(sig, c) for c in entries))
        case Node(_, Comp(_, _)):
            raise InfinitaryArity("no term order under countable operators")
        case IxVar(_):
            raise InfinitaryArity("no term order for index variables")
    raise TypeError(f"not a term: {t!r}")


def enumerate_terms(
    sig: Signature,
    vars: Union[Sequence[str], Mapping[str, Optional[str]]],
    depth_bound: int,
    *,
    sort: Optional[str] = None,
    var_depths: Optional[Mapping[str, int]] = None,
) -> list[Term]:
    """All terms of depth <= depth_bound, deterministically ordered.

    Depth d terms list variables first (declaration order), then for each
    operator in declaration order every child tuple whose maximum depth is
    exactly d-1, in lexicographic order.  vars may carry target indices
    (mapping name -> sort) for indexed signatures; var_depths assigns leaf
    weights other than 1.
    """
    for d in sig.ops:
        if not d.arity.finite:
            raise InfinitaryArity(f"cannot enumerate under countable operator {d.op.show()}")
    if isinstance(vars, Mapping):
        var_rows = list(vars.items())
    else:
        var_rows = [(v, None) for v in vars]
    var_depths = var_depths or {}

    exact: dict[tuple[int, Optional[str]], list[Term]] = {}

    def exactly(d: int, want: Optional[str]) -> list[Term]:
        key = (d, want)
        if key in exact:
            return exact[key]
        out: list[Term] = []
        for name, vsort in var_rows:
            if var_depths.get(name, 1) == d and (want is None or vsort is None or vsort == want):
                out.append(Var(name))
        for decl in sig.ops:
            if want is not None and decl.sort is not None and decl.sort != want:
                continue
            n = decl.arity.count
            if n == 0:
                if d == 1:
                    out.append(Node(decl.op, Tab(())))
                continue
            if d < 2:
                continue
            child_sorts = decl.child_sorts or (None,) * n
            pools = [upto(d - 1, s) for s in child_sorts]
            for combo in itertools.product(*pools):
                if max(weighted_depth(c, var_depths) for c in combo) == d - 1:
                    out.append(Node(decl.op, Tab(combo)))
        exact[key] = out
        return out

    def upto(d: int, want: Optional[str]) -> list[Term]:
        out: list[Term] = []
        for k in range(1, d + 1):
            out.extend(exactly(k, want))
        return out

    return upto(depth_bound, sort)


# --- equations ---


@dataclass(frozen=True)
class Equation:
    """lhs = rhs over a variable family.

    vars is a tuple of names (a finite named set) or an Arity: FIN(n)
    means names "0".."n-1", NAT a countable family.  var_sorts, when
    given, assigns each named variable a target index; sort is the index
    the equation itself lives at.
    """

    name: str
    vars: Union[tuple[str, ...], Arity]
    lhs: Term
    rhs: Term
    var_sorts: Optional[tuple[Optional[str], ...]] = None
    sort: Optional[str] = None

    def var_names(self) -> Optional[tuple[str, ...]]:
        """The named variables, or None for a countable family."""
        if isinstance(self.vars, Arity):
            if not self.vars.finite:
                return None
            return tuple(str(i) for i in range(self.vars.count))
        return self.vars

    def sort_of(self, var: str) -> Optional[str]:
        names = self.var_names()
        if names is None or self.var_sorts is None:
            return None
        return self.var_sorts[names.index(var)]


@dataclass(frozen=True)
class SystemOfEquations:
    equations: tuple[Equation, ...]

    def __post_init__(self):
        names = [e.name for e in self.equations]
        if len(set(names)) != len(names):
            raise NameClash("duplicate equation name")


def validate_system(sig: Signature, sys: SystemOfEquations) -> None:
    """Both sides well-formed over sig with free variables from the family."""
    for eq in sys.equations:
        names = eq.var_names()
        for side in (eq.lhs, eq.rhs):
            _check_term(sig, side)
            if names is not None:
                loose = free_vars(side) - set(names)
                if loose:
                    raise UnboundVariable(f"equation {eq.name}: undeclared variables {sorted(loose)}")


def _check_term(sig: Signature, t: Term) -> None:
    match t:
        case Var(_) | IxVar(_):
            return
        case Node(op, Tab(entries)):
            decl = sig.decl(op)
            if not decl.arity.finite or decl.arity.count != len(entries):
                raise ArityMismatch(f"{op.show()} applied to {len(entries)} children")
            for c in entries:
                _check_term(sig, c)
        case Node(op, Comp(_, body)):
            decl = sig.decl(op)
            if decl.arity.finite:
                raise ArityMismatch(f"{op.show()} is finitary but given a comprehension")
            _check_term(sig, body)
        case _:
            raise TypeError(f"not a term: {t!r}")


def free_algebra_signature(
    sig: Signature, sys: SystemOfEquations, gens: Sequence[str]
) -> tuple[Signature, SystemOfEquations]:
    """Adjoin one nullary operator per generator, prepended in given order.

    Operator and equation shapes are otherwise unchanged: former variables
    stay variables and existing nodes keep their symbols.
    """
    gen_ops = [OpSym(g) for g in gens]
    if len(set(gen_ops)) != len(gen_ops):
        raise NameClash("duplicate generator")
    for g in gen_ops:
        if sig.has_op(g):
            raise NameClash(f"generator {g.show()!r} clashes with an operator")
    decls = tuple(OpDecl(g, fin(0)) for g in gen_ops) + sig.ops
    return Signature(decls), SystemOfEquations(sys.equations)


# --- indexed signatures ---


@dataclass(frozen=True)
class IndexedOpDecl:
    op: OpSym
    sort: str
    # (index, arity) pairs; indices absent from the list contribute no children.
    arities: tuple[tuple[str, Arity], ...]


@dataclass(frozen=True)
class IndexedSignature:
    indices: tuple[str, ...]
    ops: tuple[IndexedOpDecl, ...]

    def __post_init__(self):
        for d in self.ops:
            if d.sort not in self.indices:
                raise UnknownOp(f"{d.op.show()} targets undeclared index {d.sort}")
            for ix, _ in d.arities:
                if ix not in self.indices:
                    raise UnknownOp(f"{d.op.show()} takes children at undeclared index {ix}")

    def flatten(self) -> Signature:
        """Child slots laid out in declared index order; requires all
        per-index arities finite."""
        decls = []
        for d in self.ops:
            slots: list[str] = []
            per = dict(d.arities)
            for ix in self.indices:
                a = per.get(ix)
                if a is None:
                    continue
                if not a.finite:
                    raise InfinitaryArity(f"{d.op.show()} has countable arity at index {ix}")
                slots.extend([ix] * a.count)
            decls.append(OpDecl(d.op, fin(len(slots)), d.sort, tuple(slots)))
        return Signature(tuple(decls))

"""Hand-built signatures and systems shared by the tests.

Built directly from the data constructors so the core tests do not
depend on the schema front end.
"""

from __future__ import annotations

import itertools

from qitbench.algebras import Algebra
from qitbench.terms import (
    Equation,
    IndexedOpDecl,
    IndexedSignature,
    Node,
    OpSym,
    Signature,
    SystemOfEquations,
    Tab,
    Var,
    fin,
    signature,
)


def bag_sig(atoms=("a", "b")) -> Signature:
    rows = [("nil", 0)]
    rows += [(f"cons {x}", 1) for x in atoms]
    return signature(rows)


def bag_system(atoms=("a", "b")) -> SystemOfEquations:
    eqs = []
    for x, y in itertools.product(atoms, repeat=2):
        lhs = Node(OpSym("cons", (x,)), Tab((Node(OpSym("cons", (y,)), Tab((Var("zs"),))),)))
        rhs = Node(OpSym("cons", (y,)), Tab((Node(OpSym("cons", (x,)), Tab((Var("zs"),))),)))
        eqs.append(Equation(f"swap {x} {y}", ("zs",), lhs, rhs))
    return SystemOfEquations(tuple(eqs))


def length_algebra(sig: Signature, cap: int = 3) -> Algebra:
    """List length saturated at cap; satisfies the swap equations."""

    def fn(op, args):
        if op.name == "nil":
            return 0
        return min(args[0] + 1, cap)

    return Algebra.from_fn(sig, tuple(range(cap + 1)), fn)


def first_label_algebra(sig: Signature, atoms=("a", "b")) -> Algebra:
    """Head label or a default; breaks the swap equations."""

    def fn(op, args):
        if op.name == "nil":
            return "*"
        return op.params[0]

    return Algebra.from_fn(sig, atoms + ("*",), fn)


def commvec_indexed(atoms=("a", "b"), prefix: int = 2) -> IndexedSignature:
    indices = tuple(str(i) for i in range(prefix + 1))
    ops = [IndexedOpDecl(OpSym("nil", ("@0",)), "0", ())]
    for i in range(1, prefix + 1):
        for x in atoms:
            ops.append(IndexedOpDecl(OpSym("cons", (x, f"@{i}")), str(i), ((str(i - 1), fin(1)),)))
    return IndexedSignature(indices, tuple(ops))


def commvec_system(atoms=("a", "b"), prefix: int = 2) -> SystemOfEquations:
    """swap at every index i+2 within the prefix, one vector variable at i."""
    eqs = []
    for i in range(prefix - 1):
        top, mid = f"@{i + 2}", f"@{i + 1}"
        for x, y in itertools.product(atoms, repeat=2):
            inner_xy = Node(OpSym("cons", (y, mid)), Tab((Var("zs"),)))
            inner_yx = Node(OpSym("cons", (x, mid)), Tab((Var("zs"),)))
            lhs = Node(OpSym("cons", (x, top)), Tab((inner_xy,)))
            rhs = Node(OpSym("cons", (y, top)), Tab((inner_yx,)))
            eqs.append(
                Equation(
                    f"swap {x} {y} @{i + 2}",
                    ("zs",),
                    lhs,
                    rhs,
                    var_sorts=(str(i),),
                    sort=str(i + 2),
                )
            )
    return SystemOfEquations(tuple(eqs))

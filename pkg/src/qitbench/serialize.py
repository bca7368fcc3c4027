"""JSON forms for signatures and equation systems.

Field order is fixed by construction order so equal inputs always dump
byte-identically.  Terms embed as their s-expression strings.
"""

from __future__ import annotations

import json
from typing import Union

from .errors import ParseError
from .sexpr import parse_term, show_term
from .terms import (
    Arity,
    Equation,
    IndexedOpDecl,
    IndexedSignature,
    NAT,
    OpDecl,
    OpSym,
    Signature,
    SystemOfEquations,
    fin,
)


def _arity_json(a: Arity) -> Union[int, str]:
    return a.count if a.finite else "nat"


def _arity_from(v) -> Arity:
    if v == "nat":
        return NAT
    if isinstance(v, int):
        return fin(v)
    raise ParseError(f"bad arity {v!r}", 0, 0)


def signature_to_obj(sig: Signature) -> dict:
    ops = []
    for d in sig.ops:
        row: dict = {"name": d.op.show(), "arity": _arity_json(d.arity)}
        if d.sort is not None:
            row["sort"] = d.sort
        if d.child_sorts is not None:
            row["childSorts"] = list(d.child_sorts)
        ops.append(row)
    return {"ops": ops}


def signature_from_obj(obj: dict) -> Signature:
    decls = []
    for row in obj["ops"]:
        decls.append(
            OpDecl(
                OpSym.parse(row["name"]),
                _arity_from(row["arity"]),
                row.get("sort"),
                tuple(row["childSorts"]) if "childSorts" in row else None,
            )
        )
    return Signature(tuple(decls))


def indexed_signature_to_obj(isig: IndexedSignature) -> dict:
    ops = []
    for d in isig.ops:
        ops.append(
            {
                "name": d.op.show(),
                "sort": d.sort,
                "arities": {ix: _arity_json(a) for ix, a in d.arities},
            }
        )
    return {"indices": list(isig.indices), "ops": ops}


def indexed_signature_from_obj(obj: dict) -> IndexedSignature:
    ops = []
    for row in obj["ops"]:
        arities = tuple((ix, _arity_from(a)) for ix, a in row["arities"].items())
        ops.append(IndexedOpDecl(OpSym.parse(row["name"]), row["sort"], arities))
    return IndexedSignature(tuple(obj["indices"]), tuple(ops))


def _vars_json(eq: Equation):
    if isinstance(eq.vars, Arity):
        return _arity_json(eq.vars)
    return list(eq.vars)


def system_to_obj(sys: SystemOfEquations) -> dict:
    eqs = []
    for e in sys.equations:
        row: dict = {
            "name": e.name,
            "vars": _vars_json(e),
            "lhs": show_term(e.lhs),
            "rhs": show_term(e.rhs),
        }
        if e.var_sorts is not None:
            row["varSorts"] = list(e.var_sorts)
        if e.sort is not None:
            row["sort"] = e.sort
        eqs.append(row)
    return {"equations": eqs}


def system_from_obj(obj: dict) -> SystemOfEquations:
    eqs = []
    for row in obj["equations"]:
        vars = row["vars"]
        if isinstance(vars, list):
            vars = tuple(vars)
        else:
            vars = _arity_from(vars)
        eqs.append(
            Equation(
                row["name"],
                vars,
                parse_term(row["lhs"]),
                parse_term(row["rhs"]),
                tuple(row["varSorts"]) if "varSorts" in row else None,
                row.get("sort"),
            )
        )
    return SystemOfEquations(tuple(eqs))


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)

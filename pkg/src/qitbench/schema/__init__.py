"""Declaration front end: parse, check, elaborate, derive eliminators."""

from .ast import (
    ConstT,
    Ctor,
    EqT,
    FamilyParam,
    FinParam,
    NatParam,
    Param,
    Pi,
    QRef,
    QitDecl,
    SetParam,
    Sigma,
    TApp,
    TNum,
    TVar,
    show_term_ast,
    show_type,
)
from .checker import (
    Accept,
    DeclReport,
    Derivation,
    Reject,
    check_decl,
    check_element_ctor,
    check_equality_ctor,
    check_strictly_positive,
    replay,
    rule_sequence,
)
from .elaborate import elaborate, symbolic_table
from .eliminator import EliminatorSignature, derive_eliminator
from .examples import ExampleEntry, builtin_examples
from .parser import parse_decl

__all__ = [
    "Accept",
    "ConstT",
    "Ctor",
    "DeclReport",
    "Derivation",
    "EliminatorSignature",
    "EqT",
    "ExampleEntry",
    "FamilyParam",
    "FinParam",
    "NatParam",
    "Param",
    "Pi",
    "QRef",
    "QitDecl",
    "Reject",
    "SetParam",
    "Sigma",
    "TApp",
    "TNum",
    "TVar",
    "builtin_examples",
    "check_decl",
    "check_element_ctor",
    "check_equality_ctor",
    "check_strictly_positive",
    "derive_eliminator",
    "elaborate",
    "parse_decl",
    "replay",
    "rule_sequence",
    "show_term_ast",
    "show_type",
    "symbolic_table",
]

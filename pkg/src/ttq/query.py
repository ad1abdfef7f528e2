"""Syntax tree for parsed queries.

All nodes are frozen dataclasses, so two parses of equivalent text compare
equal with ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .iospec import IoSpec

OBJECTS = ("F", "S", "C", "P", "N", "Pr", "Nx", "A", "D", "R", "T", "M")
NAV_OBJECTS = ("P", "N", "Pr", "Nx", "A", "D")
MEMBERS = ("l", "t", "a", "v", "f")
WRITABLE_MEMBERS = ("l", "t", "a")
COMPARISON_OPS = ("=", "!=", "~", "!~")


# -- indices -------------------------------------------------------------


@dataclass(frozen=True)
class Position:
    n: int


@dataclass(frozen=True)
class Last:
    """``z``: the last candidate."""


@dataclass(frozen=True)
class First:
    """``?``: the first candidate that satisfies the comparison."""


@dataclass(frozen=True)
class LastMatch:
    """``.``: the last candidate that satisfies the comparison."""


@dataclass(frozen=True)
class Any:
    """``*``: at least one candidate satisfies."""


@dataclass(frozen=True)
class All:
    """``@``: every candidate satisfies."""


@dataclass(frozen=True)
class NoneOf:
    """``0``: no candidate satisfies."""


# range endpoints are ints or the string "z"
Endpoint = Union[int, str, None]


@dataclass(frozen=True)
class Range:
    lo: Endpoint = None
    hi: Endpoint = None


@dataclass(frozen=True)
class Qualified:
    first: "IndexSpec"
    second: "IndexSpec"


IndexSpec = Union[Position, Last, First, LastMatch, Any, All, NoneOf, Range, Qualified]
QUANTIFIERS = (First, LastMatch, Any, All, NoneOf)


def is_quantified(index) -> bool:
    if isinstance(index, Qualified):
        return is_quantified(index.first) or is_quantified(index.second)
    return isinstance(index, QUANTIFIERS + (Range,))


# -- values --------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Segment:
    """One step of a node address.

    ``key`` is the thread type for R and T (a value expression); ``ref`` is
    the alias for M and F.
    """

    obj: str
    index: Optional[IndexSpec] = None
    key: Optional["ValueExpr"] = None
    ref: Optional[str] = None


@dataclass(frozen=True)
class NodeAddress:
    segments: Tuple[Segment, ...]
    alias: Optional[str] = None

    @property
    def ends_in_d(self):
        return self.segments[-1].obj == "D"


@dataclass(frozen=True)
class MemberAccess:
    address: NodeAddress
    member: str
    key: Optional["ValueExpr"] = None
    alias: Optional[str] = None


@dataclass(frozen=True)
class Concat:
    parts: Tuple["ValueExpr", ...]


ValueExpr = Union[Literal, NodeAddress, MemberAccess, Concat]


# -- conditions ----------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    lhs: ValueExpr
    op: str
    rhs: ValueExpr
    alias: Optional[str] = None


@dataclass(frozen=True)
class And:
    items: Tuple["ConditionExpr", ...]


@dataclass(frozen=True)
class Or:
    items: Tuple["ConditionExpr", ...]


@dataclass(frozen=True)
class Not:
    expr: "ConditionExpr"


@dataclass(frozen=True)
class Group:
    expr: "ConditionExpr"


ConditionExpr = Union[Comparison, And, Or, Not, Group]


# -- actions -------------------------------------------------------------


@dataclass(frozen=True)
class Return:
    value: ValueExpr
    alias: Optional[str] = None


@dataclass(frozen=True)
class MemberAssign:
    target: MemberAccess
    value: ValueExpr


@dataclass(frozen=True)
class NodeAssign:
    """Node-to-node assignment: delete, insert or move.

    ``target = ''`` deletes the target nodes; ``X.D = 'TAG'`` inserts a new
    node under X; ``X = Y.D`` moves X under Y.
    """

    target: NodeAddress
    source: Union[NodeAddress, Literal]

    @property
    def kind(self):
        if isinstance(self.source, Literal):
            return "delete" if self.source.text == "" else "insert"
        return "move"


ActionExpr = Union[Return, MemberAssign, NodeAssign]


@dataclass(frozen=True)
class CommandCall:
    name: str


@dataclass(frozen=True)
class Query:
    condition: Optional[ConditionExpr] = None
    actions: Tuple[ActionExpr, ...] = ()
    command: Optional[CommandCall] = None
    sources: Tuple[IoSpec, ...] = ()
    destinations: Tuple[IoSpec, ...] = ()
    tt_directive: Optional[str] = None

    @property
    def mutates(self):
        return self.command is not None or any(
            not isinstance(a, Return) for a in self.actions
        )


def iter_comparisons(expr):
    """Comparisons of a condition in left-to-right order."""
    if expr is None:
        return
    if isinstance(expr, Comparison):
        yield expr
    elif isinstance(expr, (And, Or)):
        for item in expr.items:
            yield from iter_comparisons(item)
    else:
        yield from iter_comparisons(expr.expr)


def iter_atoms(value):
    """Address-bearing atoms (NodeAddress / MemberAccess) of a value, in order."""
    if isinstance(value, Concat):
        for part in value.parts:
            yield from iter_atoms(part)
    elif isinstance(value, (NodeAddress, MemberAccess)):
        yield value

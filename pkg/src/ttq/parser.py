"""Tokenizer, recursive-descent parser and canonical printer for queries.

Grammar (informal)::

    query      := [sources '=:'] [tt] cond ['->' rhs] [':=' dests]
                | [sources '=:'] command [':=' dests]
    sources    := IOSPEC ('AND' IOSPEC)*
    tt         := 'TT' '[' LITERAL ']' ':'
    rhs        := action ('AND' action)* | command
    cond       := and ('OR' and)*
    and        := unary ('AND' unary)*
    unary      := '!' '(' cond ')' | '(' cond ')' | comparison
    comparison := value CMPOP value ['/' IDENT]
    value      := atom ('+' atom)*
    atom       := LITERAL | address ['.' member] ['/' IDENT]
    address    := segment ('.' segment)*
    action     := value ['/' IDENT] | target '=' value

AND/OR are case-insensitive.  Object symbols are capitalised, members are
lower case.  Inside brackets ``.`` is the last-match wildcard when it is the
whole index (``N[.]``, ``M[p:.]``); everywhere else it is the dot operator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from . import query as q
from .errors import IoSpecError, QuerySyntaxError
from .iospec import IoSpec, parse_io_spec

_TWO_CHAR_OPS = ("=:", ":=", "->", "!=", "!~")
_ONE_CHAR_OPS = "=~+/.:()[]!"
_RANGE_RE = re.compile(r"(\d+|z(?![A-Za-z0-9_]))?[ \t]*-(?!>)[ \t]*(\d+|z(?![A-Za-z0-9_]))?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_CONTINUATION_RE = re.compile(r"\\[ \t]*\r?\n")
_IOSPEC_RE = re.compile(r"[A-Za-z]+:[^\s=]+")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT INT LIT RANGE WILD IOSPEC OP AND OR EOF
    value: object
    col: int

    def __repr__(self):
        if self.kind in ("OP", "IDENT", "WILD"):
            return f"[{self.value}]"
        if self.kind == "LIT":
            return f"[lit {self.value}]"
        if self.kind == "RANGE":
            lo, hi = self.value
            return f"[range {'' if lo is None else lo}..{'' if hi is None else hi}]"
        return f"[{self.kind} {self.value}]"

    def show(self):
        if self.kind == "EOF":
            return "end of query"
        if self.kind == "LIT":
            return f"literal {self.value!r}"
        if self.kind in ("AND", "OR"):
            return self.kind
        return repr(str(self.value))


def _endpoint(text):
    if text is None:
        return None
    return "z" if text == "z" else int(text)


def tokenize(text: str) -> List[Token]:
    """Split query text into tokens; raise :class:`QuerySyntaxError` on bad input."""
    tokens: List[Token] = []
    i, n, depth = 0, len(text), 0

    def prev_is(*values):
        return bool(tokens) and tokens[-1].kind == "OP" and tokens[-1].value in values

    while i < n:
        ch = text[i]
        col = i + 1
        if ch == "\\":
            m = _CONTINUATION_RE.match(text, i)
            if m:
                i = m.end()
                continue
            raise QuerySyntaxError("illegal character '\\'", col)
        if ch.isspace():
            i += 1
            continue
        if ch == "'":
            buf = []
            i += 1
            while True:
                if i >= n:
                    raise QuerySyntaxError("unterminated literal", col)
                c = text[i]
                if c == "'":
                    i += 1
                    break
                if c == "\\":
                    m = _CONTINUATION_RE.match(text, i)
                    if m:
                        i = m.end()
                        continue
                    if i + 1 < n and text[i + 1] in "\\'":
                        buf.append(text[i + 1])
                        i += 2
                        continue
                buf.append(c)
                i += 1
            tokens.append(Token("LIT", "".join(buf), col))
            continue
        if depth > 0:
            m = _RANGE_RE.match(text, i)
            if m and (m.group(1) or m.group(2)):
                tokens.append(Token("RANGE", (_endpoint(m.group(1)), _endpoint(m.group(2))), col))
                i = m.end()
                continue
            if ch in "?*@":
                tokens.append(Token("WILD", ch, col))
                i += 1
                continue
            if ch == "." and prev_is("[", ":"):
                j = i + 1
                while j < n and text[j] in " \t":
                    j += 1
                # after '[' nothing else can start with '.'; after ':' only '.]'
                if prev_is("[") or (j < n and text[j] == "]"):
                    tokens.append(Token("WILD", ".", col))
                    i += 1
                    continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", int(text[i:j]), col))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            if depth == 0:
                m = _IOSPEC_RE.match(text, i)
                if m:
                    tokens.append(Token("IOSPEC", m.group(0), col))
                    i = m.end()
                    continue
            m = _IDENT_RE.match(text, i)
            word = m.group(0)
            upper = word.upper()
            if upper in ("AND", "OR"):
                tokens.append(Token(upper, word, col))
            else:
                tokens.append(Token("IDENT", word, col))
            i = m.end()
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("OP", two, col))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            if ch == "[":
                depth += 1
            elif ch == "]":
                depth = max(0, depth - 1)
            tokens.append(Token("OP", ch, col))
            i += 1
            continue
        raise QuerySyntaxError(f"illegal character {ch!r}", col)
    tokens.append(Token("EOF", None, n + 1))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset=1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, kind, value=None, tok=None):
        tok = tok or self.tok
        return tok.kind == kind and (value is None or tok.value == value)

    def at_op(self, *values):
        return self.tok.kind == "OP" and self.tok.value in values

    def error(self, message, expected=(), tok=None):
        tok = tok or self.tok
        return QuerySyntaxError(message, tok.col, expected)

    def expect_op(self, value):
        if not self.at_op(value):
            raise self.error(f"unexpected {self.tok.show()}", (repr(value),))
        return self.advance()

    def expect_ident(self, what="identifier"):
        if self.tok.kind != "IDENT":
            raise self.error(f"unexpected {self.tok.show()}", (what,))
        return self.advance().value

    def is_command_here(self):
        return (
            self.tok.kind == "IDENT"
            and self.tok.value not in q.OBJECTS
            and self.tok.value != "TT"
            and (self.peek().kind == "EOF" or self.at("OP", ":=", self.peek()))
        )

    # -- query -----------------------------------------------------------

    def parse(self) -> q.Query:
        sources = ()
        if self.tok.kind == "IOSPEC":
            sources = self.parse_io_list()
            self.expect_op("=:")
        tt = None
        condition = None
        actions = ()
        command = None
        if self.is_command_here():
            command = q.CommandCall(self.advance().value)
        else:
            if self.at("IDENT", "TT") and self.at("OP", "[", self.peek()):
                self.advance()
                self.expect_op("[")
                if self.tok.kind != "LIT":
                    raise self.error(f"unexpected {self.tok.show()}", ("thread type literal",))
                tt = self.advance().value
                self.expect_op("]")
                self.expect_op(":")
            condition = self.parse_or()
            if self.at_op("->"):
                self.advance()
                if self.is_command_here():
                    command = q.CommandCall(self.advance().value)
                else:
                    actions = self.parse_actions()
        destinations = ()
        if self.at_op(":="):
            self.advance()
            destinations = self.parse_io_list()
        if self.tok.kind != "EOF":
            expected = ("AND", "OR", "'->'", "':='") if condition is not None else ("':='",)
            raise self.error(f"unexpected {self.tok.show()}", expected)
        result = q.Query(
            condition=condition,
            actions=tuple(actions),
            command=command,
            sources=tuple(sources),
            destinations=tuple(destinations),
            tt_directive=tt,
        )
        _check_aliases(result)
        return result

    def parse_io_list(self):
        specs = []
        while True:
            if self.tok.kind != "IOSPEC":
                raise self.error(f"unexpected {self.tok.show()}", ("format:location[:charset][/alias]",))
            tok = self.advance()
            try:
                specs.append(parse_io_spec(tok.value))
            except IoSpecError as exc:
                raise QuerySyntaxError(str(exc), tok.col) from None
            if not self.at("AND") or self.peek().kind != "IOSPEC":
                return specs
            self.advance()

    # -- conditions ------------------------------------------------------

    def parse_or(self):
        items = [self.parse_and()]
        while self.at("OR"):
            self.advance()
            items.append(self.parse_and())
        return items[0] if len(items) == 1 else q.Or(tuple(items))

    def parse_and(self):
        items = [self.parse_unary()]
        while self.at("AND"):
            self.advance()
            items.append(self.parse_unary())
        return items[0] if len(items) == 1 else q.And(tuple(items))

    def parse_unary(self):
        if self.at_op("!"):
            self.advance()
            self.expect_op("(")
            inner = self.parse_or()
            self.expect_op(")")
            return q.Not(inner)
        if self.at_op("("):
            self.advance()
            inner = self.parse_or()
            self.expect_op(")")
            return q.Group(inner)
        return self.parse_comparison()

    def parse_comparison(self):
        lhs = self.parse_value(allow_alias=True)
        if not self.at_op(*q.COMPARISON_OPS):
            raise self.error(f"unexpected {self.tok.show()}", q.COMPARISON_OPS)
        op = self.advance().value
        rhs = self.parse_value(allow_alias=True)
        for atom in list(q.iter_atoms(lhs)) + list(q.iter_atoms(rhs)):
            address = atom.address if isinstance(atom, q.MemberAccess) else atom
            if address.segments[0].obj == "S":
                raise self.error("S can only be returned, not compared")
        alias = None
        if self.at_op("/"):
            self.advance()
            alias = self.expect_ident("alias")
        return q.Comparison(lhs, op, rhs, alias)

    # -- values ----------------------------------------------------------

    def parse_value(self, allow_alias):
        parts = [self.parse_atom(allow_alias)]
        while self.at_op("+"):
            self.advance()
            parts.append(self.parse_atom(allow_alias))
        return parts[0] if len(parts) == 1 else q.Concat(tuple(parts))

    def parse_atom(self, allow_alias):
        if self.tok.kind == "LIT":
            return q.Literal(self.advance().value)
        if self.tok.kind != "IDENT" or self.tok.value not in q.OBJECTS:
            raise self.error(
                f"unexpected {self.tok.show()}", ("literal", "node address")
            )
        segments = [self.parse_segment()]
        member = key = None
        while self.at_op("."):
            nxt = self.peek()
            if nxt.kind == "IDENT" and nxt.value in q.OBJECTS:
                self.advance()
                segments.append(self.parse_segment())
                continue
            if nxt.kind == "IDENT" and nxt.value in q.MEMBERS:
                self.advance()
                member = self.advance().value
                if member == "a":
                    self.expect_op("[")
                    key = self.parse_value(allow_alias=False)
                    self.expect_op("]")
                break
            self.advance()
            raise self.error(f"unexpected {self.tok.show()}", ("object symbol", "member"))
        _check_segments(segments, self.tokens[self.pos - 1])
        alias = None
        if allow_alias and self.at_op("/") and self.peek().kind == "IDENT":
            self.advance()
            alias = self.advance().value
        address = q.NodeAddress(tuple(segments), None if member else alias)
        if member:
            return q.MemberAccess(address, member, key, alias)
        return address

    def parse_segment(self):
        tok = self.advance()
        obj = tok.value
        if obj in ("C", "S"):
            return q.Segment(obj)
        if obj == "M":
            self.expect_op("[")
            ref = self.expect_ident("match alias")
            index = None
            if self.at_op(":"):
                self.advance()
                index = self.parse_index_atom()
            self.expect_op("]")
            return q.Segment("M", index=index, ref=ref)
        if obj == "F":
            self.expect_op("[")
            ref = self.expect_ident("source alias")
            self.expect_op("]")
            return q.Segment("F", ref=ref)
        if not self.at_op("["):
            return q.Segment(obj)
        self.advance()
        if obj == "R":
            key = self.parse_value(allow_alias=False)
            self.expect_op("]")
            return q.Segment("R", key=key)
        if obj == "T":
            key = index = None
            if self.tok.kind == "LIT" or (self.tok.kind == "IDENT" and self.tok.value != "z"):
                key = self.parse_value(allow_alias=False)
                if self.at_op(":"):
                    self.advance()
                    index = self.parse_index_atom()
            else:
                index = self.parse_index_atom()
            self.expect_op("]")
            return q.Segment("T", index=index, key=key)
        index = self.parse_index_atom()
        if self.at_op(":"):
            self.advance()
            index = q.Qualified(index, self.parse_index_atom())
        self.expect_op("]")
        return q.Segment(obj, index=index)

    def parse_index_atom(self):
        tok = self.tok
        if tok.kind == "INT":
            self.advance()
            return q.NoneOf() if tok.value == 0 else q.Position(tok.value)
        if tok.kind == "IDENT" and tok.value == "z":
            self.advance()
            return q.Last()
        if tok.kind == "WILD":
            self.advance()
            return {"?": q.First, ".": q.LastMatch, "*": q.Any, "@": q.All}[tok.value]()
        if tok.kind == "RANGE":
            self.advance()
            lo, hi = tok.value
            if lo == 0:
                raise self.error("range indices start at 1", tok=tok)
            if isinstance(lo, int) and isinstance(hi, int) and lo > hi:
                raise self.error(f"empty range {lo}-{hi}", tok=tok)
            if lo == "z" and hi not in (None, "z"):
                raise self.error("range cannot start at z", tok=tok)
            return q.Range(lo, hi)
        raise self.error(
            f"unexpected {tok.show()}", ("integer", "z", "?", ".", "*", "@", "range")
        )

    # -- actions ---------------------------------------------------------

    def parse_actions(self):
        actions = [self.parse_action()]
        while self.at("AND"):
            self.advance()
            actions.append(self.parse_action())
        return actions

    def parse_action(self):
        start_tok = self.tok
        value = self.parse_value(allow_alias=False)
        if self.at_op("="):
            eq = self.advance()
            if isinstance(value, q.MemberAccess):
                if value.member not in q.WRITABLE_MEMBERS:
                    raise self.error(f"member {value.member!r} is read-only", tok=start_tok)
                _check_node_target(value.address, start_tok)
                return q.MemberAssign(value, self.parse_value(allow_alias=False))
            if isinstance(value, q.NodeAddress):
                _check_node_target(value, start_tok)
                src_tok = self.tok
                source = self.parse_value(allow_alias=False)
                if isinstance(source, q.Literal):
                    if source.text and not value.ends_in_d:
                        raise self.error(
                            "inserting a node needs a target ending in D", tok=start_tok
                        )
                elif isinstance(source, q.NodeAddress):
                    if not source.ends_in_d:
                        raise self.error("move destination must end in D", tok=src_tok)
                    _check_node_target(source, src_tok)
                else:
                    raise self.error(
                        "a node can only be assigned a literal or a node address", tok=src_tok
                    )
                return q.NodeAssign(value, source)
            raise self.error("cannot assign to this expression", tok=eq)
        alias = None
        if self.at_op("/"):
            self.advance()
            alias = self.expect_ident("alias")
        return q.Return(value, alias)


def _check_segments(segments, tok):
    for i, seg in enumerate(segments):
        if seg.obj == "S" and len(segments) > 1:
            raise QuerySyntaxError("S can only be used on its own", tok.col)
        if seg.obj in ("M", "F") and i > 0:
            raise QuerySyntaxError(f"{seg.obj}[...] must start an address", tok.col)
        if seg.obj == "C" and i > 0 and segments[i - 1].obj != "F":
            raise QuerySyntaxError("C can only start an address or follow F[...]", tok.col)
    if segments[-1].obj == "F":
        raise QuerySyntaxError("F[...] must be followed by a node address", tok.col)


def _check_node_target(address, tok):
    if any(s.obj == "S" for s in address.segments):
        raise QuerySyntaxError("S cannot be assigned to", tok.col)


def _value_refs(value):
    """M aliases referenced anywhere in a value (including keys)."""
    for atom in q.iter_atoms(value):
        address = atom.address if isinstance(atom, q.MemberAccess) else atom
        for seg in address.segments:
            if seg.obj == "M":
                yield seg.ref
            if seg.key is not None:
                yield from _value_refs(seg.key)
        if isinstance(atom, q.MemberAccess) and atom.key is not None:
            yield from _value_refs(atom.key)


def _value_sources(value):
    for atom in q.iter_atoms(value):
        address = atom.address if isinstance(atom, q.MemberAccess) else atom
        for seg in address.segments:
            if seg.obj == "F":
                yield seg.ref


def comparison_aliases(cmp):
    """Aliases introduced by one comparison, in textual order."""
    out = []
    for side in (cmp.lhs, cmp.rhs):
        for atom in q.iter_atoms(side):
            if atom.alias:
                out.append(atom.alias)
    if cmp.alias:
        out.append(cmp.alias)
    return out


def _check_aliases(query):
    defined = []
    for cmp in q.iter_comparisons(query.condition):
        for ref in list(_value_refs(cmp.lhs)) + list(_value_refs(cmp.rhs)):
            if ref not in defined:
                raise QuerySyntaxError(f"M[{ref}] refers to an alias not defined earlier")
        for alias in comparison_aliases(cmp):
            if alias in defined:
                raise QuerySyntaxError(f"duplicate alias {alias!r}")
            defined.append(alias)
    values = []
    for action in query.actions:
        if isinstance(action, q.Return):
            values.append(action.value)
            if action.alias:
                if action.alias in defined:
                    raise QuerySyntaxError(f"duplicate alias {action.alias!r}")
                defined.append(action.alias)
        elif isinstance(action, q.MemberAssign):
            values += [action.target, action.value]
        else:
            values += [action.target, action.source]
    cond_aliases = set()
    for cmp in q.iter_comparisons(query.condition):
        cond_aliases.update(comparison_aliases(cmp))
    for value in values:
        for ref in _value_refs(value):
            if ref not in cond_aliases:
                raise QuerySyntaxError(f"M[{ref}] refers to an undefined alias")
    source_aliases = [s.alias for s in query.sources if s.alias]
    if len(set(source_aliases)) != len(source_aliases):
        raise QuerySyntaxError("duplicate source alias")
    if query.sources:
        all_values = values + [
            side for cmp in q.iter_comparisons(query.condition) for side in (cmp.lhs, cmp.rhs)
        ]
        for value in all_values:
            for ref in _value_sources(value):
                if ref not in source_aliases:
                    raise QuerySyntaxError(f"F[{ref}] refers to an undefined source alias")


def parse_query(text: str) -> q.Query:
    """Parse one query; raise :class:`QuerySyntaxError` if it is malformed."""
    return _Parser(text).parse()


# -- printing ------------------------------------------------------------


def quote(text: str) -> str:
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _fmt_endpoint(e):
    return "" if e is None else str(e)


def format_index(index) -> str:
    if isinstance(index, q.Position):
        return str(index.n)
    if isinstance(index, q.Qualified):
        return f"{format_index(index.first)}:{format_index(index.second)}"
    if isinstance(index, q.Range):
        return f"{_fmt_endpoint(index.lo)}-{_fmt_endpoint(index.hi)}"
    return {q.Last: "z", q.First: "?", q.LastMatch: ".", q.Any: "*", q.All: "@", q.NoneOf: "0"}[
        type(index)
    ]


def format_segment(seg: q.Segment) -> str:
    if seg.obj in ("M", "F"):
        inner = seg.ref
        if seg.index is not None:
            inner += ":" + format_index(seg.index)
        return f"{seg.obj}[{inner}]"
    if seg.obj == "R":
        return f"R[{format_value(seg.key)}]" if seg.key is not None else "R"
    if seg.obj == "T":
        if seg.key is None and seg.index is None:
            return "T"
        inner = format_value(seg.key) if seg.key is not None else ""
        if seg.index is not None:
            inner = f"{inner}:{format_index(seg.index)}" if inner else format_index(seg.index)
        return f"T[{inner}]"
    if seg.index is None:
        return seg.obj
    return f"{seg.obj}[{format_index(seg.index)}]"


def format_value(value) -> str:
    if isinstance(value, q.Literal):
        return quote(value.text)
    if isinstance(value, q.Concat):
        return "+".join(format_value(p) for p in value.parts)
    if isinstance(value, q.NodeAddress):
        text = ".".join(format_segment(s) for s in value.segments)
        return text + (f"/{value.alias}" if value.alias else "")
    if isinstance(value, q.MemberAccess):
        text = format_value(q.NodeAddress(value.address.segments)) + "." + value.member
        if value.key is not None:
            text += f"[{format_value(value.key)}]"
        return text + (f"/{value.alias}" if value.alias else "")
    raise TypeError(f"not a value expression: {value!r}")


def format_condition(expr) -> str:
    if isinstance(expr, q.Comparison):
        text = f"{format_value(expr.lhs)}{expr.op}{format_value(expr.rhs)}"
        return text + (f"/{expr.alias}" if expr.alias else "")
    if isinstance(expr, q.And):
        return " AND ".join(format_condition(e) for e in expr.items)
    if isinstance(expr, q.Or):
        return " OR ".join(format_condition(e) for e in expr.items)
    if isinstance(expr, q.Not):
        return f"!({format_condition(expr.expr)})"
    if isinstance(expr, q.Group):
        return f"({format_condition(expr.expr)})"
    raise TypeError(f"not a condition: {expr!r}")


def format_action(action) -> str:
    if isinstance(action, q.Return):
        return format_value(action.value) + (f"/{action.alias}" if action.alias else "")
    if isinstance(action, q.MemberAssign):
        return f"{format_value(action.target)}={format_value(action.value)}"
    return f"{format_value(action.target)}={format_value(action.source)}"


def format_query(query: q.Query) -> str:
    """Canonical single-line text for ``query``; it reparses to an equal AST."""
    parts = []
    if query.sources:
        parts.append(" AND ".join(str(s) for s in query.sources) + " =:")
    if query.condition is not None:
        cond = format_condition(query.condition)
        if query.tt_directive is not None:
            cond = f"TT[{quote(query.tt_directive)}]: {cond}"
        parts.append(cond)
        if query.command is not None:
            parts.append(f"-> {query.command.name}")
        elif query.actions:
            parts.append("-> " + " AND ".join(format_action(a) for a in query.actions))
    elif query.command is not None:
        parts.append(query.command.name)
    if query.destinations:
        parts.append(":= " + " AND ".join(str(d) for d in query.destinations))
    return " ".join(parts)

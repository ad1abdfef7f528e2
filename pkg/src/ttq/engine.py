"""Node-by-node evaluation of query conditions.

Every node of every sentence is bound in turn as the current node ``C`` and
the condition is evaluated relative to it.  Addresses carrying a quantified
index (``? . * @ 0`` or a range) turn a comparison into a quantified
statement over the candidate nodes; nested quantifiers are expanded left to
right, left-hand side first.

Two resolution modes exist:

* condition mode (:func:`eval_comparison`) builds a choice tree per address
  and lifts the comparison over it;
* action mode (:func:`resolve_nodes`, :func:`resolve_value`) flattens the
  same choice tree into plain node lists, used by the transformer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

from . import query as q
from .errors import (
    ArityError,
    EvaluationDepthError,
    EvaluationError,
    UnboundAliasError,
    UnknownSourceError,
)
from .model import (
    BaseTree,
    Document,
    Node,
    Sentence,
    axis_candidates,
    base_text,
    extract_thread_tree,
)
from .parser import format_value

MAX_KEY_DEPTH = 8


class NoNodeError(EvaluationError):
    """An address resolved to no node where a value was required."""

    def __init__(self, what):
        self.what = what
        super().__init__(f"{what} resolved to no node")


# -- choice trees --------------------------------------------------------


class _AbsentType:
    def __repr__(self):
        return "ABSENT"


ABSENT = _AbsentType()


@dataclass
class _Leaf:
    value: Union[Node, str]
    node: Node


@dataclass
class _Quant:
    kind: str  # any all first last none
    branches: list


_QUANT_KIND = {q.Any: "any", q.All: "all", q.First: "first", q.LastMatch: "last", q.NoneOf: "none"}


def _walk_tree(tree, cont):
    """Evaluate ``cont`` at every leaf of ``tree`` and fold by the quantifiers.

    Returns ``(truth, picks)`` where ``picks`` are the leaf tuples selected by
    the quantifiers on the way down (used to fill alias bindings).
    """
    if tree is ABSENT:
        return False, []
    if isinstance(tree, _Leaf):
        return cont(tree)
    results = [_walk_tree(branch, cont) for branch in tree.branches]
    kind = tree.kind
    if kind == "any":
        picks = [p for ok, ps in results if ok for p in ps]
        return any(ok for ok, _ in results), picks
    if kind == "all":
        if all(ok for ok, _ in results):
            return True, [p for _, ps in results for p in ps]
        return False, []
    if kind == "first":
        for ok, ps in results:
            if ok:
                return True, ps
        return False, []
    if kind == "last":
        for ok, ps in reversed(results):
            if ok:
                return True, ps
        return False, []
    return not any(ok for ok, _ in results), []


def _dedupe(nodes):
    seen = set()
    out = []
    for n in nodes:
        if n.id not in seen:
            seen.add(n.id)
            out.append(n)
    return out


# -- context -------------------------------------------------------------


class _SentenceEnv:
    """Per-sentence caches shared by all match contexts of that sentence."""

    def __init__(self, docs, primary, sentence, default_thread):
        self.docs = docs
        self.primary = primary
        self.sentence = sentence
        self.default_thread = default_thread
        self._trees = {}

    def base_tree(self, root: Node) -> BaseTree:
        tree = self._trees.get(root.id)
        if tree is None:
            tree = self._trees[root.id] = BaseTree(root)
        return tree


@dataclass
class MatchContext:
    current: Node
    sentence: Sentence
    document: Document
    tree: object
    bindings: Dict[str, List[Node]] = field(default_factory=dict)
    source_aliases: Mapping[Optional[str], Document] = field(default_factory=dict)
    default_thread: Optional[str] = None
    env: Optional[_SentenceEnv] = field(default=None, repr=False)

    def __post_init__(self):
        if self.env is None:
            docs = self.source_aliases or {None: self.document}
            self.env = _SentenceEnv(docs, self.document, self.sentence, self.default_thread)

    def tree_for(self, node: Node, doc: Document):
        if doc is self.document and self.tree.contains(node):
            return self.tree
        return self.env.base_tree(node.root())

    def corresponding(self, doc: Document) -> Optional[Node]:
        """The node of ``doc`` aligned with the current node (lockstep by position)."""
        if doc is self.document:
            return self.current
        if self.sentence.index > len(doc.sentences):
            return None
        pos = self.env.base_tree(self.sentence.root).position(self.current)
        other = self.env.base_tree(doc.sentences[self.sentence.index - 1].root)
        return other.preorder[pos] if pos < len(other.preorder) else None


@dataclass
class MatchResult:
    matched: bool
    context: MatchContext


# -- text comparison -----------------------------------------------------


@lru_cache(maxsize=512)
def _glob(pattern: str):
    parts = []
    for ch in pattern:
        if ch == "*":
            parts.append(".*")
        elif ch == "?":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


def compare_text(op: str, lhs: str, rhs: str) -> bool:
    """``=``/``!=`` compare exactly; ``~``/``!~`` match ``rhs`` as an anchored glob."""
    if op == "=":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    if op == "~":
        return _glob(rhs).fullmatch(lhs) is not None
    if op == "!~":
        return _glob(rhs).fullmatch(lhs) is None
    raise ValueError(f"unknown comparison operator {op!r}")


def _compare_values(op, lhs, rhs):
    if isinstance(lhs, Node) and isinstance(rhs, Node):
        if op == "=":
            return lhs is rhs
        if op == "!=":
            return lhs is not rhs
        raise EvaluationError(f"operator {op!r} cannot compare two nodes")
    if isinstance(lhs, Node):
        lhs = base_text(lhs)
    if isinstance(rhs, Node):
        rhs = base_text(rhs)
    return compare_text(op, lhs, rhs)


# -- address resolution --------------------------------------------------


def _closure_for(index):
    """D reads as 'children' for positional indices, 'descendants' for quantifiers."""
    if isinstance(index, q.Qualified):
        return _closure_for(index.first)
    return isinstance(index, q.QUANTIFIERS)


def _range_slice(cands, rng):
    size = len(cands)

    def bound(e, default):
        if e is None:
            return default
        return size if e == "z" else e

    lo, hi = bound(rng.lo, 1), bound(rng.hi, size)
    return cands[max(lo, 1) - 1:hi]


def _select(cands, index, cont, step=None):
    """Build the choice tree for picking from ``cands`` with ``index``.

    ``step(node, index)`` re-applies the axis for the second half of a
    qualified index such as ``D[2:3]``.
    """
    if index is None:
        index = q.Position(1)
    if isinstance(index, q.Position):
        return cont(cands[index.n - 1]) if index.n <= len(cands) else ABSENT
    if isinstance(index, q.Last):
        return cont(cands[-1]) if cands else ABSENT
    if isinstance(index, q.Range):
        return _Quant("any", [cont(c) for c in _range_slice(cands, index)])
    if isinstance(index, q.QUANTIFIERS):
        return _Quant(_QUANT_KIND[type(index)], [cont(c) for c in cands])
    if isinstance(index, q.Qualified):
        first, second = index.first, index.second
        if isinstance(second, q.NoneOf) and q.is_quantified(first):
            pool = _range_slice(cands, first) if isinstance(first, q.Range) else cands
            return _Quant("none", [cont(c) for c in pool])
        if step is None:
            raise EvaluationError("qualified index not allowed here")
        return _select(cands, first, lambda node: step(node, second))
    raise TypeError(f"bad index {index!r}")


class _Resolver:
    def __init__(self, ctx: MatchContext, depth: int = 0):
        self.ctx = ctx
        self.depth = depth

    def thread_type(self, seg):
        if seg.key is None:
            if not self.ctx.default_thread:
                raise EvaluationError(
                    f"{seg.obj} has no thread type and no default thread type is set"
                )
            return self.ctx.default_thread
        return self.text(seg.key)

    def text(self, value) -> str:
        """Scalar text of ``value`` (keys, assignment values, concatenations)."""
        if self.depth >= MAX_KEY_DEPTH:
            raise EvaluationDepthError(f"key evaluation nested deeper than {MAX_KEY_DEPTH}")
        inner = _Resolver(self.ctx, self.depth + 1)
        if isinstance(value, q.Literal):
            return value.text
        if isinstance(value, q.Concat):
            return "".join(inner.text(p) for p in value.parts)
        tree = inner.atom_tree(value)
        leaves = _leaves_selected(tree)
        if not leaves:
            raise NoNodeError(format_value(value))
        if len(leaves) > 1:
            raise ArityError(f"{format_value(value)} resolved to {len(leaves)} nodes, expected one")
        leaf = leaves[0]
        return base_text(leaf.value) if isinstance(leaf.value, Node) else leaf.value

    def atom_tree(self, atom):
        address = atom.address if isinstance(atom, q.MemberAccess) else atom
        if isinstance(atom, q.MemberAccess):
            key = self.text(atom.key) if atom.key is not None else None
            member = atom.member

            def finish(node, doc):
                tree = self.ctx.tree_for(node, doc)
                return _Leaf(member_value(node, member, key, tree), node)

        else:

            def finish(node, doc):
                return _Leaf(node, node)

        return self.walk(address.segments, 0, self.ctx.current, self.ctx.document, finish)

    def walk(self, segs, i, node, doc, finish):
        if i == len(segs):
            return finish(node, doc)
        seg = segs[i]
        obj = seg.obj

        def cont(n, d=doc):
            return self.walk(segs, i + 1, n, d, finish)

        if obj == "C":
            return cont(node)
        if obj == "S":
            raise EvaluationError("S can only be used as a return value")
        if obj == "F":
            docs = self.ctx.env.docs
            if seg.ref not in docs:
                raise UnknownSourceError(seg.ref)
            other = docs[seg.ref]
            target = self.ctx.corresponding(other)
            return ABSENT if target is None else cont(target, other)
        if obj == "M":
            bindings = self.ctx.bindings
            if seg.ref not in bindings:
                raise UnboundAliasError(seg.ref)
            index = q.Any() if seg.index is None else seg.index
            return _select(list(bindings[seg.ref]), index, cont)
        if obj == "R":
            target = doc.referred_node(node, self.thread_type(seg))
            return ABSENT if target is None else cont(target)
        if obj == "T":
            cands = doc.referring_nodes(node, self.thread_type(seg))
            return _select(cands, seg.index, cont)
        # navigation axes
        tree = self.ctx.tree_for(node, doc)

        def step(n, index, _obj=obj):
            t = self.ctx.tree_for(n, doc)
            return _select(axis_candidates(n, _obj, t, _closure_for(index)), index, cont, step)

        cands = axis_candidates(node, obj, tree, obj == "D" and _closure_for(seg.index))
        return _select(cands, seg.index, cont, step)


def _leaves_selected(tree) -> List[_Leaf]:
    if tree is ABSENT:
        return []
    if isinstance(tree, _Leaf):
        return [tree]
    if tree.kind in ("any", "all"):
        return [leaf for b in tree.branches for leaf in _leaves_selected(b)]
    if tree.kind == "none":
        return []
    branches = tree.branches if tree.kind == "first" else list(reversed(tree.branches))
    for branch in branches:
        found = _leaves_selected(branch)
        if found:
            return found
    return []


def member_value(node: Node, member: str, key: Optional[str], tree) -> str:
    if member == "l":
        return node.lex or ""
    if member == "t":
        return node.tag
    if member == "a":
        return node.get_attr(key)
    if member == "v":
        return str(tree.level(node))
    if member == "f":
        return "t" if tree.is_leaf(node) else "f"
    raise ValueError(f"unknown member {member!r}")


# -- conditions ----------------------------------------------------------


def _side_value(value, leaves):
    """Rebuild one side of a comparison from the leaves chosen for its atoms."""
    if isinstance(value, q.Literal):
        return value.text
    if isinstance(value, (q.NodeAddress, q.MemberAccess)):
        return leaves.pop(0).value
    pieces = []
    for part in value.parts:
        v = _side_value(part, leaves)
        pieces.append(base_text(v) if isinstance(v, Node) else v)
    return "".join(pieces)


def eval_comparison(cmp: q.Comparison, ctx: MatchContext) -> bool:
    """Evaluate one comparison, lifting it over quantified addresses.

    When true, the nodes selected for each aliased atom are stored in
    ``ctx.bindings``.
    """
    lhs_atoms = list(q.iter_atoms(cmp.lhs))
    atoms = lhs_atoms + list(q.iter_atoms(cmp.rhs))
    resolver = _Resolver(ctx)
    try:
        trees = [resolver.atom_tree(a) for a in atoms]
    except NoNodeError:
        return False
    split = len(lhs_atoms)

    def at_leaves(chosen):
        lhs = _side_value(cmp.lhs, list(chosen[:split]))
        rhs = _side_value(cmp.rhs, list(chosen[split:]))
        return _compare_values(cmp.op, lhs, rhs)

    def walk(i, chosen):
        if i == len(trees):
            ok = at_leaves(chosen)
            return ok, [tuple(chosen)] if ok else []
        return _walk_tree(trees[i], lambda leaf: walk(i + 1, chosen + [leaf]))

    ok, picks = walk(0, [])
    if ok:
        for alias, slot in _alias_slots(cmp, atoms):
            nodes = [pick[slot].node for pick in picks] if slot is not None else []
            ctx.bindings[alias] = _dedupe(nodes)
    return ok


def _alias_slots(cmp, atoms):
    slots = []
    for i, atom in enumerate(atoms):
        if atom.alias:
            slots.append((atom.alias, i))
    if cmp.alias:
        slots.append((cmp.alias, 0 if atoms else None))
    return slots


def _eval(expr, ctx) -> bool:
    if isinstance(expr, q.Comparison):
        return eval_comparison(expr, ctx)
    if isinstance(expr, q.And):
        return all(_eval(item, ctx) for item in expr.items)
    if isinstance(expr, q.Or):
        return any(_eval(item, ctx) for item in expr.items)
    if isinstance(expr, q.Group):
        return _eval(expr.expr, ctx)
    if isinstance(expr, q.Not):
        saved = dict(ctx.bindings)
        result = _eval(expr.expr, ctx)
        ctx.bindings.clear()
        ctx.bindings.update(saved)
        return not result
    raise TypeError(f"not a condition: {expr!r}")


def eval_condition(expr, ctx: MatchContext) -> MatchResult:
    return MatchResult(_eval(expr, ctx), ctx)


# -- action-mode resolution ----------------------------------------------


def resolve_nodes(address: q.NodeAddress, ctx: MatchContext) -> List[Node]:
    """Nodes denoted by ``address`` with wildcards read as selections."""
    tree = _Resolver(ctx).atom_tree(address)
    return _dedupe([leaf.node for leaf in _leaves_selected(tree)])


def resolve_each(atom, ctx: MatchContext) -> list:
    """One value per selected node: the node itself, or its member text."""
    tree = _Resolver(ctx).atom_tree(atom)
    return [leaf.value for leaf in _leaves_selected(tree)]


def resolve_value(value, ctx: MatchContext):
    """Text for literals, member accesses and concatenations; node list for addresses."""
    if isinstance(value, q.NodeAddress):
        return resolve_nodes(value, ctx)
    return _Resolver(ctx).text(value)


# -- driving -------------------------------------------------------------


def _as_docs(docs) -> Dict[Optional[str], Document]:
    if isinstance(docs, Document):
        return {None: docs}
    if not docs:
        raise EvaluationError("no documents to query")
    return dict(docs)


def iter_sentence_matches(
    query: q.Query,
    docs,
    default_thread: Optional[str] = None,
    primary: Optional[str] = None,
) -> Iterator[Tuple[Sentence, List[MatchResult]]]:
    """Yield ``(sentence, matches)`` for every sentence of the primary document.

    The primary document is the one named ``primary``, else the first.  The
    generator is lazy: a consumer may mutate a sentence after receiving its
    matches and before asking for the next one.
    """
    docs = _as_docs(docs)
    key = primary if primary in docs else next(iter(docs))
    document = docs[key]
    condition = query.condition
    for sentence in list(document.sentences):
        env = _SentenceEnv(docs, document, sentence, default_thread)
        if query.tt_directive is not None:
            tree = extract_thread_tree(sentence, query.tt_directive)
        else:
            tree = env.base_tree(sentence.root)
        matches = []
        for node in list(tree.preorder):
            ctx = MatchContext(node, sentence, document, tree, {}, docs, default_thread, env)
            if condition is None or _eval(condition, ctx):
                matches.append(MatchResult(True, ctx))
        yield sentence, matches


def run_query(query: q.Query, docs, default_thread: Optional[str] = None) -> Iterator[MatchResult]:
    """Matching contexts in document order (sentences, then pre-order nodes)."""
    for _, matches in iter_sentence_matches(query, docs, default_thread):
        yield from matches


__all__ = [
    "MatchContext",
    "MatchResult",
    "NoNodeError",
    "compare_text",
    "eval_comparison",
    "eval_condition",
    "iter_sentence_matches",
    "member_value",
    "resolve_each",
    "resolve_nodes",
    "resolve_value",
    "run_query",
]

"""Executing the action side of a query.

Evaluation is two-phase per sentence.  While a sentence is being matched,
return actions emit :class:`ResultRecord` objects and every write, move,
insert or delete is only *recorded* in a :class:`MutationPlan`.  Once all
nodes of the sentence have been tried, the plan is applied in order.  The
matches of one run therefore never see that run's own mutations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Union

from . import query as q
from .engine import (
    MatchContext,
    NoNodeError,
    _as_docs,
    iter_sentence_matches,
    resolve_each,
    resolve_nodes,
    resolve_value,
)
from .errors import (
    ActionError,
    ArityError,
    CycleError,
    GuardViolation,
    MalformedThreadError,
    ReadOnlyMemberError,
    RootNodeError,
    UnknownCommandError,
)
from .model import Document, Node, Sentence, base_text, parse_thread
from .parser import format_value

WARNING = "warning"


@dataclass
class ResultRecord:
    """One emitted result: a label and a text, node or sentence value."""

    label: str
    value: Union[str, Node, Sentence]

    def __post_init__(self):
        if not self.label:
            raise ValueError("result label must be non-empty")

    @property
    def is_warning(self):
        return self.label == WARNING


def warning(message: str) -> ResultRecord:
    return ResultRecord(WARNING, message)


# -- mutations -----------------------------------------------------------


@dataclass
class SetMember:
    node: Node
    member: str
    key: Optional[str]
    value: str


@dataclass
class MoveNode:
    node: Node
    parent: Node
    position: Optional[int] = None


@dataclass
class InsertNode:
    parent: Node
    tag: str
    position: Optional[int] = None


@dataclass
class DeleteNode:
    node: Node


Mutation = Union[SetMember, MoveNode, InsertNode, DeleteNode]


@dataclass
class MutationPlan:
    mutations: List[Mutation] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.mutations)

    def add(self, mutation: Mutation):
        self.mutations.append(mutation)


def _is_root(node: Node, d: Document) -> bool:
    return node.parent is None and d.sentence_of(node) is not None


def _attach(parent: Node, node: Node, position: Optional[int]):
    """Attach at 1-based ``position`` (clamped), or as last child."""
    if position is None:
        index = len(parent.children)
    else:
        index = min(max(position - 1, 0), len(parent.children))
    parent.insert(index, node)


def move_node(source: Node, dest_parent: Node, position: Optional[int], d: Document):
    """Re-attach ``source`` (with its subtree) under ``dest_parent``.

    Returns an undo callable.
    """
    if _is_root(source, d) or source.parent is None:
        raise RootNodeError(f"cannot move sentence root {source.describe()}")
    if dest_parent is source or any(a is source for a in dest_parent.ancestors()):
        raise CycleError(
            f"moving {source.describe()} under {dest_parent.describe()} would create a cycle"
        )
    old_parent = source.parent
    old_index = source.detach()
    _attach(dest_parent, source, position)
    d.invalidate()

    def undo():
        source.detach()
        old_parent.insert(old_index, source)

    return undo


def insert_node(dest_parent: Node, tag: str, position: Optional[int], d: Document) -> Node:
    """Create a leafless node with a fresh name under ``dest_parent``."""
    node = Node(tag, attrs={"name": d.fresh_name()})
    _attach(dest_parent, node, position)
    d.invalidate()
    return node


def delete_node(target: Node, d: Document) -> List[str]:
    """Remove ``target`` and its subtree; return dangling-thread warnings."""
    if _is_root(target, d):
        raise RootNodeError(f"cannot delete sentence root {target.describe()}")
    if target.parent is None:
        return []  # already removed by an earlier mutation
    removed = {n.name for n in target.iter_preorder() if n.name}
    target.detach()
    d.invalidate()
    messages = []
    for node in d.iter_nodes():
        for key, value in node.attrs.items():
            if key == "name" or ":" not in value:
                continue
            try:
                ref = parse_thread(key, value)
            except MalformedThreadError:
                continue
            if ref is not None and ref.target_name in removed:
                messages.append(
                    f"{node.describe()}.{key} refers to deleted node {ref.target_name!r}"
                )
    return messages


def _apply_one(mutation: Mutation, d: Document, plan: MutationPlan):
    """Apply one mutation and return its undo callable."""
    if isinstance(mutation, SetMember):
        node, member, key = mutation.node, mutation.member, mutation.key
        if member == "t":
            old = node.tag
            node.tag = mutation.value

            def undo():
                node.tag = old

        elif member == "l":
            old = node.lex
            node.lex = mutation.value

            def undo():
                node.lex = old

        else:
            had = key in node.attrs
            old = node.attrs.get(key)
            node.set_attr(key, mutation.value)

            def undo():
                if key in ("tag", "lex"):
                    node.set_attr(key, old)
                elif had:
                    node.attrs[key] = old
                else:
                    node.attrs.pop(key, None)

        d.invalidate()
        return undo
    if isinstance(mutation, MoveNode):
        return move_node(mutation.node, mutation.parent, mutation.position, d)
    if isinstance(mutation, InsertNode):
        node = insert_node(mutation.parent, mutation.tag, mutation.position, d)
        return node.detach
    if isinstance(mutation, DeleteNode):
        node = mutation.node
        if node.parent is None:
            delete_node(node, d)
            return lambda: None
        parent = node.parent
        index = next(i for i, c in enumerate(parent.children) if c is node)
        plan.warnings.extend(delete_node(node, d))

        def undo():
            parent.insert(index, node)

        return undo
    raise TypeError(f"not a mutation: {mutation!r}")


def _touched_roots(mutation: Mutation) -> List[Node]:
    if isinstance(mutation, SetMember):
        return [mutation.node.root()]
    if isinstance(mutation, MoveNode):
        return [mutation.node.root(), mutation.parent.root()]
    if isinstance(mutation, InsertNode):
        return [mutation.parent.root()]
    return [mutation.node.root()]


def apply_plan(plan: MutationPlan, d: Document, guard_base_text: bool = False) -> int:
    """Apply ``plan`` in order and return the number of mutations applied.

    A mutation that would create a cycle or move/delete a sentence root is
    skipped; the first such error is raised once the rest of the plan has
    been applied.  With ``guard_base_text`` the base text of every touched
    sentence is compared before and after, and the whole plan is rolled
    back on any difference.
    """
    before = {}
    if guard_base_text:
        for mutation in plan.mutations:
            for root in _touched_roots(mutation):
                before.setdefault(root.id, (root, base_text(root)))
    undo_log = []
    failures: List[ActionError] = []
    for mutation in plan.mutations:
        try:
            undo_log.append(_apply_one(mutation, d, plan))
        except (CycleError, RootNodeError) as exc:
            failures.append(exc)
    if guard_base_text:
        for root, text in before.values():
            after = base_text(root)
            if after != text:
                for undo in reversed(undo_log):
                    undo()
                d.invalidate()
                sentence = d.sentence_of(root)
                raise GuardViolation(sentence.index if sentence else 0, text, after)
    if failures:
        raise failures[0]
    return len(undo_log)


# -- commands ------------------------------------------------------------

Command = Callable[[Document, Optional[MatchContext]], List[ResultRecord]]


def _reallocate_names(d: Document, ctx=None) -> List[ResultRecord]:
    return [ResultRecord("reallocateNames", str(d.reallocate_names()))]


class CommandRegistry:
    """Named commands callable from the action side of a query."""

    def __init__(self):
        self._commands: Dict[str, Command] = {}
        self.register("reallocateNames", _reallocate_names)

    def __contains__(self, name):
        return name in self._commands

    def names(self):
        return sorted(self._commands)

    def register(self, name: str, fn: Command, replace: bool = False):
        if name in self._commands and not replace:
            raise ValueError(f"command {name!r} is already registered")
        self._commands[name] = fn

    def get(self, name: str) -> Command:
        try:
            return self._commands[name]
        except KeyError:
            raise UnknownCommandError(name) from None


def execute_command(
    name: str, ctx: Optional[MatchContext], registry: CommandRegistry, d: Document
) -> List[ResultRecord]:
    return list(registry.get(name)(d, ctx) or [])


# -- actions -------------------------------------------------------------


def _label(value, alias) -> str:
    return alias or format_value(value)


def _text_of(value, ctx) -> str:
    if isinstance(value, q.NodeAddress):
        nodes = resolve_nodes(value, ctx)
        if not nodes:
            raise NoNodeError(format_value(value))
        if len(nodes) > 1:
            raise ArityError(f"{format_value(value)} resolved to {len(nodes)} nodes, expected one")
        return base_text(nodes[0])
    return resolve_value(value, ctx)


def _child_position(seg: q.Segment) -> Optional[int]:
    if seg.index is None:
        return None
    if isinstance(seg.index, q.Position):
        return seg.index.n
    raise ActionError(f"node position must be an integer, got {format_value(q.NodeAddress((seg,)))}")


def _parents(address: q.NodeAddress, ctx) -> List[Node]:
    """Nodes addressed by ``address`` without its trailing ``D``."""
    head = address.segments[:-1]
    if not head:
        return [ctx.current]
    return resolve_nodes(q.NodeAddress(head), ctx)


def _return(action: q.Return, ctx) -> List[ResultRecord]:
    value, label = action.value, _label(action.value, action.alias)
    if isinstance(value, q.NodeAddress):
        if value.segments[0].obj == "S":
            return [ResultRecord(label, ctx.sentence)]
        nodes = resolve_nodes(value, ctx)
        if not nodes:
            raise NoNodeError(format_value(value))
        return [ResultRecord(label, n) for n in nodes]
    if isinstance(value, q.MemberAccess):
        values = resolve_each(value, ctx)
        if not values:
            raise NoNodeError(format_value(value))
        return [ResultRecord(label, v) for v in values]
    return [ResultRecord(label, _text_of(value, ctx))]


def _member_assign(action: q.MemberAssign, ctx, plan: MutationPlan):
    target = action.target
    if target.member not in q.WRITABLE_MEMBERS:
        raise ReadOnlyMemberError(f"member {target.member!r} is read-only")
    nodes = resolve_nodes(target.address, ctx)
    if not nodes:
        raise NoNodeError(format_value(target.address))
    key = _text_of(target.key, ctx) if target.key is not None else None
    value = _text_of(action.value, ctx)
    for node in nodes:
        plan.add(SetMember(node, target.member, key, value))


def _node_assign(action: q.NodeAssign, ctx, plan: MutationPlan):
    target = action.target
    kind = action.kind
    if kind == "delete":
        nodes = resolve_nodes(target, ctx)
        if not nodes:
            raise NoNodeError(format_value(target))
        for node in nodes:
            plan.add(DeleteNode(node))
    elif kind == "insert":
        parents = _parents(target, ctx)
        if not parents:
            raise NoNodeError(format_value(target))
        position = _child_position(target.segments[-1])
        for parent in parents:
            plan.add(InsertNode(parent, action.source.text, position))
    else:
        source = action.source
        nodes = resolve_nodes(target, ctx)
        if not nodes:
            raise NoNodeError(format_value(target))
        dests = _parents(source, ctx)
        if not dests:
            raise NoNodeError(format_value(source))
        if len(dests) > 1:
            raise ArityError(
                f"move destination {format_value(source)} resolved to {len(dests)} nodes, expected one"
            )
        position = _child_position(source.segments[-1])
        for node in nodes:
            plan.add(MoveNode(node, dests[0], position))


def apply_actions(actions: Iterable, ctx: MatchContext, plan: MutationPlan) -> List[ResultRecord]:
    """Run the actions for one match: emit returns, enqueue mutations.

    An action whose address selects no node is skipped with a warning
    record.
    """
    records: List[ResultRecord] = []
    for action in actions:
        try:
            if isinstance(action, q.Return):
                records.extend(_return(action, ctx))
            elif isinstance(action, q.MemberAssign):
                _member_assign(action, ctx, plan)
            elif isinstance(action, q.NodeAssign):
                _node_assign(action, ctx, plan)
            else:
                raise TypeError(f"not an action: {action!r}")
        except NoNodeError as exc:
            alias = getattr(action, "alias", None)
            prefix = f"{alias}: " if alias else ""
            records.append(warning(f"{prefix}{exc} (at {ctx.current.describe()}), action skipped"))
    return records


# -- driver --------------------------------------------------------------

DEFAULT_RETURN = (q.Return(q.NodeAddress((q.Segment("C"),))),)


def execute(
    query: q.Query,
    docs,
    registry: Optional[CommandRegistry] = None,
    guard_base_text: bool = False,
    default_thread: Optional[str] = None,
) -> Iterator[ResultRecord]:
    """Run ``query`` over ``docs`` (a Document or alias → Document mapping).

    Records for a sentence are yielded after that sentence's mutation plan
    has been applied.  A query without actions returns every matching
    ``C``.
    """
    docs = _as_docs(docs)
    registry = registry or CommandRegistry()
    if query.command is not None:
        name = query.command.name
        registry.get(name)  # fail early on unknown names
        for alias, doc in docs.items():
            if query.condition is None:
                yield from execute_command(name, None, registry, doc)
                continue
            first = next(
                (m for _, ms in iter_sentence_matches(query, docs, default_thread, alias) for m in ms),
                None,
            )
            if first is not None:
                yield from execute_command(name, first.context, registry, doc)
                doc.invalidate()
        return

    actions = query.actions or DEFAULT_RETURN
    primary = next(iter(docs.values()))
    for _, matches in iter_sentence_matches(query, docs, default_thread):
        plan = MutationPlan()
        records: List[ResultRecord] = []
        for match in matches:
            records.extend(apply_actions(actions, match.context, plan))
        if plan.mutations:
            try:
                apply_plan(plan, primary, guard_base_text)
            finally:
                for doc in docs.values():
                    doc.invalidate()
            records.extend(warning(w) for w in plan.warnings)
        yield from records


def transform(query, docs, **kwargs) -> List[ResultRecord]:
    """Eager form of :func:`execute`."""
    return list(execute(query, docs, **kwargs))


__all__ = [
    "CommandRegistry",
    "DeleteNode",
    "InsertNode",
    "MoveNode",
    "MutationPlan",
    "ResultRecord",
    "SetMember",
    "apply_actions",
    "apply_plan",
    "delete_node",
    "execute",
    "execute_command",
    "insert_node",
    "move_node",
    "transform",
]

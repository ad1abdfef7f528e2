"""In-memory threaded-tree documents.

A :class:`Document` is a list of :class:`Sentence` objects, each holding a
base tree of :class:`Node` objects.  Nodes carry a tag, optional lexical
data and an ordered set of attribute-value pairs.  An attribute whose value
has the form ``label:target`` is a *thread*: a typed, labelled link from the
node to the node whose ``name`` attribute equals ``target``.  The attribute
key is the thread type (``deprel``, ``coref``, ...).

Tree navigation is expressed against a *tree* object, either a
:class:`BaseTree` (the sentence's own structure) or a
:class:`ThreadTreeView` (the tree induced by one thread type).  Both expose
the same small interface, so :func:`axis_candidates` works on either.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

from .errors import (
    CyclicThreadError,
    MalformedThreadError,
    ThreadResolutionError,
)

RESERVED_KEYS = ("tag", "lex", "name")
AXES = ("P", "N", "Pr", "Nx", "A", "D")

_node_ids = itertools.count(1)


class Node:
    """A node of the base tree."""

    __slots__ = ("id", "tag", "lex", "attrs", "children", "parent")

    def __init__(self, tag, lex=None, attrs=None, children=()):
        self.id = next(_node_ids)
        self.tag = tag
        self.lex = lex
        self.attrs: Dict[str, str] = dict(attrs or {})
        self.children: List[Node] = []
        self.parent: Optional[Node] = None
        for child in children:
            self.append(child)

    def __repr__(self):
        return f"<Node {self.describe()}>"

    def describe(self):
        name = self.attrs.get("name")
        ident = f"name={name}" if name else f"id={self.id}"
        return f"{self.tag}[{ident}]"

    @property
    def name(self):
        return self.attrs.get("name") or None

    @property
    def is_leaf(self):
        return not self.children

    def append(self, child: Node):
        self.insert(len(self.children), child)

    def insert(self, index: int, child: Node):
        if child.parent is not None:
            raise ValueError(f"{child!r} is already attached")
        child.parent = self
        self.children.insert(index, child)

    def detach(self) -> int:
        """Remove this node from its parent; return its former child index."""
        parent = self.parent
        if parent is None:
            raise ValueError(f"{self!r} has no parent")
        index = next(i for i, c in enumerate(parent.children) if c is self)
        del parent.children[index]
        self.parent = None
        return index

    def root(self) -> Node:
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    def ancestors(self) -> Iterator[Node]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def level(self) -> int:
        return sum(1 for _ in self.ancestors())

    def iter_preorder(self) -> Iterator[Node]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> Iterator[Node]:
        return (n for n in self.iter_preorder() if not n.children)

    def get_attr(self, key: str) -> str:
        """Attribute lookup with the reserved keys mapped onto fields.

        Missing attributes read as the empty string.
        """
        if key == "tag":
            return self.tag
        if key == "lex":
            return self.lex or ""
        return self.attrs.get(key, "")

    def set_attr(self, key: str, value: str):
        if key == "tag":
            self.tag = value
        elif key == "lex":
            self.lex = value
        else:
            self.attrs[key] = value

    def structure(self):
        """Hashable value that compares equal for structurally equal subtrees."""
        return (
            self.tag,
            self.lex,
            tuple(sorted(self.attrs.items())),
            tuple(c.structure() for c in self.children),
        )


@dataclass(frozen=True)
class ThreadRef:
    type: str
    label: str
    target_name: str

    def __str__(self):
        return f"{self.label}:{self.target_name}"


def parse_thread(thread_type: str, value: str) -> Optional[ThreadRef]:
    """Split an attribute value into a :class:`ThreadRef`.

    Empty values mean "no thread".  The label may not contain a colon, so
    the value is split on its first colon.
    """
    if not value:
        return None
    label, sep, target = value.partition(":")
    if not sep or not target:
        raise MalformedThreadError(thread_type, value)
    return ThreadRef(thread_type, label, target)


class Sentence:
    def __init__(self, root: Node, index: int = 1, document: Optional[Document] = None):
        self.root = root
        self.index = index
        self.document = document

    def __repr__(self):
        return f"<Sentence {self.index}: {base_text(self)!r}>"

    def iter_nodes(self) -> Iterator[Node]:
        return self.root.iter_preorder()

    def structure(self):
        return self.root.structure()


class Document:
    """An ordered collection of sentences sharing one node-name namespace."""

    def __init__(self, sentences=(), origin=None):
        self.sentences: List[Sentence] = []
        self.origin = origin
        self._names = None
        self._threads = {}
        self._roots = None
        for item in sentences:
            self.add_sentence(item.root if isinstance(item, Sentence) else item)

    def __repr__(self):
        return f"<Document {len(self.sentences)} sentences>"

    def add_sentence(self, root: Node) -> Sentence:
        if root.parent is not None:
            raise ValueError("a sentence root cannot have a parent")
        sentence = Sentence(root, len(self.sentences) + 1, self)
        self.sentences.append(sentence)
        self.invalidate()
        return sentence

    def invalidate(self):
        """Drop cached indexes; call after any structural or attribute change."""
        self._names = None
        self._threads = {}
        self._roots = None

    def iter_nodes(self) -> Iterator[Node]:
        for sentence in self.sentences:
            yield from sentence.iter_nodes()

    def node_count(self):
        return sum(1 for _ in self.iter_nodes())

    def structure(self):
        return tuple(s.structure() for s in self.sentences)

    def sentence_of(self, node: Node) -> Optional[Sentence]:
        if self._roots is None:
            self._roots = {s.root.id: s for s in self.sentences}
        return self._roots.get(node.root().id)

    # -- names and threads ----------------------------------------------

    def _name_index(self) -> Dict[str, List[Node]]:
        if self._names is None:
            index: Dict[str, List[Node]] = {}
            for node in self.iter_nodes():
                name = node.name
                if name:
                    index.setdefault(name, []).append(node)
            self._names = index
        return self._names

    def nodes_named(self, name: str) -> List[Node]:
        return list(self._name_index().get(name, ()))

    def node_by_name(self, name: str) -> Node:
        found = self._name_index().get(name, ())
        if not found:
            raise ThreadResolutionError(name)
        if len(found) > 1:
            raise ThreadResolutionError(name, "is not unique")
        return found[0]

    def fresh_name(self, taken=()) -> str:
        names = self._name_index()
        for k in itertools.count(1):
            candidate = f"n{k}"
            if candidate not in names and candidate not in taken:
                return candidate

    def referred_node(self, node: Node, thread_type: str) -> Optional[Node]:
        ref = parse_thread(thread_type, node.attrs.get(thread_type, ""))
        if ref is None:
            return None
        return self.node_by_name(ref.target_name)

    def referring_nodes(self, node: Node, thread_type: str) -> List[Node]:
        name = node.name
        if not name:
            return []
        index = self._threads.get(thread_type)
        if index is None:
            index = {}
            for n in self.iter_nodes():
                try:
                    ref = parse_thread(thread_type, n.attrs.get(thread_type, ""))
                except MalformedThreadError:
                    continue
                if ref is not None:
                    index.setdefault(ref.target_name, []).append(n)
            self._threads[thread_type] = index
        return list(index.get(name, ()))

    def reallocate_names(self) -> int:
        """Give every node a document-unique ``name``; return how many changed.

        Nodes that already hold a unique name keep it, so threads pointing at
        them stay valid.  Nameless nodes, and the second and later holders of
        a duplicated name, get fresh ``n<k>`` names.  A thread that targeted a
        duplicated name keeps resolving to its first holder in document order.
        Running it twice renames nothing the second time.
        """
        taken = set(self._name_index())
        seen = set()
        renamed = 0
        counter = itertools.count(1)
        for node in self.iter_nodes():
            name = node.name
            if name and name not in seen:
                seen.add(name)
                continue
            while True:
                candidate = f"n{next(counter)}"
                if candidate not in taken:
                    break
            taken.add(candidate)
            seen.add(candidate)
            node.attrs["name"] = candidate
            renamed += 1
        if renamed:
            self.invalidate()
        return renamed


def reallocate_names(document: Document) -> int:
    return document.reallocate_names()


def base_text(sentence) -> str:
    """Lexical data of the leaves in pre-order, joined by single spaces.

    Accepts a :class:`Sentence` or a :class:`Node` (for a subtree).
    """
    root = sentence.root if isinstance(sentence, Sentence) else sentence
    return " ".join(leaf.lex for leaf in root.leaves() if leaf.lex)


# -- tree views ----------------------------------------------------------


class BaseTree:
    """Navigation over a sentence's base structure.

    The pre-order sequence is captured at construction time.
    """

    def __init__(self, root: Node):
        self.root = root
        self.preorder = list(root.iter_preorder())
        self._pos = {n.id: i for i, n in enumerate(self.preorder)}

    def contains(self, node):
        return node.id in self._pos

    def position(self, node) -> int:
        try:
            return self._pos[node.id]
        except KeyError:
            raise ValueError(f"{node!r} is not part of this tree") from None

    def parent(self, node):
        return node.parent

    def children(self, node):
        return list(node.children)

    def roots(self):
        return [self.root]

    def level(self, node):
        return node.level()

    def is_leaf(self, node):
        return not node.children


class ThreadTreeView:
    """The tree induced by the threads of one type within a sentence.

    Every node carrying a thread of ``thread_type`` becomes a child of the
    node it refers to.  Referred nodes without a thread of their own are
    roots.  Nodes that neither carry nor receive a thread are left out.
    """

    def __init__(self, thread_type: str, parent_of: Dict[Node, Node], members: List[Node]):
        self.thread_type = thread_type
        self.parent_of = parent_of
        order = {n.id: i for i, n in enumerate(members)}
        self._children: Dict[int, List[Node]] = {n.id: [] for n in members}
        roots = []
        for node in members:
            parent = parent_of.get(node)
            if parent is None:
                roots.append(node)
            else:
                self._children[parent.id].append(node)
        for kids in self._children.values():
            kids.sort(key=lambda n: order[n.id])
        self._roots = roots
        self.preorder: List[Node] = []
        stack = list(reversed(roots))
        while stack:
            node = stack.pop()
            self.preorder.append(node)
            stack.extend(reversed(self._children[node.id]))
        self._pos = {n.id: i for i, n in enumerate(self.preorder)}

    def __len__(self):
        return len(self.preorder)

    def contains(self, node):
        return node.id in self._pos

    def position(self, node) -> int:
        try:
            return self._pos[node.id]
        except KeyError:
            raise ValueError(f"{node!r} is not part of this view") from None

    def parent(self, node):
        self.position(node)
        return self.parent_of.get(node)

    def children(self, node):
        self.position(node)
        return list(self._children[node.id])

    def roots(self):
        return list(self._roots)

    def level(self, node):
        depth = 0
        node = self.parent(node)
        while node is not None:
            depth += 1
            node = self.parent_of.get(node)
        return depth

    def is_leaf(self, node):
        return not self.children(node)


def extract_thread_tree(sentence: Sentence, thread_type: str) -> ThreadTreeView:
    """Build the :class:`ThreadTreeView` of ``thread_type`` for one sentence.

    Threads whose target lies outside the sentence leave their source as a
    root of the view.
    """
    doc = sentence.document
    nodes = list(sentence.iter_nodes())
    in_sentence = {n.id for n in nodes}
    parent_of: Dict[Node, Node] = {}
    for node in nodes:
        if doc is not None:
            target = doc.referred_node(node, thread_type)
        else:
            ref = parse_thread(thread_type, node.attrs.get(thread_type, ""))
            target = None if ref is None else _find_in(nodes, ref.target_name)
        if target is not None and target.id in in_sentence:
            parent_of[node] = target
    for start in parent_of:
        seen = {start.id}
        node = parent_of.get(start)
        while node is not None:
            if node.id in seen:
                raise CyclicThreadError(node, thread_type)
            seen.add(node.id)
            node = parent_of.get(node)
    referred = {p.id for p in parent_of.values()}
    members = [n for n in nodes if n in parent_of or n.id in referred]
    return ThreadTreeView(thread_type, parent_of, members)


def _find_in(nodes, name):
    found = [n for n in nodes if n.name == name]
    if not found:
        raise ThreadResolutionError(name)
    if len(found) > 1:
        raise ThreadResolutionError(name, "is not unique")
    return found[0]


def axis_candidates(node: Node, axis: str, tree, closure: bool = False) -> List[Node]:
    """Candidate nodes along ``axis`` from ``node``, nearest first.

    ``P``/``N`` walk the pre-order sequence of the tree, ``Pr``/``Nx`` the
    siblings, ``A`` the ancestors.  ``D`` gives the children, or with
    ``closure`` every proper descendant in pre-order.
    """
    if axis == "P":
        i = tree.position(node)
        return tree.preorder[:i][::-1]
    if axis == "N":
        i = tree.position(node)
        return tree.preorder[i + 1:]
    if axis in ("Pr", "Nx"):
        parent = tree.parent(node)
        siblings = tree.children(parent) if parent is not None else tree.roots()
        i = next(k for k, s in enumerate(siblings) if s is node)
        return siblings[:i][::-1] if axis == "Pr" else siblings[i + 1:]
    if axis == "A":
        out = []
        current = tree.parent(node)
        while current is not None:
            out.append(current)
            current = tree.parent(current)
        return out
    if axis == "D":
        if not closure:
            return tree.children(node)
        out = []
        stack = list(reversed(tree.children(node)))
        while stack:
            current = stack.pop()
            out.append(current)
            stack.extend(reversed(tree.children(current)))
        return out
    raise ValueError(f"unknown axis {axis!r}")

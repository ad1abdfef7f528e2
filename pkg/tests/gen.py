"""Seeded random documents and query ASTs for property tests.

Every generator takes a ``random.Random`` so the same function feeds both
hypothesis (through ``st.randoms()``) and plain seeded loops.
"""

import random

from ttq import query as q
from ttq.iospec import IoSpec
from ttq.model import Document, Node

TAGS = ("S", "NP", "VP", "PP", "NN", "JJ", "DT", "XC", "VBZ", "IN")
WORDS = ("a", "the", "book", "dark", "saw", "Ram", "reads", "naïve", "señor", "日本", "x'y", "a&b")
THREAD_TYPES = ("deprel", "coref")
LABELS = ("a", "o", "k1", "mod")


def random_tree(rng: random.Random, max_nodes=30, lex_prob=0.9) -> Node:
    count = rng.randint(1, max_nodes)
    nodes = [Node(rng.choice(TAGS))]
    for _ in range(count - 1):
        parent = rng.choice(nodes)
        child = Node(rng.choice(TAGS))
        parent.append(child)
        nodes.append(child)
    for node in nodes:
        if node.is_leaf and rng.random() < lex_prob:
            node.lex = rng.choice(WORDS)
        if rng.random() < 0.2:
            node.attrs["tone"] = rng.choice(("LTone", "HTone"))
    return nodes[0]


def random_document(
    rng: random.Random,
    max_sentences=3,
    max_nodes=30,
    name_prob=1.0,
    thread_prob=0.3,
    duplicate_prob=0.0,
) -> Document:
    """A document with names ``n1..`` and random threads between named nodes."""
    doc = Document([random_tree(rng, max_nodes) for _ in range(rng.randint(1, max_sentences))])
    named = []
    for k, node in enumerate(doc.iter_nodes(), 1):
        if rng.random() < name_prob:
            node.attrs["name"] = f"n{k}"
            named.append(node)
    if duplicate_prob and len(named) > 1:
        for node in named[1:]:
            if rng.random() < duplicate_prob:
                node.attrs["name"] = rng.choice(named[: named.index(node)]).attrs["name"]
    targets = [n.name for n in doc.iter_nodes() if n.name]
    if targets:
        for node in doc.iter_nodes():
            for ttype in THREAD_TYPES:
                if rng.random() < thread_prob:
                    node.attrs[ttype] = f"{rng.choice(LABELS)}:{rng.choice(targets)}"
    doc.invalidate()
    return doc


# -- query ASTs ----------------------------------------------------------

ALIASES = ("p", "q", "r", "x1", "m2", "c")
LITERAL_CHARS = "abNPVZ09 _-*?'\\:.é"
NAV = ("P", "N", "Pr", "Nx", "A", "D")


def random_literal(rng, min_len=0):
    n = rng.randint(min_len, 5)
    return q.Literal("".join(rng.choice(LITERAL_CHARS) for _ in range(n)))


def random_index(rng, qualified=True):
    kind = rng.randrange(9 if qualified else 8)
    if kind == 0:
        return q.Position(rng.randint(1, 4))
    if kind == 1:
        return q.Last()
    if kind == 2:
        return q.First()
    if kind == 3:
        return q.LastMatch()
    if kind == 4:
        return q.Any()
    if kind == 5:
        return q.All()
    if kind == 6:
        return q.NoneOf()
    if kind == 7:
        lo = rng.choice((None, 1, 2, 3, "z"))
        if lo == "z":
            hi = rng.choice((None, "z"))
        elif lo is None:
            hi = rng.choice((1, 2, 3, "z"))
        else:
            hi = rng.choice((None, "z", lo, lo + 1, lo + 3))
        return q.Range(lo, hi)
    return q.Qualified(random_index(rng, False), random_index(rng, False))


class QueryGen:
    """Builds one random, well-formed query AST."""

    def __init__(self, rng: random.Random, sources=()):
        self.rng = rng
        self.defined = []  # condition aliases, in order
        self.fresh = [a for a in ALIASES]
        rng.shuffle(self.fresh)
        self.source_aliases = [s.alias for s in sources if s.alias]

    def take_alias(self):
        return self.fresh.pop() if self.fresh else None

    def key(self, depth):
        rng = self.rng
        if depth > 1 or rng.random() < 0.7:
            return q.Literal(rng.choice(THREAD_TYPES + ("tone", "name", "tag")))
        return self.member(depth + 1, allow_alias=False)

    def segments(self, depth, first=True):
        rng = self.rng
        segs = []
        start = rng.random()
        if start < 0.1 and self.defined:
            index = random_index(rng, False) if rng.random() < 0.5 else None
            segs.append(q.Segment("M", index=index, ref=rng.choice(self.defined)))
        elif start < 0.15 and (self.source_aliases or not first):
            ref = rng.choice(self.source_aliases) if self.source_aliases else "s"
            segs.append(q.Segment("F", ref=ref))
            segs.append(q.Segment("C"))
        elif start < 0.4:
            segs.append(q.Segment("C"))
        for _ in range(rng.randint(0 if segs else 1, 3)):
            obj = rng.choice(NAV + ("R", "T"))
            if obj == "R":
                segs.append(q.Segment("R", key=self.key(depth) if rng.random() < 0.8 else None))
            elif obj == "T":
                key = self.key(depth) if rng.random() < 0.7 else None
                index = random_index(rng, False) if rng.random() < 0.6 else None
                segs.append(q.Segment("T", index=index, key=key))
            else:
                index = random_index(rng) if rng.random() < 0.7 else None
                segs.append(q.Segment(obj, index=index))
        return tuple(segs)

    def address(self, depth=0, allow_alias=True):
        alias = self.take_alias() if allow_alias and self.rng.random() < 0.2 else None
        return q.NodeAddress(self.segments(depth), alias)

    def member(self, depth=0, allow_alias=True):
        rng = self.rng
        member = rng.choice(q.MEMBERS)
        key = self.key(depth) if member == "a" else None
        alias = self.take_alias() if allow_alias and rng.random() < 0.2 else None
        return q.MemberAccess(q.NodeAddress(self.segments(depth)), member, key, alias)

    def atom(self, allow_alias=True):
        r = self.rng.random()
        if r < 0.35:
            return random_literal(self.rng)
        if r < 0.85:
            return self.member(allow_alias=allow_alias)
        return self.address(allow_alias=allow_alias)

    def value(self, allow_alias=True):
        if self.rng.random() < 0.2:
            return q.Concat(tuple(self.atom(allow_alias) for _ in range(self.rng.randint(2, 3))))
        return self.atom(allow_alias)

    def comparison(self):
        new_aliases = []
        lhs = self.value()
        rhs = self.value()
        for side in (lhs, rhs):
            new_aliases += [a.alias for a in q.iter_atoms(side) if a.alias]
        last = rhs.parts[-1] if isinstance(rhs, q.Concat) else rhs
        alias = None
        if (isinstance(last, q.Literal) or last.alias) and self.rng.random() < 0.3:
            alias = self.take_alias()
        if alias:
            new_aliases.append(alias)
        self.defined += new_aliases
        return q.Comparison(lhs, self.rng.choice(q.COMPARISON_OPS), rhs, alias)

    def condition(self, depth=0, level="or"):
        rng = self.rng
        r = rng.random()
        if depth < 3 and level == "or" and r < 0.15:
            return q.Or(tuple(self.condition(depth + 1, "and") for _ in range(rng.randint(2, 3))))
        if depth < 3 and level in ("or", "and") and r < 0.35:
            return q.And(tuple(self.condition(depth + 1, "unary") for _ in range(rng.randint(2, 3))))
        if depth < 3 and r < 0.45:
            return q.Not(self.condition(depth + 1))
        if depth < 3 and r < 0.5:
            return q.Group(self.condition(depth + 1))
        return self.comparison()

    def target(self):
        segs = self.segments(0)
        return q.NodeAddress(segs)

    def action(self, returns_taken):
        rng = self.rng
        r = rng.random()
        if r < 0.45:
            value = self.value(allow_alias=False)
            if isinstance(value, q.NodeAddress) and rng.random() < 0.1:
                value = q.NodeAddress((q.Segment("S"),))
            alias = None
            if rng.random() < 0.3 and self.fresh:
                alias = self.take_alias()
                returns_taken.append(alias)
            return q.Return(value, alias)
        if r < 0.75:
            member = rng.choice(q.WRITABLE_MEMBERS)
            key = self.key(0) if member == "a" else None
            target = q.MemberAccess(self.target(), member, key)
            return q.MemberAssign(target, self.value(allow_alias=False))
        kind = rng.choice(("delete", "insert", "move"))
        target = self.target()
        if kind == "delete":
            return q.NodeAssign(target, q.Literal(""))
        if kind == "insert":
            segs = target.segments + (q.Segment("D", index=rng.choice((None, q.Position(2)))),)
            return q.NodeAssign(q.NodeAddress(segs), q.Literal(rng.choice(TAGS)))
        dest = self.target()
        dest = q.NodeAddress(dest.segments + (q.Segment("D"),))
        return q.NodeAssign(target, dest)

    def query(self):
        rng = self.rng
        condition = self.condition()
        tt = rng.choice(THREAD_TYPES) if rng.random() < 0.15 else None
        actions, command = (), None
        r = rng.random()
        if r < 0.1:
            command = q.CommandCall(rng.choice(("reallocateNames", "frob", "checkNames")))
        elif r < 0.7:
            taken = []
            actions = tuple(self.action(taken) for _ in range(rng.randint(1, 3)))
        return q.Query(condition, actions, command, tt_directive=tt)


def random_query(rng: random.Random) -> q.Query:
    sources = ()
    if rng.random() < 0.2:
        sources = tuple(
            IoSpec(rng.choice(("xml", "raw")), f"in{i}.xml", rng.choice(("UTF-8", "latin-1")), f"s{i}")
            for i in range(rng.randint(1, 2))
        )
    gen = QueryGen(rng, sources)
    query = gen.query()
    dests = ()
    if rng.random() < 0.2:
        dests = (IoSpec("raw", "-"),) if rng.random() < 0.5 else (IoSpec("xml", "out.xml", "UTF-8"),)
    if rng.random() < 0.05:
        command = q.CommandCall("reallocateNames")
        return q.Query(None, (), command, sources, dests)
    return q.Query(query.condition, query.actions, query.command, sources, dests, query.tt_directive)

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from properties import check_none_is_negated_any, check_quantifier_duality
from treebuild import doc, names
from ttq.engine import (
    MatchContext,
    compare_text,
    eval_comparison,
    eval_condition,
    iter_sentence_matches,
    resolve_nodes,
    resolve_value,
    run_query,
)
from ttq.errors import (
    ArityError,
    EvaluationDepthError,
    EvaluationError,
    UnboundAliasError,
    UnknownSourceError,
)
from ttq.model import BaseTree
from ttq.parser import parse_query


def matched(text, d, **kw):
    return [m.context.current for m in run_query(parse_query(text), d, **kw)]


def ctx_at(d, name, bindings=None, **kw):
    node = d.node_by_name(name)
    sentence = d.sentence_of(node)
    return MatchContext(node, sentence, d, BaseTree(sentence.root), dict(bindings or {}), **kw)


def cond(text):
    return parse_query(text).condition


def test_q1_finds_only_sentence_with_saw():
    d = doc(
        "(S (NP (PRP I)) (VP (VBD ran)))",
        "(S (NP (PRP I)) (VP (VBD saw) (NP (PRP it))))",
        "(S (NP (NN sawdust)) (VP (VBD flew)))",
    )
    hits = matched("C.l='saw' -> S", d)
    assert [d.sentence_of(n).index for n in hits] == [2]


def test_tt_directive_matches_view_children(fx1):
    assert names(matched("TT['deprel']: C.t='NP' AND A.t='VP'", fx1)) == ["n2", "n4"]


def test_no_match(fx1):
    assert matched("C.t='ZZZ'", fx1) == []


def test_condition_truth_values(fx1):
    assert eval_condition(cond("C.t='NN' and C.f='t'"), ctx_at(fx1, "n42")).matched
    assert not eval_condition(cond("!(C.t='NN')"), ctx_at(fx1, "n42")).matched
    assert eval_condition(cond("C.t='NN' OR C.t='NNP'"), ctx_at(fx1, "n21")).matched


def test_wildcard_binding_collects_all_satisfying():
    d = doc("(S{name=s} (XC{name=a} x) (XC{name=b} y) (NN{name=c} z))")
    ctx = ctx_at(d, "c")
    assert eval_comparison(cond("P[*].t/p='XC'"), ctx)
    assert names(ctx.bindings["p"]) == ["b", "a"]  # nearest first


def test_none_of_descendants(fx1):
    assert eval_comparison(cond("C.D[*:0].l='saw'"), ctx_at(fx1, "n1"))
    assert not eval_comparison(cond("C.D[*:0].l='book'"), ctx_at(fx1, "n1"))


def test_universal_over_children():
    d = doc("(S{name=s} (X{name=x} (NN a) (NN b)) (Y{name=y} (NN c) (VB d)))")
    assert eval_comparison(cond("C.D[@].t='NN'"), ctx_at(d, "x"))
    assert not eval_comparison(cond("C.D[@].t='NN'"), ctx_at(d, "y"))


def test_universal_is_vacuous_on_no_candidates(fx1):
    assert eval_comparison(cond("C.D[@].t='NN'"), ctx_at(fx1, "n42"))


def test_first_and_last_satisfying():
    d = doc("(S{name=s} (NP{name=a} x) (VP{name=b} y) (NP{name=c} z) (NN{name=d} w))")
    ctx = ctx_at(d, "d")
    assert eval_comparison(cond("Pr[?].t/p='NP'"), ctx)
    assert names(ctx.bindings["p"]) == ["c"]
    assert eval_comparison(cond("Pr[.].t/q='NP'"), ctx)
    assert names(ctx.bindings["q"]) == ["a"]


def test_resolve_values(fx1):
    assert resolve_value(parse_query("C.t='x' -> C.l+'-'+C.t").actions[0].value, ctx_at(fx1, "n42")) == "book-NN"
    assert resolve_value(cond("R['deprel'].t='x'").lhs, ctx_at(fx1, "n2")) == "VP"
    ctx = ctx_at(fx1, "n1", {"p": [fx1.node_by_name("n21"), fx1.node_by_name("n31")]})
    assert names(resolve_nodes(cond("C.t='x'/p AND M[p:1]='x'").items[1].lhs, ctx)) == ["n21"]
    assert names(resolve_nodes(cond("C.t='x'/p AND M[p]='x'").items[1].lhs, ctx)) == ["n21", "n31"]


def test_compare_text():
    assert compare_text("~", "VBZ", "V*")
    assert compare_text("=", "NN", "NN")
    assert compare_text("!~", "NN", "V*")
    assert compare_text("~", "NN", "N?")
    assert not compare_text("~", "NNS", "N?")
    assert not compare_text("~", "xVBZ", "V*")  # anchored
    assert compare_text("~", "a.b", "a.b") and not compare_text("~", "axb", "a.b")


def test_absent_node_makes_comparison_false(fx1):
    assert not eval_comparison(cond("A[5].t='S'"), ctx_at(fx1, "n42"))
    assert eval_comparison(cond("A[3].t='S'"), ctx_at(fx1, "n42"))
    assert not eval_comparison(cond("P.t!='x'"), ctx_at(fx1, "n1"))


def test_concat_over_many_nodes_is_arity_error(fx1):
    with pytest.raises(ArityError):
        resolve_value(parse_query("C.t='x' -> D[*].t+'x'").actions[0].value, ctx_at(fx1, "n3"))


def test_key_depth_limit(fx1):
    key = "'tag'"
    for _ in range(10):
        key = f"C.a[{key}]"
    with pytest.raises(EvaluationDepthError):
        eval_comparison(cond(f"{key}='x'"), ctx_at(fx1, "n1"))


def test_variable_key(fx1):
    d = doc("(S{name=s,want=mood,mood=calm} x)")
    assert matched("C.a[C.a['want']]='calm'", d) == [d.sentences[0].root]


def test_unbound_alias(fx1):
    with pytest.raises(UnboundAliasError):
        matched("C.t='ZZ'/p OR M[p].t='NN'", fx1)


def test_not_contributes_no_bindings(fx1):
    ctx = ctx_at(fx1, "n42")
    assert eval_condition(cond("!(C.t/p='VP') AND C.t='NN'"), ctx).matched
    assert "p" not in ctx.bindings


def test_default_thread(fx1):
    with pytest.raises(EvaluationError):
        matched("R.t='VP'", fx1)
    assert names(matched("R.t='VP'", fx1, default_thread="deprel")) == ["n2", "n4"]
    assert names(matched("T[2].t='NP'", fx1, default_thread="deprel")) == ["n3"]


def test_referring_index(fx1):
    assert names(matched("C.t='VP' AND T['deprel':2].t='NP'", fx1)) == ["n3"]
    assert matched("C.t='VP' AND T['deprel':3].t='NP'", fx1) == []


def test_node_identity_and_text_comparisons(fx1):
    assert names(matched("R['deprel']=A", fx1)) == ["n4"]
    assert names(matched("C='a book'", fx1)) == ["n4"]
    with pytest.raises(EvaluationError):
        matched("C~A", fx1)


def test_ranges(fx1):
    ctx = ctx_at(fx1, "n42")
    assert names(resolve_nodes(cond("P[2-3]='x'").lhs, ctx)) == ["n4", "n31"]
    assert names(resolve_nodes(cond("P[5-]='x'").lhs, ctx)) == ["n21", "n2", "n1"]
    assert names(resolve_nodes(cond("P[-2]='x'").lhs, ctx)) == ["n41", "n4"]
    assert names(resolve_nodes(cond("P[z]='x'").lhs, ctx)) == ["n1"]
    assert names(resolve_nodes(cond("P[6-z]='x'").lhs, ctx)) == ["n2", "n1"]
    # a range behaves as "any" inside the range
    assert eval_comparison(cond("P[2-3].t='VBZ'"), ctx)
    assert not eval_comparison(cond("P[2-3].t='DT'"), ctx)


def test_qualified_children(fx1):
    ctx = ctx_at(fx1, "n1")
    assert names(resolve_nodes(cond("D[2:1]='x'").lhs, ctx)) == ["n31"]
    assert names(resolve_nodes(cond("D[2:z]='x'").lhs, ctx)) == ["n4"]


def test_members(fx1):
    ctx = ctx_at(fx1, "n42")
    assert resolve_value(cond("C.v='x'").lhs, ctx) == "3"
    assert resolve_value(cond("C.f='x'").lhs, ctx) == "t"
    assert resolve_value(cond("A.f='x'").lhs, ctx) == "f"
    assert resolve_value(cond("C.a['name']='x'").lhs, ctx) == "n42"
    assert resolve_value(cond("C.a['missing']='x'").lhs, ctx) == ""
    assert resolve_value(cond("A.l='x'").lhs, ctx) == ""


def test_level_in_thread_view(fx1):
    assert names(matched("TT['deprel']: C.v='1'", fx1)) == ["n2", "n4"]


def test_tt_consistency_with_referred_node(fx1):
    plain = {n.name for n in matched("R['deprel'].t='VP'", fx1)}
    view = {n.name for n in matched("TT['deprel']: A.t='VP'", fx1)}
    assert plain == view == {"n2", "n4"}


def test_q4_style_alias_chain():
    d = doc("(S (VP{name=v} (VBD gave) (NP (NP (DT the) (NN dog)) (NP (DT a) (NN bone)))))")
    hits = matched("C.t='VP' AND C.D[*].t~'V*'/p AND M[p].N.t='NP' AND M[p].N[2].t='NP'", d)
    assert names(hits) == ["v"]


def test_q5_binds_nearest_common_ancestor():
    d = doc("(S{name=s} (NP{name=np} (N a)) (VP{name=vp} (V b)))")
    query = parse_query("P[*].t/p='NP' and C.t='VP' AND M[p:@].A[*]=C.A[*]/q -> M[q:1]")
    (m,) = list(run_query(query, d))
    assert names(m.context.bindings["q"]) == ["s"]


def _two_docs():
    a = doc("(S{name=a1} (NN{name=a2} book) (VB{name=a3} x))", "(S{name=a4} (NN{name=a5} cat))")
    b = doc("(S{name=b1} (Noun{name=b2} book) (VB{name=b3} x))", "(S{name=b4} (XX{name=b5} cat))")
    return a, b


def test_multi_source_lockstep():
    a, b = _two_docs()
    hits = matched("F[s1].C.t='NN' and F[s2].C.t='Noun'", {"s1": a, "s2": b})
    assert names(hits) == ["a2"]


def test_multi_source_exhausted_positions_are_false():
    a = doc("(S (X p) (Y q) (Z r))")
    b = doc("(S (X p))")
    hits = matched("F[s2].C.t~'*'", {"s1": a, "s2": b})
    assert len(hits) == 2


def test_unknown_source(fx1):
    with pytest.raises(UnknownSourceError):
        matched("F[nope].C.t='x'", {"s": fx1})


def test_lazy_sentence_iteration_sees_earlier_mutations():
    d = doc("(S (X a))", "(S (X b))")
    gen = iter_sentence_matches(parse_query("C.t='X'"), d)
    _, first = next(gen)
    d.sentences[1].root.children[0].tag = "Y"
    _, second = next(gen)
    assert len(first) == 1 and second == []


def test_determinism(fx1):
    text = "P[*].t/p~'N*' -> M[p]"
    once = [(m.context.current.id, [n.id for n in m.context.bindings["p"]]) for m in run_query(parse_query(text), fx1)]
    again = [(m.context.current.id, [n.id for n in m.context.bindings["p"]]) for m in run_query(parse_query(text), fx1)]
    assert once == again and once


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_quantifier_duality(rng):
    check_quantifier_duality(rng)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_none_index_is_negated_any(rng):
    check_none_is_negated_any(rng)


def test_quantifier_duality_on_fixture(fx1):
    for axis in ("P", "N", "Pr", "Nx", "A", "D"):
        for tag in ("NP", "NN", "VP"):
            every = matched(f"{axis}[@].t='{tag}'", fx1)
            dual = matched(f"!({axis}[*].t!='{tag}')", fx1)
            assert every == dual
            assert matched(f"{axis}[*:0].t='{tag}'", fx1) == matched(f"!({axis}[*].t='{tag}')", fx1)

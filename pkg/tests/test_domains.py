import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from condwrites.domains import (
    CM_BOT, CM_TOP, ConstDomain, ConstMap, ConstPowersetDomain, OpsCounter,
    PowElem, Universe, UniverseTooLarge, cm_leq, cm_make, make_domain,
)
from condwrites.lang import Assign, Cmp, Lit, VarRef, parse_program

from conftest import (
    bf_exec_assign, bf_gamma, bf_states, random_cm, random_pw,
)

VARS = ("x", "y")
U2 = Universe.of({"x": (0, 1), "y": (0, 1)})


def all_cms():
    """Every constant map over VARS with values in {0,1}, plus bottom."""
    out = [CM_BOT]
    for keys in itertools.chain.from_iterable(
            itertools.combinations(VARS, k) for k in range(len(VARS) + 1)):
        for vals in itertools.product((0, 1), repeat=len(keys)):
            out.append(cm_make(dict(zip(keys, vals))))
    return out


ALL_CMS = all_cms()


def test_universe_basics():
    assert U2.var_order == ("x", "y")
    assert U2.size() == 4
    assert len(list(U2.states())) == 4
    with pytest.raises(UniverseTooLarge):
        list(Universe.of({"x": range(100)}, cap=10).states())
    with pytest.raises(ValueError):
        Universe.of({"x": ()})


# -- exhaustive lattice laws for the constant domain ---------------------------


def test_const_exhaustive_partial_order():
    dom = ConstDomain(VARS)
    for d in ALL_CMS:
        assert dom.leq(d, d)
    for d1, d2 in itertools.product(ALL_CMS, repeat=2):
        if dom.leq(d1, d2) and dom.leq(d2, d1):
            assert d1 == d2
        # order agrees with concretisation
        if dom.leq(d1, d2):
            assert bf_gamma(d1, U2) <= bf_gamma(d2, U2)
    for d1, d2, d3 in itertools.product(ALL_CMS, repeat=3):
        if dom.leq(d1, d2) and dom.leq(d2, d3):
            assert dom.leq(d1, d3)


def test_const_exhaustive_join_meet():
    dom = ConstDomain(VARS)
    for d1, d2 in itertools.product(ALL_CMS, repeat=2):
        j = dom.join(d1, d2)
        m = dom.meet(d1, d2)
        # join is the least upper bound within the finite element set
        assert dom.leq(d1, j) and dom.leq(d2, j)
        for ub in ALL_CMS:
            if dom.leq(d1, ub) and dom.leq(d2, ub):
                assert dom.leq(j, ub)
        # meet is the greatest lower bound
        assert dom.leq(m, d1) and dom.leq(m, d2)
        for lb in ALL_CMS:
            if dom.leq(lb, d1) and dom.leq(lb, d2):
                assert dom.leq(lb, m)
        # soundness w.r.t. sets of states; meet is exact for constant maps
        assert bf_gamma(j, U2) >= bf_gamma(d1, U2) | bf_gamma(d2, U2)
        assert bf_gamma(m, U2) == bf_gamma(d1, U2) & bf_gamma(d2, U2)
        # commutativity
        assert j == dom.join(d2, d1)
        assert m == dom.meet(d2, d1)


def test_const_exhaustive_havoc_axioms():
    dom = ConstDomain(VARS)
    subsets = [frozenset(s) for k in range(3)
               for s in itertools.combinations(VARS, k)]
    for d in ALL_CMS:
        assert dom.havoc(d, frozenset()) == d
        for v1 in subsets:
            h = dom.havoc(d, v1)
            assert dom.leq(d, h)  # extensive
            for v2 in subsets:
                assert dom.havoc(h, v2) == dom.havoc(d, v1 | v2)
            # concretisation includes every variation on the havocked vars
            g = bf_gamma(d, U2)
            gh = bf_gamma(h, U2)
            for s in g:
                for t in bf_states(U2):
                    if all(t[i] == s[i] or U2.var_order[i] in v1
                           for i in range(len(s))):
                        assert t in gh


def test_const_top_bot():
    dom = ConstDomain(VARS)
    assert dom.is_bot(dom.bot()) and not dom.is_bot(dom.top())
    assert bf_gamma(dom.bot(), U2) == set()
    assert bf_gamma(dom.top(), U2) == set(bf_states(U2))


# -- post and filter -------------------------------------------------------------


def test_post_examples():
    dom = ConstDomain(VARS)
    d = cm_make({"x": 1})
    a = Assign(1, ("y",), (VarRef("x"),))
    assert dom.post(a, d) == cm_make({"x": 1, "y": 1})
    # assigning an unknown expression drops the binding
    a2 = Assign(1, ("x",), (VarRef("y"),))
    assert dom.post(a2, d) == CM_TOP
    # simultaneous swap reads the pre-state
    swap = Assign(1, ("x", "y"), (VarRef("y"), VarRef("x")))
    d2 = cm_make({"x": 0, "y": 1})
    assert dom.post(swap, d2) == cm_make({"x": 1, "y": 0})
    assert dom.post(a, CM_BOT) == CM_BOT


def test_post_soundness_randomized():
    rng = random.Random(7)
    dom = ConstDomain(VARS)
    for _ in range(300):
        d = random_cm(rng, VARS)
        k = rng.randint(1, 2)
        targets = tuple(rng.sample(VARS, k))
        exprs = tuple(
            Lit(rng.choice((0, 1))) if rng.random() < 0.5
            else VarRef(rng.choice(VARS)) for _ in range(k))
        a = Assign(1, targets, exprs)
        post = dom.post(a, d)
        for s in bf_gamma(d, U2):
            assert bf_exec_assign(a, s, U2.var_order) in bf_gamma(post, U2)


def test_filter_examples():
    dom = ConstDomain(VARS)
    # an unbound variable compared for equality against a constant is bound
    assert dom.filter(Cmp("==", VarRef("x"), Lit(1)), CM_TOP) == cm_make({"x": 1})
    assert dom.filter(Cmp("==", Lit(0), VarRef("y")), CM_TOP) == cm_make({"y": 0})
    # decidable comparisons go to bottom or stay put
    d = cm_make({"x": 1})
    assert dom.filter(Cmp("!=", VarRef("x"), Lit(1)), d) == CM_BOT
    assert dom.filter(Cmp("<", VarRef("x"), Lit(5)), d) == d
    # undecidable ones are kept (sound no-op)
    assert dom.filter(Cmp("<", VarRef("y"), Lit(1)), d) == d


def test_filter_soundness_randomized():
    rng = random.Random(11)
    dom = ConstDomain(VARS)
    pool = [parse_program(f"vars x, y; pre {src}; thread T {{ skip; }}").pre
            for src in (
                "x == 0", "x != y", "x < y || y == 1", "!(x == 1) && y >= 0",
                "true", "false", "x <= 0 && !(y != 1)")]
    from condwrites.lang import eval_cond
    for _ in range(300):
        d = random_cm(rng, VARS)
        c = rng.choice(pool)
        f = dom.filter(c, d)
        kept = {s for s in bf_gamma(d, U2)
                if eval_cond(c, dict(zip(U2.var_order, s)))}
        assert kept <= bf_gamma(f, U2)
        assert bf_gamma(f, U2) <= bf_gamma(d, U2)


# -- powerset completion ----------------------------------------------------------


def pw_dom(max_disjuncts=64):
    return ConstPowersetDomain(VARS, max_disjuncts=max_disjuncts)


def test_pw_normalization():
    dom = pw_dom()
    a = cm_make({"x": 0})
    b = cm_make({"x": 0, "y": 1})
    d = dom.make([b, CM_BOT, a, a])
    # bottoms dropped, subsumed disjuncts dropped, duplicates collapsed
    assert d.disjuncts == (a,)
    assert dom.make([]) == dom.bot()
    assert dom.is_bot(dom.bot())
    assert dom.top().disjuncts == (CM_TOP,)


def test_pw_gamma_is_union():
    rng = random.Random(3)
    dom = pw_dom()
    for _ in range(200):
        ms = [random_cm(rng, VARS) for _ in range(rng.randint(0, 4))]
        d = dom.make(ms)
        expect = set()
        for m in ms:
            expect |= bf_gamma(m, U2)
        assert bf_gamma(d, U2) == expect


def test_pw_lattice_soundness_randomized():
    rng = random.Random(5)
    dom = pw_dom()
    for _ in range(400):
        d1 = random_pw(rng, dom)
        d2 = random_pw(rng, dom)
        j = dom.join(d1, d2)
        m = dom.meet(d1, d2)
        g1, g2 = bf_gamma(d1, U2), bf_gamma(d2, U2)
        assert bf_gamma(j, U2) == g1 | g2  # join is exact (set union)
        assert bf_gamma(m, U2) == g1 & g2  # meets of constant maps are exact
        if dom.leq(d1, d2):
            assert g1 <= g2
        assert dom.leq(d1, j) and dom.leq(d2, j)
        assert dom.leq(m, d1) and dom.leq(m, d2)
        # havoc axioms carry over
        drop = frozenset(rng.sample(VARS, rng.randint(0, 2)))
        assert dom.leq(d1, dom.havoc(d1, drop))
        assert dom.havoc(dom.havoc(d1, drop), drop) == dom.havoc(d1, drop)


def test_pw_disjunct_cap_collapses_to_flat_join():
    dom = pw_dom(max_disjuncts=2)
    ms = [cm_make({"x": 0, "y": 0}), cm_make({"x": 1, "y": 0}),
          cm_make({"x": 0, "y": 1})]
    d = dom.make(ms)
    # three incomparable disjuncts exceed the cap; they collapse to their join
    assert len(d.disjuncts) == 1
    collapsed = d.disjuncts[0]
    for m in ms:
        assert cm_leq(m, collapsed)


def test_pw_filter_keeps_disjunct_precision():
    dom = pw_dom()
    d = dom.make([cm_make({"x": 0}), cm_make({"x": 1, "y": 1})])
    f = dom.filter(Cmp("==", VarRef("x"), Lit(1)), d)
    assert f.disjuncts == (cm_make({"x": 1, "y": 1}),)


# -- shared bits ------------------------------------------------------------------


def test_ops_counter_counts_join_meet_only():
    ops = OpsCounter()
    dom = ConstDomain(VARS, ops)
    d = cm_make({"x": 1})
    dom.join(d, d)
    dom.meet(d, d)
    dom.havoc(d, frozenset({"x"}))
    dom.leq(d, d)
    assert ops.count == 2


def test_fmt():
    dom = ConstDomain(VARS)
    assert dom.fmt(CM_TOP) == "⊤" and dom.fmt(CM_TOP, ascii_only=True) == "top"
    assert dom.fmt(CM_BOT) == "⊥" and dom.fmt(CM_BOT, ascii_only=True) == "bot"
    assert dom.fmt(cm_make({"x": 3})) == "[x↦3]"
    assert dom.fmt(cm_make({"x": 3}), ascii_only=True) == "[x|->3]"
    pw = pw_dom()
    two = pw.make([cm_make({"x": 0}), cm_make({"y": 1})])
    assert pw.fmt(two) == "{[x↦0]; [y↦1]}"
    assert pw.fmt(pw.top()) == "⊤" and pw.fmt(pw.bot(), ascii_only=True) == "bot"


def test_make_domain():
    assert isinstance(make_domain("const", VARS), ConstDomain)
    assert isinstance(make_domain("const-powerset", VARS), ConstPowersetDomain)
    with pytest.raises(ValueError):
        make_domain("intervals", VARS)


@given(st.dictionaries(st.sampled_from(VARS), st.integers(0, 1)),
       st.dictionaries(st.sampled_from(VARS), st.integers(0, 1)))
def test_cm_join_associates_with_gamma(b1, b2):
    d1, d2 = cm_make(b1), cm_make(b2)
    dom = ConstDomain(VARS)
    assert bf_gamma(dom.join(d1, d2), U2) >= bf_gamma(d1, U2) | bf_gamma(d2, U2)
    assert dom.join(d1, dom.join(d2, d1)) == dom.join(dom.join(d1, d2), d1)

"""Shared test helpers: independent brute-force semantics used as ground
truth. Nothing here goes through the analyzer's lattice code paths beyond
constructing elements."""

from __future__ import annotations

import itertools
import random

from condwrites.domains import (
    CM_BOT, CM_TOP, ConstMap, ConstPowersetDomain, PowElem, Universe, cm_make,
)
from condwrites.lang import Assign, Lit, VarRef, eval_expr


# -- independent concretisation ------------------------------------------------


def bf_states(universe: Universe) -> list[tuple]:
    """All stores of the universe as value tuples in var order."""
    return [combo for combo in itertools.product(
        *(vals for _, vals in universe.values))]


def bf_gamma_cm(d: ConstMap, universe: Universe) -> set[tuple]:
    if d.bottom:
        return set()
    order = universe.var_order
    bind = d.as_dict()
    return {
        s for s in bf_states(universe)
        if all(bind.get(v) is None or s[i] == bind[v] for i, v in enumerate(order))
    }


def bf_gamma(d, universe: Universe) -> set[tuple]:
    if isinstance(d, PowElem):
        out: set[tuple] = set()
        for m in d.disjuncts:
            out |= bf_gamma_cm(m, universe)
        return out
    return bf_gamma_cm(d, universe)


def bf_gamma_x(i: dict, universe: Universe) -> set[tuple]:
    """Transition concretisation: (s1, s2) is admitted iff every variable
    that changes has s1 inside its write-condition."""
    order = universe.var_order
    gammas = {v: bf_gamma(i[v], universe) for v in order}
    states = bf_states(universe)
    pairs = set()
    for s1 in states:
        ok = {v for v in order if s1 in gammas[v]}
        for s2 in states:
            if all(s2[k] == s1[k] or order[k] in ok for k in range(len(order))):
                pairs.add((s1, s2))
    return pairs


def bf_step_image(pairs: set[tuple], states: set[tuple]) -> set[tuple]:
    return {s2 for (s1, s2) in pairs if s1 in states}


def bf_is_transitive(pairs: set[tuple]) -> bool:
    by_src: dict = {}
    for s1, s2 in pairs:
        by_src.setdefault(s1, set()).add(s2)
    for s1, s2 in pairs:
        for s3 in by_src.get(s2, ()):
            if (s1, s3) not in pairs:
                return False
    return True


# -- randomized element generators ----------------------------------------------


def random_cm(rng: random.Random, variables, values=(0, 1),
              p_bot: float = 0.05) -> ConstMap:
    if rng.random() < p_bot:
        return CM_BOT
    bind = {}
    for v in variables:
        r = rng.random()
        if r < 0.4:
            continue  # leave unconstrained
        bind[v] = rng.choice(values)
    return cm_make(bind)


def random_pw(rng: random.Random, dom: ConstPowersetDomain, values=(0, 1),
              max_disjuncts: int = 3) -> PowElem:
    k = rng.randint(0, max_disjuncts)
    return dom.make(random_cm(rng, dom.variables, values) for _ in range(k))


def random_elem(rng: random.Random, dom, values=(0, 1)):
    if isinstance(dom, ConstPowersetDomain):
        return random_pw(rng, dom, values)
    return random_cm(rng, dom.variables, values)


def random_interference(rng: random.Random, dom, values=(0, 1)) -> dict:
    return {v: random_elem(rng, dom, values) for v in dom.variables}


def random_assign(rng: random.Random, variables, values=(0, 1)) -> Assign:
    k = rng.randint(1, min(2, len(variables)))
    targets = tuple(rng.sample(list(variables), k))
    exprs = tuple(
        Lit(rng.choice(values)) if rng.random() < 0.6
        else VarRef(rng.choice(list(variables)))
        for _ in range(k)
    )
    return Assign(1, targets, exprs)


def bf_exec_assign(a: Assign, store: tuple, order) -> tuple:
    s = dict(zip(order, store))
    values = [eval_expr(e, s) for e in a.exprs]
    for v, n in zip(a.targets, values):
        s[v] = n
    return tuple(s[v] for v in order)

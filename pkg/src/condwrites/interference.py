"""Conditional-writes interference lattice over a pluggable state domain.

An interference element maps every program variable to the abstract state
under which it may be written (its write-condition). A transition changing
v is admitted only if its pre-state satisfies v's write-condition.
"""

from __future__ import annotations

import itertools
from typing import Iterator

from .lang import Assign
from .domains import StateDomain, Universe

# Interference elements are plain dicts var -> domain element, total over
# the domain's variable set. Treated as immutable.
Interference = dict


class FuelExhausted(Exception):
    pass


class CondWrites:
    def __init__(self, dom: StateDomain, fuel: int = 1000,
                 opt_b1: bool = True, opt_b2a: bool = True,
                 opt_b2b: bool = True):
        self.dom = dom
        self.fuel = fuel
        self.opt_b1 = opt_b1    # stabilise: skip supersets of a bottom meet
        self.opt_b2a = opt_b2a  # close: powerset over constrained vars only
        self.opt_b2b = opt_b2b  # close: skip strict supersets once havoc covers meet

    # -- lattice ------------------------------------------------------------

    def top(self) -> Interference:
        return {v: self.dom.top() for v in self.dom.variables}

    def bot(self) -> Interference:
        return {v: self.dom.bot() for v in self.dom.variables}

    def join(self, i1: Interference, i2: Interference) -> Interference:
        return {v: self.dom.join(i1[v], i2[v]) for v in self.dom.variables}

    def meet(self, i1: Interference, i2: Interference) -> Interference:
        return {v: self.dom.meet(i1[v], i2[v]) for v in self.dom.variables}

    def leq(self, i1: Interference, i2: Interference) -> bool:
        return all(self.dom.leq(i1[v], i2[v]) for v in self.dom.variables)

    def eq(self, i1: Interference, i2: Interference) -> bool:
        return self.leq(i1, i2) and self.leq(i2, i1)

    def gamma_x(self, i: Interference, u: Universe) -> set:
        """Exact transition-set concretisation over a finite universe."""
        order = u.var_order
        states = list(u.states())
        out = set()
        for s1 in states:
            allowed = {v for v in order if self.dom.contains(i[v], s1)}
            k1 = tuple(s1[v] for v in order)
            for s2 in states:
                if all(s2[v] == s1[v] or v in allowed for v in order):
                    out.add((k1, tuple(s2[v] for v in order)))
        return out

    def fmt(self, i: Interference, ascii_only: bool = False) -> str:
        arrow = "|->" if ascii_only else "↦"
        body = ", ".join(
            f"{v}{arrow}{self.dom.fmt(i[v], ascii_only)}" for v in self.dom.variables
        )
        return f"[{body}]"

    # -- interference application and derivation ------------------------------

    def _subsets(self, variables, max_card: int) -> Iterator[tuple[str, ...]]:
        # bottom-up, lexicographic within a cardinality: required by the
        # superset-skipping optimisations and keeps op counts reproducible
        for k in range(0, max_card + 1):
            yield from itertools.combinations(variables, k)

    def stabilise(self, i: Interference, d, n: int):
        """Weaken d to include every state reachable in one step of i.

        Transitions touching at most n variables are handled exactly; larger
        write sets are folded into a single coarse havoc over the variables
        occurring in any feasible (n+1)-set.
        """
        dom = self.dom
        variables = sorted(dom.variables)
        acc = d
        y_acc = dom.bot()
        y_vars: set[str] = set()
        blocked: list[frozenset[str]] = []
        for combo in self._subsets(variables, min(n + 1, len(variables))):
            vset = frozenset(combo)
            if self.opt_b1 and any(b <= vset for b in blocked):
                continue
            wc = dom.top()
            for v in combo:
                wc = dom.meet(wc, i[v])
            if dom.is_bot(wc):
                if self.opt_b1:
                    blocked.append(vset)
                continue
            m = dom.meet(d, wc)
            if len(combo) <= n:
                acc = dom.join(acc, dom.havoc(m, vset))
            elif not dom.is_bot(m):
                y_acc = dom.join(y_acc, m)
                y_vars |= vset
        if y_vars:
            acc = dom.join(acc, dom.havoc(y_acc, frozenset(y_vars)))
        return acc

    def stabilise_fix(self, i: Interference, d, n: int):
        """Least fixpoint of stabilise: closes d under any number of i-steps."""
        cur = d
        for _ in range(self.fuel):
            nxt = self.stabilise(i, cur, n)
            if self.dom.leq(nxt, cur):
                return nxt
            cur = nxt
        raise FuelExhausted(f"stabilise_fix did not converge in {self.fuel} steps")

    def transitions(self, d, a: Assign) -> Interference:
        """Interference induced by one assignment from pre-states in d."""
        out = self.bot()
        for v in a.targets:
            out[v] = d
        return out

    def close(self, i: Interference) -> Interference:
        """Weaken write-conditions until the concretisation is transitive."""
        cur = i
        for _ in range(self.fuel):
            nxt = {v: self._close_one(cur, v) for v in self.dom.variables}
            if self.leq(nxt, cur):
                return nxt
            cur = nxt
        raise FuelExhausted(f"close did not converge in {self.fuel} steps")

    def _close_one(self, i: Interference, v: str):
        dom = self.dom
        iv = i[v]
        if self.opt_b2a:
            candidates = sorted(
                u for u in dom.variables if dom.havoc(iv, frozenset((u,))) != iv
            )
        else:
            candidates = sorted(dom.variables)
        acc = iv  # empty-set term: havoc by nothing meets the empty meet (top)
        dominated: list[frozenset[str]] = []
        for combo in self._subsets(candidates, len(candidates)):
            if not combo:
                continue
            vset = frozenset(combo)
            if self.opt_b2b and any(d0 < vset for d0 in dominated):
                continue
            h = dom.havoc(iv, vset)
            m = dom.top()
            for u in combo:
                m = dom.meet(m, i[u])
            if self.opt_b2b and dom.leq(m, h):
                dominated.append(vset)
                acc = dom.join(acc, m)
            else:
                acc = dom.join(acc, dom.meet(h, m))
        return acc

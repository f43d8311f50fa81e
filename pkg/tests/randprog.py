"""Seeded random program generator producing finite-state concurrent
programs: every assignment writes a literal in {0,1} or copies another
variable, so exploration over the {0,1} universe never escapes."""

from __future__ import annotations

import random

from condwrites.lang import (
    Assign, BoolLit, Cmp, Ite, Lit, Program, Seq, Skip, Thread, VarRef, While,
)

VALUES = (0, 1)


class _Gen:
    def __init__(self, rng: random.Random, variables):
        self.rng = rng
        self.variables = list(variables)
        self.label = 0

    def fresh(self) -> int:
        self.label += 1
        return self.label

    def operand(self):
        if self.rng.random() < 0.5:
            return Lit(self.rng.choice(VALUES))
        return VarRef(self.rng.choice(self.variables))

    def guard(self) -> Cmp:
        op = self.rng.choice(("==", "!=", "<=", ">"))
        return Cmp(op, VarRef(self.rng.choice(self.variables)), self.operand())

    def assign(self) -> Assign:
        return Assign(self.fresh(), (self.rng.choice(self.variables),),
                      (self.operand(),))

    def stmt(self, budget: int, depth: int):
        r = self.rng.random()
        if depth > 0 and budget >= 2 and r < 0.25:
            label = self.fresh()
            body, used = self.body(budget - 1, depth - 1)
            return Ite(label, self.guard(), body, Skip(None)), used + 1
        if depth > 0 and budget >= 2 and r < 0.33:
            # loop whose guard a flag assignment can break: the body always
            # ends by writing a literal, so the state space stays finite
            label = self.fresh()
            body, used = self.body(budget - 1, depth - 1)
            return While(label, self.guard(), body), used + 1
        if r < 0.4:
            return Skip(self.fresh()), 1
        return self.assign(), 1

    def body(self, budget: int, depth: int):
        items = []
        used = 0
        n = self.rng.randint(1, max(1, budget))
        while used < n:
            st, k = self.stmt(n - used, depth)
            items.append(st)
            used += k
        if len(items) == 1:
            return items[0], used
        return Seq(tuple(items)), used


def random_program(seed: int) -> Program:
    rng = random.Random(seed)
    nvars = rng.randint(1, 3)
    variables = tuple("xyz"[:nvars])
    threads = []
    for tid in ("T0", "T1"):
        g = _Gen(rng, variables)
        body, _ = g.body(budget=6, depth=2)
        threads.append(Thread(tid, body, frozenset(variables)))
    pre = BoolLit(True)
    if rng.random() < 0.5:
        pre = Cmp("==", VarRef(rng.choice(variables)), Lit(0))
    return Program(variables=variables, threads=tuple(threads),
                   pre=pre, post=BoolLit(True))

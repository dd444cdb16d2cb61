"""Conflict-driven clause learning SAT solver.

Two-watched-literal propagation, first-UIP clause learning with
non-chronological backjumping, activity-based decisions, no restarts.
Assumptions are handled MiniSat-style as forced decisions, so a solver
instance can be reused incrementally: add clauses between solve() calls
(blocking clauses, new unrollings) and pass per-call assumption literals.

Given identical clauses, assumptions, and decision RNG state, the solver is
fully deterministic.
"""

from __future__ import annotations

from .bitblast import CnfFormula

_UNASSIGNED = 0


class Solver:
    def __init__(self, cnf: CnfFormula | None = None):
        self.cnf = cnf if cnf is not None else CnfFormula()
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: list[int] = []  # per-var: 0 unassigned, +1 true, -1 false
        self.level: list[int] = []
        self.reason: list[int | None] = []
        self.activity: list[float] = []
        self.var_inc = 1.0
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.unsat = False  # permanently unsat (conflict at level 0)
        self._synced_clauses = 0
        self._sync()

    # -- bookkeeping -------------------------------------------------------

    def _ensure_vars(self, n: int) -> None:
        while len(self.assign) <= n:
            self.assign.append(_UNASSIGNED)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            v = len(self.assign) - 1
            self.watches.setdefault(v, [])
            self.watches.setdefault(-v, [])

    def _sync(self) -> None:
        """Attach clauses added to the underlying CnfFormula since last sync."""
        self._ensure_vars(self.cnf.nvars)
        while self._synced_clauses < len(self.cnf.clauses):
            self._attach(list(self.cnf.clauses[self._synced_clauses]))
            self._synced_clauses += 1

    def add_clause(self, lits) -> None:
        lits = list(lits)
        self.cnf.add_clause(lits)
        self._ensure_vars(max(abs(l) for l in lits))
        self._attach(lits)
        self._synced_clauses = len(self.cnf.clauses)

    def _value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def _attach(self, lits: list[int]) -> None:
        if self.unsat:
            return
        self._backtrack(0)
        # Deduplicate; drop clauses with complementary literals.
        seen = dict.fromkeys(lits)
        lits = list(seen)
        if any(-l in seen for l in lits):
            return
        # Prefer non-false literals for the watch positions.
        lits.sort(key=lambda l: self._value(l) == -1)
        if self._value(lits[0]) == -1:
            self.unsat = True
            return
        if len(lits) == 1 or self._value(lits[1]) == -1:
            if self._value(lits[0]) == 0:
                self._enqueue(lits[0], None)
            if self._propagate() is not None:
                self.unsat = True
            if len(lits) == 1:
                return
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)

    def _enqueue(self, lit: int, reason: int | None) -> None:
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int | None:
        """Unit propagation; returns a conflicting clause index or None."""
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            ws = self.watches[-p]
            i = 0
            while i < len(ws):
                ci = ws[i]
                clause = self.clauses[ci]
                if clause[0] == -p:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._value(first) == 1:
                    i += 1
                    continue
                for k in range(2, len(clause)):
                    if self._value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches[clause[1]].append(ci)
                        ws[i] = ws[-1]
                        ws.pop()
                        break
                else:
                    if self._value(first) == -1:
                        return ci  # conflict
                    self._enqueue(first, ci)
                    i += 1
        return None

    def _backtrack(self, target_level: int) -> None:
        if len(self.trail_lim) <= target_level:
            return
        limit = self.trail_lim[target_level]
        for lit in self.trail[limit:]:
            v = abs(lit)
            self.assign[v] = _UNASSIGNED
            self.reason[v] = None
        del self.trail[limit:]
        del self.trail_lim[target_level:]
        self.qhead = min(self.qhead, len(self.trail))

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for i in range(len(self.activity)):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP learning: returns (learned clause, backjump level)."""
        cur_level = len(self.trail_lim)
        learnt = [0]  # slot 0 becomes the asserting literal
        seen = [False] * len(self.assign)
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        clause = self.clauses[confl]
        while True:
            for q in clause:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = abs(p)
            seen[v] = False
            counter -= 1
            if counter == 0:
                learnt[0] = -p
                break
            clause = self.clauses[self.reason[v]]
        if len(learnt) == 1:
            return learnt, 0
        # Watch a literal from the backjump level at position 1.
        max_i = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _learn(self, learnt: list[int]) -> None:
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
            return
        self.cnf.clauses.append(list(learnt))
        self._synced_clauses = len(self.cnf.clauses)
        ci = len(self.clauses)
        self.clauses.append(learnt)
        self.watches[learnt[0]].append(ci)
        self.watches[learnt[1]].append(ci)
        self._enqueue(learnt[0], ci)

    def _decide_var(self) -> int | None:
        best = None
        best_act = -1.0
        for v in range(2, len(self.assign)):  # var 1 is the constant-true pin
            if self.assign[v] == _UNASSIGNED and self.activity[v] > best_act:
                best = v
                best_act = self.activity[v]
        if best is None and self.assign[1] == _UNASSIGNED:
            return 1
        return best

    def solve(self, assumptions=(), decision_rng=None) -> list[bool] | None:
        """Return a full model (index by variable) or None for unsat.

        ``decision_rng`` randomizes decision polarity (an object with a
        ``bits(1)`` method); without it decisions assign False first.
        """
        self._sync()
        if self.unsat:
            return None
        self._backtrack(0)
        self.qhead = 0  # replay level-0 trail in case clauses were added
        assumptions = list(assumptions)
        while True:
            confl = self._propagate()
            if confl is not None:
                if not self.trail_lim:
                    self.unsat = True  # conflict below all decisions is permanent
                    return None
                learnt, bt_level = self._analyze(confl)
                # Never unwind below the assumption decisions.
                self._backtrack(bt_level)
                self._learn(learnt)
                self.var_inc /= 0.95
                continue
            if len(self.trail_lim) < len(assumptions):
                a = assumptions[len(self.trail_lim)]
                self._ensure_vars(abs(a))
                val = self._value(a)
                if val == -1:
                    self._backtrack(0)
                    return None  # unsat under assumptions
                self.trail_lim.append(len(self.trail))
                if val == 0:
                    self._enqueue(a, None)
                continue
            v = self._decide_var()
            if v is None:
                model = [False] * len(self.assign)
                for i in range(1, len(self.assign)):
                    model[i] = self.assign[i] == 1
                self._backtrack(0)
                return model
            if decision_rng is not None:
                lit = v if decision_rng.bits(1) else -v
            else:
                lit = -v
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)


def sat_solve(cnf: CnfFormula, assumptions=(), decision_rng=None) -> list[bool] | None:
    """One-shot solve of a CNF; returns a model list (index by var) or None."""
    return Solver(cnf).solve(assumptions, decision_rng)

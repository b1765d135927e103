"""Reference SMT-LIB 2 solver for quantifier-free linear Bool/Int/Real problems.

A self-contained, stdlib-only solver process: reads an SMT-LIB 2 script on
stdin, writes ``sat``/``unsat``/``unknown`` plus model / unsat-core blocks on
stdout.  It exists so the engine always has a conformant backend to launch as
a child process; any other SMT-LIB 2 solver (z3, cvc5, ...) can be swapped in
via configuration without touching the engine.

Scope: the fragment the compiler emits — ``declare-const`` over Bool/Int/Real,
linear arithmetic with exact rational constants, ``ite``, named assertions,
one ``check-sat`` followed by ``get-model`` / ``get-unsat-core``.

Decision procedure: DPLL over the Boolean skeleton (term-level ite terms are
eliminated via fresh definitional variables), interval-based theory
propagation for pruning, and at Boolean-complete leaves an exact rational
feasibility check via Gaussian elimination of equalities plus Fourier-Motzkin
elimination, followed by branch-and-bound for integer variables.  Unsat cores
over named assertions are minimized by deletion, so the reported core is a
minimal conflict set.  Everything is deterministic: identical scripts yield
identical replies.

Run as a script (``python refsolver.py``), as a module
(``python -m lexverify.refsolver``) or via the ``lexverify-solver`` entry
point.  The module is import-safe for in-process use by test oracles.
"""

from __future__ import annotations

import sys
from fractions import Fraction

VERSION = "lexverify-refsolver 0.1"

# search budgets; exceeding them yields "unknown", never a wrong verdict
MAX_NODES = 400_000
MAX_BRANCH_DEPTH = 64


# ---------------------------------------------------------------------------
# S-expression reader
# ---------------------------------------------------------------------------

def tokenize(text):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch
            i += 1
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            yield text[i:j + 1]
            i = j + 1
        elif ch == "|":
            j = i + 1
            while j < n and text[j] != "|":
                j += 1
            yield text[i + 1:j]
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in ' \t\r\n();"':
                j += 1
            yield text[i:j]
            i = j


def parse_sexprs(text):
    stack, top = [], []
    for tok in tokenize(text):
        if tok == "(":
            stack.append(top)
            top = []
        elif tok == ")":
            if not stack:
                raise SolverInputError("unbalanced ')'")
            done = top
            top = stack.pop()
            top.append(done)
        else:
            top.append(tok)
    if stack:
        raise SolverInputError("unbalanced '('")
    return top


class SolverInputError(Exception):
    pass


class Unsupported(SolverInputError):
    pass


# ---------------------------------------------------------------------------
# Linear expressions: dict var -> Fraction coefficient, plus constant
# ---------------------------------------------------------------------------

def lin_const(c):
    return ({}, Fraction(c))


def lin_var(name):
    return ({name: Fraction(1)}, Fraction(0))


def lin_add(a, b):
    coeffs = dict(a[0])
    for v, c in b[0].items():
        nc = coeffs.get(v, Fraction(0)) + c
        if nc:
            coeffs[v] = nc
        else:
            coeffs.pop(v, None)
    return (coeffs, a[1] + b[1])


def lin_scale(a, k):
    k = Fraction(k)
    if k == 0:
        return ({}, Fraction(0))
    return ({v: c * k for v, c in a[0].items()}, a[1] * k)


def lin_sub(a, b):
    return lin_add(a, lin_scale(b, -1))


def lin_eval(a, values):
    total = a[1]
    for v, c in a[0].items():
        total += c * values[v]
    return total


# Formula nodes: ("T",) ("F",) ("lit", atom_index, polarity)
#                ("and", children) ("or", children)
TRUE = ("T",)
FALSE = ("F",)


def f_and(children):
    out = []
    for c in children:
        if c == FALSE:
            return FALSE
        if c == TRUE:
            continue
        if c[0] == "and":
            out.extend(c[1])
        else:
            out.append(c)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def f_or(children):
    out = []
    for c in children:
        if c == TRUE:
            return TRUE
        if c == FALSE:
            continue
        if c[0] == "or":
            out.extend(c[1])
        else:
            out.append(c)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def f_not(f):
    if f == TRUE:
        return FALSE
    if f == FALSE:
        return TRUE
    if f[0] == "lit":
        return ("lit", f[1], not f[2])
    if f[0] == "and":
        return f_or(tuple(f_not(c) for c in f[1]))
    return f_and(tuple(f_not(c) for c in f[1]))


class Translator:
    """Turns parsed terms into formulas over an atom table."""

    def __init__(self):
        self.sorts = {}          # declared name -> "Bool" | "Int" | "Real"
        self.atoms = []          # index -> ("bv", name) | ("cmp", op, coeffs, const)
                                 #          | ("aux", n) Tseitin definition vars
        self.atom_index = {}
        self.fresh_count = 0
        self.aux_count = 0
        self.int_vars = set()
        self.cnf_cache = {}      # formula tree -> (root literal, clauses)

    def declare(self, name, sort):
        if sort not in ("Bool", "Int", "Real"):
            raise Unsupported(f"unsupported sort {sort}")
        self.sorts[name] = sort
        if sort == "Int":
            self.int_vars.add(name)

    def _atom(self, key):
        idx = self.atom_index.get(key)
        if idx is None:
            idx = len(self.atoms)
            self.atoms.append(key)
            self.atom_index[key] = idx
        return idx

    def bool_atom(self, name):
        return self._atom(("bv", name))

    def aux_atom(self):
        self.aux_count += 1
        return self._atom(("aux", self.aux_count))

    def cmp_atom(self, op, lin):
        """Normalize `lin op 0` and intern it; constants fold immediately."""
        coeffs, const = lin
        if not coeffs:
            if op == "<=":
                holds = const <= 0
            elif op == "<":
                holds = const < 0
            else:
                holds = const == 0
            return TRUE if holds else FALSE
        items = sorted(coeffs.items())
        scale = abs(items[0][1])
        items = [(v, c / scale) for v, c in items]
        const = const / scale
        if op == "=" and items[0][1] < 0:
            items = [(v, -c) for v, c in items]
            const = -const
        key = ("cmp", op, tuple(items), const)
        return ("lit", self._atom(key), True)

    # -- term translation -------------------------------------------------

    def term_sort(self, t):
        if isinstance(t, str):
            if t in ("true", "false"):
                return "Bool"
            if t in self.sorts:
                return self.sorts[t]
            if _is_numeral(t):
                return "Int"
            if _is_decimal(t):
                return "Real"
            raise SolverInputError(f"unknown symbol {t!r}")
        head = t[0]
        if head in ("and", "or", "not", "=>", "xor", "<", "<=", ">", ">=", "distinct"):
            return "Bool"
        if head == "=":
            return "Bool"
        if head == "ite":
            return self.term_sort(t[2])
        if head == "/":
            return "Real"
        if head in ("+", "-", "*"):
            sorts = {self.term_sort(a) for a in t[1:]}
            return "Real" if "Real" in sorts else "Int"
        if head == "!":
            return self.term_sort(t[1])
        raise Unsupported(f"unsupported term {head!r}")

    def to_lin(self, t, sides):
        """Linearize a numeric term; definitional side formulas for ite terms
        are appended to `sides`."""
        if isinstance(t, str):
            if _is_numeral(t):
                return lin_const(int(t))
            if _is_decimal(t):
                return lin_const(Fraction(t))
            if t in self.sorts:
                if self.sorts[t] == "Bool":
                    raise SolverInputError(f"boolean {t!r} in numeric position")
                return lin_var(t)
            raise SolverInputError(f"unknown symbol {t!r}")
        head = t[0]
        if head == "+":
            out = lin_const(0)
            for a in t[1:]:
                out = lin_add(out, self.to_lin(a, sides))
            return out
        if head == "-":
            if len(t) == 2:
                return lin_scale(self.to_lin(t[1], sides), -1)
            out = self.to_lin(t[1], sides)
            for a in t[2:]:
                out = lin_sub(out, self.to_lin(a, sides))
            return out
        if head == "*":
            parts = [self.to_lin(a, sides) for a in t[1:]]
            consts = [p for p in parts if not p[0]]
            lins = [p for p in parts if p[0]]
            if len(lins) > 1:
                raise Unsupported("nonlinear product")
            k = Fraction(1)
            for p in consts:
                k *= p[1]
            return lin_scale(lins[0], k) if lins else lin_const(k)
        if head == "/":
            num = self.to_lin(t[1], sides)
            den = self.to_lin(t[2], sides)
            if den[0]:
                raise Unsupported("nonconstant denominator")
            if den[1] == 0:
                raise SolverInputError("division by zero")
            return lin_scale(num, Fraction(1) / den[1])
        if head == "ite":
            cond = self.to_formula(t[1])
            then = self.to_lin(t[2], sides)
            other = self.to_lin(t[3], sides)
            name = f".ite{self.fresh_count}"
            self.fresh_count += 1
            branch_sort = self.term_sort(t[2])
            self.sorts[name] = branch_sort
            if branch_sort == "Int":
                self.int_vars.add(name)
            v = lin_var(name)
            sides.append(f_or((f_not(cond), self.cmp_atom("=", lin_sub(v, then)))))
            sides.append(f_or((cond, self.cmp_atom("=", lin_sub(v, other)))))
            if not then[0] and not other[0]:
                lo, hi = sorted((then[1], other[1]))
                sides.append(self.cmp_atom("<=", lin_sub(lin_const(lo), v)))
                sides.append(self.cmp_atom("<=", lin_sub(v, lin_const(hi))))
            return v
        raise Unsupported(f"unsupported numeric operator {head!r}")

    # -- formula translation ----------------------------------------------

    def to_formula(self, t):
        if isinstance(t, str):
            if t == "true":
                return TRUE
            if t == "false":
                return FALSE
            if self.sorts.get(t) == "Bool":
                return ("lit", self.bool_atom(t), True)
            raise SolverInputError(f"expected boolean symbol, got {t!r}")
        head = t[0]
        if head == "!":
            return self.to_formula(t[1])
        if head == "not":
            return f_not(self.to_formula(t[1]))
        if head == "and":
            return f_and(tuple(self.to_formula(a) for a in t[1:]))
        if head == "or":
            return f_or(tuple(self.to_formula(a) for a in t[1:]))
        if head == "=>":
            out = self.to_formula(t[-1])
            for a in reversed(t[1:-1]):
                out = f_or((f_not(self.to_formula(a)), out))
            return out
        if head == "xor":
            a, b = self.to_formula(t[1]), self.to_formula(t[2])
            return f_or((f_and((a, f_not(b))), f_and((f_not(a), b))))
        if head == "ite":
            c = self.to_formula(t[1])
            return f_or((f_and((c, self.to_formula(t[2]))),
                         f_and((f_not(c), self.to_formula(t[3])))))
        if head in ("=", "distinct"):
            if len(t) != 3:
                raise Unsupported(f"{head} supported with two arguments only")
            if self.term_sort(t[1]) == "Bool" or self.term_sort(t[2]) == "Bool":
                a, b = self.to_formula(t[1]), self.to_formula(t[2])
                iff = f_or((f_and((a, b)), f_and((f_not(a), f_not(b)))))
                return iff if head == "=" else f_not(iff)
            sides = []
            lin = lin_sub(self.to_lin(t[1], sides), self.to_lin(t[2], sides))
            atom = self.cmp_atom("=", lin)
            atom = atom if head == "=" else f_not(atom)
            return f_and((*sides, atom))
        if head in ("<", "<=", ">", ">="):
            if len(t) != 3:
                raise Unsupported("chained comparisons unsupported")
            sides = []
            a = self.to_lin(t[1], sides)
            b = self.to_lin(t[2], sides)
            if head == "<":
                atom = self.cmp_atom("<", lin_sub(a, b))
            elif head == "<=":
                atom = self.cmp_atom("<=", lin_sub(a, b))
            elif head == ">":
                atom = self.cmp_atom("<", lin_sub(b, a))
            else:
                atom = self.cmp_atom("<=", lin_sub(b, a))
            return f_and((*sides, atom))
        raise Unsupported(f"unsupported operator {head!r}")


def _is_numeral(s):
    return s.isdigit() or (s.startswith("-") and s[1:].isdigit())


def _is_decimal(s):
    body = s[1:] if s.startswith("-") else s
    if "." not in body:
        return False
    a, _, b = body.partition(".")
    return a.isdigit() and b.isdigit()


# ---------------------------------------------------------------------------
# CDCL(T) search
# ---------------------------------------------------------------------------

MAX_CONFLICTS = 40_000
MAX_LEMMA_SIZE = 30


class BudgetExceeded(Exception):
    pass


class Budget:
    def __init__(self, conflicts=MAX_CONFLICTS):
        self.conflicts = conflicts

    def spend(self, n=1):
        self.conflicts -= n
        if self.conflicts <= 0:
            raise BudgetExceeded()


NEG_INF = ("-inf",)
POS_INF = ("+inf",)


# encoded literals: atom * 2 for the positive phase, atom * 2 + 1 for negative
def _lit(atom, positive):
    return atom * 2 + (0 if positive else 1)


def _lit_atom(lit):
    return lit >> 1


def _neg(lit):
    return lit ^ 1


class _Clause:
    __slots__ = ("lits", "origin")

    def __init__(self, lits, origin):
        self.lits = lits      # positions 0 and 1 are the watched literals
        self.origin = origin  # frozenset of assertion indices


class Solver:
    """CDCL over the Tseitin clausification with exact linear arithmetic as
    the theory oracle.

    After every propagation fixpoint the assigned numeric literals are
    checked for rational/integer feasibility (Gaussian elimination plus
    Fourier-Motzkin with branch-and-bound for integers, memoized across
    solves).  An infeasible set is deletion-minimized and learned as a
    blocking clause; being a theory tautology it is also kept for later
    solves over the same atom table.  Propositional conflicts go through
    standard first-UIP analysis with backjumping, activity-driven decisions,
    phase saving and geometric restarts.  Clause origins are tracked through
    resolution, so an unsatisfiable run yields a conservative conflict seed
    over the input assertions, which is what makes unsat-core minimization
    start near the answer.
    """

    def __init__(self, translator, theory_cache=None, lemmas=None):
        self.tr = translator
        self.cache = theory_cache   # frozenset(lits) -> (status, values)
        self.lemmas = lemmas if lemmas is not None else []  # (key, lit tuple)
        self._lemma_keys = {key for key, _ in self.lemmas}
        self.activity = {}
        self.phase = {}
        self.act_inc = 1.0

    # -- clause database ------------------------------------------------------

    def _init_search(self):
        self.clauses: list[_Clause] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, int | None] = {}
        self.trail: list[int] = []
        self.lim: list[int] = []
        self.qhead = 0
        self.atoms_in_use: set[int] = set()
        self.pending_units: list[int] = []
        self.empty_origin: frozenset | None = None
        self.theory_values: dict = {}
        self._cmp_checked = 0

    def _cnf(self, f):
        """Tseitin clauses for an NNF formula tree, cached on the tree."""
        cached = self.tr.cnf_cache.get(f)
        if cached is not None:
            return cached
        clauses = []

        def walk(node):
            if node[0] == "lit":
                return _lit(node[1], node[2])
            child = [walk(c) for c in node[1]]
            aux = self.tr.aux_atom()
            a = _lit(aux, True)
            if node[0] == "and":
                for cl in child:
                    clauses.append((_neg(a), cl))
                clauses.append(tuple([a] + [_neg(cl) for cl in child]))
            else:
                clauses.append(tuple([_neg(a)] + child))
                for cl in child:
                    clauses.append((a, _neg(cl)))
            return a

        if f == TRUE:
            result = (None, ())
        elif f == FALSE:
            result = (False, ())
        else:
            root = walk(f)
            result = (root, tuple(clauses))
        self.tr.cnf_cache[f] = result
        return result

    def _add_clause(self, lits, origin):
        """Attach a clause; returns its index, or None when trivially true."""
        out = []
        for lit in lits:
            if _neg(lit) in out:
                return None  # tautology
            if lit not in out:
                out.append(lit)
        cl = _Clause(out, origin)
        ci = len(self.clauses)
        self.clauses.append(cl)
        for lit in out:
            self.atoms_in_use.add(_lit_atom(lit))
        if len(out) == 1:
            self.pending_units.append(ci)
        else:
            self.watches.setdefault(out[0], []).append(ci)
            self.watches.setdefault(out[1], []).append(ci)
        return ci

    def _add_formula(self, f, origin):
        root, clauses = self._cnf(f)
        if root is None:
            return
        if root is False:
            if self.empty_origin is None:
                self.empty_origin = origin
            return
        for cl in clauses:
            self._add_clause(list(cl), origin)
        self._add_clause([root], origin)

    # -- assignment and propagation ---------------------------------------------

    def _value(self, lit):
        v = self.assign.get(_lit_atom(lit))
        if v is None:
            return None
        return v == (not lit & 1)

    def _enqueue(self, lit, reason_ci):
        atom = _lit_atom(lit)
        self.assign[atom] = not lit & 1
        self.level[atom] = len(self.lim)
        self.reason[atom] = reason_ci
        self.trail.append(lit)

    def _propagate(self):
        """Unit propagation with two watched literals; returns a conflicting
        clause index or None."""
        while self.qhead < len(self.trail):
            false_lit = _neg(self.trail[self.qhead])
            self.qhead += 1
            ws = self.watches.pop(false_lit, [])
            keep = []
            conflict = None
            while ws:
                ci = ws.pop()
                cl = self.clauses[ci].lits
                if cl[0] == false_lit:
                    cl[0], cl[1] = cl[1], cl[0]
                first = cl[0]
                if self._value(first) is True:
                    keep.append(ci)
                    continue
                for k in range(2, len(cl)):
                    if self._value(cl[k]) is not False:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches.setdefault(cl[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if self._value(first) is False:
                        keep.extend(ws)
                        conflict = ci
                        break
                    self._enqueue(first, ci)
            if keep:
                self.watches[false_lit] = keep
            if conflict is not None:
                return conflict
        return None

    def _backjump(self, target_level):
        limit = self.lim[target_level]
        for lit in self.trail[limit:]:
            atom = _lit_atom(lit)
            self.phase[atom] = self.assign[atom]
            del self.assign[atom]
            del self.level[atom]
            del self.reason[atom]
        del self.trail[limit:]
        del self.lim[target_level:]
        self.qhead = min(self.qhead, len(self.trail))
        self._cmp_checked = 0

    # -- theory integration --------------------------------------------------------

    def _rows_from_lits(self, lits):
        """Rows tagged with the index of the literal they came from, so an
        infeasibility proof names its sources."""
        rows, diseqs = [], []
        for i, (idx, val) in enumerate(lits):
            _, op, coeffs, const = self.tr.atoms[idx]
            src = frozenset((i,))
            if val:
                rows.append((op, dict(coeffs), const, src))
            elif op == "<=":
                rows.append(("<", {v: -c for v, c in coeffs}, -const, src))
            elif op == "<":
                rows.append(("<=", {v: -c for v, c in coeffs}, -const, src))
            else:
                diseqs.append((dict(coeffs), const, src))
        return rows, diseqs

    def _lits_check(self, lits):
        """Cached theory feasibility of an (atom, value) literal set.

        Returns (status, values, conflict) where conflict is the subset of
        `lits` named by the infeasibility proof (Fourier-Motzkin combination
        provenance), available when status is "unsat".
        """
        key = frozenset(lits)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit
        rows, diseqs = self._rows_from_lits(lits)
        normalized, bad_src = self._normalize_int_rows(rows)
        if normalized is None:
            result = ("unsat", None, tuple(lits[i] for i in sorted(bad_src)))
        else:
            status, values, src = self._feasible(normalized, diseqs, _TheoryBudget(), 0)
            conflict = None
            if status == "unsat":
                conflict = tuple(lits[i] for i in sorted(src))
            result = (status, values, conflict)
        if self.cache is not None and result[0] != "unknown":
            self.cache[key] = result
        return result

    def _theory_conflict(self, final=False):
        """Check the assigned numeric literals; on infeasibility learn the
        proof's blocking clause and return its index."""
        lits = [(a, self.assign[a]) for a in self.assign
                if self.tr.atoms[a][0] == "cmp"]
        if len(lits) == self._cmp_checked:
            return None
        self._cmp_checked = len(lits)
        if not lits:
            return None
        status, values, conflict = self._lits_check(lits)
        if status == "unknown":
            raise BudgetExceeded()
        if status == "sat":
            self.theory_values = values or {}
            return None
        core = conflict or tuple(lits)
        clause = [_lit(a, not v) for a, v in core]
        key = frozenset(core)
        if key not in self._lemma_keys and len(core) <= MAX_LEMMA_SIZE:
            self._lemma_keys.add(key)
            self.lemmas.append((key, tuple(clause)))
        for a, _ in core:
            self.activity[a] = self.activity.get(a, 0.0) + self.act_inc
        # the learned clause is fully false under the current assignment
        return self._add_clause(clause, frozenset())

    # -- conflict analysis ------------------------------------------------------

    def _analyze(self, ci):
        """First-UIP learning.  Returns (learned lits, backjump level,
        origins union) or (None, None, origins) for a level-0 conflict."""
        origins = set(self.clauses[ci].origin)
        conflict_levels = [self.level[_lit_atom(l)] for l in self.clauses[ci].lits]
        cur = len(self.lim)
        if cur == 0 or not conflict_levels or max(conflict_levels) == 0:
            return None, None, self._origins_closure(ci)
        top = max(conflict_levels)
        if top < cur:
            self._backjump(top)
            cur = top

        seen: set[int] = set()
        learned: list[int] = []
        counter = 0
        idx = len(self.trail) - 1
        skip_atom = None
        c = ci
        while True:
            clause = self.clauses[c]
            origins |= clause.origin
            for lit in clause.lits:
                a = _lit_atom(lit)
                if a == skip_atom or a in seen:
                    continue
                lv = self.level.get(a, 0)
                if lv == 0:
                    continue
                seen.add(a)
                self.activity[a] = self.activity.get(a, 0.0) + self.act_inc
                if lv == cur:
                    counter += 1
                else:
                    learned.append(_lit(a, not self.assign[a]))
            while _lit_atom(self.trail[idx]) not in seen:
                idx -= 1
            plit = self.trail[idx]
            pa = _lit_atom(plit)
            seen.discard(pa)
            counter -= 1
            if counter <= 0:
                uip = _neg(plit)
                break
            c = self.reason[pa]
            skip_atom = pa
            idx -= 1
        learned_clause = [uip] + learned
        back = max((self.level[_lit_atom(l)] for l in learned), default=0)
        return learned_clause, back, frozenset(origins)

    def _origins_closure(self, ci):
        out: set = set()
        stack = [ci]
        seen_clauses: set[int] = set()
        while stack:
            c = stack.pop()
            if c is None or c in seen_clauses:
                continue
            seen_clauses.add(c)
            out |= self.clauses[c].origin
            for lit in self.clauses[c].lits:
                r = self.reason.get(_lit_atom(lit))
                if r is not None:
                    stack.append(r)
        return frozenset(out)

    # -- main loop ------------------------------------------------------------------

    def solve(self, formulas, origins=None, max_conflicts=MAX_CONFLICTS):
        """Decide the conjunction of `formulas`.

        Returns ("sat", model), ("unknown", None), or ("unsat", seed) where
        seed is a conservative conflict set over the `origins` tags: the
        non-seed formulas can be dropped with the system staying unsat.
        """
        if origins is None:
            origins = list(range(len(formulas)))
        self._init_search()
        for f, origin in zip(formulas, origins):
            self._add_formula(f, frozenset((origin,)))
        if self.empty_origin is not None:
            return "unsat", self.empty_origin
        for _, lits in self.lemmas:
            self._add_clause(list(lits), frozenset())
        try:
            return self._search(Budget(max_conflicts))
        except BudgetExceeded:
            return "unknown", None

    def _search(self, budget):
        for ci in self.pending_units:
            lit = self.clauses[ci].lits[0]
            if self._value(lit) is False:
                return "unsat", self._origins_closure(ci)
            if self._value(lit) is None:
                self._enqueue(lit, ci)
        self.pending_units = []

        restart_limit = 120
        conflicts_since_restart = 0
        while True:
            conflict = self._propagate()
            if conflict is None:
                conflict = self._theory_conflict()
            if conflict is None:
                if conflicts_since_restart >= restart_limit and self.lim:
                    conflicts_since_restart = 0
                    restart_limit = int(restart_limit * 1.5)
                    self._backjump(0)
                    continue
                decision = self._pick_decision()
                if decision is None:
                    conflict = self._theory_conflict(final=True)
                    if conflict is None:
                        return "sat", self._build_model()
                else:
                    self.lim.append(len(self.trail))
                    self._enqueue(decision, None)
                    continue

            budget.spend()
            conflicts_since_restart += 1
            self.act_inc *= 1.05
            if self.act_inc > 1e100:
                for a in self.activity:
                    self.activity[a] /= 1e100
                self.act_inc = 1.0
            learned, back, origins = self._analyze(conflict)
            if learned is None:
                return "unsat", origins
            self._backjump(back)
            # order so positions 0/1 are the asserting and highest-level lits
            if len(learned) > 2:
                rest = sorted(learned[1:],
                              key=lambda l: -self.level.get(_lit_atom(l), 0))
                learned = [learned[0]] + rest
            ci = self._add_clause(learned, origins)
            if ci is not None and len(self.clauses[ci].lits) == 1:
                self.pending_units = []
                if self._value(learned[0]) is None:
                    self._enqueue(learned[0], ci)
            elif ci is not None:
                self._enqueue(learned[0], ci)

    def _pick_decision(self):
        """Highest-activity unassigned literal among unsatisfied clauses;
        None when every clause is satisfied (don't-care atoms stay free)."""
        best = None
        best_key = None
        for cl in self.clauses:
            sat = False
            cands = []
            for lit in cl.lits:
                v = self._value(lit)
                if v is True:
                    sat = True
                    break
                if v is None:
                    cands.append(lit)
            if sat:
                continue
            for lit in cands:
                a = _lit_atom(lit)
                key = (self.activity.get(a, 0.0), -a)
                if best_key is None or key > best_key:
                    best, best_key = lit, key
        if best is None:
            return None
        a = _lit_atom(best)
        # saved phase first, else the polarity that satisfies the clause
        return _lit(a, self.phase.get(a, not best & 1))

    def _build_model(self):
        model = {}
        for name, sort in self.tr.sorts.items():
            if name.startswith(".") or name.startswith("!"):
                continue
            if sort == "Bool":
                idx = self.tr.atom_index.get(("bv", name))
                model[name] = bool(self.assign.get(idx, False)) if idx is not None else False
            else:
                model[name] = self.theory_values.get(name, Fraction(0))
        return model

    # -- theory internals (exact rational arithmetic) ----------------------------
    def _normalize_int_rows(self, rows):
        """Scale integer-only rows to integer coefficients, apply the GCD
        divisibility test to equalities and floor-tighten inequalities.
        Returns (rows, None), or (None, src) when a row is integer-infeasible
        on its own."""
        from math import gcd

        out = []
        for op, coeffs, const, src in rows:
            if not coeffs or not all(v in self.tr.int_vars for v in coeffs):
                out.append((op, coeffs, const, src))
                continue
            scale = 1
            for c in coeffs.values():
                scale = scale * c.denominator // gcd(scale, c.denominator)
            ic = {v: c * scale for v, c in coeffs.items()}
            k = const * scale
            g = 0
            for c in ic.values():
                g = gcd(g, abs(c.numerator))
            if op == "=":
                if k.denominator != 1 or k.numerator % g != 0:
                    return None, src
                out.append((op, {v: c / g for v, c in ic.items()}, k / g, src))
                continue
            # sum(ic/g * x) op -k/g with integral LHS
            t = -k / g
            if op == "<":
                bound = t.numerator // t.denominator  # floor
                if t.denominator == 1:
                    bound -= 1
            else:
                bound = t.numerator // t.denominator
            out.append(("<=", {v: c / g for v, c in ic.items()}, Fraction(-bound), src))
        return out, None

    def _feasible(self, rows, diseqs, budget, depth):
        """Exact feasibility of `rows` (pre-normalized) plus disequalities.

        Disequalities split lazily: the row system is solved first and only a
        disequality the sample point actually violates causes a case split,
        so they cost nothing in the common case.

        Returns (status, values, src): a sample point on "sat", or on
        "unsat" the union of source tags of the rows the refutation used.
        """
        budget.spend()
        if depth > MAX_BRANCH_DEPTH:
            raise BudgetExceeded()
        status, values, src = self._solve_rows(rows, budget, depth)
        if status != "sat":
            return status, None, src
        violated = None
        for d in diseqs:
            coeffs, const, _ = d
            total = const
            for v, c in coeffs.items():
                total += c * values.get(v, Fraction(0))
            if total == 0:
                violated = d
                break
        if violated is None:
            return "sat", values, None
        coeffs, const, dsrc = violated
        rest = [d for d in diseqs if d is not violated]
        all_int = all(v in self.tr.int_vars for v in coeffs)
        integral = all_int and all(c.denominator == 1 for c in coeffs.values()) \
            and Fraction(const).denominator == 1
        if integral:
            branches = [("<=", {v: c for v, c in coeffs.items()}, const + 1, dsrc),
                        ("<=", {v: -c for v, c in coeffs.items()}, -const + 1, dsrc)]
        else:
            branches = [("<", dict(coeffs), const, dsrc),
                        ("<", {v: -c for v, c in coeffs.items()}, -const, dsrc)]
        conflict_src = frozenset()
        for br in branches:
            extra, bad = self._normalize_int_rows([br])
            if extra is None:
                conflict_src |= bad
                continue
            status, values, src = self._feasible(rows + extra, rest, budget, depth + 1)
            if status == "sat":
                return status, values, None
            if status == "unknown":
                return "unknown", None, None
            conflict_src |= src
        return "unsat", None, conflict_src

    def _solve_rows(self, rows, budget, depth):
        """Gaussian elimination, Fourier-Motzkin, sample construction and
        integer branch-and-bound over a row system without disequalities."""
        budget.spend()
        if depth > MAX_BRANCH_DEPTH:
            raise BudgetExceeded()

        # Gaussian elimination of equalities
        work = [(op, dict(coeffs), Fraction(const), src) for op, coeffs, const, src in rows]
        subst = []  # (var, coeffs, const): var = expr
        while True:
            eq_idx = next((i for i, r in enumerate(work) if r[0] == "=" and r[1]), None)
            if eq_idx is None:
                break
            _, coeffs, const, esrc = work.pop(eq_idx)

            # pivot preference: real vars first (no integrality to respect),
            # then unit-coefficient int vars, then any int var
            def _pivot_rank(v):
                if v not in self.tr.int_vars:
                    return (0, v)
                return (1 if abs(coeffs[v]) == 1 else 2, v)

            var = min(coeffs, key=_pivot_rank)
            c = coeffs.pop(var)
            expr_coeffs = {v: -k / c for v, k in coeffs.items()}
            expr_const = -const / c
            subst.append((var, expr_coeffs, expr_const))
            next_work = []
            for op, rc, rk, rsrc in work:
                if var in rc:
                    f = rc.pop(var)
                    for v, k in expr_coeffs.items():
                        nk = rc.get(v, Fraction(0)) + f * k
                        if nk:
                            rc[v] = nk
                        else:
                            rc.pop(v, None)
                    rk = rk + f * expr_const
                    rsrc = rsrc | esrc
                next_work.append((op, rc, rk, rsrc))
            work = next_work

        for op, coeffs, const, src in work:
            if not coeffs:
                if op == "=" and const != 0:
                    return "unsat", None, src
                if op == "<=" and const > 0:
                    return "unsat", None, src
                if op == "<" and const >= 0:
                    return "unsat", None, src
        ineqs = [r for r in work if r[1]]

        # Fourier-Motzkin elimination; combinations union their sources
        stages = []
        current = ineqs
        while True:
            vars_here = sorted({v for _, c, _, _ in current for v in c})
            if not vars_here:
                break
            best, best_cost = None, None
            for v in vars_here:
                pos = sum(1 for _, c, _, _ in current if c.get(v, 0) > 0)
                neg = sum(1 for _, c, _, _ in current if c.get(v, 0) < 0)
                cost = pos * neg
                if best_cost is None or cost < best_cost:
                    best, best_cost = v, cost
            v = best
            with_v = [r for r in current if v in r[1]]
            without = [r for r in current if v not in r[1]]
            uppers = [r for r in with_v if r[1][v] > 0]   # v <= ...
            lowers = [r for r in with_v if r[1][v] < 0]   # v >= ...
            stages.append((v, with_v))
            combined = without
            for u_op, u_c, u_k, u_src in uppers:
                for l_op, l_c, l_k, l_src in lowers:
                    cu, cl = u_c[v], -l_c[v]
                    nc = {}
                    for w, k in u_c.items():
                        if w != v:
                            nc[w] = nc.get(w, Fraction(0)) + k * cl
                    for w, k in l_c.items():
                        if w != v:
                            nk = nc.get(w, Fraction(0)) + k * cu
                            if nk:
                                nc[w] = nk
                            else:
                                nc.pop(w, None)
                    nc = {w: k for w, k in nc.items() if k}
                    nk = u_k * cl + l_k * cu
                    op = "<" if (u_op == "<" or l_op == "<") else "<="
                    nsrc = u_src | l_src
                    if not nc:
                        if op == "<=" and nk > 0:
                            return "unsat", None, nsrc
                        if op == "<" and nk >= 0:
                            return "unsat", None, nsrc
                    else:
                        combined.append((op, nc, nk, nsrc))
            budget.spend()
            current = combined

        # feasible over the rationals; construct a sample point
        values = {}
        for v, cons in reversed(stages):
            lo = hi = None
            lo_open = hi_open = False
            for op, coeffs, const, _ in cons:
                c = coeffs[v]
                rest = const
                for w, k in coeffs.items():
                    if w != v:
                        # vars that vanished in combination are unconstrained
                        rest += k * values.setdefault(w, Fraction(0))
                bound = -rest / c
                if c > 0:
                    if hi is None or bound < hi or (bound == hi and op == "<"):
                        hi, hi_open = bound, op == "<"
                else:
                    if lo is None or bound > lo or (bound == lo and op == "<"):
                        lo, lo_open = bound, op == "<"
            values[v] = _pick_value(lo, lo_open, hi, hi_open)
        for v, coeffs, const in reversed(subst):
            total = const
            for w, k in coeffs.items():
                total += k * values.get(w, Fraction(0))
            values[v] = total

        # branch and bound on fractional integer variables; the two bound
        # rows form an integer tautology so they carry no sources
        for v in sorted(values):
            if v in self.tr.int_vars and values[v].denominator != 1:
                fl = values[v].numerator // values[v].denominator
                conflict_src = frozenset()
                for extra in (("<=", {v: Fraction(1)}, Fraction(-fl), frozenset()),
                              ("<=", {v: Fraction(-1)}, Fraction(fl + 1), frozenset())):
                    status, model, src = self._solve_rows(rows + [extra], budget, depth + 1)
                    if status == "sat":
                        return status, model, None
                    if status == "unknown":
                        return "unknown", None, None
                    conflict_src |= src
                return "unsat", None, conflict_src
        return "sat", values, None

    def check_literals(self, literal_rows, budget):
        """Feasibility entry point for an explicit row set (tests/tools);
        rows are (op, coeffs, const) without provenance."""
        tagged = [(op, coeffs, const, frozenset((i,)))
                  for i, (op, coeffs, const) in enumerate(literal_rows)]
        normalized, bad = self._normalize_int_rows(tagged)
        if normalized is None:
            return "unsat", None
        status, values, _ = self._feasible(normalized, [], budget, 0)
        return status, values

    # -- main search ------------------------------------------------------


def _pick_value(lo, lo_open, hi, hi_open):
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        cand = Fraction(hi.numerator // hi.denominator)  # floor
        if cand == hi and hi_open:
            cand -= 1
        return cand if cand <= hi else hi - 1
    if hi is None:
        cand = Fraction(-(-lo.numerator // lo.denominator))  # ceil
        if cand == lo and lo_open:
            cand += 1
        return cand
    cand = Fraction(-(-lo.numerator // lo.denominator))
    if cand == lo and lo_open:
        cand += 1
    if cand <= hi and not (cand == hi and hi_open):
        return cand
    return (lo + hi) / 2


class _TheoryBudget:
    """Step limiter for a single theory query."""

    def __init__(self, steps=30_000):
        self.steps = steps

    def spend(self, n=1):
        self.steps -= n
        if self.steps <= 0:
            raise BudgetExceeded()


# ---------------------------------------------------------------------------
# Command interpreter
# ---------------------------------------------------------------------------

class Session:
    def __init__(self):
        self.tr = Translator()
        self.assertions = []        # (name | None, formula)
        self.produce_cores = False
        self.last_status = None
        self.last_model = None
        self.last_seed = None       # conflict seed over assertion indices
        self.theory_cache = {}      # shared across core-minimization re-solves
        self.lemmas = []            # learned theory lemmas, likewise shared
        self.out = []

    def run_script(self, text):
        try:
            commands = parse_sexprs(text)
        except SolverInputError as exc:
            return f'(error "{exc}")\n'
        for cmd in commands:
            if not isinstance(cmd, list) or not cmd:
                self.out.append('(error "malformed command")')
                continue
            try:
                self._execute(cmd)
            except (SolverInputError, Unsupported) as exc:
                self.out.append(f'(error "{exc}")')
            if cmd[0] == "exit":
                break
        return "\n".join(self.out) + ("\n" if self.out else "")

    def _execute(self, cmd):
        head = cmd[0]
        if head in ("set-logic", "set-info", "echo"):
            return
        if head == "set-option":
            if len(cmd) >= 3 and cmd[1] == ":produce-unsat-cores":
                self.produce_cores = cmd[2] == "true"
            return
        if head == "declare-const":
            self.tr.declare(cmd[1], cmd[2])
            return
        if head == "declare-fun":
            if cmd[2] != []:
                raise Unsupported("only zero-arity declare-fun supported")
            self.tr.declare(cmd[1], cmd[3])
            return
        if head == "assert":
            name, body = None, cmd[1]
            if isinstance(body, list) and body and body[0] == "!":
                for i, tok in enumerate(body):
                    if tok == ":named":
                        name = body[i + 1]
                body = body[1]
            self.assertions.append((name, self.tr.to_formula(body)))
            return
        if head == "check-sat":
            status, payload = Solver(self.tr, self.theory_cache, self.lemmas).solve(
                [f for _, f in self.assertions])
            self.last_status = status
            self.last_model = payload if status == "sat" else None
            self.last_seed = payload if status == "unsat" else None
            self.out.append(status)
            return
        if head == "get-model":
            if self.last_status != "sat" or self.last_model is None:
                self.out.append('(error "model is not available")')
                return
            lines = ["(model"]
            for name in sorted(self.last_model):
                if name.startswith(".ite"):
                    continue
                sort = self.tr.sorts[name]
                lines.append(f"  (define-fun {name} () {sort} "
                             f"{_format_value(self.last_model[name], sort)})")
            lines.append(")")
            self.out.append("\n".join(lines))
            return
        if head == "get-unsat-core":
            if self.last_status != "unsat":
                self.out.append('(error "unsat core is not available")')
                return
            if not self.produce_cores:
                self.out.append('(error "unsat cores not enabled")')
                return
            self.out.append("(" + " ".join(self._minimal_core()) + ")")
            return
        if head == "get-info":
            if len(cmd) > 1 and cmd[1] == ":version":
                self.out.append(f'(:version "{VERSION}")')
            else:
                self.out.append("(:unsupported)")
            return
        if head in ("exit", "reset"):
            return
        raise Unsupported(f"unsupported command {head}")

    def _minimal_core(self):
        """Deletion-minimized core over named assertions, seeded with the
        solver's conflict set and refined by every intermediate conflict."""
        named_idx = [i for i, (name, _) in enumerate(self.assertions) if name is not None]

        def attempt(keep: set):
            # capped budget: a slow satisfiable attempt just keeps its element
            # (still a correct core, possibly non-minimal), so minimization
            # cannot stall on hard model searches
            formulas, origins = [], []
            for i, (name, f) in enumerate(self.assertions):
                if name is None or i in keep:
                    formulas.append(f)
                    origins.append(i)
            return Solver(self.tr, self.theory_cache, self.lemmas).solve(
                formulas, origins, max_conflicts=6000)

        core = named_idx
        if self.last_seed is not None:
            seeded = [i for i in named_idx if i in self.last_seed]
            status, payload = attempt(set(seeded))
            if status == "unsat":
                core = [i for i in seeded if i in payload]
        # drop whole chunks while the remainder stays unsat, then finish with
        # single-element deletion, which makes the result minimal
        chunk = len(core) // 2 if len(core) > 12 else 1
        while chunk >= 1:
            i = 0
            while i < len(core):
                trial = core[:i] + core[i + chunk:]
                status, payload = attempt(set(trial))
                if status == "unsat":
                    keep = payload
                    core = [c for c in trial if c in keep]
                else:
                    i += chunk
            chunk = chunk // 2 if chunk > 1 else 0
        return [self.assertions[i][0] for i in core]


def _format_value(v, sort):
    if sort == "Bool":
        return "true" if v else "false"
    f = Fraction(v)
    if sort == "Int":
        n = int(f)
        return str(n) if n >= 0 else f"(- {-n})"
    if f.denominator == 1:
        n = f.numerator
        return f"{n}.0" if n >= 0 else f"(- {-n}.0)"
    if f.numerator < 0:
        return f"(- (/ {-f.numerator} {f.denominator}))"
    return f"(/ {f.numerator} {f.denominator})"


def solve_text(script: str) -> str:
    """In-process execution of a full script; same semantics as the process."""
    return Session().run_script(script)


def main(argv=None):
    text = sys.stdin.read()
    sys.stdout.write(solve_text(text))
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Uniqueness certificates: symbolic relator entries over Q[p,q,r,z],
Buchberger elimination in lex order, divisibility checks against printed
factors, numeric solution counting inside the boxes, and the
Mean-Value-Theorem exclusion bound.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

import mpmath
from mpmath import mp

from ._rat import QQ, ZZ, QQ_ZERO, QQ_ONE
from .apnum import APComplex, Mat2, eval_word, _bits
from .catalog import BoxRegion, RegionRecord, Rect
from .solver import build_fw, ParamPoint


class GroebnerError(Exception):
    pass


VARS_CANONICAL = ("p", "q", "r", "z")


@dataclass(frozen=True)
class MonomialOrder:
    """Monomial order with the given variable precedence (highest first).

    kind "lex": plain tuple comparison on exponent tuples stored in
    precedence order.  kind "grevlex": total degree first, ties broken
    reverse-lexicographically (used internally to tame coefficient
    growth before converting to lex)."""
    variables: tuple[str, ...]
    kind: str = "lex"

    def __post_init__(self):
        if sorted(self.variables) != sorted(set(self.variables)):
            raise GroebnerError("duplicate variables in order")
        if self.kind not in ("lex", "grevlex"):
            raise GroebnerError(f"unknown order kind {self.kind!r}")

    @classmethod
    def from_name(cls, name: str) -> "MonomialOrder":
        return cls(tuple(name))

    @property
    def name(self) -> str:
        return "".join(self.variables) + ("" if self.kind == "lex" else f":{self.kind}")

    def sort_key(self, exps):
        if self.kind == "lex":
            return exps
        return (sum(exps), tuple(-x for x in reversed(exps)))

    def grevlex_twin(self) -> "MonomialOrder":
        return MonomialOrder(self.variables, "grevlex")


ORDER_ZRQP = MonomialOrder(("z", "r", "q", "p"))
ORDER_ZRPQ = MonomialOrder(("z", "r", "p", "q"))
ORDER_ZPQR = MonomialOrder(("z", "p", "q", "r"))
SECTION6_ORDERS = (ORDER_ZRQP, ORDER_ZRPQ, ORDER_ZPQR)


class MPoly:
    """Multivariate polynomial over exact rationals; terms maps exponent
    tuples (in the order's precedence) to nonzero coefficients."""

    __slots__ = ("order", "terms")

    def __init__(self, order: MonomialOrder, terms: Optional[dict] = None):
        self.order = order
        self.terms = terms if terms is not None else {}

    @classmethod
    def zero(cls, order):
        return cls(order)

    @classmethod
    def constant(cls, order, value):
        value = QQ(value)
        n = len(order.variables)
        return cls(order, {} if value == 0 else {(0,) * n: value})

    @classmethod
    def variable(cls, order, name):
        idx = order.variables.index(name)
        n = len(order.variables)
        exps = tuple(1 if i == idx else 0 for i in range(n))
        return cls(order, {exps: QQ_ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, int):
            return self == MPoly.constant(self.order, other)
        return (isinstance(other, MPoly) and self.order == other.order
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.order, tuple(sorted(self.terms.items()))))

    def copy_terms(self):
        return dict(self.terms)

    def __add__(self, other):
        if isinstance(other, int):
            other = MPoly.constant(self.order, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            acc = out.get(e)
            if acc is None:
                out[e] = c
            else:
                acc = acc + c
                if acc == 0:
                    del out[e]
                else:
                    out[e] = acc
        return MPoly(self.order, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = MPoly.constant(self.order, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int) or type(other) is type(QQ_ONE):
            if other == 0:
                return MPoly(self.order)
            return MPoly(self.order,
                         {e: c * other for e, c in self.terms.items()})
        if not isinstance(other, MPoly):
            return NotImplemented
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                acc = out.get(e)
                if acc is None:
                    out[e] = prod
                else:
                    acc = acc + prod
                    if acc == 0:
                        del out[e]
                    else:
                        out[e] = acc
        return MPoly(self.order, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = MPoly.constant(self.order, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def leading(self):
        """(exponent tuple, coefficient) of the order-leading term."""
        e = max(self.terms, key=self.order.sort_key)
        return e, self.terms[e]

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        idx = self.order.variables.index(name)
        return max((e[idx] for e in self.terms), default=-1)

    def variables_used(self) -> set[str]:
        used = set()
        for e in self.terms:
            for name, k in zip(self.order.variables, e):
                if k:
                    used.add(name)
        return used

    def primitive(self) -> "MPoly":
        """Integer-primitive scaling with positive leading coefficient."""
        if not self.terms:
            return self
        den = 1
        for c in self.terms.values():
            d = int(c.denominator)
            den = den * d // _gcd(den, d)
        num = 0
        for c in self.terms.values():
            num = _gcd(num, abs(int(c.numerator * den)))
        scale = QQ(den, num)
        if self.leading()[1] < 0:
            scale = -scale
        return MPoly(self.order, {e: c * scale for e, c in self.terms.items()})

    def monic(self) -> "MPoly":
        if not self.terms:
            return self
        _, lc = self.leading()
        inv = 1 / lc
        return MPoly(self.order, {e: c * inv for e, c in self.terms.items()})

    def rename(self, new_order: MonomialOrder) -> "MPoly":
        """Reindex exponents into another variable precedence (same set)."""
        perm = [self.order.variables.index(v) for v in new_order.variables]
        return MPoly(new_order,
                     {tuple(e[i] for i in perm): c for e, c in self.terms.items()})

    def substitute_mpc(self, values: dict, dps: int):
        """Numeric evaluation/partial substitution; returns an MPoly with
        mpc coefficients when variables remain, else an mpc."""
        with mp.workdps(dps + 10):
            remaining = [v for v in self.order.variables if v not in values]
            out: dict = {}
            for e, c in self.terms.items():
                coeff = mpmath.mpc(int(c.numerator)) / int(c.denominator)
                rest = []
                for name, k in zip(self.order.variables, e):
                    if name in values:
                        coeff = coeff * mpmath.mpc(values[name]) ** k
                    else:
                        rest.append(k)
                key = tuple(rest)
                out[key] = out.get(key, mpmath.mpc(0)) + coeff
            if not remaining:
                return out.get((), mpmath.mpc(0))
            return remaining, out

    def substitute_exact(self, values: dict):
        """Exact evaluation at scalars supporting +, *, ** (e.g. NFElement)."""
        out = 0
        for e, c in self.terms.items():
            term = c
            for name, k in zip(self.order.variables, e):
                if k:
                    term = term * values[name] ** k
            out = term + out
        return out

    def partial(self, name: str) -> "MPoly":
        idx = self.order.variables.index(name)
        out = {}
        for e, c in self.terms.items():
            if e[idx]:
                ne = list(e)
                ne[idx] -= 1
                out[tuple(ne)] = c * e[idx]
        return MPoly(self.order, out)

    def univariate_coeffs(self, name: str):
        """Coefficient list (constant first) if the support involves only
        `name`; None otherwise."""
        idx = self.order.variables.index(name)
        coeffs = [QQ_ZERO] * (self.degree_in(name) + 1)
        for e, c in self.terms.items():
            if any(k and i != idx for i, k in enumerate(e)):
                return None
            coeffs[e[idx]] = c
        return coeffs

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=self.order.sort_key, reverse=True):
            c = self.terms[e]
            mono = "*".join(f"{v}^{k}" if k > 1 else v
                            for v, k in zip(self.order.variables, e) if k)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    def to_strings(self) -> str:
        return repr(self)


def _gcd(a: int, b: int) -> int:
    a, b = abs(int(a)), abs(int(b))
    while b:
        a, b = b, a % b
    return a


def poly_from_intpoly(order: MonomialOrder, coeffs, name: str) -> MPoly:
    x = MPoly.variable(order, name)
    out = MPoly.constant(order, 0)
    for c in reversed(list(coeffs)):
        out = out * x + MPoly.constant(order, c)
    return out


# ---------------------------------------------------------------------------
# Symbolic relator entries
# ---------------------------------------------------------------------------

class _ZQuot:
    """Q[p,q,r][z]/(z^2 - q z + 1): MPoly wrapper that keeps the z-degree
    at most 1 by reducing after every product."""

    __slots__ = ("poly",)

    def __init__(self, poly: MPoly):
        self.poly = _reduce_z(poly)

    def __add__(self, other):
        other = other.poly if isinstance(other, _ZQuot) else MPoly.constant(self.poly.order, other)
        return _ZQuot(self.poly + other)

    __radd__ = __add__

    def __sub__(self, other):
        other = other.poly if isinstance(other, _ZQuot) else MPoly.constant(self.poly.order, other)
        return _ZQuot(self.poly - other)

    def __rsub__(self, other):
        return _ZQuot((-self.poly) + other)

    def __neg__(self):
        return _ZQuot(-self.poly)

    def __mul__(self, other):
        other = other.poly if isinstance(other, _ZQuot) else MPoly.constant(self.poly.order, other)
        return _ZQuot(self.poly * other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.poly == MPoly.constant(self.poly.order, other)
        return isinstance(other, _ZQuot) and self.poly == other.poly


def _reduce_z(poly: MPoly) -> MPoly:
    """Rewrite z^k, k >= 2 via z^2 = q z - 1 until the z-degree is <= 1."""
    order = poly.order
    zi = order.variables.index("z")
    qi = order.variables.index("q")
    while True:
        high = [(e, c) for e, c in poly.terms.items() if e[zi] >= 2]
        if not high:
            return poly
        out = {e: c for e, c in poly.terms.items() if e[zi] < 2}

        def bump(e, c):
            acc = out.get(e)
            if acc is None:
                out[e] = c
            else:
                acc = acc + c
                if acc == 0:
                    del out[e]
                else:
                    out[e] = acc

        for e, c in high:
            e1 = list(e)
            e1[zi] -= 1
            e1[qi] += 1
            bump(tuple(e1), c)       # q * z^(k-1)
            e2 = list(e)
            e2[zi] -= 2
            bump(tuple(e2), -c)      # -z^(k-2)
        poly = MPoly(order, out)


def symbolic_relator_entries(region: RegionRecord, signs,
                             order: MonomialOrder = ORDER_ZRQP) -> list[MPoly]:
    """Entries of both split quasi-relators minus the sign times identity,
    over Q[p,q,r,z] with z-degree <= 1, plus the quadratic z^2 - q z + 1.

    Splitting r = u*v and forming eval(u) - sign*eval(v^-1) keeps the
    polynomial degrees half of the naive evaluation; the variety is the
    same.
    """
    P = _ZQuot(MPoly.variable(order, "p"))
    Q = _ZQuot(MPoly.variable(order, "q"))
    R = _ZQuot(MPoly.variable(order, "r"))
    Z = _ZQuot(MPoly.variable(order, "z"))
    f2 = Mat2(_ZQuot(MPoly.constant(order, 0)), _ZQuot(MPoly.constant(order, 1)),
              _ZQuot(MPoly.constant(order, -1)), P)
    w2 = Mat2(Z, _ZQuot(MPoly.constant(order, 0)), P * Z - R, Q - Z)
    images = {0: f2, 1: w2}
    out = []
    for word, sign in zip(region.quasi_relators, signs):
        u, v = word.split_half()
        left = eval_word(u, images)
        right = eval_word(v.inverse(), images).scale(sign)
        for entry in (left - right).entries():
            poly = entry.poly if isinstance(entry, _ZQuot) else MPoly.constant(order, entry)
            if not poly.is_zero():
                out.append(poly.primitive())
    zq = MPoly.variable(order, "z") ** 2 - MPoly.variable(order, "q") * MPoly.variable(order, "z") + 1
    out.append(zq.primitive())
    return out


# ---------------------------------------------------------------------------
# Buchberger
# ---------------------------------------------------------------------------

@dataclass
class Budget:
    seconds: Optional[float] = None
    max_reductions: Optional[int] = None


@dataclass
class GroebnerResult:
    basis: list
    complete: bool
    reductions: int
    seconds: float
    order: MonomialOrder


def _divides(e1, e2) -> bool:
    return all(a <= b for a, b in zip(e1, e2))


def _lcm_exp(e1, e2):
    return tuple(max(a, b) for a, b in zip(e1, e2))


def _normal_form(poly: MPoly, basis: list, lead: list) -> MPoly:
    """Full reduction of poly modulo basis (lead: cached leading data)."""
    order = poly.order
    key = order.sort_key
    work = dict(poly.terms)
    out: dict = {}
    while work:
        e = max(work, key=key)
        c = work[e]
        reducer = None
        for i, (le, lc) in enumerate(lead):
            if _divides(le, e):
                reducer = (le, lc, basis[i])
                break
        if reducer is None:
            out[e] = c
            del work[e]
            continue
        le, lc, g = reducer
        factor = c / lc
        shift = tuple(a - b for a, b in zip(e, le))
        for ge, gc in g.terms.items():
            te = tuple(a + b for a, b in zip(ge, shift))
            acc = work.get(te)
            delta = factor * gc
            if acc is None:
                if delta != 0:
                    work[te] = -delta
            else:
                acc = acc - delta
                if acc == 0:
                    del work[te]
                else:
                    work[te] = acc
    return MPoly(order, out)


def _spoly(f: MPoly, g: MPoly) -> MPoly:
    fe, fc = f.leading()
    ge, gc = g.leading()
    lcm = _lcm_exp(fe, ge)
    fshift = tuple(a - b for a, b in zip(lcm, fe))
    gshift = tuple(a - b for a, b in zip(lcm, ge))
    order = f.order
    fmul = MPoly(order, {tuple(a + b for a, b in zip(e, fshift)): c * gc
                         for e, c in f.terms.items()})
    gmul = MPoly(order, {tuple(a + b for a, b in zip(e, gshift)): c * fc
                         for e, c in g.terms.items()})
    return fmul - gmul


def buchberger(generators: list, order: MonomialOrder,
               budget: Optional[Budget] = None) -> GroebnerResult:
    """Reduced Groebner basis for the given order.

    Direct Buchberger in lex suffers severe intermediate coefficient
    growth on these elimination ideals, so for lex targets the basis is
    computed in grevlex first; if the ideal is zero-dimensional the lex
    basis is obtained by FGLM change of order (exact linear algebra over
    the quotient algebra), otherwise a direct lex run is attempted.  The
    result is certified independently of the route: the acceptance suite
    re-checks that every S-polynomial of the returned basis reduces to
    zero.

    On budget exhaustion returns the partial state flagged incomplete.
    """
    t0 = time.time()
    budget = budget or Budget()
    if order.kind == "lex" and len(generators) > 1:
        gre = _buchberger_direct(generators, order.grevlex_twin(), budget)
        if not gre.complete:
            return GroebnerResult(gre.basis, False, gre.reductions,
                                  time.time() - t0, order)
        staircase = _standard_monomials(gre.basis)
        if staircase is not None:
            basis = _fglm(gre.basis, staircase, order, budget)
            if basis is None:
                return GroebnerResult(gre.basis, False, gre.reductions,
                                      time.time() - t0, order)
            return GroebnerResult(basis, True, gre.reductions,
                                  time.time() - t0, order)
    return _buchberger_direct(generators, order, budget)


def _buchberger_direct(generators: list, order: MonomialOrder,
                       budget: Optional[Budget] = None) -> GroebnerResult:
    """Plain Buchberger loop: normal selection strategy, Gebauer-Moller
    pair pruning, primitive integer coefficients inside."""
    t0 = time.time()
    budget = budget or Budget()
    gens = [g.rename(order) if g.order != order else g for g in generators]
    gens = [g.primitive() for g in gens if not g.is_zero()]
    if not gens:
        raise GroebnerError("empty generator list")

    basis: list[MPoly] = []
    lead: list = []
    pairs: list = []
    reductions = 0

    def out_of_budget() -> bool:
        if budget.seconds is not None and time.time() - t0 > budget.seconds:
            return True
        if budget.max_reductions is not None and reductions > budget.max_reductions:
            return True
        return False

    def update(h: MPoly):
        """Gebauer-Moller update of the pair set with the new element h."""
        he, _ = h.leading()
        t = len(basis)
        new_pairs = []
        for i in range(t):
            ie = lead[i][0]
            new_pairs.append((_lcm_exp(ie, he), i, t))
        # criterion M: drop (i,t) if another (j,t) has strictly dividing lcm
        kept = []
        for lcm, i, _ in new_pairs:
            dominated = False
            for lcm2, j, _ in new_pairs:
                if j != i and _divides(lcm2, lcm) and lcm2 != lcm:
                    dominated = True
                    break
            if not dominated:
                kept.append((lcm, i, t))
        # criterion F: among equal lcms keep one
        seen = {}
        for lcm, i, _ in kept:
            if lcm not in seen:
                seen[lcm] = (lcm, i, t)
        kept = list(seen.values())
        # criterion B (product criterion): drop coprime leading terms
        kept = [(lcm, i, t) for lcm, i, t in kept
                if lcm != tuple(a + b for a, b in zip(lead[i][0], he))]
        # prune old pairs whose lcm is divisible by he (chain criterion)
        keep_old = []
        for lcm, i, j in pairs:
            if (_divides(he, lcm)
                    and _lcm_exp(lead[i][0], he) != lcm
                    and _lcm_exp(lead[j][0], he) != lcm):
                continue
            keep_old.append((lcm, i, j))
        pairs[:] = keep_old + kept
        basis.append(h)
        lead.append(h.leading())

    for g in gens:
        h = _normal_form(g, basis, lead)
        if not h.is_zero():
            update(h.primitive())

    while pairs:
        if out_of_budget():
            reduced = _interreduce(basis, order)
            return GroebnerResult(reduced, False, reductions, time.time() - t0, order)
        pairs.sort(key=lambda item: (sum(item[0]), order.sort_key(item[0])),
                   reverse=True)
        lcm, i, j = pairs.pop()
        s = _spoly(basis[i], basis[j])
        reductions += 1
        h = _normal_form(s, basis, lead)
        if not h.is_zero():
            update(h.primitive())

    reduced = _interreduce(basis, order)
    return GroebnerResult(reduced, True, reductions, time.time() - t0, order)


def _interreduce(basis: list, order: MonomialOrder) -> list:
    """Pairwise-reduced basis, sorted by leading monomial, monic over Q."""
    work = [g for g in basis if not g.is_zero()]
    changed = True
    while changed:
        changed = False
        work.sort(key=lambda g: order.sort_key(g.leading()[0]))
        out = []
        for i, g in enumerate(work):
            others = out + work[i + 1:]
            lead = [h.leading() for h in others]
            h = _normal_form(g, others, lead)
            if h.is_zero():
                changed = True
                continue
            h = h.primitive()
            if h != g:
                changed = True
            out.append(h)
        work = out
    return [g.monic()
            for g in sorted(work, key=lambda g: order.sort_key(g.leading()[0]))]


def _standard_monomials(basis: list, cap: int = 4000):
    """Monomials below the staircase of the basis leads; None if the
    ideal is not zero-dimensional (or exceeds the cap)."""
    order = basis[0].order
    n = len(order.variables)
    leads = [g.leading()[0] for g in basis]
    # zero-dimensional iff every variable has a pure-power leading term
    for i in range(n):
        if not any(all(e[j] == 0 for j in range(n) if j != i) and e[i] > 0
                   for e in leads):
            return None
    start = (0,) * n
    seen = {start}
    queue = [start]
    out = []
    while queue:
        e = queue.pop()
        out.append(e)
        if len(out) > cap:
            return None
        for i in range(n):
            ne = tuple(x + (1 if j == i else 0) for j, x in enumerate(e))
            if ne in seen:
                continue
            seen.add(ne)
            if not any(_divides(le, ne) for le in leads):
                queue.append(ne)
    return sorted(out)


def _mult_matrices(basis: list, staircase: list):
    """Columns of the multiplication-by-variable maps on the quotient
    algebra, over the staircase basis."""
    order = basis[0].order
    n = len(order.variables)
    index = {e: i for i, e in enumerate(staircase)}
    lead = [g.leading() for g in basis]
    mats = []
    for i in range(n):
        cols = []
        for e in staircase:
            ne = tuple(x + (1 if j == i else 0) for j, x in enumerate(e))
            if ne in index:
                col = {index[ne]: QQ_ONE}
            else:
                nf = _normal_form(MPoly(order, {ne: QQ_ONE}), basis, lead)
                col = {index[te]: c for te, c in nf.terms.items()}
            cols.append(col)
        mats.append(cols)
    return mats


class _EchelonSolver:
    """Incremental rational echelon with dependency extraction: rows
    remember their expression over the independent vectors inserted so
    far, so a dependent insert yields its coefficients directly."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list = []      # (reduced vector, combo dict idx->QQ)
        self.pivots: list = []

    def insert(self, vec: list):
        """None if independent; else coefficients over the previously
        inserted independent vectors."""
        v = list(vec)
        combo: dict = {}
        for (row, rcombo), piv in zip(self.rows, self.pivots):
            f = v[piv]
            if f != 0:
                v = [a - f * b for a, b in zip(v, row)]
                for k, c in rcombo.items():
                    combo[k] = combo.get(k, QQ_ZERO) - f * c
        piv = next((i for i in range(self.dim) if v[i] != 0), None)
        if piv is None:
            out = [QQ_ZERO] * len(self.rows)
            for k, c in combo.items():
                out[k] = -c
            return out
        inv = 1 / QQ(v[piv])
        idx = len(self.rows)
        rcombo = {k: inv * c for k, c in combo.items()}
        rcombo[idx] = inv
        self.rows.append(([inv * a for a in v], rcombo))
        self.pivots.append(piv)
        return None


def _fglm(gre_basis: list, staircase: list, target: MonomialOrder,
          budget: Budget):
    """Change of order to lex via FGLM: enumerate monomials in increasing
    target order, tracking their normal-form vectors; each linear
    dependency yields one element of the reduced lex basis."""
    t0 = time.time()
    source = gre_basis[0].order
    n = len(source.variables)
    dim = len(staircase)
    index = {e: i for i, e in enumerate(staircase)}
    mats = _mult_matrices(gre_basis, staircase)
    # map target variable position -> source variable position
    var_map = [source.variables.index(v) for v in target.variables]

    import heapq

    one_vec = [QQ_ZERO] * dim
    one_vec[index[(0,) * n]] = QQ_ONE
    start = (0,) * n
    heap = [(target.sort_key(start), start, one_vec)]
    enqueued = {start}
    solver = _EchelonSolver(dim)
    lex_standard: list = []      # exponent tuples in target coordinates
    lex_leads: list = []
    out = []
    while heap:
        if budget.seconds is not None and time.time() - t0 > budget.seconds:
            return None
        _, texp, vec = heapq.heappop(heap)
        if any(_divides(le, texp) for le in lex_leads):
            continue
        coeffs = solver.insert(vec)
        if coeffs is not None:
            terms = {texp: QQ_ONE}
            for c, sexp in zip(coeffs, lex_standard):
                if c != 0:
                    terms[sexp] = -c
            out.append(MPoly(target, terms))
            lex_leads.append(texp)
            continue
        lex_standard.append(texp)
        for ti in range(n):
            ntexp = tuple(x + (1 if j == ti else 0) for j, x in enumerate(texp))
            if ntexp in enqueued:
                continue
            enqueued.add(ntexp)
            cols = mats[var_map[ti]]
            nvec = [QQ_ZERO] * dim
            for idx, c in enumerate(vec):
                if c != 0:
                    for ridx, m in cols[idx].items():
                        nvec[ridx] = nvec[ridx] + c * m
            heapq.heappush(heap, (target.sort_key(ntexp), ntexp, nvec))
    return sorted(out, key=lambda g: target.sort_key(g.leading()[0]))


def is_groebner_basis(basis: list) -> bool:
    """Post-hoc check: every S-polynomial reduces to zero."""
    lead = [g.leading() for g in basis]
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if not _normal_form(_spoly(basis[i], basis[j]), basis, lead).is_zero():
                return False
    return True


def divide_exact(num: MPoly, den: MPoly):
    """Exact multivariate division num/den; None if not exact (single
    divisor: the fully reduced remainder is unique)."""
    lead = [den.leading()]
    rem = _normal_form(num, [den], lead)
    if not rem.is_zero():
        return None
    # reconstruct quotient by long division
    order = num.order
    key = order.sort_key
    work = dict(num.terms)
    quo: dict = {}
    de, dc = den.leading()
    while work:
        e = max(work, key=key)
        c = work[e]
        if not _divides(de, e):
            return None  # cannot happen when remainder is zero
        shift = tuple(a - b for a, b in zip(e, de))
        factor = c / dc
        quo[shift] = factor
        for ge, gc in den.terms.items():
            te = tuple(a + b for a, b in zip(ge, shift))
            acc = work.get(te)
            delta = factor * gc
            if acc is None:
                work[te] = -delta
            else:
                acc = acc - delta
                if acc == 0:
                    del work[te]
                else:
                    work[te] = acc
    return MPoly(order, quo)


@dataclass
class FactorCheck:
    divides: bool
    quotient: Optional[MPoly]


def check_paper_factor(gb_last: MPoly, claimed_factors: list) -> FactorCheck:
    """Does the product of the claimed factors divide gb_last exactly?"""
    prod = MPoly.constant(gb_last.order, 1)
    for f in claimed_factors:
        if f.order != gb_last.order:
            f = f.rename(gb_last.order)
        prod = prod * f
    quo = divide_exact(gb_last, prod)
    return FactorCheck(divides=quo is not None, quotient=quo)


# ---------------------------------------------------------------------------
# Numeric solution counting
# ---------------------------------------------------------------------------

def _poly_roots(coeffs, dps: int):
    """Roots of a univariate polynomial given mpc coefficients (constant
    first), at working precision dps."""
    with mp.workdps(dps + 10):
        cs = list(coeffs)
        while cs and abs(cs[-1]) < mpmath.mpf(10) ** (-dps // 2):
            cs.pop()
        if len(cs) <= 1:
            return []
        return mpmath.polyroots([mpmath.mpc(c) for c in reversed(cs)],
                                maxsteps=300, extraprec=_bits(dps) // 2)


def solve_lex_system(gb: list, dps: int = 60) -> list[dict]:
    """Back-substitute a lex Groebner basis of a zero-dimensional ideal.

    Solves variables from lowest precedence upward; at each stage takes
    the minimal-degree univariate condition and filters candidate roots
    against all other substituted conditions.
    """
    order = gb[0].order
    names = list(order.variables)
    with mp.workdps(dps + 10):
        tol = mpmath.mpf(10) ** (-dps // 3)
        sols: list[dict] = [{}]
        for name in reversed(names):
            new_sols = []
            for partial in sols:
                conditions = []
                for g in gb:
                    sub = g.substitute_mpc(partial, dps)
                    if not isinstance(sub, tuple):
                        continue  # fully evaluated scalar
                    remaining, terms = sub
                    idx = remaining.index(name) if name in remaining else None
                    # keep only conditions univariate in `name`
                    others = [i for i, n in enumerate(remaining) if n != name]
                    if any(any(e[i] for i in others) for e in terms):
                        continue
                    if idx is None:
                        continue
                    deg = max(e[idx] for e in terms)
                    coeffs = [mpmath.mpc(0)] * (deg + 1)
                    for e, c in terms.items():
                        coeffs[e[idx]] += c
                    # drop numerically-zero conditions
                    if all(abs(c) < tol for c in coeffs):
                        continue
                    conditions.append(coeffs)
                if not conditions:
                    raise GroebnerError(
                        f"no univariate condition for {name}: ideal not "
                        "zero-dimensional at this precision")
                conditions.sort(key=len)
                roots = _poly_roots(conditions[0], dps)
                for root in roots:
                    ok = True
                    for other in conditions[1:]:
                        val = mpmath.mpc(0)
                        for c in reversed(other):
                            val = val * root + c
                        scale = max(abs(c) for c in other)
                        if abs(val) > tol * max(scale, 1):
                            ok = False
                            break
                    if ok:
                        ext = dict(partial)
                        ext[name] = root
                        new_sols.append(ext)
            # dedupe clustered roots
            deduped = []
            for s in new_sols:
                if not any(all(abs(s[n] - t[n]) < tol for n in s) for t in deduped):
                    deduped.append(s)
            sols = deduped
        return sols


def candidate_params(p, q, r, dps: int):
    """All branch choices of the inverse trace map (no box filter)."""
    with mp.workdps(dps + 10):
        p, q, r = mpmath.mpc(p), mpmath.mpc(q), mpmath.mpc(r)
        tiny = mpmath.mpf(10) ** (-dps // 2)
        if abs(p * p - 4) < tiny:
            return []
        disc = mpmath.sqrt(p * p - 4)
        out = []
        for root_sign in (1, -1):
            a = (p + root_sign * disc) / 2
            L = a * a
            for sqrt_sign in (1, -1):
                sa = a * sqrt_sign
                den = r * sa - q
                if abs(den) < tiny:
                    continue
                R = (q * L - r * sa) / den
                if abs(R) < tiny or abs(1 + R) < tiny:
                    continue
                rtR = mpmath.sqrt(R)
                ddisc = mpmath.sqrt(4 * q * q * R - 4 * (1 + R) ** 2)
                for d_sign in (1, -1):
                    D = ((2 * q * rtR + d_sign * ddisc) / (2 * (1 + R))) ** 2
                    if abs(D) < tiny:
                        continue
                    out.append((L, D, R))
        return out


@dataclass
class SolutionCount:
    in_box: int
    variety_points: int
    candidates_examined: int


def count_box_solutions(region: RegionRecord, gb: list,
                        dps: int = 60) -> SolutionCount:
    """Count branch candidates (L', D', R') inside the region box over all
    variety points of the Groebner basis."""
    for attempt in (dps, 2 * dps):
        try:
            sols = solve_lex_system(gb, attempt)
            break
        except GroebnerError:
            if attempt != dps:
                raise
    else:  # pragma: no cover
        sols = []
    box = region.box
    hits = []
    examined = 0
    with mp.workdps(dps + 10):
        for sol in sols:
            cands = candidate_params(sol["p"], sol["q"], sol["r"], dps)
            examined += len(cands)
            for (L, D, R) in cands:
                if box.Lp.contains(L) and box.Dp.contains(D) and box.Rp.contains(R):
                    hits.append((L, D, R))
        tol = mpmath.mpf(10) ** (-dps // 3)
        unique = []
        for h in hits:
            if not any(all(abs(a - b) < tol for a, b in zip(h, u)) for u in unique):
                unique.append(h)
    return SolutionCount(in_box=len(unique), variety_points=len(sols),
                         candidates_examined=examined)


# ---------------------------------------------------------------------------
# Mean Value Theorem exclusion
# ---------------------------------------------------------------------------

@dataclass
class MVTCertificate:
    region: str
    factor: str
    radius: str
    value_at_midpoint: str
    gradient_bound: str
    passes: bool


def _mod_range(rect: Rect):
    """Rigorous [min, max] of |value| over a rectangle in C."""
    corners = [(rect.re_min, rect.im_min), (rect.re_min, rect.im_max),
               (rect.re_max, rect.im_min), (rect.re_max, rect.im_max)]
    with mp.workdps(40):
        mods = [mpmath.sqrt(mpmath.mpf(float(re)) ** 2 + mpmath.mpf(float(im)) ** 2)
                for re, im in corners]
        hi = max(mods)
        # min over the closed rectangle: 0 if it contains the origin,
        # else the min over the four edges
        if rect.re_min <= 0 <= rect.re_max and rect.im_min <= 0 <= rect.im_max:
            return mpmath.mpf(0), hi
        lo = min(mods)
        if rect.re_min <= 0 <= rect.re_max:
            lo = min(lo, min(abs(mpmath.mpf(float(rect.im_min))),
                             abs(mpmath.mpf(float(rect.im_max)))))
        if rect.im_min <= 0 <= rect.im_max:
            lo = min(lo, min(abs(mpmath.mpf(float(rect.re_min))),
                             abs(mpmath.mpf(float(rect.re_max)))))
        return lo, hi


def _rect_radius(rect: Rect):
    with mp.workdps(40):
        hr = (mpmath.mpf(float(rect.re_max)) - mpmath.mpf(float(rect.re_min))) / 2
        hi = (mpmath.mpf(float(rect.im_max)) - mpmath.mpf(float(rect.im_min))) / 2
        return mpmath.sqrt(hr * hr + hi * hi)


def trace_ball_radius(region: RegionRecord):
    """Rigorous bound for the distance in (p, q, r) space between the
    image of any box point and the image of the midpoint, via sup-bounds
    on the complex partial derivatives of the trace map over the box."""
    box = region.box
    aL, bL = _mod_range(box.Lp)
    aD, bD = _mod_range(box.Dp)
    aR, bR = _mod_range(box.Rp)
    with mp.workdps(40):
        if min(aL, aD, aR) <= 0:
            raise GroebnerError("box touches a coordinate zero; bound unavailable")
        sa_lo, sa_hi = mpmath.sqrt(aL), mpmath.sqrt(bL)
        sb_lo, sb_hi = mpmath.sqrt(aR), mpmath.sqrt(bR)
        sc_lo, sc_hi = mpmath.sqrt(aD), mpmath.sqrt(bD)
        ch_hi = (sc_hi + 1 / sc_lo) / 2
        rho_L, rho_D, rho_R = (_rect_radius(box.Lp), _rect_radius(box.Dp),
                               _rect_radius(box.Rp))
        # p = a + 1/a, a = sqrt(L')
        dp_dL = (1 + 1 / aL) / (2 * sa_lo)
        dq_dD = (sb_hi + 1 / sb_lo) * (1 + 1 / aD) / (4 * sc_lo)
        dq_dR = ch_hi * (1 + 1 / aR) / (2 * sb_lo)
        dr_dL = ch_hi * (1 / sb_lo + sb_hi / aL) / (2 * sa_lo)
        dr_dR = ch_hi * (1 / sa_lo + sa_hi / aR) / (2 * sb_lo)
        dr_dD = (sb_hi / sa_lo + sa_hi / sb_lo) * (1 + 1 / aD) / (4 * sc_lo)
        dp = dp_dL * rho_L
        dq = dq_dD * rho_D + dq_dR * rho_R
        dr = dr_dL * rho_L + dr_dD * rho_D + dr_dR * rho_R
        return mpmath.sqrt(dp * dp + dq * dq + dr * dr)


def midpoint_traces(region: RegionRecord, digits: int = 50):
    pt = ParamPoint(region.box.Lp.midpoint(digits),
                    region.box.Dp.midpoint(digits),
                    region.box.Rp.midpoint(digits))
    f, w = build_fw(pt)
    p = f.trace()
    q = w.trace()
    r = (f.adjugate() * w).trace()
    return p, q, r


def mvt_exclusion(factor: MPoly, region: RegionRecord, radius) -> MVTCertificate:
    """Certify that `factor` has no zero in the trace-coordinate ball of
    the given radius around the image of the box midpoint.

    passes = |factor(p0,q0,r0)| > gradient_sup_bound * radius, with the
    gradient bounded by the triangle inequality using |v| <= |v0| + radius.
    """
    with mp.workdps(50):
        radius = mpmath.mpf(radius)
        ball = trace_ball_radius(region)
        if radius < ball:
            raise GroebnerError(
                f"radius {mpmath.nstr(radius, 8)} does not cover the box image "
                f"in trace coordinates (needs >= {mpmath.nstr(ball, 8)})")
        p0, q0, r0 = midpoint_traces(region, 50)
        vals = {"p": p0.to_mpc(), "q": q0.to_mpc(), "r": r0.to_mpc()}
        if "z" in factor.variables_used():
            raise GroebnerError("factor must be in p, q, r only")
        value = factor.substitute_mpc({**vals, "z": mpmath.mpc(0)}, 50)
        value_abs = abs(value)
        bounds = {name: abs(vals[name]) + radius for name in ("p", "q", "r")}
        bounds["z"] = mpmath.mpf(0)
        grad_sq = mpmath.mpf(0)
        for name in ("p", "q", "r"):
            part = factor.partial(name)
            bound = mpmath.mpf(0)
            for e, c in part.terms.items():
                term = abs(mpmath.mpf(int(c.numerator))) / int(c.denominator)
                for v, k in zip(part.order.variables, e):
                    if k:
                        term = term * bounds[v] ** k
                bound += term
            grad_sq += bound * bound
        grad = mpmath.sqrt(grad_sq)
        passes = bool(value_abs > grad * radius)
        return MVTCertificate(
            region=region.name, factor=repr(factor), radius=mpmath.nstr(radius, 8),
            value_at_midpoint=mpmath.nstr(value_abs, 8),
            gradient_bound=mpmath.nstr(grad, 8), passes=passes)

"""Exact arithmetic in Q[x]/(m(x)) and the exact verification steps:
relator verification over the field, invariant trace field computation,
field isomorphism testing, and the exact parameter symmetries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import mpmath

from ._rat import QQ, QQ_ZERO, QQ_ONE, is_rational
from .apnum import APComplex, Mat2, eval_word
from .catalog import RegionRecord, _parse_ratlist
from .recognize import (IntPoly, NoRelationFound, RecognitionError,
                        express_in_field, refine_root)
from .solver import conjugate_pair
from .words import Word


class FieldError(Exception):
    pass


class VerificationError(Exception):
    pass


def eval_ratpoly(coeffs, x):
    """Horner evaluation of a rational-coefficient polynomial (constant
    first) at any scalar supporting + and * with rationals."""
    out = 0
    for c in reversed(coeffs):
        out = out * x + c
    return out


# ---------------------------------------------------------------------------
# Number field arithmetic
# ---------------------------------------------------------------------------

class NumberField:
    """Q[x]/(m(x)) with m squarefree; elements are coefficient vectors of
    degree < deg m with exact rational entries."""

    def __init__(self, minpoly: IntPoly):
        minpoly = minpoly.primitive()
        if minpoly.degree < 1:
            raise FieldError("minpoly must be nonconstant")
        if minpoly.squarefree_part() != minpoly:
            raise FieldError("minpoly must be squarefree")
        self.minpoly = minpoly
        self.degree = minpoly.degree
        n = self.degree
        lead = QQ(minpoly.coeffs[-1])
        base = [QQ(-c) / lead for c in minpoly.coeffs[:-1]]
        # reduction vectors for x^(n+k), k = 0 .. n-2
        rows = [base]
        for _ in range(1, n - 1):
            prev = rows[-1]
            row = [QQ_ZERO] + list(prev[:-1])
            top = prev[-1]
            if top != 0:
                row = [row[i] + top * base[i] for i in range(n)]
            rows.append(row)
        self._red = rows

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return f"NumberField({list(self.minpoly.coeffs)})"

    def element(self, coeffs) -> "NFElement":
        n = self.degree
        vec = [QQ(c) for c in coeffs]
        if len(vec) > n:
            raise FieldError("coefficient vector too long; reduce first")
        vec += [QQ_ZERO] * (n - len(vec))
        return NFElement(self, tuple(vec))

    def zero(self) -> "NFElement":
        return self.element([])

    def one(self) -> "NFElement":
        return self.element([1])

    def gen(self) -> "NFElement":
        if self.degree == 1:
            # x is congruent to a rational
            return self.element([QQ(-self.minpoly.coeffs[0], self.minpoly.coeffs[1])])
        return self.element([0, 1])

    def _reduce(self, long_vec):
        n = self.degree
        out = list(long_vec[:n]) + [QQ_ZERO] * max(0, n - len(long_vec))
        for k in range(len(long_vec) - 1, n - 1, -1):
            c = long_vec[k]
            if c != 0:
                row = self._red[k - n]
                for i in range(n):
                    out[i] += c * row[i]
        return out

    def _mul(self, a, b):
        n = self.degree
        long_vec = [QQ_ZERO] * (2 * n - 1)
        for i, x in enumerate(a):
            if x != 0:
                for j, y in enumerate(b):
                    if y != 0:
                        long_vec[i + j] += x * y
        return self._reduce(long_vec)

    def _inv(self, a):
        """Extended Euclid in Q[x]: s with s*a = 1 mod minpoly."""
        m = [QQ(c) for c in self.minpoly.coeffs]
        r0, r1 = m, list(a)
        s0, s1 = [QQ_ZERO], [QQ_ONE]

        def trim(p):
            while p and p[-1] == 0:
                p.pop()
            return p

        r1 = trim(r1)
        if not r1:
            raise ZeroDivisionError("inverse of zero field element")
        while True:
            r0, r1 = trim(r0), trim(r1)
            if not r1:
                break
            # divide r0 by r1
            quo = [QQ_ZERO] * max(len(r0) - len(r1) + 1, 1)
            rem = list(r0)
            while len(rem) >= len(r1):
                f = rem[-1] / r1[-1]
                k = len(rem) - len(r1)
                quo[k] = f
                for i, c in enumerate(r1):
                    rem[i + k] -= f * c
                rem.pop()
                rem = trim(rem)
                if not rem:
                    break
            # s sequence follows the remainder sequence
            snew = list(s0)
            snew += [QQ_ZERO] * (len(quo) + len(s1) - 1 - len(snew))
            for i, qc in enumerate(quo):
                if qc != 0:
                    for j, sc in enumerate(s1):
                        if sc != 0:
                            snew[i + j] -= qc * sc
            r0, s0, r1, s1 = r1, s1, rem, trim(snew) or [QQ_ZERO]
        if len(r0) != 1:
            raise FieldError(
                "divisor not invertible: minpoly is reducible (recognition failure)")
        c = r0[0]
        return self._reduce([x / c for x in s0])


class NFElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs

    def _coerce(self, other) -> Optional["NFElement"]:
        if isinstance(other, NFElement):
            if other.field != self.field:
                raise FieldError("elements of different fields")
            return other
        if isinstance(other, int) or is_rational(other):
            return self.field.element([other])
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NFElement(self.field,
                         tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return NFElement(self.field,
                         tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if isinstance(other, int) or is_rational(other):
            return NFElement(self.field, tuple(a * QQ(other) for a in self.coeffs))
        return NFElement(self.field, tuple(self.field._mul(self.coeffs, o.coeffs)))

    __rmul__ = __mul__

    def inverse(self) -> "NFElement":
        return NFElement(self.field, tuple(self.field._inv(self.coeffs)))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __neg__(self):
        return NFElement(self.field, tuple(-a for a in self.coeffs))

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.field.minpoly, self.coeffs))

    def __repr__(self):
        return f"NFElement({list(self.coeffs)})"

    def embed(self, root: APComplex) -> APComplex:
        """Numeric value under the embedding sending the generator to `root`."""
        return eval_ratpoly(self.coeffs, root)


def nf_arith(a: NFElement, b: NFElement, op: str) -> NFElement:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# Exact relator verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionField:
    """Exact data of a region over its field: generator z, the traces,
    and the normal-form matrices (the word-problem oracle)."""
    field: NumberField
    z: NFElement
    p: NFElement
    q: NFElement
    r: NFElement
    f2: Mat2
    w2: Mat2

    @property
    def images(self) -> dict[int, Mat2]:
        return {0: self.f2, 1: self.w2}


_REGION_FIELD_CACHE: dict = {}


def region_field(region: RegionRecord) -> RegionField:
    key = (region.z_minpoly.coeffs, region.tr1, region.tr2, region.tr3)
    cached = _REGION_FIELD_CACHE.get(key)
    if cached is not None:
        return cached
    K = NumberField(region.z_minpoly)
    z = K.gen()
    p = eval_ratpoly(region.tr1, z)
    q = eval_ratpoly(region.tr2, z)
    r = eval_ratpoly(region.tr3, z)
    if not (z * (q - z)) == 1:
        raise VerificationError(
            f"{region.name}: z*(tr2 - z) != 1 in the field; "
            "the recognized data is inconsistent")
    f2, w2 = conjugate_pair(p, q, r, z)
    out = RegionField(K, z, p, q, r, f2, w2)
    _REGION_FIELD_CACHE[key] = out
    return out


def _matrix_sign(m: Mat2, where: str) -> int:
    """+1 or -1 according to m = +I or m = -I exactly; raises otherwise,
    naming the first offending entry."""
    for sign in (1, -1):
        target = Mat2.identity().scale(sign)
        if all((a - b).is_zero() if isinstance(a - b, NFElement) else a == b
               for a, b in zip(m.entries(), target.entries())):
            return sign
    labels = ("(1,1)", "(1,2)", "(2,1)", "(2,2)")
    ident = Mat2.identity()
    for label, a, b in zip(labels, m.entries(), ident.entries()):
        diff = a - b
        bad = not (diff.is_zero() if isinstance(diff, NFElement) else diff == 0)
        if bad:
            raise VerificationError(f"{where}: relator is not +-I at entry {label}")
    raise VerificationError(f"{where}: relator is not +-I")


@dataclass(frozen=True)
class RelatorCertificate:
    region: str
    field_poly: tuple
    signs: tuple[int, int]


def verify_relators_exact(region: RegionRecord) -> RelatorCertificate:
    """Evaluate both quasi-relators exactly over Q(z) and assert each is
    exactly +I or -I.  Failure means the recognized data is wrong."""
    rf = region_field(region)
    signs = []
    for label, word in (("r1", region.r1), ("r2", region.r2)):
        m = eval_word(word, rf.images)
        signs.append(_matrix_sign(m, f"{region.name}:{label}"))
    return RelatorCertificate(region=region.name,
                              field_poly=region.z_minpoly.coeffs,
                              signs=tuple(signs))


# ---------------------------------------------------------------------------
# Exact linear algebra over Q (small dimensions)
# ---------------------------------------------------------------------------

class _Span:
    """Row echelon span of rational vectors."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: list[list] = []
        self.pivots: list[int] = []

    def _reduce(self, vec):
        v = list(vec)
        for row, piv in zip(self.rows, self.pivots):
            if v[piv] != 0:
                f = v[piv]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def contains(self, vec) -> bool:
        return all(c == 0 for c in self._reduce(vec))

    def add(self, vec) -> bool:
        """Insert vec; returns True if the rank grew."""
        v = self._reduce(vec)
        for piv in range(self.dim):
            if v[piv] != 0:
                inv = 1 / QQ(v[piv])
                v = [inv * c for c in v]
                self.rows.append(v)
                self.pivots.append(piv)
                return True
        return False

    @property
    def rank(self) -> int:
        return len(self.rows)


def solve_linear(columns: list[list], target: list):
    """Rational solution x of sum x_i * columns[i] = target, or None."""
    ncols = len(columns)
    dim = len(target)
    aug = [[QQ(columns[j][i]) for j in range(ncols)] + [QQ(target[i])]
           for i in range(dim)]
    piv_of_col = {}
    row = 0
    for col in range(ncols):
        sel = None
        for i in range(row, dim):
            if aug[i][col] != 0:
                sel = i
                break
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [inv * c for c in aug[row]]
        for i in range(dim):
            if i != row and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[row])]
        piv_of_col[col] = row
        row += 1
    for i in range(row, dim):
        if aug[i][ncols] != 0:
            return None
    x = [QQ_ZERO] * ncols
    for col, r in piv_of_col.items():
        x[col] = aug[r][ncols]
    return x


def minimal_polynomial(el: NFElement) -> IntPoly:
    """Exact minimal polynomial of a field element, via the first linear
    dependency among its powers; primitive over Z, positive leading."""
    n = el.field.degree
    span = _Span(n)
    powers = [el.field.one()]
    span.add(list(powers[0].coeffs))
    while True:
        nxt = powers[-1] * el
        if span.contains(list(nxt.coeffs)):
            cols = [list(p.coeffs) for p in powers]
            sol = solve_linear(cols, list(nxt.coeffs))
            assert sol is not None
            rat = [-c for c in sol] + [QQ_ONE]
            den = 1
            for c in rat:
                den = den * int(c.denominator) // _gcd_int(den, int(c.denominator))
            return IntPoly([int(c * den) for c in rat]).primitive()
        span.add(list(nxt.coeffs))
        powers.append(nxt)


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a) or 1


# ---------------------------------------------------------------------------
# Invariant trace field
# ---------------------------------------------------------------------------

class PrimitiveSearchError(FieldError):
    pass


def exact_itf(region: RegionRecord, bound: int = 8) -> IntPoly:
    """Exact minimal polynomial of a primitive element of the subfield
    generated by tr(f^2), tr(w^2), tr(f^2 w^2)."""
    rf = region_field(region)
    t1 = rf.p * rf.p - 2
    t2 = rf.q * rf.q - 2
    t3 = eval_word(Word([(0, 2), (1, 2)]), rf.images).trace()

    n = rf.field.degree
    span = _Span(n)
    span.add([QQ_ONE] + [QQ_ZERO] * (n - 1))
    basis = [rf.field.one()]
    gens = [t1, t2, t3]
    work = list(gens)
    while work:
        el = work.pop()
        if span.add(list(el.coeffs)):
            basis.append(el)
            work.extend(el * g for g in gens)
    subdeg = span.rank

    for radius in range(bound + 1):
        for k, l in itertools.product(range(-radius, radius + 1), repeat=2):
            if max(abs(k), abs(l)) != radius:
                continue
            t = t1 + k * t2 + l * t3
            poly = minimal_polynomial(t)
            if poly.degree == subdeg:
                tcols = [list((t ** j).coeffs) for j in range(subdeg)]
                for gen_el in gens:
                    if solve_linear(tcols, list(gen_el.coeffs)) is None:
                        raise PrimitiveSearchError(
                            f"{region.name}: generator not expressible in "
                            "the primitive element's powers")
                return poly
    raise PrimitiveSearchError(
        f"{region.name}: no primitive combination with |k|,|l| <= {bound}; "
        "enlarge the bound")


# ---------------------------------------------------------------------------
# Field isomorphism
# ---------------------------------------------------------------------------

def _squarefree_kernel(n: int) -> int:
    """Squarefree part of a nonzero integer (sign preserved)."""
    out = 1 if n > 0 else -1
    n = abs(n)
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e % 2:
            out *= d
        d += 1
    return out * n


def _has_root_in(host: IntPoly, guest: IntPoly, dps: int) -> bool:
    """True (proved) if `guest` has a root in Q[x]/(host): numeric root
    matching followed by exact verification."""
    K = NumberField(host)
    alpha = host.roots_mpc(dps)[0]
    alpha_ap = APComplex.from_mpc(alpha, dps)
    for beta in guest.roots_mpc(dps):
        beta_ap = APComplex.from_mpc(beta, dps)
        try:
            coeffs = express_in_field(beta_ap, alpha_ap, host, denom_bound=10 ** 9)
        except NoRelationFound:
            continue
        candidate = K.element(coeffs)
        if guest(candidate).is_zero():
            return True
    return False


def same_field(P: IntPoly, Q: IntPoly, dps: int = 0) -> bool:
    """Field isomorphism Q[x]/(P) = Q[x]/(Q).  A True answer is proved
    exactly; a False answer for equal degrees rests on the numeric
    search being exhaustive at the working precision."""
    P = P.primitive()
    Q = Q.primitive()
    if P.degree != Q.degree:
        return False
    if P == Q:
        return True
    if P.degree == 1:
        return True
    if P.degree == 2:
        dp = P.coeffs[1] ** 2 - 4 * P.coeffs[2] * P.coeffs[0]
        dq = Q.coeffs[1] ** 2 - 4 * Q.coeffs[2] * Q.coeffs[0]
        return _squarefree_kernel(dp) == _squarefree_kernel(dq)
    if not dps:
        dps = max(160, 30 * P.degree)
    return _has_root_in(P, Q, dps) or _has_root_in(Q, P, dps)


# ---------------------------------------------------------------------------
# Exact parameter symmetries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryOutcome:
    region: str
    kind: str           # "a=c,b=1" or "b^2=a" or "b^2=-a" or "none"
    sign: int           # realized sign for the b^2 = +-a case (0 otherwise)
    holds: bool
    notes: str = ""

    def __bool__(self):
        return self.holds


def _principal_sqrt_mid(rect, digits: int) -> APComplex:
    return rect.midpoint(digits).sqrt()


def verify_symmetries_exact(region: RegionRecord, digits: int = 40) -> SymmetryOutcome:
    """Exact identities among a = sqrt(L'), b = sqrt(R'), c = sqrt(D').

    a = z is pinned by tr1 = tr2 (exact) plus a numeric branch check;
    then R' is computed exactly in Q(z), and the claims reduce to exact
    field identities.  Branch choices are pinned numerically with a
    separation argument.
    """
    rf = region_field(region)
    if rf.p != rf.q:
        return SymmetryOutcome(region.name, "none", 0, False,
                               "tr1 != tr2: a = z identification unavailable")
    z_num = region.z_seed(digits)
    a_num = _principal_sqrt_mid(region.box.Lp, digits)
    b_num = _principal_sqrt_mid(region.box.Rp, digits)
    c_num = _principal_sqrt_mid(region.box.Dp, digits)
    sep = abs(z_num - 1 / z_num)
    if sep < mpmath.mpf("0.01"):
        return SymmetryOutcome(region.name, "none", 0, False,
                               "z too close to the unit circle to pin branches")
    pin_tol = sep / 10
    if abs(a_num - z_num) > pin_tol:
        return SymmetryOutcome(region.name, "none", 0, False,
                               "sqrt(L') does not match the catalog z branch")

    den = rf.r * rf.z - rf.q
    if den.is_zero():
        return SymmetryOutcome(region.name, "none", 0, False,
                               "degenerate: r*z - q = 0")
    R_exact = (rf.q * rf.z * rf.z - rf.r * rf.z) / den

    if R_exact == 1:
        # b^2 = 1; principal sqrt of R' ~ 1 pins b = +1
        if abs(b_num - 1) > pin_tol:
            return SymmetryOutcome(region.name, "none", 0, False,
                                   "R' = 1 but sqrt(R') is not near +1")
        # c satisfies the same quadratic as z; pin the branch
        if abs(c_num - z_num) > pin_tol:
            return SymmetryOutcome(region.name, "none", 0, False,
                                   "sqrt(D') matches neither z nor 1/z")
        return SymmetryOutcome(region.name, "a=c,b=1", 0, True,
                               "R'=1 exactly; c = z = a pinned numerically")
    for sign in (1, -1):
        if R_exact == sign * rf.z:
            # numeric consistency of the branch: b^2 ~ sign * a
            if abs(b_num * b_num - sign * a_num) > pin_tol:
                return SymmetryOutcome(region.name, "none", 0, False,
                                       "exact R' = +-z but numeric branch disagrees")
            kind = "b^2=a" if sign == 1 else "b^2=-a"
            return SymmetryOutcome(region.name, kind, sign, True,
                                   "R' = %sz exactly" % ("" if sign == 1 else "-"))
    return SymmetryOutcome(region.name, "none", 0, False,
                           "neither R'=1 nor R'=+-z holds exactly")


# ---------------------------------------------------------------------------
# Derived region centers (bootstraps the six unprinted boxes)
# ---------------------------------------------------------------------------

def derived_center(region_data: dict, digits: int = 60):
    """(L', D', R') center recomputed from exact table data.

    Input is a raw catalog record (before boxes exist): z_minpoly,
    z_approx seed and the trace polynomials.  Branches are fixed by
    |a| > 1, |c| > 1 and the principal square root of R'.
    """
    from ._rat import parse_decimal

    minpoly = IntPoly(region_data["z_minpoly"])
    seed = mpmath.mpc(float(parse_decimal(region_data["z_approx"][0])),
                      float(parse_decimal(region_data["z_approx"][1])))
    z = refine_root(minpoly, seed, digits, max_drift=1e-6)
    tr1 = _parse_ratlist(region_data["tr1"])
    tr2 = tr1 if region_data["tr2"] == "tr1" else _parse_ratlist(region_data["tr2"])
    tr3 = tr1 if region_data["tr3"] == "tr1" else _parse_ratlist(region_data["tr3"])
    p = eval_ratpoly(tr1, z)
    q = eval_ratpoly(tr2, z)
    r = eval_ratpoly(tr3, z)
    tol = mpmath.mpf(10) ** (-digits + 10)
    if abs(z * (q - z) - 1) > tol:
        raise VerificationError("z*(q - z) != 1 numerically")
    if abs(p - q) > tol:
        raise VerificationError("tr1 != tr2 numerically; cannot set a = z")
    if abs(z) <= 1:
        raise VerificationError("|z| <= 1: wrong branch for a")
    a = z
    L = a * a
    R = (q * L - r * a) / (r * a - q)
    b = R.sqrt()
    ch = q * b / (1 + R)
    s = (ch * ch - 1).sqrt()
    c = ch + s
    if abs(c) < 1:
        c = ch - s
    D = c * c
    return L, D, R

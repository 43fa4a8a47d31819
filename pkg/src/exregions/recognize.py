"""Recognition of high-precision complex numbers as algebraic numbers.

The engine is an exact integer LLL (delta = 0.99, all arithmetic over Z;
no floating-point Gram-Schmidt).  algdep() builds the standard lattice
embedding of (1, x, ..., x^d) with scaled real/imaginary columns and
reads a candidate minimal polynomial off the reduced basis;
express_in_field() does the same for the basis (1, z, ..., z^{n-1}, x).
Every result is a guess and must be re-verified exactly downstream.
"""

from __future__ import annotations

import math

import mpmath
from mpmath import mp

from ._rat import QQ, ZZ, QQ_ZERO
from .apnum import APComplex, _bits

LLL_DELTA_NUM = 99
LLL_DELTA_DEN = 100


class RecognitionError(Exception):
    pass


class NoRelationFound(RecognitionError):
    """No integer relation under the height bound; raise degree or precision."""


# ---------------------------------------------------------------------------
# Integer polynomials
# ---------------------------------------------------------------------------

class IntPoly:
    """Integer polynomial; coefficients constant term first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = [int(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def content(self) -> int:
        return math.gcd(*(abs(c) for c in self.coeffs)) if self.coeffs else 0

    def primitive(self) -> "IntPoly":
        """Content 1, positive leading coefficient."""
        if not self.coeffs:
            return self
        g = self.content()
        if self.coeffs[-1] < 0:
            g = -g
        return IntPoly([c // g for c in self.coeffs])

    def derivative(self) -> "IntPoly":
        return IntPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __neg__(self):
        return IntPoly([-c for c in self.coeffs])

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly(out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly([other * c for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return IntPoly([])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"IntPoly({list(self.coeffs)})"

    def __call__(self, x):
        """Horner evaluation; works for any scalar supporting + and *."""
        out = 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def eval_mpc(self, x, dps: int):
        with mp.workprec(_bits(dps)):
            x = mpmath.mpc(x)
            out = mpmath.mpc(0)
            for c in reversed(self.coeffs):
                out = out * x + c
            return out

    def height(self) -> int:
        return max(abs(c) for c in self.coeffs) if self.coeffs else 0

    def gcd(self, other: "IntPoly") -> "IntPoly":
        """Polynomial gcd over Q, returned primitive over Z."""
        a = [QQ(c) for c in self.coeffs]
        b = [QQ(c) for c in other.coeffs]

        def trim(p):
            while p and p[-1] == 0:
                p.pop()
            return p

        a, b = trim(a), trim(b)
        while b:
            # a mod b
            r = list(a)
            while len(r) >= len(b) and trim(r):
                f = r[-1] / b[-1]
                k = len(r) - len(b)
                for i, c in enumerate(b):
                    r[i + k] -= f * c
                r = trim(r)
            a, b = b, r
        if not a:
            return IntPoly([])
        den = 1
        for c in a:
            den = den * c.denominator // math.gcd(den, int(c.denominator))
        return IntPoly([int(c * den) for c in a]).primitive()

    def squarefree_part(self) -> "IntPoly":
        if self.degree <= 1:
            return self.primitive()
        g = self.gcd(self.derivative())
        if g.degree <= 0:
            return self.primitive()
        q, r = self.divmod_exact(g)
        if q is None:
            raise RecognitionError("gcd does not divide its polynomial")
        return q.primitive()

    def divmod_exact(self, other: "IntPoly"):
        """Quotient over Q if the division is exact, else None."""
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        rem = [QQ(c) for c in self.coeffs]
        quo = [QQ_ZERO] * max(len(self.coeffs) - len(other.coeffs) + 1, 1)
        while len(rem) >= len(other.coeffs):
            while rem and rem[-1] == 0:
                rem.pop()
            if len(rem) < len(other.coeffs):
                break
            f = rem[-1] / other.coeffs[-1]
            k = len(rem) - len(other.coeffs)
            quo[k] = f
            for i, c in enumerate(other.coeffs):
                rem[i + k] -= f * c
            rem.pop()
        if any(c != 0 for c in rem):
            return None, IntPoly([])
        den = 1
        for c in quo:
            den = den * c.denominator // math.gcd(den, int(c.denominator))
        if den != 1:
            return None, IntPoly([])
        return IntPoly([int(c) for c in quo]), IntPoly([])

    def roots_mpc(self, dps: int = 60):
        """All complex roots at working precision dps."""
        with mp.workdps(dps + 10):
            coeffs = [mpmath.mpf(c) for c in reversed(self.coeffs)]
            return mpmath.polyroots(coeffs, maxsteps=200, extraprec=_bits(dps) // 2)


def refine_root(poly: IntPoly, seed, digits: int, max_drift: float = 1e-3):
    """Newton-refine a complex root of `poly` from `seed` up to `digits`
    digits.  Raises if the iteration drifts more than `max_drift` from
    the seed (wrong or corrupted seed)."""
    deriv = poly.derivative()
    x = mpmath.mpc(seed)
    dps = 30
    while True:
        with mp.workdps(dps + 10):
            x = mpmath.mpc(x)
            for _ in range(80):
                px = poly(x)
                dpx = deriv(x)
                if dpx == 0:
                    raise RecognitionError("zero derivative during root refinement")
                step = px / dpx
                x = x - step
                if abs(step) < mpmath.mpf(10) ** (-dps + 2):
                    break
            else:
                raise RecognitionError("root refinement did not converge")
        if abs(x - mpmath.mpc(seed)) > max_drift:
            raise RecognitionError(
                f"refined root drifted {mpmath.nstr(abs(x - mpmath.mpc(seed)), 5)} "
                f"from seed (tolerance {max_drift})")
        if dps >= digits:
            break
        dps = min(2 * dps, digits)
    with mp.workdps(digits + 10):
        return APComplex.from_mpc(mpmath.mpc(x), digits)


# ---------------------------------------------------------------------------
# Exact integer LLL (de Weger / Cohen Algorithm 2.6.7)
# ---------------------------------------------------------------------------

def lll_reduce(basis):
    """LLL-reduce integer basis rows with delta = 0.99, exactly over Z.

    Rows must be linearly independent.  Returns a new list of rows; the
    row span over Z (the lattice) is unchanged.
    """
    b = [[ZZ(x) for x in row] for row in basis]
    n = len(b)
    if n == 0:
        return []
    m = len(b[0])
    if any(len(row) != m for row in b):
        raise ValueError("ragged basis")
    if any(all(x == 0 for x in row) for row in b):
        raise ValueError("zero row in basis")
    if n > m:
        raise ValueError("more rows than columns: not a basis")

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    # d[i] = Gram determinant of the first i rows; lam[i][j] = d[j+1]*mu_{i,j}
    d = [ZZ(1)] * (n + 1)
    lam = [[ZZ(0)] * n for _ in range(n)]

    def init_row(i):
        for j in range(i + 1):
            u = dot(b[i], b[j])
            for k in range(j):
                u = (d[k + 1] * u - lam[i][k] * lam[j][k]) // d[k]
            if j < i:
                lam[i][j] = u
            else:
                if u == 0:
                    raise ValueError("rows are linearly dependent")
                d[i + 1] = u

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            for j in range(l):
                lam[k][j] -= q * lam[l][j]
            lam[k][l] -= q * d[l + 1]

    def swap(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lam_ = lam[k][k - 1]
        new_d = (d[k - 1] * d[k + 1] + lam_ * lam_) // d[k]
        for i in range(k + 1, n):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lam_ * t) // d[k]
            lam[i][k - 1] = (new_d * t + lam_ * lam[i][k]) // d[k + 1]
        d[k] = new_d

    k_max = 0
    init_row(0)
    k = 1
    while k < n:
        if k > k_max:
            k_max = k
            init_row(k)
        red(k, k - 1)
        # Lovasz with delta = 99/100:
        #   swap iff 100*(d[k+1]*d[k-1] + lam^2) < 99*d[k]^2
        lam_ = lam[k][k - 1]
        if LLL_DELTA_DEN * (d[k + 1] * d[k - 1] + lam_ * lam_) < LLL_DELTA_NUM * d[k] * d[k]:
            swap(k)
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return [[int(x) for x in row] for row in b]


def gram_schmidt_rational(basis):
    """Exact Gram-Schmidt of integer rows: (mu, bstar_norms) over Q."""
    n = len(basis)
    mu = [[QQ_ZERO] * n for _ in range(n)]
    bstar = []
    norms = []
    for i in range(n):
        v = [QQ(x) for x in basis[i]]
        for j in range(len(bstar)):
            num = sum(QQ(x) * y for x, y in zip(basis[i], bstar[j]))
            mu[i][j] = num / norms[j]
            v = [a - mu[i][j] * c for a, c in zip(v, bstar[j])]
        bstar.append(v)
        norms.append(sum(x * x for x in v))
    return mu, norms


def is_lll_reduced(basis, delta_num=LLL_DELTA_NUM, delta_den=LLL_DELTA_DEN) -> bool:
    """Exact check of size reduction and the Lovasz condition."""
    mu, norms = gram_schmidt_rational(basis)
    n = len(basis)
    for i in range(n):
        for j in range(i):
            if 2 * abs(mu[i][j]) > 1:
                return False
    for k in range(1, n):
        lhs = delta_den * (norms[k] + mu[k][k - 1] ** 2 * norms[k - 1])
        rhs = delta_num * norms[k - 1]
        if lhs < rhs:
            return False
    return True


# ---------------------------------------------------------------------------
# algdep and field expression
# ---------------------------------------------------------------------------

def _scaled_int(value) -> int:
    return int(mpmath.nint(value))


def _power_columns(x: APComplex, count: int, prec: int):
    """[(round(S*Re x^j), round(S*Im x^j))] for j < count, S = 10^(prec-10)."""
    scale = mpmath.mpf(10) ** (prec - 10)
    cols = []
    with mp.workprec(_bits(prec) + 64):
        xv = x.to_mpc()
        pw = mpmath.mpc(1)
        for _ in range(count):
            cols.append((_scaled_int(scale * pw.real), _scaled_int(scale * pw.imag)))
            pw = pw * xv
    return cols


def algdep(x: APComplex, max_degree: int, height_digits: int = 10) -> IntPoly:
    """Guess an integer polynomial with root x by lattice reduction.

    The guess is normalized (primitive, positive leading coefficient,
    squarefree) but NOT proved: exact verification downstream is
    mandatory.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    prec = int(x.digits)
    if prec < (max_degree + 2) * height_digits / 2:
        raise RecognitionError(
            f"insufficient precision: {prec} digits for degree {max_degree} "
            f"(need >= {(max_degree + 2) * height_digits / 2:.0f})")
    ncols = max_degree + 1
    powers = _power_columns(x, ncols, prec)
    rows = []
    for j in range(ncols):
        row = [0] * ncols + [powers[j][0], powers[j][1]]
        row[j] = 1
        rows.append(row)
    reduced = lll_reduce(rows)

    threshold = mpmath.mpf(10) ** (-prec // 2)
    accepted = []
    with mp.workprec(_bits(prec)):
        for row in reduced[:4]:
            poly = IntPoly(row[:ncols])
            if poly.is_zero():
                continue
            residual = abs(poly.eval_mpc(x.to_mpc(), prec))
            if residual < threshold * max(poly.height(), 1):
                accepted.append(poly)
    if not accepted:
        raise NoRelationFound(
            f"no relation of degree <= {max_degree} at {prec} digits")

    candidates = [accepted[0]]
    if len(accepted) > 1:
        g = accepted[0]
        for other in accepted[1:]:
            g = g.gcd(other)
        if g.degree >= 1:
            candidates.append(g)
    candidates = [c.primitive().squarefree_part() for c in candidates]
    with mp.workprec(_bits(prec)):
        good = [c for c in candidates
                if abs(c.eval_mpc(x.to_mpc(), prec)) < threshold * max(c.height(), 1)]
    if not good:
        raise NoRelationFound("candidates failed the residual test after normalization")
    return min(good, key=lambda c: (c.degree, c.height()))


def express_in_field(x: APComplex, z: APComplex, z_minpoly: IntPoly,
                     denom_bound: int = 64):
    """Guess rational c_0..c_{n-1} with x = sum c_j z^j, common denominator
    <= denom_bound.  Returns a tuple of rationals (constant first); exact
    verification downstream is mandatory."""
    n = z_minpoly.degree
    if n < 1:
        raise ValueError("z_minpoly must have degree >= 1")
    prec = int(min(x.digits, z.digits))
    zcols = _power_columns(z, n, prec)
    xcol = _power_columns(x, 2, prec)[1]
    rows = []
    for j in range(n):
        row = [0] * (n + 1) + [zcols[j][0], zcols[j][1]]
        row[j] = 1
        rows.append(row)
    rows.append([0] * n + [1, xcol[0], xcol[1]])
    reduced = lll_reduce(rows)

    threshold = mpmath.mpf(10) ** (-prec // 2)
    with mp.workprec(_bits(prec)):
        zv = z.to_mpc()
        xv = x.to_mpc()
        for row in reduced[:4]:
            den = row[n]
            if den == 0 or abs(den) > denom_bound:
                continue
            value = mpmath.mpc(0)
            for j in reversed(range(n)):
                value = value * zv + row[j]
            if abs(value + den * xv) < threshold * abs(den):
                return tuple(QQ(-row[j], den) for j in range(n))
    raise NoRelationFound(
        f"no expression over the field with denominator <= {denom_bound}")

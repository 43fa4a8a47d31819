"""Arbitrary-precision complex scalars, 2x2 matrices over any scalar
domain, and numeric word evaluation.

Precision is carried by each APComplex value (decimal digits), not by a
global mode: every operation runs at the minimum precision of its
operands, so pipelines at different precisions cannot interfere.
"""

from __future__ import annotations

import math

import mpmath
from mpmath import mp

from ._rat import is_rational
from .words import Word

EXACT = math.inf
_INT_DPS = 60  # working precision when every operand is an exact small integer


def _bits(dps: float) -> int:
    if dps == EXACT:
        dps = _INT_DPS
    return int(dps * 3.3219280948873626) + 16


class APComplex:
    """Immutable complex value with explicit decimal precision.

    Exact small integers embed with infinite stated precision so that
    identity matrices and relator signs never truncate anything.
    """

    __slots__ = ("re", "im", "digits")

    def __init__(self, re, im=0, digits: float = EXACT):
        if isinstance(re, APComplex):
            raise TypeError("use apc() to adjust precision of an APComplex")
        if digits == EXACT and not (isinstance(re, int) and isinstance(im, int)):
            raise ValueError("non-integer APComplex needs an explicit precision")
        with mp.workprec(_bits(digits)):
            object.__setattr__(self, "re", mpmath.mpf(re))
            object.__setattr__(self, "im", mpmath.mpf(im))
        object.__setattr__(self, "digits", digits)

    def __setattr__(self, *a):
        raise AttributeError("APComplex is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_mpc(cls, value, digits: float) -> "APComplex":
        out = object.__new__(cls)
        with mp.workprec(_bits(digits)):
            if hasattr(value, "real"):
                re, im = mpmath.mpf(value.real), mpmath.mpf(value.imag)
            else:
                re, im = mpmath.mpf(value), mpmath.mpf(0)
        object.__setattr__(out, "re", re)
        object.__setattr__(out, "im", im)
        object.__setattr__(out, "digits", digits)
        return out

    @classmethod
    def from_strings(cls, re_text: str, im_text: str, digits: float) -> "APComplex":
        with mp.workprec(_bits(digits)):
            re = mpmath.mpf(re_text)
            im = mpmath.mpf(im_text)
        return cls.from_mpc(mpmath.mpc(re, im), digits)

    def to_mpc(self):
        # constructed at own precision: mpc() rounds components to the
        # ambient context, which must never truncate a stored value
        with mp.workprec(_bits(self.digits)):
            return mpmath.mpc(self.re, self.im)

    # -- arithmetic ------------------------------------------------------------

    def _binop(self, other, fn):
        if isinstance(other, APComplex):
            digits = min(self.digits, other.digits)
            with mp.workprec(_bits(digits)):
                value = fn(self.to_mpc(), other.to_mpc())
        elif isinstance(other, int):
            digits = self.digits
            with mp.workprec(_bits(digits)):
                value = fn(self.to_mpc(), mpmath.mpf(other))
        elif is_rational(other):
            digits = self.digits
            with mp.workprec(_bits(digits)):
                value = fn(self.to_mpc(),
                           mpmath.mpf(int(other.numerator)) / int(other.denominator))
        else:
            return NotImplemented
        return APComplex.from_mpc(value, digits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __neg__(self):
        with mp.workprec(_bits(self.digits)):
            value = mpmath.mpc(-self.re, -self.im)
        return APComplex.from_mpc(value, self.digits)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        out = APComplex(1)
        base = self if n >= 0 else 1 / self
        for _ in range(abs(n)):
            out = out * base
        return out

    def conj(self) -> "APComplex":
        with mp.workprec(_bits(self.digits)):
            value = mpmath.mpc(self.re, -self.im)
        return APComplex.from_mpc(value, self.digits)

    def sqrt(self) -> "APComplex":
        """Principal branch: nonnegative real part, and nonnegative
        imaginary part on the cut."""
        with mp.workprec(_bits(self.digits)):
            value = mpmath.sqrt(self.to_mpc())
        return APComplex.from_mpc(value, self.digits)

    def __abs__(self):
        with mp.workprec(_bits(self.digits)):
            return mpmath.sqrt(self.re * self.re + self.im * self.im)

    def __eq__(self, other):
        if isinstance(other, int):
            other = APComplex(other)
        if not isinstance(other, APComplex):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        shown = 12 if self.digits == EXACT else min(int(self.digits), 25)
        return f"APComplex({mpmath.nstr(self.to_mpc(), shown)}, dps={self.digits})"


def apc(value, digits: float) -> APComplex:
    """Round any mpmath/complex/int value to an APComplex at `digits`."""
    if isinstance(value, APComplex):
        value = value.to_mpc()
    with mp.workprec(_bits(digits)):
        return APComplex.from_mpc(mpmath.mpc(value), digits)


class Mat2:
    """2x2 matrix over any scalar domain supporting +, -, * with itself
    and with Python ints.  Generator matrices built here always have
    determinant 1, so the adjugate is the inverse."""

    __slots__ = ("m11", "m12", "m21", "m22")

    def __init__(self, m11, m12, m21, m22):
        self.m11, self.m12, self.m21, self.m22 = m11, m12, m21, m22

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @classmethod
    def zero(cls) -> "Mat2":
        return cls(0, 0, 0, 0)

    def entries(self):
        return (self.m11, self.m12, self.m21, self.m22)

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.m11 + other.m11, self.m12 + other.m12,
                    self.m21 + other.m21, self.m22 + other.m22)

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.m11 - other.m11, self.m12 - other.m12,
                    self.m21 - other.m21, self.m22 - other.m22)

    def scale(self, s) -> "Mat2":
        return Mat2(s * self.m11, s * self.m12, s * self.m21, s * self.m22)

    def adjugate(self) -> "Mat2":
        return Mat2(self.m22, -self.m12, -self.m21, self.m11)

    def det(self):
        return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self):
        return self.m11 + self.m22

    def __eq__(self, other):
        return isinstance(other, Mat2) and all(
            a == b for a, b in zip(self.entries(), other.entries()))

    def __repr__(self):
        return f"Mat2({self.m11!r}, {self.m12!r}, {self.m21!r}, {self.m22!r})"


def mat_mul(a: Mat2, b: Mat2) -> Mat2:
    return a * b


def mat_pow(base: Mat2, n: int) -> Mat2:
    """base**n for n >= 0 by binary exponentiation."""
    out = Mat2.identity()
    while n:
        if n & 1:
            out = out * base
        base = base * base
        n >>= 1
    return out


def eval_word(word: Word, images: dict[int, Mat2]) -> Mat2:
    """Product of generator images over the runs of `word`; empty word
    gives the identity.  Images must have determinant 1 (inverses are
    taken by adjugate)."""
    out = Mat2.identity()
    for gen, exp in word:
        if gen not in images:
            raise KeyError(f"no image for generator index {gen}")
        base = images[gen] if exp > 0 else images[gen].adjugate()
        out = out * mat_pow(base, abs(exp))
    return out


def eval_word_with_derivative(word: Word, images: dict[int, Mat2],
                              d_images: dict[int, Mat2]) -> tuple[Mat2, Mat2]:
    """(value, d(value)/d(theta)) where d_images holds d(image)/d(theta).

    Product rule accumulated left to right; the derivative of an inverse
    image is the adjugate of the derivative image (valid because the
    images have determinant identically 1 in theta).
    """
    value = Mat2.identity()
    deriv = Mat2.zero()
    for gen, exp in word:
        if gen not in images or gen not in d_images:
            raise KeyError(f"no image/derivative for generator index {gen}")
        if exp > 0:
            base, d_base = images[gen], d_images[gen]
        else:
            base, d_base = images[gen].adjugate(), d_images[gen].adjugate()
        for _ in range(abs(exp)):
            deriv = deriv * base + value * d_base
            value = value * base
    return value, deriv


def word_derivative(word: Word, images: dict[int, Mat2],
                    d_images: dict[int, Mat2]) -> Mat2:
    return eval_word_with_derivative(word, images, d_images)[1]

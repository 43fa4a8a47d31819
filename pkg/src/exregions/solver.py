"""Parametrization of the marked groups and the high-precision solve.

f is diagonal with eigenvalue sqrt(L'), w is built from sqrt(R') and the
half-sum/half-difference of sqrt(D') and its inverse.  The quasi-relator
equations (eight complex entries, three independent) are solved by
Gauss-Newton on 16 real equations in the 6 real unknowns Re/Im of
L', D', R', starting from the box midpoint, on a precision ladder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from .apnum import APComplex, Mat2, apc, eval_word, eval_word_with_derivative, _bits
from .catalog import BoxRegion, RegionRecord
from .words import Word


class SolverError(Exception):
    pass


class DivergenceError(SolverError):
    pass


class StagnationError(SolverError):
    pass


class BranchError(SolverError):
    pass


@dataclass(frozen=True)
class ParamPoint:
    """The exponentials L', D', R' of the translation parameters."""
    Lp: APComplex
    Dp: APComplex
    Rp: APComplex

    def __post_init__(self):
        for name in ("Lp", "Dp", "Rp"):
            if abs(getattr(self, name)) == 0:
                raise SolverError(f"zero parameter {name}")

    @property
    def digits(self):
        return min(self.Lp.digits, self.Dp.digits, self.Rp.digits)

    def at_digits(self, digits: int) -> "ParamPoint":
        return ParamPoint(apc(self.Lp, digits), apc(self.Dp, digits),
                          apc(self.Rp, digits))


@dataclass(frozen=True)
class TracePoint:
    """p = tr f, q = tr w, r = tr(f^-1 w), and z with z^2 - q z + 1 = 0."""
    p: APComplex
    q: APComplex
    r: APComplex
    z: APComplex


def build_fw(pt: ParamPoint) -> tuple[Mat2, Mat2]:
    a = pt.Lp.sqrt()
    rt = pt.Rp.sqrt()
    d = pt.Dp.sqrt()
    ch = (d + 1 / d) / 2
    sh = (d - 1 / d) / 2
    f = Mat2(a, APComplex(0), APComplex(0), 1 / a)
    w = Mat2(rt * ch, rt * sh, sh / rt, ch / rt)
    return f, w


def traces_from_params(pt: ParamPoint) -> tuple[APComplex, APComplex, APComplex]:
    """tr(f^2), tr(w^2), tr(f^2 w^2) in closed form."""
    L, D, R = pt.Lp, pt.Dp, pt.Rp
    trf2 = L + 1 / L
    dd = D + 1 / D
    rr = R + 1 / R
    trw2 = ((rr + 2) * (dd + 2) - 8) / 4
    RL = R * L
    trf2w2 = ((dd + 2) * (RL + 1 / RL) + (dd - 2) * (L + 1 / L)) / 4
    return trf2, trw2, trf2w2


def trace_point(pt: ParamPoint) -> TracePoint:
    """Traces of the actual matrices, with z the root of z^2 - q z + 1
    outside the unit circle."""
    f, w = build_fw(pt)
    p = f.trace()
    q = w.trace()
    r = (f.adjugate() * w).trace()
    disc = (q * q - 4).sqrt()
    z = (q + disc) / 2
    if abs(z) < 1:
        z = (q - disc) / 2
    return TracePoint(p, q, r, z)


def conjugate_pair(p, q, r, z) -> tuple[Mat2, Mat2]:
    """The trace normal form: f2 = [[0,1],[-1,p]], w2 = [[z,0],[p z - r, q - z]].

    Works over any scalar domain (numeric or exact); requires
    z*(q - z) = 1 so that det(w2) = 1.
    """
    f2 = Mat2(0, 1, -1, p)
    w2 = Mat2(z, 0, p * z - r, q - z)
    return f2, w2


def conjugate_pair_from_traces(tp: TracePoint) -> tuple[Mat2, Mat2]:
    check = tp.z * (tp.q - tp.z) - 1
    tol = mpmath.mpf(10) ** (-int(min(tp.z.digits, tp.q.digits)) + 10)
    if abs(check) > tol:
        raise SolverError("z does not satisfy z*(q - z) = 1 at working precision")
    return conjugate_pair(tp.p, tp.q, tp.r, tp.z)


def traces_to_params(tp: TracePoint, box: BoxRegion) -> ParamPoint:
    """Invert the trace map inside `box`.

    Branches: two roots of x^2 - p x + 1 (choice of L'), two signs of
    sqrt(L') feeding the R' formula, and two signs in the D' quadratic.
    Exactly one candidate must land in the box and reproduce (p, q, r).
    """
    p, q, r = tp.p, tp.q, tp.r
    digits = int(min(p.digits, q.digits, r.digits))
    tol = mpmath.mpf(10) ** (-digits + 10)
    if abs(p * p - 4) < tol:
        raise BranchError("p^2 = 4: f is not loxodromic")
    disc = (p * p - 4).sqrt()
    matches = []
    seen = []
    for root_sign in (1, -1):
        a = (p + root_sign * disc) / 2
        L = a * a
        for sqrt_sign in (1, -1):
            sa = a * sqrt_sign
            den = r * sa - q
            if abs(den) < tol:
                continue
            R = (q * L - r * sa) / den
            if abs(R) == 0 or abs(1 + R) < tol:
                continue
            rtR = R.sqrt()
            d_disc = (4 * q * q * R - 4 * (1 + R) * (1 + R)).sqrt()
            for d_sign in (1, -1):
                D = ((2 * q * rtR + d_sign * d_disc) / (2 * (1 + R))) ** 2
                if abs(D) == 0:
                    continue
                cand = ParamPoint(L, D, R)
                seen.append(cand)
                if not box.contains(L, D, R):
                    continue
                got = trace_point(cand)
                err = max(abs(got.p - p), abs(got.q - q), abs(got.r - r))
                if err < tol:
                    matches.append(cand)
    # distinct branches can coincide numerically (e.g. R' = 1); dedupe
    unique: list[ParamPoint] = []
    for cand in matches:
        if not any(abs(cand.Lp - u.Lp) < tol and abs(cand.Dp - u.Dp) < tol
                   and abs(cand.Rp - u.Rp) < tol for u in unique):
            unique.append(cand)
    if not unique:
        raise BranchError(
            f"no branch lands in box {box.name} (tried {len(seen)} candidates)")
    if len(unique) > 1:
        raise BranchError(
            f"ambiguous inversion in box {box.name}: {unique}")
    return unique[0]


# ---------------------------------------------------------------------------
# Newton solving
# ---------------------------------------------------------------------------

def _fw_with_derivatives(pt: ParamPoint):
    """(images, d_images per parameter) for the relator evaluation."""
    L, D, R = pt.Lp, pt.Dp, pt.Rp
    a = L.sqrt()
    rt = R.sqrt()
    d = D.sqrt()
    ch = (d + 1 / d) / 2
    sh = (d - 1 / d) / 2
    zero = APComplex(0)
    f = Mat2(a, zero, zero, 1 / a)
    w = Mat2(rt * ch, rt * sh, sh / rt, ch / rt)
    # d(sqrt u)/du = 1/(2 sqrt u) on the principal branch
    da = 1 / (2 * a)
    df_dL = Mat2(da, zero, zero, -1 / (2 * a * L))
    drt = 1 / (2 * rt)
    dw_dR = Mat2(ch * drt, sh * drt, -sh / (2 * R * rt), -ch / (2 * R * rt))
    dch = (1 - 1 / D) / (4 * d)
    dsh = (1 + 1 / D) / (4 * d)
    dw_dD = Mat2(rt * dch, rt * dsh, dsh / rt, dch / rt)
    zmat = Mat2.zero()
    images = {0: f, 1: w}
    d_images = (
        {0: df_dL, 1: zmat},  # d/dL'
        {0: zmat, 1: dw_dD},  # d/dD'
        {0: zmat, 1: dw_dR},  # d/dR'
    )
    return images, d_images


@dataclass
class RegionSolve:
    region: str
    digits: int
    point: ParamPoint
    signs: tuple[int, int]
    iterations: int
    final_residual: str
    residual_log: list = field(default_factory=list)


def _relator_signs(region: RegionRecord, digits: int = 30) -> tuple[int, int]:
    """SL(2) sign of each quasi-relator at the box midpoint: the nearer
    of +I, -I."""
    pt = _midpoint(region, digits)
    images, _ = _fw_with_derivatives(pt)
    signs = []
    for word in region.quasi_relators:
        m = eval_word(word, images)
        plus = sum(abs(x) for x in (m - Mat2.identity()).entries())
        minus = sum(abs(x) for x in (m + Mat2.identity()).entries())
        signs.append(1 if plus <= minus else -1)
    return tuple(signs)


def _midpoint(region: RegionRecord, digits: int) -> ParamPoint:
    box = region.box
    return ParamPoint(box.Lp.midpoint(digits), box.Dp.midpoint(digits),
                      box.Rp.midpoint(digits))


def _residual_entries(region: RegionRecord, pt: ParamPoint, signs):
    images, d_images = _fw_with_derivatives(pt)
    vals = []
    ders = [[], [], []]
    for word, sign in zip(region.quasi_relators, signs):
        value = eval_word(word, images)
        diff = value - Mat2.identity().scale(sign)
        vals.extend(diff.entries())
        for k in range(3):
            _, dm = eval_word_with_derivative(word, images, d_images[k])
            ders[k].extend(dm.entries())
    return vals, ders


def _max_abs(values) -> mpmath.mpf:
    return max(abs(v) for v in values)


def solve_region(region: RegionRecord, digits: int) -> RegionSolve:
    """Gauss-Newton solve of the quasi-relator equations in the region box."""
    if digits < 30:
        raise SolverError("digits must be >= 30")
    signs = _relator_signs(region)
    ladder = [40, digits] if digits > 40 else [digits]
    pt = _midpoint(region, ladder[0] + 10)
    total_iters = 0
    log = []
    for stage in ladder:
        pt, iters = _newton_stage(region, pt.at_digits(stage + 10), signs,
                                  stage, log)
        total_iters += iters
    point = ParamPoint(apc(pt.Lp, digits), apc(pt.Dp, digits), apc(pt.Rp, digits))
    vals, _ = _residual_entries(region, point, signs)
    final = _max_abs(vals)
    return RegionSolve(
        region=region.name, digits=digits, point=point,
        signs=signs, iterations=total_iters,
        final_residual=mpmath.nstr(final, 5), residual_log=log)


def newton_solve(region: RegionRecord, digits: int) -> ParamPoint:
    return solve_region(region, digits).point


def _newton_stage(region: RegionRecord, pt: ParamPoint, signs, digits: int,
                  log: list, max_iter: int = 60):
    target = mpmath.mpf(10) ** (-digits + 10)
    work = digits + 10
    best = None
    since_best = 0
    for it in range(max_iter):
        vals, ders = _residual_entries(region, pt, signs)
        res = _max_abs(vals)
        log.append((digits, mpmath.nstr(res, 5)))
        if res < target:
            return pt, it
        if best is None or res < best * mpmath.mpf("0.5"):
            best, since_best = res, 0
        else:
            since_best += 1
            if since_best >= 5:
                raise StagnationError(
                    f"{region.name}: no residual decrease over 5 iterations "
                    f"(residual {mpmath.nstr(res, 5)})")
        with mp.workprec(_bits(work)):
            # complex 8x3 Jacobian -> real 16x6 via Cauchy-Riemann
            jac = mpmath.matrix(16, 6)
            rhs = mpmath.matrix(16, 1)
            for i, v in enumerate(vals):
                rhs[2 * i, 0] = -v.re
                rhs[2 * i + 1, 0] = -v.im
                for k in range(3):
                    dv = ders[k][i]
                    jac[2 * i, 2 * k] = dv.re
                    jac[2 * i, 2 * k + 1] = -dv.im
                    jac[2 * i + 1, 2 * k] = dv.im
                    jac[2 * i + 1, 2 * k + 1] = dv.re
            jt = jac.T
            delta = mpmath.lu_solve(jt * jac, jt * rhs)
            steps = [APComplex.from_mpc(
                mpmath.mpc(delta[2 * k, 0], delta[2 * k + 1, 0]), work)
                for k in range(3)]
        pt = ParamPoint(pt.Lp + steps[0], pt.Dp + steps[1], pt.Rp + steps[2])
        if not region.box.contains(pt.Lp, pt.Dp, pt.Rp, scale=3.0):
            raise DivergenceError(f"{region.name}: iterate left 3x enlarged box")
    raise SolverError(f"{region.name}: iteration cap ({max_iter}) reached")

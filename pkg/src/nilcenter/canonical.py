"""Reduction of a monodromic field to scaled canonical shapes.

Starting from x' = y + P, y' = Q with Andreev data (n, a~, b~, Delta),
three changes of variables produce the plus-convention canonical shape

    x' = y + mu*x^n + sum a_ij x^i y^j        (i + n*j >= n+1)
    y' = -n*x^(2n-1) + n*mu*x^(n-1)*y + sum b_ij x^i y^j   (i + n*j >= 2n)

with mu = b~ / (2n*sqrt|A|), A = Delta/(4n^2) < 0:

  1. shift  y -> y + F(x) along the branch solving y + P = 0, after
     which  x' = y*(unit)  and  y' = f(x) + y*Phi(x) + y^2*(rest);
  2. shear  y -> y + (b~/2n)*x^n, which symmetrizes the quadratic part
     of the weighted-order-(2n-1) core to  n*A*x^(2n-1) + 2*n*mu0*...;
  3. uniform scale  (x, y) -> (c*x, c*y)  with  c = |A|^(-1/(2(n-1))),
     which normalizes n*A to -n. Every tail coefficient picks up the
     factor lambda^(1-i-j) with lambda = 1/c.

Steps 1 and 2 are exact rational arithmetic; only step 3 introduces the
(generally irrational) scale, carried in high-precision floating point.

A further uniform rescale (x, y) -> (nu*x, -nu*y), nu = n^(1/(2n-2)),
turns the plus shape into the minus convention used by the polar-
coordinate machinery:

    x' = -y + mu~*x^n + tail,   y' = x^(2n-1) + n*mu~*x^(n-1)*y + tail

with mu~ = mu/sqrt(n) and tail coefficients (-1)^j nu^(1-i-j) a_ij and
-(-1)^j nu^(1-i-j) b_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .algebra import (
    FORM_CANONICAL_MINUS,
    FORM_GENERAL,
    ParamPoly,
    PlanePoly,
    Series1,
    VectorField,
    implicit_solve_F,
)
from .errors import MathDomainError
from .monodromy import MonodromyReport

SIGN_PLUS = "plus"
SIGN_MINUS = "minus"

_GUARD_DIGITS = 10


def mpf_to_fraction(x) -> Fraction:
    """Exact rational value of an mpmath float (binary-exact)."""
    x = mpmath.mpf(x)
    sign, man, exp, _ = x._mpf_
    if man == 0:
        return Fraction(0)
    value = Fraction(-man if sign else man)
    if exp >= 0:
        return value * (1 << exp)
    return value / (1 << (-exp))


@dataclass(frozen=True)
class CanonicalSystem:
    """Canonical-shape data: the fixed core is implicit, only the tail
    coefficient maps are stored. Keys respect i + n*j >= n+1 on the
    x'-side and i + n*j >= 2n on the y'-side."""

    n: int
    mu: object                      # mpmath.mpf
    coeffs_a: dict                  # (i, j) -> mpmath.mpf, x'-side tail
    coeffs_b: dict                  # (i, j) -> mpmath.mpf, y'-side tail
    sign_convention: str            # SIGN_PLUS or SIGN_MINUS
    precision: int                  # working decimal digits
    truncation: int                 # max weighted degree retained

    def __post_init__(self) -> None:
        if self.sign_convention not in (SIGN_PLUS, SIGN_MINUS):
            raise ValueError(f"bad sign convention {self.sign_convention!r}")
        n = self.n
        for (i, j) in self.coeffs_a:
            if i + n * j < n + 1:
                raise ValueError(f"x'-tail key {(i, j)} below weighted degree {n + 1}")
        for (i, j) in self.coeffs_b:
            if i + n * j < 2 * n:
                raise ValueError(f"y'-tail key {(i, j)} below weighted degree {2 * n}")

    def to_vector_field(self) -> VectorField:
        """Exact-rational vector field with the same binary-float
        coefficient values (for cross-checks with the symbolic layer)."""
        n = self.n
        mu = mpf_to_fraction(self.mu)
        a = {k: mpf_to_fraction(v) for k, v in self.coeffs_a.items()}
        b = {k: mpf_to_fraction(v) for k, v in self.coeffs_b.items()}
        if self.sign_convention == SIGN_PLUS:
            P = PlanePoly({(n, 0): mu}) + PlanePoly(a)
            Q = PlanePoly({(2 * n - 1, 0): -n, (n - 1, 1): n * mu}) + PlanePoly(b)
            return VectorField(P, Q, form=FORM_GENERAL)
        P = PlanePoly({(n, 0): mu}) + PlanePoly(a)
        Q = PlanePoly({(2 * n - 1, 0): 1, (n - 1, 1): n * mu}) + PlanePoly(b)
        return VectorField(P, Q, form=FORM_CANONICAL_MINUS, n=n)

    def summary(self) -> str:
        parts = [f"n={self.n} convention={self.sign_convention} "
                 f"mu={mpmath.nstr(self.mu, 12)}"]
        for (i, j), v in sorted(self.coeffs_a.items()):
            parts.append(f"  a[{i},{j}] = {mpmath.nstr(v, 12)}")
        for (i, j), v in sorted(self.coeffs_b.items()):
            parts.append(f"  b[{i},{j}] = {mpmath.nstr(v, 12)}")
        return "\n".join(parts)


def _subst_y_shift(p: PlanePoly, S: Series1, n: int, wcap: int) -> PlanePoly:
    """Substitute y := y + S(x) into p, truncated at weighted degree wcap."""
    max_j = 0
    for (_i, j), _c in p.items():
        max_j = max(max_j, j)
    powers = [Series1.x_power(0, wcap)]
    for _ in range(max_j):
        powers.append(powers[-1] * S)
    out: dict[tuple[int, int], ParamPoly] = {}
    for (i, j), coeff in p.items():
        for m in range(j + 1):
            binom = math.comb(j, m)
            series = powers[j - m]
            for k, ck in enumerate(series.coefficients()):
                if ck.is_zero():
                    continue
                key = (i + k, m)
                if key[0] + n * key[1] > wcap:
                    continue
                add = coeff * ck * binom
                cur = out.get(key)
                out[key] = add if cur is None else cur + add
    return PlanePoly(out)


def _series_to_plane(S: Series1) -> PlanePoly:
    return PlanePoly({(k, 0): c for k, c in enumerate(S.coefficients())
                      if not c.is_zero()})


def _const(p: ParamPoly) -> Fraction:
    if not p.is_constant():
        raise MathDomainError("symbolic coefficient where a numeric one is "
                              "required; substitute parameters first")
    return p.constant_value()


def to_canonical(vf: VectorField, report: MonodromyReport,
                 N: int | None = None, digits: int = 60) -> CanonicalSystem:
    """Reduce a monodromic general-form field to the plus-convention
    canonical shape, truncated at weighted degree N (default 2(2n-1)).
    """
    if vf.form != FORM_GENERAL:
        raise MathDomainError("to_canonical expects the general form")
    if not report.is_monodromic:
        raise MathDomainError(
            f"to_canonical requires a monodromic report, got {report.verdict}")
    if vf.parameters():
        raise MathDomainError("to_canonical requires numeric coefficients; "
                              f"free parameters: {vf.parameters()}")
    n = report.n
    if n < 2:
        raise MathDomainError("Andreev number n >= 2 required (n=1 is not "
                              "a normalized nilpotent singularity)")
    wcap = N if N is not None else 2 * (2 * n - 1)
    if wcap < 2 * n:
        raise MathDomainError(f"truncation {wcap} below the core degree {2 * n}")

    b_tilde = _const(report.b_tilde)
    Delta = _const(report.Delta)
    if Delta >= 0:
        raise MathDomainError(f"Delta = {Delta} >= 0 contradicts monodromy")
    A = Fraction(Delta, 4 * n * n)

    # step 1: shift along the solved branch; exact
    F = implicit_solve_F(vf, wcap)
    xdot0 = vf.xdot()
    ydot0 = vf.ydot()
    xdot1 = _subst_y_shift(xdot0, F, n, wcap)
    Fp = _series_to_plane(F.diff())
    ydot1 = (_subst_y_shift(ydot0, F, n, wcap)
             - (Fp * xdot1).truncate_weighted(n, wcap))

    # step 2: shear by (b~/2n) x^n; exact
    mu0 = Fraction(b_tilde, 2 * n)
    shear = Series1.x_power(n, wcap, mu0)
    xdot2 = _subst_y_shift(xdot1, shear, n, wcap)
    ydot2 = (_subst_y_shift(ydot1, shear, n, wcap)
             - (PlanePoly.monomial(n - 1, 0, mu0 * n) * xdot2
                ).truncate_weighted(n, wcap))

    # core extraction, with exact consistency checks
    if _const(xdot2.coefficient(0, 1)) != 1:
        raise MathDomainError("internal: y-coefficient of x' is not 1 after shift")
    if _const(xdot2.coefficient(n, 0)) != mu0:
        raise MathDomainError("internal: x^n coefficient of x' mismatch")
    core_q = _const(ydot2.coefficient(2 * n - 1, 0))
    if core_q != n * A:
        raise MathDomainError(f"internal: x^(2n-1) coefficient {core_q} != nA = {n * A}")
    if _const(ydot2.coefficient(n - 1, 1)) != n * mu0:
        raise MathDomainError("internal: x^(n-1) y coefficient of y' mismatch")

    tail_a: dict[tuple[int, int], Fraction] = {}
    for (i, j), c in xdot2.items():
        if (i, j) in ((0, 1), (n, 0)):
            continue
        w = i + n * j
        if w < n + 1:
            raise MathDomainError(
                f"internal: residual x'-term x^{i}y^{j} below weighted degree {n + 1}")
        tail_a[(i, j)] = _const(c)
    tail_b: dict[tuple[int, int], Fraction] = {}
    for (i, j), c in ydot2.items():
        if (i, j) in ((2 * n - 1, 0), (n - 1, 1)):
            continue
        w = i + n * j
        if w < 2 * n:
            raise MathDomainError(
                f"internal: residual y'-term x^{i}y^{j} below weighted degree {2 * n}")
        tail_b[(i, j)] = _const(c)

    # step 3: uniform scale; the one inexact operation
    with mpmath.workdps(digits + _GUARD_DIGITS):
        absA = mpmath.mpf(abs(A.numerator)) / A.denominator
        lam = absA ** (mpmath.mpf(1) / (2 * (n - 1)))
        mu = (mpmath.mpf(mu0.numerator) / mu0.denominator) / mpmath.sqrt(absA)
        coeffs_a = {}
        for (i, j), c in tail_a.items():
            coeffs_a[(i, j)] = (mpmath.mpf(c.numerator) / c.denominator
                                * lam ** (1 - i - j))
        coeffs_b = {}
        for (i, j), c in tail_b.items():
            coeffs_b[(i, j)] = (mpmath.mpf(c.numerator) / c.denominator
                                * lam ** (1 - i - j))
        mu = +mu
        coeffs_a = {k: +v for k, v in coeffs_a.items()}
        coeffs_b = {k: +v for k, v in coeffs_b.items()}

    return CanonicalSystem(n=n, mu=mu, coeffs_a=coeffs_a, coeffs_b=coeffs_b,
                           sign_convention=SIGN_PLUS, precision=digits,
                           truncation=wcap)


def rescale(cs: CanonicalSystem) -> CanonicalSystem:
    """Map the plus-convention shape to the minus convention."""
    if cs.sign_convention != SIGN_PLUS:
        raise MathDomainError("rescale expects the plus convention")
    return _rescale_signed(cs, invert=False)


def rescale_inverse(cs: CanonicalSystem) -> CanonicalSystem:
    """Map the minus-convention shape back to the plus convention."""
    if cs.sign_convention != SIGN_MINUS:
        raise MathDomainError("rescale_inverse expects the minus convention")
    return _rescale_signed(cs, invert=True)


def _rescale_signed(cs: CanonicalSystem, invert: bool) -> CanonicalSystem:
    n = cs.n
    with mpmath.workdps(cs.precision + _GUARD_DIGITS):
        nu = mpmath.mpf(n) ** (mpmath.mpf(1) / (2 * n - 2))
        sqrt_n = mpmath.sqrt(n)
        if invert:
            mu = +(cs.mu * sqrt_n)
            scale_pow = lambda i, j: nu ** (i + j - 1)
        else:
            mu = +(cs.mu / sqrt_n)
            scale_pow = lambda i, j: nu ** (1 - i - j)
        coeffs_a = {}
        for (i, j), v in cs.coeffs_a.items():
            sign = -1 if j % 2 else 1
            coeffs_a[(i, j)] = +(sign * scale_pow(i, j) * v)
        coeffs_b = {}
        for (i, j), v in cs.coeffs_b.items():
            sign = 1 if j % 2 else -1
            coeffs_b[(i, j)] = +(sign * scale_pow(i, j) * v)
    return CanonicalSystem(n=n, mu=mu, coeffs_a=coeffs_a, coeffs_b=coeffs_b,
                           sign_convention=SIGN_MINUS if not invert else SIGN_PLUS,
                           precision=cs.precision, truncation=cs.truncation)

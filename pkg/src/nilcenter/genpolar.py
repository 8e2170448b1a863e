"""Generalized polar coordinates and return-map numerics.

For a nilpotent singular point in reduced minus-oriented form

    x' = -y + mu*x^n + (tail of weighted degree > n),
    y' = x^(2n-1) + n*mu*x^(n-1)*y + (tail of weighted degree > 2n-1),

the chart x = r*Cs(theta), y = r^n*Sn(theta) turns orbits near the
origin into graphs r(theta), where Cs and Sn solve

    Cs' = -Sn,   Sn' = Cs^(2n-1),   Cs(0) = 1,  Sn(0) = 0,

are T-periodic, and satisfy Cs^(2n) + n*Sn^2 = 1.  In this chart the
angular speed is positive, so increasing theta means forward time, and
the orbit through (r0, theta=0) returns after one period with radius
r~(T, r0).  The displacement d(r0) = r~(T, r0) - r0 vanishes identically
exactly for a center; its expansion coefficients v_k(T) (r~ = sum of
v_k(theta) r0^k) are the focal values computed here.

The radial equation is dr/dtheta = r * N(r, theta) / D(r, theta) with N
and D polynomial in r, Cs, Sn and D(0, theta) = 1.  This module builds
that quotient, derives the triangular variational system for the v_k by
matching powers of r0, and integrates everything with the Taylor
integrator, augmenting the state with Cs, Sn (and 1/D for the full
nonlinear probe) so every right-hand side is polynomial.

Orientation note: the classical presentation of these systems often
works in the mirrored plus-form (x' = y + ..., obtained by y -> -y,
t -> -t), whose polar chart traverses the cycle clockwise; first-return
quantities computed there describe the inverse return map.  All
quantities in this module follow forward time in the minus form above.
The v1 quadrature helper exposes the mirrored convention explicitly,
returning exp(-mu*A2) with A2 > 0, which equals the reciprocal of the
forward v1 of the corresponding minus-form system.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath
from mpmath import mp, mpf, workdps

from .algebra import (FORM_CANONICAL_MINUS, FORM_QH, ParamPoly, PlanePoly,
                      VectorField)
from .canonical import SIGN_MINUS, SIGN_PLUS, CanonicalSystem, rescale
from .errors import MathDomainError
from . import taylor


DEFAULT_TRIG_TOL = Fraction(1, 10 ** 12)


def _to_mpf(value) -> mpf:
    """Fraction/int/mpf -> mpf at the current working precision."""
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)

_TRIG_CACHE: dict[tuple[int, int], "GenTrig"] = {}


def period_closed_form(n: int, digits: int = 30) -> mpf:
    """Period of (Cs, Sn) from the gamma-function closed form."""
    with workdps(digits + 10):
        nn = mpf(n)
        T = 2 * mpmath.sqrt(mpmath.pi / nn) \
            * mpmath.gamma(1 / (2 * nn)) / mpmath.gamma((nn + 1) / (2 * nn))
        return +T


@dataclass(frozen=True)
class GenTrig:
    """Dense evaluator for the generalized cosine/sine pair of index n.

    Holds one period's worth of Taylor steps; evaluation reduces the
    angle modulo the period and evaluates the step polynomial covering
    it.  `drift` is the largest observed deviation of the Pythagorean
    combination Cs^(2n) + n*Sn^2 from 1 (an online integration-error
    certificate), `period_return` the first-return time recovered by
    root-finding, independent of the closed-form `period`.
    """

    n: int
    digits: int
    period: mpf
    period_return: mpf
    drift: mpf
    steps: tuple
    _starts: tuple = field(repr=False, default=())

    def cs_sn(self, theta) -> tuple[mpf, mpf]:
        with workdps(self.digits + 10):
            th = mpmath.mpf(theta)
            th = th - mpmath.floor(th / self.period) * self.period
            if th < 0:
                th += self.period
        idx = bisect.bisect_right(self._starts, float(th)) - 1
        idx = min(max(idx, 0), len(self.steps) - 1)
        step = self.steps[idx]
        bits = taylor.bits_for_digits(self.digits)
        old = taylor.set_precision_bits(bits)
        try:
            t0 = step.t0
            tau = taylor.to_backend(th) - t0
            if tau < 0 and idx > 0:
                idx -= 1
                step = self.steps[idx]
                tau = taylor.to_backend(th) - step.t0
            c = step.eval(0, tau)
            s = step.eval(1, tau)
            with workdps(self.digits + 10):
                return taylor.backend_to_mpf(c), taylor.backend_to_mpf(s)
        finally:
            taylor.set_precision_bits(old)


def gen_trig(n: int, digits: int = 30,
             trig_tol: Fraction | float = DEFAULT_TRIG_TOL) -> GenTrig:
    """Build (or fetch from cache) the trig evaluator for index n."""
    if n < 1:
        raise MathDomainError(f"trig index must be >= 1, got {n}")
    key = (n, digits)
    cached = _TRIG_CACHE.get(key)
    if cached is not None:
        return cached
    ode = taylor.PolyODE([
        {(0, 1): -1},
        {(2 * n - 1, 0): 1},
    ])
    T = period_closed_form(n, digits)
    result = taylor.integrate(
        ode, [1, 0], T, digits=digits, collect=True,
        monitor=({(2 * n, 0): 1, (0, 2): n}, 1))
    with workdps(digits + 10):
        frac = trig_tol if isinstance(trig_tol, Fraction) else Fraction(trig_tol)
        tol = mpmath.mpf(frac.numerator) / frac.denominator
        if result.max_drift is not None and result.max_drift > tol:
            raise MathDomainError(
                "trig integration failed its error budget: achieved drift "
                f"{mpmath.nstr(result.max_drift, 5)} exceeds {mpmath.nstr(tol, 5)}")
        close = max(abs(result.y[0] - 1), abs(result.y[1]))
        if close > tol:
            raise MathDomainError(
                "trig integration did not close up over one period: "
                f"|state(T) - (1,0)| = {mpmath.nstr(close, 5)}")

    # Independent period recovery: root of Sn rising through 0 near T.
    bits = taylor.bits_for_digits(digits)
    period_return = None
    old = taylor.set_precision_bits(bits)
    try:
        t_min = taylor.to_backend(T) * taylor.to_backend(Fraction(3, 5))
        for step in result.steps:
            if step.t0 + step.h <= t_min:
                continue
            s0 = step.eval(1, taylor.to_backend(0))
            s1 = step.eval(1, step.h)
            if s0 < 0 and s1 >= 0:
                tau = taylor.refine_root(step, 1, 0, step.h, bits)
                with workdps(digits + 10):
                    period_return = (taylor.backend_to_mpf(step.t0)
                                     + taylor.backend_to_mpf(tau))
                break
    finally:
        taylor.set_precision_bits(old)
    if period_return is None:
        # closing step landed exactly on Sn = 0
        period_return = T
    starts = tuple(float(taylor.backend_to_mpf(s.t0)) for s in result.steps)
    trig = GenTrig(n=n, digits=digits, period=T, period_return=period_return,
                   drift=result.max_drift, steps=tuple(result.steps),
                   _starts=starts)
    _TRIG_CACHE[key] = trig
    return trig


def trig_moment(p: int, q: int, n: int, digits: int = 30) -> mpf:
    """The full-period integral of Sn^p * Cs^q; exact zero when p or q is odd."""
    if p < 0 or q < 0:
        raise MathDomainError("moment exponents must be nonnegative")
    if p % 2 == 1 or q % 2 == 1:
        return mpf(0)
    with workdps(digits + 10):
        nn = mpf(n)
        val = (2 / mpmath.sqrt(nn ** (p + 1))
               * mpmath.gamma((p + 1) / mpf(2))
               * mpmath.gamma((q + 1) / (2 * nn))
               / mpmath.gamma((p + 1) / mpf(2) + (q + 1) / (2 * nn)))
        return +val


def v1_quadrature(n: int, mu, digits: int = 30) -> tuple[mpf, mpf]:
    """Linear return-map coefficient in the mirrored (clockwise) convention.

    Returns (v1, A2) with v1 = exp(-mu * A2) for n odd and A2 the
    positive quadrature

        A2 = integral over one period of Cs^(n-1) / (n*(1-(n-1)*Sn^2)),

    evaluated against the cached trig table.  For n even the integrand
    is odd under the half-period shift and A2 = 0, giving v1 = 1.  The
    forward-time v1 of the matching minus-form system is 1/v1.
    """
    if n < 2:
        raise MathDomainError(f"v1 quadrature needs n >= 2, got {n}")
    trig = gen_trig(n, digits)
    with workdps(digits + 10):
        nn = mpf(n)
        T = trig.period

        def integrand(theta):
            c, s = trig.cs_sn(theta)
            return c ** (n - 1) / (nn * (1 - (nn - 1) * s * s))

        a2 = mpmath.quad(integrand, [k * T / 4 for k in range(5)])
        v1 = mpmath.exp(-_to_mpf(mu) * a2)
        return +v1, +a2


def _tail_dicts(source) -> tuple[int, object, dict, dict]:
    """Extract (n, mu, a_tail, b_tail) numeric data from a supported source.

    a_tail maps (i, j) to the coefficient of x^i y^j in the x'-tail
    (weighted degree > n, the mu*x^n core excluded); b_tail likewise for
    the y'-tail beyond x^(2n-1) + n*mu*x^(n-1)*y.  Raises when symbolic
    parameters remain or the shape does not match.
    """
    if isinstance(source, CanonicalSystem):
        cs = source
        if cs.sign_convention == SIGN_PLUS:
            cs = rescale(cs)
        return cs.n, cs.mu, dict(cs.coeffs_a), dict(cs.coeffs_b)
    if isinstance(source, VectorField):
        vf = source
        if vf.form not in (FORM_QH, FORM_CANONICAL_MINUS):
            raise MathDomainError(
                "focal computation needs a minus-oriented reduced field "
                f"(got form {vf.form!r}); reduce through the canonical pipeline first")
        n = vf.n
        mu_poly = vf.P.coefficient(n, 0)
        if not mu_poly.is_constant():
            raise MathDomainError("numeric coefficients required, found parameters")
        mu = mu_poly.constant_value()
        a_tail: dict = {}
        for (i, j), coeff in vf.P.items():
            if (i, j) == (n, 0):
                continue
            if not coeff.is_constant():
                raise MathDomainError("numeric coefficients required, found parameters")
            val = coeff.constant_value()
            if val:
                a_tail[(i, j)] = val
        b_tail: dict = {}
        for (i, j), coeff in vf.Q.items():
            if (i, j) == (2 * n - 1, 0):
                continue
            if (i, j) == (n - 1, 1):
                if not coeff.is_constant():
                    raise MathDomainError(
                        "numeric coefficients required, found parameters")
                residue = coeff.constant_value() - n * mu
                if residue:
                    b_tail[(i, j)] = residue
                continue
            if not coeff.is_constant():
                raise MathDomainError("numeric coefficients required, found parameters")
            val = coeff.constant_value()
            if val:
                b_tail[(i, j)] = val
        core = vf.Q.coefficient(2 * n - 1, 0)
        if not core.is_constant() or core.constant_value() != 1:
            raise MathDomainError("y'-side must carry x^(2n-1) with coefficient 1")
        return n, mu, a_tail, b_tail
    raise MathDomainError(
        f"unsupported focal source {type(source).__name__}")


def _check_tail_windows(n: int, a_tail: Mapping, b_tail: Mapping) -> None:
    for (i, j) in a_tail:
        if i + n * j <= n:
            raise MathDomainError(
                f"x'-tail term x^{i}y^{j} has weighted degree <= n")
    for (i, j) in b_tail:
        if i + n * j <= 2 * n - 1:
            raise MathDomainError(
                f"y'-tail term x^{i}y^{j} has weighted degree <= 2n-1")


def _pd_add(dst: dict, key, coeff) -> None:
    cur = dst.get(key)
    new = coeff if cur is None else cur + coeff
    if new:
        dst[key] = new
    elif cur is not None:
        del dst[key]


def _pd_mul(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            _pd_add(out, key, ca * cb)
    return out


def _chart_quotient(n: int, mu, a_tail: Mapping, b_tail: Mapping,
                    orders: int) -> list[dict]:
    """Coefficients w_m(Cs, Sn) of dr/dtheta = r * sum_m w_m r^m, m < orders.

    Keys are (cs_exponent, sn_exponent) pairs.  Built by expanding the
    radial quotient N/D with D(0) = 1 through a truncated geometric
    series, exactly in the coefficient arithmetic of the inputs.
    """
    N = [dict() for _ in range(orders)]
    D = [dict() for _ in range(orders)]
    if mu:
        _pd_add(N[0], (n - 1, 0), mu)
    _pd_add(D[0], (0, 0), 1)
    for (i, j), coeff in a_tail.items():
        m = i + n * j - n
        if m < orders:
            _pd_add(N[m], (i + 2 * n - 1, j), coeff)
            _pd_add(D[m], (i, j + 1), -n * coeff)
    for (i, j), coeff in b_tail.items():
        m = i + n * j - 2 * n + 1
        if m < orders:
            _pd_add(N[m], (i, j + 1), coeff)
            _pd_add(D[m], (i + 1, j), coeff)
    W: list[dict] = []
    for m in range(orders):
        acc = dict(N[m])
        for l in range(1, m + 1):
            if D[l] and W[m - l]:
                for key, c in _pd_mul(D[l], W[m - l]).items():
                    _pd_add(acc, key, -c)
    # note: D[0] = 1 so no division is needed
        W.append(acc)
    return W


def _v_power_tables(kmax: int) -> list[dict[int, dict[tuple, int]]]:
    """pow[j][k] = monomials of degree k in r0 inside (sum v_i r0^i)^j.

    Monomial keys are exponent tuples over (v_1 .. v_kmax); values are
    integer multinomial counts.  Index j runs 1..kmax (pow[0] unused).
    """
    base: dict[int, dict[tuple, int]] = {}
    for i in range(1, kmax + 1):
        e = tuple(1 if t == i - 1 else 0 for t in range(kmax))
        base[i] = {e: 1}
    tables: list = [None, base]
    current = base
    for _ in range(2, kmax + 1):
        nxt: dict[int, dict[tuple, int]] = {}
        for k1, monos1 in current.items():
            for k2, monos2 in base.items():
                k = k1 + k2
                if k > kmax:
                    continue
                slot = nxt.setdefault(k, {})
                for e1, c1 in monos1.items():
                    for e2, c2 in monos2.items():
                        e = tuple(a + b for a, b in zip(e1, e2))
                        slot[e] = slot.get(e, 0) + c1 * c2
        tables.append(nxt)
        current = nxt
    return tables


@dataclass(frozen=True)
class ProbePoint:
    """One nonlinear return-map sample: displacement d(r0) and its error bar."""

    r0: mpf
    displacement: mpf | None
    error_estimate: mpf | None
    ok: bool
    message: str = ""


@dataclass(frozen=True)
class FocalReport:
    """Return-map coefficients v_k(T) at the requested precision.

    The k=1 entry is stored as v1(T) - 1 (flagged by v1_offset) so that
    "all entries small" uniformly means "no detected spiraling".
    first_significant is the lowest k whose entry exceeds ten times the
    reported tolerance, with the sign of that entry; None when no entry
    does.
    """

    n: int
    mu: mpf
    vks: tuple[tuple[int, mpf], ...]
    v1_offset: bool
    first_significant: tuple[int, int] | None
    tolerance: mpf
    digits: int
    displacement_samples: tuple[ProbePoint, ...] = ()

    def value(self, k: int) -> mpf:
        for kk, v in self.vks:
            if kk == k:
                return v
        raise KeyError(k)

    def summary(self) -> str:
        lines = [f"focal values (n={self.n}, mu={mpmath.nstr(self.mu, 8)}, "
                 f"{self.digits} digits)"]
        for k, v in self.vks:
            tag = "v1(T)-1" if k == 1 and self.v1_offset else f"v{k}(T)"
            lines.append(f"  {tag} = {mpmath.nstr(v, min(self.digits, 20))}")
        if self.first_significant is not None:
            k, sgn = self.first_significant
            lines.append(f"  first significant: k={k} (sign {'+' if sgn > 0 else '-'})")
        else:
            lines.append("  no entry above 10x tolerance "
                         f"({mpmath.nstr(self.tolerance, 3)})")
        for pt in self.displacement_samples:
            if pt.ok:
                lines.append(f"  d({mpmath.nstr(pt.r0, 6)}) = "
                             f"{mpmath.nstr(pt.displacement, 10)} "
                             f"(err ~ {mpmath.nstr(pt.error_estimate, 3)})")
            else:
                lines.append(f"  d({mpmath.nstr(pt.r0, 6)}): {pt.message}")
        return "\n".join(lines)


def _build_focal_ode(n: int, mu, a_tail: Mapping, b_tail: Mapping,
                     kmax: int) -> taylor.PolyODE:
    """States (Cs, Sn, v_1 .. v_kmax); all right-hand sides polynomial."""
    W = _chart_quotient(n, mu, a_tail, b_tail, kmax)
    powers = _v_power_tables(kmax)
    dim = 2 + kmax
    rhs: list[dict] = [
        {tuple([0, 1] + [0] * kmax): -1},
        {tuple([2 * n - 1, 0] + [0] * kmax): 1},
    ]
    for k in range(1, kmax + 1):
        table: dict = {}
        for m in range(0, k):
            if not W[m]:
                continue
            pw = powers[m + 1].get(k)
            if not pw:
                continue
            for (ce, se), cw in W[m].items():
                for ve, cnt in pw.items():
                    exps = (ce, se) + ve
                    _pd_add(table, exps, cw * cnt)
        rhs.append(table)
    return taylor.PolyODE(rhs)


def focal_values(source, kmax: int, digits: int = 30,
                 r0_list: Sequence = ()) -> FocalReport:
    """Integrate the variational chain for v_1..v_kmax over one period.

    `source` is a minus-oriented CanonicalSystem (plus-oriented input is
    rescaled first) or a VectorField in the reduced quasi-homogeneous or
    minus-canonical shape with numeric coefficients.
    """
    if kmax < 1:
        raise MathDomainError(f"kmax must be >= 1, got {kmax}")
    n, mu, a_tail, b_tail = _tail_dicts(source)
    _check_tail_windows(n, a_tail, b_tail)
    with workdps(digits + 18):
        ode = _build_focal_ode(n, mu, a_tail, b_tail, kmax)
    T = period_closed_form(n, digits)
    y0 = [1, 0, 1] + [0] * (kmax - 1)
    result = taylor.integrate(
        ode, y0, T, digits=digits,
        monitor=({tuple([2 * n, 0] + [0] * kmax): 1,
                  tuple([0, 2] + [0] * kmax): n}, 1))
    with workdps(digits + 10):
        tolerance = +(mpf(10) ** (-(digits - 10)))
        vks = []
        first = None
        for k in range(1, kmax + 1):
            val = result.y[1 + k]
            entry = val - 1 if k == 1 else val
            vks.append((k, +entry))
            if first is None and abs(entry) > 10 * tolerance:
                first = (k, 1 if entry > 0 else -1)
        mu_mpf = +_to_mpf(mu)
    samples = tuple(poincare_probe(source, r0_list, digits)) if r0_list else ()
    return FocalReport(n=n, mu=mu_mpf, vks=tuple(vks), v1_offset=True,
                       first_significant=first, tolerance=tolerance,
                       digits=digits, displacement_samples=samples)


def _build_probe_ode(n: int, mu, a_tail: Mapping, b_tail: Mapping):
    """States (Cs, Sn, r, u) with u = 1/D; returns (ode, D terms).

    r' = r * N * u and u' = -u^2 * dD/dtheta, the theta-derivative taken
    through Cs' = -Sn, Sn' = Cs^(2n-1) and the radial equation itself.
    """
    orders_n = max((i + n * j - n for (i, j) in a_tail), default=0)
    orders_b = max((i + n * j - 2 * n + 1 for (i, j) in b_tail), default=0)
    orders = max(orders_n, orders_b, 1) + 1
    W_N = [dict() for _ in range(orders)]
    W_D = [dict() for _ in range(orders)]
    if mu:
        _pd_add(W_N[0], (n - 1, 0), mu)
    _pd_add(W_D[0], (0, 0), 1)
    for (i, j), coeff in a_tail.items():
        m = i + n * j - n
        _pd_add(W_N[m], (i + 2 * n - 1, j), coeff)
        _pd_add(W_D[m], (i, j + 1), -n * coeff)
    for (i, j), coeff in b_tail.items():
        m = i + n * j - 2 * n + 1
        _pd_add(W_N[m], (i, j + 1), coeff)
        _pd_add(W_D[m], (i + 1, j), coeff)

    # terms as (cs, sn, r, u) exponent dicts
    def lift(series, r_shift=0, u_exp=0):
        out = {}
        for m, table in enumerate(series):
            for (ce, se), c in table.items():
                _pd_add(out, (ce, se, m + r_shift, u_exp), c)
        return out

    N_terms = lift(W_N)
    D_terms = lift(W_D)
    # r' = r*N*u : shift N by one r power, one u power
    r_rhs = {(ce, se, re + 1, ue + 1): c
             for (ce, se, re, ue), c in N_terms.items()}
    # dD/dtheta = dD/dCs * (-Sn) + dD/dSn * Cs^(2n-1) + dD/dr * r'
    dD: dict = {}
    for (ce, se, re, ue), c in D_terms.items():
        if ce:
            _pd_add(dD, (ce - 1, se + 1, re, ue), -c * ce)
        if se:
            _pd_add(dD, (ce + 2 * n - 1, se - 1, re, ue), c * se)
        if re:
            for (c2, s2, r2, u2), cN in r_rhs.items():
                _pd_add(dD, (ce + c2, se + s2, re - 1 + r2, ue + u2), c * re * cN)
    u_rhs = {(ce, se, re, ue + 2): -c for (ce, se, re, ue), c in dD.items()}
    trig_pad = lambda table: {k + (0, 0): v for k, v in table.items()}
    ode = taylor.PolyODE([
        trig_pad({(0, 1): -1}),
        trig_pad({(2 * n - 1, 0): 1}),
        r_rhs,
        u_rhs,
    ])
    return ode, W_D


def poincare_probe(source, r0_list: Sequence, digits: int = 30) -> list[ProbePoint]:
    """Fully nonlinear one-period return map samples d(r0) = r(T) - r0.

    Each point carries an error estimate from a confirmation run at
    higher precision; integration failures (for example the angular
    speed degenerating at too-large r0) are reported per point rather
    than raised.
    """
    n, mu, a_tail, b_tail = _tail_dicts(source)
    _check_tail_windows(n, a_tail, b_tail)
    with workdps(digits + 18):
        ode, W_D = _build_probe_ode(n, mu, a_tail, b_tail)
    out: list[ProbePoint] = []
    for r0 in r0_list:
        with workdps(digits + 18):
            r0_mpf = _to_mpf(r0)
            if r0_mpf < 0:
                out.append(ProbePoint(r0=+r0_mpf, displacement=None,
                                      error_estimate=None, ok=False,
                                      message="negative radius"))
                continue
            if r0_mpf == 0:
                out.append(ProbePoint(r0=mpf(0), displacement=mpf(0),
                                      error_estimate=mpf(0), ok=True))
                continue
            # D at theta=0: Cs=1, Sn=0 -> only pure-Cs terms contribute
            D0 = mpf(1)
            for m, table in enumerate(W_D):
                for (ce, se), c in table.items():
                    if se == 0 and (m, ce) != (0, 0):
                        D0 += _to_mpf(c) * r0_mpf ** m
            if D0 <= 0:
                out.append(ProbePoint(r0=+r0_mpf, displacement=None,
                                      error_estimate=None, ok=False,
                                      message="angular speed not positive at start"))
                continue
        try:
            vals = []
            for dps in (digits, digits + 8):
                T = period_closed_form(n, dps)
                with workdps(dps + 10):
                    y0 = [1, 0, r0_mpf, 1 / D0]
                res = taylor.integrate(ode, y0, T, digits=dps)
                with workdps(dps + 10):
                    vals.append(res.y[2] - r0_mpf)
            with workdps(digits + 18):
                err = abs(vals[0] - vals[1])
                out.append(ProbePoint(r0=+r0_mpf, displacement=+vals[1],
                                      error_estimate=+err, ok=True))
        except (taylor.ToleranceError, ValueError, ZeroDivisionError) as exc:
            out.append(ProbePoint(r0=+r0_mpf, displacement=None,
                                  error_estimate=None, ok=False,
                                  message=f"integration failed: {exc}"))
    return out


def v3_formula(n: int, a_tail: Mapping, b_tail: Mapping,
               digits: int = 30) -> tuple[mpf, tuple[mpf, mpf]]:
    """Cubic return-map coefficient of a short quasi-homogeneous tail.

    For n odd and tails restricted to the two lowest weighted layers
    (x'-side weighted degrees n+1 and n+2, y'-side 2n and 2n+1, mu = 0),
    v3(T) reduces to a finite combination of full-period Sn/Cs moments:
    with the chart quotient dr/dtheta = r^2*R1(theta) + r^3*(R2 -
    R1*Th)(theta) + O(r^4), one has v2(T) = integral of R1 and v3(T) =
    v2(T)^2 + integral of (R2 - R1*Th).  This routine evaluates that
    combination through the gamma closed form of the moments.

    Returns (v3, (bracket_a, bracket_b)) where the second element is the
    pair of coefficient brackets

        bracket_a = (n+2) * (a[n+2,0] + a[n+1,0]*(a[1,1] + 2*b[0,2])),
        bracket_b = b[n+1,1] + b[n,1]*(a[1,1] + 2*b[0,2]),

    reported for comparison with the literature; note the computed v3 is
    NOT proportional to their sum (the quadrature is authoritative).
    """
    if n % 2 == 0:
        raise MathDomainError(f"cubic coefficient formula needs odd n, got {n}")
    for (i, j) in a_tail:
        if i + n * j not in (n + 1, n + 2):
            raise MathDomainError(
                f"x'-tail term x^{i}y^{j} outside weighted degrees n+1, n+2")
    for (i, j) in b_tail:
        if i + n * j not in (2 * n, 2 * n + 1):
            raise MathDomainError(
                f"y'-tail term x^{i}y^{j} outside weighted degrees 2n, 2n+1")

    W = _chart_quotient(n, 0, a_tail, b_tail, 3)
    R1 = W[1]
    # W[2] = R2 - R1*Th already, by construction of the quotient
    R2mRT = W[2]

    def moment_sum(table) -> mpf:
        with workdps(digits + 10):
            acc = mpf(0)
            for (ce, se), c in table.items():
                m = trig_moment(se, ce, n, digits)
                if m:
                    acc += _to_mpf(c) * m
            return +acc

    v2T = moment_sum(R1)
    with workdps(digits + 10):
        v3 = v2T ** 2 + moment_sum(R2mRT)

        def g(key, table):
            return _to_mpf(table.get(key, 0))

        slope = g((1, 1), a_tail) + 2 * g((0, 2), b_tail)
        bracket_a = (n + 2) * (g((n + 2, 0), a_tail)
                               + g((n + 1, 0), a_tail) * slope)
        bracket_b = g((n + 1, 1), b_tail) + g((n, 1), b_tail) * slope
        return +v3, (+bracket_a, +bracket_b)

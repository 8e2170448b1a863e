"""Taylor-method integration of autonomous polynomial differential systems.

Every differential system in this package that needs numerics (the
generalized trigonometric functions, variational chains for return-map
coefficients, nonlinear return-map probes) is polynomial in its state
variables, possibly after augmenting the state with the reciprocal of a
denominator.  For such systems the Taylor method is the integrator of
choice at high precision: series coefficients follow from exact
recurrences, the order can be raised with the working precision, the
local error is controlled by the magnitude of the last retained
coefficients, and every step carries a polynomial dense output that can
be evaluated or root-solved exactly in the working arithmetic.

General-purpose libraries do not cover this niche: machine-precision
integrators top out near 1e-16, and the adaptive Taylor solver shipped
with mpmath exposes neither dense output nor the per-step series needed
for event location.  The implementation below therefore rolls the
classical recurrence itself, on top of gmpy2's MPFR floats when
available (mpmath.mpf otherwise).

A system is described by one sparse polynomial per state variable,
mapping exponent tuples to coefficients.  Monomials are evaluated on
truncated power series through a shared binary-product DAG so that
common subproducts (powers of a variable, repeated factors) are
computed once per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import mpmath

try:
    import gmpy2
    from gmpy2 import mpfr as _mpfr

    _HAVE_GMPY2 = True
except ImportError:  # pragma: no cover - gmpy2 is a hard dependency in practice
    gmpy2 = None
    _mpfr = None
    _HAVE_GMPY2 = False


Monomial = tuple[int, ...]


def bits_for_digits(digits: int) -> int:
    """Working mantissa bits giving `digits` decimal digits plus guard room."""
    return int(math.ceil(digits * 3.3219280948873626)) + 24


def set_precision_bits(bits: int) -> int:
    """Set the backend working precision; returns the previous setting."""
    if _HAVE_GMPY2:
        ctx = gmpy2.get_context()
        old = ctx.precision
        ctx.precision = bits
        return old
    old = mpmath.mp.prec
    mpmath.mp.prec = bits
    return old


def to_backend(value) -> object:
    """Convert a number to the backend float type at current precision.

    Accepts int, Fraction, backend floats, mpmath.mpf and decimal strings.
    Fractions convert with a single rounding; mpmath floats convert
    exactly from their mantissa/exponent pair.
    """
    if _HAVE_GMPY2:
        if isinstance(value, type(_mpfr(0))):
            return +value
        if isinstance(value, int):
            return _mpfr(value)
        if isinstance(value, Fraction):
            return _mpfr(value.numerator) / _mpfr(value.denominator)
        if isinstance(value, mpmath.mpf):
            sign, man, exp, _ = value._mpf_
            out = _mpfr(gmpy2.mpz(man))
            if exp:
                out = gmpy2.mul_2exp(out, exp) if exp > 0 else out / gmpy2.mul_2exp(_mpfr(1), -exp)
            return -out if sign else out
        if isinstance(value, (str, float)):
            return _mpfr(value)
        raise TypeError(f"cannot convert {type(value).__name__} to mpfr")
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def backend_to_mpf(value) -> mpmath.mpf:
    """Convert a backend float to mpmath.mpf exactly (given enough mp.prec)."""
    if _HAVE_GMPY2 and isinstance(value, type(_mpfr(0))):
        if not gmpy2.is_finite(value):
            raise ValueError("non-finite value in integration result")
        man, exp = value.as_mantissa_exp()
        return mpmath.ldexp(mpmath.mpf(int(man)), int(exp))
    return mpmath.mpf(value)


def _split_monomial(exps: Monomial) -> tuple[Monomial, Monomial]:
    """Split a degree >= 2 exponent tuple into two nonzero halves."""
    half = tuple(e // 2 for e in exps)
    if any(half):
        rest = tuple(e - h for e, h in zip(exps, half))
        return half, rest
    # all exponents are 0 or 1 with at least two ones: peel off one factor
    first = next(i for i, e in enumerate(exps) if e)
    unit = tuple(1 if i == first else 0 for i in range(len(exps)))
    rest = tuple(e - u for e, u in zip(exps, unit))
    return unit, rest


class PolyODE:
    """Autonomous system y' = P(y) with polynomial right-hand sides.

    `rhs[i]` maps exponent tuples (one entry per state variable) to
    coefficients; coefficients may be int, Fraction, mpmath.mpf or
    backend floats and are converted at integration time so a PolyODE
    can be reused across precisions.
    """

    def __init__(self, rhs: Sequence[Mapping[Monomial, object]]):
        self.dim = len(rhs)
        if self.dim == 0:
            raise ValueError("empty system")
        self.rhs_terms: list[list[tuple[object, Monomial]]] = []
        needed: set[Monomial] = set()
        for i, table in enumerate(rhs):
            terms = []
            for exps, coeff in table.items():
                if len(exps) != self.dim:
                    raise ValueError(f"exponent tuple {exps} has wrong length")
                if any(e < 0 for e in exps):
                    raise ValueError(f"negative exponent in {exps}")
                terms.append((coeff, tuple(exps)))
                if sum(exps) >= 2:
                    needed.add(tuple(exps))
            self.rhs_terms.append(terms)
        # Build the shared product DAG: children listed before parents.
        children: dict[Monomial, tuple[Monomial, Monomial]] = {}
        stack = list(needed)
        while stack:
            exps = stack.pop()
            if exps in children or sum(exps) < 2:
                continue
            left, right = _split_monomial(exps)
            children[exps] = (left, right)
            for part in (left, right):
                if sum(part) >= 2 and part not in children:
                    stack.append(part)
        self.node_order: list[Monomial] = sorted(children, key=lambda e: (sum(e), e))
        self.node_children = children

    def term_count(self) -> int:
        return sum(len(t) for t in self.rhs_terms)


@dataclass(frozen=True)
class DenseStep:
    """One Taylor step: state series around t0, valid on [0, h]."""

    t0: object
    h: object
    series: tuple[tuple[object, ...], ...]

    def eval(self, var: int, tau) -> object:
        coeffs = self.series[var]
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc * tau + c
        return acc

    def eval_deriv(self, var: int, tau) -> object:
        coeffs = self.series[var]
        acc = coeffs[-1] * (len(coeffs) - 1)
        for k in range(len(coeffs) - 2, 0, -1):
            acc = acc * tau + coeffs[k] * k
        return acc


@dataclass
class IntegrationResult:
    y: tuple
    nsteps: int
    steps: list[DenseStep] | None
    max_drift: object | None


class ToleranceError(ArithmeticError):
    """Integration could not meet its error budget; carries the estimate."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


def _expand_series(ode: PolyODE, y0: Sequence, order: int, zero, leaf_cache):
    """Taylor coefficients of the solution through y0, orders 0..order."""
    dim = ode.dim
    series: list[list] = [[y0[i]] for i in range(dim)]
    nodes: dict[Monomial, list] = {}
    for exps in ode.node_order:
        left, right = ode.node_children[exps]
        nodes[exps] = []

    def coeff_of(exps: Monomial, k: int):
        total = sum(exps)
        if total == 0:
            return None  # handled by caller (constant term)
        if total == 1:
            return series[exps.index(1)][k]
        return nodes[exps][k]

    for k in range(order):
        # extend every product node to coefficient k
        for exps in ode.node_order:
            left, right = ode.node_children[exps]
            acc = zero
            for i in range(k + 1):
                a = coeff_of(left, i)
                b = coeff_of(right, k - i)
                acc = acc + a * b
            nodes[exps].append(acc)
        for var in range(dim):
            acc = zero
            for coeff, exps in leaf_cache[var]:
                if sum(exps) == 0:
                    if k == 0:
                        acc = acc + coeff
                else:
                    acc = acc + coeff * coeff_of(exps, k)
            series[var].append(acc / (k + 1))
    return series


def integrate(
    ode: PolyODE,
    y0: Sequence,
    t_end,
    *,
    digits: int = 30,
    tol=None,
    order: int | None = None,
    max_step=None,
    collect: bool = False,
    monitor: tuple[Mapping[Monomial, object], object] | None = None,
    step_callback: Callable | None = None,
) -> IntegrationResult:
    """Integrate from t=0 to t=t_end, returning the final state as mpf.

    `monitor` is an optional (polynomial, expected value) pair; the
    maximum deviation |P(y) - expected| over all step endpoints is
    reported, serving as an online error indicator for systems with a
    known first integral.  `collect` keeps each step's dense series.
    `step_callback(t0, h, step)` may inspect steps as they complete and
    return False to stop early.
    """
    bits = bits_for_digits(digits)
    old_bits = set_precision_bits(bits)
    try:
        zero = to_backend(0)
        if tol is None:
            tol_b = to_backend(Fraction(1, 10) ** (digits + 5))
        else:
            tol_b = to_backend(tol)
        if order is None:
            order = max(14, int(1.2 * digits) + 4)
        t_end_b = to_backend(t_end)
        if t_end_b <= 0:
            raise ValueError("t_end must be positive")
        max_step_b = to_backend(max_step) if max_step is not None else None

        leaf_cache = [[(to_backend(c), e) for (c, e) in terms]
                      for terms in ode.rhs_terms]
        mon_terms = None
        mon_expected = None
        if monitor is not None:
            mon_terms = [(to_backend(c), tuple(e)) for e, c in monitor[0].items()]
            mon_expected = to_backend(monitor[1])

        def poly_eval(terms, state):
            acc = zero
            for c, exps in terms:
                term = c
                for var, e in enumerate(exps):
                    for _ in range(e):
                        term = term * state[var]
                acc = acc + term
            return acc

        y = [to_backend(v) for v in y0]
        t = zero
        nsteps = 0
        steps: list[DenseStep] | None = [] if collect else None
        max_drift = None
        h_prev = None
        stopped = False

        while t < t_end_b and not stopped:
            series = _expand_series(ode, y, order, zero, leaf_cache)
            # step size from the top two retained coefficients
            h = None
            for tail_order in (order, order - 1):
                amax = zero
                for var in range(ode.dim):
                    a = abs(series[var][tail_order])
                    if a > amax:
                        amax = a
                if amax > 0:
                    cand = (tol_b / amax) ** (to_backend(1) / tail_order)
                    h = cand if h is None or cand < h else h
            if h is None:
                # polynomial (terminating) series: any step is exact
                h = max_step_b if max_step_b is not None else to_backend(1)
            h = h * to_backend(Fraction(4, 5))
            if h_prev is not None and h > 2 * h_prev:
                h = 2 * h_prev
            if max_step_b is not None and h > max_step_b:
                h = max_step_b
            h_bad = h <= 0
            if _HAVE_GMPY2 and not h_bad:
                h_bad = not gmpy2.is_finite(h)
            if h_bad:
                raise ToleranceError(
                    "step size collapsed to zero", float(h) if h else 0.0)
            remaining = t_end_b - t
            clipped = h >= remaining
            h_used = remaining if clipped else h

            new_y = []
            for var in range(ode.dim):
                coeffs = series[var]
                acc = coeffs[-1]
                for c in reversed(coeffs[:-1]):
                    acc = acc * h_used + c
                new_y.append(acc)
            step = DenseStep(
                t0=t, h=h_used,
                series=tuple(tuple(series[var]) for var in range(ode.dim)))
            if steps is not None:
                steps.append(step)
            if mon_terms is not None:
                drift = abs(poly_eval(mon_terms, new_y) - mon_expected)
                if max_drift is None or drift > max_drift:
                    max_drift = drift
            if step_callback is not None:
                if step_callback(t, h_used, step) is False:
                    stopped = True
            y = new_y
            t = t + h_used
            h_prev = h
            nsteps += 1
            if nsteps > 100000:
                raise ToleranceError(
                    "step budget exhausted before reaching t_end",
                    float(backend_to_mpf(t_end_b - t)))

        guard = mpmath.mp.prec
        mpmath.mp.prec = max(guard, bits + 8)
        try:
            y_mpf = tuple(backend_to_mpf(v) for v in y)
            drift_mpf = backend_to_mpf(max_drift) if max_drift is not None else None
        finally:
            mpmath.mp.prec = guard
        return IntegrationResult(y=y_mpf, nsteps=nsteps, steps=steps,
                                 max_drift=drift_mpf)
    finally:
        set_precision_bits(old_bits)


def refine_root(step: DenseStep, var: int, lo, hi, bits: int):
    """Root of the step's dense polynomial for `var` on [lo, hi] (local time).

    Newton iteration with bisection fallback; endpoints must bracket a
    sign change.  Returns local time tau with series[var](tau) = 0.
    """
    old = set_precision_bits(bits)
    try:
        lo = to_backend(lo)
        hi = to_backend(hi)
        f_lo = step.eval(var, lo)
        f_hi = step.eval(var, hi)
        if f_lo == 0:
            return lo
        if f_hi == 0:
            return hi
        if (f_lo > 0) == (f_hi > 0):
            raise ValueError("endpoints do not bracket a sign change")
        tau = (lo + hi) / 2
        for _ in range(bits + 40):
            f = step.eval(var, tau)
            if f == 0:
                break
            if (f > 0) == (f_lo > 0):
                lo = tau
            else:
                hi = tau
            df = step.eval_deriv(var, tau)
            moved = False
            if df != 0:
                cand = tau - f / df
                if lo < cand < hi:
                    tau = cand
                    moved = True
            if not moved:
                tau = (lo + hi) / 2
            if hi - lo <= abs(tau) * to_backend(Fraction(1, 2) ** (bits - 4)) + to_backend(Fraction(1, 2) ** (bits + 16)):
                break
        return tau
    finally:
        set_precision_bits(old)

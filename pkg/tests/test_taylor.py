"""High-precision Taylor integrator: accuracy against closed forms and
an independent adaptive integrator, dense output, event location."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from mpmath import workdps

from nilcenter.taylor import (
    PolyODE,
    backend_to_mpf,
    bits_for_digits,
    integrate,
    refine_root,
    set_precision_bits,
)


def test_harmonic_oscillator_full_turn():
    """x' = -y, y' = x from (1, 0) for time 2*pi returns to (1, 0)."""
    ode = PolyODE([{(0, 1): -1}, {(1, 0): 1}])
    digits = 40
    with workdps(digits + 10):
        res = integrate(ode, [1, 0], 2 * mpmath.pi, digits=digits)
        x, y = (backend_to_mpf(v) for v in res.y)
        tol = mpmath.mpf(10) ** (-(digits - 3))
        assert abs(x - 1) < tol
        assert abs(y) < tol
        assert res.nsteps > 1


def test_exponential_decay_closed_form():
    ode = PolyODE([{(1,): Fraction(-1, 2)}])
    digits = 35
    with workdps(digits + 10):
        res = integrate(ode, [3], 2, digits=digits)
        value = backend_to_mpf(res.y[0])
        target = 3 * mpmath.exp(-1)
        assert abs(value - target) < mpmath.mpf(10) ** (-(digits - 3))


def test_riccati_against_mpmath_odefun():
    """y' = 1 + y^2 (tan solution) cross-checked against an independent
    adaptive integrator and the closed form."""
    ode = PolyODE([{(0,): 1, (2,): 1}])
    digits = 30
    with workdps(digits + 10):
        t_end = mpmath.mpf(1)
        res = integrate(ode, [0], t_end, digits=digits)
        mine = backend_to_mpf(res.y[0])
        assert abs(mine - mpmath.tan(t_end)) < mpmath.mpf(10) ** (-27)
        f = mpmath.odefun(lambda t, y: [1 + y[0] ** 2], 0, [0],
                          tol=mpmath.mpf(10) ** (-25))
        assert abs(mine - f(t_end)[0]) < mpmath.mpf(10) ** (-22)


def test_invariant_monitor_reports_drift():
    """The circle invariant x^2 + y^2 stays within the reported drift."""
    ode = PolyODE([{(0, 1): -1}, {(1, 0): 1}])
    digits = 30
    with workdps(digits + 10):
        res = integrate(ode, [1, 0], 7, digits=digits,
                        monitor=({(2, 0): 1, (0, 2): 1}, 1))
        drift = backend_to_mpf(res.max_drift)
        assert drift < mpmath.mpf(10) ** (-25)


def test_dense_output_and_event_location():
    """Root-solve the dense output of y(t) = sin t for its half-period
    crossing; the located event time matches pi to near-full precision."""
    ode = PolyODE([{(0, 1): -1}, {(1, 0): 1}])
    digits = 35
    bits = bits_for_digits(digits)
    with workdps(digits + 10):
        res = integrate(ode, [1, 0], 4, digits=digits, collect=True)
        assert res.steps
        event = None
        old = set_precision_bits(bits)
        try:
            for step in res.steps:
                y0 = step.eval(1, 0)
                y1 = step.eval(1, step.h)
                if y0 > 0 and y1 <= 0:
                    tau = refine_root(step, 1, 0, step.h, bits)
                    event = backend_to_mpf(step.t0) + backend_to_mpf(tau)
                    break
        finally:
            set_precision_bits(old)
        assert event is not None
        assert abs(event - mpmath.pi) < mpmath.mpf(10) ** (-(digits - 5))


def test_precision_scales_with_digits():
    ode = PolyODE([{(0, 1): -1}, {(1, 0): 1}])
    errors = []
    for digits in (20, 40):
        with workdps(digits + 10):
            res = integrate(ode, [1, 0], 2 * mpmath.pi, digits=digits)
            errors.append(abs(backend_to_mpf(res.y[0]) - 1))
    with workdps(50):
        assert errors[1] < errors[0] * mpmath.mpf(10) ** (-10)


def test_rejects_nonpositive_time():
    ode = PolyODE([{(1,): 1}])
    with pytest.raises(ValueError):
        integrate(ode, [1], 0)


def test_refine_root_requires_bracket():
    ode = PolyODE([{(0, 1): -1}, {(1, 0): 1}])
    digits = 20
    bits = bits_for_digits(digits)
    with workdps(digits + 10):
        res = integrate(ode, [1, 0], Fraction(1, 2), digits=digits,
                        collect=True)
        step = res.steps[0]
        old = set_precision_bits(bits)
        try:
            with pytest.raises(ValueError):
                refine_root(step, 0, 0, step.h, bits)
        finally:
            set_precision_bits(old)

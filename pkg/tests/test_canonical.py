"""Canonical reduction: shift + shear + scale to the normalized shapes,
and the plus <-> minus rescaling map."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from mpmath import workdps

from nilcenter.algebra import (
    FORM_CANONICAL_MINUS,
    PlanePoly,
    VectorField,
)
from nilcenter.canonical import (
    SIGN_MINUS,
    SIGN_PLUS,
    CanonicalSystem,
    mpf_to_fraction,
    rescale,
    rescale_inverse,
    to_canonical,
)
from nilcenter.errors import MathDomainError
from nilcenter.monodromy import monodromy

from tests.conftest import bare_minus, qh_minus_field, scaled_core_plus


def _reduce(vf_plus, digits=60):
    rep = monodromy(vf_plus)
    return to_canonical(vf_plus, rep, digits=digits), rep


def test_already_canonical_core_is_fixed_point():
    cs, _ = _reduce(scaled_core_plus(3, 0))
    assert cs.n == 3
    assert cs.mu == 0
    assert not cs.coeffs_a and not cs.coeffs_b


def test_mu_reproduced_exactly_for_scaled_core():
    """The scaled core family has discriminant -4n^2, so the scale factor
    is 1 and the normalized rotation parameter equals the input mu."""
    for n, mu in ((2, Fraction(1, 2)), (3, Fraction(1, 2)),
                  (3, Fraction(-3, 4)), (5, Fraction(1, 3))):
        cs, rep = _reduce(scaled_core_plus(n, mu))
        with workdps(70):
            err = abs(cs.mu - mpmath.mpf(mu.numerator) / mu.denominator)
            assert err < mpmath.mpf(10) ** (-50), (n, mu, cs.mu)


def test_mu_for_unit_core_is_sqrt_n_multiple():
    """The coefficient-1 core has discriminant -4n, scale |A| = 1/n, so
    the normalized rotation parameter becomes mu * sqrt(n)."""
    for n, mu in ((3, Fraction(1, 2)), (5, Fraction(-1, 2))):
        cs, _ = _reduce(bare_minus(n, mu).to_plus_orientation())
        with workdps(70):
            target = mpmath.mpf(mu.numerator) / mu.denominator * \
                mpmath.sqrt(n)
            assert abs(cs.mu - target) < mpmath.mpf(10) ** (-50), (n, mu)


def test_mu_nonzero_iff_trace_exponent_critical():
    cs, rep = _reduce(scaled_core_plus(3, Fraction(1, 2)))
    assert rep.beta == rep.n - 1 and cs.mu != 0

    vf = qh_minus_field(3, {(4, 0): Fraction(2), (2, 1): Fraction(1)})
    cs, rep = _reduce(vf.to_plus_orientation())
    assert rep.beta is None or rep.beta > rep.n - 1
    assert cs.mu == 0


def test_filtration_respected():
    vf = qh_minus_field(
        3, {(4, 0): Fraction(1), (1, 1): Fraction(1, 2),
            (5, 0): Fraction(-1), (2, 1): Fraction(3)})
    cs, _ = _reduce(vf.to_plus_orientation())
    n = cs.n
    for (i, j) in cs.coeffs_a:
        assert i + n * j >= n + 1, (i, j)
    for (i, j) in cs.coeffs_b:
        assert i + n * j >= 2 * n, (i, j)
    assert cs.truncation == 2 * (2 * n - 1)


def test_rescale_monomial_against_direct_substitution():
    """Independent oracle: under x = u/s, y = -v/s with s = n^(1/(2n-2)),
    a plus-side term a_ij x^i y^j becomes (-1)^j s^(1-i-j) a_ij u^i v^j,
    and the rotation parameter becomes mu / sqrt(n)."""
    n = 3
    digits = 50
    with workdps(digits + 10):
        a40 = mpmath.mpf(7) / 5
        a11 = mpmath.mpf(-2) / 3
        mu = mpmath.mpf(1) / 4
        cs = CanonicalSystem(n=n, mu=mu,
                             coeffs_a={(4, 0): a40, (1, 1): a11},
                             coeffs_b={},
                             sign_convention=SIGN_PLUS,
                             precision=digits, truncation=10)
        out = rescale(cs)
        assert out.sign_convention == SIGN_MINUS
        s = mpmath.power(n, mpmath.mpf(1) / (2 * n - 2))
        tol = mpmath.mpf(10) ** (-(digits - 8))
        assert abs(out.mu - mu / mpmath.sqrt(n)) < tol
        assert abs(out.coeffs_a[(4, 0)] - a40 * s ** (1 - 4)) < tol
        assert abs(out.coeffs_a[(1, 1)] - (-1) * a11 * s ** (1 - 2)) < tol


def test_rescale_round_trip():
    n = 3
    digits = 50
    with workdps(digits + 10):
        cs = CanonicalSystem(
            n=n, mu=mpmath.mpf(1) / 3,
            coeffs_a={(4, 0): mpmath.mpf(2), (2, 1): mpmath.mpf(-1) / 7},
            coeffs_b={(6, 0): mpmath.mpf(3) / 2, (0, 2): mpmath.mpf(5)},
            sign_convention=SIGN_PLUS, precision=digits, truncation=10)
        back = rescale_inverse(rescale(cs))
        tol = mpmath.mpf(10) ** (-(digits - 5))
        assert abs(back.mu - cs.mu) < tol
        for key, value in cs.coeffs_a.items():
            assert abs(back.coeffs_a[key] - value) < tol
        for key, value in cs.coeffs_b.items():
            assert abs(back.coeffs_b[key] - value) < tol


def _canonical_to_field(cs) -> VectorField:
    n = cs.n
    mu = mpf_to_fraction(cs.mu)
    p_terms = {(n, 0): mu}
    for key, value in cs.coeffs_a.items():
        p_terms[key] = mpf_to_fraction(value)
    sign = -1 if cs.sign_convention == SIGN_PLUS else 1
    q_terms = {(2 * n - 1, 0): Fraction(sign * n if sign == -1 else 1)}
    for key, value in cs.coeffs_b.items():
        q_terms[key] = mpf_to_fraction(value)
    q_terms[(n - 1, 1)] = q_terms.get((n - 1, 1), Fraction(0)) + n * mu
    if cs.sign_convention == SIGN_PLUS:
        from nilcenter.algebra import FORM_GENERAL
        return VectorField(P=PlanePoly(p_terms), Q=PlanePoly(q_terms),
                           form=FORM_GENERAL)
    return VectorField(P=PlanePoly(p_terms), Q=PlanePoly(q_terms),
                       form=FORM_CANONICAL_MINUS, n=n)


def test_winding_invariant_preserved_by_reduction():
    """Rationalizing the reduced system and re-running the monodromy
    stage reproduces the invariant n and a monodromic verdict."""
    for vf, expect_n in (
            (qh_minus_field(3, {(4, 0): Fraction(1), (1, 1): Fraction(1)}),
             3),
            (scaled_core_plus(2, Fraction(1, 2)), 2)):
        plus = vf.to_plus_orientation() if vf.orientation() == -1 else vf
        cs, rep0 = _reduce(plus, digits=40)
        field = _canonical_to_field(cs)
        plus2 = field.to_plus_orientation() if field.orientation() == -1 \
            else field
        rep = monodromy(plus2)
        assert rep.n == expect_n == rep0.n
        assert rep.is_monodromic


def test_symbolic_report_rejected():
    from nilcenter.algebra import ParamPoly
    vf = scaled_core_plus(3, ParamPoly.var("mu"))
    rep = monodromy(vf)
    with pytest.raises(MathDomainError):
        to_canonical(vf, rep)

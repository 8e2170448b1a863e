"""Exact polynomial and series layer: ring axioms, quasi-homogeneous
decomposition, implicit solving, and series composition."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilcenter.algebra import (
    FORM_GENERAL,
    ParamPoly,
    PlanePoly,
    Series1,
    VectorField,
    compose_series,
    implicit_solve_F,
    qh_decompose,
)

# ----------------------------------------------------------------------
# Strategies
# ----------------------------------------------------------------------

fractions_st = st.builds(
    Fraction,
    st.integers(min_value=-6, max_value=6),
    st.integers(min_value=1, max_value=4),
)


@st.composite
def param_polys(draw):
    n_terms = draw(st.integers(min_value=0, max_value=4))
    p = ParamPoly.constant(0)
    for _ in range(n_terms):
        i, j = draw(st.integers(0, 3)), draw(st.integers(0, 3))
        p = p + ParamPoly.var("s") ** i * ParamPoly.var("t") ** j * \
            draw(fractions_st)
    return p


@st.composite
def plane_polys(draw):
    n_terms = draw(st.integers(min_value=0, max_value=4))
    p = PlanePoly.zero()
    for _ in range(n_terms):
        i, j = draw(st.integers(0, 4)), draw(st.integers(0, 3))
        p = p + PlanePoly.monomial(i, j, draw(fractions_st))
    return p


@st.composite
def zero_one_jet_plane_polys(draw):
    """PlanePoly with vanishing constant and linear parts."""
    n_terms = draw(st.integers(min_value=0, max_value=4))
    p = PlanePoly.zero()
    for _ in range(n_terms):
        i, j = draw(st.integers(0, 4)), draw(st.integers(0, 3))
        if i + j <= 1:
            i += 2
        p = p + PlanePoly.monomial(i, j, draw(fractions_st))
    return p


# ----------------------------------------------------------------------
# Ring axioms
# ----------------------------------------------------------------------

@given(param_polys(), param_polys(), param_polys())
@settings(max_examples=60, deadline=None)
def test_param_poly_ring_axioms(a, b, c):
    assert ((a + b) + c - (a + (b + c))).is_zero()
    assert (a * b - b * a).is_zero()
    assert ((a * b) * c - a * (b * c)).is_zero()
    assert (a * (b + c) - (a * b + a * c)).is_zero()
    assert (a - a).is_zero()
    one = ParamPoly.constant(1)
    assert (a * one - a).is_zero()


@given(plane_polys(), plane_polys(), plane_polys())
@settings(max_examples=40, deadline=None)
def test_plane_poly_ring_axioms(a, b, c):
    assert ((a + b) + c - (a + (b + c))).is_zero()
    assert (a * b - b * a).is_zero()
    assert ((a * b) * c - a * (b * c)).is_zero()
    assert (a * (b + c) - (a * b + a * c)).is_zero()
    assert (a - a).is_zero()


def test_param_poly_deterministic_order():
    p = (ParamPoly.var("b") * 2 + ParamPoly.var("a") * 3
         + ParamPoly.var("a") * ParamPoly.var("b"))
    assert str(p) == "2*b + 3*a + a*b"
    items = list(p.items())
    assert items == sorted(items)


# ----------------------------------------------------------------------
# Quasi-homogeneous decomposition
# ----------------------------------------------------------------------

def test_qh_decompose_known_weights():
    x5 = PlanePoly.monomial(5, 0)
    parts = qh_decompose(x5, 3)
    assert set(parts) == {5} and (parts[5] - x5).is_zero()

    x2y = PlanePoly.monomial(2, 1)
    parts = qh_decompose(x2y, 3)
    assert set(parts) == {5} and (parts[5] - x2y).is_zero()

    p = PlanePoly.monomial(0, 1, -1) + PlanePoly.monomial(3, 0)
    parts = qh_decompose(p, 3)
    assert set(parts) == {3} and (parts[3] - p).is_zero()


@given(plane_polys(), st.integers(min_value=1, max_value=4))
@settings(max_examples=40, deadline=None)
def test_qh_decompose_sums_back(p, n):
    parts = qh_decompose(p, n)
    total = PlanePoly.zero()
    for w, part in parts.items():
        for (i, j), coeff in part.items():
            assert i + n * j == w
            assert not coeff.is_zero()
        total = total + part
    assert (total - p).is_zero()


# ----------------------------------------------------------------------
# Implicit solution y = F(x) of y + P(x, y) = 0
# ----------------------------------------------------------------------

def _field_with_P(P):
    return VectorField(P=P, Q=PlanePoly.monomial(3, 0, -1), form=FORM_GENERAL)


def test_implicit_solve_trivial_cases():
    N = 10
    assert implicit_solve_F(_field_with_P(PlanePoly.zero()), N).is_zero()

    mu = Fraction(5, 3)
    F = implicit_solve_F(_field_with_P(PlanePoly.monomial(3, 0, mu)), N)
    assert F[3].constant_value() == -mu
    assert all(F[k].is_zero() for k in range(N + 1) if k != 3)

    F = implicit_solve_F(_field_with_P(PlanePoly.monomial(1, 1)), N)
    assert F.is_zero()


@given(zero_one_jet_plane_polys(), st.integers(min_value=4, max_value=9))
@settings(max_examples=40, deadline=None)
def test_implicit_solve_postcondition(P, N):
    vf = _field_with_P(P)
    F = implicit_solve_F(vf, N)
    assert F[0].is_zero() and F[1].is_zero()
    y_plus_P = PlanePoly.monomial(0, 1) + P
    residue = compose_series(y_plus_P, F, N)
    for k in range(N + 1):
        assert residue[k].is_zero(), (k, str(P))


# ----------------------------------------------------------------------
# Series composition
# ----------------------------------------------------------------------

def test_compose_series_examples():
    F = Series1.x_power(2, 10)
    out = compose_series(PlanePoly.monomial(0, 2), F, 10)
    assert out[4].constant_value() == 1
    assert sum(1 for k in range(11) if not out[k].is_zero()) == 1

    F = Series1.x_power(3, 10, -1)
    out = compose_series(PlanePoly.monomial(2, 1), F, 10)
    assert out[5].constant_value() == -1


def test_compose_scaled_core_quintic_coefficient():
    """For x' = y + mu x^3, y' = -3x^5 + 3 mu x^2 y (symbolic mu), the
    series Q(x, F(x)) has x^5 coefficient -3(1 + mu^2)."""
    mu = ParamPoly.var("mu")
    P = PlanePoly({(3, 0): mu})
    Q = PlanePoly({(5, 0): -3, (2, 1): 3 * mu})
    vf = VectorField(P=P, Q=Q, form=FORM_GENERAL)
    F = implicit_solve_F(vf, 9)
    f = compose_series(Q, F, 9)
    expected = ParamPoly.constant(-3) * (ParamPoly.constant(1) + mu * mu)
    assert (f[5] - expected).is_zero()
    for k in range(5):
        assert f[k].is_zero()


# ----------------------------------------------------------------------
# VectorField construction rules
# ----------------------------------------------------------------------

def test_vector_field_rejects_nonzero_one_jet():
    with pytest.raises(ValueError):
        VectorField(P=PlanePoly.monomial(1, 0), Q=PlanePoly.monomial(3, 0),
                    form=FORM_GENERAL)
    with pytest.raises(ValueError):
        VectorField(P=PlanePoly.zero(), Q=PlanePoly.monomial(0, 1),
                    form=FORM_GENERAL)


def test_orientation_flip_round_trip():
    from tests.conftest import qh_minus_field
    vf = qh_minus_field(3, {(4, 0): Fraction(1), (1, 1): Fraction(1, 2)})
    assert vf.orientation() == -1
    plus = vf.to_plus_orientation()
    assert plus.form == FORM_GENERAL
    assert (plus.P.reflect_y() - vf.P).is_zero()
    assert (-plus.Q.reflect_y() - vf.Q).is_zero()

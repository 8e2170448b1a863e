"""Shared fixtures and field builders for the test suite."""

from __future__ import annotations

from fractions import Fraction

import pytest

from nilcenter.algebra import (
    FORM_CANONICAL_MINUS,
    FORM_GENERAL,
    ParamPoly,
    PlanePoly,
    VectorField,
)


def qh_minus_field(n, a_tail, b_tail=None) -> VectorField:
    """Quasi-homogeneous-window field in the minus orientation:

        x' = -y + sum a_tail[i,j] x^i y^j
        y' = x^(2n-1) + sum b_tail[i,j] x^i y^j
    """
    P = PlanePoly(dict(a_tail))
    q = {(2 * n - 1, 0): Fraction(1)}
    if b_tail:
        for key, value in b_tail.items():
            q[key] = value
    return VectorField(P=P, Q=PlanePoly(q), form=FORM_CANONICAL_MINUS, n=n)


def bare_minus(n, mu) -> VectorField:
    """x' = -y + mu x^n,  y' = x^(2n-1) + n mu x^(n-1) y."""
    nmu = ParamPoly.coerce(mu) * n
    P = PlanePoly({(n, 0): mu})
    Q = PlanePoly({(2 * n - 1, 0): 1, (n - 1, 1): nmu})
    return VectorField(P=P, Q=Q, form=FORM_CANONICAL_MINUS, n=n)


def scaled_core_plus(n, mu) -> VectorField:
    """The plus-orientation scaled core family

        x' = y + mu x^n,  y' = -n x^(2n-1) + n mu x^(n-1) y

    whose Andreev discriminant is exactly -4 n^2 for every real mu.
    """
    nmu = ParamPoly.coerce(mu) * n
    P = PlanePoly({(n, 0): mu})
    Q = PlanePoly({(2 * n - 1, 0): -n, (n - 1, 1): nmu})
    return VectorField(P=P, Q=Q, form=FORM_GENERAL)


def pp(name: str) -> ParamPoly:
    return ParamPoly.var(name)


@pytest.fixture(scope="session")
def n3_symbolic():
    from nilcenter.formal import n3_family
    return n3_family(mu=0)

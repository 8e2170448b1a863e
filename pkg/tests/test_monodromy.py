"""Monodromy decision layer: the trace data (f, Phi), the winding-number
invariant n, and the discriminant shortcut."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from nilcenter.algebra import (
    FORM_GENERAL,
    ParamPoly,
    PlanePoly,
    VectorField,
)
from nilcenter.monodromy import (
    InconclusiveError,
    MONODROMIC_CASE_I,
    MONODROMIC_CASE_II,
    MONODROMIC_PHI_ZERO,
    NON_MONODROMIC,
    UNDECIDED_SYMBOLIC,
    compute_f_phi,
    monodromy,
)

from tests.conftest import bare_minus, qh_minus_field, scaled_core_plus


def test_f_phi_scaled_core_symbolic():
    mu = ParamPoly.var("mu")
    vf = scaled_core_plus(3, mu)
    f, Phi = compute_f_phi(vf, 9)
    minus_three = ParamPoly.constant(-3)
    expected_f5 = minus_three * (ParamPoly.constant(1) + mu * mu)
    assert (f[5] - expected_f5).is_zero()
    assert all(f[k].is_zero() for k in range(5))
    assert (Phi[2] - 6 * mu).is_zero()
    assert all(Phi[k].is_zero() for k in range(2))


def test_f_phi_hamiltonian_cusp():
    vf = VectorField(P=PlanePoly.zero(), Q=PlanePoly.monomial(3, 0, -1),
                     form=FORM_GENERAL)
    f, Phi = compute_f_phi(vf, 8)
    assert f[3].constant_value() == -1
    assert all(f[k].is_zero() for k in range(9) if k != 3)
    assert Phi.is_zero()


def test_degenerate_line_of_equilibria_inconclusive():
    vf = VectorField(P=PlanePoly.monomial(2, 0), Q=PlanePoly.zero(),
                     form=FORM_GENERAL)
    with pytest.raises(InconclusiveError):
        monodromy(vf)


def test_verdict_examples():
    rep = monodromy(VectorField(P=PlanePoly.zero(),
                                Q=PlanePoly.monomial(3, 0, -1),
                                form=FORM_GENERAL))
    assert rep.verdict == MONODROMIC_PHI_ZERO
    assert rep.n == 2 and rep.beta is None

    rep = monodromy(VectorField(P=PlanePoly.zero(),
                                Q=PlanePoly.monomial(3, 0, 1),
                                form=FORM_GENERAL))
    assert rep.verdict == NON_MONODROMIC
    assert not rep.is_monodromic

    rep = monodromy(scaled_core_plus(3, Fraction(1)))
    assert rep.verdict == MONODROMIC_CASE_II
    assert rep.n == 3
    assert rep.Delta.constant_value() == -36
    assert rep.beta == 2


def test_discriminant_grid_scaled_core():
    """The scaled plus-orientation core family has discriminant exactly
    -4 n^2, independent of mu."""
    for n in (2, 3, 4, 5):
        for mu in (0, Fraction(1, 2), Fraction(-1, 2), 2, -2):
            rep = monodromy(scaled_core_plus(n, mu))
            assert rep.n == n
            assert rep.Delta.constant_value() == -4 * n * n, (n, mu)
            assert rep.is_monodromic
            if mu == 0:
                assert rep.verdict == MONODROMIC_PHI_ZERO
            else:
                assert rep.verdict == MONODROMIC_CASE_II
                assert rep.beta == n - 1


def test_discriminant_grid_unit_core():
    """The coefficient-1 minus-orientation core family has discriminant
    exactly -4 n, independent of mu."""
    for n in (2, 3, 4, 5):
        for mu in (Fraction(1, 2), Fraction(-1, 2), 1, -1):
            rep = monodromy(bare_minus(n, mu).to_plus_orientation())
            assert rep.n == n
            assert rep.Delta.constant_value() == -4 * n, (n, mu)
            assert rep.is_monodromic
            assert rep.verdict == MONODROMIC_CASE_II
            assert rep.beta == n - 1


def test_symbolic_family_gives_undecided_with_delta():
    mu = ParamPoly.var("mu")
    rep = monodromy(scaled_core_plus(3, mu))
    assert rep.verdict == UNDECIDED_SYMBOLIC
    assert not rep.is_monodromic
    delta = rep.Delta
    assert (delta - ParamPoly.constant(-36)).variables() == ()


def test_case_i_example():
    vf = qh_minus_field(3, {(4, 0): Fraction(2), (2, 1): Fraction(1)})
    rep = monodromy(vf.to_plus_orientation())
    assert rep.verdict == MONODROMIC_CASE_I
    assert rep.n == 3 and rep.beta == 3 and rep.beta > rep.n - 1


def test_discriminant_equivalence_randomized():
    """On draws satisfying the jet-window hypotheses (trace data starting
    no lower than x^(n-1) and x^(2n-1)), the sign of the discriminant
    decides monodromy: Delta < 0 iff the case analysis says monodromic."""
    rng = random.Random(90125)
    checked = 0
    for _ in range(120):
        n = rng.choice((2, 3, 4))
        mu = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        c = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
        P = PlanePoly({(n, 0): mu})
        Q = PlanePoly({(2 * n - 1, 0): Fraction(rng.choice((-2, -1, 1))),
                       (n - 1, 1): c})
        vf = VectorField(P=P, Q=Q, form=FORM_GENERAL)
        try:
            rep = monodromy(vf)
        except InconclusiveError:
            continue
        if rep.verdict == UNDECIDED_SYMBOLIC:
            continue
        delta = rep.Delta.constant_value()
        if rep.alpha % 2 == 1 and rep.alpha == 2 * rep.n - 1:
            assert rep.is_monodromic == (delta < 0), \
                (n, mu, c, rep.verdict, delta)
        checked += 1
    assert checked >= 80


def test_requires_general_form():
    vf = bare_minus(3, Fraction(1, 2))
    with pytest.raises(Exception):
        monodromy(vf)

"""Formal first integrals and inverse integrating factors: the degree
solver, both obstruction ledgers, triangular ideal reduction, the focus
certificate, and the reversibility test."""

from __future__ import annotations

from fractions import Fraction

import pytest

from nilcenter.algebra import (
    FORM_GENERAL,
    ParamPoly,
    PlanePoly,
    VectorField,
)
from nilcenter.errors import MathDomainError
from nilcenter.formal import (
    build_H,
    build_V,
    focus_certificate,
    ledger_residual,
    n3_family,
    qh_family,
    reduce_mod_ideal,
    solve_Tn,
    symmetry_check,
)

from tests.conftest import bare_minus


def v(name):
    return ParamPoly.var(name)


# ----------------------------------------------------------------------
# Degree-n solver
# ----------------------------------------------------------------------

def test_solve_Tn_pure_power():
    p, omega = solve_Tn(PlanePoly.monomial(4, 0))
    assert p.is_zero()
    assert (omega - ParamPoly.constant(1)).is_zero()


def test_solve_Tn_shifted_monomial():
    c = Fraction(5, 2)
    q = PlanePoly.monomial(3, 1, c)  # c x^(n-1) y with n = 4
    p, omega = solve_Tn(q)
    assert omega.is_zero()
    expected = PlanePoly.monomial(4, 0, -c / 4)
    assert (p - expected).is_zero()
    # direct check of the defining identity y dp/dx + q = omega x^n
    residue = PlanePoly.monomial(0, 1) * p.diff_x() + q
    assert residue.is_zero()


def test_solve_Tn_pure_y_power():
    q = PlanePoly.monomial(0, 3)
    p, omega = solve_Tn(q)
    assert omega.is_zero()
    residue = PlanePoly.monomial(0, 1) * p.diff_x() + q
    assert residue.is_zero()
    assert (p - PlanePoly.monomial(1, 2, -1)).is_zero()


def test_solve_Tn_rejects_mixed_degrees():
    with pytest.raises(Exception):
        solve_Tn(PlanePoly.monomial(2, 0) + PlanePoly.monomial(3, 0))


# ----------------------------------------------------------------------
# First-integral ledger on the quintic-core cubic family (mu = 0)
# ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def omega_ledger(request):
    return build_H(n3_family(mu=0), 12)


def test_omega_table(omega_ledger):
    led = omega_ledger
    for k in (3, 4, 5, 6, 7, 8, 11):
        assert led.entry(k).is_zero(), k
    assert (led.entry(9) - 2 * v("a40")).is_zero()
    assert (led.entry(10) - 2 * (v("a40") * v("a11") + v("a50"))).is_zero()


def test_omega12_congruence(omega_ledger):
    led = omega_ledger
    reduced = reduce_mod_ideal(led.entry(12), [led.entry(10)])
    expected = Fraction(2, 7) * (v("a11") * v("a40") * v("a21"))
    assert (reduced - expected).is_zero()


def test_omega_ledger_residual_vanishes(omega_ledger):
    res = ledger_residual(n3_family(mu=0), omega_ledger)
    assert res.is_zero()


def test_omega_leading_entry_both_windows():
    for n in (3, 5):
        led = build_H(qh_family(n), 3 * n)
        lead = led.entry(3 * n)
        target_name = f"a{n + 1}0"
        assert (lead - 2 * v(target_name)).is_zero(), n


def test_omega_triangularity_n3():
    """Within the quasi-homogeneous window, the entry at 3n+k reduces to
    2*a_{n+1+k,0} modulo the earlier entries, k = 0..n-2."""
    n = 3
    led = build_H(qh_family(n), 3 * n + n - 2)
    earlier = []
    for k in range(0, n - 1):
        entry = led.entry(3 * n + k)
        reduced = reduce_mod_ideal(entry, earlier)
        expected = 2 * v(f"a{n + 1 + k}0")
        assert (reduced - expected).is_zero(), k
        earlier.append(entry)


def test_hamiltonian_cusp_all_zero():
    vf = VectorField(P=PlanePoly.zero(), Q=PlanePoly.monomial(3, 0, -1),
                     form=FORM_GENERAL)
    led = build_H(vf, 12)
    assert all(value.is_zero() for _, value in led.entries)


def test_build_H_rejects_small_cap():
    with pytest.raises(Exception):
        build_H(n3_family(mu=0), 3)


def test_bare_family_single_obstruction():
    """The bare rotation family leaves exactly one nonzero entry, at
    index 3n-1, equal to 4*mu*(1 + n*mu^2)."""
    for n, index in ((3, 8), (5, 14)):
        vf = bare_minus(n, ParamPoly.var("mu"))
        led = build_H(vf, 2 * (2 * n - 1))
        mu = v("mu")
        expected = 4 * mu + 4 * n * mu ** 3
        for k, value in led.entries:
            if k == index:
                assert (value - expected).is_zero(), (n, k)
            else:
                assert value.is_zero(), (n, k)


# ----------------------------------------------------------------------
# Inverse-integrating-factor ledger
# ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def lambda_ledger():
    return build_V(n3_family(mu=0), 10)


def test_lambda_solved_relations(lambda_ledger):
    jet = lambda_ledger.jet
    n = 3
    q02 = v("q02")
    assert (jet.coefficient(2 * n, 0) - q02 * Fraction(1, n)).is_zero()
    assert jet.coefficient(n, 1).is_zero()
    # q_{k,1} = -a_{k,1} q01 for k = 1..n-1
    q01 = v("q01")
    assert (jet.coefficient(1, 1) + v("a11") * q01).is_zero()
    assert (jet.coefficient(2, 1) + v("a21") * q01).is_zero()


def test_lambda_table(lambda_ledger):
    led = lambda_ledger
    a11, a21, a40, a50 = v("a11"), v("a21"), v("a40"), v("a50")
    q01, q02 = v("q01"), v("q02")
    assert led.entry(1).is_zero() and led.entry(2).is_zero()
    assert (led.entry(3) + 4 * a40).is_zero()
    assert (led.entry(4) - (-5 * a50 + 3 * a11 * a40)).is_zero()
    assert (led.entry(5) - (q01 + 2 * a21 * a40 + 4 * a11 * a50)).is_zero()
    assert (led.entry(6) - (3 * a21 * a50 - a11 * q01)).is_zero()
    assert (led.entry(7) + a21 * q01).is_zero()
    assert led.entry(8).is_zero()
    assert (led.entry(9) + a40 * q02 * Fraction(1, 3)).is_zero()
    expected10 = -Fraction(2, 3) * a50 * q02 - Fraction(1, 7) * a11 * a40 * q02
    assert (led.entry(10) - expected10).is_zero()


def test_lambda_congruence_block(lambda_ledger):
    """Within the top block the entry at 3n+k reduces to
    -(k+1) a_{n+1+k,0} q02 / n modulo the earlier block entries, with
    q02 treated as an invertible scale."""
    led = lambda_ledger
    n = 3
    base = led.entry(3 * n)
    assert (base + v("a40") * v("q02") * Fraction(1, n)).is_zero()
    reduced = reduce_mod_ideal(led.entry(3 * n + 1), [base], units=("q02",))
    expected = -Fraction(2, n) * v("a50") * v("q02")
    assert (reduced - expected).is_zero()


def test_lambda_ledger_residual_vanishes(lambda_ledger):
    res = ledger_residual(n3_family(mu=0), lambda_ledger)
    assert res.is_zero()


def test_reversible_instance_lambda_vanishes():
    vf = n3_family(mu=0, values={"a40": 0, "a50": 0,
                                 "a11": Fraction(1), "a21": Fraction(-2)})
    led = build_V(vf, 10)
    for k, value in led.entries:
        assert value.subs({"q01": 0}).is_zero(), k


def test_build_V_rejects_small_cap():
    with pytest.raises(Exception):
        build_V(n3_family(mu=0), 0)


# ----------------------------------------------------------------------
# Triangular ideal reduction
# ----------------------------------------------------------------------

def test_reduce_simple_substitution():
    value = 2 * (v("a40") * v("a11") + v("a50"))
    out = reduce_mod_ideal(value, [2 * v("a40")])
    assert (out - 2 * v("a50")).is_zero()


def test_reduce_zero_and_empty():
    assert reduce_mod_ideal(ParamPoly.constant(0), [v("a40")]).is_zero()
    value = v("a11")
    assert (reduce_mod_ideal(value, []) - value).is_zero()


def test_reduce_rejects_nontriangular():
    with pytest.raises(Exception):
        reduce_mod_ideal(v("a11"), [v("a40") * v("a40")])


# ----------------------------------------------------------------------
# Focus certificate
# ----------------------------------------------------------------------

def test_focus_certificate_even_index():
    led = build_H(n3_family(mu=0, values={"a11": 0, "a21": 0,
                                          "a40": 0, "a50": 1}), 12)
    status, k = focus_certificate(led)
    assert status == "focus-certified" and k == 10


def test_focus_certificate_odd_index_inconclusive():
    led = build_H(n3_family(mu=0, values={"a11": 0, "a21": 0,
                                          "a40": 1, "a50": 0}), 12)
    status, k = focus_certificate(led)
    assert status == "inconclusive" and k is None


def test_focus_certificate_all_zero_inconclusive():
    led = build_H(n3_family(mu=0, values={"a11": 1, "a21": -1,
                                          "a40": 0, "a50": 0}), 12)
    status, k = focus_certificate(led)
    assert status == "inconclusive" and k is None


def test_focus_certificate_rejects_symbolic():
    led = build_H(n3_family(mu=0), 12)
    with pytest.raises(Exception):
        focus_certificate(led)


# ----------------------------------------------------------------------
# Reversibility
# ----------------------------------------------------------------------

def test_symmetry_witnesses():
    rev_y = n3_family(mu=0, values={"a40": 0, "a50": 0,
                                    "a11": 1, "a21": Fraction(1, 2)})
    assert symmetry_check(rev_y) == "reversible-y"

    rev_x = n3_family(mu=0, values={"a11": 0, "a50": 0,
                                    "a40": 2, "a21": 1})
    assert symmetry_check(rev_x) == "reversible-x"

    neither = n3_family(mu=0, values={"a40": 1, "a11": 1,
                                      "a21": 0, "a50": 0})
    assert symmetry_check(neither) == "none"

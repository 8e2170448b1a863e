"""Monodromy decision for a nilpotent equilibrium.

For x' = y + P(x,y), y' = Q(x,y) with P, Q starting at order two, let
y = F(x) be the unique branch solving y + P(x,y) = 0 through the origin
and put

    f(x)   = Q(x, F(x))            = a*x^alpha + higher order,
    Phi(x) = div(x', y')|_{y=F(x)} = b*x^beta + higher order.

The origin is monodromic (orbits wind around it) exactly when a < 0,
alpha = 2n - 1 is odd, and one of

    (i)   beta > n - 1,
    (ii)  beta = n - 1  and  b^2 + 4*a*n < 0,
    (iii) Phi vanishes identically

holds. The integer n is the Andreev number, an invariant of orbital
equivalence. Writing a~ for the x^(2n-1) coefficient of f and b~ for the
x^(n-1) coefficient of Phi, the discriminant Delta = b~^2 + 4*a~*n
collapses the three cases to Delta < 0 whenever f has no terms below
x^(2n-1) and Phi none below x^(n-1).

All series work is exact; sign tests on genuinely symbolic coefficients
are never guessed and yield the undecided-symbolic verdict with Delta
attached for the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import (
    FORM_GENERAL,
    ParamPoly,
    Series1,
    VectorField,
    compose_series,
    implicit_solve_F,
)
from .errors import MathDomainError

MONODROMIC_CASE_I = "monodromic(i)"
MONODROMIC_CASE_II = "monodromic(ii)"
MONODROMIC_PHI_ZERO = "monodromic(phi-zero)"
NON_MONODROMIC = "non-monodromic"
UNDECIDED_SYMBOLIC = "undecided-symbolic"

_DEFAULT_BOOTSTRAP_ORDER = 12


class InconclusiveError(MathDomainError):
    """f(x) vanished identically to the working order; the singular point
    may be non-isolated, or the truncation may be too low."""


@dataclass(frozen=True)
class MonodromyReport:
    """Outcome of the monodromy decision.

    a_tilde and b_tilde are the x^(2n-1) coefficient of f and the
    x^(n-1) coefficient of Phi; beta is None when Phi vanished
    identically through the truncation order (a jet statement, not a
    proof of analytic vanishing). n equals (alpha+1)//2 and is the
    Andreev number whenever alpha is odd.
    """

    a_tilde: ParamPoly
    alpha: int
    b_tilde: ParamPoly
    beta: int | None
    n: int
    Delta: ParamPoly
    verdict: str
    truncation: int
    f: Series1
    Phi: Series1

    @property
    def is_monodromic(self) -> bool:
        return self.verdict.startswith("monodromic")

    def summary(self) -> str:
        beta_text = "infinite" if self.beta is None else str(self.beta)
        return (f"alpha={self.alpha} a~={self.a_tilde} beta={beta_text} "
                f"b~={self.b_tilde} n={self.n} Delta={self.Delta} "
                f"verdict={self.verdict} (order {self.truncation})")


def compute_f_phi(vf: VectorField, N: int) -> tuple[Series1, Series1]:
    """Restrict y' and the divergence to the curve y = F(x).

    Returns (f, Phi) truncated at order N. Raises InconclusiveError when
    f is identically zero through order N, since every later decision
    needs its leading term.
    """
    if vf.form != FORM_GENERAL:
        raise ValueError("compute_f_phi expects the general form; "
                         "reorient canonical fields first")
    F = implicit_solve_F(vf, N)
    f = compose_series(vf.Q, F, N)
    if f.is_zero():
        raise InconclusiveError(
            f"y' restricted to the invariant branch vanishes through "
            f"order {N}; singular point may be non-isolated")
    Phi = compose_series(vf.divergence(), F, N)
    return f, Phi


def andreev_classify(f: Series1, Phi: Series1,
                     truncation: int | None = None) -> MonodromyReport:
    """Extract (a, alpha, b, beta), decide monodromy, report Delta.

    Leading coefficients that are non-constant in the parameters make the
    verdict undecided-symbolic; Delta is still attached (it frequently
    simplifies to a constant even when individual coefficients do not).
    """
    alpha = f.first_nonzero_index()
    if alpha is None:
        raise InconclusiveError("cannot classify: f is identically zero")
    if truncation is None:
        truncation = f.order
    a = f[alpha]
    n = (alpha + 1) // 2

    beta = Phi.first_nonzero_index()
    b_at_beta = ParamPoly.zero() if beta is None else Phi[beta]
    # Delta always uses the x^(n-1) slot of Phi, zero or not.
    b_tilde = Phi[n - 1] if 0 <= n - 1 <= Phi.order else ParamPoly.zero()
    Delta = b_tilde * b_tilde + a * (4 * n) if alpha % 2 == 1 else ParamPoly.zero()

    def report(verdict: str) -> MonodromyReport:
        return MonodromyReport(a_tilde=a, alpha=alpha, b_tilde=b_tilde,
                               beta=beta, n=n, Delta=Delta, verdict=verdict,
                               truncation=truncation, f=f, Phi=Phi)

    if not a.is_constant() or not b_at_beta.is_constant():
        return report(UNDECIDED_SYMBOLIC)

    if alpha % 2 == 0:
        return report(NON_MONODROMIC)
    a_val = a.constant_value()
    if a_val > 0:
        return report(NON_MONODROMIC)

    if beta is None:
        return report(MONODROMIC_PHI_ZERO)
    if beta > n - 1:
        return report(MONODROMIC_CASE_I)
    if beta == n - 1:
        if not Delta.is_constant():
            return report(UNDECIDED_SYMBOLIC)
        if Delta.constant_value() < 0:
            return report(MONODROMIC_CASE_II)
        return report(NON_MONODROMIC)
    return report(NON_MONODROMIC)


def monodromy(vf: VectorField, N: int | None = None) -> MonodromyReport:
    """Full monodromy decision for a general-form field.

    The truncation order defaults to 4n+2 once n is known, bootstrapped
    from a coarse first pass. A vanishing f triggers one retry at twice
    the order before giving up; a vanishing Phi triggers one doubling to
    distinguish a late-starting divergence from a genuinely zero one.
    """
    first = N if N is not None else _DEFAULT_BOOTSTRAP_ORDER
    try:
        order = first
        f, Phi = compute_f_phi(vf, order)
    except InconclusiveError:
        order = 2 * first
        f, Phi = compute_f_phi(vf, order)

    alpha = f.first_nonzero_index()
    n = (alpha + 1) // 2
    if N is None and order < 4 * n + 2:
        order = 4 * n + 2
        f, Phi = compute_f_phi(vf, order)

    if Phi.is_zero():
        f2, Phi2 = compute_f_phi(vf, 2 * order)
        if not Phi2.is_zero():
            f, Phi, order = f2, Phi2, 2 * order

    return andreev_classify(f, Phi, truncation=order)

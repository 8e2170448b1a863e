"""Formal first integrals, inverse integrating factors, and their
obstruction ledgers.

Both constructions run degree by degree through the same linear algebra.
On homogeneous polynomials of degree m the operator T(p) = y*dp/dx has
kernel spanned by y^m and image spanned by every degree-m monomial except
x^m. Writing the field as X = (y + P)*d/dx + Q*d/dy with P, Q starting
at order two, the degree-m component of X(H) is T(H_m) plus terms built
from lower H-parts, so each degree contributes one solvable system, one
free kernel coefficient (the y^m slot), and one obstruction: the x^m
component that T cannot reach.

build_H constructs H = y^2 + ... with X(H) = sum omega_k x^k; a formal
first integral exists iff all omega_k vanish. build_V constructs
V = q00 + ... with X(V) - V*div(X) = sum Lambda_k x^k, the obstruction
sequence for an inverse integrating factor; the low kernel coefficients
q01, q02, ... stay symbolic so the ledger records how obstructions
depend on them.

Kernel gauge for H: the y^m slots are genuinely free, and different
choices redistribute the obstruction values (only the generated ideals
are invariants). The adaptive gauge carries each slot as a symbol p0m
and pins the lowest one that appears linearly with a nonzero rational
coefficient whenever that kills an obstruction; unpinned symbols are set
to zero at the end. The zero-kernel gauge just zeroes every slot. Ledger
entries are ideal-equivalent between gauges; the adaptive gauge is the
default because it produces the sparsest table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from .algebra import (
    FORM_CANONICAL_MINUS,
    FORM_QH,
    ParamPoly,
    PlanePoly,
    VectorField,
)
from .errors import MathDomainError

KIND_OMEGA = "omega"
KIND_LAMBDA = "lambda"

GAUGE_ADAPTIVE = "adaptive"
GAUGE_ZERO_KERNEL = "zero-kernel"
GAUGE_UNIT = "unit"
GAUGE_VANISHING = "vanishing"

_RESERVED = re.compile(r"^[pq]0\d+$|^q00$")


@dataclass(frozen=True)
class ObstructionLedger:
    """Obstruction sequence together with the jet that produced it.

    entries holds (k, value) for every k in the computed range, zeros
    included. free_coeffs maps each solver-introduced symbol to its
    final value: the symbol itself when left free, its pinned polynomial
    or gauge value otherwise.
    """

    kind: str
    entries: tuple[tuple[int, ParamPoly], ...]
    jet: PlanePoly
    free_coeffs: dict[str, ParamPoly]
    truncation: int
    gauge: str
    orientation: int                # +1 or -1, the input field's x'-sign

    def entry(self, k: int) -> ParamPoly:
        for kk, value in self.entries:
            if kk == k:
                return value
        raise KeyError(f"no ledger entry at index {k}")

    def first_nonzero(self) -> tuple[int, ParamPoly] | None:
        for k, value in self.entries:
            if not value.is_zero():
                return k, value
        return None

    def substitute(self, assignments: Mapping[str, object]) -> "ObstructionLedger":
        return replace(
            self,
            entries=tuple((k, v.subs(assignments)) for k, v in self.entries),
            jet=self.jet.subs_params(assignments),
            free_coeffs={k: v.subs(assignments)
                         for k, v in self.free_coeffs.items()})

    def summary(self) -> str:
        lines = [f"{self.kind} ledger, k = "
                 f"{self.entries[0][0]}..{self.truncation}, gauge={self.gauge}"]
        for k, value in self.entries:
            if not value.is_zero():
                lines.append(f"  [{k}] {value}")
        if all(v.is_zero() for _, v in self.entries):
            lines.append("  all entries vanish")
        return "\n".join(lines)


def solve_Tn(q: PlanePoly, degree: int | None = None) -> tuple[PlanePoly, ParamPoly]:
    """Solve y*dp/dx + q = omega*x^m for homogeneous q of degree m.

    Returns (p, omega) with the y^m component of p set to zero; callers
    add their own kernel term. The zero polynomial needs an explicit
    degree only for error checking, the answer is (0, 0) regardless.
    """
    return _solve_T(q, degree=degree, sign=1)


def _solve_T(q: PlanePoly, degree: int | None, sign: int) -> \
        tuple[PlanePoly, ParamPoly]:
    """As solve_Tn but for the operator p -> sign*y*dp/dx, so ledgers can
    run natively in either orientation of the linear part."""
    if q.is_zero():
        return PlanePoly.zero(), ParamPoly.zero()
    degrees = {i + j for (i, j), _ in q.items()}
    if len(degrees) != 1:
        raise MathDomainError(f"solve_Tn requires homogeneous input, "
                              f"got degrees {sorted(degrees)}")
    m = degrees.pop()
    if degree is not None and degree != m:
        raise MathDomainError(f"input is homogeneous of degree {m}, not {degree}")
    omega = q.coefficient(m, 0)
    p_terms: dict[tuple[int, int], ParamPoly] = {}
    for (c, d), coeff in q.items():
        if d == 0:
            continue
        # T(x^(c+1) y^(d-1)) = sign*(c+1) x^c y^d cancels this term
        p_terms[(c + 1, d - 1)] = coeff / (-sign * (c + 1))
    return PlanePoly(p_terms), omega


def _homogeneous_parts(p: PlanePoly) -> dict[int, PlanePoly]:
    parts: dict[int, dict[tuple[int, int], ParamPoly]] = {}
    for (i, j), c in p.items():
        parts.setdefault(i + j, {})[(i, j)] = c
    return {d: PlanePoly(t) for d, t in parts.items()}


def _guard_reserved(vf: VectorField) -> None:
    clash = [name for name in vf.parameters() if _RESERVED.match(name)]
    if clash:
        raise MathDomainError(f"parameter names {clash} collide with "
                              "solver-reserved symbols (p0*, q0*)")


def _resolve_frees(values: dict[str, ParamPoly]) -> dict[str, ParamPoly]:
    """Close a free-symbol assignment under itself (acyclic by construction)."""
    names = set(values)
    resolved = dict(values)
    for _ in range(len(values) + 1):
        if not any(set(v.variables()) & names for v in resolved.values()):
            return resolved
        resolved = {k: v.subs(resolved) for k, v in resolved.items()}
    raise MathDomainError("internal: cyclic free-coefficient resolution")


def _pick_pinnable(value: ParamPoly, candidates: Sequence[str]) -> \
        tuple[str, ParamPoly] | None:
    """Lowest-ranked candidate appearing linearly with a nonzero rational
    coefficient, paired with the value that kills the obstruction."""
    present = set(value.variables())
    for name in candidates:
        if name not in present:
            continue
        if value.degree_in(name) != 1:
            continue
        coeff = value.coefficient_of(name, 1)
        if not coeff.is_constant():
            continue
        c = coeff.constant_value()
        rest = value.coefficient_of(name, 0)
        return name, rest / (-c)
    return None


def build_H(vf: VectorField, Kmax: int,
            gauge: str = GAUGE_ADAPTIVE) -> ObstructionLedger:
    """Construct H = y^2 + ... with X(H) = sum_k omega_k x^k, k <= Kmax."""
    if Kmax < 4:
        raise MathDomainError("build_H needs Kmax >= 4")
    if gauge not in (GAUGE_ADAPTIVE, GAUGE_ZERO_KERNEL):
        raise MathDomainError(f"unknown gauge {gauge!r} for build_H")
    _guard_reserved(vf)
    sign = vf.orientation()

    P_parts = _homogeneous_parts(vf.P)
    Q_parts = _homogeneous_parts(vf.Q)
    H: dict[int, PlanePoly] = {2: PlanePoly.monomial(0, 2)}
    raw_entries: list[tuple[int, ParamPoly]] = []
    frees: list[str] = []
    pins: dict[str, ParamPoly] = {}

    for m in range(3, Kmax + 1):
        R = PlanePoly.zero()
        for k, Pk in P_parts.items():
            prev = H.get(m + 1 - k)
            if prev is not None:
                R = R + Pk * prev.diff_x()
        for k, Qk in Q_parts.items():
            prev = H.get(m + 1 - k)
            if prev is not None:
                R = R + Qk * prev.diff_y()
        part, omega = _solve_T(R, degree=m, sign=sign)
        if gauge == GAUGE_ADAPTIVE:
            name = f"p0{m}"
            frees.append(name)
            part = part + PlanePoly.monomial(0, m, ParamPoly.var(name))
        H[m] = part
        raw_entries.append((m, omega))
        if gauge == GAUGE_ADAPTIVE and not omega.is_zero():
            reduced = omega.subs(pins)
            if not reduced.is_zero():
                pick = _pick_pinnable(reduced,
                                      [f for f in frees if f not in pins])
                if pick is not None:
                    pins[pick[0]] = pick[1]

    free_final = {name: pins.get(name, ParamPoly.zero()) for name in frees}
    resolved = _resolve_frees(free_final)
    entries = tuple((k, v.subs(resolved)) for k, v in raw_entries)
    jet = PlanePoly.zero()
    for part in H.values():
        jet = jet + part.subs_params(resolved)
    return ObstructionLedger(kind=KIND_OMEGA, entries=entries, jet=jet,
                             free_coeffs=resolved, truncation=Kmax,
                             gauge=gauge, orientation=sign)


def build_V(vf: VectorField, Kmax: int,
            gauge: str = GAUGE_UNIT) -> ObstructionLedger:
    """Construct V with X(V) - V*div(X) = sum_k Lambda_k x^k, k <= Kmax.

    The constant term is fixed by the gauge (unit: V(0,0)=1, vanishing:
    V(0,0)=0); every kernel coefficient q0m stays symbolic.
    """
    if Kmax < 1:
        raise MathDomainError("build_V needs Kmax >= 1")
    if gauge not in (GAUGE_UNIT, GAUGE_VANISHING):
        raise MathDomainError(f"unknown gauge {gauge!r} for build_V")
    _guard_reserved(vf)
    sign = vf.orientation()

    P_parts = _homogeneous_parts(vf.P)
    Q_parts = _homogeneous_parts(vf.Q)
    div_parts = _homogeneous_parts(vf.divergence())
    q00 = ParamPoly.constant(1 if gauge == GAUGE_UNIT else 0)
    V: dict[int, PlanePoly] = {0: PlanePoly({(0, 0): q00})}
    entries: list[tuple[int, ParamPoly]] = []
    free_coeffs: dict[str, ParamPoly] = {"q00": q00}

    for m in range(1, Kmax + 1):
        R = PlanePoly.zero()
        for k, Pk in P_parts.items():
            prev = V.get(m + 1 - k)
            if prev is not None:
                R = R + Pk * prev.diff_x()
        for k, Qk in Q_parts.items():
            prev = V.get(m + 1 - k)
            if prev is not None:
                R = R + Qk * prev.diff_y()
        for j, dj in div_parts.items():
            prev = V.get(m - j)
            if prev is not None:
                R = R - dj * prev
        part, lam = _solve_T(R, degree=m, sign=sign)
        name = f"q0{m}"
        free_coeffs[name] = ParamPoly.var(name)
        V[m] = part + PlanePoly.monomial(0, m, ParamPoly.var(name))
        entries.append((m, lam))

    jet = PlanePoly.zero()
    for part in V.values():
        jet = jet + part
    return ObstructionLedger(kind=KIND_LAMBDA, entries=tuple(entries), jet=jet,
                             free_coeffs=free_coeffs, truncation=Kmax,
                             gauge=gauge, orientation=sign)


def ledger_residual(vf: VectorField, ledger: ObstructionLedger) -> PlanePoly:
    """Defect of the defining identity, truncated at the ledger's degree.

    Zero for a correct ledger: X(jet) - sum entries*x^k for omega,
    X(jet) - jet*div(X) - sum entries*x^k for lambda.
    """
    xd, yd = vf.xdot(), vf.ydot()
    lie = xd * ledger.jet.diff_x() + yd * ledger.jet.diff_y()
    if ledger.kind == KIND_LAMBDA:
        lie = lie - ledger.jet * vf.divergence()
    for k, value in ledger.entries:
        lie = lie - PlanePoly.monomial(k, 0, value)
    return lie.truncate_total(ledger.truncation)


def reduce_mod_ideal(value: ParamPoly, generators: Sequence[ParamPoly],
                     units: Sequence[str] = ()) -> ParamPoly:
    """Reduce modulo a triangular ideal by back-substitution.

    Each nonzero generator must be linear in some parameter whose
    coefficient is a nonzero rational constant, optionally times a
    monomial in the declared unit symbols; that parameter is eliminated.
    Anything less structured is out of scope and raises.
    """
    gens = [g for g in generators if not g.is_zero()]
    for idx, g in enumerate(gens):
        if g.is_zero():
            continue
        target = None
        for name in g.variables():
            if name in units or g.degree_in(name) != 1:
                continue
            coeff = g.coefficient_of(name, 1)
            if coeff.is_constant():
                target = (name, coeff, g.coefficient_of(name, 0))
                break
            if set(coeff.variables()) <= set(units):
                target = (name, coeff, g.coefficient_of(name, 0))
                break
        if target is None:
            raise MathDomainError(
                f"ideal reduction unsupported: generator {g} is not triangular")
        name, coeff, rest = target
        if coeff.is_constant():
            solved = rest / (-coeff.constant_value())
        else:
            solved = _divide_by_unit_monomial(rest, coeff)
        sub = {name: solved}
        value = value.subs(sub)
        for later in range(idx + 1, len(gens)):
            gens[later] = gens[later].subs(sub)
    return value


def _divide_by_unit_monomial(rest: ParamPoly, coeff: ParamPoly) -> ParamPoly:
    """Compute rest / (-coeff) when coeff is a constant times a monomial
    in unit symbols; every term of rest must be divisible."""
    if rest.is_zero():
        return ParamPoly.zero()
    terms = list(coeff.items())
    if len(terms) != 1:
        raise MathDomainError(
            f"ideal reduction unsupported: coefficient {coeff} is not a monomial")
    d_expo, d_c = terms[0]
    d_map = {name: e for name, e in zip(coeff.alphabet, d_expo) if e}
    out = ParamPoly.zero()
    for e, c in rest.items():
        e_map = {name: ee for name, ee in zip(rest.alphabet, e) if ee}
        term = ParamPoly.constant(c / (-d_c))
        for name, de in d_map.items():
            if e_map.get(name, 0) < de:
                raise MathDomainError(
                    "ideal reduction unsupported: division by a unit "
                    "monomial leaves a remainder")
            e_map[name] = e_map[name] - de
        for name, ee in e_map.items():
            if ee:
                term = term * ParamPoly.var(name) ** ee
        out = out + term
    return out


def focus_certificate(ledger: ObstructionLedger) -> tuple[str, int | None]:
    """A first nonzero obstruction at an even index rules out a center.

    Returns ("focus-certified", k) when the first nonzero entry of a
    fully numeric omega ledger sits at even k; otherwise
    ("inconclusive", None). Symbolic entries are an error: substitute
    parameter values first.
    """
    if ledger.kind != KIND_OMEGA:
        raise MathDomainError("focus_certificate needs an omega ledger")
    for k, value in ledger.entries:
        if not value.is_constant():
            raise MathDomainError(
                f"ledger entry [{k}] = {value} is symbolic; substitute "
                "parameter values before requesting a certificate")
        if value.constant_value() != 0:
            if k % 2 == 0:
                return "focus-certified", k
            return "inconclusive", None
    return "inconclusive", None


REVERSIBLE_Y = "reversible-y"
REVERSIBLE_X = "reversible-x"
NOT_REVERSIBLE = "none"


def symmetry_check(vf: VectorField) -> str:
    """Detect time-reversing reflection symmetries, exactly.

    reversible-y: invariance under (x, y, t) -> (x, -y, -t), which holds
    iff x' is odd and y' is even under y -> -y. reversible-x: invariance
    under (x, y, t) -> (-x, y, -t): x' even and y' odd under x -> -x.
    Either one forces every orbit near the origin to close up, so a
    monodromic equilibrium with such a symmetry is a center.
    """
    xd, yd = vf.xdot(), vf.ydot()
    if (xd.reflect_y() + xd).is_zero() and (yd.reflect_y() - yd).is_zero():
        return REVERSIBLE_Y
    if (xd.reflect_x() - xd).is_zero() and (yd.reflect_x() + yd).is_zero():
        return REVERSIBLE_X
    return NOT_REVERSIBLE


def qh_family(n: int, values: Mapping[str, object] | None = None) -> VectorField:
    """The weighted-homogeneous family with x'-tail of weighted degree
    n+1..2n-1 and y' = x^(2n-1):

        x' = -y + sum_{k=1}^{n-1} a_k1 x^k y + sum_{k=n+1}^{2n-1} a_k0 x^k
        y' = x^(2n-1)

    Coefficients are symbolic parameters named a<k><j>; pass values to
    substitute any of them.
    """
    if n < 2:
        raise MathDomainError("qh_family needs n >= 2")
    terms: dict[tuple[int, int], ParamPoly] = {}
    for k in range(1, n):
        terms[(k, 1)] = ParamPoly.var(f"a{k}1")
    for k in range(n + 1, 2 * n):
        terms[(k, 0)] = ParamPoly.var(f"a{k}0")
    vf = VectorField(PlanePoly(terms), PlanePoly.monomial(2 * n - 1, 0),
                     form=FORM_QH, n=n)
    if values:
        vf = vf.subs_params(values)
    return vf


def n3_family(mu: object = 0,
              values: Mapping[str, object] | None = None) -> VectorField:
    """The full n=3 family with quintic core:

        x' = -y + mu*x^3 + a11*x*y + a21*x^2*y + a40*x^4 + a50*x^5
        y' = x^5 + 3*mu*x^2*y

    mu defaults to 0 (the weighted-homogeneous slice); pass mu="mu" for
    a symbolic leading coefficient, or any rational value.
    """
    mu_poly = ParamPoly.var(mu) if isinstance(mu, str) else ParamPoly.coerce(mu)
    P = PlanePoly({(3, 0): mu_poly,
                   (1, 1): ParamPoly.var("a11"),
                   (2, 1): ParamPoly.var("a21"),
                   (4, 0): ParamPoly.var("a40"),
                   (5, 0): ParamPoly.var("a50")})
    Q = PlanePoly({(5, 0): ParamPoly.constant(1),
                   (2, 1): mu_poly * 3})
    if mu_poly.is_zero():
        vf = VectorField(P, Q, form=FORM_QH, n=3)
    else:
        vf = VectorField(P, Q, form=FORM_CANONICAL_MINUS, n=3)
    if values:
        vf = vf.subs_params(values)
    return vf

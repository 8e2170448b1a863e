"""Exact sparse polynomial and series arithmetic over the rationals.

Everything symbolic in this package is built from three layers:

  ParamPoly   polynomial in a declared parameter alphabet (a11, mu, q02, ...)
              with Fraction coefficients; this is the coefficient domain.
  PlanePoly   sparse polynomial in the plane variables (x, y) whose
              coefficients are ParamPoly.
  Series1     truncated power series in x alone, ParamPoly coefficients.

All arithmetic is exact. The only divisions performed anywhere are by
nonzero integers, so polynomials (not rational functions) suffice as the
coefficient domain. Iteration orders are deterministic (lexicographic) so
that printed and serialized output is reproducible byte for byte.

Values are immutable after construction and safe to share.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Rational = Fraction

ScalarLike = Union[int, Fraction]
ParamLike = Union[int, Fraction, "ParamPoly"]


def _as_fraction(value: ScalarLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class ParamPoly:
    """Multivariate polynomial over Q in named parameters.

    Terms map exponent tuples (aligned with the alphabet) to nonzero
    Fractions. The alphabet is kept sorted; mixed-alphabet arithmetic
    merges alphabets first, so `ParamPoly.var("a") + ParamPoly.var("b")`
    just works.
    """

    __slots__ = ("alphabet", "_terms")

    def __init__(self, alphabet: Sequence[str] = (),
                 terms: Mapping[tuple[int, ...], ScalarLike] | None = None):
        alphabet = tuple(alphabet)
        if list(alphabet) != sorted(alphabet):
            raise ValueError("alphabet must be sorted")
        if len(set(alphabet)) != len(alphabet):
            raise ValueError("alphabet has duplicates")
        self.alphabet = alphabet
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for expo, coeff in terms.items():
                expo = tuple(expo)
                if len(expo) != len(alphabet):
                    raise ValueError("exponent length does not match alphabet")
                if any(e < 0 for e in expo):
                    raise ValueError("negative exponent")
                coeff = _as_fraction(coeff)
                if coeff != 0:
                    acc = clean.get(expo, Fraction(0)) + coeff
                    if acc != 0:
                        clean[expo] = acc
                    else:
                        clean.pop(expo, None)
        self._terms = clean

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero() -> "ParamPoly":
        return _ZERO

    @staticmethod
    def constant(value: ScalarLike) -> "ParamPoly":
        value = _as_fraction(value)
        if value == 0:
            return _ZERO
        return ParamPoly((), {(): value})

    @staticmethod
    def var(name: str) -> "ParamPoly":
        return ParamPoly((name,), {(1,): Fraction(1)})

    @staticmethod
    def coerce(value: ParamLike) -> "ParamPoly":
        if isinstance(value, ParamPoly):
            return value
        return ParamPoly.constant(value)

    # -- structure ------------------------------------------------------

    def items(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        """Terms in deterministic (lexicographic exponent) order."""
        for expo in sorted(self._terms):
            yield expo, self._terms[expo]

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises otherwise)."""
        if not self._terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return next(iter(self._terms.values()))

    def variables(self) -> tuple[str, ...]:
        """Parameters that actually occur (subset of the alphabet)."""
        used = set()
        for expo in self._terms:
            for name, e in zip(self.alphabet, expo):
                if e:
                    used.add(name)
        return tuple(sorted(used))

    def total_degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(e) for e in self._terms)

    def coefficient_of(self, name: str, power: int = 1) -> "ParamPoly":
        """Coefficient of name**power, a polynomial in the other parameters."""
        if name not in self.alphabet:
            return _ZERO if power else self
        idx = self.alphabet.index(name)
        out: dict[tuple[int, ...], Fraction] = {}
        for expo, coeff in self._terms.items():
            if expo[idx] == power:
                reduced = expo[:idx] + (0,) + expo[idx + 1:]
                out[reduced] = out.get(reduced, Fraction(0)) + coeff
        return ParamPoly(self.alphabet, out)._drop_unused()

    def degree_in(self, name: str) -> int:
        if name not in self.alphabet or not self._terms:
            return 0
        idx = self.alphabet.index(name)
        return max(expo[idx] for expo in self._terms)

    def _drop_unused(self) -> "ParamPoly":
        used = self.variables()
        if used == self.alphabet:
            return self
        return self._re_alphabet(used)

    def _re_alphabet(self, alphabet: tuple[str, ...]) -> "ParamPoly":
        if alphabet == self.alphabet:
            return self
        pos = {name: i for i, name in enumerate(alphabet)}
        out: dict[tuple[int, ...], Fraction] = {}
        for expo, coeff in self._terms.items():
            new = [0] * len(alphabet)
            for name, e in zip(self.alphabet, expo):
                if e:
                    new[pos[name]] = e  # missing name would be a bug upstream
            out[tuple(new)] = coeff
        return ParamPoly(alphabet, out)

    @staticmethod
    def _merge(a: "ParamPoly", b: "ParamPoly") -> tuple["ParamPoly", "ParamPoly"]:
        if a.alphabet == b.alphabet:
            return a, b
        merged = tuple(sorted(set(a.alphabet) | set(b.alphabet)))
        return a._re_alphabet(merged), b._re_alphabet(merged)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: ParamLike) -> "ParamPoly":
        if not isinstance(other, (int, Fraction, ParamPoly)):
            return NotImplemented
        other = ParamPoly.coerce(other)
        a, b = ParamPoly._merge(self, other)
        out = dict(a._terms)
        for expo, coeff in b._terms.items():
            out[expo] = out.get(expo, Fraction(0)) + coeff
        return ParamPoly(a.alphabet, out)._drop_unused()

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly(self.alphabet,
                         {e: -c for e, c in self._terms.items()})

    def __sub__(self, other: ParamLike) -> "ParamPoly":
        if not isinstance(other, (int, Fraction, ParamPoly)):
            return NotImplemented
        return self + (-ParamPoly.coerce(other))

    def __rsub__(self, other: ParamLike) -> "ParamPoly":
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return ParamPoly.coerce(other) + (-self)

    def __mul__(self, other: ParamLike) -> "ParamPoly":
        if not isinstance(other, (int, Fraction, ParamPoly)):
            return NotImplemented
        other = ParamPoly.coerce(other)
        a, b = ParamPoly._merge(self, other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in a._terms.items():
            for e2, c2 in b._terms.items():
                expo = tuple(i + j for i, j in zip(e1, e2))
                out[expo] = out.get(expo, Fraction(0)) + c1 * c2
        return ParamPoly(a.alphabet, out)._drop_unused()

    __rmul__ = __mul__

    def __truediv__(self, scalar: ScalarLike) -> "ParamPoly":
        scalar = _as_fraction(scalar)
        if scalar == 0:
            raise ZeroDivisionError("division of ParamPoly by zero")
        return ParamPoly(self.alphabet,
                         {e: c / scalar for e, c in self._terms.items()})

    def __pow__(self, k: int) -> "ParamPoly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = ParamPoly.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ParamPoly.constant(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        a, b = ParamPoly._merge(self._drop_unused(), other._drop_unused())
        return a._terms == b._terms

    def __hash__(self) -> int:
        reduced = self._drop_unused()
        return hash((reduced.alphabet, tuple(sorted(reduced._terms.items()))))

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- substitution and evaluation ------------------------------------

    def subs(self, assignments: Mapping[str, ParamLike]) -> "ParamPoly":
        """Substitute parameters by rationals or other ParamPoly, exactly."""
        relevant = {k: ParamPoly.coerce(v) for k, v in assignments.items()
                    if k in self.alphabet}
        if not relevant:
            return self
        result = _ZERO
        for expo, coeff in self._terms.items():
            term = ParamPoly.constant(coeff)
            for name, e in zip(self.alphabet, expo):
                if not e:
                    continue
                if name in relevant:
                    term = term * relevant[name] ** e
                else:
                    term = term * ParamPoly.var(name) ** e
            result = result + term
        return result

    def evaluate(self, values: Mapping[str, object], num=None):
        """Evaluate numerically. `num` converts coefficients (e.g. mpmath.mpf);
        default keeps Fractions when all values are Fractions/ints."""
        conv = num if num is not None else (lambda v: v)
        total = None
        for expo, coeff in self.items():
            term = conv(coeff.numerator) / conv(coeff.denominator)
            for name, e in zip(self.alphabet, expo):
                if e:
                    if name not in values:
                        raise KeyError(f"no value for parameter {name!r}")
                    term = term * values[name] ** e
            total = term if total is None else total + term
        if total is None:
            return conv(0)
        return total

    # -- display --------------------------------------------------------

    def __repr__(self) -> str:
        return f"ParamPoly({self!s})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for expo, coeff in self.items():
            factors = []
            for name, e in zip(self.alphabet, expo):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            body = "*".join(factors)
            if not body:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(body)
            elif coeff == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{coeff}*{body}")
        text = " + ".join(parts)
        return text.replace("+ -", "- ")


_ZERO = ParamPoly((), {})


class PlanePoly:
    """Sparse polynomial in the plane variables (x, y), ParamPoly coefficients.

    Terms map (i, j) — the exponents of x and y — to nonzero ParamPoly.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], ParamLike] | None = None):
        clean: dict[tuple[int, int], ParamPoly] = {}
        if terms:
            for (i, j), coeff in terms.items():
                if i < 0 or j < 0:
                    raise ValueError("negative exponent")
                coeff = ParamPoly.coerce(coeff)
                if not coeff.is_zero():
                    acc = clean.get((i, j))
                    acc = coeff if acc is None else acc + coeff
                    if acc.is_zero():
                        clean.pop((i, j), None)
                    else:
                        clean[(i, j)] = acc
        self._terms = clean

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero() -> "PlanePoly":
        return PlanePoly()

    @staticmethod
    def monomial(i: int, j: int, coeff: ParamLike = 1) -> "PlanePoly":
        return PlanePoly({(i, j): coeff})

    # -- structure ------------------------------------------------------

    def items(self) -> Iterator[tuple[tuple[int, int], ParamPoly]]:
        for key in sorted(self._terms):
            yield key, self._terms[key]

    def coefficient(self, i: int, j: int) -> ParamPoly:
        return self._terms.get((i, j), _ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def total_degree(self) -> int:
        if not self._terms:
            return 0
        return max(i + j for i, j in self._terms)

    def weighted_degrees(self, n: int) -> tuple[int, ...]:
        """Distinct weighted degrees i + n*j present, ascending."""
        return tuple(sorted({i + n * j for i, j in self._terms}))

    def jet1_at_origin_is_zero(self) -> bool:
        """True when the polynomial has no constant or linear part."""
        return all(i + j >= 2 for i, j in self._terms)

    def parameters(self) -> tuple[str, ...]:
        used: set[str] = set()
        for coeff in self._terms.values():
            used.update(coeff.variables())
        return tuple(sorted(used))

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "PlanePoly") -> "PlanePoly":
        out: dict[tuple[int, int], ParamPoly] = dict(self._terms)
        for key, coeff in other._terms.items():
            cur = out.get(key)
            out[key] = coeff if cur is None else cur + coeff
        return PlanePoly(out)

    def __neg__(self) -> "PlanePoly":
        return PlanePoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "PlanePoly") -> "PlanePoly":
        return self + (-other)

    def __mul__(self, other: Union["PlanePoly", ParamLike]) -> "PlanePoly":
        if not isinstance(other, PlanePoly):
            scale = ParamPoly.coerce(other)
            return PlanePoly({k: c * scale for k, c in self._terms.items()})
        out: dict[tuple[int, int], ParamPoly] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                key = (i1 + i2, j1 + j2)
                prod = c1 * c2
                cur = out.get(key)
                out[key] = prod if cur is None else cur + prod
        return PlanePoly(out)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PlanePoly):
            return NotImplemented
        return (self - other).is_zero()

    def diff_x(self) -> "PlanePoly":
        return PlanePoly({(i - 1, j): c * i
                          for (i, j), c in self._terms.items() if i})

    def diff_y(self) -> "PlanePoly":
        return PlanePoly({(i, j - 1): c * j
                          for (i, j), c in self._terms.items() if j})

    def truncate_total(self, degree: int) -> "PlanePoly":
        return PlanePoly({k: c for k, c in self._terms.items()
                          if k[0] + k[1] <= degree})

    def truncate_weighted(self, n: int, degree: int) -> "PlanePoly":
        return PlanePoly({(i, j): c for (i, j), c in self._terms.items()
                          if i + n * j <= degree})

    def subs_params(self, assignments: Mapping[str, ParamLike]) -> "PlanePoly":
        return PlanePoly({k: c.subs(assignments)
                          for k, c in self._terms.items()})

    def reflect_y(self) -> "PlanePoly":
        """Image under y -> -y."""
        return PlanePoly({(i, j): c if j % 2 == 0 else -c
                          for (i, j), c in self._terms.items()})

    def reflect_x(self) -> "PlanePoly":
        """Image under x -> -x."""
        return PlanePoly({(i, j): c if i % 2 == 0 else -c
                          for (i, j), c in self._terms.items()})

    def evaluate(self, x, y, values: Mapping[str, object] | None = None, num=None):
        """Numeric evaluation at a point; parameters resolved via `values`."""
        values = values or {}
        total = None
        for (i, j), coeff in self.items():
            c = coeff.evaluate(values, num=num)
            term = c * x ** i * y ** j
            total = term if total is None else total + term
        if total is None:
            return (num or (lambda v: v))(0)
        return total

    def __repr__(self) -> str:
        return f"PlanePoly({self!s})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), coeff in self.items():
            factors = []
            if i == 1:
                factors.append("x")
            elif i > 1:
                factors.append(f"x^{i}")
            if j == 1:
                factors.append("y")
            elif j > 1:
                factors.append(f"y^{j}")
            body = "*".join(factors)
            cs = str(coeff)
            needs_parens = (" + " in cs or " - " in cs or cs.startswith("-")) \
                and body
            if needs_parens:
                cs = f"({cs})"
            if not body:
                parts.append(cs)
            elif cs == "1":
                parts.append(body)
            elif cs == "-1":
                parts.append(f"-{body}")
            else:
                parts.append(f"{cs}*{body}")
        return " + ".join(parts).replace("+ -", "- ")


class Series1:
    """Truncated power series in x with ParamPoly coefficients.

    A Series1 of order N stores coefficients c0..cN and represents a value
    known modulo x^(N+1). Operations never read or write beyond the stated
    order; combining series of different orders truncates to the smaller.
    """

    __slots__ = ("order", "_coeffs")

    def __init__(self, order: int, coeffs: Iterable[ParamLike] = ()):
        if order < 0:
            raise ValueError("series order must be >= 0")
        self.order = order
        data = [ParamPoly.coerce(c) for c in coeffs]
        if len(data) > order + 1:
            raise ValueError("more coefficients than the order allows")
        data.extend([_ZERO] * (order + 1 - len(data)))
        self._coeffs = data

    @staticmethod
    def zero(order: int) -> "Series1":
        return Series1(order)

    @staticmethod
    def x_power(k: int, order: int, coeff: ParamLike = 1) -> "Series1":
        s = Series1(order)
        if k <= order:
            s._coeffs[k] = ParamPoly.coerce(coeff)
        return s

    def __getitem__(self, k: int) -> ParamPoly:
        if k < 0:
            raise IndexError(k)
        if k > self.order:
            raise IndexError(f"coefficient {k} beyond truncation order {self.order}")
        return self._coeffs[k]

    def coefficients(self) -> tuple[ParamPoly, ...]:
        return tuple(self._coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self._coeffs)

    def first_nonzero_index(self) -> int | None:
        for k, c in enumerate(self._coeffs):
            if not c.is_zero():
                return k
        return None

    def truncate(self, order: int) -> "Series1":
        if order >= self.order:
            return self
        return Series1(order, self._coeffs[:order + 1])

    def __add__(self, other: "Series1") -> "Series1":
        order = min(self.order, other.order)
        return Series1(order, [self._coeffs[k] + other._coeffs[k]
                               for k in range(order + 1)])

    def __neg__(self) -> "Series1":
        return Series1(self.order, [-c for c in self._coeffs])

    def __sub__(self, other: "Series1") -> "Series1":
        return self + (-other)

    def __mul__(self, other: Union["Series1", ParamLike]) -> "Series1":
        if not isinstance(other, Series1):
            scale = ParamPoly.coerce(other)
            return Series1(self.order, [c * scale for c in self._coeffs])
        order = min(self.order, other.order)
        out = [_ZERO] * (order + 1)
        for i, ci in enumerate(self._coeffs[:order + 1]):
            if ci.is_zero():
                continue
            for j in range(order + 1 - i):
                cj = other._coeffs[j]
                if not cj.is_zero():
                    out[i + j] = out[i + j] + ci * cj
        return Series1(order, out)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Series1):
            return NotImplemented
        return (self - other).is_zero()

    def diff(self) -> "Series1":
        """d/dx, with the order reduced by one (honest truncation)."""
        if self.order == 0:
            return Series1(0)
        return Series1(self.order - 1,
                       [self._coeffs[k] * k for k in range(1, self.order + 1)])

    def shift_mul_x(self, power: int) -> "Series1":
        """Multiply by x**power, keeping the truncation order."""
        out = [_ZERO] * (self.order + 1)
        for k, c in enumerate(self._coeffs):
            if k + power <= self.order:
                out[k + power] = c
        return Series1(self.order, out)

    def subs_params(self, assignments: Mapping[str, ParamLike]) -> "Series1":
        return Series1(self.order, [c.subs(assignments) for c in self._coeffs])

    def evaluate(self, x, values: Mapping[str, object] | None = None, num=None):
        values = values or {}
        total = (num or (lambda v: v))(0)
        xk = (num or (lambda v: v))(1)
        for c in self._coeffs:
            total = total + c.evaluate(values, num=num) * xk
            xk = xk * x
        return total

    def __repr__(self) -> str:
        return f"Series1(order={self.order}, {self!s})"

    def __str__(self) -> str:
        parts = []
        for k, c in enumerate(self._coeffs):
            if c.is_zero():
                continue
            cs = str(c)
            if " + " in cs or " - " in cs:
                cs = f"({cs})"
            if k == 0:
                parts.append(cs)
            else:
                xk = "x" if k == 1 else f"x^{k}"
                parts.append(xk if cs == "1" else f"-{xk}" if cs == "-1"
                             else f"{cs}*{xk}")
        if not parts:
            return f"O(x^{self.order + 1})"
        return " + ".join(parts).replace("+ -", "- ") + f" + O(x^{self.order + 1})"


FORM_GENERAL = "general"
FORM_CANONICAL_PLUS = "canonical-plus"
FORM_CANONICAL_MINUS = "canonical-minus"
FORM_QH = "qh-family"

_FORMS = (FORM_GENERAL, FORM_CANONICAL_PLUS, FORM_CANONICAL_MINUS, FORM_QH)


class VectorField:
    """The field x' = y + P(x,y), y' = Q(x,y) (general form), or one of the
    canonical shapes used downstream.

    P and Q hold only the *nonlinear tails*: for the general form, the full
    x' right-hand side is y + P. The canonical-minus and qh-family forms
    carry x' = -y + P instead; `orientation()` reports which. The form tag
    is advisory for the canonical forms and enforced for qh-family, whose
    shape invariant (y' = x^(2n-1) exactly, P of bounded weighted degree)
    the constructor checks.
    """

    __slots__ = ("P", "Q", "form", "n")

    def __init__(self, P: PlanePoly, Q: PlanePoly, form: str = FORM_GENERAL,
                 n: int | None = None):
        if form not in _FORMS:
            raise ValueError(f"unknown form tag {form!r}")
        if form == FORM_GENERAL:
            if not (P.jet1_at_origin_is_zero() and Q.jet1_at_origin_is_zero()):
                raise ValueError("general form requires P, Q with zero 1-jets")
        if form == FORM_QH:
            if n is None or n < 2:
                raise ValueError("qh-family form requires n >= 2")
            expected = PlanePoly.monomial(2 * n - 1, 0)
            if not (Q - expected).is_zero():
                raise ValueError("qh-family form requires Q = x^(2n-1) exactly")
            for (i, j), _ in P.items():
                w = i + n * j
                if not (n + 1 <= w <= 2 * n - 1):
                    raise ValueError(
                        f"qh-family tail term x^{i}y^{j} has weighted degree {w}, "
                        f"outside [{n + 1}, {2 * n - 1}]")
        if form in (FORM_CANONICAL_PLUS, FORM_CANONICAL_MINUS) and (n is None or n < 2):
            raise ValueError("canonical forms require n >= 2")
        self.P = P
        self.Q = Q
        self.form = form
        self.n = n

    def orientation(self) -> int:
        """+1 when x' = y + P (general/canonical-plus), -1 when x' = -y + P."""
        return -1 if self.form in (FORM_CANONICAL_MINUS, FORM_QH) else 1

    def xdot(self) -> PlanePoly:
        """Full right-hand side of x'."""
        lead = PlanePoly.monomial(0, 1, self.orientation())
        return lead + self.P

    def ydot(self) -> PlanePoly:
        return self.Q

    def divergence(self) -> PlanePoly:
        return self.xdot().diff_x() + self.Q.diff_y()

    def subs_params(self, assignments: Mapping[str, ParamLike]) -> "VectorField":
        return VectorField(self.P.subs_params(assignments),
                           self.Q.subs_params(assignments),
                           form=self.form, n=self.n)

    def parameters(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.P.parameters()) | set(self.Q.parameters())))

    def to_plus_orientation(self) -> "VectorField":
        """Reflect y -> -y so the linear part reads x' = y. Obstruction
        ledgers and Andreev data are computed in this orientation."""
        if self.orientation() == 1:
            return self
        # y -> -y sends (x' = -y + P, y' = Q) to (x' = y + P(x,-y),
        # y' = -Q(x,-y)); no time flip is involved.
        return VectorField(self.P.reflect_y(), -self.Q.reflect_y(),
                           form=FORM_GENERAL)

    def __repr__(self) -> str:
        return (f"VectorField(form={self.form!r}, n={self.n}, "
                f"xdot={self.xdot()!s}, ydot={self.Q!s})")


def qh_decompose(p: PlanePoly, n: int) -> dict[int, PlanePoly]:
    """Split p into its quasi-homogeneous parts for weights (1, n).

    A monomial x^i y^j has weighted degree i + n*j. The parts sum back to
    p exactly; keys are ascending weighted degrees.
    """
    if n < 1:
        raise ValueError("weight n must be >= 1")
    parts: dict[int, dict[tuple[int, int], ParamPoly]] = {}
    for (i, j), coeff in p.items():
        parts.setdefault(i + n * j, {})[(i, j)] = coeff
    return {k: PlanePoly(t) for k, t in sorted(parts.items())}


def implicit_solve_F(vf: VectorField, N: int) -> Series1:
    """Solve y + P(x, y) = 0 for y = F(x) as a truncated series.

    Fixed-point iteration F <- -P(x, F) starting from F = 0; since P has
    no constant or linear terms, each sweep fixes at least one further
    coefficient, so N sweeps suffice at truncation order N.
    """
    if vf.form != FORM_GENERAL:
        raise ValueError("implicit_solve_F expects the general form")
    if N < 2:
        raise ValueError("order must be >= 2")
    F = Series1.zero(N)
    for _ in range(N):
        nxt = -compose_series(vf.P, F, N)
        if nxt == F:
            break
        F = nxt
    return F


def compose_series(p: PlanePoly, F: Series1, N: int) -> Series1:
    """Substitute y := F(x) into p, truncated at order N."""
    F = F.truncate(N)
    # cache powers of F up to the largest y-exponent
    max_j = max((j for (_, j) in p._terms), default=0)
    powers = [Series1.x_power(0, N)]
    for _ in range(max_j):
        powers.append(powers[-1] * F)
    out = Series1.zero(N)
    for (i, j), coeff in p.items():
        if i > N:
            continue
        term = powers[j].shift_mul_x(i) * coeff
        out = out + term
    return out

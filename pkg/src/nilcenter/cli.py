"""Command-line front end.

Input files describe a planar vector field in a tiny declarative
grammar:

    param a11, a40;
    dx = -y + a11*x*y + a40*x^4;
    dy = x^5;

Statements end with `;`. `param` declares symbolic parameter names
(undeclared identifiers other than x and y are rejected). Expressions
use `+ - * / ^` with parentheses; `^` takes a nonnegative integer
exponent; literals are exact rationals (`3`, `-3/7`); decimal literals
are rejected unless --allow-float is given, and are then converted
exactly (0.25 becomes 1/4). `#` starts a comment. The coefficient of y
in dx must be +1 or -1: +1 selects the general orientation, -1 the
canonical one.

Every command prints a human summary to stdout and, with `--json PATH`,
writes a machine-readable report whose layout is frozen in
docs/report-schema.md. Reports are deterministic: two identical
invocations differ at most in the timing field. The environment
variable NILCENTER_DIGITS overrides the default working precision.

Exit codes: 0 success, 2 parse error, 3 mathematical domain error,
4 a decision was demanded (--decide) but the verdict is undecided.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import __version__
from .algebra import (
    FORM_CANONICAL_MINUS,
    FORM_GENERAL,
    ParamPoly,
    PlanePoly,
    VectorField,
)
from .canonical import to_canonical
from .classify import ClassifySettings, classify, n3_conditions, perturbation_probe
from .errors import MathDomainError, ParseError, UndecidedError
from .formal import build_H, build_V, n3_family
from .genpolar import focal_values, gen_trig, period_closed_form
from .monodromy import monodromy
from .taylor import ToleranceError

DEFAULT_DIGITS = 30

# ----------------------------------------------------------------------
# Tokenizer
# ----------------------------------------------------------------------

_FLOAT_RE = re.compile(r"(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+")
_INT_RE = re.compile(r"\d+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*/^();=,")


@dataclass(frozen=True)
class _Token:
    kind: str          # "float", "int", "ident", "op", "eof"
    text: str
    line: int          # 1-based
    col: int           # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        pos = 0
        while pos < len(line):
            ch = line[pos]
            if ch in " \t\r":
                pos += 1
                continue
            if ch == "#":
                break
            m = _FLOAT_RE.match(line, pos)
            if m:
                tokens.append(_Token("float", m.group(), lineno, pos + 1))
                pos = m.end()
                continue
            m = _INT_RE.match(line, pos)
            if m:
                tokens.append(_Token("int", m.group(), lineno, pos + 1))
                pos = m.end()
                continue
            m = _IDENT_RE.match(line, pos)
            if m:
                tokens.append(_Token("ident", m.group(), lineno, pos + 1))
                pos = m.end()
                continue
            if ch in _OPS:
                tokens.append(_Token("op", ch, lineno, pos + 1))
                pos += 1
                continue
            raise ParseError(
                f"line {lineno}, column {pos + 1}: unexpected character {ch!r}")
    last_line = text.count("\n") + 1
    last_col = len(text.split("\n")[-1]) + 1
    tokens.append(_Token("eof", "", last_line, last_col))
    return tokens


def _err(tok: _Token, message: str) -> ParseError:
    where = "end of input" if tok.kind == "eof" else f"{tok.text!r}"
    return ParseError(
        f"line {tok.line}, column {tok.col}: {message} (at {where})")


# ----------------------------------------------------------------------
# Recursive-descent expression parser producing PlanePoly values
# ----------------------------------------------------------------------

_RESERVED = {"param", "dx", "dy", "x", "y"}


class _Parser:
    def __init__(self, tokens: list[_Token], params: tuple[str, ...],
                 allow_float: bool):
        self.toks = tokens
        self.pos = 0
        self.params = params
        self.allow_float = allow_float

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def advance(self) -> _Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect_op(self, op: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind == "op" and tok.text == op:
            return self.advance()
        raise _err(tok, f"expected {what}")

    # expr := ['+'|'-'] term (('+'|'-') term)*
    def expr(self) -> PlanePoly:
        tok = self.peek()
        negate = False
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            negate = tok.text == "-"
        value = self.term()
        if negate:
            value = -value
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                rhs = self.term()
                value = value - rhs if tok.text == "-" else value + rhs
            else:
                return value

    # term := factor (('*'|'/') factor)*
    def term(self) -> PlanePoly:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                rhs = self.factor()
                if tok.text == "*":
                    value = value * rhs
                else:
                    value = value * _reciprocal(rhs, tok)
            else:
                return value

    # factor := ('+'|'-') factor | power
    def factor(self) -> PlanePoly:
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            inner = self.factor()
            return -inner if tok.text == "-" else inner
        return self.power()

    # power := atom ['^' int]
    def power(self) -> PlanePoly:
        value = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            etok = self.peek()
            if etok.kind != "int":
                raise _err(etok, "expected a nonnegative integer exponent "
                                 "after '^'")
            self.advance()
            exponent = int(etok.text)
            result = PlanePoly.monomial(0, 0)
            base = value
            for _ in range(exponent):
                result = result * base
            return result
        return value

    def atom(self) -> PlanePoly:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return PlanePoly.monomial(0, 0, Fraction(tok.text))
        if tok.kind == "float":
            if not self.allow_float:
                raise _err(tok, "decimal literal requires --allow-float; "
                                "use an exact rational like p/q")
            self.advance()
            return PlanePoly.monomial(0, 0, Fraction(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text == "x":
                return PlanePoly.monomial(1, 0)
            if tok.text == "y":
                return PlanePoly.monomial(0, 1)
            if tok.text in self.params:
                return PlanePoly({(0, 0): ParamPoly.var(tok.text)})
            raise _err(tok, f"undeclared identifier {tok.text!r}; declare "
                            "parameters with 'param ...;'")
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect_op(")", "')'")
            return inner
        raise _err(tok, "expected a number, parameter, x, y, or '('")


def _reciprocal(divisor: PlanePoly, at: _Token) -> PlanePoly:
    terms = list(divisor.items())
    if len(terms) == 1 and terms[0][0] == (0, 0) and terms[0][1].is_constant():
        value = terms[0][1].constant_value()
        if value == 0:
            raise _err(at, "division by zero")
        return PlanePoly.monomial(0, 0, Fraction(1) / value)
    if divisor.is_zero():
        raise _err(at, "division by zero")
    raise _err(at, "non-polynomial input: the divisor must be a nonzero "
                   "rational constant")


# ----------------------------------------------------------------------
# InputSpec
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InputSpec:
    """A parsed vector-field description: declared parameter names plus
    the full right-hand sides of dx and dy."""

    params: tuple[str, ...]
    xdot: PlanePoly
    ydot: PlanePoly

    def serialize(self) -> str:
        lines = []
        if self.params:
            lines.append("param " + ", ".join(self.params) + ";")
        lines.append(f"dx = {self.xdot};")
        lines.append(f"dy = {self.ydot};")
        return "\n".join(lines) + "\n"

    def same_as(self, other: "InputSpec") -> bool:
        return (self.params == other.params
                and (self.xdot - other.xdot).is_zero()
                and (self.ydot - other.ydot).is_zero())

    def vector_field(self) -> VectorField:
        """Build the VectorField, reading the orientation off the
        coefficient of y in dx."""
        lead = self.xdot.coefficient(0, 1)
        if not lead.is_constant():
            raise MathDomainError(
                "the coefficient of y in dx must be +1 or -1, not a "
                "parameter expression")
        sign = lead.constant_value()
        y_term = PlanePoly.monomial(0, 1)
        if sign == 1:
            P = self.xdot - y_term
            try:
                return VectorField(P, self.ydot, form=FORM_GENERAL)
            except ValueError as exc:
                raise MathDomainError(str(exc)) from None
        if sign == -1:
            P = self.xdot + y_term
            for poly, label in ((P, "dx"), (self.ydot, "dy")):
                for (i, j), coeff in poly.items():
                    if i + j <= 1 and not coeff.is_zero():
                        raise MathDomainError(
                            "the linear part must be nilpotent: offending "
                            f"term x^{i}*y^{j} in {label}")
            n = _infer_n(self.ydot)
            try:
                return VectorField(P, self.ydot,
                                   form=FORM_CANONICAL_MINUS, n=n)
            except ValueError as exc:
                raise MathDomainError(str(exc)) from None
        raise MathDomainError(
            f"the coefficient of y in dx must be +1 or -1, got {sign}")


def _infer_n(ydot: PlanePoly) -> int:
    """The canonical orientation stores its order in the lowest pure-x
    term of dy, which must be x^(2n-1)."""
    degrees = [i for (i, j), c in ydot.items() if j == 0 and not c.is_zero()]
    if not degrees:
        raise MathDomainError(
            "cannot infer the canonical order: dy has no pure-x term")
    d = min(degrees)
    if d % 2 == 0 or d < 3:
        raise MathDomainError(
            f"cannot infer the canonical order: lowest pure-x term of dy "
            f"is x^{d}, expected an odd power x^(2n-1) with n >= 2")
    return (d + 1) // 2


def parse_input(text: str, allow_float: bool = False) -> InputSpec:
    """Parse the input grammar into an InputSpec."""
    tokens = _tokenize(text)
    params: list[str] = []
    xdot: PlanePoly | None = None
    ydot: PlanePoly | None = None
    pos = 0
    while tokens[pos].kind != "eof":
        tok = tokens[pos]
        if tok.kind != "ident":
            raise _err(tok, "expected a statement: 'param ...;', "
                            "'dx = ...;', or 'dy = ...;'")
        if tok.text == "param":
            pos += 1
            while True:
                name_tok = tokens[pos]
                if name_tok.kind != "ident":
                    raise _err(name_tok, "expected a parameter name")
                name = name_tok.text
                if name in _RESERVED:
                    raise _err(name_tok,
                               f"{name!r} is reserved and cannot be a "
                               "parameter name")
                if name in params:
                    raise _err(name_tok, f"parameter {name!r} declared twice")
                params.append(name)
                pos += 1
                sep = tokens[pos]
                if sep.kind == "op" and sep.text == ",":
                    pos += 1
                    continue
                if sep.kind == "op" and sep.text == ";":
                    pos += 1
                    break
                raise _err(sep, "expected ',' or ';' in parameter list")
            continue
        if tok.text in ("dx", "dy"):
            if (tok.text == "dx" and xdot is not None) or \
               (tok.text == "dy" and ydot is not None):
                raise _err(tok, f"{tok.text} defined twice")
            pos += 1
            eq = tokens[pos]
            if not (eq.kind == "op" and eq.text == "="):
                raise _err(eq, f"expected '=' after {tok.text}")
            pos += 1
            parser = _Parser(tokens, tuple(params), allow_float)
            parser.pos = pos
            value = parser.expr()
            pos = parser.pos
            semi = tokens[pos]
            if not (semi.kind == "op" and semi.text == ";"):
                raise _err(semi, "expected ';' to end the statement")
            pos += 1
            if tok.text == "dx":
                xdot = value
            else:
                ydot = value
            continue
        raise _err(tok, "expected a statement: 'param ...;', 'dx = ...;', "
                        "or 'dy = ...;'")
    if xdot is None or ydot is None:
        raise _err(tokens[pos], "input must define both dx and dy")
    return InputSpec(params=tuple(params), xdot=xdot, ydot=ydot)


# ----------------------------------------------------------------------
# JSON serialization helpers (schema frozen in docs/report-schema.md)
# ----------------------------------------------------------------------

def _json_param_poly(p: ParamPoly) -> dict:
    used = p.variables()
    alphabet = p.alphabet
    keep = [i for i, name in enumerate(alphabet) if name in used]
    terms = {}
    for expo, coeff in p.items():
        key = tuple(expo[i] for i in keep)
        terms[key] = terms.get(key, Fraction(0)) + coeff
    ordered = [[list(expo), str(terms[expo])]
               for expo in sorted(terms) if terms[expo] != 0]
    return {"variables": list(used), "terms": ordered}


def _json_plane_poly(p: PlanePoly) -> dict:
    return {"terms": [[[i, j], _json_param_poly(c)] for (i, j), c in p.items()]}


def _json_mpf(value, digits: int) -> str:
    return mpmath.nstr(mpmath.mpf(value), digits, strip_zeros=False)


def _json_ledger(ledger, digits: int) -> dict:
    return {
        "kind": ledger.kind,
        "gauge": ledger.gauge,
        "orientation": ledger.orientation,
        "truncation": ledger.truncation,
        "entries": [[k, _json_param_poly(v)] for k, v in ledger.entries],
    }


def _json_monodromy(report) -> dict:
    return {
        "alpha": report.alpha,
        "a_tilde": _json_param_poly(report.a_tilde),
        "beta": report.beta,
        "b_tilde": _json_param_poly(report.b_tilde),
        "n": report.n,
        "Delta": _json_param_poly(report.Delta),
        "verdict": report.verdict,
        "truncation": report.truncation,
        "is_monodromic": report.is_monodromic,
    }


def _json_focal(report, digits: int) -> dict:
    out = {
        "n": report.n,
        "mu": _json_mpf(report.mu, digits),
        "digits": report.digits,
        "v1_offset": report.v1_offset,
        "values": [[k, _json_mpf(v, digits)] for k, v in report.vks],
        "first_significant": (list(report.first_significant)
                              if report.first_significant else None),
        "tolerance": _json_mpf(report.tolerance, 3),
    }
    if report.displacement_samples:
        out["displacements"] = [
            {"r0": _json_mpf(p.r0, digits), "ok": p.ok,
             "displacement": _json_mpf(p.displacement, digits) if p.ok else None,
             "error_estimate": _json_mpf(p.error_estimate, 3) if p.ok else None,
             "message": p.message}
            for p in report.displacement_samples]
    return out


def _json_verdict(verdict, digits: int) -> dict:
    out = {
        "status": verdict.status,
        "note": verdict.note,
        "evidence": [{"tag": f.tag, "detail": f.detail}
                     for f in verdict.evidence],
        "conditions": [_json_param_poly(c) for c in verdict.conditions],
    }
    if verdict.monodromy is not None:
        out["monodromy"] = _json_monodromy(verdict.monodromy)
    if verdict.focal is not None:
        out["focal"] = _json_focal(verdict.focal, digits)
    return out


# ----------------------------------------------------------------------
# Command implementations
# ----------------------------------------------------------------------

def _read_input(args) -> InputSpec:
    if args.input == "-":
        text = sys.stdin.read()
    else:
        with open(args.input, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_input(text, allow_float=args.allow_float)


def _input_block(spec: InputSpec) -> dict:
    return {
        "params": list(spec.params),
        "dx": str(spec.xdot),
        "dy": str(spec.ydot),
    }


def _cmd_monodromy(args, spec: InputSpec) -> tuple[list[str], dict]:
    vf = spec.vector_field().to_plus_orientation()
    report = monodromy(vf, N=args.order)
    lines = [report.summary()]
    return lines, {"monodromy": _json_monodromy(report)}


def _cmd_canonical(args, spec: InputSpec) -> tuple[list[str], dict]:
    vf = spec.vector_field()
    general = vf.to_plus_orientation()
    if general.form != FORM_GENERAL:
        general = VectorField(general.P, general.Q, form=FORM_GENERAL)
    report = monodromy(general, N=args.order)
    if not report.is_monodromic:
        raise MathDomainError(
            f"field is not monodromic ({report.verdict}); no canonical "
            "reduction")
    cs = to_canonical(general, report, digits=args.digits)
    lines = [
        f"canonical form ({cs.sign_convention} convention), n={cs.n}, "
        f"{cs.precision} digits, truncation {cs.truncation}",
        f"  mu = {mpmath.nstr(cs.mu, min(args.digits, 20))}",
    ]
    for (i, j), v in sorted(cs.coeffs_a.items()):
        lines.append(f"  a[{i},{j}] = {mpmath.nstr(v, min(args.digits, 20))}")
    for (i, j), v in sorted(cs.coeffs_b.items()):
        lines.append(f"  b[{i},{j}] = {mpmath.nstr(v, min(args.digits, 20))}")
    result = {
        "canonical": {
            "n": cs.n,
            "sign_convention": cs.sign_convention,
            "precision": cs.precision,
            "truncation": cs.truncation,
            "mu": _json_mpf(cs.mu, args.digits),
            "coeffs_a": [[[i, j], _json_mpf(v, args.digits)]
                         for (i, j), v in sorted(cs.coeffs_a.items())],
            "coeffs_b": [[[i, j], _json_mpf(v, args.digits)]
                         for (i, j), v in sorted(cs.coeffs_b.items())],
        },
        "monodromy": _json_monodromy(report),
    }
    return lines, result


def _ledger_kmax(args, vf: VectorField) -> int:
    if args.kmax is not None:
        return args.kmax
    n = vf.n
    if n is None:
        plus = vf.to_plus_orientation()
        if plus.form != FORM_GENERAL:
            plus = VectorField(plus.P, plus.Q, form=FORM_GENERAL)
        report = monodromy(plus)
        n = report.n
    return 2 * (2 * n - 1)


def _cmd_obstructions(args, spec: InputSpec) -> tuple[list[str], dict]:
    vf = spec.vector_field()
    kmax = _ledger_kmax(args, vf)
    ledger = build_H(vf, kmax)
    lines = [f"formal first-integral obstructions through order {kmax} "
             f"(gauge: {ledger.gauge})"]
    for k, value in ledger.entries:
        lines.append(f"  omega[{k}] = {value}")
    return lines, {"obstructions": _json_ledger(ledger, args.digits)}


def _cmd_iif(args, spec: InputSpec) -> tuple[list[str], dict]:
    vf = spec.vector_field()
    kmax = _ledger_kmax(args, vf)
    ledger = build_V(vf, kmax)
    lines = [f"inverse-integrating-factor obstructions through order {kmax} "
             f"(gauge: {ledger.gauge})"]
    for k, value in ledger.entries:
        lines.append(f"  Lambda[{k}] = {value}")
    return lines, {"iif": _json_ledger(ledger, args.digits)}


def _cmd_focal(args, spec: InputSpec) -> tuple[list[str], dict]:
    vf = spec.vector_field()
    if vf.parameters():
        raise MathDomainError(
            "focal values need numeric coefficients; substitute the "
            "parameters first")
    if vf.orientation() == -1:
        source = vf
        n = vf.n
    else:
        report = monodromy(vf)
        if not report.is_monodromic:
            raise MathDomainError(
                f"field is not monodromic ({report.verdict}); focal values "
                "are not defined")
        source = to_canonical(vf, report)
        n = report.n
    kmax = args.kmax if args.kmax is not None else 2 * n - 1
    r0_list = tuple(Fraction(r) for r in args.r0.split(",")) if args.r0 else ()
    report = focal_values(source, kmax, digits=args.digits, r0_list=r0_list)
    return [report.summary()], {"focal": _json_focal(report, args.digits)}


def _cmd_gentrig(args) -> tuple[list[str], dict]:
    n = args.n
    digits = args.digits
    trig = gen_trig(n, digits=digits)
    closed = period_closed_form(n, digits=digits)
    lines = [
        f"generalized trigonometric pair for n={n} at {digits} digits",
        f"  period (closed form)  T = {mpmath.nstr(closed, digits)}",
        f"  period (first return)     {mpmath.nstr(trig.period_return, digits)}",
        f"  unit-circle drift         {mpmath.nstr(trig.drift, 3)}",
        f"  integration steps         {len(trig.steps)}",
    ]
    result = {"gentrig": {
        "n": n,
        "digits": digits,
        "period": _json_mpf(closed, digits),
        "period_return": _json_mpf(trig.period_return, digits),
        "drift": _json_mpf(trig.drift, 3),
        "steps": len(trig.steps),
    }}
    return lines, result


def _classify_settings(args) -> ClassifySettings:
    kwargs = {}
    if args.digits is not None:
        kwargs["digits"] = args.digits
    if getattr(args, "confirm_digits", None) is not None:
        kwargs["confirm_digits"] = args.confirm_digits
    if getattr(args, "probe_digits", None) is not None:
        kwargs["probe_digits"] = args.probe_digits
    if getattr(args, "kmax", None) is not None:
        kwargs["focal_kmax"] = args.kmax
    if getattr(args, "formal_cap", None) is not None:
        kwargs["formal_cap"] = args.formal_cap
    return ClassifySettings(**kwargs)


def _cmd_classify(args, spec: InputSpec) -> tuple[list[str], dict]:
    vf = spec.vector_field()
    settings = _classify_settings(args)
    verdict = classify(vf, settings)
    if args.decide and verdict.status == "undecided":
        raise UndecidedError(
            "a decision was demanded (--decide) but the verdict is "
            f"undecided: {verdict.note}")
    return [verdict.summary()], {"verdict": _json_verdict(verdict,
                                                          settings.digits)}


def _cmd_n3(args) -> tuple[list[str], dict]:
    if args.probe:
        needed = {"a11": args.a11, "a21": args.a21, "a40": args.a40}
        missing = [k for k, v in needed.items() if v is None]
        if missing:
            raise MathDomainError(
                "the unfolding probe needs --a11, --a21 and --a40 "
                f"(missing: {', '.join(missing)})")
        q20 = args.q20 if args.q20 is not None else Fraction(0)
        eps_list = tuple(Fraction(e) for e in args.eps.split(",")) \
            if args.eps else (Fraction(1, 10), Fraction(1, 20),
                              Fraction(1, 40), Fraction(1, 80))
        fit = perturbation_probe(args.a11, args.a21, args.a40, q20,
                                 eps_list=eps_list,
                                 digits=args.digits or DEFAULT_DIGITS,
                                 strict=not args.no_strict)
        digits = args.digits or DEFAULT_DIGITS
        result = {"probe": {
            "a11": str(args.a11), "a21": str(args.a21),
            "a40": str(args.a40), "a50": str(fit.a50), "q20": str(q20),
            "rows": [[_json_mpf(e, digits), _json_mpf(g2, digits),
                      _json_mpf(g4, digits)] for e, g2, g4 in fit.rows],
            "c2": _json_mpf(fit.c2, digits),
            "c2_residual": _json_mpf(fit.c2_residual, 3),
            "c4": _json_mpf(fit.c4, digits),
            "c4_slope": _json_mpf(fit.c4_slope, digits),
            "c4_residual": _json_mpf(fit.c4_residual, 3),
            "singular_coefficient": _json_mpf(fit.singular_coefficient,
                                              digits),
            "singular_residual": _json_mpf(fit.singular_residual, 3),
        }}
        return [fit.summary()], result

    values = {}
    for name in ("a11", "a21", "a40", "a50"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    mu = args.mu if args.mu is not None else "mu"
    vf = n3_family(mu=mu, values=values)
    settings = _classify_settings(args)
    verdict = classify(vf, settings)
    if args.decide and verdict.status == "undecided" and not verdict.conditions:
        raise UndecidedError(
            "a decision was demanded (--decide) but the verdict is "
            f"undecided: {verdict.note}")
    lines = [verdict.summary()]
    if verdict.conditions:
        ref = n3_conditions()
        lines.append("reference conditions for the fully symbolic family: "
                     + ", ".join(str(c) for c in ref))
    return lines, {"verdict": _json_verdict(verdict, settings.digits)}


# ----------------------------------------------------------------------
# Dispatch, provenance, batch
# ----------------------------------------------------------------------

_INPUT_COMMANDS = {
    "monodromy": _cmd_monodromy,
    "canonical": _cmd_canonical,
    "obstructions": _cmd_obstructions,
    "iif": _cmd_iif,
    "focal": _cmd_focal,
    "classify": _cmd_classify,
}


def _settings_block(args) -> dict:
    keys = ("digits", "order", "kmax", "confirm_digits", "probe_digits",
            "formal_cap", "allow_float", "decide", "r0", "n", "mu",
            "a11", "a21", "a40", "a50", "q20", "eps", "no_strict", "probe")
    out = {}
    for key in keys:
        if hasattr(args, key):
            value = getattr(args, key)
            if isinstance(value, Fraction):
                value = str(value)
            out[key] = value
    return out


def _report(args, command: str, input_block, result: dict,
            elapsed: float) -> dict:
    return {
        "command": command,
        "input": input_block,
        "result": result,
        "provenance": {
            "tool": "nilcenter",
            "version": __version__,
            "settings": _settings_block(args),
            "timing_seconds": round(elapsed, 6),
        },
    }


def _emit(report: dict, lines: list[str], json_path: str | None) -> None:
    for line in lines:
        print(line)
    if json_path:
        payload = json.dumps(report, indent=2, ensure_ascii=True)
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")


def _run_single(args) -> int:
    t0 = time.perf_counter()
    if args.command in _INPUT_COMMANDS:
        spec = _read_input(args)
        lines, result = _INPUT_COMMANDS[args.command](args, spec)
        input_block = _input_block(spec)
    elif args.command == "gentrig":
        lines, result = _cmd_gentrig(args)
        input_block = {"n": args.n}
    elif args.command == "n3":
        lines, result = _cmd_n3(args)
        input_block = {"family": "n3"}
    else:  # pragma: no cover - argparse restricts choices
        raise MathDomainError(f"unknown command {args.command!r}")
    report = _report(args, args.command, input_block, result,
                     time.perf_counter() - t0)
    _emit(report, lines, args.json)
    return 0


def _run_batch(args) -> int:
    with open(args.batch, "r", encoding="utf-8") as fh:
        raw_lines = fh.readlines()
    reports = []
    texts = []
    first_error = 0
    for idx, raw in enumerate(raw_lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        t0 = time.perf_counter()
        entry: dict
        try:
            spec = parse_input(stripped, allow_float=args.allow_float)
            lines, result = _INPUT_COMMANDS[args.command](args, spec)
            entry = _report(args, args.command, _input_block(spec), result,
                            time.perf_counter() - t0)
            entry["line"] = idx
            texts.append(f"=== line {idx} ===")
            texts.extend(lines)
        except (ParseError, UndecidedError, MathDomainError,
                ToleranceError) as exc:
            code = _exit_code_for(exc)
            entry = {
                "line": idx,
                "command": args.command,
                "error": {"type": type(exc).__name__, "message": str(exc),
                          "exit_code": code},
            }
            texts.append(f"=== line {idx} ===")
            texts.append(f"error: {exc}")
            if first_error == 0:
                first_error = code
        reports.append(entry)
    for line in texts:
        print(line)
    if args.json:
        payload = json.dumps(reports, indent=2, ensure_ascii=True)
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    return first_error


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ParseError):
        return 2
    if isinstance(exc, UndecidedError):
        return 4
    return 3


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(
            f"not an exact rational: {text!r} ({exc})") from None


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilcenter",
        description="Center-focus analysis of nilpotent equilibria of "
                    "planar polynomial vector fields.")
    parser.add_argument("--version", action="version",
                        version=f"nilcenter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True):
        if needs_input:
            p.add_argument("input", nargs="?", default="-",
                           help="input file (default: stdin)")
            p.add_argument("--batch", metavar="FILE",
                           help="run on every one-line spec in FILE")
            p.add_argument("--allow-float", action="store_true",
                           help="accept decimal literals (converted exactly)")
        p.add_argument("--digits", type=int, default=None,
                       help="working precision in decimal digits "
                            f"(default {DEFAULT_DIGITS}; NILCENTER_DIGITS "
                            "overrides)")
        p.add_argument("--json", metavar="PATH",
                       help="write a machine-readable report to PATH")

    p = sub.add_parser("monodromy", help="decide whether orbits turn around "
                                         "the equilibrium")
    common(p)
    p.add_argument("--order", type=int, default=None,
                   help="series truncation order")

    p = sub.add_parser("canonical", help="reduce to the scaled canonical "
                                         "shape")
    common(p)
    p.add_argument("--order", type=int, default=None,
                   help="series truncation order for the monodromy stage")

    p = sub.add_parser("obstructions", help="formal first-integral "
                                            "obstruction ledger")
    common(p)
    p.add_argument("--kmax", type=int, default=None,
                   help="highest obstruction order (default 2(2n-1))")

    p = sub.add_parser("iif", help="inverse-integrating-factor obstruction "
                                   "ledger")
    common(p)
    p.add_argument("--kmax", type=int, default=None,
                   help="highest obstruction order (default 2(2n-1))")

    p = sub.add_parser("focal", help="numeric focal values of the return map")
    common(p)
    p.add_argument("--kmax", type=int, default=None,
                   help="highest focal order (default 2n-1)")
    p.add_argument("--r0", default=None,
                   help="comma-separated radii for displacement samples")

    p = sub.add_parser("gentrig", help="generalized trigonometric pair and "
                                       "its period")
    common(p, needs_input=False)
    p.add_argument("--n", type=int, required=True, help="grading order n >= 1")

    p = sub.add_parser("classify", help="full center-focus verdict")
    common(p)
    p.add_argument("--decide", action="store_true",
                   help="exit with status 4 when the verdict is undecided")
    p.add_argument("--confirm-digits", type=int, default=None)
    p.add_argument("--probe-digits", type=int, default=None)
    p.add_argument("--kmax", type=int, default=None,
                   help="top of the focal ladder (default 2n-1)")
    p.add_argument("--formal-cap", type=int, default=None)

    p = sub.add_parser("n3", help="the quintic-core cubic family: classify, "
                                  "conditions, or unfolding probe")
    common(p, needs_input=False)
    for name in ("mu", "a11", "a21", "a40", "a50"):
        p.add_argument(f"--{name}", type=_rational, default=None,
                       help=f"numeric value for {name} (default: symbolic)")
    p.add_argument("--decide", action="store_true")
    p.add_argument("--confirm-digits", type=int, default=None)
    p.add_argument("--probe-digits", type=int, default=None)
    p.add_argument("--formal-cap", type=int, default=None)
    p.add_argument("--probe", action="store_true",
                   help="run the small-parameter unfolding probe")
    p.add_argument("--q20", type=_rational, default=None,
                   help="probe: coefficient of x^2 in dy")
    p.add_argument("--eps", default=None,
                   help="probe: comma-separated eps values in (0, 1/10]")
    p.add_argument("--no-strict", action="store_true",
                   help="probe: report fits even when residuals exceed "
                        "the threshold")
    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)

    if args.digits is None:
        env = os.environ.get("NILCENTER_DIGITS")
        if env is not None:
            try:
                args.digits = int(env)
            except ValueError:
                print(f"error: NILCENTER_DIGITS must be an integer, got "
                      f"{env!r}", file=sys.stderr)
                return 3
        else:
            args.digits = DEFAULT_DIGITS
    if args.digits < 5 or args.digits > 1000:
        print(f"error: --digits {args.digits} outside the supported range "
              "[5, 1000]", file=sys.stderr)
        return 3

    try:
        if getattr(args, "batch", None):
            if args.command not in _INPUT_COMMANDS:
                print("error: --batch applies only to commands that read "
                      "field input", file=sys.stderr)
                return 3
            return _run_batch(args)
        return _run_single(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except UndecidedError as exc:
        print(f"undecided: {exc}", file=sys.stderr)
        return 4
    except (MathDomainError, ToleranceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

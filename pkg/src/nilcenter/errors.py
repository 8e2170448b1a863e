"""Shared exception types, mapped to CLI exit codes in cli.py."""

from __future__ import annotations


class NilcenterError(Exception):
    """Base class for all package errors."""


class ParseError(NilcenterError):
    """Input text failed to parse; carries line/column context in args."""


class MathDomainError(NilcenterError):
    """Preconditions of a pipeline stage are violated or the computation
    cannot decide within its stated scope (symbolic signs, degenerate
    input, integrator failure)."""


class UndecidedError(NilcenterError):
    """A decision was requested but the evidence supports no verdict."""

"""nilcenter: center-focus analysis of nilpotent equilibria of planar
polynomial vector fields.

The pipeline, bottom to top:

  algebra    exact sparse polynomials and truncated series over Q
  monodromy  Andreev data (f, Phi, n) and the monodromy decision
  canonical  reduction of a monodromic field to scaled canonical shapes
  formal     formal first integrals, inverse integrating factors, and
             their obstruction ledgers
  taylor     arbitrary-precision Taylor-series ODE integration
  genpolar   generalized trigonometric functions and focal values in
             generalized polar coordinates
  classify   verdict orchestration (center / focus / undecided)
  cli        command-line front end
"""

from .algebra import (
    FORM_CANONICAL_MINUS,
    FORM_CANONICAL_PLUS,
    FORM_GENERAL,
    FORM_QH,
    ParamPoly,
    PlanePoly,
    Rational,
    Series1,
    VectorField,
    compose_series,
    implicit_solve_F,
    qh_decompose,
)
from .canonical import CanonicalSystem, rescale, rescale_inverse, to_canonical
from .classify import (
    ClassifySettings,
    Verdict,
    classify,
    n3_conditions,
    perturbation_probe,
)
from .formal import (
    GAUGE_ADAPTIVE,
    GAUGE_UNIT,
    ObstructionLedger,
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
from .genpolar import (
    FocalReport,
    GenTrig,
    focal_values,
    gen_trig,
    period_closed_form,
    poincare_probe,
    trig_moment,
    v1_quadrature,
    v3_formula,
)
from .monodromy import MonodromyReport, andreev_classify, compute_f_phi, monodromy

__version__ = "0.1.0"

__all__ = [
    "CanonicalSystem",
    "ClassifySettings",
    "FORM_CANONICAL_MINUS",
    "FORM_CANONICAL_PLUS",
    "FORM_GENERAL",
    "FORM_QH",
    "FocalReport",
    "GAUGE_ADAPTIVE",
    "GAUGE_UNIT",
    "GenTrig",
    "MonodromyReport",
    "ObstructionLedger",
    "ParamPoly",
    "PlanePoly",
    "Rational",
    "Series1",
    "VectorField",
    "Verdict",
    "andreev_classify",
    "build_H",
    "build_V",
    "classify",
    "compose_series",
    "compute_f_phi",
    "focal_values",
    "focus_certificate",
    "gen_trig",
    "implicit_solve_F",
    "monodromy",
    "n3_conditions",
    "n3_family",
    "perturbation_probe",
    "period_closed_form",
    "poincare_probe",
    "qh_decompose",
    "qh_family",
    "ledger_residual",
    "reduce_mod_ideal",
    "rescale",
    "rescale_inverse",
    "solve_Tn",
    "symmetry_check",
    "to_canonical",
    "trig_moment",
    "v1_quadrature",
    "v3_formula",
    "__version__",
]

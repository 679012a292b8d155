"""Finite-time stability certificates for stochastic nonlinear systems.

Pipeline: model and Lyapunov candidates are written in a signed-power
expression language (:mod:`ftstab.expr`); generators are computed exactly
(:mod:`ftstab.lyap`); gauge-based certificates and settling-time bounds
are checked on sampled domains (:mod:`ftstab.certify`); and certified
bounds are validated empirically with an absorbing Euler-Maruyama
simulator (:mod:`ftstab.sim`) and Monte Carlo estimators
(:mod:`ftstab.mc`).
"""

from .certify import (
    CertificateVerdict,
    MarginReport,
    PowerGauge,
    PowerSumGauge,
    SampleDomain,
    certify,
    check_classical,
    check_gauge_condition,
    check_nonpositive_generator,
    max_feasible_c,
    recip_integral,
    settling_bound,
)
from .expr import (
    Expr,
    Monomial,
    canonicalize,
    differentiate,
    evaluate,
    parse,
    to_canonical,
    to_text,
)
from .lyap import (
    LyapunovCandidate,
    SdeModel,
    diffusion_quadratic,
    generator,
    validate_model,
)
from .mc import (
    ProbEstimate,
    SettlingStats,
    empirical_supermartingale,
    estimate_exceedance,
    estimate_settling,
)
from .sim import Path, SimParams, brownian_increments, simulate

__version__ = "0.1.0"

__all__ = [
    "CertificateVerdict",
    "Expr",
    "LyapunovCandidate",
    "MarginReport",
    "Monomial",
    "Path",
    "PowerGauge",
    "PowerSumGauge",
    "ProbEstimate",
    "SampleDomain",
    "SdeModel",
    "SettlingStats",
    "SimParams",
    "brownian_increments",
    "canonicalize",
    "certify",
    "check_classical",
    "check_gauge_condition",
    "check_nonpositive_generator",
    "differentiate",
    "diffusion_quadratic",
    "empirical_supermartingale",
    "estimate_exceedance",
    "estimate_settling",
    "evaluate",
    "generator",
    "max_feasible_c",
    "parse",
    "recip_integral",
    "settling_bound",
    "simulate",
    "to_canonical",
    "to_text",
    "validate_model",
]

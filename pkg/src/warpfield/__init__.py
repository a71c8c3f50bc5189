"""Warped-convolution deformations with translations and special conformal generators.

Exact symbolic engine (polynomials, differential operators, conformal algebra,
twist-series deformed products), exact wedge geometry, and a truncated Fock
space for the deformed free field.
"""
from .exactnum import GaussianRational, Rational, parse_rational
from .polyalg import Poly, canonical_string, parse_poly
from .diffop import DiffOp
from .conformal import Metric, build_vector_fields, calibrate_signs, build_so2d
from .warped import TwistSeriesConfig, deformed_commutator, twist_product

__version__ = "0.1.0"

__all__ = [
    "GaussianRational", "Rational", "parse_rational", "Poly", "canonical_string", "parse_poly",
    "DiffOp", "Metric", "build_vector_fields", "calibrate_signs", "build_so2d",
    "TwistSeriesConfig", "deformed_commutator", "twist_product",
]

"""Exact distance, dot-product and sum-product set computations over F_q^d."""
from .ffield import FieldElement, FieldSpec, add_char, field_of_order, make_field, sqrt_minus_one, trace
from .kernels import BACKEND
from .spectra import (
    Spectrum,
    aa_plus_aa,
    aa_plus_za,
    distance_set,
    distance_spectrum,
    dot_spectrum,
    pair_difference_counts,
    pinned_distance_set,
    support,
)
from .vecspace import PinSpec, Point, PointSet, generate, norm, pin_slice, valid_pins

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FieldElement",
    "FieldSpec",
    "PinSpec",
    "Point",
    "PointSet",
    "Spectrum",
    "aa_plus_aa",
    "aa_plus_za",
    "add_char",
    "distance_set",
    "distance_spectrum",
    "dot_spectrum",
    "field_of_order",
    "generate",
    "make_field",
    "norm",
    "pair_difference_counts",
    "pin_slice",
    "pinned_distance_set",
    "sqrt_minus_one",
    "support",
    "trace",
    "valid_pins",
]

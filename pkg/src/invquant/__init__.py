"""Phase-space quantization that survives point transformations.

Star products built from commuting vector fields, the morphisms that
intertwine them, and the operator orderings they induce on configuration
space.  Equality of symbolic results is decided by seeded numerical sampling.
"""

from .core import HBAR, MomentumPoly, PhaseFunction, SampleDomain, equals_numeric, residual
from .errors import InvQuantError
from .geometry import (
    ChristoffelField,
    MetricField,
    PointTransformation,
    Tensor,
    christoffel_from_metric,
    curvature,
)
from .morphisms import Morphism, build_S_curved, build_S_P, build_S_sigma, build_S_T, verify_intertwining
from .quantize import ConfigOperator, momentum_operators, s_order, weyl_order
from .star import StarProduct, moyal, sigma_product, star_from_vectorfields, transformed_moyal

__all__ = [
    "HBAR", "MomentumPoly", "PhaseFunction", "SampleDomain", "equals_numeric", "residual", "InvQuantError",
    "ChristoffelField", "MetricField", "PointTransformation", "Tensor", "christoffel_from_metric", "curvature",
    "Morphism", "build_S_curved", "build_S_P", "build_S_sigma", "build_S_T", "verify_intertwining",
    "ConfigOperator", "momentum_operators", "s_order", "weyl_order",
    "StarProduct", "moyal", "sigma_product", "star_from_vectorfields", "transformed_moyal",
]

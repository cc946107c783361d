"""rhls: a numerical lab for the reversed Hardy-Littlewood-Sobolev inequality."""

from .checks import REGISTRY, CheckRegistry, check
from .config import Settings, get_settings, ordered_map
from .core import (
    ExponentSet,
    RadialFn,
    SampledFn1D,
    ZonalFn,
    make_critical_exponents,
    make_general_exponents,
    read_csv,
    write_csv,
)
from .extremal import (
    ConvergenceError,
    ELPair,
    ExtremalParamsRn,
    ExtremalParamsSphere,
    asymptotic_coeffs,
    concentration_demo,
    derive_el_constants,
    el_residual,
    extremal_rn,
    extremal_sphere,
    fixed_point_minimize,
    moving_sphere_check,
)
from .geometry import KelvinParams, dilate, drop_function, kelvin_transform, lift_function
from .inequalities import QuotientResult, bilinear_form, hls_quotient, weak_type_constant
from .norms import lp_quasi_norm, quasi_norm
from .operators import mc_operator, radial_operator, sphere_operator, split_operator
from .reports import VerificationReport
from .special import SharpConstant, kernel_integral, sharp_constant

__all__ = [
    "CheckRegistry",
    "ConvergenceError",
    "ELPair",
    "ExponentSet",
    "ExtremalParamsRn",
    "ExtremalParamsSphere",
    "KelvinParams",
    "QuotientResult",
    "REGISTRY",
    "RadialFn",
    "SampledFn1D",
    "Settings",
    "SharpConstant",
    "VerificationReport",
    "ZonalFn",
    "asymptotic_coeffs",
    "bilinear_form",
    "check",
    "concentration_demo",
    "derive_el_constants",
    "dilate",
    "drop_function",
    "el_residual",
    "extremal_rn",
    "extremal_sphere",
    "fixed_point_minimize",
    "get_settings",
    "hls_quotient",
    "kelvin_transform",
    "kernel_integral",
    "lift_function",
    "lp_quasi_norm",
    "make_critical_exponents",
    "make_general_exponents",
    "mc_operator",
    "moving_sphere_check",
    "ordered_map",
    "quasi_norm",
    "radial_operator",
    "read_csv",
    "sharp_constant",
    "sphere_operator",
    "split_operator",
    "weak_type_constant",
    "write_csv",
]

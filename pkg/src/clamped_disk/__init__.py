"""Certified zeros of Bessel cross products and exact checks of their recursion."""

__version__ = "0.1.0"

from .bessel_eval import (  # noqa: E402
    ErrFloat,
    EvalConfig,
    PrecisionExhausted,
    bessel_derivs,
    bessel_I,
    bessel_J,
    cross_W,
    cross_W_deriv,
    ode_residual,
    recursion_residual,
)
from .exact_algebra import PolyQ, RatFunQ, SeriesQ, det4  # noqa: E402
from .four_form import TupleParams, claim_scan, coords_F, leading_certificate  # noqa: E402
from .spectrum import (  # noqa: E402
    collision_scan,
    eigenvalues_vp,
    find_zeros,
    find_zeros_vm,
    radial_profile,
)

__all__ = [
    "ErrFloat",
    "EvalConfig",
    "PolyQ",
    "PrecisionExhausted",
    "RatFunQ",
    "SeriesQ",
    "TupleParams",
    "bessel_I",
    "bessel_J",
    "bessel_derivs",
    "claim_scan",
    "collision_scan",
    "coords_F",
    "cross_W",
    "cross_W_deriv",
    "det4",
    "eigenvalues_vp",
    "find_zeros",
    "find_zeros_vm",
    "leading_certificate",
    "ode_residual",
    "radial_profile",
    "recursion_residual",
]

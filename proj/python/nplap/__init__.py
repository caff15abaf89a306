"""Python front end to the nplap finite-difference library.

Structured reports cross the extension boundary as JSON text and are decoded here.
"""

import json as _json

from . import _nplap
from ._nplap import (  # noqa: F401
    ConfigError,
    Error,
    Grid,
    InvalidArgument,
    IoError,
    NumericalError,
    ScalarField,
    build_grid,
    comparison_check,
    dyadic_radii,
    gradient,
    henon_constants,
    locate_extremum,
    normalized_p_laplacian,
    pucci,
    read_solution,
    sample,
    write_solution,
)


def solve(config_text, threads=0):
    """Solve the experiment described by config text; returns (field, report dict)."""
    out = _nplap.solve_config(config_text, threads)
    return out["field"], _json.loads(out["report"])


def reference_exponents(p, theta):
    return _json.loads(_nplap.reference_exponents(p, theta))


def verify_profiles(selector="all", h_coarse=1.0 / 64):
    return _json.loads(_nplap.verify_profiles(selector, h_coarse))


def growth_exponent(u, x0, radii):
    return _json.loads(_nplap.growth_exponent(u, list(x0), list(radii)))

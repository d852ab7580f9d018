"""Marginally trapped codimension-two submanifolds of Robertson-Walker
warped products Q^{n+1}_c x_w I: construction from hypersurface data by
pointwise root finding, and independent numerical verification."""

from .config import SceneConfig, load_config, parse_config, serialize_config
from .desitter import crosscheck_null2ff, embed, inverse_embed
from .expr import parse as parse_expression
from .families import builtin_hypersurface, umbilic_family_for
from .hypersurface import (HypersurfaceChart, PointJet, equidistant, jet,
                           legendrian_rank_check, load_chart_csv)
from .immersion import (MTImmersion, Tolerances, VerificationReport,
                        verify_null_curve, warped_connection)
from .mtsolve import (HeightField, MTEquation, RootBracket, SliceRecipe,
                      UmbilicRecipe, brackets, build_null_curve,
                      corollary_count, curve_kappa, equation_at, mt_residual,
                      null_2ff_mode, slice_check, solve_field, solve_point)
from .spaceforms import SpaceForm, co, ct, ct_inverse, si, spaceform
from .warp import Interval, WarpProfile, parse_warp

__version__ = "0.1.0"

__all__ = [
    "SceneConfig", "load_config", "parse_config", "serialize_config",
    "crosscheck_null2ff", "embed", "inverse_embed", "parse_expression",
    "builtin_hypersurface", "umbilic_family_for", "HypersurfaceChart",
    "PointJet", "equidistant", "jet", "legendrian_rank_check",
    "load_chart_csv", "MTImmersion", "Tolerances", "VerificationReport",
    "verify_null_curve", "warped_connection", "HeightField", "MTEquation",
    "RootBracket", "SliceRecipe", "UmbilicRecipe", "brackets",
    "build_null_curve", "corollary_count", "curve_kappa", "equation_at",
    "mt_residual", "null_2ff_mode", "slice_check", "solve_field",
    "solve_point", "SpaceForm", "co", "ct", "ct_inverse", "si", "spaceform",
    "Interval", "WarpProfile", "parse_warp",
]

"""Spin-tensor interaction model and rovibrational levels of Er2 and Tm2."""

__version__ = "0.1.0"

from .constants import load_constants  # noqa: E402
from .dispersion import DispersionSet, vdw_coefficients  # noqa: E402
from .lines import bundled_linelist, parse_linelist  # noqa: E402

__all__ = ["__version__", "load_constants", "DispersionSet", "vdw_coefficients",
           "bundled_linelist", "parse_linelist"]

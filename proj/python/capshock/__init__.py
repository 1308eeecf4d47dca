"""Shock profiles and Evans-function stability for a capillarity gas."""

from . import formats
from ._core import (
    FORMAT_VERSION,
    DomainError,
    Error,
    GasParams,
    NumericError,
    Profile,
    ValidationReport,
    emit_figure_data,
    evans,
    run_point,
    solve_profile,
    validate,
    winding,
)

if FORMAT_VERSION != formats.FORMAT_VERSION:
    raise ImportError("capshock extension and format readers disagree on the file version")

__all__ = [
    "FORMAT_VERSION", "DomainError", "Error", "GasParams", "NumericError", "Profile",
    "ValidationReport", "emit_figure_data", "evans", "formats", "run_point", "solve_profile",
    "validate", "winding",
]

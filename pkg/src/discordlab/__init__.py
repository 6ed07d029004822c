"""Quantum discord and geometric discord of Bell-diagonal two-qubit states."""

__version__ = "0.1.0"

from .measures import (
    CorrelationReport,
    MeasurementAxis,
    classical_correlation_numeric,
    closed_form_report,
    discord_bd_closed,
    discord_numeric,
    geo_discord_bd_closed,
    geo_discord_numeric,
    mutual_information,
    numeric_report,
)
from .ordering import (
    FAMILIES,
    OrderingVerdict,
    ScanReport,
    Status,
    classify_families,
    curve_data,
    family_point,
    find_violation,
    ordering_consistent,
    scan_family,
)
from .qstate import BellDiagonal, eigenprobs, is_physical, partial_trace, to_density, von_neumann_entropy

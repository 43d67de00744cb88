"""Intervention-aware SIR fitting, calibration, and forecasting."""

from ._backend import BACKEND
from .config import RunConfig, load_config
from .data import (
    CaseRecord,
    EpiSeries,
    ParsedCases,
    RegionRecord,
    derive_epi_series,
    load_demographics,
    parse_case_csv,
    serialize_case_csv,
    serialize_demographics,
)
from .errors import DataValidationError, EpifitError, NumericsError
from .estimation import (
    BetaEstimate,
    BetaSample,
    CalibrationResult,
    RegressionFit,
    beta_samples,
    calibrate_rho,
    cross_validated_beta,
    fit_linear,
)
from .forecast import (
    ForecastResult,
    SweepPoint,
    ValidationReport,
    confidence_interval,
    forecast_region,
    intervention_sweep,
    validate,
)
from .model import (
    CompartmentState,
    ModelParams,
    Trajectory,
    basic_reproduction_number,
    derivatives_classical,
    derivatives_intervention,
    die_out_day,
    effective_reproduction_number,
    integrate,
    peak_infected,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BetaEstimate",
    "BetaSample",
    "CalibrationResult",
    "CaseRecord",
    "CompartmentState",
    "DataValidationError",
    "EpiSeries",
    "EpifitError",
    "ForecastResult",
    "ModelParams",
    "NumericsError",
    "ParsedCases",
    "RegionRecord",
    "RegressionFit",
    "RunConfig",
    "SweepPoint",
    "Trajectory",
    "ValidationReport",
    "basic_reproduction_number",
    "beta_samples",
    "calibrate_rho",
    "confidence_interval",
    "cross_validated_beta",
    "derivatives_classical",
    "derivatives_intervention",
    "derive_epi_series",
    "die_out_day",
    "effective_reproduction_number",
    "fit_linear",
    "forecast_region",
    "integrate",
    "intervention_sweep",
    "load_config",
    "load_demographics",
    "parse_case_csv",
    "peak_infected",
    "serialize_case_csv",
    "serialize_demographics",
    "validate",
]

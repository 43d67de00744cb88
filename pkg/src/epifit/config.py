"""Run configuration shared by every CLI subcommand.

A run is described by a flat TOML file whose keys mirror RunConfig's fields;
command-line flags override file values, and file values override defaults.
Relative paths inside a config file resolve against the file's own directory
so a config can travel with its data.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import math
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # 3.10: stdlib parser arrived in 3.11
    import tomli as tomllib

OUTPUT_FORMATS = ("json", "csv", "both")

DEFAULT_GAMMA = 1.0 / 14.0
DEFAULT_FOLDS = 10
DEFAULT_RHO_GRID_STEP = 0.001
DEFAULT_STEP_DAYS = 0.1


@dataclasses.dataclass(frozen=True)
class RunConfig:
    case_csv_path: Path | None = None
    demographics_csv_path: Path | None = None
    region: str | None = None
    window_start: dt.date | None = None
    window_end: dt.date | None = None
    forecast_end: dt.date | None = None
    gamma: float = DEFAULT_GAMMA
    folds: int = DEFAULT_FOLDS
    rho_grid_step: float = DEFAULT_RHO_GRID_STEP
    integrator_step_days: float = DEFAULT_STEP_DAYS
    output_dir: Path | None = None
    output_format: str = "both"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma!r}")
        if not isinstance(self.folds, int) or self.folds < 2:
            raise ValueError(f"folds must be an integer >= 2, got {self.folds!r}")
        if not (0.0 < self.rho_grid_step <= 1.0):
            raise ValueError(
                f"rho_grid_step must lie in (0, 1], got {self.rho_grid_step!r}"
            )
        if not (0.0 < self.integrator_step_days <= 1.0):
            raise ValueError(
                "integrator_step_days must lie in (0, 1], got "
                f"{self.integrator_step_days!r}"
            )
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(
                f"output_format must be one of {'/'.join(OUTPUT_FORMATS)}, "
                f"got {self.output_format!r}"
            )
        if (
            self.window_start is not None
            and self.window_end is not None
            and self.window_end < self.window_start
        ):
            raise ValueError(
                f"window end {self.window_end} precedes start {self.window_start}"
            )

    def replace(self, **changes) -> "RunConfig":
        provided = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **provided)


def _as_date(value, key: str) -> dt.date:
    if isinstance(value, dt.datetime):
        raise ValueError(f"{key} must be a calendar date, not a datetime: {value!r}")
    if isinstance(value, dt.date):
        return value
    if isinstance(value, str):
        try:
            return dt.date.fromisoformat(value)
        except ValueError as exc:
            raise ValueError(f"{key}: {exc}") from exc
    raise ValueError(f"{key} must be an ISO date, got {value!r}")


def _as_float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key} must be a number, got {value!r}")
    return float(value)


def load_config(path: Path | str) -> RunConfig:
    """Parse a TOML config file; every key is optional, unknown keys fail."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"config file {path} is not valid TOML: {exc}") from exc

    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(
            f"config file {path} has unknown keys: {', '.join(unknown)}"
        )

    base = path.parent
    kwargs = {}
    for key in ("case_csv_path", "demographics_csv_path", "output_dir"):
        if key in raw:
            if not isinstance(raw[key], str):
                raise ValueError(f"{key} must be a path string, got {raw[key]!r}")
            kwargs[key] = base / raw[key]
    if "region" in raw:
        if not isinstance(raw["region"], str) or not raw["region"].strip():
            raise ValueError(f"region must be a non-empty string, got {raw['region']!r}")
        kwargs["region"] = raw["region"]
    for key in ("window_start", "window_end", "forecast_end"):
        if key in raw:
            kwargs[key] = _as_date(raw[key], key)
    for key in ("gamma", "rho_grid_step", "integrator_step_days"):
        if key in raw:
            kwargs[key] = _as_float(raw[key], key)
    if "folds" in raw:
        if isinstance(raw["folds"], bool) or not isinstance(raw["folds"], int):
            raise ValueError(f"folds must be an integer, got {raw['folds']!r}")
        kwargs["folds"] = raw["folds"]
    if "output_format" in raw:
        kwargs["output_format"] = raw["output_format"]
    return RunConfig(**kwargs)

"""Command-line front end.

Subcommands chain the library layers into reproducible runs: identical
inputs and settings must produce byte-identical output files, so nothing
written here may depend on time, process id, or dict order. Human-readable
stdout uses 6 significant digits; files carry full precision.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import os
import re
import sys
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__
from ._backend import BACKEND
from .config import OUTPUT_FORMATS, RunConfig, load_config
from .data import EpiSeries, RegionRecord, derive_epi_series, load_demographics, parse_case_csv
from .errors import DataValidationError, NumericsError
from .estimation import (
    BetaEstimate,
    CalibrationResult,
    beta_samples,
    calibrate_rho,
    cross_validated_beta,
)
from .forecast import ForecastResult, ValidationReport, forecast_region, intervention_sweep, validate
from .model import CompartmentState, ModelParams


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def _full(x) -> str:
    # full-precision shortest round-trip text; plain float repr, never numpy's
    return repr(float(x))


def _slug(region: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", region.lower()).strip("_")


def _write_atomic(path: Path, text: str) -> None:
    # tmp-then-replace so a crash never leaves a partial artifact behind
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _output_dir(cfg: RunConfig) -> Path:
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
    else:
        out = Path(os.environ.get("EPIFIT_OUTPUT_DIR") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_data_file(path: Path | None, what: str) -> str:
    if path is None:
        raise ValueError(f"no {what} given: set it in the config file or pass the flag")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataValidationError(f"cannot read {what} {path}: {exc}") from exc


def _require(cfg: RunConfig, *fields: str) -> None:
    missing = [f for f in fields if getattr(cfg, f) is None]
    if missing:
        raise ValueError(
            "missing required settings: " + ", ".join(missing)
            + " (set them in the config file or pass the flags)"
        )


def _load_series(cfg: RunConfig) -> tuple[EpiSeries, RegionRecord]:
    _require(cfg, "case_csv_path", "demographics_csv_path", "region",
             "window_start", "window_end")
    parsed = parse_case_csv(_read_data_file(cfg.case_csv_path, "case CSV"))
    for note in parsed.warnings:
        print(f"warning: {note}", file=sys.stderr)
    table = load_demographics(
        _read_data_file(cfg.demographics_csv_path, "demographics CSV")
    )
    if cfg.region not in table:
        raise DataValidationError(
            f"region {cfg.region!r} is not in the demographics table"
        )
    series = derive_epi_series(parsed.records, cfg.region,
                               cfg.window_start, cfg.window_end)
    return series, table[cfg.region]


def _estimate(cfg: RunConfig, series: EpiSeries,
              region: RegionRecord) -> BetaEstimate:
    population = float(region.population)
    susceptible0 = population - series.active[0] - series.removed[0]
    if susceptible0 <= 0:
        raise DataValidationError(
            f"{series.region}: population {region.population} cannot "
            f"accommodate the observed state on {series.dates[0]}"
        )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        samples = beta_samples(series, cfg.gamma, population, susceptible0)
    for warn in caught:
        print(f"warning: {warn.message}", file=sys.stderr)
    return cross_validated_beta(samples, folds=cfg.folds)


def _calibrate(cfg: RunConfig, series: EpiSeries, region: RegionRecord,
               beta: float) -> CalibrationResult:
    params = ModelParams(beta=beta, gamma=cfg.gamma,
                         population=float(region.population))
    return calibrate_rho(series, params, grid_step=cfg.rho_grid_step,
                         step_days=cfg.integrator_step_days)


def _resolve_params(cfg: RunConfig, series: EpiSeries, region: RegionRecord,
                    beta: float | None, rho: float | None) -> ModelParams:
    """Fill beta/rho from flags when given, otherwise from the data."""
    if beta is None:
        beta = _estimate(cfg, series, region).beta_hat
    if rho is None:
        rho = _calibrate(cfg, series, region, beta).rho
    return ModelParams(beta=beta, gamma=cfg.gamma,
                       population=float(region.population), rho=rho)


def _params_payload(params: ModelParams) -> dict:
    return {
        "beta": params.beta,
        "gamma": params.gamma,
        "rho": params.rho,
        "population": params.population,
    }


def _validation_csv(report: ValidationReport) -> str:
    lines = ["date,observed_active,predicted_active,observed_removed,predicted_removed"]
    for k, day in enumerate(report.dates):
        lines.append(
            f"{day.isoformat()},{int(report.observed_active[k])},"
            f"{_full(report.predicted_active[k])},{int(report.observed_removed[k])},"
            f"{_full(report.predicted_removed[k])}"
        )
    return "\n".join(lines) + "\n"


def _validation_payload(report: ValidationReport, params: ModelParams) -> dict:
    return {
        "region": report.region,
        "params": _params_payload(params),
        "window_start": report.dates[0].isoformat(),
        "window_end": report.dates[-1].isoformat(),
        "mae_active": report.mae_active,
        "rmse_active": report.rmse_active,
        "mae_removed": report.mae_removed,
        "rmse_removed": report.rmse_removed,
        "days": [
            {
                "date": day.isoformat(),
                "observed_active": int(report.observed_active[k]),
                "predicted_active": float(report.predicted_active[k]),
                "observed_removed": int(report.observed_removed[k]),
                "predicted_removed": float(report.predicted_removed[k]),
            }
            for k, day in enumerate(report.dates)
        ],
    }


def _forecast_csv(result: ForecastResult) -> str:
    lines = ["date,susceptible,active,recovered"]
    for k, day in enumerate(result.dates):
        lines.append(
            f"{day.isoformat()},{_full(result.susceptible[k])},"
            f"{_full(result.active[k])},{_full(result.recovered[k])}"
        )
    return "\n".join(lines) + "\n"


def _forecast_payload(result: ForecastResult) -> dict:
    return {
        "region": result.region,
        "params": _params_payload(result.params),
        "start_date": result.dates[0].isoformat(),
        "end_date": result.dates[-1].isoformat(),
        "endpoint_active": result.endpoint_active,
        "endpoint_recovered": result.endpoint_recovered,
        "active_ci95": list(result.active_ci95),
        "active_ci99": list(result.active_ci99),
        "recovered_ci95": list(result.recovered_ci95),
        "recovered_ci99": list(result.recovered_ci99),
        "days": [
            {
                "date": day.isoformat(),
                "susceptible": float(result.susceptible[k]),
                "active": float(result.active[k]),
                "recovered": float(result.recovered[k]),
            }
            for k, day in enumerate(result.dates)
        ],
    }


def _emit(cfg: RunConfig, stem: str, json_payload, csv_text: str) -> list[Path]:
    out = _output_dir(cfg)
    written = []
    if cfg.output_format in ("json", "both"):
        path = out / f"{stem}.json"
        _write_atomic(path, _json_text(json_payload))
        written.append(path)
    if cfg.output_format in ("csv", "both"):
        path = out / f"{stem}.csv"
        _write_atomic(path, csv_text)
        written.append(path)
    for path in written:
        print(f"wrote {path}")
    return written


# ---------------------------------------------------------------- handlers


def _cmd_estimate_beta(cfg: RunConfig, args) -> int:
    series, region = _load_series(cfg)
    est = _estimate(cfg, series, region)
    print(f"region {series.region}")
    print(f"window {series.dates[0].isoformat()}..{series.dates[-1].isoformat()}")
    print(f"samples {est.fit.n_samples}")
    print(f"beta_hat {_fmt(est.beta_hat)}")
    print(f"alpha0 {_fmt(est.fit.alpha0)}")
    print(f"alpha1 {_fmt(est.fit.alpha1)}")
    print(f"residual_variance {_fmt(est.fit.residual_variance)}")
    print(f"cv_error {_fmt(est.cv_error)}")
    return 0


def _cmd_calibrate(cfg: RunConfig, args) -> int:
    series, region = _load_series(cfg)
    beta = args.beta if args.beta is not None else _estimate(cfg, series, region).beta_hat
    result = _calibrate(cfg, series, region, beta)
    print(f"region {series.region}")
    print(f"beta {_fmt(beta)}")
    print(f"rho {_fmt(result.rho)}")
    print(f"objective {_fmt(result.objective)}")
    print(f"grid_step {_fmt(result.grid_step)}")
    return 0


def _cmd_validate(cfg: RunConfig, args) -> int:
    series, region = _load_series(cfg)
    params = _resolve_params(cfg, series, region, args.beta, args.rho)
    report = validate(series, region, params,
                      step_days=cfg.integrator_step_days)
    print(f"region {series.region}")
    print(f"beta {_fmt(params.beta)} rho {_fmt(params.rho)}")
    print(f"mae_active {_fmt(report.mae_active)} rmse_active {_fmt(report.rmse_active)}")
    print(f"mae_removed {_fmt(report.mae_removed)} rmse_removed {_fmt(report.rmse_removed)}")
    _emit(cfg, f"validation_{_slug(series.region)}",
          _validation_payload(report, params), _validation_csv(report))
    return 0


def _cmd_forecast(cfg: RunConfig, args) -> int:
    series, region = _load_series(cfg)
    _require(cfg, "forecast_end")
    params = _resolve_params(cfg, series, region, args.beta, args.rho)
    result = forecast_region(series, region, params, cfg.forecast_end,
                             step_days=cfg.integrator_step_days)
    print(f"region {series.region}")
    print(f"beta {_fmt(params.beta)} rho {_fmt(params.rho)}")
    print(f"horizon {result.dates[0].isoformat()}..{result.dates[-1].isoformat()}")
    print(f"endpoint_active {_fmt(result.endpoint_active)}")
    print(f"endpoint_recovered {_fmt(result.endpoint_recovered)}")
    print(f"active_ci95 [{_fmt(result.active_ci95[0])}, {_fmt(result.active_ci95[1])}]")
    print(f"active_ci99 [{_fmt(result.active_ci99[0])}, {_fmt(result.active_ci99[1])}]")
    _emit(cfg, f"forecast_{_slug(series.region)}",
          _forecast_payload(result), _forecast_csv(result))
    return 0


def _cmd_sweep(cfg: RunConfig, args) -> int:
    params = ModelParams(beta=args.beta, gamma=cfg.gamma, population=args.n)
    initial = CompartmentState(t=0.0, susceptible=args.n - args.i0,
                               infected=args.i0, removed=0.0)
    points = intervention_sweep(params, initial, args.horizon, args.rhos,
                                step_days=cfg.integrator_step_days)
    print("rho peak_infected peak_day die_out_day")
    for p in points:
        die_out = "-" if p.die_out_day is None else str(p.die_out_day)
        print(f"{_fmt(p.rho)} {_fmt(p.peak_infected)} {p.peak_day} {die_out}")

    payload = {
        "population": args.n,
        "initial_infected": args.i0,
        "beta": args.beta,
        "gamma": cfg.gamma,
        "horizon_days": args.horizon,
        "points": [
            {
                "rho": p.rho,
                "peak_infected": p.peak_infected,
                "peak_day": p.peak_day,
                "die_out_day": p.die_out_day,
            }
            for p in points
        ],
    }
    lines = ["rho,peak_infected,peak_day,die_out_day"]
    for p in points:
        die_out = "" if p.die_out_day is None else str(p.die_out_day)
        lines.append(f"{_full(p.rho)},{_full(p.peak_infected)},{p.peak_day},{die_out}")
    _emit(cfg, "sweep", payload, "\n".join(lines) + "\n")
    return 0


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _stage(name: str, fn, *args, **kwargs):
    # keeps the failing stage visible in pipeline error messages
    try:
        return fn(*args, **kwargs)
    except (DataValidationError, NumericsError, ValueError) as exc:
        raise type(exc)(f"{name} stage: {exc}") from exc


def _cmd_pipeline(cfg: RunConfig, args) -> int:
    _require(cfg, "forecast_end")
    series, region = _stage("ingest", _load_series, cfg)

    est = _stage("estimate", _estimate, cfg, series, region)
    print(f"estimate: beta_hat {_fmt(est.beta_hat)} cv_error {_fmt(est.cv_error)}")
    calibration = _stage("calibrate", _calibrate, cfg, series, region, est.beta_hat)
    print(f"calibrate: rho {_fmt(calibration.rho)} objective {_fmt(calibration.objective)}")

    params = ModelParams(beta=est.beta_hat, gamma=cfg.gamma,
                         population=float(region.population), rho=calibration.rho)
    report = _stage("validate", validate, series, region, params,
                    step_days=cfg.integrator_step_days)
    print(f"validate: mae_active {_fmt(report.mae_active)} "
          f"rmse_active {_fmt(report.rmse_active)}")
    result = _stage("forecast", forecast_region, series, region, params,
                    cfg.forecast_end, step_days=cfg.integrator_step_days)
    print(f"forecast: endpoint_active {_fmt(result.endpoint_active)} "
          f"endpoint_recovered {_fmt(result.endpoint_recovered)}")

    slug = _slug(series.region)
    written = _emit(cfg, f"validation_{slug}",
                    _validation_payload(report, params), _validation_csv(report))
    written += _emit(cfg, f"forecast_{slug}",
                     _forecast_payload(result), _forecast_csv(result))

    manifest = {
        "tool": "epifit",
        "version": __version__,
        "backend": BACKEND,
        "inputs": {
            "case_csv_path": str(cfg.case_csv_path),
            "case_csv_sha256": _sha256(cfg.case_csv_path),
            "demographics_csv_path": str(cfg.demographics_csv_path),
            "demographics_csv_sha256": _sha256(cfg.demographics_csv_path),
        },
        "region": series.region,
        "population": region.population,
        "window_start": cfg.window_start.isoformat(),
        "window_end": cfg.window_end.isoformat(),
        "forecast_end": cfg.forecast_end.isoformat(),
        "gamma": cfg.gamma,
        "folds": cfg.folds,
        "rho_grid_step": cfg.rho_grid_step,
        "integrator_step_days": cfg.integrator_step_days,
        "output_format": cfg.output_format,
        "estimate": {
            "beta_hat": est.beta_hat,
            "alpha0": est.fit.alpha0,
            "alpha1": est.fit.alpha1,
            "residual_variance": est.fit.residual_variance,
            "n_samples": est.fit.n_samples,
            "cv_error": est.cv_error,
        },
        "calibration": {
            "rho": calibration.rho,
            "objective": calibration.objective,
            "grid_step": calibration.grid_step,
        },
        "validation": {
            "mae_active": report.mae_active,
            "rmse_active": report.rmse_active,
            "mae_removed": report.mae_removed,
            "rmse_removed": report.rmse_removed,
        },
        "forecast": {
            "start_date": result.dates[0].isoformat(),
            "end_date": result.dates[-1].isoformat(),
            "endpoint_active": result.endpoint_active,
            "endpoint_recovered": result.endpoint_recovered,
            "active_ci95": list(result.active_ci95),
            "active_ci99": list(result.active_ci99),
            "recovered_ci95": list(result.recovered_ci95),
            "recovered_ci99": list(result.recovered_ci99),
        },
        "artifacts": sorted(p.name for p in written),
    }
    manifest_path = _output_dir(cfg) / f"manifest_{slug}.json"
    _write_atomic(manifest_path, _json_text(manifest))
    print(f"wrote {manifest_path}")
    return 0


# ---------------------------------------------------------------- parsing


def _window_arg(text: str) -> tuple[dt.date, dt.date]:
    try:
        start_text, _, end_text = text.partition(":")
        if not _:
            raise ValueError("expected START:END")
        return dt.date.fromisoformat(start_text), dt.date.fromisoformat(end_text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"window must look like 2020-06-05:2020-07-25 ({exc})"
        ) from exc


def _date_arg(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _rhos_arg(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"rhos must be comma-separated numbers ({exc})"
        ) from exc
    if not values:
        raise argparse.ArgumentTypeError("rhos must not be empty")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epifit",
        description="Epidemic trajectory fitting and forecasting.",
    )
    parser.add_argument("--version", action="version",
                        version=f"epifit {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, metavar="TOML",
                        help="run configuration file")
    common.add_argument("--output-dir", type=Path, metavar="DIR")
    common.add_argument("--output-format", choices=OUTPUT_FORMATS)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--cases", type=Path, metavar="CSV",
                      help="daily cumulative case counts")
    data.add_argument("--demographics", type=Path, metavar="CSV")
    data.add_argument("--region", metavar="NAME")
    data.add_argument("--window", type=_window_arg, metavar="START:END",
                      help="estimation window, e.g. 2020-06-05:2020-07-25")
    data.add_argument("--gamma", type=float, help="daily recovery rate")
    data.add_argument("--step", type=float, metavar="DAYS",
                      help="integrator step size in days")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-beta", parents=[common, data],
                       help="fit the transmission rate from case data")
    p.add_argument("--folds", type=int, help="cross-validation folds")
    p.set_defaults(handler=_cmd_estimate_beta)

    p = sub.add_parser("calibrate", parents=[common, data],
                       help="grid-search the intervention level")
    p.add_argument("--folds", type=int)
    p.add_argument("--beta", type=float,
                   help="transmission rate; estimated from the data if omitted")
    p.add_argument("--rho-grid-step", type=float, metavar="STEP")
    p.set_defaults(handler=_cmd_calibrate)

    for name, handler, needs_end in (
        ("validate", _cmd_validate, False),
        ("forecast", _cmd_forecast, True),
    ):
        p = sub.add_parser(name, parents=[common, data])
        p.add_argument("--folds", type=int)
        p.add_argument("--beta", type=float)
        p.add_argument("--rho", type=float)
        p.add_argument("--rho-grid-step", type=float, metavar="STEP")
        if needs_end:
            p.add_argument("--forecast-end", type=_date_arg, metavar="DATE")
        p.set_defaults(handler=handler)

    p = sub.add_parser("sweep", parents=[common],
                       help="compare intervention levels on one scenario")
    p.add_argument("--n", type=float, required=True, help="population size")
    p.add_argument("--i0", type=float, required=True, help="initially infected")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float)
    p.add_argument("--rhos", type=_rhos_arg, required=True,
                   metavar="R1,R2,...")
    p.add_argument("--horizon", type=int, default=365, metavar="DAYS")
    p.add_argument("--step", type=float, metavar="DAYS")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("pipeline", parents=[common, data],
                       help="estimate, calibrate, validate, and forecast one region")
    p.add_argument("--folds", type=int)
    p.add_argument("--forecast-end", type=_date_arg, metavar="DATE")
    p.set_defaults(handler=_cmd_pipeline)

    return parser


def _merge_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        cfg = load_config(args.config)
    window = getattr(args, "window", None)
    cfg = cfg.replace(
        case_csv_path=getattr(args, "cases", None),
        demographics_csv_path=getattr(args, "demographics", None),
        region=getattr(args, "region", None),
        window_start=window[0] if window else None,
        window_end=window[1] if window else None,
        forecast_end=getattr(args, "forecast_end", None),
        gamma=getattr(args, "gamma", None),
        folds=getattr(args, "folds", None),
        rho_grid_step=getattr(args, "rho_grid_step", None),
        integrator_step_days=getattr(args, "step", None),
        output_dir=args.output_dir,
        output_format=args.output_format,
    )
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reserves 2 for usage problems; here 2 means bad data
        return 0 if exc.code in (0, None) else 1

    try:
        cfg = _merge_config(args)
        return args.handler(cfg, args)
    except DataValidationError as exc:
        print(f"epifit {args.command}: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"epifit {args.command}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"epifit {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

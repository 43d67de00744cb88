"""Ingestion of daily case CSVs and region demographics.

Case files carry cumulative counts per region and day with the exact header
``date,region,confirmed,recovered,deceased``. Dates are ISO-8601, counts are
plain non-negative integers (no digit grouping). Parsing is strict about
per-row consistency (confirmed >= recovered + deceased) but reports
cumulative-count decreases as warnings rather than errors, since such dips
exist in real reporting and must not be silently repaired.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

from .errors import DataValidationError

CASE_HEADER = ("date", "region", "confirmed", "recovered", "deceased")
DEMOGRAPHICS_HEADER = ("region", "population", "rural_pct", "density")


@dataclass(frozen=True)
class CaseRecord:
    """Cumulative counts reported for one region on one day."""

    date: dt.date
    region: str
    confirmed: int
    recovered: int
    deceased: int

    def __post_init__(self) -> None:
        for name in ("confirmed", "recovered", "deceased"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.confirmed < self.recovered + self.deceased:
            raise ValueError(
                f"{self.region} {self.date}: confirmed ({self.confirmed}) is "
                f"less than recovered + deceased "
                f"({self.recovered + self.deceased})"
            )
        if not self.region:
            raise ValueError("region must be non-empty")


@dataclass(frozen=True)
class ParsedCases:
    """Records in file order plus any cumulative-count warnings."""

    records: tuple[CaseRecord, ...]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class EpiSeries:
    """Gap-free daily window for one region.

    active = confirmed - recovered - deceased, removed = recovered +
    deceased; both derived, never reported directly.
    """

    region: str
    dates: tuple[dt.date, ...]
    active: tuple[int, ...]
    removed: tuple[int, ...]
    confirmed: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class RegionRecord:
    """Census row: resident population, rural share (%), density (per km2)."""

    region: str
    population: int
    rural_pct: float
    density: float

    def __post_init__(self) -> None:
        if self.population <= 0:
            raise ValueError(f"{self.region}: population must be positive")
        if not (math.isfinite(self.rural_pct) and math.isfinite(self.density)):
            raise ValueError(f"{self.region}: non-finite demographics value")


def _as_text(source: bytes | str | IO) -> str:
    if isinstance(source, bytes):
        try:
            return source.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise DataValidationError(f"input is not valid UTF-8: {exc}") from None
    if isinstance(source, str):
        return source.removeprefix("﻿")
    data = source.read()
    return _as_text(data)


def _parse_count(text: str, column: str, row_num: int) -> int:
    # Strict: digits only, so "1,336,861", "10.5", " 5", and "-3" are all
    # rejected rather than coerced.
    if not (text.isascii() and text.isdigit()):
        raise DataValidationError(
            f"row {row_num}: {column} must be a plain non-negative integer "
            f"(no signs, spaces, or digit grouping), got {text!r}"
        )
    return int(text)


def _read_rows(text: str, expected_header: tuple[str, ...], kind: str):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataValidationError(f"{kind} file is empty") from None
    if tuple(header) != expected_header:
        raise DataValidationError(
            f"{kind} header must be exactly {','.join(expected_header)!r}, "
            f"got {','.join(header)!r}"
        )
    for row_num, row in enumerate(reader, start=2):
        if len(row) != len(expected_header):
            raise DataValidationError(
                f"row {row_num}: expected {len(expected_header)} fields, "
                f"got {len(row)}"
            )
        yield row_num, row


def parse_case_csv(source: bytes | str | IO) -> ParsedCases:
    """Parse a case CSV into records, validating each row.

    Row-level inconsistencies (bad dates, non-integer counts, confirmed <
    recovered + deceased) raise DataValidationError naming the offending
    row. Decreases in the cumulative columns across consecutive days of a
    region are collected as warning strings, one per violation.
    """
    records = []
    for row_num, row in _read_rows(_as_text(source), CASE_HEADER, "case"):
        date_text, region, *counts = row
        try:
            date = dt.date.fromisoformat(date_text)
        except ValueError:
            raise DataValidationError(
                f"row {row_num}: date must be ISO-8601 (YYYY-MM-DD), "
                f"got {date_text!r}"
            ) from None
        if not region:
            raise DataValidationError(f"row {row_num}: region must be non-empty")
        confirmed, recovered, deceased = (
            _parse_count(text, column, row_num)
            for text, column in zip(counts, CASE_HEADER[2:])
        )
        if confirmed < recovered + deceased:
            raise DataValidationError(
                f"row {row_num}: confirmed ({confirmed}) is less than "
                f"recovered + deceased ({recovered + deceased}) "
                f"for {region} on {date}"
            )
        records.append(
            CaseRecord(date=date, region=region, confirmed=confirmed,
                       recovered=recovered, deceased=deceased)
        )

    warnings = []
    by_region: dict[str, list[CaseRecord]] = {}
    for rec in records:
        by_region.setdefault(rec.region, []).append(rec)
    for region, recs in by_region.items():
        recs = sorted(recs, key=lambda r: r.date)
        for prev, cur in zip(recs, recs[1:]):
            for field in ("confirmed", "recovered", "deceased"):
                before, after = getattr(prev, field), getattr(cur, field)
                if after < before:
                    warnings.append(
                        f"{region}: cumulative {field} decreases from "
                        f"{before} ({prev.date}) to {after} ({cur.date})"
                    )
    return ParsedCases(records=tuple(records), warnings=tuple(warnings))


def serialize_case_csv(records: Iterable[CaseRecord]) -> str:
    """Inverse of parse_case_csv: identical header and field layout."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CASE_HEADER)
    for rec in records:
        writer.writerow(
            [rec.date.isoformat(), rec.region, rec.confirmed, rec.recovered,
             rec.deceased]
        )
    return out.getvalue()


def derive_epi_series(
    records: Iterable[CaseRecord],
    region: str,
    window_start: dt.date,
    window_end: dt.date,
) -> EpiSeries:
    """Build the gap-free daily window used by estimation and validation.

    Every day from window_start to window_end inclusive must be present for
    the region, exactly once. The removed series must be non-decreasing
    inside the window; violating dates are named in the error rather than
    patched over.
    """
    if window_end < window_start:
        raise DataValidationError(
            f"window end {window_end} precedes window start {window_start}"
        )
    by_date: dict[dt.date, CaseRecord] = {}
    seen_region = False
    for rec in records:
        if rec.region != region:
            continue
        seen_region = True
        if window_start <= rec.date <= window_end:
            if rec.date in by_date:
                raise DataValidationError(
                    f"duplicate rows for {region} on {rec.date}"
                )
            by_date[rec.date] = rec
    if not seen_region:
        raise DataValidationError(f"no rows for region {region!r}")

    n_days = (window_end - window_start).days + 1
    wanted = [window_start + dt.timedelta(days=k) for k in range(n_days)]
    missing = [day.isoformat() for day in wanted if day not in by_date]
    if missing:
        raise DataValidationError(
            f"{region}: window {window_start}..{window_end} has gap days: "
            + ", ".join(missing)
        )

    ordered = [by_date[day] for day in wanted]
    active = tuple(r.confirmed - r.recovered - r.deceased for r in ordered)
    removed = tuple(r.recovered + r.deceased for r in ordered)
    confirmed = tuple(r.confirmed for r in ordered)
    drops = [
        ordered[k + 1].date.isoformat()
        for k in range(len(ordered) - 1)
        if removed[k + 1] < removed[k]
    ]
    if drops:
        raise DataValidationError(
            f"{region}: removed (recovered + deceased) decreases on: "
            + ", ".join(drops)
        )
    return EpiSeries(region=region, dates=tuple(wanted), active=active,
                     removed=removed, confirmed=confirmed)


def load_demographics(source: bytes | str | IO) -> dict[str, RegionRecord]:
    """Load the demographics CSV into a region -> RegionRecord mapping."""
    table: dict[str, RegionRecord] = {}
    for row_num, row in _read_rows(
        _as_text(source), DEMOGRAPHICS_HEADER, "demographics"
    ):
        region, population_text, rural_text, density_text = row
        if not region:
            raise DataValidationError(f"row {row_num}: region must be non-empty")
        if region in table:
            raise DataValidationError(f"row {row_num}: duplicate region {region!r}")
        population = _parse_count(population_text, "population", row_num)
        if population <= 0:
            raise DataValidationError(
                f"row {row_num}: population must be positive, got {population}"
            )
        values = []
        for text, column in ((rural_text, "rural_pct"), (density_text, "density")):
            try:
                value = float(text)
            except ValueError:
                raise DataValidationError(
                    f"row {row_num}: {column} must be a number, got {text!r}"
                ) from None
            if not math.isfinite(value):
                raise DataValidationError(
                    f"row {row_num}: {column} must be finite, got {text!r}"
                )
            values.append(value)
        table[region] = RegionRecord(
            region=region, population=population, rural_pct=values[0],
            density=values[1]
        )
    return table


def serialize_demographics(table: Mapping[str, RegionRecord]) -> str:
    """Inverse of load_demographics (floats in shortest round-trip form)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DEMOGRAPHICS_HEADER)
    for record in table.values():
        writer.writerow(
            [record.region, record.population, repr(record.rural_pct),
             repr(record.density)]
        )
    return out.getvalue()

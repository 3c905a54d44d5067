"""Participant-file ingestion, flat config files, and result persistence.

The participant CSV schema is
``person_id,status_w1,status_w2,days_between,total_partners,partners_in_data,venue:<name>,...``
with one ``venue:``-prefixed column per venue, empty fields for missing
values, and survey scaling applied when the partner columns carry values.
All writers emit byte-identical output for identical inputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .baselines import FollowUpRecord
from .errors import InputError
from .estimator import recode_frequency, scale_survey_counts
from .harness import PREDICTOR_NAMES, CalibrationPoint, ReplicationResult, StudySummary
from .types import SampleData

FIXED_COLUMNS = (
    "person_id",
    "status_w1",
    "status_w2",
    "days_between",
    "total_partners",
    "partners_in_data",
)
VENUE_PREFIX = "venue:"

REPLICATION_COLUMNS = (
    "pi",
    "rep_index",
    "seed",
    "flagged",
    *(f"auc_{name}" for name in PREDICTOR_NAMES),
    "new_infections",
    "person_days_at_risk",
    "incidence_per_100py",
    "encounter_q1",
    "encounter_q2",
    "encounter_q3",
)

CONFIG_KEYS = {
    "data",
    "n_sample",
    "population_multiplier",
    "pi_values",
    "replications",
    "window_days",
    "followup_days",
    "base_window_days",
    "scenario",
    "group_size",
    "drop_count",
    "contamination_fraction",
    "two_cluster",
    "renamed_count",
    "conversion_prob",
    "master_seed",
    "n_jobs",
    "significance_method",
    "transmit_first_window",
}


@dataclass(frozen=True)
class ParticipantRecord:
    """One participant row: raw (unscaled) venue counts plus survey fields."""

    person_id: str
    venue_counts: dict
    status_w1: int
    status_w2: Optional[int] = None
    days_between: Optional[float] = None
    reported_total_partners: Optional[int] = None
    partners_in_data: Optional[int] = None


@dataclass(frozen=True)
class ParticipantData:
    """Loaded participant file: scaled sample matrix plus id maps and raw rows."""

    sample: SampleData
    person_ids: tuple
    venue_names: tuple
    records: tuple

    def followups(self) -> list[FollowUpRecord]:
        return [
            FollowUpRecord(r.person_id, r.status_w1, r.status_w2, r.days_between)
            for r in self.records
        ]


def _cell_error(line: int, column: str, message: str) -> InputError:
    return InputError(f"line {line}, column {column!r}: {message}")


def _parse_binary(raw: str, line: int, column: str, *, required: bool):
    raw = raw.strip()
    if raw == "":
        if required:
            raise _cell_error(line, column, "value required")
        return None
    if raw not in ("0", "1"):
        raise _cell_error(line, column, f"expected 0 or 1, got {raw!r}")
    return int(raw)


def _parse_optional_float(raw: str, line: int, column: str):
    raw = raw.strip()
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise _cell_error(line, column, f"expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise _cell_error(line, column, "value must be finite")
    return value


def load_participants(
    path, *, recode_window_days: Optional[float] = None
) -> ParticipantData:
    """Load a participant CSV.

    Venue columns are read in header (first-appearance) order. When
    ``recode_window_days`` is given, venue cells hold categorical
    frequency responses which are recoded to visit counts for that window.
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: file is empty (expected a header row)") from None
        if tuple(header[: len(FIXED_COLUMNS)]) != FIXED_COLUMNS:
            raise InputError(
                f"{path}: header must start with {','.join(FIXED_COLUMNS)}"
            )
        venue_names = []
        for col in header[len(FIXED_COLUMNS) :]:
            if not col.startswith(VENUE_PREFIX) or len(col) == len(VENUE_PREFIX):
                raise InputError(
                    f"{path}: venue columns must be named '{VENUE_PREFIX}<name>', got {col!r}"
                )
            venue_names.append(col[len(VENUE_PREFIX) :])
        if len(set(venue_names)) != len(venue_names):
            raise InputError(f"{path}: duplicate venue columns")

        m = len(venue_names)
        records = []
        z_rows = []
        seen_ids = set()
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise InputError(
                    f"line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            pid = row[0].strip()
            if not pid:
                raise _cell_error(line_no, "person_id", "value required")
            if pid in seen_ids:
                raise _cell_error(line_no, "person_id", f"duplicate id {pid!r}")
            seen_ids.add(pid)
            status_w1 = _parse_binary(row[1], line_no, "status_w1", required=True)
            status_w2 = _parse_binary(row[2], line_no, "status_w2", required=False)
            days_between = _parse_optional_float(row[3], line_no, "days_between")
            if status_w2 is not None and (days_between is None or days_between <= 0):
                raise _cell_error(
                    line_no, "days_between", "must be > 0 when status_w2 is present"
                )
            total_partners = _parse_optional_float(row[4], line_no, "total_partners")
            in_data = _parse_optional_float(row[5], line_no, "partners_in_data")
            if (total_partners is None) != (in_data is None):
                raise _cell_error(
                    line_no,
                    "partners_in_data",
                    "total_partners and partners_in_data must be given together",
                )
            for value, column in ((total_partners, "total_partners"), (in_data, "partners_in_data")):
                if value is not None and not float(value).is_integer():
                    raise _cell_error(line_no, column, "must be a whole number")

            counts = {}
            raw_row = np.zeros(m)
            for j, name in enumerate(venue_names):
                cell = row[len(FIXED_COLUMNS) + j].strip()
                column = VENUE_PREFIX + name
                if cell == "":
                    value = 0.0
                elif recode_window_days is not None:
                    try:
                        value = float(recode_frequency(cell, recode_window_days))
                    except InputError as exc:
                        raise _cell_error(line_no, column, str(exc)) from None
                else:
                    value = _parse_optional_float(cell, line_no, column)
                    if value is None or value < 0:
                        raise _cell_error(line_no, column, "count must be >= 0")
                raw_row[j] = value
                if value:
                    counts[name] = value

            if total_partners is not None:
                try:
                    scaled = scale_survey_counts(
                        {j: raw_row[j] for j in range(m)},
                        int(total_partners),
                        int(in_data),
                        m,
                    )
                except InputError as exc:
                    raise _cell_error(line_no, "total_partners", str(exc)) from None
            else:
                scaled = raw_row
            z_rows.append(scaled)
            records.append(
                ParticipantRecord(
                    person_id=pid,
                    venue_counts=counts,
                    status_w1=status_w1,
                    status_w2=status_w2,
                    days_between=days_between,
                    reported_total_partners=(
                        int(total_partners) if total_partners is not None else None
                    ),
                    partners_in_data=int(in_data) if in_data is not None else None,
                )
            )

    z = np.vstack(z_rows) if z_rows else np.zeros((0, m))
    statuses = np.array([r.status_w1 for r in records], dtype=np.int8)
    return ParticipantData(
        sample=SampleData(z, statuses),
        person_ids=tuple(r.person_id for r in records),
        venue_names=tuple(venue_names),
        records=tuple(records),
    )


def _fmt(value) -> str:
    """Serialize one CSV cell; floats use shortest exact round-trip form."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def write_participants(data: ParticipantData, path) -> Path:
    """Write participant rows back out in the loadable schema (raw counts)."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(FIXED_COLUMNS) + [VENUE_PREFIX + v for v in data.venue_names])
        for rec in data.records:
            writer.writerow(
                [
                    rec.person_id,
                    rec.status_w1,
                    _fmt(rec.status_w2),
                    _fmt(rec.days_between),
                    _fmt(rec.reported_total_partners),
                    _fmt(rec.partners_in_data),
                ]
                + [_fmt(rec.venue_counts.get(v, 0.0)) for v in data.venue_names]
            )
    return path


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return None if not math.isfinite(value) else value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(payload: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_results(
    summary: StudySummary, raw: "dict[float, list[ReplicationResult]]", out_dir
) -> list[Path]:
    """Persist a study: summary.json plus the raw replication table.

    Output bytes depend only on the inputs (fixed column order, fixed float
    formatting, sorted JSON keys).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_json(summary.to_dict(), out / "summary.json")]
    rep_path = out / "replications.csv"
    with rep_path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(REPLICATION_COLUMNS)
        for pi, reps in raw.items():
            for r in reps:
                writer.writerow(
                    [
                        _fmt(float(pi)),
                        r.rep_index,
                        r.seed,
                        _fmt(r.flagged),
                        *(_fmt(a) for a in r.auc),
                        r.new_infections,
                        _fmt(r.person_days_at_risk),
                        _fmt(r.incidence),
                        *(_fmt(q) for q in r.encounter_quartiles),
                    ]
                )
    paths.append(rep_path)
    return paths


def write_calibration(points: Sequence[CalibrationPoint], out_dir) -> Path:
    """Persist a calibration sweep as CSV, in grid order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "calibration.csv"
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["pi", "mean_incidence_per_100py", "se_incidence", "replications_used"]
        )
        for p in points:
            writer.writerow(
                [_fmt(p.pi), _fmt(p.mean_incidence), _fmt(p.se_incidence), p.n_used]
            )
    return path


def load_config(path) -> dict:
    """Read a flat key-value JSON config, rejecting unknown keys."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise InputError(f"{path}: config must be a flat JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise InputError(f"{path}: unknown config keys: {sorted(unknown)}")
    return raw

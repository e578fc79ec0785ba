"""Trial data files: one row per subject with an id, a 0/1 status and marker columns."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from pauc.estimator import DiagnosticSample

__all__ = ["DataError", "TrialDataset", "read_trial_csv", "write_trial_csv"]


class DataError(ValueError):
    """Malformed input data; the message names the offending line or field."""


@dataclass(frozen=True, eq=False)
class TrialDataset:
    """Parsed trial: subject ids per group and the marker matrix as a :class:`DiagnosticSample`."""

    sample: DiagnosticSample
    nondiseased_ids: tuple[str, ...]
    diseased_ids: tuple[str, ...]
    source: str = ""

    @property
    def markers(self) -> tuple[str, ...]:
        return self.sample.markers


def _parse_value(text: str, line: int, column: str) -> float:
    if text.strip() == "":
        raise DataError(f"line {line}: missing value in column {column!r}")
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line}: column {column!r} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {line}: column {column!r} is not finite: {text!r}")
    return value


def read_trial_csv(
    path: str | Path,
    id_column: str = "id",
    status_column: str = "status",
    markers: Sequence[str] | None = None,
) -> TrialDataset:
    """Read a header-first UTF-8 CSV with '.' decimals.

    Status ``0`` marks a non-diseased and ``1`` a diseased subject.  Marker
    columns default to every column other than the id and status columns.
    Line numbers in errors count the header as line 1.
    """
    path = Path(path)
    try:
        handle = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, a header row is required") from None
        except UnicodeDecodeError:
            raise DataError(f"{path}: not valid UTF-8") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataError("line 1: duplicate column names")
        for col in (id_column, status_column):
            if col not in header:
                raise DataError(f"line 1: missing required column {col!r}")
        if markers is None:
            markers = [h for h in header if h not in (id_column, status_column)]
        else:
            markers = list(markers)
            for m in markers:
                if m not in header:
                    raise DataError(f"line 1: marker column {m!r} not found")
        if not markers:
            raise DataError("line 1: no marker columns")
        i_id = header.index(id_column)
        i_status = header.index(status_column)
        i_markers = [header.index(m) for m in markers]

        rows: dict[int, list[list[float]]] = {0: [], 1: []}
        ids: dict[int, list[str]] = {0: [], 1: []}
        seen: set[str] = set()
        try:
            for line, record in enumerate(reader, start=2):
                if not record or all(not f.strip() for f in record):
                    continue
                if len(record) != len(header):
                    raise DataError(f"line {line}: expected {len(header)} fields, found {len(record)}")
                subject = record[i_id].strip()
                if subject == "":
                    raise DataError(f"line {line}: missing subject id")
                if subject in seen:
                    raise DataError(f"line {line}: duplicate subject id {subject!r}")
                seen.add(subject)
                status = record[i_status].strip()
                if status not in ("0", "1"):
                    raise DataError(f"line {line}: status must be 0 or 1, got {status!r}")
                group = int(status)
                rows[group].append([_parse_value(record[k], line, header[k]) for k in i_markers])
                ids[group].append(subject)
        except UnicodeDecodeError:
            raise DataError(f"{path}: not valid UTF-8") from None
    for group, name in ((0, "non-diseased (status 0)"), (1, "diseased (status 1)")):
        if len(rows[group]) < 2:
            raise DataError(f"need at least 2 {name} subjects, found {len(rows[group])}")
    sample = DiagnosticSample.from_arrays(np.array(rows[0]), np.array(rows[1]), tuple(markers))
    return TrialDataset(sample, tuple(ids[0]), tuple(ids[1]), str(path))


def write_trial_csv(
    path: str | Path,
    sample: DiagnosticSample,
    nondiseased_ids: Sequence[str] | None = None,
    diseased_ids: Sequence[str] | None = None,
) -> None:
    """Write ``sample`` so that :func:`read_trial_csv` restores it exactly.

    Values are written with ``repr``, which round-trips binary64.
    """
    nd_ids = list(nondiseased_ids) if nondiseased_ids is not None else [f"n{r + 1}" for r in range(sample.alpha)]
    d_ids = list(diseased_ids) if diseased_ids is not None else [f"d{s + 1}" for s in range(sample.beta)]
    if len(nd_ids) != sample.alpha or len(d_ids) != sample.beta:
        raise ValueError("one id per subject is required")
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", "status", *sample.markers])
        for sid, row in zip(nd_ids, sample.xi):
            writer.writerow([sid, 0, *(repr(float(v)) for v in row)])
        for sid, row in zip(d_ids, sample.eta):
            writer.writerow([sid, 1, *(repr(float(v)) for v in row)])

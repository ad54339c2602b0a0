"""CSV ingestion and the package's output formats.

Input is comma-separated with one header row.  PC series are CSV with columns
``step, pc1..pcm``; diagnostics are JSON lines with the fields ``step``,
``eigenvalues``, ``explained``, ``frob_ref`` and ``corrections``.  Floats are
written with 17 significant digits, which round-trips every double exactly.
"""

import contextlib
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .engine import explained_fractions
from .errors import DataError, DimensionError

FLOAT_FORMAT = ".17g"
PC_STEP_COLUMN = "step"
DIAGNOSTIC_FIELDS = ("step", "eigenvalues", "explained", "frob_ref", "corrections")
BENCH_COLUMNS = ("mode", "n", "mean_seconds", "std_seconds", "trials")


def fmt(value):
    return format(float(value), FLOAT_FORMAT)


@contextlib.contextmanager
def open_text(target, mode):
    """Yield a text stream for a path, ``"-"`` (stdin/stdout) or an open stream."""
    if target is None or target == "-":
        yield sys.stdin if "r" in mode else sys.stdout
    elif hasattr(target, "read") or hasattr(target, "write"):
        yield target
    else:
        with open(target, mode, newline="") as fh:
            yield fh


@dataclass
class Dataset:
    variable_names: list
    rows: np.ndarray

    @property
    def m(self):
        return len(self.variable_names)

    @property
    def n(self):
        return self.rows.shape[0]


class CsvStream:
    """Row-at-a-time reader over a CSV text stream.

    ``names`` is available right after construction; iterating yields one
    float array per data row and never holds more than the current line.
    Rows are numbered from 1, counting data rows only, in error messages.
    """

    def __init__(self, fh):
        self._reader = csv.reader(fh)
        try:
            header = next(self._reader)
        except StopIteration:
            raise DataError("empty input: missing header row", row=0) from None
        self.names = [h.strip() for h in header]
        if not self.names or any(not h for h in self.names):
            raise DataError("header has empty column names", row=0)
        self.rows_read = 0

    @property
    def m(self):
        return len(self.names)

    def __iter__(self):
        return self

    def __next__(self):
        while True:
            cells = next(self._reader)
            if cells and any(c.strip() for c in cells):
                break
        self.rows_read += 1
        return self._parse(cells, self.rows_read)

    def _parse(self, cells, row):
        if len(cells) != self.m:
            raise DataError(f"row {row}: expected {self.m} fields, found {len(cells)}", row=row)
        out = np.empty(self.m)
        for j, cell in enumerate(cells):
            name = self.names[j]
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"row {row}, column {name}: cannot parse {cell!r} as a number",
                    row=row, column=name,
                ) from None
            if not math.isfinite(v):
                raise DataError(
                    f"row {row}, column {name}: non-finite value {cell.strip()!r}",
                    row=row, column=name,
                )
            out[j] = v
        return out


def read_csv(source):
    """Load a whole CSV file (path or text stream) into a :class:`Dataset`."""
    with open_text(source, "r") as fh:
        reader = CsvStream(fh)
        rows = list(reader)
    data = np.array(rows, dtype=float).reshape(len(rows), reader.m)
    return Dataset(reader.names, data)


def write_csv(target, names, rows):
    with open_text(target, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in np.atleast_2d(rows) if len(rows) else ():
            w.writerow([fmt(v) for v in r])


def pc_header(m):
    return [PC_STEP_COLUMN] + [f"pc{i + 1}" for i in range(m)]


class PcSeriesWriter:
    """Incremental writer for ``step, pc1..pcm`` rows."""

    def __init__(self, fh, m):
        self.m = m
        self._w = csv.writer(fh, lineterminator="\n")
        self._fh = fh
        self._w.writerow(pc_header(m))

    def write(self, step, pcs):
        pcs = np.asarray(pcs, dtype=float)
        if pcs.shape != (self.m,):
            raise DimensionError(f"expected {self.m} PC values, got shape {pcs.shape}")
        self._w.writerow([str(int(step))] + [fmt(v) for v in pcs])

    def flush(self):
        self._fh.flush()


def write_pc_series(results, target, m=None):
    """Write step results (anything with ``.step`` and ``.pcs``) as CSV.

    ``m`` is needed only when ``results`` is empty, to size the header.
    """
    results = list(results)
    if m is None:
        if not results:
            raise ValueError("m is required to write an empty PC series")
        m = len(results[0].pcs)
    with open_text(target, "w") as fh:
        w = PcSeriesWriter(fh, m)
        for r in results:
            w.write(r.step, r.pcs)


def read_pc_series(source):
    """Return ``(steps, pcs)`` from a PC series file."""
    with open_text(source, "r") as fh:
        reader = CsvStream(fh)
        if reader.names[0] != PC_STEP_COLUMN:
            raise DataError(f"first column must be {PC_STEP_COLUMN!r}", row=0)
        rows = list(reader)
    arr = np.array(rows, dtype=float).reshape(len(rows), reader.m)
    return arr[:, 0].astype(int), arr[:, 1:]


@dataclass
class DiagnosticsRecord:
    step: int
    eigenvalues: np.ndarray
    explained: np.ndarray
    frob_ref: float = None
    corrections: list = field(default_factory=list)

    @classmethod
    def from_step(cls, result):
        """Build from a :class:`~incpca.engine.PcaStepResult`."""
        return cls(
            step=int(result.step),
            eigenvalues=np.asarray(result.eigenvalues, dtype=float),
            explained=explained_fractions(result.eigenvalues),
            frob_ref=result.q_frobenius_to_reference,
            corrections=[
                {"kind": c.kind, "indices": [int(i) for i in c.indices]}
                for c in result.corrections
            ],
        )

    def to_dict(self):
        return {
            "step": int(self.step),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "explained": [float(v) for v in self.explained],
            "frob_ref": None if self.frob_ref is None else float(self.frob_ref),
            "corrections": list(self.corrections),
        }

    def to_json(self):
        # json uses repr() for floats, the shortest exact round-trip form
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d):
        missing = [k for k in DIAGNOSTIC_FIELDS if k not in d]
        if missing:
            raise DataError(f"diagnostics record lacks field(s) {missing}")
        return cls(
            step=int(d["step"]),
            eigenvalues=np.array(d["eigenvalues"], dtype=float),
            explained=np.array(d["explained"], dtype=float),
            frob_ref=d["frob_ref"],
            corrections=list(d["corrections"]),
        )


def write_diagnostics(records, target):
    with open_text(target, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_diagnostics(source):
    out = []
    with open_text(source, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: invalid JSON ({exc.msg})", row=lineno) from None
            out.append(DiagnosticsRecord.from_dict(d))
    return out


def write_bench_table(rows, target):
    """``rows`` are mappings with the :data:`BENCH_COLUMNS` keys."""
    with open_text(target, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in rows:
            w.writerow([r["mode"], int(r["n"]), fmt(r["mean_seconds"]),
                        fmt(r["std_seconds"]), int(r["trials"])])


def read_bench_table(source):
    with open_text(source, "r") as fh:
        text = fh.read()
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append({
            "mode": r["mode"],
            "n": int(r["n"]),
            "mean_seconds": float(r["mean_seconds"]),
            "std_seconds": float(r["std_seconds"]),
            "trials": int(r["trials"]),
        })
    return rows

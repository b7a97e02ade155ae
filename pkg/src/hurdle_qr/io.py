"""Reading citation-style CSV data and writing reproducible results."""

import csv
import json
import math

import numpy as np

from .dataset import Dataset

__all__ = [
    "TRANSFORMS",
    "DataError",
    "load_csv",
    "dumps_json",
    "write_json",
    "write_rows",
    "read_config",
    "write_draws",
    "read_draws",
]

TRANSFORMS = {"log": np.log}


class DataError(ValueError):
    """Input data violate the expected schema or domain."""


def _parse_float(cell):
    cell = cell.strip()
    if cell == "":
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path, count_col, covariates, transforms=None, z_covariates=None):
    """Load a header-first CSV into a :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
    count_col : str
        Column of nonnegative integer counts.
    covariates : list of str
        Columns for the quantile part, in design order.
    transforms : dict, optional
        Column name to transform name (only ``"log"`` is available).
    z_covariates : list of str, optional
        Columns for the logistic part; defaults to ``covariates``.

    Rows with an empty or non-numeric cell in any used column are dropped and
    counted in ``Dataset.rows_rejected``.  Rows are numbered from 1, header
    excluded.

    Raises
    ------
    DataError
        Missing column, a negative or fractional count, or a transform that
        is undefined for a value.
    """
    transforms = dict(transforms or {})
    for name, t in transforms.items():
        if t not in TRANSFORMS:
            raise DataError(f"unknown transform {t!r} for column {name!r}")
    covariates = list(covariates)
    z_covariates = covariates if z_covariates is None else list(z_covariates)
    used = [count_col] + list(dict.fromkeys(covariates + z_covariates))

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        missing = [c for c in used if c not in header]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        index = {c: header.index(c) for c in used}

        counts, rows, rejected = [], [], 0
        for rownum, row in enumerate(reader, start=1):
            if not any(cell.strip() for cell in row):
                continue
            values = {}
            for c in used:
                i = index[c]
                values[c] = _parse_float(row[i]) if i < len(row) else None
            if any(v is None for v in values.values()):
                rejected += 1
                continue
            y = values[count_col]
            if y < 0 or y != int(y):
                raise DataError(f"row {rownum}: count {row[index[count_col]].strip()!r} is not a nonnegative integer")
            for c, t in transforms.items():
                if c in values:
                    if t == "log" and values[c] <= 0:
                        raise DataError(f"row {rownum}: log transform of nonpositive {c}={values[c]}")
                    values[c] = float(TRANSFORMS[t](values[c]))
            counts.append(y)
            rows.append(values)

    if not counts:
        raise DataError(f"{path}: no complete rows")
    x = np.array([[r[c] for c in covariates] for r in rows], dtype=float).reshape(len(rows), len(covariates))
    z = np.array([[r[c] for c in z_covariates] for r in rows], dtype=float).reshape(len(rows), len(z_covariates))
    return Dataset(
        np.array(counts),
        x,
        covariates,
        z,
        z_covariates,
        rows_rejected=rejected,
        transforms=transforms,
    )


def _encode(obj):
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return "null" if not math.isfinite(v) else format(v, ".17g")
    return json.dumps(obj)


def dumps_json(obj):
    """JSON text with floats at 17 significant digits and NaN/inf as null."""
    return _encode(obj)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_json(obj))
        fh.write("\n")


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v


def write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def write_draws(path, draws):
    """Long-format draws: chain, draw, parameter, value."""
    rows = (
        [k, i, name, draws.samples[k, i, j]]
        for k in range(draws.n_chains)
        for i in range(draws.n_draws)
        for j, name in enumerate(draws.names)
    )
    write_rows(path, ["chain", "draw", "parameter", "value"], rows)


def read_draws(path):
    """Inverse of :func:`write_draws`: ``{parameter: (chains, draws) array}``."""
    cells = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"chain", "draw", "parameter", "value"} <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns chain, draw, parameter, value")
        for row in reader:
            cells.setdefault(row["parameter"], {})[(int(row["chain"]), int(row["draw"]))] = float(row["value"])
    out = {}
    for name, entries in cells.items():
        chains = 1 + max(k for k, _ in entries)
        length = 1 + max(i for _, i in entries)
        arr = np.full((chains, length), np.nan)
        for (k, i), v in entries.items():
            arr[k, i] = v
        if np.isnan(arr).any():
            raise DataError(f"{path}: parameter {name!r} has ragged chains")
        out[name] = arr
    return out


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out

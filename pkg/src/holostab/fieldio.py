"""Field and table persistence.

Field format: ``<name>.fld`` holds raw little-endian complex128 samples
(interleaved float64 re, im) in row-major order; ``<name>.fld.json`` is a
JSON sidecar with the grid geometry and domain tag.  Round trips are
bit-exact.

CSV: UTF-8, comma separated, dot decimal, LF line endings, one header row.
Floats are written with ``repr``, which round-trips exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .fields import GridSpec, SampledField

_DTYPE = "c128"


class FieldIOError(OSError):
    """I/O failure carrying the offending path."""


def write_field(field: SampledField, path: "str | Path") -> None:
    path = Path(path)
    if path.suffix != ".fld":
        path = path.with_suffix(".fld")
    header = {
        "dim": field.grid.dim,
        "n_per_axis": field.grid.n_per_axis,
        "extent": field.grid.extent,
        "domain_tag": field.domain_tag,
        "dtype": _DTYPE,
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        sidecar = path.with_name(path.name + ".json")
        sidecar.write_text(json.dumps(header, sort_keys=True) + "\n", encoding="utf-8")
        path.write_bytes(np.ascontiguousarray(field.values, dtype="<c16").tobytes())
    except OSError as exc:
        raise FieldIOError(f"failed writing field to {path}: {exc}") from exc


def read_field(path: "str | Path") -> SampledField:
    path = Path(path)
    sidecar = path.with_name(path.name + ".json")
    try:
        header = json.loads(sidecar.read_text(encoding="utf-8"))
        raw = path.read_bytes()
    except OSError as exc:
        raise FieldIOError(f"failed reading field from {path}: {exc}") from exc
    if header.get("dtype") != _DTYPE:
        raise FieldIOError(f"{sidecar}: unsupported dtype {header.get('dtype')!r}")
    grid = GridSpec(header["dim"], header["n_per_axis"], header["extent"])
    values = np.frombuffer(raw, dtype="<c16")
    if values.size != grid.size:
        raise FieldIOError(
            f"{path}: expected {grid.size} samples, found {values.size}"
        )
    return SampledField(grid, values.reshape(grid.shape), header["domain_tag"])


def _format_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(rows: Iterable[Sequence], path: "str | Path", columns: Sequence[str]) -> None:
    """Write rows under a fixed header; column order is the contract."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                if len(row) != len(columns):
                    raise ValueError(
                        f"row of length {len(row)} does not match {len(columns)} columns"
                    )
                fh.write(",".join(_format_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise FieldIOError(f"failed writing CSV to {path}: {exc}") from exc


def read_csv(path: "str | Path") -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FieldIOError(f"failed reading CSV from {path}: {exc}") from exc
    lines = [ln for ln in text.split("\n") if ln != ""]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]

"""CSV and JSON serialization with byte-stable formatting."""
from __future__ import annotations

import hashlib
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .spectral import Spectrum, TorusField


def fmt(x: float) -> str:
    """17 significant digits in scientific notation."""
    return f"{float(x):.16e}"


def _rows_to_text(header: str, rows: Iterable[Sequence], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v)
                           for v in row) + "\n")
    return buf.getvalue()


def spectrum_csv(spec: Spectrum, term: str | None = None) -> str:
    """Rows ``xi,re,im`` in ascending xi; optional ``# term=<kind>`` header."""
    rows = ((int(x), c.real, c.imag) for x, c in zip(spec.freqs, spec.coeffs))
    return _rows_to_text("xi,re,im", rows, f"term={term}" if term else None)


def field_csv(field: TorusField) -> str:
    rows = ((j, c.real, c.imag) for j, c in enumerate(field.samples))
    return _rows_to_text("j,re,im", rows)


def series_csv(header: str, rows) -> str:
    return _rows_to_text(header, rows)


def monitors_csv(times, monitors) -> str:
    rows = ((t, m.mass, m.momentum, m.energy) for t, m in zip(times, monitors))
    return _rows_to_text("t,mass,momentum,energy", rows)


def _data_lines(text: str):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return lines[0], lines[1:]


def read_spectrum_csv(text: str) -> Spectrum:
    header, lines = _data_lines(text)
    if header.strip() != "xi,re,im":
        raise ValueError(f"not a spectrum CSV (header {header!r})")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines])
    xi = data[:, 0].astype(int)
    if np.any(np.diff(xi) != 1):
        raise ValueError("frequencies must be consecutive and ascending")
    N = xi.size
    if xi[0] != -(N // 2):
        raise ValueError("band must be -N/2 .. N/2-1")
    return Spectrum(data[:, 1] + 1j * data[:, 2])


def read_field_csv(text: str) -> TorusField:
    header, lines = _data_lines(text)
    if header.strip() != "j,re,im":
        raise ValueError(f"not a field CSV (header {header!r})")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines])
    return TorusField(data[:, 1] + 1j * data[:, 2])


def read_series_csv(text: str) -> tuple[list[str], np.ndarray]:
    header, lines = _data_lines(text)
    cols = header.split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines]).reshape(-1, len(cols))
    return cols, data


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

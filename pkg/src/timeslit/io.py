"""Plain-text emitters and readers for spectra, peak lists and momentum maps.

One-dimensional data are CSV files preceded by ``# key = value`` header
lines.  Momentum maps use a text grid format::

    # timeslit momentum map v1
    # key = value            (metadata, any number of lines)
    # kz = v0 v1 ...         (axis samples)
    # krho = v0 v1 ...
    d[0,0] d[0,1] ...        (one row per kz sample)

The binary variant is a NumPy ``.npz`` archive with arrays ``kz``, ``krho``
and ``density`` plus a JSON string ``meta``.  Floats are written in their shortest
round-trip form, so a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .observables import MomentumMap, PeakList, SpectrumGrid

MAP_MAGIC = "# timeslit momentum map v1"


def _fmt(x) -> str:
    return repr(float(x))


def _meta_lines(meta: dict) -> list[str]:
    lines = []
    for key in sorted(meta):
        value = meta[key]
        if isinstance(value, float):
            value = _fmt(value)
        lines.append(f"# {key} = {value}")
    return lines


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text in ("True", "False"):
        return text == "True"
    return text


def _read_header(lines):
    meta = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                meta[key.strip()] = _parse_value(value.strip())
        elif line.strip():
            body.append(line)
    return meta, body


def write_spectrum_csv(path, s: SpectrumGrid, columns=("E", "dP_dE")) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        for line in _meta_lines(s.meta):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for x, y in zip(s.axis, s.values):
            w.writerow((_fmt(x), _fmt(y)))
    return path


def read_spectrum_csv(path) -> SpectrumGrid:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"spectrum file not found: {path}")
    meta, body = _read_header(path.read_text().splitlines())
    rows = list(csv.reader(body))
    if not rows:
        raise ValueError(f"{path}: no data")
    meta["columns"] = ",".join(rows[0])
    data = np.array(rows[1:], dtype=float).reshape(-1, 2)
    return SpectrumGrid(data[:, 0], data[:, 1], meta)


def write_peaks_csv(path, peaks: PeakList, meta: dict | None = None) -> Path:
    path = Path(path)
    prom = peaks.prominences if peaks.prominences is not None else np.full(len(peaks), math.nan)
    spacing = np.concatenate(([math.nan], peaks.spacings)) if len(peaks) else np.array([])
    with path.open("w", newline="") as fh:
        for line in _meta_lines(meta or {}):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("position", "height", "prominence", "spacing_to_previous"))
        for row in zip(peaks.positions, peaks.heights, prom, spacing):
            w.writerow(tuple(_fmt(v) for v in row))
    return path


def read_peaks_csv(path) -> PeakList:
    meta, body = _read_header(Path(path).read_text().splitlines())
    rows = list(csv.reader(body))[1:]
    data = np.array(rows, dtype=float).reshape(-1, 4)
    return PeakList(data[:, 0], data[:, 1], data[:, 2])


def write_map(path, m: MomentumMap) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(MAP_MAGIC + "\n")
        for line in _meta_lines(m.meta):
            fh.write(line + "\n")
        fh.write("# kz = " + " ".join(_fmt(v) for v in m.kz_axis) + "\n")
        fh.write("# krho = " + " ".join(_fmt(v) for v in m.krho_axis) + "\n")
        for row in m.density:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")
    return path


def read_map(path) -> MomentumMap:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != MAP_MAGIC:
        raise ValueError(f"{path}: not a momentum map file")
    meta, body = _read_header(lines[1:])
    kz = np.array(str(meta.pop("kz")).split(), dtype=float)
    krho = np.array(str(meta.pop("krho")).split(), dtype=float)
    dens = np.array([row.split() for row in body], dtype=float)
    return MomentumMap(kz, krho, dens.reshape(kz.size, krho.size), meta)


def write_map_binary(path, m: MomentumMap) -> Path:
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(fh, kz=m.kz_axis, krho=m.krho_axis, density=m.density,
                 meta=np.array(json.dumps(m.meta, sort_keys=True, default=str)))
    return path


def read_map_binary(path) -> MomentumMap:
    with np.load(path) as z:
        return MomentumMap(z["kz"], z["krho"], z["density"], json.loads(str(z["meta"])))

"""CSV tables and legacy-VTK structured-points output."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

from .filtration import PhaseField

PathOrFile = Union[str, Path, TextIO]


def fmt(x) -> str:
    """12 significant digits; ``nan``/``inf`` spelled as Python prints them."""
    return f"{float(x):.12g}"


def write_csv(dest: PathOrFile, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])

    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            emit(fh)
    else:
        emit(dest)


def read_csv(src: PathOrFile) -> tuple[list, np.ndarray]:
    """Header and a float array of the rows written by :func:`write_csv`."""
    if isinstance(src, (str, Path)):
        text = Path(src).read_text()
    else:
        text = src.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    data = np.array([[float(x) for x in row] for row in reader if row], dtype=float)
    return header, data.reshape(-1, len(header))


def write_vtk(dest: Union[str, Path], field: PhaseField, title: str = "rkfiltration phase field") -> None:
    """Legacy ASCII VTK ``STRUCTURED_POINTS`` with v, T, p, u, phase and mask.

    Point order is x1 fastest, then x2, then x3. Masked nodes carry NaN in
    the real fields and -1 in ``phase``.
    """
    dom = field.domain
    n1, n2, n3 = dom.resolution
    npts = n1 * n2 * n3
    lines = [
        "# vtk DataFile Version 3.0",
        title[:255],
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {n1} {n2} {n3}",
        "ORIGIN " + " ".join(fmt(x) for x in dom.lower),
        "SPACING " + " ".join(fmt(h) for h in dom.spacing),
        f"POINT_DATA {npts}",
    ]
    for name, arr in (("v", field.v), ("T", field.T), ("p", field.p), ("u", field.u)):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(fmt(x) for x in np.asarray(arr).ravel())
    for name, arr in (("phase", field.label), ("mask", field.mask)):
        lines.append(f"SCALARS {name} int 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(str(int(x)) for x in np.asarray(arr).ravel())
    Path(dest).write_text("\n".join(lines) + "\n")


def read_vtk(src: Union[str, Path]) -> dict:
    """Parse a file from :func:`write_vtk` into header values and arrays ``[k, j, i]``."""
    tokens = Path(src).read_text().split("\n")
    out = {"title": tokens[1]}
    i = 3
    dims = None
    while i < len(tokens):
        line = tokens[i].strip()
        i += 1
        if not line:
            continue
        key, *rest = line.split()
        if key == "DIMENSIONS":
            dims = tuple(int(x) for x in rest)
            out["dimensions"] = dims
        elif key in ("ORIGIN", "SPACING"):
            out[key.lower()] = tuple(float(x) for x in rest)
        elif key == "POINT_DATA":
            out["npoints"] = int(rest[0])
        elif key == "SCALARS":
            name, kind = rest[0], rest[1]
            i += 1  # LOOKUP_TABLE
            n = out["npoints"]
            vals = tokens[i : i + n]
            i += n
            dtype = int if kind == "int" else float
            arr = np.array([dtype(x) for x in vals])
            out[name] = arr.reshape(dims[::-1])
    return out


def write_slice_csv(dest: PathOrFile, field: PhaseField, axis: int = 2, value: float = 0.0) -> None:
    """Nodes of the grid plane nearest ``x_{axis+1} = value``."""
    dom = field.domain
    ax = dom.axes()[axis]
    idx = int(np.argmin(np.abs(ax - value)))
    x1, x2, x3 = dom.coordinates()
    sl = [slice(None)] * 3
    sl[2 - axis] = idx
    sl = tuple(sl)
    cols = [x1[sl], x2[sl], x3[sl], field.u[sl], field.v[sl], field.T[sl], field.p[sl], field.label[sl], field.mask[sl]]
    rows = zip(*(np.asarray(c).ravel() for c in cols))
    write_csv(dest, ["x1", "x2", "x3", "u", "v", "T", "p", "phase", "mask"], rows)

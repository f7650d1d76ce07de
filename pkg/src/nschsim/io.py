"""Field snapshot files and CSV output.

Snapshot format: one header line::

    # nschsim-field v1 dim=<d> cells=<nx[,ny]> lengths=<Lx[,Ly]> t=<t> name=<mu|rho>

followed by the nodal values in row-major order, one per line, with 17
significant digits.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .grid import Grid

MAGIC = "# nschsim-field v1"


def _join(values) -> str:
    return ",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in values)


def write_field(path, grid: Grid, values: np.ndarray, t: float, name: str) -> None:
    values = grid.check_field(values, name)
    header = (f"{MAGIC} dim={grid.dim} cells={_join(grid.cells)} "
              f"lengths={_join(grid.lengths)} t={t:.17g} name={name}")
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.writelines(f"{v:.17g}\n" for v in values.ravel())


def read_field(path):
    """Return ``(grid, values, t, name)``."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read field file {path}: {exc}") from exc
    if not lines or not lines[0].startswith(MAGIC):
        raise ConfigError(f"{path} is not a nschsim field file")
    meta = dict(tok.split("=", 1) for tok in lines[0][len(MAGIC):].split())
    try:
        grid = Grid(tuple(int(c) for c in meta["cells"].split(",")),
                    tuple(float(L) for L in meta["lengths"].split(",")))
        if grid.dim != int(meta["dim"]):
            raise ValueError("dim does not match cells")
        values = np.array([float(v) for v in lines[1:] if v.strip()])
        values = values.reshape(grid.shape)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed field file {path}: {exc}") from exc
    return grid, values, float(meta["t"]), meta["name"]


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_csv(path):
    """Return ``(header, rows)`` with every cell left as a string."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)

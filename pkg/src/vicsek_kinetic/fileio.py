"""On-disk formats for the solver: config files, snapshots and series.

Config files are flat ``key = value`` text; ``#`` starts a comment.  Keys
mirror SolverConfig (see ``kinetic_solver``).

Snapshot layout (fixed, both variants):
  * line 1 (ASCII, newline-terminated):
      ``t=<f> L=<f> m_x=<i> m_y=<i> n_theta=<i> model=<vicsek|dfl>``
      `` mu=<f> sigma=<f> c=<f> layout=<text|f64le>``
  * ``text``  : one value per line, ``%.17g``, row-major (i, j, k), k fastest.
  * ``f64le`` : raw little-endian float64, same order, immediately after the
    header newline.

Series files are CSV with header ``t,mass,rho_bar,max_rho,E_u,E_VM,j_global``;
phase-scan files are CSV with header ``rho_bar,sigma,E_u,E_VM,kappa``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConfigError",
    "SnapshotHeader",
    "parse_config_text",
    "format_config",
    "write_snapshot",
    "read_snapshot",
    "write_table",
    "read_table",
    "write_series",
    "read_series",
    "write_scan",
    "read_scan",
    "write_particles",
    "read_particles",
    "write_band_profiles",
    "read_band_profiles",
    "ensure_dir",
]

SERIES_COLUMNS = ("t", "mass", "rho_bar", "max_rho", "E_u", "E_VM", "j_global")
SCAN_COLUMNS = ("rho_bar", "sigma", "E_u", "E_VM", "kappa")
PARTICLE_COLUMNS = ("id", "x", "y", "theta")
BAND_COLUMNS = ("t", "bin", "rho_bar", "u_bar")


class ConfigError(ValueError):
    """Malformed config text or unknown/invalid key."""


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines into a string dict (raw values)."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        out[key] = value
    return out


def format_config(items: dict[str, object]) -> str:
    """Render a dict as flat ``key = value`` lines (the config echo)."""
    return "".join(f"{k} = {v}\n" for k, v in items.items())


@dataclass(frozen=True)
class SnapshotHeader:
    t: float
    length: float
    m_x: int
    m_y: int
    n_theta: int
    model: str
    mu: float
    sigma: float
    c: float
    layout: str


def _header_line(h: SnapshotHeader) -> str:
    return (
        f"t={h.t:.17g} L={h.length:.17g} m_x={h.m_x} m_y={h.m_y} "
        f"n_theta={h.n_theta} model={h.model} mu={h.mu:.17g} "
        f"sigma={h.sigma:.17g} c={h.c:.17g} layout={h.layout}\n"
    )


def write_snapshot(path: str, header: SnapshotHeader, values: np.ndarray) -> None:
    """Write a snapshot; ``values`` must be (m_x, m_y, n_theta)."""
    expected = (header.m_x, header.m_y, header.n_theta)
    if values.shape != expected:
        raise ValueError(f"values shape {values.shape} != header {expected}")
    if header.layout not in ("text", "f64le"):
        raise ValueError(f"unknown snapshot layout {header.layout!r}")
    flat = np.ascontiguousarray(values, dtype=float).reshape(-1)
    with open(path, "wb") as fh:
        fh.write(_header_line(header).encode("ascii"))
        if header.layout == "text":
            fh.write("".join(f"{v:.17g}\n" for v in flat).encode("ascii"))
        else:
            fh.write(flat.astype("<f8").tobytes())


def read_snapshot(path: str) -> tuple[SnapshotHeader, np.ndarray]:
    """Read a snapshot written by :func:`write_snapshot`."""
    with open(path, "rb") as fh:
        raw = fh.readline().decode("ascii").strip()
        fields: dict[str, str] = {}
        for tok in raw.split():
            if "=" not in tok:
                raise ValueError(f"{path}: malformed snapshot header token {tok!r}")
            k, v = tok.split("=", 1)
            fields[k] = v
        try:
            header = SnapshotHeader(
                t=float(fields["t"]),
                length=float(fields["L"]),
                m_x=int(fields["m_x"]),
                m_y=int(fields["m_y"]),
                n_theta=int(fields["n_theta"]),
                model=fields["model"],
                mu=float(fields["mu"]),
                sigma=float(fields["sigma"]),
                c=float(fields["c"]),
                layout=fields["layout"],
            )
        except KeyError as exc:
            raise ValueError(f"{path}: snapshot header missing field {exc}") from exc
        n = header.m_x * header.m_y * header.n_theta
        if header.layout == "text":
            flat = np.loadtxt(fh, dtype=float).reshape(-1)
        elif header.layout == "f64le":
            flat = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)
        else:
            raise ValueError(f"{path}: unknown layout {header.layout!r}")
    if flat.size != n:
        raise ValueError(f"{path}: expected {n} values, found {flat.size}")
    return header, flat.reshape(header.m_x, header.m_y, header.n_theta)


def _write_csv(path: str, columns: tuple[str, ...], rows: np.ndarray) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if rows.size and rows.shape[1] != len(columns):
        raise ValueError(f"expected {len(columns)} columns, got {rows.shape[1]}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _read_csv(path: str, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != columns:
            raise ValueError(f"{path}: expected columns {columns}, got {tuple(header)}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(columns))
    return {name: data[:, i] for i, name in enumerate(columns)}


def write_table(path: str, columns: tuple[str, ...], rows: np.ndarray) -> None:
    """Generic CSV with a fixed header (all diagnostic tables use this)."""
    _write_csv(path, columns, rows)


def read_table(path: str, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    return _read_csv(path, columns)


def write_series(path: str, rows: np.ndarray) -> None:
    _write_csv(path, SERIES_COLUMNS, rows)


def read_series(path: str) -> dict[str, np.ndarray]:
    return _read_csv(path, SERIES_COLUMNS)


def write_scan(path: str, rows: np.ndarray) -> None:
    _write_csv(path, SCAN_COLUMNS, rows)


def read_scan(path: str) -> dict[str, np.ndarray]:
    return _read_csv(path, SCAN_COLUMNS)


def write_particles(path: str, positions: np.ndarray, headings: np.ndarray) -> None:
    """Particle snapshot CSV with columns id,x,y,theta."""
    ids = np.arange(positions.shape[0], dtype=float)
    rows = np.column_stack([ids, positions[:, 0], positions[:, 1], headings])
    _write_csv(path, PARTICLE_COLUMNS, rows)


def read_particles(path: str) -> dict[str, np.ndarray]:
    return _read_csv(path, PARTICLE_COLUMNS)


def write_band_profiles(path: str, rows: np.ndarray) -> None:
    """Band-profile series CSV with columns t,bin,rho_bar,u_bar."""
    _write_csv(path, BAND_COLUMNS, rows)


def read_band_profiles(path: str) -> dict[str, np.ndarray]:
    return _read_csv(path, BAND_COLUMNS)


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)

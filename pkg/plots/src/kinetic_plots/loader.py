"""Readers for the solver's documented on-disk formats.

This package consumes run outputs purely through their files: snapshots
(header line + text or raw little-endian float64 payload), the CSV series,
diagnostic tables, phase scans and particle band profiles.  Nothing here
imports the solver.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Snapshot",
    "read_snapshot",
    "read_csv",
    "config_hash",
    "density_and_flux",
]


@dataclass(frozen=True)
class Snapshot:
    t: float
    length: float
    m_x: int
    m_y: int
    n_theta: int
    model: str
    mu: float
    sigma: float
    c: float
    values: np.ndarray  # (m_x, m_y, n_theta)


def read_snapshot(path: str) -> Snapshot:
    """Parse a solver snapshot (either payload layout)."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        fields = {}
        for tok in header.split():
            if "=" not in tok:
                raise ValueError(f"{path}: bad snapshot header token {tok!r}")
            k, v = tok.split("=", 1)
            fields[k] = v
        m_x, m_y, n_theta = int(fields["m_x"]), int(fields["m_y"]), int(fields["n_theta"])
        n = m_x * m_y * n_theta
        layout = fields["layout"]
        if layout == "text":
            flat = np.loadtxt(fh, dtype=float).reshape(-1)
        elif layout == "f64le":
            flat = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)
        else:
            raise ValueError(f"{path}: unknown snapshot layout {layout!r}")
    if flat.size != n:
        raise ValueError(f"{path}: expected {n} values, found {flat.size}")
    return Snapshot(
        t=float(fields["t"]), length=float(fields["L"]), m_x=m_x, m_y=m_y,
        n_theta=n_theta, model=fields["model"], mu=float(fields["mu"]),
        sigma=float(fields["sigma"]), c=float(fields["c"]),
        values=flat.reshape(m_x, m_y, n_theta),
    )


def read_csv(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """CSV with a header line; missing required columns are a hard error."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        missing = [c for c in required if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing} (found {header})")
        data = np.loadtxt(fh, delimiter=",", ndmin=2, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: row width {data.shape[1]} != header {len(header)}")
    return {name: data[:, i] for i, name in enumerate(header)}


def config_hash(input_path: str) -> str:
    """Short hash identifying the generating run.

    Prefers the run's config.echo (searched upward from the input file);
    falls back to hashing the input file itself.
    """
    d = os.path.dirname(os.path.abspath(input_path))
    for _ in range(3):
        candidate = os.path.join(d, "config.echo")
        if os.path.exists(candidate):
            with open(candidate, "rb") as fh:
                return hashlib.sha256(fh.read()).hexdigest()[:12]
        d = os.path.dirname(d)
    with open(input_path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:12]


def density_and_flux(snap: Snapshot) -> tuple[np.ndarray, np.ndarray]:
    """Angular moments of a snapshot: rho(x,y) and j(x,y) (2-vectors)."""
    dtheta = 2.0 * np.pi / snap.n_theta
    theta = np.arange(snap.n_theta) * dtheta
    rho = dtheta * snap.values.sum(axis=-1)
    jx = dtheta * (snap.values * np.cos(theta)).sum(axis=-1)
    jy = dtheta * (snap.values * np.sin(theta)).sum(axis=-1)
    return rho, np.stack([jx, jy], axis=-1)

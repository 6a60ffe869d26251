"""Snapshots, line profiles and error norms (CSV, schema version 1)."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .gas import GasModel, to_primitive
from .mesh import Mesh

SCHEMA = 1
SNAPSHOT_COLUMNS = ("x", "y", "rho", "U", "V", "W", "p", "T", "n_particles", "hydro_fraction")
PROFILE_COLUMNS = ("s", "rho", "U", "V", "W", "p", "T")


class OutputError(OSError):
    pass


@dataclass
class Snapshot:
    """Per-cell primitive fields on a mesh; arrays have the mesh shape ``(nx, ny)``."""

    time: float
    mesh: Mesh
    rho: np.ndarray
    U: np.ndarray          # (nx, ny, 3)
    p: np.ndarray
    T: np.ndarray
    n_particles: np.ndarray | None = None
    hydro_fraction: np.ndarray | None = None

    @classmethod
    def from_state(cls, W: np.ndarray, mesh: Mesh, gas: GasModel, time: float, pool=None,
                   Wp: np.ndarray | None = None) -> "Snapshot":
        pr = to_primitive(W, gas)
        npc = frac = None
        if pool is not None:
            npc = np.bincount(pool.cell, minlength=mesh.ncells).reshape(mesh.shape)
        if Wp is not None:
            frac = 1.0 - Wp[..., 0] / W[..., 0]
        return cls(time, mesh, pr.rho, pr.U, pr.p, pr.T, npc, frac)

    def field(self, name: str) -> np.ndarray:
        if name in ("U", "V", "W"):
            return self.U[..., "UVW".index(name)]
        return getattr(self, name)


def _header(seed, case, time, config_hash, extra=""):
    return f"# schema={SCHEMA}, seed={seed}, case={case}, time={time!r}, config_hash={config_hash}{extra}\n"


def _write(path, header, columns, data):
    try:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(header)
            fh.write(",".join(columns) + "\n")
            np.savetxt(fh, data, delimiter=",", fmt="%.16e")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_snapshot(snap: Snapshot, path: str, seed: int, case: str, config_hash: str) -> None:
    C = snap.mesh.cell_centers()
    n = snap.mesh.ncells
    y = C[..., 1] if snap.mesh.dims == 2 else np.zeros(snap.mesh.shape)
    cols = [C[..., 0], y, snap.rho, snap.U[..., 0], snap.U[..., 1], snap.U[..., 2], snap.p, snap.T,
            snap.n_particles if snap.n_particles is not None else np.full(snap.mesh.shape, np.nan),
            snap.hydro_fraction if snap.hydro_fraction is not None else np.full(snap.mesh.shape, np.nan)]
    data = np.stack([np.asarray(c, dtype=float).reshape(n) for c in cols], axis=1)
    _write(path, _header(seed, case, snap.time, config_hash), SNAPSHOT_COLUMNS, data)


def read_header(path: str) -> dict:
    try:
        with open(path) as fh:
            first = fh.readline()
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not first.startswith("#"):
        raise ValueError(f"{path}: missing schema header")
    out = {}
    for part in first[1:].split(","):
        k, _, v = part.strip().partition("=")
        out[k] = v
    return out


def read_table(path: str) -> tuple:
    """(header dict, column names, data array) of a snapshot or profile file."""
    hdr = read_header(path)
    try:
        with open(path) as fh:
            fh.readline()
            cols = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return hdr, cols, data


# ---------------------------------------------------------------- profiles

@dataclass
class Profile:
    s: np.ndarray                 # abscissa along the line
    values: dict                  # column name -> array
    time: float = 0.0

    def column(self, name: str) -> np.ndarray:
        return self.s if name == "s" else self.values[name]


def extract_profile(snap: Snapshot, axis: int, value: float) -> Profile:
    """Values along the line ``x = value`` (axis 0) or ``y = value`` (axis 1).

    The two cell columns bracketing the line are interpolated linearly; in 1D
    the whole field is returned along x.
    """
    mesh = snap.mesh
    names = PROFILE_COLUMNS[1:]
    if mesh.dims == 1:
        return Profile(mesh.centers(0), {k: snap.field(k)[:, 0].copy() for k in names}, snap.time)
    c = mesh.centers(axis)
    if not c[0] <= value <= c[-1]:
        raise ValueError(f"line {'xy'[axis]}={value} lies outside the cell centers [{c[0]}, {c[-1]}]")
    j = int(np.clip(np.searchsorted(c, value) - 1, 0, c.size - 2))
    w = (value - c[j]) / (c[j + 1] - c[j])
    vals = {}
    for k in names:
        f = snap.field(k)
        a, b = (f[j], f[j + 1]) if axis == 0 else (f[:, j], f[:, j + 1])
        vals[k] = (1 - w) * a + w * b
    return Profile(mesh.centers(1 - axis), vals, snap.time)


def write_profile(prof: Profile, path: str, seed: int, case: str, config_hash: str, line: str = "") -> None:
    cols = ("s",) + tuple(prof.values)
    data = np.stack([prof.s] + [prof.values[k] for k in prof.values], axis=1)
    extra = f", line={line}" if line else ""
    _write(path, _header(seed, case, prof.time, config_hash, extra), cols, data)


def read_profile(path: str) -> Profile:
    hdr, cols, data = read_table(path)
    if not cols or cols[0] != "s":
        raise ValueError(f"{path}: not a profile file")
    return Profile(data[:, 0], {k: data[:, i] for i, k in enumerate(cols) if i > 0}, float(hdr.get("time", 0)))


def similarity_profile(prof: Profile, x: float, x0: float, U0: float, nu: float) -> Profile:
    """Blasius variables of a wall-normal profile at station ``x``: eta = y sqrt(U0 / (nu (x - x0)))."""
    if not x > x0:
        raise ValueError("station must lie downstream of the leading edge")
    eta = prof.s * np.sqrt(U0 / (nu * (x - x0)))
    return Profile(eta, {"U/U0": prof.values["U"] / U0}, prof.time)


# ---------------------------------------------------------------- norms

def error_norms(s, f, s_ref, f_ref) -> dict:
    """L1, L2 and Linf of f - f_ref over the overlap of the abscissae.

    The result is interpolated linearly onto the reference abscissae inside the
    overlap (never extrapolated); norms are divided by the reference range.
    """
    s, f, s_ref, f_ref = (np.asarray(a, dtype=float) for a in (s, f, s_ref, f_ref))
    if s.size < 2 or s_ref.size < 2:
        raise ValueError("profiles need at least two points")
    o1, o2 = s_ref.argsort(), s.argsort()
    s_ref, f_ref, s, f = s_ref[o1], f_ref[o1], s[o2], f[o2]
    lo, hi = max(s[0], s_ref[0]), min(s[-1], s_ref[-1])
    if not hi > lo:
        raise ValueError("profiles have disjoint abscissae")
    sel = (s_ref >= lo) & (s_ref <= hi)
    d = np.interp(s_ref[sel], s, f) - f_ref[sel]
    rng = float(np.ptp(f_ref))
    if rng == 0.0:
        rng = float(np.max(np.abs(f_ref))) or 1.0
    return {"L1": float(np.mean(np.abs(d))) / rng,
            "L2": float(np.sqrt(np.mean(d * d))) / rng,
            "Linf": float(np.max(np.abs(d))) / rng}


def relative_l1(f, f_ref) -> float:
    """sum |f - f_ref| / sum |f_ref| on identical abscissae."""
    f, f_ref = np.asarray(f, dtype=float), np.asarray(f_ref, dtype=float)
    return float(np.sum(np.abs(f - f_ref)) / np.sum(np.abs(f_ref)))

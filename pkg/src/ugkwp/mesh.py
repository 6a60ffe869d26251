"""Structured Cartesian meshes (1D or 2D, possibly stretched)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


def uniform_edges(lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n + 1)


def _geometric_edges(length: float, n: int, h0: float) -> np.ndarray:
    """Edges from 0 to ``length`` with first width ``h0`` growing geometrically."""
    if n == 1 or n * h0 >= length:
        return np.linspace(0.0, length, n + 1)
    f = lambda r: h0 * (r**n - 1.0) / (r - 1.0) - length
    hi = 2.0
    while f(hi) < 0:
        hi *= 2.0
    r = brentq(f, 1.0 + 1e-12, hi)
    widths = h0 * r ** np.arange(n)
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = length
    return edges


def clustered_edges(lo: float, hi: float, n: int, at: float, h0: float) -> np.ndarray:
    """Edges clustered geometrically around ``at`` with smallest width ``h0``.

    When ``at`` lies strictly inside the interval, the cells are split between
    the two sides so that both growth ratios are as close as possible.
    """
    if not lo <= at <= hi:
        raise ValueError("cluster point outside the interval")
    if at <= lo:
        return lo + _geometric_edges(hi - lo, n, h0)
    if at >= hi:
        return hi - _geometric_edges(hi - lo, n, h0)[::-1]
    best = None
    for nl in range(1, n):
        el = _geometric_edges(at - lo, nl, h0)
        er = _geometric_edges(hi - at, n - nl, h0)
        ratio_l = (el[-1] - el[-2]) / (el[-2] - el[-3]) if nl > 2 else np.inf
        ratio_r = (er[-1] - er[-2]) / (er[-2] - er[-3]) if n - nl > 2 else np.inf
        score = abs(ratio_l - ratio_r)
        if best is None or score < best[0]:
            best = (score, el, er)
    _, el, er = best
    return np.concatenate([at - el[::-1], at + er[1:]])


@dataclass
class Mesh:
    """Cartesian mesh; cell arrays have shape ``(nx, ny)`` with ``ny == 1`` in 1D."""

    edges: tuple

    def __post_init__(self):
        self.edges = tuple(np.asarray(e, dtype=float) for e in self.edges)
        if not 1 <= len(self.edges) <= 2:
            raise ValueError("only 1D and 2D meshes are supported")
        for e in self.edges:
            if e.size < 2 or np.any(np.diff(e) <= 0):
                raise ValueError("mesh edges must be strictly increasing with at least one cell")

    @property
    def dims(self) -> int:
        return len(self.edges)

    @property
    def shape(self) -> tuple:
        nx = self.edges[0].size - 1
        ny = self.edges[1].size - 1 if self.dims == 2 else 1
        return (nx, ny)

    @property
    def ncells(self) -> int:
        return self.shape[0] * self.shape[1]

    def widths(self, axis: int) -> np.ndarray:
        return np.diff(self.edges[axis])

    def centers(self, axis: int) -> np.ndarray:
        e = self.edges[axis]
        return 0.5 * (e[1:] + e[:-1])

    @property
    def volumes(self) -> np.ndarray:
        v = self.widths(0)[:, None]
        if self.dims == 2:
            v = v * self.widths(1)[None, :]
        return np.broadcast_to(v, self.shape).copy()

    def face_areas(self, axis: int) -> np.ndarray:
        """Areas of the faces normal to ``axis``; shape ``(n_axis + 1, n_other)``."""
        nx, ny = self.shape
        if self.dims == 1:
            return np.ones((nx + 1, 1))
        if axis == 0:
            return np.broadcast_to(self.widths(1)[None, :], (nx + 1, ny)).copy()
        return np.broadcast_to(self.widths(0)[:, None], (nx, ny + 1)).copy()

    def locate(self, pos: np.ndarray) -> np.ndarray:
        """Flat cell index (``ix * ny + iy``) of each position."""
        pos = np.atleast_2d(pos)
        nx, ny = self.shape
        ix = np.clip(np.searchsorted(self.edges[0], pos[:, 0], side="right") - 1, 0, nx - 1)
        if self.dims == 1:
            return ix
        iy = np.clip(np.searchsorted(self.edges[1], pos[:, 1], side="right") - 1, 0, ny - 1)
        return ix * ny + iy

    def cell_centers(self) -> np.ndarray:
        """Array ``(nx, ny, dims)`` of cell centers."""
        xc = np.broadcast_to(self.centers(0)[:, None], self.shape)
        if self.dims == 1:
            return xc[..., None].copy()
        yc = np.broadcast_to(self.centers(1)[None, :], self.shape)
        return np.stack([xc, yc], axis=-1)

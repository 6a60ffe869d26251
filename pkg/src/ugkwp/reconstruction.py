"""Limited piecewise-linear reconstruction of conservative fields.

Fields are carried on padded arrays ``(nx+2, ny+2, 5)`` (``(nx+2, 1, 5)`` in
1D) whose outer layer holds the ghost values from :mod:`ugkwp.boundary`.
Slopes are per unit length and may use nonuniform spacing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gas import physical_mask


def van_leer_slope(s_l, s_r):
    """Harmonic-mean limiter: 2 s_l s_r / (s_l + s_r) for same-sign slopes, else 0."""
    s_l = np.asarray(s_l, dtype=float)
    s_r = np.asarray(s_r, dtype=float)
    prod = s_l * s_r
    den = np.abs(s_l) + np.abs(s_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(prod > 0, 2.0 * prod / np.where(den > 0, den, 1.0) * np.sign(s_l), 0.0)
    return s


def to_local(W: np.ndarray, axis: int) -> np.ndarray:
    """Permute momentum components so the face normal comes first (an involution)."""
    if axis == 0:
        return W
    idx = [0, 2, 1, 3, 4]
    return W[..., idx]


def axis_slopes(P: np.ndarray, centers: np.ndarray, axis: int) -> np.ndarray:
    """Limited slopes along ``axis`` for every padded cell; zero on the ghost layer of that axis."""
    S = np.zeros_like(P)
    if P.shape[axis] < 3:
        return S
    c = centers.reshape((-1, 1, 1) if axis == 0 else (1, -1, 1))
    d = np.diff(P, axis=axis) / np.diff(c, axis=axis)
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    mid = [slice(None)] * 3
    lo[axis], hi[axis], mid[axis] = slice(0, -1), slice(1, None), slice(1, -1)
    S[tuple(mid)] = van_leer_slope(d[tuple(lo)], d[tuple(hi)])
    return S


def limited_slopes(P: np.ndarray, centers: list, widths: list) -> tuple:
    """Slopes along each active axis, with a positivity guard.

    A cell whose extrapolation to any of its face midpoints is unphysical gets
    all of its slopes zeroed.  Returns ``(slopes, n_guarded)``.
    """
    dims = len(centers)
    S = [axis_slopes(P, centers[a], a) for a in range(dims)]
    bad = np.zeros(P.shape[:2], dtype=bool)
    for a in range(dims):
        h = widths[a].reshape((-1, 1, 1) if a == 0 else (1, -1, 1))
        half = 0.5 * h * S[a]
        bad |= ~physical_mask(P + half) | ~physical_mask(P - half)
    bad &= physical_mask(P)
    for a in range(dims):
        S[a][bad] = 0.0
    return S, int(np.count_nonzero(bad))


@dataclass
class FaceStates:
    """Left/right states at the faces normal to one axis, in the face-local frame.

    Arrays have shape ``(n_axis + 1, n_other, 5)``.  ``*_n`` are normal slopes,
    ``*_t`` the in-plane tangential slopes (zero in 1D).
    """

    wl: np.ndarray
    wr: np.ndarray
    sl_n: np.ndarray
    sl_t: np.ndarray
    sr_n: np.ndarray
    sr_t: np.ndarray


def interface_states(P: np.ndarray, slopes: list, edges: list, axis: int) -> FaceStates:
    dims = len(edges)
    e = edges[axis]
    w = np.diff(e)
    cpad = np.r_[e[0] - 0.5 * w[0], 0.5 * (e[1:] + e[:-1]), e[-1] + 0.5 * w[-1]]
    if dims == 2:
        inner = (slice(None), slice(1, -1)) if axis == 0 else (slice(1, -1), slice(None))
    else:
        inner = (slice(None), slice(None))
    Pa = P[inner]
    Sn = slopes[axis][inner]
    St = slopes[1 - axis][inner] if dims == 2 else np.zeros_like(Pa)
    if axis == 1:
        Pa, Sn, St = (np.swapaxes(x, 0, 1) for x in (Pa, Sn, St))
    dl = (e - cpad[:-1])[:, None, None]
    dr = (e - cpad[1:])[:, None, None]
    wl = Pa[:-1] + Sn[:-1] * dl
    wr = Pa[1:] + Sn[1:] * dr
    return FaceStates(*(np.array(to_local(x, axis)) for x in (wl, wr, Sn[:-1], St[:-1], Sn[1:], St[1:])))

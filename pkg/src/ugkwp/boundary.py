"""Boundary conditions: ghost layers for the wave part, codes for particle tracking."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gas import GasModel
from .mesh import Mesh

FACES = ("left", "right", "bottom", "top")
FACE_AXIS = {"left": (0, 0), "right": (0, 1), "bottom": (1, 0), "top": (1, 1)}
KINDS = ("periodic", "reservoir", "outflow", "symmetry", "wall")

# particle-side codes
PERIODIC, OPEN, SPECULAR, WALL = 0, 1, 2, 3
_CODE = {"periodic": PERIODIC, "reservoir": OPEN, "outflow": OPEN, "symmetry": SPECULAR, "wall": WALL}


@dataclass
class BoundarySegment:
    """One boundary condition on (part of) a mesh face.

    ``state`` is the conservative reservoir state; ``wall_T``/``wall_U`` the
    wall temperature and velocity.  ``span`` restricts the segment to a range
    of the tangential coordinate (2D only).
    """

    face: str
    kind: str
    state: np.ndarray | None = None
    wall_T: float = 1.0
    wall_U: tuple = (0.0, 0.0, 0.0)
    span: tuple | None = None

    def __post_init__(self):
        if self.face not in FACES:
            raise ValueError(f"unknown face {self.face!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}; valid: {', '.join(KINDS)}")
        if self.kind == "reservoir" and self.state is None:
            raise ValueError("reservoir boundary needs a state")


@dataclass
class FaceTable:
    """Per-face-cell boundary data, ordered along the tangential axis."""

    kind: list
    code: np.ndarray
    state: np.ndarray
    wall_T: np.ndarray
    wall_U: np.ndarray


@dataclass
class Boundaries:
    segments: list = field(default_factory=list)

    def tables(self, mesh: Mesh) -> dict:
        out = {}
        faces = FACES if mesh.dims == 2 else FACES[:2]
        for face in faces:
            axis, _ = FACE_AXIS[face]
            if mesh.dims == 1:
                tang = np.zeros(1)
            else:
                tang = mesh.centers(1 - axis)
            n = tang.size
            kind = [None] * n
            code = np.full(n, -1, dtype=np.int64)
            state = np.zeros((n, 5))
            wT = np.ones(n)
            wU = np.zeros((n, 3))
            for seg in self.segments:
                if seg.face != face:
                    continue
                if seg.span is None:
                    sel = np.ones(n, dtype=bool)
                else:
                    sel = (tang >= seg.span[0]) & (tang < seg.span[1])
                if np.any(code[sel] >= 0):
                    raise ValueError(f"overlapping boundary segments on face {face!r}")
                for i in np.flatnonzero(sel):
                    kind[i] = seg.kind
                code[sel] = _CODE[seg.kind]
                if seg.state is not None:
                    state[sel] = seg.state
                wT[sel] = seg.wall_T
                wU[sel] = seg.wall_U
            if np.any(code < 0):
                raise ValueError(f"face {face!r} is not fully covered by boundary conditions")
            out[face] = FaceTable(kind, code, state, wT, wU)
        for lo, hi in (("left", "right"), ("bottom", "top")):
            if lo in out and ((out[lo].code == PERIODIC).any() or (out[hi].code == PERIODIC).any()):
                if not ((out[lo].code == PERIODIC).all() and (out[hi].code == PERIODIC).all()):
                    raise ValueError(f"periodic boundaries must cover both {lo!r} and {hi!r} entirely")
        return out


def _mirror(W, axis, wall_U=None, wall_T=None, gas=None):
    G = W.copy()
    if wall_U is None:
        G[..., 1 + axis] *= -1.0
        return G
    rho = W[..., 0:1]
    U = W[..., 1:4] / rho
    e_int = W[..., 4:5] / rho - 0.5 * np.sum(U * U, axis=-1, keepdims=True)
    T = e_int * 4.0 / (gas.K + 3) / 2.0
    Ug = 2.0 * wall_U - U
    Tg = np.maximum(2.0 * wall_T[..., None] - T, 0.5 * wall_T[..., None])
    G[..., 1:4] = rho * Ug
    G[..., 4:5] = rho * (0.5 * np.sum(Ug * Ug, axis=-1, keepdims=True) + (gas.K + 3) * Tg / 2.0)
    return G


def _ghost_for(face_tab: FaceTable, interior, opposite, axis, gas):
    """Ghost values for one face; ``interior``/``opposite`` have shape (n_tang, 5)."""
    G = interior.copy()
    for name in set(face_tab.kind):
        sel = np.array([k == name for k in face_tab.kind])
        if name == "periodic":
            G[sel] = opposite[sel]
        elif name == "reservoir":
            G[sel] = face_tab.state[sel]
        elif name == "outflow":
            G[sel] = interior[sel]
        elif name == "symmetry":
            G[sel] = _mirror(interior[sel], axis)
        elif name == "wall":
            G[sel] = _mirror(interior[sel], axis, face_tab.wall_U[sel], face_tab.wall_T[sel], gas)
    return G


def pad(W: np.ndarray, mesh: Mesh, tables: dict, gas: GasModel) -> np.ndarray:
    """Field with one ghost layer on each side of every active axis."""
    nx, ny = mesh.shape
    if mesh.dims == 1:
        P = np.empty((nx + 2, 1, W.shape[-1]))
        P[1:-1] = W
        P[0, 0] = _ghost_for(tables["left"], W[0], W[-1], 0, gas)[0]
        P[-1, 0] = _ghost_for(tables["right"], W[-1], W[0], 0, gas)[0]
        return P
    P = np.empty((nx + 2, ny + 2, W.shape[-1]))
    P[1:-1, 1:-1] = W
    P[0, 1:-1] = _ghost_for(tables["left"], W[0], W[-1], 0, gas)
    P[-1, 1:-1] = _ghost_for(tables["right"], W[-1], W[0], 0, gas)
    # bottom/top ghosts span the x-ghost columns too, which fills the corners
    bt, tt = tables["bottom"], tables["top"]
    ext = lambda tab: FaceTable([tab.kind[0]] + tab.kind + [tab.kind[-1]],
                                np.r_[tab.code[0], tab.code, tab.code[-1]],
                                np.r_[tab.state[:1], tab.state, tab.state[-1:]],
                                np.r_[tab.wall_T[0], tab.wall_T, tab.wall_T[-1]],
                                np.r_[tab.wall_U[:1], tab.wall_U, tab.wall_U[-1:]])
    P[:, 0] = _ghost_for(ext(bt), P[:, 1], P[:, -2], 1, gas)
    P[:, -1] = _ghost_for(ext(tt), P[:, -2], P[:, 1], 1, gas)
    return P


def is_periodic(tables: dict, axis: int) -> bool:
    face = "left" if axis == 0 else "bottom"
    return face in tables and bool(np.all(tables[face].code == PERIODIC))


def padded_widths(mesh: Mesh, axis: int, periodic: bool = False) -> np.ndarray:
    """Cell widths including the ghost layer (a periodic ghost copies the opposite cell)."""
    w = mesh.widths(axis)
    return np.r_[w[-1], w, w[0]] if periodic else np.r_[w[0], w, w[-1]]


def padded_centers(mesh: Mesh, axis: int, periodic: bool = False) -> np.ndarray:
    e = mesh.edges[axis]
    w = padded_widths(mesh, axis, periodic)
    c = 0.5 * (e[1:] + e[:-1])
    return np.r_[e[0] - 0.5 * w[0], c, e[-1] + 0.5 * w[-1]]

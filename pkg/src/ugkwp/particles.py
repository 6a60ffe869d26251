"""Simulation particles: storage, collision-time sampling, Maxwellian sampling and streaming.

Particles are kept in a structure-of-arrays pool.  Every particle carries a
mass weight, a position (two components; the second is unused in 1D), a
velocity (three components), an internal energy per unit mass and the first
collision time drawn for the current step.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .boundary import OPEN, PERIODIC, SPECULAR, WALL, FaceTable
from .gas import GasModel, physical_mask, to_primitive
from .mesh import Mesh

COLLISIONLESS, COLLISIONAL, FRESH = 0, 1, 2

# streams used with RngStream
STREAM_TC, STREAM_SAMPLE, STREAM_WALL, STREAM_INIT, STREAM_INJECT = 1, 2, 3, 4, 5


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: equal (seed, stream, counter) give equal draws."""

    seed: int
    stream: int
    counter: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([self.seed, self.stream, self.counter])
        return np.random.Generator(np.random.Philox(ss))

    def int_seed(self) -> int:
        ss = np.random.SeedSequence([self.seed, self.stream, self.counter])
        return int(ss.generate_state(1, dtype=np.uint32)[0])


_FIELDS = (("mass", (), np.float64), ("pos", (2,), np.float64), ("vel", (3,), np.float64),
           ("eint", (), np.float64), ("tc", (), np.float64), ("cell", (), np.int64), ("tag", (), np.int8))


@dataclass
class ParticlePool:
    """Contiguous particle arrays; eliminated particles are compacted away."""

    mass: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pos: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    vel: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    eint: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tc: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cell: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    tag: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))

    def __len__(self) -> int:
        return self.mass.size

    def append(self, other: "ParticlePool") -> None:
        for name, _, _ in _FIELDS:
            setattr(self, name, np.concatenate([getattr(self, name), getattr(other, name)]))

    def keep(self, mask: np.ndarray) -> None:
        for name, _, _ in _FIELDS:
            setattr(self, name, getattr(self, name)[mask])

    def copy(self) -> "ParticlePool":
        return ParticlePool(**{name: getattr(self, name).copy() for name, _, _ in _FIELDS})

    def content(self, ncells: int, mask: np.ndarray | None = None) -> np.ndarray:
        """Per-cell sums of (m, m v, m (v^2/2 + e)); shape ``(ncells, 5)``."""
        m, v, e, c = self.mass, self.vel, self.eint, self.cell
        if mask is not None:
            m, v, e, c = m[mask], v[mask], e[mask], c[mask]
        out = np.empty((ncells, 5))
        out[:, 0] = np.bincount(c, m, ncells)
        for k in range(3):
            out[:, 1 + k] = np.bincount(c, m * v[:, k], ncells)
        out[:, 4] = np.bincount(c, m * (0.5 * np.sum(v * v, axis=1) + e), ncells)
        return out

    def check(self, mesh: Mesh) -> bool:
        """Every particle sits in the cell it claims (debug check)."""
        return bool(np.all(mesh.locate(self.pos[:, :mesh.dims]) == self.cell))


def sample_tc(tau, rng: np.random.Generator, size=None) -> np.ndarray:
    """First collision times t_c = -tau ln(eta), eta uniform on (0, 1]."""
    tau = np.asarray(tau, dtype=float)
    if np.any(~(tau > 0)):
        raise ValueError("tau must be positive")
    size = tau.shape if size is None else size
    eta = rng.random(size)
    eta = np.where(eta > 0, eta, np.finfo(float).tiny)
    return -tau * np.log(eta)


def classify(pool: ParticlePool, dt: float, tau_cell: np.ndarray, rng: np.random.Generator) -> tuple:
    """Draw fresh collision times and tag particles; returns (n_collisionless, n_collisional)."""
    if len(pool) == 0:
        return 0, 0
    pool.tc = sample_tc(tau_cell[pool.cell], rng)
    free = pool.tc >= dt
    pool.tag = np.where(free, COLLISIONLESS, COLLISIONAL).astype(np.int8)
    n_free = int(np.count_nonzero(free))
    return n_free, len(pool) - n_free


@dataclass
class SamplingStats:
    batches: int = 0
    fallbacks: int = 0
    unsampled_mass: float = 0.0


def consistent_transform(mass, vel, eint, group, U_target, E_target, ngroups: int,
                         stats: SamplingStats | None = None):
    """Shift and scale velocities so each group matches its target momentum and energy exactly.

    ``U_target`` is the bulk velocity and ``E_target`` the total energy per
    unit mass of each group; the group mass is taken as the batch mass.  The
    transform is v' = b (v - mean(v)) + U.  Returns the new velocities.
    """
    mass = np.asarray(mass, dtype=float)
    M = np.bincount(group, mass, ngroups)
    Mi = np.where(M > 0, M, 1.0)
    mean = np.stack([np.bincount(group, mass * vel[:, k], ngroups) for k in range(3)], axis=1) / Mi[:, None]
    d = vel - mean[group]
    c1 = 0.5 * np.bincount(group, mass * np.sum(d * d, axis=1), ngroups)
    c3 = np.bincount(group, mass * eint, ngroups) + 0.5 * M * np.sum(U_target * U_target, axis=1) - M * E_target
    ok = (c1 > 0) & (-c3 >= 0)
    exact = (c1 == 0) & (np.abs(c3) <= 1e-13 * np.abs(M * E_target))
    b = np.ones(ngroups)
    b[ok] = np.sqrt(-c3[ok] / c1[ok])
    fallback = ~ok & ~exact & (M > 0)
    if stats is not None:
        stats.fallbacks += int(np.count_nonzero(fallback))
    return b[group, None] * d + U_target[group]


def sample_maxwellian_batch(W_target: np.ndarray, total_mass: np.ndarray, cells: np.ndarray, mesh: Mesh,
                            m_p: float, gas: GasModel, rng: np.random.Generator,
                            stats: SamplingStats | None = None) -> ParticlePool:
    """Sample particles from the Maxwellians of ``W_target`` (per-volume states of ``cells``).

    Each cell gets N = round(total_mass / m_p) particles of equal mass
    total_mass / N, so the sampled mass is exact; a single particle cannot
    match both momentum and temperature, so N = 1 is raised to 2.  Cells with
    N = 0 are left unsampled and their mass stays with the wave part.
    """
    W_target = np.atleast_2d(W_target)
    total_mass = np.asarray(total_mass, dtype=float)
    cells = np.asarray(cells, dtype=np.int64)
    if np.any(total_mass < 0):
        raise ValueError("total_mass must be non-negative")
    if m_p <= 0:
        raise ValueError("m_p must be positive")
    N = np.rint(total_mass / m_p).astype(np.int64)
    N[N == 1] = 2
    if stats is not None:
        stats.unsampled_mass += float(total_mass[N == 0].sum())
    sel = N > 0
    W_target, total_mass, cells, N = W_target[sel], total_mass[sel], cells[sel], N[sel]
    ng = cells.size
    if ng == 0:
        return ParticlePool()
    prim = to_primitive(W_target, gas)
    group = np.repeat(np.arange(ng), N)
    n = group.size
    mass = (total_mass / N)[group]
    sigma = np.sqrt(0.5 / prim.lam)
    vel = prim.U[group] + sigma[group, None] * rng.standard_normal((n, 3))
    eint = (gas.K / (4.0 * prim.lam))[group]
    E_target = W_target[:, 4] / W_target[:, 0]
    vel = consistent_transform(mass, vel, eint, group, prim.U, E_target, ng, stats)
    if stats is not None:
        stats.batches += ng
    nx, ny = mesh.shape
    ix, iy = cells // ny, cells % ny
    pos = np.zeros((n, 2))
    ex = mesh.edges[0]
    pos[:, 0] = ex[ix][group] + rng.random(n) * np.diff(ex)[ix][group]
    if mesh.dims == 2:
        ey = mesh.edges[1]
        pos[:, 1] = ey[iy][group] + rng.random(n) * np.diff(ey)[iy][group]
    return ParticlePool(mass, pos, vel, eint, np.zeros(n), cells[group], np.full(n, FRESH, dtype=np.int8))


def sample_hydro(W_h: np.ndarray, volumes: np.ndarray, dt: float, tau: np.ndarray, mode: str, mesh: Mesh,
                 m_p: float, gas: GasModel, rng: np.random.Generator,
                 stats: SamplingStats | None = None) -> ParticlePool:
    """Resample hydro-particles from per-volume hydro states ``W_h`` (flattened cells).

    ``ugkp`` samples all hydro mass, ``ugkwp`` only the share e^{-dt/tau}
    that will travel freely through the next step.  Cells whose clamped
    hydro state has no thermal energy are not sampled.
    """
    if mode == "ugkp":
        frac = np.ones_like(tau)
    elif mode == "ugkwp":
        frac = np.exp(-dt / tau)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    mass = frac * W_h[:, 0] * volumes
    # clamped cells without thermal energy stay entirely in the wave part
    ok = physical_mask(W_h)
    if stats is not None:
        stats.unsampled_mass += float(mass[~ok & (mass > 0)].sum())
    cells = np.flatnonzero(ok & (mass > 0))
    return sample_maxwellian_batch(W_h[cells], mass[cells], cells, mesh, m_p, gas, rng, stats)


def inject_open(mesh: Mesh, faces: dict, dt: float, m_p: float, gas: GasModel,
                rng: np.random.Generator) -> tuple:
    """Particles entering through open faces during one step.

    ``faces`` maps a face name to ``(W_ghost, phi, tau)`` per face cell, where
    ``W_ghost`` is the outside state, ``phi`` the fraction of it carried by
    particles and ``tau`` its collision time.  The outside is filled with
    particles over a layer deep enough for the fastest relevant speeds; those
    that reach the face before their first collision enter the domain.
    Returns ``(pool, t_entry)`` with the particles placed on the face.
    """
    parts, t_in = [], []
    nx, ny = mesh.shape
    for face, (Wg, phi, tau) in faces.items():
        axis = 0 if face in ("left", "right") else 1
        hi = face in ("right", "top")
        s = -1.0 if hi else 1.0                      # inward normal sign
        prim = to_primitive(Wg, gas)
        sig = np.sqrt(0.5 / prim.lam)
        depth = dt * (np.abs(prim.U[:, axis]) + 6.0 * np.sqrt(2.0) * sig)
        if mesh.dims == 2:
            te = mesh.edges[1 - axis]
            area = np.diff(te)
        else:
            te = np.array([0.0, 1.0])
            area = np.ones(1)
        mass = np.clip(phi, 0.0, 1.0) * prim.rho * depth * area
        N = np.floor(mass / m_p + rng.random(mass.size)).astype(np.int64)
        j = np.repeat(np.arange(mass.size), N)
        n = j.size
        if n == 0:
            continue
        vel = prim.U[j] + sig[j, None] * rng.standard_normal((n, 3))
        d = rng.random(n) * depth[j]
        tc = sample_tc(tau[j], rng)
        un = s * vel[:, axis]
        with np.errstate(divide="ignore"):
            t_e = np.where(un > 0, d / np.where(un > 0, un, 1.0), np.inf)
        ok = t_e < np.minimum(tc, dt)
        j, vel, tc, t_e = j[ok], vel[ok], tc[ok], t_e[ok]
        n = j.size
        if n == 0:
            continue
        pos = np.zeros((n, 2))
        e_ax = mesh.edges[axis]
        pos[:, axis] = e_ax[-1] if hi else e_ax[0]
        cidx = np.full(n, (e_ax.size - 2) if hi else 0, dtype=np.int64)
        if mesh.dims == 2:
            t0 = te[j] + rng.random(n) * area[j]
            # tangential drift while outside, kept inside the face span
            t1 = np.clip(t0 + vel[:, 1 - axis] * t_e, te[0], np.nextafter(te[-1], te[0]))
            pos[:, 1 - axis] = t1
            k = np.clip(np.searchsorted(te, t1, side="right") - 1, 0, te.size - 2)
            cell = cidx * ny + k if axis == 0 else k * ny + cidx
        else:
            cell = cidx * ny
        tag = np.where(tc >= dt, COLLISIONLESS, COLLISIONAL).astype(np.int8)
        eint = (gas.K / (4.0 * prim.lam))[j]
        parts.append(ParticlePool(np.full(n, m_p), pos, vel, eint, tc, cell, tag))
        t_in.append(t_e)
    pool = ParticlePool()
    for p in parts:
        pool.append(p)
    return pool, (np.concatenate(t_in) if t_in else np.zeros(0))


@numba.njit(cache=True)
def _wall_emit(vel, side, axis, lam, Uw):
    s = 1.0 if side == 0 else -1.0
    sig = np.sqrt(0.5 / lam)
    for k in range(3):
        vel[k] = Uw[k] + sig * np.random.standard_normal()
    vel[axis] = s * np.sqrt(-np.log(1.0 - np.random.random()) / lam)


@numba.njit(cache=True)
def _track(pos, vel, eint, mass, tfly, cell, alive, ex, ey, dims,
           code_x, Tw_x, Uw_x, code_y, Tw_y, Uw_y, K, seed, out_acc, wall_acc):
    np.random.seed(seed)
    nx = ex.size - 1
    ny = ey.size - 1
    err = 0
    for p in range(mass.size):
        t = tfly[p]
        ix = cell[p] // ny
        iy = cell[p] % ny
        x = pos[p, 0]
        y = pos[p, 1]
        it = 0
        while t > 0.0:
            it += 1
            if it > 100000:
                err = 2
                break
            vx = vel[p, 0]
            vy = vel[p, 1]
            tx = np.inf
            if vx > 0.0:
                tx = max((ex[ix + 1] - x) / vx, 0.0)
            elif vx < 0.0:
                tx = max((ex[ix] - x) / vx, 0.0)
            ty = np.inf
            if dims == 2:
                if vy > 0.0:
                    ty = max((ey[iy + 1] - y) / vy, 0.0)
                elif vy < 0.0:
                    ty = max((ey[iy] - y) / vy, 0.0)
            if tx >= t and ty >= t:
                x += vx * t
                if dims == 2:
                    y += vy * t
                t = 0.0
                break
            if tx <= ty:
                axis = 0
                dtc = tx
                side = 1 if vx > 0.0 else 0
            else:
                axis = 1
                dtc = ty
                side = 1 if vy > 0.0 else 0
            x += vx * dtc
            if dims == 2:
                y += vy * dtc
            t -= dtc
            if axis == 0:
                ni = ix + 1 if side == 1 else ix - 1
                x = ex[ix + 1] if side == 1 else ex[ix]
                if 0 <= ni < nx:
                    ix = ni
                    continue
                code = code_x[side, iy]
                lam = 0.5 / Tw_x[side, iy]
                Uw = Uw_x[side, iy]
            else:
                ni = iy + 1 if side == 1 else iy - 1
                y = ey[iy + 1] if side == 1 else ey[iy]
                if 0 <= ni < ny:
                    iy = ni
                    continue
                code = code_y[side, ix]
                lam = 0.5 / Tw_y[side, ix]
                Uw = Uw_y[side, ix]
            if code == PERIODIC:
                if axis == 0:
                    ix = 0 if side == 1 else nx - 1
                    x = ex[0] if side == 1 else ex[nx]
                else:
                    iy = 0 if side == 1 else ny - 1
                    y = ey[0] if side == 1 else ey[ny]
            elif code == OPEN:
                m = mass[p]
                out_acc[0] += m
                e = 0.0
                for k in range(3):
                    out_acc[1 + k] += m * vel[p, k]
                    e += vel[p, k] * vel[p, k]
                out_acc[4] += m * (0.5 * e + eint[p])
                alive[p] = False
                break
            elif code == SPECULAR:
                wall_acc[1 + axis] -= 2.0 * mass[p] * vel[p, axis]
                vel[p, axis] = -vel[p, axis]
            elif code == WALL:
                m = mass[p]
                e0 = 0.5 * (vel[p, 0] ** 2 + vel[p, 1] ** 2 + vel[p, 2] ** 2) + eint[p]
                for k in range(3):
                    wall_acc[1 + k] -= m * vel[p, k]
                _wall_emit(vel[p], side, axis, lam, Uw)
                eint[p] = K * 0.5 / (2.0 * lam)
                e1 = 0.5 * (vel[p, 0] ** 2 + vel[p, 1] ** 2 + vel[p, 2] ** 2) + eint[p]
                for k in range(3):
                    wall_acc[1 + k] += m * vel[p, k]
                wall_acc[4] += m * (e1 - e0)
            else:
                err = 1
                alive[p] = False
                break
        pos[p, 0] = x
        pos[p, 1] = y
        cell[p] = ix * ny + iy
    return err


@dataclass
class StreamResult:
    """Per-cell particle tallies of one step (content, not per volume).

    ``net = after - before`` is the particle net flux.  ``out`` is what left
    through open boundaries, ``inflow`` what entered through them and ``wall``
    what walls and symmetry planes added.  By construction ``net.sum(0) + out - wall - inflow == 0``.
    """

    before: np.ndarray
    after: np.ndarray
    out: np.ndarray
    wall: np.ndarray
    inflow: np.ndarray = field(default_factory=lambda: np.zeros(5))

    @property
    def net(self) -> np.ndarray:
        return self.after - self.before


def _face_arrays(tables: dict, mesh: Mesh):
    nx, ny = mesh.shape

    def pack(lo: FaceTable, hi: FaceTable):
        return (np.stack([lo.code, hi.code]).astype(np.int64), np.stack([lo.wall_T, hi.wall_T]),
                np.stack([lo.wall_U, hi.wall_U]))

    cx, tx, ux = pack(tables["left"], tables["right"])
    if mesh.dims == 2:
        cy, ty, uy = pack(tables["bottom"], tables["top"])
    else:
        cy, ty, uy = np.zeros((2, nx), np.int64), np.ones((2, nx)), np.zeros((2, nx, 3))
    return cx, tx, ux, cy, ty, uy


def stream_and_tally(pool: ParticlePool, dt: float, mesh: Mesh, tables: dict, gas: GasModel,
                     rng: RngStream, inject: ParticlePool | None = None,
                     t_entry: np.ndarray | None = None) -> StreamResult:
    """Move particles for one step and return the cell tallies.

    Collisionless particles fly for ``dt``, collisional ones for ``t_c``; the
    latter are counted at their stopping cell and then removed from the pool.
    ``inject`` holds particles entering through open faces at times
    ``t_entry`` (see :func:`inject_open`); they are not part of ``before``.
    """
    nc = mesh.ncells
    before = pool.content(nc)
    out = np.zeros(5)
    wall = np.zeros(5)
    inflow = np.zeros(5)
    n_old = len(pool)
    if inject is not None and len(inject):
        inflow = inject.content(nc).sum(0)
        pool.append(inject)
    if len(pool):
        tfly = np.minimum(pool.tc, dt)
        if len(pool) > n_old:
            tfly[n_old:] -= t_entry
        alive = np.ones(len(pool), dtype=bool)
        ey = mesh.edges[1] if mesh.dims == 2 else np.array([0.0, 1.0])
        cx, tx, ux, cy, ty, uy = _face_arrays(tables, mesh)
        err = _track(pool.pos, pool.vel, pool.eint, pool.mass, tfly, pool.cell, alive,
                     mesh.edges[0], ey, mesh.dims, cx, tx, ux, cy, ty, uy,
                     float(gas.K), rng.int_seed(), out, wall)
        if err == 1:
            raise RuntimeError("particle left the domain through a face without a boundary condition")
        if err == 2:
            raise RuntimeError("particle tracking did not terminate")
        pool.keep(alive)
    after = pool.content(nc)
    pool.keep(pool.tag != COLLISIONAL)
    return StreamResult(before, after, out, wall, inflow)


def correct_state(W: np.ndarray) -> tuple:
    """Clamp density at zero and total energy at the kinetic energy; returns (W, n_changed)."""
    W = W.copy()
    rho = W[..., 0]
    neg = rho < 0
    W[neg] = 0.0
    rho = W[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        kin = np.where(rho > 0, 0.5 * np.sum(W[..., 1:4] ** 2, axis=-1) / np.where(rho > 0, rho, 1.0), 0.0)
    low = W[..., 4] < kin
    W[..., 4] = np.where(low, kin, W[..., 4])
    return W, int(np.count_nonzero(neg | low))


def hydro_quantities(W_new: np.ndarray, pool: ParticlePool, volumes: np.ndarray,
                     stats: SamplingStats | None = None) -> tuple:
    """Hydro state W_h = W - (free particle content)/|cell| per flattened cell.

    Where particle noise makes W_h unphysical, the free particles of that cell
    are rescaled in mass and shifted/scaled in velocity so that they carry the
    share (1 - f) W with f = clip(rho_h / rho, 0, 1); W_h is then f W.  The
    total content stays exactly W.  Returns ``(W_h, n_reconciled)``.
    """
    nc = W_new.shape[0]
    Wp = pool.content(nc) / volumes[:, None]
    W_h = W_new - Wp
    tiny = np.all(np.abs(W_h) <= 1e-13 * np.abs(W_new).max(axis=1, keepdims=True), axis=1)
    bad = ~physical_mask(W_h) & (Wp[:, 0] > 0) & ~tiny
    n_bad = int(np.count_nonzero(bad))
    if n_bad == 0:
        return W_h, 0
    cells = np.flatnonzero(bad)
    f = np.clip(W_h[cells, 0] / W_new[cells, 0], 0.0, 1.0)
    sel = bad[pool.cell]
    idx = np.flatnonzero(sel)
    # compact group ids over the bad cells
    gid = np.full(nc, -1, dtype=np.int64)
    gid[cells] = np.arange(cells.size)
    group = gid[pool.cell[idx]]
    scale = (1.0 - f) * W_new[cells, 0] * volumes[cells] / (Wp[cells, 0] * volumes[cells])
    pool.mass[idx] *= scale[group]
    U = W_new[cells, 1:4] / W_new[cells, 0:1]
    E = W_new[cells, 4] / W_new[cells, 0]
    pool.vel[idx] = consistent_transform(pool.mass[idx], pool.vel[idx], pool.eint[idx], group, U, E,
                                         cells.size, stats)
    W_h[cells] = f[:, None] * W_new[cells]
    return W_h, n_bad

"""Time stepping for the wave-particle (ugkwp), all-particle (ugkp) and pure-wave (gks) schemes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import Boundaries, is_periodic, pad, padded_centers, padded_widths
from .gas import (
    GasModel,
    UnphysicalStateError,
    relaxation_time,
    sound_speed,
    to_primitive,
)
from .mesh import Mesh
from .moments import a_from_slope, interface_state, maxwell_moments, time_derivative_coeff
from .particles import (
    STREAM_SAMPLE,
    STREAM_TC,
    STREAM_INJECT,
    STREAM_WALL,
    ParticlePool,
    RngStream,
    SamplingStats,
    classify,
    correct_state,
    hydro_quantities,
    inject_open,
    sample_hydro,
    stream_and_tally,
)
from .reconstruction import FaceStates, interface_states, limited_slopes, to_local
from .wave_flux import (
    ExpansionCoeffs,
    Wall,
    flux_diffuse_wall,
    flux_equilibrium,
    flux_hydro_transport,
    one_sided,
    time_coeffs,
)

MODES = ("ugkwp", "ugkp", "gks")


class NumericalAbort(RuntimeError):
    """Raised when the solution becomes non-finite; ``state`` is the last good state."""

    def __init__(self, msg, state):
        super().__init__(msg)
        self.state = state


@dataclass
class Diagnostics:
    corrections: int = 0          # clamps of the cell-averaged state
    hydro_corrections: int = 0    # clamps of the hydro quantities
    wave_floors: int = 0          # wave-part cells that needed a floor
    slope_guards: int = 0
    tau_clamped: int = 0
    sampling: SamplingStats = field(default_factory=SamplingStats)
    n_particles: int = 0
    n_collisionless: int = 0
    n_collisional: int = 0
    sampled_mass: float = 0.0
    sampled_cell_mass: np.ndarray | None = None   # per cell, last resampling
    residual: float = float("nan")


@dataclass
class SimState:
    mesh: Mesh
    gas: GasModel
    boundaries: Boundaries
    W: np.ndarray                       # (nx, ny, 5) conservative, per volume
    mode: str = "ugkwp"
    m_p: float = 1.0
    cfl: float = 0.9
    seed: int = 0
    shock_dissipation: bool = True
    tau_floor: float = 1e-12
    pool: ParticlePool = field(default_factory=ParticlePool)
    time: float = 0.0
    step: int = 0
    diag: Diagnostics = field(default_factory=Diagnostics)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; valid: {', '.join(MODES)}")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.m_p <= 0:
            raise ValueError("m_p must be positive")
        self.W = np.asarray(self.W, dtype=float).reshape(self.mesh.shape + (5,))
        self.tables = self.boundaries.tables(self.mesh)
        self.volumes = self.mesh.volumes.reshape(-1)

    def particle_state(self) -> np.ndarray:
        """Per-volume content of all live particles, shape (nx, ny, 5)."""
        return (self.pool.content(self.mesh.ncells) / self.volumes[:, None]).reshape(self.W.shape)

    def cell_tau(self, W=None) -> np.ndarray:
        W = self.W if W is None else W
        return relaxation_time(to_primitive(W, self.gas), self.gas)

    def copy(self) -> "SimState":
        s = SimState(self.mesh, self.gas, self.boundaries, self.W.copy(), self.mode, self.m_p, self.cfl,
                     self.seed, self.shock_dissipation, self.tau_floor, self.pool.copy(), self.time, self.step)
        s.diag = Diagnostics(**{k: getattr(self.diag, k) for k in self.diag.__dataclass_fields__})
        s.diag.sampling = SamplingStats(**vars(self.diag.sampling))
        return s


def compute_dt(state: SimState, cfl: float | None = None, margin: float = 0.0) -> float:
    """cfl / max over cells of sum_axes (|U_a| + c + margin * sqrt(T)) / dx_a.

    In 1D this is cfl * min dx / (|U| + c + ...); in 2D the axis rates add up,
    as required for an unsplit update.
    """
    cfl = state.cfl if cfl is None else cfl
    if not 0.0 < cfl < 1.0:
        raise ValueError(f"cfl must lie in (0, 1), got {cfl}")
    if state.mesh.ncells == 0:
        raise ValueError("empty mesh")
    prim = to_primitive(state.W, state.gas)
    c = sound_speed(prim, state.gas) + margin * np.sqrt(prim.T)
    rate = np.zeros(state.mesh.shape)
    for a in range(state.mesh.dims):
        h = state.mesh.widths(a).reshape((-1, 1) if a == 0 else (1, -1))
        rate = rate + (np.abs(prim.U[..., a]) + c) / h
    return cfl / float(np.max(rate))


def apply_correction(W: np.ndarray, diag: Diagnostics | None = None) -> np.ndarray:
    """Clamp density at zero and total energy at the kinetic energy."""
    W, n = correct_state(W)
    if diag is not None:
        diag.corrections += n
    return W


def _wave_part(W: np.ndarray, Wp: np.ndarray, gas: GasModel, diag: Diagnostics) -> np.ndarray:
    """Hydro (wave) field W - W^P made usable as a Maxwellian field.

    Cells whose wave density is negligible get a vanishing copy of the cell
    state; cells whose wave temperature collapsed get the cell temperature.
    """
    Wh, _ = correct_state(W - Wp)
    rho, rho_h = W[..., 0], Wh[..., 0]
    tiny = rho_h <= 1e-12 * rho
    with np.errstate(divide="ignore", invalid="ignore"):
        kin = 0.5 * np.sum(Wh[..., 1:4] ** 2, axis=-1) / rho_h
        e_h = (Wh[..., 4] - kin) / rho_h
        e = (W[..., 4] - 0.5 * np.sum(W[..., 1:4] ** 2, axis=-1) / rho) / rho
    cold = ~tiny & ~(e_h > 1e-6 * e)
    Wh[cold, 4] = kin[cold] + rho_h[cold] * e[cold]
    Wh[tiny] = 1e-12 * W[tiny]
    diag.wave_floors += int(np.count_nonzero(cold))
    return Wh


@dataclass
class _Side:
    W: np.ndarray          # padded field
    slopes: list


def _prep(field_W, state: SimState):
    mesh = state.mesh
    P = pad(field_W, mesh, state.tables, state.gas)
    per = [is_periodic(state.tables, a) for a in range(mesh.dims)]
    cen = [padded_centers(mesh, a, per[a]) for a in range(mesh.dims)]
    wid = [padded_widths(mesh, a, per[a]) for a in range(mesh.dims)]
    S, n = limited_slopes(P, cen, wid)
    state.diag.slope_guards += n
    # a periodic ghost is a copy of the opposite cell, slopes included
    for a in range(mesh.dims):
        if per[a]:
            for Sa in S:
                if a == 0:
                    Sa[0], Sa[-1] = Sa[-2], Sa[1]
                else:
                    Sa[:, 0], Sa[:, -1] = Sa[:, -2], Sa[:, 1]
    return _Side(P, S), cen


def _mirror_local(W):
    W = W.copy()
    W[..., 1] *= -1.0
    return W


def _face_kinds(state: SimState, axis: int) -> tuple:
    if state.mesh.dims == 1:
        lo, hi = state.tables["left"], state.tables["right"]
    else:
        lo, hi = (state.tables["left"], state.tables["right"]) if axis == 0 else (state.tables["bottom"], state.tables["top"])
    return lo, hi


def _apply_reflective(fs: FaceStates, lo, hi) -> None:
    """Symmetry and wall faces: the ghost-side face state mirrors the interior face state."""
    for end, tab in ((0, lo), (-1, hi)):
        sel = np.array([k in ("symmetry", "wall") for k in tab.kind])
        if not sel.any():
            continue
        if end == 0:
            fs.wl[0, sel] = _mirror_local(fs.wr[0, sel])
            fs.sl_n[0, sel] = -_mirror_local(fs.sr_n[0, sel])
            fs.sl_t[0, sel] = _mirror_local(fs.sr_t[0, sel])
        else:
            fs.wr[-1, sel] = _mirror_local(fs.wl[-1, sel])
            fs.sr_n[-1, sel] = -_mirror_local(fs.sl_n[-1, sel])
            fs.sr_t[-1, sel] = _mirror_local(fs.sl_t[-1, sel])


def _apply_open(fw: FaceStates, fs: FaceStates, lo, hi, phi: tuple) -> None:
    """Open faces: the ghost side of the wave field is the share ``1 - phi`` of the
    outside state; the rest enters as injected particles."""
    for end, tab, ph in ((0, lo, phi[0]), (-1, hi, phi[1])):
        sel = np.array([k in ("reservoir", "outflow") for k in tab.kind])
        if not sel.any():
            continue
        w = np.maximum(1.0 - ph[sel], 1e-12)[:, None]
        names = ("wl", "sl_n", "sl_t") if end == 0 else ("wr", "sr_n", "sr_t")
        for a in names:
            getattr(fw, a)[end, sel] = w * getattr(fs, a)[end, sel]


def _open_faces(state: SimState) -> dict:
    """Outside state, particle share and collision time for every open face with such cells.

    The particle share is that of the adjacent interior cell at the start of
    the step.  Returns ``{face: (W_ghost, phi, tau, sel)}`` over all face cells.
    """
    mesh = state.mesh
    P = pad(state.W, mesh, state.tables, state.gas)
    Wp = state.particle_state()
    out = {}
    for face, tab in state.tables.items():
        sel = np.array([k in ("reservoir", "outflow") for k in tab.kind])
        if not sel.any():
            continue
        if mesh.dims == 1:
            Wg = P[0 if face == "left" else -1]
            idx = (0 if face == "left" else -1, slice(None))
        else:
            Wg = {"left": P[0, 1:-1], "right": P[-1, 1:-1], "bottom": P[1:-1, 0], "top": P[1:-1, -1]}[face]
            idx = {"left": (0, slice(None)), "right": (-1, slice(None)),
                   "bottom": (slice(None), 0), "top": (slice(None), -1)}[face]
        if state.mode == "ugkp":
            phi = np.ones(sel.size)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                phi = np.clip(np.nan_to_num(Wp[idx][..., 0] / state.W[idx][..., 0]), 0.0, 1.0)
        tau = np.ones(sel.size)
        tau[sel] = relaxation_time(to_primitive(Wg[sel], state.gas), state.gas)
        out[face] = (Wg, np.where(sel, phi, 0.0), tau, sel)
    return out


def interface_fluxes(state: SimState, W_total: np.ndarray, W_wave: np.ndarray | None, dt: float,
                     axis: int, gks: bool = False, open_faces: dict | None = None) -> np.ndarray:
    """Time-integrated wave flux (F_g + F_f^h) through the faces normal to ``axis``, global frame.

    Returns an array ``(n_axis + 1, n_other, 5)`` per unit face area, positive
    along +axis.  ``W_wave`` is the hydro field for the free-transport part
    (``None``: no analytic free transport).
    """
    gas = state.gas
    mesh = state.mesh
    tot, cen = _prep(W_total, state)
    fs = interface_states(tot.W, tot.slopes, list(mesh.edges), axis)
    lo, hi = _face_kinds(state, axis)
    _apply_reflective(fs, lo, hi)

    # cell-center values next to each face, local frame
    P = tot.W
    if mesh.dims == 2:
        P = P[:, 1:-1] if axis == 0 else np.swapaxes(P[1:-1, :], 0, 1)
    Pc = to_local(P, axis)
    e = mesh.edges[axis]
    c = cen[axis]
    dl = (e - c[:-1])[:, None, None]
    dr = (c[1:] - e)[:, None, None]

    prim_l = to_primitive(fs.wl, gas)
    prim_r = to_primitive(fs.wr, gas)
    mt_l = maxwell_moments(prim_l, gas)
    mt_r = maxwell_moments(prim_r, gas)
    W0 = interface_state(prim_l, prim_r, gas, mt_l, mt_r)
    prim0 = to_primitive(W0, gas)
    mt0 = maxwell_moments(prim0, gas)
    a_l = a_from_slope(prim0, (W0 - Pc[:-1]) / dl, gas)
    a_r = a_from_slope(prim0, (Pc[1:] - W0) / dr, gas)
    # reflective faces: use the mirrored interior slope so the ghost cell value does not enter
    for end, tab in ((0, lo), (-1, hi)):
        sel = np.array([k in ("symmetry", "wall") for k in tab.kind])
        if sel.any():
            if end == 0:
                a_l[0, sel] = a_from_slope(prim0[0, sel], fs.sl_n[0, sel], gas)
            else:
                a_r[-1, sel] = a_from_slope(prim0[-1, sel], fs.sr_n[-1, sel], gas)
    b = a_from_slope(prim0, 0.5 * (fs.sl_t + fs.sr_t), gas)
    cz = np.zeros_like(b)
    A, _ = time_derivative_coeff(a_l, a_r, b, cz, prim0, gas, mt0)

    tau = relaxation_time(prim0, gas)
    if state.shock_dissipation:
        pl, pr = prim_l.p, prim_r.p
        tau = tau + dt * np.abs(pl - pr) / (pl + pr)
    tc = time_coeffs(dt, tau, state.tau_floor)
    state.diag.tau_clamped += tc.n_clamped
    if gks:
        tc = tc.gks_limit()
    F = flux_equilibrium(prim0, ExpansionCoeffs(a_l, a_r, b, cz, A), tc, gas, mt0)

    wave = None
    if W_wave is not None:
        if W_wave is W_total:
            fw = fs
        else:
            wv, _ = _prep(W_wave, state)
            fw = interface_states(wv.W, wv.slopes, list(mesh.edges), axis)
            _apply_reflective(fw, lo, hi)
            names = ("left", "right") if axis == 0 else ("bottom", "top")
            zero = [np.zeros(len(t.kind)) for t in (lo, hi)]
            phi = tuple(open_faces[n][1] if open_faces and n in open_faces else z for n, z in zip(names, zero))
            _apply_open(fw, fs, lo, hi, phi)
        left = one_sided(to_primitive(fw.wl, gas), fw.sl_n, fw.sl_t, np.zeros_like(fw.sl_t), gas)
        right = one_sided(to_primitive(fw.wr, gas), fw.sr_n, fw.sr_t, np.zeros_like(fw.sr_t), gas)
        F = F + flux_hydro_transport(left, right, tc)
        wave = fw

    # diffuse walls replace the interior-face flux
    for end, tab in ((0, lo), (-1, hi)):
        sel = np.array([k == "wall" for k in tab.kind])
        if not sel.any():
            continue
        i = 0 if end == 0 else -1
        # frame with the normal pointing into the wall: flip for the low end
        flip = (lambda X: _mirror_local(X)) if end == 0 else (lambda X: X)
        sgn = -1.0 if end == 0 else 1.0
        src = fs.wr if end == 0 else fs.wl
        sn = fs.sr_n if end == 0 else fs.sl_n
        st = fs.sr_t if end == 0 else fs.sl_t
        Wi = flip(src[i, sel])
        interior = one_sided(to_primitive(Wi, gas), -flip(sn[i, sel]) if end == 0 else sn[i, sel],
                             flip(st[i, sel]), np.zeros_like(Wi), gas)
        wv_side = None
        if wave is not None:
            wsrc = wave.wr if end == 0 else wave.wl
            wsn = wave.sr_n if end == 0 else wave.sl_n
            wst = wave.sr_t if end == 0 else wave.sl_t
            Ww = flip(wsrc[i, sel])
            wv_side = one_sided(to_primitive(Ww, gas), -flip(wsn[i, sel]) if end == 0 else wsn[i, sel],
                                flip(wst[i, sel]), np.zeros_like(Ww), gas)
        Uw = tab.wall_U[sel][:, [1, 0, 2]] if axis == 1 else tab.wall_U[sel]
        tau_w = relaxation_time(interior.prim, gas)
        tcw = time_coeffs(dt, tau_w, state.tau_floor)
        if gks:
            tcw = tcw.gks_limit()
        Fw = flux_diffuse_wall(interior, wv_side, Wall(tab.wall_T[sel], Uw), tcw, gas)
        F[i, sel] = sgn * flip(Fw)

    F = to_local(F, axis)
    if axis == 1:
        F = np.swapaxes(F, 0, 1)
    return F


def _divergence(state: SimState, W_total, W_wave, dt, gks=False, open_faces=None) -> np.ndarray:
    """Sum over faces of area * flux, outward positive, per cell (nx, ny, 5)."""
    mesh = state.mesh
    out = np.zeros(state.W.shape)
    for axis in range(mesh.dims):
        F = interface_fluxes(state, W_total, W_wave, dt, axis, gks, open_faces) * mesh.face_areas(axis)[..., None]
        if axis == 0:
            out += F[1:] - F[:-1]
        else:
            out += F[:, 1:] - F[:, :-1]
    return out


def _finish(state: SimState, W_new: np.ndarray, dt: float) -> None:
    if not np.all(np.isfinite(W_new)):
        raise NumericalAbort(f"non-finite state at step {state.step + 1}", state)
    state.diag.residual = float(np.sqrt(np.mean(((W_new - state.W) / dt) ** 2)))
    state.W = W_new
    state.time += dt
    state.step += 1
    state.diag.n_particles = len(state.pool)


def _resample(state: SimState, mode: str) -> None:
    # the share sampled is the one that streams freely through the *next* step, whose size is
    # the nominal CFL step (a step shortened to hit an output time must not set it)
    dt = compute_dt(state)
    nc = state.mesh.ncells
    W_flat = state.W.reshape(nc, 5)
    W_h, n = hydro_quantities(W_flat, state.pool, state.volumes, state.diag.sampling)
    state.diag.hydro_corrections += n
    tau = state.cell_tau().reshape(nc)
    rng = RngStream(state.seed, STREAM_SAMPLE, state.step).generator()
    new = sample_hydro(W_h, state.volumes, dt, tau, mode, state.mesh, state.m_p, state.gas, rng,
                       state.diag.sampling)
    state.diag.sampled_mass = float(new.mass.sum())
    state.diag.sampled_cell_mass = np.bincount(new.cell, new.mass, minlength=nc)
    state.pool.append(new)
    state.diag.n_particles = len(state.pool)


def _step_particles(state: SimState, dt: float, mode: str) -> None:
    nc = state.mesh.ncells
    tau = state.cell_tau().reshape(nc)
    nf, ncol = classify(state.pool, dt, tau, RngStream(state.seed, STREAM_TC, state.step).generator())
    state.diag.n_collisionless, state.diag.n_collisional = nf, ncol
    W_wave = None
    if mode == "ugkwp":
        W_wave = _wave_part(state.W, state.particle_state(), state.gas, state.diag)
    faces = _open_faces(state)
    div = _divergence(state, state.W, W_wave, dt, open_faces=faces)
    inj = {f: (Wg[sel], phi[sel], tau[sel]) for f, (Wg, phi, tau, sel) in faces.items()}
    inj, t_in = inject_open(state.mesh, inj, dt, state.m_p, state.gas,
                            RngStream(state.seed, STREAM_INJECT, state.step).generator())
    res = stream_and_tally(state.pool, dt, state.mesh, state.tables, state.gas,
                           RngStream(state.seed, STREAM_WALL, state.step), inj, t_in)
    vol = state.volumes.reshape(state.mesh.shape)[..., None]
    W_new = state.W - div / vol + res.net.reshape(state.W.shape) / vol
    W_new = apply_correction(W_new, state.diag)
    _finish(state, W_new, dt)
    _resample(state, mode)


def step_ugkwp(state: SimState, dt: float | None = None) -> SimState:
    dt = compute_dt(state) if dt is None else dt
    _step_particles(state, dt, "ugkwp")
    return state


def step_ugkp(state: SimState, dt: float | None = None) -> SimState:
    dt = compute_dt(state) if dt is None else dt
    _step_particles(state, dt, "ugkp")
    return state


def step_gks(state: SimState, dt: float | None = None) -> SimState:
    dt = compute_dt(state) if dt is None else dt
    if len(state.pool):
        raise ValueError("gks mode does not carry particles")
    div = _divergence(state, state.W, state.W, dt, gks=True)
    vol = state.volumes.reshape(state.mesh.shape)[..., None]
    W_new = apply_correction(state.W - div / vol, state.diag)
    _finish(state, W_new, dt)
    return state


STEPPERS = {"ugkwp": step_ugkwp, "ugkp": step_ugkp, "gks": step_gks}


def initialize_particles(state: SimState) -> SimState:
    """Sample the initial particles from the (equilibrium) initial state."""
    if state.mode == "gks":
        return state
    dt = compute_dt(state)
    nc = state.mesh.ncells
    tau = state.cell_tau().reshape(nc)
    rng = RngStream(state.seed, STREAM_SAMPLE, -1 & 0xFFFFFFFF).generator()
    state.pool = sample_hydro(state.W.reshape(nc, 5), state.volumes, dt, tau, state.mode, state.mesh,
                              state.m_p, state.gas, rng, state.diag.sampling)
    state.diag.n_particles = len(state.pool)
    return state


@dataclass
class RunResult:
    state: SimState
    averaged: np.ndarray | None
    avg_time: float
    history: list


def run(state: SimState, t_end: float | None = None, max_steps: int | None = None,
        avg_start: float | None = None, steady_tol: float | None = None, check_every: int = 50,
        callback=None) -> RunResult:
    """Advance until ``t_end`` (hit exactly) or ``max_steps`` or a steady averaged field.

    With ``avg_start`` the state is time-averaged from that time on.  The
    steady criterion compares the averaged field (instantaneous field when not
    averaging) between checks: ||dW|| / (||W|| * elapsed time) < steady_tol.
    """
    if t_end is None and max_steps is None and steady_tol is None:
        raise ValueError("need a stop criterion")
    step = STEPPERS[state.mode]
    acc = None
    acc_t = 0.0
    history = []
    last_check = None
    last_check_t = state.time
    n = 0
    while True:
        if max_steps is not None and n >= max_steps:
            break
        if t_end is not None and state.time >= t_end * (1 - 1e-14):
            break
        if n % 100 == 0:
            good = state.copy()
        try:
            dt = compute_dt(state)
            if t_end is not None and state.time + dt > t_end:
                dt = t_end - state.time
            step(state, dt)
        except (NumericalAbort, UnphysicalStateError) as exc:
            raise NumericalAbort(str(exc), good) from exc
        n += 1
        if avg_start is not None and state.time > avg_start:
            w = dt if acc is not None else state.time - avg_start
            w = min(w, dt)
            acc = state.W * w if acc is None else acc + state.W * w
            acc_t += w
        history.append((state.step, state.time, dt, state.diag.residual, state.diag.n_particles))
        if callback is not None:
            callback(state)
        if steady_tol is not None and n % check_every == 0:
            cur = acc / acc_t if acc is not None else state.W
            if last_check is not None and (acc is not None or avg_start is None):
                change = np.linalg.norm(cur - last_check) / (np.linalg.norm(cur) * (state.time - last_check_t))
                if change < steady_tol:
                    break
            last_check, last_check_t = cur.copy(), state.time
    averaged = acc / acc_t if acc is not None else None
    return RunResult(state, averaged, acc_t, history)

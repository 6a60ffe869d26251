"""Independent reference solutions used by tests and acceptance runs.

* exact Riemann solver for the Euler equations,
* Rankine-Hugoniot jump relations,
* Blasius flat-plate boundary layer by shooting,
* a fine-grid 1D discrete-velocity BGK solver.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .gas import GasModel, Primitive, relaxation_time


# ---------------------------------------------------------------- Riemann

def _as_rup(s):
    if isinstance(s, Primitive):
        return float(s.rho), float(np.asarray(s.U)[..., 0]), float(s.p)
    rho, u, p = s
    return float(rho), float(u), float(p)


def _f_side(p, rho, pk, ck, gamma):
    """Velocity change across the wave on one side and its derivative."""
    if p > pk:
        A = 2.0 / ((gamma + 1.0) * rho)
        B = (gamma - 1.0) / (gamma + 1.0) * pk
        q = np.sqrt(A / (p + B))
        return (p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (p + B))
    r = (p / pk) ** ((gamma - 1.0) / (2.0 * gamma))
    return 2.0 * ck / (gamma - 1.0) * (r - 1.0), (p / pk) ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * ck)


@dataclass
class RiemannSolution:
    left: tuple
    right: tuple
    gamma: float
    p_star: float
    u_star: float
    vacuum: bool
    waves: tuple          # ("shock"|"rarefaction", same) for left and right waves

    def pressure_function(self, p):
        (rl, ul, pl), (rr, ur, pr) = self.left, self.right
        g = self.gamma
        cl, cr = np.sqrt(g * pl / rl), np.sqrt(g * pr / rr)
        return _f_side(p, rl, pl, cl, g)[0] + _f_side(p, rr, pr, cr, g)[0] + ur - ul

    def sample(self, xi) -> tuple:
        """(rho, u, p) at similarity coordinates xi = x / t."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.array([self._sample_one(s) for s in xi])
        return out[:, 0], out[:, 1], out[:, 2]

    def _sample_one(self, s):
        g = self.gamma
        (rl, ul, pl), (rr, ur, pr) = self.left, self.right
        cl, cr = np.sqrt(g * pl / rl), np.sqrt(g * pr / rr)
        gm, gp = g - 1.0, g + 1.0
        if self.vacuum:
            shl, shr = ul - cl, ur + cr
            sl_tail, sr_tail = ul + 2.0 * cl / gm, ur - 2.0 * cr / gm
            if s <= shl:
                return rl, ul, pl
            if s >= shr:
                return rr, ur, pr
            if s < sl_tail:
                return self._fan_left(s)
            if s > sr_tail:
                return self._fan_right(s)
            return 0.0, 0.5 * (sl_tail + sr_tail), 0.0
        ps, us = self.p_star, self.u_star
        if s <= us:
            if ps > pl:
                S = ul - cl * np.sqrt(gp / (2 * g) * ps / pl + gm / (2 * g))
                if s <= S:
                    return rl, ul, pl
                return rl * ((ps / pl + gm / gp) / (gm / gp * ps / pl + 1.0)), us, ps
            shl = ul - cl
            cs = cl * (ps / pl) ** (gm / (2 * g))
            if s <= shl:
                return rl, ul, pl
            if s >= us - cs:
                return rl * (ps / pl) ** (1.0 / g), us, ps
            return self._fan_left(s)
        if ps > pr:
            S = ur + cr * np.sqrt(gp / (2 * g) * ps / pr + gm / (2 * g))
            if s >= S:
                return rr, ur, pr
            return rr * ((ps / pr + gm / gp) / (gm / gp * ps / pr + 1.0)), us, ps
        shr = ur + cr
        cs = cr * (ps / pr) ** (gm / (2 * g))
        if s >= shr:
            return rr, ur, pr
        if s <= us + cs:
            return rr * (ps / pr) ** (1.0 / g), us, ps
        return self._fan_right(s)

    def _fan_left(self, s):
        g = self.gamma
        rl, ul, pl = self.left
        cl = np.sqrt(g * pl / rl)
        fac = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * cl) * (ul - s)
        return rl * fac ** (2.0 / (g - 1.0)), 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * ul + s), pl * fac ** (2.0 * g / (g - 1.0))

    def _fan_right(self, s):
        g = self.gamma
        rr, ur, pr = self.right
        cr = np.sqrt(g * pr / rr)
        fac = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * cr) * (ur - s)
        return rr * fac ** (2.0 / (g - 1.0)), 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * ur + s), pr * fac ** (2.0 * g / (g - 1.0))


def exact_riemann(left, right, gamma: float, tol: float = 1e-12) -> RiemannSolution:
    """Exact solution of the Euler Riemann problem; states are Primitive or (rho, u, p)."""
    rl, ul, pl = _as_rup(left)
    rr, ur, pr = _as_rup(right)
    if min(rl, pl, rr, pr) <= 0:
        raise ValueError("densities and pressures must be positive")
    g = gamma
    cl, cr = np.sqrt(g * pl / rl), np.sqrt(g * pr / rr)
    if 2.0 * (cl + cr) / (g - 1.0) <= ur - ul:
        return RiemannSolution((rl, ul, pl), (rr, ur, pr), g, 0.0, np.nan, True, ("rarefaction", "rarefaction"))
    # two-rarefaction guess, then Newton with a bracketing fallback
    z = (g - 1.0) / (2.0 * g)
    p = ((cl + cr - 0.5 * (g - 1.0) * (ur - ul)) / (cl / pl**z + cr / pr**z)) ** (1.0 / z)
    p = max(p, 1e-14 * max(pl, pr))
    fun = lambda q: _f_side(q, rl, pl, cl, g)[0] + _f_side(q, rr, pr, cr, g)[0] + ur - ul
    ok = False
    for _ in range(100):
        fl, dl = _f_side(p, rl, pl, cl, g)
        fr, dr = _f_side(p, rr, pr, cr, g)
        f = fl + fr + ur - ul
        p_new = p - f / (dl + dr)
        if p_new <= 0:
            break
        if abs(p_new - p) <= tol * 0.5 * (p_new + p):
            p, ok = p_new, True
            break
        p = p_new
    if not ok:
        hi = max(pl, pr)
        while fun(hi) < 0:
            hi *= 2.0
        p = brentq(fun, 1e-300, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    fl = _f_side(p, rl, pl, cl, g)[0]
    fr = _f_side(p, rr, pr, cr, g)[0]
    u = 0.5 * (ul + ur) + 0.5 * (fr - fl)
    waves = ("shock" if p > pl else "rarefaction", "shock" if p > pr else "rarefaction")
    return RiemannSolution((rl, ul, pl), (rr, ur, pr), g, p, u, False, waves)


# ---------------------------------------------------------------- Rankine-Hugoniot

def rankine_hugoniot(M: float, gamma: float) -> tuple:
    """Jumps across a normal shock with upstream Mach M.

    Returns ``(rho2/rho1, p2/p1, T2/T1, U2/U1)``.
    """
    if not M > 1:
        raise ValueError("upstream Mach number must exceed 1")
    M2 = M * M
    r = (gamma + 1.0) * M2 / ((gamma - 1.0) * M2 + 2.0)
    p = (2.0 * gamma * M2 - (gamma - 1.0)) / (gamma + 1.0)
    return r, p, p / r, 1.0 / r


# ---------------------------------------------------------------- Blasius

def _blasius_rhs(_, y):
    return [y[1], y[2], -0.5 * y[0] * y[2]]


def _blasius_shoot(fpp0, eta_max):
    sol = solve_ivp(_blasius_rhs, (0.0, eta_max), [0.0, 0.0, fpp0], rtol=1e-12, atol=1e-13)
    return sol.y[1, -1] - 1.0


def blasius_fpp0(eta_max: float = 15.0) -> float:
    """Wall shear f''(0) of f''' + f f''/2 = 0, f(0)=f'(0)=0, f'(inf)=1."""
    return brentq(_blasius_shoot, 0.1, 1.0, args=(eta_max,), xtol=1e-14)


def blasius_profile(eta) -> tuple:
    """(f, f', f'') of the Blasius solution on ``eta`` (non-negative, any order)."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0):
        raise ValueError("eta must be non-negative")
    eta_max = max(15.0, float(np.max(eta, initial=0.0)))
    fpp0 = blasius_fpp0()
    sol = solve_ivp(_blasius_rhs, (0.0, eta_max), [0.0, 0.0, fpp0], rtol=1e-12, atol=1e-13,
                    dense_output=True)
    y = sol.sol(eta.reshape(-1))
    return tuple(v.reshape(eta.shape) for v in y)


# ---------------------------------------------------------------- discrete velocity BGK

class GridInadequate(ValueError):
    """The velocity grid cannot represent the initial Maxwellians."""


def _reduced_maxwellian(rho, U, lam, u, K):
    """Reduced distributions h = int f dv dw dxi and b = int (v^2+w^2+xi^2) f ..."""
    H = rho[:, None] * np.sqrt(lam[:, None] / np.pi) * np.exp(-lam[:, None] * (u[None, :] - U[:, None]) ** 2)
    return H, (K + 2.0) / (2.0 * lam[:, None]) * H


def _moments(H, B, u, wq):
    rho = H @ wq
    mom = H @ (wq * u)
    E = 0.5 * (H @ (wq * u * u) + B @ wq)
    return rho, mom, E


def _fit_maxwellian(W, u, wq, K, iters=20):
    """Discrete Maxwellian whose quadrature moments equal W exactly (Newton on rho, U, lam)."""
    target = np.stack(W, axis=1)
    rho_t, mom_t, E_t = W
    U = mom_t / rho_t
    x = np.stack([rho_t, U, rho_t * (K + 3) / (4.0 * (E_t - 0.5 * mom_t * U))], axis=1)
    q = np.stack([wq, wq * u, 0.5 * wq * u * u], axis=1)        # moment weights for H
    scale = np.abs(target).max(axis=1, keepdims=True)
    for _ in range(iters):
        rho, U, lam = x[:, 0:1], x[:, 1:2], x[:, 2:3]
        H, B = _reduced_maxwellian(x[:, 0], x[:, 1], x[:, 2], u, K)
        c = u[None, :] - U
        r = H @ q
        r[:, 2] += 0.5 * (B @ wq)
        r -= target
        if np.max(np.abs(r) / scale) < 2e-15:
            break
        dH = (H / rho, 2.0 * lam * c * H, (0.5 / lam - c * c) * H)
        J = np.empty((x.shape[0], 3, 3))
        for k in range(3):
            col = dH[k] @ q
            dB = (K + 2.0) / (2.0 * lam) * dH[k]
            if k == 2:
                dB = dB - (K + 2.0) / (2.0 * lam * lam) * H
            col[:, 2] += 0.5 * (dB @ wq)
            J[:, :, k] = col
        x -= np.linalg.solve(J, r[..., None])[..., 0]
    return _reduced_maxwellian(x[:, 0], x[:, 1], x[:, 2], u, K), x


@dataclass
class DvmResult:
    x: np.ndarray
    time: float
    rho: np.ndarray
    U: np.ndarray
    T: np.ndarray
    p: np.ndarray
    W: np.ndarray          # (n, 3): rho, rho U, rho E
    steps: int


def dvm_bgk_solve(x_edges, rho0, U0, T0, gas: GasModel, t_end: float, nv: int = 201, vmax: float | None = None,
                  cfl: float = 0.9, bc=("outflow", "outflow"), dt_tau: float = 0.5,
                  check_tol: float = 1e-6, steps_cap: int = 10_000_000) -> DvmResult:
    """Resolved 1D discrete-velocity BGK solution with first-order upwind transport.

    The relaxation is integrated exactly over each step towards a Maxwellian
    fitted so that its quadrature moments equal the cell moments, which keeps
    the scheme discretely conservative.  ``bc`` entries are ``"periodic"``,
    ``"outflow"`` or ``"reservoir"`` (fixed initial end state).
    """
    x_edges = np.asarray(x_edges, dtype=float)
    dx = np.diff(x_edges)
    rho0, U0, T0 = (np.broadcast_to(np.asarray(v, dtype=float), dx.shape).copy() for v in (rho0, U0, T0))
    lam0 = 0.5 / T0
    K = gas.K
    if vmax is None:
        vmax = float(np.max(np.abs(U0)) + 6.0 / np.sqrt(np.min(lam0)))
    u = np.linspace(-vmax, vmax, nv)
    du = u[1] - u[0]
    wq = np.full(nv, du)
    wq[[0, -1]] *= 0.5
    H, B = _reduced_maxwellian(rho0, U0, lam0, u, K)
    rho_q, mom_q, E_q = _moments(H, B, u, wq)
    E0 = rho0 * (0.5 * U0 ** 2 + (K + 3) / (4.0 * lam0))
    err = max(np.max(np.abs(rho_q - rho0) / rho0), np.max(np.abs(mom_q - rho0 * U0)) / np.max(rho0 * np.sqrt(T0)),
              np.max(np.abs(E_q - E0) / E0))
    if err > check_tol:
        raise GridInadequate(f"velocity grid misses initial moments by {err:.2e}")
    # start from the discretely exact Maxwellians
    (H, B), _ = _fit_maxwellian((rho0, rho0 * U0, E0), u, wq, K)
    ghost_l = (H[0].copy(), B[0].copy())
    ghost_r = (H[-1].copy(), B[-1].copy())
    pos = u > 0
    t = 0.0
    steps = 0

    def macro(H, B):
        rho, mom, E = _moments(H, B, u, wq)
        U = mom / rho
        T = (E / rho - 0.5 * U * U) * 2.0 / (K + 3)
        return rho, mom, E, U, T

    while t < t_end * (1 - 1e-14) and steps < steps_cap:
        rho, mom, E, U, T = macro(H, B)
        tau = relaxation_time(Primitive(rho, np.stack([U, 0 * U, 0 * U], -1), 0.5 / T), gas)
        dt = min(cfl * np.min(dx) / vmax, dt_tau * np.min(tau), t_end - t)
        flux = []
        for F in (H, B):
            if bc[0] == "periodic":
                left = F[-1]
            else:
                left = F[0] if bc[0] == "outflow" else (ghost_l[0] if F is H else ghost_l[1])
            if bc[1] == "periodic":
                right = F[0]
            else:
                right = F[-1] if bc[1] == "outflow" else (ghost_r[0] if F is H else ghost_r[1])
            Fp = np.vstack([left[None], F, right[None]])
            # upwind interface values (n + 1 faces)
            face = np.where(pos, Fp[:-1], Fp[1:])
            flux.append(u * face)
        Hs = H - dt / dx[:, None] * (flux[0][1:] - flux[0][:-1])
        Bs = B - dt / dx[:, None] * (flux[1][1:] - flux[1][:-1])
        rho, mom, E = _moments(Hs, Bs, u, wq)
        (Hg, Bg), prm = _fit_maxwellian((rho, mom, E), u, wq, K)
        tau = relaxation_time(Primitive(prm[:, 0], np.stack([prm[:, 1], 0 * rho, 0 * rho], -1), prm[:, 2]), gas)
        decay = np.exp(-dt / tau)[:, None]
        H = Hg + (Hs - Hg) * decay
        B = Bg + (Bs - Bg) * decay
        t += dt
        steps += 1
    rho, mom, E, U, T = macro(H, B)
    xc = 0.5 * (x_edges[1:] + x_edges[:-1])
    return DvmResult(xc, t, rho, U, T, rho * T, np.stack([rho, mom, E], axis=1), steps)


def dvm_relax_homogeneous(H, B, u, gas: GasModel, tau_fixed: float, t: float):
    """Exact homogeneous BGK relaxation used to validate the relaxation step."""
    wq = np.full(u.size, u[1] - u[0])
    wq[[0, -1]] *= 0.5
    W = _moments(H[None], B[None], u, wq)
    (Hg, Bg), _ = _fit_maxwellian(W, u, wq, gas.K)
    d = np.exp(-t / tau_fixed)
    return Hg[0] + (H - Hg[0]) * d, Bg[0] + (B - Bg[0]) * d

"""Full and half-space moments of the Maxwellian and expansion coefficients.

Moments are normalized by density.  Velocity integrals factorize, so any
moment of a polynomial in (u, v, w, xi^2) against the Maxwellian reduces to
products of one-dimensional moments.  The conservative basis is
psi = (1, u, v, w, (u^2 + v^2 + w^2 + xi^2)/2).
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numba
import numpy as np
from scipy.special import erfc

from .gas import GasModel, Primitive

MAX_ORDER = 7

_PSI = (
    {(0, 0, 0, 0): 1.0},
    {(1, 0, 0, 0): 1.0},
    {(0, 1, 0, 0): 1.0},
    {(0, 0, 1, 0): 1.0},
    {(2, 0, 0, 0): 0.5, (0, 2, 0, 0): 0.5, (0, 0, 2, 0): 0.5, (0, 0, 0, 1): 0.5},
)


class MomentTable(NamedTuple):
    """``u_*[..., n]`` = <u^n>, ``v``/``w`` full-space, ``xi[..., l]`` = <(xi^2)^l>."""

    u_full: np.ndarray
    u_pos: np.ndarray
    u_neg: np.ndarray
    v: np.ndarray
    w: np.ndarray
    xi: np.ndarray


@numba.njit(cache=True)
def _recursion_kernel(m, U, lam, n_max):
    for k in range(m.shape[0]):
        h = 0.5 / lam[k]
        for n in range(n_max - 1):
            m[k, n + 2] = U[k] * m[k, n + 1] + (n + 1) * h * m[k, n]


def _gauss_recursion(m, U, lam, n_max):
    flat = m.reshape(-1, m.shape[-1])
    U = np.broadcast_to(np.asarray(U, dtype=float), m.shape[:-1]).reshape(-1)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), m.shape[:-1]).reshape(-1)
    _recursion_kernel(flat, np.ascontiguousarray(U), np.ascontiguousarray(lam), n_max)
    return m


def _full_1d(U, lam, n_max):
    m = np.empty(np.shape(U) + (n_max + 1,))
    m[..., 0] = 1.0
    m[..., 1] = U
    return _gauss_recursion(m, U, lam, n_max)


def maxwell_moments(prim: Primitive, gas: GasModel, max_order: int = MAX_ORDER) -> MomentTable:
    if max_order < 4:
        raise ValueError("max_order must be at least 4")
    U = prim.U[..., 0]
    lam = np.asarray(prim.lam, dtype=float)
    sl = np.sqrt(lam)
    u_pos = np.empty(U.shape + (max_order + 1,))
    u_neg = np.empty_like(u_pos)
    u_pos[..., 0] = 0.5 * erfc(-sl * U)
    u_neg[..., 0] = 0.5 * erfc(sl * U)
    edge = 0.5 * np.exp(-lam * U * U) / np.sqrt(np.pi * lam)
    u_pos[..., 1] = U * u_pos[..., 0] + edge
    u_neg[..., 1] = U * u_neg[..., 0] - edge
    _gauss_recursion(u_pos, U, lam, max_order)
    _gauss_recursion(u_neg, U, lam, max_order)
    xi = np.empty(U.shape + (3,))
    K = gas.K
    xi[..., 0] = 1.0
    xi[..., 1] = K / (2.0 * lam)
    xi[..., 2] = (K * K + 2.0 * K) / (4.0 * lam * lam)
    return MomentTable(
        _full_1d(U, lam, max_order),
        u_pos,
        u_neg,
        _full_1d(prim.U[..., 1], lam, max_order),
        _full_1d(prim.U[..., 2], lam, max_order),
        xi,
    )


def _poly_mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


@lru_cache(maxsize=None)
def _terms(pu: int, pv: int, pw: int):
    """Monomial table for <u^pu v^pv w^pw psi_a psi_b>, flattened over (a, b)."""
    prefix = {(pu, pv, pw, 0): 1.0}
    rows, cols = [], []
    for a in range(5):
        pa = _poly_mul(prefix, _PSI[a])
        for b in range(5):
            for e, c in _poly_mul(pa, _PSI[b]).items():
                rows.append(e + (c,))
                cols.append(5 * a + b)
    rows = np.array(rows)
    exps = rows[:, :4].astype(np.int64)
    return (np.ascontiguousarray(exps[:, 0]), np.ascontiguousarray(exps[:, 1]), np.ascontiguousarray(exps[:, 2]),
            np.ascontiguousarray(exps[:, 3]), np.ascontiguousarray(rows[:, 4]), np.array(cols, dtype=np.int64))


@numba.njit(cache=True)
def _accumulate(mu, v, w, xi, I, J, Kw, L, coef, col):
    n = mu.shape[0]
    out = np.zeros((n, 25))
    for k in range(n):
        for t in range(I.size):
            out[k, col[t]] += coef[t] * mu[k, I[t]] * v[k, J[t]] * w[k, Kw[t]] * xi[k, L[t]]
    return out


def moment_matrix(mt: MomentTable, space: str = "full", pu: int = 0, pv: int = 0, pw: int = 0) -> np.ndarray:
    """M[..., a, b] = <u^pu v^pv w^pw psi_a psi_b> with u over the chosen half/full space."""
    mu = {"full": mt.u_full, "pos": mt.u_pos, "neg": mt.u_neg}[space]
    shape = mu.shape[:-1]
    out = _accumulate(_flat(mu), _flat(mt.v), _flat(mt.w), _flat(mt.xi), *_terms(pu, pv, pw))
    return out.reshape(shape + (5, 5))


@numba.njit(cache=True, inline="always")
def _g(mu, v, w, xi, k, i, j, m, l, a):
    """<u^i v^j w^m xi^2l (a . psi)> for row k."""
    b = mu[k, i] * v[k, j] * w[k, m]
    return (a[k, 0] * b * xi[k, l] + a[k, 1] * mu[k, i + 1] * v[k, j] * w[k, m] * xi[k, l]
            + a[k, 2] * mu[k, i] * v[k, j + 1] * w[k, m] * xi[k, l]
            + a[k, 3] * mu[k, i] * v[k, j] * w[k, m + 1] * xi[k, l]
            + 0.5 * a[k, 4] * (mu[k, i + 2] * v[k, j] * w[k, m] * xi[k, l] + mu[k, i] * v[k, j + 2] * w[k, m] * xi[k, l]
                               + mu[k, i] * v[k, j] * w[k, m + 2] * xi[k, l] + b * xi[k, l + 1]))


@numba.njit(cache=True)
def _accumulate_contract(mu, v, w, xi, p, q, r, a):
    n = mu.shape[0]
    out = np.empty((n, 5))
    for k in range(n):
        out[k, 0] = _g(mu, v, w, xi, k, p, q, r, 0, a)
        out[k, 1] = _g(mu, v, w, xi, k, p + 1, q, r, 0, a)
        out[k, 2] = _g(mu, v, w, xi, k, p, q + 1, r, 0, a)
        out[k, 3] = _g(mu, v, w, xi, k, p, q, r + 1, 0, a)
        out[k, 4] = 0.5 * (_g(mu, v, w, xi, k, p + 2, q, r, 0, a) + _g(mu, v, w, xi, k, p, q + 2, r, 0, a)
                           + _g(mu, v, w, xi, k, p, q, r + 2, 0, a) + _g(mu, v, w, xi, k, p, q, r, 1, a))
    return out


def _flat(x):
    return np.ascontiguousarray(x.reshape(-1, x.shape[-1]))


def moment_contract(mt: MomentTable, space: str, a, pu: int = 0, pv: int = 0, pw: int = 0) -> np.ndarray:
    """<u^pu v^pv w^pw psi (a . psi)>, i.e. ``contract(moment_matrix(...), a)`` without forming the matrix."""
    mu = {"full": mt.u_full, "pos": mt.u_pos, "neg": mt.u_neg}[space]
    shape = mu.shape[:-1]
    a = np.broadcast_to(np.asarray(a, dtype=float), shape + (5,))
    if not np.any(a):
        return np.zeros(shape + (5,))
    out = _accumulate_contract(_flat(mu), _flat(mt.v), _flat(mt.w), _flat(mt.xi), pu, pv, pw, _flat(a))
    return out.reshape(shape + (5,))


def moment_vector(mt: MomentTable, space: str = "full", pu: int = 0, pv: int = 0, pw: int = 0) -> np.ndarray:
    """<u^pu v^pv w^pw psi_a>."""
    mu = {"full": mt.u_full, "pos": mt.u_pos, "neg": mt.u_neg}[space]
    e0 = np.zeros(mu.shape[:-1] + (5,))
    e0[..., 0] = 1.0
    return moment_contract(mt, space, e0, pu, pv, pw)


def contract(M: np.ndarray, coef: np.ndarray) -> np.ndarray:
    return np.einsum("...ab,...b->...a", M, coef)


@numba.njit(cache=True)
def _a_kernel(rho, U, lam, dW, Kp3):
    n = rho.shape[0]
    a = np.empty((n, 5))
    for k in range(n):
        r0 = dW[k, 0] / rho[k]
        U2 = U[k, 0] * U[k, 0] + U[k, 1] * U[k, 1] + U[k, 2] * U[k, 2]
        e = U2 + Kp3 / (2.0 * lam[k])
        d0 = dW[k, 1] / rho[k] - U[k, 0] * r0
        d1 = dW[k, 2] / rho[k] - U[k, 1] * r0
        d2 = dW[k, 3] / rho[k] - U[k, 2] * r0
        s = U[k, 0] * d0 + U[k, 1] * d1 + U[k, 2] * d2
        a4 = (4.0 * lam[k] * lam[k] / Kp3) * (2.0 * dW[k, 4] / rho[k] - e * r0 - 2.0 * s)
        a[k, 4] = a4
        a[k, 1] = 2.0 * lam[k] * d0 - U[k, 0] * a4
        a[k, 2] = 2.0 * lam[k] * d1 - U[k, 1] * a4
        a[k, 3] = 2.0 * lam[k] * d2 - U[k, 2] * a4
        s = U[k, 0] * a[k, 1] + U[k, 1] * a[k, 2] + U[k, 2] * a[k, 3]
        a[k, 0] = r0 - s - 0.5 * a4 * e
    return a


def a_from_slope(prim: Primitive, dW, gas: GasModel) -> np.ndarray:
    """Coefficients a with  rho <psi psi> a = dW  (closed-form inverse)."""
    shape = np.broadcast_shapes(np.shape(dW)[:-1], np.shape(prim.rho))
    dW = np.broadcast_to(np.asarray(dW, dtype=float), shape + (5,)).reshape(-1, 5)
    rho = np.broadcast_to(np.asarray(prim.rho, dtype=float), shape).reshape(-1)
    U = np.broadcast_to(np.asarray(prim.U, dtype=float), shape + (3,)).reshape(-1, 3)
    lam = np.broadcast_to(np.asarray(prim.lam, dtype=float), shape).reshape(-1)
    a = _a_kernel(np.ascontiguousarray(rho), np.ascontiguousarray(U), np.ascontiguousarray(lam),
                  np.ascontiguousarray(dW), gas.K + 3.0)
    return a.reshape(shape + (5,))


def contract_slope(prim: Primitive, a, gas: GasModel, mt: MomentTable | None = None) -> np.ndarray:
    """Inverse of :func:`a_from_slope`: rho <psi (a . psi)>."""
    mt = maxwell_moments(prim, gas) if mt is None else mt
    return prim.rho[..., None] * moment_contract(mt, "full", a)


def time_derivative_coeff(a_l, a_r, b, c, prim0: Primitive, gas: GasModel, mt0: MomentTable | None = None):
    """Time coefficient A from the first-order compatibility condition.

    Returns ``(A, dW0_dt)``.
    """
    mt0 = maxwell_moments(prim0, gas) if mt0 is None else mt0
    dWdt = -prim0.rho[..., None] * (
        moment_contract(mt0, "pos", a_l, pu=1)
        + moment_contract(mt0, "neg", a_r, pu=1)
        + moment_contract(mt0, "full", b, pv=1)
        + moment_contract(mt0, "full", c, pw=1)
    )
    return a_from_slope(prim0, dWdt, gas), dWdt


def interface_state(prim_l: Primitive, prim_r: Primitive, gas: GasModel,
                    mt_l: MomentTable | None = None, mt_r: MomentTable | None = None) -> np.ndarray:
    """Collision state W0 from the u>0 half of the left and u<0 half of the right Maxwellian."""
    mt_l = maxwell_moments(prim_l, gas) if mt_l is None else mt_l
    mt_r = maxwell_moments(prim_r, gas) if mt_r is None else mt_r
    return (prim_l.rho[..., None] * moment_vector(mt_l, "pos")
            + prim_r.rho[..., None] * moment_vector(mt_r, "neg"))

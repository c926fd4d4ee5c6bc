"""Hot inner loops with a numba implementation and a pure-numpy twin.

The public names ``christoffel``, ``ricci`` and ``rk4_flow`` resolve to the
numba versions unless ``KUNDTFLOW_NO_NUMBA=1`` is set or numba cannot be
imported.  Both variants are always importable under ``*_numba`` /
``*_numpy`` so tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("KUNDTFLOW_NO_NUMBA", "0") not in ("1", "true", "yes")

# angle modes for the singularity guard of the flow integrator
ANGLE_NONE = -1
ANGLE_UU = 0  # arctan(theta_uu / (2 lambda))
ANGLE_NN = 1  # arctan(theta_nn / lambda)


# ---------------------------------------------------------------- numpy twins


def christoffel_numpy(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma[n,a,b,c] from ginv[n,a,d] and dg[n,i,j,k] = d_i g_jk."""
    t = dg.transpose(0, 2, 1, 3) + dg.transpose(0, 2, 3, 1) - dg
    # t[n,d,b,c] = d_b g_dc + d_c g_db - d_d g_bc
    return 0.5 * np.einsum("nad,ndbc->nabc", ginv, t)


def ricci_numpy(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    """R[n,b,c] from gam[n,a,b,c] and dgam[n,e,a,b,c] = d_e Gamma^a_bc."""
    r = np.einsum("naabc->nbc", dgam)
    r = r - np.einsum("nbaac->nbc", dgam)
    r = r + np.einsum("naad,ndbc->nbc", gam, gam)
    r = r - np.einsum("nabd,ndac->nbc", gam, gam)
    return r


def _flow_rhs_numpy(uu, ll, nn, p, q, r, s, w, ul, lam, beta):
    """Right-hand side on plain floats.

    ``theta_ul`` is constant along the flow, and from ``U = I`` the third
    column of the (u, l) rows and the first two entries of the n row stay
    zero, so the state is (uu, ll, nn) with U = [[p, q, 0], [r, s, 0], [0, 0, w]].
    """
    lam2 = lam * lam
    a, b, c = -uu, lam - ul, -(ul + lam)
    return (
        beta * (lam2 + 2.0 * lam * ul + uu * uu + ul * ul),
        beta * (ll * uu + lam2 - ul * ul),
        beta * (nn * uu + lam2 + lam * ul),
        beta * (a * p + b * r),
        beta * (a * q + b * s),
        beta * (c * p - ll * r),
        beta * (c * q - ll * s),
        beta * (-nn * w),
    )


def _angle_numpy(uu, nn, lam, mode):
    if mode == ANGLE_UU:
        return math.atan(uu / (2.0 * lam))
    if mode == ANGLE_NN:
        return math.atan(nn / lam)
    return 0.0


def rk4_flow_numpy(theta0, lam, betas, h, angle_mode, guard):
    """Classical RK4 on the joint (Theta, U) system.

    ``betas[k] = (beta(t_k), beta(t_k + h/2), beta(t_k + h))``.  Returns
    ``(thetas, Us, n_done)``; stepping stops early, without storing the
    offending state, once the guard angle comes within ``guard`` of pi/2.
    Runs on Python floats, which beats 3x3 array arithmetic at this size.
    """
    n = betas.shape[0]
    lam, h = float(lam), float(h)
    uu, ul, ll, nn = (float(v) for v in theta0)
    y = (uu, ll, nn, 1.0, 0.0, 0.0, 1.0, 1.0)
    rows = [y]
    limit = 0.5 * math.pi - guard
    half, sixth = 0.5 * h, h / 6.0
    f = _flow_rhs_numpy
    done = n
    for k, (b0, b1, b2) in enumerate(betas.tolist()):
        k1 = f(*y, ul, lam, b0)
        k2 = f(*[x + half * d for x, d in zip(y, k1)], ul, lam, b1)
        k3 = f(*[x + half * d for x, d in zip(y, k2)], ul, lam, b1)
        k4 = f(*[x + h * d for x, d in zip(y, k3)], ul, lam, b2)
        y_new = tuple(x + sixth * (d1 + 2.0 * d2 + 2.0 * d3 + d4) for x, d1, d2, d3, d4 in zip(y, k1, k2, k3, k4))
        if angle_mode != ANGLE_NONE and abs(_angle_numpy(y_new[0], y_new[2], lam, angle_mode)) >= limit:
            done = k
            break
        y = y_new
        rows.append(y)
    Y = np.array(rows)
    thetas = np.stack([Y[:, 0], np.full(len(Y), ul), Y[:, 1], Y[:, 2]], axis=1)
    Us = np.zeros((len(Y), 3, 3))
    Us[:, 0, 0], Us[:, 0, 1], Us[:, 1, 0], Us[:, 1, 1], Us[:, 2, 2] = Y[:, 3], Y[:, 4], Y[:, 5], Y[:, 6], Y[:, 7]
    return thetas, Us, done


# ---------------------------------------------------------------- numba


if HAVE_NUMBA:

    @njit(cache=True)
    def christoffel_numba(ginv, dg):
        n, d = ginv.shape[0], ginv.shape[1]
        out = np.zeros((n, d, d, d))
        for p in range(n):
            for a in range(d):
                for b in range(d):
                    for c in range(b, d):
                        s = 0.0
                        for e in range(d):
                            s += ginv[p, a, e] * (dg[p, b, e, c] + dg[p, c, e, b] - dg[p, e, b, c])
                        out[p, a, b, c] = 0.5 * s
                        out[p, a, c, b] = 0.5 * s
        return out

    @njit(cache=True)
    def ricci_numba(gam, dgam):
        n, d = gam.shape[0], gam.shape[1]
        out = np.zeros((n, d, d))
        for p in range(n):
            for b in range(d):
                for c in range(d):
                    s = 0.0
                    for a in range(d):
                        s += dgam[p, a, a, b, c] - dgam[p, b, a, a, c]
                        for e in range(d):
                            s += gam[p, a, a, e] * gam[p, e, b, c] - gam[p, a, b, e] * gam[p, e, a, c]
                    out[p, b, c] = s
        return out

    @njit(cache=True)
    def _flow_rhs_numba(th, U, lam, beta, dth, dU):
        uu = th[0]
        ul = th[1]
        ll = th[2]
        nn = th[3]
        dth[0] = beta * (lam * lam + 2.0 * lam * ul + uu * uu + ul * ul)
        dth[1] = 0.0
        dth[2] = beta * (ll * uu + lam * lam - ul * ul)
        dth[3] = beta * (nn * uu + lam * lam + lam * ul)
        for c in range(3):
            u_c = U[0, c]
            l_c = U[1, c]
            n_c = U[2, c]
            dU[0, c] = beta * (-uu * u_c + (lam - ul) * l_c)
            dU[1, c] = beta * (-(ul + lam) * u_c - ll * l_c)
            dU[2, c] = beta * (-nn * n_c)

    @njit(cache=True)
    def rk4_flow_numba(theta0, lam, betas, h, angle_mode, guard):
        n = betas.shape[0]
        thetas = np.zeros((n + 1, 4))
        Us = np.zeros((n + 1, 3, 3))
        th = theta0.copy()
        U = np.eye(3)
        thetas[0] = th
        Us[0] = U
        k1t = np.empty(4)
        k2t = np.empty(4)
        k3t = np.empty(4)
        k4t = np.empty(4)
        k1u = np.empty((3, 3))
        k2u = np.empty((3, 3))
        k3u = np.empty((3, 3))
        k4u = np.empty((3, 3))
        tmp_t = np.empty(4)
        tmp_u = np.empty((3, 3))
        limit = 0.5 * np.pi - guard
        for k in range(n):
            b0 = betas[k, 0]
            b1 = betas[k, 1]
            b2 = betas[k, 2]
            _flow_rhs_numba(th, U, lam, b0, k1t, k1u)
            for i in range(4):
                tmp_t[i] = th[i] + 0.5 * h * k1t[i]
            for i in range(3):
                for j in range(3):
                    tmp_u[i, j] = U[i, j] + 0.5 * h * k1u[i, j]
            _flow_rhs_numba(tmp_t, tmp_u, lam, b1, k2t, k2u)
            for i in range(4):
                tmp_t[i] = th[i] + 0.5 * h * k2t[i]
            for i in range(3):
                for j in range(3):
                    tmp_u[i, j] = U[i, j] + 0.5 * h * k2u[i, j]
            _flow_rhs_numba(tmp_t, tmp_u, lam, b1, k3t, k3u)
            for i in range(4):
                tmp_t[i] = th[i] + h * k3t[i]
            for i in range(3):
                for j in range(3):
                    tmp_u[i, j] = U[i, j] + h * k3u[i, j]
            _flow_rhs_numba(tmp_t, tmp_u, lam, b2, k4t, k4u)
            for i in range(4):
                tmp_t[i] = th[i] + (h / 6.0) * (k1t[i] + 2.0 * k2t[i] + 2.0 * k3t[i] + k4t[i])
            for i in range(3):
                for j in range(3):
                    tmp_u[i, j] = U[i, j] + (h / 6.0) * (
                        k1u[i, j] + 2.0 * k2u[i, j] + 2.0 * k3u[i, j] + k4u[i, j]
                    )
            if angle_mode != ANGLE_NONE:
                if angle_mode == ANGLE_UU:
                    ang = np.arctan(tmp_t[0] / (2.0 * lam))
                else:
                    ang = np.arctan(tmp_t[3] / lam)
                if abs(ang) >= limit:
                    return thetas[: k + 1], Us[: k + 1], k
            th[:] = tmp_t
            U[:, :] = tmp_u
            thetas[k + 1] = th
            Us[k + 1] = U
        return thetas, Us, n

else:  # pragma: no cover
    christoffel_numba = christoffel_numpy
    ricci_numba = ricci_numpy
    rk4_flow_numba = rk4_flow_numpy


if USE_NUMBA:
    _christoffel = christoffel_numba
    _ricci = ricci_numba
    _rk4 = rk4_flow_numba
else:
    _christoffel = christoffel_numpy
    _ricci = ricci_numpy
    _rk4 = rk4_flow_numpy


def christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    return _christoffel(np.ascontiguousarray(ginv, dtype=np.float64), np.ascontiguousarray(dg, dtype=np.float64))


def ricci(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    return _ricci(np.ascontiguousarray(gam, dtype=np.float64), np.ascontiguousarray(dgam, dtype=np.float64))


def rk4_flow(theta0, lam: float, betas: np.ndarray, h: float, angle_mode: int, guard: float):
    th0 = np.ascontiguousarray(theta0, dtype=np.float64)
    b = np.ascontiguousarray(betas, dtype=np.float64).reshape(-1, 3)
    thetas, Us, n_done = _rk4(th0, float(lam), b, float(h), int(angle_mode), float(guard))
    return thetas, Us, int(n_done)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"

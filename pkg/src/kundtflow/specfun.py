"""Real-argument special functions: Gamma, Gauss 2F1 on [0, 1] and the
hypergeometric profile functions driving the closed-form coframes.

``hyp2f1`` sums the Gauss series for ``z <= 1/2``, switches to the
``z -> 1 - z`` connection formula on ``(1/2, 1)`` (which requires a
non-integer ``c - a - b``) and uses the Gauss summation theorem at ``z = 1``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

SERIES_RTOL = 1e-16
SERIES_MAX_TERMS = 5000


def _is_nonpos_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Gamma function via the Lanczos approximation (g = 7, 9 terms)."""
    x = float(x)
    if _is_nonpos_int(x):
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    s = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        s += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * s


def rgamma(x: float) -> float:
    """Reciprocal Gamma, extended by zero at the poles."""
    if _is_nonpos_int(float(x)):
        return 0.0
    return 1.0 / gamma(x)


def _check_params(c: float):
    if _is_nonpos_int(c):
        raise ValueError(f"2F1 undefined for non-positive integer c = {c}")


def _series(a, b, c, z: np.ndarray) -> np.ndarray:
    """Gauss series summed until every term is below SERIES_RTOL relative."""
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(SERIES_MAX_TERMS):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + term
        if np.all(np.abs(term) <= SERIES_RTOL * np.abs(total)):
            return total
    raise ArithmeticError("2F1 series did not converge")


def gauss_sum(a: float, b: float, c: float) -> float:
    """2F1(a, b; c; 1) = G(c) G(c-a-b) / (G(c-a) G(c-b)) for c - a - b > 0."""
    _check_params(c)
    if not c - a - b > 0:
        raise ValueError("2F1 at z = 1 needs c - a - b > 0")
    return gamma(c) * gamma(c - a - b) * rgamma(c - a) * rgamma(c - b)


def _hyp2f1(a, b, c, z: np.ndarray, omz: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    lo = z <= 0.5
    one = omz == 0.0
    mid = ~lo & ~one
    if np.any(lo):
        out[lo] = _series(a, b, c, z[lo])
    if np.any(one):
        out[one] = gauss_sum(a, b, c)
    if np.any(mid):
        s = c - a - b
        if float(s).is_integer():
            raise ValueError("z in (1/2, 1) needs non-integer c - a - b")
        w = omz[mid]
        A = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b)
        B = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b)
        first = A * _series(a, b, 1.0 - s, w) if A != 0.0 else 0.0
        second = B * w**s * _series(c - a, c - b, 1.0 + s, w) if B != 0.0 else 0.0
        out[mid] = first + second
    return out


def hyp2f1(a: float, b: float, c: float, z):
    """Gauss hypergeometric function for real ``z`` in ``[0, 1]``."""
    _check_params(c)
    za = np.asarray(z, dtype=float)
    flat = np.atleast_1d(za).ravel()
    if np.any((flat < 0) | (flat > 1)) or not np.all(np.isfinite(flat)):
        raise ValueError("hyp2f1 supports 0 <= z <= 1 only")
    res = _hyp2f1(float(a), float(b), float(c), flat, 1.0 - flat).reshape(za.shape)
    return float(res) if za.ndim == 0 else res


def hyp2f1_partial_sums(a: float, b: float, c: float, z: float, n: int) -> np.ndarray:
    """First ``n`` partial sums of the Gauss series at ``z``."""
    k = np.arange(n - 1, dtype=float)
    ratios = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
    terms = np.concatenate([[1.0], np.cumprod(ratios)])
    return np.cumsum(terms)


def aitken(seq) -> np.ndarray:
    """One Aitken delta-squared pass: ``len(seq) - 2`` accelerated terms."""
    x = np.asarray(seq, dtype=float)
    d2 = x[2:] - 2.0 * x[1:-1] + x[:-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        acc = x[2:] - (x[2:] - x[1:-1]) ** 2 / d2
    return np.where(d2 == 0.0, x[2:], acc)


def gauss_sum_extrapolated(a: float, b: float, c: float, kmax: int = 20, passes: int = 2) -> float:
    """Value at z = 1 from partial sums at n = 2^k, accelerated by iterated Aitken.

    At z = 1 the tail decays like n^{-(c - a - b)}, so sampling at doubling
    indices turns it into a geometric sequence that Aitken handles.
    """
    if not c - a - b > 0:
        raise ValueError("the series at z = 1 converges only for c - a - b > 0")
    ps = hyp2f1_partial_sums(a, b, c, 1.0, 2**kmax + 1)
    seq = ps[[2**k for k in range(4, kmax + 1)]]
    for _ in range(passes):
        seq = aitken(seq)
    return float(seq[-1])


# ---------------------------------------------------------------- profile functions


def profile_constant(kappa: float) -> float:
    """sqrt(pi) G(3/2 - kappa) / G(1 - kappa), the z = 1 value of the profile's 2F1."""
    return math.sqrt(math.pi) * gamma(1.5 - kappa) * rgamma(1.0 - kappa)


def _use_quadrature(kappa: float) -> bool:
    return _is_nonpos_int(1.5 - kappa)


def _tail(x: np.ndarray, kappa: float) -> np.ndarray:
    """2F1(1/2-k, 1/2; 3/2-k; cos^2 x) cos x sign(x), the part regular at the poles."""
    c = np.cos(x)
    s2 = np.sin(x) ** 2
    return _hyp2f1(0.5 - kappa, 0.5, 1.5 - kappa, c * c, s2) * c * np.sign(x)


def _check_angle(x: np.ndarray):
    if np.any(~(np.abs(x) < 0.5 * np.pi)):
        raise ValueError("profile functions need |x| < pi/2")


def _quad_profile(x: np.ndarray, kappa: float, x0: float) -> np.ndarray:
    p = 1.0 - 2.0 * kappa
    vals = [quad(lambda s: np.cos(s) ** (-2.0 * kappa), x0, xi, epsabs=0, epsrel=1e-13)[0] for xi in x]
    return -p * np.cos(x) ** (2.0 * kappa) * np.asarray(vals)


def frak_r_kappa(x, kappa: float, x0: float):
    """Profile function with exponent ``2 kappa`` vanishing at ``x0``.

    It solves ``R' = -2 kappa tan(x) R - (1 - 2 kappa)`` with ``R(x0) = 0``.
    When ``3/2 - kappa`` is a non-positive integer the hypergeometric form is
    undefined and the equivalent integral is evaluated by quadrature.
    """
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    _check_angle(flat)
    _check_angle(np.array([x0]))
    if _use_quadrature(kappa):
        res = _quad_profile(flat, kappa, x0)
    else:
        # [tail - S cos^{2k}] sign, shifted to vanish at x0; the S terms cancel
        # exactly on the side of x0, so they are only kept across 0 (for
        # kappa < 0 they are huge near the poles and would cancel in floating point)
        c = np.cos(flat)
        t0 = float(_tail(np.array([x0]), kappa)[0])
        jump = np.sign(flat) - math.copysign(1.0, x0) * (x0 != 0.0)
        res = _tail(flat, kappa) - t0 * (c / math.cos(x0)) ** (2.0 * kappa)
        cross = jump != 0.0
        res[cross] -= profile_constant(kappa) * c[cross] ** (2.0 * kappa) * jump[cross]
    res = res.reshape(xa.shape)
    return float(res) if xa.ndim == 0 else res


def frak_r(x, y0: float):
    """Profile function of the E(1,1) flow, the exponent-2/3 member of the family."""
    return frak_r_kappa(x, 1.0 / 3.0, y0)


def frak_r_kappa_quad(x, kappa: float, x0: float):
    """Quadrature evaluation of the same profile, used as an independent route."""
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    _check_angle(flat)
    res = _quad_profile(flat, kappa, x0).reshape(xa.shape)
    return float(res) if xa.ndim == 0 else res

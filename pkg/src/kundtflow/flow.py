"""Left-invariant Killing spinorial flows.

State: the shape operator entries ``(uu, ul, ll, nn)`` and the coframe matrix
``U`` with ``e^t_a = U_ab e_b``.  The joint system is

    d theta / dt = beta * P(theta)            (ul is conserved)
    d U / dt     = beta * (-theta + lam A) U

and all three groups share a single angle variable

    angle(t) = angle_0 + (theta_ul + lam) B(t),      B(t) = int_0^t beta,

with ``angle_0 = arctan(theta_uu / 2 lam)`` on Tau2R and
``arctan(theta_nn / lam)`` otherwise.  Closed forms blow up when the angle
reaches +-pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _kernels
from .cauchy import ROTATION, CauchyPair, classify, hamiltonian_from_theta, ricci3_from_theta, theta_matrix, validate
from .errors import ConfigError, IntervalExceededError
from .specfun import frak_r_kappa

DEFAULT_GUARD = 1e-3
HALF_PI = 0.5 * math.pi


# ---------------------------------------------------------------- lapse


@dataclass(frozen=True)
class Lapse:
    """Spatially constant lapse; either a constant or a positive sampled table.

    Tables are interpolated by monotone cubic Hermite splines and the lapse is
    zero outside the table, so ``B`` is bounded in that case.
    """

    kind: str = "constant"
    value: float = 1.0
    t: Optional[tuple] = None
    beta: Optional[tuple] = None
    _interp: object = field(default=None, compare=False, repr=False)
    _anti: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "constant":
            if not self.value > 0:
                raise ConfigError("constant lapse must be positive")
        elif self.kind == "sampled":
            if self.t is None or self.beta is None or len(self.t) != len(self.beta) or len(self.t) < 2:
                raise ConfigError("sampled lapse needs matching t and beta tables of length >= 2")
            tt = np.asarray(self.t, dtype=float)
            bb = np.asarray(self.beta, dtype=float)
            if np.any(np.diff(tt) <= 0):
                raise ConfigError("lapse table times must be strictly increasing")
            if np.any(bb <= 0):
                raise ConfigError("lapse values must be positive")
            ip = PchipInterpolator(tt, bb, extrapolate=False)
            object.__setattr__(self, "_interp", ip)
            object.__setattr__(self, "_anti", ip.antiderivative())
        else:
            raise ConfigError(f"unknown lapse kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "Lapse":
        return cls("constant", float(value))

    @classmethod
    def sampled(cls, t: Sequence[float], beta: Sequence[float]) -> "Lapse":
        return cls("sampled", 1.0, tuple(float(x) for x in t), tuple(float(x) for x in beta))

    @classmethod
    def from_dict(cls, d: dict) -> "Lapse":
        kind = d.get("kind", "constant")
        if kind == "constant":
            return cls.constant(d.get("value", 1.0))
        return cls.sampled(d["t"], d["beta"])

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": "sampled", "t": list(self.t), "beta": list(self.beta)}

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "constant":
            return (-math.inf, math.inf)
        return (self.t[0], self.t[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full(t.shape, self.value) if t.ndim else self.value
        v = np.nan_to_num(self._interp(t), nan=0.0)
        return v if t.ndim else float(v)

    def _anti_clamped(self, t):
        lo, hi = self.support
        return self._anti(np.clip(t, lo, hi))

    def B(self, t):
        """Integral of the lapse from 0 to t."""
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = self.value * t
        else:
            out = self._anti_clamped(t) - self._anti_clamped(0.0)
        return out if t.ndim else float(out)

    def B_limits(self) -> tuple[float, float]:
        if self.kind == "constant":
            return (-math.inf, math.inf)
        lo, hi = self.support
        return (self.B(lo), self.B(hi))

    def inverse_B(self, target: float, tol: float = 1e-14) -> float:
        """Time t with B(t) = target (bisection; B is non-decreasing)."""
        if self.kind == "constant":
            return target / self.value
        lo_b, hi_b = self.B_limits()
        if not lo_b < target < hi_b:
            return math.inf if target > 0 else -math.inf
        lo, hi = (0.0, self.support[1]) if target > 0 else (self.support[0], 0.0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.B(mid) < target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= tol * max(1.0, abs(mid)):
                break
        return 0.5 * (lo + hi)


# ---------------------------------------------------------------- ODE right-hand sides


def theta_ode_rhs(theta, lam: float, beta: float) -> np.ndarray:
    """d/dt of (uu, ul, ll, nn)."""
    uu, ul, ll, nn = (float(v) for v in theta)
    return beta * np.array(
        [
            lam * lam + 2.0 * lam * ul + uu * uu + ul * ul,
            0.0,
            ll * uu + lam * lam - ul * ul,
            nn * uu + lam * lam + lam * ul,
        ]
    )


def coframe_ode_rhs(U: np.ndarray, theta, lam: float, beta: float) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    if th.shape == (4,):
        th = theta_matrix(*th)
    return beta * (-th + lam * ROTATION) @ U


# ---------------------------------------------------------------- angle and interval


def _branch(pair: CauchyPair) -> str:
    if pair.ul == -pair.lam:
        return "minus_lambda"
    return classify(pair).tag


def angle_rate(pair: CauchyPair) -> float:
    return pair.ul + pair.lam


def initial_angle(pair: CauchyPair) -> float:
    if _branch(pair) == "Tau2R":
        return math.atan(pair.uu / (2.0 * pair.lam))
    return math.atan(pair.nn / pair.lam)


def angle_at(pair: CauchyPair, lapse: Lapse, t):
    return initial_angle(pair) + angle_rate(pair) * np.asarray(lapse.B(t))


def _guard_mode(pair: CauchyPair) -> int:
    b = _branch(pair)
    if b == "minus_lambda":
        return _kernels.ANGLE_NONE
    return _kernels.ANGLE_UU if b == "Tau2R" else _kernels.ANGLE_NN


def maximal_interval(pair: CauchyPair, lapse: Lapse) -> tuple[float, float]:
    """Largest interval around 0 on which the angle stays inside (-pi/2, pi/2)."""
    validate(pair)
    w = angle_rate(pair)
    if w == 0:
        return (-math.inf, math.inf)
    a0 = initial_angle(pair)
    b_hi = (math.copysign(HALF_PI, w) - a0) / w
    b_lo = (-math.copysign(HALF_PI, w) - a0) / w
    return (lapse.inverse_B(b_lo), lapse.inverse_B(b_hi))


def _checked_angle(pair, lapse, t):
    ang = np.asarray(angle_at(pair, lapse, t), dtype=float)
    if np.any(~(np.abs(ang) < HALF_PI)):
        raise IntervalExceededError(f"t = {t} is outside the maximal interval {maximal_interval(pair, lapse)}")
    return ang


# ---------------------------------------------------------------- closed forms


def theta_closed_form(pair: CauchyPair, lapse: Lapse, t) -> np.ndarray:
    """(uu, ul, ll, nn) at time t (last axis)."""
    validate(pair)
    lam, uu0, ul, nn0 = pair.lam, pair.uu, pair.ul, pair.nn
    branch = _branch(pair)
    tt = np.asarray(t, dtype=float)
    if branch == "minus_lambda":
        comps = [np.zeros_like(tt), np.full_like(tt, ul), np.full_like(tt, 2.0 * nn0), np.full_like(tt, nn0)]
        return np.stack(comps, axis=-1)
    ang = _checked_angle(pair, lapse, tt)
    if branch == "Tau2R":
        amp = (2.0 * nn0 - uu0) / math.sqrt(4.0 + uu0**2 / lam**2)
        uu = 2.0 * lam * np.tan(ang)
        nn = amp / np.cos(ang) + lam * np.tan(ang)
        ll = np.zeros_like(uu)
    else:
        r = ul / lam
        nn = lam * np.tan(ang)
        uu = (1.0 + r) * nn
        ll = (1.0 - r) * nn
    return np.stack([uu, np.full_like(uu, ul), ll, nn], axis=-1)


def _coframe_profile(pair: CauchyPair, z: np.ndarray) -> np.ndarray:
    """E11 and Tau3Mu coframe as a function of the angle."""
    lam, ul, nn0 = pair.lam, pair.ul, pair.nn
    kappa = lam / (ul + lam)
    p = 1.0 - 2.0 * kappa
    z0 = math.atan(nn0 / lam)
    ratio = np.cos(z) / math.cos(z0)
    rk = frak_r_kappa(z, kappa, z0)
    tz = np.tan(z)
    drk = -2.0 * kappa * tz * rk - p
    pw = ratio ** (2.0 * kappa)
    Uuu = (nn0 / lam) * rk + pw
    dUuu = (nn0 / lam) * drk - 2.0 * kappa * tz * pw
    Uul = rk
    dUul = drk
    out = np.zeros(z.shape + (3, 3))
    out[..., 0, 0] = Uuu
    out[..., 0, 1] = Uul
    out[..., 1, 0] = -(tz * Uuu + dUuu) / p
    out[..., 1, 1] = -(tz * Uul + dUul) / p
    out[..., 2, 2] = ratio**kappa
    return out


def tau2_nn_entry(uu0: float, nn0: float, lam: float, x: np.ndarray) -> np.ndarray:
    """n-row scaling of the Tau2R coframe written through sec + tan."""
    x0 = math.atan(uu0 / (2.0 * lam))
    gamma = (uu0 - 2.0 * nn0) / (2.0 * lam * math.sqrt(4.0 + uu0**2 / lam**2))
    base = (1.0 + np.sin(x)) * math.cos(x0) / ((1.0 + math.sin(x0)) * np.cos(x))
    return np.sqrt(np.cos(x) / math.cos(x0)) * base**gamma


def tau2_nn_entry_half_angle(uu0: float, nn0: float, lam: float, x: np.ndarray) -> np.ndarray:
    """The same entry through the half-angle quotient."""
    x0 = math.atan(uu0 / (2.0 * lam))
    s2 = 1.0 + uu0**2 / (4.0 * lam**2)
    gamma = (uu0 - 2.0 * nn0) / (2.0 * lam * math.sqrt(4.0 + uu0**2 / lam**2))
    num = np.cos(0.5 * (x + x0)) + np.sin(0.5 * (x - x0))
    den = np.cos(0.5 * (x + x0)) - np.sin(0.5 * (x - x0))
    return (s2 * np.cos(x) ** 2) ** 0.25 * np.abs(num / den) ** gamma


def closed_form_coframe(pair: CauchyPair, lapse: Lapse, t) -> np.ndarray:
    """U^t (shape ``t.shape + (3, 3)``) from the per-group closed forms."""
    validate(pair)
    lam, uu0, nn0 = pair.lam, pair.uu, pair.nn
    tt = np.asarray(t, dtype=float)
    branch = _branch(pair)
    out = np.zeros(tt.shape + (3, 3))
    if branch == "minus_lambda":
        B = np.asarray(lapse.B(tt), dtype=float)
        decay = np.exp(-2.0 * nn0 * B)
        out[..., 0, 0] = 1.0
        out[..., 0, 1] = 2.0 * lam * B if nn0 == 0 else (lam / nn0) * (1.0 - decay)
        out[..., 1, 1] = decay
        out[..., 2, 2] = np.exp(-nn0 * B)
        return out
    ang = _checked_angle(pair, lapse, tt)
    if branch == "Tau2R":
        s = math.sqrt(1.0 + uu0**2 / (4.0 * lam**2))
        out[..., 0, 0] = s * np.cos(ang)
        out[..., 1, 0] = uu0 / (2.0 * lam) - s * np.sin(ang)
        out[..., 1, 1] = 1.0
        out[..., 2, 2] = tau2_nn_entry(uu0, nn0, lam, ang)
        return out
    return _coframe_profile(pair, ang)


def hamiltonian_t(pair: CauchyPair, lapse: Lapse, t):
    """Closed-form Hamiltonian function along the flow."""
    validate(pair)
    lam, uu0, nn0 = pair.lam, pair.uu, pair.nn
    branch = _branch(pair)
    tt = np.asarray(t, dtype=float)
    if branch == "minus_lambda":
        out = np.full(tt.shape, hamiltonian_from_theta(lam, pair.theta))
        return out if tt.ndim else float(out)
    sec2 = 1.0 / np.cos(_checked_angle(pair, lapse, tt)) ** 2
    if branch == "E11":
        out = -4.0 * lam**2 * sec2
    else:
        H0 = hamiltonian_from_theta(lam, pair.theta)
        if branch == "Tau2R":
            out = 4.0 * lam**2 * H0 / (uu0**2 + 4.0 * lam**2) * sec2
        else:
            out = lam**2 * H0 / (lam**2 + nn0**2) * sec2
    return out if tt.ndim else float(out)


def hamiltonian_numeric(theta, lam: float) -> float:
    """Scalar curvature minus |theta|^2 plus tr^2 plus 6 lam^2, from the state itself."""
    th = np.asarray(theta, dtype=float)
    if th.shape == (4,):
        th = theta_matrix(*th)
    return hamiltonian_from_theta(lam, th)


def hamiltonian_numeric_batch(thetas: np.ndarray, lam: float) -> np.ndarray:
    """Vectorised ``hamiltonian_numeric`` over rows of (uu, ul, ll, nn)."""
    th = np.asarray(thetas, dtype=float)
    mats = np.zeros(th.shape[:-1] + (3, 3))
    mats[..., 0, 0] = th[..., 0]
    mats[..., 0, 1] = mats[..., 1, 0] = th[..., 1]
    mats[..., 1, 1] = th[..., 2]
    mats[..., 2, 2] = th[..., 3]
    return np.atleast_1d(hamiltonian_from_theta(lam, mats))


def _safe_hamiltonian(pair, lapse, t) -> float:
    try:
        return float(hamiltonian_t(pair, lapse, t))
    except IntervalExceededError:
        return math.nan


def eta_einstein_residual(theta, pair: CauchyPair) -> float:
    """Distance of the state's Ricci tensor from the eta-Einstein model of its group."""
    lam = pair.lam
    th = np.asarray(theta, dtype=float)
    if th.shape == (4,):
        th = theta_matrix(*th)
    ric = ricci3_from_theta(lam, th)
    nn = th[2, 2]
    norm = math.hypot(lam, nn)
    if classify(pair).tag == "E11":
        eta = np.array([nn, lam, 0.0]) / norm
        model = 0.5 * hamiltonian_from_theta(lam, th) * np.outer(eta, eta)
    else:
        eta = np.array([lam, -nn, 0.0]) / norm
        model = (lam**2 + nn**2) * (-np.eye(3) + np.outer(eta, eta))
    return float(np.max(np.abs(ric - model)))


# ---------------------------------------------------------------- integration


@dataclass(frozen=True)
class FlowState:
    t: float
    B: float
    theta: np.ndarray  # (uu, ul, ll, nn)
    U: np.ndarray
    H: float
    H_numeric: float

    @property
    def theta_matrix(self) -> np.ndarray:
        return theta_matrix(*self.theta)


@dataclass
class FlowTrajectory:
    pair: CauchyPair
    lapse: Lapse
    interval: tuple[float, float]
    states: list[FlowState]
    status: str = "ok"
    step: float = 0.0
    error_estimate: Optional[float] = None

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.states])

    @property
    def Us(self) -> np.ndarray:
        return np.array([s.U for s in self.states])


def _rk4_run(pair: CauchyPair, lapse: Lapse, t_end: float, step: float, guard: float):
    n = max(1, int(math.ceil(abs(t_end) / step - 1e-12))) if t_end != 0 else 0
    h = t_end / n if n else 0.0
    k = np.arange(n)
    tk = k * h
    betas = np.stack([lapse(tk), lapse(tk + 0.5 * h), lapse(tk + h)], axis=1) if n else np.zeros((0, 3))
    thetas, Us, n_done = _kernels.rk4_flow(pair.components(), pair.lam, betas, h, _guard_mode(pair), guard)
    ts = np.arange(n_done + 1) * h
    return ts, thetas, Us, n_done < n, h


def integrate(
    pair: CauchyPair,
    lapse: Lapse,
    t_end: float,
    step: float,
    guard: float = DEFAULT_GUARD,
    record_every: int = 1,
    richardson: bool = False,
) -> FlowTrajectory:
    """Fixed-step classical RK4 on the joint (theta, U) system.

    Stops with status ``"singularity"`` once the group angle comes within
    ``guard`` of +-pi/2.  With ``richardson=True`` a half-step run provides an
    error estimate for the final coframe.
    """
    validate(pair)
    if not step > 0:
        raise ConfigError("step must be positive")
    if record_every < 1:
        raise ConfigError("record_every must be >= 1")
    ts, thetas, Us, stopped, h = _rk4_run(pair, lapse, t_end, step, guard)
    idx = list(range(0, len(ts), record_every))
    if idx[-1] != len(ts) - 1:
        idx.append(len(ts) - 1)
    Bs = np.asarray(lapse.B(ts[idx]), dtype=float)
    try:
        Hc = np.asarray(hamiltonian_t(pair, lapse, ts[idx]), dtype=float)
    except IntervalExceededError:
        Hc = np.array([_safe_hamiltonian(pair, lapse, ts[i]) for i in idx])
    th_rec = thetas[idx]
    Hn = hamiltonian_numeric_batch(th_rec, pair.lam)
    states = [
        FlowState(float(ts[i]), float(Bs[j]), th_rec[j].copy(), Us[i].copy(), float(Hc[j]), float(Hn[j]))
        for j, i in enumerate(idx)
    ]
    traj = FlowTrajectory(pair, lapse, maximal_interval(pair, lapse), states, "singularity" if stopped else "ok", abs(h))
    if richardson and not stopped and len(ts) > 1:
        _, _, Us2, stopped2, _ = _rk4_run(pair, lapse, t_end, 0.5 * abs(h), guard)
        if not stopped2:
            traj.error_estimate = float(np.max(np.abs(Us2[-1] - Us[-1]))) * 16.0 / 15.0
    return traj

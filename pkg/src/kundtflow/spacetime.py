"""Globally hyperbolic lifts of Killing spinorial flows.

Chart: ``(t, x1, x2, x3)``.  A :class:`GlobHypMetric` stores the lapse field
``beta(t, p)``, the coframe field ``E[n, a, i]`` (``e^t_a = E[a, i] dx^i``)
and the potential ``f`` used by the lift of the parabolic pair, so that

    g = -beta^2 dt^2 + h_t,   h_t = sum_a e^t_a (x) e^t_a .

Second fundamental forms are always recomputed from the metric as
``Theta = -d_t h / (2 beta)``; nothing here trusts the flow module's
closed-form Theta, which keeps the residual checks independent of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels
from . import geomkit as gk
from .cauchy import GroupChart, L, N, U, divergence_theta, group_chart, make_pair, validate
from .errors import ConfigError, DegenerateMetricError, PreconditionError
from .flow import FlowTrajectory, Lapse, closed_form_coframe, hamiltonian_t, integrate, maximal_interval
from .geomkit import DEFAULT_FD, FDConfig, MetricField, OneFormField
from .kundt import ParabolicPairField, SamplingPlan

T = 0
SPATIAL = (1, 2, 3)
P4Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GlobHypMetric:
    lam: float
    lapse: P4Fn  # (N, 4) -> (N,)
    coframe: P4Fn  # (N, 4) -> (N, 3, 3)
    frak_f: P4Fn  # (N, 4) -> (N,)
    hamiltonian: P4Fn  # (N, 4) -> (N,)
    box: tuple
    name: str = ""
    meta: dict = field(default_factory=dict)

    def spatial_metric(self, P) -> np.ndarray:
        E = self.coframe(gk.as_points(P, 4))
        return np.einsum("nai,naj->nij", E, E)

    def __call__(self, P) -> np.ndarray:
        P = gk.as_points(P, 4)
        out = np.zeros((P.shape[0], 4, 4))
        out[:, T, T] = -self.lapse(P) ** 2
        out[:, 1:, 1:] = self.spatial_metric(P)
        return out

    def metric_field(self) -> MetricField:
        return MetricField(4, self, "lorentzian")

    def with_lapse_scale(self, s: float) -> "GlobHypMetric":
        """Same coframe family with the lapse multiplied by ``s``."""
        base = self.lapse
        return replace(self, lapse=lambda P: s * base(P), name=f"{self.name}*beta{s:g}")

    def plan(self, counts=(4, 4, 4, 4), tol: float = 1e-5) -> SamplingPlan:
        return SamplingPlan(self.box, tuple(counts), tol)

    def check(self, P) -> None:
        """-+++ signature and positive lapse at every sample."""
        P = gk.as_points(P, 4)
        neg, pos = gk.signature_counts(self(P))
        bad = (neg != 1) | (pos != 3) | ~(self.lapse(P) > 0)
        if np.any(bad):
            raise DegenerateMetricError("spacetime metric is not -+++ with positive lapse", P[bad])


@dataclass(frozen=True)
class SplitPairData:
    u0: P4Fn  # (N,)
    u_perp: P4Fn  # (N, 3)
    l_perp: P4Fn  # (N, 3)


# ---------------------------------------------------------------- realizations


def _chart_potential(pair) -> Callable[[np.ndarray], np.ndarray]:
    """f with df = -(Theta(e_u) + lam e_l) on the group chart.

    A closed left-invariant one-form w integrates to the homomorphism
    ``x -> sum_i x_i w(E_i)`` in exponential coordinates of the second kind,
    and ``Theta_t(e_u) + lam e_l`` does not change along the flow.
    """
    c = np.array([pair.uu, pair.ul + pair.lam, pair.theta[U, N]])
    return lambda P: -(P[:, 1:] @ c)


def _coframe_from_U(chart: GroupChart, Ut: Callable[[np.ndarray], np.ndarray]) -> P4Fn:
    def fn(P):
        return np.einsum("nab,nbi->nai", Ut(P[:, T]), chart.coframe(P[:, 1:]))

    return fn


def _default_box(t_hi: float) -> tuple:
    return ((0.0, t_hi),) + ((-1.0, 1.0),) * 3


def assemble_spacetime(
    traj: FlowTrajectory,
    realization: Optional[GroupChart] = None,
    box: Optional[tuple] = None,
    cfg: FDConfig = DEFAULT_FD,
) -> GlobHypMetric:
    """Lift a left-invariant trajectory to ``-beta^2 dt^2 + h_t`` on its group chart.

    ``U^t`` is interpolated between trajectory states by a C^2 cubic spline;
    every state spacing must be at most a quarter of the FD stencil width so
    that time stencils resolve the interpolant.
    """
    pair = traj.pair
    chart = realization or group_chart(pair)
    ts = traj.t
    if ts.size < 4:
        raise PreconditionError("trajectory needs at least 4 states")
    width = 4.0 * cfg.step * max(1.0, float(np.max(np.abs(ts))))
    if float(np.max(np.diff(ts))) > width / 4.0 + 1e-15:
        raise PreconditionError("trajectory too sparse for the FD step: need >= 4 states per stencil width")
    spline = CubicSpline(ts, traj.Us.reshape(ts.size, 9), axis=0)
    lapse = traj.lapse
    t_hi = float(ts[-1])
    return GlobHypMetric(
        lam=pair.lam,
        lapse=lambda P: np.asarray(lapse(P[:, T]), dtype=float),
        coframe=_coframe_from_U(chart, lambda t: spline(t).reshape(-1, 3, 3)),
        frak_f=_chart_potential(pair),
        hamiltonian=lambda P: np.asarray(hamiltonian_t(pair, lapse, P[:, T]), dtype=float),
        box=box or _default_box(t_hi),
        name="trajectory",
        meta={"pair": pair, "lapse": lapse, "interval": traj.interval},
    )


def closed_form_spacetime(pair, lapse: Lapse, t_hi: float, box: Optional[tuple] = None) -> GlobHypMetric:
    """Same lift with the closed-form coframe in place of an integrated one."""
    validate(pair)
    chart = group_chart(pair)
    return GlobHypMetric(
        lam=pair.lam,
        lapse=lambda P: np.asarray(lapse(P[:, T]), dtype=float),
        coframe=_coframe_from_U(chart, lambda t: closed_form_coframe(pair, lapse, t)),
        frak_f=_chart_potential(pair),
        hamiltonian=lambda P: np.asarray(hamiltonian_t(pair, lapse, P[:, T]), dtype=float),
        box=box or _default_box(t_hi),
        name="closed-form",
        meta={"pair": pair, "lapse": lapse, "interval": maximal_interval(pair, lapse)},
    )


def _tau31_coframe(lam: float, angle: Callable[[np.ndarray], np.ndarray]) -> P4Fn:
    """e_u = e^{-lam x}(cos a dy - sin a dz), e_l = dx, e_n = e^{-lam x}(sin a dy + cos a dz)."""

    def fn(P):
        a = angle(P[:, T])
        s = np.exp(-lam * P[:, 1])
        E = np.zeros((P.shape[0], 3, 3))
        E[:, U, 1], E[:, U, 2] = s * np.cos(a), -s * np.sin(a)
        E[:, L, 0] = 1.0
        E[:, N, 1], E[:, N, 2] = s * np.sin(a), s * np.cos(a)
        return E

    return fn


def rotating_spacetime(a: float = 0.3, b: float = 0.5, c: float = 2.0, lam: float = 1.0, t_hi: float = 1.0) -> GlobHypMetric:
    """Static-h flow on tau_{3,1} whose coframe rotates at rate ``-b`` in the (u, n) plane.

    ``dbeta_t = a e_u - lam beta e_l + b e_n`` integrates to
    ``beta e^{lam x} = (a cos th + b sin th) y + (b cos th - a sin th) z + c``
    with ``th = -b t``.  Here ``df = -lam dx`` and ``d_t f = dbeta(e_u) = a``.
    """
    a, b, c, lam = float(a), float(b), float(c), float(lam)
    if lam == 0:
        raise ConfigError("lambda must be nonzero")
    angle = lambda t: -b * np.asarray(t, dtype=float)  # noqa: E731

    def lapse(P):
        th = angle(P[:, T])
        y, z = P[:, 2], P[:, 3]
        lin = (a * np.cos(th) + b * np.sin(th)) * y + (b * np.cos(th) - a * np.sin(th)) * z
        return np.exp(-lam * P[:, 1]) * (lin + c)

    return GlobHypMetric(
        lam=lam,
        lapse=lapse,
        coframe=_tau31_coframe(lam, angle),
        frak_f=lambda P: -lam * P[:, 1] + a * P[:, T],
        hamiltonian=lambda P: np.zeros(P.shape[0]),
        box=_default_box(t_hi),
        name="rotating",
        meta={"a": a, "b": b, "c": c},
    )


def stationary_tau31(c1: float = 0.5, c2: float = 1.0, lam: float = 1.0) -> GlobHypMetric:
    """``-(c1 y + c2)^2 e^{-2 lam x} dt^2 + dx^2 + e^{-2 lam x}(dy^2 + dz^2)``."""
    if c2 <= abs(c1):
        raise ConfigError("stationary preset needs c2 > |c1| so that the lapse is positive on the box")
    g = rotating_spacetime(a=c1, b=0.0, c=c2, lam=lam)
    return replace(g, name="stationary-tau31", meta={"c1": float(c1), "c2": float(c2)})


def ads4(lam: float = 1.0, c2: float = 1.0) -> GlobHypMetric:
    return replace(stationary_tau31(0.0, c2, lam), name="ads4")


# ---------------------------------------------------------------- shared derivatives


def _tpartial(fn: Callable, P: np.ndarray, cfg: FDConfig) -> np.ndarray:
    return gk.partial_axis(fn, P, T, cfg)


def _spartial(fn: Callable, P: np.ndarray, cfg: FDConfig) -> np.ndarray:
    """D[n, i, ...] = d_i fn over the spatial axes only."""
    return np.stack([gk.partial_axis(fn, P, ax, cfg) for ax in SPATIAL], axis=1)


def _sd(fn: Callable, P: np.ndarray, cfg: FDConfig) -> np.ndarray:
    D = _spartial(fn, P, cfg)
    return D - np.swapaxes(D, 1, 2)


def theta_field(g: GlobHypMetric, cfg: FDConfig = DEFAULT_FD) -> P4Fn:
    """Second fundamental form ``-d_t h / (2 beta)`` in chart components."""

    def fn(P):
        return -_tpartial(g.spatial_metric, P, cfg) / (2.0 * g.lapse(P)[:, None, None])

    return fn


def _frame_fields(g: GlobHypMetric, cfg: FDConfig):
    """Closures for dbeta (spatial), Theta(e_a), dbeta(e_a) and h^{-1}."""
    th = theta_field(g, cfg)

    def hinv(P):
        return gk.inverse_metric(g.spatial_metric(P), P)

    def dbeta(P):
        return _spartial(g.lapse, P, cfg)

    def theta_of(w: Callable) -> Callable:
        return lambda P: np.einsum("nij,njk,nk->ni", th(P), hinv(P), w(P))

    def dbeta_of(w: Callable) -> Callable:
        return lambda P: gk.inner_oneforms(hinv(P), dbeta(P), w(P))

    return th, hinv, dbeta, theta_of, dbeta_of


def _e(g: GlobHypMetric, a: int) -> Callable:
    return lambda P: g.coframe(P)[:, a, :]


# ---------------------------------------------------------------- Ricci identity


def _check_interior(g: GlobHypMetric, P: np.ndarray, depth: int, cfg: FDConfig) -> None:
    h = gk.step_sizes(P, cfg) * 2.0 * depth
    lo = np.array([b[0] for b in g.box])
    hi = np.array([b[1] for b in g.box])
    bad = np.any((P - h < lo) | (P + h > hi), axis=1)
    if np.any(bad):
        raise PreconditionError(f"{int(bad.sum())} sample(s) too close to the domain boundary for nested stencils")


def ricci4_fields(g: GlobHypMetric, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Ric + 3 lam^2 g - H/2 (beta dt + e_u)^2 at each point."""
    P = gk.as_points(P, 4)
    _check_interior(g, P, 2, cfg)
    R = gk.ricci(g, P, cfg)
    w = np.zeros((P.shape[0], 4))
    w[:, T] = g.lapse(P)
    w[:, 1:] = g.coframe(P)[:, U, :]
    return R + 3.0 * g.lam**2 * g(P) - 0.5 * g.hamiltonian(P)[:, None, None] * gk.outer(w, w)


def ricci4_residual(g: GlobHypMetric, P, cfg: FDConfig = DEFAULT_FD) -> float:
    P = gk.as_points(P, 4)
    g.check(P)
    res = gk.map_points(lambda Q: ricci4_fields(g, Q, cfg), P, chunk=32)
    return float(np.max(np.abs(res)))


def einstein_residual4(g: GlobHypMetric, P, cfg: FDConfig = DEFAULT_FD) -> float:
    """max |Ric + 3 lam^2 g| (no Hamiltonian term)."""
    P = gk.as_points(P, 4)
    _check_interior(g, P, 2, cfg)
    res = gk.map_points(lambda Q: gk.ricci(g, Q, cfg) + 3.0 * g.lam**2 * g(Q), P, chunk=32)
    return float(np.max(np.abs(res)))


# ---------------------------------------------------------------- flow equations


def flow_equation_fields(g: GlobHypMetric, P, cfg: FDConfig = DEFAULT_FD) -> dict:
    P = gk.as_points(P, 4)
    lam = g.lam
    th, hinv, dbeta, theta_of, dbeta_of = _frame_fields(g, cfg)
    eu, el, en = _e(g, U), _e(g, L), _e(g, N)
    beta = g.lapse(P)[:, None]
    Eu, El, En = eu(P), el(P), en(P)
    db = dbeta(P)
    Tu, Tl, Tn = theta_of(eu)(P), theta_of(el)(P), theta_of(en)(P)
    bu, bl, bn = (dbeta_of(w)(P)[:, None] for w in (eu, el, en))
    dt_eu, dt_el, dt_en = (_tpartial(w, P, cfg) for w in (eu, el, en))
    out = {
        "I_u": dt_eu + bu * Eu + beta * Tu - db - lam * beta * El,
        "I_l": dt_el + beta * Tl + (bl + lam * beta) * Eu,
        "II_n": dt_en + beta * Tn + bn * Eu,
        "II_theta": _tpartial(theta_of(eu), P, cfg) + lam * dt_el + _spartial(dbeta_of(eu), P, cfg),
        "III_u": _sd(eu, P, cfg) - gk.wedge(Tu - lam * El, Eu),
        "III_l": _sd(el, P, cfg) - gk.wedge(Tl, Eu),
        "III_n": _sd(en, P, cfg) + lam * gk.wedge(El, En) - gk.wedge(Tn, Eu),
        "IV_closed": _sd(lambda Q: theta_of(eu)(Q) + lam * el(Q), P, cfg),
    }
    return out


def flow_equation_residuals(g: GlobHypMetric, P, cfg: FDConfig = DEFAULT_FD) -> dict:
    """Maxima of the flow equations; the cohomological condition is tested as closedness."""
    P = gk.as_points(P, 4)
    _check_interior(g, P, 2, cfg)
    f = flow_equation_fields(g, P, cfg)
    return {k: float(np.max(np.abs(v))) for k, v in f.items()}


# ---------------------------------------------------------------- evolution system


def split_from_flow(g: GlobHypMetric) -> SplitPairData:
    """u0 = e^f, u_perp = e^f e_u, l_perp = e_l."""

    def u0(P):
        return np.exp(g.frak_f(P))

    return SplitPairData(u0, lambda P: u0(P)[:, None] * g.coframe(P)[:, U, :], _e(g, L))


def check_split(g: GlobHypMetric, split: SplitPairData, P, tol: float = 1e-8) -> dict:
    P = gk.as_points(P, 4)
    hi = gk.inverse_metric(g.spatial_metric(P), P)
    u0, up, lp = split.u0(P), split.u_perp(P), split.l_perp(P)
    res = {
        "u0^2-|u|^2": float(np.max(np.abs(u0**2 - gk.inner_oneforms(hi, up, up)) / (1.0 + u0**2))),
        "|l|^2-1": float(np.max(np.abs(gk.inner_oneforms(hi, lp, lp) - 1.0))),
        "h(u,l)": float(np.max(np.abs(gk.inner_oneforms(hi, up, lp)) / (1.0 + np.abs(u0)))),
    }
    for k, v in res.items():
        if v > tol:
            raise PreconditionError(f"split data invariant violated: {k} = {v:.3e}")
    return res


def _spatial_christoffel(g: GlobHypMetric, P: np.ndarray, cfg: FDConfig) -> np.ndarray:
    Hm = g.spatial_metric(P)
    return _kernels.christoffel(gk.inverse_metric(Hm, P), _spartial(g.spatial_metric, P, cfg))


def _nabla(w: Callable, gam: np.ndarray, P: np.ndarray, cfg: FDConfig) -> np.ndarray:
    return _spartial(w, P, cfg) - np.einsum("ncab,nc->nab", gam, w(P))


def evolution_fields(g: GlobHypMetric, split: SplitPairData, P, cfg: FDConfig = DEFAULT_FD) -> dict:
    P = gk.as_points(P, 4)
    lam = g.lam
    th, hinv, dbeta, theta_of, dbeta_of = _frame_fields(g, cfg)
    beta = g.lapse(P)
    b = beta[:, None]
    u0 = split.u0(P)
    u0c = u0[:, None]
    up, lp = split.u_perp(P), split.l_perp(P)
    Th = th(P)
    Tu, Tl = theta_of(split.u_perp)(P), theta_of(split.l_perp)(P)
    db = dbeta(P)
    gam = _spatial_christoffel(g, P, cfg)
    Hm = g.spatial_metric(P)
    dbl = dbeta_of(split.l_perp)(P)[:, None]
    return {
        "dt_u": _tpartial(split.u_perp, P, cfg) + b * Tu - u0c * db - lam * u0c * b * lp,
        "dt_l": u0c * _tpartial(split.l_perp, P, cfg) + b * u0c * Tl + (dbl + lam * b) * up,
        "nabla_u": _nabla(split.u_perp, gam, P, cfg) + u0[:, None, None] * Th - lam * gk.wedge(up, lp),
        "nabla_l": u0[:, None, None] * _nabla(split.l_perp, gam, P, cfg)
        - gk.outer(Tl, up)
        - lam * u0[:, None, None] * (gk.outer(lp, lp) - Hm),
        "dt_u0": _tpartial(split.u0, P, cfg) - dbeta_of(split.u_perp)(P),
        "d_u0": _spartial(split.u0, P, cfg) + Tu + lam * u0c * lp,
    }


def evolution_residuals(g: GlobHypMetric, split: SplitPairData, P, cfg: FDConfig = DEFAULT_FD, tol: float = 1e-8) -> dict:
    P = gk.as_points(P, 4)
    check_split(g, split, P, tol)
    _check_interior(g, P, 2, cfg)
    return {k: float(np.max(np.abs(v))) for k, v in evolution_fields(g, split, P, cfg).items()}


# ---------------------------------------------------------------- map Xi


def xi_pair(g: GlobHypMetric, cfg: FDConfig = DEFAULT_FD) -> ParabolicPairField:
    """u = e^f (beta dt + e_u), l = e_l and the matching kappa.

    ``kappa = -e^{-f}(lam beta + dbeta(e_l)) dt + e^{-f} Theta(e_l)`` follows
    from ``dl = kappa ^ u`` once the flow equations hold.
    """
    th, hinv, dbeta, theta_of, dbeta_of = _frame_fields(g, cfg)
    el = _e(g, L)

    def u(P):
        out = np.zeros((P.shape[0], 4))
        out[:, T] = g.lapse(P)
        out[:, 1:] = g.coframe(P)[:, U, :]
        return np.exp(g.frak_f(P))[:, None] * out

    def l(P):
        out = np.zeros((P.shape[0], 4))
        out[:, 1:] = el(P)
        return out

    def kappa(P):
        ef = np.exp(-g.frak_f(P))
        out = np.zeros((P.shape[0], 4))
        out[:, T] = -ef * (g.lam * g.lapse(P) + dbeta_of(el)(P))
        out[:, 1:] = ef[:, None] * theta_of(el)(P)
        return out

    return ParabolicPairField(OneFormField(4, u), OneFormField(4, l), OneFormField(4, kappa))


# ---------------------------------------------------------------- constraints


def constraint_preservation(traj: FlowTrajectory) -> dict:
    """Hamiltonian and momentum constraints recomputed from every stored Theta."""
    from .cauchy import theta_matrix

    th = np.array([theta_matrix(*s) for s in traj.thetas])
    H = np.array([s.H_numeric for s in traj.states])
    mom = divergence_theta(traj.pair.lam, th)
    return {"hamiltonian": float(np.max(np.abs(H))), "momentum": float(np.max(np.abs(mom)))}


# ---------------------------------------------------------------- presets


def _flow_preset(group: str, lam: float, t_hi: float, step: float = 1e-4, closed: bool = False, **theta):
    pair = make_pair(group, lam, **theta)
    lapse = Lapse.constant(1.0)
    lo, hi = maximal_interval(pair, lapse)
    if not 0.0 < t_hi < hi:
        raise ConfigError(f"t_end = {t_hi} must lie in (0, {hi:.6g}), the maximal interval")
    if closed:
        return replace(closed_form_spacetime(pair, lapse, t_hi), name=f"flow-{group}")
    traj = integrate(pair, lapse, t_hi, step)
    return replace(assemble_spacetime(traj), name=f"flow-{group}")


def flow_e11(lam: float = 0.5, theta_nn: float = 0.25, t_end: float = 0.4, **kw) -> GlobHypMetric:
    return _flow_preset("E11", lam, t_end, theta_nn=theta_nn, **kw)


def flow_tau2r(lam: float = 0.5, theta_uu: float = 0.5, theta_nn: float = 0.5, t_end: float = 0.6, **kw) -> GlobHypMetric:
    return _flow_preset("Tau2R", lam, t_end, theta_uu=theta_uu, theta_nn=theta_nn, **kw)


def flow_tau3(lam: float = 0.5, theta_ul: float = 0.25, theta_nn: float = 0.5, t_end: float = 0.6, **kw) -> GlobHypMetric:
    return _flow_preset("Tau3Mu", lam, t_end, theta_ul=theta_ul, theta_nn=theta_nn, **kw)


@dataclass(frozen=True)
class SpacetimePreset:
    name: str
    factory: Callable[..., GlobHypMetric]
    description: str
    defaults: dict = field(default_factory=dict)

    def build(self, **params) -> GlobHypMetric:
        return self.factory(**{**self.defaults, **params})


PRESETS = {
    "ads4": SpacetimePreset("ads4", ads4, "universal cover of AdS4 in tau_{3,1} coordinates", {"lam": 1.0, "c2": 1.0}),
    "stationary-tau31": SpacetimePreset(
        "stationary-tau31", stationary_tau31, "beta = (c1 y + c2) e^{-lam x}", {"c1": 0.5, "c2": 1.0, "lam": 1.0}
    ),
    "rotating": SpacetimePreset(
        "rotating", rotating_spacetime, "coframe rotating in the (u, n) plane", {"a": 0.3, "b": 0.5, "c": 2.0, "lam": 1.0}
    ),
    "flow-E11": SpacetimePreset("flow-E11", flow_e11, "E(1,1) flow with unit lapse"),
    "flow-tau2R": SpacetimePreset("flow-tau2R", flow_tau2r, "tau_2 + R flow with unit lapse"),
    "flow-tau3": SpacetimePreset("flow-tau3", flow_tau3, "tau_{3,mu} flow with unit lapse"),
}


def preset(name: str) -> SpacetimePreset:
    if name not in PRESETS:
        raise ConfigError(f"unknown spacetime preset {name!r}; known: {sorted(PRESETS)}")
    return PRESETS[name]


def verify(g: GlobHypMetric, plan: SamplingPlan, cfg: FDConfig = DEFAULT_FD) -> dict:
    """Full residual report: Ricci identity, flow and evolution systems, Xi pair checks."""
    from .kundt import killing_residuals, optical_invariants

    P = plan.points()
    g.check(P)
    pair = xi_pair(g, cfg)
    return {
        "ricci4": ricci4_residual(g, P, cfg),
        "flow": flow_equation_residuals(g, P, cfg),
        "evolution": evolution_residuals(g, split_from_flow(g), P, cfg),
        "killing": killing_residuals(g, pair, g.lam, plan, cfg),
        "optical": {k: v for k, v in optical_invariants(g, pair.u, plan, cfg).items() if "signed" not in k},
        "samples": int(P.shape[0]),
    }

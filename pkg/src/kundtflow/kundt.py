"""Standard conformally Brinkmann metrics and their adapted parabolic pairs.

Chart: ``(x_u, x_v, y, z)``.  A family record holds closures ``f(xu, Y)``
where ``xu`` has shape ``(N,)`` and ``Y`` has shape ``(N, 2)``.  The metric is

    g = H dx_u^2 + e^F dx_u (.) (dx_v + beta) + dF (x) dF / (4 lam^2) + e^F w (x) w

with ``w = dG`` when a potential ``G`` is given.  Base-surface derivatives
and ``x_u``-derivatives are finite differences unless analytic ones are
supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import geomkit as gk
from .errors import ConfigError, DegenerateMetricError, PreconditionError
from .geomkit import DEFAULT_FD, FDConfig, MetricField, OneFormField

Family = Callable[[np.ndarray, np.ndarray], np.ndarray]

XU, XV, Y1, Y2 = 0, 1, 2, 3


@dataclass(frozen=True)
class KundtFamilies:
    lam: float
    F: Family
    H: Family
    G: Optional[Family] = None
    omega: Optional[Family] = None
    beta: Optional[Family] = None
    # optional analytic data (xu, Y) -> dict with dF, dF_xu, q, q_xu
    derivatives: Optional[Callable] = None
    # optional extra metric term on 4D points, used to build off-family metrics
    perturbation: Optional[Callable[[np.ndarray], np.ndarray]] = None
    periodic_w: bool = False
    cfg: FDConfig = DEFAULT_FD

    def __post_init__(self):
        if self.lam == 0:
            raise ConfigError("lambda must be nonzero")
        if (self.G is None) == (self.omega is None):
            raise ConfigError("exactly one of G or omega must be given")


@dataclass(frozen=True)
class ParabolicPairField:
    u: OneFormField
    l: OneFormField
    kappa: OneFormField


@dataclass(frozen=True)
class SamplingPlan:
    box: tuple  # ((lo, hi),) * 4
    counts: tuple = (5, 5, 5, 5)
    tol: float = 1e-5

    def __post_init__(self):
        if len(self.box) != len(self.counts):
            raise ConfigError("sampling box and counts need the same length")
        if any(c < 3 for c in self.counts):
            raise ConfigError("sample counts must be >= 3 per axis")
        if any(not hi > lo for lo, hi in self.box):
            raise ConfigError("sampling box needs lo < hi on every axis")

    def points(self) -> np.ndarray:
        axes = [np.linspace(lo, hi, n + 2)[1:-1] for (lo, hi), n in zip(self.box, self.counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


# ---------------------------------------------------------------- family plumbing


def _split(P3: np.ndarray):
    return P3[:, 0], P3[:, 1:3]


def _as3(fn: Family) -> Callable[[np.ndarray], np.ndarray]:
    return lambda P3: np.asarray(fn(*_split(P3)), dtype=float)


def family_gradient(fam: KundtFamilies, fn: Family, xu, Y) -> np.ndarray:
    """(d_xu, d_y, d_z) of a scalar family by stencils in the (xu, y, z) chart."""
    P3 = np.column_stack([xu, Y])
    return gk.partial(_as3(fn), P3, fam.cfg)


def base_gradient(fam: KundtFamilies, fn: Family, xu, Y) -> np.ndarray:
    """(d_y, d_z) of a scalar family at fixed x_u."""
    P3 = np.column_stack([xu, Y])
    f3 = _as3(fn)
    return np.stack([gk.partial_axis(f3, P3, 1, fam.cfg), gk.partial_axis(f3, P3, 2, fam.cfg)], axis=1)


def dF(fam: KundtFamilies, xu, Y) -> np.ndarray:
    return base_gradient(fam, fam.F, xu, Y)


def omega(fam: KundtFamilies, xu, Y) -> np.ndarray:
    if fam.omega is not None:
        return np.asarray(fam.omega(xu, Y), dtype=float)
    return base_gradient(fam, fam.G, xu, Y)


def beta(fam: KundtFamilies, xu, Y) -> np.ndarray:
    if fam.beta is None:
        return np.zeros((len(xu), 2))
    return np.asarray(fam.beta(xu, Y), dtype=float)


def _q_from(fam: KundtFamilies, d: np.ndarray, xu, Y) -> np.ndarray:
    w = omega(fam, xu, Y)
    eF = np.exp(fam.F(xu, Y))
    return gk.outer(d, d) / (4.0 * fam.lam**2) + eF[:, None, None] * gk.outer(w, w)


def base_q(fam: KundtFamilies, xu, Y) -> np.ndarray:
    return _q_from(fam, dF(fam, xu, Y), xu, Y)


def ell(fam: KundtFamilies, xu, Y) -> np.ndarray:
    return -dF(fam, xu, Y) / (2.0 * fam.lam)


def ell_sharp(fam: KundtFamilies, xu, Y) -> np.ndarray:
    return gk.raise_index(np.linalg.inv(base_q(fam, xu, Y)), ell(fam, xu, Y))


def _xu_derivative(fam: KundtFamilies, fn: Callable, xu, Y) -> np.ndarray:
    """d/dx_u of a (vector-valued) family by a stencil along x_u only."""
    P3 = np.column_stack([xu, Y])
    return gk.partial_axis(fn, P3, 0, fam.cfg)


# ---------------------------------------------------------------- metrics


def metric_components(fam: KundtFamilies, P: np.ndarray) -> np.ndarray:
    xu, Y = P[:, XU], P[:, 2:4]
    n = P.shape[0]
    eF = np.exp(fam.F(xu, Y))
    G = np.zeros((n, 4, 4))
    G[:, XU, XU] = fam.H(xu, Y)
    G[:, XU, XV] = G[:, XV, XU] = eF
    b = beta(fam, xu, Y)
    G[:, XU, 2:] = eF[:, None] * b
    G[:, 2:, XU] = eF[:, None] * b
    G[:, 2:, 2:] = base_q(fam, xu, Y)
    if fam.perturbation is not None:
        G = G + fam.perturbation(P)
    return G


def assemble_metric(fam: KundtFamilies, plan: Optional[SamplingPlan] = None) -> MetricField:
    """Lorentzian metric of the family; with a plan, signature is checked at its samples."""
    g = MetricField(4, lambda P: metric_components(fam, P), "lorentzian")
    if plan is not None:
        P = plan.points()
        try:
            ok = gk.check_signature(g, P)
        except DegenerateMetricError as exc:
            raise DegenerateMetricError(f"degenerate family: {exc}", exc.points) from exc
        if not np.all(ok):
            raise DegenerateMetricError(
                f"degenerate family: signature is not -+++ at {P[~ok][0].tolist()}", P[~ok]
            )
    return g


def base_metric(fam: KundtFamilies, xu: float) -> MetricField:
    def fn(Y):
        return base_q(fam, np.full(Y.shape[0], float(xu)), Y)

    return MetricField(2, fn, "riemannian")


def _base_samples(plan: SamplingPlan) -> np.ndarray:
    P = plan.points()
    return np.unique(P[:, [XU, Y1, Y2]], axis=0)


def check_base_constraints(fam: KundtFamilies, plan: SamplingPlan) -> dict:
    """Residual maxima of the base-surface system at the plan's (x_u, y, z) samples."""
    S = _base_samples(plan)
    out = {"norm_dF": 0.0, "hessian": 0.0, "laplacian": 0.0}
    lam2 = fam.lam**2
    for xu in np.unique(S[:, 0]):
        Y = S[S[:, 0] == xu][:, 1:]
        q = base_metric(fam, xu)
        Fx = lambda Z, xu=xu: fam.F(np.full(Z.shape[0], xu), Z)
        dFx = lambda Z, xu=xu: dF(fam, np.full(Z.shape[0], xu), Z)
        Q = q(Y)
        qinv = gk.inverse_metric(Q, Y)
        d = dFx(Y)
        norm = gk.inner_oneforms(qinv, d, d) - 4.0 * lam2
        hess = gk.covderiv_oneform(dFx, q, Y, fam.cfg)
        hres = hess + 0.5 * gk.outer(d, d) - 2.0 * lam2 * Q
        lap = gk.divergence(dFx, q, Y, fam.cfg) - 2.0 * lam2
        out["norm_dF"] = max(out["norm_dF"], float(np.max(np.abs(norm))))
        out["hessian"] = max(out["hessian"], float(np.max(np.abs(hres))))
        out["laplacian"] = max(out["laplacian"], float(np.max(np.abs(lap))))
    out["laplacian_model"] = "Laplacian of F compared with the constant 2 lam^2"
    return out


# ---------------------------------------------------------------- Upsilon and beta


def _star(fam: KundtFamilies, w: np.ndarray, xu, Y, Q: Optional[np.ndarray] = None) -> np.ndarray:
    if Q is None:
        Q = base_q(fam, xu, Y)
    return gk.hodge_star_2d(w, lambda Z: Q, 1, Y)


def upsilon(fam: KundtFamilies, xu, Y, method: str = "fd") -> np.ndarray:
    """Source density of the beta equation in the (y, z) chart.

    ``method="fd"`` differentiates the families by stencils;
    ``method="analytic"`` uses ``fam.derivatives``.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    xu = np.broadcast_to(np.asarray(xu, dtype=float), (Y.shape[0],)).copy()
    lam = fam.lam
    if method == "fd":
        d = dF(fam, xu, Y)
        Q = _q_from(fam, d, xu, Y)

        def star_dF(P3):
            x, Z = _split(P3)
            dz = dF(fam, x, Z)
            return _star(fam, dz, x, Z, _q_from(fam, dz, x, Z))

        def dF3(P3):
            return dF(fam, *_split(P3))

        d_star = _xu_derivative(fam, star_dF, xu, Y)
        star_d = _star(fam, _xu_derivative(fam, dF3, xu, Y), xu, Y, Q)
    elif method == "analytic":
        if fam.derivatives is None:
            raise ConfigError("analytic Upsilon needs family derivatives")
        D = fam.derivatives(xu, Y)
        d, d_xu, Q, Q_xu = (np.asarray(D[k], dtype=float) for k in ("dF", "dF_xu", "q", "q_xu"))
        Qi = np.linalg.inv(Q)
        sq = np.sqrt(np.linalg.det(Q))
        up = gk.raise_index(Qi, d)
        up_xu = gk.raise_index(Qi, d_xu) - np.einsum("nab,nbc,nc->na", Qi, Q_xu, up)
        sq_xu = 0.5 * sq * np.einsum("nab,nba->n", Qi, Q_xu)
        rot = lambda v: np.stack([-v[:, 1], v[:, 0]], axis=1)
        d_star = sq_xu[:, None] * rot(up) + sq[:, None] * rot(up_xu)
        star_d = sq[:, None] * rot(gk.raise_index(Qi, d_xu))
    else:
        raise ValueError("method must be 'fd' or 'analytic'")
    qinv = np.linalg.inv(Q)
    inner = gk.inner_oneforms(qinv, d_star + star_d, d)
    return np.exp(-fam.F(xu, Y)) / (4.0 * lam**2) * inner * np.sqrt(np.linalg.det(Q))


@dataclass(frozen=True)
class BetaSolution:
    beta: Family
    residual: float
    grid: tuple


def _simpson_nodes(m: int) -> np.ndarray:
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def solve_beta_local(
    fam: KundtFamilies,
    xu: float,
    ys,
    zs,
    gamma: Optional[Callable] = None,
    kappa_fn: Optional[Family] = None,
    z0: float = 0.0,
    intervals: Optional[int] = None,
) -> BetaSolution:
    """Local solution of the beta equation on a rectangular (y, z) grid.

    ``beta = (gamma(y) + int_{z0}^{z} [d_y kappa - Upsilon] dz') dy + kappa dz``,
    with the integral by composite Simpson.  ``gamma(xu, y)`` and
    ``kappa_fn(xu, Y)`` default to zero.  The residual is the largest
    stencil value of ``d beta - Upsilon`` over the interior grid nodes.
    """
    ys = np.asarray(ys, dtype=float)
    zs = np.asarray(zs, dtype=float)
    if ys.ndim != 1 or zs.ndim != 1:
        raise ConfigError("solve_beta_local needs a rectangular grid given by two 1D axes")
    if len(ys) < 33 or len(zs) < 33:
        raise ConfigError("grid needs at least 33 nodes per axis")
    if np.any(np.diff(ys) <= 0) or np.any(np.diff(zs) <= 0):
        raise ConfigError("grid axes must be strictly increasing")
    m = intervals or max(32, len(zs) - 1)
    m += m % 2
    wts = _simpson_nodes(m)
    frac = np.arange(m + 1) / m
    kap = kappa_fn or (lambda x, Z: np.zeros(len(x)))
    gam = gamma or (lambda x, y: np.zeros(len(x)))

    def dy_kappa(x, Z):
        return gk.partial_axis(_as3(kap), np.column_stack([x, Z]), 1, fam.cfg)

    def beta_y(x, Z):
        x = np.asarray(x, dtype=float)
        n = Z.shape[0]
        s = z0 + (Z[:, 1:2] - z0) * frac[None, :]
        Zq = np.stack([np.repeat(Z[:, 0], m + 1), s.ravel()], axis=1)
        xq = np.repeat(x, m + 1)
        integrand = (dy_kappa(xq, Zq) - upsilon(fam, xq, Zq)).reshape(n, m + 1)
        return gam(x, Z[:, 0]) + (Z[:, 1] - z0) / m * (integrand @ wts)

    def beta_fn(x, Z):
        x = np.asarray(x, dtype=float)
        return np.stack([beta_y(x, Z), kap(x, Z)], axis=1)

    Yg, Zg = np.meshgrid(ys[1:-1], zs[1:-1], indexing="ij")
    pts = np.stack([Yg.ravel(), Zg.ravel()], axis=1)
    xs = np.full(pts.shape[0], float(xu))
    at = lambda f: (lambda Z: f(np.full(Z.shape[0], float(xu)), Z))  # noqa: E731
    db = _curl(at(beta_y), at(kap), pts, fam.cfg)
    res = float(np.max(np.abs(db - upsilon(fam, xs, pts))))
    return BetaSolution(beta_fn, res, (ys, zs))


def _curl(by: Callable, bz: Callable, pts: np.ndarray, cfg: FDConfig) -> np.ndarray:
    """d_y b_z - d_z b_y by two single-axis stencils."""
    return gk.partial_axis(bz, pts, 0, cfg) - gk.partial_axis(by, pts, 1, cfg)


def beta_equation_residual(fam: KundtFamilies, plan: SamplingPlan) -> float:
    """max |d beta - Upsilon| over the plan's (x_u, y, z) samples."""
    S = _base_samples(plan)
    out = 0.0
    for xu in np.unique(S[:, 0]):
        Y = S[S[:, 0] == xu][:, 1:]
        x = np.full(Y.shape[0], xu)
        db = gk.exterior_derivative(lambda Z, xu=xu: beta(fam, np.full(Z.shape[0], xu), Z), Y, fam.cfg)[:, 0, 1]
        out = max(out, float(np.max(np.abs(db - upsilon(fam, x, Y)))))
    return out


# ---------------------------------------------------------------- adapted pair


def sigma_kappa(fam: KundtFamilies, P: np.ndarray, method: str = "kapicau") -> np.ndarray:
    """dx_u-component of kappa.

    ``"kapicau"``: 2 sigma e^F = 2 lam H + dH(l#) + 2 e^F d_xu f + 2 alpha(d_xu l#)
    with f = dF(beta#) / (2 lam).  ``"isolate"``: read it off the
    dx_u dx_u component of the fourth Killing equation.
    """
    xu, Y = P[:, XU], P[:, 2:4]
    lam = fam.lam
    eF = np.exp(fam.F(xu, Y))
    H = fam.H(xu, Y)
    if method == "kapicau":
        ls = ell_sharp(fam, xu, Y)
        dH = base_gradient(fam, fam.H, xu, Y)

        def frak_f(P3):
            x, Z = _split(P3)
            bs = gk.raise_index(np.linalg.inv(base_q(fam, x, Z)), beta(fam, x, Z))
            return np.einsum("na,na->n", dF(fam, x, Z), bs) / (2.0 * lam)

        def ls3(P3):
            return ell_sharp(fam, *_split(P3))

        df_xu = _xu_derivative(fam, frak_f, xu, Y)
        dls_xu = _xu_derivative(fam, ls3, xu, Y)
        alpha = eF[:, None] * beta(fam, xu, Y)
        rhs = 2.0 * lam * H + np.einsum("na,na->n", dH, ls) + 2.0 * eF * df_xu + 2.0 * np.einsum("na,na->n", alpha, dls_xu)
        return rhs / (2.0 * eF)
    if method == "isolate":
        g = assemble_metric(fam)
        l_fn = _l_field(fam)
        lsharp = lambda Q: gk.raise_index(np.linalg.inv(g(Q)), l_fn(Q))
        lie = gk.lie_derivative_metric(lsharp, g, P, fam.cfg)
        return (lie[:, XU, XU] + 2.0 * lam * H) / (2.0 * eF)
    raise ValueError("method must be 'kapicau' or 'isolate'")


def _u_field(fam: KundtFamilies):
    def fn(P):
        out = np.zeros((P.shape[0], 4))
        out[:, XU] = np.exp(fam.F(P[:, XU], P[:, 2:4]))
        return out

    return fn


def _l_field(fam: KundtFamilies):
    def fn(P):
        out = np.zeros((P.shape[0], 4))
        out[:, 2:] = ell(fam, P[:, XU], P[:, 2:4])
        return out

    return fn


def adapted_pair(fam: KundtFamilies, sigma_method: str = "kapicau") -> ParabolicPairField:
    """u = e^F dx_u, l = -dF / (2 lam), kappa = -e^{-F} d_xu l + sigma dx_u."""

    def kappa(P):
        xu, Y = P[:, XU], P[:, 2:4]
        out = np.zeros((P.shape[0], 4))
        ell3 = lambda P3: ell(fam, *_split(P3))
        out[:, 2:] = -np.exp(-fam.F(xu, Y))[:, None] * _xu_derivative(fam, ell3, xu, Y)
        out[:, XU] = sigma_kappa(fam, P, sigma_method)
        return out

    return ParabolicPairField(OneFormField(4, _u_field(fam)), OneFormField(4, _l_field(fam)), OneFormField(4, kappa))


# ---------------------------------------------------------------- residuals


def pair_invariants(g, pair: ParabolicPairField, P: np.ndarray) -> dict:
    ginv = gk.inverse_metric(gk._fn(g)(P), P)
    u, l = pair.u(P), pair.l(P)
    return {
        "g(u,u)": float(np.max(np.abs(gk.inner_oneforms(ginv, u, u)))),
        "g(l,l)-1": float(np.max(np.abs(gk.inner_oneforms(ginv, l, l) - 1.0))),
        "g(u,l)": float(np.max(np.abs(gk.inner_oneforms(ginv, u, l)))),
        "min|u|": float(np.min(np.max(np.abs(u), axis=1))),
    }


def check_pair(g, pair: ParabolicPairField, P: np.ndarray, tol: float) -> None:
    inv = pair_invariants(g, pair, P)
    for key in ("g(u,u)", "g(l,l)-1", "g(u,l)"):
        if inv[key] > tol:
            raise PreconditionError(f"parabolic pair invariant violated: {key} = {inv[key]:.3e}")
    if inv["min|u|"] == 0.0:
        raise PreconditionError("u vanishes at a sample")


def _sharp(g, w):
    gfn = gk._fn(g)
    return lambda Q: gk.raise_index(np.linalg.inv(gfn(Q)), gk._fn(w)(Q))


def killing_residual_fields(g, pair: ParabolicPairField, lam: float, P: np.ndarray, cfg: FDConfig = DEFAULT_FD) -> dict:
    """Pointwise residual tensors of the four Killing equations."""
    G = gk._fn(g)(P)
    u, l, k = pair.u(P), pair.l(P), pair.kappa(P)
    lie_u = gk.lie_derivative_metric(_sharp(g, pair.u), g, P, cfg)
    du = gk.exterior_derivative(pair.u, P, cfg) - 2.0 * lam * gk.wedge(u, l)
    dl = gk.exterior_derivative(pair.l, P, cfg) - gk.wedge(k, u)
    lie_l = gk.lie_derivative_metric(_sharp(g, pair.l), g, P, cfg)
    lie_l = lie_l - gk.sym_product(k, u) - 2.0 * lam * (gk.outer(l, l) - G)
    return {"lie_u": lie_u, "du": du, "dl": dl, "lie_l": lie_l}


def killing_residuals(g, pair: ParabolicPairField, lam: float, plan: SamplingPlan, cfg: FDConfig = DEFAULT_FD) -> dict:
    P = plan.points()
    check_pair(g, pair, P, max(plan.tol, 1e-8))
    fields = gk.map_points(lambda Q: _stack(killing_residual_fields(g, pair, lam, Q, cfg)), P)
    names = ("lie_u", "du", "dl", "lie_l")
    return {name: float(np.max(np.abs(fields[:, i]))) for i, name in enumerate(names)}


def _stack(d: dict) -> np.ndarray:
    return np.stack([d["lie_u"], d["du"], d["dl"], d["lie_l"]], axis=1)


def optical_fields(g, u, P: np.ndarray, cfg: FDConfig = DEFAULT_FD, null_tol: float = 1e-8) -> dict:
    G = gk._fn(g)(P)
    ginv = gk.inverse_metric(G, P)
    uv = gk._fn(u)(P)
    uu = gk.inner_oneforms(ginv, uv, uv)
    scale = 1.0 + np.abs(gk.inner_oneforms(np.abs(ginv), np.abs(uv), np.abs(uv)))
    if np.any(np.abs(uu) > null_tol * scale):
        raise PreconditionError(f"u is not null: max |g(u,u)| = {np.max(np.abs(uu)):.3e}")
    theta = 0.5 * gk.divergence(u, g, P, cfg)
    du = gk.exterior_derivative(u, P, cfg)
    twist = 0.25 * gk.norm2_twoform(ginv, du)
    lie = gk.lie_derivative_metric(_sharp(g, u), g, P, cfg)
    shear = 0.125 * gk.norm2_sym(ginv, lie) - theta**2
    return {"theta": theta, "twist2": twist, "shear2": shear}


def optical_invariants(g, u, plan: SamplingPlan, cfg: FDConfig = DEFAULT_FD) -> dict:
    """Maxima of |theta|, |omega^2|, |sigma^2| over the plan (signed extremes also reported)."""
    P = plan.points()
    f = optical_fields(g, u, P, cfg)
    out = {k: float(np.max(np.abs(v))) for k, v in f.items()}
    out.update({f"{k}_signed_min": float(np.min(v)) for k, v in f.items()})
    return out


def change_representative(pair: ParabolicPairField, f, lam: float, cfg: FDConfig = DEFAULT_FD) -> ParabolicPairField:
    """l -> l + f u and kappa -> kappa + df - 2 lam f l - lam f^2 u.

    In terms of the new representative this is ``df - 2 lam f l_new + lam f^2 u``;
    the opposite sign on the f^2 term leaves -4 lam f^2 u (x) u in the fourth
    Killing equation.
    """
    ffn = gk._fn(f)

    def l_new(P):
        return pair.l(P) + ffn(P)[:, None] * pair.u(P)

    def k_new(P):
        fv = ffn(P)[:, None]
        return pair.kappa(P) + gk.partial(ffn, P, cfg) - 2.0 * lam * fv * pair.l(P) - lam * fv**2 * pair.u(P)

    return ParabolicPairField(pair.u, OneFormField(4, l_new), OneFormField(4, k_new))


def verify(fam: KundtFamilies, plan: SamplingPlan) -> dict:
    """Full residual report for a family."""
    g = assemble_metric(fam, plan)
    pair = adapted_pair(fam)
    report = {"killing": killing_residuals(g, pair, fam.lam, plan, fam.cfg)}
    report["optical"] = optical_invariants(g, pair.u, plan, fam.cfg)
    report["base"] = check_base_constraints(fam, plan)
    report["beta_equation"] = beta_equation_residual(fam, plan)
    report["samples"] = int(plan.points().shape[0])
    return report


# ---------------------------------------------------------------- presets


def siklos_families(lam: float = 0.5, a: float = 0.5, c: float = 1.0) -> KundtFamilies:
    """F = y, G = z and H = e^F K / lam^2 with the profile K = a sin(x_u) + c Y W,
    where Y = e^{-y/2}, W = lam z are the Siklos coordinates."""

    def H(xu, Z):
        Yc = np.exp(-0.5 * Z[:, 0])
        W = lam * Z[:, 1]
        K = a * np.sin(xu) + c * Yc * W
        return np.exp(Z[:, 0]) * K / lam**2

    def derivs(xu, Z):
        n = len(xu)
        d = np.tile([1.0, 0.0], (n, 1))
        w = np.tile([0.0, 1.0], (n, 1))
        q = gk.outer(d, d) / (4 * lam**2) + np.exp(Z[:, 0])[:, None, None] * gk.outer(w, w)
        return {"dF": d, "dF_xu": np.zeros((n, 2)), "q": q, "q_xu": np.zeros((n, 2, 2))}

    return KundtFamilies(lam, lambda xu, Z: Z[:, 0].copy(), H, G=lambda xu, Z: Z[:, 1].copy(), derivatives=derivs)


def siklos_metric(lam: float, K: Callable, P: np.ndarray) -> np.ndarray:
    """(1 / lam^2 Y^2)(K du^2 + du (.) dV + dY^2 + dW^2) in the chart (u, V, Y, W)."""
    n = P.shape[0]
    G = np.zeros((n, 4, 4))
    G[:, 0, 0] = K(P)
    G[:, 0, 1] = G[:, 1, 0] = 1.0
    G[:, 2, 2] = G[:, 3, 3] = 1.0
    return G / (lam**2 * P[:, 2] ** 2)[:, None, None]


def constants_example_families(lam: float = 0.5) -> KundtFamilies:
    """dF = a dy1, dG = f dy1 + b dy2 with x_u-dependent constants a, b, f, k."""
    a = lambda x: np.exp(0.2 * x)
    da = lambda x: 0.2 * np.exp(0.2 * x)
    b = lambda x: 1.5 + 0.5 * np.sin(x)
    db = lambda x: 0.5 * np.cos(x)
    f = lambda x: 0.4 * np.cos(x)
    df = lambda x: -0.4 * np.sin(x)
    k = lambda x: 0.1 * x
    dk = lambda x: 0.1 + 0.0 * x

    def upsilon_exact(x):
        return b(x) * df(x) - f(x) * db(x)

    def F(x, Z):
        return a(x) * Z[:, 0] + k(x)

    def G(x, Z):
        return f(x) * Z[:, 0] + b(x) * Z[:, 1]

    def H(x, Z):
        return 0.3 * Z[:, 0] * Z[:, 1] + x

    def beta_fn(x, Z):
        ups = 0.5 * upsilon_exact(x)
        return np.stack([-ups * Z[:, 1], ups * Z[:, 0]], axis=1)

    def derivs(x, Z):
        n = len(x)
        dF_ = np.stack([a(x), np.zeros(n)], axis=1)
        dF_xu = np.stack([da(x), np.zeros(n)], axis=1)
        dG_ = np.stack([f(x), b(x)], axis=1)
        dG_xu = np.stack([df(x), db(x)], axis=1)
        eF = np.exp(F(x, Z))
        F_xu = da(x) * Z[:, 0] + dk(x)
        c = 1.0 / (4 * lam**2)
        q = c * gk.outer(dF_, dF_) + eF[:, None, None] * gk.outer(dG_, dG_)
        q_xu = (
            c * gk.sym_product(dF_xu, dF_)
            + (eF * F_xu)[:, None, None] * gk.outer(dG_, dG_)
            + eF[:, None, None] * gk.sym_product(dG_xu, dG_)
        )
        return {"dF": dF_, "dF_xu": dF_xu, "q": q, "q_xu": q_xu, "upsilon": upsilon_exact(x)}

    return KundtFamilies(lam, F, H, G=G, beta=beta_fn, derivatives=derivs)


def constants_example_explicit_metric(P: np.ndarray) -> np.ndarray:
    """Explicit components of the constant-coefficient family in the chart
    (x_u, x_v', y1, y2) with x_v' = 2 x_v, where dx_u (.) dx_v' carries a factor one half."""
    x, y1, y2 = P[:, 0], P[:, 2], P[:, 3]
    a, b, f, k = np.exp(0.2 * x), 1.5 + 0.5 * np.sin(x), 0.4 * np.cos(x), 0.1 * x
    ups = b * (-0.4 * np.sin(x)) - f * (0.5 * np.cos(x))
    e = np.exp(a * y1 + k)
    n = P.shape[0]
    G = np.zeros((n, 4, 4))
    G[:, 0, 0] = 0.3 * y1 * y2 + x
    G[:, 0, 1] = G[:, 1, 0] = 0.5 * e
    cross = np.stack([-ups * y2, ups * y1], axis=1)
    G[:, 0, 2:] = 0.5 * e[:, None] * cross
    G[:, 2:, 0] = 0.5 * e[:, None] * cross
    G[:, 2, 2] = a**2 + f**2 * e
    G[:, 2, 3] = G[:, 3, 2] = e * b * f
    G[:, 3, 3] = e * b**2
    return G


def poincare_static_families(lam: float = 1.0) -> KundtFamilies:
    return KundtFamilies(
        lam,
        lambda xu, Z: Z[:, 0].copy(),
        lambda xu, Z: np.zeros(len(xu)),
        G=lambda xu, Z: Z[:, 1].copy(),
    )


def off_family_perturbation(eps: float = 0.05) -> Callable[[np.ndarray], np.ndarray]:
    """eps (1 + x_v) dx_u (x) dx_u, which is not x_v-independent and so breaks u-Killing."""

    def fn(P):
        out = np.zeros((P.shape[0], 4, 4))
        out[:, XU, XU] = eps * (1.0 + P[:, XV])
        return out

    return fn


@dataclass(frozen=True)
class Preset:
    name: str
    factory: Callable[..., KundtFamilies]
    box: tuple
    description: str
    defaults: dict = field(default_factory=dict)

    def build(self, **params) -> KundtFamilies:
        merged = {**self.defaults, **params}
        perturb = merged.pop("perturb", None)
        fam = self.factory(**merged)
        if perturb:
            fam = replace(fam, perturbation=off_family_perturbation(float(perturb)))
        return fam

    def plan(self, counts=(5, 5, 5, 5), tol: float = 1e-5) -> SamplingPlan:
        return SamplingPlan(self.box, tuple(counts), tol)


_UNIT_BOX = ((-1.0, 1.0),) * 4

PRESETS = {
    "siklos": Preset(
        "siklos",
        siklos_families,
        _UNIT_BOX,
        "F = y, G = z, beta = 0, H = e^y K / lam^2 with K = a sin(x_u) + c e^{-y/2} lam z",
        {"lam": 0.5, "a": 0.5, "c": 1.0},
    ),
    "paper-example-constants": Preset(
        "paper-example-constants",
        constants_example_families,
        _UNIT_BOX,
        "lam = 1/2, a = e^{0.2 x_u}, b = 1.5 + 0.5 sin x_u, f = 0.4 cos x_u, k = 0.1 x_u, H = 0.3 y1 y2 + x_u",
        {"lam": 0.5},
    ),
    "poincare-static": Preset(
        "poincare-static",
        poincare_static_families,
        _UNIT_BOX,
        "F = y, G = z, H = 0, beta = 0",
        {"lam": 1.0},
    ),
}


def preset(name: str) -> Preset:
    if name not in PRESETS:
        raise ConfigError(f"unknown Kundt preset {name!r}; known: {sorted(PRESETS)}")
    return PRESETS[name]

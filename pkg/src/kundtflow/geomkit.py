"""Chart-based finite-difference differential geometry.

Fields are closures over chart coordinates.  Every evaluator is vectorised:
it receives an ``(N, dim)`` array of points and returns ``(N,)`` for scalars,
``(N, dim)`` for one-forms and vector fields, and ``(N, dim, dim)`` for
metrics and two-tensors.  Nothing is stored on grids; derivatives are
central stencils evaluated on demand.

Conventions
-----------
* Derivative arrays put the derivative index right after the point index:
  ``D[n, i, ...] = d_i f[n, ...]``.
* Two-forms are antisymmetric matrices, ``(a ^ b)_ij = a_i b_j - a_j b_i`` and
  ``(d w)_ij = d_i w_j - d_j w_i``.
* ``a (.) b = a (x) b + b (x) a`` (no factor one half).
* ``(nabla w)_ab = d_a w_b - Gamma^c_ab w_c``; the derivative slot comes first.
* Ricci: ``R_bc = d_a G^a_bc - d_b G^a_ac + G^a_ad G^d_bc - G^a_bd G^d_ac``,
  which gives the unit sphere ``Ric = +g``.
* Norms: ``|F|^2 = 1/2 F_ab F^ab`` for two-forms, ``|S|^2 = S_ab S^ab`` for
  symmetric tensors.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import _kernels
from .errors import DegenerateMetricError, PreconditionError

DET_THRESHOLD = 1e-12

Evaluator = Callable[[np.ndarray], np.ndarray]

# offsets, integer weights, denominator: exact zeros for constant fields
_STENCILS = {
    2: (np.array([-1.0, 1.0]), np.array([-1.0, 1.0]), 2.0),
    4: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]), 12.0),
}


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-3
    order: int = 4
    tol: float = 1e-5

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("FDConfig.step must be positive")
        if not self.tol > 0:
            raise ValueError("FDConfig.tol must be positive")
        if self.order not in _STENCILS:
            raise ValueError("FDConfig.order must be 2 or 4")


DEFAULT_FD = FDConfig()


@dataclass(frozen=True)
class ScalarField:
    dim: int
    fn: Evaluator

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(as_points(P, self.dim)), dtype=float)


@dataclass(frozen=True)
class OneFormField:
    dim: int
    fn: Evaluator

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(as_points(P, self.dim)), dtype=float)


@dataclass(frozen=True)
class MetricField:
    dim: int
    fn: Evaluator
    signature: str = "riemannian"

    def __post_init__(self):
        if self.signature not in ("riemannian", "lorentzian"):
            raise ValueError("signature must be 'riemannian' or 'lorentzian'")

    def __call__(self, P: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(as_points(P, self.dim)), dtype=float)


FieldLike = Union[ScalarField, OneFormField, MetricField, Evaluator]


def as_points(P, dim: int | None = None) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[None, :]
    if P.ndim != 2 or (dim is not None and P.shape[1] != dim):
        raise ValueError(f"expected points of shape (N, {dim}), got {P.shape}")
    return P


def _fn(f: FieldLike) -> Evaluator:
    return f.fn if isinstance(f, (ScalarField, OneFormField, MetricField)) else f


# ---------------------------------------------------------------- stencils


def step_sizes(P: np.ndarray, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Per-point, per-axis step ``cfg.step * max(1, |x_i|)``."""
    return cfg.step * np.maximum(1.0, np.abs(P))


def _stencil_points(P: np.ndarray, cfg: FDConfig):
    offs = _STENCILS[cfg.order][0]
    n, d = P.shape
    h = step_sizes(P, cfg)
    Q = np.broadcast_to(P, (d, offs.size, n, d)).copy()
    for i in range(d):
        Q[i, :, :, i] += offs[:, None] * h[None, :, i]
    return Q.reshape(-1, d), h


def _combine(vals: np.ndarray, h: np.ndarray, cfg: FDConfig) -> np.ndarray:
    offs, w, den = _STENCILS[cfg.order]
    n, d = h.shape
    vals = vals.reshape((d, offs.size, n) + vals.shape[1:])
    D = np.tensordot(w, vals, axes=(0, 1))  # (d, n, ...)
    extra = (1,) * (vals.ndim - 3)
    D = D / (den * h.T.reshape((d, n) + extra))
    return np.moveaxis(D, 0, 1)


def partial(f: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Central-difference partial derivatives, ``D[n, i, ...] = d_i f``."""
    P = as_points(P)
    Q, h = _stencil_points(P, cfg)
    return _combine(np.asarray(_fn(f)(Q), dtype=float), h, cfg)


def value_and_partial(f: FieldLike, P, cfg: FDConfig = DEFAULT_FD):
    """Field values at ``P`` together with their partials (one batched call)."""
    P = as_points(P)
    Q, h = _stencil_points(P, cfg)
    allq = np.concatenate([P, Q], axis=0)
    vals = np.asarray(_fn(f)(allq), dtype=float)
    n = P.shape[0]
    return vals[:n], _combine(vals[n:], h, cfg), vals[n:]


# ---------------------------------------------------------------- algebra


def wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :] - b[..., :, None] * a[..., None, :]


def sym_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :] + b[..., :, None] * a[..., None, :]


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def inverse_metric(G: np.ndarray, P: np.ndarray | None = None) -> np.ndarray:
    det = np.linalg.det(G)
    bad = ~(np.abs(det) > DET_THRESHOLD)
    if np.any(bad):
        pts = None if P is None or P.shape[0] != G.shape[0] else P[bad]
        raise DegenerateMetricError(
            f"degenerate metric: |det g| <= {DET_THRESHOLD:g} at {int(bad.sum())} point(s)"
            + ("" if pts is None else f", first at {pts[0].tolist()}"),
            pts,
        )
    return np.linalg.inv(G)


def raise_index(ginv: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("nab,nb->na", ginv, w)


def inner_oneforms(ginv: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("nab,na,nb->n", ginv, a, b)


def norm2_twoform(ginv: np.ndarray, F: np.ndarray) -> np.ndarray:
    return 0.5 * np.einsum("nac,nbd,nab,ncd->n", ginv, ginv, F, F)


def norm2_sym(ginv: np.ndarray, S: np.ndarray) -> np.ndarray:
    return np.einsum("nac,nbd,nab,ncd->n", ginv, ginv, S, S)


def signature_counts(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ev = np.linalg.eigvalsh(0.5 * (G + np.swapaxes(G, -1, -2)))
    return (ev < 0).sum(axis=-1), (ev > 0).sum(axis=-1)


def check_signature(g: MetricField, P) -> np.ndarray:
    """Boolean mask of points where the eigenvalue signs match ``g.signature``."""
    P = as_points(P, g.dim)
    G = g(P)
    inverse_metric(G, P)
    neg, pos = signature_counts(G)
    if g.signature == "riemannian":
        return pos == g.dim
    return (neg == 1) & (pos == g.dim - 1)


# ---------------------------------------------------------------- connection


def _christoffel_from_values(G: np.ndarray, dG: np.ndarray, P=None) -> np.ndarray:
    return _kernels.christoffel(inverse_metric(G, P), dG)


def christoffel(g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[n, a, b, c] = Gamma^a_bc``."""
    P = as_points(P)
    G, dG, Gs = value_and_partial(g, P, cfg)
    inverse_metric(Gs.reshape((-1,) + G.shape[1:]))
    return _christoffel_from_values(G, dG, P)


def metric_compatibility_residual(g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> float:
    """max |nabla_a g_bc| with the connection computed from the same stencils."""
    P = as_points(P)
    G, dG, _ = value_and_partial(g, P, cfg)
    gam = _christoffel_from_values(G, dG, P)
    low = np.einsum("nde,nebc->ndbc", G, gam)  # Gamma_dbc = g_de Gamma^e_bc
    res = dG - low.transpose(0, 2, 3, 1) - low.transpose(0, 2, 1, 3)
    return float(np.max(np.abs(res)))


def ricci(g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Ricci tensor ``R[n, b, c]`` from nested stencils on the Christoffel field."""
    P = as_points(P)
    gfn = _fn(g)

    def gam_at(Q):
        return christoffel(gfn, Q, cfg)

    gam, dgam, _ = value_and_partial(gam_at, P, cfg)
    return _kernels.ricci(gam, dgam)


def scalar_curvature(g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    P = as_points(P)
    R = ricci(g, P, cfg)
    return np.einsum("nbc,nbc->n", inverse_metric(_fn(g)(P), P), R)


# ---------------------------------------------------------------- derivatives of fields


def lie_derivative_metric(X: FieldLike, g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``(L_X g)_ab = X^c d_c g_ab + g_cb d_a X^c + g_ac d_b X^c``."""
    P = as_points(P)
    G, dG, _ = value_and_partial(g, P, cfg)
    Xv, dX, _ = value_and_partial(X, P, cfg)
    out = np.einsum("nc,ncab->nab", Xv, dG)
    t = np.einsum("ncb,nac->nab", G, dX)
    return out + t + np.swapaxes(t, 1, 2)


def exterior_derivative(w: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """``(dw)_ij = d_i w_j - d_j w_i`` for a one-form field."""
    D = partial(w, P, cfg)
    return D - np.swapaxes(D, 1, 2)


def covderiv_oneform(w: FieldLike, g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    P = as_points(P)
    wv, dw, _ = value_and_partial(w, P, cfg)
    gam = christoffel(g, P, cfg)
    return dw - np.einsum("ncab,nc->nab", gam, wv)


def divergence(w: FieldLike, g: FieldLike, P, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    P = as_points(P)
    nab = covderiv_oneform(w, g, P, cfg)
    return np.einsum("nab,nab->n", inverse_metric(_fn(g)(P), P), nab)


def hodge_star_2d(w: np.ndarray | FieldLike, q: FieldLike, orientation: int, P) -> np.ndarray:
    """Hodge dual of a one-form on an oriented surface; ``*dx = dy`` for the
    Euclidean plane with positive orientation."""
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    P = as_points(P, 2)
    Q = _fn(q)(P)
    wv = np.asarray(_fn(w)(P) if callable(w) else w, dtype=float)
    neg, pos = signature_counts(Q)
    if np.any(pos != 2):
        raise PreconditionError("hodge_star_2d needs a Riemannian metric")
    qinv = inverse_metric(Q, P)
    up = raise_index(qinv, wv)
    vol = orientation * np.sqrt(np.linalg.det(Q))
    return vol[:, None] * np.stack([-up[:, 1], up[:, 0]], axis=1)


# ---------------------------------------------------------------- sampling


def thread_count() -> int:
    """Worker cap from KUNDTFLOW_THREADS (default: 1, i.e. serial)."""
    raw = os.environ.get("KUNDTFLOW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_points(fn: Callable[[np.ndarray], np.ndarray], P: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Evaluate ``fn`` on row chunks of ``P``, concurrently if threads are allowed."""
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    workers = thread_count()
    if workers == 1 or n <= chunk:
        return fn(P)
    parts = [P[i : i + chunk] for i in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(fn, parts))
    return np.concatenate(results, axis=0)


def partial_axis(f: FieldLike, P, axis: int, cfg: FDConfig = DEFAULT_FD) -> np.ndarray:
    """Single partial derivative ``d_axis f`` (one stencil instead of ``dim``)."""
    P = as_points(P)
    offs, w, den = _STENCILS[cfg.order]
    n = P.shape[0]
    h = step_sizes(P, cfg)[:, axis]
    Q = np.broadcast_to(P, (offs.size, n, P.shape[1])).copy()
    Q[:, :, axis] += offs[:, None] * h[None, :]
    vals = np.asarray(_fn(f)(Q.reshape(-1, P.shape[1])), dtype=float)
    vals = vals.reshape((offs.size, n) + vals.shape[1:])
    D = np.tensordot(w, vals, axes=(0, 0))
    return D / (den * h.reshape((n,) + (1,) * (D.ndim - 1)))

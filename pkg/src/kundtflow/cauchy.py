"""Left-invariant Killing Cauchy pairs on three-dimensional Lie groups.

A pair is a Killing constant ``lam`` and a constant symmetric matrix ``theta``
in an orthonormal left-invariant coframe ``(e_u, e_l, e_n)`` (index order
u = 0, l = 1, n = 2).  The coframe differentials are

    de_u = (theta(e_u) - lam e_l) ^ e_u
    de_l = theta(e_l) ^ e_u
    de_n = theta(e_n) ^ e_u + lam e_n ^ e_l

and everything else (structure constants, Levi-Civita connection, Ricci
tensor, constraints) is derived from them algebraically.

Groups and the dependent entries of theta, writing ``r = theta_ul / lam``:

    E11     r = 2          theta_uu = 3 theta_nn,       theta_ll = -theta_nn
    Tau2R   r = 1          theta_ll = 0,                theta_uu, theta_nn free
    Tau3Mu  r not in {1,2} theta_uu = (1 + r) theta_nn, theta_ll = (1 - r) theta_nn
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .errors import ConfigError, NotIntegrableError

U, L, N = 0, 1, 2
GROUPS = ("E11", "Tau2R", "Tau3Mu")
TIE_TOL = 1e-9
VALIDATE_RTOL = 1e-12

# antisymmetric endomorphism with A(e_u) = e_l, A(e_l) = -e_u, A(e_n) = 0
ROTATION = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


@dataclass(frozen=True)
class CauchyPair:
    lam: float
    theta: np.ndarray
    exact: Optional[tuple] = field(default=None, compare=False)  # (lam, uu, ul, ll, nn) as Fractions

    def __post_init__(self):
        th = np.array(self.theta, dtype=float)
        if th.shape != (3, 3):
            raise ValueError("theta must be 3x3")
        if not np.allclose(th, th.T, rtol=0, atol=1e-14):
            raise ValueError("theta must be symmetric")
        if self.lam == 0:
            raise ValueError("the Killing constant must be nonzero")
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def uu(self) -> float:
        return float(self.theta[U, U])

    @property
    def ul(self) -> float:
        return float(self.theta[U, L])

    @property
    def ll(self) -> float:
        return float(self.theta[L, L])

    @property
    def nn(self) -> float:
        return float(self.theta[N, N])

    def components(self) -> np.ndarray:
        """(uu, ul, ll, nn)."""
        return np.array([self.uu, self.ul, self.ll, self.nn])

    def with_theta(self, theta) -> "CauchyPair":
        return CauchyPair(self.lam, theta)


@dataclass(frozen=True)
class GroupClass:
    tag: str
    mu: Optional[float] = None
    sigma: Optional[int] = None


def theta_matrix(uu, ul, ll, nn, un=0.0, ln=0.0) -> np.ndarray:
    return np.array([[uu, ul, un], [ul, ll, ln], [un, ln, nn]], dtype=float)


def pair_from_components(lam, uu, ul, ll, nn) -> CauchyPair:
    return CauchyPair(lam, theta_matrix(uu, ul, ll, nn))


# ---------------------------------------------------------------- relations


def relation_residuals(lam: float, theta: np.ndarray) -> dict[str, float]:
    uu, ul, ll, nn = theta[U, U], theta[U, L], theta[L, L], theta[N, N]
    return {
        "theta_un = 0": float(theta[U, N]),
        "theta_ln = 0": float(theta[L, N]),
        "uu*ul + lam*ll + ll*ul = lam*uu": float(uu * ul + lam * ll + ll * ul - lam * uu),
        "nn*ul + lam*ll = lam*nn": float(nn * ul + lam * ll - lam * nn),
    }


def validate(pair: CauchyPair) -> CauchyPair:
    """Check the algebraic integrability relations; raise on the first failure."""
    if pair.exact is not None:
        lam, uu, ul, ll, nn = pair.exact
        if uu * ul + lam * ll + ll * ul != lam * uu:
            raise NotIntegrableError("uu*ul + lam*ll + ll*ul = lam*uu", float(uu * ul + lam * ll + ll * ul - lam * uu))
        if nn * ul + lam * ll != lam * nn:
            raise NotIntegrableError("nn*ul + lam*ll = lam*nn", float(nn * ul + lam * ll - lam * nn))
        return pair
    scale = 1.0 + pair.lam**2 + float(np.max(pair.theta**2))
    for name, res in relation_residuals(pair.lam, pair.theta).items():
        if abs(res) > VALIDATE_RTOL * scale:
            raise NotIntegrableError(name, res)
    return pair


def classify(pair: CauchyPair) -> GroupClass:
    if pair.exact is not None:
        lam, _, ul, _, _ = pair.exact
        r = ul / lam
        is2, is1 = r == 2, r == 1
        r = float(r)
    else:
        r = pair.ul / pair.lam
        is2, is1 = abs(r - 2.0) <= TIE_TOL, abs(r - 1.0) <= TIE_TOL
    if is2:
        return GroupClass("E11")
    if is1:
        return GroupClass("Tau2R")
    base = 1.0 - r
    sigma = 1 if abs(base) <= 1.0 else -1
    return GroupClass("Tau3Mu", mu=base**sigma, sigma=sigma)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


def make_pair(group: str, lam, **free) -> CauchyPair:
    """Build a pair from a group's free parameters with exact rational relations.

    E11 takes ``theta_nn``; Tau2R takes ``theta_uu`` and ``theta_nn``; Tau3Mu
    takes ``theta_ul`` and ``theta_nn`` (``theta_ul / lam`` must avoid 1 and 2).
    """
    lamf = _frac(lam)
    if lamf == 0:
        raise ConfigError("lambda must be nonzero")

    def need(name):
        if name not in free or free[name] is None:
            raise ConfigError(f"group {group} needs parameter {name}")
        return _frac(free[name])

    if group == "E11":
        nn = need("theta_nn")
        uu, ul, ll = 3 * nn, 2 * lamf, -nn
    elif group == "Tau2R":
        uu, nn = need("theta_uu"), need("theta_nn")
        ul, ll = lamf, Fraction(0)
    elif group == "Tau3Mu":
        ul, nn = need("theta_ul"), need("theta_nn")
        r = ul / lamf
        if r in (1, 2):
            raise ConfigError("Tau3Mu needs theta_ul/lambda outside {1, 2}")
        uu, ll = (1 + r) * nn, (1 - r) * nn
    else:
        raise ConfigError(f"unknown group {group!r}; expected one of {GROUPS}")
    exact = (lamf, uu, ul, ll, nn)
    return CauchyPair(float(lamf), theta_matrix(*(float(v) for v in (uu, ul, ll, nn))), exact)


def complete_pair(lam, group=None, uu=None, ul=None, ll=None, nn=None, relations="auto") -> CauchyPair:
    """Pair from possibly partial components.

    ``relations="auto"`` fills dependent entries from the group relations (the
    group is inferred from ``ul / lam`` when not given).  ``"check"`` takes all
    four entries literally and validates them.
    """
    if relations == "check":
        if None in (uu, ul, ll, nn):
            raise ConfigError("relations 'check' needs all of uu, ul, ll, nn")
        return validate(pair_from_components(lam, uu, ul, ll, nn))
    if relations != "auto":
        raise ConfigError("relations must be 'auto' or 'check'")
    if group is None:
        if ul is None:
            raise ConfigError("either group or theta ul is required")
        r = _frac(ul) / _frac(lam)
        group = "E11" if r == 2 else "Tau2R" if r == 1 else "Tau3Mu"
    if group == "E11":
        return make_pair(group, lam, theta_nn=nn)
    if group == "Tau2R":
        return make_pair(group, lam, theta_uu=uu, theta_nn=nn)
    return make_pair(group, lam, theta_ul=ul, theta_nn=nn)


def random_pair(group: str, rng: np.random.Generator, lam=None, einstein: bool = False, den: int = 8) -> CauchyPair:
    """Random rational pair of ``group``; ``einstein=True`` forces constrained-Einstein data
    where the group admits it."""

    def q(lo=-3, hi=3):
        return Fraction(int(rng.integers(lo * den, hi * den + 1)), den)

    if lam is None:
        lam = q(1, 3) if rng.random() < 0.5 else -q(1, 3)
    lam = _frac(lam)
    if group == "E11":
        return make_pair(group, lam, theta_nn=q())
    if group == "Tau2R":
        nn = q() or Fraction(1, den)
        uu = nn - lam * lam / nn if einstein else q()
        return make_pair(group, lam, theta_uu=uu, theta_nn=nn)
    if group == "Tau3Mu":
        if einstein:
            r = Fraction(3, 2) if rng.random() < 0.5 else Fraction(0)
        else:
            r = q()
            while r in (1, 2):
                r = q()
        return make_pair(group, lam, theta_ul=r * lam, theta_nn=q())
    raise ConfigError(f"unknown group {group!r}")


# ---------------------------------------------------------------- structure constants


def _wedge_coeffs(x, y):
    return [[x[b] * y[c] - x[c] * y[b] for c in range(3)] for b in range(3)]


def _differentials(lam, theta):
    """W[a][b][c] with de_a = 1/2 W^a_bc e_b ^ e_c (generic scalar arithmetic)."""
    zero = lam - lam
    one = zero + 1
    e = [[one if i == j else zero for j in range(3)] for i in range(3)]
    row = [[theta[i][j] for j in range(3)] for i in range(3)]
    du_left = [row[U][j] - lam * e[L][j] for j in range(3)]
    dn_left = row[N]
    W_u = _wedge_coeffs(du_left, e[U])
    W_l = _wedge_coeffs(row[L], e[U])
    W_n1 = _wedge_coeffs(dn_left, e[U])
    W_n2 = _wedge_coeffs([lam * v for v in e[N]], e[L])
    W_n = [[W_n1[b][c] + W_n2[b][c] for c in range(3)] for b in range(3)]
    return [W_u, W_l, W_n]


def structure_constants(pair: CauchyPair, check: bool = True) -> np.ndarray:
    """C[a, b, c] with de_a = -1/2 C^a_bc e_b ^ e_c, i.e. [E_b, E_c] = C^a_bc E_a.

    For exactly constructed pairs the expansion and the Jacobi check run in
    rational arithmetic.
    """
    if check:
        validate(pair)
    if pair.exact is not None:
        lam, uu, ul, ll, nn = pair.exact
        z = Fraction(0)
        th = [[uu, ul, z], [ul, ll, z], [z, z, nn]]
        W = _differentials(lam, th)
        C = [[[-W[a][b][c] for c in range(3)] for b in range(3)] for a in range(3)]
        if check and jacobi_residual(C) != 0:
            raise NotIntegrableError("Jacobi identity", float(jacobi_residual(C)))
        return np.array([[[float(v) for v in r] for r in m] for m in C])
    return _structure_unchecked(pair.lam, pair.theta)


def _structure_unchecked(lam: float, theta: np.ndarray) -> np.ndarray:
    """Float structure constants for any (possibly batched, possibly non-integrable) theta."""
    th = np.asarray(theta, dtype=float)
    eye = np.eye(3)
    left_u = th[..., U, :] - lam * eye[L]
    W = np.empty(th.shape[:-2] + (3, 3, 3))
    W[..., U, :, :] = _wedge_np(left_u, eye[U])
    W[..., L, :, :] = _wedge_np(th[..., L, :], eye[U])
    W[..., N, :, :] = _wedge_np(th[..., N, :], eye[U]) + lam * _wedge_np(eye[N], eye[L])
    return -W


def _wedge_np(x, y):
    x, y = np.broadcast_arrays(x, y)
    return x[..., :, None] * y[..., None, :] - x[..., None, :] * y[..., :, None]


def jacobi_residual(C):
    """Max |J| over the Jacobi tensor; exact when C holds Fractions."""
    best = 0
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for e in range(3):
                    s = 0
                    for d in range(3):
                        s += C[d][b][c] * C[a][d][e] + C[d][c][e] * C[a][d][b] + C[d][e][b] * C[a][d][c]
                    best = max(best, abs(s))
    return best


def exterior_derivative_coeffs(pair: CauchyPair) -> np.ndarray:
    """W[a, b, c] with de_a = 1/2 W^a_bc e_b ^ e_c."""
    return -structure_constants(pair, check=False)


# ---------------------------------------------------------------- curvature


def levi_civita(C: np.ndarray) -> np.ndarray:
    """Gam[a, b, c] with nabla_{E_a} E_b = Gam^c_ab E_c for an orthonormal frame (Koszul)."""
    # C[..., c, a, b] = C^c_ab
    return 0.5 * (np.einsum("...cab->...abc", C) - C + np.einsum("...bca->...abc", C))


def theta_derivative(Gam: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """D[x, a, b] = (nabla_{E_x} theta)(E_a, E_b) for constant frame components."""
    t = np.einsum("...xac,...cb->...xab", Gam, theta)
    return -(t + np.swapaxes(t, -1, -2))


def _curvature_parts(lam, theta):
    C = _structure_unchecked(lam, theta)
    Gam = levi_civita(C)
    D = theta_derivative(Gam, theta)
    return C, Gam, D


def divergence_theta(lam: float, theta: np.ndarray) -> np.ndarray:
    _, _, D = _curvature_parts(lam, theta)
    return np.einsum("...aax->...x", D)


def ricci3_koszul(lam: float, theta: np.ndarray) -> np.ndarray:
    """Ricci tensor of the left-invariant metric straight from the connection."""
    C = _structure_unchecked(lam, theta)
    G = levi_civita(C)
    # R(E_a, E_b) E_d = (G^e_bd G^f_ae - G^e_ad G^f_be - C^e_ab G^f_ed) E_f ; trace f = a
    t1 = np.einsum("...bde,...aea->...bd", G, G)
    t2 = np.einsum("...ade,...bea->...bd", G, G)
    t3 = np.einsum("...eab,...eda->...bd", C, G)
    return t1 - t2 - t3


def ricci3_from_theta(lam: float, theta: np.ndarray) -> np.ndarray:
    """Ricci tensor via the shape-operator formula

        Ric = theta.theta - tr(theta) theta + (dtr - div theta) (x) e_u
              + nabla_{e_u} theta - (nabla theta)(e_u) - 2 lam^2 h

    with ``dtr = 0`` for constant data.
    """
    theta = np.asarray(theta, dtype=float)
    _, _, D = _curvature_parts(lam, theta)
    mom = -np.einsum("...aax->...x", D)
    tr = np.trace(theta, axis1=-2, axis2=-1)[..., None, None]
    ric = theta @ theta - tr * theta
    ric = ric + mom[..., :, None] * np.eye(3)[U]
    ric = ric + D[..., U, :, :] - D[..., :, U, :]
    return ric - 2.0 * lam**2 * np.eye(3)


def ricci3(pair: CauchyPair) -> np.ndarray:
    validate(pair)
    return ricci3_from_theta(pair.lam, pair.theta)


def scalar3(pair: CauchyPair) -> float:
    return float(np.trace(ricci3(pair)))


def scalar3_formula(pair: CauchyPair) -> float:
    """|theta|^2 - tr^2 + 2 (dtr - div theta)(e_u) - 6 lam^2."""
    validate(pair)
    th = pair.theta
    div = divergence_theta(pair.lam, th)
    return float(np.sum(th * th) - np.trace(th) ** 2 - 2.0 * div[U] - 6.0 * pair.lam**2)


def hamiltonian_from_theta(lam: float, theta: np.ndarray):
    """Hamiltonian constraint function; accepts a batch of matrices."""
    theta = np.asarray(theta, dtype=float)
    scal = np.trace(ricci3_from_theta(lam, theta), axis1=-2, axis2=-1)
    trace = np.trace(theta, axis1=-2, axis2=-1)
    out = scal - np.sum(theta * theta, axis=(-2, -1)) + trace**2 + 6.0 * lam**2
    return float(out) if theta.ndim == 2 else out


def hamiltonian0(pair: CauchyPair) -> float:
    validate(pair)
    return hamiltonian_from_theta(pair.lam, pair.theta)


def momentum_residual(pair: CauchyPair) -> np.ndarray:
    """dtr(theta) - div(theta) along (e_u, e_l, e_n)."""
    validate(pair)
    return -divergence_theta(pair.lam, pair.theta)


def einstein_residual(pair: CauchyPair) -> float:
    t = pair.theta
    uu, ul, un, ll, ln, nn = t[U, U], t[U, L], t[U, N], t[L, L], t[L, N], t[N, N]
    lam = pair.lam
    return float(ll**2 + 2 * ln**2 + nn**2 + 2 * ul**2 + 2 * un**2 - ll * uu - nn * uu - 3 * ul * lam)


def einstein_residual_exact(pair: CauchyPair) -> Fraction:
    if pair.exact is None:
        raise ValueError("exact arithmetic needs a pair built by make_pair")
    lam, uu, ul, ll, nn = pair.exact
    return ll**2 + nn**2 + 2 * ul**2 - ll * uu - nn * uu - 3 * ul * lam


def einstein_factored(pair: CauchyPair) -> Fraction:
    """The same residual through each group's factorised form."""
    if pair.exact is None:
        raise ValueError("exact arithmetic needs a pair built by make_pair")
    lam, uu, ul, _, nn = pair.exact
    tag = classify(pair).tag
    if tag == "E11":
        return 2 * (nn**2 + lam**2)
    if tag == "Tau2R":
        return nn * (nn - uu) - lam**2
    r = ul / lam
    return r * (2 * r - 3) * (nn**2 + lam**2)


def is_constrained_einstein(pair: CauchyPair) -> bool:
    if pair.exact is not None:
        return einstein_residual_exact(pair) == 0
    return abs(einstein_residual(pair)) <= 1e-10 * (1.0 + pair.lam**2 + float(np.max(pair.theta**2)))


# ---------------------------------------------------------------- coordinate realization


@dataclass(frozen=True)
class GroupChart:
    """Left-invariant coframe on R^3 from exponential coordinates of the second kind,
    ``g(x) = exp(x1 E_u) exp(x2 E_l) exp(x3 E_n)``."""

    C: np.ndarray

    def ad(self, b: int) -> np.ndarray:
        return self.C[:, b, :]

    def coframe(self, X: np.ndarray) -> np.ndarray:
        """E[n, a, i] with e_a = E[a, i] dx^i at each point."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[0]
        A2 = expm(-X[:, 1, None, None] * self.ad(L)[None])
        A3 = expm(-X[:, 2, None, None] * self.ad(N)[None])
        E = np.empty((n, 3, 3))
        E[:, :, 0] = np.einsum("nab,nbc,c->na", A3, A2, np.eye(3)[U])
        E[:, :, 1] = A3[:, :, L]
        E[:, :, 2] = np.eye(3)[N]
        return E

    def metric(self, X: np.ndarray) -> np.ndarray:
        E = self.coframe(X)
        return np.einsum("nai,naj->nij", E, E)


def group_chart(pair: CauchyPair) -> GroupChart:
    return GroupChart(structure_constants(pair))

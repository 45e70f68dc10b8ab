"""Generic Finsler engine built on the spray.

From any jet-evaluable F(x, y) this module produces the fundamental and
Cartan tensors, geodesic spray coefficients, the Riemann curvature operator
R^i_k, Ricci and weighted Ricci curvatures, distortion, S-curvature and its
rate of change along the geodesic flow, Lie derivatives of F^2, and a
least-squares scalar flag-curvature fit.

Curvature comes exclusively from the spray,

    G^i = 1/4 g^il { [F^2]_{x^m y^l} y^m - [F^2]_{x^l} },
    R^i_k = 2 dG^i/dx^k - d^2G^i/(dx^j dy^k) y^j
            + 2 G^j d^2G^i/(dy^j dy^k) - dG^i/dy^j dG^j/dy^k,

so the Riemannian module's Christoffel path stays an independent oracle.
The second spray derivatives consume mixed fourth-order coefficients of F^2
(x-degree <= 2, y-degree <= 4), hence the engine expands F^2 internally to
total degree 4 even though the public jet lift is capped at 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jets, riemann
from .jets import FlagPoint, Jet, fd_derivative, scalar_value
from .riemann import RiemannMetric, VectorField, as_scalar_field


class FlagDomainError(ArithmeticError):
    """The metric is invalid at the requested flag (F <= 0 or g not PD)."""


class ParameterError(ValueError):
    """An effective-dimension or configuration parameter is out of range."""


class FinslerMetric:
    """A Finsler norm F(x, y), jet-evaluable in all 2n coordinates."""

    def __init__(self, dim: int, fn, name=""):
        self.dim = dim
        self._fn = fn
        self.name = name

    def F(self, x, y):
        return self._fn(x, y)

    def value(self, x, y) -> float:
        return float(scalar_value(self._fn(list(x), list(y))))

    @classmethod
    def from_riemannian(cls, h: RiemannMetric, name="") -> "FinslerMetric":
        def fn(x, y):
            rows = h.matrix(x)
            quad = 0.0
            for i in range(h.dim):
                for j in range(h.dim):
                    quad = quad + rows[i][j] * y[i] * y[j]
            return jets.sqrt(quad)

        return cls(h.dim, fn, name or f"riemannian({h.name or 'h'})")


class Measure:
    """A smooth measure dm = sigma(x) dx given by its density function."""

    def __init__(self, density_fn, name=""):
        self._fn = density_fn
        self.name = name

    def density(self, x):
        return self._fn(x)

    def log_density_table(self, x, order=2):
        return riemann.scalar_table(lambda xs: jets.log(self._fn(xs)), x, order)

    @classmethod
    def from_density(cls, fn, name="") -> "Measure":
        return cls(fn, name)

    @classmethod
    def riemannian(cls, h: RiemannMetric) -> "Measure":
        return cls(h.sqrt_det, name=f"vol({h.name or 'h'})")

    def weighted(self, f) -> "Measure":
        """The measure e^{-f} dm relative to this one."""
        f = as_scalar_field(f)
        base = self._fn
        return Measure(lambda x: jets.exp(-f(x)) * base(x),
                       name=f"e^-{f.name or 'f'} {self.name}")


# -- F^2 partial tables -------------------------------------------------------


def _f2_jet(metric: FinslerMetric, x, y, order: int) -> Jet:
    n = metric.dim
    zs = Jet.variables(list(map(float, x)) + list(map(float, y)), order)
    F = metric.F(zs[:n], zs[n:])
    if not isinstance(F, Jet):
        raise FlagDomainError("metric does not depend on the flag coordinates")
    if F.value <= 0.0:
        raise FlagDomainError(f"F = {F.value!r} <= 0 at the requested flag")
    return F * F


def _f2_tables(metric: FinslerMetric, x, y, order: int) -> dict:
    """Partial derivatives of F^2 at (x, y), grouped by (x-degree, y-degree)."""
    n = metric.dim
    f2 = _f2_jet(metric, x, y, order)

    def P(xind, yind):
        m = [0] * (2 * n)
        for k in xind:
            m[k] += 1
        for i in yind:
            m[n + i] += 1
        return f2.partial(tuple(m))

    rng = range(n)
    T = {"n": n, "F2": f2.value, "F": math.sqrt(f2.value)}
    T["Q10"] = np.array([P((k,), ()) for k in rng])
    T["Q01"] = np.array([P((), (i,)) for i in rng])
    if order >= 2:
        T["Q11"] = np.array([[P((k,), (i,)) for i in rng] for k in rng])
        T["Q02"] = np.array([[P((), (i, j)) for j in rng] for i in rng])
    if order >= 3:
        T["Q12"] = np.array([[[P((k,), (i, j)) for j in rng] for i in rng] for k in rng])
        T["Q03"] = np.array([[[P((), (i, j, k)) for k in rng] for j in rng] for i in rng])
    if order >= 4:
        T["Q20"] = np.array([[P((k, l), ()) for l in rng] for k in rng])
        T["Q21"] = np.array([[[P((k, l), (i,)) for i in rng] for l in rng] for k in rng])
        T["Q22"] = np.array([[[[P((k, l), (i, j)) for j in rng] for i in rng]
                              for l in rng] for k in rng])
        T["Q13"] = np.array([[[[P((k,), (i, j, p)) for p in rng] for j in rng]
                              for i in rng] for k in rng])
        T["Q04"] = np.array([[[[P((), (i, j, p, q)) for q in rng] for p in rng]
                              for j in rng] for i in rng])
    return T


def _fundamental(T):
    g = 0.5 * T["Q02"]
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise FlagDomainError("fundamental tensor not positive definite at flag") from exc
    return g, np.linalg.inv(g)


def _d2_inverse(ginv, first, second, mixed):
    """d_p d_k of g^{-1} given dg along the two directions and the mixed d2g."""
    t0 = -np.einsum("ia,kpab,bj->kpij", ginv, mixed, ginv)
    t1 = np.einsum("ia,kab,bc,pcd,dj->kpij", ginv, first, ginv, second, ginv)
    t2 = np.einsum("ia,pab,bc,kcd,dj->kpij", ginv, second, ginv, first, ginv)
    return t0 + t1 + t2


def _spray_derivatives(T, y, order: int):
    """Spray G and its first (order >= 3) and second (order >= 4) derivatives.

    Index layout: dG_dx[k, i] = dG^i/dx^k, d2G_dxdy[k, p, i] = d2 G^i/dx^k dy^p.
    """
    g, ginv = _fundamental(T)
    out = {"g": g, "ginv": ginv}
    N = np.einsum("m,ml->l", y, T["Q11"]) - T["Q10"]
    out["G"] = 0.25 * ginv @ N
    if order < 3:
        return out

    dg_dx = 0.5 * T["Q12"]                                # [k,i,j]
    dg_dy = 0.5 * np.einsum("ijp->pij", T["Q03"])
    dginv_dx = -np.einsum("ia,kab,bj->kij", ginv, dg_dx, ginv)
    dginv_dy = -np.einsum("ia,pab,bj->pij", ginv, dg_dy, ginv)
    dN_dy = np.einsum("m,mlp->pl", y, T["Q12"]) + T["Q11"] - T["Q11"].T
    out["dG_dy"] = 0.25 * (np.einsum("pil,l->pi", dginv_dy, N)
                           + np.einsum("il,pl->pi", ginv, dN_dy))
    if order < 4:
        return out

    dN_dx = np.einsum("m,kml->kl", y, T["Q21"]) - T["Q20"]
    out["dG_dx"] = 0.25 * (np.einsum("kil,l->ki", dginv_dx, N)
                           + np.einsum("il,kl->ki", ginv, dN_dx))

    d2g_dxdy = 0.5 * np.einsum("kijp->kpij", T["Q13"])
    d2g_dydy = 0.5 * np.einsum("ijpq->pqij", T["Q04"])
    d2ginv_dxdy = _d2_inverse(ginv, dg_dx, dg_dy, d2g_dxdy)
    d2ginv_dydy = _d2_inverse(ginv, dg_dy, dg_dy, d2g_dydy)

    d2N_dxdy = (np.einsum("m,kmlp->kpl", y, T["Q22"]) + T["Q21"]
                - np.einsum("klp->kpl", T["Q21"]))
    d2N_dydy = (np.einsum("m,mlpq->pql", y, T["Q13"])
                + np.einsum("plq->pql", T["Q12"])
                + np.einsum("qlp->pql", T["Q12"])
                - np.einsum("lpq->pql", T["Q12"]))
    out["d2G_dxdy"] = 0.25 * (np.einsum("kpil,l->kpi", d2ginv_dxdy, N)
                              + np.einsum("kil,pl->kpi", dginv_dx, dN_dy)
                              + np.einsum("pil,kl->kpi", dginv_dy, dN_dx)
                              + np.einsum("il,kpl->kpi", ginv, d2N_dxdy))
    out["d2G_dydy"] = 0.25 * (np.einsum("pqil,l->pqi", d2ginv_dydy, N)
                              + np.einsum("pil,ql->pqi", dginv_dy, dN_dy)
                              + np.einsum("qil,pl->pqi", dginv_dy, dN_dy)
                              + np.einsum("il,pql->pqi", ginv, d2N_dydy))
    return out


# -- curvature bundle ---------------------------------------------------------


@dataclass
class CurvatureBundle:
    """All spray-level data of one flag; indices follow dG_dx[k, i] = dG^i/dx^k."""

    x: np.ndarray
    y: np.ndarray
    F: float
    g: np.ndarray
    ginv: np.ndarray
    cartan: np.ndarray
    spray: np.ndarray
    dG_dx: np.ndarray
    dG_dy: np.ndarray
    d2G_dxdy: np.ndarray
    d2G_dydy: np.ndarray
    riemann: np.ndarray
    ricci: float

    @property
    def F2(self) -> float:
        return self.F * self.F


def _assemble_riemann(y, G, dG_dx, dG_dy, d2G_dxdy, d2G_dydy):
    return (2.0 * dG_dx.T
            - np.einsum("jki,j->ik", d2G_dxdy, y)
            + 2.0 * np.einsum("j,jki->ik", G, d2G_dydy)
            - np.einsum("ji,kj->ik", dG_dy, dG_dy))


def curvature_bundle(metric: FinslerMetric, p: FlagPoint, mode: str = "jet") -> CurvatureBundle:
    """Spray, curvature operator and Ricci at one flag.

    mode="jet" assembles everything from one fourth-order expansion of F^2;
    mode="fd" recomputes the outer spray derivatives by Richardson central
    differences of the pointwise spray map, as an independent cross-check.
    """
    if mode == "fd":
        return _curvature_bundle_fd(metric, p)
    if mode != "jet":
        raise ParameterError(f"unknown differentiation mode {mode!r}")
    x, y = p.x, p.y
    T = _f2_tables(metric, x, y, order=4)
    D = _spray_derivatives(T, y, order=4)
    R = _assemble_riemann(y, D["G"], D["dG_dx"], D["dG_dy"], D["d2G_dxdy"], D["d2G_dydy"])
    return CurvatureBundle(x=np.asarray(x, float), y=np.asarray(y, float),
                           F=T["F"], g=D["g"], ginv=D["ginv"], cartan=0.25 * T["Q03"],
                           spray=D["G"], dG_dx=D["dG_dx"], dG_dy=D["dG_dy"],
                           d2G_dxdy=D["d2G_dxdy"], d2G_dydy=D["d2G_dydy"],
                           riemann=R, ricci=float(np.trace(R)))


# -- finite-difference cross-check path --------------------------------------


def _pointwise_spray(metric: FinslerMetric):
    n = metric.dim

    def G_fn(z):
        T = _f2_tables(metric, z[:n], z[n:], order=2)
        D = _spray_derivatives(T, np.asarray(z[n:], float), order=2)
        return D["G"]

    return G_fn


def _curvature_bundle_fd(metric: FinslerMetric, p: FlagPoint,
                         step1: float = 1e-5, step2: float = 3e-4) -> CurvatureBundle:
    n = metric.dim
    x, y = np.asarray(p.x, float), np.asarray(p.y, float)
    z0 = np.concatenate([x, y])
    scale = max(1.0, float(np.max(np.abs(z0))))
    G_fn = _pointwise_spray(metric)

    T = _f2_tables(metric, x, y, order=2)
    g, ginv = _fundamental(T)
    G = G_fn(z0)

    def dcomp(i, multi, step):
        return fd_derivative(lambda *z: G_fn(np.asarray(z))[i], z0, multi, step=step)

    def unit(a, b=None):
        m = [0] * (2 * n)
        m[a] += 1
        if b is not None:
            m[b] += 1
        return tuple(m)

    dG_dx = np.array([[dcomp(i, unit(k), step1 * scale) for i in range(n)] for k in range(n)])
    dG_dy = np.array([[dcomp(i, unit(n + k), step1 * scale) for i in range(n)] for k in range(n)])
    d2G_dxdy = np.array([[[dcomp(i, unit(k, n + q), step2 * scale) for i in range(n)]
                          for q in range(n)] for k in range(n)])
    d2G_dydy = np.array([[[dcomp(i, unit(n + pp, n + q), step2 * scale) for i in range(n)]
                          for q in range(n)] for pp in range(n)])

    R = _assemble_riemann(y, G, dG_dx, dG_dy, d2G_dxdy, d2G_dydy)
    return CurvatureBundle(x=x, y=y, F=T["F"], g=g, ginv=ginv,
                           cartan=np.zeros((n, n, n)), spray=G,
                           dG_dx=dG_dx, dG_dy=dG_dy, d2G_dxdy=d2G_dxdy,
                           d2G_dydy=d2G_dydy, riemann=R, ricci=float(np.trace(R)))


# -- single-quantity operations ----------------------------------------------


def fundamental_tensor(metric: FinslerMetric, p: FlagPoint) -> np.ndarray:
    T = _f2_tables(metric, p.x, p.y, order=2)
    g, _ = _fundamental(T)
    return g


def cartan_tensor(metric: FinslerMetric, p: FlagPoint) -> np.ndarray:
    T = _f2_tables(metric, p.x, p.y, order=3)
    return 0.25 * T["Q03"]


def spray(metric: FinslerMetric, p: FlagPoint) -> np.ndarray:
    T = _f2_tables(metric, p.x, p.y, order=2)
    return _spray_derivatives(T, p.y, order=2)["G"]


def riemann_curvature(metric: FinslerMetric, p: FlagPoint, mode="jet") -> np.ndarray:
    return curvature_bundle(metric, p, mode=mode).riemann


def ricci(metric: FinslerMetric, p: FlagPoint, mode="jet") -> float:
    return curvature_bundle(metric, p, mode=mode).ricci


def distortion(metric: FinslerMetric, measure: Measure, p: FlagPoint) -> float:
    """tau = log( sqrt(det g(x, y)) / sigma(x) )."""
    T = _f2_tables(metric, p.x, p.y, order=2)
    g, _ = _fundamental(T)
    det = float(np.linalg.det(g))
    if det <= 0.0:
        raise FlagDomainError("det g <= 0 at flag")
    sigma = float(scalar_value(measure.density([float(v) for v in p.x])))
    if sigma <= 0.0:
        raise jets.EvaluationError(f"measure density must be positive, got {sigma!r}")
    return 0.5 * math.log(det) - math.log(sigma)


def _s_parts(metric: FinslerMetric, measure: Measure, x, y, order: int):
    """S and, at order 4, its coordinate derivatives."""
    y = np.asarray(y, float)
    T = _f2_tables(metric, x, y, order=order)
    D = _spray_derivatives(T, y, order=order)
    logs = measure.log_density_table(x, order=2)
    S = float(np.trace(D["dG_dy"]) - np.dot(y, logs[1]))
    if order < 4:
        return S, None, None, D["G"]
    dS_dx = np.einsum("kii->k", D["d2G_dxdy"]) - np.einsum("i,ki->k", y, logs[2])
    dS_dy = np.einsum("kii->k", D["d2G_dydy"]) - logs[1]
    return S, dS_dx, dS_dy, D["G"]


def s_curvature(metric: FinslerMetric, measure: Measure, p: FlagPoint) -> float:
    """S(x, y) = dG^i/dy^i - y^i d_i log sigma."""
    S, _, _, _ = _s_parts(metric, measure, p.x, p.y, order=3)
    return S


def s_dot(metric: FinslerMetric, measure: Measure, p: FlagPoint, mode="jet") -> float:
    """Rate of change of S along the geodesic flow: y.dS/dx - 2G.dS/dy."""
    if mode == "fd":
        return _s_dot_fd(metric, measure, p)
    S, dS_dx, dS_dy, G = _s_parts(metric, measure, p.x, p.y, order=4)
    return float(np.dot(p.y, dS_dx) - 2.0 * np.dot(G, dS_dy))


def _s_dot_fd(metric: FinslerMetric, measure: Measure, p: FlagPoint,
              step: float = 1e-5) -> float:
    n = metric.dim
    z0 = np.concatenate([np.asarray(p.x, float), np.asarray(p.y, float)])
    scale = max(1.0, float(np.max(np.abs(z0))))

    def S_fn(*z):
        return _s_parts(metric, measure, z[:n], z[n:], order=3)[0]

    G = spray(metric, p)
    dS = np.array([fd_derivative(S_fn, z0, tuple(1 if i == k else 0 for i in range(2 * n)),
                                 step=step * scale) for k in range(2 * n)])
    return float(np.dot(p.y, dS[:n]) - 2.0 * np.dot(G, dS[n:]))


def weighted_ricci(metric: FinslerMetric, measure: Measure, p: FlagPoint,
                   N: float = math.inf, mode="jet") -> float:
    """Ric_N = Ric + S-dot - S^2/(N - n); Ric_inf drops the last term."""
    n = metric.dim
    if N <= n:
        raise ParameterError(f"effective dimension N must exceed n = {n}")
    ric = ricci(metric, p, mode=mode)
    sdot = s_dot(metric, measure, p, mode=mode)
    if math.isinf(N):
        return ric + sdot
    S = s_curvature(metric, measure, p)
    return ric + sdot - S * S / (N - n)


def lie_scalar(fn2n, v: VectorField, p: FlagPoint) -> float:
    """Lie derivative along the complete lift of V of a scalar Phi(x, y):

        L Phi = V^i dPhi/dx^i + y^j dV^i/dx^j dPhi/dy^i
    """
    n = p.dim
    zs = Jet.variables(list(p.x) + list(p.y), 1)
    phi = fn2n(zs[:n], zs[n:])
    if not isinstance(phi, Jet):
        return 0.0
    grad = phi.gradient()
    v0, dv = v.table(p.x, order=1)
    ydv = np.einsum("j,ij->i", p.y, dv)
    return float(np.dot(v0, grad[:n]) + np.dot(ydv, grad[n:]))


def lie_F2(metric: FinslerMetric, v: VectorField, p: FlagPoint) -> float:
    """Lie derivative of F^2 along the complete lift of V."""
    return lie_scalar(lambda xs, ys: metric.F(xs, ys) ** 2, v, p)


@dataclass(frozen=True)
class FlagCurvature:
    value: float
    residual: float
    flat: bool


def flag_curvature_fit(metric: FinslerMetric, p: FlagPoint, mode="jet") -> FlagCurvature:
    """Least-squares K with R^i_k ~ K (F^2 delta^i_k - F F_{y^k} y^i).

    The residual is the Frobenius misfit relative to |R|; a vanishing R is
    reported as flat with K = 0 and residual 0.
    """
    b = curvature_bundle(metric, p, mode=mode)
    T = _f2_tables(metric, p.x, p.y, order=1)
    n = metric.dim
    F2 = b.F * b.F
    A = F2 * np.eye(n) - 0.5 * np.outer(p.y, T["Q01"])
    R = b.riemann
    normR = float(np.linalg.norm(R))
    if normR <= 1e-11 * F2 * F2 + 1e-300:
        return FlagCurvature(0.0, 0.0, True)
    K = float(np.sum(R * A) / np.sum(A * A))
    residual = float(np.linalg.norm(R - K * A) / normR)
    return FlagCurvature(K, residual, False)

"""Randers layer: (alpha, beta) <-> navigation data, the beta-derivative
tensor family, Busemann-Hausdorff density, isotropic-S fitting, and the
closed-form Ricci curvature.

Conventions (all indices raised/lowered with a_ij unless noted):

    r_ij = (b_{i;j} + b_{j;i})/2      s_ij = (b_{i;j} - b_{j;i})/2
    s^i_j = a^ik s_kj                 s_j = b^i s_ij
    e_ij = r_ij + b_i s_j + b_j s_i   t_ij = s_ik s^k_j
    q_ij = r_ik s^k_j                 t_j = b^i t_ij

and on the navigation side (indices via h_ij):

    R_ij = (W_{i:j} + W_{j:i})/2      S_ij = (W_{i:j} - W_{j:i})/2
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import jets, riemann
from .finsler import FinslerMetric, Measure
from .jets import FlagPoint, scalar_value
from .riemann import (RiemannMetric, VectorField, as_scalar_field, generic_det,
                      generic_inverse)


class RandersDomainError(ArithmeticError):
    """||beta||_alpha >= 1 at an evaluated point."""


class NavigationDomainError(ArithmeticError):
    """||W||_h >= 1 at an evaluated point (lambda <= 0)."""


def _float_matrix(rows):
    return np.array([[scalar_value(v) for v in row] for row in rows], float)


@dataclass
class RandersData:
    """A Randers structure F = alpha + beta given by (a_ij, b_i)."""

    alpha: RiemannMetric
    beta: VectorField
    name: str = ""

    @property
    def dim(self) -> int:
        return self.alpha.dim

    def b2(self, x):
        """||beta||^2_alpha = a^ij b_i b_j, evaluable on Jets."""
        rows = self.alpha.matrix(x)
        binv = generic_inverse(rows)
        b = self.beta.components(x)
        out = 0.0
        for i in range(self.dim):
            for j in range(self.dim):
                out = out + binv[i][j] * b[i] * b[j]
        return out

    def check_valid(self, x):
        b2 = scalar_value(self.b2([float(v) for v in x]))
        if b2 >= 1.0:
            raise RandersDomainError(f"||beta||_alpha = {math.sqrt(b2):.6f} >= 1 at {list(x)}")


@dataclass
class NavigationData:
    """Navigation pair (h, W) with ||W||_h < 1."""

    h: RiemannMetric
    W: VectorField
    name: str = ""

    @property
    def dim(self) -> int:
        return self.h.dim

    def lam(self, x):
        """lambda = 1 - ||W||^2_h, evaluable on Jets."""
        rows = self.h.matrix(x)
        w = self.W.components(x)
        norm2 = 0.0
        for i in range(self.dim):
            for j in range(self.dim):
                norm2 = norm2 + rows[i][j] * w[i] * w[j]
        return 1.0 - norm2

    def check_valid(self, x):
        lam = scalar_value(self.lam([float(v) for v in x]))
        if lam <= 0.0:
            raise NavigationDomainError(f"lambda = {lam:.6f} <= 0 at {list(x)}")


# -- conversions ---------------------------------------------------------------


def from_navigation(nav: NavigationData) -> RandersData:
    """(a_ij, b_i) with a_ij = h_ij/lam + W_i W_j/lam^2 and b_i = -W_i/lam."""
    n = nav.dim

    def a_fn(x):
        rows = nav.h.matrix(x)
        w = nav.W.components(x)
        lam = nav.lam(x)
        if scalar_value(lam) <= 0.0:
            raise NavigationDomainError("lambda <= 0 while converting navigation data")
        wl = [sum(rows[i][j] * w[j] for j in range(n)) for i in range(n)]
        return [[rows[i][j] / lam + wl[i] * wl[j] / (lam * lam) for j in range(n)]
                for i in range(n)]

    def b_fn(x):
        rows = nav.h.matrix(x)
        w = nav.W.components(x)
        lam = nav.lam(x)
        if scalar_value(lam) <= 0.0:
            raise NavigationDomainError("lambda <= 0 while converting navigation data")
        return [-sum(rows[i][j] * w[j] for j in range(n)) / lam for i in range(n)]

    return RandersData(alpha=RiemannMetric(n, a_fn, name=f"alpha({nav.name})"),
                       beta=VectorField(b_fn, name=f"beta({nav.name})"),
                       name=nav.name)


def to_navigation(rd: RandersData) -> NavigationData:
    """(h_ij, W^i) with h_ij = lam (a_ij - b_i b_j), W^i = -b^i/lam, lam = 1 - b^2."""
    n = rd.dim

    def h_fn(x):
        rows = rd.alpha.matrix(x)
        b = rd.beta.components(x)
        lam = 1.0 - rd.b2(x)
        if scalar_value(lam) <= 0.0:
            raise RandersDomainError("||beta||_alpha >= 1 while converting Randers data")
        return [[lam * (rows[i][j] - b[i] * b[j]) for j in range(n)] for i in range(n)]

    def w_fn(x):
        rows = rd.alpha.matrix(x)
        ainv = generic_inverse(rows)
        b = rd.beta.components(x)
        lam = 1.0 - rd.b2(x)
        if scalar_value(lam) <= 0.0:
            raise RandersDomainError("||beta||_alpha >= 1 while converting Randers data")
        bup = [sum(ainv[i][j] * b[j] for j in range(n)) for i in range(n)]
        return [-bup[i] / lam for i in range(n)]

    return NavigationData(h=RiemannMetric(n, h_fn, name=f"h({rd.name})"),
                          W=VectorField(w_fn, name=f"W({rd.name})"),
                          name=rd.name)


# -- metric evaluation ----------------------------------------------------------


def finsler_from_randers(rd: RandersData) -> FinslerMetric:
    n = rd.dim

    def fn(x, y):
        rows = rd.alpha.matrix(x)
        if scalar_value(rd.b2(x)) >= 1.0:
            raise RandersDomainError("||beta||_alpha >= 1 at evaluated point")
        b = rd.beta.components(x)
        quad = 0.0
        lin = 0.0
        for i in range(n):
            lin = lin + b[i] * y[i]
            for j in range(n):
                quad = quad + rows[i][j] * y[i] * y[j]
        return jets.sqrt(quad) + lin

    return FinslerMetric(n, fn, name=rd.name or "randers")


def finsler_from_navigation(nav: NavigationData) -> FinslerMetric:
    n = nav.dim

    def fn(x, y):
        rows = nav.h.matrix(x)
        w = nav.W.components(x)
        lam = nav.lam(x)
        if scalar_value(lam) <= 0.0:
            raise NavigationDomainError("||W||_h >= 1 at evaluated point")
        h2 = 0.0
        for i in range(n):
            for j in range(n):
                h2 = h2 + rows[i][j] * y[i] * y[j]
        w0 = 0.0
        for i in range(n):
            for j in range(n):
                w0 = w0 + rows[i][j] * w[j] * y[i]
        return (jets.sqrt(lam * h2 + w0 * w0) - w0) / lam

    return FinslerMetric(n, fn, name=nav.name or "navigation")


def eval_F(rd: RandersData, p: FlagPoint) -> float:
    return finsler_from_randers(rd).value(p.x, p.y)


def eval_F_nav(nav: NavigationData, p: FlagPoint) -> float:
    return finsler_from_navigation(nav).value(p.x, p.y)


def navigation_xi(nav: NavigationData, p: FlagPoint) -> np.ndarray:
    """xi = y - F(x, y) W(x); satisfies h(x, xi) = F(x, y)."""
    F = eval_F_nav(nav, p)
    w = np.array([scalar_value(c) for c in nav.W.components(list(p.x))], float)
    return p.y - F * w


# -- Busemann-Hausdorff measure ---------------------------------------------------


def bh_density_fn(rd: RandersData):
    """sigma_BH(x) = (1 - b^2)^{(n+1)/2} sqrt(det a), evaluable on Jets."""
    n = rd.dim

    def fn(x):
        b2 = rd.b2(x)
        if scalar_value(b2) >= 1.0:
            raise RandersDomainError("||beta||_alpha >= 1 in Busemann-Hausdorff density")
        det = generic_det(rd.alpha.matrix(x))
        return jets.power(1.0 - b2, 0.5 * (n + 1)) * jets.sqrt(det)

    return fn


def bh_density(rd: RandersData, x) -> float:
    return float(scalar_value(bh_density_fn(rd)([float(v) for v in x])))


def bh_measure(rd: RandersData) -> Measure:
    return Measure(bh_density_fn(rd), name=f"BH({rd.name or 'randers'})")


# -- beta derivative tables --------------------------------------------------------


@dataclass
class BetaTables:
    """Point-level tensors of (alpha, beta) at one x."""

    x: np.ndarray
    a: np.ndarray
    ainv: np.ndarray
    b_low: np.ndarray          # b_i
    b_up: np.ndarray           # b^i
    b2: float
    gamma: np.ndarray          # Gamma^k_ij of alpha
    bcov: np.ndarray           # b_{i;j}
    r: np.ndarray              # r_ij
    s: np.ndarray              # s_ij
    s_mixed: np.ndarray        # s^i_j
    s_low: np.ndarray          # s_j
    s_up: np.ndarray           # s^j
    r_low: np.ndarray          # r_j
    r_up: np.ndarray
    r_scalar: float            # r = b^j r_j
    t: np.ndarray              # t_ij
    t_mixed: np.ndarray
    t_low: np.ndarray          # t_j
    t_trace: float             # t^i_i
    q: np.ndarray              # q_ij
    e: np.ndarray              # e_ij
    s_cov: np.ndarray          # (s_j)_{;k}
    r_cov: np.ndarray          # r_{ij;k}
    div_mixed_s: np.ndarray    # (s^i_j)_{;i} as a covector in j
    div_mixed_r: np.ndarray    # (r^i_j)_{;i}
    d_rtrace: np.ndarray       # d_k (r^i_i)
    div_s_up: float            # s^i_{;i}
    div_r_up: float            # r^i_{;i}
    alpha_ricci: np.ndarray    # Ricci tensor of alpha


def beta_tables(rd: RandersData, x) -> BetaTables:
    n = rd.dim
    x = np.asarray(x, float)
    a0, da, d2a = rd.alpha.tables(x, order=2)
    riemann.check_positive_definite(a0, "alpha")
    b0, db, d2b = rd.beta.table(x, order=2)
    ainv = np.linalg.inv(a0)
    dainv = -np.einsum("ia,kab,bj->kij", ainv, da, ainv)

    bracket = np.einsum("ijl->lij", da) + np.einsum("jil->lij", da) - da
    gamma = 0.5 * np.einsum("kl,lij->kij", ainv, bracket)
    dbracket = (np.einsum("mijl->mlij", d2a) + np.einsum("mjil->mlij", d2a) - d2a)
    dgamma = 0.5 * (np.einsum("mkl,lij->mkij", dainv, bracket)
                    + np.einsum("kl,mlij->mkij", ainv, dbracket))

    b2 = float(b0 @ ainv @ b0)
    if b2 >= 1.0:
        raise RandersDomainError(f"||beta||_alpha^2 = {b2:.6f} >= 1 at {x.tolist()}")
    b_up = ainv @ b0

    bcov = db - np.einsum("kij,k->ij", gamma, b0)
    dbcov = (np.einsum("ijm->mij", d2b)
             - np.einsum("mkij,k->mij", dgamma, b0)
             - np.einsum("kij,km->mij", gamma, db))

    r = 0.5 * (bcov + bcov.T)
    s = 0.5 * (bcov - bcov.T)
    dr = 0.5 * (dbcov + np.einsum("mij->mji", dbcov))
    ds = 0.5 * (dbcov - np.einsum("mij->mji", dbcov))

    s_mixed = ainv @ s
    s_low = b_up @ s
    s_up = ainv @ s_low
    r_low = b_up @ r
    r_up = ainv @ r_low
    r_scalar = float(b_up @ r_low)
    t = s @ s_mixed
    t_mixed = ainv @ t
    t_low = b_up @ t
    t_trace = float(np.trace(t_mixed))
    q = r @ s_mixed
    e = r + np.outer(b0, s_low) + np.outer(s_low, b0)

    db_up = np.einsum("kij,j->ik", dainv, b0) + np.einsum("ij,jk->ik", ainv, db)
    ds_low = np.einsum("ik,ij->kj", db_up, s) + np.einsum("i,kij->kj", b_up, ds)
    s_cov = ds_low.T.copy()
    s_cov -= np.einsum("pjk,p->jk", gamma, s_low)

    r_cov = dr.transpose(1, 2, 0) - np.einsum("pik,pj->ijk", gamma, r) \
        - np.einsum("pjk,ip->ijk", gamma, r)

    ds_mixed = np.einsum("kip,pj->kij", dainv, s) + np.einsum("ip,kpj->kij", ainv, ds)
    div_mixed_s = (np.einsum("iij->j", ds_mixed)
                   + np.einsum("iip,pj->j", gamma, s_mixed)
                   - np.einsum("pji,ip->j", gamma, s_mixed))
    dr_mixed = np.einsum("kip,pj->kij", dainv, r) + np.einsum("ip,kpj->kij", ainv, dr)
    div_mixed_r = (np.einsum("iij->j", dr_mixed)
                   + np.einsum("iip,pj->j", gamma, ainv @ r)
                   - np.einsum("pji,ip->j", gamma, ainv @ r))

    d_rtrace = np.einsum("kij,ji->k", dainv, r) + np.einsum("ij,kji->k", ainv, dr)

    ds_up = np.einsum("kij,j->ki", dainv, s_low) + np.einsum("ij,kj->ki", ainv, ds_low)
    div_s_up = float(np.einsum("kk->", ds_up) + np.einsum("iip,p->", gamma, s_up))
    dr_up = np.einsum("kij,j->ki", dainv, r_low) + np.einsum("ij,kj->ki", ainv,
                                                             np.einsum("ik,ij->kj", db_up, r)
                                                             + np.einsum("i,kij->kj", b_up, dr))
    div_r_up = float(np.einsum("kk->", dr_up) + np.einsum("iip,p->", gamma, r_up))

    term1 = np.einsum("iijk->jk", dgamma)
    term2 = np.einsum("jiik->jk", dgamma)
    term3 = np.einsum("iip,pjk->jk", gamma, gamma)
    term4 = np.einsum("ijp,pik->jk", gamma, gamma)
    alpha_ricci = term1 - term2 + term3 - term4

    return BetaTables(x=x, a=a0, ainv=ainv, b_low=b0, b_up=b_up, b2=b2, gamma=gamma,
                      bcov=bcov, r=r, s=s, s_mixed=s_mixed, s_low=s_low, s_up=s_up,
                      r_low=r_low, r_up=r_up, r_scalar=r_scalar, t=t, t_mixed=t_mixed,
                      t_low=t_low, t_trace=t_trace, q=q, e=e, s_cov=s_cov, r_cov=r_cov,
                      div_mixed_s=div_mixed_s, div_mixed_r=div_mixed_r,
                      d_rtrace=d_rtrace, div_s_up=div_s_up, div_r_up=div_r_up,
                      alpha_ricci=alpha_ricci)


@dataclass
class BetaDerivatives:
    """Flag-level contractions of the beta tensors at one (x, y)."""

    tables: BetaTables
    y: np.ndarray
    alpha: float
    beta: float
    F: float
    r00: float
    s0: float
    e00: float
    t00: float
    t0: float
    q00: float
    s00: float        # (s_0)_{;0} = (s_j)_{;k} y^j y^k
    r000: float       # r_{00;0}
    si0i: float       # (s^i_0)_{;i}
    ri0i: float       # (r^i_0)_{;i}
    rtrace0: float    # (r^i_i)_{;0}
    r0: float         # r_j y^j


def beta_derivatives(rd: RandersData, p: FlagPoint, tables: BetaTables | None = None) -> BetaDerivatives:
    T = tables if tables is not None else beta_tables(rd, p.x)
    y = np.asarray(p.y, float)
    alpha2 = float(y @ T.a @ y)
    alpha = math.sqrt(alpha2)
    beta = float(T.b_low @ y)
    return BetaDerivatives(
        tables=T, y=y, alpha=alpha, beta=beta, F=alpha + beta,
        r00=float(y @ T.r @ y), s0=float(T.s_low @ y), e00=float(y @ T.e @ y),
        t00=float(y @ T.t @ y), t0=float(T.t_low @ y), q00=float(y @ T.q @ y),
        s00=float(np.einsum("jk,j,k->", T.s_cov, y, y)),
        r000=float(np.einsum("ijk,i,j,k->", T.r_cov, y, y, y)),
        si0i=float(T.div_mixed_s @ y), ri0i=float(T.div_mixed_r @ y),
        rtrace0=float(T.d_rtrace @ y), r0=float(T.r_low @ y))


# -- isotropic S fitting and closed-form Ricci ---------------------------------------


def fit_sigma_isotropic_S(rd: RandersData, x, y_samples):
    """Least-squares sigma in e_00 = 2 sigma (alpha^2 - beta^2) over the y samples.

    Returns (sigma, residual) where residual is the rms misfit relative to the
    rms of 2(alpha^2 - beta^2).
    """
    T = beta_tables(rd, x)
    lhs, rhs = [], []
    for y in y_samples:
        y = np.asarray(y, float)
        alpha2 = float(y @ T.a @ y)
        beta = float(T.b_low @ y)
        lhs.append(float(y @ T.e @ y))
        rhs.append(2.0 * (alpha2 - beta * beta))
    lhs, rhs = np.array(lhs), np.array(rhs)
    denom = float(rhs @ rhs)
    if denom <= 0.0 or len(lhs) < rd.dim * (rd.dim + 1) // 2:
        raise ValueError("degenerate y-sample set for sigma fit")
    sigma = float(lhs @ rhs) / denom
    residual = float(np.sqrt(np.mean((lhs - sigma * rhs) ** 2) / np.mean(rhs ** 2)))
    return sigma, residual


def randers_ricci_closed_form(rd: RandersData, p: FlagPoint,
                              tables: BetaTables | None = None) -> float:
    """Ricci curvature of F = alpha + beta assembled term by term:

        Ric = aRic + 2 alpha s^i_{0;i} - 2 t_00 - alpha^2 t^i_i + (n-1) Xi,
        Xi  = (2 alpha/F)(q_00 - alpha t_0) + 3/(4F^2) (r_00 - 2 alpha s_0)^2
              - 1/(2F) (r_{00;0} - 2 alpha s_{0;0}).
    """
    n = rd.dim
    bd = beta_derivatives(rd, p, tables=tables)
    T = bd.tables
    y = bd.y
    aric = float(np.einsum("jk,j,k->", T.alpha_ricci, y, y))
    alpha, F = bd.alpha, bd.F
    if F <= 0.0 or alpha <= 0.0:
        raise RandersDomainError("flag outside the Randers domain (F or alpha <= 0)")
    xi = (2.0 * alpha / F * (bd.q00 - alpha * bd.t0)
          + 0.75 / (F * F) * (bd.r00 - 2.0 * alpha * bd.s0) ** 2
          - 0.5 / F * (bd.r000 - 2.0 * alpha * bd.s00))
    return aric + 2.0 * alpha * bd.si0i - 2.0 * bd.t00 - alpha * alpha * T.t_trace \
        + (n - 1) * xi


def isotropic_s_identity_residuals(rd: RandersData, p: FlagPoint, sigma,
                                   tables: BetaTables | None = None) -> dict:
    """Residuals of the tensor identities implied by e_00 = 2 sigma (alpha^2 - beta^2).

    Keys are identity names; values are absolute residuals, with 2-homogeneous
    scalars normalized by alpha^2 and 1-homogeneous ones by alpha.
    """
    sigma = as_scalar_field(sigma)
    n = rd.dim
    bd = beta_derivatives(rd, p, tables=tables)
    T = bd.tables
    y = bd.y
    sig, dsig = sigma.table(T.x, order=1)[:2]
    sig = float(sig)
    sigma0 = float(dsig @ y)
    sigma_b = float(dsig @ T.b_up)
    alpha, beta, b2 = bd.alpha, bd.beta, T.b2
    alpha2 = alpha * alpha
    a_scale = max(1.0, float(np.max(np.abs(T.a))))

    out = {}
    out["e00-isotropy"] = abs(bd.e00 - 2.0 * sig * (alpha2 - beta * beta)) / alpha2
    m = T.r + np.outer(T.s_low, T.b_low) + np.outer(T.b_low, T.s_low) \
        - 2.0 * sig * (T.a - np.outer(T.b_low, T.b_low))
    out["r-matrix"] = float(np.max(np.abs(m))) / a_scale
    mm = T.ainv @ T.r + np.outer(T.s_up, T.b_low) + np.outer(T.b_up, T.s_low) \
        - 2.0 * sig * (np.eye(n) - np.outer(T.b_up, T.b_low))
    out["r-mixed"] = float(np.max(np.abs(mm)))
    out["r-trace"] = abs(float(np.trace(T.ainv @ T.r)) - 2.0 * sig * (n - b2))
    v = T.r_low + b2 * T.s_low - 2.0 * sig * (1.0 - b2) * T.b_low
    out["r-covector"] = float(np.max(np.abs(v)))
    out["r-scalar"] = abs(T.r_scalar - 2.0 * sig * b2 * (1.0 - b2))
    vec = T.ainv @ T.r @ y + beta * T.s_up + T.b_up * bd.s0 - 2.0 * sig * (y - beta * T.b_up)
    out["r-mixed-flag"] = float(np.max(np.abs(vec))) / alpha
    out["r00"] = abs(bd.r00 + 2.0 * beta * bd.s0 - 2.0 * sig * (alpha2 - beta * beta)) / alpha2
    out["r-trace-derivative"] = abs(
        bd.rtrace0 - (2.0 * sigma0 * (n - b2)
                      - 4.0 * sig * (1.0 - b2) * (2.0 * sig * beta + bd.s0))) / alpha
    ss = float(T.s_low @ T.s_up)
    out["r-divergence"] = abs(
        T.div_r_up - (-2.0 * (1.0 - b2) * (ss - sigma_b - 2.0 * n * sig ** 2
                                           + 6.0 * sig ** 2 * b2)
                      - b2 * T.div_s_up))
    out["q00"] = abs(bd.q00 + (bd.s0 ** 2 + bd.t0 * beta + 2.0 * sig * beta * bd.s0)) / alpha2
    out["r00-derivative"] = abs(
        bd.r000 - (-2.0 * bd.s00 * beta + 4.0 * bd.s0 ** 2 * beta
                   + 8.0 * sig * bd.s0 * beta * beta
                   + 2.0 * (sigma0 - 2.0 * sig * bd.s0 - 4.0 * sig ** 2 * beta)
                   * (alpha2 - beta * beta))) / (alpha2 * alpha)
    return out


# -- navigation-side tensors ---------------------------------------------------------


@dataclass
class NavTensors:
    """W-derivative tensors of a navigation pair at one x (indices via h)."""

    x: np.ndarray
    h: np.ndarray
    hinv: np.ndarray
    w_up: np.ndarray          # W^i
    w_low: np.ndarray         # W_i
    lam: float
    wcov: np.ndarray          # W_{i:j}
    r_sym: np.ndarray         # (W_{i:j} + W_{j:i})/2
    s_asym: np.ndarray        # (W_{i:j} - W_{j:i})/2
    s_mixed: np.ndarray       # h^ik S_kj
    s_low: np.ndarray         # S_j = W^i S_ij
    s_up: np.ndarray          # h^ij S_j
    r_low: np.ndarray         # R_j = W^i R_ij
    r_scalar: float           # R = W^j R_j


def nav_tensors(nav: NavigationData, x) -> NavTensors:
    n = nav.dim
    x = np.asarray(x, float)
    h0, dh = nav.h.tables(x, order=1)
    riemann.check_positive_definite(h0, "h")
    hinv = np.linalg.inv(h0)
    w0, dw = nav.W.table(x, order=1)
    lam = 1.0 - float(w0 @ h0 @ w0)
    if lam <= 0.0:
        raise NavigationDomainError(f"lambda = {lam:.6f} <= 0 at {x.tolist()}")
    bracket = np.einsum("ijl->lij", dh) + np.einsum("jil->lij", dh) - dh
    gamma = 0.5 * np.einsum("kl,lij->kij", hinv, bracket)
    w_low = h0 @ w0
    dwl = np.einsum("jik,k->ij", dh, w0) + np.einsum("ik,kj->ij", h0, dw)
    wcov = dwl - np.einsum("kij,k->ij", gamma, w_low)
    r_sym = 0.5 * (wcov + wcov.T)
    s_asym = 0.5 * (wcov - wcov.T)
    s_low = w0 @ s_asym
    return NavTensors(x=x, h=h0, hinv=hinv, w_up=w0, w_low=w_low, lam=lam,
                      wcov=wcov, r_sym=r_sym, s_asym=s_asym,
                      s_mixed=hinv @ s_asym, s_low=s_low, s_up=hinv @ s_low,
                      r_low=w0 @ r_sym, r_scalar=float(w0 @ r_sym @ w0))


def spray_correction(nav: NavigationData, sigma: float, x, y) -> np.ndarray:
    """zeta^i with G_alpha = G_h + zeta under isotropic S-curvature sigma:

        zeta^i = (S_0 - 2 sigma W_0)/lam y^i - (lam h^2 + 2 W_0^2)/(2 lam^2) S^i
                 + W_0/lam S^i_0
    """
    T = nav_tensors(nav, x)
    y = np.asarray(y, float)
    h2 = float(y @ T.h @ y)
    w0 = float(T.w_low @ y)
    s0 = float(T.s_low @ y)
    return ((s0 - 2.0 * sigma * w0) / T.lam * y
            - (T.lam * h2 + 2.0 * w0 * w0) / (2.0 * T.lam ** 2) * T.s_up
            + w0 / T.lam * (T.s_mixed @ y))


def lie_nav_h2_sides(nav: NavigationData, v: VectorField, p: FlagPoint):
    """Both sides of the navigation Lie-derivative identity

        L_V(htilde^2) = 2/(htilde + Wtilde_0) { htilde Vtilde_{0:0}
                          + htilde^2 (V_{j:k} W^k - W_{j:k} V^k) xi^j },

    where htilde(x, xi) = F(x, y) and xi = y - F W.  Returns (lhs, rhs).
    """
    from .finsler import lie_scalar

    n = nav.dim
    metric = finsler_from_navigation(nav)

    def phi(xs, ys):
        Fv = metric.F(xs, ys)
        w = nav.W.components(xs)
        rows = nav.h.matrix(xs)
        xi = [ys[i] - Fv * w[i] for i in range(n)]
        out = 0.0
        for i in range(n):
            for j in range(n):
                out = out + rows[i][j] * xi[i] * xi[j]
        return out

    lhs = lie_scalar(phi, v, p)

    T = nav_tensors(nav, p.x)
    xi = navigation_xi(nav, p)
    htilde = math.sqrt(float(xi @ T.h @ xi))
    wt0 = float(T.w_low @ xi)
    vcov = riemann.vector_covariant_lowered(nav.h, v, p.x)
    v_up = np.array([scalar_value(c) for c in v.components(list(p.x))], float)
    v00 = float(xi @ vcov @ xi)
    mixed = float((vcov @ T.w_up - T.wcov @ v_up) @ xi)
    rhs = 2.0 / (htilde + wt0) * (htilde * v00 + htilde * htilde * mixed)
    return lhs, rhs


def ricci_transfer_sides(nav: NavigationData, sigma, mu_tilde: float, p: FlagPoint):
    """Both sides of the isotropic-S curvature transfer identity

        Ric - (n-1)(3 sigma_0/F + mu - sigma^2 - 2 sigma_i W^i) F^2
            = hRic_ij xi^i xi^j - (n-1) mu F^2

    for an arbitrary test scalar mu.  Returns (lhs, rhs).
    """
    from .finsler import ricci as generic_ricci

    sigma = as_scalar_field(sigma)
    n = nav.dim
    metric = finsler_from_navigation(nav)
    F = metric.value(p.x, p.y)
    sval, dsig = sigma.table(p.x, order=1)[:2]
    sval = float(sval)
    sigma0 = float(dsig @ p.y)
    w_up = np.array([scalar_value(c) for c in nav.W.components(list(p.x))], float)
    sigw = float(dsig @ w_up)
    ric = generic_ricci(metric, p)
    lhs = ric - (n - 1) * (3.0 * sigma0 / F + mu_tilde - sval ** 2 - 2.0 * sigw) * F * F
    xi = navigation_xi(nav, p)
    hric = riemann.ricci_tensor(nav.h, p.x)
    rhs = float(xi @ hric @ xi) - (n - 1) * mu_tilde * F * F
    return lhs, rhs

"""Residual checkers for every almost-Ricci-soliton characterization.

Four equivalent descriptions are implemented and cross-checked:

  * the defining equation  2 Ric + L_V(F^2) = 2 kappa F^2  for an explicit
    vector field V (`almost_soliton_residual`);
  * the measure form  Ric_inf = kappa F^2  (`gradient_soliton_residual`);
  * (alpha, beta) characterizations: V-form (`vector_soliton_checks_ab`) and
    gradient form (`gradient_soliton_checks_ab`);
  * navigation characterizations: V-form (`vector_soliton_checks_nav`) and
    gradient form (`gradient_soliton_checks_nav`).

All 2-homogeneous residuals are normalized by F^2 (or h^2) and 1-homogeneous
ones by F (or h), so tolerances are scale-free.  Scalars kappa, sigma, c, mu
may be supplied as fields or fitted by least squares; fitted runs report the
fit residual in the check detail.
"""

from __future__ import annotations

import math

import numpy as np

from . import finsler, randers, riemann
from .finsler import FinslerMetric, Measure
from .jets import FlagPoint
from .randers import NavigationData, RandersData
from .reports import ResidualReport, report_from_values
from .riemann import VectorField, as_scalar_field


def _directions(dim):
    """Deterministic direction set rich enough for quadratic-form fitting."""
    dirs = [np.eye(dim)[i] for i in range(dim)]
    r = 1.0 / math.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros(dim)
            e[i] = e[j] = r
            dirs.append(e.copy())
            e[j] = -r
            dirs.append(e.copy())
    return dirs


# -- pointwise residuals ---------------------------------------------------------


def almost_soliton_residual(metric: FinslerMetric, v: VectorField, kappa,
                            p: FlagPoint) -> float:
    """(2 Ric + L_V(F^2) - 2 kappa F^2) / F^2 at one flag."""
    kappa = as_scalar_field(kappa)
    b = finsler.curvature_bundle(metric, p)
    lie = finsler.lie_F2(metric, v, p)
    kap = float(riemann.scalar_value(kappa(list(p.x))))
    return (2.0 * b.ricci + lie - 2.0 * kap * b.F2) / b.F2


def gradient_soliton_residual(metric: FinslerMetric, measure: Measure, kappa,
                              p: FlagPoint, mode="jet") -> float:
    """(Ric_inf - kappa F^2) / F^2 at one flag."""
    kappa = as_scalar_field(kappa)
    ric_inf = finsler.weighted_ricci(metric, measure, p, N=math.inf, mode=mode)
    F2 = metric.value(p.x, p.y) ** 2
    kap = float(riemann.scalar_value(kappa(list(p.x))))
    return (ric_inf - kap * F2) / F2


# -- least-squares scalar fits ------------------------------------------------------


def fit_conformal_factor(h, v: VectorField, x):
    """(c, residual): least-squares c in V_{i:j} + V_{j:i} = 4 c h_ij."""
    vcov = riemann.vector_covariant_lowered(h, v, x)
    sym = vcov + vcov.T
    h0 = h.matrix_at(x)
    n = h.dim
    c = float(np.trace(np.linalg.inv(h0) @ sym)) / (4.0 * n)
    resid = float(np.max(np.abs(sym - 4.0 * c * h0))) / max(1.0, float(np.max(np.abs(h0))))
    return c, resid


def fit_einstein_scalar(h, x):
    """(mu, residual): least-squares mu in Ric_h = mu h^2."""
    ric = riemann.ricci_tensor(h, x)
    h0 = h.matrix_at(x)
    mu = float(np.trace(np.linalg.inv(h0) @ ric)) / h.dim
    resid = float(np.max(np.abs(ric - mu * h0))) / max(1.0, float(np.max(np.abs(h0))))
    return mu, resid


def fit_riemann_soliton_scalar(h, f, x):
    """(mu, residual): least-squares mu in Ric_h + Hess_h(f) = mu h^2."""
    ric = riemann.ricci_tensor(h, x) + riemann.hessian_tensor(h, f, x)
    h0 = h.matrix_at(x)
    mu = float(np.trace(np.linalg.inv(h0) @ ric)) / h.dim
    resid = float(np.max(np.abs(ric - mu * h0))) / max(1.0, float(np.max(np.abs(h0))))
    return mu, resid


def fit_kappa(metric: FinslerMetric, measure: Measure, xs, directions=None):
    """Pointwise least-squares kappa(x) from Ric_inf = kappa F^2.

    Returns (kappa array over xs, anisotropy), where anisotropy is the largest
    spread of Ric_inf/F^2 over the direction set at a single x; it must vanish
    for a true gradient soliton because kappa depends on x only.
    """
    dirs = directions if directions is not None else _directions(metric.dim)
    if len(dirs) < 2:
        raise ValueError("need at least two directions per point to fit kappa")
    kappas = []
    anisotropy = 0.0
    for x in xs:
        vals = []
        for d in dirs:
            p = FlagPoint(x, d)
            ric_inf = finsler.weighted_ricci(metric, measure, p, N=math.inf)
            vals.append(ric_inf / metric.value(p.x, p.y) ** 2)
        vals = np.array(vals)
        kappas.append(float(np.mean(vals)))
        anisotropy = max(anisotropy, float(np.max(vals) - np.min(vals)))
    return np.array(kappas), anisotropy


def fit_sigma(rd: RandersData, xs):
    """Pointwise isotropic-S sigma over the sample points; returns (sigmas, worst fit)."""
    dirs = _directions(rd.dim)
    sigmas, worst = [], 0.0
    for x in xs:
        s, r = randers.fit_sigma_isotropic_S(rd, x, dirs)
        sigmas.append(s)
        worst = max(worst, r)
    return np.array(sigmas), worst


# -- characterization bundles ---------------------------------------------------------


def _field_sigma_terms(sigma, x, y, w_up=None):
    sigma = as_scalar_field(sigma)
    sval, dsig = sigma.table(x, order=1)[:2]
    sval = float(sval)
    sigma0 = float(dsig @ np.asarray(y, float))
    sigw = float(dsig @ w_up) if w_up is not None else 0.0
    return sval, sigma0, sigw, dsig


def vector_soliton_checks_ab(rd: RandersData, v: VectorField, kappa, flags,
                             tol: float, c=None, sigma=None) -> list[ResidualReport]:
    """(alpha, beta) residuals for the vector-field soliton characterization:

      (i)   V_{i;j} + V_{j;i} = 4 c a_ij
      (ii)  e_00 = 2 sigma (alpha^2 - beta^2)
      (iii) aRic = (kappa - 2c)(alpha^2 + beta^2) + t^i_i alpha^2 + 2 t_00
              - (n-1) sigma^2 (3 alpha^2 - beta^2) + 2(n-1) sigma_0 beta
              - (n-1)(s_0^2 + s_{0;0})
      (iv)  3(n-1) sigma_0 = 2 c beta - L_V(beta)
    """
    kappa = as_scalar_field(kappa)
    n = rd.dim
    rows = {k: [] for k in ("conformal-v", "isotropic-s", "alpha-ricci-balance",
                            "sigma-lie-balance")}
    fitted = []
    applicable = True
    for p in flags:
        x = list(p.x)
        T = randers.beta_tables(rd, p.x)
        if float(np.max(np.abs(T.b_low))) < 1e-14:
            applicable = False
            break
        bd = randers.beta_derivatives(rd, p, tables=T)
        if c is None:
            cval, cres = fit_conformal_factor(rd.alpha, v, p.x)
            fitted.append(("c", cval, cres))
        else:
            cval = float(riemann.scalar_value(as_scalar_field(c)(x)))
        if sigma is None:
            sval, sres = randers.fit_sigma_isotropic_S(rd, p.x, _directions(n))
            sigma0 = 0.0
            fitted.append(("sigma", sval, sres))
        else:
            sval, sigma0, _, _ = _field_sigma_terms(sigma, p.x, p.y)
        kap = float(riemann.scalar_value(kappa(x)))
        a2 = bd.alpha ** 2
        beta = bd.beta

        res_conf = riemann.conformal_residual(rd.alpha, v, cval, p.x)
        rows["conformal-v"].append(np.max(np.abs(res_conf))
                                   / max(1.0, float(np.max(np.abs(T.a)))))
        rows["isotropic-s"].append((bd.e00 - 2.0 * sval * (a2 - beta ** 2)) / a2)
        aric = float(p.y @ T.alpha_ricci @ p.y)
        rhs = ((kap - 2.0 * cval) * (a2 + beta ** 2) + T.t_trace * a2 + 2.0 * bd.t00
               - (n - 1) * sval ** 2 * (3.0 * a2 - beta ** 2)
               + 2.0 * (n - 1) * sigma0 * beta
               - (n - 1) * (bd.s0 ** 2 + bd.s00))
        rows["alpha-ricci-balance"].append((aric - rhs) / a2)
        lie_beta = riemann.lie_1form(rd.alpha, rd.beta, v, p.x, p.y)
        rows["sigma-lie-balance"].append(
            (3.0 * (n - 1) * sigma0 - (2.0 * cval * beta - lie_beta)) / bd.alpha)
    detail = "; ".join(f"fitted {k}={val:.3e} (resid {res:.1e})" for k, val, res in fitted[:2])
    return [report_from_values(name, vals, tol, detail=detail, applicable=applicable)
            for name, vals in rows.items()]


def vector_soliton_checks_nav(nav: NavigationData, v: VectorField, kappa, flags,
                              tol: float, mu=None, sigma=None) -> list[ResidualReport]:
    """Navigation residuals for the vector-field soliton characterization:

      (i)   hRic = mu h^2                       (h Einstein)
      (ii)  W_{i:j} + W_{j:i} = -4 sigma h_ij    (conformal with factor -sigma)
      (iii) L_V(h^2) = 2 c h^2 - 6(n-1){ (sigma_i W^i) h^2 + sigma_0 W_0 }
      (iv)  L_V(W_0) = c W_0 - 3(n-1){ 2 (sigma_i W^i) W_0 - lam sigma_0 }

    with c = kappa - mu + (n-1) sigma^2 + 2(n-1) sigma_i W^i.
    """
    kappa = as_scalar_field(kappa)
    n = nav.dim
    rows = {k: [] for k in ("einstein-h", "conformal-w", "lie-h2-balance",
                            "lie-w0-balance")}
    fitted = []
    applicable = True
    for p in flags:
        x = list(p.x)
        T = randers.nav_tensors(nav, p.x)
        if float(np.max(np.abs(T.w_up))) < 1e-14:
            applicable = False
            break
        h2 = float(p.y @ T.h @ p.y)
        w0 = float(T.w_low @ p.y)
        if mu is None:
            mval, mres = fit_einstein_scalar(nav.h, p.x)
            fitted.append(("mu", mval, mres))
        else:
            mval = float(riemann.scalar_value(as_scalar_field(mu)(x)))
        sval, sigma0, sigw, _ = _field_sigma_terms(sigma if sigma is not None else 0.0,
                                                   p.x, p.y, w_up=T.w_up)
        kap = float(riemann.scalar_value(kappa(x)))
        cval = kap - mval + (n - 1) * sval ** 2 + 2.0 * (n - 1) * sigw

        hric = riemann.ricci_tensor(nav.h, p.x)
        rows["einstein-h"].append((float(p.y @ hric @ p.y) - mval * h2) / h2)
        res_conf = T.wcov + T.wcov.T + 4.0 * sval * T.h
        rows["conformal-w"].append(np.max(np.abs(res_conf))
                                   / max(1.0, float(np.max(np.abs(T.h)))))
        lie_h2 = riemann.lie_h2(nav.h, v, p.x, p.y)
        rhs3 = 2.0 * cval * h2 - 6.0 * (n - 1) * (sigw * h2 + sigma0 * w0)
        rows["lie-h2-balance"].append((lie_h2 - rhs3) / h2)
        lie_w0 = riemann.lie_W0(nav.h, nav.W, v, p.x, p.y)
        rhs4 = cval * w0 - 3.0 * (n - 1) * (2.0 * sigw * w0 - T.lam * sigma0)
        rows["lie-w0-balance"].append((lie_w0 - rhs4) / math.sqrt(h2))
    detail = "; ".join(f"fitted {k}={val:.3e} (resid {res:.1e})" for k, val, res in fitted[:2])
    return [report_from_values(name, vals, tol, detail=detail, applicable=applicable)
            for name, vals in rows.items()]


def gradient_soliton_checks_ab(rd: RandersData, f, kappa, flags, tol: float,
                               sigma=None) -> list[ResidualReport]:
    """(alpha, beta) residuals for the gradient soliton characterization:

      (i)   e_00 = 2 sigma (alpha^2 - beta^2)
      (ii)  aRic = kappa (alpha^2 + beta^2) + 2 t_00 + t^i_i alpha^2
              - 2 n sigma_0 beta - (n-1)(s_0^2 + s_{0;0} + 3 sigma^2 alpha^2
              - sigma^2 beta^2) - 2 (s_0 + sigma beta) f_0 - Hess_a(f)
      (iii) (2n-1)(1-b^2) sigma_0 = sigma (1+b^2) f_0 + f_i (s^i_0 - s^i beta)
              + f_{;0j} b^j + (s_0 + 2 sigma beta)(f_i b^i)
      (iv)  the right side of (iii) alone; sigma is constant when it vanishes
    """
    f = as_scalar_field(f)
    kappa = as_scalar_field(kappa)
    n = rd.dim
    rows = {k: [] for k in ("isotropic-s", "alpha-ricci-balance",
                            "sigma-gradient-balance", "sigma-constancy")}
    fitted = []
    for p in flags:
        x = list(p.x)
        T = randers.beta_tables(rd, p.x)
        bd = randers.beta_derivatives(rd, p, tables=T)
        if sigma is None:
            sval, sres = randers.fit_sigma_isotropic_S(rd, p.x, _directions(n))
            sigma0 = 0.0
            fitted.append(("sigma", sval, sres))
        else:
            sval, sigma0, _, _ = _field_sigma_terms(sigma, p.x, p.y)
        kap = float(riemann.scalar_value(kappa(x)))
        _, df, hess_f = f.table(p.x, order=2)
        f0 = float(df @ p.y)
        fb = float(df @ T.b_up)
        hess_a = riemann.hessian_tensor(rd.alpha, f, p.x)
        a2 = bd.alpha ** 2
        beta = bd.beta
        b2 = T.b2

        rows["isotropic-s"].append((bd.e00 - 2.0 * sval * (a2 - beta ** 2)) / a2)
        aric = float(p.y @ T.alpha_ricci @ p.y)
        rhs = (kap * (a2 + beta ** 2) + 2.0 * bd.t00 + T.t_trace * a2
               - 2.0 * n * sigma0 * beta
               - (n - 1) * (bd.s0 ** 2 + bd.s00 + 3.0 * sval ** 2 * a2
                            - sval ** 2 * beta ** 2)
               - 2.0 * (bd.s0 + sval * beta) * f0
               - float(p.y @ hess_a @ p.y))
        rows["alpha-ricci-balance"].append((aric - rhs) / a2)
        s_mixed_y = T.s_mixed @ p.y
        grad_terms = (sval * (1.0 + b2) * f0
                      + float(df @ (s_mixed_y - T.s_up * beta))
                      + float(p.y @ hess_a @ T.b_up)
                      + (bd.s0 + 2.0 * sval * beta) * fb)
        rows["sigma-gradient-balance"].append(
            ((2.0 * n - 1.0) * (1.0 - b2) * sigma0 - grad_terms) / bd.alpha)
        rows["sigma-constancy"].append(grad_terms / bd.alpha)
    detail = "; ".join(f"fitted {k}={val:.3e} (resid {res:.1e})" for k, val, res in fitted[:1])
    return [report_from_values(name, vals, tol, detail=detail) for name, vals in rows.items()]


def gradient_soliton_checks_nav(nav: NavigationData, f, kappa, flags, tol: float,
                                mu=None, sigma=None) -> list[ResidualReport]:
    """Navigation residuals for the gradient soliton characterization:

      (i)   hRic + Hess_h(f) = mu h^2          ((h, f) Riemannian gradient soliton)
      (ii)  W_{i:j} + W_{j:i} = -4 sigma h_ij
      (iii) (2n-1) sigma_0 = sigma f_0 - f_k S^k_0 - f_{:0j} W^j
      (iv)  (sigma_i - sigma f_i) W^i = kappa - mu + (n-1) sigma^2
      (v)   sigma f_0 - f_k S^k_0 - f_{:0j} W^j alone; sigma is constant when 0
    """
    f = as_scalar_field(f)
    kappa = as_scalar_field(kappa)
    n = nav.dim
    rows = {k: [] for k in ("riemannian-soliton", "conformal-w",
                            "sigma-gradient-balance", "scalar-compatibility",
                            "sigma-constancy")}
    fitted = []
    for p in flags:
        x = list(p.x)
        T = randers.nav_tensors(nav, p.x)
        h2 = float(p.y @ T.h @ p.y)
        hnorm = math.sqrt(h2)
        if mu is None:
            mval, mres = fit_riemann_soliton_scalar(nav.h, f, p.x)
            fitted.append(("mu", mval, mres))
        else:
            mval = float(riemann.scalar_value(as_scalar_field(mu)(x)))
        sval, sigma0, sigw, dsig = _field_sigma_terms(sigma if sigma is not None else 0.0,
                                                      p.x, p.y, w_up=T.w_up)
        kap = float(riemann.scalar_value(kappa(x)))
        _, df, _ = f.table(p.x, order=2)
        hess_h = riemann.hessian_tensor(nav.h, f, p.x)
        f0 = float(df @ p.y)

        hric = riemann.ricci_tensor(nav.h, p.x)
        rows["riemannian-soliton"].append(
            (float(p.y @ (hric + hess_h) @ p.y) - mval * h2) / h2)
        res_conf = T.wcov + T.wcov.T + 4.0 * sval * T.h
        rows["conformal-w"].append(np.max(np.abs(res_conf))
                                   / max(1.0, float(np.max(np.abs(T.h)))))
        fS0 = float(df @ T.s_mixed @ p.y)
        fW_hess = float(p.y @ hess_h @ T.w_up)
        compat = sval * f0 - fS0 - fW_hess
        rows["sigma-gradient-balance"].append(
            ((2.0 * n - 1.0) * sigma0 - compat) / hnorm)
        rows["scalar-compatibility"].append(
            float((dsig - sval * df) @ T.w_up) - (kap - mval + (n - 1) * sval ** 2))
        rows["sigma-constancy"].append(compat / hnorm)
    detail = "; ".join(f"fitted {k}={val:.3e} (resid {res:.1e})" for k, val, res in fitted[:1])
    return [report_from_values(name, vals, tol, detail=detail) for name, vals in rows.items()]


# -- navigation closed form for the S-curvature rate -----------------------------------


def s_dot_closed_form_nav(nav: NavigationData, f, sigma, p: FlagPoint) -> float:
    """S-dot of (F, e^{-f} dm_BH) under isotropic S-curvature sigma:

        S-dot = (n+1) sigma_0 F - 2 sigma f_0 F + 2 (f_k S^k_0) F
                + (f_k S^k) F^2 + Hess_h(f)(y)
    """
    f = as_scalar_field(f)
    n = nav.dim
    T = randers.nav_tensors(nav, p.x)
    F = randers.eval_F_nav(nav, p)
    sval, sigma0, _, _ = _field_sigma_terms(sigma, p.x, p.y, w_up=T.w_up)
    _, df, _ = f.table(p.x, order=2)
    f0 = float(df @ p.y)
    fS0 = float(df @ T.s_mixed @ p.y)
    fS = float(df @ T.s_up)
    hess = riemann.hessian(nav.h, f, p.x, p.y)
    return ((n + 1) * sigma0 * F - 2.0 * sval * f0 * F + 2.0 * fS0 * F
            + fS * F * F + hess)

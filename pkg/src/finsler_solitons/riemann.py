"""Riemannian backend: Christoffel symbols, curvature, covariant calculus.

Everything here runs off plain partial-derivative tables extracted from one
jet evaluation of the metric / field components, so the module stays fully
independent of the spray-based Finsler engine.  On Riemannian inputs the two
paths must agree, which gives the main cross-validation oracle.
"""

from __future__ import annotations

import numbers
import warnings

import numpy as np

from . import jets
from .jets import Jet, scalar_value

COND_WARN_THRESHOLD = 1e10


class MetricDomainError(ArithmeticError):
    """Metric matrix is singular or not positive definite at a point."""


# -- linear algebra over plain scalars or Jets -----------------------------


def generic_det(rows):
    """Determinant by cofactor expansion; works for float or Jet entries."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    out = 0.0
    for j in range(n):
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = rows[0][j] * generic_det(minor)
        out = out + term if j % 2 == 0 else out - term
    return out


def generic_inverse(rows):
    """Gauss-Jordan inverse with value-based pivoting over floats or Jets."""
    n = len(rows)
    a = [[rows[i][j] for j in range(n)] for i in range(n)]
    inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(scalar_value(a[r][col])))
        if abs(scalar_value(a[pivot][col])) == 0.0:
            raise MetricDomainError("singular matrix in generic inversion")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        piv = a[col][col]
        a[col] = [v / piv for v in a[col]]
        inv[col] = [v / piv for v in inv[col]]
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col]
            if isinstance(factor, numbers.Real) and factor == 0.0:
                continue
            a[r] = [av - factor * cv for av, cv in zip(a[r], a[col])]
            inv[r] = [av - factor * cv for av, cv in zip(inv[r], inv[col])]
    return inv


def _inv_with_guard(mat, what="metric"):
    try:
        out = np.linalg.inv(mat)
    except np.linalg.LinAlgError as exc:
        raise MetricDomainError(f"singular {what} matrix") from exc
    cond = np.linalg.cond(mat)
    if cond > COND_WARN_THRESHOLD:
        warnings.warn(f"{what} matrix nearly singular (cond ~ {cond:.2e})",
                      RuntimeWarning, stacklevel=3)
    return out


def check_positive_definite(mat, what="metric"):
    """Leading-principal-minor test; raises MetricDomainError on failure."""
    mat = np.asarray(mat, float)
    n = mat.shape[0]
    for k in range(1, n + 1):
        if np.linalg.det(mat[:k, :k]) <= 0.0:
            raise MetricDomainError(f"{what} matrix not positive definite")


# -- field specs ------------------------------------------------------------


class ScalarField:
    """Scalar function of chart coordinates, evaluable on floats or Jets."""

    def __init__(self, fn, name=""):
        if isinstance(fn, numbers.Real):
            const = float(fn)
            self._fn = lambda x: const
            self.name = name or f"const({const})"
        else:
            self._fn = fn
            self.name = name

    def __call__(self, x):
        return self._fn(x)

    def table(self, x, order=2):
        """(value, gradient, hessian) of the field at x; hessian only if order >= 2."""
        return scalar_table(self._fn, x, order)


def as_scalar_field(obj) -> ScalarField:
    if isinstance(obj, ScalarField):
        return obj
    return ScalarField(obj)


class VectorField:
    """Vector (or 1-form) components as a function of x, jet-evaluable.

    The same wrapper serves contravariant components W^i and covariant
    components b_i; which one it is follows from how callers contract it.
    """

    def __init__(self, fn, name=""):
        self._fn = fn
        self.name = name

    def components(self, x):
        return list(self._fn(x))

    def table(self, x, order=1):
        return vector_table(self._fn, x, order)


class TableVectorField(VectorField):
    """Vector field given by precomputed value/derivative tables at any x.

    Used for derived fields (like metric gradients) whose components are
    assembled analytically instead of via jet evaluation of a closure.
    """

    def __init__(self, table_fn, name=""):
        self._table_fn = table_fn
        self.name = name

    def components(self, x):
        return list(self._table_fn(x)[0])

    def table(self, x, order=1):
        out = self._table_fn(x)
        if len(out) < order + 1:
            raise ValueError(f"{self.name or 'table field'} has no order-{order} data")
        return out[: order + 1]


def constant_vector_field(values) -> VectorField:
    vals = [float(v) for v in values]
    return VectorField(lambda x: list(vals), name="const")


class RiemannMetric:
    """Positive definite symmetric matrix field h_ij(x), jet-evaluable."""

    def __init__(self, dim: int, fn, name=""):
        self.dim = dim
        self._fn = fn
        self.name = name

    def matrix(self, x):
        return self._fn(x)

    def matrix_at(self, x) -> np.ndarray:
        m = np.array([[scalar_value(v) for v in row] for row in self._fn(x)], float)
        check_positive_definite(m, self.name or "metric")
        return m

    def tables(self, x, order=2):
        return matrix_table(self._fn, x, self.dim, order)

    def sqrt_det(self, x):
        """sqrt(det h) at x, usable on Jets (the Riemannian volume density)."""
        return jets.sqrt(generic_det(self._fn(x)))


def euclidean_metric(dim: int) -> RiemannMetric:
    eye = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    return RiemannMetric(dim, lambda x: eye, name="euclidean")


# -- partial-derivative tables ----------------------------------------------


def _entry_parts(v, space, order):
    """(value, grad, hess, third) of one scalar-or-Jet entry."""
    n = space.nvars
    if not isinstance(v, Jet):
        out = [float(v), np.zeros(n)]
        if order >= 2:
            out.append(np.zeros((n, n)))
        if order >= 3:
            out.append(np.zeros((n, n, n)))
        return out
    e = lambda *idx: tuple(sum(1 for i in idx if i == k) for k in range(n))
    out = [v.value, np.array([v.partial(e(i)) for i in range(n)])]
    if order >= 2:
        h = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                h[i, j] = h[j, i] = v.partial(e(i, j))
        out.append(h)
    if order >= 3:
        t = np.empty((n, n, n))
        for i in range(n):
            for j in range(i, n):
                for k in range(j, n):
                    val = v.partial(e(i, j, k))
                    for perm in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
                        t[perm] = val
        out.append(t)
    return out


def scalar_table(fn, x, order=2):
    xs = Jet.variables([float(v) for v in x], order)
    return tuple(_entry_parts(fn(xs), xs[0].space, order))


def vector_table(fn, x, order=1):
    """(v[i], dv[i,j]=d_j v^i, d2v[i,j,k]=d_j d_k v^i, ...) from one jet pass."""
    xs = Jet.variables([float(v) for v in x], order)
    comps = list(fn(xs))
    n = len(x)
    parts = [_entry_parts(c, xs[0].space, order) for c in comps]
    out = [np.array([p[0] for p in parts])]
    for level in range(1, order + 1):
        out.append(np.stack([p[level] for p in parts]))
    return tuple(out)


def matrix_table(fn, x, n, order=2):
    """(m[i,j], dm[k,i,j]=d_k m_ij, d2m[k,l,i,j]) from one jet pass."""
    xs = Jet.variables([float(v) for v in x], order)
    rows = fn(xs)
    parts = [[_entry_parts(rows[i][j], xs[0].space, order) for j in range(n)] for i in range(n)]
    value = np.array([[parts[i][j][0] for j in range(n)] for i in range(n)])
    out = [value]
    if order >= 1:
        dm = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                dm[:, i, j] = parts[i][j][1]
        out.append(dm)
    if order >= 2:
        d2m = np.empty((n, n, n, n))
        for i in range(n):
            for j in range(n):
                d2m[:, :, i, j] = parts[i][j][2]
        out.append(d2m)
    return tuple(out)


# -- connection and curvature ------------------------------------------------


def christoffel(h: RiemannMetric, x) -> np.ndarray:
    """Gamma[k,i,j] = Gamma^k_ij of the Levi-Civita connection at x."""
    h0, dh = h.tables(x, order=1)
    check_positive_definite(h0, h.name or "metric")
    hinv = _inv_with_guard(h0, h.name or "metric")
    # Gamma^k_ij = 1/2 h^kl (d_i h_jl + d_j h_il - d_l h_ij)
    bracket = np.einsum("ijl->lij", dh) + np.einsum("jil->lij", dh) - dh
    return 0.5 * np.einsum("kl,lij->kij", hinv, bracket)


def christoffel_derivative(h: RiemannMetric, x):
    """(Gamma[k,i,j], dGamma[m,k,i,j] = d_m Gamma^k_ij) at x."""
    h0, dh, d2h = h.tables(x, order=2)
    check_positive_definite(h0, h.name or "metric")
    hinv = _inv_with_guard(h0, h.name or "metric")
    bracket = np.einsum("ijl->lij", dh) + np.einsum("jil->lij", dh) - dh
    gamma = 0.5 * np.einsum("kl,lij->kij", hinv, bracket)
    dhinv = -np.einsum("ka,mab,bl->mkl", hinv, dh, hinv)
    dbracket = (np.einsum("mijl->mlij", d2h) + np.einsum("mjil->mlij", d2h)
                - np.einsum("mlij->mlij", d2h))
    dgamma = 0.5 * (np.einsum("mkl,lij->mkij", dhinv, bracket)
                    + np.einsum("kl,mlij->mkij", hinv, dbracket))
    return gamma, dgamma


def ricci_tensor(h: RiemannMetric, x) -> np.ndarray:
    """Ric_jk of h at x (trace of the curvature operator)."""
    gamma, dgamma = christoffel_derivative(h, x)
    term1 = np.einsum("iijk->jk", dgamma)
    term2 = np.einsum("jiik->jk", dgamma)
    term3 = np.einsum("iip,pjk->jk", gamma, gamma)
    term4 = np.einsum("ijp,pik->jk", gamma, gamma)
    return term1 - term2 + term3 - term4


def riemann_ricci(h: RiemannMetric, x, y) -> float:
    """Ricci tensor of h contracted twice with y."""
    y = np.asarray(y, float)
    return float(np.einsum("jk,j,k->", ricci_tensor(h, x), y, y))


# -- covariant derivatives ----------------------------------------------------


def covariant_derivative_1form(h: RiemannMetric, b: VectorField, x) -> np.ndarray:
    """b_{i;j} = d_j b_i - Gamma^k_ij b_k for covariant components b_i."""
    b0, db = b.table(x, order=1)
    gamma = christoffel(h, x)
    return db - np.einsum("kij,k->ij", gamma, b0)


def vector_covariant_lowered(h: RiemannMetric, w: VectorField, x) -> np.ndarray:
    """W_{i:j} for contravariant components W^i (lower first, then differentiate)."""
    h0, dh = h.tables(x, order=1)
    w0, dw = w.table(x, order=1)
    gamma = christoffel(h, x)
    wl = h0 @ w0
    dwl = np.einsum("jik,k->ij", dh, w0) + np.einsum("ik,kj->ij", h0, dw)
    return dwl - np.einsum("kij,k->ij", gamma, wl)


def hessian_tensor(h: RiemannMetric, f, x) -> np.ndarray:
    """Covariant Hessian f_{:ij} = d_i d_j f - Gamma^k_ij f_k."""
    f = as_scalar_field(f)
    _, grad, hess = f.table(x, order=2)
    gamma = christoffel(h, x)
    return hess - np.einsum("kij,k->ij", gamma, grad)


def hessian(h: RiemannMetric, f, x, y) -> float:
    y = np.asarray(y, float)
    return float(np.einsum("ij,i,j->", hessian_tensor(h, f, x), y, y))


def gradient_table(h: RiemannMetric, f):
    """Metric gradient of f as a TableVectorField (components h^ij f_j)."""
    f = as_scalar_field(f)

    def tables(x):
        h0, dh = h.tables(x, order=1)
        _, grad, hess = f.table(x, order=2)
        hinv = _inv_with_guard(h0, h.name or "metric")
        dhinv = -np.einsum("ka,mab,bl->mkl", hinv, dh, hinv)
        v = hinv @ grad
        dv = np.einsum("jik,k->ij", dhinv, grad) + np.einsum("ik,kj->ij", hinv, hess)
        return v, dv

    return TableVectorField(tables, name=f"grad({f.name})")


# -- Lie derivatives and conformal residuals ----------------------------------


def lie_h2(h: RiemannMetric, v: VectorField, x, y) -> float:
    """Lie derivative of h^2 along the complete lift: 2 V_{i:j} y^i y^j."""
    y = np.asarray(y, float)
    vcov = vector_covariant_lowered(h, v, x)
    return float(2.0 * np.einsum("ij,i,j->", vcov, y, y))


def lie_W0(h: RiemannMetric, w: VectorField, v: VectorField, x, y) -> float:
    """Lie derivative of W_0 = W_i y^i: (V^k W_{j:k} + W^k V_{k:j}) y^j."""
    y = np.asarray(y, float)
    wcov = vector_covariant_lowered(h, w, x)
    vcov = vector_covariant_lowered(h, v, x)
    v0 = np.array([scalar_value(c) for c in v.components(list(x))], float)
    w0 = np.array([scalar_value(c) for c in w.components(list(x))], float)
    return float(np.einsum("k,jk,j->", v0, wcov, y) + np.einsum("k,kj,j->", w0, vcov, y))


def lie_1form(h: RiemannMetric, b: VectorField, v: VectorField, x, y) -> float:
    """Lie derivative of the 1-form b_i y^i: (V^k b_{j;k} + b^k V_{k;j}) y^j."""
    y = np.asarray(y, float)
    h0 = h.matrix_at(x)
    hinv = _inv_with_guard(h0, h.name or "metric")
    bcov = covariant_derivative_1form(h, b, x)
    vcov = vector_covariant_lowered(h, v, x)
    v0 = np.array([scalar_value(c) for c in v.components(list(x))], float)
    b0 = np.array([scalar_value(c) for c in b.components(list(x))], float)
    bup = hinv @ b0
    return float(np.einsum("k,jk,j->", v0, bcov, y) + np.einsum("k,kj,j->", bup, vcov, y))


def conformal_residual(h: RiemannMetric, v: VectorField, c, x) -> np.ndarray:
    """V_{i:j} + V_{j:i} - 4 c h_ij; the zero matrix iff V is conformal with factor c."""
    c = as_scalar_field(c)
    vcov = vector_covariant_lowered(h, v, x)
    h0 = h.matrix_at(x)
    return vcov + vcov.T - 4.0 * float(scalar_value(c(x))) * h0


def metric_compatibility_residual(h: RiemannMetric, x) -> np.ndarray:
    """h_{ij;k}, which must vanish for the Levi-Civita connection."""
    h0, dh = h.tables(x, order=1)
    gamma = christoffel(h, x)
    return (dh - np.einsum("mik,mj->kij", gamma, h0)
            - np.einsum("mjk,im->kij", gamma, h0))

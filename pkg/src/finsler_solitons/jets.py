"""Truncated multivariate Taylor (jet) arithmetic.

Every curvature quantity downstream is a combination of partial derivatives
of scalar functions of the chart coordinates.  A Jet stores the Taylor
coefficients of such a function at one point up to a fixed total degree, and
arithmetic on Jets propagates those coefficients exactly, so derivatives come
out with no truncation error beyond float rounding.  A central-difference
fallback (`fd_derivative`) provides an independent cross-check.
"""

from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class EvaluationError(ArithmeticError):
    """A primitive was evaluated outside its domain (message names it)."""


class FdStepWarning(UserWarning):
    """Finite-difference step is too small for the coordinate magnitude."""


def _multis_of_degree(nvars, deg):
    if nvars == 1:
        yield (deg,)
        return
    for head in range(deg, -1, -1):
        for tail in _multis_of_degree(nvars - 1, deg - head):
            yield (head,) + tail


def _multi_factorial(multi):
    out = 1
    for e in multi:
        out *= math.factorial(e)
    return out


class JetSpace:
    """Multi-index bookkeeping shared by all jets of a given (nvars, order).

    Storage is dense: one coefficient per multi-index of total degree
    <= order, graded by degree.  The multiplication table (ia, ib, ic) lists
    every coefficient pair whose degrees still fit inside the truncation.
    """

    def __init__(self, nvars: int, order: int):
        if nvars < 1:
            raise ValueError("need at least one variable")
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.nvars = nvars
        self.order = order
        multis = []
        for deg in range(order + 1):
            multis.extend(_multis_of_degree(nvars, deg))
        self.multis = tuple(multis)
        self.index = {m: i for i, m in enumerate(self.multis)}
        self.nterms = len(self.multis)
        self.factorials = np.array([_multi_factorial(m) for m in self.multis], float)
        ia, ib, ic = [], [], []
        degs = [sum(m) for m in self.multis]
        for i, ma in enumerate(self.multis):
            da = degs[i]
            for j, mb in enumerate(self.multis):
                if da + degs[j] > order:
                    continue
                ia.append(i)
                ib.append(j)
                ic.append(self.index[tuple(a + b for a, b in zip(ma, mb))])
        self.mul_ia = np.asarray(ia, dtype=np.intp)
        self.mul_ib = np.asarray(ib, dtype=np.intp)
        self.mul_ic = np.asarray(ic, dtype=np.intp)

    def __repr__(self):
        return f"JetSpace(nvars={self.nvars}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(nvars: int, order: int) -> JetSpace:
    return JetSpace(nvars, order)


def _is_scalar(v):
    return isinstance(v, (numbers.Real, np.floating, np.integer))


class Jet:
    """Taylor coefficients of a scalar function at a point, total degree <= order.

    The coefficient stored for multi-index m is the Taylor coefficient
    (1/m!) d^m f, so `partial` multiplies the factorial back in.  Jets are
    immutable after construction and safe to share between workers.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: JetSpace, coeffs):
        self.space = space
        self.coeffs = np.asarray(coeffs, dtype=float)

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(value: float, space: JetSpace) -> "Jet":
        c = np.zeros(space.nterms)
        c[0] = value
        return Jet(space, c)

    @staticmethod
    def variable(value: float, position: int, space: JetSpace) -> "Jet":
        c = np.zeros(space.nterms)
        c[0] = value
        unit = tuple(1 if k == position else 0 for k in range(space.nvars))
        c[space.index[unit]] = 1.0
        return Jet(space, c)

    @staticmethod
    def variables(values, order: int) -> list["Jet"]:
        space = jet_space(len(values), order)
        return [Jet.variable(float(v), k, space) for k, v in enumerate(values)]

    # -- inspection ---------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    @property
    def dim(self) -> int:
        return self.space.nvars

    @property
    def order(self) -> int:
        return self.space.order

    def coefficient(self, multi) -> float:
        return float(self.coeffs[self.space.index[tuple(multi)]])

    def partial(self, multi) -> float:
        """d^multi f at the expansion point (coefficient times multi!)."""
        idx = self.space.index[tuple(multi)]
        return float(self.coeffs[idx] * self.space.factorials[idx])

    def gradient(self) -> np.ndarray:
        n = self.space.nvars
        out = np.empty(n)
        for k in range(n):
            out[k] = self.partial(tuple(1 if i == k else 0 for i in range(n)))
        return out

    def __repr__(self):
        return f"Jet(value={self.value!r}, nvars={self.dim}, order={self.order})"

    # -- ring operations ----------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces cannot be combined")
            return other
        if _is_scalar(other):
            return Jet.constant(float(other), self.space)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.space, -self.coeffs)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, self.coeffs - o.coeffs)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Jet(self.space, o.coeffs - self.coeffs)

    def __mul__(self, other):
        if _is_scalar(other):
            return Jet(self.space, self.coeffs * float(other))
        if not isinstance(other, Jet):
            return NotImplemented
        if other.space is not self.space:
            raise ValueError("jets from different spaces cannot be combined")
        sp = self.space
        prod = self.coeffs[sp.mul_ia] * other.coeffs[sp.mul_ib]
        return Jet(sp, np.bincount(sp.mul_ic, weights=prod, minlength=sp.nterms))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            if other == 0:
                raise EvaluationError("division by zero")
            return Jet(self.space, self.coeffs / float(other))
        if not isinstance(other, Jet):
            return NotImplemented
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        rec = self._reciprocal()
        if _is_scalar(other):
            return rec * float(other)
        return NotImplemented

    def __pow__(self, p):
        return power(self, p)

    # -- truncated composition -----------------------------------------

    def _compose(self, derivs):
        """Sum_k derivs[k]/k! * (self - value)^k, truncated at the jet order."""
        du = Jet(self.space, self.coeffs.copy())
        du.coeffs[0] = 0.0
        order = min(self.space.order, len(derivs) - 1)
        acc = Jet.constant(derivs[order] / math.factorial(order), self.space)
        for k in range(order - 1, -1, -1):
            acc = acc * du + derivs[k] / math.factorial(k)
        return acc

    def _reciprocal(self):
        u0 = self.value
        if u0 == 0.0:
            raise EvaluationError("division by a jet with zero value")
        K = self.space.order
        derivs = [((-1.0) ** k) * math.factorial(k) / u0 ** (k + 1) for k in range(K + 1)]
        return self._compose(derivs)


# -- elementary functions, dispatching on Jet vs plain scalar -----------


def _jet_fn(name, float_fn, deriv_builder):
    def fn(v):
        if isinstance(v, Jet):
            return v._compose(deriv_builder(v.value, v.space.order, name))
        try:
            return float_fn(float(v))
        except ValueError as exc:
            raise EvaluationError(f"{name} evaluated outside its domain: {exc}") from exc

    fn.__name__ = name
    return fn


def _sqrt_derivs(u0, K, name):
    if u0 <= 0.0:
        raise EvaluationError(f"{name} of a non-positive value ({u0!r})")
    return _power_derivs(u0, 0.5, K)


def _power_derivs(u0, p, K):
    derivs = []
    coef = 1.0
    for k in range(K + 1):
        derivs.append(coef * u0 ** (p - k))
        coef *= p - k
    return derivs


def _log_derivs(u0, K, name):
    if u0 <= 0.0:
        raise EvaluationError(f"{name} of a non-positive value ({u0!r})")
    derivs = [math.log(u0)]
    for k in range(1, K + 1):
        derivs.append(((-1.0) ** (k - 1)) * math.factorial(k - 1) / u0 ** k)
    return derivs


def _exp_derivs(u0, K, name):
    e = math.exp(u0)
    return [e] * (K + 1)


def _sin_derivs(u0, K, name):
    s, c = math.sin(u0), math.cos(u0)
    cycle = [s, c, -s, -c]
    return [cycle[k % 4] for k in range(K + 1)]


def _cos_derivs(u0, K, name):
    s, c = math.sin(u0), math.cos(u0)
    cycle = [c, -s, -c, s]
    return [cycle[k % 4] for k in range(K + 1)]


def _tan_derivs(u0, K, name):
    c = math.cos(u0)
    if abs(c) < 1e-300:
        raise EvaluationError("tan at a pole of the tangent")
    t = math.tan(u0)
    derivs = [t, 1 + t * t, 2 * t * (1 + t * t), 2 * (1 + t * t) * (1 + 3 * t * t),
              8 * t * (1 + t * t) * (2 + 3 * t * t)]
    return derivs[: K + 1]


def _sinh_derivs(u0, K, name):
    s, c = math.sinh(u0), math.cosh(u0)
    return [s if k % 2 == 0 else c for k in range(K + 1)]


def _cosh_derivs(u0, K, name):
    s, c = math.sinh(u0), math.cosh(u0)
    return [c if k % 2 == 0 else s for k in range(K + 1)]


def _tanh_derivs(u0, K, name):
    t = math.tanh(u0)
    derivs = [t, 1 - t * t, -2 * t * (1 - t * t), -2 * (1 - t * t) * (1 - 3 * t * t),
              8 * t * (1 - t * t) * (2 - 3 * t * t)]
    return derivs[: K + 1]


def _arcsinh_derivs(u0, K, name):
    w = 1.0 + u0 * u0
    derivs = [math.asinh(u0), w ** -0.5, -u0 * w ** -1.5, (2 * u0 * u0 - 1) * w ** -2.5,
              3 * u0 * (3 - 2 * u0 * u0) * w ** -3.5]
    return derivs[: K + 1]


sqrt = _jet_fn("sqrt", math.sqrt, _sqrt_derivs)
exp = _jet_fn("exp", math.exp, _exp_derivs)
log = _jet_fn("log", math.log, _log_derivs)
sin = _jet_fn("sin", math.sin, _sin_derivs)
cos = _jet_fn("cos", math.cos, _cos_derivs)
tan = _jet_fn("tan", math.tan, _tan_derivs)
sinh = _jet_fn("sinh", math.sinh, _sinh_derivs)
cosh = _jet_fn("cosh", math.cosh, _cosh_derivs)
tanh = _jet_fn("tanh", math.tanh, _tanh_derivs)
arcsinh = _jet_fn("arcsinh", math.asinh, _arcsinh_derivs)


def power(v, p):
    """v**p for a real exponent p; integer exponents stay domain-free."""
    if isinstance(p, numbers.Integral) and not isinstance(p, bool):
        p = int(p)
        if isinstance(v, Jet):
            if p < 0:
                return 1.0 / power(v, -p)
            out = Jet.constant(1.0, v.space)
            base = v
            while p:
                if p & 1:
                    out = out * base
                base = base * base
                p >>= 1
            return out
        return float(v) ** p
    if isinstance(v, Jet):
        if v.value <= 0.0:
            raise EvaluationError(f"power with non-integer exponent at base {v.value!r}")
        return v._compose(_power_derivs(v.value, float(p), v.space.order))
    if float(v) <= 0.0:
        raise EvaluationError(f"power with non-integer exponent at base {v!r}")
    return float(v) ** float(p)


def scalar_value(v) -> float:
    """Value part of a Jet, or the number itself."""
    return v.value if isinstance(v, Jet) else float(v)


# -- flags ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FlagPoint:
    """A base point x with a nonzero tangent direction y in one chart.

    Finsler quantities live on the slit tangent bundle, so y = 0 is rejected.
    """

    x: np.ndarray
    y: np.ndarray
    chart: str = "default"

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have the same dimension")
        if not np.any(self.y):
            raise ValueError("flag direction y must be nonzero")

    @property
    def dim(self) -> int:
        return self.x.size

    def scaled(self, lam: float) -> "FlagPoint":
        return FlagPoint(self.x, lam * self.y, self.chart)


# -- lifting and finite differences ---------------------------------------


def lift(f, point, order: int, active=None) -> Jet:
    """Jet of the scalar map f at `point`, tracking the `active` variables.

    f is called as f(*args) with one argument per coordinate of `point`;
    active variables arrive as Jets, the rest as plain floats.  The returned
    Jet's coefficient at multi-index m is (1/m!) d^m f over the active
    variables.
    """
    if not 1 <= order <= 3:
        raise ValueError("lift supports orders 1 through 3")
    point = [float(p) for p in point]
    if active is None:
        active = range(len(point))
    active = list(active)
    space = jet_space(len(active), order)
    args = list(point)
    for slot, var in enumerate(active):
        args[var] = Jet.variable(point[var], slot, space)
    out = f(*args)
    if isinstance(out, Jet):
        return out
    return Jet.constant(float(out), space)


_CENTRAL_STENCILS = {
    0: ((0, 1.0),),
    1: ((1, 0.5), (-1, -0.5)),
    2: ((1, 1.0), (0, -2.0), (-1, 1.0)),
    3: ((2, 0.5), (1, -1.0), (-1, 1.0), (-2, -0.5)),
}


def _stencil_estimate(f, point, multi_index, h):
    terms = {(0,) * len(point): 1.0}
    for var, k in enumerate(multi_index):
        if k == 0:
            continue
        new = {}
        for offs, w in terms.items():
            for step, sw in _CENTRAL_STENCILS[k]:
                key = tuple(o + (step if i == var else 0) for i, o in enumerate(offs))
                new[key] = new.get(key, 0.0) + w * sw / h ** k
        terms = new
    total = 0.0
    for offs, w in terms.items():
        shifted = [p + o * h for p, o in zip(point, offs)]
        total += w * f(*shifted)
    return total


def fd_derivative(f, point, multi_index, step: float | None = None) -> float:
    """Central-difference estimate of d^multi_index f at `point`.

    Composes per-variable central stencils (each with O(h^2) truncation) and
    applies one Richardson level, so the returned estimate is O(h^4) accurate
    in the step h.  Derivative order per variable and in total is capped at 3.
    """
    point = [float(p) for p in point]
    multi_index = tuple(int(k) for k in multi_index)
    if len(multi_index) != len(point):
        raise ValueError("multi_index length must match the point dimension")
    total = sum(multi_index)
    if total > 3 or any(k < 0 for k in multi_index):
        raise ValueError("fd_derivative supports total derivative order <= 3")
    scale = max([1.0] + [abs(p) for p in point])
    h = float(step) if step is not None else 1e-5 * scale
    if h <= 0:
        raise ValueError("step must be positive")
    involved = [p for p, k in zip(point, multi_index) if k > 0]
    if any(p + h == p for p in involved):
        warnings.warn("finite-difference step underflows the coordinate magnitude",
                      FdStepWarning, stacklevel=2)
    if total == 0:
        return f(*point)
    coarse = _stencil_estimate(f, point, multi_index, h)
    fine = _stencil_estimate(f, point, multi_index, h / 2.0)
    return (4.0 * fine - coarse) / 3.0

"""Independent multivariate-polynomial oracle for the jet tests.

Polynomials are dicts mapping exponent tuples to coefficients.  Taylor
coefficients at a point come from an explicit binomial re-expansion, with no
jet code involved, so agreement with Jet arithmetic is a genuine cross-check.
"""

import math
from itertools import product


def poly_add(p, q):
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0.0) + c
    return out


def poly_scale(p, s):
    return {m: s * c for m, c in p.items()}


def poly_mul(p, q):
    out = {}
    for ma, ca in p.items():
        for mb, cb in q.items():
            m = tuple(a + b for a, b in zip(ma, mb))
            out[m] = out.get(m, 0.0) + ca * cb
    return out


def poly_eval_jets(p, jet_vars):
    """Evaluate the dict polynomial through Jet arithmetic (term by term)."""
    total = 0.0
    for m, c in p.items():
        term = c
        for var, e in zip(jet_vars, m):
            for _ in range(e):
                term = term * var
        total = total + term
    return total


def poly_shift(p, point):
    """q with q(t) = p(point + t), via per-variable binomial expansion."""
    nvars = len(point)
    out = {}
    for m, c in p.items():
        choices = []
        for i, e in enumerate(m):
            choices.append([(k, math.comb(e, k) * point[i] ** (e - k))
                            for k in range(e + 1)])
        for combo in product(*choices):
            mm = tuple(k for k, _ in combo)
            coeff = c
            for _, w in combo:
                coeff *= w
            out[mm] = out.get(mm, 0.0) + coeff
    return out


def taylor_coefficient(p, point, multi):
    """(1/m!) d^m p at point: the coefficient of t^multi in p(point + t)."""
    return poly_shift(p, point).get(tuple(multi), 0.0)


def random_poly(rng, nvars, degree, terms=6, amp=1.0):
    p = {}
    for _ in range(terms):
        total = int(rng.integers(0, degree + 1))
        m = [0] * nvars
        for _ in range(total):
            m[int(rng.integers(0, nvars))] += 1
        m = tuple(m)
        p[m] = p.get(m, 0.0) + float(rng.uniform(-amp, amp))
    return p

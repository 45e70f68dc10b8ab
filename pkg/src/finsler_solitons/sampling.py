"""Seeded flag sampling over fixture domains.

Directions are uniform on the Euclidean unit sphere of the chart (positive
homogeneity makes the ray direction the only degree of freedom); flags that
trip a domain guard or land on a nearly degenerate F are rejected and redrawn.
"""

from __future__ import annotations

import numpy as np

from .jets import EvaluationError, FlagPoint

MIN_F = 1e-6


def unit_direction(rng, dim) -> np.ndarray:
    while True:
        v = rng.normal(size=dim)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def sample_flags(fixture, count, rng, max_tries=50) -> list[FlagPoint]:
    flags = []
    tries = 0
    while len(flags) < count:
        if tries > max_tries * count:
            raise RuntimeError(f"flag sampling failed on fixture {fixture.name!r}")
        tries += 1
        x = fixture.sample_x(rng)
        y = unit_direction(rng, fixture.dim)
        try:
            if fixture.metric.value(x, y) < MIN_F:
                continue
        except (EvaluationError, ArithmeticError):
            continue
        flags.append(FlagPoint(x, y, chart=fixture.name))
    return flags


def sample_points(fixture, count, rng) -> list[np.ndarray]:
    return [fixture.sample_x(rng) for _ in range(count)]

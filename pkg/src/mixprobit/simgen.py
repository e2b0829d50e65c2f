"""Benchmark probability surfaces and synthetic data generation.

Four named surfaces on the unit interval or square:

* ``a`` - probit of a sine wave, smooth and oscillating;
* ``b`` - probit of two exponential terms minus one; the printed form has
  positive exponents, and ``b_negated_exponents`` switches both signs to
  the two-bump variant;
* ``c`` - probit of a two-jump step function;
* ``d`` - a bivariate disc: 0.8 inside the circle of radius 0.16 centered
  at (0.5, 0.5), 0.2 outside.
"""

import math

import numpy as np
from scipy.special import ndtr

from .basis import Dataset
from .errors import DataError

__all__ = ["FUNCTION_NAMES", "function_dimension", "true_probability", "generate"]

FUNCTION_NAMES = ("a", "b", "c", "d")


def function_dimension(name):
    """Covariate dimension of a named benchmark surface."""
    if name not in FUNCTION_NAMES:
        raise DataError(f"unknown benchmark function {name!r}")
    return 2 if name == "d" else 1


def true_probability(name, points, b_negated_exponents=False):
    """Evaluate a named benchmark surface at raw points in the unit domain."""
    dim = function_dimension(name)
    x = np.asarray(points, dtype=float)
    if dim == 1:
        x = x.ravel()
    else:
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != 2:
            raise DataError("function d expects points with two columns")
    if name == "a":
        return ndtr(2.0 * np.sin(4.0 * math.pi * x))
    if name == "b":
        sign = -1.0 if b_negated_exponents else 1.0
        t = (5.0 / 6.0 * np.exp(sign * (x - 0.1) ** 2 / 0.18)
             + 1.0 / 3.0 * np.exp(sign * (x - 0.6) ** 2 / 0.004) - 1.0)
        return ndtr(t)
    if name == "c":
        t = -1.036 + 2.073 * (x > 0.25) - 1.42712 * (x > 0.75)
        return ndtr(t)
    u = (x[:, 0] - 0.5) ** 2 + (x[:, 1] - 0.5) ** 2 - 0.16 ** 2
    return np.where(u <= 0.0, 0.8, 0.2)


def _grid_points(n, dim):
    if dim == 1:
        return np.linspace(0.0, 1.0, n)[:, None]
    side = int(math.ceil(math.sqrt(n)))
    axis = np.linspace(0.0, 1.0, side)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])[:n]


def generate(name, n, rng, b_negated_exponents=False, grid=False):
    """Draw a synthetic dataset from a named benchmark surface.

    Covariates are uniform on the unit domain (or an equally spaced grid
    when ``grid`` is set); responses are Bernoulli draws from the surface.
    Returns (dataset, truth) with the true probabilities at the drawn
    points.  Needs n >= 2 so no covariate column is constant.
    """
    if n < 1:
        raise DataError("n must be at least 1")
    dim = function_dimension(name)
    if grid:
        x = _grid_points(n, dim)
    else:
        x = rng.random((n, dim))
    truth = true_probability(name, x, b_negated_exponents=b_negated_exponents)
    w = (rng.random(n) < truth).astype(np.int64)
    return Dataset.from_arrays(x, w), truth

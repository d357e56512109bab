"""Shared samplers for randomized admissibility suites.

Triangle-valid reciprocal weights are drawn through the b-rate
parameterization (any positive b gives a valid triangle), then rescaled
against the waiting function's cumulative supremum to sit at a chosen
fraction of the integral bound.
"""

import math

import numpy as np
import pytest

from memkernel.kernel_families import (
    AnisotropyWeights,
    BiExponential,
    Exponential,
    Hypoexponential,
    KernelSpec,
    Scaled,
    Sinusoidal,
)


def random_triangle_reciprocals(rng) -> np.ndarray:
    x = rng.uniform(0.05, 2.0, size=3)
    return 2.0 * np.array([x[1] + x[2], x[2] + x[0], x[0] + x[1]])


def random_waiting(rng, cm_only: bool = False):
    kinds = ["exponential", "biexponential", "hypoexponential", "scaled"]
    if not cm_only:
        kinds.append("sinusoidal")
    kind = kinds[rng.integers(len(kinds))]
    if kind == "exponential":
        return Exponential(rate=float(rng.uniform(0.3, 3.0)))
    if kind == "biexponential":
        r1 = float(rng.uniform(0.3, 2.0))
        return BiExponential(rate1=r1, rate2=r1 * float(rng.uniform(1.2, 3.0)))
    if kind == "hypoexponential":
        n = int(rng.integers(1, 5))
        return Hypoexponential(tuple(float(r) for r in rng.uniform(0.4, 3.0, n)))
    if kind == "scaled":
        return Scaled(Exponential(rate=float(rng.uniform(0.5, 3.0))),
                      weight=float(rng.uniform(0.2, 2.0)))
    return Sinusoidal(omega=float(rng.uniform(0.5, 3.0)))


def spec_at_bound_ratio(rng, ratio: float, cm_only: bool = False) -> KernelSpec:
    """Random triangle-valid spec with sum(1/a) * sup F = 4 * ratio."""
    waiting = random_waiting(rng, cm_only=cm_only)
    u = random_triangle_reciprocals(rng)
    scale = 4.0 * ratio / (float(u.sum()) * waiting.cumulative_sup)
    u = u * scale
    return KernelSpec(waiting, AnisotropyWeights(*(1.0 / u)))


def spec_below_min_weight(rng, slack: float, cm_only: bool = True) -> KernelSpec:
    """Random spec with sup F = a_min / (1 + slack), triangle valid."""
    waiting = random_waiting(rng, cm_only=cm_only)
    u = random_triangle_reciprocals(rng)
    scale = 1.0 / ((1.0 + slack) * float(u.max()) * waiting.cumulative_sup)
    u = u * scale
    return KernelSpec(waiting, AnisotropyWeights(*(1.0 / u)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)

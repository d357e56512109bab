"""Candidate memory kernels for Pauli-diagonal qubit evolution.

A kernel is parameterized by a scalar waiting function f(t) (with
cumulative F(t) and transform fhat(s), so W(s) = 1/fhat(s)) and three
positive axis weights a_1, a_2, a_3 (infinity disables an axis).  The
kernel eigenvalues are

    kappa_k(s) = -s fhat(s) / (a_k - fhat(s)) = -s / (a_k W(s) - 1),

and the induced map eigenvalues are lambda_k(t) = 1 - F(t)/a_k.  The
kernel is admissible when the reciprocal weights satisfy the triangle
inequalities and (1/a_1 + 1/a_2 + 1/a_3) F(t) <= 4 for all t; for
polynomial W(s) = prod (s + z_i) the sharp product condition
prod z_i >= (1/4) sum 1/a_k is checked as well.

Weights a_k = +inf are first class (reciprocal 0): the pure-dephasing
and constant-kernel special cases need them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import config
from .laplace_tools import (
    RationalFunction,
    gaver_stehfest,
    numeric_laplace,
    partial_fraction_decompose,
    cm_check,
)
from .verdicts import Verdict

__all__ = [
    "Exponential",
    "BiExponential",
    "Sinusoidal",
    "Hypoexponential",
    "Scaled",
    "Tabulated",
    "AnisotropyWeights",
    "BRates",
    "KernelSpec",
    "DeltaPlusRegular",
    "PauliKernelRates",
    "triangle_check",
    "integral_bound_check",
    "b_from_a",
    "a_from_b",
    "probabilities_from_cumulative",
    "kernel_eigenvalues_laplace",
    "polynomial_admissibility_check",
    "kernel_time_domain",
    "kernel_rates_from_eigenvalues",
    "combine_kernels",
    "semi_markov_kernel",
    "blp_sufficient_check",
]


# --------------------------------------------------------------------------
# waiting-function families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    """f(t) = exp(-rate t); W(s) = s + rate."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    def f(self, t):
        return np.exp(-self.rate * np.asarray(t, dtype=float))

    def F(self, t):
        return (1.0 - np.exp(-self.rate * np.asarray(t, dtype=float))) / self.rate

    @cached_property
    def laplace_rational(self) -> RationalFunction:
        return RationalFunction([1.0], [1.0, self.rate])

    def laplace(self, s):
        return self.laplace_rational(s)

    @property
    def w_coefficients(self) -> np.ndarray:
        return np.array([1.0, self.rate])

    @property
    def cumulative_sup(self) -> float:
        return 1.0 / self.rate

    nonnegative = True
    oscillatory = False


@dataclass(frozen=True)
class BiExponential:
    """f(t) = (e^{-r1 t} - e^{-r2 t})/(r2 - r1); W(s) = (s+r1)(s+r2)."""

    rate1: float
    rate2: float

    def __post_init__(self):
        if not (0 < self.rate1 < self.rate2):
            raise ValueError("rates must satisfy 0 < rate1 < rate2")

    def f(self, t):
        t = np.asarray(t, dtype=float)
        return (np.exp(-self.rate1 * t) - np.exp(-self.rate2 * t)) / (self.rate2 - self.rate1)

    def F(self, t):
        t = np.asarray(t, dtype=float)
        r1, r2 = self.rate1, self.rate2
        return ((1.0 - np.exp(-r1 * t)) / r1 - (1.0 - np.exp(-r2 * t)) / r2) / (r2 - r1)

    @cached_property
    def laplace_rational(self) -> RationalFunction:
        return RationalFunction([1.0], np.convolve([1.0, self.rate1], [1.0, self.rate2]))

    def laplace(self, s):
        return self.laplace_rational(s)

    @property
    def w_coefficients(self) -> np.ndarray:
        return np.convolve([1.0, self.rate1], [1.0, self.rate2])

    @property
    def cumulative_sup(self) -> float:
        return 1.0 / (self.rate1 * self.rate2)

    nonnegative = True
    oscillatory = False


@dataclass(frozen=True)
class Sinusoidal:
    """f(t) = sin(omega t)/omega; W(s) = s^2 + omega^2.

    The density changes sign but its cumulative (1 - cos(omega t))/omega^2
    stays nonnegative, which is all the construction requires.
    """

    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    def f(self, t):
        return np.sin(self.omega * np.asarray(t, dtype=float)) / self.omega

    def F(self, t):
        return (1.0 - np.cos(self.omega * np.asarray(t, dtype=float))) / self.omega ** 2

    @cached_property
    def laplace_rational(self) -> RationalFunction:
        return RationalFunction([1.0], [1.0, 0.0, self.omega ** 2])

    def laplace(self, s):
        return self.laplace_rational(s)

    @property
    def w_coefficients(self) -> np.ndarray:
        return np.array([1.0, 0.0, self.omega ** 2])

    @property
    def cumulative_sup(self) -> float:
        return 2.0 / self.omega ** 2

    nonnegative = False
    oscillatory = True


@dataclass(frozen=True)
class Hypoexponential:
    """Waiting function with transform 1/prod_i (s + z_i), all z_i > 0.

    The time profile is the convolution of exponential stages (the
    hypoexponential density scaled by 1/prod z_i), recovered here by
    partial fractions; repeated stage rates get polynomial-in-t
    prefactors automatically.
    """

    roots: tuple[float, ...]

    def __post_init__(self):
        roots = tuple(float(z) for z in self.roots)
        if not roots:
            raise ValueError("at least one root is required")
        if any(z <= 0 for z in roots):
            raise ValueError("all roots must be positive")
        object.__setattr__(self, "roots", roots)

    @cached_property
    def w_coefficients(self) -> np.ndarray:
        coeffs = np.array([1.0])
        for z in self.roots:
            coeffs = np.convolve(coeffs, [1.0, z])
        return coeffs

    @cached_property
    def laplace_rational(self) -> RationalFunction:
        return RationalFunction([1.0], self.w_coefficients)

    def laplace(self, s):
        return self.laplace_rational(s)

    @cached_property
    def _density_fn(self) -> Callable:
        return partial_fraction_decompose([1.0], self.w_coefficients).time_function()

    @cached_property
    def _cumulative_fn(self) -> Callable:
        # transform of F is fhat/s; the pole at zero carries the plateau
        den = np.concatenate([self.w_coefficients, [0.0]])
        return partial_fraction_decompose([1.0], den).time_function()

    def f(self, t):
        return self._density_fn(t)

    def F(self, t):
        return self._cumulative_fn(t)

    @property
    def cumulative_sup(self) -> float:
        return 1.0 / math.prod(self.roots)

    nonnegative = True
    oscillatory = False


@dataclass(frozen=True)
class Scaled:
    """Waiting function weight * base; W(s) = W_base(s)/weight.

    weight = 0 gives the trivial kernel (identity dynamics).  Handy for
    sub-probability waiting densities, e.g. weight*rate*exp(-rate t).
    """

    base: object
    weight: float

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("weight must be nonnegative")

    def f(self, t):
        return self.weight * self.base.f(t)

    def F(self, t):
        return self.weight * self.base.F(t)

    @property
    def laplace_rational(self) -> RationalFunction | None:
        inner = getattr(self.base, "laplace_rational", None)
        if inner is None:
            return None
        return self.weight * inner

    def laplace(self, s):
        return self.weight * self.base.laplace(s)

    @property
    def w_coefficients(self) -> np.ndarray | None:
        inner = getattr(self.base, "w_coefficients", None)
        if inner is None or self.weight == 0.0:
            return None
        return np.asarray(inner) / self.weight

    @property
    def cumulative_sup(self) -> float:
        return self.weight * self.base.cumulative_sup

    @property
    def nonnegative(self) -> bool:
        return self.base.nonnegative

    @property
    def oscillatory(self) -> bool:
        return self.base.oscillatory


@dataclass(frozen=True)
class Tabulated:
    """Sampled waiting function: linear interpolation for f, trapezoidal
    cumulative sums for F, numeric quadrature for the transform.

    f is taken to vanish beyond the last sample; F stays constant there.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(times) != len(values) or len(times) < 2:
            raise ValueError("need matching time/value samples, at least two")
        if times[0] != 0.0:
            raise ValueError("samples must start at t = 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @cached_property
    def _arrays(self):
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))])
        return t, v, cum

    def f(self, t):
        knots, vals, _ = self._arrays
        return np.interp(np.asarray(t, dtype=float), knots, vals, left=vals[0], right=0.0)

    def F(self, t):
        knots, _, cum = self._arrays
        return np.interp(np.asarray(t, dtype=float), knots, cum, right=cum[-1])

    laplace_rational = None
    w_coefficients = None

    def laplace(self, s):
        # Exact transform of the linear interpolant, summed segment by
        # segment: integral of exp(-s t)(v_a + m (t-a)) over [a, b] is
        # exp(-s a)(v_a/s + m/s^2) - exp(-s b)(v_b/s + m/s^2).
        # Adaptive quadrature cannot certify tight budgets across
        # thousands of interpolation kinks; this expression is what that
        # quadrature would converge to.
        s = float(s)
        if not s > 0:
            raise ValueError("transform abscissa must be positive")
        knots, vals, _ = self._arrays
        a, b = knots[:-1], knots[1:]
        va, vb = vals[:-1], vals[1:]
        m = (vb - va) / (b - a)
        terms = (np.exp(-s * a) * (va / s + m / s ** 2)
                 - np.exp(-s * b) * (vb / s + m / s ** 2))
        return float(np.sum(terms))

    @property
    def cumulative_sup(self) -> float:
        return float(np.max(self._arrays[2]))

    @property
    def nonnegative(self) -> bool:
        return min(self.values) >= -1e-12

    oscillatory = False


# --------------------------------------------------------------------------
# anisotropy weights
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AnisotropyWeights:
    """The three positive axis weights; +inf disables an axis."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        for a in (self.a1, self.a2, self.a3):
            if not (a > 0):
                raise ValueError("axis weights must be positive (or +inf)")

    @property
    def values(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def reciprocals(self) -> np.ndarray:
        return np.array([0.0 if math.isinf(a) else 1.0 / a for a in self.values])

    @property
    def minimum(self) -> float:
        return min(self.values)


@dataclass(frozen=True)
class BRates:
    """Alternative kernel parameterization: (1/2)(1/a_i) = 1/b_j + 1/b_k.

    For an admissible kernel p_k(t) = F(t)/b_k, so each b_k is the
    inverse asymptotic weight of the k-th Pauli error.
    """

    b1: float
    b2: float
    b3: float

    @property
    def values(self) -> tuple[float, float, float]:
        return (self.b1, self.b2, self.b3)


@dataclass(frozen=True)
class KernelSpec:
    """A candidate kernel: waiting function plus axis weights."""

    waiting: object
    aniso: AnisotropyWeights


# --------------------------------------------------------------------------
# admissibility checks
# --------------------------------------------------------------------------


def triangle_check(aniso: AnisotropyWeights) -> Verdict:
    """Triangle inequalities on the reciprocal weights, 1/a_i + 1/a_j >= 1/a_k."""
    u = aniso.reciprocals()
    tol = config.POSITIVITY_TOL
    margins = {
        "triangle1": u[1] + u[2] - u[0],
        "triangle2": u[2] + u[0] - u[1],
        "triangle3": u[0] + u[1] - u[2],
    }
    return Verdict(passed=all(m >= -tol for m in margins.values()), margins=margins)


def integral_bound_check(spec: KernelSpec, grid) -> Verdict:
    """Check (1/a1 + 1/a2 + 1/a3) F(t) <= 4 on the grid."""
    times = grid.times() if hasattr(grid, "times") else np.asarray(grid, dtype=float)
    u_sum = float(spec.aniso.reciprocals().sum())
    margin_curve = 4.0 - u_sum * np.asarray(spec.waiting.F(times), dtype=float)
    tol = config.POSITIVITY_TOL
    bad = np.nonzero(margin_curve < -tol)[0]
    first = float(times[bad[0]]) if bad.size else None
    return Verdict(passed=bad.size == 0,
                   margins={"integral_bound": float(np.min(margin_curve))},
                   first_violation=first,
                   curves={"integral_bound": margin_curve})


def b_from_a(aniso: AnisotropyWeights) -> BRates:
    """Solve (1/2)(1/a_i) = 1/b_j + 1/b_k for the b rates.

    Requires the triangle inequalities; a zero triangle margin makes the
    matching b infinite, which is reported explicitly rather than as an
    error.
    """

    tri = triangle_check(aniso)
    if not tri.passed:
        raise ValueError("triangle inequalities violated; no b parameterization exists")
    u = aniso.reciprocals()
    recips = 0.25 * np.array([
        u[1] + u[2] - u[0],
        u[2] + u[0] - u[1],
        u[0] + u[1] - u[2],
    ])
    b = [math.inf if r <= config.POSITIVITY_TOL else 1.0 / r for r in recips]
    return BRates(*b)


def a_from_b(b: BRates) -> AnisotropyWeights:
    """Inverse map, 1/a_i = 2 (1/b_j + 1/b_k)."""
    x = np.array([0.0 if math.isinf(v) else 1.0 / v for v in b.values])
    if np.any(x < 0):
        raise ValueError("b rates must be positive")
    u = 2.0 * np.array([x[1] + x[2], x[2] + x[0], x[0] + x[1]])
    a = [math.inf if ui == 0.0 else 1.0 / ui for ui in u]
    return AnisotropyWeights(*a)


def probabilities_from_cumulative(aniso: AnisotropyWeights, cumulative) -> np.ndarray:
    """Pauli error weights p_alpha(t) of an admissible kernel.

    p_k = (1/4)(1/a_i + 1/a_j - 1/a_k) F(t) and p_0 = 1 - p_1 - p_2 - p_3;
    equivalently p_k = F(t)/b_k.
    """

    F = np.asarray(cumulative, dtype=float)
    u = aniso.reciprocals()
    coeff = 0.25 * np.array([
        u[1] + u[2] - u[0],
        u[2] + u[0] - u[1],
        u[0] + u[1] - u[2],
    ])
    pk = np.multiply.outer(coeff, F)
    p0 = 1.0 - pk.sum(axis=0)
    return np.concatenate([p0[None, ...], pk], axis=0)


def polynomial_admissibility_check(roots: Sequence[float],
                                   aniso: AnisotropyWeights) -> Verdict:
    """Sharp admissibility for polynomial W(s) = prod (s + z_i).

    Passes when the triangle inequalities hold and
    prod z_i >= (1/4) sum 1/a_k.  The stronger product condition
    prod z_i >= 1/a_k for every k (which forces a vanishing
    distinguishability measure) is evaluated and reported separately; it
    does not affect the pass verdict.
    """

    roots = [float(z) for z in roots]
    if not roots or any(z <= 0 for z in roots):
        raise ValueError("roots must be positive")
    tri = triangle_check(aniso)
    u = aniso.reciprocals()
    prod_z = math.prod(roots)
    tol = config.POSITIVITY_TOL
    margins = dict(tri.margins)
    margins["product_bound"] = prod_z - 0.25 * float(u.sum())
    margins["blp_zero_bound"] = prod_z - float(u.max())
    passed = tri.passed and margins["product_bound"] >= -tol
    notes = ()
    if margins["blp_zero_bound"] >= -tol:
        notes = ("product condition also meets the per-axis bound: "
                 "distinguishability measure vanishes",)
    return Verdict(passed=passed, margins=margins, notes=notes)


# --------------------------------------------------------------------------
# kernel eigenvalues
# --------------------------------------------------------------------------


def _kappa_rational(w_coeffs: np.ndarray, a: float) -> RationalFunction:
    den = a * np.asarray(w_coeffs, dtype=float)
    den[-1] -= 1.0
    return RationalFunction([-1.0, 0.0], den)


def kernel_eigenvalues_laplace(spec: KernelSpec):
    """Laplace-domain kernel eigenvalue evaluators kappa_k(s), k = 1..3.

    Returns RationalFunction objects when W(s) is polynomial, plain
    closures otherwise.  A disabled axis (a_k = inf) yields the zero
    function.  Evaluation at a point where a_k = fhat(s) returns a
    signed infinity instead of raising: the pole is data for the caller.
    """

    evaluators = []
    for a in spec.aniso.values:
        if math.isinf(a):
            evaluators.append(RationalFunction([0.0], [1.0]))
            continue
        w_coeffs = getattr(spec.waiting, "w_coefficients", None)
        if w_coeffs is not None:
            evaluators.append(_kappa_rational(w_coeffs, a))
            continue

        fhat = spec.waiting.laplace

        def kappa(s, a=a, fhat=fhat):
            fs = fhat(s)
            den = a - fs
            if den == 0.0:
                return math.copysign(math.inf, -s * fs)
            return -s * fs / den

        evaluators.append(kappa)
    return tuple(evaluators)


# --------------------------------------------------------------------------
# time-domain kernels
# --------------------------------------------------------------------------


def _zero_time_fn(t):
    return np.zeros_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class DeltaPlusRegular:
    """Kernel eigenvalue kappa(t) = delta_weight * delta(t) + regular(t).

    The delta weight equals lim_{s->inf} of the transform; in the
    convolution integral it contributes delta_weight * lambda(t) at full
    weight.  `laplace` carries the exact transform when one is known.
    """

    delta_weight: float
    regular: Callable
    laplace: object | None = None

    @staticmethod
    def zero() -> "DeltaPlusRegular":
        return DeltaPlusRegular(0.0, _zero_time_fn, RationalFunction([0.0], [1.0]))

    def regular_on(self, times) -> np.ndarray:
        return np.asarray(self.regular(np.asarray(times, dtype=float)), dtype=float)


@dataclass(frozen=True)
class PauliKernelRates:
    """GKSL-form kernel weights k_i(t): K_t = sum_i k_i (sigma_i . sigma_i - id)."""

    k1: DeltaPlusRegular
    k2: DeltaPlusRegular
    k3: DeltaPlusRegular

    @property
    def values(self) -> tuple[DeltaPlusRegular, ...]:
        return (self.k1, self.k2, self.k3)


def _sinusoidal_axis_kernel(omega: float, a: float) -> DeltaPlusRegular:
    """Closed cosine/hyperbolic-cosine kernel of the sinusoidal family.

    kappa(t) = -(1/a) cos(sqrt(omega^2 - 1/a) t) when omega^2 >= 1/a,
    and -(1/a) cosh(sqrt(1/a - omega^2) t) otherwise.
    """

    gap = omega ** 2 - 1.0 / a
    amp = -1.0 / a
    if gap >= 0.0:
        mu = math.sqrt(gap)

        def regular(t, mu=mu, amp=amp):
            return amp * np.cos(mu * np.asarray(t, dtype=float))
    else:
        nu = math.sqrt(-gap)

        def regular(t, nu=nu, amp=amp):
            return amp * np.cosh(nu * np.asarray(t, dtype=float))

    return DeltaPlusRegular(0.0, regular,
                            _kappa_rational([1.0, 0.0, omega ** 2], a))


def kernel_time_domain(spec: KernelSpec) -> tuple[DeltaPlusRegular, ...]:
    """Time-domain kernel eigenvalues for families with polynomial W.

    Finds the roots of a_k W(s) - 1 and partial-fraction expands
    -(1/a_k) s / prod (s - s_j), splitting off the delta weight
    lim kappa(s) first (equal to -1/a_k for degree-one W, zero for
    higher degree).  Repeated roots expand confluently; complex pairs
    combine into real trigonometric terms.  The sinusoidal family uses
    its closed cosine/cosh forms directly.
    """

    out = []
    for a in spec.aniso.values:
        if math.isinf(a):
            out.append(DeltaPlusRegular.zero())
            continue
        if isinstance(spec.waiting, Sinusoidal):
            out.append(_sinusoidal_axis_kernel(spec.waiting.omega, a))
            continue
        w_coeffs = getattr(spec.waiting, "w_coefficients", None)
        if w_coeffs is None:
            raise ValueError(
                "time-domain kernels need a polynomial W family "
                "(exponential, biexponential, sinusoidal or hypoexponential)")
        den = a * np.asarray(w_coeffs, dtype=float)
        den[-1] -= 1.0
        num = np.array([-1.0, 0.0])
        if len(den) == 2:
            delta = num[0] / den[0]
            remainder = np.polysub(num, delta * den)
            expansion = partial_fraction_decompose(remainder, den)
        else:
            delta = 0.0
            expansion = partial_fraction_decompose(num, den)
        out.append(DeltaPlusRegular(float(delta), expansion.time_function(),
                                    RationalFunction(num, den)))
    return tuple(out)


def combine_kernels(coefficients: Sequence[float],
                    kernels: Sequence[DeltaPlusRegular]) -> DeltaPlusRegular:
    """Pointwise linear combination of delta-plus-regular kernels."""
    coeffs = [float(c) for c in coefficients]
    delta = sum(c * k.delta_weight for c, k in zip(coeffs, kernels))

    def regular(t, coeffs=coeffs, kernels=kernels):
        t = np.asarray(t, dtype=float)
        acc = np.zeros_like(t)
        for c, k in zip(coeffs, kernels):
            if c != 0.0:
                acc = acc + c * np.asarray(k.regular(t), dtype=float)
        return acc

    laplace = None
    if all(k.laplace is not None for k in kernels):
        if all(isinstance(k.laplace, RationalFunction) for k in kernels):
            laplace = RationalFunction([0.0], [1.0])
            for c, k in zip(coeffs, kernels):
                laplace = laplace + c * k.laplace
        else:
            parts = [(c, k.laplace) for c, k in zip(coeffs, kernels)]

            def laplace(s, parts=parts):
                return sum(c * fn(s) for c, fn in parts)

    return DeltaPlusRegular(float(delta), regular, laplace)


def kernel_rates_from_eigenvalues(kappas: Sequence[DeltaPlusRegular]) -> PauliKernelRates:
    """Convert kernel eigenvalues to GKSL weights, k_1 = (kappa_1 - kappa_2 - kappa_3)/4
    and cyclic, applied to delta weights and regular parts alike."""
    k1, k2, k3 = kappas
    return PauliKernelRates(
        combine_kernels([0.25, -0.25, -0.25], [k1, k2, k3]),
        combine_kernels([-0.25, 0.25, -0.25], [k1, k2, k3]),
        combine_kernels([-0.25, -0.25, 0.25], [k1, k2, k3]),
    )


# --------------------------------------------------------------------------
# semi-Markov subclass
# --------------------------------------------------------------------------


def semi_markov_kernel(waiting) -> DeltaPlusRegular:
    """Dephasing kernel weight k_3 of the semi-Markov construction.

    For a waiting-time density f >= 0 with total mass at most one, the
    transform is k3(s) = s fhat(s) / (1 - fhat(s)).  The delta weight is
    f(0+); the regular part comes from partial fractions when fhat is
    rational and from numerical inversion otherwise.

    The induced map eigenvalues must be obtained through
    lambda(s) = 1/(s - kappa(s)) with kappa_1 = kappa_2 = -2 k_3.
    """

    if not waiting.nonnegative:
        raise ValueError("semi-Markov construction requires f(t) >= 0")
    mass = waiting.cumulative_sup
    if mass > 1.0 + 1e-9:
        raise ValueError(f"waiting density has total mass {mass:.6g} > 1")

    rational = getattr(waiting, "laplace_rational", None)
    if rational is not None:
        if rational.is_zero():
            return DeltaPlusRegular.zero()
        # k3 = s N / (D - N) for fhat = N/D
        num = np.convolve([1.0, 0.0], rational.num)
        den = np.polysub(rational.den, np.concatenate(
            [np.zeros(len(rational.den) - len(rational.num)), rational.num]))
        k3 = RationalFunction(num, den)
        if k3.num_degree == k3.den_degree:
            delta = float(k3.num[0] / k3.den[0])
            remainder = np.polysub(k3.num, delta * k3.den)
            regular = partial_fraction_decompose(remainder, k3.den).time_function()
        else:
            delta = 0.0
            regular = partial_fraction_decompose(k3.num, k3.den).time_function()
        return DeltaPlusRegular(delta, regular, k3)

    fhat = waiting.laplace

    def k3(s, fhat=fhat):
        fs = fhat(s)
        return s * fs / (1.0 - fs)

    delta = float(waiting.f(0.0))

    def regular(t, k3=k3, delta=delta):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        vals = np.array([gaver_stehfest(lambda s: k3(s) - delta, ti)
                         if ti > 0 else k3(1e9) - delta for ti in t])
        return vals if vals.shape != (1,) else float(vals[0])

    return DeltaPlusRegular(delta, regular, k3)


# --------------------------------------------------------------------------
# sufficient condition for monotone distinguishability
# --------------------------------------------------------------------------


def blp_sufficient_check(spec: KernelSpec, grid, max_order: int = 8) -> Verdict:
    """Sufficient condition for a vanishing distinguishability measure.

    Passes when F(t) <= min(a) everywhere on the grid and fhat(s) itself
    is completely monotone (up to the tested order).  When it passes,
    every map eigenvalue is nonnegative and nonincreasing, so the
    trace-distance measure is exactly zero.
    """

    times = grid.times() if hasattr(grid, "times") else np.asarray(grid, dtype=float)
    F = np.asarray(spec.waiting.F(times), dtype=float)
    a_min = spec.aniso.minimum
    margin = float(a_min - np.max(F)) if not math.isinf(a_min) else math.inf
    fhat = getattr(spec.waiting, "laplace_rational", None) or spec.waiting.laplace
    cm = cm_check(fhat, max_order=max_order)
    tol = config.POSITIVITY_TOL
    notes = () if cm.passed else (
        f"fhat violates complete monotonicity at order {cm.violation_order}, "
        f"s = {cm.violation_point:.4g}",)
    return Verdict(passed=(margin >= -tol) and cm.passed,
                   margins={"cumulative_below_min_weight": margin,
                            "cm_orders_passed": float(cm.orders_tested if cm.passed
                                                      else cm.violation_order)},
                   notes=notes)

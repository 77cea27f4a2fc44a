"""Statistical core: forward maps of the two observation schemes, their
inverses (the signal estimators), and the asymptotic variances with the
associated Fisher information.

Scheme conventions used throughout:

* time scheme: the statistic is the fraction of time the perturbed signal
  theta + eps*X spends above the threshold tau.  Its long-run value is
  sf((tau - theta)/eps) under the stationary law of X.
* energy scheme: the statistic is the time average of Y^2 restricted to
  Y > tau.  Its long-run value, slope and asymptotic variance follow from
  truncated moments of the stationary law.

Both schemes expose a VarianceReport whose ``fisher`` field (the reciprocal
asymptotic variance) is the objective maximized over the noise level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import interpolate

from .errors import DegenerateObservation, OutOfRange, QuadratureFailure
from .laws import InvariantLaw, _panel_integrals, _reverse_cumulative
from .numerics import (
    DEFAULT_QUADRATURE,
    Bracket,
    QuadratureConfig,
    find_root,
    integrate_line,
)

__all__ = [
    "ChannelConfig",
    "VarianceReport",
    "time_fraction_limit",
    "estimate_theta_time",
    "edf_variance",
    "time_scheme_variance",
    "time_scheme_variance_ou_reference",
    "energy_limit",
    "energy_limit_closed_form",
    "energy_limit_quadrature",
    "energy_limit_derivative",
    "energy_limit_derivative_closed_form",
    "energy_limit_derivative_quadrature",
    "estimate_theta_energy",
    "energy_covariance_kernel",
    "energy_statistic_variance",
    "energy_scheme_variance",
    "log_likelihood_time",
]

_SQRT_PI = math.sqrt(math.pi)

Scheme = Literal["time", "energy"]


@dataclass(frozen=True)
class ChannelConfig:
    """Detector threshold, noise level and stationary noise law."""

    tau: float
    eps: float
    law: InvariantLaw

    def __post_init__(self) -> None:
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError("eps must be positive and finite")

    def gap_ratio(self, theta: float) -> float:
        """Standardized distance (tau - theta)/eps of the signal from the threshold."""
        return (self.tau - theta) / self.eps


@dataclass(frozen=True)
class VarianceReport:
    """Asymptotic variance of an estimator and its reciprocal (Fisher information)."""

    value: float
    fisher: float
    scheme: Scheme

    def __post_init__(self) -> None:
        if not (self.value > 0 and self.fisher > 0):
            raise ValueError("variance and fisher information must be positive")


# ---------------------------------------------------------------------------
# time scheme
# ---------------------------------------------------------------------------


def time_fraction_limit(theta: float, ch: ChannelConfig) -> float:
    """Long-run fraction of time the perturbed signal spends above the threshold."""
    return float(ch.law.sf(ch.gap_ratio(theta)))


def estimate_theta_time(time_fraction: float, ch: ChannelConfig) -> float:
    """Invert the time-fraction map: theta = tau - eps * quantile(1 - fraction).

    Raises DegenerateObservation at fraction 0 or 1, where the inverse
    escapes to -inf or +inf; callers decide the policy for finite samples
    that hit the boundary.
    """
    if not 0.0 < time_fraction < 1.0:
        raise DegenerateObservation(
            f"time fraction {time_fraction} admits no finite estimate"
        )
    return ch.tau - ch.eps * ch.law.quantile(1.0 - time_fraction)


def edf_variance(
    x: float,
    law: InvariantLaw,
    sigma_fn: Callable[[float], float],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Asymptotic variance of the empirical distribution function at x.

    V(x) = 4 E[(F(xi ^ x) (1 - F(xi v x)) / (sigma(xi) f(xi)))^2], the
    reciprocal of the Fisher-type information for distribution function
    estimation from an ergodic path.  The expectation is a single quadrature
    with the stationary density as weight; the ratio is formed before
    squaring so far tails stay inside double range.
    """

    def integrand(xi: float) -> float:
        fx = float(law.f(xi))
        if fx <= 0.0:
            return 0.0
        if xi < x:
            r = float(law.F(xi)) * float(law.sf(x)) / (sigma_fn(xi) * fx)
        else:
            r = float(law.F(x)) * float(law.sf(xi)) / (sigma_fn(xi) * fx)
        return r * r * fx

    return 4.0 * integrate_line(integrand, cfg, split_at=(x,))


def time_scheme_variance(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> VarianceReport:
    """Asymptotic variance of the time-scheme estimator, by the delta method.

    Sigma(theta) = eps^2 V(a) / f(a)^2 with a = (tau - theta)/eps.  The
    Fisher information is assembled as (f(a) / (eps sqrt(V)))^2 so that
    regimes where both f and V underflow separately still produce a finite
    positive result whenever one is representable.
    """
    a = ch.gap_ratio(theta)
    fa = float(ch.law.f(a))
    V = edf_variance(a, ch.law, ch.law.spec.diffusion, cfg)
    if not (math.isfinite(V) and V > 0.0) or fa <= 0.0:
        raise QuadratureFailure(
            f"time-scheme variance degenerates at theta={theta}, eps={ch.eps} (f(a)={fa}, V={V})"
        )
    q = fa / (ch.eps * math.sqrt(V))
    fisher = q * q
    if not (math.isfinite(fisher) and fisher > 0.0) or not math.isfinite(1.0 / fisher):
        raise QuadratureFailure(
            f"time-scheme fisher not representable at theta={theta}, eps={ch.eps}"
        )
    return VarianceReport(value=1.0 / fisher, fisher=fisher, scheme="time")


def time_scheme_variance_ou_reference(
    theta: float, tau: float, eps: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Textbook closed-form variance for the Gaussian noise law, kept as a
    cross-check.

    eps^2 pi^{3/2} e^{2a^2} * integral (1+erf(xi^a))^2 (1-erf(xi v a))^2
    e^{xi^2} dxi.  This expression differs from the generic pipeline by a
    constant factor (see the ratio test in the suite); the location of its
    maximum over eps is identical, which is what matters for resonance.
    The integrand is grouped as (u * erfc * e^{xi^2/2})^2 to avoid transient
    overflow in the tails.
    """
    a = (tau - theta) / eps
    if 2.0 * a * a > 700.0:
        raise QuadratureFailure("reference variance overflows for this gap ratio")

    def integrand(xi: float) -> float:
        if xi < a:
            s = (1.0 + math.erf(xi)) * math.erfc(a) * math.exp(min(xi * xi, 700.0) / 2.0)
        else:
            s = (1.0 + math.erf(a)) * math.erfc(xi) * math.exp(min(xi * xi, 700.0) / 2.0)
        return s * s

    I = integrate_line(integrand, cfg, split_at=(a,))
    return eps * eps * math.pi**1.5 * math.exp(2.0 * a * a) * I


# ---------------------------------------------------------------------------
# energy scheme
# ---------------------------------------------------------------------------


def _ou_upper_moments(x: float) -> tuple[float, float, float]:
    """Moments of order 0..2 of the Gaussian noise law above x."""
    e = math.exp(-x * x) if x * x < 700.0 else 0.0
    m0 = 0.5 * math.erfc(x)
    m1 = e / (2.0 * _SQRT_PI)
    m2 = x * e / (2.0 * _SQRT_PI) + 0.25 * math.erfc(x)
    return m0, m1, m2


def _upper_tail_energy(x: float, theta: float, ch: ChannelConfig, cfg: QuadratureConfig) -> float:
    """E[(eps*xi + theta)^2 1{xi > x}] under the stationary law."""
    if ch.law.closed_form:
        m0, m1, m2 = _ou_upper_moments(x)
        return ch.eps * ch.eps * m2 + 2.0 * theta * ch.eps * m1 + theta * theta * m0

    def integrand(xi: float) -> float:
        if xi <= x:
            return 0.0
        v = ch.eps * xi + theta
        return v * v * float(ch.law.f(xi))

    return integrate_line(integrand, cfg, split_at=(x,))


def energy_limit_closed_form(theta: float, ch: ChannelConfig) -> float:
    """Long-run energy for the Gaussian noise law, in closed form.

    ((eps^2 + 2 theta^2) erfc(a) + 2 eps (theta + tau) e^{-a^2}/sqrt(pi))/4,
    written with erfc so the deep subthreshold regime does not cancel.
    """
    a = ch.gap_ratio(theta)
    e = math.exp(-a * a) if a * a < 700.0 else 0.0
    return 0.25 * (
        (ch.eps * ch.eps + 2.0 * theta * theta) * math.erfc(a)
        + 2.0 * ch.eps * (theta + ch.tau) * e / _SQRT_PI
    )


def energy_limit_quadrature(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Long-run energy for an arbitrary law, as truncated moments by quadrature.

    eps^2 E[xi^2 1{xi>a}] + theta^2 sf(a) + 2 theta eps E[xi 1{xi>a}].
    """
    a = ch.gap_ratio(theta)

    def moment(power: int) -> float:
        def integrand(xi: float) -> float:
            if xi <= a:
                return 0.0
            return xi**power * float(ch.law.f(xi))

        return integrate_line(integrand, cfg, split_at=(a,))

    return (
        ch.eps * ch.eps * moment(2)
        + theta * theta * float(ch.law.sf(a))
        + 2.0 * theta * ch.eps * moment(1)
    )


def energy_limit(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Long-run value of the energy statistic; increasing in theta below tau."""
    if ch.law.closed_form:
        return energy_limit_closed_form(theta, ch)
    return energy_limit_quadrature(theta, ch, cfg)


def energy_limit_derivative_closed_form(theta: float, ch: ChannelConfig) -> float:
    """Slope of the energy map for the Gaussian noise law."""
    a = ch.gap_ratio(theta)
    e = math.exp(-a * a) if a * a < 700.0 else 0.0
    return theta * math.erfc(a) + (ch.eps * ch.eps + ch.tau * ch.tau) * e / (ch.eps * _SQRT_PI)


def energy_limit_derivative_quadrature(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Slope of the energy map for an arbitrary law.

    tau^2 f(a)/eps + 2 theta sf(a) + 2 eps E[xi 1{xi>a}].
    """
    a = ch.gap_ratio(theta)

    def integrand(xi: float) -> float:
        if xi <= a:
            return 0.0
        return xi * float(ch.law.f(xi))

    m1 = integrate_line(integrand, cfg, split_at=(a,))
    return (
        ch.tau * ch.tau * float(ch.law.f(a)) / ch.eps
        + 2.0 * theta * float(ch.law.sf(a))
        + 2.0 * ch.eps * m1
    )


def energy_limit_derivative(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    if ch.law.closed_form:
        return energy_limit_derivative_closed_form(theta, ch)
    return energy_limit_derivative_quadrature(theta, ch, cfg)


def estimate_theta_energy(
    energy: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Invert the energy map by monotone root finding on [0, tau].

    The bracket is widened to [-tau, 2 tau] when the observation falls
    outside the primary range; OutOfRange is raised when no bracket
    contains a root (for example a negative observation).
    """
    if energy < 0.0:
        raise OutOfRange("energy statistic cannot be negative")

    def g(theta: float) -> float:
        return energy_limit(theta, ch, cfg) - energy

    knots = [0.0, ch.tau, -ch.tau, 2.0 * ch.tau]
    values = {t: g(t) for t in knots}
    for lo, hi in ((0.0, ch.tau), (-ch.tau, 0.0), (ch.tau, 2.0 * ch.tau)):
        glo, ghi = values[lo], values[hi]
        if glo == 0.0:
            return lo
        if ghi == 0.0:
            return hi
        if glo * ghi < 0:
            return find_root(g, Bracket(lo, hi), tol=1e-10)
    raise OutOfRange(
        f"energy {energy} is outside the forward map range on [-tau, 2*tau]"
    )


def energy_covariance_kernel(
    y: float, theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Covariance kernel of the energy statistic.

    M(y) = E[(F(y) - 1{xi < y}) (eps*xi + theta)^2 1{xi > a}] with
    a = (tau - theta)/eps.  Below the threshold gap the kernel is
    tail(a) * F(y); above it, tail(y) - tail(a) * sf(y), with tail(x) the
    truncated energy above x.  Each branch pairs quantities that decay
    together, so both far tails keep relative accuracy instead of
    collapsing into roundoff of near-equal differences.
    """
    a = ch.gap_ratio(theta)
    tail_a = _upper_tail_energy(a, theta, ch, cfg)
    if y <= a:
        return tail_a * float(ch.law.F(y))
    return _upper_tail_energy(y, theta, ch, cfg) - tail_a * float(ch.law.sf(y))


def _kernel_evaluator(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig
) -> Callable[[float], float]:
    """Fast kernel M(.) for repeated evaluation inside the outer quadrature."""
    a = ch.gap_ratio(theta)
    law = ch.law
    eps = ch.eps
    if law.closed_form:
        tail_a = _upper_tail_energy(a, theta, ch, cfg)

        def kernel(y: float) -> float:
            if y <= a:
                return tail_a * float(law.F(y))
            return _upper_tail_energy(y, theta, ch, cfg) - tail_a * float(law.sf(y))

        return kernel

    # generic law: cache the truncated energy on a grid, accumulated from the
    # right so the tail keeps relative accuracy
    hi = float(law.grid_x[-1]) if law.grid_x is not None else max(a, 0.0) + 12.0
    if a >= hi:
        raise QuadratureFailure(
            f"threshold gap {a} lies beyond the numerical support of the law"
        )
    n = max(int(math.ceil((hi - a) / 0.01)), 400)
    nodes = np.linspace(a, hi, n + 1)

    def g(x):
        x = np.asarray(x, dtype=float)
        v = eps * x + theta
        return v * v * law.f(x)

    panels = _panel_integrals(g, nodes)
    tail_nodes = _reverse_cumulative(panels)  # beyond the law grid the density is zero
    tail_sp = interpolate.CubicSpline(nodes, tail_nodes)
    tail_a = float(tail_nodes[0])

    def kernel(y: float) -> float:
        if y <= a:
            return tail_a * float(law.F(y))
        tail_y = 0.0 if y >= hi else float(tail_sp(y))
        return tail_y - tail_a * float(law.sf(y))

    return kernel


def energy_statistic_variance(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """Raw asymptotic variance of the energy statistic: 4 E[M(xi)^2 / f(xi)^2].

    The integrand is assembled as (M/sqrt(f))^2 so that regimes where M and
    f underflow separately still integrate to a positive finite value.
    """
    a = ch.gap_ratio(theta)
    kernel = _kernel_evaluator(theta, ch, cfg)
    law = ch.law

    def outer(xi: float) -> float:
        fx = float(law.f(xi))
        if fx <= 0.0:
            return 0.0
        s = kernel(xi) / math.sqrt(fx)
        return s * s

    v = 4.0 * integrate_line(outer, cfg, split_at=(a,))
    if not (math.isfinite(v) and v > 0.0):
        raise QuadratureFailure(
            f"energy-statistic variance degenerates at theta={theta}, eps={ch.eps} (V={v})"
        )
    return v


def energy_scheme_variance(
    theta: float, ch: ChannelConfig, cfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> VarianceReport:
    """Asymptotic variance of the energy-scheme estimator, by the delta method.

    Sigma~(theta) = 4 E[M^2/f^2] / (d energy_limit/d theta)^2.
    """
    slope = energy_limit_derivative(theta, ch, cfg)
    raw = energy_statistic_variance(theta, ch, cfg)
    if not (math.isfinite(slope) and slope > 0.0):
        raise QuadratureFailure(
            f"energy map is flat at theta={theta}, eps={ch.eps} (slope={slope})"
        )
    q = slope / math.sqrt(raw)
    fisher = q * q
    if not (math.isfinite(fisher) and fisher > 0.0) or not math.isfinite(1.0 / fisher):
        raise QuadratureFailure(
            f"energy-scheme fisher not representable at theta={theta}, eps={ch.eps}"
        )
    return VarianceReport(value=1.0 / fisher, fisher=fisher, scheme="energy")


# ---------------------------------------------------------------------------
# approximate likelihood (time scheme)
# ---------------------------------------------------------------------------


def log_likelihood_time(
    theta: float,
    time_fraction: float,
    horizon: float,
    ch: ChannelConfig,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """Gaussian approximation to the log likelihood of the time statistic.

    log sqrt(T / (2 pi V(a))) - (T/2) (1 - fraction - F(a))^2 / V(a).
    The exponent vanishes exactly at the inverse-map estimate, so this
    likelihood is maximized there up to the O(1) prefactor variation.
    """
    if not 0.0 < time_fraction < 1.0:
        raise DegenerateObservation("time fraction on the boundary has no likelihood expansion")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    a = ch.gap_ratio(theta)
    V = edf_variance(a, ch.law, ch.law.spec.diffusion, cfg)
    resid = 1.0 - time_fraction - float(ch.law.F(a))
    return 0.5 * math.log(horizon / (2.0 * math.pi * V)) - 0.5 * horizon * resid * resid / V

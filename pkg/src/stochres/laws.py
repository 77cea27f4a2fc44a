"""Stationary (invariant) law of the noise diffusion.

A diffusion dX = S(X)dt + sigma(X)dW with suitable drift admits a stationary
density proportional to exp(2*int_0^x S/sigma^2) / sigma(x)^2.  This module
checks the ergodicity conditions numerically, builds the normalized law from
arbitrary coefficients, and provides the closed-form law for the standard
mean-reverting (Ornstein-Uhlenbeck) noise, which is Gaussian with mean zero
and variance 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, interpolate, special

from .errors import NonConvergence, NotErgodic
from .numerics import DEFAULT_QUADRATURE, Bracket, QuadratureConfig, find_root, integrate_line

__all__ = [
    "DiffusionSpec",
    "ErgodicityReport",
    "InvariantLaw",
    "check_ergodicity",
    "build_invariant_law",
    "ou_law",
    "NAMED_SPECS",
]

_SQRT_PI = math.sqrt(math.pi)
_EXP_MAX = 700.0  # exp argument above this overflows a double

# 5-point Gauss-Legendre rule, exact through degree 9 polynomials per panel
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class DiffusionSpec:
    """Coefficients of the noise SDE dX = drift(X)dt + diffusion(X)dW."""

    drift: Callable[[float], float]
    diffusion: Callable[[float], float]
    label: str = ""


@dataclass(frozen=True)
class ErgodicityReport:
    """Numerical evidence for the two ergodicity conditions.

    The drift integral int_0^y S/sigma^2 must diverge to -inf in both
    directions (checked by a finite-probe trend), and the unnormalized
    stationary mass G must be finite.
    """

    c2_left_limit: float
    c2_right_limit: float
    G: float
    c2_holds: bool
    c3_holds: bool


@dataclass(frozen=True)
class InvariantLaw:
    """Stationary law: density f, distribution F, survival sf and quantile.

    ``sf`` is kept separate from ``1 - F`` so that far tails retain relative
    accuracy; several variance integrands depend on it.  Instances are
    immutable and safe to share across workers.
    """

    f: Callable
    F: Callable
    sf: Callable
    quantile: Callable[[float], float]
    G: float
    spec: DiffusionSpec
    closed_form: bool = False
    label: str = ""
    grid_x: Optional[np.ndarray] = field(default=None, repr=False)
    grid_F: Optional[np.ndarray] = field(default=None, repr=False)


def _vectorized(fn: Callable) -> Callable:
    """Wrap a scalar-only coefficient so it accepts numpy arrays too."""

    def wrapped(x):
        try:
            out = fn(x)
        except (TypeError, ValueError):
            return np.vectorize(fn, otypes=[float])(x)
        out = np.asarray(out, dtype=float)
        if np.shape(out) != np.shape(x):
            out = np.broadcast_to(out, np.shape(x)).copy()
        return out

    return wrapped


def _exp_clipped(e: float) -> float:
    if e > _EXP_MAX:
        return math.inf
    return math.exp(e)


def _drift_over_sq(spec: DiffusionSpec) -> Callable[[float], float]:
    def s(u: float) -> float:
        sig = spec.diffusion(u)
        return spec.drift(u) / (sig * sig)

    return s


def _quad_finite(fn: Callable[[float], float], lo: float, hi: float, cfg: QuadratureConfig) -> float:
    out = integrate.quad(
        fn, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions, full_output=1
    )
    if len(out) > 3:
        raise NonConvergence(f"quadrature failed on ({lo}, {hi}): {out[3]}")
    if not math.isfinite(out[0]):
        raise NonConvergence(f"quadrature produced non-finite value on ({lo}, {hi})")
    return float(out[0])


def _probe_coefficients(spec: DiffusionSpec, probe_range: Bracket) -> None:
    grid = np.linspace(probe_range.lo, probe_range.hi, 41)
    for x in grid:
        sig = spec.diffusion(float(x))
        drv = spec.drift(float(x))
        if not (math.isfinite(sig) and math.isfinite(drv)):
            raise ValueError(f"coefficients must be finite on the probe grid (x={x})")
        if sig <= 0:
            raise ValueError(f"diffusion coefficient must be positive (sigma({x}) = {sig})")


def check_ergodicity(
    spec: DiffusionSpec,
    probe_range: Bracket = Bracket(-50.0, 50.0),
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ErgodicityReport:
    """Probe the ergodicity conditions at finite range.

    The drift integral is evaluated at the probe endpoints and at half range;
    the condition holds when the integral is negative and still decreasing at
    the probes.  The normalizer G is computed by quadrature over the line and
    declared infinite when that integral diverges.
    """
    _probe_coefficients(spec, probe_range)
    s = _drift_over_sq(spec)

    left = _quad_finite(s, 0.0, probe_range.lo, cfg)
    right = _quad_finite(s, 0.0, probe_range.hi, cfg)
    left_mid = _quad_finite(s, 0.0, probe_range.lo / 2.0, cfg)
    right_mid = _quad_finite(s, 0.0, probe_range.hi / 2.0, cfg)

    c2 = left < min(left_mid, 0.0) and right < min(right_mid, 0.0)

    def mass(y: float) -> float:
        sig = spec.diffusion(y)
        return _exp_clipped(2.0 * _quad_finite(s, 0.0, y, cfg)) / (sig * sig)

    try:
        G = integrate_line(mass, cfg)
        c3 = math.isfinite(G) and G > 0
    except NonConvergence:
        G = math.inf
        c3 = False
    if not c3:
        G = math.inf
    return ErgodicityReport(
        c2_left_limit=left, c2_right_limit=right, G=G, c2_holds=c2, c3_holds=c3
    )


def _panel_integrals(fn: Callable, nodes: np.ndarray) -> np.ndarray:
    """Integral of fn over each consecutive panel of ``nodes``."""
    lo = nodes[:-1]
    hi = nodes[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.asarray(fn(pts.ravel()), dtype=float).reshape(pts.shape)
    return (vals * _GL_W[None, :]).sum(axis=1) * half


def _cumulative_gl(fn: Callable, nodes: np.ndarray) -> np.ndarray:
    """Prefix integrals of fn along consecutive panels of ``nodes``."""
    out = np.empty(len(nodes))
    out[0] = 0.0
    np.cumsum(_panel_integrals(fn, nodes), out=out[1:])
    return out


def _reverse_cumulative(panels: np.ndarray) -> np.ndarray:
    """Suffix sums of panel integrals, accumulated from the right.

    Summing from the small end keeps relative accuracy in far tails instead
    of losing it to cancellation against the bulk mass.
    """
    out = np.empty(len(panels) + 1)
    out[-1] = 0.0
    out[:-1] = np.cumsum(panels[::-1])[::-1]
    return out


def _support_edges(mass: Callable[[float], float], probe_range: Bracket) -> tuple[float, float]:
    center = np.linspace(-1.0, 1.0, 21)
    peak = max(mass(float(x)) for x in center)
    if not (math.isfinite(peak) and peak > 0):
        raise NotErgodic("stationary mass is degenerate near the origin")
    floor = peak * 1e-300

    def expand(direction: float, cap: float) -> float:
        edge = direction
        while abs(edge) < abs(cap):
            v = mass(edge)
            if not math.isfinite(v) or v <= floor:
                return edge
            edge *= 2.0
        return cap

    return expand(-1.0, probe_range.lo), expand(1.0, probe_range.hi)


def build_invariant_law(
    spec: DiffusionSpec,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    probe_range: Bracket = Bracket(-50.0, 50.0),
    node_spacing: float = 0.005,
) -> InvariantLaw:
    """Construct the stationary law of a diffusion from its coefficients.

    The distribution function is cached on a dense grid covering the
    numerical support and interpolated monotonically between nodes; the
    survival function is accumulated from the right so its far tail keeps
    relative accuracy.  Raises NotErgodic when the ergodicity probes fail.
    """
    report = check_ergodicity(spec, probe_range, cfg)
    if not (report.c2_holds and report.c3_holds):
        raise NotErgodic(
            f"ergodicity checks failed (c2={report.c2_holds}, c3={report.c3_holds}, G={report.G})"
        )
    G = report.G
    s = _drift_over_sq(spec)

    def mass_scalar(y: float) -> float:
        sig = spec.diffusion(y)
        return _exp_clipped(2.0 * _quad_finite(s, 0.0, y, cfg)) / (sig * sig)

    lo, hi = _support_edges(mass_scalar, probe_range)

    n_left = max(int(round(-lo / node_spacing)), 8)
    n_right = max(int(round(hi / node_spacing)), 8)
    nodes = np.concatenate([np.linspace(lo, 0.0, n_left + 1)[:-1], np.linspace(0.0, hi, n_right + 1)])
    zero_idx = n_left

    s_vec = _vectorized(spec.drift)
    sig_vec = _vectorized(spec.diffusion)

    def s_array(u):
        sig = sig_vec(u)
        return s_vec(u) / (sig * sig)

    exponent = _cumulative_gl(s_array, nodes)
    exponent -= exponent[zero_idx]
    exponent_sp = interpolate.CubicSpline(nodes, exponent)

    def density_array(x):
        x = np.asarray(x, dtype=float)
        sig = sig_vec(x)
        with np.errstate(over="ignore"):
            out = np.exp(2.0 * exponent_sp(x)) / (sig * sig * G)
        return out

    lo_f = float(nodes[0])
    hi_f = float(nodes[-1])

    def f(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= lo_f) & (x <= hi_f)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = density_array(x[inside])
        return float(out) if out.ndim == 0 else out

    panel_nodes = nodes
    panel_mid = 0.5 * (panel_nodes[:-1] + panel_nodes[1:])
    panel_half = 0.5 * (panel_nodes[1:] - panel_nodes[:-1])
    pts = panel_mid[:, None] + panel_half[:, None] * _GL_X[None, :]
    f_vals = density_array(pts.ravel()).reshape(pts.shape)
    panels = (f_vals * _GL_W[None, :]).sum(axis=1) * panel_half

    F_nodes = np.empty(len(nodes))
    F_nodes[0] = 0.0
    np.cumsum(panels, out=F_nodes[1:])
    SF_nodes = _reverse_cumulative(panels)

    # slope averaging inside PCHIP overflows harmlessly on subnormal tail increments
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        F_interp = interpolate.PchipInterpolator(nodes, F_nodes)
        SF_interp = interpolate.PchipInterpolator(nodes, SF_nodes)

    def F(x):
        x = np.asarray(x, dtype=float)
        out = np.clip(F_interp(np.clip(x, lo_f, hi_f)), 0.0, None)
        out = np.where(x < lo_f, 0.0, out)
        out = np.where(x > hi_f, F_nodes[-1], out)
        return float(out) if out.ndim == 0 else out

    def sf(x):
        x = np.asarray(x, dtype=float)
        out = np.clip(SF_interp(np.clip(x, lo_f, hi_f)), 0.0, None)
        out = np.where(x < lo_f, SF_nodes[0], out)
        out = np.where(x > hi_f, 0.0, out)
        return float(out) if out.ndim == 0 else out

    def quantile(p: float) -> float:
        if not 0.0 < p < 1.0:
            raise ValueError("quantile is defined on (0, 1)")
        # the lower tail of F and the upper tail of sf carry relative
        # accuracy; solve against whichever side resolves p
        if p <= 0.5:
            g = lambda x: F(x) - p
        else:
            q = 1.0 - p
            g = lambda x: q - sf(x)
        q_lo, q_hi = -1.0, 1.0
        while g(q_lo) > 0.0 and q_lo > lo_f:
            q_lo = max(q_lo * 2.0, lo_f)
        while g(q_hi) < 0.0 and q_hi < hi_f:
            q_hi = min(q_hi * 2.0, hi_f)
        return find_root(g, Bracket(q_lo, q_hi), tol=1e-12)

    return InvariantLaw(
        f=f,
        F=F,
        sf=sf,
        quantile=quantile,
        G=G,
        spec=spec,
        closed_form=False,
        label=spec.label or "custom",
        grid_x=nodes,
        grid_F=F_nodes,
    )


def ou_law() -> InvariantLaw:
    """Closed-form stationary law of the standard mean-reverting noise.

    The law is Gaussian with mean zero and variance 1/2: density
    exp(-x^2)/sqrt(pi), distribution (1 + erf(x))/2.
    """
    spec = DiffusionSpec(drift=lambda x: -x, diffusion=lambda x: x * 0.0 + 1.0, label="ou")

    def f(x):
        out = np.exp(-np.square(np.asarray(x, dtype=float))) / _SQRT_PI
        return float(out) if out.ndim == 0 else out

    def F(x):
        out = 0.5 * special.erfc(-np.asarray(x, dtype=float))
        return float(out) if out.ndim == 0 else out

    def sf(x):
        out = 0.5 * special.erfc(np.asarray(x, dtype=float))
        return float(out) if out.ndim == 0 else out

    def quantile(p: float) -> float:
        if not 0.0 < p < 1.0:
            raise ValueError("quantile is defined on (0, 1)")
        return float(special.erfinv(2.0 * p - 1.0))

    return InvariantLaw(
        f=f,
        F=F,
        sf=sf,
        quantile=quantile,
        G=_SQRT_PI,
        spec=spec,
        closed_form=True,
        label="ou",
    )


NAMED_SPECS: dict[str, Callable[[], InvariantLaw]] = {"ou": ou_law}

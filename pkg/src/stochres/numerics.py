"""Shared numerical kernels: quadrature over the real line, root finding,
scalar maximization and the error-function family.

All functions here are pure and safe for concurrent use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import BadBracket, NonConvergence, NonFinite

__all__ = [
    "QuadratureConfig",
    "Bracket",
    "DEFAULT_QUADRATURE",
    "erf",
    "normal_cdf",
    "integrate_line",
    "find_root",
    "maximize_scalar",
    "MaximizeResult",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budget for adaptive quadrature."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class Bracket:
    """A search interval [lo, hi] with lo < hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("bracket endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


DEFAULT_QUADRATURE = QuadratureConfig()


def erf(x: float) -> float:
    """Error function (2/sqrt(pi)) * integral_0^x exp(-t^2) dt."""
    return math.erf(x)


def normal_cdf(z: float) -> float:
    """Standard normal distribution function, accurate in both tails.

    Evaluated as erfc(-z/sqrt(2))/2, which equals (1 + erf(z/sqrt(2)))/2
    without cancellation for z far below zero.
    """
    return 0.5 * math.erfc(-z / _SQRT2)


def _t_of_x(x: float) -> float:
    """Inverse of the line-to-interval substitution x = t/(1-t^2)."""
    if x == 0.0:
        return 0.0
    x = max(min(x, 1e150), -1e150)
    return (math.sqrt(1.0 + 4.0 * x * x) - 1.0) / (2.0 * x)


def integrate_line(
    f: Callable[[float], float],
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    *,
    split_at: Sequence[float] = (),
) -> float:
    """Integrate f over the whole real line.

    The line is mapped onto (-1, 1) by the smooth substitution x = t/(1-t^2)
    and each segment is handled by adaptive quadrature.  ``split_at`` lists
    interior points where the integrand has kinks or jumps; splitting there
    keeps the adaptive scheme efficient and reliable.

    Raises NonConvergence when the subdivision budget runs out before the
    requested tolerance is met, or when the result is not finite.
    """
    cuts = sorted({_t_of_x(p) for p in split_at if math.isfinite(p)})
    edges = [-1.0] + [t for t in cuts if -1.0 < t < 1.0] + [1.0]

    def g(t: float) -> float:
        one_minus = 1.0 - t * t
        x = t / one_minus
        jac = (1.0 + t * t) / (one_minus * one_minus)
        return f(x) * jac

    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        out = integrate.quad(
            g,
            lo,
            hi,
            epsabs=cfg.abs_tol,
            epsrel=cfg.rel_tol,
            limit=cfg.max_subdivisions,
            full_output=1,
        )
        if len(out) > 3:
            raise NonConvergence(f"quadrature failed on segment ({lo}, {hi}): {out[3]}")
        if not math.isfinite(out[0]):
            raise NonConvergence(f"quadrature produced non-finite value on segment ({lo}, {hi})")
        total += out[0]
    return total


def find_root(g: Callable[[float], float], bracket: Bracket, tol: float = 1e-10) -> float:
    """Locate the root of a continuous function inside a sign-changing bracket.

    Raises BadBracket when g has the same nonzero sign at both endpoints.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    glo = g(bracket.lo)
    ghi = g(bracket.hi)
    if not (math.isfinite(glo) and math.isfinite(ghi)):
        raise BadBracket("function is not finite at the bracket endpoints")
    if glo == 0.0:
        return bracket.lo
    if ghi == 0.0:
        return bracket.hi
    if glo * ghi > 0:
        raise BadBracket(
            f"no sign change on [{bracket.lo}, {bracket.hi}]: g(lo)={glo:.6g}, g(hi)={ghi:.6g}"
        )
    return float(optimize.brentq(g, bracket.lo, bracket.hi, xtol=tol))


class MaximizeResult(NamedTuple):
    x_star: float
    h_star: float
    local_maxima: list[tuple[float, float]]


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(h: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    hc = _checked(h, c)
    hd = _checked(h, d)
    while (hi - lo) > tol:
        if hc >= hd:
            hi, d, hd = d, c, hc
            c = hi - _INVPHI * (hi - lo)
            hc = _checked(h, c)
        else:
            lo, c, hc = c, d, hd
            d = lo + _INVPHI * (hi - lo)
            hd = _checked(h, d)
    x = 0.5 * (lo + hi)
    return x, _checked(h, x)


def _checked(h: Callable[[float], float], x: float) -> float:
    v = h(x)
    if not math.isfinite(v):
        raise NonFinite(f"objective is not finite at x={x}: {v}")
    return float(v)


def maximize_scalar(
    h: Callable[[float], float],
    bracket: Bracket,
    grid_n: int = 64,
    tol: float = 1e-6,
) -> MaximizeResult:
    """Locate the global maximum of h on a bracket, reporting every interior peak.

    A coarse grid scan locates candidate peaks; each candidate is refined by
    golden-section search.  Several interior maxima may be reported, which is
    how multi-peaked objectives are detected.  The global maximizer is chosen
    among the refined peaks and the bracket endpoints.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be >= 16")
    if tol <= 0:
        raise ValueError("tol must be positive")
    xs = np.linspace(bracket.lo, bracket.hi, grid_n + 1)
    hs = np.array([_checked(h, float(x)) for x in xs])

    candidates = [
        i
        for i in range(1, grid_n)
        if hs[i] >= hs[i - 1] and hs[i] >= hs[i + 1] and (hs[i] > hs[i - 1] or hs[i] > hs[i + 1])
    ]

    refined: list[tuple[float, float]] = []
    cell = (bracket.hi - bracket.lo) / grid_n
    for i in candidates:
        x_ref, h_ref = _golden_max(h, float(xs[i - 1]), float(xs[i + 1]), tol)
        # adjacent grid candidates can refine onto the same peak
        if refined and abs(x_ref - refined[-1][0]) <= cell:
            if h_ref > refined[-1][1]:
                refined[-1] = (x_ref, h_ref)
            continue
        refined.append((x_ref, h_ref))

    best = max(
        refined + [(float(xs[0]), float(hs[0])), (float(xs[-1]), float(hs[-1]))],
        key=lambda p: p[1],
    )
    return MaximizeResult(x_star=best[0], h_star=best[1], local_maxima=refined)

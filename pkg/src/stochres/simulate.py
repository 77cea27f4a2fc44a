"""Euler-Maruyama simulation of the noise, signal perturbation, and the two
path observables (fraction of time above threshold, observed energy).

Randomness comes from a counter-based generator (Philox), so replication k
of a study simply uses seed = base_seed + k and every path is reproducible
bit for bit in isolation or inside an ensemble.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericBlowup
from .laws import DiffusionSpec, _vectorized

__all__ = [
    "SimConfig",
    "Trajectory",
    "ObservationSummary",
    "simulate_path",
    "simulate_paths",
    "perturb",
    "observe",
]

_BLOWUP = 1e12


@dataclass(frozen=True)
class SimConfig:
    """Horizon, step size, seed and start point of one simulation."""

    T: float
    dt: float = 0.01
    seed: int = 0
    x0: float = 0.0

    def __post_init__(self) -> None:
        if not (0 < self.dt <= self.T):
            raise ValueError("need 0 < dt <= T")
        if self.n_steps > 2**62:
            raise ValueError("T/dt too large for the index type")

    @property
    def n_steps(self) -> int:
        # tiny slack so T/dt that is an integer up to float error rounds down correctly
        return int(math.floor(self.T / self.dt + 1e-9))


@dataclass(frozen=True)
class Trajectory:
    """A discretized path sampled on a uniform time grid."""

    values: np.ndarray
    dt: float
    seed: int

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.dt

    @property
    def horizon(self) -> float:
        return (len(self.values) - 1) * self.dt


@dataclass(frozen=True)
class ObservationSummary:
    """Path statistics: fraction of time above threshold and observed energy."""

    time_fraction: float
    energy: float
    horizon: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.time_fraction <= 1.0:
            raise ValueError("time_fraction must lie in [0, 1]")
        if self.energy < 0.0:
            raise ValueError("energy must be nonnegative")


def _normals(seed: int, n: int) -> np.ndarray:
    return np.random.Generator(np.random.Philox(seed)).standard_normal(n)


def _em_scalar(spec: DiffusionSpec, x0: float, dt: float, z: np.ndarray) -> np.ndarray:
    drift = spec.drift
    diffusion = spec.diffusion
    sqrt_dt = math.sqrt(dt)
    out = np.empty(len(z) + 1)
    out[0] = x0
    x = x0
    for k, zk in enumerate(z):
        x = x + drift(x) * dt + diffusion(x) * sqrt_dt * zk
        if not (-_BLOWUP < x < _BLOWUP):  # also catches NaN
            raise NumericBlowup(f"|X| exceeded {_BLOWUP:g} at step {k + 1}; check coefficients/dt")
        out[k + 1] = x
    return out


def simulate_path(spec: DiffusionSpec, cfg: SimConfig) -> Trajectory:
    """One Euler-Maruyama path of the noise SDE.

    X_{k+1} = X_k + S(X_k) dt + sigma(X_k) sqrt(dt) Z_k with Z_k drawn from
    the counter-based generator seeded at cfg.seed.  The same config always
    yields the identical path.
    """
    z = _normals(cfg.seed, cfg.n_steps)
    values = _em_scalar(spec, cfg.x0, cfg.dt, z)
    return Trajectory(values=values, dt=cfg.dt, seed=cfg.seed)


def simulate_paths(spec: DiffusionSpec, cfg: SimConfig, n_paths: int) -> list[Trajectory]:
    """An ensemble of paths with seeds cfg.seed, cfg.seed+1, ...

    The stepping is vectorized across paths but each path is bit-identical
    to what simulate_path would produce with the derived seed.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    n = cfg.n_steps
    z = np.empty((n_paths, n))
    for k in range(n_paths):
        z[k] = _normals(cfg.seed + k, n)
    drift = _vectorized(spec.drift)
    diffusion = _vectorized(spec.diffusion)
    sqrt_dt = math.sqrt(cfg.dt)
    values = np.empty((n_paths, n + 1))
    values[:, 0] = cfg.x0
    x = np.full(n_paths, cfg.x0)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            x = x + drift(x) * cfg.dt + diffusion(x) * sqrt_dt * z[:, k]
            values[:, k + 1] = x
    bad = ~np.isfinite(values).all(axis=1) | (np.abs(values).max(axis=1) > _BLOWUP)
    if bad.any():
        first = int(np.argmax(bad))
        raise NumericBlowup(
            f"|X| exceeded {_BLOWUP:g} for path seed {cfg.seed + first}; check coefficients/dt"
        )
    return [
        Trajectory(values=values[k], dt=cfg.dt, seed=cfg.seed + k) for k in range(n_paths)
    ]


def perturb(traj: Trajectory, theta: float, eps: float) -> Trajectory:
    """Affine channel map: the observed signal is theta + eps * X."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return replace(traj, values=theta + eps * traj.values)


def observe(traj: Trajectory, tau: float) -> ObservationSummary:
    """Evaluate both path statistics against a threshold.

    Time integrals use the left-endpoint rule, so the fraction of time above
    the threshold is an exact step count over n = len(values) - 1 steps.
    """
    if len(traj.values) < 2:
        raise ValueError("trajectory must contain at least one step")
    y = traj.values[:-1]
    above = y > tau
    frac = float(above.mean())
    energy = float(np.mean(np.square(y) * above))
    return ObservationSummary(time_fraction=frac, energy=energy, horizon=traj.horizon)

"""Monte Carlo validation studies: estimator variance against its asymptotic
prediction, and empirical decision error against the closed-form value.

Replication k always uses seed = base_seed + k, so studies are reproducible
and trivially parallel; paths are simulated in bounded-size blocks to keep
memory flat.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .errors import DegenerateObservation
from .estimators import (
    ChannelConfig,
    energy_scheme_variance,
    estimate_theta_energy,
    estimate_theta_time,
    time_scheme_variance,
)
from .laws import InvariantLaw
from .maptest import Decision, TestProblem, build_rule, decide, moments, p_err
from .numerics import DEFAULT_QUADRATURE, QuadratureConfig
from .simulate import ObservationSummary, SimConfig, observe, perturb, simulate_paths

__all__ = ["VarianceStudy", "ErrorRateStudy", "variance_validation_study", "error_rate_study"]

_BLOCK = 512


def _observations(
    law: InvariantLaw, theta: float, eps: float, tau: float, cfg: SimConfig, n: int
) -> Iterator[ObservationSummary]:
    done = 0
    while done < n:
        block = min(_BLOCK, n - done)
        for traj in simulate_paths(law.spec, replace(cfg, seed=cfg.seed + done), block):
            yield observe(perturb(traj, theta, eps), tau)
        done += block


@dataclass(frozen=True)
class VarianceStudy:
    ratio_time: float
    ratio_energy: float
    sigma_time: float
    sigma_energy: float
    n_reps: int
    n_degenerate: int
    seeds: tuple[int, int]  # inclusive seed range used


def variance_validation_study(
    law: InvariantLaw,
    theta: float,
    tau: float,
    eps: float,
    horizon: float,
    dt: float,
    n_reps: int,
    base_seed: int = 0,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> VarianceStudy:
    """Compare T * var(estimate) across replications with the predicted
    asymptotic variance, for both schemes on the same simulated paths.

    Replications whose time fraction hits 0 or 1 carry no finite estimate
    and are excluded (counted in n_degenerate).
    """
    if n_reps < 2:
        raise ValueError("need at least 2 replications")
    ch = ChannelConfig(tau=tau, eps=eps, law=law)
    sim = SimConfig(T=horizon, dt=dt, seed=base_seed)
    est_t: list[float] = []
    est_e: list[float] = []
    degenerate = 0
    for obs in _observations(law, theta, eps, tau, sim, n_reps):
        try:
            est_t.append(estimate_theta_time(obs.time_fraction, ch))
            est_e.append(estimate_theta_energy(obs.energy, ch, cfg))
        except DegenerateObservation:
            degenerate += 1
    if len(est_t) < 2:
        raise DegenerateObservation("too few usable replications for a variance estimate")
    sigma_t = time_scheme_variance(theta, ch, cfg).value
    sigma_e = energy_scheme_variance(theta, ch, cfg).value
    t_eff = sim.n_steps * dt
    return VarianceStudy(
        ratio_time=t_eff * float(np.var(est_t, ddof=1)) / sigma_t,
        ratio_energy=t_eff * float(np.var(est_e, ddof=1)) / sigma_e,
        sigma_time=sigma_t,
        sigma_energy=sigma_e,
        n_reps=len(est_t),
        n_degenerate=degenerate,
        seeds=(base_seed, base_seed + n_reps - 1),
    )


@dataclass(frozen=True)
class ErrorRateStudy:
    empirical_rate: float
    predicted_p_err: float
    n_paths: int
    n_errors: int
    binomial_se: float
    seeds: tuple[int, int]


def error_rate_study(
    problem: TestProblem,
    dt: float,
    n_paths: int,
    base_seed: int = 0,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ErrorRateStudy:
    """Simulate labeled paths in prior proportions and score the MAP rule.

    The label split is deterministic (round(p0 * n) null paths first), which
    matches the prior mixture in expectation and keeps every run reproducible
    from the base seed.
    """
    if n_paths < 2:
        raise ValueError("need at least 2 labeled paths")
    rule = build_rule(moments(problem, cfg), problem.p0, problem.p1)
    predicted = p_err(problem, cfg).p_err
    n0 = int(round(problem.p0 * n_paths))
    sim = SimConfig(T=problem.horizon, dt=dt, seed=base_seed)
    errors = 0
    for theta, truth, count, offset in (
        (problem.theta0, Decision.D0, n0, 0),
        (problem.theta1, Decision.D1, n_paths - n0, n0),
    ):
        block_cfg = replace(sim, seed=base_seed + offset)
        for obs in _observations(problem.law, theta, problem.eps, problem.tau, block_cfg, count):
            statistic = obs.time_fraction if problem.scheme == "time" else obs.energy
            if decide(rule, statistic) is not truth:
                errors += 1
    rate = errors / n_paths
    se = math.sqrt(max(predicted * (1.0 - predicted), 1e-12) / n_paths)
    return ErrorRateStudy(
        empirical_rate=rate,
        predicted_p_err=predicted,
        n_paths=n_paths,
        n_errors=errors,
        binomial_se=se,
        seeds=(base_seed, base_seed + n_paths - 1),
    )

"""Grid maximum-likelihood estimation of the encoded phase and Monte Carlo
evaluation of the estimator's bias as a function of the measurement angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import NoiseChannel
from .errors import ValidationError
from .fisher import support_threshold
from .linalg import pure_state_density
from .spin import angular_momentum_operators, dicke_ket, rotation_y

LOG_ZERO = -1e300  # sentinel for outcomes outside a grid point's support


@dataclass(frozen=True)
class MleConfig:
    search_interval: tuple = (-0.2, 0.2)
    grid_resolution: int = 2001
    samples_per_run: int = 40
    runs: int = 10000
    theta0_interval: tuple = (-0.1, 0.1)
    theta0_points: int = 11
    master_seed: int = 0
    fold: bool = True

    def __post_init__(self):
        lo, hi = self.search_interval
        if not lo < hi:
            raise ValidationError("search interval must be nonempty")
        if self.grid_resolution < 3:
            raise ValidationError("grid resolution must be >= 3")
        if self.samples_per_run < 1 or self.runs < 1:
            raise ValidationError("samples per run and run count must be >= 1")

    def theta_grid(self) -> np.ndarray:
        lo, hi = self.search_interval
        return np.linspace(lo, hi, self.grid_resolution)

    def theta0_grid(self) -> np.ndarray:
        lo, hi = self.theta0_interval
        return np.linspace(lo, hi, self.theta0_points)


@dataclass(frozen=True)
class BiasResult:
    beta: float
    theta0: float
    mean_bias: float
    sem: float
    runs: int


@dataclass(frozen=True)
class MeasurementTable:
    """Outcome probabilities of a spin probe over a theta grid, for one
    measurement angle beta."""

    beta: float
    theta_grid: np.ndarray
    probabilities: np.ndarray  # (n_theta, n_outcomes)
    tau_supp: float

    def log_probabilities(self) -> np.ndarray:
        logp = np.full_like(self.probabilities, LOG_ZERO)
        mask = self.probabilities > self.tau_supp
        logp[mask] = np.log(self.probabilities[mask])
        return logp


def probability_rows(rho: np.ndarray, H: np.ndarray, basis: np.ndarray,
                     thetas: np.ndarray) -> np.ndarray:
    """p_theta(lam) = <lam| exp(-i theta H) rho exp(i theta H) |lam> for every
    theta in the list, via one eigendecomposition of the generator."""
    w, W = np.linalg.eigh((H + H.conj().T) / 2)
    rho_h = W.conj().T @ rho @ W
    Y = W.conj().T @ basis  # columns: measurement kets in the H eigenbasis
    out = np.empty((len(thetas), basis.shape[1]))
    for t, theta in enumerate(np.atleast_1d(thetas)):
        u = np.exp(-1j * theta * w)
        rot = (u[:, None] * rho_h) * u.conj()[None, :]
        out[t] = np.einsum("im,ij,jm->m", Y.conj(), rot, Y).real
    np.clip(out, 0.0, None, out=out)
    return out


def _table_from_state(J: float, rho: np.ndarray, beta: float,
                      thetas: np.ndarray) -> MeasurementTable:
    ops = angular_momentum_operators(J)
    basis = rotation_y(J, beta)
    probs = probability_rows(rho, np.asarray(ops.jy), basis, thetas)
    return MeasurementTable(beta=beta, theta_grid=np.asarray(thetas, dtype=float),
                            probabilities=probs, tau_supp=support_threshold(rho))


def dicke_measurement_table(J: float, noise: NoiseChannel, beta: float,
                            thetas: np.ndarray) -> MeasurementTable:
    """Measurement table for the noisy first excited Dicke probe measured in
    the beta-rotated J_z basis with generator J_y."""
    rho = noise.apply(pure_state_density(dicke_ket(J, J - 1)))
    return _table_from_state(J, rho, beta, thetas)


def sample_outcomes(probabilities: np.ndarray, n: int, seed) -> np.ndarray:
    """n i.i.d. outcome indices drawn from one probability vector."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-9:
        raise ValidationError("invalid probability vector")
    p = np.clip(p, 0.0, None)
    rng = np.random.default_rng(seed)
    return rng.choice(len(p), size=n, p=p / p.sum())


def mle_estimate(samples: np.ndarray, table: MeasurementTable,
                 fold: bool = True) -> float:
    """Grid maximum-likelihood estimate from a list of outcome indices.

    Ties are broken toward the smallest |theta|; with fold=True the estimate
    is mapped to its absolute value.
    """
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValidationError("empty sample list")
    counts = np.bincount(samples, minlength=table.probabilities.shape[1])
    loglik = counts.astype(float) @ table.log_probabilities().T
    if loglik.max() <= LOG_ZERO / 2:
        raise ValidationError(
            "sample is impossible at every grid point (all outcomes outside "
            "the modeled support)"
        )
    order = np.argsort(np.abs(table.theta_grid), kind="stable")
    best = order[int(np.argmax(loglik[order]))]
    theta_hat = float(table.theta_grid[best])
    return abs(theta_hat) if fold else theta_hat


def _run_batch(theta_grid: np.ndarray, logp: np.ndarray, p_true: np.ndarray,
               config: MleConfig, seed_key: tuple) -> np.ndarray:
    """theta-hat for `runs` independent experiments of n samples each.

    Counts are sufficient statistics, so each run draws one multinomial.
    """
    ss = np.random.SeedSequence(config.master_seed, spawn_key=seed_key)
    rng = np.random.default_rng(ss)
    p = np.clip(np.asarray(p_true, dtype=float), 0.0, None)
    counts = rng.multinomial(config.samples_per_run, p / p.sum(),
                             size=config.runs)
    loglik = counts.astype(float) @ logp.T
    order = np.argsort(np.abs(theta_grid), kind="stable")
    idx = order[np.argmax(loglik[:, order], axis=1)]
    theta_hat = theta_grid[idx]
    return np.abs(theta_hat) if config.fold else theta_hat


def bias_monte_carlo(J: float, noise: NoiseChannel, betas,
                     config: MleConfig) -> list:
    """Mean bias of the grid MLE per (beta, theta0) over `runs` repetitions.

    theta0 runs over the configured uniform grid; per-cell random streams are
    spawned from the master seed keyed by the (beta, theta0) indices, so
    results are reproducible and independent of evaluation order.
    """
    theta_grid = config.theta_grid()
    theta0s = config.theta0_grid()
    ops = angular_momentum_operators(J)
    rho = noise.apply(pure_state_density(dicke_ket(J, J - 1)))
    results = []
    for i_beta, beta in enumerate(np.atleast_1d(betas)):
        table = _table_from_state(J, rho, float(beta), theta_grid)
        logp = table.log_probabilities()
        p0 = probability_rows(rho, np.asarray(ops.jy), rotation_y(J, float(beta)),
                              theta0s)
        for i_t0, theta0 in enumerate(theta0s):
            hats = _run_batch(theta_grid, logp, p0[i_t0], config, (i_beta, i_t0))
            bias = hats - theta0
            results.append(BiasResult(
                beta=float(beta), theta0=float(theta0),
                mean_bias=float(bias.mean()),
                sem=float(bias.std(ddof=1) / np.sqrt(config.runs)),
                runs=config.runs,
            ))
    return results


def averaged_abs_bias(results: list, beta: float) -> float:
    """Mean of |bias| over the theta0 grid for one measurement angle."""
    vals = [abs(r.mean_bias) for r in results if r.beta == beta]
    if not vals:
        raise ValidationError(f"no results at beta={beta}")
    return float(np.mean(vals))

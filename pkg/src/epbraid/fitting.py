"""Recovering (delta_ef, omega, g) from population time series.

The observable is the qutrit population triple (P_g, P_e, P_f) with
P_g = 1 - P_e - P_f, since the readout cannot tell |g,1> from |g,0>
after the photon leaks.  The decay rate kappa is measured independently
and stays fixed; only the three coherent parameters are free.

Fitting needs thousands of model evaluations, so the forward model uses
the exact eigendecomposition propagator of the constant Hamiltonian
instead of step-by-step integration.  Its agreement with the integrator
is a test concern, not a runtime one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitDivergedError, ValidationError
from .params import SystemParams
from .spectral import build_hamiltonian

_FD_STEP = 1e-6
_MAX_ITERATIONS = 200
_STEP_TOL = 1e-10
_RESIDUAL_TOL = 1e-12
_ILL_POSED_CONDITION = 1e12
_MAX_DAMPING = 1e12

# Three channels carry independent noise, so the triple sum wanders with
# standard deviation sqrt(3) times the per-channel scale.
_CLOSURE_SIGMAS = 3.0 * math.sqrt(3.0)


def _check_theta(name: str, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (3,):
        raise ValidationError(f"{name} must be a (delta_ef, omega, g) triple, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValidationError(f"{name} must be finite, got {theta.tolist()!r}")
    return theta


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValidationError("times must be a nonempty one-dimensional array")
    if not np.all(np.isfinite(times)):
        raise ValidationError("times must be finite")
    if np.any(np.diff(times) <= 0.0):
        raise ValidationError("times must be strictly increasing")
    return times


def _check_state(psi0) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (3,):
        raise ValidationError(f"psi0 must have shape (3,), got {psi0.shape}")
    norm = float(np.linalg.norm(psi0))
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"psi0 must be unit norm, got |psi0| = {norm!r}")
    return psi0


def population_model(theta, kappa: float, psi0, times) -> np.ndarray:
    """Noiseless (P_g, P_e, P_f) triples at the given sample instants.

    Computed from the eigendecomposition of the constant Hamiltonian, so
    the cost is independent of how late the samples are.
    """
    theta = _check_theta("theta", theta)
    times = _check_times(times)
    psi0 = _check_state(psi0)
    params = SystemParams(float(theta[0]), float(theta[1]), float(theta[2]), float(kappa))
    h = build_hamiltonian(params)
    try:
        w, v = np.linalg.eig(h)
        coeffs = np.linalg.solve(v, psi0)
    except np.linalg.LinAlgError as exc:
        raise FitDivergedError(f"propagator undefined at theta={theta.tolist()!r}: {exc}") from exc
    phases = np.exp(-1j * np.outer(times, w))
    states = (phases * coeffs) @ v.T
    probs = np.abs(states) ** 2
    p_e, p_f = probs[:, 0], probs[:, 1]
    return np.column_stack([1.0 - p_e - p_f, p_e, p_f])


@dataclass(frozen=True)
class ObservationSet:
    """Measured population triples (P_g, P_e, P_f) at sample instants.

    ``sigma`` is the per-point noise scale used for the closure check:
    each triple must sum to one within a few propagated noise widths.  A
    small fraction of outliers is tolerated because Gaussian tails will
    legitimately exceed any fixed multiple of sigma.
    """

    times: np.ndarray
    observed: np.ndarray
    sigma: np.ndarray = field(default=None)

    def __post_init__(self):
        times = _check_times(self.times)
        observed = np.asarray(self.observed, dtype=float)
        if observed.shape != (len(times), 3):
            raise ValidationError(
                f"observed must have shape ({len(times)}, 3), got {observed.shape}"
            )
        if not np.all(np.isfinite(observed)):
            raise ValidationError("observed values must be finite")
        if np.any(observed < -1e-9) or np.any(observed > 1.0 + 1e-9):
            raise ValidationError("observed values must lie in [0, 1]")
        sigma = np.ones(len(times)) if self.sigma is None else np.asarray(self.sigma, dtype=float)
        if sigma.ndim == 0:
            sigma = np.full(len(times), float(sigma))
        if sigma.shape != (len(times),) or np.any(~np.isfinite(sigma)) or np.any(sigma <= 0.0):
            raise ValidationError("sigma must be a positive scale, scalar or one per point")
        closure = np.abs(observed.sum(axis=1) - 1.0)
        violations = int(np.sum(closure > _CLOSURE_SIGMAS * sigma + 1e-9))
        if violations > max(1, len(times) // 50):
            raise ValidationError(
                f"{violations} of {len(times)} triples fail to sum to one within "
                f"the noise scale; the data is not a population record"
            )
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_points(self) -> int:
        return len(self.times)


def simulate_observations(
    theta, kappa: float, psi0, times, noise_sd: float = 0.0, seed=None
) -> ObservationSet:
    """Synthetic measurement record: exact populations plus Gaussian noise.

    Noise is added independently per channel and the result is clipped to
    [0, 1]; deterministic for a fixed seed.
    """
    noise_sd = float(noise_sd)
    if not math.isfinite(noise_sd) or noise_sd < 0.0:
        raise ValidationError(f"noise_sd must be >= 0, got {noise_sd!r}")
    clean = population_model(theta, kappa, psi0, times)
    if noise_sd > 0.0:
        rng = np.random.default_rng(seed)
        clean = np.clip(clean + rng.normal(0.0, noise_sd, clean.shape), 0.0, 1.0)
    sigma = noise_sd if noise_sd > 0.0 else 1.0
    return ObservationSet(np.asarray(times, dtype=float), clean, np.full(len(clean), sigma))


@dataclass(frozen=True)
class FitResult:
    """Outcome of one damped Gauss-Newton run with kappa held fixed."""

    params: tuple
    kappa_fixed: float
    residual_rms: float
    iterations: int
    converged: bool
    jacobian_condition: float
    ill_posed: bool

    def to_json_dict(self) -> dict:
        return {
            "delta_ef": self.params[0],
            "omega": self.params[1],
            "g": self.params[2],
            "kappa_fixed": self.kappa_fixed,
            "residual_rms": self.residual_rms,
            "iterations": self.iterations,
            "converged": self.converged,
            "jacobian_condition": self.jacobian_condition,
            "ill_posed": self.ill_posed,
        }


def _rms(residual: np.ndarray) -> float:
    return float(np.sqrt(np.mean(residual**2)))


def fit_parameters(data: ObservationSet, kappa: float, psi0, initial_guess) -> FitResult:
    """Fit (delta_ef, omega, g) to a population record by least squares.

    Damped Gauss-Newton on the stacked residuals of all three channels:
    the damping grows tenfold on each rejected step and shrinks tenfold
    on each accepted one.  Populations are even in the signs of omega and
    g, so the returned representative has both nonnegative.
    """
    if not isinstance(data, ObservationSet):
        raise ValidationError(f"data must be an ObservationSet, got {type(data).__name__}")
    if data.n_points < 10:
        raise ValidationError(f"need at least 10 time points to fit, got {data.n_points}")
    kappa = float(kappa)
    psi0 = _check_state(psi0)
    theta = _check_theta("initial_guess", initial_guess)

    def residual(at: np.ndarray) -> np.ndarray:
        return (population_model(at, kappa, psi0, data.times) - data.observed).ravel()

    current = residual(theta)
    if not np.all(np.isfinite(current)):
        raise FitDivergedError("model is not finite at the initial guess")
    cost = float(current @ current)

    damping = 1e-3
    converged = False
    ill_posed = False
    condition = math.inf
    iterations = 0
    while iterations < _MAX_ITERATIONS:
        iterations += 1
        jacobian = np.empty((len(current), 3))
        for k in range(3):
            step = _FD_STEP * max(1.0, abs(theta[k]))
            probe = theta.copy()
            probe[k] += step
            jacobian[:, k] = (residual(probe) - current) / step
        condition = float(np.linalg.cond(jacobian))
        if not math.isfinite(condition) or condition > _ILL_POSED_CONDITION:
            ill_posed = True

        gram = jacobian.T @ jacobian
        gradient = jacobian.T @ current
        try:
            delta = np.linalg.solve(gram + damping * np.eye(3), -gradient)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(gram + damping * np.eye(3), -gradient, rcond=None)[0]

        trial = theta + delta
        trial_residual = residual(trial)
        trial_cost = float(trial_residual @ trial_residual)
        if np.all(np.isfinite(trial_residual)) and trial_cost <= cost:
            drop = cost - trial_cost
            theta, current, cost = trial, trial_residual, trial_cost
            damping = max(damping / 10.0, 1e-15)
            if float(np.linalg.norm(delta)) < _STEP_TOL * max(1.0, float(np.linalg.norm(theta))):
                converged = True
                break
            if drop < _RESIDUAL_TOL * max(cost, 1e-30):
                converged = True
                break
        else:
            damping *= 10.0
            if damping > _MAX_DAMPING:
                break

    theta[1] = abs(theta[1])
    theta[2] = abs(theta[2])
    final = residual(theta)
    return FitResult(
        params=(float(theta[0]), float(theta[1]), float(theta[2])),
        kappa_fixed=kappa,
        residual_rms=_rms(final),
        iterations=iterations,
        converged=converged,
        jacobian_condition=condition,
        ill_posed=ill_posed,
    )

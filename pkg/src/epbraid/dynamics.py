"""Time evolution along closed control schedules and chiral state transfer.

The Schroedinger equation i d(psi)/dt = H(t) psi is integrated with a
classical fixed-step fourth-order Runge-Kutta scheme, deliberately without
renormalization: the norm carries the photon-loss record, and its monotone
decay doubles as an integration sanity check.  Rectangle corners sit at
multiples of period/8, so any step count divisible by 8 aligns the kinks
with step boundaries and keeps the integrator at full order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateEigenbasisError,
    IntegrationUnstableError,
    ValidationError,
)
from .exceptional import arc_crossings_at_g
from .params import SystemParams
from .spectral import build_hamiltonian, eigensystem

_DEFAULT_STEP_DENOM = 8192
_NORM_SLACK = 1e-6


def _require_finite(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class RectangleLoopSchedule:
    """Rectangular control loop in the (omega, delta) plane at fixed g.

    The rectangle has corners {omega0, omega_m} x {-amplitude, +amplitude}
    and is traversed once in ``period``, starting and ending at
    (omega0, 0).  The two half-edges leaving and returning to the start
    take period/8 each and the four full edges period/4 each.
    Counterclockwise (the positive orientation of the (omega, delta)
    plane) means the first motion heads toward negative detuning.
    ``omega0 == omega_m`` is allowed and collapses the rectangle to the
    out-and-back sweep used as the no-transfer control.
    """

    omega0: float
    omega_m: float
    amplitude: float
    g: float
    kappa: float
    period: float
    direction: str = "ccw"

    def __post_init__(self):
        omega0 = _require_finite("omega0", self.omega0)
        omega_m = _require_finite("omega_m", self.omega_m)
        amplitude = _require_finite("amplitude", self.amplitude)
        g = _require_finite("g", self.g)
        kappa = _require_finite("kappa", self.kappa)
        period = _require_finite("period", self.period)
        if omega0 > omega_m:
            raise ValidationError(
                f"omega0 must not exceed omega_m, got {omega0!r} > {omega_m!r}"
            )
        if amplitude <= 0.0:
            raise ValidationError(f"amplitude must be > 0, got {amplitude!r}")
        if period <= 0.0:
            raise ValidationError(f"period must be > 0, got {period!r}")
        if kappa < 0.0:
            raise ValidationError(f"kappa must be >= 0, got {kappa!r}")
        if self.direction not in ("cw", "ccw"):
            raise ValidationError(f"direction must be 'cw' or 'ccw', got {self.direction!r}")
        for name, value in (
            ("omega0", omega0),
            ("omega_m", omega_m),
            ("amplitude", amplitude),
            ("g", g),
            ("kappa", kappa),
            ("period", period),
        ):
            object.__setattr__(self, name, value)

    def coords(self, s):
        """(omega, delta) at loop fraction s in [0, 1], vectorized."""
        s = np.asarray(s, dtype=float)
        if np.any(s < -1e-12) or np.any(s > 1.0 + 1e-12):
            raise ValidationError("loop fraction s must lie in [0, 1]")
        s = np.clip(s, 0.0, 1.0)
        om0, omm, a = self.omega0, self.omega_m, self.amplitude

        conds = [s < 0.125, s < 0.375, s < 0.625, s < 0.875, s <= 1.0]
        omega = np.select(
            conds,
            [
                np.full_like(s, om0),
                om0 + (omm - om0) * (s - 0.125) * 4.0,
                np.full_like(s, omm),
                omm + (om0 - omm) * (s - 0.625) * 4.0,
                np.full_like(s, om0),
            ],
        )
        delta = np.select(
            conds,
            [
                -a * s * 8.0,
                np.full_like(s, -a),
                -a + 2.0 * a * (s - 0.375) * 4.0,
                np.full_like(s, a),
                a * (1.0 - s) * 8.0,
            ],
        )
        if self.direction == "cw":
            delta = -delta
        return omega, delta

    def params_at(self, t: float) -> SystemParams:
        omega, delta = self.coords(float(t) / self.period)
        return SystemParams(float(delta), float(omega), self.g, self.kappa)

    @property
    def start_params(self) -> SystemParams:
        return SystemParams(0.0, self.omega0, self.g, self.kappa)

    def reversed(self) -> "RectangleLoopSchedule":
        other = "cw" if self.direction == "ccw" else "ccw"
        return RectangleLoopSchedule(
            self.omega0, self.omega_m, self.amplitude, self.g, self.kappa, self.period, other
        )


class EpCount(int):
    """Enclosed-EP count that also remembers when the slice misses the arcs."""

    def __new__(cls, value: int, no_ep_slice: bool = False):
        obj = super().__new__(cls, value)
        obj._no_ep_slice = bool(no_ep_slice)
        return obj

    @property
    def no_ep_slice(self) -> bool:
        return self._no_ep_slice


def enclosed_ep_count(schedule: RectangleLoopSchedule, kappa: float | None = None) -> EpCount:
    """How many exceptional points the rectangle encircles.

    The arcs live in the zero-detuning plane, so the rectangle (which spans
    detuning symmetrically) encloses exactly the crossings of the fixed-g
    slice whose omega falls in [omega0, omega_m].  When the slice misses
    the arcs entirely the count is zero with ``no_ep_slice`` set.
    """
    kappa = schedule.kappa if kappa is None else _require_finite("kappa", kappa)
    crossings = arc_crossings_at_g(schedule.g, kappa)
    if not crossings:
        return EpCount(0, no_ep_slice=True)
    return EpCount(
        sum(1 for c in crossings if schedule.omega0 <= c.omega <= schedule.omega_m)
    )


def _hamiltonian_batch(delta, omega, g: float, kappa: float) -> np.ndarray:
    delta = np.asarray(delta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    h = np.zeros(delta.shape + (3, 3), dtype=complex)
    h[..., 0, 0] = -delta
    h[..., 0, 1] = omega
    h[..., 1, 0] = omega
    h[..., 1, 2] = g
    h[..., 2, 1] = g
    h[..., 2, 2] = -0.5j * kappa
    return h


@dataclass(frozen=True)
class Trajectory:
    """Integration record: sample instants, states, and squared norms."""

    times: np.ndarray
    states: np.ndarray

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)


def _check_psi0(psi0) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (3,):
        raise ValidationError(f"psi0 must have shape (3,), got {psi0.shape}")
    norm = float(np.linalg.norm(psi0))
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"psi0 must be unit norm, got |psi0| = {norm!r}")
    return psi0


def _resolve_time_grid(system, T, dt) -> tuple[float, int]:
    if isinstance(system, RectangleLoopSchedule):
        period = system.period
        if T is not None and not math.isclose(float(T), period, rel_tol=1e-12):
            raise ValidationError(
                f"T={T!r} conflicts with the schedule period {period!r}"
            )
        dt = period / _DEFAULT_STEP_DENOM if dt is None else _require_finite("dt", dt)
        if dt <= 0.0 or dt > period / 1000.0:
            raise ValidationError(
                f"dt must satisfy 0 < dt <= period/1000 for loop schedules, got {dt!r}"
            )
        n = max(1, int(round(period / dt)))
        return period, n
    if isinstance(system, SystemParams):
        if T is None:
            raise ValidationError("T is required when evolving constant parameters")
        T = _require_finite("T", T)
        if T <= 0.0:
            raise ValidationError(f"T must be > 0, got {T!r}")
        dt = T / _DEFAULT_STEP_DENOM if dt is None else _require_finite("dt", dt)
        if dt <= 0.0:
            raise ValidationError(f"dt must be > 0, got {dt!r}")
        return T, max(1, int(round(T / dt)))
    raise ValidationError(
        f"system must be a RectangleLoopSchedule or SystemParams, got {type(system).__name__}"
    )


def evolve(system, psi0, T: float | None = None, dt: float | None = None) -> Trajectory:
    """Integrate i d(psi)/dt = H(t) psi over one traversal or duration T.

    ``system`` is either a RectangleLoopSchedule (T defaults to its period)
    or a constant SystemParams (T required).  The step is fixed; dt is
    rounded to divide T exactly.  The state is never renormalized; with
    kappa >= 0 the true norm cannot grow, so growth beyond 1e-6 raises an
    instability error instead of returning garbage.
    """
    psi0 = _check_psi0(psi0)
    T, n = _resolve_time_grid(system, T, dt)

    if isinstance(system, RectangleLoopSchedule):
        s_nodes = np.linspace(0.0, 1.0, 2 * n + 1)
        omega, delta = system.coords(s_nodes)
        h_nodes = _hamiltonian_batch(delta, omega, system.g, system.kappa)
        h_of = lambda k: h_nodes[k]
    else:
        h_const = build_hamiltonian(system)
        h_of = lambda k: h_const

    step = T / n
    psi = psi0.copy()
    states = np.empty((n + 1, 3), dtype=complex)
    states[0] = psi
    max_norm = 1.0
    for k in range(n):
        h0 = h_of(2 * k)
        h_half = h_of(2 * k + 1)
        h1 = h_of(2 * k + 2)
        k1 = -1j * (h0 @ psi)
        k2 = -1j * (h_half @ (psi + (0.5 * step) * k1))
        k3 = -1j * (h_half @ (psi + (0.5 * step) * k2))
        k4 = -1j * (h1 @ (psi + step * k3))
        psi = psi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = float(np.linalg.norm(psi))
        if norm > max_norm + _NORM_SLACK:
            raise IntegrationUnstableError(
                f"state norm grew to {norm:.6g} at step {k + 1}/{n}; decrease the step size"
            )
        max_norm = max(max_norm, norm)
        states[k + 1] = psi

    return Trajectory(np.linspace(0.0, T, n + 1), states)


def convergence_ratio(system, psi0, T: float | None = None, dt: float | None = None) -> float:
    """Error contraction when the step halves, ideally 2^4 for this scheme.

    Measured as |psi_dt(T) - psi_dt/2(T)| / |psi_dt/2(T) - psi_dt/4(T)|.
    Choose dt so that T/dt is a multiple of 8; the rectangle's corners then
    coincide with step boundaries at every refinement level.
    """
    if dt is None:
        base = system.period if isinstance(system, RectangleLoopSchedule) else T
        if base is None:
            raise ValidationError("T is required when evolving constant parameters")
        dt = base / 2048
    finals = [
        evolve(system, psi0, T=T, dt=dt / (2**k)).final_state for k in range(3)
    ]
    coarse = float(np.linalg.norm(finals[0] - finals[1]))
    fine = float(np.linalg.norm(finals[1] - finals[2]))
    if fine == 0.0:
        raise ValidationError(
            "consecutive refinements coincide; enlarge dt to measure convergence"
        )
    return coarse / fine


def overlaps(psi, params: SystemParams) -> np.ndarray:
    """Fidelities |<r_j|psi>|^2 of a state against the canonical eigenbasis.

    The state is normalized first, so fidelities measure direction only.
    Right eigenvectors are unit norm but mutually non-orthogonal away from
    the Hermitian limit, so the three fidelities need not sum to one.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (3,):
        raise ValidationError(f"psi must have shape (3,), got {psi.shape}")
    norm = float(np.linalg.norm(psi))
    if norm == 0.0:
        raise ValidationError("psi must be nonzero")
    system = eigensystem(params)
    if system.coalesced:
        raise DegenerateEigenbasisError(
            f"eigenbasis is defective at {params!r}; overlaps are undefined"
        )
    psi = psi / norm
    return np.abs(system.right.conj() @ psi) ** 2


def launch_state(params: SystemParams) -> np.ndarray:
    """The canonical second right eigenvector, the encircling launch state.

    At zero detuning outside the all-imaginary lens the middle eigenvalue
    under canonical ordering is the purely imaginary one, making this the
    long-lived branch the transfer experiments start from.
    """
    system = eigensystem(params)
    if system.coalesced:
        raise DegenerateEigenbasisError(
            f"launch state undefined: eigenbasis is defective at {params!r}"
        )
    return system.right[1]


@dataclass(frozen=True)
class FidelityMap:
    """Final-state fidelities over an (omega0, period) grid, one direction.

    ``values[i, j]`` holds the triple (F1, F2, F3) for omega0_grid[i] and
    t_grid[j]; ``ep_count[i]`` is the per-column enclosed-EP count.  Cells
    whose start point is defective stay NaN and are recorded in ``errors``
    as (i, j, message).
    """

    t_grid: np.ndarray
    omega0_grid: np.ndarray
    direction: str
    values: np.ndarray
    ep_count: np.ndarray
    errors: tuple = field(default_factory=tuple)


def fidelity_map(
    g_fixed: float,
    omega_m: float,
    a: float,
    kappa: float,
    t_grid,
    omega0_grid,
    direction: str,
    dt_denominator: int = _DEFAULT_STEP_DENOM,
) -> FidelityMap:
    """Chiral-transfer survey over start position and traversal period.

    Every cell launches the canonical second eigenstate of its own start
    point, traverses its rectangle once in the given direction, and
    projects the final state back on the start eigenbasis.  All cells are
    integrated together in one vectorized fixed-step march over the shared
    loop fraction (each cell keeps its own period scaling).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    omega0_grid = np.asarray(omega0_grid, dtype=float)
    if t_grid.ndim != 1 or omega0_grid.ndim != 1 or not len(t_grid) or not len(omega0_grid):
        raise ValidationError("t_grid and omega0_grid must be nonempty one-dimensional arrays")
    if np.any(omega0_grid >= omega_m):
        raise ValidationError("omega0_grid must lie strictly below omega_m")
    if direction not in ("cw", "ccw"):
        raise ValidationError(f"direction must be 'cw' or 'ccw', got {direction!r}")
    if not isinstance(dt_denominator, (int, np.integer)) or dt_denominator < 1000:
        raise ValidationError(
            f"dt_denominator must be an integer >= 1000, got {dt_denominator!r}"
        )

    n_o, n_t = len(omega0_grid), len(t_grid)
    values = np.full((n_o, n_t, 3), np.nan)
    errors = []
    ep_count = np.empty(n_o, dtype=int)

    basis: dict[int, np.ndarray] = {}
    launches: dict[int, np.ndarray] = {}
    for i, omega0 in enumerate(omega0_grid):
        start = SystemParams(0.0, float(omega0), g_fixed, kappa)
        probe = RectangleLoopSchedule(
            float(omega0), float(omega_m), a, g_fixed, kappa, float(t_grid[0]), direction
        )
        ep_count[i] = int(enclosed_ep_count(probe))
        try:
            system = eigensystem(start)
            if system.coalesced:
                raise DegenerateEigenbasisError(
                    f"defective eigenbasis at omega0={float(omega0)!r}"
                )
            basis[i] = system.right
            launches[i] = system.right[1]
        except DegenerateEigenbasisError as exc:
            for j in range(n_t):
                errors.append((i, j, str(exc)))

    cells = [(i, j) for i in sorted(launches) for j in range(n_t)]
    if cells:
        sign = -1.0 if direction == "ccw" else 1.0
        omega0 = np.array([omega0_grid[i] for i, _ in cells])
        periods = np.array([t_grid[j] for _, j in cells])
        psi = np.array([launches[i] for i, _ in cells], dtype=complex)

        def h_at(s: float) -> np.ndarray:
            if s < 0.125:
                om, de = omega0, np.full_like(omega0, a * s * 8.0)
            elif s < 0.375:
                om = omega0 + (omega_m - omega0) * (s - 0.125) * 4.0
                de = np.full_like(omega0, a)
            elif s < 0.625:
                om = np.full_like(omega0, omega_m)
                de = np.full_like(omega0, a - 2.0 * a * (s - 0.375) * 4.0)
            elif s < 0.875:
                om = omega_m + (omega0 - omega_m) * (s - 0.625) * 4.0
                de = np.full_like(omega0, -a)
            else:
                om, de = omega0, np.full_like(omega0, -a * (1.0 - s) * 8.0)
            return _hamiltonian_batch(sign * de, om, g_fixed, kappa)

        n = int(dt_denominator)
        h = 1.0 / n
        scale = (-1j * periods)[:, None]
        h_right = h_at(0.0)
        for k in range(n):
            h_left, h_mid, h_right = h_right, h_at((k + 0.5) * h), h_at((k + 1.0) * h)
            k1 = scale * np.einsum("mij,mj->mi", h_left, psi)
            k2 = scale * np.einsum("mij,mj->mi", h_mid, psi + (0.5 * h) * k1)
            k3 = scale * np.einsum("mij,mj->mi", h_mid, psi + (0.5 * h) * k2)
            k4 = scale * np.einsum("mij,mj->mi", h_right, psi + h * k3)
            psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        for (i, j), final in zip(cells, psi):
            norm = float(np.linalg.norm(final))
            if not math.isfinite(norm) or norm == 0.0:
                errors.append((i, j, "state decayed below representable norm"))
                continue
            values[i, j] = np.abs(basis[i].conj() @ (final / norm)) ** 2

    return FidelityMap(t_grid, omega0_grid, direction, values, ep_count, tuple(errors))


@dataclass(frozen=True)
class PopulationSeries:
    """Populations along one evolution; the leaked column closes the sum.

    ``p_g0`` is the accumulated photon-loss probability 1 - |psi|^2, so
    p_e + p_f + p_g1 + p_g0 = 1 at every instant and p_g0 never decreases.
    """

    times: np.ndarray
    p_e: np.ndarray
    p_f: np.ndarray
    p_g1: np.ndarray
    p_g0: np.ndarray


def population_dynamics(
    system, psi0, T: float | None = None, dt: float | None = None
) -> PopulationSeries:
    """Level populations along an evolution of a schedule or constant point."""
    trajectory = evolve(system, psi0, T=T, dt=dt)
    probs = np.abs(trajectory.states) ** 2
    return PopulationSeries(
        trajectory.times,
        probs[:, 0],
        probs[:, 1],
        probs[:, 2],
        1.0 - probs.sum(axis=1),
    )

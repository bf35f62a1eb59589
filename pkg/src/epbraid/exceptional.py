"""Phase classification and exceptional-point atlas on the zero-detuning surface.

With delta_ef = 0 the substitution lambda = -i*mu turns the characteristic
polynomial into a real cubic

    mu^3 - (kappa/2) mu^2 + (g^2 + omega^2) mu - kappa omega^2 / 2 = 0,

so the spectrum is purely imaginary exactly when that cubic has three real
roots.  The sign of its real Cardano discriminant therefore splits the
(omega, g) plane into a lens where all eigenvalues are imaginary and an
outer region with one imaginary eigenvalue plus a complex-conjugate-like
pair; the boundary arcs are second-order exceptional points and their cusp
is the third-order one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .params import SystemParams

_ARC_BISECTIONS = 40


class SpectralPhase(enum.IntEnum):
    """Root structure of the zero-detuning spectrum."""

    ALL_IMAGINARY = 0
    EXCEPTIONAL = 1
    COMPLEX_PAIR = 2

    @property
    def label(self) -> str:
        return _PHASE_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "SpectralPhase":
        for phase, name in _PHASE_LABELS.items():
            if name == label:
                return phase
        raise ValidationError(f"unknown phase label {label!r}")


_PHASE_LABELS = {
    SpectralPhase.ALL_IMAGINARY: "AllImaginary",
    SpectralPhase.EXCEPTIONAL: "Exceptional",
    SpectralPhase.COMPLEX_PAIR: "ComplexPair",
}


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise ValidationError(f"kappa must be finite and > 0, got {kappa!r}")
    return kappa


def reduced_cubic_coefficients(omega, g, kappa):
    """Coefficients (b2, b1, b0) of mu^3 + b2 mu^2 + b1 mu + b0 at delta_ef = 0."""
    omega = np.asarray(omega, dtype=float)
    g = np.asarray(g, dtype=float)
    return -0.5 * kappa * np.ones_like(omega * g), g * g + omega * omega, -0.5 * kappa * omega * omega


def reduced_discriminant(omega, g, kappa):
    """Real Cardano discriminant of the mu-cubic, vectorised over omega and g."""
    omega = np.asarray(omega, dtype=float)
    g = np.asarray(g, dtype=float)
    p = g * g + omega * omega - kappa * kappa / 12.0
    q = -(kappa**3) / 108.0 + kappa * g * g / 6.0 - kappa * omega * omega / 3.0
    return (q / 2.0) ** 2 + (p / 3.0) ** 3


def discriminant_tolerance(omega, g, kappa):
    """Zero threshold for the discriminant, scaled like a rate to the sixth power."""
    omega = np.asarray(omega, dtype=float)
    g = np.asarray(g, dtype=float)
    scale = np.maximum(np.maximum(np.abs(omega), np.abs(g)), kappa)
    scale = np.maximum(scale, 1.0)
    return 1e-12 * scale**6


def classify_grid(omega, g, kappa) -> np.ndarray:
    """Vectorised phase codes (int8) for broadcastable omega, g arrays."""
    kappa = _check_kappa(kappa)
    disc = reduced_discriminant(omega, g, kappa)
    eps = discriminant_tolerance(omega, g, kappa)
    return np.where(
        disc < -eps,
        np.int8(SpectralPhase.ALL_IMAGINARY),
        np.where(disc > eps, np.int8(SpectralPhase.COMPLEX_PAIR), np.int8(SpectralPhase.EXCEPTIONAL)),
    )


def classify_phase(omega: float, g: float, kappa: float) -> SpectralPhase:
    """Phase of the zero-detuning spectrum at a single (omega, g, kappa)."""
    kappa = _check_kappa(kappa)
    for name, value in (("omega", omega), ("g", g)):
        if not math.isfinite(float(value)):
            raise ValidationError(f"{name} must be finite, got {value!r}")
    return SpectralPhase(int(classify_grid(float(omega), float(g), kappa)))


class Ep3Location(NamedTuple):
    """Closed-form coordinates of the third-order exceptional point."""

    omega_star: float
    g_star: float
    lambda_star: complex


def ep3_location(kappa: float) -> Ep3Location:
    """Cusp of the exceptional arcs: triple eigenvalue -i*kappa/6.

    The triple-root conditions 3*mu0 = kappa/2, 3*mu0^2 = g^2 + omega^2 and
    mu0^3 = kappa*omega^2/2 pin omega = kappa * 3**-1.5 / 2 and
    g = kappa * (2/3)**1.5 / 2.
    """
    kappa = _check_kappa(kappa)
    omega_star = kappa * 3.0**-1.5 / 2.0
    g_star = kappa * (2.0 / 3.0) ** 1.5 / 2.0
    return Ep3Location(omega_star, g_star, complex(0.0, -kappa / 6.0))


@dataclass(frozen=True)
class IsolatedLine:
    """Exceptional line {omega = 0, g = +-kappa/4} running along all detunings.

    With omega = 0 the bare |e,0> level decouples and the remaining lossy
    block carries a defective double eigenvalue -i*kappa/4 for every
    delta_ef, so the degeneracy forms a line rather than a point.
    """

    omega: float
    g: float
    double_eigenvalue: complex

    def params_at(self, delta_ef: float, kappa: float) -> SystemParams:
        return SystemParams(delta_ef, self.omega, self.g, kappa)


def isolated_exceptional_lines(kappa: float) -> tuple[IsolatedLine, IsolatedLine]:
    kappa = _check_kappa(kappa)
    lam = complex(0.0, -kappa / 4.0)
    return (
        IsolatedLine(0.0, +kappa / 4.0, lam),
        IsolatedLine(0.0, -kappa / 4.0, lam),
    )


def _lens_spine_g(omega: float, kappa: float) -> float:
    """A g value strictly inside the lens for 0 <= omega < cusp omega.

    On the curve g^2 = 2*omega^2 + kappa^2/18 the depressed-cubic q term
    vanishes, so the discriminant reduces to (p/3)^3 which is strictly
    negative below the cusp.  This provides a guaranteed bisection bracket
    splitter between the two arc crossings of a fixed-omega ray.
    """
    return math.sqrt(2.0 * omega * omega + kappa * kappa / 18.0)


def _bisect_arc_crossing(omega: float, kappa: float, lo: float, hi: float) -> float:
    """Bisection of the discriminant in g over a sign-changing bracket."""
    f_lo = float(reduced_discriminant(omega, lo, kappa))
    f_hi = float(reduced_discriminant(omega, hi, kappa))
    for _ in range(_ARC_BISECTIONS):
        mid = 0.5 * (lo + hi)
        f_mid = float(reduced_discriminant(omega, mid, kappa))
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    candidates = [lo, 0.5 * (lo + hi), hi]
    return min(candidates, key=lambda gv: abs(float(reduced_discriminant(omega, gv, kappa))))


def trace_ep2_arcs(kappa: float, n_points: int) -> tuple[np.ndarray, np.ndarray]:
    """Polylines of the two second-order exceptional arcs in the (omega, g) quadrant.

    Each branch is sampled at ``n_points`` evenly spaced omega values from the
    axis to the cusp.  Interior points come from bisecting the discriminant
    along the fixed-omega ray: the ray enters the three-real-root lens once
    and leaves it once, giving one sign change per branch.  The axis
    endpoints (0, 0) and (0, kappa/4) and the shared cusp are exact.
    Returns (lower, upper) arrays of shape (n_points, 2) holding (omega, g).
    """
    kappa = _check_kappa(kappa)
    if not isinstance(n_points, (int, np.integer)) or n_points < 8:
        raise ValidationError(f"n_points must be an integer >= 8, got {n_points!r}")

    omega_star, g_star, _ = ep3_location(kappa)
    omegas = np.linspace(0.0, omega_star, n_points)
    lower = np.empty((n_points, 2))
    upper = np.empty((n_points, 2))
    lower[0] = (0.0, 0.0)
    upper[0] = (0.0, 0.25 * kappa)
    lower[-1] = (omega_star, g_star)
    upper[-1] = (omega_star, g_star)

    for i in range(1, n_points - 1):
        om = float(omegas[i])
        g_mid = _lens_spine_g(om, kappa)
        lower[i] = (om, _bisect_arc_crossing(om, kappa, 1e-12 * kappa, g_mid))
        upper[i] = (om, _bisect_arc_crossing(om, kappa, g_mid, 0.6 * kappa))

    return lower, upper


class ArcCrossing(NamedTuple):
    """One intersection of a fixed-g horizontal slice with an exceptional arc."""

    omega: float
    branch: str


def _double_root_g_squared(mu: float, kappa: float) -> float:
    return kappa * mu - 4.0 * mu * mu + 4.0 * mu**3 / kappa


def _invert_branch(g: float, kappa: float, mu_lo: float, mu_hi: float) -> float:
    """Bisect the double-root mu with g^2 monotone on [mu_lo, mu_hi]."""
    target = g * g
    f_lo = _double_root_g_squared(mu_lo, kappa) - target
    for _ in range(200):
        mid = 0.5 * (mu_lo + mu_hi)
        f_mid = _double_root_g_squared(mid, kappa) - target
        if (f_mid < 0.0) == (f_lo < 0.0):
            mu_lo, f_lo = mid, f_mid
        else:
            mu_hi = mid
    return 0.5 * (mu_lo + mu_hi)


def arc_crossings_at_g(g: float, kappa: float) -> tuple[ArcCrossing, ...]:
    """Omega values where the horizontal line at height g meets the arcs.

    The squared coupling along each arc is monotone in the double root
    (increasing up to the cusp root kappa/6, decreasing beyond), so each
    branch is inverted by bisection.  The lower branch is met for
    0 < g < g_star, the upper branch additionally for g > kappa/4; at
    g = g_star exactly the slice grazes the cusp, reported once.  Results
    are sorted by ascending omega.
    """
    kappa = _check_kappa(kappa)
    if not (isinstance(g, (int, float)) and math.isfinite(g)):
        raise ValidationError(f"g must be finite, got {g!r}")
    g = float(g)
    omega_star, g_star, _ = ep3_location(kappa)
    if g <= 0.0 or g > g_star:
        return ()
    if g == g_star:
        return (ArcCrossing(omega_star, "cusp"),)

    crossings = []
    mu = _invert_branch(g, kappa, 0.0, kappa / 6.0)
    crossings.append(ArcCrossing(math.sqrt(max(0.0, mu * mu - 4.0 * mu**3 / kappa)), "lower"))
    if g > 0.25 * kappa:
        mu = _invert_branch(g, kappa, 0.25 * kappa, kappa / 6.0)
        crossings.append(ArcCrossing(math.sqrt(max(0.0, mu * mu - 4.0 * mu**3 / kappa)), "upper"))
    return tuple(sorted(crossings, key=lambda c: c.omega))


@dataclass(frozen=True)
class PhaseDiagram:
    """Classified grid plus arc overlays for one kappa.

    ``codes[i, j]`` is the phase at (omega_values[i], g_values[j]) as a
    SpectralPhase integer; ``arcs`` holds the (lower, upper) polylines and
    ``ep3`` the cusp.
    """

    kappa: float
    omega_values: np.ndarray
    g_values: np.ndarray
    codes: np.ndarray
    arcs: tuple[np.ndarray, np.ndarray]
    ep3: Ep3Location

    def phase(self, i: int, j: int) -> SpectralPhase:
        return SpectralPhase(int(self.codes[i, j]))

    def count(self, phase: SpectralPhase) -> int:
        return int(np.count_nonzero(self.codes == phase))


def phase_diagram(
    bounds: tuple[tuple[float, float], tuple[float, float]],
    resolution: tuple[int, int],
    kappa: float,
    arc_points: int = 256,
) -> PhaseDiagram:
    """Classify a rectangular (omega, g) grid and attach arcs and cusp."""
    kappa = _check_kappa(kappa)
    (o_lo, o_hi), (g_lo, g_hi) = (
        (float(bounds[0][0]), float(bounds[0][1])),
        (float(bounds[1][0]), float(bounds[1][1])),
    )
    n_omega, n_g = int(resolution[0]), int(resolution[1])
    if n_omega <= 0 or n_g <= 0:
        raise ValidationError(f"resolution must be positive, got {resolution!r}")
    if not (o_lo < o_hi and g_lo < g_hi):
        raise ValidationError(f"empty bounds {bounds!r}")

    omega_values = np.linspace(o_lo, o_hi, n_omega)
    g_values = np.linspace(g_lo, g_hi, n_g)
    codes = classify_grid(omega_values[:, None], g_values[None, :], kappa)
    arcs = trace_ep2_arcs(kappa, arc_points)
    return PhaseDiagram(kappa, omega_values, g_values, codes, arcs, ep3_location(kappa))

"""Control parameters of the driven, dissipative three-level system.

The model lives in the single-excitation basis (|e,0>, |f,0>, |g,1>):
a drive of amplitude ``omega`` couples |e,0> and |f,0> with detuning
``delta_ef``, a coupler of amplitude ``g`` exchanges |f,0> and |g,1>,
and the resonator photon decays at rate ``kappa``.  All four numbers
are angular rates in the same unit; lengths of time are measured in the
inverse of that unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """One point in control-parameter space.

    kappa is a property of the hardware and must be non-negative;
    the three coherent parameters may take either sign.
    """

    delta_ef: float
    omega: float
    g: float
    kappa: float

    def __post_init__(self):
        for name in ("delta_ef", "omega", "g", "kappa"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
        if self.kappa < 0:
            raise ValidationError(f"kappa must be >= 0, got {self.kappa!r}")

    def with_coherent(self, delta_ef=None, omega=None, g=None) -> "SystemParams":
        """Copy with some coherent parameters replaced, kappa untouched."""
        changes = {}
        if delta_ef is not None:
            changes["delta_ef"] = float(delta_ef)
        if omega is not None:
            changes["omega"] = float(omega)
        if g is not None:
            changes["g"] = float(g)
        return replace(self, **changes)

    def scaled(self, factor: float) -> "SystemParams":
        """All rates multiplied by ``factor`` (spectrum scales the same way)."""
        if factor <= 0 or not math.isfinite(factor):
            raise ValidationError(f"scale factor must be positive and finite, got {factor!r}")
        return SystemParams(
            self.delta_ef * factor, self.omega * factor, self.g * factor, self.kappa * factor
        )

    @property
    def rate_scale(self) -> float:
        """Characteristic magnitude used for relative tolerances, >= 1."""
        return max(1.0, abs(self.delta_ef), abs(self.omega), abs(self.g), self.kappa)


def cyclic_to_angular(value: float) -> float:
    """Convert a rate quoted in cycles per time unit to an angular rate."""
    return TWO_PI * value


def angular_to_cyclic(value: float) -> float:
    return value / TWO_PI

"""Closed parameter-space loops built from lines and planar circular arcs.

A ControlLoop is a piecewise path through (delta_ef, omega, g) control space
at fixed kappa, parameterized by s in [0, 1] with an equal share of s per
segment.  Loops must be closed: each segment starts where the previous one
ended and the last returns to the start, which is also the loop's base
point.  Loops serialize to and from plain JSON dictionaries so the command
line can define them in configuration files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .params import SystemParams

_JOIN_TOL = 1e-9


def _as_point(value, name: str) -> tuple[float, float, float]:
    try:
        coords = tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a (delta_ef, omega, g) triple, got {value!r}") from exc
    if len(coords) != 3 or not all(math.isfinite(v) for v in coords):
        raise ValidationError(f"{name} must be three finite numbers, got {value!r}")
    return coords


@dataclass(frozen=True)
class LineSegment:
    """Straight path from start to end in (delta_ef, omega, g) space."""

    start: tuple[float, float, float]
    end: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "start", _as_point(self.start, "start"))
        object.__setattr__(self, "end", _as_point(self.end, "end"))

    @property
    def start_point(self) -> np.ndarray:
        return np.array(self.start)

    @property
    def end_point(self) -> np.ndarray:
        return np.array(self.end)

    def evaluate(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)[..., None]
        return (1.0 - u) * self.start_point + u * self.end_point

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)

    def to_json_dict(self) -> dict:
        return {"type": "line", "start": list(self.start), "end": list(self.end)}


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc in the plane spanned by two orthonormal axes.

    The path is center + radius*(cos(theta)*u_axis + sin(theta)*v_axis)
    with theta running from angle_start through a signed angle_span, so a
    span of +-2*pi traces a full circle.
    """

    center: tuple[float, float, float]
    u_axis: tuple[float, float, float]
    v_axis: tuple[float, float, float]
    radius: float
    angle_start: float
    angle_span: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center, "center"))
        object.__setattr__(self, "u_axis", _as_point(self.u_axis, "u_axis"))
        object.__setattr__(self, "v_axis", _as_point(self.v_axis, "v_axis"))
        for name in ("radius", "angle_start", "angle_span"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.radius <= 0.0:
            raise ValidationError(f"radius must be > 0, got {self.radius!r}")
        u = np.array(self.u_axis)
        v = np.array(self.v_axis)
        if abs(np.linalg.norm(u) - 1.0) > 1e-9 or abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValidationError("arc axes must be unit vectors")
        if abs(float(u @ v)) > 1e-9:
            raise ValidationError("arc axes must be orthogonal")

    @property
    def start_point(self) -> np.ndarray:
        return self.evaluate(0.0)

    @property
    def end_point(self) -> np.ndarray:
        return self.evaluate(1.0)

    def evaluate(self, u) -> np.ndarray:
        theta = self.angle_start + np.asarray(u, dtype=float) * self.angle_span
        cos_t = np.cos(theta)[..., None]
        sin_t = np.sin(theta)[..., None]
        return (
            np.array(self.center)
            + self.radius * (cos_t * np.array(self.u_axis) + sin_t * np.array(self.v_axis))
        )

    def reversed(self) -> "ArcSegment":
        return ArcSegment(
            self.center,
            self.u_axis,
            self.v_axis,
            self.radius,
            self.angle_start + self.angle_span,
            -self.angle_span,
        )

    def to_json_dict(self) -> dict:
        return {
            "type": "arc",
            "center": list(self.center),
            "u_axis": list(self.u_axis),
            "v_axis": list(self.v_axis),
            "radius": self.radius,
            "angle_start": self.angle_start,
            "angle_span": self.angle_span,
        }


Segment = LineSegment | ArcSegment


@dataclass(frozen=True)
class ControlLoop:
    """Closed piecewise path in control space at fixed kappa."""

    segments: tuple[Segment, ...]
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValidationError("a loop needs at least one segment")
        kappa = float(self.kappa)
        if not math.isfinite(kappa) or kappa < 0.0:
            raise ValidationError(f"kappa must be finite and >= 0, got {kappa!r}")
        object.__setattr__(self, "kappa", kappa)
        pts = [seg.start_point for seg in self.segments]
        pts.append(self.segments[-1].end_point)
        scale = max(1.0, max(float(np.max(np.abs(p))) for p in pts))
        for k, seg in enumerate(self.segments[1:], start=1):
            gap = float(np.linalg.norm(seg.start_point - self.segments[k - 1].end_point))
            if gap > _JOIN_TOL * scale:
                raise ValidationError(f"segment {k} starts {gap:g} away from segment {k - 1} end")
        closure = float(np.linalg.norm(pts[-1] - pts[0]))
        if closure > _JOIN_TOL * scale:
            raise ValidationError(f"loop is not closed: endpoint misses start by {closure:g}")

    @property
    def base_point(self) -> SystemParams:
        return self.params(0.0)

    def point(self, s) -> np.ndarray:
        """Control-space coordinates l(s); accepts scalars or arrays in [0, 1]."""
        s_arr = np.asarray(s, dtype=float)
        scalar = s_arr.ndim == 0
        s_arr = np.atleast_1d(s_arr)
        if np.any(s_arr < -1e-12) or np.any(s_arr > 1.0 + 1e-12):
            raise ValidationError("loop parameter s must lie in [0, 1]")
        s_arr = np.clip(s_arr, 0.0, 1.0)
        n = len(self.segments)
        t = s_arr * n
        idx = np.minimum(t.astype(int), n - 1)
        u = t - idx
        out = np.empty(s_arr.shape + (3,))
        for k, seg in enumerate(self.segments):
            mask = idx == k
            if np.any(mask):
                out[mask] = seg.evaluate(u[mask])
        return out[0] if scalar else out

    def params(self, s: float) -> SystemParams:
        d, om, g = self.point(float(s))
        return SystemParams(float(d), float(om), float(g), self.kappa)

    def concat(self, other: "ControlLoop") -> "ControlLoop":
        """Traverse self, then other; both must share base point and kappa."""
        if abs(other.kappa - self.kappa) > 1e-12 * max(1.0, self.kappa):
            raise ValidationError("cannot concatenate loops with different kappa")
        gap = float(np.linalg.norm(other.point(0.0) - self.point(0.0)))
        if gap > _JOIN_TOL * max(1.0, float(np.max(np.abs(self.point(0.0))))):
            raise ValidationError(f"loops share no base point (offset {gap:g})")
        return ControlLoop(self.segments + other.segments, self.kappa)

    def reversed(self) -> "ControlLoop":
        return ControlLoop(tuple(seg.reversed() for seg in reversed(self.segments)), self.kappa)

    def to_json_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "segments": [seg.to_json_dict() for seg in self.segments],
        }


def _segment_from_json(entry: dict) -> list[Segment]:
    if not isinstance(entry, dict) or "type" not in entry:
        raise ValidationError(f"segment entries need a 'type' key, got {entry!r}")
    kind = entry["type"]
    if kind == "line":
        _require_keys(entry, {"type", "start", "end"})
        return [LineSegment(entry["start"], entry["end"])]
    if kind == "arc":
        _require_keys(
            entry, {"type", "center", "u_axis", "v_axis", "radius", "angle_start", "angle_span"}
        )
        return [
            ArcSegment(
                entry["center"],
                entry["u_axis"],
                entry["v_axis"],
                entry["radius"],
                entry["angle_start"],
                entry["angle_span"],
            )
        ]
    if kind == "loop":
        _require_keys(entry, {"type", "segments"})
        nested: list[Segment] = []
        for sub in entry["segments"]:
            nested.extend(_segment_from_json(sub))
        return nested
    raise ValidationError(f"unknown segment type {kind!r}")


def _require_keys(entry: dict, allowed: set) -> None:
    unknown = set(entry) - allowed
    if unknown:
        raise ValidationError(f"unknown keys in segment definition: {sorted(unknown)}")
    missing = allowed - set(entry)
    if missing:
        raise ValidationError(f"missing keys in segment definition: {sorted(missing)}")


def loop_from_json(data: dict) -> ControlLoop:
    """Build a ControlLoop from its JSON dictionary form."""
    if not isinstance(data, dict):
        raise ValidationError(f"loop definition must be an object, got {type(data).__name__}")
    unknown = set(data) - {"kappa", "segments"}
    if unknown:
        raise ValidationError(f"unknown keys in loop definition: {sorted(unknown)}")
    if "kappa" not in data or "segments" not in data:
        raise ValidationError("loop definition needs 'kappa' and 'segments'")
    segments: list[Segment] = []
    for entry in data["segments"]:
        segments.extend(_segment_from_json(entry))
    return ControlLoop(tuple(segments), float(data["kappa"]))

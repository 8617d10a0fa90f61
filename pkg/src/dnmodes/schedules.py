"""Time-dependent scalar control parameters and their first derivatives.

Every time-varying coefficient in the package (spring constants, trap
positions, ramp amplitudes, rotation angles) is a ``ControlSchedule``.
Schedules are immutable after construction and safe to share across threads.
Units are caller-defined natural units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ScheduleDomainError

__all__ = [
    "ControlSchedule",
    "Constant",
    "LinearRamp",
    "Polynomial",
    "Smoothstep",
    "SampledTable",
    "as_schedule",
    "schedule_from_dict",
    "fd_step",
]


def fd_step(t: float) -> float:
    """Central-difference step balancing truncation against round-off."""
    return max(1e-6, 1e-6 * abs(t))


class ControlSchedule:
    """Scalar function of time with a first derivative."""

    def value(self, t: float) -> float:
        raise NotImplementedError

    def derivative(self, t: float) -> float:
        # O(h^2) central-difference fallback for kinds without an analytic form.
        h = fd_step(t)
        return (self.value(t + h) - self.value(t - h)) / (2.0 * h)


@dataclass(frozen=True)
class Constant(ControlSchedule):
    c: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise ConfigError(f"constant schedule value must be finite, got {self.c}")

    def value(self, t: float) -> float:
        return self.c

    def derivative(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class LinearRamp(ControlSchedule):
    """Straight line through (t0, v0) and (t1, v1), unclamped outside [t0, t1]."""

    t0: float
    v0: float
    t1: float
    v1: float

    def __post_init__(self):
        if self.t1 == self.t0:
            raise ConfigError("linear-ramp requires t1 != t0")

    @property
    def slope(self) -> float:
        return (self.v1 - self.v0) / (self.t1 - self.t0)

    def value(self, t: float) -> float:
        return self.v0 + self.slope * (t - self.t0)

    def derivative(self, t: float) -> float:
        return self.slope


@dataclass(frozen=True)
class Polynomial(ControlSchedule):
    """sum_i coeffs[i] * t**i."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ConfigError("polynomial schedule needs at least one coefficient")

    def value(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def derivative(self, t: float) -> float:
        acc = 0.0
        for i in range(len(self.coeffs) - 1, 0, -1):
            acc = acc * t + i * self.coeffs[i]
        return acc


@dataclass(frozen=True)
class Smoothstep(ControlSchedule):
    """Minimal-jerk quintic from v0 to v1 over [t0, t1], held constant outside."""

    v0: float
    v1: float
    t0: float
    t1: float

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise ConfigError("smoothstep requires t1 > t0")

    def value(self, t: float) -> float:
        s = (t - self.t0) / (self.t1 - self.t0)
        s = min(1.0, max(0.0, s))
        return self.v0 + (self.v1 - self.v0) * s * s * s * (10.0 + s * (-15.0 + 6.0 * s))

    def derivative(self, t: float) -> float:
        s = (t - self.t0) / (self.t1 - self.t0)
        if s <= 0.0 or s >= 1.0:
            return 0.0
        ds = s * s * (30.0 + s * (-60.0 + 30.0 * s))
        return (self.v1 - self.v0) * ds / (self.t1 - self.t0)


class SampledTable(ControlSchedule):
    """Tabulated schedule over strictly increasing timestamps.

    ``interpolation="cubic"`` fits a natural cubic spline so the derivative
    is analytic; ``"linear"`` interpolates linearly with a one-sided
    difference at the knots.  Evaluation outside [times[0], times[-1]]
    raises :class:`ScheduleDomainError`.
    """

    def __init__(self, times, values, interpolation="cubic"):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ConfigError("sampled-table needs matching 1-D times and values, length >= 2")
        if not np.all(np.diff(times) > 0):
            raise ConfigError("sampled-table timestamps must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ConfigError("sampled-table entries must be finite")
        if interpolation not in ("cubic", "linear"):
            raise ConfigError(f"unknown interpolation {interpolation!r}")
        self.times = times
        self.values = values
        self.interpolation = interpolation
        if interpolation == "cubic":
            from scipy.interpolate import CubicSpline

            self._spline = CubicSpline(times, values, bc_type="natural")
            self._spline_d = self._spline.derivative()

    def _check_domain(self, t: float) -> None:
        if t < self.times[0] or t > self.times[-1]:
            raise ScheduleDomainError(
                f"t={t} outside table domain [{self.times[0]}, {self.times[-1]}]"
            )

    def value(self, t: float) -> float:
        self._check_domain(t)
        if self.interpolation == "cubic":
            return float(self._spline(t))
        return float(np.interp(t, self.times, self.values))

    def derivative(self, t: float) -> float:
        self._check_domain(t)
        if self.interpolation == "cubic":
            return float(self._spline_d(t))
        # Piecewise-linear: slope of the containing segment, one-sided at knots.
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), len(self.times) - 2)
        return float(
            (self.values[i + 1] - self.values[i]) / (self.times[i + 1] - self.times[i])
        )


def as_schedule(obj) -> ControlSchedule:
    """Coerce a schedule spec (number, dict, or schedule) to a ControlSchedule."""
    if isinstance(obj, ControlSchedule):
        return obj
    if isinstance(obj, (int, float)):
        return Constant(float(obj))
    if isinstance(obj, dict):
        return schedule_from_dict(obj)
    raise ConfigError(f"cannot interpret {obj!r} as a schedule")


_KIND_FIELDS = {
    "constant": {"value"},
    "linear-ramp": {"t0", "v0", "t1", "v1"},
    "polynomial": {"coeffs"},
    "smoothstep": {"v0", "v1", "t0", "t1"},
    "table": {"times", "values", "interpolation"},
}


def schedule_from_dict(obj: dict) -> ControlSchedule:
    """Build a schedule from its JSON object form, rejecting unknown fields."""
    if "kind" not in obj:
        raise ConfigError(f"schedule object missing 'kind': {obj!r}")
    kind = obj["kind"]
    if kind == "sampled-table":
        kind = "table"
    if kind not in _KIND_FIELDS:
        raise ConfigError(f"unknown schedule kind {kind!r}")
    extra = set(obj) - _KIND_FIELDS[kind] - {"kind"}
    if extra:
        raise ConfigError(f"unknown fields {sorted(extra)} for schedule kind {kind!r}")
    try:
        if kind == "constant":
            return Constant(float(obj["value"]))
        if kind == "linear-ramp":
            return LinearRamp(float(obj["t0"]), float(obj["v0"]),
                              float(obj["t1"]), float(obj["v1"]))
        if kind == "polynomial":
            return Polynomial(tuple(obj["coeffs"]))
        if kind == "smoothstep":
            return Smoothstep(float(obj["v0"]), float(obj["v1"]),
                              float(obj["t0"]), float(obj["t1"]))
        return SampledTable(obj["times"], obj["values"],
                            obj.get("interpolation", "cubic"))
    except KeyError as exc:
        raise ConfigError(f"schedule kind {kind!r} missing field {exc}") from exc

"""Harmonically approximated two-coordinate system.

Represents the masses, the time-sliced stiffness matrix

    K(t) = [[k + k1, -k], [-k, k + k2]],

and the moving equilibrium trajectory, and evaluates the lab-frame
Hamiltonian and forces for displacements around that equilibrium.
Purely time-dependent additive energy terms are dropped; they only shift
the overall energy offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .schedules import fd_step

__all__ = ["MassPair", "StiffnessTriple", "PhasePoint", "QuadraticSystem"]


@dataclass(frozen=True)
class MassPair:
    m1: float
    m2: float

    def __post_init__(self):
        for name, m in (("m1", self.m1), ("m2", self.m2)):
            if not (math.isfinite(m) and m > 0):
                raise ConfigError(f"{name} must be positive and finite, got {m}")

    def matrix(self) -> np.ndarray:
        return np.diag([self.m1, self.m2])

    def inverse_matrix(self) -> np.ndarray:
        return np.diag([1.0 / self.m1, 1.0 / self.m2])

    @property
    def sqrt1(self) -> float:
        return math.sqrt(self.m1)

    @property
    def sqrt2(self) -> float:
        return math.sqrt(self.m2)


@dataclass(frozen=True)
class StiffnessTriple:
    """Time-slice values (k, k1, k2); any entry may be negative."""

    k: float
    k1: float
    k2: float

    def __post_init__(self):
        for name, v in (("k", self.k), ("k1", self.k1), ("k2", self.k2)):
            if not math.isfinite(v):
                raise ConfigError(f"stiffness {name} must be finite, got {v}")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.k + self.k1, -self.k], [-self.k, self.k + self.k2]], dtype=float
        )


@dataclass(frozen=True)
class PhasePoint:
    """Phase-space point: lab frame holds (q, p), mode frame holds (Q, P)."""

    t: float
    q: tuple
    p: tuple
    frame: str = "lab"

    def __post_init__(self):
        if self.frame not in ("lab", "mode"):
            raise ConfigError(f"frame must be 'lab' or 'mode', got {self.frame!r}")
        object.__setattr__(self, "q", (float(self.q[0]), float(self.q[1])))
        object.__setattr__(self, "p", (float(self.p[0]), float(self.p[1])))
        if not all(math.isfinite(v) for v in (*self.q, *self.p)):
            raise ConfigError("phase-point components must be finite")

    def state(self) -> np.ndarray:
        return np.array([*self.q, *self.p], dtype=float)


@dataclass
class QuadraticSystem:
    """Masses plus callables giving stiffness and equilibrium along time.

    ``stiffness_rate``, ``equilibrium_velocity``, and ``theta_dot_override``
    are optional analytic fast paths; missing ones fall back to central
    finite differences.  ``full_potential(q1, q2, t)`` is the untruncated
    potential when the builder knows it (used by verification oracles).
    Instances are treated as immutable after construction; all evaluation
    methods are pure.
    """

    masses: MassPair
    stiffness: Callable[[float], StiffnessTriple]
    equilibrium: Callable[[float], tuple]
    equilibrium_velocity: Optional[Callable[[float], tuple]] = None
    stiffness_rate: Optional[Callable[[float], tuple]] = None
    theta_dot_override: Optional[Callable[[float], float]] = None
    larmor_rate: Optional[Callable[[float], float]] = None
    full_potential: Optional[Callable[[float, float, float], float]] = None
    label: str = "custom"
    extras: dict = field(default_factory=dict)

    # -- time-sliced data ---------------------------------------------------

    def stiffness_matrix_at(self, t: float) -> np.ndarray:
        return self.stiffness(t).matrix()

    def stiffness_rate_at(self, t: float) -> tuple:
        """(dk/dt, dk1/dt, dk2/dt), analytic if supplied else O(h^2) FD."""
        if self.stiffness_rate is not None:
            return self.stiffness_rate(t)
        h = fd_step(t)
        a = self.stiffness(t + h)
        b = self.stiffness(t - h)
        return (
            (a.k - b.k) / (2.0 * h),
            (a.k1 - b.k1) / (2.0 * h),
            (a.k2 - b.k2) / (2.0 * h),
        )

    def equilibrium_velocity_at(self, t: float) -> tuple:
        if self.equilibrium_velocity is not None:
            return self.equilibrium_velocity(t)
        h = fd_step(t)
        a = self.equilibrium(t + h)
        b = self.equilibrium(t - h)
        return ((a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h))

    # -- lab-frame evaluation -----------------------------------------------

    def hamiltonian_value(self, x: PhasePoint) -> float:
        """H = p^T M^-1 p / 2 + (q - q0)^T K (q - q0) / 2 at x.t."""
        if x.frame != "lab":
            raise ConfigError("hamiltonian_value expects a lab-frame point")
        q0 = self.equilibrium(x.t)
        dq = np.array([x.q[0] - q0[0], x.q[1] - q0[1]])
        K = self.stiffness_matrix_at(x.t)
        kinetic = 0.5 * (x.p[0] ** 2 / self.masses.m1 + x.p[1] ** 2 / self.masses.m2)
        return float(kinetic + 0.5 * dq @ K @ dq)

    def force_at(self, x: PhasePoint) -> tuple:
        """-K(t) (q - q0(t))."""
        if x.frame != "lab":
            raise ConfigError("force_at expects a lab-frame point")
        q0 = self.equilibrium(x.t)
        dq = np.array([x.q[0] - q0[0], x.q[1] - q0[1]])
        f = -self.stiffness_matrix_at(x.t) @ dq
        return (float(f[0]), float(f[1]))

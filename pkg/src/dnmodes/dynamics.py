"""Fixed-step integration of Hamilton's equations in both frames.

The lab frame integrates qdot = M^-1 p, pdot = -K(t)(q - q0(t)); the mode
frame integrates the effective Hamiltonian including the momentum drive
-(P1,P2) A qdot0 and the rotation coupling -theta_dot * L_z (plus the
optional Larmor compensation terms).  RK4 is the default everywhere;
velocity Verlet is offered for the lab frame only.  All coefficients are
evaluated fresh at every RK stage time so 4th-order accuracy survives
time-dependent schedules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DivergenceError
from .modes import (
    decompose_at,
    effective_hamiltonian_value,
    eigenfrequencies,
    modal_matrix,
    theta_at,
    theta_dot_at,
    to_mode_frame,
)
from .quadratic import PhasePoint, QuadraticSystem
from .schedules import fd_step

__all__ = [
    "IntegratorSpec",
    "Trajectory",
    "FrameEquivalenceReport",
    "EnergyAudit",
    "integrate_lab",
    "integrate_modes",
    "integrate_modes_shifted",
    "frame_equivalence_check",
    "energy_audit",
    "mode_energy_series",
    "write_trajectory_csv",
]

DIVERGENCE_GUARD = 1e12
MAX_SAMPLES = 20_000_000


@dataclass(frozen=True)
class IntegratorSpec:
    dt: float
    t0: float
    t1: float
    method: str = "rk4"

    def __post_init__(self):
        if self.method not in ("rk4", "velocity-verlet"):
            raise ConfigError(f"unknown integrator {self.method!r}")
        if not (self.dt > 0):
            raise ConfigError("dt must be positive")
        if self.t1 <= self.t0:
            raise ConfigError("window must have t1 > t0")
        if (self.t1 - self.t0) / self.dt > MAX_SAMPLES:
            raise ConfigError("window/dt exceeds the sample-count cap")

    @property
    def n_steps(self) -> int:
        return max(1, round((self.t1 - self.t0) / self.dt))


@dataclass
class Trajectory:
    frame: str
    times: np.ndarray
    states: np.ndarray  # shape (N, 4): (q1, q2, p1, p2) or (Q1, Q2, P1, P2)
    step: float
    metadata: dict = field(default_factory=dict)

    def point(self, i: int) -> PhasePoint:
        t = float(self.times[i])
        s = self.states[i]
        return PhasePoint(t=t, q=(s[0], s[1]), p=(s[2], s[3]), frame=self.frame)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class FrameEquivalenceReport:
    max_deviation: float  # normalized by trajectory scale
    scale: float
    lab: Trajectory
    mapped: Trajectory  # lab trajectory expressed in mode coordinates
    modes: Trajectory
    deviations: np.ndarray


@dataclass(frozen=True)
class EnergyAudit:
    times: np.ndarray
    energies: np.ndarray
    max_drift: float  # max |H(t) - H(t0)| / max(1, |H(t0)|)


def _rk4_run(rhs, t0: float, y0: np.ndarray, dt: float, n_steps: int,
             on_step: Optional[Callable[[float], None]] = None):
    """Generic fixed-step RK4 with a divergence guard; returns (times, states)."""
    y = np.asarray(y0, dtype=float).copy()
    times = t0 + dt * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, y.size))
    states[0] = y
    half = 0.5 * dt
    for i in range(n_steps):
        t = times[i]
        k1 = rhs(t, y)
        k2 = rhs(t + half, y + half * k1)
        k3 = rhs(t + half, y + half * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.abs(y) < DIVERGENCE_GUARD):
            raise DivergenceError(
                f"state exceeded {DIVERGENCE_GUARD:g} at t={times[i + 1]}",
                partial=(times[: i + 1], states[: i + 1]),
            )
        states[i + 1] = y
        if on_step is not None:
            on_step(float(times[i + 1]))
    return times, states


def integrate_lab(sys: QuadraticSystem, x0: PhasePoint, spec: IntegratorSpec) -> Trajectory:
    """Integrate the lab-frame equations of motion from x0 over the window."""
    if x0.frame != "lab":
        raise ConfigError("integrate_lab expects a lab-frame initial point")
    m1 = sys.masses.m1
    m2 = sys.masses.m2

    def rhs(t, y):
        q0 = sys.equilibrium(t)
        tr = sys.stiffness(t)
        d1 = y[0] - q0[0]
        d2 = y[1] - q0[1]
        return np.array(
            [
                y[2] / m1,
                y[3] / m2,
                -((tr.k + tr.k1) * d1 - tr.k * d2),
                -(-tr.k * d1 + (tr.k + tr.k2) * d2),
            ]
        )

    meta = {"integrator": spec.method, "preset": sys.label}
    try:
        if spec.method == "velocity-verlet":
            times, states = _verlet_run(sys, x0.state(), spec)
        else:
            times, states = _rk4_run(rhs, spec.t0, x0.state(), spec.dt, spec.n_steps)
    except DivergenceError as exc:
        exc.partial = Trajectory("lab", exc.partial[0], exc.partial[1], spec.dt, meta)
        raise
    return Trajectory("lab", times, states, spec.dt, meta)


def _verlet_run(sys: QuadraticSystem, y0: np.ndarray, spec: IntegratorSpec):
    """Velocity Verlet (kick-drift-kick); lab frame only (separable H)."""
    m = np.array([sys.masses.m1, sys.masses.m2])

    def force(t, q):
        q0 = sys.equilibrium(t)
        tr = sys.stiffness(t)
        d1 = q[0] - q0[0]
        d2 = q[1] - q0[1]
        return np.array(
            [-((tr.k + tr.k1) * d1 - tr.k * d2), -(-tr.k * d1 + (tr.k + tr.k2) * d2)]
        )

    n = spec.n_steps
    dt = spec.dt
    times = spec.t0 + dt * np.arange(n + 1)
    states = np.empty((n + 1, 4))
    q = y0[:2].copy()
    p = y0[2:].copy()
    states[0] = y0
    f = force(times[0], q)
    for i in range(n):
        p_half = p + 0.5 * dt * f
        q = q + dt * p_half / m
        f = force(times[i + 1], q)
        p = p_half + 0.5 * dt * f
        if not (np.all(np.abs(q) < DIVERGENCE_GUARD) and np.all(np.abs(p) < DIVERGENCE_GUARD)):
            raise DivergenceError(
                f"state exceeded {DIVERGENCE_GUARD:g} at t={times[i + 1]}",
                partial=(times[: i + 1], states[: i + 1]),
            )
        states[i + 1, :2] = q
        states[i + 1, 2:] = p
    return times, states


class _ModeCoefficients:
    """Per-stage coefficients of the mode-frame equations, with the theta
    branch threaded sequentially along the time axis."""

    def __init__(self, sys: QuadraticSystem, theta0: Optional[float]):
        self.sys = sys
        self.branch = theta0

    def sync(self, t: float) -> None:
        self.branch = theta_at(self.sys.stiffness(t), self.sys.masses, self.branch)

    def at(self, t: float) -> tuple:
        sys = self.sys
        triple = sys.stiffness(t)
        theta = theta_at(triple, sys.masses, self.branch)
        o1, o2 = eigenfrequencies(triple, sys.masses, theta)
        A, _ = modal_matrix(theta, sys.masses)
        qd = sys.equilibrium_velocity_at(t)
        P0 = A @ np.array(qd)
        return theta, theta_dot_at(sys, t), o1, o2, P0


def integrate_modes(
    sys: QuadraticSystem,
    X0: PhasePoint,
    spec: IntegratorSpec,
    apply_larmor: bool = False,
    lz_coupling: bool = True,
    theta0: Optional[float] = None,
) -> Trajectory:
    """Integrate the effective mode-frame Hamiltonian from X0.

    ``apply_larmor`` adds the compensation terms omega_L^2 (Q1^2+Q2^2)/2 +
    omega_L L_z with omega_L from ``sys.larmor_rate`` (theta_dot when the
    preset supplies none).  ``lz_coupling=False`` drops the -theta_dot L_z
    term; that deliberately breaks frame equivalence for rotating systems
    and exists for verification.
    """
    if X0.frame != "mode":
        raise ConfigError("integrate_modes expects a mode-frame initial point")
    if spec.method != "rk4":
        raise ConfigError("mode-frame integration supports rk4 only")
    coeffs = _ModeCoefficients(sys, theta0)
    coeffs.sync(spec.t0)
    larmor = sys.larmor_rate

    def rhs(t, y):
        _, th_dot, o1, o2, P0 = coeffs.at(t)
        Q1, Q2, P1, P2 = y
        td = th_dot if lz_coupling else 0.0
        dQ1 = P1 - P0[0] + td * Q2
        dQ2 = P2 - P0[1] - td * Q1
        dP1 = -o1 * Q1 + td * P2
        dP2 = -o2 * Q2 - td * P1
        if apply_larmor:
            wL = larmor(t) if larmor is not None else th_dot
            dQ1 -= wL * Q2
            dQ2 += wL * Q1
            dP1 -= wL * wL * Q1 + wL * P2
            dP2 -= wL * wL * Q2 - wL * P1
        return np.array([dQ1, dQ2, dP1, dP2])

    meta = {"integrator": "rk4", "preset": sys.label, "larmor": apply_larmor}
    try:
        times, states = _rk4_run(
            rhs, spec.t0, X0.state(), spec.dt, spec.n_steps, on_step=coeffs.sync
        )
    except DivergenceError as exc:
        exc.partial = Trajectory("mode", exc.partial[0], exc.partial[1], spec.dt, meta)
        raise
    return Trajectory("mode", times, states, spec.dt, meta)


def integrate_modes_shifted(
    sys: QuadraticSystem,
    X0: PhasePoint,
    spec: IntegratorSpec,
    theta0: Optional[float] = None,
) -> Trajectory:
    """Integrate the momentum-shifted Hamiltonian (separable systems).

    Variables are (Q', P') with P' = P - P0; the drive enters as the
    coordinate-linear force -P0dot.  Only meaningful when theta_dot = 0.
    """
    if X0.frame != "mode":
        raise ConfigError("integrate_modes_shifted expects a mode-frame point")
    coeffs = _ModeCoefficients(sys, theta0)
    coeffs.sync(spec.t0)

    def p0(t):
        th = theta_at(sys.stiffness(t), sys.masses, coeffs.branch)
        A, _ = modal_matrix(th, sys.masses)
        return A @ np.array(sys.equilibrium_velocity_at(t))

    def rhs(t, y):
        _, _, o1, o2, _ = coeffs.at(t)
        h = fd_step(t)
        P0_dot = (p0(t + h) - p0(t - h)) / (2.0 * h)
        return np.array(
            [y[2], y[3], -o1 * y[0] - P0_dot[0], -o2 * y[1] - P0_dot[1]]
        )

    meta = {"integrator": "rk4", "preset": sys.label, "shifted": True}
    times, states = _rk4_run(
        rhs, spec.t0, X0.state(), spec.dt, spec.n_steps, on_step=coeffs.sync
    )
    return Trajectory("mode", times, states, spec.dt, meta)


def map_to_mode_frame(sys: QuadraticSystem, traj: Trajectory) -> Trajectory:
    """Express a lab trajectory in mode coordinates, threading the theta branch."""
    if traj.frame != "lab":
        raise ConfigError("map_to_mode_frame expects a lab trajectory")
    states = np.empty_like(traj.states)
    branch = None
    for i, t in enumerate(traj.times):
        dec = decompose_at(sys, float(t), branch_ref=branch)
        branch = dec.theta
        x = to_mode_frame(dec, traj.point(i), sys)
        states[i] = x.state()
    return Trajectory("mode", traj.times.copy(), states, traj.step, dict(traj.metadata))


def frame_equivalence_check(
    sys: QuadraticSystem,
    x0_lab: PhasePoint,
    spec: IntegratorSpec,
    lz_coupling: bool = True,
) -> FrameEquivalenceReport:
    """Integrate in the lab, map to mode coordinates, and compare against a
    direct mode-frame integration from the mapped initial condition."""
    lab = integrate_lab(sys, x0_lab, spec)
    mapped = map_to_mode_frame(sys, lab)
    X0 = mapped.point(0)
    theta0 = decompose_at(sys, spec.t0).theta
    modes = integrate_modes(sys, X0, spec, lz_coupling=lz_coupling, theta0=theta0)
    diffs = np.linalg.norm(mapped.states - modes.states, axis=1)
    scale = float(np.linalg.norm(mapped.states, axis=1).max())
    max_dev = float(diffs.max() / max(scale, 1e-300))
    return FrameEquivalenceReport(
        max_deviation=max_dev,
        scale=scale,
        lab=lab,
        mapped=mapped,
        modes=modes,
        deviations=diffs,
    )


def energy_audit(traj: Trajectory, sys: QuadraticSystem) -> EnergyAudit:
    """Per-sample Hamiltonian values along a trajectory (H or Htil by frame)."""
    energies = np.empty(len(traj))
    branch = None
    for i in range(len(traj)):
        x = traj.point(i)
        if traj.frame == "lab":
            energies[i] = sys.hamiltonian_value(x)
        else:
            dec = decompose_at(sys, x.t, branch_ref=branch)
            branch = dec.theta
            energies[i] = effective_hamiltonian_value(dec, sys, x)
    drift = float(np.abs(energies - energies[0]).max() / max(1.0, abs(energies[0])))
    return EnergyAudit(times=traj.times.copy(), energies=energies, max_drift=drift)


def mode_energy_series(
    traj: Trajectory, sys: QuadraticSystem, compensated: bool = False
) -> np.ndarray:
    """Per-mode energies (P_i^2 + W_i Q_i^2)/2 along a mode trajectory.

    With ``compensated`` the squared frequencies include the Larmor term,
    W_i = Omega_i^2 + omega_L^2.
    """
    if traj.frame != "mode":
        raise ConfigError("mode_energy_series expects a mode trajectory")
    out = np.empty((len(traj), 2))
    branch = None
    for i, t in enumerate(traj.times):
        t = float(t)
        triple = sys.stiffness(t)
        branch = theta_at(triple, sys.masses, branch)
        o1, o2 = eigenfrequencies(triple, sys.masses, branch)
        if compensated:
            wL = sys.larmor_rate(t) if sys.larmor_rate is not None else theta_dot_at(sys, t)
            o1 += wL * wL
            o2 += wL * wL
        Q1, Q2, P1, P2 = traj.states[i]
        out[i, 0] = 0.5 * (P1 * P1 + o1 * Q1 * Q1)
        out[i, 1] = 0.5 * (P2 * P2 + o2 * Q2 * Q2)
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export with 17-significant-digit floats for bit-faithful round-trips."""
    if traj.frame == "lab":
        header = "t,q1,q2,p1,p2,frame"
    else:
        header = "t,Q1,Q2,P1,P2,frame"
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for i in range(len(traj)):
            row = [_fmt(traj.times[i])] + [_fmt(v) for v in traj.states[i]]
            fh.write(",".join(row) + f",{traj.frame}\n")

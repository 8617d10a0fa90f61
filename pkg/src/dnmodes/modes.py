"""Dynamical normal-mode decomposition of a 2x2 quadratic system.

The mass-weighted stiffness Ktil = M^(-1/2) K M^(-1/2) is diagonalized by a
rotation through the mode angle theta,

    tan(2 theta) = 2 k sqrt(m1 m2) / (m1 (k + k2) - m2 (k + k1)),

yielding squared mode frequencies (Omega1^2, Omega2^2) and the modal matrix
A = O^T M^(1/2) that maps lab displacements to mode coordinates
Q = A (q - q0) with momenta P = A^(-T) p.  The modes decouple exactly when
theta is constant in time; a nonzero theta_dot couples them through an
angular-momentum-like term -theta_dot * (Q1 P2 - Q2 P1).

Mode labels follow branch continuity in theta (nearest multiple of pi/2 to
the caller-supplied reference), never frequency sorting, so that frequency
crossings do not masquerade as frame rotations.  The default branch is
theta in (-pi/4, pi/4].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, ZeroFrequencyError
from .quadratic import MassPair, PhasePoint, QuadraticSystem, StiffnessTriple
from .schedules import fd_step

__all__ = [
    "ModeDecomposition",
    "SeparabilityReport",
    "EllipseGeometry",
    "MomentumShift",
    "mass_weighted_stiffness",
    "theta_at",
    "eigenfrequencies",
    "modal_matrix",
    "theta_dot_at",
    "decompose_at",
    "to_mode_frame",
    "from_mode_frame",
    "effective_hamiltonian_value",
    "momentum_shift",
    "classify_separability",
    "ellipse_at",
]

# Relative threshold below which the tan(2 theta) numerator and denominator
# count as degenerate (any rotation diagonalizes).
EPS_DEGENERATE = 1e-12


@dataclass(frozen=True)
class ModeDecomposition:
    t: float
    theta: float
    theta_dot: float
    omega1_sq: float
    omega2_sq: float
    A: np.ndarray
    A_inv: np.ndarray


@dataclass(frozen=True)
class SeparabilityReport:
    window: tuple
    max_abs_theta_dot: float
    separable: bool
    theta_samples: tuple
    stability: str  # "both-stable" | "transiently-unstable"
    analytic_case: Optional[str] = None


@dataclass(frozen=True)
class EllipseGeometry:
    center: tuple
    orientation: float
    radii: tuple  # entries are None where Omega_i^2 <= 0


@dataclass(frozen=True)
class MomentumShift:
    point: PhasePoint
    P0: tuple
    P0_dot: tuple
    centers: Optional[tuple]


def _triple_from_matrix(K) -> tuple:
    """(k, k1, k2) from an assembled 2x2 symmetric stiffness matrix."""
    K = np.asarray(K, dtype=float)
    k = -0.5 * (K[0, 1] + K[1, 0])
    return k, K[0, 0] - k, K[1, 1] - k


def _as_triple(K) -> tuple:
    if isinstance(K, StiffnessTriple):
        return K.k, K.k1, K.k2
    return _triple_from_matrix(K)


def mass_weighted_stiffness(K, masses: MassPair) -> np.ndarray:
    """Ktil = M^(-1/2) K M^(-1/2)."""
    k, k1, k2 = _as_triple(K)
    off = -k / math.sqrt(masses.m1 * masses.m2)
    return np.array(
        [[(k + k1) / masses.m1, off], [off, (k + k2) / masses.m2]], dtype=float
    )


def _theta_num_den(K, masses: MassPair) -> tuple:
    k, k1, k2 = _as_triple(K)
    num = 2.0 * k * math.sqrt(masses.m1 * masses.m2)
    den = masses.m1 * (k + k2) - masses.m2 * (k + k1)
    scale = (masses.m1 + masses.m2) * (abs(k) + abs(k1) + abs(k2))
    return num, den, scale


def _snap_branch(theta: float, branch_ref: Optional[float]) -> float:
    """Shift theta by a multiple of pi/2 to the requested branch."""
    half = 0.5 * math.pi
    if branch_ref is None:
        # Default branch (-pi/4, pi/4]; the degenerate-denominator value
        # -pi/4 (from atan2 sign conventions) is kept as is.
        if theta > 0.25 * math.pi:
            theta -= half
        elif theta < -0.25 * math.pi:
            theta += half
        return theta
    return theta + half * round((branch_ref - theta) / half)


def theta_at(K, masses: MassPair, branch_ref: Optional[float] = None) -> float:
    """Mode angle; branch-continuous against branch_ref when given."""
    num, den, scale = _theta_num_den(K, masses)
    if math.hypot(num, den) <= EPS_DEGENERATE * scale:
        # Degenerate mass-weighted stiffness: any angle diagonalizes.
        return 0.0 if branch_ref is None else branch_ref
    return _snap_branch(0.5 * math.atan2(num, den), branch_ref)


def eigenfrequencies(K, masses: MassPair, theta: float) -> tuple:
    """(Omega1^2, Omega2^2) for the mode labels fixed by theta."""
    k, k1, k2 = _as_triple(K)
    a = (k + k1) / masses.m1
    b = (k + k2) / masses.m2
    cross = k / math.sqrt(masses.m1 * masses.m2)
    c = math.cos(theta)
    s = math.sin(theta)
    s2 = math.sin(2.0 * theta)
    omega1_sq = a * c * c + b * s * s - cross * s2
    omega2_sq = a * s * s + b * c * c + cross * s2
    return omega1_sq, omega2_sq


def modal_matrix(theta: float, masses: MassPair) -> tuple:
    """(A, A_inv) with A = O^T M^(1/2); det A = sqrt(m1 m2) always."""
    c = math.cos(theta)
    s = math.sin(theta)
    r1 = masses.sqrt1
    r2 = masses.sqrt2
    A = np.array([[r1 * c, r2 * s], [-r1 * s, r2 * c]])
    A_inv = np.array([[c / r1, -s / r1], [s / r2, c / r2]])
    return A, A_inv


def theta_dot_at(sys: QuadraticSystem, t: float, method: str = "auto") -> float:
    """Rate of the mode angle.

    ``auto`` prefers a preset-supplied closed form, then the chain rule on
    the atan2 expression (needs stiffness rates), then a central finite
    difference of the unwrapped angle.
    """
    if method not in ("auto", "analytic", "fd"):
        raise ConfigError(f"unknown theta_dot method {method!r}")
    if method in ("auto",) and sys.theta_dot_override is not None:
        return sys.theta_dot_override(t)
    if method in ("auto", "analytic"):
        num, den, scale = _theta_num_den(sys.stiffness(t), sys.masses)
        dk, dk1, dk2 = sys.stiffness_rate_at(t)
        num_dot = 2.0 * dk * math.sqrt(sys.masses.m1 * sys.masses.m2)
        den_dot = sys.masses.m1 * (dk + dk2) - sys.masses.m2 * (dk + dk1)
        denom = num * num + den * den
        if denom > (EPS_DEGENERATE * scale) ** 2:
            return 0.5 * (num_dot * den - num * den_dot) / denom
        if method == "analytic":
            return 0.0
    h = fd_step(t)
    th0 = theta_at(sys.stiffness(t), sys.masses)
    thm = theta_at(sys.stiffness(t - h), sys.masses, branch_ref=th0)
    thp = theta_at(sys.stiffness(t + h), sys.masses, branch_ref=th0)
    return (thp - thm) / (2.0 * h)


def decompose_at(
    sys: QuadraticSystem, t: float, branch_ref: Optional[float] = None
) -> ModeDecomposition:
    triple = sys.stiffness(t)
    theta = theta_at(triple, sys.masses, branch_ref)
    o1, o2 = eigenfrequencies(triple, sys.masses, theta)
    A, A_inv = modal_matrix(theta, sys.masses)
    return ModeDecomposition(
        t=t,
        theta=theta,
        theta_dot=theta_dot_at(sys, t),
        omega1_sq=o1,
        omega2_sq=o2,
        A=A,
        A_inv=A_inv,
    )


def to_mode_frame(dec: ModeDecomposition, x: PhasePoint, sys: QuadraticSystem) -> PhasePoint:
    """Q = A (q - q0); P = A^(-T) p."""
    if x.frame != "lab":
        raise ConfigError("to_mode_frame expects a lab-frame point")
    q0 = sys.equilibrium(x.t)
    dq = np.array([x.q[0] - q0[0], x.q[1] - q0[1]])
    Q = dec.A @ dq
    P = dec.A_inv.T @ np.array(x.p)
    return PhasePoint(t=x.t, q=tuple(Q), p=tuple(P), frame="mode")


def from_mode_frame(dec: ModeDecomposition, x: PhasePoint, sys: QuadraticSystem) -> PhasePoint:
    """Exact inverse of :func:`to_mode_frame`."""
    if x.frame != "mode":
        raise ConfigError("from_mode_frame expects a mode-frame point")
    q0 = sys.equilibrium(x.t)
    q = dec.A_inv @ np.array(x.q) + np.array(q0)
    p = dec.A.T @ np.array(x.p)
    return PhasePoint(t=x.t, q=tuple(q), p=tuple(p), frame="lab")


def effective_hamiltonian_value(
    dec: ModeDecomposition, sys: QuadraticSystem, x: PhasePoint
) -> float:
    """Mode-frame Hamiltonian including both inertial terms.

    Htil = sum_i (P_i^2 + Omega_i^2 Q_i^2)/2 - (P1,P2) A qdot0
           - theta_dot (Q1 P2 - Q2 P1)
    """
    if x.frame != "mode":
        raise ConfigError("effective_hamiltonian_value expects a mode-frame point")
    Q1, Q2 = x.q
    P1, P2 = x.p
    qdot0 = sys.equilibrium_velocity_at(x.t)
    drive = dec.A @ np.array(qdot0)
    return float(
        0.5 * (P1 * P1 + P2 * P2 + dec.omega1_sq * Q1 * Q1 + dec.omega2_sq * Q2 * Q2)
        - (P1 * drive[0] + P2 * drive[1])
        - dec.theta_dot * (Q1 * P2 - Q2 * P1)
    )


def momentum_shift(
    dec: ModeDecomposition,
    sys: QuadraticSystem,
    x: PhasePoint,
    with_centers: bool = True,
) -> MomentumShift:
    """Shift P by P0 = A qdot0, turning the momentum drive into displaced centers.

    Centers are -P0dot_i / Omega_i^2; requesting them with a zero squared
    frequency raises :class:`ZeroFrequencyError`.
    """
    if x.frame != "mode":
        raise ConfigError("momentum_shift expects a mode-frame point")

    def p0(t: float) -> np.ndarray:
        th = theta_at(sys.stiffness(t), sys.masses, branch_ref=dec.theta)
        A, _ = modal_matrix(th, sys.masses)
        return A @ np.array(sys.equilibrium_velocity_at(t))

    P0 = p0(x.t)
    h = fd_step(x.t)
    P0_dot = (p0(x.t + h) - p0(x.t - h)) / (2.0 * h)
    shifted = PhasePoint(
        t=x.t, q=x.q, p=(x.p[0] - P0[0], x.p[1] - P0[1]), frame="mode"
    )
    centers = None
    if with_centers:
        if dec.omega1_sq == 0.0 or dec.omega2_sq == 0.0:
            raise ZeroFrequencyError(
                "displaced-oscillator centers undefined at zero squared frequency"
            )
        centers = (-P0_dot[0] / dec.omega1_sq, -P0_dot[1] / dec.omega2_sq)
    return MomentumShift(
        point=shifted, P0=tuple(P0), P0_dot=tuple(P0_dot), centers=centers
    )


def _detect_analytic_case(sys: QuadraticSystem, times) -> Optional[str]:
    """Name the sufficient decoupling condition if one visibly applies."""
    triples = [sys.stiffness(t) for t in times]
    scale = max(
        max(abs(tr.k), abs(tr.k1), abs(tr.k2)) for tr in triples
    )
    if scale == 0.0:
        return "k=0"
    tol = 1e-9 * scale
    if all(abs(tr.k) <= tol for tr in triples):
        return "k=0"
    if sys.masses.m1 == sys.masses.m2 and all(
        abs(tr.k1 - tr.k2) <= tol for tr in triples
    ):
        return "k1=k2, m1=m2"
    if all(abs(tr.k) > tol for tr in triples):
        c1s = [tr.k1 / tr.k for tr in triples]
        c2s = [tr.k2 / tr.k for tr in triples]
        span1 = max(c1s) - min(c1s)
        span2 = max(c2s) - min(c2s)
        cscale = max(1.0, max(abs(c) for c in c1s + c2s))
        if span1 <= 1e-9 * cscale and span2 <= 1e-9 * cscale:
            if abs(c1s[0] - 1.0) <= 1e-9 and abs(c2s[0] - 1.0) <= 1e-9:
                return "k1=k2=k"
            return "k1=c1*k, k2=c2*k"
    return None


def classify_separability(
    sys: QuadraticSystem,
    window: tuple,
    n_samples: int = 200,
    tol_sep: float = 1e-9,
) -> SeparabilityReport:
    """Sample theta over the window and decide separability from max |theta_dot|."""
    if n_samples < 2:
        raise ConfigError("classify_separability needs n_samples >= 2")
    t0, t1 = window
    times = np.linspace(t0, t1, n_samples)
    theta_samples = []
    branch = None
    max_rate = 0.0
    stable = True
    for t in times:
        triple = sys.stiffness(t)
        branch = theta_at(triple, sys.masses, branch_ref=branch)
        theta_samples.append((float(t), branch))
        o1, o2 = eigenfrequencies(triple, sys.masses, branch)
        if o1 <= 0.0 or o2 <= 0.0:
            stable = False
        max_rate = max(max_rate, abs(theta_dot_at(sys, float(t))))
    return SeparabilityReport(
        window=(t0, t1),
        max_abs_theta_dot=max_rate,
        separable=max_rate <= tol_sep,
        theta_samples=tuple(theta_samples),
        stability="both-stable" if stable else "transiently-unstable",
        analytic_case=_detect_analytic_case(sys, times),
    )


def ellipse_at(dec: ModeDecomposition, sys: QuadraticSystem, t: float) -> EllipseGeometry:
    """Iso-potential ellipse of the mass-weighted stiffness at time t."""
    radii = tuple(
        1.0 / math.sqrt(o) if o > 0.0 else None
        for o in (dec.omega1_sq, dec.omega2_sq)
    )
    return EllipseGeometry(
        center=tuple(sys.equilibrium(t)), orientation=dec.theta, radii=radii
    )

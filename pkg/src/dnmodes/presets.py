"""Scenario builders: stiffness triples plus equilibrium trajectories.

Five trapped-ion control scenarios and a two-mass spring system, each
returning a :class:`QuadraticSystem` whose closed-form equilibrium zeroes
the gradient of the full (untruncated) potential and whose stiffness triple
equals its Hessian there.  The Coulomb constant Cc is a dimensionless
caller-supplied number (natural units), default 1.

Throughout the ion scenarios the ordering q1 > q2 is enforced (strong
Coulomb repulsion keeps the ions from swapping).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    ConfigError,
    FormulaDiscrepancyWarning,
    PresetDomainError,
    SingularConfigurationError,
)
from .quadratic import MassPair, QuadraticSystem, StiffnessTriple
from .rootfind import solve_positive_root
from .schedules import ControlSchedule, as_schedule

__all__ = [
    "TransportConfig",
    "SeparationConfig",
    "PhaseGateConfig",
    "RotationConfig",
    "SpringsConfig",
    "CustomConfig",
    "build_transport",
    "build_separation",
    "build_phase_gate",
    "build_phase_gate_zeroth_order",
    "build_rotation",
    "build_springs",
    "build_custom",
    "build_preset",
    "preset_config_from_dict",
    "separability_condition_separation",
    "solve_separation_distance",
    "solve_phase_gate_distance",
    "phase_gate_equilibria_closed_form",
    "phase_gate_q0_published",
    "audit_phase_gate_formulas",
    "SeparationRampCheck",
    "PhaseGateAudit",
]


def _masses(obj) -> MassPair:
    if isinstance(obj, MassPair):
        return obj
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return MassPair(float(obj[0]), float(obj[1]))
    raise ConfigError(f"masses must be a (m1, m2) pair, got {obj!r}")


# ---------------------------------------------------------------------------
# Transport / expansion: common trap spring k(t), moving trap center Q0(t),
# two ions coupled by Coulomb repulsion.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransportConfig:
    k: ControlSchedule
    Q0: ControlSchedule
    Cc: float = 1.0
    masses: MassPair = field(default_factory=lambda: MassPair(1.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "k", as_schedule(self.k))
        object.__setattr__(self, "Q0", as_schedule(self.Q0))
        object.__setattr__(self, "masses", _masses(self.masses))
        if not (self.Cc > 0):
            raise ConfigError("Cc must be positive")


def build_transport(cfg: TransportConfig) -> QuadraticSystem:
    """U = k(t)/2 * sum_i (q_i - Q0)^2 + Cc/(q1 - q2).

    Equilibrium distance q0 = (2 Cc / k)^(1/3); the stiffness triple is
    (k, k, k), so theta is constant for any masses and any k(t).
    """
    Cc = cfg.Cc

    def k_at(t: float) -> float:
        k = cfg.k.value(t)
        if k <= 0.0:
            raise PresetDomainError(f"transport requires k(t) > 0, got k({t}) = {k}")
        return k

    def q0_at(t: float) -> float:
        return (2.0 * Cc / k_at(t)) ** (1.0 / 3.0)

    def equilibrium(t: float) -> tuple:
        Q0 = cfg.Q0.value(t)
        half = 0.5 * q0_at(t)
        return (Q0 + half, Q0 - half)

    def equilibrium_velocity(t: float) -> tuple:
        k = k_at(t)
        v = cfg.Q0.derivative(t)
        q0dot = -(1.0 / 3.0) * (2.0 * Cc) ** (1.0 / 3.0) * k ** (-4.0 / 3.0) * cfg.k.derivative(t)
        return (v + 0.5 * q0dot, v - 0.5 * q0dot)

    def stiffness(t: float) -> StiffnessTriple:
        k = k_at(t)
        return StiffnessTriple(k, k, k)

    def stiffness_rate(t: float) -> tuple:
        kd = cfg.k.derivative(t)
        return (kd, kd, kd)

    def full_potential(q1: float, q2: float, t: float) -> float:
        k = k_at(t)
        Q0 = cfg.Q0.value(t)
        return 0.5 * k * ((q1 - Q0) ** 2 + (q2 - Q0) ** 2) + Cc / (q1 - q2)

    return QuadraticSystem(
        masses=cfg.masses,
        stiffness=stiffness,
        stiffness_rate=stiffness_rate,
        equilibrium=equilibrium,
        equilibrium_velocity=equilibrium_velocity,
        theta_dot_override=lambda t: 0.0,
        full_potential=full_potential,
        label="transport",
    )


# ---------------------------------------------------------------------------
# Separation / recombination: quartic-plus-harmonic external potential.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationConfig:
    alpha: ControlSchedule
    beta: ControlSchedule
    Cc: float = 1.0
    masses: MassPair = field(default_factory=lambda: MassPair(1.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_schedule(self.alpha))
        object.__setattr__(self, "beta", as_schedule(self.beta))
        object.__setattr__(self, "masses", _masses(self.masses))
        if not (self.Cc > 0):
            raise ConfigError("Cc must be positive")


def _quintic_bracket(alpha: float, beta: float, Cc: float) -> float:
    estimates = [1.0]
    if alpha > 0.0:
        estimates.append((Cc / alpha) ** (1.0 / 3.0))
    if beta > 0.0:
        estimates.append((2.0 * Cc / beta) ** (1.0 / 5.0))
    q_max = 10.0 * max(estimates)
    if alpha < 0.0 and beta > 0.0:
        # Double-well regime: the outer root sits near sqrt(2|alpha|/beta),
        # which can exceed the Coulomb-balance estimates above.
        q_max = max(q_max, 10.0 * math.sqrt(2.0 * abs(alpha) / beta))
    return q_max


def solve_separation_distance(
    alpha: float, beta: float, Cc: float, guess: Optional[float] = None
) -> float:
    """Positive root of the equilibrium quintic beta q^5 + 2 alpha q^3 - 2 Cc."""

    def f(q: float) -> float:
        return beta * q**5 + 2.0 * alpha * q**3 - 2.0 * Cc

    def fp(q: float) -> float:
        return 5.0 * beta * q**4 + 6.0 * alpha * q**2

    return solve_positive_root(f, fp, _quintic_bracket(alpha, beta, Cc), guess=guess)


def build_separation(cfg: SeparationConfig) -> QuadraticSystem:
    """U = alpha (q1^2 + q2^2) + beta (q1^4 + q2^4) + Cc/(q1 - q2).

    Equilibria are +-q0/2 with q0 the positive quintic root; q0dot comes
    from implicit differentiation.  Root continuity is tracked against the
    previous evaluation, so a time series must be evaluated sequentially.
    """
    Cc = cfg.Cc
    cache = {"q0": None}

    def q0_at(t: float) -> float:
        q0 = solve_separation_distance(
            cfg.alpha.value(t), cfg.beta.value(t), Cc, guess=cache["q0"]
        )
        cache["q0"] = q0
        return q0

    def q0_dot_at(t: float, q0: float) -> float:
        denom = 5.0 * cfg.beta.value(t) * q0**4 + 6.0 * cfg.alpha.value(t) * q0**2
        if denom == 0.0:
            raise SingularConfigurationError(
                f"singular point: implicit-derivative denominator vanishes at t={t}"
            )
        return -(q0**5 * cfg.beta.derivative(t) + 2.0 * q0**3 * cfg.alpha.derivative(t)) / denom

    def equilibrium(t: float) -> tuple:
        half = 0.5 * q0_at(t)
        return (half, -half)

    def equilibrium_velocity(t: float) -> tuple:
        q0 = q0_at(t)
        half = 0.5 * q0_dot_at(t, q0)
        return (half, -half)

    def stiffness(t: float) -> StiffnessTriple:
        q0 = q0_at(t)
        k1 = 2.0 * cfg.alpha.value(t) + 3.0 * cfg.beta.value(t) * q0**2
        return StiffnessTriple(2.0 * Cc / q0**3, k1, k1)

    def stiffness_rate(t: float) -> tuple:
        q0 = q0_at(t)
        q0dot = q0_dot_at(t, q0)
        kd = -6.0 * Cc * q0dot / q0**4
        k1d = (
            2.0 * cfg.alpha.derivative(t)
            + 3.0 * cfg.beta.derivative(t) * q0**2
            + 6.0 * cfg.beta.value(t) * q0 * q0dot
        )
        return (kd, k1d, k1d)

    def full_potential(q1: float, q2: float, t: float) -> float:
        a = cfg.alpha.value(t)
        b = cfg.beta.value(t)
        return a * (q1**2 + q2**2) + b * (q1**4 + q2**4) + Cc / (q1 - q2)

    return QuadraticSystem(
        masses=cfg.masses,
        stiffness=stiffness,
        stiffness_rate=stiffness_rate,
        equilibrium=equilibrium,
        equilibrium_velocity=equilibrium_velocity,
        full_potential=full_potential,
        label="separation",
    )


@dataclass(frozen=True)
class SeparationRampCheck:
    holds: bool
    max_rel_deviation: float
    ratio_samples: tuple


def separability_condition_separation(
    alpha,
    beta,
    window: tuple,
    n_samples: int = 200,
    tol_cond: float = 1e-9,
    Cc: float = 1.0,
) -> SeparationRampCheck:
    """Check the decoupling constraint beta^3/alpha^5 = const over the window.

    Also cross-checks that beta*q0^5 and alpha*q0^3 stay constant, which is
    the equivalent statement through the equilibrium distance.
    """
    alpha = as_schedule(alpha)
    beta = as_schedule(beta)
    t0, t1 = window
    ratios = []
    products = []
    guess = None
    for i in range(n_samples):
        t = t0 + (t1 - t0) * i / (n_samples - 1)
        a = alpha.value(t)
        b = beta.value(t)
        if a == 0.0:
            raise PresetDomainError("separability condition needs alpha != 0 on the window")
        ratios.append(b**3 / a**5)
        q0 = solve_separation_distance(a, b, Cc, guess=guess)
        guess = q0
        products.append((b * q0**5, a * q0**3))

    def rel_span(vals) -> float:
        lo, hi = min(vals), max(vals)
        scale = max(abs(lo), abs(hi), 1e-300)
        return (hi - lo) / scale

    dev = max(
        rel_span(ratios),
        rel_span([p[0] for p in products]) if any(p[0] != 0.0 for p in products) else 0.0,
        rel_span([p[1] for p in products]),
    )
    return SeparationRampCheck(
        holds=dev <= tol_cond, max_rel_deviation=dev, ratio_samples=tuple(ratios)
    )


# ---------------------------------------------------------------------------
# Phase gate: static trap k0, state-dependent forces F1(t), F2(t).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseGateConfig:
    k0: float
    F1: ControlSchedule
    F2: ControlSchedule
    Cc: float = 1.0
    masses: MassPair = field(default_factory=lambda: MassPair(1.0, 1.0))
    zeroth_order: bool = False

    def __post_init__(self):
        object.__setattr__(self, "F1", as_schedule(self.F1))
        object.__setattr__(self, "F2", as_schedule(self.F2))
        object.__setattr__(self, "masses", _masses(self.masses))
        if not (self.k0 > 0):
            raise ConfigError("k0 must be positive")
        if not (self.Cc > 0):
            raise ConfigError("Cc must be positive")


def solve_phase_gate_distance(
    F1: float, F2: float, k0: float, Cc: float, guess: Optional[float] = None
) -> float:
    """Positive root of the equilibrium cubic k0 q^3 + (F1 - F2) q^2 - 2 Cc."""
    d = F1 - F2

    def f(q: float) -> float:
        return k0 * q**3 + d * q**2 - 2.0 * Cc

    def fp(q: float) -> float:
        return 3.0 * k0 * q**2 + 2.0 * d * q

    q_max = 10.0 * (1.0 + (2.0 * Cc / k0) ** (1.0 / 3.0) + abs(d) / k0)
    return solve_positive_root(f, fp, q_max, guess=guess)


def _phase_gate_B_delta(F1: float, F2: float, k0: float, Cc: float) -> tuple:
    d = F1 - F2
    radicand = 3.0 * Cc * k0**14 * (-2.0 * d**3 + 27.0 * Cc * k0**2)
    if radicand < 0.0:
        raise PresetDomainError(
            "published closed-form equilibria undefined (negative radicand)"
        )
    delta = (-(d**3) * k0**6 + 27.0 * Cc * k0**8 + 3.0 * math.sqrt(radicand)) ** (1.0 / 3.0)
    B = d**2 * k0**4 + delta**2
    return B, delta


def phase_gate_equilibria_closed_form(F1: float, F2: float, k0: float, Cc: float) -> tuple:
    """(q1, q2) from the published per-ion closed forms."""
    B, delta = _phase_gate_B_delta(F1, F2, k0, Cc)
    q1 = (B - 2.0 * k0**2 * delta * (F2 + 2.0 * F1)) / (6.0 * k0**3 * delta)
    q2 = (-B - 2.0 * k0**2 * delta * (F1 + 2.0 * F2)) / (6.0 * k0**3 * delta)
    return q1, q2


def phase_gate_q0_published(F1: float, F2: float, k0: float, Cc: float) -> float:
    """The combined q0 line as printed in the source formulas.

    Inconsistent with the per-ion forms whenever F1 + F2 != F2 - F1; kept
    verbatim so the audit can flag it.
    """
    B, delta = _phase_gate_B_delta(F1, F2, k0, Cc)
    return (2.0 * B - 2.0 * k0**2 * delta * (F1 + F2)) / (6.0 * k0**3 * delta)


@dataclass(frozen=True)
class PhaseGateAudit:
    q0_root: float
    q0_from_individual: float
    q0_published: float
    individual_consistent: bool
    published_consistent: bool


def audit_phase_gate_formulas(
    F1: float, F2: float, k0: float, Cc: float, rel_tol: float = 1e-8
) -> PhaseGateAudit:
    """Compare the root-solved q0 against both published closed forms.

    Emits :class:`FormulaDiscrepancyWarning` when the combined published q0
    line disagrees with the authoritative root solve.
    """
    q0 = solve_phase_gate_distance(F1, F2, k0, Cc)
    q1c, q2c = phase_gate_equilibria_closed_form(F1, F2, k0, Cc)
    q0_pub = phase_gate_q0_published(F1, F2, k0, Cc)
    ind_ok = abs((q1c - q2c) - q0) <= rel_tol * abs(q0)
    pub_ok = abs(q0_pub - q0) <= rel_tol * abs(q0)
    if not pub_ok:
        warnings.warn(
            f"combined q0 closed form ({q0_pub}) disagrees with root solve ({q0}) "
            f"for F1={F1}, F2={F2}, k0={k0}, Cc={Cc}",
            FormulaDiscrepancyWarning,
            stacklevel=2,
        )
    return PhaseGateAudit(
        q0_root=q0,
        q0_from_individual=q1c - q2c,
        q0_published=q0_pub,
        individual_consistent=ind_ok,
        published_consistent=pub_ok,
    )


def build_phase_gate(cfg: PhaseGateConfig) -> QuadraticSystem:
    """U = k0 (q1^2 + q2^2)/2 + Cc/(q1 - q2) + F1 q1 + F2 q2.

    The equilibrium root solve is authoritative; the published closed forms
    are evaluated alongside and a :class:`FormulaDiscrepancyWarning` fires
    if the per-ion forms drift beyond 1e-8 relative.
    """
    if cfg.zeroth_order:
        return build_phase_gate_zeroth_order(cfg)
    k0 = cfg.k0
    Cc = cfg.Cc
    cache = {"q0": None}

    def q0_at(t: float) -> float:
        F1 = cfg.F1.value(t)
        F2 = cfg.F2.value(t)
        q0 = solve_phase_gate_distance(F1, F2, k0, Cc, guess=cache["q0"])
        cache["q0"] = q0
        try:
            q1c, q2c = phase_gate_equilibria_closed_form(F1, F2, k0, Cc)
            if abs((q1c - q2c) - q0) > 1e-8 * abs(q0):
                warnings.warn(
                    f"per-ion closed-form equilibria disagree with root solve at t={t}: "
                    f"closed form q0={q1c - q2c}, root q0={q0}",
                    FormulaDiscrepancyWarning,
                    stacklevel=2,
                )
        except PresetDomainError:
            pass  # closed form undefined here; root solve stands alone
        return q0

    def q0_dot_at(t: float, q0: float) -> float:
        d = cfg.F1.value(t) - cfg.F2.value(t)
        dd = cfg.F1.derivative(t) - cfg.F2.derivative(t)
        denom = 3.0 * k0 * q0**2 + 2.0 * d * q0
        if denom == 0.0:
            raise SingularConfigurationError(
                f"singular point: cubic derivative vanishes at t={t}"
            )
        return -(q0**2) * dd / denom

    def center_at(t: float) -> float:
        return -0.5 * (cfg.F1.value(t) + cfg.F2.value(t)) / k0

    def equilibrium(t: float) -> tuple:
        c = center_at(t)
        half = 0.5 * q0_at(t)
        return (c + half, c - half)

    def equilibrium_velocity(t: float) -> tuple:
        q0 = q0_at(t)
        cdot = -0.5 * (cfg.F1.derivative(t) + cfg.F2.derivative(t)) / k0
        half = 0.5 * q0_dot_at(t, q0)
        return (cdot + half, cdot - half)

    def stiffness(t: float) -> StiffnessTriple:
        return StiffnessTriple(2.0 * Cc / q0_at(t) ** 3, k0, k0)

    def stiffness_rate(t: float) -> tuple:
        q0 = q0_at(t)
        kd = -6.0 * Cc * q0_dot_at(t, q0) / q0**4
        return (kd, 0.0, 0.0)

    def full_potential(q1: float, q2: float, t: float) -> float:
        return (
            0.5 * k0 * (q1**2 + q2**2)
            + Cc / (q1 - q2)
            + cfg.F1.value(t) * q1
            + cfg.F2.value(t) * q2
        )

    return QuadraticSystem(
        masses=cfg.masses,
        stiffness=stiffness,
        stiffness_rate=stiffness_rate,
        equilibrium=equilibrium,
        equilibrium_velocity=equilibrium_velocity,
        full_potential=full_potential,
        label="phase-gate",
    )


def build_phase_gate_zeroth_order(cfg: PhaseGateConfig) -> QuadraticSystem:
    """Static modes of the force-free two-ion system.

    Forces are dropped from the quadratic model (all stiffness coefficients
    become equal to k0 and the equilibria freeze at +-(Cc/4k0)^(1/3)); the
    time-dependent forces re-enter only as a linear term, exposed in mode
    coordinates through ``extras["mode_force"]``.
    """
    from .modes import modal_matrix, theta_at  # local import to avoid a cycle

    k0 = cfg.k0
    Cc = cfg.Cc
    half = (Cc / (4.0 * k0)) ** (1.0 / 3.0)
    triple = StiffnessTriple(k0, k0, k0)
    theta = theta_at(triple, cfg.masses)
    _, A_inv = modal_matrix(theta, cfg.masses)

    def mode_force(t: float) -> tuple:
        # Coefficients of (Q1, Q2) in F1*q1 + F2*q2 after q = q0 + A^-1 Q.
        F1 = cfg.F1.value(t)
        F2 = cfg.F2.value(t)
        return (
            F1 * A_inv[0, 0] + F2 * A_inv[1, 0],
            F1 * A_inv[0, 1] + F2 * A_inv[1, 1],
        )

    def full_potential(q1: float, q2: float, t: float) -> float:
        return 0.5 * k0 * (q1**2 + q2**2) + Cc / (q1 - q2)

    return QuadraticSystem(
        masses=cfg.masses,
        stiffness=lambda t: triple,
        stiffness_rate=lambda t: (0.0, 0.0, 0.0),
        equilibrium=lambda t: (half, -half),
        equilibrium_velocity=lambda t: (0.0, 0.0),
        theta_dot_override=lambda t: 0.0,
        full_potential=full_potential,
        label="phase-gate-zeroth-order",
        extras={"mode_force": mode_force, "theta": theta},
    )


# ---------------------------------------------------------------------------
# Rotating anisotropic 2D trap for a single ion.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RotationConfig:
    m: float
    omega1: float
    omega2: float
    phi: ControlSchedule
    larmor_compensation: bool = False

    def __post_init__(self):
        object.__setattr__(self, "phi", as_schedule(self.phi))
        if not (self.m > 0):
            raise ConfigError("m must be positive")


def build_rotation(cfg: RotationConfig) -> QuadraticSystem:
    """Anisotropic oscillator with principal axes rotated by phi(t).

    Already quadratic: equilibria sit at the origin and theta = phi (up to
    mode-label branch).  ``larmor_rate`` carries the compensation schedule
    omega_L(t) = phidot(t); it is exposed as data, applied by the mode
    integrator only on request.
    """
    m = cfg.m
    w1sq = cfg.omega1**2
    w2sq = cfg.omega2**2

    def triple_at(t: float) -> StiffnessTriple:
        phi = cfg.phi.value(t)
        c = math.cos(phi)
        s = math.sin(phi)
        k = -0.5 * m * (w1sq - w2sq) * math.sin(2.0 * phi)
        k1 = m * (w1sq * c * c + w2sq * s * s) - k
        k2 = m * (w1sq * s * s + w2sq * c * c) - k
        return StiffnessTriple(k, k1, k2)

    def stiffness_rate(t: float) -> tuple:
        phi = cfg.phi.value(t)
        phidot = cfg.phi.derivative(t)
        dk = -m * (w1sq - w2sq) * math.cos(2.0 * phi) * phidot
        # d/dphi [w1^2 cos^2 + w2^2 sin^2] = (w2^2 - w1^2) sin(2 phi)
        dk1 = m * (w2sq - w1sq) * math.sin(2.0 * phi) * phidot - dk
        dk2 = m * (w1sq - w2sq) * math.sin(2.0 * phi) * phidot - dk
        return (dk, dk1, dk2)

    def full_potential(q1: float, q2: float, t: float) -> float:
        phi = cfg.phi.value(t)
        c = math.cos(phi)
        s = math.sin(phi)
        u1 = q1 * c + q2 * s
        u2 = -q1 * s + q2 * c
        return 0.5 * m * (w1sq * u1 * u1 + w2sq * u2 * u2)

    extras = {}
    if cfg.omega1 == cfg.omega2:
        extras["trivially_decoupled"] = True
    if cfg.larmor_compensation:
        extras["compensated_frequencies"] = lambda t: (
            math.sqrt(w1sq + cfg.phi.derivative(t) ** 2),
            math.sqrt(w2sq + cfg.phi.derivative(t) ** 2),
        )

    return QuadraticSystem(
        masses=MassPair(m, m),
        stiffness=triple_at,
        stiffness_rate=stiffness_rate,
        equilibrium=lambda t: (0.0, 0.0),
        equilibrium_velocity=lambda t: (0.0, 0.0),
        theta_dot_override=cfg.phi.derivative,
        larmor_rate=cfg.phi.derivative,
        full_potential=full_potential,
        label="rotation",
        extras=extras,
    )


# ---------------------------------------------------------------------------
# Two masses between walls, three springs with time-dependent stiffness.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpringsConfig:
    k: ControlSchedule
    k1: ControlSchedule
    k2: ControlSchedule
    d: float
    masses: MassPair = field(default_factory=lambda: MassPair(1.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "k", as_schedule(self.k))
        object.__setattr__(self, "k1", as_schedule(self.k1))
        object.__setattr__(self, "k2", as_schedule(self.k2))
        object.__setattr__(self, "masses", _masses(self.masses))
        if not (self.d > 0):
            raise ConfigError("wall separation d must be positive")


def build_springs(cfg: SpringsConfig) -> QuadraticSystem:
    """U = k1 q1^2/2 + k2 (d - q2)^2/2 + k (q2 - q1)^2/2.

    Equilibria q1 = q0 k/k1, q2 = q1 + q0 with
    q0 = d k1 k2 / (k1 k2 + k (k1 + k2)); derivatives by the chain rule.
    """
    d = cfg.d

    def parts(t: float) -> tuple:
        k = cfg.k.value(t)
        k1 = cfg.k1.value(t)
        k2 = cfg.k2.value(t)
        D = k1 * k2 + k * (k1 + k2)
        if D == 0.0:
            raise SingularConfigurationError(
                f"singular spring configuration at t={t}: k1 k2 + k (k1 + k2) = 0"
            )
        if k1 == 0.0:
            raise SingularConfigurationError(
                f"singular spring configuration at t={t}: k1 = 0"
            )
        return k, k1, k2, D

    def equilibrium(t: float) -> tuple:
        k, k1, k2, D = parts(t)
        q0 = d * k1 * k2 / D
        q1 = q0 * k / k1
        return (q1, q1 + q0)

    def equilibrium_velocity(t: float) -> tuple:
        k, k1, k2, D = parts(t)
        kd = cfg.k.derivative(t)
        k1d = cfg.k1.derivative(t)
        k2d = cfg.k2.derivative(t)
        q0 = d * k1 * k2 / D
        Dd = k1d * k2 + k1 * k2d + kd * (k1 + k2) + k * (k1d + k2d)
        q0d = d * ((k1d * k2 + k1 * k2d) * D - k1 * k2 * Dd) / (D * D)
        q1d = q0d * k / k1 + q0 * (kd * k1 - k * k1d) / (k1 * k1)
        return (q1d, q1d + q0d)

    def stiffness(t: float) -> StiffnessTriple:
        k, k1, k2, _ = parts(t)
        return StiffnessTriple(k, k1, k2)

    def stiffness_rate(t: float) -> tuple:
        return (cfg.k.derivative(t), cfg.k1.derivative(t), cfg.k2.derivative(t))

    def full_potential(q1: float, q2: float, t: float) -> float:
        k, k1, k2, _ = parts(t)
        return 0.5 * k1 * q1**2 + 0.5 * k2 * (d - q2) ** 2 + 0.5 * k * (q2 - q1) ** 2

    return QuadraticSystem(
        masses=cfg.masses,
        stiffness=stiffness,
        stiffness_rate=stiffness_rate,
        equilibrium=equilibrium,
        equilibrium_velocity=equilibrium_velocity,
        full_potential=full_potential,
        label="springs",
    )


# ---------------------------------------------------------------------------
# Raw-schedule system, mainly for the CLI.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CustomConfig:
    k: ControlSchedule
    k1: ControlSchedule
    k2: ControlSchedule
    masses: MassPair = field(default_factory=lambda: MassPair(1.0, 1.0))
    q1_eq: ControlSchedule = 0.0
    q2_eq: ControlSchedule = 0.0

    def __post_init__(self):
        for name in ("k", "k1", "k2", "q1_eq", "q2_eq"):
            object.__setattr__(self, name, as_schedule(getattr(self, name)))
        object.__setattr__(self, "masses", _masses(self.masses))


def build_custom(cfg: CustomConfig) -> QuadraticSystem:
    return QuadraticSystem(
        masses=cfg.masses,
        stiffness=lambda t: StiffnessTriple(
            cfg.k.value(t), cfg.k1.value(t), cfg.k2.value(t)
        ),
        stiffness_rate=lambda t: (
            cfg.k.derivative(t),
            cfg.k1.derivative(t),
            cfg.k2.derivative(t),
        ),
        equilibrium=lambda t: (cfg.q1_eq.value(t), cfg.q2_eq.value(t)),
        equilibrium_velocity=lambda t: (
            cfg.q1_eq.derivative(t),
            cfg.q2_eq.derivative(t),
        ),
        label="custom",
    )


# ---------------------------------------------------------------------------
# Tagged-union dispatch (CLI config payload).
# ---------------------------------------------------------------------------

_PRESET_FIELDS = {
    "transport": {"k", "Q0", "Cc", "masses"},
    "separation": {"alpha", "beta", "Cc", "masses"},
    "phase-gate": {"k0", "F1", "F2", "Cc", "masses", "zeroth_order"},
    "rotation": {"m", "omega1", "omega2", "phi", "larmor_compensation"},
    "springs": {"k", "k1", "k2", "d", "masses"},
    "custom": {"k", "k1", "k2", "masses", "q1_eq", "q2_eq"},
}


def preset_config_from_dict(obj: dict):
    """Typed config from the tagged JSON object; unknown fields are rejected."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError("preset must be an object with a 'type' tag")
    kind = obj["type"]
    if kind not in _PRESET_FIELDS:
        raise ConfigError(f"unknown preset type {kind!r}")
    extra = set(obj) - _PRESET_FIELDS[kind] - {"type"}
    if extra:
        raise ConfigError(f"unknown fields {sorted(extra)} for preset {kind!r}")
    kwargs = {key: obj[key] for key in obj if key != "type"}
    try:
        if kind == "transport":
            return TransportConfig(**kwargs)
        if kind == "separation":
            return SeparationConfig(**kwargs)
        if kind == "phase-gate":
            return PhaseGateConfig(**kwargs)
        if kind == "rotation":
            return RotationConfig(**kwargs)
        if kind == "springs":
            return SpringsConfig(**kwargs)
        return CustomConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad preset parameters for {kind!r}: {exc}") from exc


def build_preset(obj) -> QuadraticSystem:
    """Build a QuadraticSystem from a typed config or its dict form."""
    if isinstance(obj, dict):
        obj = preset_config_from_dict(obj)
    if isinstance(obj, TransportConfig):
        return build_transport(obj)
    if isinstance(obj, SeparationConfig):
        return build_separation(obj)
    if isinstance(obj, PhaseGateConfig):
        return build_phase_gate(obj)
    if isinstance(obj, RotationConfig):
        return build_rotation(obj)
    if isinstance(obj, SpringsConfig):
        return build_springs(obj)
    if isinstance(obj, CustomConfig):
        return build_custom(obj)
    raise ConfigError(f"cannot build a preset from {obj!r}")

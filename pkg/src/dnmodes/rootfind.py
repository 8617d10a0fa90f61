"""Bracketed scalar root finding: bisection with Newton refinement.

Used by the presets for the equilibrium-distance quintic and cubic.  The
scan collects every sign change on a grid over (0, q_max]; the caller picks
a branch by passing the previous root as ``guess`` (continuity), otherwise
the largest positive root is returned.
"""

from __future__ import annotations

import math

from .errors import PresetDomainError

__all__ = ["bisect_root", "newton_refine", "positive_roots", "solve_positive_root"]


def bisect_root(f, a: float, b: float, tol: float = 1e-15, maxiter: int = 200) -> float:
    """Plain bisection on [a, b]; requires a sign change."""
    fa = f(a)
    fb = f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise PresetDomainError(f"no sign change on [{a}, {b}]")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) < tol * max(1.0, abs(m)):
            return m
        if fa * fm < 0.0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def newton_refine(f, fprime, x: float, a: float, b: float, maxiter: int = 50) -> float:
    """Newton iterations from x, falling back to bisection on [a, b] when a
    step leaves the bracket or the derivative vanishes."""
    fa = f(a)
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0.0:
            return x
        if fa * fx < 0.0:
            b = x
        else:
            a, fa = x, fx
        d = fprime(x)
        if d != 0.0:
            step = fx / d
            x_new = x - step
        else:
            x_new = math.nan
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) <= 1e-16 * max(1.0, abs(x_new)):
            return x_new
        x = x_new
    return x


def positive_roots(f, fprime, q_max: float, n_scan: int = 512) -> list:
    """All roots of f on (0, q_max], found by grid sign-change scanning."""
    eps = 1e-12 * max(1.0, q_max)
    roots = []
    xs = [eps + (q_max - eps) * i / n_scan for i in range(n_scan + 1)]
    fs = [f(x) for x in xs]
    for i in range(n_scan):
        if fs[i] == 0.0:
            roots.append(xs[i])
        elif fs[i] * fs[i + 1] < 0.0:
            x0 = bisect_root(f, xs[i], xs[i + 1], tol=1e-10)
            roots.append(newton_refine(f, fprime, x0, xs[i], xs[i + 1]))
    if fs[-1] == 0.0:
        roots.append(xs[-1])
    return roots


def _refine_near_guess(f, fprime, guess: float, q_max: float) -> float | None:
    """Cheap continuation: bracket locally around the previous root and refine,
    skipping the full scan.  Returns None when no nearby sign change exists."""
    if not 0.0 < guess <= q_max:
        return None
    for half_width in (0.05, 0.2):
        radius = half_width * max(guess, 1e-6)
        a = max(1e-12 * max(1.0, q_max), guess - radius)
        b = min(q_max, guess + radius)
        if a < b and f(a) * f(b) < 0.0:
            return newton_refine(f, fprime, guess, a, b)
    return None


def solve_positive_root(f, fprime, q_max: float, guess: float | None = None) -> float:
    """The physical positive root: nearest to ``guess`` when given, else largest."""
    if guess is not None:
        root = _refine_near_guess(f, fprime, guess, q_max)
        if root is not None:
            return root
    roots = positive_roots(f, fprime, q_max)
    if not roots:
        raise PresetDomainError("no positive root in the scanned bracket")
    if guess is not None:
        return min(roots, key=lambda r: abs(r - guess))
    return max(roots)

"""Special functions and the density root solver behind the analytic bounds.

The analytic outage chain reduces to one scalar equation: find the pair
density ``lam`` such that the regularized lower incomplete gamma function

    q(lam) = gammainc(n, lam * pi * omega) = epsilon

where ``n`` is the nearest-neighbour order and ``omega`` aggregates all
channel/threshold moments.  This module owns that equation: the gamma
function family, the forward map ``op_lb_approx``, and a Newton iteration
with a bisection safeguard to invert it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _sp

__all__ = [
    "ConvergenceError",
    "SolverConfig",
    "DensitySolve",
    "gamma_fn",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "op_lb_approx",
    "initial_density_guess",
    "solve_gamma_cdf_density",
    "newton_raphson_density",
]

# Newton steps whose gamma argument exceeds this are handed to bisection;
# exp(t) overflows float64 near t = 709 and the iterate is useless there.
_MAX_GAMMA_ARG = 500.0

_BISECTION_MAX_HALVINGS = 500
_BRACKET_MAX_DOUBLINGS = 200


class ConvergenceError(RuntimeError):
    """Density solve failed to reach the requested residual tolerance."""

    def __init__(self, message: str, last_iterate: float, residual: float,
                 iterations: int):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule for the density solve.

    ``abs_tolerance`` applies to the residual |q(lam) - target|, which is the
    quantity the caller actually cares about.  ``min_density`` floors the
    iterate whenever a Newton step overshoots below zero.
    """

    max_iterations: int = 50
    abs_tolerance: float = 1e-10
    min_density: float = 1e-12

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.abs_tolerance <= 0.0:
            raise ValueError("abs_tolerance must be > 0")
        if self.min_density <= 0.0:
            raise ValueError("min_density must be > 0")


@dataclass(frozen=True)
class DensitySolve:
    """Result of a density solve.

    ``convexity_warning`` flags converged solutions that sit outside the
    region where the gamma CDF is convex in its second argument
    (order - 1 > lam * pi * omega); the Jensen step behind ``op_lb_approx``
    is only justified inside that region, so the flag is advisory rather
    than an error.
    """

    density: float
    iterations: int
    residual: float
    converged: bool
    used_bisection: bool
    convexity_warning: bool


def gamma_fn(a: float) -> float:
    """Gamma function for positive real argument."""
    if a <= 0.0:
        raise ValueError(f"gamma_fn requires a > 0, got {a}")
    return float(_sp.gamma(a))


def lower_incomplete_gamma(a: float, x: float) -> float:
    """Lower incomplete gamma integral (unnormalized)."""
    if a <= 0.0:
        raise ValueError(f"lower_incomplete_gamma requires a > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    return float(_sp.gammainc(a, x) * _sp.gamma(a))


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Upper incomplete gamma integral (unnormalized)."""
    if a <= 0.0:
        raise ValueError(f"upper_incomplete_gamma requires a > 0, got {a}")
    if x < 0.0:
        raise ValueError(f"upper_incomplete_gamma requires x >= 0, got {x}")
    return float(_sp.gammaincc(a, x) * _sp.gamma(a))


def op_lb_approx(lam, n, omega):
    """Outage lower-bound approximation gammainc(n, lam * pi * omega).

    This is the regularized gamma CDF evaluated at the aggregated moment
    constant ``omega``; it equals the CDF of the ``n``-th nearest point of
    a planar Poisson process of intensity ``lam`` evaluated at squared
    radius ``omega``.  Accepts scalars or numpy arrays in ``lam``.

    Parameters
    ----------
    lam : float or ndarray
        Density per unit area, >= 0.
    n : float
        Nearest-neighbour order (l/2 + 1 for the paired full-duplex chain,
        l + 1 for the half-duplex chain), > 0.
    omega : float
        Aggregated moment constant, > 0.
    """
    import numpy as np

    if n <= 0.0:
        raise ValueError(f"op_lb_approx requires n > 0, got {n}")
    if omega <= 0.0:
        raise ValueError(f"op_lb_approx requires omega > 0, got {omega}")
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr < 0.0):
        raise ValueError("op_lb_approx requires lam >= 0")
    out = _sp.gammainc(n, lam_arr * math.pi * omega)
    return float(out) if np.ndim(lam) == 0 else out


def initial_density_guess(omega: float, order: float, target: float) -> float:
    """Closed-form starting point for the density solve.

    Obtained by keeping the leading term of the power-series expansion of
    the gamma CDF: (lam*pi*omega)^a / (Gamma(a) * a) = target, hence

        lam0 = (target * Gamma(a) * a)^(1/a) / (pi * omega).
    """
    return (target * gamma_fn(order) * order) ** (1.0 / order) / (math.pi * omega)


def _cdf(order: float, t: float) -> float:
    return float(_sp.gammainc(order, t))


def solve_gamma_cdf_density(omega: float, order: float, target: float,
                            cfg: SolverConfig | None = None) -> DensitySolve:
    """Solve gammainc(order, lam * pi * omega) = target for lam > 0.

    Newton iteration in closed form with a bisection safeguard.  Writing
    t = lam * pi * omega, the Newton step

        lam <- lam - (q(lam) - target) / q'(lam)
          = lam + lam * e^t * t^(-order) * (Gamma(order, t)
                                            + (target - 1) * Gamma(order))

    is the standard update; the second form is how it is evaluated here
    (the two are algebraically identical, which the test suite cross-checks
    against a plain finite-difference Newton).  If Newton fails to converge
    within ``cfg.max_iterations`` the solve falls back to bisection on a
    bracket grown from the initial guess, which cannot fail for a monotone
    CDF, so the returned residual always satisfies the tolerance in
    practice.
    """
    if cfg is None:
        cfg = SolverConfig()
    if omega <= 0.0:
        raise ValueError(f"density solve requires omega > 0, got {omega}")
    if order <= 0.0:
        raise ValueError(f"density solve requires order > 0, got {order}")
    if not 0.0 < target < 1.0:
        raise ValueError(f"density solve requires target in (0, 1), got {target}")

    pi_omega = math.pi * omega
    lgam = math.lgamma(order)

    lam = max(initial_density_guess(omega, order, target), cfg.min_density)
    iterations = 0
    residual = abs(_cdf(order, lam * pi_omega) - target)
    newton_ok = residual <= cfg.abs_tolerance

    while not newton_ok and iterations < cfg.max_iterations:
        t = lam * pi_omega
        if t > _MAX_GAMMA_ARG:
            break
        p = _cdf(order, t)
        # lam * Gamma(order) * e^t * t^(-order) * (p - target), in log form
        # to keep the prefactor finite for small t.
        log_factor = lgam + t - order * math.log(t)
        if log_factor > 700.0:
            break
        lam = lam - lam * math.exp(log_factor) * (p - target)
        if lam <= 0.0:
            lam = cfg.min_density
        iterations += 1
        residual = abs(_cdf(order, lam * pi_omega) - target)
        if residual <= cfg.abs_tolerance:
            newton_ok = True

    used_bisection = False
    if not newton_ok:
        used_bisection = True
        lam, iterations, residual = _bisect_density(
            pi_omega, order, target, cfg, iterations)

    converged = residual <= cfg.abs_tolerance
    if not converged:
        raise ConvergenceError(
            f"density solve stalled at lam={lam!r} with residual={residual!r}",
            last_iterate=lam, residual=residual, iterations=iterations)

    convexity_warning = (order - 1.0) > lam * pi_omega
    return DensitySolve(density=lam, iterations=iterations, residual=residual,
                        converged=True, used_bisection=used_bisection,
                        convexity_warning=convexity_warning)


def _bisect_density(pi_omega: float, order: float, target: float,
                    cfg: SolverConfig, iterations: int):
    lo = cfg.min_density
    if _cdf(order, lo * pi_omega) - target > 0.0:
        # Root sits below the floor; the floor is the best admissible answer.
        return lo, iterations, abs(_cdf(order, lo * pi_omega) - target)
    hi = max(initial_density_guess(pi_omega / math.pi, order, target), lo) * 2.0
    for _ in range(_BRACKET_MAX_DOUBLINGS):
        if _cdf(order, hi * pi_omega) > target:
            break
        hi *= 2.0
    lam = 0.5 * (lo + hi)
    residual = abs(_cdf(order, lam * pi_omega) - target)
    for _ in range(_BISECTION_MAX_HALVINGS):
        if residual <= cfg.abs_tolerance:
            break
        if _cdf(order, lam * pi_omega) > target:
            hi = lam
        else:
            lo = lam
        lam = 0.5 * (lo + hi)
        residual = abs(_cdf(order, lam * pi_omega) - target)
        iterations += 1
    return lam, iterations, residual


def newton_raphson_density(omega: float, l: int, epsilon: float,
                           cfg: SolverConfig | None = None) -> DensitySolve:
    """Invert op_lb_approx: find lam with gammainc(l/2+1, lam*pi*omega) = epsilon.

    ``l`` is the (even, nonnegative) number of cancelled interfering nodes,
    so the dominating interferer is the (l/2 + 1)-th nearest pair.  Raises
    ``ConvergenceError`` (carrying the last iterate and residual) in the
    pathological case that neither Newton nor the bisection safeguard meets
    the tolerance.
    """
    if l < 0 or l != int(l) or int(l) % 2 != 0:
        raise ValueError(f"l must be an even nonnegative integer, got {l}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    order = l / 2 + 1.0
    return solve_gamma_cdf_density(omega, order, epsilon, cfg)

"""Barrier dividend strategy when ruin is Parisian.

Dividends are paid by reflecting the surplus at a barrier a; the value of
doing so from x is v_a(x) = V(x) / V'(a) below the barrier and linear above
it. The optimal barrier minimises V'. `hjb_verify` checks the variational
inequalities of the control problem on a grid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import optimize

from .errors import InternalConsistencyError, InvalidArgumentError
from .levy_model import BrownianDrift, CramerLundbergExp, RiskModel, phi, tilt
from .numerics import DEFAULT_TOL, Tolerance, differentiate, integrate
from .parisian_ruin import (
    BesselRadicand,
    ParisianSpec,
    V,
    V_derivatives,
    cl_survival_factor,
    parisian_constants,
)
from .scale import scale_eval

logger = logging.getLogger(__name__)

# jump integrals are truncated where exp(-xi z) < this
JUMP_TAIL_CUTOFF = 1e-12


@dataclass(frozen=True)
class BarrierPolicy:
    a: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and self.a >= 0):
            raise InvalidArgumentError(f"barrier a must be finite and >= 0, got {self.a}")


@dataclass
class VerifyReport:
    barrier: float
    grid: List[float]
    hjb_values: List[float]
    derivative_values: List[float]
    point_pass: List[bool]
    max_violation: float
    passed: bool
    tol: float = 1e-6
    slack: float = 1e-8

    @property
    def n_points(self) -> int:
        return len(self.grid)


@dataclass(frozen=True)
class OptimalBarrier:
    a_star: float
    V_second_at_a_star: float
    method: str
    notes: Sequence[str] = field(default_factory=tuple)


def _check_q(q: float) -> None:
    if not (math.isfinite(q) and q > 0):
        raise InvalidArgumentError(f"q must be finite and > 0, got {q}")


def _V_prime_at_barrier(
    model: RiskModel, q: float, spec: ParisianSpec, a: float, radicand: BesselRadicand
) -> float:
    vp = V_derivatives(model, q, spec, a, 1, radicand)
    if not vp > 0:
        raise InternalConsistencyError(f"V'(a) = {vp} <= 0 at a = {a}")
    return vp


def value_ruin_delay(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: float,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """Expected discounted dividends of the barrier strategy at `policy.a`."""
    _check_q(q)
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    a = policy.a
    vp = _V_prime_at_barrier(model, q, spec, a, radicand)
    if x <= a:
        return V(model, q, spec, x, radicand) / vp
    return x - a + V(model, q, spec, a, radicand) / vp


def value_ruin_delay_derivative(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: float,
    order: int = 1,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """v' or v'' of the barrier value; left derivatives at x = a."""
    _check_q(q)
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    a = policy.a
    vp = _V_prime_at_barrier(model, q, spec, a, radicand)
    if x <= a:
        return V_derivatives(model, q, spec, x, order, radicand) / vp
    return 1.0 if order == 1 else 0.0


def _closed_form_barrier(
    model: RiskModel, q: float, spec: ParisianSpec, radicand: BesselRadicand
) -> float:
    # V''(a) = 0  <=>  exp(kappa a) = K (1 - kappa / Phi)^2
    pc = parisian_constants(model, q, spec, radicand)
    if pc.K <= 0:
        return 0.0
    arg = pc.K * (1.0 - pc.kappa / pc.phi_q) ** 2
    if arg <= 1.0:
        return 0.0
    return math.log(arg) / pc.kappa


def grid_minimizer(
    f: Callable[[float], float], lo: float, hi: float, step: float = 1e-3
) -> float:
    """Grid argmin of f on [lo, hi], refined by bounded Brent search."""
    xs = np.arange(lo, hi + 0.5 * step, step)
    values = np.array([f(float(x)) for x in xs])
    i = int(np.argmin(values))
    left, right = float(xs[max(i - 1, 0)]), float(xs[min(i + 1, len(xs) - 1)])
    if right - left <= 0:
        return float(xs[i])
    res = optimize.minimize_scalar(
        f, bounds=(left, right), method="bounded", options={"xatol": 1e-10}
    )
    return float(res.x) if res.fun <= values[i] else float(xs[i])


def optimal_barrier_details(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    radicand: BesselRadicand = BesselRadicand.TILTED,
    grid_hi: float = 20.0,
) -> OptimalBarrier:
    """Minimiser of V' over [0, inf) together with V''(a*) and the method used."""
    _check_q(q)
    a_star = _closed_form_barrier(model, q, spec, radicand)
    v2 = V_derivatives(model, q, spec, a_star, 2, radicand)
    if a_star == 0.0:
        logger.warning("optimal barrier clipped to 0 (V' increasing on [0, inf))")
        return OptimalBarrier(0.0, v2, "closed_form", ("clipped_to_zero",))
    pc = parisian_constants(model, q, spec, radicand)
    scale = pc.phi_q**2 * math.exp(pc.phi_q * a_star)
    if abs(v2) <= 1e-6 * scale:
        logger.info("optimal barrier from closed form: a* = %.12g", a_star)
        return OptimalBarrier(a_star, v2, "closed_form")
    logger.warning("closed-form barrier fails V''(a*)=0 check (%.3g); using grid", v2)
    hi = max(grid_hi, 2.0 * a_star)
    a_grid = grid_minimizer(
        lambda a: V_derivatives(model, q, spec, a, 1, radicand), 0.0, hi
    )
    return OptimalBarrier(
        a_grid, V_derivatives(model, q, spec, a_grid, 2, radicand), "grid"
    )


def optimal_barrier(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """Optimal dividend barrier a* for Parisian ruin with window zeta."""
    return optimal_barrier_details(model, q, spec, radicand).a_star


def classical_optimal_barrier(model: RiskModel, q: float) -> float:
    """Argmin of W^(q)' over [0, inf), the barrier when ruin is immediate."""
    _check_q(q)
    (k1, r1), (k2, r2) = scale_eval(model, q).terms
    # W'' = 0  <=>  k1 r1^2 exp(r1 x) = -k2 r2^2 exp(r2 x)
    num = -k2 * r2 * r2
    den = k1 * r1 * r1
    if num <= 0 or den <= 0 or num <= den:
        return 0.0
    return math.log(num / den) / (r1 - r2)


def jump_tail_below_zero(
    model: CramerLundbergExp,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: float,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """Integral of v(x - z) xi exp(-xi z) over z > x for the barrier value.

    Below zero the value is that of reaching 0 again within the Parisian
    window; averaged over the exponential undershoot it integrates to
    exp(-xi x) (xi / xi_q) (1 - D) V(0) / V'(a).
    """
    consts = phi(model, q)
    D = cl_survival_factor(
        tilt(model, consts.phi_q), spec.zeta, radicand, xi_untilted=model.xi
    )
    v0 = value_ruin_delay(model, q, spec, policy, 0.0, radicand)
    return math.exp(-model.xi * x) * (model.xi / consts.xi_q) * (1.0 - D) * v0


def generator_apply(
    model: RiskModel,
    f: Callable[[float], float],
    x: float,
    *,
    df: Optional[Callable[[float], float]] = None,
    d2f: Optional[Callable[[float], float]] = None,
    h: float = 1e-4,
    tail: Optional[Callable[[float], float]] = None,
    breaks: Sequence[float] = (),
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Infinitesimal generator of the surplus applied to f at x.

    Args:
        model: risk model
        f: test function
        x: evaluation point
        df: exact first derivative, finite differences otherwise
        d2f: exact second derivative (Brownian model only)
        h: finite-difference step
        tail: for the Cramer-Lundberg model, the part of the jump integral
            over claim sizes z > x; when given, f is only evaluated on [0, x]
        breaks: claim sizes where the integrand has a kink
        tol: quadrature tolerance
    """
    d1 = df(x) if df is not None else differentiate(f, x, 1, h)
    if isinstance(model, BrownianDrift):
        d2 = d2f(x) if d2f is not None else differentiate(f, x, 2, h)
        return 0.5 * model.sigma**2 * d2 + model.c * d1
    if not isinstance(model, CramerLundbergExp):
        raise InvalidArgumentError(f"unsupported model type {type(model).__name__}")

    xi = model.xi

    def integrand(z: float) -> float:
        return f(x - z) * xi * math.exp(-xi * z)

    if tail is not None:
        jumps = integrate(integrand, 0.0, max(x, 0.0), tol, points=breaks) + tail(x)
    else:
        z_max = -math.log(JUMP_TAIL_CUTOFF) / xi
        jumps = integrate(integrand, 0.0, z_max, tol, points=breaks)
    return model.c * d1 + model.lam * (jumps - f(x))


def default_verify_grid(a_star: float, n: int = 200) -> List[float]:
    """Geometric grid on (0.01, a* + 10]."""
    return [float(x) for x in np.geomspace(0.01, a_star + 10.0, n)]


def hjb_verify(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    grid: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    slack: float = 1e-8,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> VerifyReport:
    """Evaluate (Gamma v - q v)(x) and v'(x) of the barrier value on a grid.

    The report passes when the equation holds to `tol` on (0, a], the
    inequality Gamma v - q v <= slack holds above a and v' >= 1 - slack.
    """
    _check_q(q)
    a = policy.a
    if grid is None:
        grid = default_verify_grid(optimal_barrier(model, q, spec, radicand))
    grid = [float(x) for x in grid]
    if not grid:
        raise InvalidArgumentError("verification grid is empty")
    if min(grid) <= 0:
        raise InvalidArgumentError("verification grid must lie in (0, inf)")

    def v(y: float) -> float:
        return value_ruin_delay(model, q, spec, policy, y, radicand)

    def dv(y: float) -> float:
        return value_ruin_delay_derivative(model, q, spec, policy, y, 1, radicand)

    def d2v(y: float) -> float:
        return value_ruin_delay_derivative(model, q, spec, policy, y, 2, radicand)

    tail = None
    if isinstance(model, CramerLundbergExp):

        def tail(y: float) -> float:
            return jump_tail_below_zero(model, q, spec, policy, y, radicand)

    hjb, slopes, passes = [], [], []
    worst = 0.0
    for x in grid:
        value = generator_apply(
            model, v, x, df=dv, d2f=d2v, tail=tail, breaks=(x - a,)
        ) - q * v(x)
        slope = dv(x)
        if x <= a:
            ok = abs(value) <= tol
            violation = abs(value)
        else:
            ok = value <= slack
            violation = max(value, 0.0)
        ok = ok and slope >= 1.0 - slack
        hjb.append(value)
        slopes.append(slope)
        passes.append(ok)
        worst = max(worst, violation, 1.0 - slope)
    report = VerifyReport(
        barrier=a,
        grid=grid,
        hjb_values=hjb,
        derivative_values=slopes,
        point_pass=passes,
        max_violation=worst,
        passed=all(passes),
        tol=tol,
        slack=slack,
    )
    logger.info(
        "HJB check at a=%.6g: %d points, passed=%s, max violation=%.3g",
        a,
        len(grid),
        report.passed,
        report.max_violation,
    )
    return report

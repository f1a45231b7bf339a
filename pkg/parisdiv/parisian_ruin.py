"""Parisian survival function V^(q) and Parisian ruin probabilities.

Ruin is declared only once the surplus has stayed below zero for an
uninterrupted window zeta. For both supported models the tilted survival
function has the form

    V^(q)(x) = exp(Phi x) - K exp((Phi - kappa) x),   x >= 0,

with model-specific constants K and kappa gathered in `ParisianConstants`.
"""

import enum
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from scipy import special

from .errors import InvalidArgumentError, UnsupportedModelError
from .levy_model import (
    BrownianDrift,
    CramerLundbergExp,
    RiskModel,
    net_profit,
    phi,
    tilt,
)
from .numerics import DEFAULT_TOL, Tolerance, integrate, std_normal_cdf
from .scale import W, scale_eval

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
# below this time the Bessel integrand is replaced by its series
_SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class ParisianSpec:
    zeta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.zeta) and self.zeta >= 0):
            raise InvalidArgumentError(f"zeta must be finite and >= 0, got {self.zeta}")


class BesselRadicand(enum.Enum):
    """Which claim rate enters the Bessel argument of the excursion density.

    TILTED uses 2 t sqrt(c lam_q xi_q); AS_PRINTED uses 2 t sqrt(c lam_q xi)
    with the untilted claim rate. The two agree when q = 0.
    """

    TILTED = "tilted"
    AS_PRINTED = "as_printed"


@dataclass(frozen=True)
class ParisianConstants:
    phi_q: float
    kappa: float
    K: float


def bm_psi(x: float) -> float:
    """Psi(x) = 2 sqrt(pi) x N(sqrt(2) x) - sqrt(pi) x + exp(-x^2)."""
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    return 2.0 * SQRT_PI * x * std_normal_cdf(math.sqrt(2.0) * x) - SQRT_PI * x + math.exp(-x * x)


def _bm_survival_ratio(eta: float) -> float:
    # (Psi(eta) - eta sqrt(pi)) / (Psi(eta) + eta sqrt(pi)); the numerator
    # equals exp(-eta^2) (1 - sqrt(pi) eta erfcx(eta)) > 0
    num = math.exp(-eta * eta) * (1.0 - SQRT_PI * eta * float(special.erfcx(eta)))
    return num / (num + 2.0 * SQRT_PI * eta)


@lru_cache(maxsize=256)
def _cl_survival_factor(
    c: float, lam: float, xi: float, radicand: float, zeta: float, tol: Tolerance
) -> float:
    k1 = math.sqrt(c * xi / lam)
    k2 = math.sqrt(radicand)
    rate = lam + c * xi

    def series(t: float) -> float:
        x = 2.0 * t * k2
        return k1 * k2 * (1.0 + x * x / 8.0) * math.exp(-rate * t)

    def scaled(t: float) -> float:
        x = 2.0 * t * k2
        return k1 * float(special.i1e(x)) / t * math.exp(-(rate - 2.0 * k2) * t)

    head = min(zeta, _SERIES_CUTOFF)
    mass = integrate(series, 0.0, head, tol)
    if zeta > head:
        mass += integrate(scaled, head, zeta, tol)
    logger.debug("excursion factor D(zeta=%g) = %.12g", zeta, 1.0 - mass)
    return 1.0 - mass


def cl_survival_factor(
    tilted: CramerLundbergExp,
    zeta: float,
    radicand: BesselRadicand = BesselRadicand.TILTED,
    xi_untilted: Optional[float] = None,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """The constant D for exponential claims.

    D is the probability that the (tilted) surplus, started at minus an
    Exp(xi_q) undershoot, needs more than `zeta` to climb back to zero.

    Args:
        tilted: the model after tilting by Phi(q), i.e. CL(c, lam_q, xi_q)
        zeta: Parisian window
        radicand: Bessel argument convention
        xi_untilted: claim rate before tilting, needed for AS_PRINTED
        tol: quadrature tolerance

    Returns:
        D in (0, 1]
    """
    if not (math.isfinite(zeta) and zeta >= 0):
        raise InvalidArgumentError(f"zeta must be finite and >= 0, got {zeta}")
    if zeta == 0.0:
        return 1.0
    c, lam, xi = tilted.c, tilted.lam, tilted.xi
    if radicand is BesselRadicand.TILTED:
        r = c * lam * xi
    else:
        if xi_untilted is None:
            raise InvalidArgumentError("AS_PRINTED radicand needs xi_untilted")
        r = c * lam * xi_untilted
    return _cl_survival_factor(c, lam, xi, r, zeta, tol)


@lru_cache(maxsize=256)
def parisian_constants(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> ParisianConstants:
    """Constants K and kappa of the closed form of V^(q) for (model, q, zeta)."""
    consts = phi(model, q)
    if isinstance(model, CramerLundbergExp):
        c = model.c
        xi_q, lam_q = consts.xi_q, consts.lambda_q
        D = cl_survival_factor(
            tilt(model, consts.phi_q), spec.zeta, radicand, xi_untilted=model.xi
        )
        gap = c * xi_q - lam_q
        return ParisianConstants(consts.phi_q, gap / c, lam_q * D / (gap + lam_q * D))
    if isinstance(model, BrownianDrift):
        c_q, sigma = consts.c_q, model.sigma
        eta = (c_q / sigma) * math.sqrt(spec.zeta / 2.0)
        return ParisianConstants(
            consts.phi_q, 2.0 * c_q / sigma**2, _bm_survival_ratio(eta)
        )
    raise UnsupportedModelError(f"unsupported model type {type(model).__name__}")


def V(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    x: float,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """V^(q)(x) = exp(Phi(q) x) P^Phi(q)_x(no Parisian ruin)."""
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    pc = parisian_constants(model, q, spec, radicand)
    return math.exp(pc.phi_q * x) - pc.K * math.exp((pc.phi_q - pc.kappa) * x)


def V_derivatives(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    x: float,
    order: int = 1,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """First or second derivative of V^(q) at x."""
    if order not in (1, 2):
        raise InvalidArgumentError(f"order must be 1 or 2, got {order}")
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    pc = parisian_constants(model, q, spec, radicand)
    r = pc.phi_q - pc.kappa
    return pc.phi_q**order * math.exp(pc.phi_q * x) - pc.K * r**order * math.exp(r * x)


def classical_ruin_probability(model: RiskModel, x: float) -> float:
    """P_x(tau_0- < inf) = 1 - psi'(0+) W(x)."""
    mu = net_profit(model)
    if mu <= 0:
        raise UnsupportedModelError(f"net profit psi'(0+) = {mu} <= 0")
    if x < 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - mu * W(scale_eval(model, 0.0), x)))


def parisian_ruin_probability(
    model: RiskModel,
    spec: ParisianSpec,
    x: float,
    radicand: BesselRadicand = BesselRadicand.TILTED,
) -> float:
    """Probability of Parisian ruin with window zeta, starting from x."""
    mu = net_profit(model)
    if mu <= 0:
        raise UnsupportedModelError(f"net profit psi'(0+) = {mu} <= 0")
    return min(1.0, max(0.0, 1.0 - V(model, 0.0, spec, x, radicand)))

"""Spectrally negative risk models, their Laplace exponent, its inverse and
exponential tilting.

Two concrete models are supported and both are closed under tilting:

* `CramerLundbergExp` - premium rate c, Poisson claim arrivals with intensity
  lam and Exp(xi) claim sizes, psi(t) = c t - lam t / (xi + t);
* `BrownianDrift` - drift c and volatility sigma, psi(t) = c t + sigma^2 t^2 / 2.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import ClassVar, Optional, Tuple, Union

from .errors import InvalidArgumentError, UnsupportedModelError


def _require_positive(**values: float) -> None:
    for name, v in values.items():
        if not (math.isfinite(v) and v > 0):
            raise InvalidArgumentError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class CramerLundbergExp:
    c: float
    lam: float
    xi: float

    kind: ClassVar[str] = "cramer_lundberg"
    bounded_variation: ClassVar[bool] = True
    has_gaussian: ClassVar[bool] = False
    # compound Poisson paths give a scale function with an atom at 0 and a
    # kink, so W is not C^1 on (0, inf) in general
    regular_scale: ClassVar[bool] = False

    def __post_init__(self) -> None:
        _require_positive(c=self.c, lam=self.lam, xi=self.xi)
        if self.lam / (self.c * self.xi) >= 1.0:
            raise UnsupportedModelError(
                f"net profit condition lam/(c*xi) < 1 fails: "
                f"{self.lam}/({self.c}*{self.xi}) = {self.lam / (self.c * self.xi)}"
            )


@dataclass(frozen=True)
class BrownianDrift:
    c: float
    sigma: float

    kind: ClassVar[str] = "brownian"
    bounded_variation: ClassVar[bool] = False
    has_gaussian: ClassVar[bool] = True
    regular_scale: ClassVar[bool] = True

    def __post_init__(self) -> None:
        _require_positive(c=self.c, sigma=self.sigma)


RiskModel = Union[CramerLundbergExp, BrownianDrift]


@dataclass(frozen=True)
class ModelConstants:
    """Quantities derived from a model and a discount rate q.

    `terms` expresses the q-scale function as W(x) = sum k * exp(r * x) over
    the (k, r) pairs, which every closed form downstream is built on.
    """

    q: float
    phi_q: float
    q_minus: float
    terms: Tuple[Tuple[float, float], ...]
    # Cramer-Lundberg
    xi_q: Optional[float] = None
    lambda_q: Optional[float] = None
    A_plus: Optional[float] = None
    A_minus: Optional[float] = None
    # Brownian
    c_q: Optional[float] = None
    delta: Optional[float] = None
    omega: Optional[float] = None
    psi_prime_at_phi: float = field(default=float("nan"))

    @property
    def q_plus(self) -> float:
        return self.phi_q


def _check_model(model: RiskModel) -> None:
    if not isinstance(model, (CramerLundbergExp, BrownianDrift)):
        raise UnsupportedModelError(f"unsupported model type {type(model).__name__}")


def psi(model: RiskModel, theta: float) -> float:
    """Laplace exponent on its whole real domain.

    Unlike `laplace_exponent` this accepts negative arguments (theta > -xi for
    the Cramer-Lundberg model), which finite differences around 0 need.
    """
    if isinstance(model, CramerLundbergExp):
        if theta <= -model.xi:
            raise InvalidArgumentError(
                f"psi undefined for theta <= -xi ({theta} <= {-model.xi})"
            )
        return model.c * theta - model.lam * theta / (model.xi + theta)
    _check_model(model)
    return model.c * theta + 0.5 * model.sigma**2 * theta * theta


def laplace_exponent(model: RiskModel, theta: float) -> float:
    """psi(theta) = log E[exp(theta X_1)] for theta >= 0."""
    if not theta >= 0:
        raise InvalidArgumentError(f"theta must be >= 0, got {theta}")
    return psi(model, theta)


def laplace_exponent_derivative(model: RiskModel, theta: float) -> float:
    """psi'(theta); at theta = 0 this is the drift psi'(0+)."""
    if isinstance(model, CramerLundbergExp):
        return model.c - model.lam * model.xi / (model.xi + theta) ** 2
    _check_model(model)
    return model.c + model.sigma**2 * theta


def net_profit(model: RiskModel) -> float:
    """Mean surplus growth per unit time, psi'(0+)."""
    return laplace_exponent_derivative(model, 0.0)


@lru_cache(maxsize=512)
def phi(model: RiskModel, q: float) -> ModelConstants:
    """Right inverse Phi(q) of the Laplace exponent plus the derived constants.

    Args:
        model: risk model
        q: discount rate, q >= 0

    Returns:
        ModelConstants for (model, q)
    """
    if not (math.isfinite(q) and q >= 0):
        raise InvalidArgumentError(f"q must be finite and >= 0, got {q}")
    _check_model(model)

    if isinstance(model, CramerLundbergExp):
        c, lam, xi = model.c, model.lam, model.xi
        # roots of c t^2 - s t - q xi = 0
        s = q + lam - xi * c
        root = math.sqrt(s * s + 4.0 * c * q * xi)
        if s >= 0:
            q_plus = (s + root) / (2.0 * c)
            q_minus = -2.0 * q * xi / (s + root)
        else:
            q_minus = (s - root) / (2.0 * c)
            q_plus = 2.0 * q * xi / (root - s)
        gap = root / c
        A_plus = (xi + q_plus) / gap
        A_minus = (xi + q_minus) / gap
        xi_q = xi + q_plus
        return ModelConstants(
            q=q,
            phi_q=q_plus,
            q_minus=q_minus,
            terms=((A_plus / c, q_plus), (-A_minus / c, q_minus)),
            xi_q=xi_q,
            lambda_q=lam * xi / xi_q,
            A_plus=A_plus,
            A_minus=A_minus,
            psi_prime_at_phi=laplace_exponent_derivative(model, q_plus),
        )

    c, sigma2 = model.c, model.sigma**2
    c_q = math.sqrt(c * c + 2.0 * q * sigma2)
    phi_q = 2.0 * q / (c_q + c)
    q_minus = -(c + c_q) / sigma2
    return ModelConstants(
        q=q,
        phi_q=phi_q,
        q_minus=q_minus,
        terms=((1.0 / c_q, phi_q), (-1.0 / c_q, q_minus)),
        c_q=c_q,
        delta=c_q / sigma2,
        omega=c / sigma2,
        psi_prime_at_phi=c_q,
    )


def tilt(model: RiskModel, theta: float) -> RiskModel:
    """Model seen under the exponential change of measure with parameter theta.

    The returned model has Laplace exponent s -> psi(s + theta) - psi(theta).
    """
    if not (math.isfinite(theta) and theta >= 0):
        raise InvalidArgumentError(f"theta must be finite and >= 0, got {theta}")
    if theta == 0:
        return model
    if isinstance(model, CramerLundbergExp):
        xi_t = model.xi + theta
        return CramerLundbergExp(model.c, model.lam * model.xi / xi_t, xi_t)
    _check_model(model)
    return BrownianDrift(model.c + model.sigma**2 * theta, model.sigma)


def laplace_exponent_secant(model: RiskModel, s: float, t: float) -> float:
    """(psi(s) - psi(t)) / (s - t), equal to psi'(s) when s == t.

    Both exponents are rational in their argument, so the quotient has a
    closed form with no cancellation near s == t.
    """
    if isinstance(model, CramerLundbergExp):
        if min(s, t) <= -model.xi:
            raise InvalidArgumentError(f"psi undefined at {min(s, t)}")
        return model.c - model.lam * model.xi / ((model.xi + s) * (model.xi + t))
    _check_model(model)
    return model.c + 0.5 * model.sigma**2 * (s + t)

"""Scale functions W^(q), Z^(q) and the fluctuation identities built on them.

For both supported models the q-scale function is a finite sum of
exponentials, W(x) = sum_i k_i exp(r_i x) for x >= 0, so antiderivatives and
exponentially weighted integrals are evaluated in closed form.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

from .errors import InvalidArgumentError
from .levy_model import (
    ModelConstants,
    RiskModel,
    laplace_exponent_secant,
    net_profit,
    phi,
    psi,
)
from .numerics import differentiate

logger = logging.getLogger(__name__)

Terms = Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class ScaleEval:
    model: RiskModel
    q: float
    constants: ModelConstants

    def __post_init__(self) -> None:
        if self.constants.q != self.q:
            raise InvalidArgumentError(
                f"constants built for q={self.constants.q}, not q={self.q}"
            )

    @property
    def terms(self) -> Terms:
        return self.constants.terms


def scale_eval(model: RiskModel, q: float) -> ScaleEval:
    """Bundle `model`, `q` and the constants of `phi(model, q)`."""
    return ScaleEval(model, q, phi(model, q))


def _expm1_over(r: float, x: float) -> float:
    # (e^{r x} - 1) / r, continuous at r = 0
    if r == 0.0:
        return x
    return math.expm1(r * x) / r


def _sum_exp(terms: Iterable[Tuple[float, float]], x: float, power: int = 0) -> float:
    return sum(k * r**power * math.exp(r * x) for k, r in terms)


def W(ev: ScaleEval, x: float) -> float:
    """q-scale function; 0 on the negative half-line, right-continuous at 0."""
    if x < 0:
        return 0.0
    return _sum_exp(ev.terms, x)


def W_prime(ev: ScaleEval, x: float) -> float:
    """Right derivative of W."""
    if x < 0:
        return 0.0
    return _sum_exp(ev.terms, x, power=1)


def W_second(ev: ScaleEval, x: float) -> float:
    """Second right derivative of W."""
    if x < 0:
        return 0.0
    return _sum_exp(ev.terms, x, power=2)


def W_bar(ev: ScaleEval, x: float) -> float:
    """Antiderivative of W vanishing at 0."""
    if x <= 0:
        return 0.0
    return sum(k * _expm1_over(r, x) for k, r in ev.terms)


def Z(ev: ScaleEval, x: float) -> float:
    """Z(x) = 1 + q W_bar(x)."""
    return 1.0 + ev.q * W_bar(ev, x)


def W_laplace(ev: ScaleEval, theta: float) -> float:
    """Laplace transform of W at theta > Phi(q); equals 1 / (psi(theta) - q)."""
    if not theta > ev.constants.phi_q:
        raise InvalidArgumentError(
            f"theta must exceed Phi(q)={ev.constants.phi_q}, got {theta}"
        )
    return sum(k / (theta - r) for k, r in ev.terms)


def discounted_W_integral(ev: ScaleEval, beta: float, z: float) -> float:
    """Integral of exp(-beta y) W(y) over [0, z]."""
    if z <= 0:
        return 0.0
    return sum(k * _expm1_over(r - beta, z) for k, r in ev.terms)


def _check_exit_args(ev: ScaleEval, z: float, a: float) -> float:
    if not (0.0 <= z <= a):
        raise InvalidArgumentError(f"need 0 <= z <= a, got z={z}, a={a}")
    w_a = W(ev, a)
    if w_a <= 0.0:
        raise InvalidArgumentError(f"W(a) vanishes at a={a}")
    return w_a


def exit_up(ev: ScaleEval, z: float, a: float) -> float:
    """E_z[exp(-q tau_a+); tau_a+ < tau_0-] = W(z) / W(a)."""
    w_a = _check_exit_args(ev, z, a)
    return W(ev, z) / w_a


def exit_down(ev: ScaleEval, z: float, a: float) -> float:
    """E_z[exp(-q tau_0-); tau_0- < tau_a+] = Z(z) - Z(a) W(z) / W(a)."""
    w_a = _check_exit_args(ev, z, a)
    return Z(ev, z) - Z(ev, a) * W(ev, z) / w_a


def tilted_W(model: RiskModel, beta: float, u: float, z: float) -> float:
    """Scale function W_beta^(u) of the model tilted by beta.

    Obtained from exp(beta z) W_beta^(u)(z) = W^(p)(z) with p = u + psi(beta).
    """
    p = u + psi(model, beta)
    return math.exp(-beta * z) * W(scale_eval(model, p), z)


def tilted_Z(model: RiskModel, beta: float, u: float, z: float) -> float:
    """Z_beta^(u)(z) = 1 + u * integral of exp(-beta y) W^(p)(y) over [0, z]."""
    p = u + psi(model, beta)
    return 1.0 + u * discounted_W_integral(scale_eval(model, p), beta, z)


def one_sided_down_transform(
    model: RiskModel, q: float, alpha: float, beta: float, z: float
) -> float:
    """H_q(beta, z), the double Laplace transform of the discounted undershoot.

    Equals (1/alpha) E_z[exp(-(alpha + q) tau_0- + beta X_{tau_0-}); tau_0- < inf].

    Args:
        model: risk model
        q: discount rate, q >= 0
        alpha: Laplace variable in time, alpha > 0
        beta: Laplace variable in the undershoot
        z: starting point, z >= 0
    """
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha}")
    if z < 0:
        raise InvalidArgumentError(f"z must be >= 0, got {z}")
    p = alpha + q
    ev = scale_eval(model, p)
    u = p - psi(model, beta)
    # u / Phi_beta(u) with Phi_beta(u) = Phi(p) - beta; the ratio is the secant
    # slope of psi, which also covers the u = 0 limit psi'(beta)
    ratio = laplace_exponent_secant(model, ev.constants.phi_q, beta)
    z_part = math.exp(beta * z) * (1.0 + u * discounted_W_integral(ev, beta, z))
    return (z_part - ratio * W(ev, z)) / alpha


def expected_position_transform(
    model: RiskModel, alpha: float, z: float, h: float = 1e-5
) -> float:
    """Laplace transform in time of E_z[X_s; tau_0- > s].

    Uses E_z[X_{s ^ tau}] = z + psi'(0+) E_z[s ^ tau] together with
    d/dbeta H_0(beta, z) at beta = 0, so the drift of the surplus is
    accounted for.
    """
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha}")
    if z < 0:
        raise InvalidArgumentError(f"z must be >= 0, got {z}")
    dH = differentiate(
        lambda b: one_sided_down_transform(model, 0.0, alpha, b, z), 0.0, 1, h
    )
    ruin_transform = alpha * one_sided_down_transform(model, 0.0, alpha, 0.0, z)
    drift = net_profit(model) * (1.0 - ruin_transform) / alpha
    return (z + drift) / alpha - dH

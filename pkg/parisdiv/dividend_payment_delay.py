"""Barrier strategy with an implementation delay d on dividend payments.

When the surplus reaches the barrier a a clock of length d starts. A dip
below a cancels the pending payment and a new clock only starts at the
next visit to a. If the clock expires the whole excess over a is paid as a
lump sum and the process restarts at a. Ruin is classical (first passage
below 0).

Above the barrier the value is computed in coordinates shifted by a, where
the cancellation time is the first passage below 0 from z = x - a. By the
strong Markov property every piece of the value reduces to the ruin-time
distribution F(t) = P_z(tau_0- <= t) and its time integrals.
"""

import enum
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special, stats

from .errors import IllPosedBoundaryError, InvalidArgumentError, UnsupportedModelError
from .levy_model import BrownianDrift, CramerLundbergExp, RiskModel, net_profit, phi
from .numerics import differentiate, gauss_legendre, integrate, std_normal_cdf
from .scale import W, W_prime, scale_eval

logger = logging.getLogger(__name__)

_THETA_NODES = 256
_POISSON_TAIL = 1e-12


@dataclass(frozen=True)
class PaymentDelaySpec:
    d: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.d) and self.d >= 0):
            raise InvalidArgumentError(f"delay d must be finite and >= 0, got {self.d}")


class RuinNormalization(enum.Enum):
    """Units in which the exponential-claims finite-time ruin formula is read.

    SCALED measures surplus in mean claim sizes and time so that the premium
    rate is one: beta = lam / (c xi), u = xi x, T = c xi t. AS_PRINTED plugs
    beta = lam / xi, u = x and T = t in directly, which agrees with SCALED
    only when c = xi = 1.
    """

    SCALED = "scaled"
    AS_PRINTED = "as_printed"


@dataclass(frozen=True)
class TransitionDensity:
    atom_position: Optional[float]
    atom_weight: float
    density: float


def _check_q(q: float) -> None:
    if not (math.isfinite(q) and q > 0):
        raise InvalidArgumentError(f"q must be finite and > 0, got {q}")


def _check_nonneg(**values: float) -> None:
    for name, v in values.items():
        if not (math.isfinite(v) and v >= 0):
            raise InvalidArgumentError(f"{name} must be finite and >= 0, got {v}")


# ---------------------------------------------------------------------------
# Ruin-time distribution, exponential claims


@dataclass(frozen=True)
class _SeriesRuinKernel:
    """Theta-integral representation of P_u(tau <= T) for unit premium.

    With g(theta) = beta exp(u (sqrt(beta) cos theta - 1)) f2(theta),
    F(T) = A - (1/pi) int g exp(-f3 T) / f3, so time integrals of F are
    available in closed form under the theta integral.
    """

    beta: float
    u: float
    A: float
    time_scale: float

    def _parts(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        sb = math.sqrt(self.beta)
        arg = self.u * sb * np.sin(theta)
        f2 = np.cos(arg) - np.cos(arg + 2.0 * theta)
        f3 = 1.0 + self.beta - 2.0 * sb * np.cos(theta)
        g = self.beta * np.exp(self.u * (sb * np.cos(theta) - 1.0)) * f2
        return g, f3

    def _theta_integral(
        self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> float:
        def integrand(theta: np.ndarray) -> np.ndarray:
            g, f3 = self._parts(theta)
            return fn(g, f3)

        return gauss_legendre(integrand, 0.0, math.pi, _THETA_NODES) / math.pi

    def cdf(self, t: float) -> float:
        T = self.time_scale * t
        return self.A - self._theta_integral(lambda g, f3: g * np.exp(-f3 * T) / f3)

    def density(self, t: float) -> float:
        T = self.time_scale * t
        return self.time_scale * self._theta_integral(lambda g, f3: g * np.exp(-f3 * T))

    def integrated_cdf(self, t: float, q: float = 0.0) -> float:
        """Integral of exp(-q s) F(s) over s in [0, t]."""
        T = self.time_scale * t
        qs = q / self.time_scale
        if qs == 0.0:
            head = self.A * T
        else:
            head = self.A * -math.expm1(-qs * T) / qs
        body = self._theta_integral(
            lambda g, f3: g / f3 * -np.expm1(-(f3 + qs) * T) / (f3 + qs)
        )
        return (head - body) / self.time_scale


def _series_kernel(
    model: CramerLundbergExp, z: float, normalization: RuinNormalization
) -> _SeriesRuinKernel:
    if not isinstance(model, CramerLundbergExp):
        raise UnsupportedModelError("exponential-claims ruin formula needs CramerLundbergExp")
    if normalization is RuinNormalization.SCALED:
        beta = model.lam / (model.c * model.xi)
        u = model.xi * z
        return _SeriesRuinKernel(
            beta, u, beta * math.exp(-(1.0 - beta) * u), model.c * model.xi
        )
    beta = model.lam / model.xi
    if beta >= 1.0:
        raise InvalidArgumentError(
            f"as-printed normalization needs lam/xi < 1, got {beta}"
        )
    return _SeriesRuinKernel(beta, z, model.lam * math.exp(-(1.0 - beta) * z), 1.0)


def finite_time_ruin_cl(
    x: float,
    t: float,
    model: CramerLundbergExp,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> float:
    """P_x(tau_0- < t) for exponential claims."""
    _check_nonneg(x=x, t=t)
    if t == 0.0:
        return 0.0
    logger.debug("finite-time ruin with %s normalization", normalization.value)
    value = _series_kernel(model, x, normalization).cdf(t)
    return min(1.0, max(0.0, value))


# ---------------------------------------------------------------------------
# Ruin-time distribution, Brownian motion with drift


def finite_time_ruin_bm(x: float, t: float, model: BrownianDrift) -> float:
    """P_x(tau_0- < t) from the inverse-Gaussian passage-time law."""
    _check_nonneg(x=x, t=t)
    if t == 0.0:
        return 0.0
    c, s = model.c, model.sigma
    root = s * math.sqrt(t)
    value = std_normal_cdf((-x - c * t) / root) + math.exp(
        -2.0 * c * x / s**2
    ) * std_normal_cdf((-x + c * t) / root)
    return min(1.0, max(0.0, value))


def discounted_ruin_bm(model: BrownianDrift, q: float, z: float, t: float) -> float:
    """E_z[exp(-q tau_0-); tau_0- <= t] in closed form."""
    _check_nonneg(z=z, t=t)
    if t == 0.0:
        return 1.0 if z == 0.0 else 0.0
    if z == 0.0:
        return 1.0
    c, s = model.c, model.sigma
    c_q = phi(model, q).c_q
    root = s * math.sqrt(t)
    first = math.exp(-z * (c + c_q) / s**2 + special.log_ndtr((c_q * t - z) / root))
    second = math.exp(z * (c_q - c) / s**2 + special.log_ndtr(-(z + c_q * t) / root))
    return first + second


def _truncated_ruin_time_mean_bm(model: BrownianDrift, z: float, t: float) -> float:
    # E_z[tau_0-; tau_0- <= t], so that int_0^t F = t F(t) - E_z[tau_0-; tau_0- <= t]
    c, s = model.c, model.sigma
    root = s * math.sqrt(t)
    first = math.exp(-2.0 * c * z / s**2 + special.log_ndtr((c * t - z) / root))
    second = math.exp(special.log_ndtr(-(z + c * t) / root))
    return z / c * (first - second)


def ruin_time_density(
    model: RiskModel,
    z: float,
    t: float,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> float:
    """Density of the first passage time below 0 from z, at time t > 0."""
    _check_nonneg(z=z)
    if not t > 0:
        raise InvalidArgumentError(f"t must be > 0, got {t}")
    if isinstance(model, BrownianDrift):
        c, s = model.c, model.sigma
        return z / (s * math.sqrt(2.0 * math.pi * t**3)) * math.exp(
            -((z + c * t) ** 2) / (2.0 * s**2 * t)
        )
    return _series_kernel(model, z, normalization).density(t)


def ruin_time_moments(
    model: RiskModel,
    q: float,
    z: float,
    d: float,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> Tuple[float, float, float]:
    """F(d), the integral of F over [0, d] and the discounted ruin transform.

    The last entry is E_z[exp(-q tau_0-); tau_0- <= d].
    """
    _check_nonneg(z=z, d=d)
    if d == 0.0:
        return 0.0, 0.0, 0.0
    if isinstance(model, BrownianDrift):
        F_d = finite_time_ruin_bm(z, d, model)
        if z == 0.0:
            return 1.0, d, 1.0
        int_F = d * F_d - _truncated_ruin_time_mean_bm(model, z, d)
        return F_d, max(0.0, int_F), discounted_ruin_bm(model, q, z, d)
    kernel = _series_kernel(model, z, normalization)
    F_d = min(1.0, max(0.0, kernel.cdf(d)))
    int_F = kernel.integrated_cdf(d)
    disc = math.exp(-q * d) * F_d + q * kernel.integrated_cdf(d, q)
    return F_d, int_F, disc


def expected_survivor_position(
    model: RiskModel,
    z: float,
    d: float,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> float:
    """E_z[X_d; tau_0- > d] from optional stopping at d ^ tau_0-."""
    F_d, int_F, _ = ruin_time_moments(model, 0.0, z, d, normalization)
    mu = net_profit(model)
    value = z + mu * (d - int_F)
    if isinstance(model, CramerLundbergExp):
        # the undershoot is Exp(xi) and independent of the ruin time
        value += F_d / model.xi
    return value


# ---------------------------------------------------------------------------
# Transition densities


def transition_density_cl(
    z: float, s: float, y: float, model: CramerLundbergExp
) -> TransitionDensity:
    """Law of X_s started at z: an atom at z + c s plus a density below it."""
    if not s > 0:
        raise InvalidArgumentError(f"s must be > 0, got {s}")
    top = z + model.c * s
    atom = math.exp(-model.lam * s)
    w = top - y
    if w <= 0:
        return TransitionDensity(top, atom, 0.0)
    mean = model.lam * s
    k_max = max(1, int(stats.poisson.isf(_POISSON_TAIL, mean)) + 1)
    k = np.arange(1, k_max + 1, dtype=float)
    log_terms = (
        k * math.log(mean)
        - mean
        - special.gammaln(k + 1.0)
        + k * math.log(model.xi)
        + (k - 1.0) * math.log(w)
        - model.xi * w
        - special.gammaln(k)
    )
    return TransitionDensity(top, atom, float(np.exp(log_terms).sum()))


def _overshoot_mixed_density(model: CramerLundbergExp, s: float, y: float) -> float:
    # density of X_s started at -W, W ~ Exp(xi): one extra claim
    w = model.c * s - y
    if w <= 0 or s <= 0:
        return 0.0
    mean = model.lam * s
    k_max = int(stats.poisson.isf(_POISSON_TAIL, mean)) + 1
    k = np.arange(0, k_max + 1, dtype=float)
    log_terms = (
        k * math.log(mean)
        - mean
        - special.gammaln(k + 1.0)
        + stats.gamma.logpdf(w, k + 1.0, scale=1.0 / model.xi)
    )
    return float(np.exp(log_terms).sum())


def killed_density(z: float, d: float, y: float, model: RiskModel) -> TransitionDensity:
    """Law of X_d on the event that the process stayed above 0 up to d."""
    _check_nonneg(z=z)
    if not d > 0:
        raise InvalidArgumentError(f"d must be > 0, got {d}")
    if isinstance(model, BrownianDrift):
        if y <= 0:
            return TransitionDensity(None, 0.0, 0.0)
        c, s = model.c, model.sigma
        sd = s * math.sqrt(d)
        free = stats.norm.pdf(y, loc=z + c * d, scale=sd)
        image = math.exp(-2.0 * c * z / s**2) * stats.norm.pdf(y, loc=-z + c * d, scale=sd)
        return TransitionDensity(None, 0.0, max(0.0, float(free - image)))
    free = transition_density_cl(z, d, y, model)
    if y < 0:
        return TransitionDensity(free.atom_position, free.atom_weight, 0.0)
    # the mixed density needs c (d - t) > y
    t_max = d - y / model.c
    if t_max <= 0:
        return free
    killed = integrate(
        lambda t: ruin_time_density(model, z, t) * _overshoot_mixed_density(model, d - t, y),
        0.0,
        t_max,
    )
    return TransitionDensity(
        free.atom_position, free.atom_weight, max(0.0, free.density - killed)
    )


# ---------------------------------------------------------------------------
# Value function


def value_below(model: RiskModel, q: float, a: float, va: float, x: float) -> float:
    """v(x) = W(x) / W(a) v(a) for 0 <= x <= a."""
    if not (0.0 <= x <= a):
        raise InvalidArgumentError(f"need 0 <= x <= a, got x={x}, a={a}")
    ev = scale_eval(model, q)
    return W(ev, x) / W(ev, a) * va


def _reascent_factor(model: CramerLundbergExp, q: float, a: float) -> float:
    # int_0^a W(a - y) / W(a) xi exp(-xi y) dy
    ev = scale_eval(model, q)
    xi = model.xi
    total = 0.0
    for k, r in ev.terms:
        total += k * xi * math.exp(r * a) * -math.expm1(-(r + xi) * a) / (r + xi)
    return total / W(ev, a)


def value_above_cl(
    model: CramerLundbergExp,
    q: float,
    spec: PaymentDelaySpec,
    a: float,
    va: float,
    x: float,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> float:
    """v(x) for x >= a under exponential claims."""
    _check_q(q)
    if x < a:
        raise InvalidArgumentError(f"need x >= a, got x={x}, a={a}")
    z, d = x - a, spec.d
    if d == 0.0:
        return z + va
    F_d, _, disc = ruin_time_moments(model, q, z, d, normalization)
    survivor = expected_survivor_position(model, z, d, normalization)
    decay = math.exp(-q * d)
    return decay * survivor + va * (
        decay * (1.0 - F_d) + disc * _reascent_factor(model, q, a)
    )


def value_above_bm(
    model: BrownianDrift,
    q: float,
    spec: PaymentDelaySpec,
    a: float,
    va: float,
    x: float,
) -> float:
    """v(x) for x >= a for Brownian motion with drift (creeping only)."""
    _check_q(q)
    if x < a:
        raise InvalidArgumentError(f"need x >= a, got x={x}, a={a}")
    z, d = x - a, spec.d
    if d == 0.0:
        return z + va
    F_d, _, disc = ruin_time_moments(model, q, z, d)
    decay = math.exp(-q * d)
    return decay * expected_survivor_position(model, z, d) + va * (
        decay * (1.0 - F_d) + disc
    )


def value_above(
    model: RiskModel,
    q: float,
    spec: PaymentDelaySpec,
    a: float,
    va: float,
    x: float,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> float:
    if isinstance(model, CramerLundbergExp):
        return value_above_cl(model, q, spec, a, va, x, normalization)
    return value_above_bm(model, q, spec, a, va, x)


def _paste_slopes_bm(model: BrownianDrift, q: float, d: float) -> Tuple[float, float]:
    """Right derivative of value_above_bm at z = 0+, split as A' + B' v(a).

    Differentiating the closed forms under the time integral gives every
    piece in terms of N and its density at k sqrt(d), k = c / sigma.
    """
    c, s = model.c, model.sigma
    c_q = phi(model, q).c_q
    root_d = math.sqrt(d)
    u = c / s * root_d
    n_u, pdf_u = std_normal_cdf(u), math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    # d/dz E_z[X_d; tau_0- > d] at 0+
    survivor = 1.0 + 2.0 * (n_u - 0.5) + 2.0 * u * u * n_u + 2.0 * u * pdf_u
    # -d/dz F(z, d) at 0+
    survival = 2.0 * pdf_u / (s * root_d) + 2.0 * c / s**2 * n_u
    m = c_q * root_d / s
    n_m, pdf_m = std_normal_cdf(m), math.exp(-0.5 * m * m) / math.sqrt(2.0 * math.pi)
    disc = (c_q - c) / s**2 - 2.0 * c_q * n_m / s**2 - 2.0 * pdf_m / (s * root_d)
    decay = math.exp(-q * d)
    return decay * survivor, decay * survival + disc


@lru_cache(maxsize=256)
def _boundary_value(
    model: RiskModel,
    q: float,
    spec: PaymentDelaySpec,
    a: float,
    normalization: RuinNormalization,
) -> float:
    ev = scale_eval(model, q)
    if spec.d == 0.0:
        return W(ev, a) / W_prime(ev, a)
    if isinstance(model, CramerLundbergExp):
        A = value_above_cl(model, q, spec, a, 0.0, a, normalization)
        B = value_above_cl(model, q, spec, a, 1.0, a, normalization) - A
        if B >= 1.0:
            raise IllPosedBoundaryError(f"coefficient of v(a) is {B} >= 1")
        logger.debug("v(a) linear solve: A=%.12g B=%.12g", A, B)
        return A / (1.0 - B)
    A1, B1 = _paste_slopes_bm(model, q, spec.d)
    denom = W_prime(ev, a) / W(ev, a) - B1
    if denom <= 0.0:
        raise IllPosedBoundaryError(f"smooth-paste denominator {denom} <= 0")
    logger.debug("smooth paste: A'=%.12g B'=%.12g", A1, B1)
    return A1 / denom


def solve_boundary_value(
    model: RiskModel,
    q: float,
    spec: PaymentDelaySpec,
    a: float,
    normalization: RuinNormalization = RuinNormalization.SCALED,
) -> float:
    """v(a), from the linear equation at x = a (exponential claims) or from
    smooth pasting at a (Brownian motion)."""
    _check_q(q)
    if not (math.isfinite(a) and a > 0):
        raise InvalidArgumentError(f"barrier a must be finite and > 0, got {a}")
    return _boundary_value(model, q, spec, a, normalization)


@dataclass(frozen=True)
class PaymentDelayValue:
    """The solved value function x -> v(x) for one barrier."""

    model: RiskModel
    q: float
    spec: PaymentDelaySpec
    a: float
    va: float
    normalization: RuinNormalization = RuinNormalization.SCALED

    @classmethod
    def solve(
        cls,
        model: RiskModel,
        q: float,
        spec: PaymentDelaySpec,
        a: float,
        normalization: RuinNormalization = RuinNormalization.SCALED,
    ) -> "PaymentDelayValue":
        va = solve_boundary_value(model, q, spec, a, normalization)
        return cls(model, q, spec, a, va, normalization)

    def _above(self, x: float) -> float:
        return value_above(
            self.model, self.q, self.spec, self.a, self.va, x, self.normalization
        )

    def __call__(self, x: float) -> float:
        if x < 0:
            raise InvalidArgumentError(f"x must be >= 0, got {x}")
        if x <= self.a:
            return value_below(self.model, self.q, self.a, self.va, x)
        return self._above(x)

    def continuity_gap(self) -> float:
        """|v(a-) - v(a+)|, both sides from their own formula."""
        below = value_below(self.model, self.q, self.a, self.va, self.a)
        above = self._above(self.a)
        return abs(below - above)

    def right_derivative(self) -> float:
        """v'(a+). Closed form for Brownian motion, finite differences otherwise."""
        if isinstance(self.model, BrownianDrift) and self.spec.d > 0.0:
            A1, B1 = _paste_slopes_bm(self.model, self.q, self.spec.d)
            return A1 + B1 * self.va
        return differentiate(self._above, self.a, 1, 1e-3 * max(1.0, self.a), side="forward")

    def derivative_gap(self, h: Optional[float] = None) -> float:
        """|v'(a-) - v'(a+)| by one-sided finite differences."""
        h = h if h is not None else 1e-3 * max(1.0, self.a)
        left = differentiate(
            lambda x: value_below(self.model, self.q, self.a, self.va, x),
            self.a,
            1,
            h,
            side="backward",
        )
        right = differentiate(
            self._above,
            self.a,
            1,
            h,
            side="forward",
        )
        return abs(left - right)

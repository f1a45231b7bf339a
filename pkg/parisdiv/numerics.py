"""Special functions, quadrature, root finding and finite differences."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize, special

from .errors import ConvergenceError, InvalidArgumentError

logger = logging.getLogger(__name__)

# scipy's quad evaluates 21 Gauss-Kronrod nodes per subinterval.
_NODES_PER_INTERVAL = 21
_MAX_SUBINTERVALS = 2000


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 10**6

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise InvalidArgumentError(f"abs_tol must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise InvalidArgumentError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_TOL = Tolerance()


def _check_finite(name: str, x: float) -> None:
    if not math.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite, got {x}")


def bessel_i1(x: float) -> float:
    """Modified Bessel function of the first kind of order one.

    Args:
        x: nonnegative finite argument

    Returns:
        I1(x)
    """
    _check_finite("x", x)
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    return float(special.i1(x))


def bessel_i1e(x: float) -> float:
    """Exponentially scaled I1, that is e^{-x} I1(x)."""
    _check_finite("x", x)
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    return float(special.i1e(x))


def std_normal_cdf(x: float) -> float:
    """Standard normal distribution function N(x)."""
    _check_finite("x", x)
    return float(special.ndtr(x))


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of `f` over [lo, hi].

    Args:
        f: integrand
        lo: lower limit
        hi: upper limit, may be +inf
        tol: requested accuracy
        points: interior break points (finite intervals only)

    Returns:
        estimate of the integral

    Raises:
        ConvergenceError: when the subdivision budget is exhausted before the
            error estimate is acceptable
    """
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise InvalidArgumentError(f"need lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    limit = max(1, min(tol.max_iter // _NODES_PER_INTERVAL, _MAX_SUBINTERVALS))
    kwargs = {}
    if points is not None and math.isfinite(hi):
        inner = sorted(p for p in points if lo < p < hi)
        if inner:
            kwargs["points"] = inner
    out = _integrate.quad(
        f,
        lo,
        hi,
        epsabs=tol.abs_tol,
        epsrel=tol.rel_tol,
        limit=limit,
        full_output=1,
        **kwargs,
    )
    value, abserr = float(out[0]), float(out[1])
    if len(out) == 4:
        target = max(tol.abs_tol, tol.rel_tol * abs(value))
        # quad flags round-off long before the estimate becomes useless
        if not math.isfinite(value) or abserr > 1e4 * target:
            raise ConvergenceError(
                f"quadrature on [{lo}, {hi}] did not converge: {out[3]}",
                best_estimate=value,
                error_estimate=abserr,
            )
        logger.warning(
            "quad warning on [%g, %g] accepted, err=%.3g: %s", lo, hi, abserr, out[3]
        )
    return value


def gauss_legendre(
    f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int = 64
) -> float:
    """Fixed-order Gauss-Legendre rule for a vectorised smooth integrand."""
    if lo == hi:
        return 0.0
    value, _ = _integrate.fixed_quad(f, lo, hi, n=n)
    return float(value)


def find_root_increasing(
    f: Callable[[float], float], lo: float, hi: float, tol: Tolerance = DEFAULT_TOL
) -> float:
    """Root of an increasing function bracketed by [lo, hi] (Brent's method).

    Raises:
        InvalidArgumentError: if f(lo) > 0 or f(hi) < 0
    """
    f_lo, f_hi = f(lo), f(hi)
    if not (f_lo <= 0.0 <= f_hi):
        raise InvalidArgumentError(
            f"root not bracketed: f({lo})={f_lo}, f({hi})={f_hi}"
        )
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    root, info = optimize.brentq(
        f,
        lo,
        hi,
        xtol=tol.abs_tol,
        rtol=max(tol.rel_tol, 4 * np.finfo(float).eps),
        maxiter=min(tol.max_iter, 10_000),
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise ConvergenceError(f"brentq stopped: {info.flag}", best_estimate=root)
    return float(root)


def differentiate(
    f: Callable[[float], float],
    x: float,
    order: int = 1,
    h: float = 1e-5,
    side: str = "central",
) -> float:
    """Finite-difference derivative of `f` at `x`.

    Central differences are O(h^2). `side="forward"` and `side="backward"`
    give first derivatives from one side only, using a second-order
    three-point stencil refined once by Richardson extrapolation.
    """
    if order not in (1, 2):
        raise InvalidArgumentError(f"order must be 1 or 2, got {order}")
    if not h > 0:
        raise InvalidArgumentError(f"h must be > 0, got {h}")

    def sample(t: float) -> float:
        v = f(t)
        if not math.isfinite(v):
            raise InvalidArgumentError(f"non-finite sample f({t}) = {v}")
        return v

    if side == "central":
        if order == 1:
            return (sample(x + h) - sample(x - h)) / (2.0 * h)
        return (sample(x + h) - 2.0 * sample(x) + sample(x - h)) / (h * h)

    if order != 1 or side not in ("forward", "backward"):
        raise InvalidArgumentError(f"unsupported stencil side={side} order={order}")
    s = 1.0 if side == "forward" else -1.0
    f0, f1, f2, f4 = (sample(x + s * k * h / 2.0) for k in (0, 1, 2, 4))
    coarse = s * (-3.0 * f0 + 4.0 * f2 - f4) / (2.0 * h)
    fine = s * (-3.0 * f0 + 4.0 * f1 - f2) / h
    return (4.0 * fine - coarse) / 3.0

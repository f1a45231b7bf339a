"""Reference cases and independent oracles shared by the test-suite."""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

from .dividend_payment_delay import PaymentDelaySpec
from .levy_model import BrownianDrift, CramerLundbergExp, RiskModel
from .parisian_ruin import ParisianSpec


@dataclass(frozen=True)
class ReferenceCase:
    name: str
    model: RiskModel
    q: float
    spec: ParisianSpec
    delay: PaymentDelaySpec
    pay_barrier: float
    # extra absolute tolerance for Euler-discretised simulations
    euler_margin: float = 0.0
    xs: Tuple[float, ...] = field(default=(0.5, 1.0, 2.0))


class ReferenceCases:
    @staticmethod
    def exponential_claims() -> ReferenceCase:
        "Compound Poisson surplus, c=2, lam=1, xi=1"
        return ReferenceCase(
            name="exponential_claims",
            model=CramerLundbergExp(c=2.0, lam=1.0, xi=1.0),
            q=0.1,
            spec=ParisianSpec(1.0),
            delay=PaymentDelaySpec(1.0),
            pay_barrier=2.0,
        )

    @staticmethod
    def brownian_small_claims() -> ReferenceCase:
        "Brownian motion with drift, c=1, sigma=1"
        return ReferenceCase(
            name="brownian_small_claims",
            model=BrownianDrift(c=1.0, sigma=1.0),
            q=0.05,
            spec=ParisianSpec(1.0),
            delay=PaymentDelaySpec(1.0),
            pay_barrier=1.5,
            euler_margin=0.03,
        )

    @classmethod
    def _cases(cls) -> List[Tuple[str, ReferenceCase]]:
        ret = []
        for k in dir(ReferenceCases):
            if callable(getattr(ReferenceCases, k)) and not k.startswith("_"):
                ret.append((k, getattr(cls, k)()))
        return ret


def bessel_i1_series(x: float, terms: int = 200) -> float:
    """I1(x) from its ascending power series, summed until terms vanish."""
    half = 0.5 * x
    term = half
    total = term
    for k in range(1, terms):
        term *= half * half / (k * (k + 1))
        total += term
        if term < 1e-17 * total:
            break
    return total


def normal_cdf_oracle(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def closest_grid_minimum(f, lo: float, hi: float, step: float) -> float:  # noqa: ANN001
    """Plain grid argmin, without refinement."""
    n = int(round((hi - lo) / step))
    best_x, best = lo, f(lo)
    for i in range(1, n + 1):
        x = lo + i * step
        v = f(x)
        if v < best:
            best_x, best = x, v
    return best_x

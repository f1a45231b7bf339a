"""Monte Carlo engines for the controlled surplus.

Cramer-Lundberg paths are simulated exactly, event by event: between claims
the surplus moves linearly, so barrier hits, returns to zero and clock
expiries are all explicit times. Brownian paths use an Euler scheme; the
reflection supremum uses the Brownian-bridge maximum within each step and
barrier crossings for classical ruin and clock cancellation use the bridge
crossing probability. The Parisian clock below zero is plain Euler.

Paths are simulated in batches. Each batch draws from its own stream,
seeded from `SimConfig.seed` through `numpy.random.SeedSequence.spawn`, and
results are concatenated in batch order, so an estimate depends only on
(seed, n_paths, batch_size) and never on the number of workers.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from numba import njit

from .dividend_ruin_delay import BarrierPolicy
from .dividend_payment_delay import PaymentDelaySpec
from .errors import InvalidArgumentError, UnsupportedModelError
from .levy_model import BrownianDrift, CramerLundbergExp, RiskModel, net_profit
from .parisian_ruin import ParisianSpec, classical_ruin_probability

logger = logging.getLogger(__name__)

RUNNING, RUINED, CENSORED, SETTLED = 0, 1, 2, 3
# paths whose classical ruin probability drops below this stop early
_SETTLE_PROBABILITY = 1e-9


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    seed: int = 20240601
    euler_step: float = 1e-3
    horizon_epsilon: float = 1e-10
    batch_size: int = 10_000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise InvalidArgumentError(f"n_paths must be >= 1, got {self.n_paths}")
        if not (0 <= self.seed < 2**64):
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned int, got {self.seed}")
        if not (math.isfinite(self.euler_step) and self.euler_step > 0):
            raise InvalidArgumentError(f"euler_step must be > 0, got {self.euler_step}")
        if not (0 < self.horizon_epsilon < 1):
            raise InvalidArgumentError(
                f"horizon_epsilon must lie in (0, 1), got {self.horizon_epsilon}"
            )
        if self.batch_size < 1:
            raise InvalidArgumentError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.workers < 1:
            raise InvalidArgumentError(f"workers must be >= 1, got {self.workers}")

    def horizon(self, rate: float) -> float:
        """Time after which exp(-rate t) < horizon_epsilon."""
        return math.log(1.0 / self.horizon_epsilon) / rate


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    n_effective: int
    censoring_bias_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.std_error < 0 or self.censoring_bias_bound < 0:
            raise InvalidArgumentError("std_error and censoring_bias_bound must be >= 0")

    @classmethod
    def from_samples(cls, samples: np.ndarray, bias_bound: float = 0.0) -> "SimEstimate":
        n = int(samples.size)
        se = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        if bias_bound > se > 0:
            logger.warning(
                "censoring bias bound %.3g exceeds one standard error %.3g; "
                "lower horizon_epsilon",
                bias_bound,
                se,
            )
        return cls(float(samples.mean()), se, n, float(bias_bound))

    def agrees_with(self, value: float, n_se: float = 3.0, margin: float = 0.0) -> bool:
        """|mean - value| within n_se standard errors plus bias bound and margin."""
        slack = n_se * self.std_error + self.censoring_bias_bound + margin
        return abs(self.mean - value) <= slack


@dataclass(frozen=True)
class ControlledPathState:
    """Snapshot of one controlled path when its simulation stopped."""

    surplus: float
    running_max_offset: float
    parisian_clock: float
    delay_clock: float
    cumulative_discounted_dividends: float
    time: float
    ruined: bool

    def __post_init__(self) -> None:
        if self.parisian_clock < 0:
            raise InvalidArgumentError(f"parisian_clock must be >= 0, got {self.parisian_clock}")
        if self.surplus >= 0 and self.parisian_clock != 0:
            raise InvalidArgumentError("parisian_clock must be 0 while surplus >= 0")


# ---------------------------------------------------------------------------
# Cramer-Lundberg kernels (exact)


@njit(cache=True, nogil=True)
def _cl_ruin_delay_kernel(c, lam, xi, q, zeta, a, x, horizon, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    values = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    final_u = np.zeros(n)
    final_clock = np.zeros(n)
    final_time = np.zeros(n)
    paid = np.zeros(n)
    for i in range(n):
        t = 0.0
        u = x
        value = 0.0
        total = 0.0
        state = RUNNING
        clock_start = 0.0
        if u > a:
            value += u - a
            total += u - a
            u = a
        while state == RUNNING:
            if u >= 0.0:
                w = np.random.exponential(mean_wait)
                s_a = (a - u) / c
                if t + w > horizon:
                    if t + s_a < horizon:
                        value += c * (math.exp(-q * (t + s_a)) - math.exp(-q * horizon)) / q
                        total += c * (horizon - t - s_a)
                        u = a
                    else:
                        u += c * (horizon - t)
                    t = horizon
                    state = CENSORED
                    break
                if w <= s_a:
                    u += c * w
                else:
                    value += c * (math.exp(-q * (t + s_a)) - math.exp(-q * (t + w))) / q
                    total += c * (w - s_a)
                    u = a
                t += w
                u -= np.random.exponential(mean_claim)
                if u < 0.0:
                    clock_start = t
                    if zeta == 0.0:
                        state = RUINED
            else:
                # excursion below zero: climbs back at rate c unless a claim comes first
                r = -u / c
                w = np.random.exponential(mean_wait)
                step = min(r, w)
                if clock_start + zeta <= t + step:
                    u += c * (clock_start + zeta - t)
                    t = clock_start + zeta
                    state = RUINED
                    break
                if t + step > horizon:
                    u += c * (horizon - t)
                    t = horizon
                    state = CENSORED
                    break
                if w < r:
                    t += w
                    u += c * w - np.random.exponential(mean_claim)
                else:
                    t += r
                    u = 0.0
        values[i] = value
        status[i] = state
        final_u[i] = u
        final_time[i] = t
        final_clock[i] = t - clock_start if u < 0.0 else 0.0
        paid[i] = total
    return values, status, final_u, final_clock, final_time, paid


@njit(cache=True, nogil=True)
def _cl_parisian_ruin_kernel(c, lam, xi, zeta, x, time_cap, u_settle, n, seed):  # noqa: ANN001, ANN202
    # x may be negative: the path then starts inside an excursion at t = 0
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    status = np.zeros(n, dtype=np.int64)
    final_u = np.zeros(n)
    final_time = np.zeros(n)
    for i in range(n):
        t = 0.0
        u = x
        state = RUNNING
        clock_start = 0.0
        if u < 0.0 and zeta == 0.0:
            state = RUINED
        while state == RUNNING:
            if u >= u_settle:
                state = SETTLED
                break
            if u >= 0.0:
                w = np.random.exponential(mean_wait)
                if t + w > time_cap:
                    u += c * (time_cap - t)
                    t = time_cap
                    state = CENSORED
                    break
                t += w
                u += c * w - np.random.exponential(mean_claim)
                if u < 0.0:
                    clock_start = t
                    if zeta == 0.0:
                        state = RUINED
            else:
                r = -u / c
                w = np.random.exponential(mean_wait)
                step = min(r, w)
                if clock_start + zeta <= t + step:
                    u += c * (clock_start + zeta - t)
                    t = clock_start + zeta
                    state = RUINED
                    break
                if t + step > time_cap:
                    u += c * (time_cap - t)
                    t = time_cap
                    state = CENSORED
                    break
                if w < r:
                    t += w
                    u += c * w - np.random.exponential(mean_claim)
                else:
                    t += r
                    u = 0.0
        status[i] = state
        final_u[i] = u
        final_time[i] = t
    return status, final_u, final_time


@njit(cache=True, nogil=True)
def _cl_payment_delay_kernel(c, lam, xi, q, d, a, x, horizon, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    values = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    final_u = np.zeros(n)
    final_delay = np.zeros(n)
    for i in range(n):
        t = 0.0
        u = x
        value = 0.0
        state = RUNNING
        # the decision is taken as soon as the surplus is at or above a
        clock_on = u >= a
        clock_start = 0.0
        while state == RUNNING:
            w = np.random.exponential(mean_wait)
            if clock_on:
                expiry = clock_start + d
                if t + w >= expiry:
                    if expiry > horizon:
                        u += c * (horizon - t)
                        t = horizon
                        state = CENSORED
                        break
                    u += c * (expiry - t)
                    t = expiry
                    value += math.exp(-q * t) * (u - a)
                    u = a
                    clock_start = t
                    continue
            else:
                s_a = (a - u) / c
                if w >= s_a:
                    if t + s_a > horizon:
                        u += c * (horizon - t)
                        t = horizon
                        state = CENSORED
                        break
                    t += s_a
                    u = a
                    clock_on = True
                    clock_start = t
                    continue
            if t + w > horizon:
                u += c * (horizon - t)
                t = horizon
                state = CENSORED
                break
            t += w
            u += c * w - np.random.exponential(mean_claim)
            if u < a:
                clock_on = False
            if u < 0.0:
                state = RUINED
        values[i] = value
        status[i] = state
        final_u[i] = u
        final_delay[i] = t - clock_start if clock_on else 0.0
    return values, status, final_u, final_delay


@njit(cache=True, nogil=True)
def _cl_exit_kernel(c, lam, xi, q, z, a, time_cap, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    up = np.zeros(n)
    down = np.zeros(n)
    for i in range(n):
        t = 0.0
        u = z
        while True:
            w = np.random.exponential(mean_wait)
            s_a = (a - u) / c
            if w >= s_a:
                if t + s_a <= time_cap:
                    up[i] = math.exp(-q * (t + s_a))
                break
            t += w
            if t > time_cap:
                break
            u += c * w - np.random.exponential(mean_claim)
            if u < 0.0:
                down[i] = math.exp(-q * t)
                break
    return up, down


@njit(cache=True, nogil=True)
def _cl_killed_occupation_kernel(c, lam, xi, alpha, z, horizon, n, seed):  # noqa: ANN001, ANN202
    # integral of exp(-alpha s) X_s over [0, min(tau_0-, horizon)]
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    out = np.zeros(n)
    for i in range(n):
        t = 0.0
        u = z
        acc = 0.0
        while True:
            w = np.random.exponential(mean_wait)
            end = min(t + w, horizon)
            length = end - t
            e0 = math.exp(-alpha * t)
            e1 = math.exp(-alpha * end)
            acc += u * (e0 - e1) / alpha + c * ((e0 - e1) / (alpha * alpha) - length * e1 / alpha)
            if t + w >= horizon:
                break
            t += w
            u += c * w - np.random.exponential(mean_claim)
            if u < 0.0:
                break
        out[i] = acc
    return out


@njit(cache=True, nogil=True)
def _cl_excursion_kernel(c, lam, xi, zeta, n, seed):  # noqa: ANN001, ANN202
    # 1 when the climb back to 0 from an Exp(xi) undershoot outlasts zeta
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    out = np.zeros(n)
    for i in range(n):
        t = 0.0
        u = -np.random.exponential(mean_claim)
        while True:
            r = -u / c
            w = np.random.exponential(mean_wait)
            if t + min(r, w) >= zeta:
                out[i] = 1.0
                break
            if w < r:
                t += w
                u += c * w - np.random.exponential(mean_claim)
            else:
                break
    return out


@njit(cache=True, nogil=True)
def _cl_free_position_kernel(c, lam, xi, x, horizon, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    mean_wait = 1.0 / lam
    mean_claim = 1.0 / xi
    out = np.zeros(n)
    for i in range(n):
        t = 0.0
        claims = 0.0
        while True:
            t += np.random.exponential(mean_wait)
            if t > horizon:
                break
            claims += np.random.exponential(mean_claim)
        out[i] = x + c * horizon - claims
    return out


# ---------------------------------------------------------------------------
# Brownian kernels (Euler)


@njit(cache=True, nogil=True)
def _crossed(gap0, gap1, var_step):  # noqa: ANN001, ANN202
    # bridge probability of touching the level between two points above it
    return np.random.random() < math.exp(-2.0 * gap0 * gap1 / var_step)


@njit(cache=True, nogil=True)
def _bm_ruin_delay_kernel(c, sigma, q, zeta, a, x, dt, horizon, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    sd = sigma * math.sqrt(dt)
    var_step = sigma * sigma * dt
    n_steps = int(math.ceil(horizon / dt))
    values = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    final_u = np.zeros(n)
    final_clock = np.zeros(n)
    final_time = np.zeros(n)
    paid = np.zeros(n)
    for i in range(n):
        X = x
        m = max(a, x)
        value = m - a
        clock = 0.0
        t = 0.0
        state = CENSORED
        u = X - (m - a)
        for _ in range(n_steps):
            X_new = X + c * dt + sd * np.random.standard_normal()
            diff = X_new - X
            peak = 0.5 * (X + X_new + math.sqrt(diff * diff - 2.0 * var_step * math.log(1.0 - np.random.random())))
            t += dt
            if peak > m:
                value += math.exp(-q * t) * (peak - m)
                m = peak
            u_new = X_new - (m - a)
            X = X_new
            if zeta == 0.0:
                if u_new < 0.0 or (u > 0.0 and _crossed(u, u_new, var_step)):
                    state = RUINED
                    u = u_new
                    break
            elif u_new < 0.0:
                clock += dt
                if clock >= zeta:
                    state = RUINED
                    u = u_new
                    break
            else:
                clock = 0.0
            u = u_new
        values[i] = value
        status[i] = state
        final_u[i] = u
        final_clock[i] = clock if u < 0.0 else 0.0
        final_time[i] = t
        paid[i] = m - a
    return values, status, final_u, final_clock, final_time, paid


@njit(cache=True, nogil=True)
def _bm_parisian_ruin_kernel(c, sigma, zeta, x, dt, time_cap, u_settle, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    sd = sigma * math.sqrt(dt)
    var_step = sigma * sigma * dt
    n_steps = int(math.ceil(time_cap / dt))
    status = np.zeros(n, dtype=np.int64)
    final_u = np.zeros(n)
    final_time = np.zeros(n)
    for i in range(n):
        u = x
        clock = 0.0
        t = 0.0
        state = CENSORED
        if u < 0.0 and zeta == 0.0:
            state = RUINED
        else:
            for _ in range(n_steps):
                if u >= u_settle:
                    state = SETTLED
                    break
                u_new = u + c * dt + sd * np.random.standard_normal()
                t += dt
                if zeta == 0.0:
                    if u_new < 0.0 or (u > 0.0 and _crossed(u, u_new, var_step)):
                        u = u_new
                        state = RUINED
                        break
                elif u_new < 0.0:
                    clock += dt
                    if clock >= zeta:
                        u = u_new
                        state = RUINED
                        break
                else:
                    clock = 0.0
                u = u_new
        status[i] = state
        final_u[i] = u
        final_time[i] = t
    return status, final_u, final_time


@njit(cache=True, nogil=True)
def _bm_payment_delay_kernel(c, sigma, q, d, a, x, dt, horizon, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    sd = sigma * math.sqrt(dt)
    var_step = sigma * sigma * dt
    n_steps = int(math.ceil(horizon / dt))
    values = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    final_u = np.zeros(n)
    final_delay = np.zeros(n)
    for i in range(n):
        u = x
        value = 0.0
        t = 0.0
        # age of the current uninterrupted stay at or above a
        age = 0.0
        state = CENSORED
        for _ in range(n_steps):
            u_new = u + c * dt + sd * np.random.standard_normal()
            t += dt
            if u_new < 0.0 or _crossed(u, u_new, var_step):
                u = u_new
                state = RUINED
                break
            if u >= a and u_new >= a and not _crossed(u - a, u_new - a, var_step):
                age += dt
                if age >= d:
                    value += math.exp(-q * t) * (u_new - a)
                    u_new = a
                    age = 0.0
            else:
                age = 0.0
            u = u_new
        values[i] = value
        status[i] = state
        final_u[i] = u
        final_delay[i] = age
    return values, status, final_u, final_delay


@njit(cache=True, nogil=True)
def _bm_exit_kernel(c, sigma, q, z, a, dt, time_cap, n, seed):  # noqa: ANN001, ANN202
    np.random.seed(seed)
    sd = sigma * math.sqrt(dt)
    var_step = sigma * sigma * dt
    n_steps = int(math.ceil(time_cap / dt))
    up = np.zeros(n)
    down = np.zeros(n)
    for i in range(n):
        u = z
        t = 0.0
        if z <= 0.0:
            down[i] = 1.0
            continue
        if z >= a:
            up[i] = 1.0
            continue
        for _ in range(n_steps):
            u_new = u + c * dt + sd * np.random.standard_normal()
            t += dt
            if u_new <= 0.0 or _crossed(u, u_new, var_step):
                down[i] = math.exp(-q * t)
                break
            if u_new >= a or _crossed(a - u, a - u_new, var_step):
                up[i] = math.exp(-q * t)
                break
            u = u_new
    return up, down


# ---------------------------------------------------------------------------
# Batch driver


def _batch_plan(cfg: SimConfig) -> List[Tuple[int, int]]:
    sizes = [cfg.batch_size] * (cfg.n_paths // cfg.batch_size)
    if cfg.n_paths % cfg.batch_size:
        sizes.append(cfg.n_paths % cfg.batch_size)
    children = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    seeds = [int(child.generate_state(1, dtype=np.uint32)[0]) for child in children]
    return list(zip(sizes, seeds))


def run_batches(
    kernel: Callable[[int, int], Tuple[np.ndarray, ...]], cfg: SimConfig
) -> Tuple[np.ndarray, ...]:
    """Run `kernel(n, seed)` over the batch plan and concatenate in batch order."""
    plan = _batch_plan(cfg)
    logger.info(
        "simulating %d paths in %d batches on %d worker(s)",
        cfg.n_paths,
        len(plan),
        cfg.workers,
    )
    if cfg.workers == 1:
        results = [kernel(n, seed) for n, seed in plan]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda p: kernel(*p), plan))
    return tuple(np.concatenate(parts) for parts in zip(*results))


def _check_q(q: float) -> None:
    if not (math.isfinite(q) and q > 0):
        raise InvalidArgumentError(f"q must be finite and > 0, got {q}")


def _check_model(model: RiskModel) -> None:
    if not isinstance(model, (CramerLundbergExp, BrownianDrift)):
        raise UnsupportedModelError(f"unsupported model type {type(model).__name__}")


def _residual_dividend_bound(
    model: RiskModel, q: float, cfg: SimConfig, status: np.ndarray, final_u: np.ndarray
) -> float:
    # discounted dividends after the horizon from U_T are at most
    # U_T + c/q (+ sigma / sqrt(2 q) for the Brownian supremum)
    extra = model.c / q
    if isinstance(model, BrownianDrift):
        extra += model.sigma / math.sqrt(2.0 * q)
    alive = status == CENSORED
    residual = np.where(alive, np.maximum(final_u, 0.0) + extra, 0.0)
    return cfg.horizon_epsilon * float(residual.mean())


def _ruin_delay_arrays(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: float,
    cfg: SimConfig,
    horizon: float,
) -> Tuple[np.ndarray, ...]:
    if isinstance(model, CramerLundbergExp):

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _cl_ruin_delay_kernel(
                model.c, model.lam, model.xi, q, spec.zeta, policy.a, x, horizon, n, seed
            )

    else:
        _check_model(model)

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _bm_ruin_delay_kernel(
                model.c, model.sigma, q, spec.zeta, policy.a, x, cfg.euler_step, horizon, n, seed
            )

    return run_batches(kernel, cfg)


def simulate_ruin_delay(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: float,
    cfg: SimConfig,
) -> SimEstimate:
    """Discounted dividends of the barrier strategy with Parisian ruin."""
    _check_q(q)
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    values, status, final_u, *_ = _ruin_delay_arrays(
        model, q, spec, policy, x, cfg, cfg.horizon(q)
    )
    bound = _residual_dividend_bound(model, q, cfg, status, final_u)
    return SimEstimate.from_samples(values, bound)


def simulate_ruin_delay_states(
    model: RiskModel,
    q: float,
    spec: ParisianSpec,
    policy: BarrierPolicy,
    x: float,
    cfg: SimConfig,
    time_cap: float,
) -> List[ControlledPathState]:
    """Final states of barrier-controlled paths stopped at ruin or `time_cap`."""
    _check_q(q)
    values, status, final_u, final_clock, final_time, paid = _ruin_delay_arrays(
        model, q, spec, policy, x, cfg, time_cap
    )
    return [
        ControlledPathState(
            surplus=float(final_u[i]),
            running_max_offset=float(paid[i]),
            parisian_clock=float(final_clock[i]),
            delay_clock=0.0,
            cumulative_discounted_dividends=float(values[i]),
            time=float(final_time[i]),
            ruined=bool(status[i] == RUINED),
        )
        for i in range(values.size)
    ]


def simulate_payment_delay(
    model: RiskModel,
    q: float,
    spec: PaymentDelaySpec,
    policy: BarrierPolicy,
    x: float,
    cfg: SimConfig,
) -> SimEstimate:
    """Discounted dividends of the barrier strategy with delayed payments."""
    _check_q(q)
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    if spec.d == 0.0:
        return simulate_ruin_delay(model, q, ParisianSpec(0.0), policy, x, cfg)
    horizon = cfg.horizon(q)
    a = policy.a
    if isinstance(model, CramerLundbergExp):

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _cl_payment_delay_kernel(
                model.c, model.lam, model.xi, q, spec.d, a, x, horizon, n, seed
            )

    else:
        _check_model(model)

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _bm_payment_delay_kernel(
                model.c, model.sigma, q, spec.d, a, x, cfg.euler_step, horizon, n, seed
            )

    values, status, final_u, _ = run_batches(kernel, cfg)
    bound = _residual_dividend_bound(model, q, cfg, status, final_u)
    return SimEstimate.from_samples(values, bound)


def _settle_level(model: RiskModel) -> float:
    # classical ruin probability from this level is below _SETTLE_PROBABILITY
    if isinstance(model, CramerLundbergExp):
        rate = model.xi - model.lam / model.c
        return max(0.0, math.log(model.lam / (model.c * model.xi) / _SETTLE_PROBABILITY) / rate)
    return math.log(1.0 / _SETTLE_PROBABILITY) * model.sigma**2 / (2.0 * model.c)


def _parisian_ruin_arrays(
    model: RiskModel,
    zeta: float,
    x: float,
    cfg: SimConfig,
    time_cap: float,
    u_settle: float,
) -> Tuple[np.ndarray, ...]:
    if isinstance(model, CramerLundbergExp):

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _cl_parisian_ruin_kernel(
                model.c, model.lam, model.xi, zeta, x, time_cap, u_settle, n, seed
            )

    else:
        _check_model(model)

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _bm_parisian_ruin_kernel(
                model.c, model.sigma, zeta, x, cfg.euler_step, time_cap, u_settle, n, seed
            )

    return run_batches(kernel, cfg)


def simulate_parisian_ruin_prob(
    model: RiskModel,
    spec: ParisianSpec,
    x: float,
    cfg: SimConfig,
    time_cap: float,
) -> SimEstimate:
    """Frequency of Parisian ruin before `time_cap`.

    The censoring bound averages, over paths still alive at the cap, the
    classical ruin probability from their final surplus (one for paths that
    are below zero at the cap).
    """
    mu = net_profit(model)
    if mu <= 0:
        raise UnsupportedModelError(f"net profit psi'(0+) = {mu} <= 0")
    if not (math.isfinite(time_cap) and time_cap > 0):
        raise InvalidArgumentError(f"time_cap must be finite and > 0, got {time_cap}")
    if x < 0:
        raise InvalidArgumentError(f"x must be >= 0, got {x}")
    status, final_u, _ = _parisian_ruin_arrays(
        model, spec.zeta, x, cfg, time_cap, _settle_level(model)
    )
    ruined = (status == RUINED).astype(float)
    alive = status != RUINED
    tail = np.array(
        [classical_ruin_probability(model, float(u)) for u in final_u[alive]]
    )
    bound = float(tail.sum()) / status.size if tail.size else 0.0
    return SimEstimate.from_samples(ruined, bound)


def simulate_finite_time_ruin(
    model: RiskModel, x: float, t: float, cfg: SimConfig
) -> SimEstimate:
    """Frequency of classical ruin before time t."""
    if x < 0 or not t > 0:
        raise InvalidArgumentError(f"need x >= 0 and t > 0, got x={x}, t={t}")
    status, _, _ = _parisian_ruin_arrays(model, 0.0, x, cfg, t, math.inf)
    return SimEstimate.from_samples((status == RUINED).astype(float))


def simulate_exit(
    model: RiskModel,
    q: float,
    z: float,
    a: float,
    cfg: SimConfig,
    time_cap: Optional[float] = None,
) -> Tuple[SimEstimate, SimEstimate]:
    """Estimates of E_z[exp(-q tau_a+); up first] and E_z[exp(-q tau_0-); down first]."""
    if not (0.0 <= z <= a) or a <= 0:
        raise InvalidArgumentError(f"need 0 <= z <= a and a > 0, got z={z}, a={a}")
    if q < 0:
        raise InvalidArgumentError(f"q must be >= 0, got {q}")
    cap = time_cap if time_cap is not None else (cfg.horizon(q) if q > 0 else 1e3)
    if isinstance(model, CramerLundbergExp):

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _cl_exit_kernel(model.c, model.lam, model.xi, q, z, a, cap, n, seed)

    else:
        _check_model(model)

        def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
            return _bm_exit_kernel(model.c, model.sigma, q, z, a, cfg.euler_step, cap, n, seed)

    up, down = run_batches(kernel, cfg)
    return SimEstimate.from_samples(up), SimEstimate.from_samples(down)


def simulate_killed_position_transform(
    model: RiskModel, alpha: float, z: float, cfg: SimConfig
) -> SimEstimate:
    """Estimate of the integral of exp(-alpha s) E_z[X_s; tau_0- > s] ds."""
    if not isinstance(model, CramerLundbergExp):
        raise UnsupportedModelError("killed occupation sampling needs CramerLundbergExp")
    if not alpha > 0 or z < 0:
        raise InvalidArgumentError(f"need alpha > 0 and z >= 0, got {alpha}, {z}")
    horizon = cfg.horizon(alpha)

    def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
        return (
            _cl_killed_occupation_kernel(model.c, model.lam, model.xi, alpha, z, horizon, n, seed),
        )

    (out,) = run_batches(kernel, cfg)
    return SimEstimate.from_samples(out)


def simulate_excursion_survival(
    tilted: CramerLundbergExp, zeta: float, cfg: SimConfig
) -> SimEstimate:
    """Probability that a climb from an Exp(xi) undershoot back to 0 outlasts zeta."""
    if not isinstance(tilted, CramerLundbergExp):
        raise UnsupportedModelError("excursion sampling needs CramerLundbergExp")

    def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
        return (_cl_excursion_kernel(tilted.c, tilted.lam, tilted.xi, zeta, n, seed),)

    (out,) = run_batches(kernel, cfg)
    return SimEstimate.from_samples(out)


def simulate_free_position(
    model: CramerLundbergExp, x: float, t: float, cfg: SimConfig
) -> SimEstimate:
    """Mean of the uncontrolled surplus X_t, no ruin."""
    if not isinstance(model, CramerLundbergExp):
        raise UnsupportedModelError("free-path sampling needs CramerLundbergExp")

    def kernel(n: int, seed: int) -> Tuple[np.ndarray, ...]:
        return (_cl_free_position_kernel(model.c, model.lam, model.xi, x, t, n, seed),)

    (out,) = run_batches(kernel, cfg)
    return SimEstimate.from_samples(out)

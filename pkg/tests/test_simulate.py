import math

import numpy as np
import pytest

from parisdiv import (
    BarrierPolicy,
    BesselRadicand,
    BrownianDrift,
    CramerLundbergExp,
    InvalidArgumentError,
    ParisianSpec,
    PaymentDelaySpec,
    PaymentDelayValue,
    ReferenceCase,
    ReferenceCases,
    RiskModel,
    SimConfig,
    SimEstimate,
    UnsupportedModelError,
    cl_survival_factor,
    exit_down,
    exit_up,
    expected_position_transform,
    finite_time_ruin_bm,
    finite_time_ruin_cl,
    net_profit,
    optimal_barrier,
    parisian_ruin_probability,
    phi,
    scale_eval,
    simulate_excursion_survival,
    simulate_exit,
    simulate_finite_time_ruin,
    simulate_free_position,
    simulate_killed_position_transform,
    simulate_parisian_ruin_prob,
    simulate_payment_delay,
    simulate_ruin_delay,
    simulate_ruin_delay_states,
    tilt,
    value_ruin_delay,
)
from parisdiv.simulate import CENSORED, RUINED, _batch_plan, _cl_parisian_ruin_kernel

CL = CramerLundbergExp(c=2.0, lam=1.0, xi=1.0)
BM = BrownianDrift(c=1.0, sigma=1.0)
SMALL = SimConfig(n_paths=2000, seed=7, batch_size=500)
# Euler runs: coarser steps and a shorter horizon, with the matching censoring bound
EULER = SimConfig(n_paths=20_000, seed=11, euler_step=5e-3, horizon_epsilon=1e-3, batch_size=2500)
N_SE = 3.0


def _euler_margin(case: ReferenceCase, value: float) -> float:
    return case.euler_margin + 0.02 * abs(value)


@pytest.mark.simulate
def test_config_validation() -> None:
    with pytest.raises(InvalidArgumentError):
        SimConfig(n_paths=0)
    with pytest.raises(InvalidArgumentError):
        SimConfig(workers=0)
    with pytest.raises(InvalidArgumentError):
        SimConfig(euler_step=0.0)
    with pytest.raises(InvalidArgumentError):
        SimConfig(horizon_epsilon=1.0)
    with pytest.raises(InvalidArgumentError):
        SimConfig(seed=-1)
    horizon = SimConfig(horizon_epsilon=math.exp(-10.0)).horizon(0.5)
    assert abs(horizon - 20.0) <= 1e-12


@pytest.mark.simulate
def test_batch_plan() -> None:
    plan = _batch_plan(SimConfig(n_paths=1234, batch_size=500))
    assert [n for n, _ in plan] == [500, 500, 234]
    assert len({seed for _, seed in plan}) == 3
    assert plan == _batch_plan(SimConfig(n_paths=1234, batch_size=500))


@pytest.mark.simulate
def test_estimate() -> None:
    est = SimEstimate.from_samples(np.array([1.0, 2.0, 3.0, 4.0]), bias_bound=0.1)
    assert est.mean == 2.5
    assert est.n_effective == 4
    assert abs(est.std_error - math.sqrt(5.0 / 3.0) / 2.0) <= 1e-15
    assert est.agrees_with(2.5 + 3.0 * est.std_error + 0.05)
    assert not est.agrees_with(2.5 + 3.0 * est.std_error + 0.2)
    assert est.agrees_with(2.5 + 3.0 * est.std_error + 0.2, margin=0.15)


@pytest.mark.simulate
@pytest.mark.parametrize("model", [CL, BM])
def test_deterministic_in_seed_and_workers(model: RiskModel) -> None:
    policy = BarrierPolicy(1.5)
    spec = ParisianSpec(1.0)
    cfg = SimConfig(n_paths=800, seed=3, batch_size=200, euler_step=1e-2, horizon_epsilon=1e-2)
    one = simulate_ruin_delay(model, 0.1, spec, policy, 1.0, cfg)
    again = simulate_ruin_delay(model, 0.1, spec, policy, 1.0, cfg)
    threaded = simulate_ruin_delay(
        model,
        0.1,
        spec,
        policy,
        1.0,
        SimConfig(n_paths=800, seed=3, batch_size=200, euler_step=1e-2, horizon_epsilon=1e-2, workers=4),
    )
    other = simulate_ruin_delay(
        model,
        0.1,
        spec,
        policy,
        1.0,
        SimConfig(n_paths=800, seed=4, batch_size=200, euler_step=1e-2, horizon_epsilon=1e-2),
    )
    assert one == again
    assert one == threaded
    assert one.mean != other.mean


@pytest.mark.simulate
def test_parisian_clock_from_below_zero() -> None:
    # without claims the surplus climbs back at rate c
    status, final_u, final_time = _cl_parisian_ruin_kernel(
        1.0, 1e-12, 1.0, 1.0, -0.5, 10.0, math.inf, 5, 1
    )
    assert (status == CENSORED).all()
    assert np.allclose(final_u, 9.5)
    assert np.allclose(final_time, 10.0)
    status, final_u, final_time = _cl_parisian_ruin_kernel(
        1.0, 1e-12, 1.0, 1.0, -1.5, 10.0, math.inf, 5, 1
    )
    assert (status == RUINED).all()
    assert np.allclose(final_u, -0.5)
    assert np.allclose(final_time, 1.0)
    status, _, _ = _cl_parisian_ruin_kernel(1.0, 1e-12, 1.0, 0.0, -0.5, 10.0, math.inf, 5, 1)
    assert (status == RUINED).all()


@pytest.mark.simulate
@pytest.mark.parametrize("model", [CL, BM])
def test_path_states(model: RiskModel) -> None:
    a, zeta = 1.5, 0.5
    cfg = SimConfig(n_paths=500, seed=5, batch_size=250, euler_step=1e-2)
    states = simulate_ruin_delay_states(model, 0.1, ParisianSpec(zeta), BarrierPolicy(a), 1.0, cfg, 5.0)
    assert len(states) == 500
    assert any(s.ruined for s in states)
    for s in states:
        assert s.surplus <= a + 1e-12
        assert s.running_max_offset >= 0.0
        assert s.time <= 5.0 + 1e-9
        if s.ruined:
            assert s.surplus < 0.0
            assert s.parisian_clock >= zeta - 1e-9
        else:
            assert s.parisian_clock < zeta


@pytest.mark.simulate
def test_zero_delay_is_zero_window() -> None:
    policy = BarrierPolicy(1.5)
    a = simulate_payment_delay(CL, 0.1, PaymentDelaySpec(0.0), policy, 1.0, SMALL)
    b = simulate_ruin_delay(CL, 0.1, ParisianSpec(0.0), policy, 1.0, SMALL)
    assert a == b


@pytest.mark.simulate
def test_validation() -> None:
    with pytest.raises(InvalidArgumentError):
        simulate_ruin_delay(CL, 0.0, ParisianSpec(1.0), BarrierPolicy(1.0), 1.0, SMALL)
    with pytest.raises(InvalidArgumentError):
        simulate_parisian_ruin_prob(CL, ParisianSpec(1.0), 1.0, SMALL, 0.0)
    with pytest.raises(InvalidArgumentError):
        simulate_exit(CL, 0.1, 2.0, 1.0, SMALL)
    with pytest.raises(UnsupportedModelError):
        simulate_killed_position_transform(BM, 0.5, 1.0, SMALL)


# Monte Carlo agreement with the closed forms


@pytest.mark.slow
@pytest.mark.simulate
def test_value_ruin_delay_exponential_claims() -> None:
    case = ReferenceCases.exponential_claims()
    a_star = optimal_barrier(case.model, case.q, case.spec)
    policy = BarrierPolicy(a_star)
    cfg = SimConfig(n_paths=200_000, seed=2024)
    for x in (0.5 * a_star, a_star, a_star + 1.0):
        est = simulate_ruin_delay(case.model, case.q, case.spec, policy, x, cfg)
        exact = value_ruin_delay(case.model, case.q, case.spec, policy, x)
        assert est.agrees_with(exact, N_SE), (x, est, exact)


@pytest.mark.slow
@pytest.mark.simulate
def test_value_ruin_delay_brownian() -> None:
    case = ReferenceCases.brownian_small_claims()
    a_star = optimal_barrier(case.model, case.q, case.spec)
    policy = BarrierPolicy(a_star)
    for x in (0.5 * a_star, a_star, a_star + 1.0):
        est = simulate_ruin_delay(case.model, case.q, case.spec, policy, x, EULER)
        exact = value_ruin_delay(case.model, case.q, case.spec, policy, x)
        assert est.agrees_with(exact, N_SE, _euler_margin(case, exact)), (x, est, exact)


@pytest.mark.slow
@pytest.mark.simulate
def test_value_payment_delay_exponential_claims() -> None:
    case = ReferenceCases.exponential_claims()
    value = PaymentDelayValue.solve(case.model, case.q, case.delay, case.pay_barrier)
    policy = BarrierPolicy(case.pay_barrier)
    cfg = SimConfig(n_paths=200_000, seed=99)
    for x in (1.0, 2.0, 3.0):
        est = simulate_payment_delay(case.model, case.q, case.delay, policy, x, cfg)
        assert est.agrees_with(value(x), N_SE), (x, est, value(x))


@pytest.mark.slow
@pytest.mark.simulate
def test_value_payment_delay_brownian() -> None:
    case = ReferenceCases.brownian_small_claims()
    value = PaymentDelayValue.solve(case.model, case.q, case.delay, case.pay_barrier)
    policy = BarrierPolicy(case.pay_barrier)
    for x in (1.0, 2.0):
        est = simulate_payment_delay(case.model, case.q, case.delay, policy, x, EULER)
        exact = value(x)
        assert est.agrees_with(exact, N_SE, _euler_margin(case, exact)), (x, est, exact)


@pytest.mark.slow
@pytest.mark.simulate
@pytest.mark.parametrize("name, case", ReferenceCases._cases())
def test_parisian_ruin_probability(name: str, case: ReferenceCase) -> None:
    cfg = SimConfig(n_paths=100_000, seed=17, euler_step=1e-3)
    if isinstance(case.model, BrownianDrift):
        cfg = SimConfig(n_paths=100_000, seed=17, euler_step=1e-3, batch_size=5000)
    for x in (0.5, 1.0, 2.0):
        est = simulate_parisian_ruin_prob(case.model, case.spec, x, cfg, 200.0)
        exact = parisian_ruin_probability(case.model, case.spec, x)
        assert est.agrees_with(exact, N_SE, case.euler_margin), (x, est, exact)


@pytest.mark.slow
@pytest.mark.simulate
def test_finite_time_ruin() -> None:
    est = simulate_finite_time_ruin(CL, 1.0, 5.0, SimConfig(n_paths=100_000, seed=23))
    assert est.agrees_with(finite_time_ruin_cl(1.0, 5.0, CL), N_SE)
    cfg = SimConfig(n_paths=20_000, seed=23, euler_step=1e-3, batch_size=2500)
    est = simulate_finite_time_ruin(BM, 1.0, 2.0, cfg)
    assert est.agrees_with(finite_time_ruin_bm(1.0, 2.0, BM), N_SE, 0.005)


@pytest.mark.slow
@pytest.mark.simulate
def test_two_sided_exit() -> None:
    q, z, a = 0.1, 1.0, 3.0
    up, down = simulate_exit(CL, q, z, a, SimConfig(n_paths=50_000, seed=29))
    ev = scale_eval(CL, q)
    assert up.agrees_with(exit_up(ev, z, a), N_SE)
    assert down.agrees_with(exit_down(ev, z, a), N_SE)


@pytest.mark.slow
@pytest.mark.simulate
def test_killed_position_transform() -> None:
    alpha, z = 0.5, 1.0
    est = simulate_killed_position_transform(CL, alpha, z, SimConfig(n_paths=50_000, seed=31))
    assert est.agrees_with(expected_position_transform(CL, alpha, z), N_SE)


@pytest.mark.slow
@pytest.mark.simulate
def test_excursion_survival() -> None:
    tilted = tilt(CL, phi(CL, 0.1).phi_q)
    for zeta in (0.25, 1.0):
        est = simulate_excursion_survival(tilted, zeta, SimConfig(n_paths=50_000, seed=37))
        assert est.agrees_with(cl_survival_factor(tilted, zeta), N_SE)


@pytest.mark.slow
@pytest.mark.simulate
def test_free_position() -> None:
    est = simulate_free_position(CL, 1.0, 3.0, SimConfig(n_paths=50_000, seed=41))
    assert est.agrees_with(1.0 + net_profit(CL) * 3.0, N_SE)


@pytest.mark.simulate
def test_remote_barrier_pays_almost_nothing() -> None:
    q, x = 1.0, 1.0
    spec, a = PaymentDelaySpec(1.0), x + 20.0
    est = simulate_payment_delay(CL, q, spec, BarrierPolicy(a), x, SMALL)
    assert est.mean < 1e-3
    assert PaymentDelayValue.solve(CL, q, spec, a)(x) < 1e-3


@pytest.mark.simulate
def test_endless_delay_pays_nothing() -> None:
    est = simulate_payment_delay(CL, 0.1, PaymentDelaySpec(1e6), BarrierPolicy(1.5), 1.0, SMALL)
    assert est.mean == 0.0


@pytest.mark.slow
@pytest.mark.simulate
def test_euler_step_halving() -> None:
    spec, x = ParisianSpec(1.0), 1.0
    coarse = simulate_parisian_ruin_prob(
        BM, spec, x, SimConfig(n_paths=100_000, seed=43, euler_step=2e-3, batch_size=5000), 200.0
    )
    fine = simulate_parisian_ruin_prob(
        BM, spec, x, SimConfig(n_paths=100_000, seed=47, euler_step=1e-3, batch_size=5000), 200.0
    )
    combined = math.hypot(coarse.std_error, fine.std_error)
    assert abs(coarse.mean - fine.mean) < 2.0 * combined, (coarse, fine)


@pytest.mark.slow
@pytest.mark.simulate
def test_excursion_survival_rejects_untilted_radicand() -> None:
    tilted = tilt(CL, phi(CL, 0.1).phi_q)
    zeta = 1.0
    est = simulate_excursion_survival(tilted, zeta, SimConfig(n_paths=100_000, seed=53))
    chosen = cl_survival_factor(tilted, zeta, BesselRadicand.TILTED)
    as_printed = cl_survival_factor(tilted, zeta, BesselRadicand.AS_PRINTED, xi_untilted=CL.xi)
    assert abs(chosen - as_printed) > 0.01
    assert est.agrees_with(chosen, N_SE)
    assert abs(est.mean - as_printed) > 8.0 * est.std_error, (est, as_printed)

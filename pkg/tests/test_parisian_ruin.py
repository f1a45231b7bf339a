import math

import pytest
from hypothesis import given
from hypothesis.strategies import floats

from parisdiv import (
    BesselRadicand,
    BrownianDrift,
    CramerLundbergExp,
    InvalidArgumentError,
    ParisianSpec,
    ReferenceCase,
    ReferenceCases,
    RiskModel,
    V,
    V_derivatives,
    W,
    bm_psi,
    cl_survival_factor,
    classical_ruin_probability,
    differentiate,
    parisian_constants,
    parisian_ruin_probability,
    phi,
    scale_eval,
    tilt,
)

from .strategies import assert_close, models, rates, small_positions, windows


@pytest.mark.parisian
@given(models(), rates, windows, small_positions)
def test_tilted_survival_identity(model: RiskModel, q: float, zeta: float, x: float) -> None:
    """exp(-Phi x) V^(q)(x) is the Parisian survival probability of the tilted model."""
    spec = ParisianSpec(zeta)
    phi_q = phi(model, q).phi_q
    lhs = math.exp(-phi_q * x) * V(model, q, spec, x)
    rhs = 1.0 - parisian_ruin_probability(tilt(model, phi_q), spec, x)
    assert abs(lhs - rhs) <= 1e-9


@pytest.mark.parisian
def test_as_printed_radicand_breaks_tilted_identity() -> None:
    model = CramerLundbergExp(c=2.0, lam=1.0, xi=1.0)
    q, spec, x = 0.1, ParisianSpec(1.0), 1.0
    phi_q = phi(model, q).phi_q
    rhs = 1.0 - parisian_ruin_probability(tilt(model, phi_q), spec, x)
    tilted = math.exp(-phi_q * x) * V(model, q, spec, x, BesselRadicand.TILTED)
    printed = math.exp(-phi_q * x) * V(model, q, spec, x, BesselRadicand.AS_PRINTED)
    assert abs(tilted - rhs) <= 1e-12
    assert abs(printed - rhs) > 1e-6


@pytest.mark.parisian
@given(windows)
def test_radicands_agree_without_discounting(zeta: float) -> None:
    model = CramerLundbergExp(c=2.0, lam=1.0, xi=1.0)
    spec = ParisianSpec(zeta)
    a = parisian_ruin_probability(model, spec, 1.0, BesselRadicand.TILTED)
    b = parisian_ruin_probability(model, spec, 1.0, BesselRadicand.AS_PRINTED)
    assert_close(a, b, rel=1e-12)


@pytest.mark.parisian
@given(models(), small_positions)
def test_zero_window_is_classical_ruin(model: RiskModel, x: float) -> None:
    parisian = parisian_ruin_probability(model, ParisianSpec(0.0), x)
    assert_close(parisian, classical_ruin_probability(model, x), rel=1e-10, abs_tol=1e-12)


@pytest.mark.parisian
@given(models(), windows, small_positions)
def test_parisian_below_classical(model: RiskModel, zeta: float, x: float) -> None:
    parisian = parisian_ruin_probability(model, ParisianSpec(zeta), x)
    assert 0.0 <= parisian <= classical_ruin_probability(model, x) + 1e-12


@pytest.mark.parisian
@given(models(), windows)
def test_ruin_probability_monotone(model: RiskModel, zeta: float) -> None:
    spec = ParisianSpec(zeta)
    probs = [parisian_ruin_probability(model, spec, x) for x in (0.0, 0.5, 1.0, 2.0, 4.0)]
    assert all(p1 >= p2 for p1, p2 in zip(probs, probs[1:]))
    longer = parisian_ruin_probability(model, ParisianSpec(2.0 * zeta), 1.0)
    assert longer <= probs[2] + 1e-12


@pytest.mark.parisian
@pytest.mark.parametrize(
    "model", [CramerLundbergExp(c=2.0, lam=1.0, xi=1.0), BrownianDrift(c=1.0, sigma=1.0)]
)
@pytest.mark.parametrize("q", [0.05, 0.1])
def test_vanishing_window(model: RiskModel, q: float) -> None:
    spec = ParisianSpec(1e-8)
    ev = scale_eval(model, q)
    slope = phi(model, q).psi_prime_at_phi
    for x in [0.5 + 0.25 * i for i in range(19)]:
        ratio = V(model, q, spec, x) / (slope * W(ev, x))
        assert abs(ratio - 1.0) <= 1e-2


@pytest.mark.parisian
def test_survival_factor_limits() -> None:
    tilted = CramerLundbergExp(c=2.0, lam=1.0, xi=1.0)
    assert cl_survival_factor(tilted, 0.0) == 1.0
    values = [cl_survival_factor(tilted, z) for z in (1e-9, 0.1, 0.5, 1.0, 5.0, 50.0)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(v1 > v2 for v1, v2 in zip(values, values[1:]))
    assert values[0] > 1.0 - 1e-6
    assert values[-1] < 1e-3


@pytest.mark.parisian
def test_survival_factor_needs_untilted_rate() -> None:
    tilted = CramerLundbergExp(c=2.0, lam=1.0, xi=1.0)
    with pytest.raises(InvalidArgumentError):
        cl_survival_factor(tilted, 1.0, BesselRadicand.AS_PRINTED)
    with pytest.raises(InvalidArgumentError):
        cl_survival_factor(tilted, -1.0)


@pytest.mark.parisian
def test_bm_psi() -> None:
    assert bm_psi(0.0) == 1.0
    # large arguments: Psi(x) ~ sqrt(pi) x
    assert_close(bm_psi(8.0) / (math.sqrt(math.pi) * 8.0), 1.0, rel=1e-6)
    with pytest.raises(InvalidArgumentError):
        bm_psi(-1.0)


@pytest.mark.parisian
@given(floats(min_value=0.0, max_value=30.0))
def test_bm_constant_in_unit_interval(zeta: float) -> None:
    pc = parisian_constants(BrownianDrift(c=1.0, sigma=1.0), 0.05, ParisianSpec(zeta))
    assert 0.0 < pc.K <= 1.0


@pytest.mark.parisian
@given(models(), rates, windows, floats(min_value=0.05, max_value=3.0))
def test_V_derivatives(model: RiskModel, q: float, zeta: float, x: float) -> None:
    spec = ParisianSpec(zeta)
    assert_close(
        V_derivatives(model, q, spec, x, 1),
        differentiate(lambda y: V(model, q, spec, y), x),
        rel=1e-6,
        abs_tol=1e-8,
    )
    assert_close(
        V_derivatives(model, q, spec, x, 2),
        differentiate(lambda y: V_derivatives(model, q, spec, y, 1), x),
        rel=1e-6,
        abs_tol=1e-7,
    )


@pytest.mark.parisian
@pytest.mark.parametrize("name, case", ReferenceCases._cases())
def test_reference_values_are_positive(name: str, case: ReferenceCase) -> None:
    for x in case.xs:
        assert V(case.model, case.q, case.spec, x) > 0
        assert V_derivatives(case.model, case.q, case.spec, x) > 0


@pytest.mark.parisian
def test_validation() -> None:
    model = CramerLundbergExp(c=2.0, lam=1.0, xi=1.0)
    with pytest.raises(InvalidArgumentError):
        ParisianSpec(-1.0)
    with pytest.raises(InvalidArgumentError):
        V(model, 0.1, ParisianSpec(1.0), -0.5)
    with pytest.raises(InvalidArgumentError):
        V_derivatives(model, 0.1, ParisianSpec(1.0), 1.0, order=3)
    assert classical_ruin_probability(model, -1.0) == 1.0

import logging
import math
from types import SimpleNamespace
from typing import Any, Callable, Tuple

import pytest
from hypothesis import given
from hypothesis.strategies import floats

from parisdiv import (
    ConvergenceError,
    InvalidArgumentError,
    Tolerance,
    bessel_i1,
    bessel_i1e,
    differentiate,
    find_root_increasing,
    gauss_legendre,
    integrate,
    numerics,
    std_normal_cdf,
)
from parisdiv.testing import bessel_i1_series, normal_cdf_oracle

from .strategies import assert_close


@pytest.mark.numerics
@given(floats(min_value=0.0, max_value=30.0))
def test_bessel_i1_series(x: float) -> None:
    assert_close(bessel_i1(x), bessel_i1_series(x), rel=1e-12, abs_tol=1e-300)


@pytest.mark.numerics
@given(floats(min_value=0.0, max_value=200.0))
def test_bessel_i1e_scaling(x: float) -> None:
    assert_close(bessel_i1e(x) * math.exp(x), bessel_i1(x), rel=1e-12, abs_tol=1e-300)


@pytest.mark.numerics
def test_bessel_small_argument() -> None:
    assert bessel_i1(0.0) == 0.0
    assert_close(bessel_i1(1e-8), 5e-9, rel=1e-12)


@pytest.mark.numerics
@given(floats(min_value=-20.0, max_value=8.0))
def test_normal_cdf(x: float) -> None:
    assert_close(std_normal_cdf(x), normal_cdf_oracle(x), rel=1e-11, abs_tol=1e-16)


@pytest.mark.numerics
def test_normal_cdf_symmetry() -> None:
    assert std_normal_cdf(0.0) == 0.5
    for x in (0.1, 1.0, 3.0, 6.0):
        assert_close(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, rel=1e-15)


@pytest.mark.numerics
@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_special_functions_reject_non_finite(bad: float) -> None:
    with pytest.raises(InvalidArgumentError):
        std_normal_cdf(bad)
    with pytest.raises(InvalidArgumentError):
        bessel_i1(bad)


@pytest.mark.numerics
def test_bessel_rejects_negative() -> None:
    with pytest.raises(InvalidArgumentError):
        bessel_i1(-1.0)
    with pytest.raises(InvalidArgumentError):
        bessel_i1e(-0.5)


@pytest.mark.numerics
def test_integrate_exponential() -> None:
    assert_close(integrate(lambda x: math.exp(-x), 0.0, math.inf), 1.0, rel=1e-10)
    assert_close(integrate(lambda x: x * x, 0.0, 3.0), 9.0, rel=1e-12)
    assert integrate(lambda x: 1.0, 2.0, 2.0) == 0.0


@pytest.mark.numerics
def test_integrate_with_kink() -> None:
    value = integrate(lambda x: abs(x - 0.3), 0.0, 1.0, points=(0.3,))
    assert_close(value, 0.5 * (0.3**2 + 0.7**2), rel=1e-12)


@pytest.mark.numerics
def test_integrate_reports_failure() -> None:
    tight = Tolerance(abs_tol=1e-14, rel_tol=1e-14, max_iter=21)
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: math.sin(200.0 * x), 0.0, 10.0, tight)
    assert info.value.best_estimate is not None
    assert info.value.error_estimate is not None


def _flagged_quad(err: float) -> Callable[..., Tuple[float, float, dict, str]]:
    def quad(f: Callable[[float], float], lo: float, hi: float, **kwargs: Any) -> Tuple:
        return 1.0, err, {}, "roundoff error detected"

    return quad


@pytest.mark.numerics
def test_integrate_warns_on_accepted_quad_flag(
    monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture
) -> None:
    tol = Tolerance(abs_tol=1e-10, rel_tol=1e-10)
    monkeypatch.setattr(numerics, "_integrate", SimpleNamespace(quad=_flagged_quad(1e-9)))
    with caplog.at_level(logging.WARNING, logger="parisdiv.numerics"):
        assert integrate(lambda x: x, 0.0, 1.0, tol) == 1.0
    flagged = [r for r in caplog.records if r.levelno == logging.WARNING]
    assert len(flagged) == 1
    assert "roundoff" in flagged[0].getMessage()


@pytest.mark.numerics
def test_integrate_raises_on_large_quad_error(monkeypatch: pytest.MonkeyPatch) -> None:
    tol = Tolerance(abs_tol=1e-10, rel_tol=1e-10)
    monkeypatch.setattr(numerics, "_integrate", SimpleNamespace(quad=_flagged_quad(1e-5)))
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: x, 0.0, 1.0, tol)
    assert info.value.error_estimate == 1e-5


@pytest.mark.numerics
def test_integrate_rejects_reversed_limits() -> None:
    with pytest.raises(InvalidArgumentError):
        integrate(lambda x: x, 1.0, 0.0)


@pytest.mark.numerics
def test_gauss_legendre_polynomial() -> None:
    assert_close(gauss_legendre(lambda t: t**5, 0.0, 2.0, n=8), 64.0 / 6.0, rel=1e-13)


@pytest.mark.numerics
@given(floats(min_value=0.1, max_value=50.0))
def test_root_of_increasing_function(target: float) -> None:
    root = find_root_increasing(lambda x: x**3 - target, 0.0, 10.0)
    assert_close(root, target ** (1.0 / 3.0), rel=1e-9)


@pytest.mark.numerics
def test_root_needs_bracket() -> None:
    with pytest.raises(InvalidArgumentError):
        find_root_increasing(lambda x: x - 5.0, 0.0, 1.0)


@pytest.mark.numerics
@given(floats(min_value=-3.0, max_value=3.0))
def test_central_differences(x: float) -> None:
    assert_close(differentiate(math.sin, x), math.cos(x), rel=1e-8, abs_tol=1e-9)
    assert_close(differentiate(math.sin, x, order=2, h=1e-4), -math.sin(x), rel=1e-5, abs_tol=1e-5)


@pytest.mark.numerics
@pytest.mark.parametrize("side", ["forward", "backward"])
def test_one_sided_differences(side: str) -> None:
    for x in (0.0, 0.5, 2.0):
        assert_close(differentiate(math.exp, x, 1, 1e-3, side=side), math.exp(x), rel=1e-8)


@pytest.mark.numerics
def test_one_sided_derivative_at_kink() -> None:
    def f(x: float) -> float:
        return x if x >= 0 else 3.0 * x

    assert_close(differentiate(f, 0.0, 1, 1e-3, side="forward"), 1.0, rel=1e-12)
    assert_close(differentiate(f, 0.0, 1, 1e-3, side="backward"), 3.0, rel=1e-12)


@pytest.mark.numerics
def test_differentiate_validates() -> None:
    with pytest.raises(InvalidArgumentError):
        differentiate(math.sin, 0.0, order=3)
    with pytest.raises(InvalidArgumentError):
        differentiate(math.sin, 0.0, h=0.0)
    with pytest.raises(InvalidArgumentError):
        differentiate(math.sin, 0.0, order=2, side="forward")
    with pytest.raises(InvalidArgumentError):
        differentiate(lambda t: math.inf if t < 0 else t, 0.0)


@pytest.mark.numerics
def test_tolerance_validates() -> None:
    with pytest.raises(InvalidArgumentError):
        Tolerance(abs_tol=0.0)
    with pytest.raises(InvalidArgumentError):
        Tolerance(max_iter=0)

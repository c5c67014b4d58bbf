import math

import numpy as np
import pytest

from utils.errors import (
    DomainError,
    IntegrationError,
    NaNIntegrandError,
    NoBracketError,
    RootFindingError,
)
from utils.numerics import (
    DEFAULT_QUAD,
    QuadSpec,
    RootSpec,
    find_root_monotone,
    integrate,
    simpson_with_error,
)


def test_integrate_smooth_polynomial():
    assert integrate(lambda x: x * x, 0.0, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_integrate_empty_interval_is_zero():
    assert integrate(math.exp, 2.0, 2.0) == 0.0


def test_integrate_rejects_reversed_limits():
    with pytest.raises(DomainError):
        integrate(math.exp, 1.0, 0.0)


def test_left_singularity_is_removed():
    spec = DEFAULT_QUAD.with_singular(left=True, left_exponent=-0.5)
    assert integrate(lambda x: x ** -0.5, 0.0, 1.0, spec) == pytest.approx(2.0, rel=1e-10)


def test_right_singularity_with_other_exponent():
    spec = DEFAULT_QUAD.with_singular(right=True, right_exponent=-2.0 / 3.0)
    value = integrate(lambda x: (1.0 - x) ** (-2.0 / 3.0), 0.0, 1.0, spec)
    assert value == pytest.approx(3.0, rel=1e-10)


def test_both_ends_singular():
    spec = QuadSpec(singular_ends=(True, True))
    value = integrate(lambda x: 1.0 / math.sqrt(x * (1.0 - x)), 0.0, 1.0, spec)
    assert value == pytest.approx(math.pi, rel=1e-10)


def test_non_integrable_exponent_is_rejected():
    with pytest.raises(ValueError):
        QuadSpec(exponents=(-1.0, -0.5))


def test_nan_integrand_reports_abscissa():
    with pytest.raises(NaNIntegrandError) as excinfo:
        integrate(lambda x: float("nan"), 0.0, 1.0)
    assert 0.0 <= excinfo.value.abscissa <= 1.0


def test_non_convergence_carries_estimate():
    spec = QuadSpec(max_depth=1)
    with pytest.raises(IntegrationError) as excinfo:
        integrate(lambda x: 1.0 / x, 0.0, 1.0, spec)
    assert excinfo.value.error_bound > 0.0
    assert math.isfinite(excinfo.value.estimate)


@pytest.mark.parametrize("use_derivative", [False, True])
def test_find_root_increasing(use_derivative):
    fprime = (lambda x: 3.0 * x * x) if use_derivative else None
    root = find_root_monotone(lambda x: x ** 3 - 2.0, 0.0, 2.0, fprime=fprime)
    assert root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-12)


def test_find_root_decreasing_with_known_bracket_values():
    f = lambda x: math.cos(x) - x
    root = find_root_monotone(f, 0.0, 1.0, fprime=lambda x: -math.sin(x) - 1.0,
                              bracket_values=(f(0.0), f(1.0)))
    assert math.cos(root) == pytest.approx(root, abs=1e-12)


def test_find_root_endpoint_zero():
    assert find_root_monotone(lambda x: x, 0.0, 1.0) == 0.0


def test_find_root_without_bracket():
    with pytest.raises(NoBracketError):
        find_root_monotone(lambda x: x * x + 1.0, -1.0, 1.0)


def test_find_root_reports_last_bracket():
    with pytest.raises(RootFindingError) as excinfo:
        find_root_monotone(lambda x: x ** 3 - 2.0, 0.0, 2.0, RootSpec(tol=1e-15, max_iter=1))
    assert excinfo.value.bracket is not None


def test_simpson_with_error_estimate():
    s = np.linspace(0.0, math.pi, 201)
    value, error = simpson_with_error(np.sin(s), s)
    assert value == pytest.approx(2.0, abs=1e-8)
    assert 0.0 <= error < 1e-6
    assert abs(value - 2.0) <= 10.0 * error

import numpy as np
import pytest

from padpd import (CallableFunction, InvalidFunctionError, L1Norm, OracleFailure,
                   QuadraticFunction, ZeroFunction, make_function, prox_l1,
                   prox_numeric_oracle, prox_quadratic, prox_zero)
from padpd.prox import FUNCTION_REGISTRY

from reference import scalar_prox_bruteforce


# --- closed forms on fixed inputs -------------------------------------------

@pytest.mark.parametrize("x, eta", [([3.0, -1.0], 0.1), ([0.0], 1.0), ([1e6], 1e-6)])
def test_prox_zero_is_identity(x, eta):
    np.testing.assert_array_equal(prox_zero(x, eta), x)


def test_prox_quadratic_examples():
    np.testing.assert_array_equal(prox_quadratic([1, 0], [2.0, 5.0], 1.0), [1.0, 5.0])
    np.testing.assert_array_equal(prox_quadratic(1, [0.0], 0.5), [0.0])
    np.testing.assert_array_equal(prox_quadratic(2, [3.0], 0.25), [2.0])


def test_prox_quadratic_matches_scalar_minimization():
    # 0.25 u^2 + 0.5 (u - 3)^2 is the eta-scaled subproblem for a=2, eta=0.25
    got = scalar_prox_bruteforce(lambda u: u * u, 3.0, 0.25)
    assert abs(got[0] - 2.0) < 1e-8


def test_prox_quadratic_zero_curvature_is_identity():
    x = np.array([1.5, -2.0, 0.25])
    np.testing.assert_array_equal(prox_quadratic(0.0, x, 3.0), prox_zero(x, 3.0))


def test_prox_quadratic_with_linear_term():
    # f(u) = u^2 / 2 + 2u, so prox = (x - 2 eta) / (1 + eta)
    np.testing.assert_allclose(prox_quadratic(1.0, [4.0], 0.5, linear=[2.0]), [2.0])


def test_prox_l1_examples():
    np.testing.assert_allclose(prox_l1(1, [2.0, -0.5, 0.0], 1.0), [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(prox_l1(0, [7.0], 1.0), [7.0])
    np.testing.assert_allclose(prox_l1(3, [1.0], 0.1), [0.7], atol=1e-15)


def test_prox_l1_matches_bruteforce():
    x = np.array([2.0, -0.5, 0.0])
    np.testing.assert_allclose(scalar_prox_bruteforce(abs, x, 1.0),
                               [1.0, 0.0, 0.0], atol=1e-8)
    np.testing.assert_allclose(scalar_prox_bruteforce(lambda u: 3 * abs(u), 1.0, 0.1),
                               [0.7], atol=1e-8)


def test_negative_parameters_rejected():
    with pytest.raises(InvalidFunctionError):
        prox_quadratic(-1.0, [1.0], 1.0)
    with pytest.raises(InvalidFunctionError):
        prox_quadratic([1.0, -0.1], [1.0, 1.0], 1.0)
    with pytest.raises(InvalidFunctionError):
        prox_l1(-0.5, [1.0], 1.0)
    with pytest.raises(InvalidFunctionError):
        QuadraticFunction(2, curvature=[1.0, -1.0])
    with pytest.raises(InvalidFunctionError):
        L1Norm(1, lam=-1.0)


@pytest.mark.parametrize("eta", [0.0, -1.0, float("nan")])
def test_nonpositive_scale_rejected(eta):
    for fn in (lambda: prox_zero([1.0], eta), lambda: prox_quadratic(1, [1.0], eta),
               lambda: prox_l1(1, [1.0], eta)):
        with pytest.raises(ValueError):
            fn()


def test_prox_does_not_alias_input():
    x = np.array([1.0, 2.0])
    out = prox_zero(x, 1.0)
    out[0] = 99.0
    assert x[0] == 1.0


# --- function objects and registry -----------------------------------------

def test_registry_tags():
    assert set(FUNCTION_REGISTRY) == {"zero", "quadratic", "l1"}
    f = make_function("quadratic", 2, curvature=[1.0, 0.0])
    assert isinstance(f, QuadraticFunction)
    assert f.to_dict()["tag"] == "quadratic"
    with pytest.raises(InvalidFunctionError, match="unknown function tag"):
        make_function("huber", 1)


def test_function_evaluate_and_equality():
    f = QuadraticFunction(2, curvature=[1.0, 0.0])
    assert f.evaluate([3.0, 7.0]) == 4.5
    assert ZeroFunction(3).evaluate([1, 2, 3]) == 0.0
    assert L1Norm(2, lam=2.0).evaluate([1.0, -0.5]) == 3.0
    assert f == QuadraticFunction(2, curvature=[1.0, 0.0])
    assert f != QuadraticFunction(2, curvature=[1.0, 1.0])
    assert ZeroFunction(2) != ZeroFunction(3)


def test_callable_function_wraps_user_prox():
    # indicator of the nonnegative orthant: evaluate may be +inf, prox is finite
    box = CallableFunction(2, lambda u: 0.0 if np.all(np.asarray(u) >= 0) else np.inf,
                           lambda x, eta: np.maximum(x, 0.0))
    assert box.evaluate([-1.0, 0.0]) == np.inf
    np.testing.assert_array_equal(box.prox([-1.0, 2.0], 0.3), [0.0, 2.0])


def test_dimension_must_be_positive():
    with pytest.raises(InvalidFunctionError):
        ZeroFunction(0)


# --- oracle -----------------------------------------------------------------

def test_oracle_examples():
    np.testing.assert_allclose(prox_numeric_oracle(ZeroFunction(2), [1, 2], 1.0),
                               [1.0, 2.0], atol=1e-10)
    np.testing.assert_allclose(prox_numeric_oracle(QuadraticFunction(1), [4.0], 1.0),
                               [2.0], atol=1e-10)
    np.testing.assert_allclose(prox_numeric_oracle(L1Norm(1), [-3.0], 2.0),
                               [-1.0], atol=1e-10)


def test_oracle_failure_reported():
    # a nonconvex cost unbounded below: the subproblem minimum cannot be bracketed
    bad = CallableFunction(1, lambda u: -u[0] ** 4, lambda x, eta: x)
    with pytest.raises(OracleFailure):
        prox_numeric_oracle(bad, [0.5], 1.0)


def _random_function(rng, dim):
    kind = rng.integers(3)
    if kind == 0:
        return ZeroFunction(dim)
    if kind == 1:
        return QuadraticFunction(dim, curvature=rng.uniform(0, 3, dim),
                                 linear=rng.normal(size=dim))
    return L1Norm(dim, lam=float(rng.uniform(0, 2)))


def test_closed_forms_agree_with_oracle():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        dim = int(rng.integers(1, 6))
        f = _random_function(rng, dim)
        x = rng.normal(scale=3, size=dim)
        eta = float(rng.uniform(0.05, 3))
        worst = max(worst, np.max(np.abs(f.prox(x, eta)
                                          - prox_numeric_oracle(f, x, eta))))
    assert worst <= 1e-8


@pytest.mark.parametrize("make", [
    lambda rng, d: ZeroFunction(d),
    lambda rng, d: QuadraticFunction(d, curvature=rng.uniform(0, 5, d),
                                     linear=rng.normal(size=d)),
    lambda rng, d: L1Norm(d, lam=float(rng.uniform(0, 3))),
], ids=["zero", "quadratic", "l1"])
def test_nonexpansive(make):
    rng = np.random.default_rng(5)
    for _ in range(1000):
        d = int(rng.integers(1, 8))
        f = make(rng, d)
        eta = float(rng.uniform(1e-3, 10))
        x, y = rng.normal(scale=5, size=(2, d))
        assert np.linalg.norm(f.prox(x, eta) - f.prox(y, eta)) \
            <= np.linalg.norm(x - y) + 1e-12


def test_prox_zero_bitwise_identity():
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.normal(scale=10.0 ** rng.integers(-300, 300), size=int(rng.integers(1, 9)))
        eta = 10.0 ** rng.uniform(-12, 12)
        out = prox_zero(x, eta)
        assert out.tobytes() == x.astype(float).tobytes()


def test_midpoint_convexity_spot_check():
    rng = np.random.default_rng(8)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        f = _random_function(rng, d)
        u, v = rng.normal(size=(2, d))
        assert f.evaluate((u + v) / 2) <= (f.evaluate(u) + f.evaluate(v)) / 2 + 1e-12

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noisyrnn.numerics import (
    InvalidParameterError,
    RngStream,
    as_generator,
    gaussian_sample,
    ramp,
    ramp_grad,
    sigmoid_centered,
    sigmoid_centered_grad,
    sigmoid_centered_inverse,
)

finite = st.floats(-50, 50, allow_nan=False)


class TestSigmoid:
    def test_zero(self):
        assert sigmoid_centered(0.0) == 0.0

    def test_matches_logistic_definition(self):
        x = np.linspace(-30, 30, 601)
        np.testing.assert_allclose(sigmoid_centered(x), 1 / (1 + np.exp(-x)) - 0.5, atol=1e-15)

    def test_saturates(self):
        assert sigmoid_centered(800.0) == 0.5
        assert sigmoid_centered(-800.0) == -0.5

    @given(finite)
    def test_odd_exactly(self, x):
        assert sigmoid_centered(-x) == -sigmoid_centered(x)

    @given(st.floats(-20, 20))
    def test_inverse_roundtrip(self, x):
        assert np.isclose(sigmoid_centered_inverse(sigmoid_centered(x)), x, rtol=1e-9, atol=1e-9)

    @pytest.mark.parametrize("y", [0.5, -0.5, 0.7])
    def test_inverse_domain(self, y):
        with pytest.raises(InvalidParameterError):
            sigmoid_centered_inverse(y)

    @given(st.floats(-10, 10), st.floats(1e-3, 1.0))
    def test_monotone(self, x, dx):
        assert sigmoid_centered(x + dx) > sigmoid_centered(x)

    def test_grad_matches_finite_difference(self):
        x = np.linspace(-6, 6, 25)
        num = (sigmoid_centered(x + 1e-6) - sigmoid_centered(x - 1e-6)) / 2e-6
        np.testing.assert_allclose(sigmoid_centered_grad(x), num, atol=1e-9)


class TestRamp:
    @pytest.mark.parametrize("x, gamma, expected", [(-1.0, 0.5, 0.0), (0.0, 0.5, 1.0), (-0.25, 0.5, 0.5),
                                                    (3.0, 0.1, 1.0), (-0.1, 0.1, 0.0)])
    def test_values(self, x, gamma, expected):
        assert ramp(x, gamma) == pytest.approx(expected)

    @given(finite, st.floats(0.01, 5))
    def test_range(self, x, gamma):
        assert 0.0 <= ramp(x, gamma) <= 1.0

    @given(finite, finite, st.floats(0.01, 5))
    def test_lipschitz(self, a, b, gamma):
        assert abs(ramp(a, gamma) - ramp(b, gamma)) <= abs(a - b) / gamma + 1e-12

    @pytest.mark.parametrize("gamma", [0.0, -1.0])
    def test_gamma_must_be_positive(self, gamma):
        with pytest.raises(InvalidParameterError):
            ramp(0.1, gamma)

    def test_grad(self):
        np.testing.assert_array_equal(ramp_grad(np.array([-2.0, -0.05, 0.5]), 0.1), [0.0, 10.0, 0.0])

    def test_vectorized(self):
        out = ramp(np.array([-1.0, 0.0]), 0.5)
        assert isinstance(out, np.ndarray) and out.tolist() == [0.0, 1.0]


class TestRandomness:
    def test_same_stream_same_draws(self):
        a = gaussian_sample(RngStream(5, 2), 8, 0.3)
        b = gaussian_sample(RngStream(5, 2), 8, 0.3)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        assert not np.array_equal(gaussian_sample(RngStream(5, 1), 8, 1.0), gaussian_sample(RngStream(5, 2), 8, 1.0))

    def test_children_distinct(self):
        s = RngStream(1)
        ids = {s.child(i).stream_id for i in range(100)} | {s.stream_id}
        assert len(ids) == 101

    def test_zero_sigma_is_exact_zero(self):
        gen = as_generator(3)
        assert np.array_equal(gaussian_sample(gen, 4, 0.0), np.zeros(4))
        assert gen.standard_normal() == as_generator(3).standard_normal()

    def test_moments(self):
        x = gaussian_sample(RngStream(0), 200_000, 0.5)
        assert abs(x.mean()) < 4 * 0.5 / np.sqrt(2e5)
        assert abs(x.std() - 0.5) < 0.005

    @pytest.mark.parametrize("dim, sigma", [(0, 1.0), (2, -0.1)])
    def test_invalid(self, dim, sigma):
        with pytest.raises(InvalidParameterError):
            gaussian_sample(0, dim, sigma)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tcrc.activation import ActivationKind, Kind, apply, clausen, lobachevsky, parse_activation, sigmoid
from tcrc.errors import ParameterError

finite = st.floats(-50, 50, allow_nan=False)


def clausen_oracle(s, k_c):
    # plain left-to-right summation in Python floats
    total = 0.0
    for i in range(k_c + 1):
        total += math.sin(2 * i * s) * 0.5**i
    return total


class TestClausen:
    def test_quarter_pi_order_two(self):
        assert abs(clausen(math.pi / 4, 2) - 0.5) <= 1e-15
        assert abs(clausen_oracle(math.pi / 4, 2) - 0.5) <= 1e-15

    @pytest.mark.parametrize("k_c", [1, 3, 8, 20])
    def test_zero(self, k_c):
        assert clausen(0.0, k_c) == 0.0

    @given(finite, st.integers(1, 12))
    def test_period_pi(self, s, k_c):
        assert clausen(s + math.pi, k_c) == pytest.approx(clausen(s, k_c), abs=1e-12)

    @given(finite, st.integers(1, 12))
    def test_matches_oracle(self, s, k_c):
        assert clausen(s, k_c) == pytest.approx(clausen_oracle(s, k_c), abs=1e-13)

    @given(finite, st.integers(1, 12))
    def test_bounded_below_one(self, s, k_c):
        assert abs(clausen(s, k_c)) <= 1 - 2.0**-k_c + 1e-15

    @pytest.mark.parametrize("k_c", range(1, 13))
    def test_truncation_tail(self, k_c, rng):
        s = rng.uniform(-10, 10, 1000)
        # the infinite series is approximated by a long truncation
        ref = clausen(s, 60)
        assert np.max(np.abs(clausen(s, k_c) - ref)) <= 2.0**-k_c

    def test_array_input(self):
        s = np.array([0.0, math.pi / 4])
        np.testing.assert_allclose(clausen(s, 2), [0.0, 0.5], atol=1e-15)

    def test_k_c_zero_rejected(self):
        with pytest.raises(ParameterError):
            clausen(1.0, 0)


class TestLobachevsky:
    def test_zero(self):
        assert lobachevsky(0.0, 3) == 0.0

    def test_eighth_pi(self):
        assert lobachevsky(math.pi / 8, 2) == pytest.approx(0.25, abs=1e-15)

    def test_odd_and_periodic(self, rng):
        s = rng.uniform(-10, 10, 1000)
        assert np.max(np.abs(lobachevsky(-s) + lobachevsky(s))) < 1e-12
        assert np.max(np.abs(lobachevsky(s + math.pi / 2) - lobachevsky(s))) < 1e-12

    @given(finite, st.integers(1, 12))
    def test_half_clausen_of_double(self, s, k_c):
        assert lobachevsky(s, k_c) == pytest.approx(clausen_oracle(2 * s, k_c) / 2, abs=1e-13)

    @given(finite)
    def test_strictly_inside_unit_interval(self, s):
        assert abs(lobachevsky(s)) < 1


class TestApply:
    def test_tanh_zero(self):
        np.testing.assert_array_equal(apply([0.0, 0.0], "tanh"), [0.0, 0.0])

    def test_sigmoid_half(self):
        np.testing.assert_array_equal(apply([0.0], "sigmoid"), [0.5])

    def test_sin_one(self):
        assert apply([1.0], "sin")[0] == pytest.approx(math.sin(1.0), abs=1e-15)
        assert apply([1.0], "sin")[0] == pytest.approx(0.84147, abs=1e-5)

    def test_sigmoid_extremes_without_overflow(self):
        with np.errstate(over="raise", invalid="raise"):
            out = sigmoid(np.array([-1000.0, 1000.0]))
        np.testing.assert_array_equal(out, [0.0, 1.0])

    @given(st.lists(finite, min_size=1, max_size=20), st.sampled_from(list(Kind)))
    def test_preserves_length_and_finiteness(self, xs, kind):
        out = apply(np.array(xs), ActivationKind(kind))
        assert out.shape == (len(xs),)
        assert np.all(np.isfinite(out))

    def test_callable_kind(self):
        act = ActivationKind(Kind.LOBACHEVSKY, 2)
        assert act([math.pi / 8])[0] == pytest.approx(0.25)


class TestActivationKind:
    def test_parse_names(self):
        for name in ("tanh", "sin", "sigmoid", "lobachevsky"):
            assert parse_activation(name).name == name

    def test_parse_is_case_insensitive(self):
        assert parse_activation("TANH").kind is Kind.TANH

    def test_unknown_name(self):
        with pytest.raises(ParameterError):
            parse_activation("relu")

    def test_default_k_c(self):
        assert ActivationKind(Kind.LOBACHEVSKY).k_c == 8

    @pytest.mark.parametrize("bad", [0, -1, 2.5])
    def test_invalid_k_c(self, bad):
        with pytest.raises(ParameterError):
            ActivationKind(Kind.LOBACHEVSKY, bad)

    def test_to_dict(self):
        assert ActivationKind(Kind.LOBACHEVSKY, 3).to_dict() == {"activation": "lobachevsky", "k_c": 3}
        assert ActivationKind(Kind.TANH).to_dict() == {"activation": "tanh"}

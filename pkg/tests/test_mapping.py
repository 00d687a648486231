import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tcrc.errors import DomainError, ParameterError, ShapeError, SpectralRadiusZeroError
from tcrc.mapping import (
    PRNG_NAME,
    ChebyshevParams,
    LogisticParams,
    WeightMap,
    apply_map,
    build_chebyshev,
    build_logistic_sparse,
    build_random_uniform,
    from_recipe,
    logistic_chain,
    rescale_spectral_radius,
    spectral_radius,
)


def eig_radius(a):
    return float(np.max(np.abs(np.linalg.eigvals(a))))


class TestWeightMap:
    def test_dense_and_sparse_exclusive(self):
        with pytest.raises(ParameterError):
            WeightMap(2, 2)
        with pytest.raises(ParameterError):
            WeightMap(1, 1, dense=[[1.0]], sp_rows=[0], sp_cols=[0], sp_vals=[1.0])

    def test_duplicate_entries(self):
        with pytest.raises(ParameterError):
            WeightMap(2, 2, sp_rows=[0, 0], sp_cols=[1, 1], sp_vals=[1.0, 2.0])

    def test_index_out_of_range(self):
        with pytest.raises(ParameterError):
            WeightMap(2, 2, sp_rows=[2], sp_cols=[0], sp_vals=[1.0])

    def test_non_finite(self):
        with pytest.raises(ParameterError):
            WeightMap(1, 2, dense=[[1.0, np.nan]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            WeightMap(2, 2, dense=np.ones((2, 3)))

    def test_immutable_storage(self):
        w = build_random_uniform(3, 3, 1.0, 0)
        with pytest.raises(ValueError):
            w.dense[0, 0] = 5.0

    def test_csr_layout(self):
        w = WeightMap(3, 3, sp_rows=[2, 0, 0], sp_cols=[1, 2, 0], sp_vals=[5.0, 2.0, 1.0])
        indptr, idx, data = w.csr()
        np.testing.assert_array_equal(indptr, [0, 2, 2, 3])
        np.testing.assert_array_equal(idx, [0, 2, 1])
        np.testing.assert_array_equal(data, [1.0, 2.0, 5.0])
        np.testing.assert_array_equal(w.toarray(), [[1, 0, 2], [0, 0, 0], [0, 5, 0]])


class TestRandomUniform:
    def test_same_seed_same_matrix(self):
        a = build_random_uniform(20, 30, 0.5, 7)
        b = build_random_uniform(20, 30, 0.5, 7)
        assert a.dense.tobytes() == b.dense.tobytes()

    def test_different_seeds_differ(self):
        assert not np.array_equal(build_random_uniform(5, 5, 1, 1).dense, build_random_uniform(5, 5, 1, 2).dense)

    def test_statistics(self):
        w = build_random_uniform(100, 100, 0.5, 3).dense
        n = w.size
        assert np.max(np.abs(w)) <= 0.5
        # U(-s, s) has standard deviation s / sqrt(3)
        assert abs(w.mean()) <= 3 * (0.5 / math.sqrt(3)) / math.sqrt(n)

    def test_recipe_names_prng(self):
        w = build_random_uniform(2, 3, 0.5, 11)
        r = json.loads(w.recipe_json())
        assert r["prng"] == PRNG_NAME and r["seed"] == 11

    def test_large_seed_accepted(self):
        build_random_uniform(2, 2, 1.0, 2**64 - 1)

    @pytest.mark.parametrize("rows,cols,sigma", [(0, 3, 1.0), (3, 0, 1.0), (2, 2, 0.0)])
    def test_invalid(self, rows, cols, sigma):
        with pytest.raises(ParameterError):
            build_random_uniform(rows, cols, sigma, 0)


class TestChebyshev:
    def test_first_row(self):
        w = build_chebyshev(1, 3, ChebyshevParams(p=0.5, q=1, k_cheb=2)).dense
        np.testing.assert_allclose(w[0], [0.5 * math.sin(-math.pi / 4), 0.0, 0.5 * math.sin(math.pi / 4)], atol=1e-15)
        np.testing.assert_allclose(w[0], [-0.35355, 0, 0.35355], atol=1e-5)

    def test_second_row_chebyshev_identity(self):
        w = build_chebyshev(2, 3, ChebyshevParams(0.5, 1, 2)).dense
        np.testing.assert_allclose(w[1], 2 * w[0] ** 2 - 1, atol=1e-12)
        np.testing.assert_allclose(w[1], [-0.75, -1.0, -0.75], atol=1e-12)

    @given(st.integers(1, 12), st.integers(1, 12), st.floats(0.01, 1.0), st.floats(0.2, 5.0),
           st.floats(0.5, 6.0))
    def test_entries_in_unit_interval(self, rows, cols, p, q, k):
        w = build_chebyshev(rows, cols, ChebyshevParams(p, q, k)).dense
        assert np.all(np.abs(w) <= 1)

    @given(st.integers(2, 10), st.integers(1, 10))
    def test_k2_rows_follow_polynomial(self, rows, cols):
        w = build_chebyshev(rows, cols, ChebyshevParams(0.7, 1.3, 2)).dense
        np.testing.assert_allclose(w[1:], 2 * w[:-1] ** 2 - 1, atol=1e-9)

    def test_rows_depend_only_on_previous_row(self):
        a = build_chebyshev(6, 4, ChebyshevParams(0.5, 1, 3)).dense
        b = build_chebyshev(3, 4, ChebyshevParams(0.5, 1, 3)).dense
        np.testing.assert_array_equal(a[:3], b)

    def test_deterministic(self):
        p = ChebyshevParams(0.9, 2.0, 2.5)
        assert build_chebyshev(7, 5, p).dense.tobytes() == build_chebyshev(7, 5, p).dense.tobytes()

    @pytest.mark.parametrize("p", [0.0, 1.5, -2.0])
    def test_invalid_p(self, p):
        with pytest.raises(ParameterError):
            ChebyshevParams(p=p)

    def test_domain_error_is_a_parameter_error(self):
        assert issubclass(DomainError, ParameterError)


class TestLogistic:
    def test_chain_fixed_point(self):
        np.testing.assert_array_equal(logistic_chain(0.5, 2.0, 10), np.full(10, 0.5))

    def test_chain_one_step(self):
        assert logistic_chain(0.3, 4.0, 2)[1] == pytest.approx(0.84, abs=1e-15)

    @pytest.mark.parametrize("r", [2.0, 3.5, 4.0])
    @pytest.mark.parametrize("seed", [0.0, 0.01, 0.3, 0.5, 0.77, 1.0])
    def test_chain_stays_in_unit_interval(self, r, seed):
        c = logistic_chain(seed, r, 10_000)
        assert c.min() >= 0 and c.max() <= 1

    def test_block_layout(self):
        w = build_logistic_sparse(6, 3, LogisticParams(r=3.9, a=0.5, b=1.5, n_expand=2))
        assert w.nnz == 6
        for c in range(3):
            rows = np.sort(w.sp_rows[w.sp_cols == c])
            np.testing.assert_array_equal(rows, [2 * c, 2 * c + 1])

    def test_values_follow_recurrence(self):
        p = LogisticParams(r=3.7, a=0.8, b=2.0, n_expand=4)
        w = build_logistic_sparse(20, 5, p).toarray()
        for c in range(5):
            block = w[4 * c:4 * c + 4, c]
            seed = 0.8 * math.sin(4 * c * math.pi / (19 * 2.0))
            assert block[0] == pytest.approx(seed, abs=1e-15)
            np.testing.assert_allclose(block[1:], 3.7 * block[:-1] * (1 - block[:-1]), atol=1e-15)

    @given(st.integers(1, 15), st.integers(1, 8), st.floats(0.1, 4.0), st.floats(0.0, 1.0),
           st.floats(1.0, 5.0))
    def test_nnz_and_disjoint_supports(self, cols, n, r, a, b):
        w = build_logistic_sparse(n * cols, cols, LogisticParams(r, a, b, n))
        assert w.nnz == n * cols
        supports = [set(w.sp_rows[w.sp_cols == c]) for c in range(cols)]
        assert sum(len(s) for s in supports) == len(set().union(*supports))
        assert np.all((w.sp_vals >= 0) & (w.sp_vals <= 1))

    def test_seed_outside_unit_interval(self):
        # a > 1 gives a seed above one for a mid-range column
        with pytest.raises(ParameterError):
            build_logistic_sparse(8, 4, LogisticParams(3.9, 1.5, 1.0, 2))
        # negative a makes later seeds negative
        with pytest.raises(ParameterError):
            build_logistic_sparse(8, 4, LogisticParams(3.9, -0.5, 1.5, 2))

    def test_rows_must_match_expansion(self):
        with pytest.raises(ParameterError):
            build_logistic_sparse(7, 3, LogisticParams(n_expand=2))

    @pytest.mark.parametrize("r", [0.0, 4.5])
    def test_invalid_r(self, r):
        with pytest.raises(ParameterError):
            LogisticParams(r=r)


class TestSpectralRadius:
    def test_diagonal(self):
        w = WeightMap(2, 2, dense=np.diag([2.0, 1.0]))
        out = rescale_spectral_radius(w, 0.5)
        np.testing.assert_allclose(out.dense, np.diag([0.5, 0.25]), atol=1e-12)

    def test_identity_case(self):
        w = build_random_uniform(30, 30, 1.0, 5)
        rho = eig_radius(w.dense)
        np.testing.assert_allclose(rescale_spectral_radius(w, rho).dense, w.dense, atol=1e-9)

    def test_zero_matrix(self):
        with pytest.raises(SpectralRadiusZeroError):
            rescale_spectral_radius(WeightMap(3, 3, dense=np.zeros((3, 3))), 0.9)

    def test_nilpotent(self):
        with pytest.raises(SpectralRadiusZeroError):
            spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rotation_pair(self):
        # complex-conjugate dominant pair; plain power iteration would oscillate
        a = np.array([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert spectral_radius(a) == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_rescaled_radius_against_eigvals(self, seed):
        w = build_random_uniform(100, 100, 0.5, seed)
        out = rescale_spectral_radius(w, 0.9)
        assert abs(eig_radius(out.dense) - 0.9) < 1e-6
        assert out.recipe["rho"] == 0.9

    def test_sparse_input(self):
        w = WeightMap(3, 3, sp_rows=[0, 1, 2], sp_cols=[1, 2, 0], sp_vals=[1.0, 2.0, 4.0])
        assert spectral_radius(w) == pytest.approx(2.0, abs=1e-9)

    def test_non_square(self):
        with pytest.raises(ShapeError):
            spectral_radius(np.ones((2, 3)))


class TestApplyMap:
    def test_identity(self, backend):
        np.testing.assert_array_equal(apply_map(WeightMap(2, 2, dense=np.eye(2)), [1.0, 2.0]), [1.0, 2.0])

    def test_single_entry_sparse(self, backend):
        w = WeightMap(2, 2, sp_rows=[0], sp_cols=[0], sp_vals=[2.0])
        np.testing.assert_array_equal(apply_map(w, [3.0, 4.0]), [6.0, 0.0])

    def test_dense_and_sparse_paths_agree(self, backend, rng):
        dense = build_random_uniform(64, 32, 1.0, 9)
        v = rng.standard_normal(32)
        np.testing.assert_allclose(apply_map(dense.to_sparse(), v), apply_map(dense, v), atol=1e-12, rtol=0)

    def test_logistic_against_dense_product(self, backend, rng):
        w = build_logistic_sparse(15, 5, LogisticParams(3.9, 0.6, 1.5, 3))
        v = rng.standard_normal(5)
        np.testing.assert_allclose(apply_map(w, v), w.toarray() @ v, atol=1e-12, rtol=0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            apply_map(WeightMap(2, 2, dense=np.eye(2)), [1.0, 2.0, 3.0])


class TestRecipes:
    @pytest.mark.parametrize("w", [
        build_random_uniform(4, 6, 0.3, 21),
        build_chebyshev(5, 3, ChebyshevParams(0.4, 1.5, 2.2)),
        build_logistic_sparse(8, 4, LogisticParams(3.6, 0.7, 2.0, 2)),
        rescale_spectral_radius(build_random_uniform(10, 10, 0.5, 4), 0.8),
    ])
    def test_rebuild_bit_identical(self, w):
        back = from_recipe(w.recipe_json())
        assert np.array_equal(back.toarray(), w.toarray())

    def test_foreign_prng_rejected(self):
        r = dict(build_random_uniform(2, 2, 1.0, 0).recipe, prng="other/v9")
        with pytest.raises(ParameterError):
            from_recipe(r)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            from_recipe({"kind": "tent"})

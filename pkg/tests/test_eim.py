"""Greedy interpolant: hand-traced selection, exactness, nesting, routes."""

import numpy as np
import pytest
import scipy.sparse as sparse

from powlim import (
    AffineFamily,
    EimInterpolant,
    ParameterBox,
    explicit_sample,
    lhs_sample,
)


@pytest.fixture()
def line_family():
    """Single-term family with coefficient mu1 on [1, 3]."""
    return AffineFamily(
        terms=[sparse.identity(2, format="csr")],
        coeffs=["mu1"],
        box=ParameterBox.from_pairs([[1.0, 3.0]]),
    )


@pytest.fixture()
def line_model(line_family):
    sample = explicit_sample([[1.0], [2.0], [3.0]], line_family.box)
    return EimInterpolant(m=1, tol=0.0, sample=sample).fit(line_family)


class TestHandTrace:
    """d=1, sample {1,2,3}, m=1: every greedy intermediate known by hand."""

    def test_selection_order(self, line_model):
        np.testing.assert_array_equal(line_model.selected_k_, [[1], [0]])
        np.testing.assert_array_equal(line_model.selected_mu_, [[3.0], [1.0]])

    def test_residual_history(self, line_model):
        # step 1 sees max |mu| = 3, step 2 the deflated constant 2/3
        np.testing.assert_allclose(line_model.residual_history_, [3.0, 2.0 / 3.0])

    def test_interpolation_matrix(self, line_model):
        np.testing.assert_allclose(line_model.F_, [[3.0, 1.0], [1.0, 1.0]])

    def test_basis_matrix(self, line_model):
        np.testing.assert_allclose(line_model.B_, [[1.0, 0.0], [1.0 / 3.0, 1.0]])

    def test_weights_at_the_midpoint(self, line_model):
        np.testing.assert_allclose(line_model.lambda_weights([2.0]), [0.5, 0.5])

    def test_exact_for_affine_functions_everywhere(self, line_model):
        # two snapshots reproduce any degree-1 monomial on the whole line
        for mu in np.linspace(1.0, 3.0, 7):
            assert line_model.interpolate([mu], k=[1]) == pytest.approx(mu, rel=1e-14)
            assert line_model.interpolate([mu], k=[0]) == pytest.approx(1.0, rel=1e-14)


class TestInterpolationProperty:
    def test_exact_at_selected_indices_for_any_parameter(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 400, seed=0)
        model = EimInterpolant(m=3, tol=0.0, n_terms=7, sample=sample).fit(family)
        for mu in family.box.uniform(50, seed=1):
            got = model.interpolate(mu, k=model.selected_k_)
            want = np.array([model.g_exact(mu, k) for k in model.selected_k_])
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-10 * max(1, want.max()))

    def test_unit_weights_at_selected_parameters(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 300, seed=2)
        model = EimInterpolant(m=2, tol=0.0, sample=sample).fit(family)
        for j, mu in enumerate(model.selected_mu_):
            weights = model.lambda_weights(mu)
            expected = np.zeros(model.n_selected_)
            expected[j] = 1.0
            np.testing.assert_allclose(weights, expected, atol=1e-9)

    def test_full_budget_reproduces_g_on_the_whole_index_set(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 300, seed=3)
        model = EimInterpolant(m=2, tol=0.0, sample=sample).fit(family)
        assert model.n_selected_ == 6  # runs to completion
        for mu in family.box.uniform(20, seed=4):
            got = model.interpolate(mu)
            want = np.array([model.g_exact(mu, k) for k in model.index_set_.indices])
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-9 * max(1, want.max()))


class TestStructure:
    def test_basis_matrix_is_exactly_unit_lower_triangular(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 200, seed=5)
        model = EimInterpolant(m=3, tol=0.0, sample=sample).fit(family)
        b = model.B_
        np.testing.assert_array_equal(np.diag(b), np.ones(len(b)))
        np.testing.assert_array_equal(np.triu(b, 1), np.zeros_like(b))

    def test_selected_indices_are_distinct(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 200, seed=6)
        model = EimInterpolant(m=3, tol=0.0, sample=sample).fit(family)
        assert len({tuple(k) for k in model.selected_k_}) == model.n_selected_
        assert len({tuple(p) for p in model.selected_mu_}) == model.n_selected_

    def test_residual_history_starts_at_the_largest_g_magnitude(self, thermal6):
        from powlim import monomial_matrix

        family, _ = thermal6
        sample = lhs_sample(family.box, 200, seed=7)
        model = EimInterpolant(m=4, tol=0.0, sample=sample).fit(family)
        g_all = monomial_matrix(sample.points, model.index_set_.indices)
        assert model.residual_history_[0] == pytest.approx(np.abs(g_all).max(), rel=1e-15)
        assert np.all(model.residual_history_ > 0)

    def test_force_k0_pins_the_zero_index_first(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 200, seed=8)
        model = EimInterpolant(m=2, tol=0.0, force_k0=True, sample=sample).fit(family)
        np.testing.assert_array_equal(model.selected_k_[0], [0, 0])

    def test_partition_of_unity_under_forced_k0(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 200, seed=9)
        model = EimInterpolant(m=2, tol=0.0, force_k0=True, sample=sample).fit(family)
        for mu in family.box.uniform(50, seed=10):
            assert model.lambda_weights(mu).sum() == pytest.approx(1.0, abs=1e-12)


class TestRoutes:
    def test_lambda_and_beta_routes_agree(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 300, seed=11)
        model = EimInterpolant(m=3, tol=0.0, n_terms=8, sample=sample).fit(family)
        ks = model.index_set_.indices
        for mu in family.box.uniform(10, seed=12):
            via_lambda = model.interpolate(mu, k=ks, route="lambda")
            via_beta = model.interpolate(mu, k=ks, route="beta")
            np.testing.assert_allclose(via_lambda, via_beta, rtol=0,
                                       atol=1e-10 * max(1, np.abs(via_lambda).max()))

    def test_unknown_route_rejected(self, line_model):
        with pytest.raises(ValueError, match="route"):
            line_model.interpolate([2.0], k=[1], route="gamma")


class TestDeterminismAndNesting:
    def test_same_seed_same_model(self, thermal6):
        family, _ = thermal6
        a = EimInterpolant(m=2, tol=0.0, n_sample=500, sample_seed=4).fit(family)
        b = EimInterpolant(m=2, tol=0.0, n_sample=500, sample_seed=4).fit(family)
        np.testing.assert_array_equal(a.selected_mu_, b.selected_mu_)
        np.testing.assert_array_equal(a.F_, b.F_)

    def test_truncate_equals_fresh_fit_with_smaller_budget(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 300, seed=13)
        full = EimInterpolant(m=3, tol=0.0, sample=sample).fit(family)
        fresh = EimInterpolant(m=3, tol=0.0, n_terms=4, sample=sample).fit(family)
        cut = full.truncate(4)
        np.testing.assert_array_equal(cut.selected_k_, fresh.selected_k_)
        np.testing.assert_array_equal(cut.selected_mu_, fresh.selected_mu_)
        np.testing.assert_allclose(cut.F_, fresh.F_, rtol=0, atol=0)
        np.testing.assert_allclose(cut.B_, fresh.B_, rtol=0, atol=0)
        mu = family.box.midpoint
        np.testing.assert_allclose(cut.lambda_weights(mu), fresh.lambda_weights(mu),
                                   rtol=1e-13, atol=1e-15)

    def test_truncate_bounds_checked(self, line_model):
        with pytest.raises(ValueError):
            line_model.truncate(0)
        with pytest.raises(ValueError):
            line_model.truncate(3)

    def test_budget_caps_the_number_of_terms(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 200, seed=14)
        model = EimInterpolant(m=3, tol=0.0, n_terms=5, sample=sample).fit(family)
        assert model.n_selected_ == 5
        assert model.F_.shape == (5, 5)

    def test_tolerance_stops_early_on_the_nested_prefix(self, thermal6):
        family, _ = thermal6
        sample = lhs_sample(family.box, 300, seed=15)
        full = EimInterpolant(m=3, tol=0.0, sample=sample).fit(family)
        history = full.residual_history_
        # a tolerance sitting exactly on the 5th residual must stop by step 4
        tol = history[4] / history[0] * (1 + 1e-9)
        stopped = EimInterpolant(m=3, tol=tol, sample=sample).fit(family)
        assert stopped.n_selected_ <= 4
        np.testing.assert_array_equal(
            stopped.selected_k_, full.selected_k_[: stopped.n_selected_]
        )

    def test_rank_exhaustion_stops_cleanly(self, line_family):
        # three sample points carry rank three; tol=0 must not select a
        # roundoff-level fourth column
        sample = explicit_sample([[1.0], [2.0], [3.0]], line_family.box)
        model = EimInterpolant(m=6, tol=0.0, sample=sample).fit(line_family)
        assert model.n_selected_ == 3
        assert len({tuple(p) for p in model.selected_mu_}) == 3


class TestValidation:
    def test_rejects_bad_hyperparameters(self, line_family):
        with pytest.raises(ValueError, match="m >= 1"):
            EimInterpolant(m=0).fit(line_family)
        with pytest.raises(ValueError, match="tol"):
            EimInterpolant(m=1, tol=-1.0).fit(line_family)
        with pytest.raises(ValueError, match="n_terms"):
            EimInterpolant(m=1, n_terms=0).fit(line_family)

    def test_rejects_sample_outside_box(self, line_family):
        sample = explicit_sample([[0.5], [2.0]])
        with pytest.raises(ValueError, match="outside"):
            EimInterpolant(m=1, sample=sample).fit(line_family)

    def test_interpolate_validates_queries(self, line_model):
        with pytest.raises(ValueError, match="weight"):
            line_model.interpolate([2.0], k=[5])
        with pytest.raises(ValueError, match="dimension"):
            line_model.interpolate([2.0], k=[0, 1])
        with pytest.raises(ValueError, match="single"):
            line_model.interpolate(np.array([[1.5], [2.0]]), k=[1])

    def test_weights_validate_parameter_shape(self, line_model):
        with pytest.raises(ValueError):
            line_model.lambda_weights([1.0, 2.0])

    def test_unfitted_model_refuses_queries(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            EimInterpolant().lambda_weights([1.0])

    def test_batch_weights_shape(self, line_model):
        batch = np.array([[1.2], [2.0], [2.8]])
        weights = line_model.lambda_weights(batch)
        assert weights.shape == (3, 2)
        np.testing.assert_allclose(weights[1], [0.5, 0.5])

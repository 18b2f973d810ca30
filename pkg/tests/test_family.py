"""Affine families: boxes, assembly, monomials, disk round-trip."""

import numpy as np
import pytest
import scipy.sparse as sparse

from powlim import (
    AffineFamily,
    ParameterBox,
    load_family,
    monomial,
    monomial_matrix,
    save_family,
)
from conftest import make_general_family


class TestParameterBox:
    def test_from_pairs_and_accessors(self):
        box = ParameterBox.from_pairs([[1.0, 4.0], [0.5, 2.0]])
        assert box.r == 2
        np.testing.assert_allclose(box.midpoint, [2.5, 1.25])
        assert box.pairs() == [[1.0, 4.0], [0.5, 2.0]]

    def test_contains_with_edge_tolerance(self):
        box = ParameterBox.from_pairs([[1.0, 4.0]])
        assert box.contains([1.0])
        assert box.contains([4.0])
        assert box.contains([4.0 + 1e-14])
        assert not box.contains([4.1])
        assert not box.contains([0.9])

    def test_uniform_is_seeded_and_inside(self):
        box = ParameterBox.from_pairs([[1.0, 4.0], [0.5, 2.0]])
        a = box.uniform(50, seed=3)
        b = box.uniform(50, seed=3)
        np.testing.assert_array_equal(a, b)
        assert all(box.contains(p) for p in a)

    def test_normalize_inverts_map_unit(self):
        box = ParameterBox.from_pairs([[1.0, 4.0], [0.5, 2.0]])
        unit = np.random.default_rng(0).uniform(size=(20, 2))
        np.testing.assert_allclose(box.normalize(box.map_unit(unit)), unit, atol=1e-14)

    def test_degenerate_bounds_rejected(self):
        with pytest.raises(ValueError):
            ParameterBox.from_pairs([[2.0, 1.0]])


class TestAffineFamily:
    def test_assemble_is_the_coefficient_combination(self):
        family = make_general_family(5, 3, seed=1)
        mu = np.array([0.7, 1.1, 1.9])
        expected = sum(
            float(c(mu)) * t.toarray() for c, t in zip(family.coeffs, family.terms)
        )
        np.testing.assert_allclose(family.assemble(mu).toarray(), expected, rtol=1e-14)

    def test_assemble_keeps_explicit_zeros_in_the_union_pattern(self):
        # terms with disjoint patterns must still combine at coefficient zero
        t1 = sparse.csr_matrix(np.diag([1.0, 0.0]))
        t2 = sparse.csr_matrix(np.diag([0.0, 1.0]))
        family = AffineFamily(
            terms=[t1, t2],
            coeffs=["mu1-1", "mu2"],
            box=ParameterBox.from_pairs([[0.0, 2.0], [0.0, 2.0]]),
        )
        got = family.assemble([1.0, 3.0]).toarray()
        np.testing.assert_allclose(got, np.diag([0.0, 3.0]))

    def test_eval_coeffs_single_and_batch(self):
        family = make_general_family(4, 2, seed=2)
        mu = np.array([0.8, 1.5])
        single = family.eval_coeffs(mu)
        batch = family.eval_coeffs(np.stack([mu, mu * 1.1]))
        assert single.shape == (2,)
        assert batch.shape == (2, 2)
        np.testing.assert_allclose(batch[0], single, rtol=1e-15)

    def test_string_coefficients_are_parsed(self):
        family = AffineFamily(
            terms=[sparse.identity(3, format="csr")],
            coeffs=["2*mu1"],
            box=ParameterBox.from_pairs([[1.0, 2.0]]),
        )
        np.testing.assert_allclose(
            family.assemble([1.5]).toarray(), 3.0 * np.eye(3)
        )

    def test_dimension_properties(self, thermal6):
        family, rhs = thermal6
        assert family.d == 2
        assert family.r == 2
        assert family.n == 36
        assert rhs.shape == (36,)

    def test_term_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            AffineFamily(
                terms=[sparse.identity(2, format="csr")],
                coeffs=["mu1", "mu2"],
                box=ParameterBox.from_pairs([[0.0, 1.0], [0.0, 1.0]]),
            )

    def test_coefficient_parameter_beyond_box_rejected(self):
        with pytest.raises(ValueError, match="mu2"):
            AffineFamily(
                terms=[sparse.identity(2, format="csr")],
                coeffs=["mu2"],
                box=ParameterBox.from_pairs([[0.0, 1.0]]),
            )

    def test_false_spd_hint_rejected(self):
        with pytest.raises(ValueError, match="SPD"):
            AffineFamily(
                terms=[sparse.csr_matrix(-np.eye(2))],
                coeffs=["mu1"],
                box=ParameterBox.from_pairs([[1.0, 2.0]]),
                spd=True,
            )


class TestMonomials:
    def test_monomial_is_the_coefficient_power_product(self):
        alpha = np.array([2.0, 3.0])
        assert monomial(alpha, np.array([2, 1])) == 12.0
        assert monomial(alpha, np.array([0, 0])) == 1.0

    def test_monomial_matrix_matches_loops(self):
        rng = np.random.default_rng(4)
        alphas = rng.uniform(0.5, 2.0, size=(7, 3))
        exponents = np.array([[0, 0, 0], [1, 0, 2], [2, 2, 2], [0, 3, 1]])
        got = monomial_matrix(alphas, exponents)
        assert got.shape == (4, 7)
        for a, row_k in enumerate(exponents):
            for b, alpha in enumerate(alphas):
                assert got[a, b] == pytest.approx(monomial(alpha, row_k), rel=1e-14)

    def test_monomial_shape_mismatch(self):
        with pytest.raises(ValueError):
            monomial(np.array([1.0, 2.0]), np.array([1, 0, 0]))


class TestDiskRoundTrip:
    def test_save_then_load_preserves_everything(self, tmp_path, thermal6):
        family, rhs = thermal6
        config = save_family(family, tmp_path / "fam", rhs)
        loaded, loaded_rhs = load_family(config)
        assert loaded.d == family.d
        assert loaded.n == family.n
        assert loaded.spd == family.spd
        assert [c.text for c in loaded.coeffs] == [c.text for c in family.coeffs]
        assert loaded.box.pairs() == family.box.pairs()
        np.testing.assert_allclose(loaded_rhs, rhs, rtol=0, atol=0)
        mu = np.array([1.7, 3.2])
        np.testing.assert_allclose(
            loaded.assemble(mu).toarray(), family.assemble(mu).toarray(), rtol=1e-15
        )

    def test_load_without_rhs_returns_none(self, tmp_path):
        family = make_general_family(4, 2, seed=5)
        config = save_family(family, tmp_path / "fam")
        _, rhs = load_family(config)
        assert rhs is None

    def test_missing_config_key_rejected(self, tmp_path):
        path = tmp_path / "family.json"
        path.write_text('{"terms": ["A1.mtx"], "coeffs": ["mu1"]}')
        with pytest.raises(ValueError, match="param_box"):
            load_family(path)

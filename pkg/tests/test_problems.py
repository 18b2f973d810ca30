"""Built-in problem generators: shapes, definiteness, determinism."""

import numpy as np
import pytest

from powlim import PROBLEM_KINDS, generate_problem


class TestCatalog:
    def test_all_kinds_generate(self):
        for kind in PROBLEM_KINDS:
            family, rhs = generate_problem(kind, 5)
            assert family.n == 25
            assert family.spd

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unsupported problem kind"):
            generate_problem("poisson9000", 5)

    def test_generation_is_deterministic(self):
        a, _ = generate_problem("heat_capacity10", 5)
        b, _ = generate_problem("heat_capacity10", 5)
        mu = a.box.midpoint
        np.testing.assert_array_equal(
            a.assemble(mu).toarray(), b.assemble(mu).toarray()
        )


class TestThermal:
    def test_structure(self, thermal6):
        family, rhs = thermal6
        assert family.d == 2
        assert family.r == 2
        assert family.box.pairs() == [[1.0, 4.0], [1.0, 4.0]]
        assert [c.text for c in family.coeffs] == ["mu1", "mu2"]

    def test_rhs_is_the_left_edge_flux(self, thermal6):
        _, rhs = thermal6
        nonzero = np.nonzero(rhs)[0]
        assert len(nonzero) == 6
        # left-edge nodes in row-major order, lumped edge length 1/(n-1)
        np.testing.assert_array_equal(nonzero, np.arange(6) * 6)
        np.testing.assert_allclose(rhs[nonzero], 0.2)

    def test_assembly_is_spd_on_random_parameters(self, thermal6):
        family, _ = thermal6
        for mu in family.box.uniform(5, seed=1):
            eigs = np.linalg.eigvalsh(family.assemble(mu).toarray())
            assert eigs.min() > 0

    def test_logdet_variant_has_saturating_coefficients_and_no_rhs(self):
        family, rhs = generate_problem("logdet_thermal", 5)
        assert rhs is None
        assert family.d == 2
        texts = [c.text for c in family.coeffs]
        assert any("exp" in t for t in texts)


class TestManyTermKinds:
    def test_heat_capacity_has_ten_parameters(self):
        family, rhs = generate_problem("heat_capacity10", 5)
        assert family.d == 11  # parameter-free baseline term plus ten
        assert family.r == 10
        assert rhs is not None
        assert family.coeffs[0].text == "1.0"

    def test_fiber_block_has_fourteen_parameters(self):
        family, rhs = generate_problem("fiber_block14", 6)
        assert family.d == 14
        assert family.r == 14
        assert rhs is not None
        # per-region reference pairs sit at the box midpoints, +-2.5 percent
        mid = family.box.midpoint
        np.testing.assert_allclose(family.box.lows, 0.975 * mid, rtol=1e-12)
        np.testing.assert_allclose(family.box.highs, 1.025 * mid, rtol=1e-12)

    def test_tiny_grids_rejected(self):
        with pytest.raises(ValueError):
            generate_problem("laplace2d_thermal", 1)
        with pytest.raises(ValueError):
            generate_problem("fiber_block14", 3)

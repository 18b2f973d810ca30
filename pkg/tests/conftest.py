"""Shared fixtures: small built-in problems and synthetic affine families."""

import numpy as np
import pytest
import scipy.sparse as sparse

from powlim import AffineFamily, ParameterBox, generate_problem


def make_spd_family(n, d, seed, lo=0.5, hi=2.0):
    """Random SPD affine family with linear coefficients mu_l on (lo, hi)^d."""
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(d):
        raw = rng.standard_normal((n, n))
        terms.append(sparse.csr_matrix(raw @ raw.T + n * np.eye(n)))
    return AffineFamily(
        terms=terms,
        coeffs=[f"mu{l}" for l in range(1, d + 1)],
        box=ParameterBox.from_pairs([[lo, hi]] * d),
        symmetric=True,
        spd=True,
    )


def make_general_family(n, d, seed, lo=0.5, hi=2.0):
    """Random dense nonsymmetric family, linear coefficients, no SPD claim."""
    rng = np.random.default_rng(seed)
    terms = [sparse.csr_matrix(rng.standard_normal((n, n))) for _ in range(d)]
    return AffineFamily(
        terms=terms,
        coeffs=[f"mu{l}" for l in range(1, d + 1)],
        box=ParameterBox.from_pairs([[lo, hi]] * d),
    )


def make_localized_family(n=8, d=3, lo=0.5, hi=2.0):
    """Diagonal SPD family whose terms are localized bump profiles.

    The anchor inverses of this family are strongly linearly independent
    (normal-equation condition number around 50), unlike families whose
    terms share a large common component.
    """
    t = np.linspace(0.0, 1.0, n)
    centers = np.linspace(0.1, 0.9, d)
    terms = [
        sparse.csr_matrix(sparse.diags(np.exp(-((t - c) / 0.18) ** 2) + 0.05))
        for c in centers
    ]
    return AffineFamily(
        terms=terms,
        coeffs=[f"mu{l}" for l in range(1, d + 1)],
        box=ParameterBox.from_pairs([[lo, hi]] * d),
        symmetric=True,
        spd=True,
    )


@pytest.fixture(scope="session")
def thermal6():
    """Two-term diffusion/mass family on a 6x6 grid (36 dofs) with its rhs."""
    return generate_problem("laplace2d_thermal", 6)


@pytest.fixture(scope="session")
def thermal5():
    """Same family at 5x5 resolution (25 dofs), for dense-heavy tests."""
    return generate_problem("laplace2d_thermal", 5)

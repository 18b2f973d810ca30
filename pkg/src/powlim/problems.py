"""Built-in desk-scale problem generators.

Each generator returns an SPD affine family on a regular n x n grid together
with an optional right-hand side. They are structural analogs of the larger
finite-element benchmarks the package targets: a two-term diffusion+mass
operator with linear or saturating coefficients, a mass-dominated family
split into many spatially weighted terms, and a blocked stiffness family
whose parameters scale per-region material pairs.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sparse

from .expressions import parse_expression
from .family import AffineFamily, ParameterBox

PROBLEM_KINDS = ("laplace2d_thermal", "logdet_thermal", "heat_capacity10", "fiber_block14")

# per-region reference stiffness pairs for fiber_block14: background is soft,
# the six fiber regions are a thousandfold stiffer
_FIBER_REFERENCE = [(1.15e6, 7.7e5)] + [(1.15e9, 7.7e8)] * 6


def _grid_edges(n: int):
    # horizontal+vertical neighbor pairs of the n x n node grid, row-major
    idx = np.arange(n * n).reshape(n, n)
    right = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    down = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return np.concatenate([right, down], axis=0)


def _edge_laplacian(edges: np.ndarray, n_nodes: int) -> sparse.csr_matrix:
    i, j = edges[:, 0], edges[:, 1]
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([-np.ones(2 * len(edges)), np.ones(2 * len(edges))])
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n_nodes, n_nodes))


def _grid_operators(n: int):
    """Graph Laplacian K, lumped mass M = h^2 I and node coordinates."""
    if n < 2:
        raise ValueError(f"grid resolution n={n} too small, need n >= 2")
    h = 1.0 / (n - 1)
    n_nodes = n * n
    stiffness = _edge_laplacian(_grid_edges(n), n_nodes)
    mass = sparse.identity(n_nodes, format="csr") * (h * h)
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    coords = np.stack([jj.ravel() * h, ii.ravel() * h], axis=1)  # (x, y) in [0,1]^2
    return stiffness, mass, coords, h


def _flux_load(n: int, h: float) -> np.ndarray:
    # unit inflow across the left edge, lumped onto its nodes
    load = np.zeros(n * n)
    load[np.arange(n) * n] = h
    return load


def _thermal(n: int, coeffs: list[str], rhs: bool):
    stiffness, mass, _, h = _grid_operators(n)
    family = AffineFamily(
        terms=[stiffness, mass],
        coeffs=[parse_expression(c) for c in coeffs],
        box=ParameterBox.from_pairs([[1.0, 4.0], [1.0, 4.0]]),
        symmetric=True,
        spd=True,
    )
    return family, (_flux_load(n, h) if rhs else None)


def _heat_capacity10(n: int):
    stiffness, mass, coords, _ = _grid_operators(n)
    xs = 10.0 * coords[:, 0]
    ys = 10.0 * coords[:, 1]
    weights = [
        np.cos(0.2 * xs),
        np.cos(0.25 * ys),
        np.cos(0.3 * (xs + ys)),
        np.cos(0.15 * (xs + 2 * ys)),
        np.cos(0.35 * (2 * xs + ys)),
        np.cos(0.1 * (xs - ys)),
        xs / 10.0,
        ys / 10.0,
        (xs + ys) / 20.0,
        np.cos(0.1 * (xs + ys)),
    ]
    # baseline operator dominates; the ten weighted mass fragments carry the
    # parameters, each scaled by the 1/100 time-step factor
    terms = [0.1 * mass + 370.0 * stiffness]
    terms += [sparse.diags(mass.diagonal() * w / 100.0).tocsr() for w in weights]
    coeffs = [parse_expression("1")] + [parse_expression(f"mu{l}") for l in range(1, 11)]
    family = AffineFamily(
        terms=terms,
        coeffs=coeffs,
        box=ParameterBox.from_pairs([[0.1, 0.6]] * 10),
        symmetric=True,
        spd=True,
    )
    return family, mass @ np.ones(family.n)


def _fiber_block14(n: int):
    if n < 4:
        raise ValueError(f"fiber_block14 needs n >= 4, got n={n}")
    stiffness_unused, mass, _, _ = _grid_operators(n)
    n_nodes = n * n
    # 13 contiguous index bands; odd bands are the six stiff fibers
    band = np.minimum(np.arange(n_nodes) * 13 // n_nodes, 12)
    region = np.where(band % 2 == 1, (band + 1) // 2, 0)
    edges = _grid_edges(n)
    edge_region = np.where(region[edges[:, 0]] == region[edges[:, 1]], region[edges[:, 0]], 0)
    terms = []
    pairs = []
    for k in range(7):
        region_edges = edges[edge_region == k]
        if len(region_edges):
            stiff_k = _edge_laplacian(region_edges, n_nodes)
        else:
            stiff_k = sparse.csr_matrix((n_nodes, n_nodes))
        mass_k = sparse.diags(mass.diagonal() * (region == k)).tocsr()
        terms += [stiff_k, mass_k]
        pairs.append(_FIBER_REFERENCE[k])
    box_pairs = []
    for eta1, eta2 in pairs:
        box_pairs += [[0.975 * eta1, 1.025 * eta1], [0.975 * eta2, 1.025 * eta2]]
    family = AffineFamily(
        terms=terms,
        coeffs=[parse_expression(f"mu{l}") for l in range(1, 15)],
        box=ParameterBox.from_pairs(box_pairs),
        symmetric=True,
        spd=True,
    )
    return family, mass @ np.ones(family.n)


def generate_problem(kind: str, n: int, seed: int = 0):
    """Build a named desk-scale problem.

    Parameters
    ----------
    kind : str
        One of PROBLEM_KINDS.
    n : int
        Grid resolution; the matrices are n^2 x n^2.
    seed : int
        Reserved for randomized kinds; the current generators are fully
        deterministic and ignore it.

    Returns
    -------
    (AffineFamily, ndarray or None)
        The family and a right-hand side where the problem has one.
    """
    del seed
    if kind == "laplace2d_thermal":
        return _thermal(n, ["mu1", "mu2"], rhs=True)
    if kind == "logdet_thermal":
        return _thermal(n, ["0.045*(1-exp(-mu1^2))", "1-exp(-mu2)"], rhs=False)
    if kind == "heat_capacity10":
        return _heat_capacity10(n)
    if kind == "fiber_block14":
        return _fiber_block14(n)
    raise ValueError(f"unsupported problem kind {kind!r}; known kinds: {', '.join(PROBLEM_KINDS)}")

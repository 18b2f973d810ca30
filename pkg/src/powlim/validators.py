"""Reference algorithms the surrogates are limits of, kept as validators.

None of these run in the online stage. They exist so tests can confirm the
identities the surrogates rely on:

- the preconditioned Richardson scheme X_{k+1} = (I - P^{-1} A_mu) X_k +
  P^{-1} whose limit is A_mu^{-1}, with its closed form and geometric error
  bound;
- the log-determinant trace series n log(rho_M) - sum_k tr((I - A/rho_M)^k)/k
  with its truncation bound;
- the brute-force expansion of A_mu^p over all ordered products of the
  family terms, grouped by exponent multi-index;
- the reconstruction of A_mu^p from interpolation weights and snapshot
  matrix powers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from ._validation import as_parameter_batch
from .family import AffineFamily, monomial
from .linalg import DENSE_LIMIT, NumericalError, spectral_norm

# brute_power_expand enumerates d^p ordered products; hard caps keep it an
# oracle, not a method
_BRUTE_MAX_PRODUCTS = 10**6
_BRUTE_MAX_ORDER = 50


@dataclass(frozen=True)
class RichardsonConfig:
    """Preconditioner, initial guess, and step count for the scheme."""

    psi: object
    x0: np.ndarray = field(default=None)
    steps: int = 10

    def __post_init__(self):
        psi = scipy.sparse.csr_matrix(self.psi)
        if psi.shape[0] != psi.shape[1]:
            raise ValueError(f"psi must be square, got {psi.shape}")
        x0 = self.x0
        x0 = np.zeros(psi.shape) if x0 is None else np.asarray(x0, dtype=np.float64)
        if x0.shape != psi.shape:
            raise ValueError(f"x0 shape {x0.shape} != psi shape {psi.shape}")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "x0", x0)


class RichardsonResult(NamedTuple):
    iterates: list  # X_0 .. X_steps from the recurrence
    closed_form: np.ndarray  # (I - P^{-1}A)^steps (X_0 - A^{-1}) + A^{-1}


def richardson_iterate(family: AffineFamily, mu, cfg: RichardsonConfig) -> RichardsonResult:
    """All recurrence iterates plus the closed-form final iterate.

    The two paths agreeing is the correctness check for the scheme; the
    closed form also exposes the geometric contraction.
    """
    n = family.n
    if n > DENSE_LIMIT:
        raise ValueError(f"dense validator limited to n <= {DENSE_LIMIT}, got {n}")
    if cfg.psi.shape[0] != n:
        raise ValueError(f"psi order {cfg.psi.shape[0]} != family order {n}")
    matrix = family.assemble(mu).toarray()
    try:
        factor = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(cfg.psi))
    except RuntimeError as exc:
        raise NumericalError(f"psi factorization failed: {exc}") from exc
    psi_inv = factor.solve(np.eye(n))
    contraction = np.eye(n) - psi_inv @ matrix
    iterates = [cfg.x0.copy()]
    for _ in range(cfg.steps):
        iterates.append(contraction @ iterates[-1] + psi_inv)
    inverse = np.linalg.inv(matrix)
    closed = np.linalg.matrix_power(contraction, cfg.steps) @ (cfg.x0 - inverse) + inverse
    return RichardsonResult(iterates, closed)


def richardson_sampled_bound(
    family: AffineFamily, cfg: RichardsonConfig, mus
) -> tuple[float, float]:
    """Sampled suprema (eps0_hat, rho_hat) for the geometric error bound.

    rho_hat is the largest spectral norm of I - P^{-1} A_mu over the given
    parameters and eps0_hat the largest initial error norm; the bound
    ||X_m - A_mu^{-1}||_2 <= eps0_hat * rho_hat^m then holds at those same
    parameters. Both are sample maxima, not box suprema.
    """
    mu_batch, _ = as_parameter_batch(mus, family.r)
    n = family.n
    factor = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(cfg.psi))
    psi_inv = factor.solve(np.eye(n))
    rho_hat = 0.0
    eps0_hat = 0.0
    for mu in mu_batch:
        matrix = family.assemble(mu).toarray()
        rho_hat = max(rho_hat, spectral_norm(np.eye(n) - psi_inv @ matrix))
        eps0_hat = max(eps0_hat, spectral_norm(cfg.x0 - np.linalg.inv(matrix)))
    return eps0_hat, rho_hat


@dataclass(frozen=True)
class LogDetSeriesConfig:
    """Spectral bracket [rho_min, rho_max] and truncation order."""

    rho_max: float
    rho_min: float
    steps: int

    def __post_init__(self):
        if not 0 < self.rho_min <= self.rho_max:
            raise ValueError("need 0 < rho_min <= rho_max")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


def logdet_series(family: AffineFamily, mu, cfg: LogDetSeriesConfig) -> float:
    """Truncated trace series for log det A_mu.

    Returns n log(rho_max) - sum_{k=1}^{steps-1} tr((I - A_mu/rho_max)^k)/k
    with traces from explicit dense powers. Raises when rho_max fails to
    dominate the spectrum at this mu (checked by eigenvalue computation).
    """
    if not family.spd:
        raise NumericalError("logdet series needs an SPD family")
    n = family.n
    if n > DENSE_LIMIT:
        raise ValueError(f"dense validator limited to n <= {DENSE_LIMIT}, got {n}")
    matrix = family.assemble(mu).toarray()
    eigs = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    if np.any(np.abs(1.0 - eigs / cfg.rho_max) >= 1.0):
        raise NumericalError(
            f"rho_max = {cfg.rho_max} does not dominate the spectrum at mu={np.asarray(mu).tolist()}"
        )
    shifted = np.eye(n) - matrix / cfg.rho_max
    total = n * np.log(cfg.rho_max)
    power = np.eye(n)
    for k in range(1, cfg.steps):
        power = power @ shifted
        total -= np.trace(power) / k
    return float(total)


def logdet_series_bound(n: int, cfg: LogDetSeriesConfig) -> float:
    """Truncation-error bound n (rho_max/rho_min) (1 - rho_min/rho_max)^steps / steps."""
    ratio = cfg.rho_min / cfg.rho_max
    return n / ratio * (1.0 - ratio) ** cfg.steps / cfg.steps


class PowerExpansion(NamedTuple):
    total: np.ndarray  # A_mu^p reassembled from the grouped terms
    terms: dict  # multi-index tuple -> summed ordered products T_k


def brute_power_expand(family: AffineFamily, mu, p: int) -> PowerExpansion:
    """A_mu^p by explicit summation over all d^p ordered term products.

    Products sharing an exponent multi-index k are accumulated into T_k, and
    the total is sum_k (prod_l alpha_l(mu)^{k_l}) T_k. Depth-first prefix
    reuse keeps it to one matrix product per enumerated node.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    d, n = family.d, family.n
    if d**p > _BRUTE_MAX_PRODUCTS:
        raise ValueError(f"d^p = {d**p} exceeds the oracle cap {_BRUTE_MAX_PRODUCTS}")
    if n > _BRUTE_MAX_ORDER:
        raise ValueError(f"oracle limited to n <= {_BRUTE_MAX_ORDER}, got {n}")
    dense_terms = [t.toarray() for t in family.terms]
    terms: dict[tuple, np.ndarray] = {}
    counts = np.zeros(d, dtype=np.int64)

    def descend(prefix: np.ndarray, depth: int) -> None:
        if depth == p:
            key = tuple(int(c) for c in counts)
            if key in terms:
                terms[key] += prefix
            else:
                terms[key] = prefix.copy()
            return
        for l in range(d):
            counts[l] += 1
            descend(prefix @ dense_terms[l], depth + 1)
            counts[l] -= 1

    descend(np.eye(n), 0)
    alphas = family.eval_coeffs(mu)
    total = np.zeros((n, n))
    for key, term in terms.items():
        total += monomial(alphas, np.asarray(key, dtype=np.int64)) * term
    return PowerExpansion(total, terms)


def power_interp_check(model, family: AffineFamily, mu, p: int) -> np.ndarray:
    """Matrix power reconstructed from weights: sum_l lambda_l(mu) A_{mu_l}^p."""
    if p < 0:
        raise ValueError("p must be >= 0")
    if p > model.m:
        raise ValueError(f"p = {p} exceeds the model's weight bound m = {model.m}")
    if family.n > DENSE_LIMIT:
        raise ValueError(f"dense validator limited to n <= {DENSE_LIMIT}")
    weights = model.lambda_weights(mu)
    total = np.zeros((family.n, family.n))
    for lam, mu_l in zip(weights, model.selected_mu_):
        total += lam * np.linalg.matrix_power(family.assemble(mu_l).toarray(), p)
    return total

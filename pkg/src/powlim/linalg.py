"""Shared linear-algebra kernels: factorized solves, log-dets, norm bounds."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

DENSE_LIMIT = 2000


class NumericalError(RuntimeError):
    """A factorization or solve failed on valid-looking input."""


def _as_csc(a):
    if sparse.issparse(a):
        return a.tocsc()
    return sparse.csc_matrix(np.asarray(a, dtype=float))


def sparse_solve(a, b: np.ndarray, context: str = "matrix") -> np.ndarray:
    """Direct sparse LU solve a x = b."""
    try:
        return sparse_linalg.splu(_as_csc(a)).solve(np.asarray(b, dtype=float))
    except RuntimeError as exc:
        raise NumericalError(f"sparse factorization failed for {context}: {exc}") from exc


def dense_inverse(a, limit: int = DENSE_LIMIT, context: str = "matrix") -> np.ndarray:
    """Dense inverse via LU, guarded by a size limit."""
    n = a.shape[0]
    if n > limit:
        raise ValueError(f"{context}: size {n} exceeds the dense limit {limit}")
    dense = a.toarray() if sparse.issparse(a) else np.asarray(a, dtype=float)
    try:
        return np.linalg.inv(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular {context}") from exc


def spd_logdet(a, limit: int = DENSE_LIMIT, context: str = "matrix") -> float:
    """log det of an SPD matrix as twice the log-diagonal sum of its Cholesky factor."""
    n = a.shape[0]
    if n > limit:
        raise ValueError(f"{context}: size {n} exceeds the dense limit {limit}")
    dense = a.toarray() if sparse.issparse(a) else np.asarray(a, dtype=float)
    try:
        chol = np.linalg.cholesky(dense)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{context} is not SPD (Cholesky failed)") from exc
    return float(2.0 * np.sum(np.log(np.diag(chol))))


def spectral_norm(a, max_iter: int = 200, tol: float = 1e-10, seed: int = 0) -> float:
    """2-norm estimate by power iteration on a^T a.

    Deterministic for a fixed seed; stops after max_iter steps or when the
    estimate's relative change drops below tol.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = a @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v_next = a.T @ w
        norm_next = np.linalg.norm(v_next)
        if norm_next == 0.0:
            return float(norm_w)
        v = v_next / norm_next
        previous, estimate = estimate, norm_w
        if previous > 0 and abs(estimate - previous) <= tol * estimate:
            break
    return float(estimate)


def gershgorin_upper(family, n_probe: int = 100, seed: int = 0, margin: float = 1.01) -> float:
    """Upper bound on the spectral radius of A(mu) over the whole box.

    Bounds max row sums of |A(mu)| by sum_l sup|alpha_l| rowsum(|A_l|), with
    sup|alpha_l| estimated over box corners (r <= 12) plus a seeded uniform
    probe, then inflated by `margin`. The triangle inequality makes this a
    true Gershgorin bound at every probed coefficient value and monotone in
    the coefficient magnitudes.
    """
    box = family.box
    probes = [box.uniform(n_probe, seed)]
    if box.r <= 12:
        mesh = np.meshgrid(*[(lo, hi) for lo, hi in zip(box.lows, box.highs)], indexing="ij")
        probes.append(np.stack([m.ravel() for m in mesh], axis=-1))
    alphas = family.eval_coeffs(np.concatenate(probes, axis=0))
    alpha_sup = np.abs(alphas).max(axis=0)
    row_sums = np.stack([np.asarray(abs(a).sum(axis=1)).ravel() for a in family.terms])
    bound = float((alpha_sup @ row_sums).max())
    if bound <= 0.0:
        raise NumericalError("degenerate family: Gershgorin bound is zero")
    return margin * bound

"""Comparison methods: Frobenius-norm inverse fitting, Galerkin projection
on a POD basis, and a kernel-ridge meta-model on POD coefficients.

The first two are intrusive (they touch the family terms at evaluation
time); the meta-model only consumes snapshots, like the main method. All
three consume a fixed set of high-fidelity solves so budget comparisons
against the interpolation surrogate are snapshot-for-snapshot fair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_parameter_batch, as_vector
from .family import AffineFamily
from .linalg import DENSE_LIMIT, NumericalError, dense_inverse, sparse_solve
from .sampling import SampleSet, maximin_lhs  # noqa: F401  (re-export: DOE entry point)

# relative Tikhonov shift applied when the normal system is singular
_SHIFT_SCALE = 1e-12


def _distinct_rows(points: np.ndarray, name: str) -> None:
    if len(np.unique(points, axis=0)) != len(points):
        raise ValueError(f"{name} must be distinct")


class FrobeniusMin(BaseEstimator):
    """Best approximation of A_mu^{-1} in the span of snapshot inverses.

    Weights minimize ||I - (sum_i w_i A_{mu_i}^{-1}) A_mu||_F, found by
    solving the normal equations M(mu) w = S(mu) whose entries are
    assembled from precomputed trace tensors

        trace4[i, j, l, m] = trace(A_l^T A_{mu_i}^{-T} A_{mu_j}^{-1} A_m)
        trace2[i, l]       = trace(A_{mu_i}^{-1} A_l)

    so no matrix work happens per evaluation. Applies to quantity "solve"
    (returns P(mu) b) and "inverse" (returns P(mu)).

    Parameters
    ----------
    selected_mu : ndarray (n_snap, r)
        Anchor parameters whose inverses span the approximation.
    quantity : {"solve", "inverse"}
    rhs : ndarray or None
        Right-hand side, required for quantity="solve".
    dense_limit : int
        Guard on the matrix order (inverses are materialized densely).
    """

    def __init__(self, selected_mu=None, quantity: str = "solve", rhs=None,
                 dense_limit: int = DENSE_LIMIT):
        self.selected_mu = selected_mu
        self.quantity = quantity
        self.rhs = rhs
        self.dense_limit = dense_limit

    def fit(self, family: AffineFamily, y=None) -> "FrobeniusMin":
        del y
        if self.quantity not in ("solve", "inverse"):
            raise ValueError(f"quantity must be 'solve' or 'inverse', got {self.quantity!r}")
        anchors, _ = as_parameter_batch(self.selected_mu, family.r)
        _distinct_rows(anchors, "selected_mu")
        n = family.n
        if n > self.dense_limit:
            raise ValueError(f"needs n <= dense_limit = {self.dense_limit}, got {n}")
        if self.quantity == "solve":
            rhs = as_vector(self.rhs, n, "rhs")

        n_snap, d = len(anchors), family.d
        inverses = np.empty((n_snap, n, n))
        for i, mu_i in enumerate(anchors):
            inverses[i] = dense_inverse(
                family.assemble(mu_i), limit=self.dense_limit,
                context=f"anchor {i} at mu={mu_i.tolist()}",
            )
        dense_terms = [t.toarray() for t in family.terms]
        # rows of Z are vec(A_{mu_i}^{-1} A_l); the Gram matrix of Z holds
        # every 4-factor trace at once
        z = np.empty((n_snap * d, n * n))
        trace2 = np.empty((n_snap, d))
        for i in range(n_snap):
            for l in range(d):
                product = inverses[i] @ dense_terms[l]
                z[i * d + l] = product.ravel()
                trace2[i, l] = np.trace(product)
        gram = z @ z.T
        self.trace4_ = gram.reshape(n_snap, d, n_snap, d).transpose(0, 2, 1, 3).copy()
        self.trace2_ = trace2
        self.inverses_ = inverses
        self.anchors_ = anchors
        self.r_ = family.r
        self.coeffs_ = list(family.coeffs)
        if self.quantity == "solve":
            self.payload_ = inverses @ rhs
        else:
            self.payload_ = inverses
        return self

    def _alphas(self, mu_batch: np.ndarray) -> np.ndarray:
        return np.stack([np.atleast_1d(c(mu_batch)) for c in self.coeffs_], axis=-1)

    def lambda_weights(self, mu) -> np.ndarray:
        """Minimizing weights at mu; (n_snap,) for one vector, else (q, n_snap)."""
        check_is_fitted(self, "trace4_")
        mu_batch, single = as_parameter_batch(mu, self.r_)
        alphas = self._alphas(mu_batch)
        out = np.empty((len(mu_batch), len(self.anchors_)))
        for t, alpha in enumerate(alphas):
            matrix = np.einsum("ijlm,l,m->ij", self.trace4_, alpha, alpha)
            target = self.trace2_ @ alpha
            out[t] = self._solve_normal(matrix, target)
        return out[0] if single else out

    @staticmethod
    def _solve_normal(matrix: np.ndarray, target: np.ndarray) -> np.ndarray:
        try:
            weights = np.linalg.solve(matrix, target)
            if np.all(np.isfinite(weights)):
                return weights
        except np.linalg.LinAlgError:
            pass
        shift = _SHIFT_SCALE * np.trace(matrix) / len(matrix)
        try:
            weights = np.linalg.solve(matrix + shift * np.eye(len(matrix)), target)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("normal system unsolvable even after Tikhonov shift") from exc
        if not np.all(np.isfinite(weights)):
            raise NumericalError("normal system produced non-finite weights")
        return weights

    def predict(self, mu):
        """P(mu) b for quantity 'solve', the dense P(mu) for 'inverse'."""
        check_is_fitted(self, "payload_")
        mu_batch, single = as_parameter_batch(mu, self.r_)
        weights = np.atleast_2d(self.lambda_weights(mu_batch))
        values = np.tensordot(weights, self.payload_, axes=(1, 0))
        return values[0] if single else values

    def objective(self, family: AffineFamily, mu, weights=None) -> float:
        """||I - P(mu) A_mu||_F for the given (default: minimizing) weights."""
        check_is_fitted(self, "inverses_")
        if weights is None:
            weights = self.lambda_weights(mu)
        approx_inv = np.tensordot(np.asarray(weights, dtype=np.float64), self.inverses_, axes=(0, 0))
        matrix = family.assemble(mu).toarray()
        n = matrix.shape[0]
        return float(np.linalg.norm(np.eye(n) - approx_inv @ matrix))


@dataclass(frozen=True)
class PodBasis:
    """Orthonormal basis rows with the full singular-value ladder."""

    vectors: np.ndarray  # (n_modes, n) orthonormal rows
    singular_values: np.ndarray  # full descending list from the SVD
    energy_tol: float

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if np.any(np.diff(self.singular_values) > 0):
            raise ValueError("singular values must be nonincreasing")

    @property
    def n_modes(self) -> int:
        return self.vectors.shape[0]


def pod_build(snapshots, energy_tol: float = 1e-10) -> PodBasis:
    """Orthonormal basis keeping the smallest mode count whose retained
    squared singular values reach (1 - energy_tol) of the total."""
    matrix = np.column_stack([np.asarray(s, dtype=np.float64) for s in snapshots])
    if matrix.size == 0:
        raise ValueError("snapshots must be nonempty")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("snapshots must be finite")
    u, sigma, _ = np.linalg.svd(matrix, full_matrices=False)
    energy = sigma**2
    total = energy.sum()
    if total == 0.0:
        raise NumericalError("zero snapshot matrix has no basis")
    cumulative = np.cumsum(energy)
    n_modes = int(np.searchsorted(cumulative, (1.0 - energy_tol) * total, side="left")) + 1
    n_modes = min(n_modes, len(sigma))
    return PodBasis(u[:, :n_modes].T.copy(), sigma, float(energy_tol))


def pod_reduced_terms(family: AffineFamily, basis: PodBasis) -> list[np.ndarray]:
    """Projected family terms V A_l V^T, one (n_modes, n_modes) block each."""
    v = basis.vectors
    return [v @ (term @ v.T) for term in family.terms]


def pod_solve(family: AffineFamily, basis: PodBasis, rhs, mu,
              reduced_terms: list[np.ndarray] | None = None) -> np.ndarray:
    """Galerkin solution in the basis span, lifted back to full length."""
    rhs_vec = as_vector(rhs, family.n, "rhs")
    if reduced_terms is None:
        reduced_terms = pod_reduced_terms(family, basis)
    alphas = family.eval_coeffs(mu)
    reduced = np.zeros((basis.n_modes, basis.n_modes))
    for alpha, term in zip(alphas, reduced_terms):
        reduced += alpha * term
    try:
        coeffs = np.linalg.solve(reduced, basis.vectors @ rhs_vec)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular reduced system at mu={np.asarray(mu).tolist()}") from exc
    return basis.vectors.T @ coeffs


class PodGalerkin(BaseEstimator):
    """Reduced solver: project the affine system onto a POD basis of
    snapshot solutions, solve small, lift back.

    Parameters
    ----------
    selected_mu : ndarray (n_snap, r)
        Parameters whose solutions feed the basis.
    rhs : ndarray
        Right-hand side (fixed across the family).
    energy_tol : float
        Discarded fraction of squared singular-value energy.
    """

    def __init__(self, selected_mu=None, rhs=None, energy_tol: float = 1e-10):
        self.selected_mu = selected_mu
        self.rhs = rhs
        self.energy_tol = energy_tol

    def fit(self, family: AffineFamily, y=None) -> "PodGalerkin":
        del y
        anchors, _ = as_parameter_batch(self.selected_mu, family.r)
        _distinct_rows(anchors, "selected_mu")
        rhs = as_vector(self.rhs, family.n, "rhs")
        snapshots = [
            sparse_solve(family.assemble(mu_i), rhs, context=f"snapshot {i} at mu={mu_i.tolist()}")
            for i, mu_i in enumerate(anchors)
        ]
        self.basis_ = pod_build(snapshots, self.energy_tol)
        self.reduced_terms_ = pod_reduced_terms(family, self.basis_)
        self.reduced_rhs_ = self.basis_.vectors @ rhs
        self.coeffs_ = list(family.coeffs)
        self.r_ = family.r
        self.snapshots_ = np.array(snapshots)
        return self

    def predict(self, mu):
        check_is_fitted(self, "basis_")
        mu_batch, single = as_parameter_batch(mu, self.r_)
        alphas = np.stack([np.atleast_1d(c(mu_batch)) for c in self.coeffs_], axis=-1)
        out = np.empty((len(mu_batch), self.basis_.vectors.shape[1]))
        for t, alpha in enumerate(alphas):
            reduced = np.zeros((self.basis_.n_modes, self.basis_.n_modes))
            for a, term in zip(alpha, self.reduced_terms_):
                reduced += a * term
            try:
                coeffs = np.linalg.solve(reduced, self.reduced_rhs_)
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"singular reduced system at mu={mu_batch[t].tolist()}"
                ) from exc
            out[t] = self.basis_.vectors.T @ coeffs
        return out[0] if single else out


@dataclass(frozen=True)
class RidgeModel:
    """Gaussian-kernel ridge weights on normalized inputs."""

    bandwidth: float
    reg: float
    inputs: np.ndarray  # (n, r) normalized to the unit box
    weights: np.ndarray  # (n, n_outputs)


def _gaussian_kernel(x: np.ndarray, y: np.ndarray, bandwidth: float) -> np.ndarray:
    return np.exp(-cdist(x, y, "sqeuclidean") / (2.0 * bandwidth**2))


def ridge_fit(inputs, targets, bandwidth: float = 0.2, reg: float = 1e-8) -> RidgeModel:
    """Fit (K + reg I) W = targets with a Gaussian kernel on unit-box inputs."""
    x = np.asarray(inputs, dtype=np.float64)
    y = np.atleast_2d(np.asarray(targets, dtype=np.float64).T).T
    if len(x) < 2:
        raise ValueError("kernel ridge needs at least 2 training points")
    if len(x) != len(y):
        raise ValueError(f"{len(x)} inputs vs {len(y)} target rows")
    if bandwidth <= 0 or reg < 0:
        raise ValueError("need bandwidth > 0 and reg >= 0")
    kernel = _gaussian_kernel(x, x, bandwidth)
    if not np.all(np.isfinite(kernel)):
        raise NumericalError("non-finite kernel matrix")
    weights = np.linalg.solve(kernel + reg * np.eye(len(x)), y)
    if not np.all(np.isfinite(weights)):
        raise NumericalError("non-finite ridge weights")
    return RidgeModel(float(bandwidth), float(reg), x.copy(), weights)


def ridge_predict(model: RidgeModel, inputs) -> np.ndarray:
    """Predicted target rows for normalized inputs (q, r) or (r,)."""
    x = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    kernel = _gaussian_kernel(x, model.inputs, model.bandwidth)
    values = kernel @ model.weights
    return values[0] if np.asarray(inputs).ndim == 1 else values


class PodKernelRidge(BaseEstimator):
    """Nonintrusive meta-model: regress POD coefficients on parameters.

    Snapshots at a design of experiments give a POD basis; each retained
    coefficient gets a Gaussian-kernel ridge regressor over box-normalized
    parameters. Evaluation never touches the family matrices.

    Parameters
    ----------
    doe : SampleSet or ndarray (n, r)
        Training design; use maximin_lhs for a space-filling one.
    rhs : ndarray
        Right-hand side (fixed across the family).
    energy_tol : float
        POD truncation as in PodGalerkin.
    bandwidth, reg : float
        Kernel width on the unit box and ridge regularization.
    """

    def __init__(self, doe=None, rhs=None, energy_tol: float = 1e-10,
                 bandwidth: float = 0.2, reg: float = 1e-8):
        self.doe = doe
        self.rhs = rhs
        self.energy_tol = energy_tol
        self.bandwidth = bandwidth
        self.reg = reg

    def fit(self, family: AffineFamily, y=None) -> "PodKernelRidge":
        del y
        points = self.doe.points if isinstance(self.doe, SampleSet) else self.doe
        anchors, _ = as_parameter_batch(points, family.r)
        _distinct_rows(anchors, "doe")
        rhs = as_vector(self.rhs, family.n, "rhs")
        snapshots = [
            sparse_solve(family.assemble(mu_i), rhs, context=f"snapshot {i} at mu={mu_i.tolist()}")
            for i, mu_i in enumerate(anchors)
        ]
        self.basis_ = pod_build(snapshots, self.energy_tol)
        coefficients = np.stack([self.basis_.vectors @ s for s in snapshots])
        self.box_ = family.box
        self.r_ = family.r
        self.ridge_ = ridge_fit(
            family.box.normalize(anchors), coefficients, self.bandwidth, self.reg
        )
        return self

    def predict(self, mu):
        check_is_fitted(self, "ridge_")
        mu_batch, single = as_parameter_batch(mu, self.r_)
        coefficients = ridge_predict(self.ridge_, self.box_.normalize(mu_batch))
        values = coefficients @ self.basis_.vectors
        return values[0] if single else values

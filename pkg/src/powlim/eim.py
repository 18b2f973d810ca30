"""Empirical interpolation of coefficient monomials over a parameter box.

The offline stage runs a greedy loop on the function

    g(k, mu) = prod_l alpha_l(mu)^{k_l},   k in K(m, d),  mu in a finite sample,

selecting interpolation multi-indices k_l and snapshot parameters mu_l one
pair per step: the parameter whose current residual column is largest in the
max norm, then the multi-index realizing that maximum. Each step normalizes
the residual column into a basis vector q and removes its contribution with a
rank-one update, which keeps the interpolation matrix B unit lower
triangular.

The online stage computes combination weights lambda(mu) from the
interpolation conditions

    sum_l lambda_l(mu) g(k_j, mu_l) = g(k_j, mu)   for every selected k_j,

i.e. it solves F lambda = gamma(mu) with F[l, l'] = g(k_l, mu_{l'}) through a
stored, row-equilibrated LU factorization. An independent beta path (solve
B beta = gamma, combine the stored q basis) is kept for cross-checking.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import as_parameter_batch
from .family import AffineFamily, monomial_matrix
from .multi_index import MultiIndexSet, enumerate_multi_indices
from .sampling import SampleSet, build_sample

# below this magnitude a residual cannot be used as a normalizer; the greedy
# stops instead of dividing
_NORMALIZER_FLOOR = 1e-300


class EimInterpolant(BaseEstimator):
    """Greedy interpolant of the coefficient monomials of an affine family.

    Parameters
    ----------
    m : int
        Total-weight bound of the multi-index set K(m, d).
    n_terms : int or None
        Budget cap on the number of greedy steps; None runs to completion
        (all of K(m, d), or earlier stopping by ``tol``).
    tol : float
        Relative stopping tolerance: stop before a step whose max residual is
        at or below tol times the first max residual. 0 disables the test.
    force_k0 : bool
        Pin the zero multi-index as the first selected index. Makes the
        weights sum to one at every parameter (needed for quantities that are
        only affine up to a constant, like log-determinants).
    sample : SampleSet, str or None
        The finite training sample. A SampleSet is used as given; a string
        ("lhs", "maximin", "grid") requests that construction on the family
        box with ``n_sample`` points and ``sample_seed``; None means "lhs".
    n_sample : int
        Size of the constructed training sample.
    sample_seed : int
        Seed for the constructed training sample.

    Attributes
    ----------
    selected_k_ : ndarray (N, d) int
        Selected multi-indices, in selection order.
    selected_mu_ : ndarray (N, r)
        Selected snapshot parameters, in selection order.
    F_ : ndarray (N, N)
        Interpolation system matrix, F[l, l'] = g(k_l, mu_{l'}).
    B_ : ndarray (N, N)
        Unit lower-triangular basis evaluation matrix, B[i, j] = q_j(k_i).
    residual_history_ : ndarray (N,)
        Max residual magnitude before each step; entry 0 is the largest
        magnitude of g itself over the sample.
    q_basis_ : ndarray (Q, N)
        Normalized residual basis vectors on the full index set.
    """

    def __init__(
        self,
        m: int = 3,
        n_terms: int | None = None,
        tol: float = 1e-12,
        force_k0: bool = False,
        sample=None,
        n_sample: int = 100_000,
        sample_seed: int = 0,
    ):
        self.m = m
        self.n_terms = n_terms
        self.tol = tol
        self.force_k0 = force_k0
        self.sample = sample
        self.n_sample = n_sample
        self.sample_seed = sample_seed

    def _resolve_sample(self, family: AffineFamily) -> SampleSet:
        if isinstance(self.sample, SampleSet):
            sample = self.sample
        else:
            kind = self.sample if isinstance(self.sample, str) else "lhs"
            sample = build_sample(family.box, kind, self.n_sample, self.sample_seed)
        sample.check_inside(family.box)
        return sample

    def fit(self, family: AffineFamily, y=None) -> "EimInterpolant":
        """Run the offline greedy stage on the family's coefficients."""
        del y
        if self.m < 1:
            raise ValueError(f"need m >= 1, got {self.m}")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.n_terms is not None and self.n_terms < 1:
            raise ValueError("n_terms must be >= 1 when given")

        sample = self._resolve_sample(family)
        index_set = enumerate_multi_indices(self.m, family.d)
        alphas = family.eval_coeffs(sample.points)
        g_values = monomial_matrix(alphas, index_set.indices)

        budget = len(index_set) if self.n_terms is None else min(self.n_terms, len(index_set))
        residual = -g_values.copy()
        rows: list[int] = []
        cols: list[int] = []
        history: list[float] = []
        q_columns: list[np.ndarray] = []
        taken = set()
        while len(rows) < budget:
            column_max = np.abs(residual).max(axis=0)
            j = int(np.argmax(column_max))
            max_residual = float(column_max[j])
            if history and self.tol > 0 and max_residual <= self.tol * history[0]:
                break
            if max_residual == 0.0:
                break
            if j in taken:
                break  # numerical rank exhaustion: best column already selected

            i = 0 if (self.force_k0 and not rows) else int(np.argmax(np.abs(residual[:, j])))
            normalizer = residual[i, j]
            if abs(normalizer) < _NORMALIZER_FLOOR:
                break
            q = residual[:, j] / normalizer
            residual -= np.outer(q, residual[i, :])
            rows.append(i)
            cols.append(j)
            taken.add(j)
            history.append(max_residual)
            q_columns.append(q)

        n_selected = len(rows)
        self.index_set_: MultiIndexSet = index_set
        self.coeffs_ = list(family.coeffs)
        self.box_ = family.box
        self.d_ = family.d
        self.r_ = family.r
        self.selected_k_ = index_set.indices[rows].copy()
        self.selected_mu_ = sample.points[cols].copy()
        self.alpha_selected_ = alphas[cols].copy()
        self.residual_history_ = np.array(history)
        self.q_basis_ = np.stack(q_columns, axis=1)
        self.F_ = g_values[np.ix_(rows, cols)].copy()
        self.B_ = self.q_basis_[rows, :].copy()
        self.n_selected_ = n_selected
        self._factorize()
        return self

    def _factorize(self) -> None:
        # row equilibration keeps the solve accurate when g magnitudes spread
        scale = np.abs(self.F_).max(axis=1)
        scale[scale == 0.0] = 1.0
        self.row_scale_ = 1.0 / scale
        matrix = self.F_ * self.row_scale_[:, None]
        lu, piv = scipy.linalg.lu_factor(matrix)
        if np.any(np.diag(lu) == 0.0):
            raise np.linalg.LinAlgError("interpolation matrix F is singular")
        self.lu_ = (lu, piv)

    def _gamma(self, mu_batch: np.ndarray) -> np.ndarray:
        """g(k_l, mu) for every selected k_l; shape (N, n_query)."""
        alphas = np.stack([np.atleast_1d(c(mu_batch)) for c in self.coeffs_], axis=-1)
        return monomial_matrix(alphas, self.selected_k_)

    def lambda_weights(self, mu) -> np.ndarray:
        """Combination weights lambda(mu).

        mu of shape (r,) gives a vector of length N; shape (q, r) gives a
        (q, N) array. Solves F lambda = (g(k_l, mu))_l with the stored LU.
        """
        check_is_fitted(self, "F_")
        mu_batch, single = as_parameter_batch(mu, self.r_)
        gamma = self._gamma(mu_batch)
        weights = scipy.linalg.lu_solve(self.lu_, gamma * self.row_scale_[:, None])
        return weights[:, 0] if single else weights.T

    def _q_at(self, k_rows: np.ndarray) -> np.ndarray:
        """Basis values q_j(k) for rows of multi-indices; shape (p, N)."""
        positions = []
        for k in k_rows:
            positions.append(self.index_set_.position(k))
        return self.q_basis_[np.asarray(positions, dtype=np.int64), :]

    def interpolate(self, mu, k=None, route: str = "lambda") -> float | np.ndarray:
        """Interpolated value of g(k, mu).

        k is one multi-index, an array of them, or None for the full index
        set. route "lambda" combines snapshot values with lambda(mu); route
        "beta" solves the triangular B system and combines the stored q
        basis. The two agree up to roundoff and exist to check each other.
        """
        check_is_fitted(self, "F_")
        mu_batch, _ = as_parameter_batch(mu, self.r_)
        if mu_batch.shape[0] != 1:
            raise ValueError("interpolate takes a single parameter vector")
        if k is None:
            k_rows = self.index_set_.indices
            single_k = False
        else:
            k_rows = np.atleast_2d(np.asarray(k, dtype=np.int64))
            single_k = np.asarray(k).ndim == 1
        if k_rows.shape[1] != self.d_:
            raise ValueError(f"multi-index dimension {k_rows.shape[1]} != d = {self.d_}")
        if np.any(k_rows.sum(axis=1) > self.m) or np.any(k_rows < 0):
            raise ValueError(f"multi-indices must be nonnegative with total weight <= m = {self.m}")
        if route == "lambda":
            weights = self.lambda_weights(mu_batch[0])
            snapshot_values = monomial_matrix(self.alpha_selected_, k_rows)  # (p, N)
            values = snapshot_values @ weights
        elif route == "beta":
            gamma = self._gamma(mu_batch)[:, 0]
            beta = scipy.linalg.solve_triangular(self.B_, gamma, lower=True, unit_diagonal=True)
            values = self._q_at(k_rows) @ beta
        else:
            raise ValueError(f"unknown route {route!r}")
        return float(values[0]) if single_k else values

    def g_exact(self, mu, k) -> float | np.ndarray:
        """Exact g(k, mu) for reference, same k conventions as interpolate."""
        check_is_fitted(self, "F_")
        mu_batch, _ = as_parameter_batch(mu, self.r_)
        alphas = np.stack([np.atleast_1d(c(mu_batch)) for c in self.coeffs_], axis=-1)
        k_rows = np.atleast_2d(np.asarray(k, dtype=np.int64))
        values = monomial_matrix(alphas, k_rows)[:, 0]
        return float(values[0]) if np.asarray(k).ndim == 1 else values

    def truncate(self, n: int) -> "EimInterpolant":
        """Fitted interpolant using only the first n greedy selections.

        The greedy is nested, so this equals a fresh fit with n_terms=n on
        the same sample.
        """
        check_is_fitted(self, "F_")
        if not 1 <= n <= self.n_selected_:
            raise ValueError(f"need 1 <= n <= {self.n_selected_}")
        clipped = EimInterpolant(**self.get_params())
        clipped.n_terms = n
        clipped.index_set_ = self.index_set_
        clipped.coeffs_ = self.coeffs_
        clipped.box_ = self.box_
        clipped.d_ = self.d_
        clipped.r_ = self.r_
        clipped.selected_k_ = self.selected_k_[:n].copy()
        clipped.selected_mu_ = self.selected_mu_[:n].copy()
        clipped.alpha_selected_ = self.alpha_selected_[:n].copy()
        clipped.residual_history_ = self.residual_history_[:n].copy()
        clipped.q_basis_ = self.q_basis_[:, :n].copy()
        clipped.F_ = self.F_[:n, :n].copy()
        clipped.B_ = self.B_[:n, :n].copy()
        clipped.n_selected_ = n
        clipped._factorize()
        return clipped

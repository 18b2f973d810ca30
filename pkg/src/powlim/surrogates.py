"""Parametric surrogates built from per-snapshot limit quantities.

Each surrogate stores exact quantities computed once at the interpolant's
selected parameters (solution vectors A_{mu_l}^{-1} b, dense inverses
A_{mu_l}^{-1}, or log-determinants log det A_{mu_l}) and evaluates at a new
mu as the weighted combination sum_l lambda_l(mu) * payload[l] with the
interpolant's weights. Snapshots come from direct factorizations, never from
the iterative schemes the weights are derived from, so the family matrices
are only ever touched through assemble-and-solve.
"""

from __future__ import annotations

import os

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import model_io
from ._validation import as_parameter_batch, as_vector
from .family import AffineFamily
from .linalg import (
    DENSE_LIMIT,
    NumericalError,
    dense_inverse,
    sparse_solve,
    spd_logdet,
)

QUANTITIES = ("solve", "inverse", "logdet")


class Surrogate(BaseEstimator):
    """Combine exact snapshots at selected parameters with lambda weights.

    Parameters
    ----------
    model : EimInterpolant
        A fitted interpolant supplying selected parameters and weights.
    quantity : {"solve", "inverse", "logdet"}
        Which limit quantity to emulate.
    rhs : ndarray or None
        Right-hand side vector; required for quantity="solve".
    dense_limit : int
        Largest matrix order for which dense inverses are materialized.

    Attributes
    ----------
    payload_ : ndarray
        Per-selected-parameter snapshots: (N, n) for solve, (N, n, n) for
        inverse, (N,) for logdet.
    """

    def __init__(self, model=None, quantity: str = "solve", rhs=None,
                 dense_limit: int = DENSE_LIMIT):
        self.model = model
        self.quantity = quantity
        self.rhs = rhs
        self.dense_limit = dense_limit

    def fit(self, family: AffineFamily, y=None) -> "Surrogate":
        """Compute the exact snapshot at every selected parameter."""
        del y
        if self.quantity not in QUANTITIES:
            raise ValueError(f"quantity must be one of {QUANTITIES}, got {self.quantity!r}")
        if self.model is None:
            raise ValueError("fit requires a fitted interpolant in `model`")
        check_is_fitted(self.model, "F_")
        if self.model.d_ != family.d or self.model.r_ != family.r:
            raise ValueError("interpolant and family disagree on d or r")
        if self.quantity == "solve":
            if self.rhs is None:
                raise ValueError("quantity='solve' requires rhs")
            rhs = as_vector(self.rhs, family.n, "rhs")
        if self.quantity == "inverse" and family.n > self.dense_limit:
            raise ValueError(
                f"inverse payload needs n <= dense_limit = {self.dense_limit}, got {family.n}"
            )
        if self.quantity == "logdet":
            if not family.spd:
                raise ValueError("quantity='logdet' requires an SPD family")
            if not self.model.force_k0:
                raise ValueError("quantity='logdet' requires a force_k0 interpolant")

        snapshots = []
        for l, mu_l in enumerate(self.model.selected_mu_):
            context = f"snapshot {l} at mu={np.asarray(mu_l).tolist()}"
            matrix = family.assemble(mu_l)
            if self.quantity == "solve":
                snapshots.append(sparse_solve(matrix, rhs, context=context))
            elif self.quantity == "inverse":
                snapshots.append(dense_inverse(matrix, limit=self.dense_limit, context=context))
            else:
                snapshots.append(spd_logdet(matrix, limit=self.dense_limit, context=context))
        self.payload_ = np.array(snapshots)
        self.n_space_ = family.n
        return self

    def predict(self, mu):
        """Surrogate value(s) at mu: vector, dense matrix, or scalar.

        A single parameter vector returns one quantity; a (q, r) batch
        returns a leading q axis (logdet batches return shape (q,)).
        """
        check_is_fitted(self, "payload_")
        mu_batch, single = as_parameter_batch(mu, self.model.r_)
        weights = self.model.lambda_weights(mu_batch)  # (q, N)
        if self.quantity == "logdet":
            values = weights @ self.payload_
            return float(values[0]) if single else values
        values = np.tensordot(weights, self.payload_, axes=(1, 0))
        return values[0] if single else values

    def save(self, path: str) -> None:
        """Write the model and payload as a canonical surrogate file.

        Solve vectors and logdet scalars are stored inline; inverse stacks go
        to a sidecar binary next to the JSON, referenced by payload_ref.
        """
        check_is_fitted(self, "payload_")
        payload_ref = None
        if self.quantity == "inverse":
            base = os.path.basename(path)
            stem = base[:-5] if base.endswith(".json") else base
            payload_ref = stem + ".payload.bin"
        data = model_io.model_to_dict(self.model, payload_ref=payload_ref)
        data["quantity"] = self.quantity
        data["payload_shape"] = list(self.payload_.shape)
        if payload_ref is None:
            data["payload"] = self.payload_
        else:
            data["payload"] = None
            model_io.write_payload_sidecar(
                os.path.join(os.path.dirname(os.path.abspath(path)), payload_ref),
                self.payload_,
            )
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(model_io.emit_json(data))


def load_surrogate(path: str) -> Surrogate:
    """Read a surrogate file (and sidecar, if any) back into an estimator."""
    data = model_io.parse_model_file(path)
    for key in ("quantity", "payload_shape"):
        if key not in data:
            raise model_io.ModelFormatError(f"{path}: not a surrogate file (missing {key})")
    quantity = data["quantity"]
    if quantity not in QUANTITIES:
        raise model_io.ModelFormatError(f"{path}: unknown quantity {quantity!r}")
    model = model_io.model_from_dict(data)
    shape = tuple(int(v) for v in data["payload_shape"])
    if not shape or shape[0] != model.n_selected_:
        raise model_io.ModelFormatError(
            f"{path}: payload_shape {shape} does not match N = {model.n_selected_}"
        )
    if data["payload_ref"] is not None:
        sidecar = os.path.join(os.path.dirname(os.path.abspath(path)), data["payload_ref"])
        payload = model_io.read_payload_sidecar(sidecar, shape)
    else:
        payload = np.asarray(data["payload"], dtype=np.float64)
        if payload.shape != shape:
            raise model_io.ModelFormatError(
                f"{path}: inline payload shape {payload.shape} != declared {shape}"
            )
    if not np.all(np.isfinite(payload)):
        raise model_io.ModelFormatError(f"{path}: payload must be finite")
    surrogate = Surrogate(model=model, quantity=quantity)
    surrogate.payload_ = payload
    surrogate.n_space_ = shape[1] if len(shape) > 1 else None
    return surrogate


def exact_solve(family: AffineFamily, mu, rhs) -> np.ndarray:
    """Reference solution A_mu^{-1} b by direct sparse factorization."""
    rhs_vec = as_vector(rhs, family.n, "rhs")
    return sparse_solve(family.assemble(mu), rhs_vec, context=f"exact solve at mu={np.asarray(mu).tolist()}")


def exact_inverse(family: AffineFamily, mu, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """Reference dense inverse A_mu^{-1}."""
    return dense_inverse(
        family.assemble(mu), limit=dense_limit,
        context=f"exact inverse at mu={np.asarray(mu).tolist()}",
    )


def exact_logdet(family: AffineFamily, mu, dense_limit: int = DENSE_LIMIT) -> float:
    """Reference log det A_mu via Cholesky; the family must be SPD."""
    if not family.spd:
        raise NumericalError("exact_logdet requires an SPD family")
    return spd_logdet(
        family.assemble(mu), limit=dense_limit,
        context=f"exact logdet at mu={np.asarray(mu).tolist()}",
    )

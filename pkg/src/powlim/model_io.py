"""Canonical on-disk format for fitted interpolants and surrogate payloads.

A model file is a JSON object with keys emitted in a fixed order

    version, d, m, r, forced_k0, coeffs, param_box, selected_k, selected_mu,
    F (row-major), B (row-major), residual_history, payload_ref

and all numbers printed with 17 significant digits, enough to round-trip
IEEE doubles. Surrogate files append quantity/payload keys after the common
block; dense inverse payloads live in a sidecar binary (row-major 64-bit
little-endian floats) named by ``payload_ref``. The emitter is hand-rolled
(not json.dumps) so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Raised when a model file is missing keys or fails shape checks."""


def format_number(x) -> str:
    """Canonical text for one JSON number."""
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    value = float(x)
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite number {value!r}")
    if value == 0.0:
        return "0"  # canonicalize -0.0 so parse/emit round-trips bytewise
    return format(value, ".17g")


def emit_json(obj) -> str:
    """Serialize a tree of dict/list/str/bool/None/number deterministically.

    Dicts keep insertion order; floats get 17 significant digits.
    """
    pieces: list[str] = []
    _emit(obj, pieces)
    pieces.append("\n")
    return "".join(pieces)


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, float, np.integer, np.floating)):
        out.append(format_number(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for idx, (key, value) in enumerate(obj.items()):
            if idx:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _emit(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for idx, value in enumerate(seq):
            if idx:
                out.append(", ")
            _emit(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def model_to_dict(model, payload_ref: str | None = None) -> dict:
    """Ordered common block for a fitted EimInterpolant."""
    from sklearn.utils.validation import check_is_fitted

    check_is_fitted(model, "F_")
    return {
        "version": FORMAT_VERSION,
        "d": int(model.d_),
        "m": int(model.m),
        "r": int(model.r_),
        "forced_k0": bool(model.force_k0),
        "coeffs": [c.text for c in model.coeffs_],
        "param_box": [list(pair) for pair in model.box_.pairs()],
        "selected_k": [[int(v) for v in row] for row in model.selected_k_],
        "selected_mu": [list(map(float, row)) for row in model.selected_mu_],
        "F": [list(map(float, row)) for row in model.F_],
        "B": [list(map(float, row)) for row in model.B_],
        "residual_history": [float(v) for v in model.residual_history_],
        "payload_ref": payload_ref,
    }


_REQUIRED_KEYS = (
    "version", "d", "m", "r", "forced_k0", "coeffs", "param_box",
    "selected_k", "selected_mu", "F", "B", "residual_history", "payload_ref",
)


def parse_model_file(path: str) -> dict:
    """Read and structurally validate a model JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    missing = [key for key in _REQUIRED_KEYS if key not in data]
    if missing:
        raise ModelFormatError(f"{path}: missing keys {missing}")
    if data["version"] != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported version {data['version']!r}")
    return data


def model_from_dict(data: dict):
    """Rebuild a fitted EimInterpolant from a parsed model dict.

    The q basis over the full index set is reconstructed from F and B
    (q(k) = B^T F^{-T} g_vec(k)); on a freshly fitted model the stored basis
    is used instead, so the beta route is sharpest there.
    """
    from .eim import EimInterpolant
    from .expressions import parse_expression
    from .family import ParameterBox, monomial_matrix
    from .multi_index import enumerate_multi_indices

    coeffs = [parse_expression(text) for text in data["coeffs"]]
    box = ParameterBox.from_pairs(data["param_box"])
    selected_k = np.asarray(data["selected_k"], dtype=np.int64)
    selected_mu = np.asarray(data["selected_mu"], dtype=np.float64)
    f_matrix = np.asarray(data["F"], dtype=np.float64)
    b_matrix = np.asarray(data["B"], dtype=np.float64)
    history = np.asarray(data["residual_history"], dtype=np.float64)
    n = selected_k.shape[0]
    d = int(data["d"])
    r = int(data["r"])
    m = int(data["m"])
    if len(coeffs) != d:
        raise ModelFormatError(f"coeffs length {len(coeffs)} != d = {d}")
    if box.r != r:
        raise ModelFormatError(f"param_box dimension {box.r} != r = {r}")
    if selected_k.shape != (n, d) or selected_mu.shape != (n, r):
        raise ModelFormatError("selected_k/selected_mu shapes disagree")
    if f_matrix.shape != (n, n) or b_matrix.shape != (n, n) or history.shape != (n,):
        raise ModelFormatError("F/B/residual_history shapes disagree")
    for arr in (selected_mu, f_matrix, b_matrix, history):
        if not np.all(np.isfinite(arr)):
            raise ModelFormatError("model arrays must be finite")
    if np.any(selected_k < 0) or np.any(selected_k.sum(axis=1) > m):
        raise ModelFormatError("selected_k outside the multi-index set")

    model = EimInterpolant(m=m, n_terms=n, force_k0=bool(data["forced_k0"]))
    model.index_set_ = enumerate_multi_indices(m, d)
    model.coeffs_ = coeffs
    model.box_ = box
    model.d_ = d
    model.r_ = r
    model.selected_k_ = selected_k
    model.selected_mu_ = selected_mu
    model.alpha_selected_ = np.stack(
        [np.atleast_1d(c(selected_mu)) for c in coeffs], axis=-1
    )
    model.residual_history_ = history
    model.F_ = f_matrix
    model.B_ = b_matrix
    model.n_selected_ = n
    model._factorize()
    g_all = monomial_matrix(model.alpha_selected_, model.index_set_.indices)  # (Q, N)
    model.q_basis_ = np.linalg.solve(f_matrix.T, g_all.T).T @ b_matrix
    return model


def save_model(model, path: str) -> None:
    """Write a fitted interpolant to a canonical JSON model file."""
    text = emit_json(model_to_dict(model))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_model(path: str):
    """Read a model file back into a fitted EimInterpolant."""
    return model_from_dict(parse_model_file(path))


def write_payload_sidecar(path: str, matrices: np.ndarray) -> None:
    """Write a (N, p, p) float64 stack as row-major little-endian binary."""
    arr = np.ascontiguousarray(matrices, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(arr.tobytes(order="C"))


def read_payload_sidecar(path: str, shape: tuple[int, ...]) -> np.ndarray:
    """Read a sidecar binary written by write_payload_sidecar."""
    expected = int(np.prod(shape)) * 8
    size = os.path.getsize(path)
    if size != expected:
        raise ModelFormatError(
            f"{path}: payload size {size} bytes, expected {expected} for shape {shape}"
        )
    with open(path, "rb") as fh:
        raw = fh.read()
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)

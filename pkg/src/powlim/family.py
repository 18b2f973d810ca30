"""Affinely parametrized matrix families A(mu) = sum_l alpha_l(mu) A_l.

Terms are square sparse matrices of one shared shape, coefficients are parsed
scalar expressions over the parameter vector, and the parameter domain is a
box. Families are immutable after construction; assembly and coefficient
evaluation are safe to call concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sparse

from .expressions import CoeffExpr, check_on_box, parse_expression


@dataclass(frozen=True)
class ParameterBox:
    """Axis-aligned box of admissible parameter vectors."""

    lows: np.ndarray
    highs: np.ndarray

    def __post_init__(self):
        lows = np.atleast_1d(np.asarray(self.lows, dtype=float))
        highs = np.atleast_1d(np.asarray(self.highs, dtype=float))
        if lows.shape != highs.shape or lows.ndim != 1:
            raise ValueError("box bounds must be two vectors of equal length")
        if not (np.isfinite(lows).all() and np.isfinite(highs).all()):
            raise ValueError("box bounds must be finite")
        if not np.all(lows < highs):
            raise ValueError("each interval needs lo < hi")
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)

    @classmethod
    def from_pairs(cls, pairs) -> "ParameterBox":
        pairs = np.asarray(pairs, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("expected an array of [lo, hi] pairs")
        return cls(lows=pairs[:, 0], highs=pairs[:, 1])

    @property
    def r(self) -> int:
        return self.lows.size

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lows + self.highs)

    def pairs(self) -> list[list[float]]:
        return [[float(lo), float(hi)] for lo, hi in zip(self.lows, self.highs)]

    def contains(self, mu, rtol: float = 1e-12) -> bool:
        mu = np.asarray(mu, dtype=float)
        pad = rtol * (self.highs - self.lows)
        return bool(np.all(mu >= self.lows - pad) and np.all(mu <= self.highs + pad))

    def uniform(self, n: int, seed: int) -> np.ndarray:
        """n points drawn uniformly from the box, seeded."""
        rng = np.random.default_rng(seed)
        return rng.uniform(self.lows, self.highs, size=(n, self.r))

    def map_unit(self, unit_points: np.ndarray) -> np.ndarray:
        """Affinely map points from the unit box into this box."""
        unit_points = np.asarray(unit_points, dtype=float)
        return self.lows + unit_points * (self.highs - self.lows)

    def normalize(self, points: np.ndarray) -> np.ndarray:
        """Inverse of map_unit."""
        points = np.asarray(points, dtype=float)
        return (points - self.lows) / (self.highs - self.lows)


def _check_term(a: sparse.csr_matrix, n: int) -> sparse.csr_matrix:
    a = sparse.csr_matrix(a)
    if a.shape != (n, n):
        raise ValueError(f"term has shape {a.shape}, expected ({n}, {n})")
    a.sum_duplicates()
    a.sort_indices()
    if not np.all(np.isfinite(a.data)):
        raise ValueError("term contains non-finite entries")
    return a


@dataclass(frozen=True)
class AffineFamily:
    """Parametrized family A(mu) = sum_l alpha_l(mu) A_l on a parameter box.

    Attributes
    ----------
    terms : list of csr_matrix
        The d parameter-independent square matrices A_l, one shared shape.
    coeffs : list of CoeffExpr
        The d scalar coefficient functions alpha_l.
    box : ParameterBox
        Admissible parameter vectors.
    symmetric : bool
        Hint that every term is symmetric.
    spd : bool
        Hint that A(mu) is symmetric positive definite on the box; verified
        once by a Cholesky factorization at the box midpoint.
    """

    terms: list
    coeffs: list
    box: ParameterBox
    symmetric: bool = False
    spd: bool = False
    _union: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.terms) == 0 or len(self.terms) != len(self.coeffs):
            raise ValueError("need d >= 1 terms and exactly one coefficient per term")
        n = sparse.csr_matrix(self.terms[0]).shape[0]
        object.__setattr__(self, "terms", [_check_term(a, n) for a in self.terms])
        coeffs = [c if isinstance(c, CoeffExpr) else parse_expression(str(c)) for c in self.coeffs]
        object.__setattr__(self, "coeffs", coeffs)
        for c in coeffs:
            if c.max_param > self.box.r:
                raise ValueError(f"coefficient {c.text!r} references mu{c.max_param}, box has r={self.box.r}")
            check_on_box(c, self.box)
        if self.spd:
            assemble_dense_check = self.assemble(self.box.midpoint).toarray()
            try:
                np.linalg.cholesky(assemble_dense_check)
            except np.linalg.LinAlgError as exc:
                raise ValueError("spd hint set but midpoint assembly is not SPD") from exc

    @property
    def d(self) -> int:
        return len(self.terms)

    @property
    def n(self) -> int:
        return self.terms[0].shape[0]

    @property
    def r(self) -> int:
        return self.box.r

    def eval_coeffs(self, mu) -> np.ndarray:
        """Coefficient vector alpha(mu); shape (d,) or (n, d) for batches."""
        mu = np.asarray(mu, dtype=float)
        single = mu.ndim == 1
        values = np.stack([np.atleast_1d(c(mu)) for c in self.coeffs], axis=-1)
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite coefficient value")
        return values[0] if single else values

    def _union_pattern(self):
        # shared CSR pattern across terms, with slot maps for fast assembly
        if "indptr" not in self._union:
            pattern = sum((a != 0).astype(np.int8) for a in self.terms).tocsr()
            pattern.sort_indices()
            slots = []
            marker = sparse.csr_matrix(
                (np.arange(1, pattern.nnz + 1), pattern.indices, pattern.indptr),
                shape=pattern.shape,
            )
            for a in self.terms:
                coo = a.tocoo()
                if coo.nnz == 0:
                    # terms may be identically zero (e.g. a region with no edges)
                    slots.append((np.zeros(0, dtype=np.intp), np.zeros(0)))
                    continue
                positions = np.asarray(marker[coo.row, coo.col]).ravel() - 1
                order = np.argsort(positions, kind="stable")
                slots.append((positions[order], coo.data[order]))
            self._union["indptr"] = pattern.indptr
            self._union["indices"] = pattern.indices
            self._union["slots"] = slots
        return self._union

    def assemble(self, mu) -> sparse.csr_matrix:
        """Assemble A(mu) on the union sparsity pattern of all terms."""
        alpha = self.eval_coeffs(np.asarray(mu, dtype=float))
        if alpha.ndim != 1:
            raise ValueError("assemble takes a single parameter vector")
        union = self._union_pattern()
        data = np.zeros(union["indices"].size)
        for a_l, (positions, values) in zip(alpha, union["slots"]):
            data[positions] += a_l * values
        return sparse.csr_matrix(
            (data, union["indices"].copy(), union["indptr"].copy()), shape=(self.n, self.n)
        )


def monomial(alpha, exponents) -> float:
    """prod_l alpha_l^{k_l} with the 0^0 = 1 convention."""
    alpha = np.asarray(alpha, dtype=float)
    exponents = np.asarray(exponents)
    if alpha.shape != exponents.shape:
        raise ValueError(f"got {alpha.shape} coefficients and {exponents.shape} exponents")
    value = float(np.prod(alpha**exponents))
    if not np.isfinite(value):
        raise ValueError("non-finite monomial value")
    return value


def monomial_matrix(alphas: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Evaluate all monomials at all coefficient vectors.

    Parameters
    ----------
    alphas : ndarray (n, d)
        Coefficient vectors, one per row.
    exponents : ndarray (Q, d)
        Integer exponent rows.

    Returns
    -------
    ndarray (Q, n)
        Entry (q, j) is prod_l alphas[j, l] ** exponents[q, l].

    Uses per-component power tables, so the cost is O((m + Q) d n) rather
    than Q d n exponentiations.
    """
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    exponents = np.atleast_2d(np.asarray(exponents, dtype=np.int64))
    if alphas.shape[1] != exponents.shape[1]:
        raise ValueError("coefficient and exponent dimensions differ")
    m = int(exponents.max()) if exponents.size else 0
    out = np.ones((exponents.shape[0], alphas.shape[0]))
    for l in range(alphas.shape[1]):
        table = np.vander(alphas[:, l], m + 1, increasing=True).T
        out *= table[exponents[:, l]]
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite monomial value")
    return out


def _read_vector(path: Path) -> np.ndarray:
    data = scipy.io.mmread(str(path))
    if sparse.issparse(data):
        data = data.toarray()
    vector = np.asarray(data, dtype=float).ravel()
    return vector


def load_family(config_path) -> tuple[AffineFamily, np.ndarray | None]:
    """Load a family from a JSON config referencing MatrixMarket term files.

    Config keys: ``terms`` (array of paths), ``coeffs`` (array of expression
    strings), ``param_box`` (array of [lo, hi]), optional ``rhs`` (path) and
    ``spd`` (boolean). Relative paths resolve against the config directory.
    Returns (family, rhs) where rhs is None when the config has none.
    """
    config_path = Path(config_path)
    with open(config_path) as handle:
        config = json.load(handle)
    for key in ("terms", "coeffs", "param_box"):
        if key not in config:
            raise ValueError(f"family config is missing key {key!r}")
    if len(config["terms"]) != len(config["coeffs"]):
        raise ValueError("terms and coeffs must have equal length")
    base = config_path.parent
    terms = [sparse.csr_matrix(scipy.io.mmread(str(base / p))) for p in config["terms"]]
    coeffs = [parse_expression(src) for src in config["coeffs"]]
    box = ParameterBox.from_pairs(config["param_box"])
    family = AffineFamily(
        terms=terms,
        coeffs=coeffs,
        box=box,
        symmetric=all((a != a.T).nnz == 0 for a in terms),
        spd=bool(config.get("spd", False)),
    )
    rhs = None
    if config.get("rhs"):
        rhs = _read_vector(base / config["rhs"])
        if rhs.size != family.n:
            raise ValueError(f"rhs has length {rhs.size}, family has n={family.n}")
    return family, rhs


def save_family(family: AffineFamily, out_dir, rhs: np.ndarray | None = None) -> Path:
    """Write a family (and optional rhs) as MatrixMarket files plus config.

    Returns the path of the written ``family.json``, which load_family reads
    back.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    term_names = []
    for l, a in enumerate(family.terms, start=1):
        name = f"A{l}.mtx"
        scipy.io.mmwrite(str(out_dir / name), a.tocoo())
        term_names.append(name)
    config = {
        "terms": term_names,
        "coeffs": [c.text for c in family.coeffs],
        "param_box": family.box.pairs(),
        "spd": bool(family.spd),
    }
    if rhs is not None:
        scipy.io.mmwrite(str(out_dir / "rhs.mtx"), np.asarray(rhs, dtype=float)[:, None])
        config["rhs"] = "rhs.mtx"
    config_path = out_dir / "family.json"
    with open(config_path, "w") as handle:
        json.dump(config, handle, indent=2)
        handle.write("\n")
    return config_path

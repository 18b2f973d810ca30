"""Convergence experiments: error versus snapshot budget, method by method.

For each entry of ``budgets`` (a weight bound m), the interpolation method
runs its offline stage to completion, which fixes both the budget
Q = |K(m, d)| and the selected snapshot parameters. The comparison methods
then consume the same number of high-fidelity evaluations: Galerkin
projection and Frobenius fitting reuse the selected parameters themselves;
the kernel meta-model gets a space-filling design of equal size. Every
method is scored on one shared random test set against exact oracles, and
the rows land in a deterministic CSV.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import model_io
from .baselines import FrobeniusMin, PodGalerkin, PodKernelRidge
from .eim import EimInterpolant
from .family import AffineFamily
from .linalg import NumericalError
from .problems import PROBLEM_KINDS, generate_problem
from .sampling import build_sample, maximin_lhs
from .surrogates import QUANTITIES, Surrogate, exact_inverse, exact_logdet, exact_solve

logger = logging.getLogger("powlim.bench")

METHODS = ("proposed", "frobenius", "pod", "ridge")
CSV_HEADER = "method,Q,quantity,mean_rel_l2,mean_rel_linf,max_rel_l2,wall_seconds"

# which quantities each method can produce; others get nan sentinel rows
_METHOD_QUANTITIES = {
    "proposed": ("solve", "inverse", "logdet"),
    "frobenius": ("solve", "inverse"),
    "pod": ("solve",),
    "ridge": ("solve",),
}


@dataclass(frozen=True)
class BenchConfig:
    """Everything a convergence run depends on, seeds included."""

    problem_kind: str
    problem_n: int = 20
    problem_seed: int = 0
    methods: tuple = ("proposed",)
    quantity: str = "solve"
    budgets: tuple = (1, 2, 3)
    n_test: int = 100
    test_seed: int = 2024
    sample_kind: str = "lhs"
    sample_n: int = 20_000
    sample_seed: int = 0
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "budgets", tuple(int(b) for b in self.budgets))
        if self.problem_kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.problem_kind!r}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"quantity must be one of {QUANTITIES}, got {self.quantity!r}")
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise ValueError("budgets must be a nonempty list of weight bounds >= 1")
        if self.n_test < 1:
            raise ValueError("n_test must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        problem = data.get("problem", {})
        sample = data.get("sample", {})
        known = {"problem", "methods", "quantity", "budgets", "n_test", "test_seed",
                 "sample", "timing"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(
            problem_kind=problem.get("kind", ""),
            problem_n=int(problem.get("n", 20)),
            problem_seed=int(problem.get("seed", 0)),
            methods=tuple(data.get("methods", ("proposed",))),
            quantity=data.get("quantity", "solve"),
            budgets=tuple(data.get("budgets", (1, 2, 3))),
            n_test=int(data.get("n_test", 100)),
            test_seed=int(data.get("test_seed", 2024)),
            sample_kind=sample.get("kind", "lhs"),
            sample_n=int(sample.get("n", 20_000)),
            sample_seed=int(sample.get("seed", 0)),
            timing=bool(data.get("timing", False)),
        )

    @classmethod
    def from_json(cls, path: str) -> "BenchConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "problem": {"kind": self.problem_kind, "n": self.problem_n, "seed": self.problem_seed},
            "methods": list(self.methods),
            "quantity": self.quantity,
            "budgets": list(self.budgets),
            "n_test": self.n_test,
            "test_seed": self.test_seed,
            "sample": {"kind": self.sample_kind, "n": self.sample_n, "seed": self.sample_seed},
            "timing": self.timing,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class BenchRow:
    method: str
    q: int
    quantity: str
    mean_rel_l2: float
    mean_rel_linf: float
    max_rel_l2: float
    wall_seconds: float


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_csv_text(self) -> str:
        if not self.rows:
            raise ValueError("report has no rows")
        lines = [CSV_HEADER]
        for row in self.rows:
            lines.append(",".join([
                row.method,
                str(row.q),
                row.quantity,
                model_io.format_number(row.mean_rel_l2) if np.isfinite(row.mean_rel_l2) else "nan",
                model_io.format_number(row.mean_rel_linf) if np.isfinite(row.mean_rel_linf) else "nan",
                model_io.format_number(row.max_rel_l2) if np.isfinite(row.max_rel_l2) else "nan",
                model_io.format_number(row.wall_seconds),
            ]))
        return "\n".join(lines) + "\n"


def rel_errors(exact, approx) -> tuple[float, float]:
    """Relative error pair (l2, linf) between two same-shape quantities.

    l2 is the Euclidean/Frobenius-norm ratio ||exact - approx|| / ||exact||;
    linf the max-norm analog. Scalars are treated as 1-vectors.
    """
    exact_arr = np.asarray(exact, dtype=np.float64).ravel()
    approx_arr = np.asarray(approx, dtype=np.float64).ravel()
    if exact_arr.shape != approx_arr.shape:
        raise ValueError(f"shape mismatch {np.shape(exact)} vs {np.shape(approx)}")
    norm_l2 = np.linalg.norm(exact_arr)
    norm_linf = np.abs(exact_arr).max() if exact_arr.size else 0.0
    if norm_l2 == 0.0:
        raise ValueError("exact quantity has zero norm")
    diff = exact_arr - approx_arr
    return float(np.linalg.norm(diff) / norm_l2), float(np.abs(diff).max() / norm_linf)


def _disjoint_test_points(box, n_test: int, seed: int, taken: set) -> np.ndarray:
    """Uniform test points whose rows collide with no training point."""
    offset = 0
    while True:
        points = box.uniform(n_test, seed + offset)
        if all(p.tobytes() not in taken for p in points):
            return points
        offset += 1  # collision: redraw deterministically


def _exact_oracle(quantity: str, family: AffineFamily, rhs, mu):
    if quantity == "solve":
        return exact_solve(family, mu, rhs)
    if quantity == "inverse":
        return exact_inverse(family, mu)
    return exact_logdet(family, mu)


def _build_method(method: str, cfg: BenchConfig, family: AffineFamily, rhs,
                  model: EimInterpolant, doe):
    """Fitted predictor for one (method, budget); predict(mu) -> quantity."""
    if method == "proposed":
        return Surrogate(model=model, quantity=cfg.quantity, rhs=rhs).fit(family)
    if method == "frobenius":
        return FrobeniusMin(selected_mu=model.selected_mu_, quantity=cfg.quantity,
                            rhs=rhs).fit(family)
    if method == "pod":
        return PodGalerkin(selected_mu=model.selected_mu_, rhs=rhs).fit(family)
    return PodKernelRidge(doe=doe, rhs=rhs).fit(family)


def run_convergence(cfg: BenchConfig) -> BenchReport:
    """Run every (budget, method) cell of the experiment grid.

    Method failures and method/quantity mismatches produce nan sentinel rows
    (with a log line) instead of aborting the run, so partial comparisons
    stay usable. Rows come back sorted by (method, Q).
    """
    family, rhs = generate_problem(cfg.problem_kind, cfg.problem_n, cfg.problem_seed)
    if cfg.quantity == "solve" and rhs is None:
        raise ValueError(f"problem {cfg.problem_kind!r} has no right-hand side; cannot bench 'solve'")

    sample = build_sample(family.box, cfg.sample_kind, cfg.sample_n, cfg.sample_seed)
    force_k0 = cfg.quantity == "logdet"
    models: dict[int, EimInterpolant] = {}
    for m in cfg.budgets:
        models[m] = EimInterpolant(m=m, tol=0.0, force_k0=force_k0, sample=sample).fit(family)

    does = {}
    if "ridge" in cfg.methods:
        for m in cfg.budgets:
            does[m] = maximin_lhs(family.r, models[m].n_selected_, cfg.sample_seed,
                                  box=family.box)

    taken = {p.tobytes() for p in sample.points}
    for doe in does.values():
        taken.update(p.tobytes() for p in doe.points)
    test_points = _disjoint_test_points(family.box, cfg.n_test, cfg.test_seed, taken)
    exact = [_exact_oracle(cfg.quantity, family, rhs, mu) for mu in test_points]

    rows: list[BenchRow] = []
    for m in cfg.budgets:
        model = models[m]
        q_budget = model.n_selected_
        for method in cfg.methods:
            if cfg.quantity not in _METHOD_QUANTITIES[method]:
                logger.warning("method %s does not produce quantity %s; nan row",
                               method, cfg.quantity)
                rows.append(BenchRow(method, q_budget, cfg.quantity,
                                     float("nan"), float("nan"), float("nan"), 0.0))
                continue
            start = time.perf_counter()
            try:
                predictor = _build_method(method, cfg, family, rhs, model, does.get(m))
                pairs = [rel_errors(exact[t], predictor.predict(mu))
                         for t, mu in enumerate(test_points)]
            except (NumericalError, np.linalg.LinAlgError, ValueError) as exc:
                logger.warning("method %s failed at budget m=%d: %s", method, m, exc)
                rows.append(BenchRow(method, q_budget, cfg.quantity,
                                     float("nan"), float("nan"), float("nan"), 0.0))
                continue
            wall = time.perf_counter() - start if cfg.timing else 0.0
            l2 = np.array([p[0] for p in pairs])
            linf = np.array([p[1] for p in pairs])
            rows.append(BenchRow(method, q_budget, cfg.quantity,
                                 float(l2.mean()), float(linf.mean()), float(l2.max()),
                                 float(wall)))

    rows.sort(key=lambda row: (row.method, row.q))
    metadata = {
        "config": cfg.to_dict(),
        "config_digest": cfg.digest(),
        "baseline_doe": "eim_selected",
        "ridge_doe": "lhs-maximin",
        "n_space": family.n,
    }
    return BenchReport(rows=rows, metadata=metadata)


def export_csv(report: BenchReport, path: str) -> None:
    """Write the report rows as a deterministic CSV (no metadata lines)."""
    text = report.to_csv_text()  # raises before the file is touched
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)

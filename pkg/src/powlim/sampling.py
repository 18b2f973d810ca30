"""Parameter sampling: stratified (LHS), grid, explicit, and maximin designs.

All randomness is seeded explicitly; identical arguments give identical
designs. LHS designs are built per dimension as one uniform draw inside each
of n strata, then shuffled; the maximin variant generates 64 candidate LHS
designs and keeps the one with the largest minimum pairwise distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .family import ParameterBox

SAMPLE_KINDS = ("grid", "lhs", "explicit")
_MAXIMIN_CANDIDATES = 64


@dataclass(frozen=True)
class SampleSet:
    """An ordered set of parameter points with its provenance.

    points has shape (n, r); kind is one of SAMPLE_KINDS; seed is the
    generator seed (0 for non-random kinds).
    """

    points: np.ndarray
    kind: str
    seed: int = 0

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.kind not in SAMPLE_KINDS:
            raise ValueError(f"kind must be one of {SAMPLE_KINDS}, got {self.kind!r}")
        if points.size == 0:
            raise ValueError("sample set is empty")
        if not np.all(np.isfinite(points)):
            raise ValueError("sample contains non-finite points")
        if np.unique(points, axis=0).shape[0] != points.shape[0]:
            raise ValueError("sample contains exact duplicate points")
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def r(self) -> int:
        return self.points.shape[1]

    def check_inside(self, box: ParameterBox) -> None:
        if self.r != box.r:
            raise ValueError(f"sample dimension {self.r} does not match box r={box.r}")
        if not all(box.contains(p) for p in self.points):
            raise ValueError("sample contains points outside the box")


def _unit_lhs(r: int, n: int, rng: np.random.Generator) -> np.ndarray:
    design = np.empty((n, r))
    for l in range(r):
        strata = (np.arange(n) + rng.uniform(size=n)) / n
        design[:, l] = strata[rng.permutation(n)]
    return design


def lhs_sample(box: ParameterBox, n: int, seed: int) -> SampleSet:
    """Latin hypercube sample of n points inside the box."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    points = box.map_unit(_unit_lhs(box.r, n, rng))
    return SampleSet(points=points, kind="lhs", seed=seed)


def grid_sample(box: ParameterBox, per_dim: int) -> SampleSet:
    """Full tensor grid with per_dim points per dimension (endpoints included)."""
    if per_dim < 2:
        raise ValueError("need per_dim >= 2")
    axes = [np.linspace(lo, hi, per_dim) for lo, hi in zip(box.lows, box.highs)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    return SampleSet(points=points, kind="grid", seed=0)


def explicit_sample(points, box: ParameterBox | None = None) -> SampleSet:
    """Wrap user-provided points; validates against the box when given."""
    sample = SampleSet(points=np.asarray(points, dtype=float), kind="explicit", seed=0)
    if box is not None:
        sample.check_inside(box)
    return sample


def _min_pairwise_distance(points: np.ndarray) -> float:
    if points.shape[0] < 2:
        return np.inf
    if points.shape[0] <= 512:
        diff = points[:, None, :] - points[None, :, :]
        dist = np.sqrt((diff**2).sum(-1))
        dist[np.diag_indices_from(dist)] = np.inf
        return float(dist.min())
    # nearest-neighbor query scales to large designs
    dist, _ = cKDTree(points).query(points, k=2)
    return float(dist[:, 1].min())


def maximin_lhs(r: int, n: int, seed: int, box: ParameterBox | None = None) -> SampleSet:
    """Best-of-64 maximin Latin hypercube design.

    Candidates are seeded LHS designs in the unit box; the one with the
    largest minimum pairwise Euclidean distance wins (first winner on ties,
    so the result is deterministic per seed). When a box is given the winning
    design is mapped into it affinely.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if r < 1:
        raise ValueError("need r >= 1")
    rng = np.random.default_rng(seed)
    best, best_dist = None, -np.inf
    for _ in range(_MAXIMIN_CANDIDATES):
        candidate = _unit_lhs(r, n, rng)
        dist = _min_pairwise_distance(candidate)
        if dist > best_dist:
            best, best_dist = candidate, dist
    points = best if box is None else box.map_unit(best)
    return SampleSet(points=points, kind="lhs", seed=seed)


def build_sample(box: ParameterBox, kind: str, n: int, seed: int) -> SampleSet:
    """Uniform front door used by offline runs and the bench harness."""
    if kind == "lhs":
        return lhs_sample(box, n, seed)
    if kind == "maximin":
        return maximin_lhs(box.r, n, seed, box=box)
    if kind == "grid":
        per_dim = max(2, int(round(n ** (1.0 / box.r))))
        return grid_sample(box, per_dim)
    raise ValueError(f"unknown sample kind {kind!r}")


def save_doe_csv(sample: SampleSet, path) -> None:
    """Write a design as CSV with header mu1,...,muR, one row per point."""
    header = ",".join(f"mu{l}" for l in range(1, sample.r + 1))
    lines = [header]
    for point in sample.points:
        lines.append(",".join(format(v, ".17g") for v in point))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_doe_csv(path) -> SampleSet:
    """Read a design written by save_doe_csv."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty design file")
    header = lines[0].split(",")
    expected = [f"mu{l}" for l in range(1, len(header) + 1)]
    if header != expected:
        raise ValueError(f"{path}: header {header} != expected {expected}")
    points = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    if points.ndim != 2 or points.shape[1] != len(header):
        raise ValueError(f"{path}: ragged or empty point rows")
    return SampleSet(points=points, kind="explicit", seed=0)

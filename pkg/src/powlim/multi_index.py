"""Enumeration and counting of bounded-total-weight multi-indices.

The index set used throughout the package is

    K(m, d) = { k in N^d : k_1 + ... + k_d <= m },

ordered graded lexicographically: first by total weight, then by ascending
lexicographic order within each weight level. The zero index comes first and
the enumeration for a smaller ``max_weight`` is a prefix of the enumeration
for a larger one, which is what makes truncated interpolants nested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

_INT64_MAX = 2**63 - 1


def count_fixed_weight(weight: int, dim: int) -> int:
    """Number of d-dimensional multi-indices with total weight exactly p.

    Stars and bars: C(p + d - 1, d - 1).
    """
    if weight < 0 or dim < 1:
        raise ValueError(f"need weight >= 0 and dim >= 1, got ({weight}, {dim})")
    return comb(weight + dim - 1, dim - 1)


def count_multi_indices(max_weight: int, dim: int) -> int:
    """Cardinality of K(max_weight, dim).

    Computed as the sum over weight levels of exact binomial counts, so the
    arithmetic is exact for any size. Raises OverflowError when the result
    does not fit a 64-bit signed integer, since index arrays downstream are
    int64.
    """
    if max_weight < 0 or dim < 1:
        raise ValueError(f"need max_weight >= 0 and dim >= 1, got ({max_weight}, {dim})")
    total = sum(count_fixed_weight(p, dim) for p in range(max_weight + 1))
    if total > _INT64_MAX:
        raise OverflowError(f"index set size {total} exceeds int64 range")
    return total


def _compositions(total: int, parts: int):
    # ascending lexicographic compositions of `total` into `parts` slots
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


@dataclass(frozen=True)
class MultiIndexSet:
    """Graded-lexicographically ordered multi-index set K(max_weight, dim).

    Attributes
    ----------
    max_weight : int
        Bound m on the total weight.
    dim : int
        Number of components d.
    indices : ndarray of shape (Q, dim), dtype int64
        All indices in graded-lex order; ``indices[0]`` is the zero index.
    """

    max_weight: int
    dim: int
    indices: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.indices[i])

    def __iter__(self):
        for row in self.indices:
            yield tuple(int(v) for v in row)

    def position(self, k) -> int:
        """Position of multi-index ``k`` in the graded-lex enumeration."""
        k = np.asarray(k, dtype=np.int64)
        if k.shape != (self.dim,):
            raise ValueError(f"index has dimension {k.shape}, set has dim {self.dim}")
        hits = np.nonzero((self.indices == k).all(axis=1))[0]
        if hits.size == 0:
            raise KeyError(f"{tuple(k)} not in K({self.max_weight}, {self.dim})")
        return int(hits[0])


def enumerate_multi_indices(max_weight: int, dim: int) -> MultiIndexSet:
    """Enumerate K(max_weight, dim) in graded lexicographic order."""
    count = count_multi_indices(max_weight, dim)
    out = np.empty((count, dim), dtype=np.int64)
    row = 0
    for p in range(max_weight + 1):
        for k in _compositions(p, dim):
            out[row] = k
            row += 1
    out.setflags(write=False)
    return MultiIndexSet(max_weight=max_weight, dim=dim, indices=out)

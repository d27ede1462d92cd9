"""0-dimensional Vietoris-Rips persistence of a finite metric space.

Sweeping the scale parameter over a point cloud merges connected components
exactly at the edge lengths of a minimum spanning tree of the complete
distance graph, so the finite part of the 0-dimensional barcode is the MST
edge-length multiset: N points yield exactly N - 1 finite bars (the one
essential component never dies and is dropped).

Kruskal with union-find is used rather than Prim because sorting all edges
by (length, i, j) gives one global deterministic tie-break order, which
pins down *which* endpoints realize each bar.  Downstream gradient code
differentiates through those endpoints, so reproducibility matters here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import pairwise_distances  # noqa: F401  (re-exported convenience)

# Incremented on every barcode computation; lets callers assert that code
# paths which must not touch persistence (e.g. unregularized training)
# really do not.
_BARCODE_CALLS = 0


def barcode_call_count() -> int:
    return _BARCODE_CALLS


def reset_barcode_call_count() -> None:
    global _BARCODE_CALLS
    _BARCODE_CALLS = 0


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i: int, j: int) -> bool:
        """Merge the sets of i and j; returns False if already joined."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        if self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1
        return True


@dataclass
class Bar:
    """One finite bar: its length and the MST edge endpoints realizing it.

    Births are all 0 in dimension 0, so the length *is* the death scale and
    equals the distance matrix entry for (endpoint_a, endpoint_b) exactly.
    """

    length: float
    endpoint_a: int
    endpoint_b: int


@dataclass
class Barcode:
    """All finite 0-dim bars of a cloud; the endpoint pairs span the points."""

    bars: list[Bar]
    n_points: int

    def __post_init__(self):
        if len(self.bars) != self.n_points - 1:
            raise ValueError(
                f"barcode must hold n_points - 1 bars, got {len(self.bars)} for {self.n_points} points"
            )

    def lengths(self) -> np.ndarray:
        return np.array([b.length for b in self.bars], dtype=np.float64)


def vr_barcode_0d(d: np.ndarray) -> Barcode:
    """Finite 0-dimensional barcode of a distance matrix.

    Sorts all N(N-1)/2 edges ascending by (length, i, j) and runs Kruskal;
    the accepted edge lengths are the bar lengths.  Requires N >= 2.
    """
    global _BARCODE_CALLS
    _BARCODE_CALLS += 1

    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    if n < 2:
        raise ValueError("need at least 2 points for a non-empty barcode")

    iu, ju = np.triu_indices(n, k=1)
    weights = d[iu, ju]
    # lexsort: last key is primary
    order = np.lexsort((ju, iu, weights))

    uf = UnionFind(n)
    bars: list[Bar] = []
    for e in order:
        i, j = int(iu[e]), int(ju[e])
        if uf.union(i, j):
            bars.append(Bar(length=float(d[i, j]), endpoint_a=i, endpoint_b=j))
            if len(bars) == n - 1:
                break
    return Barcode(bars=bars, n_points=n)


def cloud_barcode(cloud) -> Barcode:
    """Barcode of a point cloud under the Euclidean metric."""
    return vr_barcode_0d(pairwise_distances(cloud))

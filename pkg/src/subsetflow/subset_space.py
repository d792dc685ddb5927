"""Finite subsets of R^d with the Hausdorff metric.

A *configuration* is an ordered ``(n, d)`` float array, one row per point.
A :class:`FiniteSubset` is the unordered, deduplicated version of the same
data: rows are stored in lexicographic order so that two equal sets have
bit-identical arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components


class NoCertifiedMatching(ValueError):
    """Raised when two sets are not separated enough to pair up uniquely."""


def as_config(points) -> np.ndarray:
    """Coerce ``points`` to a finite float array of shape ``(n, d)``.

    A flat sequence of numbers is read as ``n`` points on the line.
    """
    arr = np.array(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected an (n, d) array of points, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("need at least one point with at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    return arr


def _lexsorted(arr: np.ndarray) -> np.ndarray:
    order = np.lexsort(arr.T[::-1])
    return arr[order]


class FiniteSubset:
    """An element of H(n): a nonempty finite set of points in R^d.

    Construction from raw points merges exact duplicates only; use
    :func:`canonicalize` with a positive tolerance to merge near-duplicates.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        arr = as_config(points)
        self._points = canonicalize(arr, 0.0)._points

    @classmethod
    def _from_distinct(cls, arr: np.ndarray) -> FiniteSubset:
        obj = cls.__new__(cls)
        arr = _lexsorted(np.asarray(arr, dtype=float))
        arr.setflags(write=False)
        obj._points = arr
        return obj

    @property
    def points(self) -> np.ndarray:
        """Read-only ``(m, d)`` array of the elements, lexicographically sorted."""
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    def __len__(self) -> int:
        return self._points.shape[0]

    def __iter__(self):
        return iter(self._points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSubset):
            return NotImplemented
        return self._points.shape == other._points.shape and bool(
            np.array_equal(self._points, other._points)
        )

    def __hash__(self) -> int:
        return hash((self._points.shape, self._points.tobytes()))

    def __repr__(self) -> str:
        return f"FiniteSubset({self._points.tolist()!r})"

    def tolist(self) -> list[list[float]]:
        return self._points.tolist()


def _as_points(A) -> np.ndarray:
    if isinstance(A, FiniteSubset):
        return A.points
    return as_config(A)


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix of the rows of ``x`` (works on stacked configs)."""
    diff = x[..., None, :, :] - x[..., :, None, :]
    return np.sqrt(np.einsum("...k,...k->...", diff, diff))


def hausdorff_distance(A, B) -> float:
    """Hausdorff distance between two finite point sets.

    Both arguments may be :class:`FiniteSubset` instances or ``(m, d)`` arrays;
    arrays are treated as sets (order and repetition are irrelevant).
    """
    a = _as_points(A)
    b = _as_points(B)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    diff = a[:, None, :] - b[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def separation(x) -> float:
    """Minimum pairwise distance of a configuration; zero on the diagonal."""
    pts = _as_points(x)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("separation needs at least two points")
    dist = pairwise_distances(pts)
    iu = np.triu_indices(n, k=1)
    return float(dist[iu].min())


def is_diagonal(x) -> bool:
    """True when two points of the configuration coincide exactly."""
    pts = _as_points(x)
    if pts.shape[0] < 2:
        return False
    return len(np.unique(pts, axis=0)) < pts.shape[0]


def canonicalize(points, merge_tol: float = 0.0) -> FiniteSubset:
    """Merge points closer than ``merge_tol`` and return the resulting set.

    Points are grouped into connected components of the graph with edges
    ``|p - q| <= merge_tol``; each component is replaced by the centroid of
    the original points it contains. Centroids can land within ``merge_tol``
    of each other, so the merge repeats until every pair is farther apart
    than ``merge_tol``.
    """
    if merge_tol < 0:
        raise ValueError("merge_tol must be nonnegative")
    pts = as_config(points)
    sums = pts.copy()
    counts = np.ones(len(pts))
    while len(sums) > 1:
        centers = sums / counts[:, None]
        adj = pairwise_distances(centers) <= merge_tol
        ncomp, labels = connected_components(adj, directed=False)
        if ncomp == len(sums):
            break
        new_sums = np.zeros((ncomp, pts.shape[1]))
        np.add.at(new_sums, labels, sums)
        counts = np.bincount(labels, weights=counts, minlength=ncomp)
        sums = new_sums
    return FiniteSubset._from_distinct(sums / counts[:, None])


@dataclass(frozen=True)
class Matching:
    """Pairing ``X[i] <-> Y[permutation[i]]`` with every pair within ``bound``."""

    permutation: tuple[int, ...]
    bound: float


def match_labels(X, Y) -> Matching:
    """Pair each point of X with its nearest point of Y.

    Requires ``|X| == |Y|`` and ``separation(X) > 2 * hausdorff_distance(X, Y)``.
    Under that condition every Y-point lies within rho of exactly one X-point,
    so nearest-point assignment is a bijection with all pairs within rho.
    Equality in the separation condition is treated as failure.
    """
    x = _as_points(X)
    y = _as_points(Y)
    if x.shape[0] != y.shape[0]:
        raise NoCertifiedMatching(f"cardinalities differ: {x.shape[0]} vs {y.shape[0]}")
    rho = hausdorff_distance(x, y)
    n = x.shape[0]
    if n >= 2 and not separation(x) > 2.0 * rho:
        raise NoCertifiedMatching(
            f"separation {separation(x):.6g} is not greater than 2*rho = {2 * rho:.6g}"
        )
    diff = x[:, None, :] - y[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    perm = dist.argmin(axis=1)
    if len(set(perm.tolist())) != n:
        raise NoCertifiedMatching("nearest-point assignment is not a bijection")
    bound = float(dist[np.arange(n), perm].max())
    return Matching(tuple(int(p) for p in perm), bound)


def lipschitz_bound(n: int) -> float:
    """Lipschitz constant ``max(n**1.5, 2n - 1)`` of the retraction H(n) -> H(n-1)."""
    if n < 2:
        raise ValueError("lipschitz_bound needs n >= 2")
    return max(n * math.sqrt(n), 2.0 * n - 1.0)

"""Polynomial bases and evaluation-point sets.

Three bases are supported: monomials, orthonormal Chebyshev polynomials
(optionally affinely mapped from [-1, 1] onto another interval) and the
Lagrange basis on a set of anchors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DuplicatePointError(ValueError):
    pass


class ClusterOverlapError(ValueError):
    pass


def chebyshev_orthonormal(k: int, x):
    """O_k(x): O_0 = 1/sqrt(2), O_1 = x, O_{k+1} = 2x O_k - O_{k-1} (with p_0 = 1)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    if k == 0:
        return math.sqrt(0.5) + 0 * x
    prev, cur = 1.0 + 0 * x, x
    for _ in range(k - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def chebyshev_orthonormal_matrix(x, n: int) -> np.ndarray:
    """Rows are points, columns are O_0..O_{n-1} evaluated there."""
    x = np.asarray(x)
    out = np.empty(x.shape + (n,), dtype=np.result_type(x, float))
    if n == 0:
        return out
    out[..., 0] = 1.0
    if n > 1:
        out[..., 1] = x
    for k in range(2, n):
        out[..., k] = 2 * x * out[..., k - 1] - out[..., k - 2]
    out[..., 0] = math.sqrt(0.5)
    return out


def chebyshev_roots(n: int) -> np.ndarray:
    """The n roots cos((2k-1)pi/(2n)) of O_n, ascending and exactly symmetric about 0."""
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(1, n + 1)
    roots = np.sort(np.cos((2 * k - 1) * np.pi / (2 * n)))
    half = n // 2
    roots[n - half:] = -roots[:half][::-1]
    if n % 2:
        roots[half] = 0.0
    return roots


def _check_distinct(values, what="points"):
    vals = list(values)
    if len(set(vals)) != len(vals):
        raise DuplicatePointError(f"{what} must be pairwise distinct")


def lagrange_eval(k: int, x, anchors) -> float:
    """L_k(x) = prod_{j != k} (x - y_j) / (y_k - y_j), with 1-based ``k``."""
    anchors = [float(a) for a in anchors]
    _check_distinct(anchors, "Lagrange anchors")
    if not 1 <= k <= len(anchors):
        raise IndexError(f"k={k} outside 1..{len(anchors)}")
    yk = anchors[k - 1]
    val = 1.0 + 0 * x
    for j, yj in enumerate(anchors):
        if j != k - 1:
            val = val * (x - yj) / (yk - yj)
    return val


def lagrange_matrix(x, anchors) -> np.ndarray:
    x = np.asarray(x)
    anchors = np.asarray(anchors, dtype=float)
    out = np.empty(x.shape + (len(anchors),), dtype=np.result_type(x, float))
    for k in range(len(anchors)):
        out[..., k] = lagrange_eval(k + 1, x, anchors)
    return out


class Basis:
    """A polynomial basis {T_0, T_1, ...}; ``matrix(x, n)[j, k] = T_k(x_j)``."""

    name = "basis"

    def matrix(self, x, n: int) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, k: int, x):
        return self.matrix(x, k + 1)[..., k]


@dataclass(frozen=True)
class Monomial(Basis):
    name = "monomial"

    def matrix(self, x, n):
        return np.asarray(x)[..., None] ** np.arange(n)


@dataclass(frozen=True)
class ChebyshevOrthonormal(Basis):
    """Orthonormal Chebyshev basis on [lo, hi] (affinely mapped from [-1, 1])."""

    lo: float = -1.0
    hi: float = 1.0
    name = "chebyshev"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("need lo < hi")

    def to_unit(self, x):
        return (2 * np.asarray(x) - (self.lo + self.hi)) / (self.hi - self.lo)

    def matrix(self, x, n):
        return chebyshev_orthonormal_matrix(self.to_unit(x), n)


@dataclass(frozen=True)
class Lagrange(Basis):
    anchors: tuple = ()
    name = "lagrange"

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(float(a) for a in self.anchors))
        if not self.anchors:
            raise ValueError("Lagrange basis needs anchors")
        _check_distinct(self.anchors, "Lagrange anchors")

    def matrix(self, x, n):
        if n > len(self.anchors):
            raise ValueError(f"only {len(self.anchors)} Lagrange polynomials exist")
        return lagrange_matrix(x, self.anchors)[..., :n]


@dataclass(frozen=True)
class EvaluationSet:
    """N distinct evaluation points, optionally clustered around anchors.

    ``cluster_map[n]`` is the 0-based anchor index of point n.
    """

    points: np.ndarray
    epsilon: float = 0.0
    cluster_map: tuple | None = None
    anchors: tuple | None = None

    def __post_init__(self):
        pts = np.asarray(self.points)
        pts = pts.astype(np.complex128 if np.iscomplexobj(pts) else np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or len(pts) < 1:
            raise ValueError("need a non-empty 1-D list of points")
        _check_distinct(pts.tolist())
        if self.cluster_map is not None:
            if self.anchors is None or len(self.cluster_map) != len(pts):
                raise ValueError("cluster_map needs anchors and one entry per point")
            for p, k in zip(pts, self.cluster_map):
                # slack for the rounding of y_k + eps*i/n_k
                slack = 4 * np.spacing(abs(self.anchors[k]) + self.epsilon)
                if abs(p - self.anchors[k]) > self.epsilon + slack:
                    raise ValueError(f"point {p} is not {self.epsilon}-close to anchor {self.anchors[k]}")

    def __len__(self):
        return len(self.points)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.points)

    def cluster_sizes(self) -> list[int]:
        if self.cluster_map is None:
            raise ValueError("evaluation set is not clustered")
        return [self.cluster_map.count(k) for k in range(len(self.anchors))]


def make_equal_real_set(n: int, epsilon: float) -> EvaluationSet:
    """Points eps*j/n, j = 1..n."""
    return EvaluationSet(epsilon * np.arange(1, n + 1) / n, epsilon=epsilon)


def make_complex_circle_set(n: int, epsilon: float) -> EvaluationSet:
    """Points eps*exp(2*pi*i*j/n), j = 1..n."""
    return EvaluationSet(epsilon * np.exp(2j * np.pi * np.arange(1, n + 1) / n), epsilon=epsilon)


def make_chebyshev_root_set(n: int) -> EvaluationSet:
    return EvaluationSet(chebyshev_roots(n))


def make_cluster_set(anchors, sizes, epsilon: float) -> EvaluationSet:
    """Clusters z_{k,i} = y_k + eps*i/n_k, i = 1..n_k, around each anchor y_k.

    Anchors must be more than 2*eps apart so every point has a unique anchor.
    """
    anchors = tuple(float(a) for a in anchors)
    sizes = [int(s) for s in sizes]
    if len(anchors) != len(sizes):
        raise ValueError("one cluster size per anchor is required")
    if any(s < 1 for s in sizes):
        raise ValueError("cluster sizes must be positive")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    _check_distinct(anchors, "anchors")
    srt = sorted(anchors)
    gaps = np.diff(srt)
    if len(gaps) and gaps.min() <= 2 * epsilon:
        raise ClusterOverlapError(
            f"anchor spacing {gaps.min():.3g} must exceed 2*epsilon = {2 * epsilon:.3g}")
    points, cmap = [], []
    for k, (y, nk) in enumerate(zip(anchors, sizes)):
        for i in range(1, nk + 1):
            points.append(y + epsilon * i / nk)
            cmap.append(k)
    return EvaluationSet(np.array(points), epsilon=epsilon, cluster_map=tuple(cmap), anchors=anchors)

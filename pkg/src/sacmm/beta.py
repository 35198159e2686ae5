"""Optimal scaling of partial estimates under a uniform completion order.

Binomials are exact integers (``math.comb``) and the hit probabilities are
formed as exact fractions before conversion, so the differences of large
binomials never cancel in floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .matrix_core import PartitionedJob, frobenius_norm_sq, trace_product
from .schemes import LayerSac


class DegenerateBetaError(ZeroDivisionError):
    """The optimal-beta denominator vanishes."""


def binom(a: int, b: int) -> int:
    """C(a, b) with C(a, b) = 0 for b < 0 or b > a (and for a < 0)."""
    if b < 0 or a < 0 or b > a:
        return 0
    return comb(a, b)


@dataclass(frozen=True)
class GroupMoments:
    """M1 = sum_i ||A_i B_i||^2 and M2 = sum_{i<j} <A_i B_i, A_j B_j>."""

    m1: float
    m2: float
    k: int
    m_l: int


@dataclass(frozen=True)
class LayerMoments:
    m_i: tuple
    m_ij: np.ndarray  # strictly upper triangle is used
    n_sizes: tuple
    n_total: int
    m: int

    def __post_init__(self):
        if sum(self.n_sizes) != self.n_total:
            raise ValueError("cluster sizes must sum to N")
        if not 0 <= self.m <= self.n_total:
            raise ValueError("need 0 <= m <= N")


def beta_group_optimal(g: GroupMoments) -> float:
    """(M1 + 2 M2) / (M1 + 2 (m_l - 1)/(K - 1) M2)."""
    if g.k < 2 or not 1 <= g.m_l <= g.k:
        raise ValueError("need K >= 2 and 1 <= m_l <= K")
    den = g.m1 + 2 * (g.m_l - 1) / (g.k - 1) * g.m2
    if den == 0:
        raise DegenerateBetaError("M1 + 2 (m_l-1)/(K-1) M2 = 0")
    return (g.m1 + 2 * g.m2) / den


def gamma_single_exact(n_total: int, m: int, n_i: int) -> Fraction:
    if not 0 <= m <= n_total or not 0 <= n_i <= n_total:
        raise ValueError("need 0 <= m, n_i <= N")
    total = binom(n_total, m)
    return Fraction(total - binom(n_total - n_i, m), total)


def gamma_pair_exact(n_total: int, m: int, n_i: int, n_j: int) -> Fraction:
    if n_i + n_j > n_total or not 0 <= m <= n_total:
        raise ValueError("need n_i + n_j <= N and 0 <= m <= N")
    total = binom(n_total, m)
    hit = (total - binom(n_total - n_i, m) - binom(n_total - n_j, m)
           + binom(n_total - n_i - n_j, m))
    return Fraction(hit, total)


def gamma_single(n_total: int, m: int, n_i: int) -> float:
    """P(a cluster of n_i workers has a completion among the m fastest)."""
    return float(gamma_single_exact(n_total, m, n_i))


def gamma_pair(n_total: int, m: int, n_i: int, n_j: int) -> float:
    """P(two disjoint clusters both have a completion among the m fastest)."""
    return float(gamma_pair_exact(n_total, m, n_i, n_j))


def beta_layer_optimal(lm: LayerMoments) -> float:
    k = len(lm.m_i)
    g = [gamma_single(lm.n_total, lm.m, n) for n in lm.n_sizes]
    diag = sum(lm.m_i[i] * g[i] for i in range(k))
    num, cross = diag, 0.0
    for i in range(k):
        for j in range(i + 1, k):
            mij = lm.m_ij[i][j]
            num += mij * (g[i] + g[j])
            cross += mij * gamma_pair(lm.n_total, lm.m, lm.n_sizes[i], lm.n_sizes[j])
    den = diag + 2 * cross
    if den == 0:
        raise DegenerateBetaError("layer-wise beta denominator is zero")
    return num / den


def beta_case_correlated(n_total: int, k: int, m: int) -> float:
    """(gamma_i + gamma_j) / (2 gamma_ij) for K equal clusters of N/K workers.

    This is the limit of the layer-wise optimum when the cross moments dominate.
    Written with binomials: (C(N,m) - C(N-n,m)) / (C(N,m) - 2C(N-n,m) + C(N-2n,m)).
    """
    if k < 1 or n_total % k:
        raise ValueError(f"K={k} must divide N={n_total}")
    if not 0 <= m <= n_total:
        raise ValueError("need 0 <= m <= N")
    n = n_total // k
    g = gamma_single_exact(n_total, m, n)
    gij = gamma_pair_exact(n_total, m, n, n) if 2 * n <= n_total else g
    if gij == 0:
        raise DegenerateBetaError(f"no two clusters can both be hit with m={m}")
    return float(g / gij)


def beta_equal_moments(n_total: int, k: int, m: int) -> float:
    """Layer-wise optimum with every M_i and M_ij equal (fully correlated products).

    K gamma / (gamma + (K-1) gamma_ij); finite even at m = 1 where
    :func:`beta_case_correlated` is undefined.
    """
    if k < 1 or n_total % k:
        raise ValueError(f"K={k} must divide N={n_total}")
    n = n_total // k
    g = gamma_single_exact(n_total, m, n)
    gij = gamma_pair_exact(n_total, m, n, n) if k > 1 else Fraction(0)
    den = g + (k - 1) * gij
    if den == 0:
        raise DegenerateBetaError("no cluster can be hit with m=0")
    return float(k * g / den)


def moments_from_job(job: PartitionedJob, m_l: int | None = None) -> GroupMoments:
    prods = job.block_products()
    k = len(prods)
    m1 = sum(frobenius_norm_sq(p) for p in prods)
    m2 = sum(trace_product(prods[i], prods[j]) for i in range(k) for j in range(i + 1, k))
    return GroupMoments(float(m1), float(np.real(m2)), k, k if m_l is None else m_l)


def layer_moments(scheme: LayerSac, job: PartitionedJob, m: int = 0) -> LayerMoments:
    """Exact M~_i, M~_ij from the encoding polynomials evaluated at the anchors."""
    sa, sb = scheme.encode_at(job, np.asarray(scheme.anchors))
    alpha = np.asarray(scheme.weights)
    prods = [alpha[k] * (sa[k] @ sb[k]) for k in range(scheme.k_total)]
    k = len(prods)
    m_i = tuple(frobenius_norm_sq(p) for p in prods)
    m_ij = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            m_ij[i, j] = np.real(trace_product(prods[i], prods[j]))
    sizes = tuple(scheme.cluster_sizes)
    return LayerMoments(m_i, m_ij, sizes, sum(sizes), m)

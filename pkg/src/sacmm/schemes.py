"""Coding schemes: encoders, recovery thresholds and resolution-layer tables.

Every scheme encodes the (possibly shuffled) block pairs of a
:class:`~sacmm.matrix_core.PartitionedJob` as two matrix polynomials

    S_A(x) = sum_k wa_k(x) A_(k),   S_B(x) = sum_k wb_k(x) B_(k)

and hands worker n the pair (S_A(x_n), S_B(x_n)). Coefficient-based
schemes (MatDot family) use monomial weights ``x**e``; point-based schemes
(OrthoMatDot, Lagrange, layer-wise SAC) use a polynomial basis T_{k-1}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .bases import (
    Basis,
    ChebyshevOrthonormal,
    EvaluationSet,
    Lagrange,
    Monomial,
    chebyshev_roots,
    make_chebyshev_root_set,
)
from .matrix_core import PartitionedJob


class SchemeError(ValueError):
    """Invalid scheme parameters, or a job/result set that does not fit the scheme."""


class Layer(NamedTuple):
    index: int
    threshold: int
    group: int | None


@dataclass(frozen=True)
class WorkerTask:
    worker_id: int
    point: complex
    a_encoded: np.ndarray
    b_encoded: np.ndarray


@dataclass(frozen=True)
class WorkerResult:
    worker_id: int
    point: complex
    product: np.ndarray


@dataclass(frozen=True)
class CodingScheme:
    k_total: int
    eval_set: EvaluationSet
    shuffle: bool = False

    variant = "scheme"

    def __post_init__(self):
        if self.k_total < 1:
            raise SchemeError("K must be positive")
        if len(self.eval_set) < self.recovery_threshold():
            raise SchemeError(
                f"N={len(self.eval_set)} workers is below the recovery threshold "
                f"{self.recovery_threshold()} of {self.variant}")

    @property
    def n_workers(self) -> int:
        return len(self.eval_set)

    def recovery_threshold(self) -> int:
        return 2 * self.k_total - 1

    def layer_structure(self) -> list[Layer]:
        return []

    def first_estimate(self) -> int:
        """Smallest number of completed workers that yields any estimate."""
        layers = self.layer_structure()
        return layers[0].threshold if layers else self.recovery_threshold()

    def encoding_weights(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Weights (wa, wb), each of shape (len(x), K), of the ordered blocks."""
        raise NotImplementedError

    def ordered_blocks(self, job: PartitionedJob) -> tuple[list, list]:
        if job.k_parts != self.k_total:
            raise SchemeError(f"job has K={job.k_parts}, scheme expects K={self.k_total}")
        if self.shuffle:
            return job.permuted_a(), job.permuted_b()
        return list(job.a_blocks), list(job.b_blocks)

    def encode_at(self, job: PartitionedJob, x) -> tuple[np.ndarray, np.ndarray]:
        """Stacked S_A(x_j), S_B(x_j) for every point in ``x``."""
        a_blocks, b_blocks = self.ordered_blocks(job)
        wa, wb = self.encoding_weights(np.atleast_1d(x))
        return (np.tensordot(wa, np.stack(a_blocks), axes=(1, 0)),
                np.tensordot(wb, np.stack(b_blocks), axes=(1, 0)))

    def label(self) -> str:
        return self.variant


class MonomialScheme(CodingScheme):
    """MatDot-family scheme: position k of A carries x**a_exponents[k]."""

    decode_basis = Monomial()

    def exponents(self) -> tuple[list[int], list[int]]:
        raise NotImplementedError

    def encoding_weights(self, x):
        ea, eb = self.exponents()
        x = np.asarray(x)[:, None]
        return x ** np.array(ea), x ** np.array(eb)

    def decoding_degree(self) -> int:
        ea, eb = self.exponents()
        return max(ea) + max(eb)

    def target_exponents(self, upto_group: int | None = None) -> list[int]:
        """Exponents whose decoded coefficients are summed into the estimate."""
        raise NotImplementedError

    def partial_size(self, m: int) -> int:
        """m_l: number of block products represented in the layer decodable at m."""
        raise NotImplementedError


@dataclass(frozen=True)
class MatDot(MonomialScheme):
    variant = "matdot"

    def exponents(self):
        k = self.k_total
        return list(range(k)), [k - 1 - j for j in range(k)]

    def target_exponents(self, upto_group=None):
        return [self.k_total - 1]

    def partial_size(self, m):
        return self.k_total


@dataclass(frozen=True)
class EpsApproxMatDot(MatDot):
    """MatDot with a single approximate layer once K workers report."""

    shuffle: bool = True
    variant = "eps_amd"

    def layer_structure(self):
        return [Layer(1, self.k_total, 1)]


@dataclass(frozen=True)
class GroupSac(MonomialScheme):
    """Group-wise successive approximation over groups of sizes K_1..K_D."""

    group_sizes: tuple = ()
    shuffle: bool = True
    variant = "group_sac"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        object.__setattr__(self, "group_sizes", sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise SchemeError("group sizes must be a non-empty list of positive integers")
        if sum(sizes) != self.k_total:
            raise SchemeError(f"group sizes {list(sizes)} must sum to K={self.k_total}")
        super().__post_init__()

    def offset(self, d: int) -> int:
        """g(d): exponent of the first A-coefficient of group d (1-based)."""
        s = self.group_sizes
        if d == 1:
            return 0
        if d == 2:
            return s[0]
        return s[0] + sum(
            sum(2 ** (j - i - 2) * s[i - 1] for i in range(1, j - 1)) + s[j - 2]
            for j in range(3, d + 1))

    def group_threshold(self, d: int) -> int:
        """Approximate threshold of the first layer of group d."""
        return sum(2 ** (d - i) * self.group_sizes[i - 1] for i in range(1, d + 1))

    def exponents(self):
        ea, eb = [], []
        for d, kd in enumerate(self.group_sizes, start=1):
            g = self.offset(d)
            ea += [g + k for k in range(kd)]
            eb += [g + kd - 1 - j for j in range(kd)]
        return ea, eb

    def recovery_threshold(self):
        return self.group_threshold(len(self.group_sizes)) + self.group_sizes[-1] - 1

    def layer_structure(self):
        firsts = [self.group_threshold(d) for d in range(1, len(self.group_sizes) + 1)]
        layers = []
        for idx, r in enumerate(range(firsts[0], self.recovery_threshold()), start=1):
            layers.append(Layer(idx, r, self.active_groups(r)))
        return layers

    def active_groups(self, m: int) -> int:
        """d*: the largest group whose first-layer threshold is <= m (0 if none)."""
        return sum(1 for d in range(1, len(self.group_sizes) + 1) if self.group_threshold(d) <= m)

    def target_exponents(self, upto_group=None):
        upto = len(self.group_sizes) if upto_group is None else upto_group
        return [self.group_threshold(d) - 1 for d in range(1, upto + 1)]

    def partial_size(self, m):
        return sum(self.group_sizes[:self.active_groups(m)])

    def label(self):
        return "group_sac_" + "-".join(str(s) for s in self.group_sizes)


@dataclass(frozen=True)
class PointScheme(CodingScheme):
    """Point-based scheme: S(x) = sum_k X_k T_{k-1}(x); AB = sum_k alpha_k S_A(y_k) S_B(y_k)."""

    basis: Basis = field(default_factory=ChebyshevOrthonormal)
    anchors: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(float(a) for a in self.anchors))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.anchors) != self.k_total or len(self.weights) != self.k_total:
            raise SchemeError("need exactly K anchors and K weights")
        if len(set(self.anchors)) != self.k_total:
            raise SchemeError("anchors must be distinct")
        if not np.all(np.isfinite(self.weights)):
            raise SchemeError("weights must be finite")
        if self.eval_set.is_complex:
            raise SchemeError("point-based schemes use real evaluation points")
        super().__post_init__()

    def encoding_weights(self, x):
        w = self.basis.matrix(np.asarray(x), self.k_total)
        return w, w

    @property
    def decode_basis(self) -> ChebyshevOrthonormal:
        # Chebyshev-Vandermonde decoding on an interval covering points and anchors
        pts = np.concatenate([np.asarray(self.eval_set.points, float), self.anchors])
        lo, hi = float(pts.min()), float(pts.max())
        if isinstance(self.basis, ChebyshevOrthonormal):
            lo, hi = min(lo, self.basis.lo), max(hi, self.basis.hi)
        if hi == lo:
            hi = lo + 1.0
        return ChebyshevOrthonormal(lo, hi)

    def decoding_degree(self) -> int:
        return 2 * self.k_total - 2


@dataclass(frozen=True)
class OrthoMatDot(PointScheme):
    variant = "ortho_matdot"


@dataclass(frozen=True)
class LagrangeCode(PointScheme):
    variant = "lagrange"


@dataclass(frozen=True)
class LayerSac(PointScheme):
    """Layer-wise SAC: evaluation points cluster around the anchors."""

    shuffle: bool = True
    variant = "layer_sac"

    def __post_init__(self):
        es = self.eval_set
        if es.cluster_map is None:
            raise SchemeError("layer-wise SAC needs a clustered evaluation set")
        if len(es.anchors) != self.k_total or not np.allclose(es.anchors, self.anchors):
            raise SchemeError("evaluation clusters must sit on the scheme anchors")
        super().__post_init__()

    def layer_structure(self):
        return [Layer(l, l, None) for l in range(1, 2 * self.k_total - 1)]

    @property
    def cluster_sizes(self) -> list[int]:
        return self.eval_set.cluster_sizes()

    def label(self):
        return f"layer_sac_{self.basis.name}"


def ortho_matdot(k: int, n_workers: int) -> OrthoMatDot:
    """OrthoMatDot with the Chebyshev-root evaluation set of size N."""
    return OrthoMatDot(k, make_chebyshev_root_set(n_workers), basis=ChebyshevOrthonormal(),
                       anchors=tuple(chebyshev_roots(k)), weights=(2.0 / k,) * k)


def lagrange_code(anchors, eval_set: EvaluationSet) -> LagrangeCode:
    k = len(anchors)
    return LagrangeCode(k, eval_set, basis=Lagrange(tuple(anchors)), anchors=tuple(anchors),
                        weights=(1.0,) * k)


def ortho_layer_sac(eval_set: EvaluationSet, shuffle: bool = True) -> LayerSac:
    """Layer-wise SAC over OrthoMatDot: anchors at the K Chebyshev roots, alpha_k = 2/K."""
    k = len(eval_set.anchors)
    return LayerSac(k, eval_set, shuffle=shuffle, basis=ChebyshevOrthonormal(),
                    anchors=tuple(chebyshev_roots(k)), weights=(2.0 / k,) * k)


def lagrange_layer_sac(eval_set: EvaluationSet, shuffle: bool = True) -> LayerSac:
    """Layer-wise SAC over Lagrange codes: anchors y_k, alpha_k = 1."""
    anchors = tuple(eval_set.anchors)
    k = len(anchors)
    return LayerSac(k, eval_set, shuffle=shuffle, basis=Lagrange(anchors),
                    anchors=anchors, weights=(1.0,) * k)


def encode(scheme: CodingScheme, job: PartitionedJob) -> list[WorkerTask]:
    pts = scheme.eval_set.points
    sa, sb = scheme.encode_at(job, pts)
    return [WorkerTask(n + 1, pts[n], sa[n], sb[n]) for n in range(len(pts))]


def worker_compute(task: WorkerTask) -> WorkerResult:
    return WorkerResult(task.worker_id, task.point, task.a_encoded @ task.b_encoded)


def run_workers(scheme: CodingScheme, job: PartitionedJob) -> list[WorkerResult]:
    """Encode and compute every worker task, in worker-id order."""
    return [worker_compute(t) for t in encode(scheme, job)]


def recovery_threshold(scheme: CodingScheme) -> int:
    return scheme.recovery_threshold()


def layer_structure(scheme: CodingScheme) -> list[Layer]:
    return scheme.layer_structure()

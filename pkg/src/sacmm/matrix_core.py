"""Dense matrix helpers: K-way partitioning, seeded shuffles and Frobenius algebra.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype ``float64`` or
``complex128``. Partitioned jobs are immutable; shuffling returns a new job.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class DimensionError(ValueError):
    """Raised when matrix shapes are incompatible or not divisible by K."""


def as_matrix(m) -> np.ndarray:
    """Validate and return ``m`` as a finite 2-D float64/complex128 array."""
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


@dataclass(frozen=True)
class PartitionedJob:
    """The K block pairs (A_k, B_k) of a product AB plus a completion permutation.

    ``permutation[k]`` is the (0-based) index of the block pair placed at
    position k after shuffling, i.e. i_{k+1} in 1-based notation.
    """

    a_blocks: tuple
    b_blocks: tuple
    permutation: tuple = field(default=())

    def __post_init__(self):
        k = len(self.a_blocks)
        if k < 1 or len(self.b_blocks) != k:
            raise DimensionError("need the same positive number of A and B blocks")
        if not self.permutation:
            object.__setattr__(self, "permutation", tuple(range(k)))
        if sorted(self.permutation) != list(range(k)):
            raise ValueError(f"permutation {self.permutation} is not a bijection on {k} items")
        for a in self.a_blocks + self.b_blocks:
            a.setflags(write=False)

    @property
    def k_parts(self) -> int:
        return len(self.a_blocks)

    def permuted_a(self) -> list:
        return [self.a_blocks[i] for i in self.permutation]

    def permuted_b(self) -> list:
        return [self.b_blocks[i] for i in self.permutation]

    def block_products(self) -> np.ndarray:
        """Stacked products A_k B_k in original (unpermuted) block order."""
        return np.stack([a @ b for a, b in zip(self.a_blocks, self.b_blocks)])

    def reassemble(self) -> tuple[np.ndarray, np.ndarray]:
        return np.hstack(self.a_blocks), np.vstack(self.b_blocks)


def partition(a, b, k: int) -> PartitionedJob:
    """Split A column-wise and B row-wise into ``k`` equal bands.

    The result carries the identity permutation.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"inner dimensions differ: {a.shape} x {b.shape}")
    if k < 1 or a.shape[1] % k:
        raise DimensionError(f"inner dimension {a.shape[1]} is not divisible by K={k}")
    w = a.shape[1] // k
    a_blocks = tuple(a[:, j * w:(j + 1) * w].copy() for j in range(k))
    b_blocks = tuple(b[j * w:(j + 1) * w, :].copy() for j in range(k))
    return PartitionedJob(a_blocks, b_blocks)


def make_rng(seed) -> np.random.Generator:
    """The package-wide PRNG: numpy's PCG64 seeded through SeedSequence."""
    return np.random.Generator(np.random.PCG64(seed))


def uniform_shuffle(job: PartitionedJob, seed) -> PartitionedJob:
    """Return ``job`` with a uniformly random permutation of its block pairs.

    ``seed`` may be an int or a ``numpy.random.Generator`` (consumed in place).
    numpy's ``permutation`` is a Fisher-Yates shuffle, so equal seeds give
    equal permutations on every platform.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    perm = rng.permutation(job.k_parts)
    return replace(job, permutation=tuple(int(i) for i in perm))


def frobenius_norm_sq(m) -> float:
    m = np.asarray(m)
    return float(np.vdot(m, m).real)


def trace_product(p, q):
    """Frobenius inner product Tr(P^H Q), conjugate-linear in ``p``."""
    p = np.asarray(p)
    q = np.asarray(q)
    if p.shape != q.shape:
        raise DimensionError(f"shape mismatch: {p.shape} vs {q.shape}")
    val = np.vdot(p, q)
    if not (np.iscomplexobj(p) or np.iscomplexobj(q)):
        return float(val.real)
    return complex(val)


def relative_error_sq(reference, estimate) -> float:
    """||reference - estimate||_F^2 / ||reference||_F^2."""
    return frobenius_norm_sq(np.asarray(reference) - np.asarray(estimate)) / frobenius_norm_sq(reference)

from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sacmm.matrix_core import (
    DimensionError,
    PartitionedJob,
    as_matrix,
    frobenius_norm_sq,
    make_rng,
    partition,
    relative_error_sq,
    trace_product,
    uniform_shuffle,
)


def test_partition_all_ones():
    job = partition(np.ones((2, 4)), np.ones((4, 2)), 2)
    assert job.k_parts == 2
    for a, b in zip(job.a_blocks, job.b_blocks):
        np.testing.assert_array_equal(a, np.ones((2, 2)))
        np.testing.assert_array_equal(b, np.ones((2, 2)))
    np.testing.assert_array_equal(job.block_products().sum(axis=0), 4 * np.ones((2, 2)))
    assert job.permutation == (0, 1)


def test_partition_single_block(rng):
    a, b = rng.standard_normal((3, 5)), rng.standard_normal((5, 2))
    job = partition(a, b, 1)
    np.testing.assert_array_equal(job.a_blocks[0], a)
    np.testing.assert_array_equal(job.b_blocks[0], b)


def test_partition_full_scale_shapes():
    a = np.zeros((100, 8000))
    b = np.zeros((8000, 100))
    job = partition(a, b, 8)
    assert all(x.shape == (100, 1000) for x in job.a_blocks)
    assert all(x.shape == (1000, 100) for x in job.b_blocks)


def test_partition_bands_are_contiguous(rng):
    a, b = rng.standard_normal((3, 6)), rng.standard_normal((6, 4))
    job = partition(a, b, 3)
    np.testing.assert_array_equal(job.a_blocks[1], a[:, 2:4])
    np.testing.assert_array_equal(job.b_blocks[2], b[4:6, :])


def test_partition_errors():
    with pytest.raises(DimensionError):
        partition(np.ones((2, 4)), np.ones((3, 2)), 2)
    with pytest.raises(DimensionError):
        partition(np.ones((2, 6)), np.ones((6, 2)), 4)


def test_matrix_validation():
    with pytest.raises(DimensionError):
        as_matrix(np.ones(3))
    with pytest.raises(ValueError):
        as_matrix(np.array([[1.0, np.nan]]))
    assert as_matrix([[1, 2]]).dtype == np.float64
    assert as_matrix([[1j]]).dtype == np.complex128


def test_job_rejects_non_bijection():
    blocks = (np.ones((1, 1)),) * 3
    with pytest.raises(ValueError):
        PartitionedJob(blocks, blocks, (0, 0, 2))


@given(st.integers(1, 6), st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_partition_roundtrip_and_sum(k, w, nx, seed):
    r = np.random.default_rng(seed)
    a, b = r.standard_normal((nx, k * w)), r.standard_normal((k * w, 2))
    job = partition(a, b, k)
    a2, b2 = job.reassemble()
    np.testing.assert_array_equal(a2, a)
    np.testing.assert_array_equal(b2, b)
    assert relative_error_sq(a @ b, job.block_products().sum(axis=0)) <= 1e-24


def test_shuffle_single_block_is_identity():
    job = partition(np.ones((1, 3)), np.ones((3, 1)), 1)
    assert uniform_shuffle(job, 123).permutation == (0,)


def test_shuffle_deterministic_and_blocks_unchanged(rng):
    job = partition(rng.standard_normal((2, 8)), rng.standard_normal((8, 2)), 8)
    s1, s2 = uniform_shuffle(job, 99), uniform_shuffle(job, 99)
    assert s1.permutation == s2.permutation
    assert s1.a_blocks is job.a_blocks
    # permuted products still sum to AB
    prods = [a @ b for a, b in zip(s1.permuted_a(), s1.permuted_b())]
    np.testing.assert_allclose(sum(prods), job.block_products().sum(axis=0), rtol=1e-12)


def test_shuffle_uniform_over_24_permutations():
    job = partition(np.ones((1, 4)), np.ones((4, 1)), 4)
    draws = 100_000
    counts = Counter(uniform_shuffle(job, seed).permutation for seed in range(draws))
    assert len(counts) == 24
    for c in counts.values():
        assert abs(c / draws - 1 / 24) <= 0.01


def test_frobenius_examples():
    assert frobenius_norm_sq(np.zeros((3, 2))) == 0
    assert frobenius_norm_sq(np.eye(2)) == 2
    assert frobenius_norm_sq([[1, 2], [3, 4]]) == 30
    assert frobenius_norm_sq([[1j, 1]]) == 2


def test_trace_product_examples():
    assert trace_product(np.eye(2), np.eye(2)) == 2
    assert trace_product([[1, 0], [0, 0]], [[0, 0], [0, 1]]) == 0
    assert trace_product([[1, 2], [3, 4]], [[5, 6], [7, 8]]) == 70
    assert trace_product([[1j]], [[1j]]) == 1
    with pytest.raises(DimensionError):
        trace_product(np.eye(2), np.eye(3))


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_trace_product_self_is_norm(seed, cplx):
    r = np.random.default_rng(seed)
    m = r.standard_normal((3, 4))
    if cplx:
        m = m + 1j * r.standard_normal((3, 4))
    assert np.isclose(trace_product(m, m), frobenius_norm_sq(m), rtol=1e-14)


def test_make_rng_is_pcg64():
    assert isinstance(make_rng(0).bit_generator, np.random.PCG64)
    assert make_rng(5).integers(1 << 30) == make_rng(5).integers(1 << 30)

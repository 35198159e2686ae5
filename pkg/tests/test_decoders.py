import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sacmm.bases import (
    ChebyshevOrthonormal,
    DuplicatePointError,
    Monomial,
    chebyshev_roots,
    make_chebyshev_root_set,
    make_cluster_set,
    make_complex_circle_set,
    make_equal_real_set,
)
from sacmm.decoders import (
    InsufficientResultsError,
    SingularSystemError,
    approx_decode_group,
    approx_decode_layer,
    exact_decode,
    perturbation_bound,
    perturbation_bound_closed_form,
    solve_interpolation,
)
from sacmm.matrix_core import partition, uniform_shuffle
from sacmm.schemes import (
    EpsApproxMatDot,
    GroupSac,
    MatDot,
    lagrange_layer_sac,
    ortho_layer_sac,
    ortho_matdot,
    run_workers,
)


def _job(rng, k, nx=4, w=3, ny=5):
    return partition(rng.standard_normal((nx, k * w)), rng.standard_normal((k * w, ny)), k)


def _rel(ref, est):
    return np.linalg.norm(ref - est) / np.linalg.norm(ref)


def _permuted_partial(job, n):
    return sum(job.permuted_a()[k] @ job.permuted_b()[k] for k in range(n))


def test_solve_monomial_2x2():
    poly = solve_interpolation([1.0, 2.0], np.array([[[3.0]], [[5.0]]]))
    np.testing.assert_allclose(poly.coeffs[:, 0, 0], [1.0, 2.0], atol=1e-14)
    assert poly.degree == 1
    assert poly.condition > 1


def test_solve_single_point_constant_basis():
    v = np.array([[[2.0, -1.0]]])
    poly = solve_interpolation([0.4], v, ChebyshevOrthonormal())
    np.testing.assert_allclose(poly.coeffs[0], v[0] / math.sqrt(0.5), rtol=1e-15)


@given(st.integers(1, 16), st.integers(0, 2**31))
def test_chebyshev_roundtrip(m, seed):
    r = np.random.default_rng(seed)
    coeffs = r.standard_normal((m, 2, 3))
    x = chebyshev_roots(m)
    basis = ChebyshevOrthonormal()
    values = np.tensordot(basis.matrix(x, m), coeffs, axes=(1, 0))
    poly = solve_interpolation(x, values, basis)
    np.testing.assert_allclose(poly.coeffs, coeffs, atol=1e-10)
    np.testing.assert_allclose(poly(x), values, atol=1e-10)


@given(st.integers(1, 10), st.integers(0, 2**31))
def test_interpolant_reproduces_values(m, seed):
    r = np.random.default_rng(seed)
    x = make_complex_circle_set(m, 1.0).points
    values = r.standard_normal((m, 2, 2)) + 1j * r.standard_normal((m, 2, 2))
    poly = solve_interpolation(x, values)
    np.testing.assert_allclose(poly(x), values, atol=1e-12)


def test_solve_errors():
    with pytest.raises(DuplicatePointError):
        solve_interpolation([1.0, 1.0], np.zeros((2, 1, 1)))
    with pytest.raises(SingularSystemError):
        solve_interpolation([0.0, 1e-301], np.zeros((2, 1, 1)))
    with pytest.raises(ValueError):
        solve_interpolation([0.0, 1.0], np.zeros((3, 1, 1)))


def test_exact_matdot_k2(rng):
    job = partition(rng.standard_normal((2, 4)), rng.standard_normal((4, 2)), 2)
    s = MatDot(2, make_complex_circle_set(3, 1.0))
    out = exact_decode(s, run_workers(s, job))
    a, b = job.reassemble()
    assert _rel(a @ b, out.estimate) <= 1e-10
    assert out.estimate.dtype == np.float64
    assert out.imag_residual <= 1e-12


def test_exact_group_sac_242(rng):
    job = uniform_shuffle(_job(rng, 8), 3)
    s = GroupSac(8, make_complex_circle_set(24, 1.0), group_sizes=(2, 4, 2))
    assert s.target_exponents() == [1, 7, 17]
    res = run_workers(s, job)
    order = rng.permutation(24)
    out = exact_decode(s, [res[i] for i in order])
    a, b = job.reassemble()
    assert _rel(a @ b, out.estimate) <= 1e-10


def test_exact_ortho_matdot_k8(rng):
    job = _job(rng, 8)
    s = ortho_matdot(8, 24)
    res = run_workers(s, job)
    out = exact_decode(s, [res[i] for i in rng.permutation(24)][:15])
    a, b = job.reassemble()
    assert _rel(a @ b, out.estimate) <= 1e-10


def test_exact_needs_threshold(rng):
    s = MatDot(3, make_complex_circle_set(5, 1.0))
    res = run_workers(s, _job(rng, 3))
    with pytest.raises(InsufficientResultsError):
        exact_decode(s, res[:4])


def test_eps_amd_error_vanishes_with_radius(rng):
    job = uniform_shuffle(_job(rng, 2), 1)
    target = job.block_products().sum(axis=0)
    errs = []
    for eps in (0.03, 0.003, 0.0003):
        s = EpsApproxMatDot(2, make_equal_real_set(3, eps))
        res = run_workers(s, job)
        errs.append(_rel(target, approx_decode_group(s, res[:2]).estimate))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_eps_amd_uses_first_k_results(rng):
    job = uniform_shuffle(_job(rng, 8), 1)
    s = EpsApproxMatDot(8, make_complex_circle_set(24, 0.1))
    res = run_workers(s, job)
    e8 = approx_decode_group(s, res[:8]).estimate
    e14 = approx_decode_group(s, res[:14]).estimate
    np.testing.assert_array_equal(e8, e14)
    with pytest.raises(InsufficientResultsError):
        approx_decode_group(s, res[:7])


def test_group_sac_m8_estimates_first_six_blocks(rng):
    job = uniform_shuffle(_job(rng, 8), 5)
    target = _permuted_partial(job, 6)
    errs = []
    for eps in (0.1, 0.03):
        s = GroupSac(8, make_complex_circle_set(24, eps), group_sizes=(2, 4, 2))
        res = run_workers(s, job)
        errs.append(_rel(target, approx_decode_group(s, res[:8]).estimate))
    assert errs[1] < errs[0]
    assert errs[1] < 0.1
    with pytest.raises(InsufficientResultsError):
        approx_decode_group(s, res[:1])


def test_group_sac_equal_blocks_scaled(rng):
    a0, b0 = rng.standard_normal((3, 2)), rng.standard_normal((2, 4))
    job = partition(np.hstack([a0] * 8), np.vstack([b0] * 8), 8)
    errs = []
    for eps in (0.1, 0.01, 0.001):
        s = GroupSac(8, make_complex_circle_set(24, eps), group_sizes=(5, 3))
        est = approx_decode_group(s, run_workers(s, job)[:5], beta=8 / 5).estimate
        errs.append(_rel(8 * a0 @ b0, est))
    # the neglected tail is first order in eps
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_single_group_tail_bound(rng, k):
    """At m = 2K-2 the only neglected term is x^(2K-2); its leak into the
    x^(K-1) coefficient is at most ||c_top|| * C(2K-2, K-1) * eps^(K-1)."""
    job = _job(rng, k)
    for eps in (0.5, 0.1):
        s = GroupSac(k, make_complex_circle_set(2 * k - 1, eps), group_sizes=(k,), shuffle=False)
        res = run_workers(s, job)
        approx = approx_decode_group(s, res[:2 * k - 2]).estimate
        exact = exact_decode(s, res).estimate
        c_top = job.a_blocks[k - 1] @ job.b_blocks[0]
        bound = np.linalg.norm(c_top) * math.comb(2 * k - 2, k - 1) * eps ** (k - 1)
        assert np.linalg.norm(approx - exact) <= bound * (1 + 1e-6) + 1e-9


def test_layer_full_clusters_converge(rng):
    job = _job(rng, 3)
    anchors = chebyshev_roots(3)
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        s = ortho_layer_sac(make_cluster_set(anchors, [2, 2, 2], eps), shuffle=False)
        sa, sb = s.encode_at(job, anchors)
        limit = sum(w * sa[k] @ sb[k] for k, w in enumerate(s.weights))
        errs.append(_rel(limit, approx_decode_layer(s, run_workers(s, job))))
    assert errs[0] > errs[1] > errs[2]


def test_layer_single_result(rng):
    s = ortho_layer_sac(make_cluster_set(chebyshev_roots(4), [2] * 4, 0.01))
    res = run_workers(s, uniform_shuffle(_job(rng, 4), 2))
    r = res[5]
    k0 = s.eval_set.cluster_map[r.worker_id - 1]
    np.testing.assert_allclose(approx_decode_layer(s, [r]), s.weights[k0] * r.product, rtol=1e-15)
    np.testing.assert_allclose(approx_decode_layer(s, [r], beta=2.0),
                               2 * s.weights[k0] * r.product, rtol=1e-15)
    with pytest.raises(InsufficientResultsError):
        approx_decode_layer(s, [])


def test_layer_lagrange_k2(rng):
    job = _job(rng, 2)
    s = lagrange_layer_sac(make_cluster_set([1.0, 2.0], [2, 2], 1e-6), shuffle=False)
    res = run_workers(s, job)
    est = approx_decode_layer(s, [res[0], res[3]])
    assert _rel(job.block_products().sum(axis=0), est) <= 1e-4


def test_perturbation_bound_examples():
    assert perturbation_bound(2, 1, 2, 0.0) == 0
    assert perturbation_bound(2, 1, 2, 0.1) == pytest.approx(0.51, abs=1e-12)
    assert perturbation_bound_closed_form(2, 1, 2, 0.1) == pytest.approx(0.51, abs=1e-12)
    for lam1 in (0.3, 1.0, 2.5):
        assert perturbation_bound(lam1, 3.0, 1, 0.2) == pytest.approx(3.0 * 0.2, rel=1e-14)
    with pytest.raises(ZeroDivisionError):
        perturbation_bound_closed_form(1.0, 1.0, 3, 0.1)
    with pytest.raises(ValueError):
        perturbation_bound(-1.0, 1.0, 3, 0.1)


@given(st.floats(0.05, 3), st.floats(0.1, 5), st.integers(1, 12), st.floats(1e-3, 0.5))
def test_bound_forms_agree(lam1, lam2, n, eps):
    r = lam1 + eps
    if abs(lam1 - 1) < 1e-3 or abs(r - 1) < 1e-3:
        return
    closed = perturbation_bound_closed_form(lam1, lam2, n, eps)
    assert perturbation_bound(lam1, lam2, n, eps) == pytest.approx(closed, rel=1e-8, abs=1e-12)


def test_perturbation_bound_randomized(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        lam1 = float(rng.uniform(0.05, 2.0))
        lam2 = float(rng.uniform(0.1, 3.0))
        eps = float(rng.uniform(0.0, 0.5))
        c = rng.uniform(-lam2, lam2, n + 1)
        x = rng.uniform(-lam1, lam1)
        y = x + rng.uniform(-eps, eps)
        diff = abs(np.polynomial.polynomial.polyval(y, c) - np.polynomial.polynomial.polyval(x, c))
        assert diff <= perturbation_bound(lam1, lam2, n, eps) * (1 + 1e-12) + 1e-15


@pytest.mark.parametrize("eps", [0.15, 0.45, 1.0])
def test_circle_conditioning_beats_equal_real(eps):
    n = 15
    circ = make_complex_circle_set(n, eps).points
    real = make_equal_real_set(n, eps).points
    vals = np.zeros((n, 1, 1))
    c1 = solve_interpolation(circ, vals + 1, Monomial()).condition
    c2 = solve_interpolation(real, vals + 1, Monomial()).condition
    assert c1 < c2

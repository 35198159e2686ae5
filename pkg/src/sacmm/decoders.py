"""Interpolation back-ends plus exact, group-wise and layer-wise decoders."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .bases import Basis, DuplicatePointError, Monomial
from .schemes import (
    CodingScheme,
    EpsApproxMatDot,
    GroupSac,
    LayerSac,
    MonomialScheme,
    PointScheme,
    SchemeError,
    WorkerResult,
)


class SingularSystemError(np.linalg.LinAlgError):
    pass


class InsufficientResultsError(ValueError):
    pass


PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class DecodedPolynomial:
    """sum_k coeffs[k] * basis_k(x), with matrix-valued coefficients."""

    basis: Basis
    coeffs: np.ndarray
    condition: float

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x)
        w = self.basis.matrix(np.atleast_1d(x), len(self.coeffs))
        out = np.tensordot(w, self.coeffs, axes=(1, 0))
        return out if x.ndim else out[0]


class DecodeOutput(NamedTuple):
    estimate: np.ndarray
    condition: float
    imag_residual: float


def solve_interpolation(points, values, basis: Basis = Monomial()) -> DecodedPolynomial:
    """Interpolate m matrix values at m distinct points in the given basis.

    Builds M[j, k] = basis_k(x_j) and solves M c = values for all N_x*N_y
    right-hand sides with a single LU factorization (partial pivoting).
    """
    points = np.asarray(points)
    values = np.asarray(values)
    m = len(points)
    if m < 1 or values.shape[0] != m:
        raise ValueError("need one value per point and at least one point")
    if len(set(points.tolist())) != m:
        raise DuplicatePointError("interpolation points must be distinct")
    mat = basis.matrix(points, m)
    lu, piv = scipy.linalg.lu_factor(mat, check_finite=True)
    if np.abs(np.diag(lu)).min() < PIVOT_FLOOR:
        raise SingularSystemError("interpolation system is numerically singular")
    rhs = values.reshape(m, -1)
    coeffs = scipy.linalg.lu_solve((lu, piv), rhs).reshape(values.shape)
    return DecodedPolynomial(basis, coeffs, float(np.linalg.cond(mat)))


def _points_values(results: Sequence[WorkerResult]):
    return (np.array([r.point for r in results]),
            np.stack([r.product for r in results]))


def _realify(mat: np.ndarray) -> tuple[np.ndarray, float]:
    if np.iscomplexobj(mat):
        return mat.real.copy(), float(np.linalg.norm(mat.imag))
    return mat, 0.0


def _point_based_sum(scheme: PointScheme, poly: DecodedPolynomial) -> np.ndarray:
    vals = poly(np.asarray(scheme.anchors))
    return np.tensordot(np.asarray(scheme.weights), vals, axes=(0, 0))


def exact_decode(scheme: CodingScheme, results: Sequence[WorkerResult]) -> DecodeOutput:
    """Recover AB from the first recovery-threshold results (completion order)."""
    r = scheme.recovery_threshold()
    if len(results) < r:
        raise InsufficientResultsError(f"{len(results)} results, need {r}")
    points, values = _points_values(results[:r])
    if isinstance(scheme, MonomialScheme):
        poly = solve_interpolation(points, values, Monomial())
        est = poly.coeffs[scheme.target_exponents()].sum(axis=0)
    elif isinstance(scheme, PointScheme):
        poly = solve_interpolation(points, values, scheme.decode_basis)
        est = _point_based_sum(scheme, poly)
    else:
        raise SchemeError(f"no decoder for {type(scheme).__name__}")
    est, imag = _realify(est)
    return DecodeOutput(est, poly.condition, imag)


def approx_decode_group(scheme: GroupSac | EpsApproxMatDot, results: Sequence[WorkerResult],
                        beta: float = 1.0) -> DecodeOutput:
    """Estimate beta * (decoded partial sum) from m < R results.

    Group-wise SAC fits the degree-(m-1) polynomial through all m results and
    adds the coefficients that hold the completed groups' sums. epsilon-approximate
    MatDot has a single layer: it always uses the first K results.
    """
    m = len(results)
    if isinstance(scheme, EpsApproxMatDot):
        if m < scheme.k_total:
            raise InsufficientResultsError(f"{m} results, first layer needs {scheme.k_total}")
        results = results[:scheme.k_total]
        exps = scheme.target_exponents()
    elif isinstance(scheme, GroupSac):
        d_star = scheme.active_groups(m)
        if d_star == 0:
            raise InsufficientResultsError(
                f"{m} results, first layer needs {scheme.group_threshold(1)}")
        exps = scheme.target_exponents(d_star)
    else:
        raise SchemeError(f"{type(scheme).__name__} has no group-wise layers")
    points, values = _points_values(results)
    poly = solve_interpolation(points, values, Monomial())
    est, imag = _realify(beta * poly.coeffs[exps].sum(axis=0))
    return DecodeOutput(est, poly.condition, imag)


def approx_decode_layer(scheme: LayerSac, results: Sequence[WorkerResult],
                        beta: float = 1.0) -> np.ndarray:
    """beta * sum over hit clusters of alpha_k * (mean of that cluster's products)."""
    if not results:
        raise InsufficientResultsError("need at least one result")
    cmap = scheme.eval_set.cluster_map
    sums = {}
    counts = {}
    for r in results:
        k = cmap[r.worker_id - 1]
        sums[k] = sums.get(k, 0) + r.product
        counts[k] = counts.get(k, 0) + 1
    est = sum(scheme.weights[k] * sums[k] / counts[k] for k in sorted(sums))
    return beta * np.real_if_close(est)


def perturbation_bound(lambda1: float, lambda2: float, n: int, epsilon: float) -> float:
    """Bound on |f(y) - f(x)| for a degree-n polynomial with |c_i| <= lambda2,
    |x| <= lambda1 and |y - x| <= epsilon.

    Equals lambda2 * (G(lambda1 + eps) - G(lambda1)) with G(r) = (r^{n+1} - r)/(r - 1).
    The value is evaluated as lambda2 * eps * sum_i sum_j (lambda1+eps)^j lambda1^(i-1-j),
    which has no singularity at r = 1 and no cancellation for small eps.
    """
    if lambda1 < 0 or lambda2 < 0 or epsilon < 0 or n < 0:
        raise ValueError("bound parameters must be nonnegative")
    r = lambda1 + epsilon
    total = 0.0
    for i in range(1, n + 1):
        total += sum(r ** j * lambda1 ** (i - 1 - j) for j in range(i))
    return lambda2 * epsilon * total


def perturbation_bound_closed_form(lambda1: float, lambda2: float, n: int, epsilon: float) -> float:
    """The closed form of :func:`perturbation_bound`; undefined at lambda1 = 1 or lambda1 + eps = 1."""
    r = lambda1 + epsilon
    if r == 1 or lambda1 == 1:
        raise ZeroDivisionError("closed form is singular at 1; use perturbation_bound")
    return lambda2 * ((r ** (n + 1) - r) / (r - 1) - (lambda1 ** (n + 1) - lambda1) / (lambda1 - 1))

"""Coded distributed matrix multiplication with successive approximation."""
from .matrix_core import PartitionedJob, partition, uniform_shuffle, make_rng
from .bases import (
    ChebyshevOrthonormal,
    EvaluationSet,
    Lagrange,
    Monomial,
    make_chebyshev_root_set,
    make_cluster_set,
    make_complex_circle_set,
    make_equal_real_set,
)
from .schemes import (
    EpsApproxMatDot,
    GroupSac,
    LagrangeCode,
    LayerSac,
    MatDot,
    OrthoMatDot,
    lagrange_code,
    lagrange_layer_sac,
    ortho_layer_sac,
    ortho_matdot,
    run_workers,
)
from .decoders import approx_decode_group, approx_decode_layer, exact_decode

__version__ = "0.1.0"

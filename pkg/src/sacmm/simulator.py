"""Monte-Carlo straggler experiments.

Each trial draws A and B, encodes them, computes every worker product and
then walks a uniformly random completion order, decoding after every
arrival. Errors are split into an approximation part (truncation, exact
arithmetic) and a computation part (what the decoder actually returns).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import beta as bt
from .bases import (
    EvaluationSet,
    chebyshev_roots,
    make_chebyshev_root_set,
    make_cluster_set,
    make_complex_circle_set,
    make_equal_real_set,
)
from .decoders import approx_decode_group, approx_decode_layer, exact_decode
from .matrix_core import frobenius_norm_sq, make_rng, partition, uniform_shuffle
from .schemes import (
    CodingScheme,
    EpsApproxMatDot,
    GroupSac,
    LayerSac,
    MatDot,
    SchemeError,
    lagrange_code,
    lagrange_layer_sac,
    ortho_layer_sac,
    ortho_matdot,
    run_workers,
)

SCHEMES = ("matdot", "eps_amd", "group_sac", "ortho_matdot", "lagrange",
           "layer_sac_ortho", "layer_sac_lagrange")
EVAL_KINDS = ("complex_circle", "equal_real", "chebyshev_roots", "cluster")
BETA_POLICIES = ("one", "unbiased", "oracle", "case_correlated")
INPUT_MODELS = ("iid", "correlated")

DESK_DIMS = (40, 800, 40)
FULL_DIMS = (100, 8000, 100)

# scheme -> (evaluation set, epsilon) used when the config leaves them out
_DEFAULT_EVAL = {
    "matdot": ("complex_circle", 1.0),
    "eps_amd": ("complex_circle", 0.1),
    "group_sac": ("complex_circle", 0.1),
    "ortho_matdot": ("chebyshev_roots", None),
    "lagrange": ("chebyshev_roots", None),
    "layer_sac_ortho": ("cluster", 0.0125),
    "layer_sac_lagrange": ("cluster", 0.0333),
}


class ConfigError(ValueError):
    """An experiment configuration violates one of its invariants."""


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    k: int = 8
    n_workers: int = 24
    dims: tuple = DESK_DIMS
    groups: tuple | None = None
    anchors: tuple | None = None
    cluster_sizes: tuple | None = None
    eval_kind: str | None = None
    epsilon: float | None = None
    input_model: str = "iid"
    lam: float = 0.0
    beta: str | float = "one"
    trials: int = 100
    seed: int = 0
    shuffle: bool | None = None

    def __post_init__(self):
        for name in ("dims", "groups", "anchors", "cluster_sizes"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, tuple(val))
        self.validate()

    def validate(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {', '.join(SCHEMES)}")
        if self.k < 1 or self.n_workers < 1:
            raise ConfigError("K and N must be positive")
        if len(self.dims) != 3 or any(int(d) < 1 for d in self.dims):
            raise ConfigError("dims must be three positive integers (N_x, N_z, N_y)")
        if self.dims[1] % self.k:
            raise ConfigError(f"inner dimension N_z={self.dims[1]} must be divisible by K={self.k}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.input_model not in INPUT_MODELS:
            raise ConfigError(f"input model must be one of {INPUT_MODELS}")
        if isinstance(self.beta, str) and self.beta not in BETA_POLICIES:
            raise ConfigError(f"beta must be a number or one of {BETA_POLICIES}")
        if self.eval_kind is not None and self.eval_kind not in EVAL_KINDS:
            raise ConfigError(f"evaluation set must be one of {EVAL_KINDS}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.scheme == "group_sac":
            if not self.groups:
                raise ConfigError("group_sac needs a 'groups' list")
            if sum(self.groups) != self.k:
                raise ConfigError(f"group sizes {list(self.groups)} must sum to K={self.k}")
        if self.anchors is not None and len(self.anchors) != self.k:
            raise ConfigError(f"need K={self.k} anchors, got {len(self.anchors)}")
        if self.cluster_sizes is not None:
            if len(self.cluster_sizes) != self.k:
                raise ConfigError(f"need K={self.k} cluster sizes")
            if sum(self.cluster_sizes) != self.n_workers:
                raise ConfigError(f"cluster sizes must sum to N={self.n_workers}")
        try:
            build_scheme(self)
        except (SchemeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def resolved_eval(self) -> tuple[str, float | None]:
        kind, eps = _DEFAULT_EVAL[self.scheme]
        return (self.eval_kind or kind, self.epsilon if self.epsilon is not None else eps)


@dataclass(frozen=True)
class LayeredEstimate:
    m: int
    c_tilde: np.ndarray
    c_analytic: np.ndarray
    beta_used: float


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    m: int
    beta: float
    rel_approx: float
    rel_comp: float
    rel_total: float


@dataclass(frozen=True)
class MeanRecord:
    m: int
    n: int
    rel_approx: float
    rel_comp: float
    rel_total: float
    se_approx: float
    se_comp: float
    se_total: float


@dataclass
class ErrorReport:
    label: str
    records: list = field(default_factory=list)

    def m_values(self) -> list[int]:
        return sorted({r.m for r in self.records})

    def means(self) -> list[MeanRecord]:
        return aggregate(self.records)

    def mean_at(self, m: int) -> MeanRecord:
        for row in self.means():
            if row.m == m:
                return row
        raise KeyError(m)


def _mean_se(values) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def aggregate(records) -> list[MeanRecord]:
    """Per-m means and standard errors; exact summation makes this order-independent."""
    by_m: dict[int, list] = {}
    for r in records:
        by_m.setdefault(r.m, []).append(r)
    out = []
    for m in sorted(by_m):
        rows = by_m[m]
        stats = [_mean_se([getattr(r, f) for r in rows])
                 for f in ("rel_approx", "rel_comp", "rel_total")]
        out.append(MeanRecord(m, len(rows), stats[0][0], stats[1][0], stats[2][0],
                              stats[0][1], stats[1][1], stats[2][1]))
    return out


def _real_spread(n: int, lo: float, hi: float, kind: str) -> np.ndarray:
    if kind == "chebyshev_roots":
        unit = chebyshev_roots(n)
    else:
        unit = np.linspace(-1.0, 1.0, n)
    return lo + (hi - lo) * (unit + 1) / 2


def build_eval_set(cfg: ExperimentConfig) -> EvaluationSet:
    kind, eps = cfg.resolved_eval
    n = cfg.n_workers
    if cfg.scheme in ("layer_sac_ortho", "layer_sac_lagrange"):
        if kind != "cluster":
            raise ConfigError("layer-wise SAC needs the 'cluster' evaluation set")
        anchors = _anchors(cfg)
        sizes = cfg.cluster_sizes or _equal_sizes(n, cfg.k)
        return make_cluster_set(anchors, sizes, eps)
    if kind == "cluster":
        raise ConfigError("the 'cluster' evaluation set is only for layer-wise SAC")
    if cfg.scheme in ("ortho_matdot", "lagrange"):
        if kind == "complex_circle":
            raise ConfigError(f"{cfg.scheme} uses real evaluation points")
        if cfg.scheme == "ortho_matdot":
            lo, hi = -1.0, 1.0
        else:
            lo, hi = min(_anchors(cfg)), max(_anchors(cfg))
        if kind == "chebyshev_roots" and cfg.scheme == "ortho_matdot":
            return make_chebyshev_root_set(n)
        return EvaluationSet(_real_spread(n, lo, hi, kind))
    if kind == "complex_circle":
        return make_complex_circle_set(n, eps)
    if kind == "equal_real":
        return make_equal_real_set(n, eps)
    return EvaluationSet(eps * chebyshev_roots(n) if eps else chebyshev_roots(n))


def _equal_sizes(n: int, k: int) -> tuple:
    if n % k:
        raise ConfigError(f"N={n} is not divisible by K={k}; give cluster_sizes explicitly")
    return (n // k,) * k


def _anchors(cfg: ExperimentConfig) -> tuple:
    if cfg.anchors is not None:
        return tuple(float(a) for a in cfg.anchors)
    if cfg.scheme == "layer_sac_ortho":
        return tuple(chebyshev_roots(cfg.k))
    return tuple(float(i) for i in range(1, cfg.k + 1))


def build_scheme(cfg: ExperimentConfig) -> CodingScheme:
    es = build_eval_set(cfg)
    k = cfg.k
    shuffle = {} if cfg.shuffle is None else {"shuffle": cfg.shuffle}
    if cfg.scheme == "matdot":
        return MatDot(k, es, **shuffle)
    if cfg.scheme == "eps_amd":
        return EpsApproxMatDot(k, es, **shuffle)
    if cfg.scheme == "group_sac":
        return GroupSac(k, es, group_sizes=cfg.groups, **shuffle)
    if cfg.scheme == "ortho_matdot":
        s = ortho_matdot(k, cfg.n_workers)
        return replace(s, eval_set=es, **shuffle)
    if cfg.scheme == "lagrange":
        return replace(lagrange_code(_anchors(cfg), es), **shuffle)
    if cfg.scheme == "layer_sac_ortho":
        if cfg.anchors is not None and not np.allclose(cfg.anchors, chebyshev_roots(k)):
            raise ConfigError("layer_sac_ortho anchors are the Chebyshev roots of K")
        return ortho_layer_sac(es, **shuffle)
    return lagrange_layer_sac(es, **shuffle)


def generate_inputs(cfg: ExperimentConfig, rng: np.random.Generator):
    """Draw (A, B) with standard normal entries, or the correlated block model.

    Correlated model: block k of A is lam*A0 + A1_k, and likewise for B, with
    all latent matrices standard normal. Draw order: A0, B0, A1 blocks, B1 blocks.
    """
    nx, nz, ny = (int(d) for d in cfg.dims)
    if cfg.input_model == "iid":
        return rng.standard_normal((nx, nz)), rng.standard_normal((nz, ny))
    w = nz // cfg.k
    a0 = rng.standard_normal((nx, w))
    b0 = rng.standard_normal((w, ny))
    a1 = rng.standard_normal((cfg.k, nx, w))
    b1 = rng.standard_normal((cfg.k, w, ny))
    a = np.hstack([cfg.lam * a0 + a1[k] for k in range(cfg.k)])
    b = np.vstack([cfg.lam * b0 + b1[k] for k in range(cfg.k)])
    return a, b


def choose_beta(cfg: ExperimentConfig, scheme: CodingScheme, job, m: int) -> float:
    """Scaling factor for the partial estimate after m completions (m < R)."""
    if not isinstance(cfg.beta, str):
        return float(cfg.beta)
    if cfg.beta == "one":
        return 1.0
    k = scheme.k_total
    if isinstance(scheme, LayerSac):
        n = scheme.n_workers
        if cfg.beta == "oracle":
            return bt.beta_layer_optimal(bt.layer_moments(scheme, job, m))
        sizes = scheme.cluster_sizes
        if len(set(sizes)) != 1:
            raise ConfigError(f"beta policy {cfg.beta!r} assumes equal cluster sizes")
        if cfg.beta == "unbiased":
            return 1.0 / bt.gamma_single(n, m, sizes[0])
        try:
            return bt.beta_case_correlated(n, k, m)
        except bt.DegenerateBetaError:
            return bt.beta_equal_moments(n, k, m)
    m_l = scheme.partial_size(m)
    if cfg.beta == "unbiased":
        return k / m_l
    if cfg.beta == "case_correlated":
        return (k - 1) / (m_l - 1) if m_l > 1 else float(k)
    if k < 2:
        return 1.0
    return bt.beta_group_optimal(bt.moments_from_job(job, m_l))


def simulate_trial(cfg: ExperimentConfig, trial_seed: int,
                   scheme: CodingScheme | None = None) -> tuple[np.ndarray, list[LayeredEstimate]]:
    """Run one trial; returns C = AB and one estimate per decodable m."""
    scheme = scheme or build_scheme(cfg)
    rng = make_rng(trial_seed)
    a, b = generate_inputs(cfg, rng)
    job = partition(a, b, cfg.k)
    if scheme.shuffle:
        job = uniform_shuffle(job, rng)
    c = a @ b
    results = run_workers(scheme, job)
    order = rng.permutation(scheme.n_workers)
    arrived = [results[i] for i in order]

    r = scheme.recovery_threshold()
    exact = None
    if isinstance(scheme, LayerSac):
        sa, sb = scheme.encode_at(job, np.asarray(scheme.anchors))
        anchor_terms = [w * (sa[k] @ sb[k]) for k, w in enumerate(scheme.weights)]
        cmap = scheme.eval_set.cluster_map
    else:
        a_ord, b_ord = scheme.ordered_blocks(job)
        prefix = np.cumsum([x @ y for x, y in zip(a_ord, b_ord)], axis=0)

    out = []
    for m in range(scheme.first_estimate(), scheme.n_workers + 1):
        if m >= r:
            if exact is None:
                exact = exact_decode(scheme, arrived[:r]).estimate
            out.append(LayeredEstimate(m, exact, c, 1.0))
            continue
        beta = choose_beta(cfg, scheme, job, m)
        if isinstance(scheme, LayerSac):
            est = approx_decode_layer(scheme, arrived[:m], beta)
            hit = sorted({cmap[w.worker_id - 1] for w in arrived[:m]})
            analytic = beta * sum(anchor_terms[k] for k in hit)
        else:
            est = approx_decode_group(scheme, arrived[:m], beta).estimate
            m_l = scheme.partial_size(m)
            # with every block represented the oracle is C itself
            analytic = beta * (c if m_l == scheme.k_total else prefix[m_l - 1])
        out.append(LayeredEstimate(m, est, analytic, beta))
    return c, out


def trial_records(cfg: ExperimentConfig, trial: int,
                  scheme: CodingScheme | None = None) -> list[TrialRecord]:
    c, estimates = simulate_trial(cfg, cfg.seed + trial, scheme)
    norm = frobenius_norm_sq(c)
    rows = []
    for e in estimates:
        rows.append(TrialRecord(
            trial, e.m, e.beta_used,
            frobenius_norm_sq(c - e.c_analytic) / norm,
            frobenius_norm_sq(e.c_analytic - e.c_tilde) / norm,
            frobenius_norm_sq(c - e.c_tilde) / norm))
    return rows


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ErrorReport:
    """Run cfg.trials trials (seed + trial index each); identical output for any thread count."""
    scheme = build_scheme(cfg)
    trials = range(cfg.trials)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda t: trial_records(cfg, t, scheme), trials))
    else:
        chunks = [trial_records(cfg, t, scheme) for t in trials]
    return ErrorReport(scheme.label(), [row for chunk in chunks for row in chunk])

"""YAML experiment configs.

Grammar (all keys optional except ``scheme``)::

    scheme: group_sac          # matdot | eps_amd | group_sac | ortho_matdot | lagrange
                               # | layer_sac_ortho | layer_sac_lagrange
    k: 8
    n: 24                      # number of workers
    dims: [40, 800, 40]        # N_x, N_z, N_y
    groups: [2, 4, 2]          # group_sac only; must sum to k
    anchors: [1, 2, ...]       # lagrange / layer_sac_lagrange
    cluster_sizes: [3, 3, ...] # layer_sac_*; default N/K each
    eval: complex_circle       # complex_circle | equal_real | chebyshev_roots | cluster
    epsilon: 0.15
    input: iid                 # or {model: correlated, lambda: 1000}
    beta: one                  # one | unbiased | oracle | case_correlated | <number>
    trials: 100
    seed: 0
    shuffle: true
    sweep:                     # at most one axis
      epsilon: [0.001, 0.01]   # or lambda: [...] or scheme: [name | {scheme: name, ...}]
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import yaml

from .simulator import ConfigError, ExperimentConfig

_KEYMAP = {
    "scheme": "scheme", "k": "k", "n": "n_workers", "dims": "dims", "groups": "groups",
    "anchors": "anchors", "cluster_sizes": "cluster_sizes", "eval": "eval_kind",
    "epsilon": "epsilon", "beta": "beta", "trials": "trials", "seed": "seed",
    "shuffle": "shuffle",
}
SWEEP_AXES = ("epsilon", "lambda", "scheme")


class ConfigParseError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    base: ExperimentConfig
    axis: str | None = None
    values: tuple = ()

    def points(self) -> list[tuple[str, ExperimentConfig]]:
        """(sweep label, config) pairs in sweep order; one pair without a sweep."""
        if self.axis is None:
            return [("", self.base)]
        return [(_label(self.axis, v), _apply(self.base, self.axis, v)) for v in self.values]

    def with_overrides(self, **kw) -> "SweepSpec":
        kw = {k: v for k, v in kw.items() if v is not None}
        if not kw:
            return self
        base = replace(self.base, **kw)
        return SweepSpec(base, self.axis, self.values)


def _label(axis: str, value) -> str:
    if axis == "scheme":
        return value if isinstance(value, str) else value["scheme"]
    return repr(float(value))


def _apply(base: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    try:
        if axis == "epsilon":
            return replace(base, epsilon=float(value))
        if axis == "lambda":
            return replace(base, lam=float(value))
        over = {"scheme": value} if isinstance(value, str) else dict(value)
        fields = _fields_from_mapping(over, "sweep.scheme entry")
        if "eval_kind" not in fields:
            fields.setdefault("eval_kind", None)
            fields.setdefault("epsilon", None)
        return replace(base, **fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sweep {axis}={value!r}: {exc}") from exc


def _fields_from_mapping(data: dict, where: str) -> dict:
    out = {}
    for key, val in data.items():
        if key == "input":
            out.update(_input_fields(val))
        elif key in _KEYMAP:
            out[_KEYMAP[key]] = val
        else:
            raise ConfigParseError(f"{where}: unknown field {key!r}")
    return out


def _input_fields(val) -> dict:
    if val in ("iid", None):
        return {"input_model": "iid"}
    if isinstance(val, dict) and val.get("model") == "correlated":
        extra = set(val) - {"model", "lambda"}
        if extra:
            raise ConfigParseError(f"input: unknown field(s) {sorted(extra)}")
        return {"input_model": "correlated", "lam": float(val.get("lambda", 0.0))}
    raise ConfigParseError("input must be 'iid' or {model: correlated, lambda: <number>}")


def parse_config(text: str) -> SweepSpec:
    """Parse and validate a YAML experiment config."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigParseError(f"malformed config{where}: {getattr(exc, 'problem', exc)}") from exc
    if not isinstance(data, dict):
        raise ConfigParseError("config must be a mapping of fields")
    data = dict(data)
    sweep = data.pop("sweep", None)
    if "scheme" not in data:
        raise ConfigParseError("missing required field 'scheme'")
    fields = _fields_from_mapping(data, "config")
    try:
        base = ExperimentConfig(**fields)
    except TypeError as exc:
        raise ConfigParseError(str(exc)) from exc

    axis, values = None, ()
    if sweep is not None:
        if not isinstance(sweep, dict) or len(sweep) != 1:
            raise ConfigParseError(f"sweep must name exactly one axis from {SWEEP_AXES}")
        (axis, values), = sweep.items()
        if axis not in SWEEP_AXES:
            raise ConfigParseError(f"sweep axis {axis!r} is not one of {SWEEP_AXES}")
        if not isinstance(values, list) or not values:
            raise ConfigParseError(f"sweep {axis} list must be non-empty")
        values = tuple(values)
    spec = SweepSpec(base, axis, values)
    spec.points()  # validates every sweep point
    return spec


def load_config(path) -> SweepSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

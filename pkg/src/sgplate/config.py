"""Experiment configuration: YAML file -> validated dataclasses.

Schema (nested keys; only ``experiment`` is always required)::

    experiment: solve | convergence | carleman-sweep | uc-lab | verify
    seed: 0
    domain:         {kind: disk, R: 1.0}  |  {kind: rectangle, a, b, exponent: 8}
                    |  {kind: mapped, base: [a, b], map: ["x1", "x2"]}
                    optional r0, M0, M1
    material:       {mu: 1, lam: 1, t: 1, l0: 1, l1: 1, l2: 1, r0: 1,
                     smoothness: "C2,1", q9_fraction: 0}
    discretization: {p: 4, n_el: 8, quad_order: null}
    data:           {source: synthesize, u_star: "x1**3", samples: 1024}
                    | {source: csv, path: data.csv}
                    | {source: analytic, Vhat: "0", Mn_hat: "1", Mnh_hat: "0"}   (expressions in s)
    convergence:    {n_el: [4, 8, 16, 32], u_star: "...", extra_quad: 2}
    carleman:       {orders: [1, 2, 3], epsilon: {1: 0.5, 2: 0.5, 3: 0.2}, tau_bar: 8,
                     tau_count: 9, R1: 0.5, doubling_r: null}
    uc_lab:         {R1: 0.5, fields: ["1", "x1", ...], solver_outputs: ["x1**3"],
                     r: null, s: null, caccioppoli_r: 0.25}
    output:         {grid: 41, export_matrix: false}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

EXPERIMENTS = ("solve", "convergence", "carleman-sweep", "uc-lab", "verify")


@dataclass(frozen=True)
class DiscretizationConfig:
    p: int
    n_el: int = 8  # required for solve; convergence takes its meshes from convergence.n_el
    quad_order: int | None = None


@dataclass(frozen=True)
class DataConfig:
    source: str = "synthesize"
    u_star: str | None = None
    path: str | None = None
    Vhat: str = "0"
    Mn_hat: str = "0"
    Mnh_hat: str = "0"
    samples: int = 1024


@dataclass(frozen=True)
class ConvergenceConfig:
    n_el: tuple = (4, 8, 16, 32)
    u_star: str | None = None
    extra_quad: int = 2


@dataclass(frozen=True)
class CarlemanConfig:
    orders: tuple = (1, 2, 3)
    epsilon: dict = field(default_factory=lambda: {1: 0.5, 2: 0.5, 3: 0.2})
    tau_bar: float = 8.0
    tau_count: int = 9
    R1: float = 0.5
    doubling_r: float | None = None


@dataclass(frozen=True)
class UCLabConfig:
    R1: float = 0.5
    fields: tuple = ("1", "x1", "re(z^2)", "re(z^3)", "re(z^4)")
    solver_outputs: tuple = ()
    r: float | None = None
    s: float | None = None
    caccioppoli_r: float = 0.25


@dataclass(frozen=True)
class OutputConfig:
    grid: int = 41
    export_matrix: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    domain: dict = field(default_factory=lambda: {"kind": "disk", "R": 1.0})
    material: dict = field(default_factory=lambda: {"mu": 1, "lam": 1})
    discretization: DiscretizationConfig | None = None
    data: DataConfig = field(default_factory=DataConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    carleman: CarlemanConfig = field(default_factory=CarlemanConfig)
    uc_lab: UCLabConfig = field(default_factory=UCLabConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def sha256(self) -> str:
        return config_hash(self.raw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("raw")
        return d


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _section(raw: dict, key: str, cls, required=(), where=None):
    sub = raw.get(key)
    if sub is None:
        if required:
            raise ConfigError(f"missing section '{key}' (needs {', '.join(required)})")
        return cls()
    if not isinstance(sub, dict):
        raise ConfigError(f"section '{key}' must be a mapping")
    for name in required:
        if name not in sub:
            raise ConfigError(f"missing key '{key}.{name}'")
    allowed = set(cls.__dataclass_fields__)
    unknown = set(sub) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{key}': {', '.join(sorted(map(str, unknown)))}")
    kwargs = {}
    for name, value in sub.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad section '{key}': {exc}") from None


def _check_types(cfg: ExperimentConfig):
    d = cfg.discretization
    if d is not None:
        if not isinstance(d.p, int) or not isinstance(d.n_el, int):
            raise ConfigError("discretization.p and discretization.n_el must be integers")
        if d.quad_order is not None and not isinstance(d.quad_order, int):
            raise ConfigError("discretization.quad_order must be an integer")
    if cfg.data.source not in ("synthesize", "csv", "analytic"):
        raise ConfigError("data.source must be one of synthesize, csv, analytic")
    if cfg.data.source == "synthesize" and cfg.experiment == "solve" and not cfg.data.u_star:
        raise ConfigError("missing key 'data.u_star' for data.source = synthesize")
    if cfg.data.source == "csv" and not cfg.data.path:
        raise ConfigError("missing key 'data.path' for data.source = csv")
    if "kind" not in cfg.domain:
        raise ConfigError("missing key 'domain.kind'")
    if cfg.domain["kind"] not in ("disk", "rectangle", "mapped"):
        raise ConfigError("domain.kind must be disk, rectangle or mapped")
    for o in cfg.carleman.orders:
        if o not in (1, 2, 3):
            raise ConfigError("carleman.orders entries must be 1, 2 or 3")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed must be an integer")


def parse_config(raw: dict, seed: int | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping at the top level")
    raw = dict(raw)
    if seed is not None:
        raw["seed"] = seed
    exp = raw.get("experiment")
    if exp is None:
        raise ConfigError("missing key 'experiment'")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
    known = {"experiment", "seed", "domain", "material", "discretization", "data", "convergence", "carleman",
             "uc_lab", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(sorted(map(str, unknown)))}")
    needs_disc = exp in ("solve",)
    disc = _section(raw, "discretization", DiscretizationConfig,
                    required=("p", "n_el") if needs_disc else ()) if (needs_disc or "discretization" in raw) else None
    if exp == "convergence" and disc is None:
        raise ConfigError("missing section 'discretization' (needs p)")
    if exp == "convergence" and "p" not in raw["discretization"]:
        raise ConfigError("missing key 'discretization.p'")
    domain = raw.get("domain", {"kind": "disk", "R": 1.0})
    material = raw.get("material", {"mu": 1, "lam": 1})
    if not isinstance(domain, dict) or not isinstance(material, dict):
        raise ConfigError("'domain' and 'material' must be mappings")
    carleman = raw.get("carleman") or {}
    if "epsilon" in carleman:
        eps = carleman["epsilon"]
        if isinstance(eps, (int, float)):
            eps = {o: float(eps) for o in carleman.get("orders", (1, 2, 3))}
        carleman = {**carleman, "epsilon": {int(k): float(v) for k, v in eps.items()}}
    raw_c = {**raw, "carleman": carleman} if carleman else raw
    cfg = ExperimentConfig(
        experiment=exp,
        seed=raw.get("seed", 0),
        domain=domain,
        material=material,
        discretization=disc,
        data=_section(raw, "data", DataConfig),
        convergence=_section(raw, "convergence", ConvergenceConfig),
        carleman=_section(raw_c, "carleman", CarlemanConfig),
        uc_lab=_section(raw, "uc_lab", UCLabConfig),
        output=_section(raw, "output", OutputConfig),
        raw=raw,
    )
    _check_types(cfg)
    return cfg


def load_config(path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    return parse_config(raw or {}, seed)

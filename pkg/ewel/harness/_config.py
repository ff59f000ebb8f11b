# TOML experiment configs decoded into strict msgspec Structs.

import hashlib
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import msgspec
import orjson

from ..coefficients import CoefficientField, Regime, make_model
from ..exceptions import ConfigurationError
from ..mollifier import DEFAULT_NODES
from ..weak_error import TestFunction, make_test_function

SEED_ENV = "EWEL_SEED"

ExperimentKind = Literal[
    "weak_error_sweep",
    "density_sweep",
    "mollifier_scan",
    "parametrix_check",
    "discrete_gap",
]


class _Config(msgspec.Struct, forbid_unknown_fields=True, omit_defaults=True):
    pass


class ModelConfig(_Config):
    name: str
    params: Dict[str, Any] = {}
    regime: Optional[Literal["holder", "piecewise_smooth"]] = None


class GridConfig(_Config):
    """Step sizes are given as step counts over [0, horizon]."""

    steps: List[int]
    horizon: float = 1.0
    refinement_factor: int = 64

    @property
    def h_list(self) -> List[float]:
        return [self.horizon / n for n in self.steps]


class TestFunctionConfig(_Config):
    __test__ = False

    kind: str
    form: Optional[str] = None
    beta: Optional[float] = None
    domain: Optional[Dict[str, Any]] = None
    delta: Optional[float] = None
    radius: Optional[float] = None
    rate: Optional[float] = None


class SampleGridConfig(_Config):
    radius: float = 3.0
    resolution: int = 41
    time_resolution: int = 5


class MollifierConfig(_Config):
    kernel: Literal["bump"] = "bump"
    quadrature_nodes: int = DEFAULT_NODES
    epsilons: List[float] = []
    epsilon: Optional[Union[float, Literal["schedule"]]] = None
    eta: Optional[float] = None
    q: Optional[float] = None
    orders: List[int] = msgspec.field(default_factory=lambda: [1])
    horizon: float = 1.0
    grid: Optional[SampleGridConfig] = None


class DensityConfig(_Config):
    mode: Literal["scheme_vs_fine", "decomposition"] = "scheme_vs_fine"
    y_points: List[List[float]] = []
    y_distances: Optional[List[float]] = None
    bandwidth: Optional[float] = None
    bandwidth_scale: float = 0.5


class ParametrixConfig(_Config):
    s: float = 0.0
    t: float = 1.0
    x: List[float] = msgspec.field(default_factory=lambda: [0.0])
    y_points: List[List[float]] = []
    reference_points: List[List[float]] = []
    r_max: int = 4
    mode: Literal["continuous", "discrete", "euler"] = "continuous"
    steps: List[int] = []
    euler_leg: bool = False
    oracle: Optional[Literal["gaussian", "ou"]] = None
    time_nodes: Optional[int] = None
    space_nodes: Optional[int] = None


class AcceptanceConfig(_Config):
    min_slope: Optional[float] = None
    max_abs_z: Optional[float] = None
    abs_tol: float = 1e-12
    require_decreasing: bool = False
    max_bias_fraction: Optional[float] = None
    ratio_range: Optional[List[float]] = None
    deriv_ratio_range: Optional[List[float]] = None
    lq_ratio_tolerance: Optional[float] = None
    rel_tol: Optional[float] = None
    max_higher_term: Optional[float] = None
    require_term_decay: bool = False
    max_component_z: Optional[float] = None
    require_monotone_gap: bool = False
    max_euler_z: Optional[float] = None


class ExperimentConfig(_Config):
    name: str
    kind: ExperimentKind
    seed: int
    model: ModelConfig
    x0: List[float] = msgspec.field(default_factory=lambda: [0.0])
    m_paths: int = 10_000
    output_dir: Optional[str] = None
    grid: Optional[GridConfig] = None
    test_functions: List[TestFunctionConfig] = []
    mollifier: Optional[MollifierConfig] = None
    density: Optional[DensityConfig] = None
    parametrix: Optional[ParametrixConfig] = None
    acceptance: AcceptanceConfig = msgspec.field(default_factory=AcceptanceConfig)

    def build_model(self) -> CoefficientField:
        field = make_model(self.model.name, self.model.params)
        if self.model.regime is not None and Regime(self.model.regime) is not field.regime:
            raise ConfigurationError(
                f"model {self.model.name!r} is {field.regime.value}, config declares {self.model.regime}",
                context={"field": "$.model.regime"},
            )
        return field

    def build_test_functions(self, dim: int) -> List[TestFunction]:
        return [
            make_test_function({k: v for k, v in msgspec.structs.asdict(tf).items() if v is not None}, dim)
            for tf in self.test_functions
        ]


def _require(value: Any, field: str, kind: str) -> None:
    if value is None:
        raise ConfigurationError(f"experiment kind {kind!r} needs a [{field}] table", context={"field": f"$.{field}"})


def check_config(config: ExperimentConfig) -> CoefficientField:
    """Semantic checks beyond the schema; returns the built model."""
    field = config.build_model()
    kind = config.kind
    if len(config.x0) != field.dim:
        raise ConfigurationError(
            f"x0 has {len(config.x0)} coordinate(s) for a {field.dim}-dimensional model", context={"field": "$.x0"}
        )
    if config.m_paths < 2:
        raise ConfigurationError("m_paths must be at least 2", context={"field": "$.m_paths"})
    if kind in ("weak_error_sweep", "density_sweep"):
        _require(config.grid, "grid", kind)
        if not config.grid.steps:
            raise ConfigurationError("grid.steps is empty", context={"field": "$.grid.steps"})
    if kind == "weak_error_sweep":
        if not config.test_functions:
            raise ConfigurationError(
                "weak_error_sweep needs at least one test function", context={"field": "$.test_functions"}
            )
        config.build_test_functions(field.dim)
    if kind == "density_sweep":
        _require(config.density, "density", kind)
        if not config.density.y_points:
            raise ConfigurationError("density.y_points is empty", context={"field": "$.density.y_points"})
        if config.density.mode == "decomposition":
            _require(config.mollifier, "mollifier", kind)
            if config.mollifier.epsilon is None:
                raise ConfigurationError(
                    "decomposition mode needs mollifier.epsilon", context={"field": "$.mollifier.epsilon"}
                )
    if kind == "mollifier_scan":
        _require(config.mollifier, "mollifier", kind)
        if len(config.mollifier.epsilons) < 1:
            raise ConfigurationError("mollifier.epsilons is empty", context={"field": "$.mollifier.epsilons"})
        q = config.mollifier.q
        if q is not None and not q > field.dim:
            raise ConfigurationError(
                f"mollifier.q must exceed the dimension {field.dim}, got {q}", context={"field": "$.mollifier.q"}
            )
    if kind in ("parametrix_check", "discrete_gap"):
        _require(config.parametrix, "parametrix", kind)
        if not config.parametrix.y_points:
            raise ConfigurationError("parametrix.y_points is empty", context={"field": "$.parametrix.y_points"})
        needs_steps = kind == "discrete_gap" or config.parametrix.mode != "continuous"
        if needs_steps and not config.parametrix.steps:
            raise ConfigurationError("parametrix.steps is empty", context={"field": "$.parametrix.steps"})
        if config.parametrix.euler_leg and (kind != "discrete_gap" or config.parametrix.s != 0.0):
            raise ConfigurationError(
                "parametrix.euler_leg needs a discrete_gap experiment starting at s = 0",
                context={"field": "$.parametrix.euler_leg"},
            )
    return field


def decode_config(data: Union[bytes, str], source: str = "<config>") -> ExperimentConfig:
    try:
        return msgspec.toml.decode(data, type=ExperimentConfig)
    except msgspec.ValidationError as exc:
        raise ConfigurationError(f"{source}: {exc}", context={"source": source}) from exc
    except msgspec.DecodeError as exc:
        raise ConfigurationError(f"{source}: malformed TOML: {exc}", context={"source": source}) from exc


def load_config(path: Union[str, Path], env: Optional[Dict[str, str]] = None) -> ExperimentConfig:
    """Read, decode and apply the EWEL_SEED override."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}", context={"source": str(path)}) from exc
    config = decode_config(data, str(path))
    env = os.environ if env is None else env
    override = env.get(SEED_ENV)
    if override:
        try:
            seed = int(override)
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV}={override!r} is not an integer") from None
        config = msgspec.structs.replace(config, seed=seed)
    return config


def canonical_bytes(config: ExperimentConfig) -> bytes:
    return orjson.dumps(msgspec.to_builtins(config), option=orjson.OPT_SORT_KEYS)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(canonical_bytes(config)).hexdigest()

"""Declarative run configuration: TOML load/dump and eager validation.

A config file has four sections; drift/diffusion/Lyapunov entries are
expression strings in the grammar of :mod:`ftstab.expr`:

    [model]
    dim = 1
    brownian_dim = 1
    drift = ["-1/2*spow(x1,1/3)"]
    diffusion = [["spow(x1,2/3)"]]
    name = "ex1-case1"

    [lyapunov]
    v = "x1^2"            # optional: u = "..."

    [certificate]
    k_family = "power"    # or "powersum" (needs alpha)
    gamma = 0.6666666666666666
    # optional: c, alpha, r_min, r_max, n_levels, n_dirs, n_random

    [simulation]
    x0 = [1.2]
    dt = 1e-4
    t_max = 25.408
    absorb_eps = 1e-5
    n_paths = 400
    seed = 0
"""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .certify import Gauge, PowerGauge, PowerSumGauge, SampleDomain
from .expr import Expr, ParseError, parse
from .lyap import SdeModel, validate_model
from .sim import SimParams


class ConfigError(Exception):
    pass


@dataclass
class ModelConfig:
    dim: int
    brownian_dim: int
    drift: list[str]
    diffusion: list[list[str]]
    name: str = ""


@dataclass
class LyapunovConfig:
    v: str
    u: Optional[str] = None


@dataclass
class CertificateConfig:
    k_family: str = "power"
    gamma: float = 2 / 3
    alpha: Optional[float] = None
    c: Optional[float] = None
    r_min: float = 1e-6
    r_max: float = 1e3
    n_levels: int = 64
    n_dirs: int = 256
    n_random: int = 1024


@dataclass
class SimulationConfig:
    x0: list[float]
    dt: float = 1e-4
    t_max: float = 10.0
    absorb_eps: float = 1e-5
    n_paths: int = 400
    seed: int = 0
    output_stride: int = 100


@dataclass
class RunConfig:
    model: ModelConfig
    lyapunov: LyapunovConfig
    certificate: CertificateConfig
    simulation: SimulationConfig

    # -- builders -----------------------------------------------------------

    def build_model(self) -> SdeModel:
        m = self.model
        try:
            drift = tuple(parse(s, m.dim) for s in m.drift)
            diffusion = tuple(
                tuple(parse(s, m.dim) for s in row) for row in m.diffusion
            )
        except ParseError as e:
            raise ConfigError(f"model expression: {e}") from e
        return SdeModel(m.dim, m.brownian_dim, drift, diffusion, m.name)

    def v_expr(self) -> Expr:
        try:
            return parse(self.lyapunov.v, self.model.dim)
        except ParseError as e:
            raise ConfigError(f"lyapunov.v: {e}") from e

    def u_expr(self) -> Optional[Expr]:
        if self.lyapunov.u is None:
            return None
        try:
            return parse(self.lyapunov.u, self.model.dim)
        except ParseError as e:
            raise ConfigError(f"lyapunov.u: {e}") from e

    def gauge(self) -> Gauge:
        cc = self.certificate
        try:
            if cc.k_family == "power":
                return PowerGauge(cc.gamma)
            if cc.k_family == "powersum":
                if cc.alpha is None:
                    raise ConfigError("certificate.alpha is required for powersum")
                return PowerSumGauge(cc.gamma, cc.alpha)
        except ValueError as e:
            raise ConfigError(f"certificate: {e}") from e
        raise ConfigError(f"unknown k_family {cc.k_family!r} (power or powersum)")

    def domain(self) -> SampleDomain:
        cc = self.certificate
        return SampleDomain(cc.r_min, cc.r_max, cc.n_levels, cc.n_dirs,
                            cc.n_random, self.simulation.seed)

    def sim_params(self) -> SimParams:
        s = self.simulation
        return SimParams(s.dt, s.t_max, s.absorb_eps, s.output_stride)

    def validate(self) -> None:
        """Parse every expression eagerly and check the model invariants."""
        model = self.build_model()
        report = validate_model(model)
        if not report.valid:
            raise ConfigError("; ".join(report.violations))
        self.v_expr()
        self.u_expr()
        self.gauge()
        s = self.simulation
        if len(s.x0) != self.model.dim:
            raise ConfigError(
                f"simulation.x0 has {len(s.x0)} components, model dim is {self.model.dim}"
            )
        self.sim_params()  # raises on bad dt/t_max/eps
        self.domain()


# ---------------------------------------------------------------------------
# loading


_SECTIONS = {
    "model": (ModelConfig, True),
    "lyapunov": (LyapunovConfig, True),
    "certificate": (CertificateConfig, False),
    "simulation": (SimulationConfig, True),
}


def _build_section(name: str, cls, data: dict):
    fields = {f: v for f, v in data.items()}
    known = set(cls.__dataclass_fields__)
    unknown = set(fields) - known
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**fields)
    except TypeError as e:
        raise ConfigError(f"[{name}] {e}") from e


def load_config(path: str) -> RunConfig:
    """Load and eagerly validate a TOML run configuration."""
    try:
        with open(path, "rb") as fp:
            raw = tomllib.load(fp)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e

    sections = {}
    for name, (cls, required) in _SECTIONS.items():
        if name not in raw:
            if required:
                raise ConfigError(f"{path}: missing [{name}] section")
            sections[name] = cls()
        else:
            sections[name] = _build_section(name, cls, raw[name])
    unknown = set(raw) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"{path}: unknown sections: {', '.join(sorted(unknown))}")
    cfg = RunConfig(**sections)
    try:
        cfg.validate()
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e
    return cfg


# ---------------------------------------------------------------------------
# dumping (minimal TOML writer for the config subset: strings, numbers,
# booleans, flat arrays and arrays of string arrays)


def _toml_value(v) -> str:
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_config(cfg: RunConfig) -> str:
    lines: list[str] = []
    for section, obj in (
        ("model", cfg.model),
        ("lyapunov", cfg.lyapunov),
        ("certificate", cfg.certificate),
        ("simulation", cfg.simulation),
    ):
        lines.append(f"[{section}]")
        for key, value in asdict(obj).items():
            if value is None:
                continue
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")
    return "\n".join(lines)


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w") as fp:
        fp.write(dumps_config(cfg))

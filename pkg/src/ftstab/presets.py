"""Built-in example systems, each with a documented certificate route.

Presets carry simulation defaults sized so that `estimate` finishes in
tens of seconds; horizons are ten times the certified settling bound
where absorption statistics matter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .config import (
    CertificateConfig,
    LyapunovConfig,
    ModelConfig,
    RunConfig,
    SimulationConfig,
)


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    route: str
    config: RunConfig


def _ex1(case: int) -> RunConfig:
    # scalar dx = (-c1 x^p - 1/2 x^(1/3)) dt + x^(2/3) dB, V = x^2, gamma = 2/3
    drift = {
        1: "-1/2*spow(x1,1/3)",
        2: "-x1 - 1/2*spow(x1,1/3)",
        3: "-spow(x1,3) - 1/2*spow(x1,1/3)",
    }[case]
    return RunConfig(
        model=ModelConfig(
            dim=1, brownian_dim=1,
            drift=[drift], diffusion=[["spow(x1,2/3)"]],
            name=f"ex1-case{case}",
        ),
        lyapunov=LyapunovConfig(v="x1^2"),
        certificate=CertificateConfig(k_family="power", gamma=2 / 3),
        simulation=SimulationConfig(
            x0=[1.2], dt=1e-4, t_max=25.408, absorb_eps=1e-5, n_paths=400, seed=0
        ),
    )


def _ex2() -> RunConfig:
    return RunConfig(
        model=ModelConfig(
            dim=2, brownian_dim=2,
            drift=["-1/8*spow(x1,1/3) + x2", "-x1 - 1/8*spow(x2,1/3)"],
            diffusion=[["1/2*spow(x1,2/3)", "0"], ["0", "1/2*spow(x2,2/3)"]],
            name="ex2",
        ),
        lyapunov=LyapunovConfig(v="x1^2 + x2^2"),
        certificate=CertificateConfig(k_family="power", gamma=2 / 3),
        simulation=SimulationConfig(
            x0=[1.5, 5.0], dt=1e-4, t_max=30.0, absorb_eps=1e-5, n_paths=150, seed=0
        ),
    )


def _ex3() -> RunConfig:
    return RunConfig(
        model=ModelConfig(
            dim=1, brownian_dim=1,
            drift=["-1/2*spow(x1,3/5)"], diffusion=[["spow(x1,4/5)"]],
            name="ex3",
        ),
        lyapunov=LyapunovConfig(v="abs(x1)^3", u="x1^2"),
        certificate=CertificateConfig(k_family="power", gamma=13 / 15),
        simulation=SimulationConfig(
            x0=[2.0], dt=1e-4, t_max=41.235, absorb_eps=1e-5, n_paths=400, seed=0
        ),
    )


def _det_cubicroot() -> RunConfig:
    return RunConfig(
        model=ModelConfig(
            dim=1, brownian_dim=1,
            drift=["-spow(x1,1/3)"], diffusion=[["0"]],
            name="det-cubicroot",
        ),
        lyapunov=LyapunovConfig(v="x1^2"),
        certificate=CertificateConfig(k_family="power", gamma=2 / 3, c=2.0),
        simulation=SimulationConfig(
            x0=[1.0], dt=1e-4, t_max=3.0, absorb_eps=1e-6, n_paths=100, seed=0
        ),
    )


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset(
            "ex1-case1",
            "scalar system with zero generator for V = x^2: the noise term alone "
            "certifies finite-time stability; drift -1/2 x^(1/3), diffusion x^(2/3)",
            "single-function",
            _ex1(1),
        ),
        Preset(
            "ex1-case2",
            "ex1 plus linear drift -x: the generator equals -2V, which no classical "
            "power criterion accepts; maximal feasible c is approached as x -> 0",
            "single-function",
            _ex1(2),
        ),
        Preset(
            "ex1-case3",
            "ex1 plus cubic drift -x^3: the generator equals -2V^2 (exponent above "
            "one), again outside the classical criterion",
            "single-function",
            _ex1(3),
        ),
        Preset(
            "ex2",
            "planar rotation with weak odd-root damping and diagonal noise; the "
            "generator of V = x1^2 + x2^2 vanishes identically and the maximal "
            "feasible c sits on the diagonal |x1| = |x2|",
            "single-function",
            _ex2(),
        ),
        Preset(
            "ex3",
            "scalar system where V = |x|^3 has a positive-definite generator but "
            "still satisfies the gauge condition; U = x^2 with LU = 0 supplies the "
            "supermartingale half of the certificate",
            "two-function",
            _ex3(),
        ),
        Preset(
            "det-cubicroot",
            "deterministic dx = -x^(1/3) dt: settles from x0 in exactly "
            "(3/2) x0^(2/3); the analytic oracle for simulator and bound checks",
            "single-function",
            _det_cubicroot(),
        ),
    ]
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown example {name!r}; available: {known}") from None


def preset_config(name: str) -> RunConfig:
    """A fresh, independently mutable copy of the preset's config."""
    p = get_preset(name)
    cfg = p.config
    return replace(
        cfg,
        model=replace(cfg.model, drift=list(cfg.model.drift),
                      diffusion=[list(r) for r in cfg.model.diffusion]),
        lyapunov=replace(cfg.lyapunov),
        certificate=replace(cfg.certificate),
        simulation=replace(cfg.simulation, x0=list(cfg.simulation.x0)),
    )

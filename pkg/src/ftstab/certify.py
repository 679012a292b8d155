"""Sampled finite-time stability certificates and settling-time bounds.

A certificate combines a nonpositive-generator check with the gauge
condition

    K(V(x)) [ c K(V(x)) + LV(x) ]  <=  K'(V(x))/2 |(dV/dx) g(x)|^2

for a gauge K with K > 0, K' >= 0 on (0, inf) and integrable 1/K at 0.
Both sides vanish at the origin for the homogeneous systems of interest,
so the checker works with the normalized margin

    m(x) = [ K'(V)/2 |dV/dx g|^2 - K(V) LV ] / K(V)^2  -  c

which is in units of c and stays finite as x -> 0.  Conditions are
verified on a deterministic log-radial sample of the punctured domain
plus seeded random points: a falsification-oriented check ("sampled
certificate"), not a proof.

When it passes, the expected time to hit the origin is bounded by

    E tau <= (1/c) * integral_0^{V(x0)} ds / K(s),

with closed form V(x0)^(1-gamma) / (c (1-gamma)) for K(s) = s^gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.integrate import quad

from .expr import Expr, compile_evaluator, evaluate, to_canonical, to_text
from .lyap import (
    LyapunovCandidate,
    SdeModel,
    diffusion_quadratic,
    generator,
    validate_model,
)


class CertifyError(Exception):
    pass


class DivergentIntegralError(CertifyError):
    pass


# ---------------------------------------------------------------------------
# gauge functions


@dataclass(frozen=True)
class PowerGauge:
    """K(s) = s^gamma, 0 < gamma < 1 (the classical comparison gauge)."""

    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0,1), got {self.gamma}")

    def value(self, s):
        return np.asarray(s) ** self.gamma

    def derivative(self, s):
        return self.gamma * np.asarray(s) ** (self.gamma - 1.0)

    def recip_integral(self, v: float) -> float:
        if math.isinf(v):
            raise DivergentIntegralError(
                "integral of s^-gamma over (0, inf) diverges; use a power-sum gauge "
                "with alpha > 1 for an initial-state-independent bound"
            )
        return v ** (1.0 - self.gamma) / (1.0 - self.gamma)

    def describe(self) -> str:
        return f"K(s) = s^{self.gamma:g}"


@dataclass(frozen=True)
class PowerSumGauge:
    """K(s) = s^gamma + s^alpha with 0 < gamma < 1 <= alpha.

    For alpha > 1, integral_0^inf ds/K(s) is finite, so the settling bound
    becomes independent of the initial state.
    """

    gamma: float
    alpha: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0,1), got {self.gamma}")
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")

    def value(self, s):
        s = np.asarray(s)
        return s**self.gamma + s**self.alpha

    def derivative(self, s):
        s = np.asarray(s)
        return self.gamma * s ** (self.gamma - 1.0) + self.alpha * s ** (self.alpha - 1.0)

    def recip_integral(self, v: float) -> float:
        # substitute u = s^(1-gamma): bounded integrand 1/(1+u^q)
        g = self.gamma
        q = (self.alpha - g) / (1.0 - g)
        if math.isinf(v):
            if q <= 1.0:
                raise DivergentIntegralError(
                    "integral of 1/K over (0, inf) diverges for alpha = 1"
                )
            upper = np.inf
        else:
            upper = v ** (1.0 - g)
        val, err = quad(lambda u: 1.0 / (1.0 + u**q), 0.0, upper,
                        epsabs=1e-14, epsrel=1e-10, limit=200)
        return val / (1.0 - g)

    def describe(self) -> str:
        return f"K(s) = s^{self.gamma:g} + s^{self.alpha:g}"


Gauge = Union[PowerGauge, PowerSumGauge]


def recip_integral(K: Gauge, v: float) -> float:
    """integral_0^v ds / K(s); v may be inf for a power-sum gauge, alpha > 1."""
    if v < 0:
        raise ValueError(f"v must be >= 0, got {v}")
    if v == 0:
        return 0.0
    return K.recip_integral(v)


def settling_bound(K: Gauge, c: float, v0: float) -> float:
    """Expected-settling-time bound (1/c) integral_0^{v0} ds/K(s)."""
    if c <= 0:
        raise ValueError(f"c must be > 0, got {c}")
    return recip_integral(K, v0) / c


# ---------------------------------------------------------------------------
# sample domain


@dataclass(frozen=True)
class SampleDomain:
    """Deterministic discretization of the punctured domain.

    Log-spaced spheres (n_levels radii x n_dirs directions) plus n_random
    seeded points with log-uniform radii.  Never contains the origin.
    """

    r_min: float = 1e-6
    r_max: float = 1e3
    n_levels: int = 64
    n_dirs: int = 256
    n_random: int = 1024
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if min(self.n_levels, self.n_dirs) < 1 or self.n_random < 0:
            raise ValueError("counts must be positive")

    def radii(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.n_levels)

    def directions(self, dim: int) -> np.ndarray:
        if dim == 1:
            return np.array([[1.0], [-1.0]])
        if dim == 2:
            theta = 2.0 * np.pi * np.arange(self.n_dirs) / self.n_dirs
            return np.column_stack([np.cos(theta), np.sin(theta)])
        rng = np.random.default_rng(self.seed)
        d = rng.standard_normal((self.n_dirs, dim))
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    def grid_points(self, dim: int) -> np.ndarray:
        """(n_levels * n_dirs, dim), level-major order."""
        r = self.radii()
        d = self.directions(dim)
        return (r[:, None, None] * d[None, :, :]).reshape(-1, dim)

    def random_points(self, dim: int) -> np.ndarray:
        if self.n_random == 0:
            return np.empty((0, dim))
        rng = np.random.default_rng(self.seed + 1)
        d = rng.standard_normal((self.n_random, dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = np.exp(rng.uniform(np.log(self.r_min), np.log(self.r_max), self.n_random))
        return d * r[:, None]

    def points(self, dim: int) -> np.ndarray:
        return np.vstack([self.grid_points(dim), self.random_points(dim)])


DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# margin reports


@dataclass(frozen=True)
class MarginReport:
    condition: str
    n_samples: int
    n_skipped: int
    min_margin: float
    argmin: Optional[tuple[float, ...]]
    passed: bool
    tolerance: float
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "n_samples": self.n_samples,
            "n_skipped": self.n_skipped,
            "min_margin": self.min_margin,
            "argmin": list(self.argmin) if self.argmin is not None else None,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "note": self.note,
        }


def _finite_mask(*arrays) -> np.ndarray:
    mask = np.ones(arrays[0].shape, dtype=bool)
    for a in arrays:
        mask &= np.isfinite(a)
    return mask


def check_nonpositive_generator(
    model: SdeModel,
    cand: LyapunovCandidate,
    domain: SampleDomain = SampleDomain(),
    tol: float = DEFAULT_TOL,
) -> MarginReport:
    """Sampled check of LW(x) <= 0.

    Pass needs LW(x) <= tol * (1 + |x|^deg) at every sample (deg is the top
    canonical monomial degree) with no singular samples; an exact canonical
    zero short-circuits.  The reported margin is -LW/(1+|LW|).
    """
    lw_form = to_canonical(generator(model, cand))
    if lw_form.is_exact_zero():
        return MarginReport("generator<=0", 0, 0, 0.0, None, True, tol, "exact zero")
    X = domain.points(model.dim)
    f = compile_evaluator(lw_form.expr, model.dim)
    with np.errstate(all="ignore"):
        lw = f(X)
    ok = _finite_mask(lw)
    n_skipped = int((~ok).sum())
    lw_ok = lw[ok]
    deg = lw_form.max_degree() if lw_form.canonical else 0.0
    scale = 1.0 + np.linalg.norm(X[ok], axis=1) ** deg
    margins = -lw_ok / (1.0 + np.abs(lw_ok))
    imin = int(np.argmin(margins))
    passed = bool(np.all(lw_ok <= tol * scale)) and n_skipped == 0
    return MarginReport(
        "generator<=0",
        len(X),
        n_skipped,
        float(margins[imin]),
        tuple(X[ok][imin]),
        passed,
        tol,
    )


@dataclass(frozen=True)
class _GaugeData:
    """Compiled V, LV and |dV/dx g|^2 for repeated margin evaluation."""

    v_expr: Expr
    lv_expr: Expr
    d_expr: Expr
    v_fn: object = field(repr=False, default=None)
    lv_fn: object = field(repr=False, default=None)
    d_fn: object = field(repr=False, default=None)

    @classmethod
    def build(cls, model: SdeModel, cand: LyapunovCandidate) -> "_GaugeData":
        v = cand.expr
        lv = generator(model, cand)
        d = diffusion_quadratic(model, cand)
        return cls(
            v, lv, d,
            compile_evaluator(v, model.dim),
            compile_evaluator(lv, model.dim),
            compile_evaluator(d, model.dim),
        )

    def c_values(self, K: Gauge, X: np.ndarray) -> np.ndarray:
        """c(x) = [K'(V)/2 |dV/dx g|^2 - K(V) LV] / K(V)^2 (largest feasible c)."""
        with np.errstate(all="ignore"):
            v = self.v_fn(X)
            lv = self.lv_fn(X)
            d = self.d_fn(X)
            kv = K.value(v)
            kp = K.derivative(v)
            out = (0.5 * kp * d - kv * lv) / (kv * kv)
        bad = v <= 0
        if np.any(bad & np.isfinite(np.asarray(v))):
            raise CertifyError("V(x) <= 0 at a sample point; not positive definite")
        return out


def check_gauge_condition(
    model: SdeModel,
    cand: LyapunovCandidate,
    K: Gauge,
    c: float,
    domain: SampleDomain = SampleDomain(),
    tol: float = DEFAULT_TOL,
) -> MarginReport:
    """Sampled check of K(V)[cK(V) + LV] <= K'(V)/2 |dV/dx g|^2.

    The margin is normalized to units of c; pass needs margin >= -tol at
    every sample with no singular samples.
    """
    if c <= 0:
        raise ValueError(f"c must be > 0, got {c}")
    data = _GaugeData.build(model, cand)
    X = domain.points(model.dim)
    cx = data.c_values(K, X)
    ok = _finite_mask(cx)
    n_skipped = int((~ok).sum())
    margins = cx[ok] - c
    imin = int(np.argmin(margins))
    passed = bool(np.all(margins >= -tol)) and n_skipped == 0
    return MarginReport(
        "gauge-condition",
        len(X),
        n_skipped,
        float(margins[imin]),
        tuple(X[ok][imin]),
        passed,
        tol,
    )


def check_classical(
    model: SdeModel,
    cand: LyapunovCandidate,
    c: float,
    gamma: float,
    domain: SampleDomain = SampleDomain(),
    tol: float = DEFAULT_TOL,
) -> MarginReport:
    """Sampled check of the classical criterion LV(x) <= -c V(x)^gamma."""
    if c <= 0:
        raise ValueError(f"c must be > 0, got {c}")
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must be in (0,1), got {gamma}")
    v_fn = compile_evaluator(cand.expr, model.dim)
    lv_fn = compile_evaluator(generator(model, cand), model.dim)
    X = domain.points(model.dim)
    with np.errstate(all="ignore"):
        v = v_fn(X)
        lv = lv_fn(X)
        margins = -lv / v**gamma - c
    ok = _finite_mask(margins)
    n_skipped = int((~ok).sum())
    m = margins[ok]
    imin = int(np.argmin(m))
    passed = bool(np.all(m >= -tol)) and n_skipped == 0
    return MarginReport(
        "classical", len(X), n_skipped, float(m[imin]), tuple(X[ok][imin]), passed, tol
    )


# ---------------------------------------------------------------------------
# largest feasible c


@dataclass(frozen=True)
class FeasibleC:
    c_max: float
    argmin: tuple[float, ...]
    feasible: bool
    trend_at_r_min: bool
    trend_at_r_max: bool
    message: str = ""


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(fn, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def max_feasible_c(
    model: SdeModel,
    cand: LyapunovCandidate,
    K: Gauge,
    domain: SampleDomain = SampleDomain(),
) -> FeasibleC:
    """Largest c for which the gauge condition can hold: inf over the domain
    of c(x) = [K'(V)/2 |dV/dx g|^2 - K(V) LV] / K(V)^2.

    One local refinement pass (golden-section over log-radius, then over
    direction for planar systems) polishes the sampled infimum.  Trend flags
    report an infimum that is still decreasing at the radial boundaries.
    """
    data = _GaugeData.build(model, cand)
    dim = model.dim
    radii = domain.radii()
    dirs = domain.directions(dim)
    grid = data.c_values(K, domain.grid_points(dim)).reshape(len(radii), len(dirs))
    rand_pts = domain.random_points(dim)
    rand = data.c_values(K, rand_pts) if len(rand_pts) else np.empty(0)

    with np.errstate(invalid="ignore"):
        level_min = np.nanmin(np.where(np.isfinite(grid), grid, np.nan), axis=1)
    finite_grid = np.isfinite(grid)
    if not finite_grid.any():
        raise CertifyError("gauge margin not evaluable anywhere on the domain")
    gmin_idx = np.unravel_index(
        np.nanargmin(np.where(finite_grid, grid, np.nan)), grid.shape
    )
    c_best = float(grid[gmin_idx])
    best_pt = radii[gmin_idx[0]] * dirs[gmin_idx[1]]
    if rand.size:
        ok = np.isfinite(rand)
        if ok.any() and np.min(rand[ok]) < c_best:
            j = int(np.argmin(np.where(ok, rand, np.inf)))
            c_best = float(rand[j])
            best_pt = rand_pts[j]

    # refinement over log-radius along the argmin direction
    direction = best_pt / np.linalg.norm(best_pt)

    def c_at_radius(logr):
        X = (10.0**logr * direction)[None, :]
        return float(data.c_values(K, X)[0])

    i0 = int(np.argmin(np.abs(radii - np.linalg.norm(best_pt))))
    lo = math.log10(radii[max(0, i0 - 1)])
    hi = math.log10(radii[min(len(radii) - 1, i0 + 1)])
    logr, val = _golden_min(c_at_radius, lo, hi)
    if val < c_best:
        c_best, best_pt = val, 10.0**logr * direction
    r_best = float(np.linalg.norm(best_pt))

    if dim == 2:
        theta0 = math.atan2(best_pt[1], best_pt[0])
        step = 2.0 * np.pi / domain.n_dirs

        def c_at_angle(theta):
            X = np.array([[r_best * math.cos(theta), r_best * math.sin(theta)]])
            return float(data.c_values(K, X)[0])

        theta, val = _golden_min(c_at_angle, theta0 - step, theta0 + step)
        if val < c_best:
            c_best = val
            best_pt = np.array([r_best * math.cos(theta), r_best * math.sin(theta)])
    elif dim >= 3:
        # golden-section along great circles through the argmin direction,
        # one per tangent-basis vector
        d0 = best_pt / np.linalg.norm(best_pt)
        basis = np.linalg.qr(
            np.column_stack([d0, np.eye(dim)[:, : dim - 1]])
        )[0][:, 1:]
        step = 2.0 * np.pi / max(domain.n_dirs, 8)
        for t in basis.T:
            def c_on_circle(theta, t=t, d0=d0):
                d = math.cos(theta) * d0 + math.sin(theta) * t
                return float(data.c_values(K, (r_best * d)[None, :])[0])

            theta, val = _golden_min(c_on_circle, -step, step)
            if val < c_best:
                c_best = val
                d0 = math.cos(theta) * d0 + math.sin(theta) * t
                best_pt = r_best * d0

    # trend of the per-level infimum across the outermost decades
    def trending(levels: np.ndarray, reverse: bool) -> bool:
        seq = levels[::-1] if reverse else levels
        if len(seq) < 2:
            return False
        eps = 1e-9 * (1.0 + abs(seq[0]))
        return bool(seq[0] < seq[-1] - eps and np.all(np.diff(seq) >= -eps))

    decade = radii <= domain.r_min * 10.0
    trend_min = trending(level_min[decade], reverse=False) and bool(
        np.nanargmin(level_min) == 0
    )
    decade_hi = radii >= domain.r_max / 10.0
    trend_max = trending(level_min[decade_hi], reverse=True) and bool(
        np.nanargmin(level_min) == len(level_min) - 1
    )

    feasible = c_best > 0
    msg = "" if feasible else "condition infeasible for any c>0"
    return FeasibleC(c_best, tuple(best_pt), feasible, trend_min, trend_max, msg)


# ---------------------------------------------------------------------------
# certificate orchestration


ROUTE_SINGLE = "single-function"
ROUTE_TWO_FUNCTION = "two-function"


@dataclass(frozen=True)
class CertificateVerdict:
    route: str
    model_name: str
    v_text: str
    u_text: Optional[str]
    gauge: str
    c_used: float
    c_max: Optional[float]
    c_boundary_trend: bool
    reports: dict[str, MarginReport]
    certified: bool
    bound: Optional[float]
    x0: Optional[tuple[float, ...]]
    label: str = "sampled certificate"

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "route": self.route,
            "model": self.model_name,
            "V": self.v_text,
            "U": self.u_text,
            "gauge": self.gauge,
            "c_used": self.c_used,
            "c_max": self.c_max,
            "c_boundary_trend": self.c_boundary_trend,
            "certified": self.certified,
            "expected_settling_bound": self.bound,
            "x0": list(self.x0) if self.x0 is not None else None,
            "reports": {k: r.to_dict() for k, r in self.reports.items()},
        }

    def summary(self) -> str:
        lines = [
            f"{self.label}: {'CERTIFIED' if self.certified else 'NOT CERTIFIED'}"
            f" via {self.route} route",
            f"  model: {self.model_name or '<unnamed>'}",
            f"  V = {self.v_text}" + (f", U = {self.u_text}" if self.u_text else ""),
            f"  gauge: {self.gauge}, c_used = {self.c_used:.6g}"
            + (f" (c_max ~ {self.c_max:.6g})" if self.c_max is not None else ""),
        ]
        if self.c_boundary_trend:
            lines.append("  note: infimum of c(x) still decreasing at a radial boundary")
        for name, rep in self.reports.items():
            lines.append(
                f"  [{'PASS' if rep.passed else 'FAIL'}] {name}: min margin {rep.min_margin:.3e}"
                f" over {rep.n_samples} samples"
                + (f" ({rep.n_skipped} skipped)" if rep.n_skipped else "")
                + (f" [{rep.note}]" if rep.note else "")
            )
        if self.bound is not None:
            lines.append(f"  E[settling time] <= {self.bound:.6g} from x0 = {list(self.x0)}")
        return "\n".join(lines)


def certify(
    model: SdeModel,
    V: Expr,
    *,
    U: Optional[Expr] = None,
    K: Gauge,
    c: Optional[float] = None,
    domain: SampleDomain = SampleDomain(),
    x0=None,
    tol: float = DEFAULT_TOL,
) -> CertificateVerdict:
    """Assemble a finite-time stability certificate.

    With U given, the two-function route checks LU <= 0 on U and the gauge
    condition on V (whose generator may be positive).  Otherwise V serves
    both roles.  When c is omitted, 99% of the sampled maximal feasible c
    is used.  With x0, the expected-settling-time bound is evaluated at
    V(x0).  The classical criterion is reported informationally for a pure
    power gauge; it never gates the verdict.
    """
    report = validate_model(model)
    if not report.valid:
        raise CertifyError(f"invalid model: {'; '.join(report.violations)}")

    v_cand = LyapunovCandidate.from_expr(V, model.dim)
    problems = v_cand.spot_check(require_radially_unbounded=U is None)
    if problems:
        raise CertifyError(f"V fails spot checks: {'; '.join(problems)}")
    u_cand = None
    if U is not None:
        u_cand = LyapunovCandidate.from_expr(U, model.dim)
        problems = u_cand.spot_check(require_radially_unbounded=True)
        if problems:
            raise CertifyError(f"U fails spot checks: {'; '.join(problems)}")

    fc = max_feasible_c(model, v_cand, K, domain)
    if c is None:
        if not fc.feasible:
            c_used = float("nan")
        else:
            c_used = 0.99 * fc.c_max  # headroom against sampling error
    else:
        c_used = c

    reports: dict[str, MarginReport] = {}
    route = ROUTE_TWO_FUNCTION if U is not None else ROUTE_SINGLE
    gen_target = u_cand if u_cand is not None else v_cand
    reports["generator<=0"] = check_nonpositive_generator(model, gen_target, domain, tol)
    certified = reports["generator<=0"].passed

    if c is None and not fc.feasible:
        certified = False
    else:
        reports["gauge-condition"] = check_gauge_condition(
            model, v_cand, K, c_used, domain, tol
        )
        certified = certified and reports["gauge-condition"].passed
        if isinstance(K, PowerGauge):
            reports["classical (informational)"] = check_classical(
                model, v_cand, c_used, K.gamma, domain, tol
            )

    bound = None
    x0_t = None
    if x0 is not None:
        x0_t = tuple(float(v) for v in np.atleast_1d(x0))
        if certified:
            bound = settling_bound(K, c_used, evaluate(V, x0_t))

    return CertificateVerdict(
        route=route,
        model_name=model.name,
        v_text=to_text(V),
        u_text=to_text(U) if U is not None else None,
        gauge=K.describe(),
        c_used=c_used,
        c_max=fc.c_max if fc.feasible else None,
        c_boundary_trend=fc.trend_at_r_min or fc.trend_at_r_max,
        reports=reports,
        certified=certified,
        bound=bound,
        x0=x0_t,
    )

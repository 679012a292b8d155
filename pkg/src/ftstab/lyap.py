"""SDE models and exact infinitesimal-generator computation.

For dx = f(x) dt + g(x) dB with an n-dimensional state and m independent
Brownian components, the generator of a C^2 function V is

    LV = (dV/dx) f + 1/2 Tr{ g^T (d^2V/dx^2) g }

and the noise power seen by V is |(dV/dx) g|^2.  Both are assembled
symbolically and canonicalized, so identities like LV = 0 come out as an
exact zero constant rather than a small number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .expr import (
    Const,
    Expr,
    SingularEvaluationError,
    canonicalize,
    differentiate,
    evaluate,
    max_var_index,
    min_exponent,
    sproduct,
    ssum,
    to_canonical,
)


class DimensionError(Exception):
    pass


@dataclass(frozen=True)
class SdeModel:
    """dx = f(x) dt + g(x) dB(t); f maps R^n -> R^n, g maps R^n -> R^{n x m}."""

    dim: int
    brownian_dim: int
    drift: tuple[Expr, ...]
    diffusion: tuple[tuple[Expr, ...], ...]
    name: str = ""

    def __post_init__(self):
        if self.dim < 1 or self.brownian_dim < 1:
            raise DimensionError("dim and brownian_dim must be >= 1")
        if len(self.drift) != self.dim:
            raise DimensionError(f"drift must have {self.dim} components")
        if len(self.diffusion) != self.dim or any(
            len(row) != self.brownian_dim for row in self.diffusion
        ):
            raise DimensionError(
                f"diffusion must be {self.dim} x {self.brownian_dim}"
            )

    def coefficient_exprs(self) -> list[Expr]:
        return list(self.drift) + [e for row in self.diffusion for e in row]


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def valid(self) -> bool:
        return not self.violations


def _vanishes_at_origin(e: Expr) -> bool:
    """Evaluate at 0 where defined, else check for a canonical constant term."""
    try:
        return evaluate(e, np.zeros(max(1, max_var_index(e)))) == 0.0
    except SingularEvaluationError:
        form = to_canonical(e)
        if form.canonical:
            return all(m.powers for m in form.monomials)
        return False


def validate_model(model: SdeModel) -> ValidationReport:
    """Check variable ranges, f(0) = 0, g(0) = 0, and coefficient regularity.

    Negative exponents in a coefficient are rejected: they are singular at
    the origin, which breaks both continuity and the absorbing simulation.
    """
    violations: list[str] = []
    labels = [f"drift f{i+1}" for i in range(model.dim)] + [
        f"diffusion g{i+1}{j+1}"
        for i in range(model.dim)
        for j in range(model.brownian_dim)
    ]
    for label, e in zip(labels, model.coefficient_exprs()):
        if max_var_index(e) > model.dim:
            violations.append(
                f"{label}: variable index out of range (x{max_var_index(e)} with dim {model.dim})"
            )
            continue
        if min_exponent(e) < 0:
            violations.append(f"{label}: negative exponent, singular at the origin")
            continue
        kind = "f" if label.startswith("drift") else "g"
        if not _vanishes_at_origin(e):
            violations.append(f"{label}: {kind}(0) != 0")
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class LyapunovCandidate:
    """A C^2 candidate with symbolically derived gradient and Hessian."""

    expr: Expr
    dim: int
    gradient: tuple[Expr, ...]
    hessian: tuple[tuple[Expr, ...], ...] = field(repr=False)

    @classmethod
    def from_expr(cls, V: Expr, dim: int) -> "LyapunovCandidate":
        if max_var_index(V) > dim:
            raise DimensionError(
                f"candidate uses x{max_var_index(V)} but dim is {dim}"
            )
        grad = tuple(canonicalize(differentiate(V, i + 1)) for i in range(dim))
        hess = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                h = canonicalize(differentiate(grad[i], j + 1))
                hess[i][j] = h
                hess[j][i] = h  # symmetric by construction
        return cls(V, dim, grad, tuple(tuple(row) for row in hess))

    def spot_check(
        self,
        require_radially_unbounded: bool,
        n_points: int = 1000,
        seed: int = 0,
    ) -> list[str]:
        """Numeric sanity checks: V(0)=0, V>0 on a punctured sample, and
        (optionally) growth along random rays out to radius 1e6.

        These are spot checks, not proofs; certificates carry that caveat.
        """
        problems: list[str] = []
        try:
            v0 = evaluate(self.expr, np.zeros(self.dim))
            if v0 != 0.0:
                problems.append(f"V(0) = {v0!r}, expected 0")
        except SingularEvaluationError:
            problems.append("V is singular at the origin")
            return problems
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((n_points, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = 10.0 ** rng.uniform(-6, 3, n_points)
        pts = dirs * radii[:, None]
        vals = np.array([evaluate(self.expr, p) for p in pts])
        if not np.all(vals > 0):
            bad = pts[int(np.argmin(vals))]
            problems.append(f"V not positive at {bad.tolist()}")
        if require_radially_unbounded:
            ray_dirs = rng.standard_normal((10, self.dim))
            ray_dirs /= np.linalg.norm(ray_dirs, axis=1, keepdims=True)
            radii = 10.0 ** np.arange(7)
            for d in ray_dirs:
                along = [evaluate(self.expr, r * d) for r in radii]
                if not all(b > a for a, b in zip(along, along[1:])):
                    problems.append(
                        f"V not increasing along ray {d.tolist()} (radial unboundedness spot check)"
                    )
                    break
        return problems


def _require_dims(model: SdeModel, cand: LyapunovCandidate) -> None:
    if model.dim != cand.dim:
        raise DimensionError(
            f"model dim {model.dim} != candidate dim {cand.dim}"
        )


def generator(model: SdeModel, cand: LyapunovCandidate) -> Expr:
    """LV = (dV/dx) f + 1/2 Tr{ g^T H g }, canonicalized.

    Returns the exact zero constant when the algebra cancels.
    """
    _require_dims(model, cand)
    n, m = model.dim, model.brownian_dim
    terms = [
        sproduct([cand.gradient[i], model.drift[i]]) for i in range(n)
    ]
    half = Fraction(1, 2)
    for i in range(n):
        for k in range(n):
            for j in range(m):
                terms.append(
                    sproduct(
                        [
                            Const(half),
                            model.diffusion[i][j],
                            cand.hessian[i][k],
                            model.diffusion[k][j],
                        ]
                    )
                )
    return canonicalize(ssum(terms))


def diffusion_quadratic(model: SdeModel, cand: LyapunovCandidate) -> Expr:
    """|(dV/dx) g|^2 = sum_j ( sum_i dV/dx_i g_ij )^2, canonicalized."""
    _require_dims(model, cand)
    n, m = model.dim, model.brownian_dim
    squares = []
    for j in range(m):
        inner = ssum(
            sproduct([cand.gradient[i], model.diffusion[i][j]]) for i in range(n)
        )
        squares.append(sproduct([inner, inner]))
    return canonicalize(ssum(squares))

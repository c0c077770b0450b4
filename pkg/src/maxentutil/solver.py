"""Maximum-entropy densities through the convex dual.

For constraint functions h_1..h_m with equality targets b, the entropy
maximizer over the support has exponential form

    p(x) = exp(-log Z(m) - sum_j m_j h_j(x)),

and the multipliers m minimize the smooth convex dual

    D(m) = log Z(m) + sum_j m_j b_j,

whose gradient is b - E_m[h] and whose Hessian is the covariance matrix of
the h_j under p.  The solver runs damped Newton on D: full steps with an
Armijo backtracking line search, a ridge and a steepest-descent fallback
when the Hessian is ill-conditioned, and hard failure (rather than a quiet
wrong answer) when targets are unattainable.

Interval targets lo <= E[h] <= hi are handled by an outer active-set loop:
constraints enter the equality solve when their moment violates a bound and
leave it when their multiplier sign contradicts complementary slackness
(a positive multiplier can only pin an upper bound, a negative one a lower
bound).

Everything is solved in centered coordinates (each h_j shifted by its mean
under the uniform density); the shift only moves the log-partition value,
which is restored before results are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

from .core import (
    ConstraintFunction,
    ConstraintSpec,
    InfeasibleError,
    ActiveSetCycleError,
    MaxEntSolution,
    Problem,
    SolverDiagnostics,
    Support,
    ValidationError,
    exponential_density,
    validate_problem,
)
from .entropy import differential_entropy, discrete_entropy

__all__ = [
    "SolveOptions",
    "DualState",
    "log_partition",
    "dual_value",
    "dual_gradient",
    "dual_hessian",
    "dual_state",
    "solve_equality",
    "solve_interval",
    "moments",
    "DEFAULT_TOL_DISCRETE",
    "DEFAULT_TOL_CONTINUOUS",
]

DEFAULT_TOL_DISCRETE = 1e-9
DEFAULT_TOL_CONTINUOUS = 1e-8
MULTIPLIER_CAP = 1e4
MAX_OUTER_PASSES = 50
_ARMIJO_SLOPE = 1e-4
_RIDGE = 1e-10
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for the Newton iteration.

    ``tol`` of None picks the per-kind default (1e-9 discrete, 1e-8
    continuous) for the max-norm of the constraint residuals.
    """

    tol: float | None = None
    max_iter: int = 200
    multiplier_cap: float = MULTIPLIER_CAP

    def __post_init__(self) -> None:
        if self.tol is not None and not self.tol > 0.0:
            raise ValidationError("tol must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1")
        if not self.multiplier_cap > 0.0:
            raise ValidationError("multiplier_cap must be positive")

    def resolve_tol(self, support: Support) -> float:
        if self.tol is not None:
            return self.tol
        return DEFAULT_TOL_CONTINUOUS if support.is_continuous else DEFAULT_TOL_DISCRETE


@dataclass(frozen=True, eq=False)
class DualState:
    """Snapshot of the dual problem at a multiplier vector.

    The Hessian is symmetrized and must be positive semidefinite up to
    1e-10; a violation means the moment computation itself is broken.
    """

    multipliers: NDArray[np.float64]
    gradient: NDArray[np.float64]
    hessian: NDArray[np.float64]
    iteration: int

    def __post_init__(self) -> None:
        m = len(self.multipliers)
        if self.gradient.shape != (m,) or self.hessian.shape != (m, m):
            raise ValidationError("dual state shapes disagree")
        if m > 0:
            if not np.allclose(self.hessian, self.hessian.T, atol=1e-10):
                raise ValidationError("dual Hessian must be symmetric")
            if float(np.linalg.eigvalsh(self.hessian).min()) < -1e-10:
                raise ValidationError("dual Hessian must be positive semidefinite")


def _feature_matrix(
    support: Support, functions: Sequence[ConstraintFunction]
) -> NDArray[np.float64]:
    if len(functions) == 0:
        return np.zeros((0, support.n))
    return np.vstack([f.tabulate(support) for f in functions])


def log_partition(
    support: Support,
    functions: Sequence[ConstraintFunction],
    multipliers: Sequence[float] | NDArray[np.float64],
) -> float:
    """log of Z(m) = sum_i w_i exp(-sum_j m_j h_j(x_i)).

    Evaluated with a max-shift inside the log-sum-exp, so exponents as large
    as several hundred in magnitude do not overflow.
    """
    lam = np.asarray(multipliers, dtype=np.float64)
    H = _feature_matrix(support, functions)
    if lam.shape != (H.shape[0],):
        raise ValidationError("one multiplier per constraint function is required")
    return float(logsumexp(-(lam @ H), b=support.weights))


def _equality_targets(constraints: Sequence[ConstraintSpec]) -> NDArray[np.float64]:
    for spec in constraints:
        if not spec.is_equality:
            raise ValidationError("dual calculus is defined for equality targets")
    return np.array([spec.equals for spec in constraints], dtype=np.float64)


def dual_value(
    support: Support,
    constraints: Sequence[ConstraintSpec],
    multipliers: Sequence[float] | NDArray[np.float64],
) -> float:
    """D(m) = log Z(m) + m . b for equality constraints."""
    b = _equality_targets(constraints)
    lam = np.asarray(multipliers, dtype=np.float64)
    lz = log_partition(support, [s.function for s in constraints], lam)
    return lz + float(lam @ b)


def _moments_at(
    support: Support, H: NDArray[np.float64], lam: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Density (as node values) and moments E[h] at a multiplier vector."""
    expo = -(lam @ H)
    lz = float(logsumexp(expo, b=support.weights))
    p = np.exp(expo - lz)
    mom = (support.weights * p) @ H.T
    return p, mom


def dual_gradient(
    support: Support,
    constraints: Sequence[ConstraintSpec],
    multipliers: Sequence[float] | NDArray[np.float64],
) -> NDArray[np.float64]:
    """Gradient of the dual: b - E[h] at the current multipliers."""
    b = _equality_targets(constraints)
    lam = np.asarray(multipliers, dtype=np.float64)
    H = _feature_matrix(support, [s.function for s in constraints])
    _, mom = _moments_at(support, H, lam)
    return b - mom


def dual_hessian(
    support: Support,
    constraints: Sequence[ConstraintSpec],
    multipliers: Sequence[float] | NDArray[np.float64],
) -> NDArray[np.float64]:
    """Hessian of the dual: the covariance matrix of the h_j under p."""
    lam = np.asarray(multipliers, dtype=np.float64)
    H = _feature_matrix(support, [s.function for s in constraints])
    p, mom = _moments_at(support, H, lam)
    cen = H - mom[:, None]
    hess = (cen * (support.weights * p)) @ cen.T
    return 0.5 * (hess + hess.T)


def dual_state(
    support: Support,
    constraints: Sequence[ConstraintSpec],
    multipliers: Sequence[float] | NDArray[np.float64],
    iteration: int = 0,
) -> DualState:
    lam = np.asarray(multipliers, dtype=np.float64)
    return DualState(
        multipliers=lam,
        gradient=dual_gradient(support, constraints, lam),
        hessian=dual_hessian(support, constraints, lam),
        iteration=iteration,
    )


class _CenteredDual:
    """The dual problem in centered coordinates for one fixed target vector."""

    def __init__(
        self,
        support: Support,
        functions: Sequence[ConstraintFunction],
        targets: NDArray[np.float64],
    ):
        self.support = support
        self.w = support.weights
        self.H = _feature_matrix(support, functions)
        wsum = float(self.w.sum())
        self.center = (self.w @ self.H.T) / wsum
        self.Hc = self.H - self.center[:, None]
        self.bc = targets - self.center

    def value(self, lam: NDArray[np.float64]) -> float:
        return float(logsumexp(-(lam @ self.Hc), b=self.w)) + float(lam @ self.bc)

    def density_and_gradient(
        self, lam: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        expo = -(lam @ self.Hc)
        lz = float(logsumexp(expo, b=self.w))
        p = np.exp(expo - lz)
        return p, self.bc - (self.w * p) @ self.Hc.T

    def hessian(
        self, lam: NDArray[np.float64], p: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        mom = (self.w * p) @ self.Hc.T
        cen = self.Hc - mom[:, None]
        hess = (cen * (self.w * p)) @ cen.T
        return 0.5 * (hess + hess.T)


def _check_target_attainable(
    support: Support, function: ConstraintFunction, target: float
) -> None:
    h = function.tabulate(support)
    h_min, h_max = float(h.min()), float(h.max())
    if h_min == h_max:
        raise InfeasibleError(
            f"constraint {function.label()} is constant on the support"
        )
    if target <= h_min or target >= h_max:
        raise InfeasibleError(
            f"target {target:g} for {function.label()} does not lie strictly "
            f"inside the attainable range ({h_min:g}, {h_max:g}); the problem "
            "is infeasible or degenerate"
        )


def _newton(
    dual: _CenteredDual,
    lam0: NDArray[np.float64],
    tol: float,
    max_iter: int,
    cap: float,
) -> tuple[NDArray[np.float64], int, float, tuple[float, ...]]:
    """Damped Newton descent on the centered dual from a warm start."""
    m = dual.Hc.shape[0]
    lam = np.array(lam0, dtype=np.float64)
    if m == 0:
        return lam, 0, 0.0, (dual.value(lam),)
    trace = [dual.value(lam)]
    for it in range(max_iter):
        p, g = dual.density_and_gradient(lam)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= tol:
            return lam, it, gnorm, tuple(trace)
        hess = dual.hessian(lam, p) + _RIDGE * np.eye(m)
        direction = None
        if np.all(np.isfinite(hess)) and np.linalg.cond(hess) <= _COND_LIMIT:
            try:
                direction = -np.linalg.solve(hess, g)
            except np.linalg.LinAlgError:
                direction = None
        if direction is None or not np.all(np.isfinite(direction)):
            direction = -g  # steepest descent on an ill-conditioned Hessian
        slope = float(g @ direction)
        step = 1.0
        here = trace[-1]
        while dual.value(lam + step * direction) > here + _ARMIJO_SLOPE * step * slope:
            step *= 0.5
            if step < 1e-14:
                raise InfeasibleError(
                    "line search stalled; the problem is infeasible or unbounded"
                )
        lam = lam + step * direction
        trace.append(dual.value(lam))
        if float(np.max(np.abs(lam))) > cap:
            raise InfeasibleError(
                f"multiplier magnitude exceeded {cap:g}; the problem is "
                "infeasible or unbounded"
            )
    raise InfeasibleError(
        f"no convergence to tolerance {tol:g} in {max_iter} iterations; "
        "the problem is infeasible or unbounded"
    )


def _entropy_of(support: Support, density: NDArray[np.float64]) -> float:
    if support.is_continuous:
        return differential_entropy(density, support).value
    return discrete_entropy(density).value


def _require_representable(density: NDArray[np.float64]) -> None:
    # exp(-log Z - m . h) is positive in exact arithmetic, but a target close
    # enough to the attainable boundary needs multipliers so large that the
    # density underflows to zero at the far nodes.
    if not np.all(density > 0.0):
        raise InfeasibleError(
            "multipliers drive the density to zero at some nodes (floating-"
            "point underflow); the target is too close to the attainable "
            "boundary to represent"
        )


def _build_solution(
    problem: Problem,
    multipliers: NDArray[np.float64],
    diagnostics: SolverDiagnostics,
) -> MaxEntSolution:
    support, specs = problem.support, problem.constraints
    lz = log_partition(support, [s.function for s in specs], multipliers)
    density = exponential_density(support, specs, multipliers, lz)
    _require_representable(density)
    return MaxEntSolution(
        support=support,
        constraints=specs,
        density=density,
        multipliers=multipliers,
        log_partition=lz,
        entropy=_entropy_of(support, density),
        diagnostics=diagnostics,
    )


def solve_equality(
    support: Support,
    constraints: Sequence[ConstraintSpec],
    options: SolveOptions = SolveOptions(),
) -> MaxEntSolution:
    """Maximum-entropy density meeting every E[h_j] = b_j exactly.

    With no constraints the result is the uniform density.  Raises
    InfeasibleError when a target is outside (or on the edge of) its
    attainable range, or when the iteration cannot meet the residual
    tolerance.
    """
    problem = validate_problem(support, constraints)
    specs = problem.constraints
    targets = _equality_targets(specs)
    tol = options.resolve_tol(support)
    for spec in specs:
        _check_target_attainable(support, spec.function, spec.equals)

    dual = _CenteredDual(support, [s.function for s in specs], targets)
    lam, iters, gnorm, trace = _newton(
        dual, np.zeros(len(specs)), tol, options.max_iter, options.multiplier_cap
    )

    p, _ = dual.density_and_gradient(lam)
    mom = (support.weights * p) @ dual.H.T
    residuals = tuple(float(r) for r in (mom - targets))
    diagnostics = SolverDiagnostics(
        iterations=iters,
        grad_max_norm=gnorm,
        residuals=residuals,
        active_bounds=("eq",) * len(specs),
        dual_trace=trace,
    )
    return _build_solution(problem, lam, diagnostics)


def solve_interval(
    support: Support,
    constraints: Sequence[ConstraintSpec],
    options: SolveOptions = SolveOptions(),
) -> MaxEntSolution:
    """Maximum-entropy density with interval targets lo <= E[h] <= hi.

    Equality constraints may be mixed in; they stay pinned throughout.
    Interval constraints start slack and are activated at a violated bound;
    an active constraint whose multiplier sign contradicts complementary
    slackness is released again.  Revisiting a previously seen active set
    (or running past 50 outer passes) raises ActiveSetCycleError.
    """
    problem = validate_problem(support, constraints)
    specs = problem.constraints
    tol = options.resolve_tol(support)

    eq_ids = [i for i, s in enumerate(specs) if s.is_equality]
    int_ids = [i for i, s in enumerate(specs) if not s.is_equality]
    for i in eq_ids:
        _check_target_attainable(support, specs[i].function, specs[i].equals)
    tab = {i: specs[i].function.tabulate(support) for i in int_ids}
    for i in int_ids:
        lo, hi = specs[i].bounds
        h_min, h_max = float(tab[i].min()), float(tab[i].max())
        if lo >= h_max or hi <= h_min:
            raise InfeasibleError(
                f"interval [{lo:g}, {hi:g}] for {specs[i].function.label()} "
                f"cannot intersect the attainable range ({h_min:g}, {h_max:g})"
            )

    active: dict[int, str] = {}
    full_lam = np.zeros(len(specs))
    seen: set[frozenset] = set()
    total_iters = 0
    trace: list[float] = []
    gnorm = 0.0

    for _ in range(MAX_OUTER_PASSES):
        solve_ids = eq_ids + sorted(active)
        funcs = [specs[i].function for i in solve_ids]
        targets = np.array(
            [
                specs[i].equals
                if specs[i].is_equality
                else (specs[i].bounds[0] if active[i] == "lo" else specs[i].bounds[1])
                for i in solve_ids
            ],
            dtype=np.float64,
        )
        for i, t in zip(solve_ids, targets):
            if not specs[i].is_equality:
                _check_target_attainable(support, specs[i].function, float(t))

        dual = _CenteredDual(support, funcs, targets)
        lam, iters, gnorm, sub_trace = _newton(
            dual, full_lam[solve_ids], tol, options.max_iter, options.multiplier_cap
        )
        total_iters += iters
        trace.extend(sub_trace)
        full_lam[:] = 0.0
        full_lam[solve_ids] = lam

        density = exponential_density(
            support, specs, full_lam,
            log_partition(support, [s.function for s in specs], full_lam),
        )
        changed = False
        for i in int_ids:
            moment = float(np.dot(support.weights * density, tab[i]))
            lo, hi = specs[i].bounds
            if i not in active:
                if moment < lo:
                    active[i] = "lo"
                    changed = True
                elif moment > hi:
                    active[i] = "hi"
                    changed = True
            elif lo < hi:
                # Complementary slackness: the sign of the multiplier says
                # which bound it is allowed to pin.
                if active[i] == "lo" and full_lam[i] > 0.0:
                    del active[i]
                    changed = True
                elif active[i] == "hi" and full_lam[i] < 0.0:
                    del active[i]
                    changed = True
        if not changed:
            break
        config = frozenset(active.items())
        if config in seen:
            raise ActiveSetCycleError(
                "active-set cycle: the same working set recurred without convergence"
            )
        seen.add(config)
    else:
        raise ActiveSetCycleError(
            f"active-set loop exceeded {MAX_OUTER_PASSES} outer passes"
        )

    full_lam[[i for i in int_ids if i not in active]] = 0.0
    lz = log_partition(support, [s.function for s in specs], full_lam)
    density = exponential_density(support, specs, full_lam, lz)
    _require_representable(density)
    residuals = []
    labels = []
    for i, spec in enumerate(specs):
        moment = float(np.dot(support.weights * density, spec.function.tabulate(support)))
        if spec.is_equality:
            residuals.append(moment - spec.equals)
            labels.append("eq")
        else:
            lo, hi = spec.bounds
            if moment < lo - tol or moment > hi + tol:
                raise InfeasibleError(
                    f"interval constraint {spec.function.label()} violated after "
                    "the active-set loop; the problem is infeasible or unbounded"
                )
            residuals.append(
                moment - lo if moment < lo else (moment - hi if moment > hi else 0.0)
            )
            labels.append(active.get(i, "slack"))

    diagnostics = SolverDiagnostics(
        iterations=total_iters,
        grad_max_norm=gnorm,
        residuals=tuple(float(r) for r in residuals),
        active_bounds=tuple(labels),
        dual_trace=tuple(trace),
    )
    return MaxEntSolution(
        support=support,
        constraints=specs,
        density=density,
        multipliers=full_lam,
        log_partition=lz,
        entropy=_entropy_of(support, density),
        diagnostics=diagnostics,
    )


def moments(
    solution: MaxEntSolution, functions: Sequence[ConstraintFunction]
) -> NDArray[np.float64]:
    """E[h] under a solved density, for any constraint functions."""
    support = solution.support
    out = np.empty(len(functions))
    for j, f in enumerate(functions):
        out[j] = float(
            np.dot(support.weights * solution.density, f.tabulate(support))
        )
    return out

"""Command-line front end: solve a spec file, or report an entropy.

The spec format is one construct per line, `key = value`, with `#` starting
a comment.  Supports are given as either `domain = a b` (continuous, with
an optional `nodes = N`) or `points = x1 x2 ...` (discrete).  Constraints
repeat one per line:

    constraint = power 1 eq 1.0
    constraint = power 2 in 0.5 1.5
    constraint = indicator 0.25 0.75 eq 0.4
    constraint = tabulated v1 ... vn eq 0.3

Assessed utility points use `assessment = x v` lines instead; a spec that
mixes constraints and assessments is rejected.  `tol`, `max_iter`, `base`
(natural or base2) and `out` may be set in the file and are overridden by
the corresponding command-line flags.

Exit status: 0 on convergence, 1 for parse or validation problems, 2 when
the problem is infeasible.  All numbers are printed to 17 significant
digits, so identical inputs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ActiveSetCycleError,
    ConstraintFunction,
    ConstraintSpec,
    InfeasibleError,
    MaxentError,
    MaxEntSolution,
    Support,
    ValidationError,
)
from .entropy import EntropyValue, discrete_entropy
from .risk import RiskAversionProfile, risk_aversion_analytic
from .solver import SolveOptions, solve_equality, solve_interval
from .utility import (
    UtilityCurve,
    classify_family,
    density_to_curve,
    maxent_utility_from_assessments,
)

__all__ = ["main", "cmd_solve", "cmd_entropy", "parse_spec_file", "ResultBundle"]

_UNIT = {"natural": "nats", "base2": "bits"}


def _fmt(v: float) -> str:
    return f"{v:.17g}"


@dataclass
class SpecFile:
    """Everything a spec file can say, before it becomes a problem."""

    domain: tuple[float, float] | None = None
    nodes: int | None = None
    points: tuple[float, ...] | None = None
    constraints: list[ConstraintSpec] = field(default_factory=list)
    assessments: list[tuple[float, float]] = field(default_factory=list)
    tol: float | None = None
    max_iter: int | None = None
    base: str | None = None
    out: str | None = None


def _fail(lineno: int, message: str) -> None:
    raise ValidationError(f"line {lineno}: {message}")


def _floats(tokens: list[str], lineno: int, what: str) -> list[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        _fail(lineno, f"{what} expects numbers, got {' '.join(tokens)!r}")


def _parse_constraint(tokens: list[str], lineno: int) -> ConstraintSpec:
    if not tokens:
        _fail(lineno, "empty constraint")
    kind = tokens[0]
    split = None
    for marker in ("eq", "in"):
        if marker in tokens:
            split = tokens.index(marker)
            break
    if split is None:
        _fail(lineno, "constraint needs a target: 'eq value' or 'in lo hi'")
    params, marker, target = tokens[1:split], tokens[split], tokens[split + 1 :]

    try:
        if kind == "power":
            if len(params) != 1:
                _fail(lineno, "power takes one degree")
            fn = ConstraintFunction.power(int(params[0]))
        elif kind == "indicator":
            if len(params) != 2:
                _fail(lineno, "indicator takes two edges")
            lo, hi = _floats(params, lineno, "indicator")
            fn = ConstraintFunction.indicator(lo, hi)
        elif kind == "tabulated":
            fn = ConstraintFunction.tabulated(_floats(params, lineno, "tabulated"))
        else:
            _fail(lineno, f"unknown constraint kind {kind!r}")
    except ValueError:
        _fail(lineno, "power degree must be an integer")
    except ValidationError as exc:
        _fail(lineno, str(exc))

    values = _floats(target, lineno, "target")
    try:
        if marker == "eq":
            if len(values) != 1:
                _fail(lineno, "'eq' takes one target value")
            return ConstraintSpec.equality(fn, values[0])
        if len(values) != 2:
            _fail(lineno, "'in' takes a lower and an upper bound")
        return ConstraintSpec.interval(fn, values[0], values[1])
    except ValidationError as exc:
        _fail(lineno, str(exc))


def parse_spec_file(path: str) -> SpecFile:
    """Read a spec file; all failures carry their line number."""
    spec = SpecFile()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read spec file: {exc}") from None

    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            _fail(lineno, "expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        tokens = value.split()

        if key == "domain":
            if spec.domain is not None:
                _fail(lineno, "domain already set")
            if len(tokens) != 2:
                _fail(lineno, "domain takes two endpoints")
            a, b = _floats(tokens, lineno, "domain")
            spec.domain = (a, b)
        elif key == "points":
            if spec.points is not None:
                _fail(lineno, "points already set")
            spec.points = tuple(_floats(tokens, lineno, "points"))
        elif key == "nodes":
            try:
                spec.nodes = int(value)
            except ValueError:
                _fail(lineno, "nodes expects an integer")
        elif key == "constraint":
            spec.constraints.append(_parse_constraint(tokens, lineno))
        elif key == "assessment":
            if len(tokens) != 2:
                _fail(lineno, "assessment takes a point and a value")
            x, v = _floats(tokens, lineno, "assessment")
            spec.assessments.append((x, v))
        elif key == "tol":
            try:
                spec.tol = float(value)
            except ValueError:
                _fail(lineno, "tol expects a number")
        elif key == "max_iter":
            try:
                spec.max_iter = int(value)
            except ValueError:
                _fail(lineno, "max_iter expects an integer")
        elif key == "base":
            if value not in _UNIT:
                _fail(lineno, "base must be 'natural' or 'base2'")
            spec.base = value
        elif key == "out":
            spec.out = value
        else:
            _fail(lineno, f"unknown key {key!r}")

    if (spec.domain is None) == (spec.points is None):
        raise ValidationError("spec needs exactly one of 'domain' or 'points'")
    if spec.constraints and spec.assessments:
        raise ValidationError("spec mixes constraints and assessments; use one style")
    if spec.points is not None and spec.assessments:
        raise ValidationError("assessments need a continuous domain")
    if spec.points is not None and spec.nodes is not None:
        raise ValidationError("'nodes' applies only to a continuous domain")
    return spec


@dataclass
class ResultBundle:
    """A solved run, ready to be printed: summary plus per-node table."""

    solution: MaxEntSolution
    family: str
    base: str
    curve: UtilityCurve | None = None
    profile: RiskAversionProfile | None = None

    def summary_text(self) -> str:
        s = self.solution
        d = s.diagnostics
        lines = [
            "status = converged",
            f"family = {self.family}",
            f"support = {s.support.kind}",
            f"nodes = {s.support.n}",
            f"iterations = {d.iterations}",
            f"log_partition = {_fmt(s.log_partition)}",
            f"entropy = {_fmt(EntropyValue(s.entropy).in_base(self.base).value)}",
            f"entropy_base = {self.base}",
        ]
        for j, (m, r, a) in enumerate(
            zip(s.multipliers, d.residuals, d.active_bounds)
        ):
            lines.append(f"multiplier[{j}] = {_fmt(m)}")
            lines.append(f"residual[{j}] = {_fmt(r)}")
            lines.append(f"active[{j}] = {a}")
        return "\n".join(lines) + "\n"

    def table_text(self) -> str:
        s = self.solution
        n = s.support.n
        u_col = [_fmt(v) for v in s.density]
        if self.curve is not None:
            curve_col = [_fmt(v) for v in self.curve.curve]
        else:
            curve_col = [""] * n
        gamma_col = [""] * n
        if self.profile is not None:
            for i, g in zip(self.profile.node_indices, self.profile.gamma):
                gamma_col[int(i)] = _fmt(g)
        rows = ["x,u,U,gamma"]
        for i, x in enumerate(s.support.nodes):
            rows.append(f"{_fmt(x)},{u_col[i]},{curve_col[i]},{gamma_col[i]}")
        return "\n".join(rows) + "\n"


def _solve_spec(spec: SpecFile, args: argparse.Namespace) -> ResultBundle:
    nodes = getattr(args, "nodes", None) or spec.nodes
    if spec.domain is not None:
        support = Support.continuous(*spec.domain, n=nodes or 1024)
    else:
        support = Support.discrete(spec.points)
    options = SolveOptions(
        tol=getattr(args, "tol", None) or spec.tol,
        max_iter=getattr(args, "max_iter", None) or spec.max_iter or 200,
    )
    base = "base2" if getattr(args, "base2", False) else (spec.base or "natural")

    if spec.assessments:
        curve, solution = maxent_utility_from_assessments(
            support, spec.assessments, options
        )
    else:
        if any(not c.is_equality for c in spec.constraints):
            solution = solve_interval(support, spec.constraints, options)
        else:
            solution = solve_equality(support, spec.constraints, options)
        curve = (
            density_to_curve(solution.density, support)
            if support.is_continuous
            else None
        )
    family = classify_family(solution.constraints)

    profile = None
    if solution.support.is_continuous:
        try:
            profile = risk_aversion_analytic(solution)
        except ValidationError:
            profile = None  # tabulated constraints without a slope
    return ResultBundle(
        solution=solution, family=family, base=base, curve=curve, profile=profile
    )


def cmd_solve(args: argparse.Namespace) -> int:
    spec = parse_spec_file(args.spec)
    bundle = _solve_spec(spec, args)
    out_path = args.out or spec.out
    if not args.quiet:
        sys.stdout.write(bundle.summary_text())
    table = bundle.table_text()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    else:
        if not args.quiet:
            sys.stdout.write("\n")
        sys.stdout.write(table)
    return 0


def _parse_masses(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError:
        raise ValidationError(f"--masses expects numbers, got {text!r}") from None


def cmd_entropy(args: argparse.Namespace) -> int:
    base = "base2" if args.base2 else "natural"
    if (args.spec is None) == (args.masses is None):
        raise ValidationError("entropy needs a spec file or --masses, not both")
    if args.masses is not None:
        value = discrete_entropy(_parse_masses(args.masses), base)
    else:
        spec = parse_spec_file(args.spec)
        if spec.base and not args.base2:
            base = spec.base
        bundle = _solve_spec(spec, args)
        value = EntropyValue(bundle.solution.entropy).in_base(base)
    sys.stdout.write(f"{_fmt(value.value)} ({_UNIT[value.base]})\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxentutil",
        description="Maximum-entropy densities and utility functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a spec file and print the result")
    solve.add_argument("spec", help="path to a problem spec file")
    solve.add_argument("--tol", type=float, default=None, help="residual tolerance")
    solve.add_argument("--max-iter", type=int, default=None, dest="max_iter")
    solve.add_argument("--nodes", type=int, default=None, help="quadrature nodes")
    solve.add_argument("--base2", action="store_true", help="report entropy in bits")
    solve.add_argument("--out", default=None, help="write the table to this file")
    solve.add_argument("--quiet", action="store_true", help="suppress the summary")
    solve.set_defaults(func=cmd_solve)

    entropy = sub.add_parser("entropy", help="entropy of masses or of a solved spec")
    entropy.add_argument("spec", nargs="?", default=None)
    entropy.add_argument("--masses", default=None, help="comma-separated masses")
    entropy.add_argument("--tol", type=float, default=None)
    entropy.add_argument("--max-iter", type=int, default=None, dest="max_iter")
    entropy.add_argument("--nodes", type=int, default=None)
    entropy.add_argument("--base2", action="store_true")
    entropy.set_defaults(func=cmd_entropy)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleError, ActiveSetCycleError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except MaxentError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except BrokenPipeError:
        # Downstream consumer (head, less) closed the pipe; leave quietly.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1

"""Arrow-Pratt risk aversion of maximum-entropy utilities.

For an exponential-form utility density the risk-aversion coefficient
gamma(x) = -d ln u / dx is a sum of per-constraint terms m_j h_j'(x):
a mean constraint contributes a constant, a variance constraint a linear
term, and so on.  The numeric route differentiates the density directly
and should agree with the analytic one.
"""

import numpy as np

from maxentutil import (
    ConstraintFunction,
    ConstraintSpec,
    Support,
    density_to_curve,
    risk_aversion_analytic,
    risk_aversion_numeric,
    solve_equality,
)


def main():
    support = Support.continuous(0.0, 5.0, 1024)
    mean = ConstraintSpec.equality(ConstraintFunction.power(1), 1.0)
    cara = solve_equality(support, [mean])
    prof = risk_aversion_analytic(cara)
    print("constant absolute risk aversion (mean constraint only):")
    print(f"  gamma = {prof.gamma[0]:.6f} everywhere "
          f"(spread {np.ptp(prof.gamma):.1e})")
    print(f"  equals the multiplier {cara.multipliers[0]:.6f}\n")

    sym = Support.continuous(-4.0, 4.0, 1024)
    gauss = solve_equality(
        sym,
        [
            ConstraintSpec.equality(ConstraintFunction.power(1), 0.0),
            ConstraintSpec.equality(ConstraintFunction.power(2), 1.0),
        ],
    )
    gprof = risk_aversion_analytic(gauss)
    slope, intercept = np.polyfit(gprof.nodes, gprof.gamma, 1)
    print("gaussian utility density (mean and variance):")
    print(f"  gamma(x) = {intercept:+.6f} {slope:+.6f} x")
    print(f"  risk seeking below x = {-intercept / slope:.4f}, averse above")
    print("  per-constraint terms at x = 1:")
    at_one = int(np.argmin(np.abs(gprof.nodes - 1.0)))
    for j, spec in enumerate(gauss.constraints):
        print(f"    {spec.function.label():<10} {gprof.terms[j][at_one]:+.6f}")

    num = risk_aversion_numeric(density_to_curve(gauss.density, sym))
    gap = np.max(np.abs(num.gamma - gprof.gamma))
    print(f"\nnumeric vs analytic gamma: max gap {gap:.2e}")


if __name__ == "__main__":
    main()

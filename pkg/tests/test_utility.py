import math

import numpy as np
import pytest

from maxentutil.core import (
    ConstraintFunction,
    ConstraintSpec,
    Support,
    ValidationError,
)
from maxentutil.entropy import differential_entropy
from maxentutil.solver import solve_equality
from maxentutil.utility import (
    UtilityCurve,
    UtilityIncrementVector,
    UtilityVector,
    classify_family,
    cumulate,
    curve_to_density,
    density_to_curve,
    increments,
    maxent_utility,
    maxent_utility_from_assessments,
    utility_volume,
)

# Multiplier of the mean-1 exponential family on [0, 5]; see test_solver.py
# for the independent derivation.
CARA_LAMBDA = 0.960201509944503


# ------------------------------------------------------- vectors of utility

def test_utility_vector_invariants():
    UtilityVector(np.array([0.0, 0.25, 1.0]))
    with pytest.raises(ValidationError):
        UtilityVector(np.array([0.1, 0.5, 1.0]))
    with pytest.raises(ValidationError):
        UtilityVector(np.array([0.0, 0.5, 0.999]))
    with pytest.raises(ValidationError):
        UtilityVector(np.array([0.0, 0.6, 0.5, 1.0]))
    with pytest.raises(ValidationError):
        UtilityVector(np.array([0.0]))


def test_increments_of_simple_vector():
    u = UtilityVector(np.array([0.0, 0.25, 0.75, 1.0]))
    d = increments(u)
    assert np.array_equal(d.increments, [0.25, 0.5, 0.25])


def test_cumulate_restores_simple_vector():
    d = UtilityIncrementVector(np.array([0.1, 0.4, 0.5]))
    u = cumulate(d)
    assert np.array_equal(u.values, [0.0, 0.1, 0.5, 1.0])


def test_roundtrip_is_exact_for_dyadic_increments():
    # Increments with denominator 2**20 add without rounding, so the
    # roundtrip must be bit-exact, not just close.
    rng = np.random.default_rng(7)
    for _ in range(25):
        k = rng.integers(2, 9)
        counts = rng.multinomial(2**20, np.full(k, 1.0 / k))
        d = UtilityIncrementVector(counts / 2.0**20)
        assert np.array_equal(increments(cumulate(d)).increments, d.increments)


def test_roundtrip_is_close_for_arbitrary_increments():
    rng = np.random.default_rng(9)
    for _ in range(50):
        raw = rng.random(rng.integers(2, 12))
        d = UtilityIncrementVector(raw / raw.sum())
        back = increments(cumulate(d))
        assert np.max(np.abs(back.increments - d.increments)) < 1e-12


def test_increment_vector_rejects_bad_sums():
    with pytest.raises(ValidationError, match="sum"):
        UtilityIncrementVector(np.array([0.5, 0.5 + 1e-9]))
    with pytest.raises(ValidationError):
        UtilityIncrementVector(np.array([1.2, -0.2]))


# ------------------------------------------------------------ curve algebra

def test_uniform_density_gives_linear_utility():
    s = Support.continuous(0.0, 1.0, 256)
    curve = density_to_curve(np.ones(s.n), s)
    assert np.max(np.abs(curve.curve - s.nodes)) < 1e-12
    assert curve.evaluate(0.0) == 0.0
    assert curve.evaluate(1.0) == 1.0
    assert abs(curve.evaluate(0.3) - 0.3) < 1e-10


def test_cara_curve_matches_closed_form():
    lam = CARA_LAMBDA
    s = Support.continuous(0.0, 5.0, 1024)
    sol = solve_equality(
        s, [ConstraintSpec.equality(ConstraintFunction.power(1), 1.0)]
    )
    curve = density_to_curve(sol.density, s)
    closed = (1.0 - np.exp(-lam * s.nodes)) / (1.0 - math.exp(-5.0 * lam))
    assert np.max(np.abs(curve.curve - closed)) < 1e-9
    # Frozen point values of the closed form.  Off the grid knots the curve
    # interpolates linearly, which costs O(h^2) between nodes.
    assert curve.evaluate(1.0) == pytest.approx(0.622300481081589, abs=2e-5)
    assert curve.evaluate(2.5) == pytest.approx(0.916865710791798, abs=2e-5)
    assert curve.evaluate(4.0) == pytest.approx(0.986635298366603, abs=2e-5)


def test_curve_to_density_recovers_slope():
    s = Support.continuous(0.0, 1.0, 512)
    linear = curve_to_density(s.nodes, s)
    assert np.max(np.abs(linear - 1.0)) < 1e-10
    quadratic = curve_to_density(s.nodes**2, s)
    interior = slice(2, -2)
    assert np.max(np.abs(quadratic[interior] - 2.0 * s.nodes[interior])) < 1e-8


def test_density_curve_roundtrip():
    s = Support.continuous(0.0, 5.0, 1024)
    sol = solve_equality(
        s, [ConstraintSpec.equality(ConstraintFunction.power(1), 1.0)]
    )
    curve = density_to_curve(sol.density, s)
    back = curve_to_density(curve, s)
    assert np.max(np.abs(back - sol.density)) < 1e-4


def test_curve_to_density_rejects_flat_and_decreasing():
    s = Support.continuous(0.0, 1.0, 64)
    with pytest.raises(ValidationError, match="no increase"):
        curve_to_density(np.zeros(s.n), s)
    with pytest.raises(ValidationError, match="decreasing"):
        curve_to_density(-s.nodes, s)


def test_curve_rejects_unnormalized_density():
    s = Support.continuous(0.0, 2.0, 64)
    with pytest.raises(ValidationError):
        density_to_curve(np.full(s.n, -1.0), s)


def test_curve_evaluate_rejects_points_outside_support():
    s = Support.continuous(0.0, 1.0, 64)
    curve = density_to_curve(np.ones(s.n), s)
    with pytest.raises(ValidationError):
        curve.evaluate(-0.01)
    with pytest.raises(ValidationError):
        curve.evaluate(np.array([0.5, 1.2]))


# -------------------------------------------------------- maxent utilities

def test_maxent_utility_unconstrained_is_linear():
    s = Support.continuous(0.0, 1.0, 128)
    curve, sol = maxent_utility(s, [])
    assert np.max(np.abs(curve.curve - s.nodes)) < 1e-10
    assert sol.entropy == pytest.approx(0.0, abs=1e-10)


def test_maxent_utility_routes_intervals():
    s = Support.continuous(0.0, 1.0, 128)
    spec = ConstraintSpec.interval(ConstraintFunction.power(1), 0.4, 0.6)
    curve, sol = maxent_utility(s, [spec])
    assert sol.diagnostics.active_bounds == ("slack",)
    assert np.max(np.abs(curve.curve - s.nodes)) < 1e-10


def test_mean_and_variance_give_single_inflection():
    s = Support.continuous(-3.0, 3.0, 1024)
    specs = [
        ConstraintSpec.equality(ConstraintFunction.power(1), 0.0),
        ConstraintSpec.equality(ConstraintFunction.power(2), 1.0),
    ]
    curve, sol = maxent_utility(s, specs)
    # The density is unimodal, so the curve has exactly one inflection.
    rising = np.diff(sol.density) > 0
    assert rising[0] and not rising[-1]
    flips = np.count_nonzero(np.diff(rising.astype(int)))
    assert flips == 1
    # And the curve is rotation-symmetric about the mode: U(x) + U(-x) = 1.
    u_plus = np.asarray(curve.evaluate(s.nodes))
    u_minus = np.asarray(curve.evaluate(-s.nodes))
    assert np.max(np.abs(u_plus + u_minus - 1.0)) < 1e-8


# ---------------------------------------------------------- assessed curves

def test_single_assessment_gives_two_flats():
    s = Support.continuous(0.0, 1.0, 1024)
    curve, sol = maxent_utility_from_assessments(s, [(0.5, 0.8)])
    nodes = curve.support.nodes
    left = nodes < 0.5
    assert np.max(np.abs(sol.density[left] - 1.6)) < 1e-6
    assert np.max(np.abs(sol.density[~left] - 0.4)) < 1e-6
    assert curve.evaluate(0.5) == pytest.approx(0.8, abs=1e-6)
    assert curve.evaluate(0.25) == pytest.approx(0.4, abs=1e-6)
    assert curve.evaluate(0.75) == pytest.approx(0.9, abs=1e-6)


def test_consistent_assessment_keeps_uniform():
    s = Support.continuous(0.0, 1.0, 1024)
    curve, sol = maxent_utility_from_assessments(s, [(0.5, 0.5)])
    assert np.max(np.abs(sol.density - 1.0)) < 1e-9
    assert abs(sol.multipliers[0]) < 1e-8


def test_two_assessments_snap_to_grid_edges():
    # Points 2 and 5 on [0, 10]: 5 lands on an edge at every refinement,
    # 2 settles at 1.9921875 once the refinement cap is reached.
    s = Support.continuous(0.0, 10.0)
    curve, sol = maxent_utility_from_assessments(s, [(2.0, 0.5), (5.0, 0.9)])
    assert curve.support.n == 8192
    edges = curve.support.panel_edges
    assert 1.9921875 in edges
    assert 5.0 in edges
    nodes = curve.support.nodes
    expected = np.where(
        nodes < 1.9921875,
        0.5 / 1.9921875,
        np.where(nodes < 5.0, 0.4 / (5.0 - 1.9921875), 0.02),
    )
    assert np.max(np.abs(sol.density - expected)) < 1e-9
    assert curve.evaluate(1.9921875) == pytest.approx(0.5, abs=1e-8)
    assert curve.evaluate(5.0) == pytest.approx(0.9, abs=1e-8)
    # Against the nominal (unsnapped) plateau heights the error is bounded
    # by the snap distance as a share of the interval width.
    heights = (0.5 / 1.9921875, 0.4 / (5.0 - 1.9921875), 0.02)
    nominal = (0.25, 0.4 / 3.0, 0.02)
    for got, want in zip(heights, nominal):
        assert abs(got - want) / want < 6e-3


def test_flat_per_interval_beats_any_cell_split():
    # Brute force over densities that are constant on half-cells: mass 0.8
    # left of 0.5 split t/(1-t), mass 0.2 right split s/(1-s).  Entropy is
    # maximized when each pair is flat, which is the solver's answer.
    def cell_entropy(masses, widths):
        dens = masses / widths
        return -np.sum(masses * np.log(dens))

    widths = np.array([0.25, 0.25, 0.25, 0.25])
    best = -np.inf
    best_split = None
    for t in np.linspace(0.05, 0.95, 181):
        for u in np.linspace(0.05, 0.95, 181):
            masses = np.array([0.8 * t, 0.8 * (1 - t), 0.2 * u, 0.2 * (1 - u)])
            h = cell_entropy(masses, widths)
            if h > best:
                best, best_split = h, (t, u)
    assert best_split == pytest.approx((0.5, 0.5), abs=1e-9)

    s = Support.continuous(0.0, 1.0, 1024)
    _, sol = maxent_utility_from_assessments(s, [(0.5, 0.8)])
    assert sol.entropy >= best - 1e-9
    assert sol.entropy == pytest.approx(best, abs=1e-6)


def test_within_interval_perturbations_lose_entropy():
    # Move mass inside one assessment interval without changing any assessed
    # cumulative; entropy must not rise.
    s = Support.continuous(0.0, 1.0, 1024)
    curve, sol = maxent_utility_from_assessments(s, [(0.5, 0.8)])
    support = curve.support
    w = support.weights
    nodes = support.nodes
    rng = np.random.default_rng(77)
    h0 = sol.entropy
    left = nodes < 0.5
    for _ in range(20):
        bump = rng.normal(size=support.n) * left
        bump -= left * (np.dot(w, bump) / np.dot(w, left.astype(float)))
        scale = 0.5 * np.min(sol.density[left]) / (np.max(np.abs(bump)) + 1e-300)
        q = sol.density + scale * bump
        assert abs(np.dot(w, q) - 1.0) < 1e-12
        h_q = differential_entropy(q / np.dot(w, q), support).value
        assert h_q <= h0 + 1e-9


def test_assessments_validate():
    s = Support.continuous(0.0, 1.0, 128)
    with pytest.raises(ValidationError):
        maxent_utility_from_assessments(s, [])
    with pytest.raises(ValidationError):
        maxent_utility_from_assessments(s, [(0.5, 0.8), (0.4, 0.9)])
    with pytest.raises(ValidationError):
        maxent_utility_from_assessments(s, [(0.5, 0.8), (0.7, 0.7)])
    with pytest.raises(ValidationError):
        maxent_utility_from_assessments(s, [(0.5, 1.2)])
    with pytest.raises(ValidationError, match="endpoint"):
        maxent_utility_from_assessments(s, [(1e-9, 0.5)])
    with pytest.raises(ValidationError, match="same grid cell"):
        maxent_utility_from_assessments(
            s, [(0.5, 0.5), (0.5 + 1e-12, 0.6)]
        )


# ------------------------------------------------------------------ volumes

def test_utility_volume_closed_form():
    assert utility_volume(3) == 1.0
    assert utility_volume(4) == 0.5
    assert utility_volume(5) == pytest.approx(1.0 / 6.0, abs=1e-15)
    assert utility_volume(8) == pytest.approx(1.0 / 720.0, abs=1e-18)


def test_utility_volume_rejects_small_counts():
    with pytest.raises(ValidationError):
        utility_volume(2)


# ----------------------------------------------------------- classification

def test_classify_family_routes():
    mean = ConstraintSpec.equality(ConstraintFunction.power(1), 0.5)
    var = ConstraintSpec.equality(ConstraintFunction.power(2), 0.4)
    ind = ConstraintSpec.equality(ConstraintFunction.indicator(0.1, 0.4), 0.3)
    assert classify_family([]) == "linear_risk_neutral"
    assert classify_family([mean]) == "cara"
    assert classify_family([mean, var]) == "gaussian_s_shaped"
    assert classify_family([var, mean]) == "gaussian_s_shaped"
    assert classify_family([mean, ind]) == "general"
    assert classify_family([var]) == "general"


# -------------------------------------------------------------- spread laws

def test_spread_is_permutation_symmetric():
    from maxentutil.entropy import entropy_of_increments

    rng = np.random.default_rng(13)
    for _ in range(25):
        raw = rng.random(6)
        d = raw / raw.sum()
        h = entropy_of_increments(d).value
        perm = rng.permutation(d)
        assert abs(entropy_of_increments(perm).value - h) < 1e-12


def test_spread_is_continuous_under_tiny_transfers():
    from maxentutil.entropy import entropy_of_increments

    base = np.array([0.3, 0.25, 0.25, 0.2])
    h = entropy_of_increments(base).value
    eps = 1e-6
    moved = base + np.array([eps, -eps, 0.0, 0.0])
    assert abs(entropy_of_increments(moved / moved.sum()).value - h) < 1e-4


def test_spread_grows_with_outcome_count_for_even_vectors():
    from maxentutil.entropy import entropy_of_increments

    values = [
        entropy_of_increments(np.full(k - 1, 1.0 / (k - 1))).value
        for k in range(3, 10)
    ]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(math.log(2.0), abs=1e-15)


# ------------------------------------------------------------- curve checks

def test_curve_validation_rejects_mismatched_density():
    s = Support.continuous(0.0, 1.0, 256)
    good = density_to_curve(np.ones(s.n), s)
    with pytest.raises(ValidationError, match="slope"):
        UtilityCurve(
            support=s,
            density=np.full(s.n, 1.0),
            curve=np.asarray(good.curve) ** 3,
            edge_curve=None,
        )


def test_curve_knots_are_exact_at_panel_edges():
    s = Support.continuous(0.0, 1.0, 1024)
    mid = s.panel_edges[16]
    density = np.where(s.nodes <= mid, 1.6, 0.4)
    curve = density_to_curve(density, s)
    assert curve.evaluate(mid) == pytest.approx(1.6 * mid, abs=1e-13)

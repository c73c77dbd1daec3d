import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from lojmilnor.analytic import AnalyticMap, compose, variables
from lojmilnor.errors import DegenerateMapError, InputError, InsufficientDataError, PreconditionError
from lojmilnor.loja import (
    _min_theta_lp, comparability, composition_weight_check, equivalence_report, evaluate,
    jacequiv_crosscheck, jacquemard_j1, loja_fit, rho_inf_estimate,
)
from lojmilnor.maps import (
    complex_power, corpus, identity_map, linear_map, mixed_product, parallel_gradients,
    random_polynomial_map, shear_of_square, x_times_xy, zero_map,
)
from lojmilnor.sampling import RegionSpec, sample_region

ORIGIN = (0.0, 0.0)


def region(n=2, **kw):
    kw.setdefault("seed", 11)
    return RegionSpec.at_origin(n, **kw)


# sampling ------------------------------------------------------------------

def test_single_sample_at_radius():
    X = sample_region(RegionSpec((1.0, 2.0), radius=0.3, radial_levels=1, directions_per_level=1, seed=5))
    assert X.shape == (1, 2)
    assert np.linalg.norm(X[0] - [1.0, 2.0]) == pytest.approx(0.3, rel=1e-15)


def test_sampling_is_deterministic():
    r = RegionSpec((0.0, 0.0, 0.0), radius=0.7, radial_levels=5, directions_per_level=9, seed=-3)
    assert sample_region(r).tobytes() == sample_region(r).tobytes()


def test_geometric_radius_schedule():
    r = region(radius=0.5, radial_levels=20, directions_per_level=3)
    radii = np.linalg.norm(sample_region(r), axis=1)
    assert radii.min() == pytest.approx(0.5 * 2.0 ** -19, rel=1e-12)
    np.testing.assert_allclose(radii[::3], 0.5 * 2.0 ** -np.arange(20), rtol=1e-12)


def test_region_validation():
    with pytest.raises(InputError):
        RegionSpec((0.0,), radius=0.0)
    with pytest.raises(InputError):
        RegionSpec((0.0,), radial_levels=0)


# Ł-weight --------------------------------------------------------------------

def test_square_is_simple():
    rep = rho_inf_estimate(complex_power(2), region())
    assert abs(rep.rho_inf_hat - 1.0) <= 1e-10
    assert rep.simple_deviation <= 1e-9 and rep.simple


def test_linear_weight_is_constant():
    G = linear_map([[1, 2], [3, 4]])
    rep = rho_inf_estimate(G, region())
    assert abs(rep.rho_inf_hat - 4 / 30) <= 1e-10
    ss = evaluate(G, sample_region(region()))
    assert np.all(np.abs(ss.rho - 4 / 30) <= 1e-10)


def test_x_xy_reports_witness():
    rep = rho_inf_estimate(x_times_xy(), region())
    ss = evaluate(x_times_xy(), np.array([rep.min_witness]))
    assert ss.rho[0] == rep.rho_inf_hat
    assert 0.0 <= rep.rho_inf_hat <= 1.0


def test_all_excluded_is_degenerate():
    with pytest.raises(DegenerateMapError):
        rho_inf_estimate(zero_map(2, 2), region())


def test_excluded_count_counts_zero_gradients():
    x, y = variables(2)
    G = AnalyticMap(2, 1, (x * x + y * y,))
    r = RegionSpec((0.0, 0.0), radius=1.0, radial_levels=1, directions_per_level=4)
    X = np.vstack([sample_region(r), [[0.0, 0.0]]])
    from lojmilnor.loja import weight_from_samples
    rep = weight_from_samples(evaluate(G, X))
    assert rep.excluded_count == 1


@pytest.mark.parametrize("name", sorted(corpus()))
def test_weight_range_and_simplicity_on_corpus(name):
    G = corpus()[name]
    try:
        rep = rho_inf_estimate(G, region(G.n))
    except DegenerateMapError:
        pytest.skip("no defined sample")
    assert -1e-12 <= rep.rho_inf_hat <= 1.0 + 1e-10
    if rep.simple:
        assert abs(rep.rho_inf_hat - 1.0) <= 1e-9


@pytest.mark.parametrize("name", ["z2", "z3", "z4", "zbar_w2", "identity2"])
def test_simple_members_detected(name):
    G = corpus()[name]
    rep = rho_inf_estimate(G, region(G.n))
    assert rep.simple and abs(rep.rho_inf_hat - 1.0) <= 1e-9


@pytest.mark.parametrize("name", ["shear_z2", "linear_1234", "parallel", "x_xy"])
def test_non_simple_members_detected(name):
    G = corpus()[name]
    assert not rho_inf_estimate(G, region(G.n)).simple


# exponent fits ---------------------------------------------------------------

def envelope_oracle(d, levels, eps=0.5):
    """fixed_one θ̂ for z^d computed from |f| = r^d, σ₂ = d r^(d−1) on the radius schedule."""
    best = 0.0
    for j in range(levels):
        r = eps * 2.0 ** -j
        u = -d * math.log(r)
        v = -math.log(d) - (d - 1) * math.log(r)
        best = max(best, v / u)
    return best


# frozen from envelope_oracle; equal to (d−1)/d − log2(d)/(d·levels) for ε = 1/2
FROZEN = {(2, 24): 0.4791666666666667, (3, 24): 0.6446532986010951, (4, 24): 0.7291666666666666,
          (2, 32): 0.484375}


@pytest.mark.parametrize("d,levels", sorted(FROZEN))
def test_oracle_values_frozen(d, levels):
    assert envelope_oracle(d, levels) == pytest.approx(FROZEN[d, levels], abs=1e-14)
    closed = (d - 1) / d - math.log2(d) / (d * levels)
    assert FROZEN[d, levels] == pytest.approx(closed, abs=1e-14)


@pytest.mark.parametrize("d,levels", sorted(FROZEN))
def test_fixed_one_matches_envelope_oracle(d, levels):
    est = loja_fit(complex_power(d), ORIGIN, region(radial_levels=levels, directions_per_level=64))
    assert est.theta_hat == pytest.approx(FROZEN[d, levels], abs=1e-12)
    assert est.c_hat == 1.0 and est.valid


def test_square_exponent_within_tolerance_at_cli_depth():
    est = loja_fit(complex_power(2), ORIGIN, region(radial_levels=32, seed=42))
    assert 0.48 <= est.theta_hat <= 0.52


def test_identity_exponent_is_zero():
    est = loja_fit(identity_map(2), ORIGIN, region())
    assert est.theta_hat == 0.0 and est.valid


def test_weak_variant_on_square_of_line():
    x, = variables(1)
    G = AnalyticMap(1, 1, (x * x,))
    est = loja_fit(G, (0.0,), RegionSpec((0.0,), radius=0.5, radial_levels=32, directions_per_level=4),
                   variant="weak")
    assert abs(est.theta_hat - 0.5) <= 0.02


@pytest.mark.parametrize("d", [2, 3, 4])
def test_strong_and_weak_agree_on_simple_germs(d):
    # the √k factor shifts the envelope by log2(k)/(2·d·levels); 24 levels leave 1/96 for z²
    r = region(radial_levels=32)
    s = loja_fit(complex_power(d), ORIGIN, r, variant="strong").theta_hat
    w = loja_fit(complex_power(d), ORIGIN, r, variant="weak").theta_hat
    assert abs(s - w) <= 0.01


def test_fit_preconditions():
    with pytest.raises(PreconditionError):
        loja_fit(complex_power(2), ORIGIN, RegionSpec((0.1, 0.0)))
    with pytest.raises(InsufficientDataError) as info:
        loja_fit(zero_map(2, 2), ORIGIN, region())
    assert info.value.operation == "loja_fit"
    with pytest.raises(InputError):
        loja_fit(complex_power(2), ORIGIN, region(), variant="medium")


def test_fit_subtracts_base_value():
    x, y = variables(2)
    G = AnalyticMap(2, 2, (x * x - y * y + 3.0, 2.0 * x * y - 1.0))
    # deep levels would cancel r² against the constant, so stay at moderate radii
    a = loja_fit(G, ORIGIN, region(radial_levels=12))
    b = loja_fit(complex_power(2), ORIGIN, region(radial_levels=12))
    assert a.theta_hat == pytest.approx(b.theta_hat, abs=1e-6)


@given(st.integers(2, 4), st.integers(0, 2**31 - 1), st.sampled_from(["fixed_one", "two_param"]),
       st.sampled_from(["strong", "weak"]))
def test_envelope_feasibility_replay(d, seed, mode, variant):
    G = mixed_product() if d == 4 else complex_power(d)
    r = RegionSpec.at_origin(G.n, radius=0.5, radial_levels=10, directions_per_level=16, seed=seed)
    est = loja_fit(G, (0.0,) * G.n, r, variant=variant, c_mode=mode)
    ss = evaluate(G, sample_region(r))
    mag = np.linalg.norm(ss.values, axis=1)
    sig = ss.sigmas[:, -1] if variant == "strong" else np.sqrt(ss.trace)
    keep = (mag > 0) & (mag < 1) & (sig > 0)
    assert np.all(mag[keep] ** est.theta_hat <= est.c_hat * sig[keep] + 1e-12)
    assert est.theta_hat >= 0.0


@given(st.integers(2, 4), st.integers(1, 20), st.integers(1, 8), st.integers(0, 2**31 - 1))
def test_more_levels_never_lower_theta(d, levels, extra, seed):
    G = complex_power(d)
    small = RegionSpec.at_origin(2, radial_levels=levels + 1, directions_per_level=8, seed=seed)
    big = RegionSpec.at_origin(2, radial_levels=levels + 1 + extra, directions_per_level=8, seed=seed)
    assert loja_fit(G, ORIGIN, small, min_samples=1).theta_hat <= loja_fit(G, ORIGIN, big, min_samples=1).theta_hat


def _linprog_oracle(u, v):
    # minimise θ over (θ, L): −θuᵢ − L ≤ −vᵢ, θ ≥ 0, −50 ≤ L ≤ 50
    A = np.column_stack([-u, -np.ones_like(u)])
    res = linprog([1.0, 0.0], A_ub=A, b_ub=-v, bounds=[(0, None), (-50, 50)], method="highs")
    assert res.status == 0
    theta = res.x[0]
    # among θ-optimal points the smallest feasible L
    res2 = linprog([0.0, 1.0], A_ub=A, b_ub=-v, bounds=[(theta, theta + 1e-12), (-50, 50)], method="highs")
    return theta, res2.x[1]


@given(st.integers(0, 2**31 - 1), st.integers(1, 40), st.floats(-80.0, 80.0))
def test_two_param_lp_matches_linprog(seed, m, shift):
    r = np.random.default_rng(seed)
    u = r.uniform(0.01, 20.0, m)
    v = r.uniform(-5.0, 5.0, m) * u + shift
    theta, L = _min_theta_lp(u, v)
    t_ref, L_ref = _linprog_oracle(u, v)
    assert theta == pytest.approx(t_ref, abs=1e-7, rel=1e-7)
    assert L == pytest.approx(L_ref, abs=1e-6)
    assert np.all(theta * u + L >= v - 1e-9 * (1 + np.abs(v)))


def test_two_param_on_square():
    est = loja_fit(complex_power(2), ORIGIN, region(radial_levels=24), c_mode="two_param")
    assert est.valid and 0.0 <= est.theta_hat <= 0.5
    assert est.c_hat == pytest.approx(math.exp(est.log_c))


# equivalent forms, Jacquemard-type checks -----------------------------------

def test_equivalence_simple():
    rep = equivalence_report(complex_power(2), region())
    assert rep.inf_rho == pytest.approx(1.0, abs=1e-9)
    assert rep.inf_sigma_k_over_sqrt_trace == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert rep.inf_sigma_k_over_sigma_1 == pytest.approx(1.0, abs=1e-9)
    assert rep.consistent


def test_equivalence_parallel_and_linear():
    rep = equivalence_report(parallel_gradients(), region())
    assert max(rep.inf_rho, rep.inf_sigma_k_over_sqrt_trace, rep.inf_sigma_k_over_sigma_1) <= 1e-12
    assert rep.consistent
    lin = equivalence_report(linear_map([[1, 2], [3, 4]]), region())
    assert min(lin.inf_rho, lin.inf_sigma_k_over_sqrt_trace, lin.inf_sigma_k_over_sigma_1) > 0
    assert lin.consistent


def test_j1_examples():
    sq = jacquemard_j1(complex_power(2), region())
    assert sq.max_abs_cos <= 1e-15 and sq.tau_hat == pytest.approx(1.0) and sq.holds
    par = jacquemard_j1(parallel_gradients(), region())
    assert par.max_abs_cos == pytest.approx(1.0) and not par.holds
    sh = jacquemard_j1(shear_of_square(), region())
    assert 0.0 < sh.tau_hat < 1.0 and sh.holds
    with pytest.raises(InsufficientDataError):
        jacquemard_j1(zero_map(2, 2), region())
    with pytest.raises(InputError):
        jacquemard_j1(identity_map(3), region(3))


def test_comparability_examples():
    sq = comparability(complex_power(2), region())
    assert sq.A_hat == pytest.approx(1.0) and sq.B_hat == pytest.approx(1.0) and sq.comparable
    x, y = variables(2)
    cube = comparability(AnalyticMap(2, 2, (x, y * y * y)), region())
    assert cube.A_hat < 1e-6 and not cube.comparable
    lin = comparability(linear_map([[1, 2], [3, 4]]), region())
    assert lin.A_hat == pytest.approx(5 / math.sqrt(5)) and lin.B_hat == pytest.approx(5 / math.sqrt(5))


def test_jacequiv_examples():
    sq = jacequiv_crosscheck(complex_power(2), region())
    assert sq.applicable and sq.j1_holds and sq.positive_weight and sq.consistent
    par = jacequiv_crosscheck(parallel_gradients(), region())
    assert par.applicable and not par.j1_holds and not par.positive_weight and par.consistent
    sh = jacequiv_crosscheck(shear_of_square(), region())
    assert sh.applicable and sh.j1_holds and sh.positive_weight and sh.consistent and sh.bracket_ok
    x, y = variables(2)
    na = jacequiv_crosscheck(AnalyticMap(2, 2, (x, y * y * y)), region())
    assert not na.applicable and na.consistent is None


# composition ---------------------------------------------------------------

def test_linear_after_square():
    G, H = linear_map([[1, 2], [3, 4]]), complex_power(2)
    rep = composition_weight_check(G, H, region(radial_levels=8, directions_per_level=64))
    assert rep.inner_simple and rep.easycomp_holds and rep.max_easycomp_error <= 1e-8
    ss = evaluate(compose(G, H), sample_region(region()))
    assert np.all(np.abs(ss.rho - 4 / 30) <= 1e-10)


def test_identity_inner_is_exact():
    G = random_polynomial_map(np.random.default_rng(4), 2, 2)
    C = compose(G, identity_map(2))
    X = sample_region(RegionSpec((0.3, -0.2), radius=0.2, seed=1))
    assert np.array_equal(evaluate(C, X).rho, evaluate(G, X).rho, equal_nan=True)


def test_composition_shape_mismatch():
    with pytest.raises(InputError):
        composition_weight_check(identity_map(3), complex_power(2), region())


@given(st.integers(0, 2**31 - 1))
def test_composition_lower_bound_on_random_pairs(seed):
    r = np.random.default_rng(seed)
    n, m = int(r.integers(1, 4)), int(r.integers(1, 4))
    k = int(r.integers(1, m + 1))
    H = random_polynomial_map(r, n, m, degree=3)
    G = random_polynomial_map(r, m, k, degree=3)
    c = tuple(r.uniform(-0.5, 0.5, n))
    rep = composition_weight_check(G, H, RegionSpec(c, radius=0.3, radial_levels=3,
                                                    directions_per_level=8, seed=seed))
    assert rep.bound_holds

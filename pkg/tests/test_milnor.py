import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lojmilnor.analytic import AnalyticMap, Const, Mul, variables
from lojmilnor.errors import InputError, InsufficientDataError
from lojmilnor.maps import (
    complex_power, corpus, identity_map, linear_map, mixed_product, sphere_plus_x, x_times_xy,
)
from lojmilnor.milnor import (
    MAX_WITNESSES, condition_c_scan, milnor_a_scan, milnor_b_scan, milnor_pair_scan,
    milnor_radius_estimate, omega_field, probe, simple_c_facts,
)
from lojmilnor.sampling import RegionSpec

SIMPLE = {"z2": complex_power(2), "z3": complex_power(3), "zbar_w2": mixed_product()}


def ball(n, eps=0.5, **kw):
    return RegionSpec.at_origin(n, radius=eps, **kw)


def scaled(G, c):
    return AnalyticMap(G.n, G.k, tuple(Mul((Const(c), e)) for e in G.components))


# probe -----------------------------------------------------------------------

def test_probe_square_at_one():
    p = probe(complex_power(2), (1.0, 0.0))
    assert p.sigma_k_norm == pytest.approx(1.0, abs=1e-15)
    assert p.sigma_aug_norm <= 1e-15
    assert p.f_norm == pytest.approx(1.0) and p.radius == 1.0


def test_probe_at_origin_has_zero_augmented():
    for G in corpus().values():
        assert probe(G, np.zeros(G.n)).sigma_aug_norm == 0.0


def test_probe_dependent_pair():
    p = probe(sphere_plus_x(), (1.0, 0.0))
    assert p.sigma_k_norm <= 1e-15
    assert p.f_norm == pytest.approx(np.sqrt(2.0))


def test_probe_dimension_mismatch():
    with pytest.raises(InputError):
        probe(complex_power(2), (1.0, 0.0, 0.0))


@given(st.sampled_from(sorted(corpus())), st.integers(0, 2**31 - 1))
def test_probe_fields_in_range_and_scale_invariant(name, seed):
    G = corpus()[name]
    x = np.random.default_rng(seed).uniform(-1.0, 1.0, G.n)
    a, b = probe(G, x), probe(scaled(G, 2.0), x)
    for p in (a, b):
        for v in (p.sigma_k_norm, p.sigma_aug_norm, p.f_norm, p.radius):
            assert np.isfinite(v) and v >= 0.0
        assert p.sigma_k_norm <= 1.0 + 1e-10 and p.sigma_aug_norm <= 1.0 + 1e-10
    assert abs(a.sigma_k_norm - b.sigma_k_norm) <= 1e-12


# conditions (a) and (b) ------------------------------------------------------

@pytest.mark.parametrize("name", sorted(SIMPLE))
def test_simple_maps_hold_a_and_b(name):
    G = SIMPLE[name]
    a = milnor_a_scan(G, ball(G.n))
    b = milnor_b_scan(G, ball(G.n))
    assert a.holds and not a.witnesses
    assert b.holds and not b.witnesses


@pytest.mark.parametrize("d", [2, 3, 4])
def test_complex_powers_hold_a(d):
    assert milnor_a_scan(complex_power(d), ball(2, 1.0)).holds


@pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
def test_sphere_plus_x_fails_a(eps):
    rep = milnor_a_scan(sphere_plus_x(), ball(2, eps))
    assert not rep.holds and 1 <= len(rep.witnesses) <= MAX_WITNESSES
    for w in rep.witnesses:
        assert w.sigma_k_norm < 1e-8 and w.f_norm > 1e-8
        # witnesses sit near the x-axis where f = (x², x)
        assert abs(w.x[1]) <= 1e-6
        assert w.f_norm == pytest.approx(abs(w.x[0]) * np.hypot(w.x[0], 1.0), rel=1e-6)


def test_identity_holds_vacuously():
    a = milnor_a_scan(identity_map(2), ball(2))
    b = milnor_b_scan(identity_map(2), ball(2))
    assert a.holds and b.holds


def test_verdict_matches_witnesses():
    for G in corpus().values():
        for rep in (milnor_a_scan(G, ball(G.n, radial_levels=3, directions_per_level=16)),
                    milnor_b_scan(G, ball(G.n, radial_levels=3, directions_per_level=16))):
            assert rep.holds == (len(rep.witnesses) == 0)


def test_b_scan_default_r_min():
    rep = milnor_b_scan(complex_power(2), ball(2, 0.4))
    assert rep.tolerances["r_min"] == pytest.approx(0.004)


def test_x_xy_b_scan_regression():
    # locked on seed 0 with defaults: no admissible witness within tol_f
    rep = milnor_b_scan(x_times_xy(), ball(2))
    assert rep.holds and rep.samples_scanned == 8 * 64


def test_b_scan_degenerates_when_n_equals_k():
    # with n = k the augmented matrix has more columns than rows, so σ_{k+1} is 0 everywhere
    # and a witness only needs 0 < |G| ≤ tol_f beyond r_min
    rep = milnor_b_scan(complex_power(3), ball(2, 0.1))
    assert not rep.holds
    assert all(w.sigma_aug_norm <= 1e-30 for w in rep.witnesses)
    assert all(0.0 < w.f_norm <= 1e-8 for w in rep.witnesses)


def test_radius_estimates():
    sq = milnor_radius_estimate(complex_power(2), [1.0, 0.5, 0.1])
    assert sq.found and sq.epsilon == 1.0 and len(sq.reports) == 3
    bad = milnor_radius_estimate(sphere_plus_x(), [1.0, 0.1, 0.01])
    assert not bad.found and bad.epsilon is None
    assert all(not r["a"].holds for r in bad.reports)
    assert milnor_radius_estimate(identity_map(2), [0.3, 0.2]).epsilon == 0.3
    with pytest.raises(InputError):
        milnor_radius_estimate(identity_map(2), [])


# Milnor pairs ----------------------------------------------------------------

def test_pair_scan_square():
    est = milnor_pair_scan(complex_power(2), 1.0, 0.01)
    assert est.holds and est.transversality_margin >= 0.99
    assert est.failed_draws == 0 and est.interior_points >= 1000


@pytest.mark.parametrize("name", sorted(SIMPLE))
def test_pair_scan_simple_maps(name):
    G = SIMPLE[name]
    assert milnor_pair_scan(G, 0.5, 0.01).holds


def test_pair_scan_mixed_has_boundary_band():
    est = milnor_pair_scan(mixed_product(), 1.0, 0.01)
    assert est.boundary_points > 0 and est.transversality_margin > 1e-3


@pytest.mark.parametrize("delta", [0.01, 0.001])
def test_pair_scan_fails_on_dependent_locus(delta):
    est = milnor_pair_scan(sphere_plus_x(), 1.0, delta)
    assert not est.holds and est.witnesses
    assert all(abs(w.x[1]) <= 1e-6 for w in est.witnesses)


def test_pair_scan_empty_tube():
    with pytest.raises(InsufficientDataError) as info:
        milnor_pair_scan(complex_power(2), 0.5, 10.0)
    assert info.value.operation == "milnor_pair_scan"


def test_pair_scan_arguments():
    with pytest.raises(InputError):
        milnor_pair_scan(complex_power(2), 1.0, 0.0)
    with pytest.raises(InputError):
        milnor_pair_scan(complex_power(2), 1.0, 0.01, tube_samples=999)


@pytest.mark.parametrize("name", sorted(SIMPLE))
def test_pair_scan_monotone_in_delta_regression(name):
    # observed on the corpus, not a theorem
    G = SIMPLE[name]
    rng = np.random.default_rng(3)
    for _ in range(3):
        d = 0.02
        d2 = float(rng.uniform(d / 2, d))
        assert milnor_pair_scan(G, 0.5, d).holds
        assert milnor_pair_scan(G, 0.5, d2).holds


def test_pair_scan_deterministic():
    a = milnor_pair_scan(mixed_product(), 0.7, 0.01, seed=9)
    b = milnor_pair_scan(mixed_product(), 0.7, 0.01, seed=9)
    assert a == b


# condition (c) ---------------------------------------------------------------

def test_omega_examples():
    x, y = 0.3, -0.7
    r2 = x * x + y * y
    np.testing.assert_allclose(omega_field(complex_power(2), (x, y)), [-2 * y * r2, 2 * x * r2],
                               rtol=1e-14)
    np.testing.assert_array_equal(omega_field(identity_map(2), (1.0, 1.0)), [-1.0, 1.0])
    assert np.all(omega_field(complex_power(3), (0.0, 0.0)) == 0.0)


def test_omega_requires_pair():
    with pytest.raises(InputError):
        omega_field(identity_map(3), (0.0, 0.0, 0.0))
    with pytest.raises(InputError):
        condition_c_scan(identity_map(3), ball(3))
    with pytest.raises(InputError):
        simple_c_facts(linear_map([[1.0, 2.0, 3.0]]), ball(3))


@given(st.sampled_from(sorted(SIMPLE)), st.integers(0, 2**31 - 1), st.floats(1e-8, 1e-4))
def test_omega_vanishes_on_zero_set(name, seed, scale):
    f = SIMPLE[name]
    x = np.random.default_rng(seed).uniform(-scale, scale, f.n)
    if np.linalg.norm(f.values(x[None])[0]) <= 1e-14:
        assert np.linalg.norm(omega_field(f, x)) <= 1e-12


@pytest.mark.parametrize("name", sorted(SIMPLE))
def test_condition_c_holds_on_simple_maps(name):
    f = SIMPLE[name]
    rep = condition_c_scan(f, ball(f.n))
    assert rep.holds
    assert rep.stats["in_band"] > 0
    assert rep.stats["max_abs_right"] <= 1e-9 and rep.stats["min_left"] > 0.0


def test_condition_c_identity_regression():
    rep = condition_c_scan(identity_map(2), ball(2), refine=False)
    # x always lies in the span; left = 2|ω|²|x|², right = 2(x·ω)² = 0 since ω ⟂ x
    assert rep.stats["in_band"] == rep.samples_scanned
    assert rep.holds


@pytest.mark.parametrize("name", sorted(SIMPLE))
def test_simple_c_facts(name):
    f = SIMPLE[name]
    facts = simple_c_facts(f, ball(f.n))
    assert facts.applicable and facts.radial_positive and facts.omega_orthogonal and facts.holds
    assert facts.min_radial > 0.0 and facts.max_orthogonality_residual <= 1e-9


def test_simple_c_facts_not_applicable():
    facts = simple_c_facts(linear_map([[1, 2], [3, 4]]), ball(2))
    assert not facts.applicable and not facts.holds and facts.radial_positive is None

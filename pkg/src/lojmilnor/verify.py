"""Randomised property suites behind ``lojmilnor verify``.

Each property is a function of one seeded generator draw. A violation is kept
with the inputs that produced it, serialised so the case can be replayed.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .analytic import AnalyticMap, Const, GradientFrame, Mul, compose
from .errors import InputError
from .loja import composition_weight_check, loja_fit, rho_inf_estimate
from .maps import complex_power, corpus, linear_map, random_polynomial_map
from .milnor import condition_c_scan, milnor_a_scan, omega_field, probe
from .sampling import RegionSpec, make_rng
from .spectra import (
    check_geom_mean, check_prodsv, check_slw_bound, check_trace_sandwich, rho, rho_f_angle,
    singular_values, singular_values_batch,
)

SUITES = ("spectra", "loja", "milnor")


@dataclass
class PropertyResult:
    name: str
    passed: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class VerifySummary:
    suite: str
    trials: int
    seed: int
    properties: list[PropertyResult]

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.properties)


def _random_frame(rng: np.random.Generator, max_n: int = 6, max_k: int = 4) -> np.ndarray:
    k = int(rng.integers(1, max_k + 1))
    n = int(rng.integers(k, max_n + 1))
    return rng.uniform(-1.0, 1.0, (n, k))


def _random_pair(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    A = _random_frame(rng)
    m = int(rng.integers(1, 7))
    B = rng.uniform(-1.0, 1.0, (m, A.shape[0]))
    return A, B


# --------------------------------------------------------------------------
# spectra


def _p_dependent_frame(rng):
    A = _random_frame(rng)
    k = A.shape[1]
    if k == 1:
        A[:, 0] = 0.0
    else:
        c = rng.uniform(-1.0, 1.0, k - 1)
        A[:, -1] = A[:, :-1] @ c
    s = singular_values(A).sigmas
    return s[-1] <= 1e-9 * max(s[0], 1.0), {"A": A}


def _p_sigma1_band(rng):
    A = _random_frame(rng)
    sp = singular_values(A)
    if sp.trace <= 0.0:
        return True, {"A": A}
    q = sp.sigma_max / np.sqrt(sp.trace)
    k = A.shape[1]
    return (1.0 / np.sqrt(k) - 1e-10 <= q <= 1.0 + 1e-10), {"A": A, "ratio": q}


def _p_geom_mean(rng):
    A = _random_frame(rng)
    rec = check_geom_mean(nx.gram(A))
    return rec.holds, {"A": A, "record": rec}


def _p_geom_equality(rng):
    # orthogonal columns of a common length: equality must be detected
    k = int(rng.integers(1, 5))
    n = int(rng.integers(k, 7))
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    A = float(rng.uniform(0.1, 3.0)) * Q
    rec = check_geom_mean(nx.gram(A))
    return rec.holds and rec.equal_means and rec.equal_eigenvalues, {"A": A, "record": rec}


def _p_geom_perturbed(rng):
    # one column stretched by a clearly non-unit factor: strict inequality
    k = int(rng.integers(2, 5))
    n = int(rng.integers(k, 7))
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    Q[:, 0] *= float(rng.uniform(1.1, 2.0))
    rec = check_geom_mean(nx.gram(Q))
    return rec.holds and not rec.equal_means and not rec.equal_eigenvalues, {"A": Q, "record": rec}


def _p_prodsv(rng):
    A, B = _random_pair(rng)
    rec = check_prodsv(A, B)
    return rec.holds, {"A": A, "B": B, "record": rec}


def _p_trace_sandwich(rng):
    A, B = _random_pair(rng)
    rec = check_trace_sandwich(A, B)
    return rec.holds, {"A": A, "B": B, "record": rec}


def _p_slw(rng):
    A, B = _random_pair(rng)
    if np.all(nx.matmul(B, A) == 0.0):
        return True, {"A": A, "B": B}
    rec = check_slw_bound(A, B)
    return rec.holds, {"A": A, "B": B, "record": rec}


def _p_transpose(rng):
    A = _random_frame(rng)
    s = np.asarray(singular_values(A).sigmas)
    t = singular_values_batch(A.T[None])[0]
    r = min(len(s), len(t))
    return bool(np.all(np.abs(s[:r] - t[:r]) <= 1e-10 * max(1.0, s[0]))), {"A": A}


def _p_rho_angle(rng):
    A = rng.uniform(-1.0, 1.0, (int(rng.integers(2, 7)), 2))
    f = GradientFrame.from_matrix(A)
    r, a = rho(f).rho, rho_f_angle(f)
    return abs(r - a) <= 1e-8, {"A": A, "rho": r, "angle": a}


# --------------------------------------------------------------------------
# loja


def _small_region(rng, n, center=None) -> RegionSpec:
    c = tuple(rng.uniform(-0.5, 0.5, n)) if center is None else center
    return RegionSpec(c, radius=0.25, radial_levels=2, directions_per_level=8,
                      seed=int(rng.integers(0, 2**31)))


def _p_easycomp(rng):
    G = linear_map(rng.uniform(-2.0, 2.0, (2, 2)))
    H = complex_power(int(rng.integers(2, 5)))
    region = _small_region(rng, 2)
    rep = composition_weight_check(G, H, region)
    ok = rep.bound_holds and (rep.easycomp_holds is not False)
    return ok, {"G": G, "H": H, "region": region.to_dict(), "record": rep}


def _p_composition_bound(rng):
    n = int(rng.integers(1, 4))
    m = int(rng.integers(1, 4))
    k = int(rng.integers(1, m + 1))
    H = random_polynomial_map(rng, n, m, degree=2, terms=3)
    G = random_polynomial_map(rng, m, k, degree=2, terms=3)
    region = _small_region(rng, n)
    rep = composition_weight_check(G, H, region)
    return rep.bound_holds, {"G": G, "H": H, "region": region.to_dict(), "record": rep}


def _p_rho_range(rng):
    n = int(rng.integers(1, 4))
    k = int(rng.integers(1, 4))
    G = random_polynomial_map(rng, n, k, degree=3, terms=3)
    region = _small_region(rng, n)
    try:
        rep = rho_inf_estimate(G, region)
    except Exception:  # a map can vanish identically on a tiny sample
        return True, {"G": G}
    return -1e-12 <= rep.rho_inf_hat <= 1.0 + 1e-10, {"G": G, "region": region.to_dict(), "record": rep}


def _p_envelope_feasible(rng):
    d = int(rng.integers(2, 5))
    G = complex_power(d)
    region = RegionSpec.at_origin(2, radius=0.5, radial_levels=6, directions_per_level=8,
                                  seed=int(rng.integers(0, 2**31)))
    est = loja_fit(G, (0.0, 0.0), region, c_mode="fixed_one" if rng.random() < 0.5 else "two_param")
    return est.max_residual <= 1e-12, {"G": G, "region": region.to_dict(), "record": est}


# --------------------------------------------------------------------------
# milnor


def _scaled(G: AnalyticMap, c: float) -> AnalyticMap:
    return AnalyticMap(G.n, G.k, tuple(Mul((Const(c), e)) for e in G.components), f"{c}*{G.label}")


_SIMPLE = ("z2", "z3", "zbar_w2")


def _p_omega_on_zero_set(rng):
    f = corpus()[_SIMPLE[int(rng.integers(0, len(_SIMPLE)))]]
    x = np.zeros(f.n)
    if rng.random() < 0.5:
        x = rng.uniform(-1e-5, 1e-5, f.n)
    val = float(nx.norm(f.values(x[None]))[0])
    if val > 1e-14:
        return True, {"x": x}
    w = omega_field(f, x)
    return float(np.linalg.norm(w)) <= 1e-12, {"map": f.label, "x": x}


def _p_probe_scale(rng):
    names = sorted(corpus())
    G = corpus()[names[int(rng.integers(0, len(names)))]]
    x = rng.uniform(-1.0, 1.0, G.n)
    a, b = probe(G, x), probe(_scaled(G, 2.0), x)
    ok = abs(a.sigma_k_norm - b.sigma_k_norm) <= 1e-12
    return ok, {"map": G.label, "x": x, "plain": a, "scaled": b}


def _p_simple_a_scan(rng):
    G = corpus()[_SIMPLE[int(rng.integers(0, len(_SIMPLE)))]]
    region = RegionSpec.at_origin(G.n, radius=float(rng.uniform(0.1, 1.0)), radial_levels=4,
                                  directions_per_level=16, seed=int(rng.integers(0, 2**31)))
    rep = milnor_a_scan(G, region)
    return rep.holds, {"map": G.label, "region": region.to_dict(), "record": rep}


def _p_simple_c_scan(rng):
    G = corpus()[_SIMPLE[int(rng.integers(0, len(_SIMPLE)))]]
    region = RegionSpec.at_origin(G.n, radius=float(rng.uniform(0.1, 1.0)), radial_levels=4,
                                  directions_per_level=16, seed=int(rng.integers(0, 2**31)))
    rep = condition_c_scan(G, region)
    return rep.holds, {"map": G.label, "region": region.to_dict(), "record": rep}


PROPERTIES: dict[str, list[tuple[str, Callable]]] = {
    "spectra": [
        ("dependent_columns_sigma_k_zero", _p_dependent_frame),
        ("sigma1_over_sqrt_trace_band", _p_sigma1_band),
        ("geometric_mean_bound", _p_geom_mean),
        ("geometric_mean_equality", _p_geom_equality),
        ("geometric_mean_strict", _p_geom_perturbed),
        ("product_sigma_k_bound", _p_prodsv),
        ("trace_sandwich", _p_trace_sandwich),
        ("product_weight_bound", _p_slw),
        ("transpose_spectrum", _p_transpose),
        ("rho_angle_formula", _p_rho_angle),
    ],
    "loja": [
        ("simple_inner_composition_equality", _p_easycomp),
        ("composition_weight_bound", _p_composition_bound),
        ("rho_in_unit_interval", _p_rho_range),
        ("envelope_feasible", _p_envelope_feasible),
    ],
    "milnor": [
        ("omega_vanishes_on_zero_set", _p_omega_on_zero_set),
        ("probe_scale_invariance", _p_probe_scale),
        ("simple_maps_condition_a", _p_simple_a_scan),
        ("simple_maps_condition_c", _p_simple_c_scan),
    ],
}


def _replay(inputs: dict) -> dict:
    from .analytic import map_to_obj

    out = {}
    for k, v in inputs.items():
        out[k] = map_to_obj(v) if isinstance(v, AnalyticMap) else v
    return out


def run_suite(suite: str = "all", trials: int = 100, seed: int = 0,
              max_failures: int = 5) -> VerifySummary:
    """Run every property of ``suite`` for ``trials`` seeded draws each."""
    if trials < 1:
        raise InputError("trials must be >= 1")
    if suite != "all" and suite not in SUITES:
        raise InputError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    names = SUITES if suite == "all" else (suite,)
    results = []
    for si, s in enumerate(names):
        for pi, (pname, fn) in enumerate(PROPERTIES[s]):
            # one independent stream per property, so suites can run in any subset
            rng = np.random.default_rng([int(seed) % 2**64, SUITES.index(s), pi])
            res = PropertyResult(f"{s}.{pname}")
            for t in range(trials):
                ok, inputs = fn(rng)
                if ok:
                    res.passed += 1
                else:
                    res.failed += 1
                    if len(res.failures) < max_failures:
                        res.failures.append({"trial": t, "inputs": _replay(inputs)})
            results.append(res)
    return VerifySummary(suite, trials, int(seed), results)

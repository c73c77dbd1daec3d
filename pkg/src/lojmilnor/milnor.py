"""Sampled detectors for Milnor's conditions (a), (b), (c) and Milnor pairs.

Dependence of gradient families is measured by normalised minimal singular
values, so "linearly dependent" becomes "σ_min/σ_max below tol_dep". Verdicts
are statements about the samples actually scanned, never proofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .analytic import AnalyticMap
from .errors import InputError, InsufficientDataError
from .loja import SIMPLE_TOL, evaluate, weight_from_samples
from .newton import damped_newton
from .sampling import RegionSpec, make_rng, sample_region, unit_vectors
from .spectra import singular_values_batch

MAX_WITNESSES = 32
ZERO_F = 1e-300
REFINE_BELOW = 0.1


@dataclass(frozen=True)
class DependenceProbe:
    x: tuple[float, ...]
    sigma_k_norm: float
    sigma_aug_norm: float
    f_norm: float
    radius: float


@dataclass(frozen=True, eq=False)
class _Probes:
    X: np.ndarray
    values: np.ndarray
    A: np.ndarray
    sigma_k_norm: np.ndarray
    sigma_aug_norm: np.ndarray
    f_norm: np.ndarray
    radius: np.ndarray

    def record(self, i: int) -> DependenceProbe:
        return DependenceProbe(tuple(float(v) for v in self.X[i]), float(self.sigma_k_norm[i]),
                               float(self.sigma_aug_norm[i]), float(self.f_norm[i]),
                               float(self.radius[i]))


def _normalized_min(s: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(s[:, 0] > 0.0, s[:, -1] / np.where(s[:, 0] > 0.0, s[:, 0], 1.0), 0.0)


def _probe_batch(G: AnalyticMap, X) -> _Probes:
    X = np.asarray(X, dtype=float)
    vals, A = G.jet(X)
    aug = np.concatenate([2.0 * X[:, :, None], A], axis=2)
    s = singular_values_batch(A)
    s_aug = singular_values_batch(aug)
    return _Probes(X, vals, A, _normalized_min(s), _normalized_min(s_aug),
                   nx.norm(vals), nx.norm(X))


def _sigma_k_norm(G: AnalyticMap, X: np.ndarray) -> np.ndarray:
    _, A = G.jet(X)
    return _normalized_min(singular_values_batch(A))


def probe(G: AnalyticMap, x) -> DependenceProbe:
    """Normalised dependence measures of {∇gᵢ} and {∇r, ∇gᵢ} at x (r = |x|²)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (G.n,):
        raise InputError(f"expected a point of dimension {G.n}, got shape {x.shape}")
    return _probe_batch(G, x[None]).record(0)


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    verdict: str                      # "holds-on-samples" | "fails"
    witnesses: tuple[DependenceProbe, ...]
    tolerances: dict
    samples_scanned: int
    stats: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds-on-samples"


def _report(condition, probes: _Probes, mask, tolerances, scanned, stats=None) -> ConditionReport:
    idx = np.flatnonzero(mask)[:MAX_WITNESSES]
    wit = tuple(probes.record(int(i)) for i in idx)
    return ConditionReport(condition, "fails" if wit else "holds-on-samples", wit,
                           dict(tolerances), int(scanned), dict(stats or {}))


def _in_region(X: np.ndarray, region: RegionSpec) -> np.ndarray:
    d = X - np.asarray(region.center)
    return np.sqrt(np.sum(d * d, axis=1)) <= region.radius * (1.0 + 1e-12)


def refine_to_critical(G: AnalyticMap, X: np.ndarray, target: float) -> tuple[np.ndarray, np.ndarray]:
    """Newton-project points onto {σ_k/σ₁ = 0}; returns (points, converged)."""
    res = damped_newton(lambda Y: _sigma_k_norm(G, Y)[:, None], X, tol=target)
    return res.X, res.converged


def milnor_a_scan(G: AnalyticMap, region: RegionSpec, tol_dep: float = 1e-8,
                  tol_f: float = 1e-8, refine: bool = True) -> ConditionReport:
    """Look for critical-like points off V(G).

    A witness has σ_k/σ₁ < tol_dep and |G| > tol_f. Samples already closer than
    0.1 to the critical locus are also Newton-refined onto it (and kept when the
    refined point stays in the ball), since random points never land exactly on
    a positive-codimension set.
    """
    if region.dim != G.n:
        raise InputError(f"region has dimension {region.dim} but the map has n={G.n}")
    X = sample_region(region)
    pr = _probe_batch(G, X)
    mask = (pr.sigma_k_norm < tol_dep) & (pr.f_norm > tol_f)
    refined = 0
    if refine:
        cand = np.flatnonzero(pr.sigma_k_norm < REFINE_BELOW)
        if cand.size:
            Y, conv = refine_to_critical(G, X[cand], 1e-3 * tol_dep)
            keep = conv & _in_region(Y, region)
            refined = int(keep.sum())
            if refined:
                pr_r = _probe_batch(G, Y[keep])
                pr = _concat(pr, pr_r)
                mask = np.concatenate([mask, (pr_r.sigma_k_norm < tol_dep) & (pr_r.f_norm > tol_f)])
    return _report("a", pr, mask, {"tol_dep": tol_dep, "tol_f": tol_f, "r_min": None},
                   len(X), {"refined_points": refined})


def _concat(a: _Probes, b: _Probes) -> _Probes:
    return _Probes(*(np.concatenate([getattr(a, f), getattr(b, f)])
                     for f in ("X", "values", "A", "sigma_k_norm", "sigma_aug_norm",
                               "f_norm", "radius")))


def milnor_b_scan(G: AnalyticMap, region: RegionSpec, tol_dep: float = 1e-8,
                  tol_f: float = 1e-8, r_min: float | None = None) -> ConditionReport:
    """Look for points of 𝔅 − X accumulating on X away from the origin.

    A witness has σ_{k+1}/σ₁ of [2x | A] below tol_dep, 0 < |G| ≤ tol_f and
    |x| > r_min (default ε/100).
    """
    if region.dim != G.n:
        raise InputError(f"region has dimension {region.dim} but the map has n={G.n}")
    if r_min is None:
        r_min = region.radius / 100.0
    X = sample_region(region)
    pr = _probe_batch(G, X)
    mask = ((pr.sigma_aug_norm < tol_dep) & (pr.f_norm > ZERO_F) & (pr.f_norm <= tol_f)
            & (pr.radius > r_min))
    return _report("b", pr, mask, {"tol_dep": tol_dep, "tol_f": tol_f, "r_min": r_min}, len(X))


@dataclass(frozen=True)
class RadiusEstimate:
    epsilon: float | None
    found: bool
    reports: tuple[dict, ...]


def milnor_radius_estimate(G: AnalyticMap, epsilons, radial_levels: int = 8,
                           directions_per_level: int = 64, seed: int = 0,
                           tol_dep: float = 1e-8, tol_f: float = 1e-8) -> RadiusEstimate:
    """Largest ε among ``epsilons`` whose ball scan passes both (a) and (b)."""
    eps = [float(e) for e in epsilons]
    if not eps:
        raise InputError("need at least one epsilon")
    reports = []
    best = None
    for e in eps:
        region = RegionSpec.at_origin(G.n, radius=e, radial_levels=radial_levels,
                                      directions_per_level=directions_per_level, seed=seed)
        a = milnor_a_scan(G, region, tol_dep, tol_f)
        b = milnor_b_scan(G, region, tol_dep, tol_f)
        reports.append({"epsilon": e, "a": a, "b": b})
        if a.holds and b.holds and (best is None or e > best):
            best = e
    return RadiusEstimate(best, best is not None, tuple(reports))


# --------------------------------------------------------------------------
# Milnor pairs


@dataclass(frozen=True)
class MilnorPairEstimate:
    epsilon: float
    delta: float
    transversality_margin: float
    verdict: str
    interior_points: int
    boundary_points: int
    failed_draws: int
    witnesses: tuple[DependenceProbe, ...] = ()

    @property
    def holds(self) -> bool:
        return self.verdict == "holds-on-samples"


def _tube_residual(G: AnalyticMap, delta: float):
    """(|G|² − δ²)/(2δ) and its gradient; smooth, and ≈ |G| − δ near the tube."""
    def fun(X):
        return ((nx.sqnorm(G.values(X)) - delta * delta) / (2.0 * delta))[:, None]

    def grad(X):
        vals, A = G.jet(X)
        return np.einsum("ink,ik->in", A, vals) / delta

    return fun, grad


def _ray_projection(G: AnalyticMap, U: np.ndarray, t0: np.ndarray, delta: float, tol: float):
    """Newton in the radial parameter t along fixed directions u: X = t·u.

    Unknowns are stacked as (t, u) with a zero Jacobian in u, so the
    minimum-norm step moves t only. Projecting along rays avoids the zig-zag
    a full-space step shows when one gradient direction dominates.
    """
    fun, grad = _tube_residual(G, delta)

    def res(Y):
        return fun(Y[:, :1] * Y[:, 1:])

    def jac(Y):
        U_ = Y[:, 1:]
        J = np.zeros((len(Y), 1, Y.shape[1]))
        J[:, 0, 0] = nx.dot(grad(Y[:, :1] * U_), U_)
        return J

    out = damped_newton(res, np.hstack([t0[:, None], U]), jac, tol=tol)
    return out.X[:, :1] * out.X[:, 1:], out.converged


def milnor_pair_scan(G: AnalyticMap, epsilon: float, delta: float, tube_samples: int = 1000,
                     seed: int = 0, tol_dep: float = 1e-8) -> MilnorPairEstimate:
    """Check that G is a submersion on the tube {|G| = δ} ∩ B_ε, and that (G, |x|²)
    is one near the bounding sphere.

    Seeded draws in the ball are Newton-projected onto the tube along their
    rays from the origin; a quarter of
    them are also projected onto tube ∩ S_ε to populate the boundary band.
    Near-critical tube points are refined onto the critical locus within the
    tube. More than half the tube projections failing is an error.
    """
    if not (epsilon > 0 and delta > 0):
        raise InputError("epsilon and delta must be positive")
    if tube_samples < 1000:
        raise InputError("tube_samples must be at least 1000")
    n = G.n
    rng = make_rng(seed)
    U = unit_vectors(rng, tube_samples, n)
    radii = epsilon * rng.uniform(0.0, 1.0, tube_samples) ** (1.0 / n)
    fun, grad = _tube_residual(G, delta)
    tol = 1e-10 * delta
    P, conv = _ray_projection(G, U, radii, delta, tol)
    ok = conv & (nx.norm(P) <= epsilon)
    failed = int((~ok).sum())
    if failed > tube_samples / 2:
        raise InsufficientDataError(
            "milnor_pair_scan", f"{failed} of {tube_samples} tube projections failed")
    T = P[ok]

    def joint_res(X):
        return np.concatenate([fun(X), (nx.sqnorm(X)[:, None] - epsilon ** 2) / (2 * epsilon)], axis=1)

    def joint_jac(X):
        return np.stack([grad(X), X / epsilon], axis=1)

    nb = max(1, tube_samples // 4)
    starts = U[:nb] * epsilon
    bproj = damped_newton(joint_res, starts, joint_jac, tol=tol)
    B = bproj.X[bproj.converged]

    pr = _probe_batch(G, T)
    cand = np.flatnonzero(pr.sigma_k_norm < REFINE_BELOW)
    if cand.size:
        def crit_res(X):
            return np.concatenate([fun(X), _sigma_k_norm(G, X)[:, None]], axis=1)

        ref = damped_newton(crit_res, T[cand], tol=1e-3 * tol_dep * max(delta, 1.0))
        Y = ref.X[ref.converged & (nx.norm(ref.X) <= epsilon)]
        if len(Y):
            T = np.vstack([T, Y])
            pr = _probe_batch(G, T)

    band_lo = epsilon * (1.0 - 1e-3)
    interior = pr.radius < epsilon * (1.0 - 1e-6)
    band = pr.radius >= band_lo
    if len(B):
        prb = _probe_batch(G, B)
        pr_all = _concat(pr, prb)
        interior = np.concatenate([interior, np.zeros(len(B), dtype=bool)])
        band = np.concatenate([band, prb.radius >= band_lo])
    else:
        pr_all = pr
    meas = np.full(len(pr_all.X), np.inf)
    meas[interior] = pr_all.sigma_k_norm[interior]
    meas[band] = np.minimum(meas[band], pr_all.sigma_aug_norm[band])
    checked = interior | band
    margin = float(np.min(meas[checked])) if checked.any() else float("inf")
    bad = checked & (meas <= tol_dep)
    wit = tuple(pr_all.record(int(i)) for i in np.flatnonzero(bad)[:MAX_WITNESSES])
    verdict = "holds-on-samples" if margin > tol_dep else "fails"
    return MilnorPairEstimate(float(epsilon), float(delta), margin, verdict,
                              int(interior.sum()), int(band.sum()), failed, wit)


# --------------------------------------------------------------------------
# condition (c)


def _require_pair(f: AnalyticMap) -> None:
    if f.k != 2:
        raise InputError(f"condition (c) needs a map into R^2, got k={f.k}")


def _omega_batch(vals: np.ndarray, A: np.ndarray) -> np.ndarray:
    g, h = vals[:, 0], vals[:, 1]
    return -h[:, None] * A[:, :, 0] + g[:, None] * A[:, :, 1]


def _grad_sq_batch(vals: np.ndarray, A: np.ndarray) -> np.ndarray:
    # ∇|f|² = 2g∇g + 2h∇h
    g, h = vals[:, 0], vals[:, 1]
    return 2.0 * g[:, None] * A[:, :, 0] + 2.0 * h[:, None] * A[:, :, 1]


def omega_field(f: AnalyticMap, x) -> np.ndarray:
    """ω = −h∇g + g∇h at x."""
    _require_pair(f)
    x = np.asarray(x, dtype=float)
    if x.shape != (f.n,):
        raise InputError(f"expected a point of dimension {f.n}, got shape {x.shape}")
    vals, A = f.jet(x[None])
    return _omega_batch(vals, A)[0]


def _span_residual(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """(x − P x)/|x| with P the orthogonal projection onto span(∇g, ∇h)."""
    out = np.full(X.shape, np.nan)
    with np.errstate(over="ignore", invalid="ignore"):
        M = nx.gram(A)
        rhs = np.einsum("ink,in->ik", A, X)
    # points thrown far out by a Newton step overflow; leave them NaN
    ok = np.all(np.isfinite(M), axis=(1, 2)) & np.all(np.isfinite(rhs), axis=1)
    if not ok.any():
        return out
    coef = np.einsum("ikl,il->ik", np.linalg.pinv(M[ok], rcond=1e-13), rhs[ok])
    r = X[ok] - np.einsum("ink,ik->in", A[ok], coef)
    nrm = nx.norm(X[ok])
    out[ok] = r / np.where(nrm > 0.0, nrm, 1.0)[:, None]
    return out


def condition_c_scan(f: AnalyticMap, region: RegionSpec, span_tol: float = 1e-6,
                     refine: bool = True, slack: float = 1e-12) -> ConditionReport:
    """Test the strict (c) inequality wherever x lies in span(∇g, ∇h).

    Span membership is a least-squares residual below ``span_tol``. With
    ``refine`` every sample is also Newton-projected onto the span locus.
    A witness is an in-band point off X where
    |ω|²(x·∇|f|²) ≤ (∇|f|²·ω)(x·ω), up to a relative slack.
    """
    _require_pair(f)
    if region.dim != f.n:
        raise InputError(f"region has dimension {region.dim} but the map has n={f.n}")
    X = sample_region(region)
    refined = 0
    if refine:
        def res(Y):
            _, A = f.jet(Y)
            return _span_residual(A, Y)

        out = damped_newton(res, X, tol=1e-3 * span_tol)
        keep = out.converged & _in_region(out.X, region)
        refined = int(keep.sum())
        X = np.vstack([X, out.X[keep]])
    pr = _probe_batch(f, X)
    vals, A = pr.values, pr.A
    inband = (nx.norm(_span_residual(A, X)) < span_tol) & (pr.f_norm > ZERO_F)
    om = _omega_batch(vals, A)
    gs = _grad_sq_batch(vals, A)
    left = nx.sqnorm(om) * nx.dot(X, gs)
    right = nx.dot(gs, om) * nx.dot(X, om)
    viol = inband & (left <= right + slack * (np.abs(left) + np.abs(right)))
    stats = {
        "in_band": int(inband.sum()),
        "refined_points": refined,
        "max_abs_right": float(np.max(np.abs(right[inband]))) if inband.any() else 0.0,
        "min_left": float(np.min(left[inband])) if inband.any() else None,
    }
    return _report("c", pr, viol, {"span_tol": span_tol, "slack": slack}, len(X) - refined, stats)


@dataclass(frozen=True)
class SimpleCFacts:
    applicable: bool
    radial_positive: bool | None       # x·∇|f|² > 0 at every sample off X
    omega_orthogonal: bool | None      # |∇|f|²·ω| ≤ 1e-9 (1 + |∇|f|²||ω|)
    min_radial: float | None
    max_orthogonality_residual: float | None
    samples_used: int
    simple_deviation: float

    @property
    def holds(self) -> bool:
        return bool(self.applicable and self.radial_positive and self.omega_orthogonal)


def simple_c_facts(f: AnalyticMap, region: RegionSpec) -> SimpleCFacts:
    """For a simple map: x·∇|f|² > 0 and ∇|f|² ⟂ ω at every sample off X."""
    _require_pair(f)
    if region.dim != f.n:
        raise InputError(f"region has dimension {region.dim} but the map has n={f.n}")
    X = sample_region(region)
    ss = evaluate(f, X)
    dev = weight_from_samples(ss).simple_deviation
    if not dev <= SIMPLE_TOL:
        return SimpleCFacts(False, None, None, None, None, 0, dev)
    off = nx.norm(ss.values) > ZERO_F
    vals, A, Xo = ss.values[off], ss.A[off], X[off]
    om = _omega_batch(vals, A)
    gs = _grad_sq_batch(vals, A)
    radial = nx.dot(Xo, gs)
    orth = np.abs(nx.dot(gs, om)) / (1.0 + nx.norm(gs) * nx.norm(om))
    return SimpleCFacts(True, bool(np.all(radial > 0.0)), bool(np.all(orth <= 1e-9)),
                        float(np.min(radial)) if radial.size else None,
                        float(np.max(orth)) if orth.size else None, int(off.sum()), dev)

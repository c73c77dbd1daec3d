"""Sampled Ł-weights, strong Łojasiewicz exponent fits, and the Jacquemard checks.

Everything here is a detector over a finite sample of a ball: infima become
sampled minima (with the minimising point reported), and exponent fits are
log-envelopes over the retained samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _numerics as nx
from .analytic import AnalyticMap, compose
from .errors import DegenerateMapError, InputError, InsufficientDataError, PreconditionError
from .sampling import RegionSpec, sample_region
from .spectra import ZERO_TRACE, rho_batch, singular_values_batch

POSITIVE = 1e-6
SIMPLE_TOL = 1e-9
LOG_BOUND = 50.0


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Values and gradient spectra of a map over a point set."""

    X: np.ndarray          # (N, n)
    values: np.ndarray     # (N, k)
    A: np.ndarray          # (N, n, k)
    sigmas: np.ndarray     # (N, k), descending
    rho: np.ndarray        # (N,), NaN where tr M ≤ 1e-300
    trace: np.ndarray      # (N,)

    @property
    def defined(self) -> np.ndarray:
        return self.trace > ZERO_TRACE


def evaluate(G: AnalyticMap, X) -> SampleSet:
    X = np.asarray(X, dtype=float)
    vals, A = G.jet(X)
    s = singular_values_batch(A)
    r, tr = rho_batch(A, s)
    return SampleSet(X, vals, A, s, r, tr)


def evaluate_region(G: AnalyticMap, region: RegionSpec) -> SampleSet:
    if region.dim != G.n:
        raise InputError(f"region has dimension {region.dim} but the map has n={G.n}")
    return evaluate(G, sample_region(region))


def _simple_deviation(ss: SampleSet) -> np.ndarray:
    """‖M − (tr M/k) I‖_F / tr M per sample (NaN where undefined)."""
    k = ss.A.shape[2]
    M = nx.gram(ss.A)
    dev = M - (ss.trace / k)[:, None, None] * np.eye(k)
    fro = np.zeros(len(dev))
    for i in range(k):
        for j in range(k):
            fro = fro + dev[:, i, j] * dev[:, i, j]
    fro = np.sqrt(fro)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(ss.defined, fro / np.where(ss.defined, ss.trace, 1.0), np.nan)


# --------------------------------------------------------------------------
# Ł-weight


@dataclass(frozen=True)
class WeightReport:
    rho_inf_hat: float
    min_witness: tuple[float, ...]
    excluded_count: int
    simple_deviation: float
    samples: int

    @property
    def positive(self) -> bool:
        return self.rho_inf_hat > POSITIVE

    @property
    def simple(self) -> bool:
        return self.simple_deviation <= SIMPLE_TOL


def weight_from_samples(ss: SampleSet) -> WeightReport:
    ok = ss.defined
    if not ok.any():
        raise DegenerateMapError("every sample has d_x G = 0")
    r = np.where(ok, ss.rho, np.inf)
    i = int(np.argmin(r))  # first minimiser in sample order
    dev = _simple_deviation(ss)
    return WeightReport(
        rho_inf_hat=float(r[i]),
        min_witness=tuple(float(v) for v in ss.X[i]),
        excluded_count=int((~ok).sum()),
        simple_deviation=float(np.nanmax(dev)),
        samples=int(len(ss.X)),
    )


def rho_inf_estimate(G: AnalyticMap, region: RegionSpec) -> WeightReport:
    """Sampled infimum of ρ_G over the region, with simplicity deviation."""
    return weight_from_samples(evaluate_region(G, region))


# --------------------------------------------------------------------------
# Łojasiewicz exponent fit


@dataclass(frozen=True)
class LojaEstimate:
    theta_hat: float
    c_hat: float
    samples_used: int
    max_residual: float
    valid: bool
    variant: str
    c_mode: str = "fixed_one"
    log_c: float = 0.0


def _min_theta_lp(u: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """min θ s.t. θ·uᵢ + L ≥ vᵢ, |L| ≤ 50, θ ≥ 0; ties broken towards smaller L.

    Every uᵢ > 0, so each constraint line has θ decreasing in L: a vertex formed
    by two data constraints is never optimal. The candidates are therefore the
    vertices on L = 50 (when θ > 0 is forced) and on θ = 0.
    """
    theta = max(0.0, float(np.max((v - LOG_BOUND) / u)))
    if theta > 0.0:
        return theta, LOG_BOUND
    return 0.0, max(-LOG_BOUND, float(np.max(v)))


def loja_fit(G: AnalyticMap, p, region: RegionSpec, variant: str = "strong",
             c_mode: str = "fixed_one", min_samples: int = 10) -> LojaEstimate:
    """Fit |G(x) − G(p)|^θ ≤ c·σ on the region's samples.

    σ is σ_k(x) for the strong variant and √tr M(x) for the weak one. With
    ``fixed_one`` c = 1 and θ is the log-envelope max vᵢ/uᵢ (uᵢ = −log|ΔG|,
    vᵢ = −log σ); ``two_param`` also frees log c within [−50, 50].
    """
    if variant not in ("strong", "weak"):
        raise InputError(f"unknown variant {variant!r}")
    if c_mode not in ("fixed_one", "two_param"):
        raise InputError(f"unknown c_mode {c_mode!r}")
    p = np.asarray(p, dtype=float)
    if p.shape != (G.n,):
        raise InputError(f"base point must have dimension {G.n}")
    if not np.allclose(np.asarray(region.center), p, rtol=0.0, atol=0.0):
        raise PreconditionError("region must be centered at the base point")
    ss = evaluate_region(G, region)
    dG = ss.values - G.values(p)[0]
    mag = nx.norm(dG)
    sig = ss.sigmas[:, -1] if variant == "strong" else np.sqrt(ss.trace)
    keep = (mag > 0.0) & (mag < 1.0) & (sig > 0.0)
    used = int(keep.sum())
    if used < min_samples:
        raise InsufficientDataError("loja_fit", f"only {used} retained samples (need {min_samples})")
    u = -np.log(mag[keep])
    v = -np.log(sig[keep])
    if c_mode == "fixed_one":
        theta = max(0.0, float(np.max(v / u)))
        log_c = 0.0
    else:
        theta, log_c = _min_theta_lp(u, v)
    c = float(np.exp(log_c))
    resid = mag[keep] ** theta - c * sig[keep]
    return LojaEstimate(theta_hat=theta, c_hat=c, samples_used=used,
                        max_residual=float(np.max(resid)), valid=theta < 1.0,
                        variant=variant, c_mode=c_mode, log_c=log_c)


# --------------------------------------------------------------------------
# equivalent forms of positive Ł-weight


@dataclass(frozen=True)
class EquivalenceReport:
    inf_rho: float
    inf_sigma_k_over_sqrt_trace: float
    inf_sigma_k_over_sigma_1: float
    consistent: bool
    samples_used: int


def equivalence_report(G: AnalyticMap, region: RegionSpec) -> EquivalenceReport:
    ss = evaluate_region(G, region)
    ok = ss.defined
    if not ok.any():
        raise DegenerateMapError("every sample has d_x G = 0")
    s = ss.sigmas[ok]
    a = float(np.min(ss.rho[ok]))
    b = float(np.min(s[:, -1] / np.sqrt(ss.trace[ok])))
    c = float(np.min(s[:, -1] / s[:, 0]))
    vals = (a, b, c)
    consistent = all(all(w > 1e-12 for w in vals) for v in vals if v > POSITIVE)
    return EquivalenceReport(a, b, c, bool(consistent), int(ok.sum()))


# --------------------------------------------------------------------------
# Jacquemard-type conditions (k = 2)


def _require_pair(G: AnalyticMap) -> None:
    if G.k != 2:
        raise InputError(f"this check needs a map into R^2, got k={G.k}")


@dataclass(frozen=True)
class J1Report:
    max_abs_cos: float
    tau_hat: float
    holds: bool
    samples_used: int


def _j1(ss: SampleSet) -> J1Report:
    gg, gh = ss.A[:, :, 0], ss.A[:, :, 1]
    ng, nh = nx.norm(gg), nx.norm(gh)
    ok = (ng > 0.0) & (nh > 0.0)
    if not ok.any():
        raise InsufficientDataError("jacquemard_j1", "no sample has both gradients nonzero")
    cos = np.abs(nx.dot(gg[ok], gh[ok])) / (ng[ok] * nh[ok])
    m = float(min(1.0, np.max(cos)))
    tau = 1.0 - m
    return J1Report(m, tau, bool(tau > POSITIVE), int(ok.sum()))


def jacquemard_j1(G: AnalyticMap, region: RegionSpec) -> J1Report:
    """Sampled bound on |cos| of the angle between ∇g and ∇h."""
    _require_pair(G)
    return _j1(evaluate_region(G, region))


@dataclass(frozen=True)
class ComparabilityReport:
    A_hat: float      # min |∇h|/|∇g|
    B_hat: float      # max |∇h|/|∇g|
    comparable: bool
    samples_used: int


def _comparability(ss: SampleSet) -> ComparabilityReport:
    ng, nh = nx.norm(ss.A[:, :, 0]), nx.norm(ss.A[:, :, 1])
    ok = (ng > 0.0) | (nh > 0.0)
    if not ok.any():
        return ComparabilityReport(float("nan"), float("nan"), False, 0)
    with np.errstate(divide="ignore"):
        ratio = np.where(ng[ok] > 0.0, nh[ok] / np.where(ng[ok] > 0.0, ng[ok], 1.0), np.inf)
    lo, hi = float(np.min(ratio)), float(np.max(ratio))
    # a sampled ratio can only approach 0 or ∞, so both ends use the positivity threshold
    comparable = lo > POSITIVE and hi < 1.0 / POSITIVE
    return ComparabilityReport(lo, hi, bool(comparable), int(ok.sum()))


def comparability(G: AnalyticMap, region: RegionSpec) -> ComparabilityReport:
    _require_pair(G)
    return _comparability(evaluate_region(G, region))


@dataclass(frozen=True)
class JacEquivReport:
    applicable: bool
    j1_holds: bool | None
    positive_weight: bool | None
    consistent: bool | None
    rho_inf_hat: float | None
    lower_bracket: float | None   # 2Â/(1+B̂²)
    upper_bracket: float | None   # 2B̂/(1+Â²)
    bracket_ok: bool | None
    comparability: ComparabilityReport


def jacequiv_crosscheck(G: AnalyticMap, region: RegionSpec) -> JacEquivReport:
    """J1 against positive Ł-weight, for maps whose gradients are comparable."""
    _require_pair(G)
    ss = evaluate_region(G, region)
    comp = _comparability(ss)
    if not comp.comparable:
        return JacEquivReport(False, None, None, None, None, None, None, None, comp)
    j1 = _j1(ss)
    weight = weight_from_samples(ss)
    lo = 2.0 * comp.A_hat / (1.0 + comp.B_hat ** 2)
    hi = 2.0 * comp.B_hat / (1.0 + comp.A_hat ** 2)
    ok = ss.defined
    ng, nh = nx.norm(ss.A[ok, :, 0]), nx.norm(ss.A[ok, :, 1])
    q = 2.0 * ng * nh / ss.trace[ok]
    slack = 1e-12
    bracket_ok = bool(np.all(q >= lo - slack) and np.all(q <= hi + slack)
                      and np.all(ss.rho[ok] <= hi + slack))
    return JacEquivReport(True, j1.holds, weight.positive, j1.holds == weight.positive,
                          weight.rho_inf_hat, lo, hi, bracket_ok, comp)


# --------------------------------------------------------------------------
# composition


@dataclass(frozen=True)
class CompositionReport:
    samples_checked: int
    min_margin: float            # min over samples of ρ_{G∘H}(x) − bound(x)
    bound_holds: bool
    inner_simple: bool
    max_easycomp_error: float | None
    easycomp_holds: bool | None


def composition_weight_check(G: AnalyticMap, H: AnalyticMap, region: RegionSpec,
                             slack: float = 1e-9, equality_tol: float = 1e-8) -> CompositionReport:
    """Check the product lower bound on ρ_{G∘H} at every sample; when H is
    simple, also check ρ_{G∘H}(x) = ρ_G(H(x))."""
    if H.k != G.n:
        raise InputError(f"cannot compose: H has k={H.k}, G has n={G.n}")
    X = sample_region(region) if region.dim == H.n else None
    if X is None:
        raise InputError(f"region has dimension {region.dim} but H has n={H.n}")
    inner = evaluate(H, X)
    C = evaluate(compose(G, H), X)
    outer = evaluate(G, inner.values)
    ok = C.defined
    n, k = G.n, G.k
    sB, sA = inner.sigmas[ok], outer.sigmas[ok]
    bound = k * sB[:, -1] ** 2 * sA[:, -1] ** 2 / (n * sB[:, 0] ** 2 * sA[:, 0] ** 2)
    margin = C.rho[ok] - bound
    min_margin = float(np.min(margin)) if margin.size else float("inf")
    holds = bool(np.all(margin >= -slack))
    dev = _simple_deviation(inner)
    simple = bool(inner.defined.all() and np.nanmax(dev) <= SIMPLE_TOL) if len(dev) else False
    err = eq = None
    if simple:
        e = np.abs(C.rho[ok] - outer.rho[ok])
        err = float(np.max(e)) if e.size else 0.0
        eq = bool(err <= equality_tol)
    return CompositionReport(int(ok.sum()), min_margin, holds, simple, err, eq)

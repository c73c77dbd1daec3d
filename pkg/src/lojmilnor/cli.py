"""Command-line front end.

    lojmilnor --map z2 --command loja-fit --seed 42
    lojmilnor --config job.json --out report.json

``--map`` takes a JSON map file; a bare name such as ``z2`` that is not an
existing file refers to the bundled corpus (``--list-maps`` shows it).
Exit status: 0 when the verdict holds, 2 when it fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import __version__
from .analytic import AnalyticMap, MapParseError, load_map
from .errors import InsufficientDataError, LojError
from .loja import (
    comparability, equivalence_report, evaluate, evaluate_region, jacequiv_crosscheck,
    jacquemard_j1, loja_fit, weight_from_samples,
)
from .maps import bundled_names, load_bundled
from .milnor import (
    condition_c_scan, milnor_a_scan, milnor_b_scan, milnor_pair_scan, simple_c_facts,
)
from .reports import dumps, rows_to_csv
from .sampling import RegionSpec, sample_region
from .verify import run_suite

COMMANDS = ("analyze", "loja-fit", "weight", "milnor-scan", "pair-scan", "condition-c",
            "rho-grid", "verify")
EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


@dataclass(frozen=True)
class JobConfig:
    command: str = "analyze"
    map: str | None = None
    epsilon: float = 0.5
    levels: int = 32
    directions: int = 64
    seed: int = 0
    center: tuple[float, ...] | None = None
    delta: float = 0.01
    tube_samples: int = 1000
    tol_dep: float = 1e-8
    tol_f: float = 1e-8
    span_tol: float = 1e-6
    variant: str = "strong"
    c_mode: str = "fixed_one"
    axes: tuple[int, int] = (0, 1)
    bounds: tuple[float, float] | None = None
    resolution: int = 33
    suite: str = "all"
    trials: int = 100
    format: str = "json"
    out: str | None = None

    def region(self, n: int) -> RegionSpec:
        c = self.center if self.center is not None else (0.0,) * n
        if len(c) != n:
            raise LojError(f"--center has {len(c)} coordinates but the map has n={n}")
        return RegionSpec(tuple(c), radius=self.epsilon, radial_levels=self.levels,
                          directions_per_level=self.directions, seed=self.seed)


_FIELDS = {f.name for f in fields(JobConfig)}


def _tuple_of(kind, length=None):
    def conv(v):
        if isinstance(v, str):
            v = [s for s in v.replace(",", " ").split() if s]
        if not isinstance(v, (list, tuple)):
            raise ValueError("expected a list")
        out = tuple(kind(x) for x in v)
        if length is not None and len(out) != length:
            raise ValueError(f"expected {length} values")
        return out
    return conv


_CONVERT = {
    "center": _tuple_of(float), "axes": _tuple_of(int, 2), "bounds": _tuple_of(float, 2),
    "epsilon": float, "delta": float, "tol_dep": float, "tol_f": float, "span_tol": float,
    "levels": int, "directions": int, "seed": int, "tube_samples": int, "resolution": int,
    "trials": int,
}


def config_from_mapping(obj: dict, base: JobConfig | None = None) -> JobConfig:
    """Apply a (config-file or flag) mapping on top of ``base``; unknown keys are errors."""
    base = base or JobConfig()
    unknown = sorted(set(obj) - _FIELDS)
    if unknown:
        raise LojError(f"unknown config fields: {', '.join(unknown)}")
    vals = {}
    for k, v in obj.items():
        if v is None:
            vals[k] = None
            continue
        conv = _CONVERT.get(k)
        try:
            if conv is int and (isinstance(v, bool) or (isinstance(v, float) and not v.is_integer())):
                raise ValueError("expected an integer")
            vals[k] = conv(v) if conv else v
        except (TypeError, ValueError) as err:
            raise LojError(f"bad value for {k}: {v!r} ({err})") from None
    cfg = replace(base, **vals)
    _validate(cfg)
    return cfg


def _validate(cfg: JobConfig) -> None:
    if cfg.command not in COMMANDS:
        raise LojError(f"unknown command {cfg.command!r}; choose from {', '.join(COMMANDS)}")
    if cfg.format not in ("json", "csv"):
        raise LojError("format must be json or csv")
    if cfg.variant not in ("strong", "weak"):
        raise LojError("variant must be strong or weak")
    if cfg.c_mode not in ("fixed_one", "two_param"):
        raise LojError("c_mode must be fixed_one or two_param")
    if cfg.command != "verify" and not cfg.map:
        raise LojError(f"command {cfg.command} needs --map")
    if cfg.resolution < 2:
        raise LojError("resolution must be at least 2")


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise LojError(f"cannot read config {path}: {err.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise LojError(f"{path}:{err.lineno}:{err.colno}: {err.msg}") from None
    if not isinstance(obj, dict):
        raise LojError(f"{path}: config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in obj.items()}


def resolve_map(ref: str) -> AnalyticMap:
    if os.path.exists(ref):
        try:
            return load_map(ref)
        except MapParseError as err:
            if err.line is not None:
                raise LojError(f"{ref}:{err.line}:{err.column}: {err}") from None
            raise LojError(f"{ref}: {err}") from None
    if ref in bundled_names():
        return load_bundled(ref)
    raise LojError(f"no map file {ref!r} and no bundled map of that name")


# --------------------------------------------------------------------------
# commands; each returns (report, csv header, csv rows, verdict ok)


def _coord_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(n)]


def _sample_table(G: AnalyticMap, X: np.ndarray):
    ss = evaluate(G, X)
    header = _coord_names(G.n) + ["f_norm"] + [f"sigma_{i + 1}" for i in range(G.k)] + ["trace", "rho"]
    fn = np.sqrt(np.sum(ss.values ** 2, axis=1))
    rows = [list(ss.X[i]) + [fn[i]] + list(ss.sigmas[i]) + [ss.trace[i], ss.rho[i]]
            for i in range(len(X))]
    return header, rows


def _witness_table(n: int, reports):
    header = _coord_names(n) + ["sigma_k_norm", "sigma_aug_norm", "f_norm", "radius", "condition"]
    rows = []
    for rep in reports:
        for w in rep.witnesses:
            rows.append(list(w.x) + [w.sigma_k_norm, w.sigma_aug_norm, w.f_norm, w.radius,
                                     getattr(rep, "condition", "pair")])
    return header, rows


def _cmd_loja_fit(cfg, G):
    region = cfg.region(G.n)
    est = loja_fit(G, region.center, region, cfg.variant, cfg.c_mode)
    return {"fit": est}, *_sample_table(G, sample_region(region)), est.valid


def _cmd_weight(cfg, G):
    region = cfg.region(G.n)
    rep = weight_from_samples(evaluate_region(G, region))
    return ({"weight": rep, "positive": rep.positive, "simple": rep.simple},
            *_sample_table(G, sample_region(region)), rep.positive)


def _cmd_milnor_scan(cfg, G):
    region = cfg.region(G.n)
    a = milnor_a_scan(G, region, cfg.tol_dep, cfg.tol_f)
    b = milnor_b_scan(G, region, cfg.tol_dep, cfg.tol_f)
    return {"a": a, "b": b}, *_witness_table(G.n, [a, b]), a.holds and b.holds


def _cmd_pair_scan(cfg, G):
    est = milnor_pair_scan(G, cfg.epsilon, cfg.delta, cfg.tube_samples, cfg.seed, cfg.tol_dep)
    return {"pair": est}, *_witness_table(G.n, [est]), est.holds


def _cmd_condition_c(cfg, G):
    region = cfg.region(G.n)
    rep = condition_c_scan(G, region, cfg.span_tol)
    facts = simple_c_facts(G, region)
    return {"c": rep, "simple_facts": facts}, *_witness_table(G.n, [rep]), rep.holds


@dataclass(frozen=True)
class RhoGrid:
    axes: tuple[int, int]
    bounds: tuple[float, float]
    resolution: int
    values: tuple[float, ...]   # row-major: row = second axis, column = first axis


def rho_grid(G: AnalyticMap, axes=(0, 1), bounds=(-1.0, 1.0), resolution: int = 33,
             center=None) -> tuple[RhoGrid, np.ndarray]:
    """ρ on a square grid in the plane of two coordinates; −1 where undefined.

    The remaining coordinates are held at ``center`` (default: the origin).
    Returns the grid record and the (resolution², n) array of grid points.
    """
    i, j = axes
    if not (0 <= i < G.n and 0 <= j < G.n) or i == j:
        raise LojError(f"axes must be two distinct indices below n={G.n}")
    lo, hi = bounds
    if not hi > lo:
        raise LojError("bounds must satisfy lo < hi")
    t = np.linspace(lo, hi, resolution)
    base = np.zeros(G.n) if center is None else np.asarray(center, dtype=float)
    P = np.tile(base, (resolution * resolution, 1))
    P[:, i] = np.tile(t, resolution)
    P[:, j] = np.repeat(t, resolution)
    ss = evaluate(G, P)
    vals = np.where(ss.defined, ss.rho, -1.0)
    return RhoGrid((int(i), int(j)), (float(lo), float(hi)), int(resolution),
                   tuple(float(v) for v in vals)), P


def _cmd_rho_grid(cfg, G):
    bounds = cfg.bounds if cfg.bounds is not None else (-cfg.epsilon, cfg.epsilon)
    grid, P = rho_grid(G, cfg.axes, bounds, cfg.resolution, cfg.center)
    i, j = grid.axes
    header = [f"x{i}", f"x{j}", "rho"]
    rows = [[P[r, i], P[r, j], v] for r, v in enumerate(grid.values)]
    return {"grid": grid}, header, rows, True


def _cmd_analyze(cfg, G):
    region = cfg.region(G.n)
    ss = evaluate_region(G, region)
    out = {"weight": weight_from_samples(ss), "equivalence": equivalence_report(G, region)}
    ok = True
    try:
        out["fit"] = loja_fit(G, region.center, region, cfg.variant, cfg.c_mode)
        ok &= out["fit"].valid
    except InsufficientDataError as err:
        out["fit"] = {"error": str(err)}
        ok = False
    if G.k == 2:
        try:
            out["j1"] = jacquemard_j1(G, region)
        except InsufficientDataError as err:
            out["j1"] = {"error": str(err)}
        out["comparability"] = comparability(G, region)
        out["jacequiv"] = jacequiv_crosscheck(G, region)
    a = milnor_a_scan(G, region, cfg.tol_dep, cfg.tol_f)
    b = milnor_b_scan(G, region, cfg.tol_dep, cfg.tol_f)
    out["milnor_a"], out["milnor_b"] = a, b
    ok &= a.holds and b.holds
    return out, *_sample_table(G, ss.X), bool(ok)


def _cmd_verify(cfg, G):
    summ = run_suite(cfg.suite, cfg.trials, cfg.seed)
    header = ["property", "passed", "failed"]
    rows = [[p.name, p.passed, p.failed] for p in summ.properties]
    return {"verify": summ}, header, rows, summ.ok


_DISPATCH = {
    "analyze": _cmd_analyze, "loja-fit": _cmd_loja_fit, "weight": _cmd_weight,
    "milnor-scan": _cmd_milnor_scan, "pair-scan": _cmd_pair_scan,
    "condition-c": _cmd_condition_c, "rho-grid": _cmd_rho_grid, "verify": _cmd_verify,
}


def run(cfg: JobConfig) -> tuple[int, str, dict]:
    """Execute a job; returns (exit status, rendered report, report records)."""
    _validate(cfg)
    G = resolve_map(cfg.map) if cfg.command != "verify" else None
    report, header, rows, ok = _DISPATCH[cfg.command](cfg, G)
    status = EXIT_OK if ok else EXIT_FAIL
    if cfg.format == "csv":
        return status, rows_to_csv(header, rows), report
    cfg_record = {k: v for k, v in asdict(cfg).items() if k not in ("out", "format")}
    doc = {"command": cfg.command, "config": cfg_record,
           "map": None if G is None else {"label": G.label, "n": G.n, "k": G.k},
           "verdict": "holds" if ok else "fails", "report": report}
    return status, dumps(doc), report


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    d = JobConfig()
    p = argparse.ArgumentParser(
        prog="lojmilnor",
        description="Sampled Łojasiewicz-exponent, Ł-weight and Milnor-condition analysis "
                    "of polynomial maps.",
        epilog="Exit status: 0 holds/valid, 2 fails/invalid, 1 error. "
               "A --config JSON object may set any option (underscored names); flags win.")
    a = p.add_argument
    a("--config", metavar="PATH", help="JSON job file")
    a("--command", choices=COMMANDS, help=f"analysis to run (default {d.command})")
    a("--map", metavar="PATH", help="map JSON file, or the name of a bundled map")
    a("--epsilon", type=float, help=f"region radius ε (default {d.epsilon})")
    a("--levels", type=int, help=f"radial levels ε·2^-j (default {d.levels})")
    a("--directions", type=int, help=f"directions per level (default {d.directions})")
    a("--seed", type=int, help=f"random seed (default {d.seed})")
    a("--center", metavar="X0,X1,...", help="region center / base point (default origin)")
    a("--delta", type=float, help=f"tube level δ for pair-scan (default {d.delta})")
    a("--tube-samples", type=int, help=f"pair-scan draws (default {d.tube_samples})")
    a("--tol-dep", type=float, help=f"dependence threshold (default {d.tol_dep})")
    a("--tol-f", type=float, help=f"|G| threshold (default {d.tol_f})")
    a("--span-tol", type=float, help=f"condition (c) span band (default {d.span_tol})")
    a("--variant", choices=("strong", "weak"), help=f"loja-fit variant (default {d.variant})")
    a("--c-mode", choices=("fixed_one", "two_param"), help=f"loja-fit constant (default {d.c_mode})")
    a("--axes", metavar="I,J", help="rho-grid coordinate axes (default 0,1)")
    a("--bounds", metavar="LO,HI", help="rho-grid bounds (default -ε,ε)")
    a("--resolution", type=int, help=f"rho-grid points per axis (default {d.resolution})")
    a("--suite", choices=("all", "spectra", "loja", "milnor"), help=f"verify suite (default {d.suite})")
    a("--trials", type=int, help=f"verify trials per property (default {d.trials})")
    a("--format", choices=("json", "csv"), help=f"report format (default {d.format})")
    a("--out", metavar="PATH", help="write the report here instead of stdout")
    a("--list-maps", action="store_true", help="list bundled maps and exit")
    a("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.list_maps:
        print("\n".join(bundled_names()))
        return EXIT_OK
    try:
        cfg = JobConfig()
        if ns.config:
            cfg = config_from_mapping(load_config_file(ns.config), cfg)
        flags = {k: v for k, v in vars(ns).items()
                 if k not in ("config", "list_maps") and v is not None}
        cfg = config_from_mapping(flags, cfg)
        status, text, report = run(cfg)
    except InsufficientDataError as err:
        print(f"lojmilnor: insufficient data: {err}", file=sys.stderr)
        return EXIT_ERROR
    except LojError as err:
        print(f"lojmilnor: error: {err}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "verify":
        for prop in report["verify"].properties:
            print(f"{prop.name}: {prop.passed}/{prop.passed + prop.failed} passed", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

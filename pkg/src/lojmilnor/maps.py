"""Constructors for the example maps and the bundled corpus."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .analytic import AnalyticMap, Add, Const, Expr, Mul, Pow, compose, map_from_json, variables
from .errors import InputError


def identity_map(n: int) -> AnalyticMap:
    return AnalyticMap(n, n, variables(n), f"identity R^{n}")


def zero_map(n: int, k: int) -> AnalyticMap:
    return AnalyticMap(n, k, tuple(Const(0.0) for _ in range(k)), f"zero R^{n}->R^{k}")


def linear_map(matrix, label: str | None = None) -> AnalyticMap:
    """x ↦ matrix @ x, one degree-1 expression per row."""
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.size == 0:
        raise InputError("linear_map needs a non-empty 2-D matrix")
    if not np.all(np.isfinite(mat)):
        raise InputError("linear_map matrix must be finite")
    k, n = mat.shape
    xs = variables(n)
    comps = tuple(Add(tuple(Mul((Const(mat[i, j]), xs[j])) for j in range(n))) for i in range(k))
    return AnalyticMap(n, k, comps, label if label is not None else f"linear {mat.tolist()}")


def _pair_product(g1: Expr, h1: Expr, g2: Expr, h2: Expr) -> tuple[Expr, Expr]:
    # (g1 + i h1)(g2 + i h2)
    return g1 * g2 - h1 * h2, g1 * h2 + h1 * g2


def product_pair(f1: AnalyticMap, f2: AnalyticMap, disjoint: bool = True) -> AnalyticMap:
    """Real and imaginary parts of (g₁ + i h₁)(g₂ + i h₂).

    With ``disjoint`` the second factor's variables are shifted past the first's,
    giving a map on ℝ^(n₁+n₂); otherwise both factors share the variable space.
    """
    if f1.k != 2 or f2.k != 2:
        raise InputError("product_pair needs two maps into R^2")
    if disjoint:
        n = f1.n + f2.n
        xs = variables(n)
        shifted = compose(AnalyticMap(f2.n, 2, f2.components), AnalyticMap(n, f2.n, xs[f1.n:]))
        g2, h2 = shifted.components
    else:
        if f1.n != f2.n:
            raise InputError("shared-variable product needs equal domain dimensions")
        n = f1.n
        g2, h2 = f2.components
    g1, h1 = f1.components
    return AnalyticMap(n, 2, _pair_product(g1, h1, g2, h2), f"({f1.label})*({f2.label})")


def complex_power(d: int) -> AnalyticMap:
    """z ↦ z^d on ℝ² ≅ ℂ, by repeated complex multiplication."""
    if d < 1:
        raise InputError("complex_power needs d >= 1")
    z = identity_map(2)
    out = z
    for _ in range(d - 1):
        out = product_pair(out, z, disjoint=False)
    return AnalyticMap(2, 2, out.components, f"z^{d}")


def complex_conjugate() -> AnalyticMap:
    x, y = variables(2)
    return AnalyticMap(2, 2, (x, -y), "conj(z)")


def mixed_product() -> AnalyticMap:
    """conj(z)·w² on ℝ⁴ with coordinates (x, y, u, v)."""
    f = product_pair(complex_conjugate(), complex_power(2), disjoint=True)
    return AnalyticMap(4, 2, f.components, "conj(z)*w^2")


def nap_map(k: int, p: int) -> AnalyticMap:
    """y ↦ |y|^(p-1) y on ℝᵏ for odd p."""
    if k < 1:
        raise InputError("nap_map needs k >= 1")
    if p < 1 or p % 2 == 0:
        raise InputError(f"nap_map needs an odd positive power, got p={p}")
    ys = variables(k)
    if p == 1:
        return AnalyticMap(k, k, ys, f"nap k={k} p=1")
    r2 = Add(tuple(Mul((y, y)) for y in ys))
    scale = Pow(r2, (p - 1) // 2)
    return AnalyticMap(k, k, tuple(Mul((scale, y)) for y in ys), f"nap k={k} p={p}")


def shear_of_square() -> AnalyticMap:
    """linear [[1,1],[0,1]] ∘ z²."""
    G = compose(linear_map([[1.0, 1.0], [0.0, 1.0]]), complex_power(2))
    return AnalyticMap(2, 2, G.components, "shear∘z^2")


def sphere_plus_x() -> AnalyticMap:
    """(x² + y², x): critical along y = 0, which is not contained in V(f)."""
    x, y = variables(2)
    return AnalyticMap(2, 2, (x * x + y * y, x), "(x^2+y^2, x)")


def x_times_xy() -> AnalyticMap:
    x, y = variables(2)
    return AnalyticMap(2, 2, (x, x * y), "(x, xy)")


def parallel_gradients() -> AnalyticMap:
    x, y = variables(2)
    return AnalyticMap(2, 2, (x + y, 2.0 * x + 2.0 * y), "(x+y, 2x+2y)")


def random_polynomial_map(rng: np.random.Generator, n: int, k: int, degree: int = 3,
                          terms: int = 4) -> AnalyticMap:
    """Seeded random polynomial with ``terms`` monomials per component."""
    xs = variables(n)
    comps = []
    for _ in range(k):
        monos = []
        for _ in range(terms):
            coef = Const(float(rng.uniform(-1.0, 1.0)))
            deg = int(rng.integers(1, degree + 1))
            powers = rng.multinomial(deg, np.ones(n) / n)
            factors = [coef] + [Pow(xs[i], int(e)) for i, e in enumerate(powers) if e > 0]
            monos.append(Mul(tuple(factors)))
        comps.append(Add(tuple(monos)))
    return AnalyticMap(n, k, tuple(comps), f"random poly n={n} k={k} deg<={degree}")


def corpus() -> dict[str, AnalyticMap]:
    """The bundled example maps, keyed by file stem."""
    maps = {
        "identity2": identity_map(2),
        "z2": complex_power(2),
        "z3": complex_power(3),
        "z4": complex_power(4),
        "zbar_w2": mixed_product(),
        "shear_z2": shear_of_square(),
        "linear_1234": linear_map([[1.0, 2.0], [3.0, 4.0]], "linear [[1,2],[3,4]]"),
        "sphere_plus_x": sphere_plus_x(),
        "x_xy": x_times_xy(),
        "parallel": parallel_gradients(),
    }
    for k in (2, 3):
        for p in (3, 5):
            maps[f"nap_k{k}_p{p}"] = nap_map(k, p)
    return maps


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("lojmilnor.data").iterdir()
                  if p.name.endswith(".json"))


def load_bundled(name: str) -> AnalyticMap:
    res = resources.files("lojmilnor.data").joinpath(f"{name}.json")
    if not res.is_file():
        raise InputError(f"no bundled map named {name!r}")
    return map_from_json(res.read_text(encoding="utf-8"))


def bundled_path(name: str):
    return resources.files("lojmilnor.data").joinpath(f"{name}.json")


def _check_json_roundtrip(G: AnalyticMap) -> bool:
    from .analytic import map_to_obj

    obj = map_to_obj(G)
    return map_to_obj(map_from_json(json.dumps(obj))) == obj

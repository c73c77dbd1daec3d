"""Polynomial maps ℝⁿ → ℝᵏ as expression trees, with exact forward-mode gradients.

Expressions are immutable and may share subtrees (composition substitutes by
reference), so every evaluation memoises on node identity. All evaluation is
batched: a point set of shape (N, n) is pushed through the tree once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import _numerics as nx
from .errors import InputError


# --------------------------------------------------------------------------
# expression nodes


class Expr:
    """Base class; arithmetic operators build new trees without simplifying."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Neg(as_expr(other))))

    def __rsub__(self, other):
        return Add((as_expr(other), Neg(self)))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, p):
        return Pow(self, p)


@dataclass(frozen=True, eq=True, slots=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not np.isfinite(v):
            raise InputError(f"non-finite constant {self.value!r}")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True, eq=True, slots=True)
class Var(Expr):
    index: int

    def __post_init__(self):
        if isinstance(self.index, bool) or not isinstance(self.index, (int, np.integer)):
            raise InputError(f"variable index must be an integer, got {self.index!r}")
        if self.index < 0:
            raise InputError(f"negative variable index {self.index}")


@dataclass(frozen=True, eq=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True, slots=True)
class Add(Expr):
    args: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise InputError("empty sum")


@dataclass(frozen=True, eq=True, slots=True)
class Mul(Expr):
    args: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise InputError("empty product")


@dataclass(frozen=True, eq=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self):
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, (int, np.integer)):
            raise InputError(f"power exponent must be a natural number, got {self.exponent!r}")
        if self.exponent < 0:
            raise InputError(f"negative power exponent {self.exponent}")
        object.__setattr__(self, "exponent", int(self.exponent))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)) and not isinstance(x, bool):
        return Const(float(x))
    raise InputError(f"cannot convert {x!r} to an expression")


def variables(n: int) -> tuple[Var, ...]:
    return tuple(Var(i) for i in range(n))


def _children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, Neg):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


def max_var_index(e: Expr) -> int:
    """Largest variable index in the tree, or -1 for a constant tree."""
    seen: dict[int, int] = {}

    def walk(node):
        key = id(node)
        if key in seen:
            return seen[key]
        if isinstance(node, Var):
            r = node.index
        else:
            r = max((walk(c) for c in _children(node)), default=-1)
        seen[key] = r
        return r

    return walk(e)


# --------------------------------------------------------------------------
# dual numbers


def _ipow(v: np.ndarray, p: int) -> np.ndarray:
    # repeated multiplication, left to right; p >= 1
    if p < 1:
        raise ValueError("_ipow needs p >= 1")
    r = v
    for _ in range(p - 1):
        r = r * v
    return r


@dataclass(frozen=True, eq=False)
class DualVector:
    """A batch of values together with their gradients.

    ``value`` has shape (N,), ``partials`` has shape (N, n).
    """

    value: np.ndarray
    partials: np.ndarray

    def __add__(self, other: DualVector) -> DualVector:
        return DualVector(self.value + other.value, self.partials + other.partials)

    def __mul__(self, other: DualVector) -> DualVector:
        return DualVector(
            self.value * other.value,
            self.value[:, None] * other.partials + other.value[:, None] * self.partials,
        )

    def __neg__(self) -> DualVector:
        return DualVector(-self.value, -self.partials)

    def power(self, p: int) -> DualVector:
        if p == 0:
            return DualVector(np.ones_like(self.value), np.zeros_like(self.partials))
        if p == 1:
            return self
        lower = _ipow(self.value, p - 1)
        return DualVector(lower * self.value, (p * lower)[:, None] * self.partials)


def _eval_plain(e: Expr, X: np.ndarray, cache: dict) -> np.ndarray:
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        r = np.full(X.shape[0], e.value)
    elif isinstance(e, Var):
        r = X[:, e.index]
    elif isinstance(e, Neg):
        r = -_eval_plain(e.arg, X, cache)
    elif isinstance(e, Add):
        r = _eval_plain(e.args[0], X, cache)
        for a in e.args[1:]:
            r = r + _eval_plain(a, X, cache)
    elif isinstance(e, Mul):
        r = _eval_plain(e.args[0], X, cache)
        for a in e.args[1:]:
            r = r * _eval_plain(a, X, cache)
    elif isinstance(e, Pow):
        b = _eval_plain(e.base, X, cache)
        r = np.ones_like(b) if e.exponent == 0 else _ipow(b, e.exponent)
    else:
        raise InputError(f"unknown expression node {type(e).__name__}")
    cache[key] = r
    return r


def _eval_dual(e: Expr, X: np.ndarray, cache: dict) -> DualVector:
    key = id(e)
    hit = cache.get(key)
    if hit is not None:
        return hit
    N, n = X.shape
    if isinstance(e, Const):
        r = DualVector(np.full(N, e.value), np.zeros((N, n)))
    elif isinstance(e, Var):
        p = np.zeros((N, n))
        p[:, e.index] = 1.0
        r = DualVector(X[:, e.index].copy(), p)
    elif isinstance(e, Neg):
        r = -_eval_dual(e.arg, X, cache)
    elif isinstance(e, Add):
        r = _eval_dual(e.args[0], X, cache)
        for a in e.args[1:]:
            r = r + _eval_dual(a, X, cache)
    elif isinstance(e, Mul):
        r = _eval_dual(e.args[0], X, cache)
        for a in e.args[1:]:
            r = r * _eval_dual(a, X, cache)
    elif isinstance(e, Pow):
        r = _eval_dual(e.base, X, cache).power(e.exponent)
    else:
        raise InputError(f"unknown expression node {type(e).__name__}")
    cache[key] = r
    return r


# --------------------------------------------------------------------------
# maps


@dataclass(frozen=True, eq=False)
class GradientFrame:
    """Gradient data of a map at one point.

    ``A`` is n×k with column i equal to ∇g_i(x); ``M`` is the Gram matrix AᵀA.
    """

    x: np.ndarray
    A: np.ndarray
    M: np.ndarray

    @classmethod
    def from_matrix(cls, A, x=None) -> GradientFrame:
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise InputError("frame matrix must be 2-D")
        if x is None:
            x = np.zeros(A.shape[0])
        return cls(np.asarray(x, dtype=float), A, nx.gram(A))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class AnalyticMap:
    n: int
    k: int
    components: tuple[Expr, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.n < 1 or self.k < 1:
            raise InputError(f"dimensions must be positive, got n={self.n}, k={self.k}")
        if len(self.components) != self.k:
            raise InputError(f"expected {self.k} components, got {len(self.components)}")
        for i, c in enumerate(self.components):
            if not isinstance(c, Expr):
                raise InputError(f"component {i} is not an expression")
            m = max_var_index(c)
            if m >= self.n:
                raise InputError(f"component {i} uses variable {m} but n={self.n}")

    def _points(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n:
            raise InputError(f"expected points of dimension {self.n}, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise InputError("point coordinates must be finite")
        return X

    def values(self, X) -> np.ndarray:
        """G evaluated at each row of X; shape (N, k)."""
        X = self._points(X)
        cache: dict = {}
        return np.stack([_eval_plain(c, X, cache) for c in self.components], axis=1)

    def jet(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Values (N, k) and gradient matrices A of shape (N, n, k)."""
        X = self._points(X)
        cache: dict = {}
        duals = [_eval_dual(c, X, cache) for c in self.components]
        vals = np.stack([d.value for d in duals], axis=1)
        A = np.stack([d.partials for d in duals], axis=2)
        return vals, A

    def __call__(self, x) -> np.ndarray:
        return eval_map(self, x)


def eval_map(G: AnalyticMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (G.n,):
        raise InputError(f"expected a point of dimension {G.n}, got shape {x.shape}")
    return G.values(x)[0]


def gradient_frame(G: AnalyticMap, x) -> GradientFrame:
    x = np.asarray(x, dtype=float)
    if x.shape != (G.n,):
        raise InputError(f"expected a point of dimension {G.n}, got shape {x.shape}")
    _, A = G.jet(x)
    return GradientFrame(x.copy(), A[0], nx.gram(A[0]))


def substitute(e: Expr, replacements: Sequence[Expr], cache: dict | None = None) -> Expr:
    """Replace Var(i) by replacements[i], preserving subtree sharing."""
    if cache is None:
        cache = {}
    key = id(e)
    if key in cache:
        return cache[key]
    if isinstance(e, Var):
        r = replacements[e.index]
    elif isinstance(e, Const):
        r = e
    elif isinstance(e, Neg):
        r = Neg(substitute(e.arg, replacements, cache))
    elif isinstance(e, Add):
        r = Add(tuple(substitute(a, replacements, cache) for a in e.args))
    elif isinstance(e, Mul):
        r = Mul(tuple(substitute(a, replacements, cache) for a in e.args))
    elif isinstance(e, Pow):
        r = Pow(substitute(e.base, replacements, cache), e.exponent)
    else:
        raise InputError(f"unknown expression node {type(e).__name__}")
    cache[key] = r
    return r


def compose(outer: AnalyticMap, inner: AnalyticMap) -> AnalyticMap:
    """outer ∘ inner, by substituting inner's components for outer's variables."""
    if inner.k != outer.n:
        raise InputError(f"cannot compose: inner has k={inner.k}, outer has n={outer.n}")
    cache: dict = {}
    comps = tuple(substitute(c, inner.components, cache) for c in outer.components)
    label = f"({outer.label})∘({inner.label})" if outer.label or inner.label else ""
    return AnalyticMap(inner.n, outer.k, comps, label)


# --------------------------------------------------------------------------
# JSON exchange format


class MapParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 path: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if path is not None:
            where.append(f"at {path or '/'}")
        super().__init__(f"{message}" + (f" ({'; '.join(where)})" if where else ""))
        self.line, self.column, self.path = line, column, path


def expr_to_obj(e: Expr, cache: dict | None = None) -> Any:
    if cache is None:
        cache = {}
    key = id(e)
    if key in cache:
        return cache[key]
    if isinstance(e, Const):
        r = {"const": e.value}
    elif isinstance(e, Var):
        r = {"var": e.index}
    elif isinstance(e, Neg):
        r = {"neg": expr_to_obj(e.arg, cache)}
    elif isinstance(e, Add):
        r = {"add": [expr_to_obj(a, cache) for a in e.args]}
    elif isinstance(e, Mul):
        r = {"mul": [expr_to_obj(a, cache) for a in e.args]}
    elif isinstance(e, Pow):
        r = {"pow": [expr_to_obj(e.base, cache), e.exponent]}
    else:
        raise InputError(f"unknown expression node {type(e).__name__}")
    cache[key] = r
    return r


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def expr_from_obj(obj: Any, path: str = "") -> Expr:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise MapParseError("expression node must be an object with exactly one key", path=path)
    (tag, body), = obj.items()
    here = f"{path}/{tag}"
    if tag == "const":
        if not isinstance(body, (int, float)) or isinstance(body, bool):
            raise MapParseError("const must be a number", path=here)
        return Const(float(body))
    if tag == "var":
        if not _is_int(body) or body < 0:
            raise MapParseError("var must be a non-negative integer", path=here)
        return Var(body)
    if tag == "neg":
        return Neg(expr_from_obj(body, here))
    if tag in ("add", "mul"):
        if not isinstance(body, list) or not body:
            raise MapParseError(f"{tag} must be a non-empty array", path=here)
        args = tuple(expr_from_obj(a, f"{here}/{i}") for i, a in enumerate(body))
        return Add(args) if tag == "add" else Mul(args)
    if tag == "pow":
        if not isinstance(body, list) or len(body) != 2:
            raise MapParseError("pow must be [node, exponent]", path=here)
        if not _is_int(body[1]) or body[1] < 0:
            raise MapParseError("pow exponent must be a non-negative integer", path=f"{here}/1")
        return Pow(expr_from_obj(body[0], f"{here}/0"), body[1])
    raise MapParseError(f"unknown node kind {tag!r}", path=path)


def map_to_obj(G: AnalyticMap) -> dict:
    cache: dict = {}
    return {"n": G.n, "k": G.k, "label": G.label,
            "components": [expr_to_obj(c, cache) for c in G.components]}


def map_from_obj(obj: Any) -> AnalyticMap:
    if not isinstance(obj, dict):
        raise MapParseError("map must be a JSON object", path="")
    extra = set(obj) - {"n", "k", "label", "components"}
    if extra:
        raise MapParseError(f"unknown fields {sorted(extra)}", path="")
    for key in ("n", "k"):
        if not _is_int(obj.get(key)) or obj[key] < 1:
            raise MapParseError(f"{key} must be a positive integer", path=f"/{key}")
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise MapParseError("label must be a string", path="/label")
    comps = obj.get("components")
    if not isinstance(comps, list):
        raise MapParseError("components must be an array", path="/components")
    exprs = tuple(expr_from_obj(c, f"/components/{i}") for i, c in enumerate(comps))
    try:
        return AnalyticMap(obj["n"], obj["k"], exprs, label)
    except MapParseError:
        raise
    except InputError as err:
        raise MapParseError(str(err), path="/components") from err


def map_to_json(G: AnalyticMap, indent: int | None = None) -> str:
    return json.dumps(map_to_obj(G), indent=indent, ensure_ascii=False, allow_nan=False)


def map_from_json(text: str) -> AnalyticMap:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise MapParseError(err.msg, line=err.lineno, column=err.colno) from err
    return map_from_obj(obj)


def load_map(path) -> AnalyticMap:
    with open(path, encoding="utf-8") as fh:
        return map_from_json(fh.read())


def save_map(G: AnalyticMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(map_to_json(G, indent=1))
        fh.write("\n")

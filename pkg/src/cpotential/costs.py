"""Cost registry.

A cost ``c(x, y)`` takes values in ``]-inf, +inf]``; its domain ``D`` is the set
where it is finite.  Every registry kind has two independent implementations:
a vectorised formula (``cost_matrix``) and a plain domain predicate
(``in_domain``).  Tests check that the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Any, Mapping, Sequence

import numpy as np

from .extreal import POS_INF, parse_ext

KINDS = (
    "classical_pairing",
    "polar",
    "coulomb",
    "bregman",
    "hellinger_kantorovich",
    "halfline_diag",
    "example51",
    "tabulated",
    "disk",
)
MONOTONICITY = ("none", "ominus", "oplus")
IRRATIONAL_Y = "irrational-y"


class CostError(ValueError):
    """Bad cost specification or evaluation request."""


class DimensionError(CostError):
    pass


class GeneratorDomainError(CostError):
    """A Bregman generator was evaluated outside its domain."""


def _vec(v) -> tuple[float, ...]:
    if np.ndim(v) == 0:
        return (float(v),)
    return tuple(float(t) for t in v)


@dataclass(frozen=True)
class PointPair:
    """A point ``(x, y)`` of ``X x Y`` with free-form string tags."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    tags: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "x", _vec(self.x))
        object.__setattr__(self, "y", _vec(self.y))
        object.__setattr__(self, "tags", frozenset(self.tags))
        if len(self.x) != len(self.y):
            raise DimensionError(f"x has dimension {len(self.x)} but y has {len(self.y)}")

    @property
    def dim(self) -> int:
        return len(self.x)

    def as_tuple(self) -> tuple[float, ...]:
        return self.x + self.y


def pt(x, y, tags=()) -> PointPair:
    return PointPair(x, y, frozenset(tags))


# ---------------------------------------------------------------- perturbation

@dataclass(frozen=True)
class FunctionSpec:
    """A real function of one coordinate, applied to each coordinate and summed.

    ``form`` is one of ``zero``, ``affine`` (a*t + b), ``quadratic`` (a*t**2),
    ``sin`` (a*sin t) or ``table`` (lookup in ``values`` with fallback ``default``).
    """

    form: str = "zero"
    a: float = 0.0
    b: float = 0.0
    values: tuple[tuple[float, float], ...] = ()
    default: float = 0.0

    def __post_init__(self):
        if self.form not in ("zero", "affine", "quadratic", "sin", "table"):
            raise CostError(f"unknown function form {self.form!r}")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.form == "zero":
            out = np.zeros_like(t)
        elif self.form == "affine":
            out = self.a * t + self.b
        elif self.form == "quadratic":
            out = self.a * t * t
        elif self.form == "sin":
            out = self.a * np.sin(t)
        else:
            table = dict(self.values)
            flat = [table.get(float(v), self.default) for v in t.ravel()]
            out = np.asarray(flat, dtype=float).reshape(t.shape)
        return out.sum(axis=-1)

    def to_json(self) -> dict:
        d: dict[str, Any] = {"form": self.form}
        if self.form in ("affine", "quadratic", "sin"):
            d["a"] = self.a
        if self.form == "affine":
            d["b"] = self.b
        if self.form == "table":
            d["values"] = [list(kv) for kv in self.values]
            d["default"] = self.default
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "FunctionSpec":
        return cls(
            form=d.get("form", "zero"),
            a=float(d.get("a", 0.0)),
            b=float(d.get("b", 0.0)),
            values=tuple((float(k), float(v)) for k, v in d.get("values", ())),
            default=float(d.get("default", 0.0)),
        )


@dataclass(frozen=True)
class Perturbation:
    """Separable shift ``g(x) + h(y)`` added to finite cost values."""

    g: FunctionSpec = FunctionSpec()
    h: FunctionSpec = FunctionSpec()


# ------------------------------------------------------------------ cost spec

# kind -> (declared monotonicity, boundary-distance selector, open domain, continuous on D)
_DEFAULTS = {
    "classical_pairing": ("oplus", "full", True, True),
    "polar": ("ominus", None, True, True),
    "coulomb": ("none", "diagonal", True, True),
    "bregman": ("oplus", None, True, True),
    "hellinger_kantorovich": ("none", "hk", True, True),
    "halfline_diag": ("none", None, False, True),
    "example51": ("ominus", None, True, False),
    "tabulated": ("none", None, False, False),
    "disk": ("none", "disk", True, True),
}
BOUNDARY_SELECTORS = ("none", "full", "diagonal", "hk", "disk")


@dataclass(frozen=True)
class CostSpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    perturbation: Perturbation | None = None
    declared_monotonicity: str | None = None
    boundary_distance: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CostError(f"unknown cost kind {self.kind!r}")
        object.__setattr__(self, "params", dict(self.params))
        dm, bd, _, _ = _DEFAULTS[self.kind]
        if self.kind == "classical_pairing" and self.sign > 0:
            dm = "ominus"
        if self.kind == "bregman" and self.params.get("generator", "square") == "square":
            bd = "full"
        if self.kind == "polar" and self.region != "all":
            dm = "ominus"
        if self.declared_monotonicity is None:
            object.__setattr__(self, "declared_monotonicity", dm)
        if self.declared_monotonicity not in MONOTONICITY:
            raise CostError(f"bad monotonicity {self.declared_monotonicity!r}")
        if self.boundary_distance is None:
            object.__setattr__(self, "boundary_distance", bd or "none")
        if self.boundary_distance not in BOUNDARY_SELECTORS:
            raise CostError(f"bad boundary-distance selector {self.boundary_distance!r}")
        if self.kind == "bregman" and self.params.get("generator", "square") not in BREGMAN_GENERATORS:
            raise CostError(f"unknown Bregman generator {self.params.get('generator')!r}")
        if self.kind in ("polar", "example51") and self.region not in ("all", "D1", "D2"):
            raise CostError(f"bad region {self.region!r}")
        if self.kind == "tabulated":
            object.__setattr__(self, "_table", _build_table(self.params))

    # convenience accessors
    @property
    def sign(self) -> float:
        return float(self.params.get("sign", -1.0))

    @property
    def region(self) -> str:
        return self.params.get("region", "all")

    @property
    def domain_open(self) -> bool:
        return _DEFAULTS[self.kind][2]

    @property
    def continuous(self) -> bool:
        return _DEFAULTS[self.kind][3]

    @property
    def fixed_dim(self) -> int | None:
        if self.kind in ("halfline_diag", "example51", "disk"):
            return 1
        if self.kind == "polar" and self.region != "all":
            return 1
        return None

    def check_dim(self, n: int) -> None:
        want = self.fixed_dim
        if want is not None and n != want:
            raise DimensionError(f"{self.kind} cost needs dimension {want}, got {n}")
        if self.kind == "tabulated":
            tdim = self._table[2]
            if tdim is not None and n != tdim:
                raise DimensionError(f"table keys have dimension {tdim}, got {n}")

    def to_json(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind, "params": dict(self.params)}
        if self.perturbation is not None:
            d["perturbation"] = {"g": self.perturbation.g.to_json(), "h": self.perturbation.h.to_json()}
        d["declared_monotonicity"] = self.declared_monotonicity
        d["boundary_distance"] = self.boundary_distance
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "CostSpec":
        pert = d.get("perturbation")
        if pert is not None:
            pert = Perturbation(FunctionSpec.from_json(pert.get("g", {})), FunctionSpec.from_json(pert.get("h", {})))
        return cls(
            kind=d["kind"],
            params=d.get("params", {}),
            perturbation=pert,
            declared_monotonicity=d.get("declared_monotonicity"),
            boundary_distance=d.get("boundary_distance"),
        )

    def with_perturbation(self, g: FunctionSpec, h: FunctionSpec) -> "CostSpec":
        return CostSpec(self.kind, self.params, Perturbation(g, h), self.declared_monotonicity, self.boundary_distance)


def _coerce_key(k) -> tuple[float, ...]:
    return _vec(k)


def _build_table(params):
    xs = [_coerce_key(k) for k in params.get("xs", [])]
    ys = [_coerce_key(k) for k in params.get("ys", [])]
    vals = params.get("values", [])
    if len(vals) != len(xs) or any(len(row) != len(ys) for row in vals):
        raise CostError("tabulated cost needs a len(xs) x len(ys) values table")
    table = {}
    for a, row in zip(xs, vals):
        for b, v in zip(ys, row):
            v = parse_ext(v)
            if v == -math.inf:
                raise CostError("a cost never takes the value -inf")
            table[(a, b)] = v
    dims = {len(k) for k in xs + ys}
    if len(dims) > 1:
        raise CostError("table keys mix dimensions")
    return table, (xs, ys), (dims.pop() if dims else None)


def tabulated(xs: Sequence, ys: Sequence, values) -> CostSpec:
    """Build a tabulated cost from keys and a ``len(xs) x len(ys)`` table."""
    vals = [[("+inf" if v == POS_INF else float(v)) for v in row] for row in np.asarray(values, dtype=float).tolist()]
    return CostSpec("tabulated", {"xs": [list(_vec(k)) for k in xs], "ys": [list(_vec(k)) for k in ys], "values": vals})


# ------------------------------------------------------------- generators

def _gen_square(t):
    return 0.5 * t * t


def _gen_square_grad(t):
    return t


def _gen_negent(t):
    return t * np.log(t) - t


def _gen_negent_grad(t):
    return np.log(t)


# name -> (f, f', domain predicate)
BREGMAN_GENERATORS = {
    "square": (_gen_square, _gen_square_grad, lambda t: np.ones_like(t, dtype=bool)),
    "negative_entropy": (_gen_negent, _gen_negent_grad, lambda t: t > 0),
}


def bregman_generator(name: str, t) -> float:
    """Evaluate a shipped Bregman generator, refusing points outside its domain."""
    f, _, dom = BREGMAN_GENERATORS[name]
    arr = np.asarray(t, dtype=float)
    if not np.all(dom(arr)):
        raise GeneratorDomainError(f"generator {name} is undefined at {t!r}")
    return float(np.sum(f(arr)))


# ------------------------------------------------------------- evaluation

def _raw(spec: CostSpec, X: np.ndarray, Y: np.ndarray, rational_y: np.ndarray) -> np.ndarray:
    """Unperturbed cost on broadcast arrays ``X[..., d]``, ``Y[..., d]``."""
    kind = spec.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "classical_pairing":
            return spec.sign * np.sum(X * Y, axis=-1)
        if kind in ("polar", "example51"):
            s = np.sum(X * Y, axis=-1) - 1.0
            ok = s > 0
            if spec.region == "D1":
                ok &= X[..., 0] > 0
            elif spec.region == "D2":
                ok &= X[..., 0] < 0
            out = np.where(ok, -np.log(np.where(ok, s, 1.0)), POS_INF)
            if kind == "example51":
                out = out + np.where(rational_y, 1.0, 0.0)
            return out
        if kind == "coulomb":
            r = np.sqrt(np.sum((X - Y) ** 2, axis=-1))
            return np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), POS_INF)
        if kind == "bregman":
            f, fp, dom = BREGMAN_GENERATORS[spec.params.get("generator", "square")]
            ok = np.all(dom(X), axis=-1) & np.all(dom(Y), axis=-1)
            Xs = np.where(dom(X), X, 1.0)
            Ys = np.where(dom(Y), Y, 1.0)
            val = np.sum(f(Xs) - f(Ys) - (Xs - Ys) * fp(Ys), axis=-1)
            return np.where(ok, val, POS_INF)
        if kind == "hellinger_kantorovich":
            d = np.sqrt(np.sum((X - Y) ** 2, axis=-1))
            ok = d < math.pi / 2
            cos2 = np.cos(np.where(ok, d, 0.0)) ** 2
            return np.where(ok, -np.log(cos2), POS_INF)
        if kind == "halfline_diag":
            x, y = X[..., 0], Y[..., 0]
            return np.where(y <= x, y - x, POS_INF)
        if kind == "disk":
            r2 = X[..., 0] ** 2 + Y[..., 0] ** 2
            return np.where(r2 < float(spec.params.get("radius", 1.0)) ** 2, 0.0, POS_INF)
    raise CostError(f"no vectorised formula for {kind}")  # pragma: no cover


def cost_matrix(spec: CostSpec, X, Y, y_tags: Sequence[frozenset] | None = None) -> np.ndarray:
    """Matrix ``M[a, b] = c(X[a], Y[b])``.

    ``y_tags[b]`` carries the tags of the point owning ``Y[b]`` (only the
    example51 cost reads them).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise DimensionError("x and y dimensions differ")
    spec.check_dim(X.shape[1])
    if spec.kind == "tabulated":
        table = spec._table[0]
        xk = [tuple(r) for r in X.tolist()]
        yk = [tuple(r) for r in Y.tolist()]
        M = np.array([[table.get((a, b), POS_INF) for b in yk] for a in xk], dtype=float).reshape(len(xk), len(yk))
    else:
        if y_tags is None:
            rational = np.ones(Y.shape[0], dtype=bool)
        else:
            rational = np.array([IRRATIONAL_Y not in t for t in y_tags], dtype=bool)
        M = _raw(spec, X[:, None, :], Y[None, :, :], rational[None, :])
    if spec.perturbation is not None:
        shift = spec.perturbation.g(X)[:, None] + spec.perturbation.h(Y)[None, :]
        M = np.where(np.isfinite(M), M + shift, M)
    return M


def cost_pairs(spec: CostSpec, X, Y, tags: Sequence[frozenset] | None = None) -> np.ndarray:
    """Elementwise ``c(X[k], Y[k])``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape != Y.shape:
        raise DimensionError("x and y batches differ in shape")
    spec.check_dim(X.shape[1])
    if spec.kind == "tabulated":
        table = spec._table[0]
        out = np.array([table.get((tuple(a), tuple(b)), POS_INF) for a, b in zip(X.tolist(), Y.tolist())], dtype=float)
    else:
        rational = np.ones(len(X), dtype=bool) if tags is None else np.array([IRRATIONAL_Y not in t for t in tags])
        out = _raw(spec, X, Y, rational)
    if spec.perturbation is not None:
        out = np.where(np.isfinite(out), out + spec.perturbation.g(X) + spec.perturbation.h(Y), out)
    return out


def eval_cost(spec: CostSpec, p, y=None, tags=()) -> float:
    """``c(x, y)`` for a ``PointPair`` or for explicit ``x``, ``y``."""
    if isinstance(p, PointPair):
        x, y, tags = p.x, p.y, p.tags
    else:
        if y is None:
            raise CostError("eval_cost needs a PointPair or both x and y")
        x, y = _vec(p), _vec(y)
    if len(x) != len(y):
        raise DimensionError("x and y dimensions differ")
    return float(cost_matrix(spec, [x], [y], [frozenset(tags)])[0, 0])


def in_domain(spec: CostSpec, p, y=None) -> bool:
    """Domain predicate written directly from the domain descriptions."""
    if isinstance(p, PointPair):
        x, y = p.x, p.y
    else:
        x, y = _vec(p), _vec(y)
    spec.check_dim(len(x))
    kind = spec.kind
    if kind in ("classical_pairing",):
        return True
    if kind == "bregman":
        if spec.params.get("generator", "square") == "square":
            return True
        return all(t > 0 for t in x) and all(t > 0 for t in y)
    if kind in ("polar", "example51"):
        ip = sum(a * b for a, b in zip(x, y))
        if not ip > 1:
            return False
        if spec.region == "D1":
            return x[0] > 0
        if spec.region == "D2":
            return x[0] < 0
        return True
    if kind == "coulomb":
        return x != y
    if kind == "hellinger_kantorovich":
        return math.dist(x, y) < math.pi / 2
    if kind == "halfline_diag":
        return y[0] <= x[0]
    if kind == "disk":
        return x[0] ** 2 + y[0] ** 2 < float(spec.params.get("radius", 1.0)) ** 2
    if kind == "tabulated":
        return math.isfinite(spec._table[0].get((x, y), POS_INF))
    raise CostError(kind)  # pragma: no cover


def boundary_distance(spec: CostSpec, p: PointPair) -> float | None:
    """Closed-form product-metric distance from ``p`` to the complement of ``D``.

    Returns ``None`` when the cost has no closed-form selector.
    """
    sel = spec.boundary_distance
    if sel == "none":
        return None
    d = np.asarray(p.x) - np.asarray(p.y)
    if sel == "full":
        return POS_INF
    if sel == "diagonal":
        return float(np.linalg.norm(d)) / math.sqrt(2.0)
    if sel == "hk":
        return (math.pi / 2 - float(np.linalg.norm(d))) / math.sqrt(2.0)
    if sel == "disk":
        return float(spec.params.get("radius", 1.0)) - math.hypot(p.x[0], p.y[0])
    raise CostError(sel)  # pragma: no cover


def registry_examples() -> dict[str, CostSpec]:
    """One spec per registry entry, handy for sweeping tests and demos."""
    return {
        "classical_pairing": CostSpec("classical_pairing"),
        "classical_pairing_xy": CostSpec("classical_pairing", {"sign": 1.0}),
        "polar": CostSpec("polar"),
        "polar_D1": CostSpec("polar", {"region": "D1"}),
        "coulomb": CostSpec("coulomb"),
        "bregman_square": CostSpec("bregman", {"generator": "square"}),
        "bregman_negent": CostSpec("bregman", {"generator": "negative_entropy"}),
        "hellinger_kantorovich": CostSpec("hellinger_kantorovich"),
        "halfline_diag": CostSpec("halfline_diag"),
        "example51": CostSpec("example51"),
        "example51_D1": CostSpec("example51", {"region": "D1"}),
        "disk": CostSpec("disk"),
    }

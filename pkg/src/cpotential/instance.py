"""Finite instances and their JSON file format."""

from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .costs import CostSpec, PointPair, cost_matrix, eval_cost, in_domain

SCHEMA_VERSION = "cpotential.instance/1"
DEFAULT_TOL = 1e-9


class InstanceError(ValueError):
    """Malformed or out-of-domain instance input."""


@dataclass(frozen=True)
class Segment:
    """A straight segment ``a -> b`` in the plane, sampled at ``count`` evenly spaced points."""

    a: tuple[float, float]
    b: tuple[float, float]
    count: int
    closed: tuple[bool, bool] = (True, True)
    tags: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "a", (float(self.a[0]), float(self.a[1])))
        object.__setattr__(self, "b", (float(self.b[0]), float(self.b[1])))
        object.__setattr__(self, "tags", frozenset(self.tags))
        if self.count < 1:
            raise InstanceError("segment needs at least one sample")

    def sample(self) -> list[PointPair]:
        ts = np.linspace(0.0, 1.0, self.count) if self.count > 1 else np.array([0.0])
        if not self.closed[0]:
            ts = ts[ts > 0]
        if not self.closed[1]:
            ts = ts[ts < 1]
        ax, ay = self.a
        bx, by = self.b
        return [PointPair((ax + t * (bx - ax),), (ay + t * (by - ay),), self.tags) for t in ts]

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "count": self.count,
                "closed": list(self.closed), "tags": sorted(self.tags)}


@dataclass
class Instance:
    """A cost together with a finite point set in its domain."""

    cost: CostSpec
    points: list[PointPair]
    tolerance: float = DEFAULT_TOL
    seed: int = 0
    segments: list[Segment] = field(default_factory=list)
    explicit_count: int | None = None

    def __post_init__(self):
        self.points = list(self.points)
        if self.explicit_count is None:
            self.explicit_count = len(self.points)
            for seg in self.segments:
                self.points.extend(seg.sample())
        if self.tolerance <= 0:
            raise InstanceError("tolerance must be positive")
        self.validate()

    def validate(self) -> None:
        if not self.points:
            return
        dims = {p.dim for p in self.points}
        if len(dims) != 1:
            raise InstanceError(f"points mix dimensions {sorted(dims)}")
        dim = dims.pop()
        if self.segments and dim != 1:
            raise InstanceError("segments are only allowed for 2-coordinate instances")
        try:
            self.cost.check_dim(dim)
        except ValueError as exc:
            raise InstanceError(str(exc)) from exc
        diag = self.diagonal_costs()
        for i, p in enumerate(self.points):
            if not math.isfinite(diag[i]):
                raise InstanceError(f"point {i} {p.x}x{p.y} is outside the cost domain "
                                    f"(c = {diag[i]}){_domain_hint(self.cost, p)}")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def X(self) -> np.ndarray:
        return np.array([p.x for p in self.points], dtype=float)

    def Y(self) -> np.ndarray:
        return np.array([p.y for p in self.points], dtype=float)

    def cross_costs(self) -> np.ndarray:
        """``M[a, b] = c(x_a, y_b)`` over instance points."""
        return cost_matrix(self.cost, self.X(), self.Y(), [p.tags for p in self.points])

    def diagonal_costs(self) -> np.ndarray:
        return np.array([eval_cost(self.cost, p) for p in self.points], dtype=float)

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def subset(self, idx: Sequence[int]) -> "Instance":
        return Instance(self.cost, [self.points[i] for i in idx], self.tolerance, self.seed)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "cost": self.cost.to_json(),
            "points": [point_to_json(p) for p in self.points[: self.explicit_count]],
            "segments": [s.to_json() for s in self.segments],
            "tolerance": self.tolerance,
            "seed": self.seed,
        }


def _domain_hint(cost: CostSpec, p: PointPair) -> str:
    if cost.kind in ("polar", "example51"):
        if sum(a * b for a, b in zip(p.x, p.y)) <= 1:
            return ": xy ≤ 1 is outside the domain"
        return f": point is not in region {cost.region}"
    if cost.kind == "coulomb":
        return ": x = y is outside the domain"
    if cost.kind == "halfline_diag":
        return ": x < y is outside the domain"
    return ""


def point_to_json(p: PointPair) -> dict:
    return {"x": list(p.x), "y": list(p.y), "tags": sorted(p.tags)}


def point_from_json(d) -> PointPair:
    if isinstance(d, dict):
        return PointPair(d["x"], d["y"], frozenset(d.get("tags", ())))
    x, y = d
    return PointPair(x, y)


def instance_from_json(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("instance file must hold a JSON object")
    if d.get("schema") != SCHEMA_VERSION:
        raise InstanceError(f"unsupported schema {d.get('schema')!r}, expected {SCHEMA_VERSION!r}")
    try:
        cost = CostSpec.from_json(d["cost"])
        points = [point_from_json(p) for p in d.get("points", [])]
        segs = [Segment(tuple(s["a"]), tuple(s["b"]), int(s["count"]),
                        tuple(s.get("closed", (True, True))), frozenset(s.get("tags", ())))
                for s in d.get("segments", [])]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"schema violation: {exc}") from exc
    except ValueError as exc:
        raise InstanceError(str(exc)) from exc
    if not points and not segs:
        raise InstanceError("instance has neither points nor segments")
    return Instance(cost, points, float(d.get("tolerance", DEFAULT_TOL)), int(d.get("seed", 0)), segs)


def parse_instance(path) -> Instance:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path} is not valid JSON: {exc}") from exc
    return instance_from_json(data)


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_json(), indent=2) + "\n")


def in_domain_all(cost: CostSpec, pts: Sequence[PointPair]) -> list[bool]:
    return [in_domain(cost, p) for p in pts]

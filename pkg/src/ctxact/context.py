"""Context schemas, snapshots, and the distance/containment primitives.

A context schema is an ordered list of attribute descriptors; position 0 is
always the user's identity (categorical). Four attribute kinds are supported:

* ``numeric``        -- a scalar with a declared [lower, upper] range
* ``cyclic-numeric`` -- a scalar on a circle of a given period (time of day)
* ``vector-n``       -- an n-dimensional point with per-dimension ranges
* ``categorical``    -- one label out of a declared set

Every elemental distance is normalized into [0, 1]:

* numeric:   |a - b| / (upper - lower), inputs clamped to the range
* cyclic:    min(|a - b|, period - |a - b|) / (period / 2)
* vector-n:  Euclidean distance of per-dimension-normalized values / sqrt(n)
* categorical: 0 when the values match, 1 otherwise

Snapshot distance is the weighted Manhattan combination of elemental
distances. Weights are per-attribute, each strictly inside (0, 1).

Bounds describe axis-aligned regions (intervals per scalar attribute, a box
per vector attribute, a label subset per categorical attribute). Cyclic
intervals may wrap through zero: (lower, upper) with lower > upper denotes
the arc that crosses 0. Containment of a snapshot in a bounds row is the
conjunction of the per-attribute tests and is vacuously true for an empty
schema.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Iterator, Sequence


class SchemaError(ValueError):
    """Bad schema declaration or a value that does not fit its attribute."""


class KindMismatchError(TypeError):
    """A value's type does not match the attribute kind."""


class Kind(str, Enum):
    NUMERIC = "numeric"
    CYCLIC = "cyclic-numeric"
    VECTOR = "vector-n"
    CATEGORICAL = "categorical"


# ── attribute descriptors ────────────────────────────────────────────────


@dataclass(frozen=True)
class Attribute:
    """One position of a context schema.

    Only the fields relevant to ``kind`` are meaningful: lower/upper for
    numeric, period for cyclic-numeric, ranges for vector-n, labels for
    categorical.
    """

    name: str
    kind: Kind
    lower: float = 0.0
    upper: float = 1.0
    period: float = 0.0
    ranges: tuple[tuple[float, float], ...] = ()
    labels: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("attribute needs a name")
        if self.kind is Kind.NUMERIC:
            if not self.lower < self.upper:
                raise SchemaError(f"{self.name}: need lower < upper")
        elif self.kind is Kind.CYCLIC:
            if not self.period > 0:
                raise SchemaError(f"{self.name}: need period > 0")
        elif self.kind is Kind.VECTOR:
            if not self.ranges:
                raise SchemaError(f"{self.name}: need at least one dimension")
            for lo, hi in self.ranges:
                if not lo < hi:
                    raise SchemaError(f"{self.name}: each dimension needs lo < hi")
        elif self.kind is Kind.CATEGORICAL:
            if not self.labels:
                raise SchemaError(f"{self.name}: need a non-empty label set")

    @property
    def dims(self) -> int:
        return len(self.ranges)


def numeric(name: str, lower: float, upper: float) -> Attribute:
    return Attribute(name, Kind.NUMERIC, lower=float(lower), upper=float(upper))


def cyclic(name: str, period: float) -> Attribute:
    return Attribute(name, Kind.CYCLIC, period=float(period))


def vector(name: str, ranges: Iterable[tuple[float, float]]) -> Attribute:
    rs = tuple((float(lo), float(hi)) for lo, hi in ranges)
    return Attribute(name, Kind.VECTOR, ranges=rs)


def categorical(name: str, labels: Iterable[str]) -> Attribute:
    return Attribute(name, Kind.CATEGORICAL, labels=frozenset(labels))


# ── schema and snapshots ─────────────────────────────────────────────────


@dataclass(frozen=True)
class Snapshot:
    """Concrete values for every schema position at one instant."""

    values: tuple
    t: datetime


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]

    def __post_init__(self) -> None:
        if not self.attributes:
            raise SchemaError("schema must not be empty")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")
        if self.attributes[0].kind is not Kind.CATEGORICAL:
            raise SchemaError("position 0 is the user identity and must be categorical")

    def __len__(self) -> int:
        return len(self.attributes)

    def __iter__(self) -> Iterator[Attribute]:
        return iter(self.attributes)

    def __getitem__(self, i: int) -> Attribute:
        return self.attributes[i]

    def index(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise SchemaError(f"no attribute named {name!r}")

    def normalize(self, values: Sequence) -> tuple:
        """Clamp/wrap raw values into the schema's domains.

        Numeric values clamp to [lower, upper], cyclic values reduce modulo
        the period, vector components clamp per dimension. Categorical values
        must be declared labels.
        """
        if len(values) != len(self.attributes):
            raise SchemaError(
                f"expected {len(self.attributes)} values, got {len(values)}"
            )
        return tuple(
            _normalize_value(a, v) for a, v in zip(self.attributes, values)
        )

    def snapshot(self, values: Sequence, t: datetime) -> Snapshot:
        return Snapshot(self.normalize(values), t)

    # JSON descriptor list: [{"name": ..., "kind": ..., <kind params>}]

    def to_json(self) -> list[dict]:
        out = []
        for a in self.attributes:
            d: dict = {"name": a.name, "kind": a.kind.value}
            if a.kind is Kind.NUMERIC:
                d["min"] = a.lower
                d["max"] = a.upper
            elif a.kind is Kind.CYCLIC:
                d["period"] = a.period
            elif a.kind is Kind.VECTOR:
                d["dims"] = a.dims
                d["ranges"] = [[lo, hi] for lo, hi in a.ranges]
            else:
                d["labels"] = sorted(a.labels)
            out.append(d)
        return out

    @classmethod
    def from_json(cls, items: Sequence[dict]) -> "Schema":
        attrs = []
        for d in items:
            try:
                kind = Kind(d["kind"])
                name = d["name"]
            except (KeyError, ValueError) as exc:
                raise SchemaError(f"bad attribute descriptor: {d!r}") from exc
            if kind is Kind.NUMERIC:
                attrs.append(numeric(name, d["min"], d["max"]))
            elif kind is Kind.CYCLIC:
                attrs.append(cyclic(name, d["period"]))
            elif kind is Kind.VECTOR:
                a = vector(name, [tuple(r) for r in d["ranges"]])
                if "dims" in d and d["dims"] != a.dims:
                    raise SchemaError(f"{name}: dims does not match ranges")
                attrs.append(a)
            else:
                attrs.append(categorical(name, d["labels"]))
        return cls(tuple(attrs))

    def dump(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def load(cls, text: str) -> "Schema":
        return cls.from_json(json.loads(text))


def _normalize_value(attr: Attribute, v):
    if attr.kind is Kind.NUMERIC:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise KindMismatchError(f"{attr.name}: expected a number, got {v!r}")
        return min(max(float(v), attr.lower), attr.upper)
    if attr.kind is Kind.CYCLIC:
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise KindMismatchError(f"{attr.name}: expected a number, got {v!r}")
        return float(v) % attr.period
    if attr.kind is Kind.VECTOR:
        if not isinstance(v, (tuple, list)):
            raise KindMismatchError(f"{attr.name}: expected a sequence, got {v!r}")
        if len(v) != attr.dims:
            raise SchemaError(f"{attr.name}: expected {attr.dims} components")
        return tuple(
            min(max(float(c), lo), hi) for c, (lo, hi) in zip(v, attr.ranges)
        )
    if not isinstance(v, str):
        raise KindMismatchError(f"{attr.name}: expected a label, got {v!r}")
    if v not in attr.labels:
        raise SchemaError(f"{attr.name}: unknown label {v!r}")
    return v


# ── weights ──────────────────────────────────────────────────────────────


def uniform_weights(n: int) -> tuple[float, ...]:
    """Equal weights for n attributes.

    Each weight must sit strictly inside (0, 1), so a single-attribute
    schema gets 0.5 rather than 1.0.
    """
    if n < 1:
        raise SchemaError("need at least one attribute")
    w = 1.0 / n if n > 1 else 0.5
    return (w,) * n


def validate_weights(schema: Schema, weights: Sequence[float]) -> tuple[float, ...]:
    if len(weights) != len(schema):
        raise SchemaError(
            f"expected {len(schema)} weights, got {len(weights)}"
        )
    for w in weights:
        if not 0.0 < w < 1.0:
            raise SchemaError(f"weights must lie strictly in (0, 1), got {w}")
    return tuple(float(w) for w in weights)


# ── distances ────────────────────────────────────────────────────────────


def _as_label_set(v) -> frozenset:
    return v if isinstance(v, frozenset) else frozenset((v,))


def elem_distance(attr: Attribute, a, b) -> float:
    """Normalized distance between two values of one attribute, in [0, 1]."""
    if attr.kind is Kind.NUMERIC:
        span = attr.upper - attr.lower
        av = min(max(float(a), attr.lower), attr.upper)
        bv = min(max(float(b), attr.lower), attr.upper)
        return min(abs(av - bv) / span, 1.0)
    if attr.kind is Kind.CYCLIC:
        av = float(a) % attr.period
        bv = float(b) % attr.period
        d = abs(av - bv)
        return min(d, attr.period - d) / (attr.period / 2.0)
    if attr.kind is Kind.VECTOR:
        if len(a) != attr.dims or len(b) != attr.dims:
            raise SchemaError(f"{attr.name}: expected {attr.dims} components")
        acc = 0.0
        for av, bv, (lo, hi) in zip(a, b, attr.ranges):
            d = min(abs(float(av) - float(bv)) / (hi - lo), 1.0)
            acc += d * d
        return math.sqrt(acc) / math.sqrt(attr.dims)
    # Categorical: a state's mid may hold a label *set* after a split; the
    # distance to a set is 0 when the other side is a member.
    return 0.0 if _as_label_set(a) & _as_label_set(b) else 1.0


def snapshot_distance(
    schema: Schema,
    a: Snapshot,
    b: Snapshot,
    weights: Sequence[float],
) -> float:
    """Weighted Manhattan combination of the elemental distances."""
    if len(a.values) != len(schema) or len(b.values) != len(schema):
        raise SchemaError("snapshot does not match schema length")
    return sum(
        w * elem_distance(attr, av, bv)
        for attr, av, bv, w in zip(schema, a.values, b.values, weights)
    )


# ── bounds and containment ───────────────────────────────────────────────
#
# Bound payloads by kind:
#   numeric        (lo, hi)                closed interval
#   cyclic-numeric (lo, hi)                closed arc; lo > hi wraps through 0
#   vector-n       ((lo, hi), ...)         closed box, one pair per dimension
#   categorical    frozenset of labels


def elem_contains(attr: Attribute, bound, value) -> bool:
    if attr.kind is Kind.NUMERIC:
        lo, hi = bound
        return lo <= value <= hi
    if attr.kind is Kind.CYCLIC:
        lo, hi = bound
        v = float(value) % attr.period
        if lo <= hi:
            return lo <= v <= hi
        return v >= lo or v <= hi
    if attr.kind is Kind.VECTOR:
        if len(value) != attr.dims:
            raise SchemaError(f"{attr.name}: expected {attr.dims} components")
        return all(lo <= c <= hi for c, (lo, hi) in zip(value, bound))
    return _as_label_set(value) <= bound


def bounds_contain(schema: Schema, bounds: Sequence, snapshot: Snapshot) -> bool:
    """True when every attribute of the snapshot falls inside its bound."""
    return all(
        elem_contains(attr, b, v)
        for attr, b, v in zip(schema, bounds, snapshot.values)
    )


def bound_endpoints(attr: Attribute, bound) -> tuple:
    """The (min-corner, max-corner) values of a bound, as snapshot values."""
    if attr.kind in (Kind.NUMERIC, Kind.CYCLIC):
        return bound[0], bound[1]
    if attr.kind is Kind.VECTOR:
        return tuple(lo for lo, _ in bound), tuple(hi for _, hi in bound)
    return bound, bound


def bound_midpoint(attr: Attribute, bound):
    """The center of a bound; a categorical bound is its own mid (the set)."""
    if attr.kind is Kind.NUMERIC:
        lo, hi = bound
        return (lo + hi) / 2.0
    if attr.kind is Kind.CYCLIC:
        lo, hi = bound
        width = (hi - lo) % attr.period
        return (lo + width / 2.0) % attr.period
    if attr.kind is Kind.VECTOR:
        return tuple((lo + hi) / 2.0 for lo, hi in bound)
    return bound


def bounds_radius(schema: Schema, bounds: Sequence) -> float:
    """Half the uniform-weight distance between a bounds row's two corners."""
    w = uniform_weights(len(schema))
    acc = 0.0
    for attr, b, wi in zip(schema, bounds, w):
        lo, hi = bound_endpoints(attr, b)
        acc += wi * elem_distance(attr, lo, hi)
    return acc / 2.0

# ── snapshot serialization ───────────────────────────────────────────────


def value_to_json(attr: Attribute, v):
    """A snapshot value as a JSON-compatible object."""
    if attr.kind is Kind.VECTOR:
        return list(v)
    if attr.kind is Kind.CATEGORICAL and isinstance(v, frozenset):
        return sorted(v)
    return v


def value_from_json(attr: Attribute, v):
    if attr.kind is Kind.VECTOR:
        return tuple(float(c) for c in v)
    if attr.kind is Kind.CATEGORICAL:
        return frozenset(v) if isinstance(v, list) else v
    return float(v)


def snapshot_to_json(schema: Schema, s: Snapshot) -> dict:
    return {
        "values": [value_to_json(a, v) for a, v in zip(schema, s.values)],
        "t": s.t.isoformat(timespec="microseconds"),
    }


def snapshot_from_json(schema: Schema, d) -> Snapshot:
    return Snapshot(
        tuple(value_from_json(a, v) for a, v in zip(schema, d["values"])),
        datetime.fromisoformat(d["t"]),
    )

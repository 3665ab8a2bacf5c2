"""Per-device utility learning over regions of context space.

Each device keeps a local model: a set of *states*, where a state is an
axis-aligned region of context space (a bounds row plus its mid snapshot and
radius) carrying one utility value in (0, 1) per action. Requests are
answered by the highest-utility (state, action) pair among the states
containing the current snapshot; a missing region is covered on demand by
creating a state around the snapshot, initialized from its k nearest
existing states so that knowledge transfers to nearby regions.

Feedback moves utilities along a sigmoid in logit space: positive feedback
adds ``reward`` logit units, negative subtracts (implicit feedback is scaled
down by ``implicit_weight``). Steps therefore shrink as a utility approaches
either end, and utilities never leave (0, 1).

Each state also caches its recent feedback (FIFO, bounded). When the binary
entropy of some action's outcomes exceeds a threshold the state tries to
split itself along one attribute, choosing the cut with the highest
information gain, so that contexts with conflicting preferences end up in
separate regions. A small per-action window of recent explicit outcomes
additionally detects disparity (a well-rated action suddenly rejected over
and over) and resets that action's utility rather than waiting for the
sigmoid to crawl back down.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping, Sequence

import numpy as np

from .context import (
    Attribute,
    Kind,
    Schema,
    SchemaError,
    Snapshot,
    bound_midpoint,
    bounds_contain,
    bounds_radius,
    elem_contains,
    snapshot_distance,
    snapshot_from_json,
    snapshot_to_json,
    uniform_weights,
    validate_weights,
)


class ModelConfigError(ValueError):
    """Model declared with an unusable configuration."""


# Utilities are kept strictly inside (0, 1); the sigmoid saturates to exactly
# 1.0 in float64 once the logit passes ~36.7, so results are clamped just
# short of the ends.
_U_FLOOR = 1e-12
_U_CEIL = 1.0 - 1e-12

# Stored scores are additionally kept inside a recoverable band. Scores
# drift one reward unit per explicit feedback, so the band radius (about
# 4.6 logit units at 0.01/0.99) is the worst-case number of corrections a
# long-held belief needs before the ranking flips; without the band, a
# device that lost for weeks is buried tens of units deep and can never
# climb back in useful time.
_U_MIN = 0.01
_U_MAX = 0.99


def _banded(u: float) -> float:
    return min(max(u, _U_MIN), _U_MAX)


def sigmoid_reward(utility: float, delta: float, positive: bool) -> float:
    """Move a utility by ``delta`` logit units up (positive) or down.

    Exact inverse of itself: applying +delta then -delta returns the input
    (up to float rounding), because the update is a translation in logit
    space.
    """
    if not 0.0 < utility < 1.0:
        raise ValueError(f"utility must lie strictly in (0, 1), got {utility}")
    x = math.log(utility / (1.0 - utility))
    x = x + delta if positive else x - delta
    out = 1.0 / (1.0 + math.exp(-x))
    return min(max(out, _U_FLOOR), _U_CEIL)


# ── configuration ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Hyperparameters:
    """Learning knobs, all overridable per run.

    ``default_radius`` is in normalized units (fraction of each attribute's
    distance span); ``radius_overrides`` maps attribute names to raw-unit
    radii (e.g. seconds for a time attribute).
    """

    default_radius: float = 0.05
    radius_overrides: Mapping[str, float] = field(default_factory=dict)
    knn_k: int = 3
    reward: float = 1.0
    entropy_threshold: float = 0.9
    required_gain: float = 0.2
    split_points: int = 8
    cache_capacity: int = 200
    recovery_window: int = 5
    implicit_weight: float = 0.25

    def __post_init__(self) -> None:
        if self.default_radius <= 0:
            raise ModelConfigError("default_radius must be positive")
        if self.knn_k < 1:
            raise ModelConfigError("knn_k must be at least 1")
        if self.reward <= 0:
            raise ModelConfigError("reward must be positive")
        if self.entropy_threshold < 0 or self.required_gain < 0:
            raise ModelConfigError("entropy knobs must be non-negative")
        if self.split_points < 1:
            raise ModelConfigError("split_points must be at least 1")
        if self.cache_capacity < 1:
            raise ModelConfigError("cache_capacity must be at least 1")
        if self.recovery_window < 2:
            raise ModelConfigError("recovery_window must be at least 2")
        if not 0.0 <= self.implicit_weight <= 1.0:
            raise ModelConfigError("implicit_weight must lie in [0, 1]")
        for name, r in self.radius_overrides.items():
            if r <= 0:
                raise ModelConfigError(f"radius override for {name!r} must be positive")

    def attribute_radius(self, attr: Attribute):
        """Raw-unit creation radius for one attribute (per-dim for vectors)."""
        if attr.name in self.radius_overrides:
            r = float(self.radius_overrides[attr.name])
            return (r,) * attr.dims if attr.kind is Kind.VECTOR else r
        if attr.kind is Kind.NUMERIC:
            return self.default_radius * (attr.upper - attr.lower)
        if attr.kind is Kind.CYCLIC:
            return self.default_radius * (attr.period / 2.0)
        if attr.kind is Kind.VECTOR:
            return tuple(self.default_radius * (hi - lo) for lo, hi in attr.ranges)
        return 0.0

    def to_json(self) -> dict:
        return {
            "default_radius": self.default_radius,
            "radius_overrides": dict(self.radius_overrides),
            "knn_k": self.knn_k,
            "reward": self.reward,
            "entropy_threshold": self.entropy_threshold,
            "required_gain": self.required_gain,
            "split_points": self.split_points,
            "cache_capacity": self.cache_capacity,
            "recovery_window": self.recovery_window,
            "implicit_weight": self.implicit_weight,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "Hyperparameters":
        return cls(**dict(d))


# ── requests, proposals, feedback ────────────────────────────────────────


@dataclass(frozen=True)
class Request:
    """What the user asked for; class and action may each be unspecified."""

    device_class: str | None = None
    action: str | None = None
    t: datetime | None = None


@dataclass(frozen=True)
class Proposal:
    """A (device, action) suggestion with the utility that backed it.

    Utility 0 marks an incompatible request (wrong class or unsupported
    action); such proposals carry no learnable signal. ``state_radius`` is
    the radius of the state the utility came from, used only for
    tie-breaking across devices.
    """

    device: str
    action: str | None
    utility: float
    state_radius: float | None = None


@dataclass(frozen=True)
class FeedbackEntry:
    context: Snapshot
    proposal: Proposal
    positive: bool
    seq: int


# ── entropy and splitting ────────────────────────────────────────────────


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def state_entropy(cache: Iterable[FeedbackEntry]) -> float:
    """Worst per-action binary entropy of the cached outcomes; 0 if empty."""
    pos: dict[str, int] = {}
    tot: dict[str, int] = {}
    for e in cache:
        a = e.proposal.action
        tot[a] = tot.get(a, 0) + 1
        if e.positive:
            pos[a] = pos.get(a, 0) + 1
    best = 0.0
    for a, n in tot.items():
        h = binary_entropy(pos.get(a, 0) / n)
        if h > best:
            best = h
    return best


@dataclass(frozen=True)
class SplitCandidate:
    attr_index: int
    detail: str
    bounds1: tuple
    bounds2: tuple
    gain: float


def _next_up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _scalar_children(bound, cut):
    lo, hi = bound
    return (lo, cut), (_next_up(cut), hi)


def _cyclic_children(attr: Attribute, bound, offset):
    lo, hi = bound
    cut = (lo + offset) % attr.period
    nxt = _next_up(cut)
    if nxt >= attr.period:
        nxt = 0.0
    return (lo, cut), (nxt, hi)


def _cyclic_width(attr: Attribute, bound) -> float:
    lo, hi = bound
    return hi - lo if hi >= lo else (hi - lo) % attr.period


def candidate_splits(
    schema: Schema,
    state: "State",
    split_points: int,
) -> list[SplitCandidate]:
    """All single-attribute bisections of a state with their information gain.

    Continuous attributes (numeric, cyclic, each vector dimension) get
    ``split_points`` evenly spaced interior cuts; a categorical attribute
    with at least two labels gets one one-vs-rest pair per label. Gain is
    the parent entropy minus the plain (unweighted) sum of the two child
    entropies over the cache entries each child contains.
    """
    entries = list(state.cache)
    parent_h = state_entropy(entries)
    out: list[SplitCandidate] = []

    def add(i: int, detail: str, b1, b2) -> None:
        bounds1 = state.bounds[:i] + (b1,) + state.bounds[i + 1 :]
        bounds2 = state.bounds[:i] + (b2,) + state.bounds[i + 1 :]
        attr = schema[i]
        left = [e for e in entries if elem_contains(attr, b1, e.context.values[i])]
        right = [e for e in entries if elem_contains(attr, b2, e.context.values[i])]
        gain = parent_h - (state_entropy(left) + state_entropy(right))
        out.append(SplitCandidate(i, detail, bounds1, bounds2, gain))

    for i, attr in enumerate(schema):
        bound = state.bounds[i]
        if attr.kind is Kind.NUMERIC:
            lo, hi = bound
            seen = lo
            for j in range(1, split_points + 1):
                cut = lo + (hi - lo) * j / (split_points + 1)
                if not (lo < cut < hi) or cut == seen:
                    continue
                seen = cut
                add(i, f"{attr.name} <= {cut:g}", *_scalar_children(bound, cut))
        elif attr.kind is Kind.CYCLIC:
            width = _cyclic_width(attr, bound)
            if width <= 0:
                continue
            seen = None
            for j in range(1, split_points + 1):
                off = width * j / (split_points + 1)
                if off <= 0 or off >= width:
                    continue
                b1, b2 = _cyclic_children(attr, bound, off)
                if b1[1] == seen:
                    continue
                seen = b1[1]
                add(i, f"{attr.name} within {off:g} of {bound[0]:g}", b1, b2)
        elif attr.kind is Kind.VECTOR:
            for d in range(attr.dims):
                lo, hi = bound[d]
                seen = lo
                for j in range(1, split_points + 1):
                    cut = lo + (hi - lo) * j / (split_points + 1)
                    if not (lo < cut < hi) or cut == seen:
                        continue
                    seen = cut
                    c1, c2 = _scalar_children((lo, hi), cut)
                    add(
                        i,
                        f"{attr.name}[{d}] <= {cut:g}",
                        bound[:d] + (c1,) + bound[d + 1 :],
                        bound[:d] + (c2,) + bound[d + 1 :],
                    )
        else:
            if len(bound) < 2:
                continue
            for label in sorted(bound):
                add(
                    i,
                    f"{attr.name} == {label}",
                    frozenset((label,)),
                    bound - {label},
                )
    return out


# ── states ───────────────────────────────────────────────────────────────


@dataclass
class State:
    """One region of context space with per-action utilities.

    ``fresh_init`` stays set from creation until the first explicit feedback
    lands: if that first explicit feedback is negative the kNN-initialized
    utilities are abandoned (reset to 0.5) before the update applies.
    """

    bounds: tuple
    mid: Snapshot
    radius: float
    fresh_init: bool
    created: datetime
    utilities: dict[str, float]
    cache: deque
    recent_explicit: dict[str, deque] = field(default_factory=dict)


def _initial_bound(attr: Attribute, value, radius):
    if attr.kind is Kind.NUMERIC:
        return (max(attr.lower, value - radius), min(attr.upper, value + radius))
    if attr.kind is Kind.CYCLIC:
        if 2.0 * radius >= attr.period:
            return (0.0, attr.period)
        return ((value - radius) % attr.period, (value + radius) % attr.period)
    if attr.kind is Kind.VECTOR:
        return tuple(
            (max(lo, c - r), min(hi, c + r))
            for c, r, (lo, hi) in zip(value, radius, attr.ranges)
        )
    return frozenset((value,))


# ── the device-local model ───────────────────────────────────────────────


class DeviceLocalModel:
    """States, utilities, and feedback caches for a single device."""

    def __init__(
        self,
        device: str,
        actions: Iterable[str],
        schema: Schema,
        *,
        classes: Iterable[str] = (),
        weights: Sequence[float] | None = None,
        hp: Hyperparameters | None = None,
    ) -> None:
        self.device = device
        self.actions = tuple(sorted(set(actions)))
        if not self.actions:
            raise ModelConfigError(f"{device}: empty action set")
        self.schema = schema
        self.classes = frozenset(classes)
        self.hp = hp or Hyperparameters()
        self.weights = (
            validate_weights(schema, weights)
            if weights is not None
            else uniform_weights(len(schema))
        )
        self.states: list[State] = []
        self._seq = 0
        self._contains_fns = [_make_contains(a) for a in schema.attributes]
        self._index = _MidIndex(schema, self.weights)

    # -- state lookup ------------------------------------------------------

    def containing(self, snapshot: Snapshot) -> list[State]:
        vals = snapshot.values
        fns = self._contains_fns
        out = []
        for st in self.states:
            bounds = st.bounds
            for i, fn in enumerate(fns):
                if not fn(bounds[i], vals[i]):
                    break
            else:
                out.append(st)
        return out

    def state_distances(self, snapshot: Snapshot) -> np.ndarray:
        """Distance from every state's mid to the snapshot, in state order."""
        return self._index.distances(self.states, snapshot)

    # -- state creation ----------------------------------------------------

    def create_state(self, snapshot: Snapshot) -> State:
        bounds = tuple(
            _initial_bound(attr, v, self.hp.attribute_radius(attr))
            for attr, v in zip(self.schema, snapshot.values)
        )
        st = State(
            bounds=bounds,
            mid=snapshot,
            radius=bounds_radius(self.schema, bounds),
            fresh_init=True,
            created=snapshot.t,
            utilities={a: 0.5 for a in self.actions},
            cache=deque(maxlen=self.hp.cache_capacity),
        )
        if self.states:
            self._knn_init(st)
        self.states.append(st)
        self._index.append(st)
        return st

    def _knn_init(self, new_state: State) -> None:
        """Seed a new state's utilities from its k nearest existing states.

        Each neighbour contributes its deviation from 0.5, damped by
        distance relative to the new state's radius; the divisor stays k
        even when fewer states exist, so the estimate contracts toward 0.5.
        """
        k = self.hp.knn_k
        dists = self.state_distances(new_state.mid)
        order = np.argsort(dists, kind="stable")[:k]
        r = new_state.radius
        for action in self.actions:
            acc = 0.0
            for i in order:
                d = float(dists[i])
                if r > 0.0:
                    denom = d / r + 1.0
                elif d == 0.0:
                    denom = 1.0
                else:
                    continue
                acc += (self.states[i].utilities[action] - 0.5) / denom
            u = 0.5 + acc / k
            new_state.utilities[action] = _banded(u)

    # -- the request path --------------------------------------------------

    def on_receive_request(
        self,
        request: Request,
        snapshot: Snapshot,
        excluded_actions: frozenset = frozenset(),
    ) -> Proposal | None:
        """Best (action, utility) for the snapshot, or a zero proposal when
        the request is incompatible with this device.

        Returns None when every admissible action has been excluded (the
        device has nothing left to offer in the current episode).
        """
        if request.device_class is not None and request.device_class not in self.classes:
            return Proposal(self.device, request.action, 0.0)
        if request.action is not None and request.action not in self.actions:
            return Proposal(self.device, request.action, 0.0)
        containing = self.containing(snapshot)
        if not containing:
            containing = [self.create_state(snapshot)]
        pool = (
            self.actions
            if request.action is None
            else (request.action,)
        )
        pool = [a for a in pool if a not in excluded_actions]
        if not pool:
            return None
        best_u = -1.0
        best_r = math.inf
        best_a = ""
        for st in containing:
            for a in pool:
                u = st.utilities[a]
                if u > best_u or (u == best_u and (st.radius, a) < (best_r, best_a)):
                    best_u, best_r, best_a = u, st.radius, a
        return Proposal(self.device, best_a, best_u, state_radius=best_r)

    # -- the feedback path -------------------------------------------------

    def on_feedback(
        self,
        proposal: Proposal,
        snapshot: Snapshot,
        positive: bool,
        *,
        explicit: bool = True,
    ) -> None:
        action = proposal.action
        if action is None or action not in self.actions:
            return  # zero proposals carry no learnable signal
        delta = self.hp.reward * (1.0 if explicit else self.hp.implicit_weight)
        self._seq += 1
        entry = FeedbackEntry(snapshot, proposal, positive, self._seq)
        for st in self.containing(snapshot):
            if explicit and st.fresh_init:
                if not positive:
                    for a in st.utilities:
                        st.utilities[a] = 0.5
                st.fresh_init = False
            if delta > 0.0:  # a zero-weight update must leave the value bit-identical
                st.utilities[action] = _banded(
                    sigmoid_reward(st.utilities[action], delta, positive)
                )
            st.cache.append(entry)
            if explicit:
                self._check_disparity(st, action, positive)
            if state_entropy(st.cache) > self.hp.entropy_threshold:
                self._try_split(st, snapshot.t)

    def _check_disparity(self, st: State, action: str, positive: bool) -> None:
        """Reset a well-rated action that the user keeps rejecting.

        When at least m-1 of the last m explicit outcomes for this action
        are negative while its utility still exceeds 0.6, the utility goes
        back to 0.5 and the action's cached history is dropped so the next
        split sees a clean slate.
        """
        m = self.hp.recovery_window
        win = st.recent_explicit.get(action)
        if win is None:
            win = st.recent_explicit[action] = deque(maxlen=m)
        win.append(positive)
        if len(win) < m:
            return
        negatives = sum(1 for p in win if not p)
        if negatives >= m - 1 and st.utilities[action] > 0.6:
            st.utilities[action] = 0.5
            kept = [e for e in st.cache if e.proposal.action != action]
            st.cache = deque(kept, maxlen=self.hp.cache_capacity)
            win.clear()

    # -- splitting ---------------------------------------------------------

    def _try_split(self, st: State, t: datetime) -> None:
        cands = candidate_splits(self.schema, st, self.hp.split_points)
        if not cands:
            return
        best = max(cands, key=lambda c: c.gain)
        if best.gain > self.hp.required_gain:
            self.apply_split(st, best, t)

    def apply_split(
        self, st: State, cand: SplitCandidate, t: datetime | None = None
    ) -> tuple[State, State]:
        """Replace a state by the candidate's two children.

        Cache entries move to whichever child contains them; each child's
        utilities are rebuilt by replaying its slice, in sequence order,
        from 0.5.
        """
        when = t or st.mid.t
        children = []
        for bounds in (cand.bounds1, cand.bounds2):
            mid = Snapshot(
                tuple(
                    bound_midpoint(attr, b)
                    for attr, b in zip(self.schema, bounds)
                ),
                when,
            )
            children.append(
                State(
                    bounds=bounds,
                    mid=mid,
                    radius=bounds_radius(self.schema, bounds),
                    fresh_init=False,
                    created=when,
                    utilities={a: 0.5 for a in self.actions},
                    cache=deque(maxlen=self.hp.cache_capacity),
                )
            )
        c1, c2 = children
        for e in st.cache:
            target = c1 if bounds_contain(self.schema, c1.bounds, e.context) else c2
            target.cache.append(e)
            target.utilities[e.proposal.action] = _banded(
                sigmoid_reward(
                    target.utilities[e.proposal.action], self.hp.reward, e.positive
                )
            )
        i = self.states.index(st)
        self.states[i : i + 1] = [c1, c2]
        self._index.rebuild(self.states)
        return c1, c2

    # -- persistence -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "device": self.device,
            "actions": list(self.actions),
            "classes": sorted(self.classes),
            "schema": self.schema.to_json(),
            "weights": list(self.weights),
            "hyperparameters": self.hp.to_json(),
            "seq": self._seq,
            "states": [self._state_json(st) for st in self.states],
        }

    def _state_json(self, st: State) -> dict:
        return {
            "bounds": [
                _bound_json(attr, b) for attr, b in zip(self.schema, st.bounds)
            ],
            "mid": snapshot_to_json(self.schema, st.mid),
            "radius": st.radius,
            "fresh_init": st.fresh_init,
            "created": st.created.isoformat(timespec="microseconds"),
            "utilities": {a: st.utilities[a] for a in self.actions},
            "cache": [
                {
                    "seq": e.seq,
                    "positive": e.positive,
                    "context": snapshot_to_json(self.schema, e.context),
                    "proposal": {
                        "device": e.proposal.device,
                        "action": e.proposal.action,
                        "utility": e.proposal.utility,
                    },
                }
                for e in st.cache
            ],
            "recent_explicit": {
                a: [bool(x) for x in win]
                for a, win in sorted(st.recent_explicit.items())
                if win
            },
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "DeviceLocalModel":
        schema = Schema.from_json(d["schema"])
        model = cls(
            d["device"],
            d["actions"],
            schema,
            classes=d.get("classes", ()),
            weights=d.get("weights"),
            hp=Hyperparameters.from_json(d["hyperparameters"]),
        )
        model._seq = int(d.get("seq", 0))
        for sd in d["states"]:
            bounds = tuple(
                _bound_from_json(attr, b)
                for attr, b in zip(schema, sd["bounds"])
            )
            st = State(
                bounds=bounds,
                mid=snapshot_from_json(schema, sd["mid"]),
                radius=bounds_radius(schema, bounds),
                fresh_init=bool(sd["fresh_init"]),
                created=datetime.fromisoformat(sd["created"]),
                utilities={a: float(u) for a, u in sd["utilities"].items()},
                cache=deque(maxlen=model.hp.cache_capacity),
            )
            if set(st.utilities) != set(model.actions):
                raise ModelConfigError(
                    f"{model.device}: state utilities do not match the action set"
                )
            for ed in sd["cache"]:
                p = ed["proposal"]
                st.cache.append(
                    FeedbackEntry(
                        snapshot_from_json(schema, ed["context"]),
                        Proposal(p["device"], p["action"], float(p["utility"])),
                        bool(ed["positive"]),
                        int(ed["seq"]),
                    )
                )
            for a, outcomes in sd.get("recent_explicit", {}).items():
                win = deque(maxlen=model.hp.recovery_window)
                win.extend(bool(x) for x in outcomes)
                st.recent_explicit[a] = win
            model.states.append(st)
            model._index.append(st)
        return model


# ── serialization helpers ────────────────────────────────────────────────


def _bound_json(attr: Attribute, b):
    if attr.kind in (Kind.NUMERIC, Kind.CYCLIC):
        return [b[0], b[1]]
    if attr.kind is Kind.VECTOR:
        return [[lo, hi] for lo, hi in b]
    return sorted(b)


def _bound_from_json(attr: Attribute, b):
    if attr.kind in (Kind.NUMERIC, Kind.CYCLIC):
        return (float(b[0]), float(b[1]))
    if attr.kind is Kind.VECTOR:
        return tuple((float(lo), float(hi)) for lo, hi in b)
    return frozenset(b)


# ── fast paths ───────────────────────────────────────────────────────────
#
# Containment and mid-distance both scan every state on every request, and
# the state count grows with the number of distinct context regions seen.
# Containment stays a plain loop (the first failing attribute short-
# circuits); the mid-distance scan is batched through a numpy matrix of
# encoded mids, with rows whose categorical mid is a label *set* (possible
# after a split) falling back to the scalar formula.


def _make_contains(attr: Attribute):
    kind = attr.kind
    if kind is Kind.NUMERIC:
        return lambda b, v: b[0] <= v <= b[1]
    if kind is Kind.CYCLIC:
        period = attr.period

        def cyc(b, v):
            lo, hi = b
            v = v % period
            if lo <= hi:
                return lo <= v <= hi
            return v >= lo or v <= hi

        return cyc
    if kind is Kind.VECTOR:
        def vec(b, v):
            for c, (lo, hi) in zip(v, b):
                if not lo <= c <= hi:
                    return False
            return True

        return vec

    def cat(b, v):
        if isinstance(v, frozenset):
            return v <= b
        return v in b

    return cat


class _MidIndex:
    def __init__(self, schema: Schema, weights: Sequence[float]) -> None:
        self.schema = schema
        self.weights = weights
        cols = 0
        layout = []  # (attr, weight, first column)
        for attr, w in zip(schema, weights):
            layout.append((attr, w, cols))
            cols += attr.dims if attr.kind is Kind.VECTOR else 1
        self._layout = layout
        self._ncols = cols
        self._codes: dict[str, float] = {}
        self._buf = np.empty((16, cols), dtype=np.float64)
        self._rows = 0
        self._regular: list[bool] = []

    def _code(self, label: str) -> float:
        code = self._codes.get(label)
        if code is None:
            code = float(len(self._codes))
            self._codes[label] = code
        return code

    def _encode(self, mid: Snapshot, row: np.ndarray) -> bool:
        regular = True
        for (attr, _, c), v in zip(self._layout, mid.values):
            if attr.kind is Kind.VECTOR:
                row[c : c + attr.dims] = v
            elif attr.kind is Kind.CATEGORICAL:
                if isinstance(v, frozenset):
                    row[c] = -1.0
                    regular = False
                else:
                    row[c] = self._code(v)
            else:
                row[c] = v
        return regular

    def append(self, st: State) -> None:
        if self._rows == self._buf.shape[0]:
            grown = np.empty((self._buf.shape[0] * 2, self._ncols))
            grown[: self._rows] = self._buf[: self._rows]
            self._buf = grown
        self._regular.append(self._encode(st.mid, self._buf[self._rows]))
        self._rows += 1

    def rebuild(self, states: list[State]) -> None:
        self._rows = 0
        self._regular = []
        for st in states:
            self.append(st)

    def distances(self, states: list[State], query: Snapshot) -> np.ndarray:
        n = self._rows
        out = np.zeros(n)
        if n == 0:
            return out
        M = self._buf[:n]
        for (attr, w, c), q in zip(self._layout, query.values):
            if attr.kind is Kind.NUMERIC:
                out += (w / (attr.upper - attr.lower)) * np.abs(M[:, c] - q)
            elif attr.kind is Kind.CYCLIC:
                d = np.abs(M[:, c] - (q % attr.period))
                out += (2.0 * w / attr.period) * np.minimum(d, attr.period - d)
            elif attr.kind is Kind.VECTOR:
                inv = np.array([1.0 / (hi - lo) for lo, hi in attr.ranges])
                diff = np.minimum(np.abs(M[:, c : c + attr.dims] - np.asarray(q)) * inv, 1.0)
                out += (w / math.sqrt(attr.dims)) * np.sqrt((diff * diff).sum(axis=1))
            else:
                qcode = self._code(q) if isinstance(q, str) else -2.0
                out += w * (M[:, c] != qcode)
        odd_query = any(isinstance(v, frozenset) for v in query.values)
        for i, ok in enumerate(self._regular):
            if odd_query or not ok:
                out[i] = snapshot_distance(
                    self.schema, states[i].mid, query, self.weights
                )
        return out

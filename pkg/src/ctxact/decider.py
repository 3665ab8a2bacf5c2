"""Cross-device arbitration: registry, decision episodes, feedback routing.

A registry declares the device fleet: a class hierarchy (child classes count
as their ancestors, so a request for "light" admits a "dimmable" device) and
one backing model per device, either a local learned model or a named
external controller. The decider queries every backing for a proposal,
selects the winner by utility, and walks the episode protocol: a rejection
sends explicit negative feedback to the proposing model and re-resolves with
the rejected (device, action) pairs excluded; an acceptance sends explicit
positive feedback to the winner and implicit negatives to the other
backings' final-round proposals.

Zero-utility proposals mark incompatibility (wrong class or unsupported
action). They can still win when nothing positive exists, but they never
receive feedback: there is nothing for the model to learn about a request
it cannot serve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .context import Schema, Snapshot
from .model import DeviceLocalModel, Hyperparameters, Proposal, Request


class RegistryError(ValueError):
    """Registry declaration is inconsistent."""


class EmptyRegistryError(RegistryError):
    """Resolution attempted against a registry with no devices."""


class EpisodeStateError(RuntimeError):
    """Episode operation applied outside the open state."""


# ── registry ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class DeviceEntry:
    """One registered device.

    ``classes`` is the expanded membership set (declared classes plus all
    their ancestors); ``declared`` keeps the original declaration for
    round-tripping the registry file.
    """

    id: str
    declared: tuple[str, ...]
    classes: frozenset[str]
    actions: tuple[str, ...]
    backing: str = "local"


class Registry:
    """Device fleet declaration: class hierarchy plus device entries."""

    def __init__(
        self,
        class_parents: Mapping[str, str | None],
        devices: Iterable[Mapping],
    ) -> None:
        self.class_parents = dict(class_parents)
        for cls, parent in self.class_parents.items():
            if parent is not None and parent not in self.class_parents:
                raise RegistryError(f"class {cls!r} names unknown parent {parent!r}")
        self._check_acyclic()
        entries = []
        seen = set()
        for d in devices:
            did = d["id"]
            if did in seen:
                raise RegistryError(f"duplicate device id {did!r}")
            seen.add(did)
            declared = tuple(d.get("classes", ()))
            for c in declared:
                if c not in self.class_parents:
                    raise RegistryError(f"device {did!r} names unknown class {c!r}")
            actions = tuple(dict.fromkeys(d.get("actions", ())))
            if not actions:
                raise RegistryError(f"device {did!r} declares no actions")
            entries.append(
                DeviceEntry(
                    id=did,
                    declared=declared,
                    classes=self.expand(declared),
                    actions=actions,
                    backing=d.get("backing", "local"),
                )
            )
        self.devices: tuple[DeviceEntry, ...] = tuple(entries)
        self._by_id = {e.id: e for e in self.devices}

    def _check_acyclic(self) -> None:
        for start in self.class_parents:
            slow = start
            seen = set()
            while slow is not None:
                if slow in seen:
                    raise RegistryError(f"class hierarchy cycle through {slow!r}")
                seen.add(slow)
                slow = self.class_parents[slow]

    def ancestors(self, cls: str) -> frozenset[str]:
        out = set()
        cur = self.class_parents.get(cls)
        while cur is not None:
            out.add(cur)
            cur = self.class_parents[cur]
        return frozenset(out)

    def expand(self, classes: Iterable[str]) -> frozenset[str]:
        out = set()
        for c in classes:
            out.add(c)
            out |= self.ancestors(c)
        return frozenset(out)

    def device(self, device_id: str) -> DeviceEntry:
        try:
            return self._by_id[device_id]
        except KeyError:
            raise RegistryError(f"unknown device {device_id!r}") from None

    def __contains__(self, device_id: str) -> bool:
        return device_id in self._by_id

    def to_json(self) -> dict:
        return {
            "classes": {
                c: ({"parent": p} if p is not None else {})
                for c, p in sorted(self.class_parents.items())
            },
            "devices": [
                {
                    "id": e.id,
                    "classes": list(e.declared),
                    "actions": list(e.actions),
                    "backing": e.backing,
                }
                for e in self.devices
            ],
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "Registry":
        parents = {
            name: (spec or {}).get("parent")
            for name, spec in d.get("classes", {}).items()
        }
        return cls(parents, d.get("devices", ()))

    @classmethod
    def load(cls, path: str | Path) -> "Registry":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=False)
            f.write("\n")


# ── external controllers ─────────────────────────────────────────────────


class ExternalController(Protocol):
    """Manufacturer-side proposer answering for a group of devices.

    ``propose`` must return a proposal whose device is registered to this
    controller and whose (device, action) pair is not in ``excluded``, or
    None when it has nothing left to offer.
    """

    def propose(
        self,
        request: Request,
        snapshot: Snapshot,
        excluded: frozenset[tuple[str, str | None]],
    ) -> Proposal | None: ...

    def feedback(
        self,
        proposal: Proposal,
        snapshot: Snapshot,
        positive: bool,
        *,
        explicit: bool = True,
    ) -> None: ...


# ── decision episodes ────────────────────────────────────────────────────


class EpisodeStatus(str, Enum):
    OPEN = "open"
    ACCEPTED = "accepted"
    EXHAUSTED = "exhausted"


@dataclass
class DecisionEpisode:
    """Lifecycle of one request: proposals issued, rejections, outcome."""

    request: Request
    snapshot: Snapshot
    issued: list[Proposal] = field(default_factory=list)
    rejected: set[tuple[str, str | None]] = field(default_factory=set)
    status: EpisodeStatus = EpisodeStatus.OPEN
    round_best: dict[str, Proposal] = field(default_factory=dict)

    @property
    def proposal(self) -> Proposal | None:
        """The currently outstanding proposal (None once exhausted)."""
        if self.status is EpisodeStatus.EXHAUSTED or not self.issued:
            return None
        return self.issued[-1]

    @property
    def negatives(self) -> int:
        return len(self.rejected)


def _sort_key(p: Proposal) -> tuple:
    radius = p.state_radius if p.state_radius is not None else math.inf
    return (-p.utility, radius, p.device, p.action or "")


class Decider:
    """One arbitration instance over a registry's backing models."""

    def __init__(
        self,
        registry: Registry,
        schema: Schema,
        *,
        hp: Hyperparameters | None = None,
        weights: Sequence[float] | None = None,
        controllers: Mapping[str, ExternalController] | None = None,
    ) -> None:
        self.registry = registry
        self.schema = schema
        self.hp = hp or Hyperparameters()
        self.weights = weights
        self.controllers = dict(controllers or {})
        self.models: dict[str, DeviceLocalModel] = {}
        self._controller_devices: dict[str, set[str]] = {}
        for e in registry.devices:
            if e.backing == "local":
                self.models[e.id] = DeviceLocalModel(
                    e.id,
                    e.actions,
                    schema,
                    classes=e.classes,
                    weights=weights,
                    hp=self.hp,
                )
            else:
                if e.backing not in self.controllers:
                    raise RegistryError(
                        f"device {e.id!r} names missing controller {e.backing!r}"
                    )
                self._controller_devices.setdefault(e.backing, set()).add(e.id)

    # -- resolution ----------------------------------------------------------

    def resolve(self, request: Request, snapshot: Snapshot) -> DecisionEpisode:
        """Open an episode and issue the winning proposal for the request."""
        if not self.registry.devices:
            raise EmptyRegistryError("no devices registered")
        ep = DecisionEpisode(request=request, snapshot=snapshot)
        if self._run_round(ep) is None:
            ep.status = EpisodeStatus.EXHAUSTED
        return ep

    def _run_round(self, ep: DecisionEpisode) -> Proposal | None:
        """Collect one proposal per backing and issue the best one."""
        ep.round_best.clear()
        proposals: list[Proposal] = []
        for e in self.registry.devices:
            if e.backing != "local":
                continue
            excluded = frozenset(
                a for d, a in ep.rejected if d == e.id and a is not None
            )
            p = self.models[e.id].on_receive_request(
                ep.request, ep.snapshot, excluded_actions=excluded
            )
            if p is not None and (p.device, p.action) not in ep.rejected:
                proposals.append(p)
                ep.round_best[e.id] = p
        for name, ctrl in sorted(self.controllers.items()):
            if name not in self._controller_devices:
                continue
            p = ctrl.propose(ep.request, ep.snapshot, frozenset(ep.rejected))
            if p is None:
                continue
            if p.device not in self._controller_devices[name]:
                raise RegistryError(
                    f"controller {name!r} proposed foreign device {p.device!r}"
                )
            if (p.device, p.action) in ep.rejected:
                continue
            proposals.append(p)
            ep.round_best[name] = p
        if not proposals:
            return None
        positives = [p for p in proposals if p.utility > 0.0]
        if not positives:
            # Zero proposals are a last resort for requests nothing can
            # serve; once real candidates existed and were all rejected,
            # the episode is exhausted instead.
            if any(p.utility > 0.0 for p in ep.issued):
                return None
            pool = proposals
        else:
            pool = positives
        best = min(pool, key=_sort_key)
        ep.issued.append(best)
        return best

    # -- episode transitions -------------------------------------------------

    def reject(self, ep: DecisionEpisode) -> Proposal | None:
        """Record a rejection and issue the next proposal, if any remains."""
        if ep.status is not EpisodeStatus.OPEN or not ep.issued:
            raise EpisodeStateError(f"cannot reject a {ep.status.value} episode")
        last = ep.issued[-1]
        self._feed(last, ep.snapshot, positive=False, explicit=True)
        ep.rejected.add((last.device, last.action))
        nxt = self._run_round(ep)
        if nxt is None:
            ep.status = EpisodeStatus.EXHAUSTED
        return nxt

    def accept(self, ep: DecisionEpisode) -> None:
        """Close the episode: reward the winner, discount the losers."""
        if ep.status is not EpisodeStatus.OPEN or not ep.issued:
            raise EpisodeStateError(f"cannot accept a {ep.status.value} episode")
        winner = ep.issued[-1]
        self._feed(winner, ep.snapshot, positive=True, explicit=True)
        for prop in ep.round_best.values():
            if prop is not winner:
                self._feed(prop, ep.snapshot, positive=False, explicit=False)
        ep.status = EpisodeStatus.ACCEPTED

    def _feed(
        self, proposal: Proposal, snapshot: Snapshot, positive: bool, explicit: bool
    ) -> None:
        if proposal.utility <= 0.0:
            return  # incompatibility carries no learnable signal
        entry = self.registry.device(proposal.device)
        if entry.backing == "local":
            self.models[proposal.device].on_feedback(
                proposal, snapshot, positive, explicit=explicit
            )
        else:
            self.controllers[entry.backing].feedback(
                proposal, snapshot, positive, explicit=explicit
            )

    # -- persistence -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "registry": self.registry.to_json(),
            "schema": self.schema.to_json(),
            "hyperparameters": self.hp.to_json(),
            "weights": list(self.weights) if self.weights is not None else None,
            "models": {d: self.models[d].to_json() for d in sorted(self.models)},
        }

    @classmethod
    def from_json(
        cls,
        d: Mapping,
        *,
        controllers: Mapping[str, ExternalController] | None = None,
    ) -> "Decider":
        registry = Registry.from_json(d["registry"])
        schema = Schema.from_json(d["schema"])
        dec = cls(
            registry,
            schema,
            hp=Hyperparameters.from_json(d["hyperparameters"]),
            weights=d.get("weights"),
            controllers=controllers,
        )
        for device, blob in d.get("models", {}).items():
            if device not in dec.models:
                raise RegistryError(f"persisted model for unregistered {device!r}")
            dec.models[device] = DeviceLocalModel.from_json(blob)
        return dec

    @classmethod
    def load(
        cls,
        path: str | Path,
        *,
        controllers: Mapping[str, ExternalController] | None = None,
    ) -> "Decider":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f), controllers=controllers)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f)
            f.write("\n")

"""Deployment plan: fragments, their node placement, and per-node replicas.

A plan is the durable artifact of the pipeline. Triple references are
positions into the canonical serialized triple file written alongside the
plan, so a plan plus that file fully describes the cluster layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .allocate import AllocationPlan
from .partition import PartitionResult
from .store import TripleStore


class PlanError(ValueError):
    """A plan that violates its structural guarantees."""


@dataclass
class PartitionPlan:
    k: int
    m: int
    fragment_masters: list[str]
    fragment_positions: list[list[int]]  # sorted positions per fragment
    node_fragments: list[list[int]]  # fragment ids per node
    replicas: list[list[int]]  # sorted replica positions per node
    _owner: dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._owner:
            for node_id, fragment_ids in enumerate(self.node_fragments):
                for fid in fragment_ids:
                    for pos in self.fragment_positions[fid]:
                        self._owner[pos] = node_id

    def owner_of(self, position: int) -> int:
        return self._owner[position]

    def owned_positions(self, node_id: int) -> set[int]:
        owned: set[int] = set()
        for fid in self.node_fragments[node_id]:
            owned.update(self.fragment_positions[fid])
        return owned

    def visible_positions(self, node_id: int) -> set[int]:
        """Positions the node can answer from: its own fragments plus replicas."""
        visible = self.owned_positions(node_id)
        visible.update(self.replicas[node_id])
        return visible

    def node_loads(self) -> list[int]:
        return [
            sum(len(self.fragment_positions[fid]) for fid in fids)
            for fids in self.node_fragments
        ]

    def with_replicas(self, replicas: list[list[int]]) -> "PartitionPlan":
        if len(replicas) != self.m:
            raise PlanError(f"expected {self.m} replica lists, got {len(replicas)}")
        return replace(self, replicas=[sorted(r) for r in replicas], _owner=dict(self._owner))

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "fragments": [
                {"id": i, "master": self.fragment_masters[i], "tripleRefs": list(self.fragment_positions[i])}
                for i in range(self.k)
            ],
            "nodes": [
                {"id": i, "fragmentIds": list(self.node_fragments[i])} for i in range(self.m)
            ],
            "replicas": [list(r) for r in self.replicas],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json_dict(cls, data: dict) -> "PartitionPlan":
        try:
            k = data["k"]
            m = data["m"]
            fragments = sorted(data["fragments"], key=lambda f: f["id"])
            nodes = sorted(data["nodes"], key=lambda n: n["id"])
            replicas = data["replicas"]
        except (KeyError, TypeError) as exc:
            raise PlanError(f"plan JSON missing required field: {exc}") from exc
        if [f["id"] for f in fragments] != list(range(k)):
            raise PlanError("fragment ids must be exactly 0..k-1")
        if [n["id"] for n in nodes] != list(range(m)):
            raise PlanError("node ids must be exactly 0..m-1")
        if len(replicas) != m:
            raise PlanError(f"expected {m} replica lists, got {len(replicas)}")
        return cls(
            k=k,
            m=m,
            fragment_masters=[f["master"] for f in fragments],
            fragment_positions=[sorted(f["tripleRefs"]) for f in fragments],
            node_fragments=[list(n["fragmentIds"]) for n in nodes],
            replicas=[sorted(r) for r in replicas],
        )

    @classmethod
    def from_json(cls, text: str) -> "PartitionPlan":
        return cls.from_json_dict(json.loads(text))

    def validate(self, store: TripleStore) -> None:
        """Check structural guarantees against the store; raise PlanError."""
        seen: set[int] = set()
        total = 0
        for fid, positions in enumerate(self.fragment_positions):
            for pos in positions:
                if not 0 <= pos < store.n:
                    raise PlanError(f"fragment {fid} references position {pos} outside store")
                if pos in seen:
                    raise PlanError(f"position {pos} appears in more than one fragment")
                seen.add(pos)
            total += len(positions)
        if total != store.n:
            raise PlanError(f"fragments cover {total} of {store.n} triples")

        assigned: set[int] = set()
        for node_id, fids in enumerate(self.node_fragments):
            for fid in fids:
                if not 0 <= fid < self.k:
                    raise PlanError(f"node {node_id} references unknown fragment {fid}")
                if fid in assigned:
                    raise PlanError(f"fragment {fid} assigned to more than one node")
                assigned.add(fid)
        if len(assigned) != self.k:
            raise PlanError(f"{self.k - len(assigned)} fragments are not assigned to any node")

        for node_id, positions in enumerate(self.replicas):
            owned = self.owned_positions(node_id)
            for pos in positions:
                if not 0 <= pos < store.n:
                    raise PlanError(f"replica on node {node_id} references position {pos} outside store")
                if pos in owned:
                    raise PlanError(
                        f"node {node_id} replicates position {pos} it already owns"
                    )


def build_plan(partition: PartitionResult, allocation: AllocationPlan) -> PartitionPlan:
    """Combine partitioning and allocation into a plan with empty replica sets."""
    return PartitionPlan(
        k=partition.k,
        m=allocation.m,
        fragment_masters=[f.master_subject for f in partition.fragments],
        fragment_positions=[sorted(f.positions) for f in partition.fragments],
        node_fragments=[list(n.fragment_ids) for n in allocation.nodes],
        replicas=[[] for _ in range(allocation.m)],
    )


def round_robin_triple_plan(store: TripleStore, m: int) -> PartitionPlan:
    """Baseline layout: triples dealt round-robin to m single-fragment nodes.

    Used as the comparison point for locality measurements; it ignores
    subject cohesion entirely.
    """
    if m < 1:
        raise ValueError(f"node count must be at least 1, got {m}")
    positions = [[p for p in range(store.n) if p % m == node] for node in range(m)]
    masters = [
        (store.triples[ps[0]].subject if ps else "") for ps in positions
    ]
    return PartitionPlan(
        k=m,
        m=m,
        fragment_masters=masters,
        fragment_positions=positions,
        node_fragments=[[node] for node in range(m)],
        replicas=[[] for _ in range(m)],
    )

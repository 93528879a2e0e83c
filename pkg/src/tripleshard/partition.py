"""Fragment construction: degree-ranked seeding plus closeness-driven growth.

Partitioning happens in two steps. First the k highest out-degree subjects
are selected as fragment masters. Then every fragment starts from its
master's subject group and grows by repeatedly pulling in whole subject
groups that the fragment already points at: a pending group scores, against
each fragment, the number of times its subject occurs as a resource object
inside that fragment, and joins the best-scoring fragment. Groups that never
score anywhere fall back to the currently smallest fragment.

Moving whole subject groups keeps the subject-cohesion guarantee: all triples
sharing a subject always land in the same fragment.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .store import TripleStore


def subject_frequencies(store: TripleStore) -> dict[str, int]:
    """Out-degree (triple count) per subject, in first-appearance order."""
    return {s: len(ps) for s, ps in store.subject_index.items()}


def top_subjects(store: TripleStore, k: int) -> list[str]:
    """The k most frequent subjects, ties broken by ascending subject name."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    freq = subject_frequencies(store)
    if len(freq) < k:
        raise ValueError(
            f"store has {len(freq)} distinct subjects, cannot select k={k} masters"
        )
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return [s for s, _ in ranked[:k]]


@dataclass
class Fragment:
    id: int
    master_subject: str
    positions: list[int] = field(default_factory=list)
    # multiset of resource objects over member triples; literals never enter
    object_frequency: Counter = field(default_factory=Counter)

    @property
    def size(self) -> int:
        return len(self.positions)


@dataclass
class PartitionResult:
    fragments: list[Fragment]
    k: int
    orphan_count: int  # triples placed by the smallest-fragment fallback


def _absorb(fragment: Fragment, store: TripleStore, positions: list[int]) -> None:
    fragment.positions.extend(positions)
    for pos in positions:
        t = store.triples[pos]
        if not t.object_is_literal:
            fragment.object_frequency[t.object] += 1


def grow_fragments(
    store: TripleStore, masters: list[str], single_pass: bool = False
) -> PartitionResult:
    """Grow one fragment per master until every triple is placed.

    Growth runs in rounds over the pending subject groups (first-appearance
    order). A group joins the fragment holding the most references to its
    subject, ties to the lowest fragment id, and the fragment's object counts
    update immediately so later groups see the new members. Rounds repeat
    until a full pass assigns nothing; with ``single_pass`` only one pass
    runs. Remaining groups are orphans: each is assigned, in order, to the
    smallest fragment at that moment.
    """
    if not masters:
        raise ValueError("at least one master subject is required")
    if len(set(masters)) != len(masters):
        raise ValueError("master subjects must be distinct")
    for m in masters:
        if m not in store.subject_index:
            raise ValueError(f"master subject {m!r} has no triples in the store")

    fragments = [Fragment(i, m) for i, m in enumerate(masters)]
    for fragment in fragments:
        _absorb(fragment, store, list(store.subject_index[fragment.master_subject]))

    master_set = set(masters)
    pending: dict[str, list[int]] = {
        s: list(ps) for s, ps in store.subject_index.items() if s not in master_set
    }

    while pending:
        progressed = False
        for subject in list(pending):
            best_count = 0
            best_fragment = None
            for fragment in fragments:
                c = fragment.object_frequency.get(subject, 0)
                if c > best_count:
                    best_count = c
                    best_fragment = fragment
            if best_fragment is not None:
                _absorb(best_fragment, store, pending.pop(subject))
                progressed = True
        if single_pass or not progressed:
            break

    orphan_count = 0
    for subject in list(pending):
        target = min(fragments, key=lambda f: (f.size, f.id))
        group = pending.pop(subject)
        orphan_count += len(group)
        _absorb(target, store, group)

    return PartitionResult(fragments, len(masters), orphan_count)

import pytest

from tripleshard.allocate import allocate
from tripleshard.partition import grow_fragments, top_subjects
from tripleshard.plan import PartitionPlan, PlanError, build_plan, round_robin_triple_plan
from tripleshard.store import Triple, TripleStore


def _store(n=6):
    return TripleStore([Triple(f"s{i % 3}", "p", f"o{i}") for i in range(n)])


def _plan(store, k=2, m=2):
    partition = grow_fragments(store, top_subjects(store, k))
    return build_plan(partition, allocate([f.size for f in partition.fragments], m))


def test_json_round_trip():
    store = _store()
    plan = _plan(store)
    again = PartitionPlan.from_json(plan.to_json())
    assert again.to_json() == plan.to_json()
    again.validate(store)


def test_owner_lookup_covers_every_position():
    store = _store()
    plan = _plan(store)
    for pos in range(store.n):
        owner = plan.owner_of(pos)
        assert pos in plan.owned_positions(owner)


def test_validate_accepts_built_plans():
    store = _store(12)
    _plan(store, 3, 2).validate(store)


def test_validate_rejects_overlapping_fragments():
    store = _store()
    plan = _plan(store)
    broken = PartitionPlan(
        k=plan.k,
        m=plan.m,
        fragment_masters=plan.fragment_masters,
        fragment_positions=[plan.fragment_positions[0], plan.fragment_positions[0]],
        node_fragments=plan.node_fragments,
        replicas=plan.replicas,
    )
    with pytest.raises(PlanError):
        broken.validate(store)


def test_validate_rejects_incomplete_coverage():
    store = _store()
    plan = _plan(store)
    trimmed = [list(ps) for ps in plan.fragment_positions]
    trimmed[0] = trimmed[0][:-1]
    broken = PartitionPlan(
        k=plan.k, m=plan.m,
        fragment_masters=plan.fragment_masters,
        fragment_positions=trimmed,
        node_fragments=plan.node_fragments,
        replicas=plan.replicas,
    )
    with pytest.raises(PlanError):
        broken.validate(store)


def test_validate_rejects_unassigned_fragment():
    store = _store()
    plan = _plan(store)
    broken = PartitionPlan(
        k=plan.k, m=plan.m,
        fragment_masters=plan.fragment_masters,
        fragment_positions=plan.fragment_positions,
        node_fragments=[plan.node_fragments[0], []],
        replicas=plan.replicas,
    )
    with pytest.raises(PlanError):
        broken.validate(store)


def test_validate_rejects_replica_of_owned_triple():
    store = _store()
    plan = _plan(store)
    owned = sorted(plan.owned_positions(0))
    broken = plan.with_replicas([[owned[0]], []])
    with pytest.raises(PlanError):
        broken.validate(store)


def test_from_json_requires_contiguous_ids():
    store = _store()
    data = _plan(store).to_json_dict()
    data["fragments"][0]["id"] = 7
    with pytest.raises(PlanError):
        PartitionPlan.from_json_dict(data)


def test_round_robin_plan_deals_positions_in_rotation():
    store = _store(7)
    plan = round_robin_triple_plan(store, 3)
    plan.validate(store)
    for pos in range(store.n):
        assert plan.owner_of(pos) == pos % 3

"""Pattern queries, centralized and distributed evaluation, locality metrics.

Two deliberately independent evaluation routes exist. The centralized route
matches every pattern against the whole store and hash-joins the match
relations on their shared variables; it is the correctness reference. The
distributed route simulates execution over a deployment plan: it evaluates
with index-nested-loop propagation, first against the home node's visible
triples (owned plus replicas), then against the cluster, and records how
many nodes had to serve data. Bindings from the distributed route always
equal the centralized reference because every triple is owned somewhere.

A query is answered locally when the home node's visible triples alone
reproduce the reference bindings. The latency proxy charges the triples
scanned plus a flat penalty per additional node touched; it is a relative
cost signal, not a wall-clock estimate.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .plan import PartitionPlan
from .store import TripleStore

SHAPES = ("linear", "star", "range", "snowflake")

# flat cost added per node touched beyond the first
HOP_PENALTY = 100

Binding = tuple[tuple[str, str], ...]


def is_variable(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True)
class TriplePattern:
    subject: str
    predicate: str
    object: str

    def terms(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True)
class RangeFilter:
    predicate: str
    low: float
    high: float


@dataclass(frozen=True)
class QueryPattern:
    shape: str
    patterns: tuple[TriplePattern, ...]
    range_filter: RangeFilter | None = None

    def validate(self) -> None:
        if self.shape not in SHAPES:
            raise ValueError(f"unknown query shape {self.shape!r}")
        if not self.patterns:
            raise ValueError("query must contain at least one pattern")
        for pat in self.patterns:
            for term in pat.terms():
                if not term:
                    raise ValueError("pattern terms must be non-empty strings")
        if self.shape == "range":
            if len(self.patterns) != 1:
                raise ValueError("range queries hold exactly one pattern")
            if self.range_filter is None:
                raise ValueError("range queries require a numeric filter")
            if self.range_filter.predicate != self.patterns[0].predicate:
                raise ValueError("range filter must target the pattern's predicate")
            if self.range_filter.low > self.range_filter.high:
                raise ValueError("range filter bounds are inverted")
        else:
            if self.range_filter is not None:
                raise ValueError(f"{self.shape} queries do not take a range filter")
        if self.shape == "linear":
            for left, right in zip(self.patterns, self.patterns[1:]):
                if not is_variable(left.object) or left.object != right.subject:
                    raise ValueError("chain patterns must link object variable to next subject")
        if self.shape == "star":
            centre = self.patterns[0].subject
            if any(p.subject != centre for p in self.patterns):
                raise ValueError("star patterns must share one subject term")
        if self.shape == "snowflake":
            centre = self.patterns[0].subject
            prefix = 0
            for p in self.patterns:
                if p.subject != centre:
                    break
                prefix += 1
            if len(self.patterns) >= 2 and prefix < 2:
                raise ValueError("snowflake queries need at least two patterns on the centre")
            bound_objects = {p.object for p in self.patterns[:prefix] if is_variable(p.object)}
            for p in self.patterns[prefix:]:
                if p.subject not in bound_objects:
                    raise ValueError("snowflake tail patterns must chain off an earlier object variable")
                if is_variable(p.object):
                    bound_objects.add(p.object)


@dataclass
class QueryMetrics:
    nodes_touched: int
    locally_answered: bool
    joins: int
    triples_scanned: int
    qet_proxy: int


@dataclass
class QueryResult:
    bindings: frozenset[Binding]
    metrics: QueryMetrics

    def rows(self) -> list[dict[str, str]]:
        return [dict(b) for b in sorted(self.bindings)]


def _bind(triple, s: str, p: str, o: str) -> dict[str, str] | None:
    row: dict[str, str] = {}
    for term, value in ((s, triple.subject), (p, triple.predicate), (o, triple.object)):
        if is_variable(term):
            if term in row and row[term] != value:
                return None
            row[term] = value
        elif term != value:
            return None
    return row


def _pattern_matches(
    store: TripleStore,
    s: str,
    p: str,
    o: str,
    visible: set[int] | None = None,
    split: set[int] | None = None,
) -> tuple[int, int, list[tuple[int, dict[str, str]]]]:
    """Match one (possibly partially bound) pattern against the store.

    Candidates come from the subject index when the subject is constant, then
    the predicate index; a constant object alone falls back to a full scan
    because literal objects are unindexed. Returns candidates examined inside
    and outside ``split`` plus the matches. With ``visible`` given, only those
    positions exist at all (a node scanning its local data).
    """
    if not is_variable(s):
        bucket: Iterable[int] = store.subject_index.get(s, ())
    elif not is_variable(p):
        bucket = store.predicate_index.get(p, ())
    else:
        bucket = range(store.n)

    examined_in = 0
    examined_out = 0
    matches: list[tuple[int, dict[str, str]]] = []
    for pos in bucket:
        if visible is not None and pos not in visible:
            continue
        if split is not None and pos not in split:
            examined_out += 1
        else:
            examined_in += 1
        row = _bind(store.triples[pos], s, p, o)
        if row is not None:
            matches.append((pos, row))
    return examined_in, examined_out, matches


def _dedupe(rows: list[dict[str, str]]) -> list[dict[str, str]]:
    seen: set[Binding] = set()
    out = []
    for row in rows:
        key = tuple(sorted(row.items()))
        if key not in seen:
            seen.add(key)
            out.append(row)
    return out


def _apply_range(rows: list[dict[str, str]], q: QueryPattern) -> list[dict[str, str]]:
    f = q.range_filter
    if f is None:
        return rows
    term = q.patterns[0].object
    kept = []
    for row in rows:
        value = row.get(term, term)
        try:
            x = float(value)
        except ValueError:
            continue
        if f.low <= x <= f.high:
            kept.append(row)
    return kept


def _freeze(rows: list[dict[str, str]]) -> frozenset[Binding]:
    return frozenset(tuple(sorted(row.items())) for row in rows)


def _hash_join(left: list[dict], right: list[dict]) -> list[dict]:
    if not left or not right:
        return []
    shared = sorted(set(left[0]).intersection(right[0]))
    if not shared:
        return [{**l, **r} for l in left for r in right]
    index: dict[tuple, list[dict]] = {}
    for l in left:
        index.setdefault(tuple(l[v] for v in shared), []).append(l)
    out = []
    for r in right:
        for l in index.get(tuple(r[v] for v in shared), ()):
            out.append({**l, **r})
    return out


def evaluate_centralized(store: TripleStore, q: QueryPattern) -> QueryResult:
    """Reference evaluation: full per-pattern match, then hash joins."""
    q.validate()
    scanned = 0
    rows: list[dict[str, str]] | None = None
    for pat in q.patterns:
        examined, _, matches = _pattern_matches(store, *pat.terms())
        scanned += examined
        relation = _dedupe([ext for _, ext in matches])
        rows = relation if rows is None else _hash_join(rows, relation)
    rows = _dedupe(_apply_range(rows or [], q))
    metrics = QueryMetrics(
        nodes_touched=1,
        locally_answered=True,
        joins=len(q.patterns) - 1,
        triples_scanned=scanned,
        qet_proxy=scanned,
    )
    return QueryResult(_freeze(rows), metrics)


def _propagate_eval(
    store: TripleStore,
    q: QueryPattern,
    visible: set[int] | None = None,
    split: set[int] | None = None,
) -> tuple[frozenset[Binding], int, set[int], int]:
    """Index-nested-loop evaluation with binding propagation.

    Returns (bindings, candidates examined inside split, matched positions,
    candidates examined outside split). Probes are memoized so a repeated
    lookup is charged once.
    """
    rows: list[dict[str, str]] = [{}]
    scanned_in = 0
    scanned_out = 0
    matched: set[int] = set()
    cache: dict[tuple[str, str, str], list[tuple[int, dict[str, str]]]] = {}
    for pat in q.patterns:
        next_rows: list[dict[str, str]] = []
        for row in rows:
            s = row.get(pat.subject, pat.subject)
            p = row.get(pat.predicate, pat.predicate)
            o = row.get(pat.object, pat.object)
            key = (s, p, o)
            if key in cache:
                matches = cache[key]
            else:
                ex_in, ex_out, matches = _pattern_matches(store, s, p, o, visible, split)
                scanned_in += ex_in
                scanned_out += ex_out
                cache[key] = matches
            for pos, ext in matches:
                matched.add(pos)
                next_rows.append(row | ext)
        rows = _dedupe(next_rows)
        if not rows:
            break
    rows = _dedupe(_apply_range(rows, q))
    return _freeze(rows), scanned_in, matched, scanned_out


def evaluate_distributed(
    store: TripleStore, plan: PartitionPlan, q: QueryPattern, home_node: int
) -> QueryResult:
    """Simulate evaluation routed to ``home_node`` under the given plan.

    The home node answers from its visible triples; when those already
    reproduce the cluster-wide bindings the query is local and costs only the
    home scan. Otherwise the evaluation widens to the whole cluster, every
    node whose data served a match is counted, and the remote candidates
    scanned are added to the cost. Returned bindings are always the
    cluster-wide (reference-equal) bindings.
    """
    q.validate()
    if not 0 <= home_node < plan.m:
        raise ValueError(f"home node {home_node} outside 0..{plan.m - 1}")
    visible = plan.visible_positions(home_node)
    home_bindings, home_scanned, _, _ = _propagate_eval(store, q, visible=visible)
    full_bindings, _, matched, remote_scanned = _propagate_eval(store, q, split=visible)

    locally_answered = home_bindings == full_bindings
    if locally_answered:
        nodes_touched = 1
        scanned = home_scanned
    else:
        served = {
            home_node if pos in visible else plan.owner_of(pos) for pos in matched
        }
        nodes_touched = max(1, len(served))
        scanned = home_scanned + remote_scanned
    metrics = QueryMetrics(
        nodes_touched=nodes_touched,
        locally_answered=locally_answered,
        joins=len(q.patterns) - 1,
        triples_scanned=scanned,
        qet_proxy=scanned + HOP_PENALTY * (nodes_touched - 1),
    )
    return QueryResult(full_bindings, metrics)


# ---------------------------------------------------------------------------
# workload generation

DEFAULT_WORKLOAD_COUNTS = (3, 4, 3, 2)


def _subject_predicates(store: TripleStore, subject: str) -> list[str]:
    seen: list[str] = []
    for pos in store.subject_index.get(subject, ()):
        p = store.triples[pos].predicate
        if p not in seen:
            seen.append(p)
    return seen


def generate_workload(
    store: TripleStore, seed: int, counts: Sequence[int] = DEFAULT_WORKLOAD_COUNTS
) -> list[QueryPattern]:
    """Sample a deterministic mixed workload from the store's own contents.

    ``counts`` gives how many linear, star, range, and snowflake queries to
    build, in that order. Constants are drawn from the data so queries are
    non-empty wherever the store's structure allows it; shapes degrade to
    their minimal valid form on stores lacking the needed structure.
    """
    if store.n == 0:
        raise ValueError("cannot build a workload over an empty store")
    if len(counts) != len(SHAPES):
        raise ValueError(f"counts must give one entry per shape {SHAPES}")
    if any(c < 0 for c in counts):
        raise ValueError("workload counts must be non-negative")

    rng = random.Random(seed)

    # subjects whose triples link to another subject's group
    link_roots: dict[str, list[tuple[str, str]]] = {}
    for s, positions in store.subject_index.items():
        links = [
            (store.triples[pos].predicate, store.triples[pos].object)
            for pos in positions
            if not store.triples[pos].object_is_literal
            and store.triples[pos].object in store.subject_index
            and store.triples[pos].object != s
        ]
        if links:
            link_roots[s] = links
    star_centres = [
        s for s in store.subject_index if len(_subject_predicates(store, s)) >= 2
    ]
    numeric_values: dict[str, list[float]] = {}
    for predicate, positions in store.predicate_index.items():
        vals = []
        for pos in positions:
            try:
                vals.append(float(store.triples[pos].object))
            except ValueError:
                continue
        if vals:
            numeric_values[predicate] = sorted(vals)

    first_subject = store.triples[0].subject
    fallback_predicate = store.triples[0].predicate

    def make_linear() -> QueryPattern:
        if link_roots:
            root = rng.choice(list(link_roots))
            predicate, obj = rng.choice(link_roots[root])
            second = rng.choice(_subject_predicates(store, obj))
            patterns = (
                TriplePattern(root, predicate, "?h1"),
                TriplePattern("?h1", second, "?h2"),
            )
        else:
            patterns = (TriplePattern(first_subject, fallback_predicate, "?h1"),)
        return QueryPattern("linear", patterns)

    def make_star() -> QueryPattern:
        centre = rng.choice(star_centres) if star_centres else first_subject
        predicates = _subject_predicates(store, centre)
        legs = rng.sample(predicates, min(len(predicates), rng.randint(2, 3)))
        patterns = tuple(
            TriplePattern(centre, p, f"?v{i}") for i, p in enumerate(legs)
        )
        return QueryPattern("star", patterns)

    def make_range() -> QueryPattern:
        if numeric_values:
            predicate = rng.choice(sorted(numeric_values))
            vals = numeric_values[predicate]
            low = vals[len(vals) // 4]
            high = vals[(3 * len(vals)) // 4]
        else:
            predicate = fallback_predicate
            low = high = 0.0
        return QueryPattern(
            "range",
            (TriplePattern("?s", predicate, "?value"),),
            RangeFilter(predicate, low, high),
        )

    def make_snowflake() -> QueryPattern:
        roots = [s for s in link_roots if len(_subject_predicates(store, s)) >= 2]
        if roots:
            root = rng.choice(roots)
            link_pred, obj = rng.choice(link_roots[root])
            others = [p for p in _subject_predicates(store, root) if p != link_pred]
            leg = rng.choice(others) if others else link_pred
            tail = rng.choice(_subject_predicates(store, obj))
            patterns = (
                TriplePattern(root, leg, "?a"),
                TriplePattern(root, link_pred, "?b"),
                TriplePattern("?b", tail, "?c"),
            )
        else:
            patterns = (
                TriplePattern(first_subject, fallback_predicate, "?a"),
            )
        return QueryPattern("snowflake", patterns)

    makers = (make_linear, make_star, make_range, make_snowflake)
    workload: list[QueryPattern] = []
    for maker, count in zip(makers, counts):
        for _ in range(count):
            q = maker()
            q.validate()
            workload.append(q)
    return workload


def query_to_dict(q: QueryPattern) -> dict:
    data: dict = {
        "type": q.shape,
        "patterns": [{"s": p.subject, "p": p.predicate, "o": p.object} for p in q.patterns],
    }
    if q.range_filter is not None:
        data["filter"] = {
            "predicate": q.range_filter.predicate,
            "low": q.range_filter.low,
            "high": q.range_filter.high,
        }
    return data


def query_from_dict(data: dict) -> QueryPattern:
    patterns = tuple(
        TriplePattern(p["s"], p["p"], p["o"]) for p in data["patterns"]
    )
    range_filter = None
    if "filter" in data and data["filter"] is not None:
        f = data["filter"]
        range_filter = RangeFilter(f["predicate"], float(f["low"]), float(f["high"]))
    q = QueryPattern(data["type"], patterns, range_filter)
    q.validate()
    return q


def workload_to_json(workload: Sequence[QueryPattern]) -> str:
    return json.dumps([query_to_dict(q) for q in workload], indent=2, sort_keys=True) + "\n"


def workload_from_json(text: str) -> list[QueryPattern]:
    return [query_from_dict(item) for item in json.loads(text)]


# ---------------------------------------------------------------------------
# communication report

@dataclass
class QueryOutcome:
    index: int
    shape: str
    home_node: int
    joins: int
    nodes_touched: int
    locally_answered: bool
    triples_scanned: int
    qet_proxy: int


@dataclass
class IncReport:
    outcomes: list[QueryOutcome]
    fraction_local: float
    mean_nodes_touched: float
    mean_joins: float
    mean_triples_scanned: float
    mean_qet_proxy: float


def inc_report(
    store: TripleStore,
    plan: PartitionPlan,
    workload: Sequence[QueryPattern],
    policy: str = "best",
    home_node: int = 0,
) -> IncReport:
    """Evaluate the workload under the plan and summarize communication.

    ``policy`` picks the home node per query: "best" routes each query to the
    node needing the fewest touches (how a subject-aware router behaves),
    "fixed" sends everything to ``home_node``.
    """
    if policy not in ("best", "fixed"):
        raise ValueError(f"unknown home-node policy {policy!r}")
    if not workload:
        raise ValueError("workload must contain at least one query")

    outcomes: list[QueryOutcome] = []
    for i, q in enumerate(workload):
        if policy == "fixed":
            chosen_home = home_node
            result = evaluate_distributed(store, plan, q, home_node)
        else:
            chosen_home, result = 0, None
            best_key = None
            for node in range(plan.m):
                r = evaluate_distributed(store, plan, q, node)
                key = (r.metrics.nodes_touched, not r.metrics.locally_answered, node)
                if best_key is None or key < best_key:
                    best_key = key
                    chosen_home, result = node, r
        m = result.metrics
        outcomes.append(
            QueryOutcome(
                index=i,
                shape=q.shape,
                home_node=chosen_home,
                joins=m.joins,
                nodes_touched=m.nodes_touched,
                locally_answered=m.locally_answered,
                triples_scanned=m.triples_scanned,
                qet_proxy=m.qet_proxy,
            )
        )

    count = len(outcomes)
    return IncReport(
        outcomes=outcomes,
        fraction_local=sum(o.locally_answered for o in outcomes) / count,
        mean_nodes_touched=sum(o.nodes_touched for o in outcomes) / count,
        mean_joins=sum(o.joins for o in outcomes) / count,
        mean_triples_scanned=sum(o.triples_scanned for o in outcomes) / count,
        mean_qet_proxy=sum(o.qet_proxy for o in outcomes) / count,
    )


def inc_report_csv(report: IncReport) -> str:
    lines = ["query,shape,homeNode,joins,nodesTouched,locallyAnswered,triplesScanned,qetProxy"]
    for o in report.outcomes:
        lines.append(
            f"{o.index},{o.shape},{o.home_node},{o.joins},{o.nodes_touched},"
            f"{int(o.locally_answered)},{o.triples_scanned},{o.qet_proxy}"
        )
    return "".join(line + "\n" for line in lines)


def inc_report_table(report: IncReport) -> str:
    """Human-readable summary of the communication report."""
    lines = [
        f"{'query':>5}  {'shape':<10} {'home':>4} {'joins':>5} {'nodes':>5} "
        f"{'local':>5} {'scanned':>8} {'cost':>8}",
    ]
    for o in report.outcomes:
        lines.append(
            f"{o.index:>5}  {o.shape:<10} {o.home_node:>4} {o.joins:>5} {o.nodes_touched:>5} "
            f"{'yes' if o.locally_answered else 'no':>5} {o.triples_scanned:>8} {o.qet_proxy:>8}"
        )
    lines.append(
        f"local fraction {report.fraction_local:.3f}, mean nodes touched "
        f"{report.mean_nodes_touched:.2f}, mean joins {report.mean_joins:.2f}, "
        f"mean triples scanned {report.mean_triples_scanned:.1f}"
    )
    return "".join(line + "\n" for line in lines)

"""Portfolio sets, selection-error taxonomy, scenario engines, exact optimizer.

All engines are pure functions of (corpus, scored map). Researchers with a
zero quota or an area outside 1-9 are carried in the corpus but never take
part in a selection. Totals are computed in integer ten-thousandths of a
point so that every engine and any enumeration oracle agree exactly.

A product co-authored within the institution can enter the final selection
at most once; each unfilled slot costs half a point.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .corpus import BIBLIOMETRIC_UDAS, Corpus
from .gev import ScoredProduct

SCORE_SCALE = 10000
SHORTFALL_PENALTY = -0.5
_SHORTFALL_UNITS = SCORE_SCALE // 2

SCENARIO1 = "scenario1"
SCENARIO2 = "scenario2"
SCENARIO3 = "scenario3"
EXACT_PROPOSED = "exact-A"
EXACT_FULL = "exact-C"
SCENARIO_TAGS = (SCENARIO1, SCENARIO2, SCENARIO3, EXACT_PROPOSED, EXACT_FULL)

SELECTION_COLUMNS = ["scenario", "researcher_id", "slot", "product_id_or_EMPTY", "score_or_penalty"]
ERRORS_COLUMNS = [
    "researcher_id", "uda", "inadmissible_in_D", "nil_in_D",
    "overvalued", "undervalued", "omitted",
]

ScoredMap = dict[tuple[str, str], ScoredProduct]


def score_units(score: float) -> int:
    return round(score * SCORE_SCALE)


def units_to_score(units: int) -> float:
    return units / SCORE_SCALE


@dataclass(frozen=True)
class ResearcherPortfolio:
    """One researcher's product sets.

    proposed:            products the researcher declared, in priority order
    unproposed_indexed:  indexed products they authored but did not propose
    declared_pick:       the quota-many highest-priority proposed products
    best_pick:           the quota-many best products over the whole pool,
                         by canonical score order
    """

    researcher_id: str
    proposed: tuple[str, ...]
    unproposed_indexed: tuple[str, ...]
    declared_pick: tuple[str, ...]
    best_pick: tuple[str, ...]

    @property
    def pool(self) -> frozenset[str]:
        return frozenset(self.proposed) | frozenset(self.unproposed_indexed)


def canonical_key(corpus: Corpus, scored: ScoredMap, researcher_id: str):
    """Sort key for one researcher's products: score desc, citations desc,
    year asc, product id asc."""

    def key(product_id: str):
        sp = scored[(researcher_id, product_id)]
        product = corpus.products[product_id]
        return (-score_units(sp.score), -product.max_citations, product.year, product_id)

    return key


def build_sets(corpus: Corpus, scored: ScoredMap) -> dict[str, ResearcherPortfolio]:
    """Materialize the per-researcher portfolio sets.

    Every authorship must already be scored under the researcher's routing.
    """
    by_researcher: dict[str, list] = {}
    for a in corpus.authorships:
        by_researcher.setdefault(a.researcher_id, []).append(a)

    portfolios: dict[str, ResearcherPortfolio] = {}
    for rid in sorted(corpus.researchers):
        researcher = corpus.researchers[rid]
        auths = by_researcher.get(rid, [])
        proposed = tuple(
            a.product_id
            for a in sorted(
                (a for a in auths if a.declared_priority is not None),
                key=lambda a: a.declared_priority,
            )
        )
        unproposed = tuple(sorted(
            a.product_id
            for a in auths
            if a.declared_priority is None and corpus.products[a.product_id].indexed
        ))
        pool = list(proposed) + list(unproposed)
        best = tuple(sorted(pool, key=canonical_key(corpus, scored, rid))[: researcher.quota])
        portfolios[rid] = ResearcherPortfolio(
            researcher_id=rid,
            proposed=proposed,
            unproposed_indexed=unproposed,
            declared_pick=proposed[: researcher.quota],
            best_pick=best,
        )
    return portfolios


# --- error taxonomy ---------------------------------------------------------

@dataclass(frozen=True)
class ResearcherErrors:
    """Selection-error counts and product sets for one researcher.

    overvalued:  declared picks that are not among the best picks
    undervalued: best picks the researcher proposed at too low a priority
    omitted:     best picks the researcher did not propose at all
    """

    researcher_id: str
    uda: int
    declared_count: int
    best_count: int
    inadmissible_in_declared: int
    nil_in_declared: int
    nil_in_best: int
    overvalued: tuple[str, ...]
    undervalued: tuple[str, ...]
    omitted: tuple[str, ...]


def error_metrics(
    corpus: Corpus, scored: ScoredMap, sets: dict[str, ResearcherPortfolio]
) -> tuple[ResearcherErrors, ...]:
    """Exact set-algebra error metrics per researcher.

    Aggregation over researchers counts authorships, so a co-authored
    product contributes once per author holding it in the relevant set.
    """
    out = []
    for rid in sorted(sets):
        p = sets[rid]
        declared = set(p.declared_pick)
        best = set(p.best_pick)
        proposed = set(p.proposed)
        overvalued = declared - best
        undervalued = best & (proposed - declared)
        omitted = best - proposed

        def nil_count(pids) -> int:
            return sum(1 for pid in pids if score_units(scored[(rid, pid)].score) == 0)

        out.append(ResearcherErrors(
            researcher_id=rid,
            uda=corpus.researchers[rid].uda,
            declared_count=len(declared),
            best_count=len(best),
            inadmissible_in_declared=sum(
                1 for pid in declared if scored[(rid, pid)].outcome == "inadmissible"
            ),
            nil_in_declared=nil_count(declared),
            nil_in_best=nil_count(best),
            overvalued=tuple(sorted(overvalued)),
            undervalued=tuple(sorted(undervalued)),
            omitted=tuple(sorted(omitted)),
        ))
    return tuple(out)


# --- selections -------------------------------------------------------------

@dataclass(frozen=True)
class Selection:
    """One complete institutional submission."""

    tag: str
    assignment: dict[str, tuple[str, ...]]
    shortfall: dict[str, int]
    total_score: float
    per_uda: dict[int, float]
    per_uda_due: dict[int, int]


def _active_researchers(corpus: Corpus) -> list[str]:
    return [
        rid
        for rid in sorted(corpus.researchers)
        if corpus.researchers[rid].quota > 0
        and corpus.researchers[rid].uda in BIBLIOMETRIC_UDAS
    ]


def _finalize(
    tag: str, corpus: Corpus, scored: ScoredMap, assignment: dict[str, list[str]]
) -> Selection:
    shortfall: dict[str, int] = {}
    per_uda_units: dict[int, int] = {}
    per_uda_due: dict[int, int] = {}
    total_units = 0
    final_assignment: dict[str, tuple[str, ...]] = {}
    for rid in _active_researchers(corpus):
        researcher = corpus.researchers[rid]
        picked = assignment.get(rid, [])
        missing = researcher.quota - len(picked)
        units = sum(score_units(scored[(rid, pid)].score) for pid in picked)
        units -= _SHORTFALL_UNITS * missing
        final_assignment[rid] = tuple(picked)
        shortfall[rid] = missing
        total_units += units
        per_uda_units[researcher.uda] = per_uda_units.get(researcher.uda, 0) + units
        per_uda_due[researcher.uda] = per_uda_due.get(researcher.uda, 0) + researcher.quota
    return Selection(
        tag=tag,
        assignment=final_assignment,
        shortfall=shortfall,
        total_score=units_to_score(total_units),
        per_uda={uda: units_to_score(u) for uda, u in sorted(per_uda_units.items())},
        per_uda_due=dict(sorted(per_uda_due.items())),
    )


def scenario1(corpus: Corpus, scored: ScoredMap) -> Selection:
    """Selection driven purely by the researchers' declared priorities.

    Proceeds in simultaneous rounds: every researcher with remaining
    capacity claims their highest-priority still-available proposed product.
    A contested product goes to the claimant with the numerically smallest
    priority; on equal priority, to the claimant with fewer remaining
    proposed products, then to the lexicographically smaller researcher id.
    Losers fall through to their next priority. Products are claimed in
    priority order regardless of score, so penalized products do get
    submitted when researchers ranked them high.
    """
    sets = build_sets(corpus, scored)
    active = _active_researchers(corpus)
    priority: dict[tuple[str, str], int] = {
        (a.researcher_id, a.product_id): a.declared_priority
        for a in corpus.authorships
        if a.declared_priority is not None
    }
    capacity = {rid: corpus.researchers[rid].quota for rid in active}
    consumed: set[str] = set()
    assignment: dict[str, list[str]] = {rid: [] for rid in active}

    def next_claim(rid: str) -> str | None:
        for pid in sets[rid].proposed:
            if pid not in consumed:
                return pid
        return None

    def remaining_proposed(rid: str) -> int:
        return sum(1 for pid in sets[rid].proposed if pid not in consumed)

    while True:
        claims: dict[str, list[str]] = {}
        for rid in active:
            if capacity[rid] == 0:
                continue
            pid = next_claim(rid)
            if pid is not None:
                claims.setdefault(pid, []).append(rid)
        if not claims:
            break
        for pid in sorted(claims):
            claimants = claims[pid]
            winner = min(
                claimants,
                key=lambda rid: (priority[(rid, pid)], remaining_proposed(rid), rid),
            )
            assignment[winner].append(pid)
            capacity[winner] -= 1
            consumed.add(pid)
    return _finalize(SCENARIO1, corpus, scored, assignment)


def _greedy_best_score(
    tag: str, corpus: Corpus, scored: ScoredMap, candidates: dict[str, tuple[str, ...]]
) -> Selection:
    """Greedy selection over per-researcher candidate sets in score order.

    Only candidates whose score beats the shortfall penalty are ever
    assigned. A product wanted by several capacity-holding researchers is
    granted to the claimant whose best remaining alternative scores lower
    (no alternative ranks lowest of all); remaining ties go to the smaller
    researcher id.
    """
    active = _active_researchers(corpus)

    def gain(rid: str, pid: str) -> int:
        return score_units(scored[(rid, pid)].score) + _SHORTFALL_UNITS

    pairs = []
    holders: dict[str, list[str]] = {}
    for rid in active:
        for pid in candidates.get(rid, ()):
            if gain(rid, pid) > 0:
                pairs.append((rid, pid))
                holders.setdefault(pid, []).append(rid)

    def pair_key(pair: tuple[str, str]):
        rid, pid = pair
        sp = scored[(rid, pid)]
        product = corpus.products[pid]
        return (-score_units(sp.score), -product.max_citations, product.year, pid, rid)

    pairs.sort(key=pair_key)

    capacity = {rid: corpus.researchers[rid].quota for rid in active}
    consumed: set[str] = set()
    assignment: dict[str, list[str]] = {rid: [] for rid in active}

    def best_alternative_units(rid: str, excluding: str) -> float:
        best = float("-inf")
        for pid in candidates.get(rid, ()):
            if pid == excluding or pid in consumed:
                continue
            g = gain(rid, pid)
            if g > 0:
                best = max(best, score_units(scored[(rid, pid)].score))
        return best

    for rid, pid in pairs:
        if pid in consumed or capacity[rid] == 0:
            continue
        claimants = [r for r in holders[pid] if capacity[r] > 0]
        winner = min(claimants, key=lambda r: (best_alternative_units(r, pid), r))
        assignment[winner].append(pid)
        capacity[winner] -= 1
        consumed.add(pid)
    return _finalize(tag, corpus, scored, assignment)


def scenario2(corpus: Corpus, scored: ScoredMap) -> Selection:
    """Greedy score-driven selection restricted to the proposed products."""
    sets = build_sets(corpus, scored)
    return _greedy_best_score(
        SCENARIO2, corpus, scored, {rid: p.proposed for rid, p in sets.items()}
    )


def scenario3(corpus: Corpus, scored: ScoredMap) -> Selection:
    """Greedy score-driven selection over the full pools (proposed plus
    indexed-but-unproposed products)."""
    sets = build_sets(corpus, scored)
    return _greedy_best_score(
        SCENARIO3, corpus, scored,
        {rid: p.proposed + p.unproposed_indexed for rid, p in sets.items()},
    )


# --- exact optimizer --------------------------------------------------------

def _max_weight_assignment(
    capacities: list[int], num_items: int, edges: list[tuple[int, int, int]]
) -> list[tuple[int, int]]:
    """Maximum-weight capacitated assignment of items to agents.

    Each item may serve at most one agent; agent i takes at most
    capacities[i] items; all edge weights are positive integers. Solved as a
    min-cost flow by successive shortest augmenting paths, stopping when no
    augmenting path improves the total. Node ordering is fixed by the
    caller's edge order, which makes the solution deterministic.
    """
    num_agents = len(capacities)
    source = 0
    first_item = 1 + num_agents
    sink = first_item + num_items
    n = sink + 1

    graph: list[list[list[int]]] = [[] for _ in range(n)]  # arcs as [to, cap, cost, rev]

    def add_arc(u: int, v: int, cap: int, cost: int) -> None:
        graph[u].append([v, cap, cost, len(graph[v])])
        graph[v].append([u, 0, -cost, len(graph[u]) - 1])

    for i, cap in enumerate(capacities):
        if cap > 0:
            add_arc(source, 1 + i, cap, 0)
    item_arcs_added: set[int] = set()
    agent_item_arcs: list[tuple[int, int, int, int]] = []  # (agent, item, node, arc idx)
    for agent, item, weight in edges:
        if weight <= 0:
            raise ValueError("edge weights must be positive")
        node = 1 + agent
        agent_item_arcs.append((agent, item, node, len(graph[node])))
        add_arc(node, first_item + item, 1, -weight)
        if item not in item_arcs_added:
            add_arc(first_item + item, sink, 1, 0)
            item_arcs_added.add(item)

    INF = float("inf")
    while True:
        dist = [INF] * n
        parent: list[tuple[int, int] | None] = [None] * n
        in_queue = [False] * n
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            in_queue[u] = False
            for idx, arc in enumerate(graph[u]):
                v, cap, cost, _ = arc
                if cap > 0 and dist[u] + cost < dist[v]:
                    dist[v] = dist[u] + cost
                    parent[v] = (u, idx)
                    if not in_queue[v]:
                        queue.append(v)
                        in_queue[v] = True
        if dist[sink] >= 0:
            break
        bottleneck = INF
        v = sink
        while v != source:
            u, idx = parent[v]
            bottleneck = min(bottleneck, graph[u][idx][1])
            v = u
        v = sink
        while v != source:
            u, idx = parent[v]
            arc = graph[u][idx]
            arc[1] -= bottleneck
            graph[arc[0]][arc[3]][1] += bottleneck
            v = u

    chosen = []
    for agent, item, node, idx in agent_item_arcs:
        if graph[node][idx][1] == 0:  # unit capacity fully used
            chosen.append((agent, item))
    return chosen


def optimize_exact(
    corpus: Corpus,
    scored: ScoredMap,
    candidates: dict[str, tuple[str, ...]],
    tag: str,
) -> Selection:
    """Provably optimal selection over the given candidate sets.

    Maximizes total score (assigned scores minus half a point per unfilled
    slot) subject to product uniqueness and per-researcher quotas. A slot is
    filled only when the product's score beats the shortfall penalty.
    """
    active = _active_researchers(corpus)
    agent_index = {rid: i for i, rid in enumerate(active)}
    capacities = [corpus.researchers[rid].quota for rid in active]

    product_ids = sorted({pid for rid in active for pid in candidates.get(rid, ())})

    def item_key(pid: str):
        best_units = max(
            (
                score_units(scored[(rid, pid)].score)
                for rid in active
                if pid in candidates.get(rid, ())
            ),
            default=0,
        )
        product = corpus.products[pid]
        return (-best_units, -product.max_citations, product.year, pid)

    product_ids.sort(key=item_key)
    item_index = {pid: j for j, pid in enumerate(product_ids)}

    edges = []
    for rid in active:
        for pid in sorted(set(candidates.get(rid, ())), key=item_key):
            weight = score_units(scored[(rid, pid)].score) + _SHORTFALL_UNITS
            if weight > 0:
                edges.append((agent_index[rid], item_index[pid], weight))

    chosen = _max_weight_assignment(capacities, len(product_ids), edges)
    assignment: dict[str, list[str]] = {rid: [] for rid in active}
    for agent, item in chosen:
        assignment[active[agent]].append(product_ids[item])
    for rid in active:
        assignment[rid].sort(key=canonical_key(corpus, scored, rid))
    return _finalize(tag, corpus, scored, assignment)


def exact_over_proposed(corpus: Corpus, scored: ScoredMap) -> Selection:
    sets = build_sets(corpus, scored)
    return optimize_exact(
        corpus, scored, {rid: p.proposed for rid, p in sets.items()}, EXACT_PROPOSED
    )


def exact_over_full(corpus: Corpus, scored: ScoredMap) -> Selection:
    sets = build_sets(corpus, scored)
    return optimize_exact(
        corpus, scored,
        {rid: p.proposed + p.unproposed_indexed for rid, p in sets.items()},
        EXACT_FULL,
    )


RUNNERS = {
    SCENARIO1: scenario1,
    SCENARIO2: scenario2,
    SCENARIO3: scenario3,
    EXACT_PROPOSED: exact_over_proposed,
    EXACT_FULL: exact_over_full,
}


# --- CSV output -------------------------------------------------------------

def write_selections(selections: list[Selection], scored: ScoredMap, path: str | Path) -> None:
    """Write all selections to one CSV; unfilled slots carry the penalty."""
    path = Path(path)
    order = {tag: i for i, tag in enumerate(SCENARIO_TAGS)}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SELECTION_COLUMNS)
        for selection in sorted(selections, key=lambda s: order[s.tag]):
            for rid in sorted(selection.assignment):
                slot = 0
                for pid in selection.assignment[rid]:
                    slot += 1
                    writer.writerow([
                        selection.tag, rid, slot, pid,
                        format(scored[(rid, pid)].score, "g"),
                    ])
                for _ in range(selection.shortfall[rid]):
                    slot += 1
                    writer.writerow([
                        selection.tag, rid, slot, "EMPTY", format(SHORTFALL_PENALTY, "g"),
                    ])


def write_errors(errors: tuple[ResearcherErrors, ...], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ERRORS_COLUMNS)
        for e in errors:
            writer.writerow([
                e.researcher_id, e.uda, e.inadmissible_in_declared, e.nil_in_declared,
                len(e.overvalued), len(e.undervalued), len(e.omitted),
            ])

"""Exact minimum label s-t cuts and a min-cut based upper bound."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

from .core import Instance, LabelSubset, ResourceError, find_path, is_label_cut, reachable

SUBSET_GUARD = 10**7
NODE_GUARD = 10**7


@dataclass(frozen=True)
class CutResult:
    """A label cut, or for a capped search the certificate that none of size <= cap exists.

    ``size`` is None exactly when the cap was hit; ``lower_bound`` is then cap + 1.
    """

    size: int | None
    witness: LabelSubset | None
    method: str
    nodes: int = 0
    lower_bound: int = 0
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def exceeds_cap(self) -> bool:
        return self.size is None

    def record(self) -> dict:
        out = {"method": self.method, "nodes": self.nodes}
        if self.size is None:
            out["opt"] = f">{self.lower_bound - 1}"
        else:
            out["opt"] = self.size
            out["witness"] = sorted(self.witness.members)
        out.update(self.stats)
        return out


def _trivial(instance: Instance, method: str) -> CutResult | None:
    if instance.t not in reachable(instance):
        return CutResult(0, LabelSubset(), method, nodes=1)
    return None


def min_label_cut_exhaustive(
    instance: Instance, cap: int | None = None, guard: int = SUBSET_GUARD
) -> CutResult:
    """Smallest label cut by enumerating subsets of used labels by size, lexicographically."""
    done = _trivial(instance, "exhaustive")
    if done:
        return done
    labels = instance.used_labels
    nodes = 1
    for size in range(1, len(labels) + 1):
        if cap is not None and size > cap:
            return CutResult(None, None, "exhaustive", nodes, lower_bound=cap + 1)
        count = math.comb(len(labels), size)
        if count > guard:
            raise ResourceError(
                "subset_guard", f"level {size} has {count} subsets (> {guard}); reached level {size - 1} without a cut"
            )
        for combo in combinations(labels, size):
            nodes += 1
            if is_label_cut(instance, combo):
                return CutResult(size, LabelSubset(frozenset(combo)), "exhaustive", nodes, lower_bound=size)
    raise AssertionError("removing every used label must disconnect s and t")


def _disjoint_path_bound(instance: Instance, chosen: frozenset[int]) -> int:
    """Greedy count of s-t paths with pairwise disjoint label sets, avoiding ``chosen``."""
    removed = set(chosen)
    count = 0
    edge_labels = instance.edge_labels
    while True:
        path = find_path(instance, removed)
        if path is None:
            return count
        count += 1
        removed.update(edge_labels[(u, v)] for u, v in zip(path, path[1:]))


def min_label_cut_bnb(instance: Instance, node_guard: int = NODE_GUARD) -> CutResult:
    """Branch and bound over the hitting-set view: every s-t path must lose a label.

    Branch i on a found path adds its i-th label and forbids labels 0..i-1, so each
    label set is visited at most once. Branches are kept while they can still tie
    the incumbent, which makes the reported witness the lexicographically smallest
    optimum.
    """
    done = _trivial(instance, "bnb")
    if done:
        return done
    upper = label_cut_upper_bound_via_min_cut(instance)
    best_size = upper.size
    best_witness = tuple(sorted(upper.witness.members))
    multiplicity = instance.label_multiplicity
    edge_labels = instance.edge_labels
    nodes = 0

    def search(chosen: frozenset[int], excluded: frozenset[int]) -> None:
        nonlocal best_size, best_witness, nodes
        nodes += 1
        if nodes > node_guard:
            raise ResourceError("node_guard", f"branch and bound exceeded {node_guard} nodes")
        path = find_path(instance, chosen)
        if path is None:
            cand = tuple(sorted(chosen))
            if (len(cand), cand) < (best_size, best_witness):
                best_size, best_witness = len(cand), cand
            return
        if len(chosen) + _disjoint_path_bound(instance, chosen) > best_size:
            return
        on_path = {edge_labels[(u, v)] for u, v in zip(path, path[1:])}
        branch = sorted(on_path - excluded, key=lambda lab: (-multiplicity[lab], lab))
        forbidden = set(excluded)
        for lab in branch:
            search(chosen | {lab}, frozenset(forbidden))
            forbidden.add(lab)

    search(frozenset(), frozenset())
    return CutResult(
        best_size,
        LabelSubset(frozenset(best_witness)),
        "bnb",
        nodes,
        lower_bound=best_size,
        stats={"initial_upper_bound": upper.size},
    )


def _max_flow_residual(instance: Instance) -> tuple[int, set[int]]:
    """Unit-capacity Edmonds-Karp; returns the flow value and the source side of a minimum cut."""
    n = instance.vertex_count
    # arcs stored in pairs: arc 2i and its partner 2i+1
    head: list[int] = []
    cap: list[int] = []
    out: list[list[int]] = [[] for _ in range(n)]
    for u, v, _ in instance.edges:
        back = 0 if instance.directed else 1
        for a, b, c in ((u, v, 1), (v, u, back)):
            out[a].append(len(head))
            head.append(b)
            cap.append(c)
    s, t = instance.s, instance.t
    flow = 0
    while True:
        parent_arc = {s: -1}
        queue = deque([s])
        while queue and t not in parent_arc:
            u = queue.popleft()
            for arc in out[u]:
                v = head[arc]
                if cap[arc] > 0 and v not in parent_arc:
                    parent_arc[v] = arc
                    queue.append(v)
        if t not in parent_arc:
            return flow, set(parent_arc)
        v = t
        while v != s:
            arc = parent_arc[v]
            cap[arc] -= 1
            cap[arc ^ 1] += 1
            v = head[arc ^ 1]
        flow += 1


def max_flow_value(instance: Instance) -> int:
    return _max_flow_residual(instance)[0]


def label_cut_upper_bound_via_min_cut(instance: Instance) -> CutResult:
    """Labels of a minimum s-t edge cut; always a label cut, not necessarily optimal."""
    flow, source_side = _max_flow_residual(instance)
    cut_labels = set()
    for u, v, lab in instance.edges:
        crosses = (u in source_side) != (v in source_side)
        if instance.directed:
            crosses = u in source_side and v not in source_side
        if crosses:
            cut_labels.add(lab)
    return CutResult(
        len(cut_labels),
        LabelSubset(frozenset(cut_labels)),
        "mincut",
        stats={"edge_cut": flow},
    )

"""Path-based LP relaxations solved by cutting planes.

Both relaxations minimise the total label weight subject to one covering
constraint per simple s-t path. LP1 charges a label once per edge of the path,
LP2 once per distinct label. Constraints are generated lazily by separation.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Instance, InstanceError, ResourceError, path_edge_labels, reachable
from .generators import PermutationTable, chain_path, label_id

VIOLATION_TOL = 1e-7
FEASIBILITY_TOL = 1e-9
TIE_EPS = 1e-12
NODE_GUARD = 10**7
CUT_CAP = 10**5


class AlreadyDisconnected(Exception):
    """No s-t path exists, so there is nothing to separate."""


class InfeasibleLP(Exception):
    pass


# --- dense LP core ----------------------------------------------------------


class CoveringLP:
    """min c.x subject to A x >= b, x >= 0, for c >= 0.

    The tableau holds the dual, max b.y s.t. A^T y <= c, y >= 0, whose slack basis
    is feasible because c >= 0. Primal simplex with Bland's rule runs on it; the
    primal optimum is read off the slack reduced costs. A new primal row is a new
    dual column, so adding a cut keeps the current basis feasible.
    """

    def __init__(self, objective: Sequence[float], max_pivots: int = 10**6):
        c = np.asarray(objective, dtype=float)
        if c.ndim != 1 or (c < 0).any():
            raise ValueError("objective must be a nonnegative vector")
        n = len(c)
        self.n = n
        self.max_pivots = max_pivots
        # Rows 0..n-1 are constraints, row n is the reduced-cost row.
        self.body = np.vstack([np.eye(n), np.zeros((1, n))])
        self.rhs = np.append(c, 0.0)
        self.basis = list(range(n))
        self.rows: list[np.ndarray] = []
        self.b: list[float] = []
        self.pivots = 0

    def add_constraint(self, coeffs: Sequence[float], rhs: float) -> None:
        a = np.asarray(coeffs, dtype=float)
        if a.shape != (self.n,):
            raise ValueError(f"constraint must have {self.n} coefficients")
        slack_block = self.body[:, : self.n]
        column = slack_block @ a
        column[-1] -= rhs
        self.body = np.hstack([self.body, column[:, None]])
        self.rows.append(a)
        self.b.append(float(rhs))

    def solve(self) -> str:
        body, rhs, n = self.body, self.rhs, self.n
        eps = 1e-11
        while True:
            reduced = body[-1]
            candidates = np.flatnonzero(reduced < -eps)
            if candidates.size == 0:
                return "optimal"
            enter = int(candidates[0])
            column = body[:-1, enter]
            rows = np.flatnonzero(column > eps)
            if rows.size == 0:
                return "infeasible"
            ratios = rhs[rows] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            leave = min(ties, key=lambda r: self.basis[r])
            self._pivot(leave, enter)
            self.pivots += 1
            if self.pivots > self.max_pivots:
                raise ResourceError("pivot_cap", f"more than {self.max_pivots} simplex pivots")

    def _pivot(self, r: int, e: int) -> None:
        body, rhs = self.body, self.rhs
        piv = body[r, e]
        body[r] /= piv
        rhs[r] /= piv
        factors = body[:, e].copy()
        factors[r] = 0.0
        body -= np.outer(factors, body[r])
        rhs -= factors * rhs[r]
        body[np.abs(body) < 1e-14] = 0.0
        rhs[:-1] = np.maximum(rhs[:-1], 0.0)
        self.basis[r] = e

    @property
    def x(self) -> np.ndarray:
        return np.maximum(self.body[-1, : self.n], 0.0)

    @property
    def value(self) -> float:
        return float(self.rhs[-1])

    @property
    def duals(self) -> np.ndarray:
        y = np.zeros(len(self.rows))
        for r, var in enumerate(self.basis):
            if var >= self.n:
                y[var - self.n] = self.rhs[r]
        return y


def lp_solve_dense(objective, constraints) -> tuple[float, np.ndarray]:
    """Minimise ``objective . x`` over ``x >= 0`` and ``(coeffs, rhs)`` rows read as ``>=``.

    A third ``sense`` entry per row is accepted and must be ``'>='``.
    """
    lp = CoveringLP(objective)
    for row in constraints:
        coeffs, rhs = row[0], row[1]
        if len(row) > 2 and row[2] != ">=":
            raise ValueError("only >= constraints are supported")
        lp.add_constraint(coeffs, rhs)
    if lp.solve() == "infeasible":
        raise InfeasibleLP("constraint system has no nonnegative solution")
    x = lp.x
    return float(np.dot(np.asarray(objective, dtype=float), x)), x


# --- constraints and oracles -------------------------------------------------


@dataclass(frozen=True)
class PathConstraint:
    path: tuple[int, ...]
    coeffs: tuple[tuple[int, int], ...]  # sorted (label, coefficient)
    variant: str
    weight: float = field(default=0.0, compare=False)

    @classmethod
    def from_path(cls, instance: Instance, path, variant: str, x=None) -> PathConstraint:
        labels = path_edge_labels(instance, path)
        counts: dict[int, int] = {}
        for lab in labels:
            counts[lab] = counts.get(lab, 0) + 1
        if variant == "lp2":
            counts = {lab: 1 for lab in counts}
        elif variant != "lp1":
            raise ValueError(f"unknown variant {variant!r}")
        coeffs = tuple(sorted(counts.items()))
        weight = 0.0 if x is None else float(sum(c * x[lab] for lab, c in coeffs))
        return cls(tuple(path), coeffs, variant, weight)

    def dense(self, q: int) -> np.ndarray:
        row = np.zeros(q)
        for lab, c in self.coeffs:
            row[lab] = c
        return row

    def lhs(self, x) -> float:
        return float(sum(c * x[lab] for lab, c in self.coeffs))


def _check_x(instance: Instance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (instance.label_count,):
        raise InstanceError(f"x must have {instance.label_count} entries")
    if (x < 0).any():
        raise InstanceError("x must be nonnegative")
    return x


def _dijkstra(adj, source: int, x: np.ndarray) -> list[float]:
    dist = [math.inf] * len(adj)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist[u]:
            continue
        for v, lab in adj[u]:
            nd = du + x[lab]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def shortest_label_path(instance: Instance, x) -> tuple[float, tuple[int, ...]]:
    """Minimum of sum_{e in P} x_{label(e)} over s-t paths, with the lexicographically smallest minimiser."""
    x = _check_x(instance, x)
    s, t = instance.s, instance.t
    from_s = _dijkstra(instance.adjacency, s, x)
    if math.isinf(from_s[t]):
        raise AlreadyDisconnected("s and t are not connected")
    to_t = _dijkstra(instance.reverse_adjacency, t, x)
    total = from_s[t]
    eps = TIE_EPS * (1.0 + total)
    on_shortest = [from_s[v] + to_t[v] <= total + eps for v in range(instance.vertex_count)]

    # Every minimum-weight simple path uses only edges tight for from_s, so the
    # first path found by an ordered DFS over tight edges is the lexicographic minimum.
    adj = instance.adjacency
    path = [s]
    on_path = {s}
    iters = [iter(adj[s])]
    while iters:
        u = path[-1]
        if u == t:
            return total, tuple(path)
        for v, lab in iters[-1]:
            if v in on_path or not on_shortest[v]:
                continue
            if abs(from_s[u] + x[lab] - from_s[v]) <= eps:
                path.append(v)
                on_path.add(v)
                iters.append(iter(adj[v]))
                break
        else:
            iters.pop()
            on_path.discard(path.pop())
    raise AssertionError("tight subgraph lost the shortest path")


def separate_lp1(instance: Instance, x, tol: float = VIOLATION_TOL) -> PathConstraint | None:
    weight, path = shortest_label_path(instance, x)
    if weight < 1 - tol:
        return PathConstraint.from_path(instance, path, "lp1", x)
    return None


def min_distinct_label_path(
    instance: Instance, x, bound: float = math.inf, node_guard: int = NODE_GUARD
) -> tuple[float, tuple[int, ...] | None]:
    """Exact minimum distinct-label weight over simple s-t paths, by depth-first branch and bound.

    Only paths lighter than ``bound`` are reported; otherwise returns ``(inf, None)``.
    Ties go to the lexicographically smallest vertex sequence.
    """
    x = _check_x(instance, x)
    s, t = instance.s, instance.t
    adj = instance.adjacency
    if instance.directed:
        live = reachable(_reversed(instance), start=t)
    else:
        live = reachable(instance, start=t)
    if s not in live:
        raise AlreadyDisconnected("s and t are not connected")

    best, best_path = bound, None
    path = [s]
    on_path = {s}
    paid_stack = [0.0]
    label_stack: list[int] = []
    counts: dict[int, int] = {}
    iters = [iter(adj[s])]
    nodes = 0
    while iters:
        paid = paid_stack[-1]
        for v, lab in iters[-1]:
            if v in on_path or v not in live:
                continue
            new = paid if counts.get(lab) else paid + x[lab]
            if new >= best - TIE_EPS:
                continue
            nodes += 1
            if nodes > node_guard:
                raise ResourceError("node_guard", f"distinct-label search exceeded {node_guard} nodes")
            if v == t:
                best, best_path = new, tuple(path) + (t,)
                continue
            path.append(v)
            on_path.add(v)
            paid_stack.append(new)
            label_stack.append(lab)
            counts[lab] = counts.get(lab, 0) + 1
            iters.append(iter(adj[v]))
            break
        else:
            iters.pop()
            if len(path) > 1:
                on_path.discard(path.pop())
                paid_stack.pop()
                lab = label_stack.pop()
                counts[lab] -= 1
                if not counts[lab]:
                    del counts[lab]
    if best_path is None:
        return math.inf, None
    return best, best_path


def _reversed(instance: Instance) -> Instance:
    edges = tuple((v, u, lab) for u, v, lab in instance.edges)
    return Instance(instance.vertex_count, edges, instance.t, instance.s, instance.label_count, True)


def separate_lp2_generic(
    instance: Instance, x, tol: float = VIOLATION_TOL, node_guard: int = NODE_GUARD
) -> PathConstraint | None:
    weight, path = min_distinct_label_path(instance, x, bound=1 - tol, node_guard=node_guard)
    if path is None:
        return None
    return PathConstraint.from_path(instance, path, "lp2", x)


def _check_gadget(instance: Instance, table: PermutationTable | None) -> PermutationTable:
    if table is None:
        raise InstanceError("gadget oracle needs the instance's permutation table")
    k, d, h = table.k, table.d, table.h
    pairs = k * (k - 1) // 2
    if (
        instance.vertex_count != 2 + pairs * h * (3 * d - 1)
        or instance.edge_count != 4 * d * h * pairs
        or instance.label_count != k * d
        or (instance.s, instance.t) != (0, 1)
    ):
        raise InstanceError("instance does not match the gadget layout of its permutation table")
    return table


def gadget_min_path(instance: Instance, table: PermutationTable, x) -> tuple[float, tuple[int, ...]]:
    """Minimum distinct-label path weight using the chain structure: per diamond, the cheaper side."""
    x = _check_x(instance, x)
    table = _check_gadget(instance, table)
    k, d, h = table.k, table.d, table.h
    best, best_key = math.inf, None
    for (mu, nu, i), sigma in sorted(table.perms.items()):
        value = 0.0
        sides = []
        for j in range(1, d + 1):
            top = x[label_id(mu, j, d)]
            bottom = x[label_id(nu, sigma[j - 1], d)]
            if top <= bottom:
                value += top
                sides.append("top")
            else:
                value += bottom
                sides.append("bottom")
        if value < best - TIE_EPS:
            best, best_key = value, (mu, nu, i, tuple(sides))
    mu, nu, i, sides = best_key
    return best, chain_path(k, d, h, mu, nu, i, sides)


def separate_lp2_gadget(
    instance: Instance, table: PermutationTable | None, x, tol: float = VIOLATION_TOL
) -> PathConstraint | None:
    weight, path = gadget_min_path(instance, table, x)
    if weight < 1 - tol:
        return PathConstraint.from_path(instance, path, "lp2", x)
    return None


# --- cutting-plane driver ----------------------------------------------------


@dataclass
class RelaxationResult:
    value: float
    x: np.ndarray
    active: list[PathConstraint]
    iterations: int
    status: str
    cuts: list[PathConstraint]
    variant: str


def make_oracle(instance: Instance, variant: str, oracle: str = "generic", table=None, tol=VIOLATION_TOL):
    if variant == "lp1":
        return lambda x: separate_lp1(instance, x, tol)
    if variant != "lp2":
        raise ValueError(f"unknown variant {variant!r}")
    if oracle == "generic":
        return lambda x: separate_lp2_generic(instance, x, tol)
    if oracle == "gadget":
        _check_gadget(instance, table)
        return lambda x: separate_lp2_gadget(instance, table, x, tol)
    raise ValueError(f"unknown oracle {oracle!r}")


def solve_relaxation(
    instance: Instance,
    variant: str = "lp2",
    oracle: str = "generic",
    table: PermutationTable | None = None,
    tol: float = VIOLATION_TOL,
    max_cuts: int = CUT_CAP,
) -> RelaxationResult:
    separate = make_oracle(instance, variant, oracle, table, tol)
    q = instance.label_count
    lp = CoveringLP(np.ones(q))
    x = np.zeros(q)
    cuts: list[PathConstraint] = []
    seen = set()
    status = "optimal"
    iterations = 0
    while True:
        try:
            cut = separate(x)
        except AlreadyDisconnected:
            break
        if cut is None:
            break
        if cut.coeffs in seen:
            # The LP already holds this row; only round-off can bring it back.
            status = "stalled"
            break
        if len(cuts) >= max_cuts:
            raise ResourceError("cut_cap", f"more than {max_cuts} cuts generated")
        seen.add(cut.coeffs)
        cuts.append(cut)
        lp.add_constraint(cut.dense(q), 1.0)
        if lp.solve() == "infeasible":
            raise InfeasibleLP("path constraints became infeasible")
        x = lp.x
        iterations += 1
    active = [c for c in cuts if abs(c.lhs(x) - 1.0) <= FEASIBILITY_TOL * 10]
    return RelaxationResult(float(x.sum()), x, active, iterations, status, cuts, variant)


def emit_lp_text(q: int, cuts: Sequence[PathConstraint], name: str = "labelcut") -> str:
    """Accumulated LP in CPLEX LP text form."""
    lines = [f"\\ {name}", "Minimize", " obj: " + " + ".join(f"x{j}" for j in range(q)), "Subject To"]
    for i, cut in enumerate(cuts):
        terms = " + ".join(f"x{lab}" if c == 1 else f"{c} x{lab}" for lab, c in cut.coeffs)
        lines.append(f" c{i}: {terms} >= 1")
    lines.append("Bounds")
    lines.extend(f" x{j} >= 0" for j in range(q))
    lines.append("End")
    return "\n".join(lines) + "\n"

"""Edge-labeled graphs, label-cut feasibility, and the instance text format."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

FORMAT_MAGIC = "labelcut"
FORMAT_VERSION = 1


class InstanceError(ValueError):
    """Invalid instance, label subset, or path."""


class ParseError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class VersionError(ParseError):
    pass


class ResourceError(RuntimeError):
    """A search or enumeration guard was exceeded."""

    def __init__(self, guard: str, message: str):
        self.guard = guard
        super().__init__(f"{guard}: {message}")


Edge = tuple[int, int, int]


@dataclass(frozen=True)
class Instance:
    vertex_count: int
    edges: tuple[Edge, ...]
    s: int
    t: int
    label_count: int
    directed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(int(x) for x in e) for e in self.edges))
        n, q = self.vertex_count, self.label_count
        if n < 0:
            raise InstanceError("vertex_count must be nonnegative")
        if q < 1:
            raise InstanceError("label_count must be positive")
        if not (0 <= self.s < n and 0 <= self.t < n):
            raise InstanceError("source/sink out of range")
        if self.s == self.t:
            raise InstanceError("source and sink must differ")
        seen = set()
        for i, (u, v, lab) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(f"edge {i} has a vertex outside [0, {n})")
            if not 0 <= lab < q:
                raise InstanceError(f"edge {i} has label {lab} outside [0, {q})")
            if u == v:
                raise InstanceError(f"edge {i} is a self loop")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise InstanceError(f"edge {i} duplicates ({u}, {v})")
            seen.add(key)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, sorted (neighbor, label) pairs along allowed directions."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for u, v, lab in self.edges:
            adj[u].append((v, lab))
            if not self.directed:
                adj[v].append((u, lab))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def reverse_adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        if not self.directed:
            return self.adjacency
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for u, v, lab in self.edges:
            adj[v].append((u, lab))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_labels(self) -> dict[tuple[int, int], int]:
        table = {}
        for u, v, lab in self.edges:
            table[(u, v)] = lab
            if not self.directed:
                table[(v, u)] = lab
        return table

    @cached_property
    def used_labels(self) -> tuple[int, ...]:
        return tuple(sorted({lab for _, _, lab in self.edges}))

    @cached_property
    def label_multiplicity(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for _, _, lab in self.edges:
            counts[lab] = counts.get(lab, 0) + 1
        return counts


@dataclass(frozen=True)
class LabelSubset:
    members: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(x) for x in self.members))

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, label) -> bool:
        return label in self.members


def _members(instance: Instance, subset) -> frozenset[int]:
    members = subset.members if isinstance(subset, LabelSubset) else frozenset(subset)
    for lab in members:
        if not 0 <= lab < instance.label_count:
            raise InstanceError(f"label {lab} outside [0, {instance.label_count})")
    return members


def reachable(instance: Instance, removed: Iterable[int] = (), start: int | None = None) -> set[int]:
    """Vertices reachable from ``start`` (default s) skipping edges with removed labels."""
    removed = removed if isinstance(removed, (set, frozenset)) else set(removed)
    start = instance.s if start is None else start
    seen = {start}
    queue = deque([start])
    adj = instance.adjacency
    while queue:
        u = queue.popleft()
        for v, lab in adj[u]:
            if v not in seen and lab not in removed:
                seen.add(v)
                queue.append(v)
    return seen


def find_path(instance: Instance, removed: Iterable[int] = ()) -> tuple[int, ...] | None:
    """BFS s-t path avoiding removed labels (fewest edges, smallest ids first), or None."""
    removed = removed if isinstance(removed, (set, frozenset)) else set(removed)
    parent = {instance.s: -1}
    queue = deque([instance.s])
    adj = instance.adjacency
    while queue:
        u = queue.popleft()
        if u == instance.t:
            break
        for v, lab in adj[u]:
            if v not in parent and lab not in removed:
                parent[v] = u
                queue.append(v)
    if instance.t not in parent:
        return None
    path = [instance.t]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def is_label_cut(instance: Instance, subset) -> bool:
    """True iff deleting every edge whose label is in ``subset`` disconnects s from t."""
    return instance.t not in reachable(instance, _members(instance, subset))


def validate_path(instance: Instance, path: Sequence[int]) -> tuple[int, ...]:
    path = tuple(path)
    if len(path) < 2 or path[0] != instance.s or path[-1] != instance.t:
        raise InstanceError("path must run from s to t")
    if len(set(path)) != len(path):
        raise InstanceError("path repeats a vertex")
    table = instance.edge_labels
    for u, v in zip(path, path[1:]):
        if (u, v) not in table:
            raise InstanceError(f"no edge {u}->{v}")
    return path


def path_edge_labels(instance: Instance, path: Sequence[int]) -> list[int]:
    """Labels of the path's edges in order, one per edge."""
    path = validate_path(instance, path)
    table = instance.edge_labels
    return [table[(u, v)] for u, v in zip(path, path[1:])]


def path_labels(instance: Instance, path: Sequence[int]) -> frozenset[int]:
    return frozenset(path_edge_labels(instance, path))


def iter_simple_paths(instance: Instance, limit: int = 10**6):
    """All simple s-t paths in lexicographic vertex order. Brute force; for tests."""
    adj, t = instance.adjacency, instance.t
    stack = [(instance.s,)]
    count = 0
    # Reverse push order keeps the pop order lexicographic.
    while stack:
        path = stack.pop()
        u = path[-1]
        if u == t:
            count += 1
            if count > limit:
                raise ResourceError("path_limit", f"more than {limit} simple paths")
            yield path
            continue
        on_path = set(path)
        for v, _ in reversed(adj[u]):
            if v not in on_path:
                stack.append(path + (v,))


# --- text format ---------------------------------------------------------


def emit(instance: Instance) -> str:
    lines = [
        f"{FORMAT_MAGIC} {FORMAT_VERSION}",
        f"{instance.vertex_count} {instance.edge_count} {instance.label_count} "
        f"{instance.s} {instance.t} {int(instance.directed)}",
    ]
    lines.extend(f"{u} {v} {lab}" for u, v, lab in instance.edges)
    return "\n".join(lines) + "\n"


def _ints(text: str, count: int, lineno: int) -> list[int]:
    parts = text.split(" ")
    if len(parts) != count:
        raise ParseError(f"expected {count} single-space separated fields, got {text!r}", lineno)
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise ParseError(f"non-integer field in {text!r}", lineno) from None
    if any(p != str(v) for p, v in zip(parts, values)):
        raise ParseError(f"non-canonical integer in {text!r}", lineno)
    return values


def parse(text: str) -> Instance:
    body = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.startswith("#"):
            continue
        if line == "":
            continue
        if line != line.rstrip():
            raise ParseError("trailing whitespace", lineno)
        body.append((lineno, line))
    if not body:
        raise ParseError("empty file", 1)

    lineno, header = body[0]
    parts = header.split(" ")
    if len(parts) != 2 or parts[0] != FORMAT_MAGIC:
        raise ParseError(f"expected '{FORMAT_MAGIC} {FORMAT_VERSION}' header", lineno)
    if parts[1] != str(FORMAT_VERSION):
        raise VersionError(f"unsupported format version {parts[1]!r}", lineno)
    if len(body) < 2:
        raise ParseError("missing size line", lineno + 1)

    lineno, sizes = body[1]
    n, m, q, s, t, directed = _ints(sizes, 6, lineno)
    if directed not in (0, 1):
        raise ParseError("directed flag must be 0 or 1", lineno)
    if len(body) - 2 != m:
        raise ParseError(f"header declares {m} edges, found {len(body) - 2}", body[-1][0])
    edges = []
    for lineno, line in body[2:]:
        u, v, lab = _ints(line, 3, lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex outside [0, {n})", lineno)
        if not 0 <= lab < q:
            raise ParseError(f"label {lab} outside [0, {q})", lineno)
        edges.append((u, v, lab))
    try:
        return Instance(n, tuple(edges), s, t, q, bool(directed))
    except InstanceError as exc:
        raise ParseError(str(exc), body[1][0]) from None


def roundtrip(instance: Instance) -> Instance:
    return parse(emit(instance))


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(emit(instance), encoding="ascii", newline="\n")


def read_instance(path) -> Instance:
    return parse(Path(path).read_text(encoding="ascii"))

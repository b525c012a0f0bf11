"""Gap instance families: the single-label path and the chain/shutter gadget graph.

Gadget labels are pairs ``(mu, j)`` with ``mu`` in ``1..k`` and ``j`` in ``1..d``;
they are stored as label ids ``(mu - 1) * d + (j - 1)``. Permutations are tuples
of 1-based values with ``sigma[j - 1] == sigma(j)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Instance, InstanceError, ResourceError

DEFAULT_EDGE_CAP = 10**7
METADATA_VERSION = 1


def label_id(mu: int, j: int, d: int) -> int:
    return (mu - 1) * d + (j - 1)


def label_pair(label: int, d: int) -> tuple[int, int]:
    return label // d + 1, label % d + 1


@dataclass(frozen=True)
class GadgetParams:
    k: int
    d: int
    h: int
    seed: int = 0
    epsilon: float | None = None
    delta: float | None = None
    beta: float | None = None
    c: int | None = None

    def __post_init__(self):
        if self.k < 2:
            raise InstanceError("k must be at least 2")
        if self.d < 1 or self.h < 1:
            raise InstanceError("d and h must be positive")
        if not 0 <= self.seed < 2**64:
            raise InstanceError("seed must fit in 64 unsigned bits")

    @property
    def shutter_count(self) -> int:
        return self.k * (self.k - 1) // 2

    @property
    def vertex_count(self) -> int:
        return 2 + self.shutter_count * self.h * (3 * self.d - 1)

    @property
    def edge_count(self) -> int:
        return 4 * self.d * self.h * self.shutter_count

    @property
    def label_count(self) -> int:
        return self.k * self.d


def derive_params(epsilon: float, k: int, seed: int = 0) -> GadgetParams:
    """Asymptotic parameter setting with the smallest admissible delta."""
    if not 0 < epsilon < 1 / 3:
        raise InstanceError("epsilon must lie in (0, 1/3)")
    delta = 1 / (3 * epsilon)
    beta = delta - 1 + epsilon / 2
    return GadgetParams(
        k=k,
        d=math.ceil(32 * k ** (2 * delta)),
        h=math.ceil(k**beta),
        seed=seed,
        epsilon=epsilon,
        delta=delta,
        beta=beta,
        c=math.ceil(k ** (1 + delta)),
    )


# --- permutations ----------------------------------------------------------


def chain_rng(seed: int, mu: int, nu: int, i: int) -> np.random.Generator:
    """Independent stream for chain ``i`` of shutter ``(mu, nu)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(mu, nu, i)))


def fisher_yates(rng: np.random.Generator, d: int) -> tuple[int, ...]:
    perm = list(range(1, d + 1))
    if d > 1:
        picks = rng.integers(0, np.arange(d, 1, -1))
        for pos, pick in zip(range(d - 1, 0, -1), picks):
            perm[pos], perm[pick] = perm[pick], perm[pos]
    return tuple(perm)


def _check_permutation(sigma: Sequence[int], d: int) -> tuple[int, ...]:
    sigma = tuple(int(x) for x in sigma)
    if len(sigma) != d or sorted(sigma) != list(range(1, d + 1)):
        raise InstanceError(f"{sigma} is not a permutation of 1..{d}")
    return sigma


@dataclass(frozen=True)
class PermutationTable:
    k: int
    d: int
    h: int
    seed: int
    perms: dict[tuple[int, int, int], tuple[int, ...]] = field(hash=False)

    @classmethod
    def draw(cls, params: GadgetParams) -> PermutationTable:
        perms = {}
        for mu, nu in combinations(range(1, params.k + 1), 2):
            for i in range(1, params.h + 1):
                perms[(mu, nu, i)] = fisher_yates(chain_rng(params.seed, mu, nu, i), params.d)
        return cls(params.k, params.d, params.h, params.seed, perms)

    @classmethod
    def identity(cls, k: int, d: int, h: int, seed: int = 0) -> PermutationTable:
        ident = tuple(range(1, d + 1))
        perms = {(mu, nu, i): ident for mu, nu in combinations(range(1, k + 1), 2) for i in range(1, h + 1)}
        return cls(k, d, h, seed, perms)

    def sigma(self, mu: int, nu: int, i: int) -> tuple[int, ...]:
        return self.perms[(mu, nu, i)]

    def to_json(self) -> str:
        record = {
            "format": "labelcut-gadget",
            "version": METADATA_VERSION,
            "k": self.k,
            "d": self.d,
            "h": self.h,
            "seed": self.seed,
            "permutations": [
                {"mu": mu, "nu": nu, "chain": i, "sigma": list(sig)}
                for (mu, nu, i), sig in sorted(self.perms.items())
            ],
        }
        return json.dumps(record, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> PermutationTable:
        record = json.loads(text)
        if record.get("format") != "labelcut-gadget" or record.get("version") != METADATA_VERSION:
            raise InstanceError("not a gadget metadata file of a supported version")
        k, d, h = record["k"], record["d"], record["h"]
        perms = {}
        for entry in record["permutations"]:
            perms[(entry["mu"], entry["nu"], entry["chain"])] = _check_permutation(entry["sigma"], d)
        expected = {(mu, nu, i) for mu, nu in combinations(range(1, k + 1), 2) for i in range(1, h + 1)}
        if set(perms) != expected:
            raise InstanceError("metadata permutations do not cover every chain exactly once")
        return cls(k, d, h, record["seed"], perms)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="ascii")

    @classmethod
    def read(cls, path) -> PermutationTable:
        return cls.from_json(Path(path).read_text(encoding="ascii"))


# --- fragments -------------------------------------------------------------


@dataclass(frozen=True)
class Fragment:
    """Subgraph with endpoints 0 (left) and 1 (right); labels are (mu, j) pairs."""

    vertex_count: int
    edges: tuple[tuple[int, int, tuple[int, int]], ...]
    left: int = 0
    right: int = 1


def _lay_chain(mu, nu, sigma, left, right, next_vertex, out):
    """Append one chain's edges to ``out``; return the next free vertex id."""
    d = len(sigma)
    a = left
    for j in range(1, d + 1):
        top, bottom = next_vertex, next_vertex + 1
        next_vertex += 2
        if j < d:
            b = next_vertex
            next_vertex += 1
        else:
            b = right
        top_label, bottom_label = (mu, j), (nu, sigma[j - 1])
        out.append((a, top, top_label))
        out.append((top, b, top_label))
        out.append((a, bottom, bottom_label))
        out.append((bottom, b, bottom_label))
        a = b
    return next_vertex


def make_chain(mu: int, nu: int, d: int, sigma: Sequence[int]) -> Fragment:
    if mu == nu:
        raise InstanceError("a chain needs two distinct elements")
    if d < 1:
        raise InstanceError("d must be positive")
    sigma = _check_permutation(sigma, d)
    edges: list = []
    n = _lay_chain(mu, nu, sigma, 0, 1, 2, edges)
    return Fragment(n, tuple(edges))


def make_shutter(mu: int, nu: int, d: int, h: int, permutations: Sequence[Sequence[int]]) -> Fragment:
    if mu == nu:
        raise InstanceError("a shutter needs two distinct elements")
    if h < 1 or d < 1:
        raise InstanceError("d and h must be positive")
    if len(permutations) != h:
        raise InstanceError(f"expected {h} permutations, got {len(permutations)}")
    edges: list = []
    n = 2
    for sigma in permutations:
        n = _lay_chain(mu, nu, _check_permutation(sigma, d), 0, 1, n, edges)
    return Fragment(n, tuple(edges))


def gadget_instance(table: PermutationTable, directed: bool = False) -> Instance:
    """Assemble the gadget graph for a given permutation table."""
    k, d, h = table.k, table.d, table.h
    edges: list = []
    n = 2
    for mu, nu in combinations(range(1, k + 1), 2):
        for i in range(1, h + 1):
            n = _lay_chain(mu, nu, table.sigma(mu, nu, i), 0, 1, n, edges)
    coded = tuple((u, v, label_id(mu, j, d)) for u, v, (mu, j) in edges)
    return Instance(n, coded, 0, 1, k * d, directed)


def make_gap_instance(
    params: GadgetParams, directed: bool = False, edge_cap: int = DEFAULT_EDGE_CAP
) -> tuple[Instance, PermutationTable]:
    if params.edge_count > edge_cap:
        raise ResourceError(
            "edge_cap", f"predicted {params.edge_count} edges exceeds the cap of {edge_cap}"
        )
    table = PermutationTable.draw(params)
    return gadget_instance(table, directed), table


def chain_vertices(k: int, d: int, h: int, mu: int, nu: int, i: int) -> tuple[int, ...]:
    """Internal vertex ids of one chain in the canonical gadget layout."""
    pair_index = sum(1 for _ in _pairs_before(k, mu, nu))
    start = 2 + (pair_index * h + (i - 1)) * (3 * d - 1)
    return tuple(range(start, start + 3 * d - 1))


def _pairs_before(k, mu, nu):
    for pair in combinations(range(1, k + 1), 2):
        if pair == (mu, nu):
            return
        yield pair
    raise InstanceError(f"no shutter ({mu}, {nu}) for k={k}")


def chain_path(k: int, d: int, h: int, mu: int, nu: int, i: int, sides: Sequence[str]) -> tuple[int, ...]:
    """s-t vertex sequence through chain ``i`` taking ``'top'`` or ``'bottom'`` per diamond."""
    inner = chain_vertices(k, d, h, mu, nu, i)
    path = [0]
    for j, side in enumerate(sides):
        base = 3 * j
        path.append(inner[base] if side == "top" else inner[base + 1])
        if j < d - 1:
            path.append(inner[base + 2])
    path.append(1)
    return tuple(path)


# --- plain random instances ------------------------------------------------


def make_path_instance(m: int, directed: bool = False) -> Instance:
    if m < 1:
        raise InstanceError("a path needs at least one edge")
    # s = 0, t = m, consecutive vertices.
    edges = tuple((i, i + 1, 0) for i in range(m))
    return Instance(m + 1, edges, 0, m, 1, directed)


def make_random_instance(n: int, m: int, q: int, seed: int, directed: bool = False) -> Instance:
    """Random simple graph on ``n`` vertices with ``m`` edges, labels uniform in ``[0, q)``; s=0, t=1."""
    if n < 2:
        raise InstanceError("need at least two vertices")
    rng = np.random.default_rng(seed)
    if directed:
        pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        pairs = list(combinations(range(n), 2))
    if m > len(pairs):
        raise InstanceError(f"at most {len(pairs)} edges fit on {n} vertices")
    chosen = rng.choice(len(pairs), size=m, replace=False)
    labels = rng.integers(0, q, size=m)
    edges = tuple((pairs[c][0], pairs[c][1], int(lab)) for c, lab in zip(chosen, labels))
    return Instance(n, edges, 0, 1, q, directed)

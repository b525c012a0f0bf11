"""Solution configurations and the separation-probability bounds of the gadget analysis.

Quantities that can be astronomically large or small are kept as natural logs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

import numpy as np

from .core import InstanceError, ResourceError
from .generators import derive_params, label_pair

# Use exact rationals while the binomials stay below 128 bits.
EXACT_LIMIT = 2**128
ENUMERATION_GUARD = 10**7
MC_CHUNK = 1 << 14


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    k: int
    d: int
    J: dict[int, frozenset[int]]
    c: int
    a: Fraction
    light: frozenset[int]
    F: frozenset[tuple[int, int]]

    @property
    def used_elements(self) -> frozenset[int]:
        """Elements with at least one label in the subset."""
        return frozenset(mu for mu, js in self.J.items() if js)

    @property
    def configuration_elements(self) -> frozenset[int]:
        return frozenset(mu for mu, _ in self.F)


def config_of(subset: Iterable[int], k: int, d: int) -> Configuration:
    """Decompose a label subset (label ids) into per-element index sets and its configuration."""
    J: dict[int, set[int]] = {mu: set() for mu in range(1, k + 1)}
    pairs = set()
    for label in subset:
        if not 0 <= label < k * d:
            raise InstanceError(f"label {label} does not decode into [k]x[d] for k={k}, d={d}")
        mu, j = label_pair(label, d)
        J[mu].add(j)
        pairs.add((mu, j))
    c = len(pairs)
    a = Fraction(c, k)
    light = frozenset(mu for mu in J if len(J[mu]) <= 4 * a)
    F = frozenset((mu, j) for mu, j in pairs if mu in light)
    return Configuration(k, d, {mu: frozenset(js) for mu, js in J.items()}, c, a, light, F)


def chain_sep_exact_prob(size_jmu: int, size_jnu: int, d: int):
    """Probability that a uniform permutation maps some of ``J_mu`` into ``J_nu``.

    Returns a Fraction when the binomials are small enough to be exact, else a float.
    """
    if not (0 <= size_jmu <= d and 0 <= size_jnu <= d):
        raise InstanceError("set sizes must lie in [0, d]")
    if size_jmu == 0 or size_jnu == 0:
        return Fraction(0)
    total = math.comb(d, size_jmu)
    if total < EXACT_LIMIT:
        return 1 - Fraction(math.comb(d - size_jnu, size_jmu), total)
    if size_jmu + size_jnu > d:
        return 1.0
    log_avoid = (
        _log_comb(d - size_jnu, size_jmu) - _log_comb(d, size_jmu)
    )
    return -math.expm1(log_avoid)


def _log_comb(n: int, r: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def chain_sep_prob_bound(a: float, d: float) -> float:
    """Upper bound 1 - (1 - 8a/d)^(4a) on one chain being separated."""
    a = float(a)
    if a < 0:
        raise DomainError("a must be nonnegative")
    if not d > 8 * a:
        raise DomainError(f"need d > 8a, got d={d}, a={a}")
    return -math.expm1(4 * a * math.log1p(-8 * a / d))


def monte_carlo_chain_sep(
    j_mu: Iterable[int], j_nu: Iterable[int], d: int, trials: int, seed: int, jobs: int = 1
) -> tuple[float, float]:
    """Empirical frequency that ``sigma(J_mu)`` meets ``J_nu``, with its binomial standard error.

    Trials are split into fixed-size chunks, each with its own spawned stream, so the
    result does not depend on ``jobs``.
    """
    j_mu = sorted(set(j_mu))
    mask = np.zeros(d + 1, dtype=bool)
    mask[list(set(j_nu))] = True
    if trials < 1:
        raise InstanceError("trials must be positive")
    if not j_mu or not mask.any():
        return 0.0, 0.0
    idx = np.array(j_mu) - 1

    sizes = [MC_CHUNK] * (trials // MC_CHUNK)
    if trials % MC_CHUNK:
        sizes.append(trials % MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(args):
        size, ss = args
        rng = np.random.default_rng(ss)
        base = np.broadcast_to(np.arange(1, d + 1), (size, d))
        perms = rng.permuted(base, axis=1)
        return int(mask[perms[:, idx]].any(axis=1).sum())

    work = list(zip(sizes, streams))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(run, work))
    else:
        hits = sum(map(run, work))
    p = hits / trials
    return p, math.sqrt(p * (1 - p) / trials)


def _prob_exponent(h: float, k: float) -> float:
    return 0.5 * h * (0.75 * k) * (0.75 * k - 1)


def good_config_log_prob_bound(a: float, d: float, h: float, k: float) -> float:
    """Log of the bound on a configuration separating s and t in all light shutters."""
    if k < 2 or h < 1:
        raise DomainError("need k >= 2 and h >= 1")
    return _prob_exponent(h, k) * math.log(chain_sep_prob_bound(a, d))


def log_config_count_bound(k: float, d: float, a: float) -> float:
    a = float(a)
    if a < 0 or d < 1 or k < 1:
        raise DomainError("need a >= 0, d >= 1, k >= 1")
    return k * math.log(4 * a + 1) + (4 * a + 1) * k * math.log(d)


def enumerate_configurations_exact(k: int, d: int, c: int, guard: int = ENUMERATION_GUARD) -> int:
    """Number of distinct configurations over all label subsets of size ``c``."""
    q = k * d
    if not 0 <= c <= q:
        raise InstanceError(f"c must lie in [0, {q}]")
    if math.comb(q, c) > guard:
        raise ResourceError("enumeration_guard", f"C({q}, {c}) subsets exceed {guard}")
    seen = set()
    for subset in combinations(range(q), c):
        seen.add(config_of(subset, k, d).F)
    return len(seen)


def binomial_tail_holds(d: int, r: int) -> bool:
    """Whether C(d,1)+...+C(d,r) <= (r+1)/2 * C(d,r+1), in exact integers."""
    lhs = sum(math.comb(d, i) for i in range(1, r + 1))
    return 2 * lhs <= (r + 1) * math.comb(d, r + 1)


def binomial_tail_pairs(d_max: int, only_d_above_8a: bool = True) -> list[tuple[int, int]]:
    """(d, r) pairs with r = 4a >= 1 and r + 1 <= d <= d_max.

    With ``only_d_above_8a`` only pairs with d > 8a, i.e. d > 2r, are kept; the
    inequality fails for most pairs with d <= 2r.
    """
    return [
        (d, r)
        for d in range(2, d_max + 1)
        for r in range(1, d)
        if d > 2 * r or not only_d_above_8a
    ]


def eval_log_z(k: float, d: float, h: float, a: float) -> float:
    return log_config_count_bound(k, d, a) + good_config_log_prob_bound(a, d, h, k)


def check_exponent(delta: float, beta: float, epsilon: float) -> bool:
    if not 0 < epsilon < 1 / 3:
        raise DomainError("epsilon must lie in (0, 1/3)")
    if delta <= 0 or beta <= 0:
        raise DomainError("delta and beta must be positive")
    return delta / (2 * delta + beta + 2) > 1 / 3 - epsilon


def log_z_for(epsilon: float, k: int) -> float:
    p = derive_params(epsilon, k)
    return eval_log_z(k, p.d, p.h, Fraction(p.c, k))


def z_crossover(epsilon: float, k_max: int = 2**400) -> int | None:
    """First k at which log z is negative: doubling scan, then bisection.

    Assumes log z stays negative past its first sign change, which holds once the
    h-driven term dominates. Returns None if no crossover below ``k_max``.
    """
    lo, hi = 2, 2
    while log_z_for(epsilon, hi) >= 0:
        lo, hi = hi, hi * 2
        if hi > k_max:
            return None
    if hi == 2:
        return 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_z_for(epsilon, mid) < 0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class BoundReport:
    name: str
    log_value: float | None = None
    estimate: float | None = None
    stderr: float | None = None
    passed: bool | None = None
    detail: str = ""

    def record(self) -> dict:
        out = {"quantity": self.name}
        for key in ("log_value", "estimate", "stderr", "passed"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.detail:
            out["detail"] = self.detail
        return out

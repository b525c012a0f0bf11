import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from labelcut.analysis import (
    BoundReport,
    DomainError,
    binomial_tail_holds,
    binomial_tail_pairs,
    chain_sep_exact_prob,
    chain_sep_prob_bound,
    check_exponent,
    config_of,
    enumerate_configurations_exact,
    eval_log_z,
    good_config_log_prob_bound,
    log_config_count_bound,
    log_z_for,
    monte_carlo_chain_sep,
    z_crossover,
)
from labelcut.core import InstanceError, ResourceError
from labelcut.generators import label_id


def ids(pairs, d):
    return [label_id(mu, j, d) for mu, j in pairs]


# --- config_of ----------------------------------------------------------------


def test_config_of_small_example():
    cfg = config_of(ids([(1, 1), (1, 2), (2, 1)], 4), k=2, d=4)
    assert cfg.c == 3 and cfg.a == Fraction(3, 2)
    assert cfg.J == {1: frozenset({1, 2}), 2: frozenset({1})}
    assert cfg.light == {1, 2}
    assert cfg.F == {(1, 1), (1, 2), (2, 1)}


def test_config_of_empty():
    cfg = config_of([], k=3, d=4)
    assert cfg.c == 0 and cfg.a == 0
    assert cfg.light == {1, 2, 3} and cfg.F == frozenset()


def test_config_of_all_labels_of_one_element():
    cfg = config_of(ids([(1, j) for j in range(1, 9)], 8), k=2, d=8)
    assert cfg.a == 4
    assert cfg.light == {1, 2}


def test_config_of_heavy_element_dropped():
    # k=8, c=3, a=3/8: element 1 holds 2 > 4a labels and is heavy
    cfg = config_of(ids([(1, 1), (1, 2), (3, 4)], 8), k=8, d=8)
    assert cfg.a == Fraction(3, 8)
    assert 1 not in cfg.light and 3 in cfg.light
    assert cfg.F == {(3, 4)}


def test_config_of_rejects_bad_label():
    with pytest.raises(InstanceError):
        config_of([8], k=2, d=4)


def test_config_of_invariants_random():
    rng = np.random.default_rng(17)
    for _ in range(10_000):
        k = int(rng.integers(1, 7))
        d = int(rng.integers(1, 9))
        c = int(rng.integers(0, k * d + 1))
        subset = rng.choice(k * d, size=c, replace=False).tolist()
        cfg = config_of(subset, k, d)
        assert sum(len(js) for js in cfg.J.values()) == cfg.c == c
        assert len(cfg.light) >= 3 * k / 4
        for mu in cfg.configuration_elements:
            assert sum(1 for nu, _ in cfg.F if nu == mu) <= 4 * cfg.a
        assert cfg.F <= {(mu, j) for mu, js in cfg.J.items() for j in js}


# --- separation probabilities ---------------------------------------------------


def brute_sep(size_mu, size_nu, d):
    j_mu = range(1, size_mu + 1)
    j_nu = set(range(1, size_nu + 1))
    perms = list(permutations(range(1, d + 1)))
    hits = sum(1 for p in perms if any(p[j - 1] in j_nu for j in j_mu))
    return Fraction(hits, len(perms))


def test_exact_prob_examples():
    assert chain_sep_exact_prob(1, 1, 2) == Fraction(1, 2)
    assert chain_sep_exact_prob(2, 1, 3) == Fraction(2, 3)
    assert chain_sep_exact_prob(0, 3, 5) == 0
    assert chain_sep_exact_prob(3, 0, 5) == 0


@pytest.mark.parametrize("d", range(1, 7))
def test_exact_prob_matches_permutation_count(d):
    for a in range(d + 1):
        for b in range(d + 1):
            assert chain_sep_exact_prob(a, b, d) == brute_sep(a, b, d)


def test_exact_prob_large_d_uses_log_gamma():
    value = chain_sep_exact_prob(40, 3, 1000)
    assert isinstance(value, float)
    exact = 1 - Fraction(math.comb(997, 40), math.comb(1000, 40))
    assert value == pytest.approx(float(exact), rel=1e-12)


def test_exact_prob_rejects_oversize():
    with pytest.raises(InstanceError):
        chain_sep_exact_prob(3, 1, 2)


def test_bound_examples():
    assert chain_sep_prob_bound(1, 32) == pytest.approx(0.68359375, rel=1e-14)
    assert chain_sep_prob_bound(2, 128) == pytest.approx(0.65639, abs=1e-5)


@pytest.mark.parametrize("a", [0.25, 0.5, 1, 2, 3, 8])
def test_bound_at_d_32a_squared_at_most_three_quarters(a):
    assert chain_sep_prob_bound(a, 32 * a * a if 32 * a * a > 8 * a else 8 * a + 1) <= 0.75


@pytest.mark.parametrize("a,d", [(1, 8), (1, 7), (2, 16)])
def test_bound_domain(a, d):
    with pytest.raises(DomainError):
        chain_sep_prob_bound(a, d)


@pytest.mark.parametrize("a", [0.5, 1, 2, 4])
def test_dominance_grid(a):
    r = math.floor(4 * a)
    for d in range(math.ceil(16 * a) + 1, 64 * math.ceil(a) + 1):
        bound = chain_sep_prob_bound(a, d)
        for x in range(r + 1):
            for y in range(r + 1):
                assert chain_sep_exact_prob(x, y, d) <= bound


# --- Monte Carlo ----------------------------------------------------------------


def test_monte_carlo_examples():
    p, se = monte_carlo_chain_sep({1}, {1}, 2, 100_000, seed=1)
    assert abs(p - 0.5) <= 0.005 and se > 0
    p, _ = monte_carlo_chain_sep({1, 2}, {1}, 3, 100_000, seed=2)
    assert abs(p - 2 / 3) <= 0.005
    assert monte_carlo_chain_sep(set(), {1}, 4, 1000, seed=3) == (0.0, 0.0)


def test_monte_carlo_independent_of_jobs():
    a = monte_carlo_chain_sep({1, 2, 3}, {4, 5}, 8, 50_000, seed=4, jobs=1)
    b = monte_carlo_chain_sep({1, 2, 3}, {4, 5}, 8, 50_000, seed=4, jobs=4)
    assert a == b


def test_monte_carlo_rejects_zero_trials():
    with pytest.raises(InstanceError):
        monte_carlo_chain_sep({1}, {1}, 2, 0, seed=0)


def test_monte_carlo_consistency_repeated():
    exact = float(chain_sep_exact_prob(2, 1, 3))
    inside = 0
    for seed in range(1000):
        p, se = monte_carlo_chain_sep({1, 2}, {1}, 3, 10_000, seed=seed)
        inside += abs(p - exact) <= 4 * se
    assert inside >= 990


# --- log-space bounds ---------------------------------------------------------


def test_good_config_bound_example():
    value = good_config_log_prob_bound(2, 128, 4, 4)
    assert value == pytest.approx(12 * math.log(1 - 0.875**8), rel=1e-12)
    assert value == pytest.approx(-5.05198, abs=1e-5)


def test_good_config_exponent_small():
    value = good_config_log_prob_bound(1, 32, 1, 2)
    assert value == pytest.approx(0.375 * math.log(0.68359375), rel=1e-12)


def test_good_config_rejects_h0():
    with pytest.raises(DomainError):
        good_config_log_prob_bound(1, 32, 0, 2)


def test_good_config_nonpositive():
    rng = np.random.default_rng(5)
    for _ in range(500):
        a = float(rng.uniform(0.1, 5))
        d = 8 * a + float(rng.uniform(0.01, 500))
        assert good_config_log_prob_bound(a, d, int(rng.integers(1, 50)), int(rng.integers(2, 50))) <= 0


def test_count_bound_examples():
    assert log_config_count_bound(4, 128, 2) == pytest.approx(4 * math.log(9) + 36 * math.log(128))
    assert log_config_count_bound(4, 128, 2) == pytest.approx(183.462, abs=1e-3)
    assert log_config_count_bound(1, 2, 1) == pytest.approx(math.log(160))
    assert log_config_count_bound(3, 7, 0) == pytest.approx(3 * math.log(7))


def test_enumeration_examples():
    assert enumerate_configurations_exact(1, 2, 1) == 2
    assert enumerate_configurations_exact(1, 2, 0) == 1
    assert enumerate_configurations_exact(2, 2, 2) <= math.exp(log_config_count_bound(2, 2, 1))


def test_enumeration_guard():
    with pytest.raises(ResourceError):
        enumerate_configurations_exact(4, 10, 10, guard=1000)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_counting_dominance(k, d):
    for c in range(k * d + 1):
        count = enumerate_configurations_exact(k, d, c)
        assert math.log(count) <= log_config_count_bound(k, d, c / k) + 1e-12


def test_binomial_tail_in_domain():
    pairs = binomial_tail_pairs(64)
    assert pairs and all(d > 2 * r for d, r in pairs)
    assert all(binomial_tail_holds(d, r) for d, r in pairs)


def test_binomial_tail_fails_only_below_domain():
    everything = binomial_tail_pairs(64, only_d_above_8a=False)
    failures = [(d, r) for d, r in everything if not binomial_tail_holds(d, r)]
    assert failures and all(d <= 2 * r for d, r in failures)
    assert len(failures) == 893
    assert (3, 2) in failures and (2, 1) in failures


def test_eval_log_z_example():
    assert eval_log_z(4, 128, 4, 2) == pytest.approx(178.41, abs=0.01)


def test_eval_log_z_decreasing_in_h():
    for h in (1, 2, 4, 8, 100):
        assert eval_log_z(4, 128, 2 * h, 2) < eval_log_z(4, 128, h, 2)


@pytest.mark.parametrize("h", [1, 4])
def test_eval_log_z_increasing_in_d_small_h(h):
    values = [eval_log_z(4, d, h, 2) for d in range(17, 2000)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_eval_log_z_not_monotone_in_d_for_large_h():
    values = [eval_log_z(4, d, 100, 2) for d in range(17, 2000)]
    assert any(b < a for a, b in zip(values, values[1:]))


def test_eval_log_z_domain():
    with pytest.raises(DomainError):
        eval_log_z(4, 16, 4, 2)


def test_check_exponent_examples():
    assert check_exponent(10 / 3, 2.38333, 0.1)
    assert not check_exponent(1, 100, 0.01)
    for eps in (1 / 3, 0.5, 0, -1):
        with pytest.raises(DomainError):
            check_exponent(1, 1, eps)


def test_z_crossover_at_032():
    k = z_crossover(0.32)
    assert k == 11562991124757338914816
    assert log_z_for(0.32, k) < 0 <= log_z_for(0.32, k - 1)


def test_bound_report_record():
    rec = BoundReport("z", log_value=1.5, passed=True).record()
    assert rec == {"quantity": "z", "log_value": 1.5, "passed": True}

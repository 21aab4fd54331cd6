import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdtlab.automaton import (
    RuleTable,
    Verifier,
    builtin_rule,
    dump_rule,
    identity_rule,
    increment_rule,
    intermediate_product,
    iterate,
    leftsum_rule,
    parse_rule,
    random_rule,
    step,
    verifier,
)

words = st.lists(st.integers(0, 3), min_size=1, max_size=8).map(tuple)


def naive_step(rule, w):
    """Letter-by-letter reference: look up each periodic neighbourhood in the table."""
    n, R, k = len(w), rule.radius, rule.k
    out = []
    for i in range(n):
        code = 0
        for o in range(-R, R + 1):
            code = code * k + w[(i + o) % n]
        out.append(int(rule.table[code]))
    return tuple(out)


def test_step_examples():
    assert step(identity_rule(), "0312") == (0, 3, 1, 2)
    assert step(increment_rule(), "013") == (1, 2, 0)
    assert step(leftsum_rule(), "0000") == (0, 0, 0, 0)
    assert step(leftsum_rule(), "1000") == (1, 1, 0, 0)


def test_step_rejects_bad_letters():
    with pytest.raises(ValueError):
        step(identity_rule(), "05")
    with pytest.raises(ValueError):
        step(identity_rule(), "")


@settings(max_examples=200)
@given(words, st.integers(0, 50), st.integers(0, 2))
def test_step_matches_naive_lookup(w, seed, radius):
    rule = random_rule(seed, radius)
    assert step(rule, w) == naive_step(rule, w)


def test_iterate_examples():
    rule = leftsum_rule()
    assert iterate(rule, "0123", 0) == (0, 1, 2, 3)
    assert iterate(increment_rule(), "00", 4) == (0, 0)
    with pytest.raises(ValueError):
        iterate(rule, "01", -1)


@given(words, st.integers(0, 6), st.integers(0, 6), st.integers(0, 20))
def test_iterate_composition_law(w, a, b, seed):
    rule = random_rule(seed)
    assert iterate(rule, w, a + b) == iterate(rule, iterate(rule, w, a), b)


@settings(max_examples=200)
@given(words, st.integers(0, 100), st.integers(0, 2), st.integers(0, 7))
def test_shift_equivariance(w, seed, radius, shift):
    rule = random_rule(seed, radius)
    s = shift % len(w)

    def rot(v):
        return v[s:] + v[:s]

    assert step(rule, rot(w)) == rot(step(rule, w))


def test_step_is_deterministic():
    rule = random_rule(3, 2)
    w = (0, 1, 2, 3, 3, 2, 1)
    assert len({step(rule, w) for _ in range(10)}) == 1


def test_intermediate_product_examples():
    p = intermediate_product(identity_rule(), 3, 2)
    assert all(a == b for a, b in p.pairs())
    p = intermediate_product(increment_rule(), 2, 1)
    assert set(p.pairs()) == {((0,), (2,)), ((1,), (3,)), ((2,), (0,)), ((3,), (1,))}
    for n in range(1, 5):
        assert len(intermediate_product(leftsum_rule(), 1, n)) == 4**n


@pytest.mark.parametrize("name", ["identity", "increment", "leftsum", "random"])
@pytest.mark.parametrize("n", [1, 3, 6])
def test_intermediate_product_replays(name, n):
    p = intermediate_product(builtin_rule(name, seed=11), 3, n)
    assert p.replay()


def test_intermediate_product_guard(monkeypatch):
    with pytest.raises(ValueError):
        intermediate_product(identity_rule(), 1, 11)
    monkeypatch.setenv("RDTLAB_GUARD_N", "3")
    with pytest.raises(ValueError):
        intermediate_product(identity_rule(), 1, 4)


def test_verifier_answers_and_counts():
    v = verifier(intermediate_product(identity_rule(), 1, 2))
    assert v("01", "01")
    assert not v("01", "02")
    assert v.queries == 2
    v = Verifier(intermediate_product(increment_rule(), 2, 1))
    assert v("0", "2")
    assert v.queries == 1


def test_verifier_phase_oracle_counts_one_query():
    v = Verifier(intermediate_product(increment_rule(), 1, 2))
    x = np.full(16, 0.25)
    v.flip_phase(x, "00")
    assert v.queries == 1
    assert np.flatnonzero(x < 0).tolist() == [5]  # "11"


@pytest.mark.parametrize("rule", [identity_rule(), increment_rule(), leftsum_rule(), random_rule(5, 2)])
def test_rule_file_round_trip(rule):
    text = dump_rule(rule)
    assert text.splitlines()[0] == f"radius={rule.radius}"
    assert len(text.splitlines()) == 1 + 4 ** (2 * rule.radius + 1)
    assert parse_rule(text) == rule


def test_rule_file_sample_line():
    lines = dump_rule(leftsum_rule()).splitlines()
    assert "123 -> 3" in lines


@pytest.mark.parametrize("text", [
    "0 -> 1\n",
    "radius=0\n0 -> 1\n1 -> 2\n2 -> 3\n",
    "radius=0\n0 -> 1\n1 -> 2\n2 -> 3\n3 -> 4\n",
    "radius=0\n0 -> 1\n0 -> 2\n2 -> 3\n3 -> 0\n",
    "radius=0\n00 -> 1\n",
])
def test_rule_file_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_rule(text)


def test_rule_table_validates_outputs():
    with pytest.raises(ValueError):
        RuleTable(0, np.array([0, 1, 2, 4]))
    with pytest.raises(ValueError):
        RuleTable(1, np.zeros(4, dtype=int))
    with pytest.raises(ValueError):
        builtin_rule("rule110")

import numpy as np
import pytest

from rdtlab.automaton import builtin_rule, identity_rule, increment_rule, iterate, leftsum_rule
from rdtlab.pipeline import (
    PipelineConfig,
    advance,
    cost_model,
    inject_target,
    logical_cost,
    optimal_t1,
    prepare_x0,
    run_pipeline,
)
from rdtlab.state import all_words, word_to_index


def test_prepare_x0_identity_rule():
    p = prepare_x0(PipelineConfig(2, identity_rule(), "00", 4, 2))
    assert np.array_equal(p.last, np.arange(16))
    assert p.first_register == (0, 0)


def test_prepare_x0_increment_rule():
    p = prepare_x0(PipelineConfig(1, increment_rule(), "0", 4, 2))
    assert p.last.tolist() == [2, 3, 0, 1]
    assert p.amplitudes.tolist() == [0.5] * 4
    assert np.linalg.norm(p.amplitudes) == 1.0


def test_last_register_matches_replay():
    rule = builtin_rule("random", seed=4)
    config = PipelineConfig(4, rule, "0123", 6, 2)
    p = prepare_x0(config)
    for w in all_words(4)[::17]:
        assert p.last_register(w) == iterate(rule, w, config.T2)


def test_inject_target():
    p = prepare_x0(PipelineConfig(2, identity_rule(), "31", 2, 1))
    q = inject_target(p, "31")
    assert q.first_register == (3, 1)
    assert np.array_equal(q.amplitudes, p.amplitudes)
    with pytest.raises(ValueError):
        inject_target(q, "00")


def test_advance_examples():
    p = prepare_x0(PipelineConfig(2, identity_rule(), "00", 1, 1))
    assert advance(inject_target(p, "21")) == (2, 1)
    p = prepare_x0(PipelineConfig(2, increment_rule(), "00", 1, 1))
    assert advance(inject_target(p, "00")) == (1, 1)
    with pytest.raises(ValueError):
        advance(p)


@pytest.mark.parametrize("seed", range(10))
def test_advance_equals_classical_replay(seed):
    rng = np.random.default_rng(seed)
    rule = builtin_rule("random", seed=seed)
    n, T2 = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    w = tuple(int(a) for a in rng.integers(0, 4, n))
    p = prepare_x0(PipelineConfig(n, rule, w, T2, 1))
    assert advance(inject_target(p, w)) == iterate(rule, w, T2)


def test_run_pipeline_examples():
    assert run_pipeline(PipelineConfig(3, identity_rule(), "132", 6, 3)).output == (1, 3, 2)
    assert run_pipeline(PipelineConfig(2, increment_rule(), "00", 4, 2)).output == (0, 0)
    rng = np.random.default_rng(1)
    x0 = tuple(int(a) for a in rng.integers(0, 4, 3))
    report = run_pipeline(PipelineConfig(3, leftsum_rule(), x0, 6, 3))
    assert report.output == iterate(leftsum_rule(), x0, 6)
    assert report.certain


def test_rounds_track_segments():
    rule = builtin_rule("random", seed=9)
    config = PipelineConfig(3, rule, "201", 12, 4)
    report = run_pipeline(config)
    for i, r in enumerate(report.rounds, start=1):
        assert r.injected == iterate(rule, config.x0, (i - 1) * config.T2)
        assert r.returned == iterate(rule, config.x0, i * config.T2)
        assert abs(r.amplitude - 1.0) < 1e-8
        assert r.max_residual < 1e-8


@pytest.mark.parametrize("kwargs", [
    dict(n=2, x0="0", T=4, T1=2),
    dict(n=2, x0="00", T=5, T1=2),
    dict(n=2, x0="00", T=0, T1=1),
    dict(n=11, x0="0" * 11, T=1, T1=1),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PipelineConfig(rule=identity_rule(), **kwargs)


def test_optimal_t1_examples():
    assert optimal_t1(10000, 10, 2, 1) == 10
    assert optimal_t1(1, 7) == 1
    with pytest.raises(ValueError):
        optimal_t1(10, 0)


@pytest.mark.parametrize("T", [1, 2, 7, 50, 333, 1000, 10**4, 10**6])
@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
@pytest.mark.parametrize("a,b", [(1, 1), (2, 1), (1, 3), (5, 0.5)])
def test_optimal_t1_is_local_minimum(T, n, a, b):
    t1 = optimal_t1(T, n, a, b)
    assert 1 <= t1 <= T
    here = cost_model(T, t1, n, a, b)
    for other in (t1 - 1, t1 + 1):
        if 1 <= other <= T:
            assert here <= cost_model(T, other, n, a, b)


def test_logical_cost_is_convex_around_optimum():
    T, n = 3600, 3
    costs = [logical_cost(T, t1, n) for t1 in (1, 2, 4, 5, 10, 20, 36, 100, 400)]
    best = int(np.argmin(costs))
    assert all(np.diff(costs[: best + 1]) <= 0) and all(np.diff(costs[best:]) >= 0)

import numpy as np
import pytest

from treeplication.combinatorics import replication_decode_prob, uniform_decode_prob
from treeplication.cost import expected_cost
from treeplication.errors import InvalidInput
from treeplication.nonuniform import SelectionDistribution, counts_to_probs, decode_prob_Q
from treeplication.optimizer import optimal_distribution
from treeplication.simulator import (
    BirthDeathConfig,
    SamplingModel,
    birth_death_many,
    birth_death_run,
    mc_comm_cost,
    mc_decodability,
    mc_mds_cost,
    sample_multiset,
)
from treeplication.tree import TreeShape


def test_sampling_trivial_cases():
    rng = np.random.default_rng(0)
    assert sample_multiset(SamplingModel.layers([0, 0, 0]), rng).n == 0
    m = sample_multiset(SamplingModel.uniform(1, 5), rng)
    assert m.to_layers() == [[5]]
    m = sample_multiset(SamplingModel.bernoulli([1.0, 1.0, 1.0]), rng)
    assert m.n == 7 and (m.weights[1:] == 1).all()


def test_layer_draw_counts_per_layer():
    m = sample_multiset(SamplingModel.layers([5, 3, 2]), np.random.default_rng(1))
    assert [sum(row) for row in m.to_layers()] == [5, 3, 2]


def test_model_validation():
    with pytest.raises(InvalidInput):
        SamplingModel("nope", 3)
    with pytest.raises(InvalidInput):
        SamplingModel.bernoulli([0.5, 1.5])
    with pytest.raises(InvalidInput):
        SamplingModel(SamplingModel.layers([1]).mode, 2, counts=(1,))


def test_uniform_decodability_agrees_with_exact():
    stats = mc_decodability(SamplingModel.uniform(4, 26), 100_000, seed=4)
    assert abs(stats.mean - uniform_decode_prob(4, 26)) < 3 * stats.stderr
    assert stats.mean == pytest.approx(0.9, abs=0.01)


def test_bernoulli_half_d2():
    stats = mc_decodability(SamplingModel.bernoulli([0.5, 0.5]), 40_000, seed=2)
    assert abs(stats.mean - 0.5) < 3 * stats.stderr


def test_replication_baseline_by_leaf_only_draws():
    # replication = uniform draws restricted to the leaf layer
    stats = mc_decodability(SamplingModel.layers([33, 0, 0, 0]), 60_000, seed=9)
    assert abs(stats.mean - replication_decode_prob(8, 33)) < 3 * stats.stderr
    assert replication_decode_prob(8, 33) >= 0.9


def test_bernoulli_cost_matches_analytic():
    p = counts_to_probs(optimal_distribution(4, 24).best.counts)
    stats = mc_comm_cost(SamplingModel.bernoulli(p), 200_000, seed=5)
    assert abs(stats.mean - expected_cost(p)) < 3 * stats.stderr


def test_layer_vs_bernoulli_gap_is_measurable():
    counts = optimal_distribution(4, 24).best.counts
    layer = mc_decodability(SamplingModel.layers(counts), 50_000, seed=1)
    bern = mc_decodability(SamplingModel.bernoulli(counts_to_probs(counts)), 50_000, seed=1)
    assert abs(bern.mean - decode_prob_Q(counts_to_probs(counts))) < 3 * bern.stderr
    assert layer.mean > bern.mean  # exact draws decode more often than the i.i.d. model


def test_full_tree_costs_nothing():
    stats = mc_comm_cost(SamplingModel.bernoulli([1.0] * 4), 1000, seed=0)
    assert stats.mean == 0.0 and stats.successes == 1000


def test_per_leaf_cost_scales_to_total():
    model = SamplingModel.bernoulli(counts_to_probs((20, 2, 1, 1)))
    total = mc_comm_cost(model, 100_000, seed=3)
    leaf = mc_comm_cost(model, 100_000, seed=3, per_leaf=True)
    assert total.mean == pytest.approx(8 * leaf.mean, rel=0.08)


def test_mds_examples():
    assert mc_mds_cost(8, 24, 100_000, seed=1).mean == pytest.approx(10.64, rel=0.05)
    assert mc_mds_cost(16, 48, 100_000, seed=1).mean == pytest.approx(49.62, rel=0.05)
    assert mc_mds_cost(2, 200, 1000, seed=1).mean == 0.0


def test_stderr_definition():
    stats = mc_decodability(SamplingModel.uniform(3, 5), 5000, seed=0)
    x = stats.outcomes.astype(float)
    assert stats.stderr == pytest.approx(x.std(ddof=1) / np.sqrt(len(x)))


def test_seed_determinism_and_thread_independence(monkeypatch):
    model = SamplingModel.layers((20, 2, 1, 1))
    monkeypatch.setenv("TRPL_THREADS", "1")
    a = mc_comm_cost(model, 30_000, seed=7)
    monkeypatch.setenv("TRPL_THREADS", "4")
    b = mc_comm_cost(model, 30_000, seed=7)
    assert np.array_equal(a.values, b.values) and a.mean == b.mean
    c = mc_comm_cost(model, 30_000, seed=8)
    assert not np.array_equal(a.values, c.values)


def test_birth_death_determinism(monkeypatch):
    cfg = BirthDeathConfig(8, seed=3)
    assert birth_death_run(cfg, 5) == birth_death_run(cfg, 5)
    monkeypatch.setenv("TRPL_THREADS", "1")
    a = birth_death_many(cfg, 50)
    monkeypatch.setenv("TRPL_THREADS", "3")
    b = birth_death_many(cfg, 50)
    assert np.array_equal(a.values, b.values)


def test_pure_death_from_minimal_set():
    cfg = BirthDeathConfig(4, code="replication", augmentation="replicate",
                           initial_n=4, birth_prob=0.0)
    lengths = [birth_death_run(cfg, r).generations for r in range(50)]
    assert max(lengths) <= 3


def test_pure_birth_never_loses():
    cfg = BirthDeathConfig(8, birth_prob=1.0, max_generations=2000)
    res = birth_death_run(cfg, 0)
    assert res.capped and res.generations == 2000


def test_config_validation():
    with pytest.raises(InvalidInput):
        BirthDeathConfig(8, code="replication", augmentation="sibling")
    with pytest.raises(InvalidInput):
        BirthDeathConfig(6)
    assert BirthDeathConfig(8).initial_counts() == (20, 2, 1, 1)
    cfg = BirthDeathConfig(8, initial=SelectionDistribution((16, 4, 2, 2)))
    assert cfg.resolved_n() == 24


def test_birth_death_ordering_k8():
    means = []
    for code, aug in (("treeplication", "sibling"), ("treeplication", "replicate"),
                      ("replication", "replicate")):
        means.append(birth_death_many(BirthDeathConfig(8, code, aug, seed=1), 1000).mean)
    assert means[0] > means[1] > means[2]


def test_layer_draw_matches_shape():
    model = SamplingModel.layers((3, 1))
    assert model.shape == TreeShape(2)

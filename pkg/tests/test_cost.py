import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from table_oracles import oracle_A, oracle_F, oracle_P
from treeplication.cost import cost_tables, expected_cost
from treeplication.errors import DegenerateModel
from treeplication.nonuniform import decode_prob_Q
from treeplication.optimizer import optimal_distribution

probs = st.floats(0.0, 1.0, allow_nan=False)


def test_two_layer_half():
    t = cost_tables([0.5, 0.5])
    assert t.F[2, 1] == pytest.approx(3 / 8)
    assert t.F[2, 2] == pytest.approx(1 / 8)
    assert t.F[2].sum() == pytest.approx(0.5)
    assert list(t.P[2]) == pytest.approx([3 / 8, 1 / 8])
    assert t.expected_cost() == pytest.approx(0.5)


def test_three_layer_frozen_values():
    # exact rationals from exhaustive enumeration of the 128 patterns
    t = cost_tables([0.5, 0.5, 0.5])
    assert t.A[3, 2] == pytest.approx(3 / 16)
    assert list(t.P[3]) == pytest.approx([17 / 64, 5 / 64, 3 / 128, 1 / 128], abs=1e-15)
    t = cost_tables([1 / 3, 1 / 2, 3 / 4])
    assert list(t.P[3]) == pytest.approx([5 / 36, 1 / 18, 5 / 216, 1 / 216], abs=1e-15)


def test_base_cases():
    t = cost_tables([0.3, 0.8])
    assert t.A[2, 1] == pytest.approx(0.3) and t.A[2, 0] == 0.0
    assert t.P[1, 0] == pytest.approx(0.3) and t.P[1, 1:].sum() == 0.0


def test_all_present():
    for d in range(1, 7):
        t = cost_tables([1.0] * d)
        assert t.P[d, 0] == pytest.approx(1.0)
        assert t.P[d, 1:].sum() == 0.0
        assert t.expected_cost() == 0.0
        for i in range(1, d + 1):
            assert t.F[i, 1] == pytest.approx(1.0)
            assert t.F[i, 2:].sum() == 0.0


def test_degenerate():
    with pytest.raises(DegenerateModel):
        expected_cost([0.0, 0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(st.lists(probs, min_size=3, max_size=3))
def test_tables_match_enumeration_d3(p):
    t = cost_tables(p)
    assert list(t.P[3]) == pytest.approx(oracle_P(3, p), abs=1e-12)
    assert list(t.P[2, :2]) == pytest.approx(oracle_P(2, p[:2]), abs=1e-12)
    for i in (1, 2, 3):
        ref = oracle_F(i, p)
        assert list(t.F[i, : len(ref)]) == pytest.approx(ref, abs=1e-12)
    for i in (2, 3):
        assert list(t.A[i]) == pytest.approx(oracle_A(i, p, 4), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(probs, min_size=1, max_size=6))
def test_normalisation(p):
    t = cost_tables(p)
    d = len(p)
    assert t.P[d].sum() == pytest.approx(decode_prob_Q(p), abs=1e-12)
    assert (t.P >= -1e-15).all() and (t.P <= 1 + 1e-12).all()
    for i in range(1, d + 1):
        assert t.F[i].sum() == pytest.approx(t.Q[i], abs=1e-12)


def test_table4_values():
    for k, ref in zip((4, 8, 16, 32), (0.357, 1.143, 2.830, 6.524)):
        best = optimal_distribution(k.bit_length(), 3 * k).best
        assert abs(expected_cost(best.probs) - ref) <= 0.01


def test_support_bound():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p = rng.random(6)
        t = cost_tables(p)
        assert t.P.shape[1] == t.k  # entries only for N <= k - 1

"""Acceptance criteria, one test each, printing a single PASS/FAIL line.

Tolerances are the published ones; nothing here is loosened to make a
cell pass. Known failing cells are analysed in the project's decision log.
"""

import numpy as np
import pytest

from table_oracles import oracle_A, oracle_F, oracle_P
from treeplication import _kernels, reports
from treeplication.combinatorics import count_decodable
from treeplication.cost import cost_tables
from treeplication.health import all_covers, cover_survival_fraction, decodable_via_cover, principal_cover
from treeplication.nonuniform import decode_prob_Q
from treeplication.optimizer import brute_force_optimum, optimal_distribution
from treeplication.oracles import all_subsets, min_cost_bruteforce, rank_oracle_decodable
from treeplication.recovery import recovery_cost
from treeplication.tree import Multiset, TreeShape, VertexId, is_decodable


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail
    return emit


def _failed_cells(result, key):
    return [f"{r['k']}/{r[key]}: got {r['computed']:.6g} want {r['reference']}"
            for r in result["rows"] if not r["pass"]]


def test_table1_minimal_n(verdict):
    result = reports.table1()
    bad = _failed_cells(result, "scheme")
    verdict("table1 minimal n (exact)", not bad, "; ".join(bad) or "15/15 cells match")


def test_optimal_distribution_spot_check(verdict):
    r = optimal_distribution(4, 20)
    ok = r.best.counts == (16, 2, 1, 1) and r.q_star >= 0.9
    verdict("optimum at d=4, n=20", ok, f"counts={r.best.counts} q={r.q_star:.4f}")


def test_table4_expected_cost(verdict):
    result = reports.table4()
    bad = [f"k={r['k']}: {r['computed']:.4f} vs {r['reference']}" for r in result["rows"] if not r["pass"]]
    detail = ", ".join(f"k={r['k']}:{r['computed']:.4f}" for r in result["rows"])
    verdict("table4 expected cost (+-0.01)", not bad, "; ".join(bad) or detail)


def test_table2_monte_carlo(verdict):
    result = reports.table2(seed=1, trials=100_000)
    bad = [f"k={r['k']}/{r['scheme']}: {r['computed']:.4f} vs {r['reference']} "
           f"({100 * r['rel_error']:.1f}%)" for r in result["rows"] if not r["pass"]]
    verdict("table2 Monte-Carlo cost (5%, 1e5 trials)", not bad, "; ".join(bad) or "8/8 cells")


def _oracle_a():
    for d in range(1, 5):
        s = TreeShape(d)
        sizes = {}
        for _, sub, _ in all_subsets(s):
            if rank_oracle_decodable(sub, s):
                sizes[len(sub)] = sizes.get(len(sub), 0) + 1
        if sizes != count_decodable(d).by_size():
            return f"decodable counts differ at d={d}"
    return None


def _oracle_b():
    for d in range(1, 5):
        s = TreeShape(d)
        for _, sub, _ in all_subsets(s):
            a = rank_oracle_decodable(sub, s)
            if a != is_decodable(sub, s) or a != decodable_via_cover(sub, s):
                return f"decodability disagrees at d={d} on {sub}"
    return None


def _oracle_c():
    for d in range(1, 4):
        s = TreeShape(d)
        for _, sub, _ in all_subsets(s):
            if rank_oracle_decodable(sub, s) and recovery_cost(sub, s) != min_cost_bruteforce(sub, s):
                return f"cost not minimal at d={d} on {sub}"
    return None


def _oracle_d():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        for d in (1, 2, 3):
            p = list(rng.random(d))
            t = cost_tables(p)
            if not np.allclose(t.P[d], oracle_P(d, p), atol=1e-12, rtol=0):
                return f"P differs at p={p}"
            for i in range(1, d + 1):
                ref = oracle_F(i, p)
                if not np.allclose(t.F[i, :len(ref)], ref, atol=1e-12, rtol=0):
                    return f"F[{i}] differs at p={p}"
            for i in range(2, d + 1):
                if not np.allclose(t.A[i], oracle_A(i, p, t.A.shape[1]), atol=1e-12, rtol=0):
                    return f"A[{i}] differs at p={p}"
    return None


def _oracle_e():
    from itertools import product

    for d in (1, 2, 3):
        s = TreeShape(d)
        for w in product(range(3), repeat=s.total_vertices):
            m = Multiset(s, np.array((0,) + w))
            best = principal_cover(m).weight_profile
            covers = [c.weight_profile for c in all_covers(m)]
            for l in range(m.n + 1):
                target = cover_survival_fraction(best, m.n, l)
                if any(cover_survival_fraction(c, m.n, l) > target for c in covers):
                    return f"cover not optimal for weights {w}, l={l}"
    return None


def _oracle_f():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d = int(rng.integers(1, 7))
        p = list(rng.random(d))
        if abs(cost_tables(p).P[d].sum() - decode_prob_Q(p)) > 1e-12:
            return f"sum P != Q at p={p}"
    return None


@pytest.mark.parametrize("suite,check", [
    ("a: decodable counts vs rank oracle, d<=4", _oracle_a),
    ("b: three decodability tests agree, d<=4", _oracle_b),
    ("c: recovery cost is brute-force minimum, d<=3", _oracle_c),
    ("d: cost tables vs pattern enumeration, d<=3", _oracle_d),
    ("e: principal cover maximises survival, d<=3", _oracle_e),
    ("f: cost distribution sums to Q, d<=6", _oracle_f),
])
def test_oracle_suites(verdict, suite, check):
    problem = check()
    verdict(f"oracle {suite}", problem is None, problem or "no disagreement found")


def test_worst_case_bound(verdict):
    worst = {}
    for d in range(1, 5):
        s = TreeShape(d)
        worst[d] = max(recovery_cost(sub, s) for _, sub, _ in all_subsets(s)
                       if is_decodable(sub, s))
    rng = np.random.default_rng(99)
    for d in range(1, 7):
        k = 1 << (d - 1)
        present = rng.random((100_000, 2 * k)) < rng.uniform(0.3, 0.9, (100_000, 1))
        present[:, 0] = False
        dec, total, _ = _kernels.batch_eval(present)
        worst[d] = max(worst.get(d, 0), int(total[dec].max(initial=0)))
    equality = all(
        recovery_cost({VertexId(d, 1)} | {VertexId(1, j) for j in range(2, (1 << (d - 1)) + 1)},
                      TreeShape(d)) == (1 << (d - 1)) - 1
        for d in range(1, 7)
    )
    ok = all(worst[d] <= (1 << (d - 1)) - 1 for d in worst) and equality
    verdict("worst-case cost <= k-1", ok, f"max cost by d={worst}, root+leaves tight={equality}")


def test_optimizer_pruning_soundness(verdict):
    bad = []
    for d in (1, 2, 3):
        for n in range(1 << (d - 1), 21):
            r = optimal_distribution(d, n)
            counts, q = brute_force_optimum(d, n)
            if abs(r.q_star - q) > 1e-12:
                bad.append(f"d={d},n={n}: pruned {r.best.counts} q={r.q_star:.4f}, "
                           f"brute {counts} q={q:.4f}")
    explored = optimal_distribution(6, 128).explored
    ok = not bad and explored < 10**5
    verdict("optimizer pruning soundness", ok,
            f"explored(6,128)={explored}; " + ("; ".join(bad) or "all optima match"))


def test_birth_death_ordering(verdict):
    result = reports.birthdeath(seed=0, trials=3000)
    summary = "; ".join(f"k={r['k']} {r['code']}+{r['augmentation']}: {r['mean_generations']:.1f}"
                        f" [{r['ci_lo']:.1f},{r['ci_hi']:.1f}]" for r in result["rows"])
    verdict("birth-death ordering with disjoint 95% CIs", result["pass"], summary)

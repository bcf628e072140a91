"""Compare the numba and numpy backends of the Monte-Carlo kernels.

Run: python benchmarks/bench_kernels.py [--trials N] [--runs R] [--repeat K]

Both backends consume the same pre-drawn random numbers, so the script also
checks that they agree exactly before reporting timings.
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from treeplication import _kernels
from treeplication.simulator import (
    CHURN_CHUNK,
    BirthDeathConfig,
    SamplingModel,
    birth_death_many,
    block_rng,
    sample_presence,
)


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_batch_eval(k: int, trials: int, repeat: int) -> dict:
    # uniform draws keep setup cheap; the optimiser is slow beyond k = 64
    model = SamplingModel.uniform(k.bit_length(), 3 * k)
    present = sample_presence(model, trials, block_rng(0, 0))
    _kernels.batch_eval(present[:16], "numba")  # compile outside the timer
    ref = _kernels.batch_eval(present, "numpy")
    got = _kernels.batch_eval(present, "numba")
    agree = all(np.array_equal(a, b) for a, b in zip(ref, got))
    t_np = best_of(lambda: _kernels.batch_eval(present, "numpy"), repeat)
    t_nb = best_of(lambda: _kernels.batch_eval(present, "numba"), repeat)
    return {"kernel": "batch_eval", "k": k, "trials": trials, "numpy_s": t_np,
            "numba_s": t_nb, "speedup": t_np / t_nb, "agree": agree}


def bench_churn(k: int, runs: int, repeat: int) -> dict:
    config = BirthDeathConfig(k, seed=0)
    birth_death_many(config, 2, backend="numba")
    ref = birth_death_many(config, runs, backend="numpy")
    got = birth_death_many(config, runs, backend="numba")
    agree = bool(np.array_equal(ref.values, got.values))
    t_np = best_of(lambda: birth_death_many(config, runs, backend="numpy"), repeat)
    t_nb = best_of(lambda: birth_death_many(config, runs, backend="numba"), repeat)
    return {"kernel": "churn", "k": k, "runs": runs, "chunk": CHURN_CHUNK, "numpy_s": t_np,
            "numba_s": t_nb, "speedup": t_np / t_nb, "agree": agree}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--runs", type=int, default=500)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", action="store_true", help="print JSON lines only")
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    results = [bench_batch_eval(k, args.trials, args.repeat) for k in (8, 32, 128)]
    results += [bench_churn(k, args.runs, args.repeat) for k in (8, 32)]
    for r in results:
        if args.json:
            print(json.dumps(r, sort_keys=True))
            continue
        size = f"trials={r['trials']}" if "trials" in r else f"runs={r['runs']}"
        print(f"{r['kernel']:<11} k={r['k']:<4} {size:<14} numpy {r['numpy_s']:8.4f}s  "
              f"numba {r['numba_s']:8.4f}s  x{r['speedup']:6.1f}  agree={r['agree']}")


if __name__ == "__main__":
    main()

"""Seeded Monte-Carlo engine.

Random streams: trial-based experiments are cut into fixed blocks of
``BLOCK`` trials and block ``b`` draws from ``default_rng([seed, b])``; a
birth-death run ``r`` draws from ``default_rng([seed, r])``. Results are
therefore identical however the blocks or runs are spread over workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import InvalidInput
from .nonuniform import SelectionDistribution
from .optimizer import optimal_distribution
from .tree import Multiset, TreeShape

BLOCK = 8192
CHURN_CHUNK = 4096

UNIFORM = "uniform-draw"
LAYER = "layer-draw"
BERNOULLI = "bernoulli"
MODES = (UNIFORM, LAYER, BERNOULLI)


@dataclass(frozen=True)
class SamplingModel:
    mode: str
    d: int
    n: int | None = None
    counts: tuple[int, ...] | None = None
    probs: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInput(f"unknown sampling mode {self.mode!r}")
        if self.mode == UNIFORM and (self.n is None or self.n < 0):
            raise InvalidInput("uniform-draw needs n >= 0")
        if self.mode == LAYER:
            if self.counts is None or len(self.counts) != self.d or min(self.counts) < 0:
                raise InvalidInput(f"layer-draw needs {self.d} non-negative layer counts")
            object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.mode == BERNOULLI:
            if self.probs is None or len(self.probs) != self.d:
                raise InvalidInput(f"bernoulli needs {self.d} layer probabilities")
            if any(not 0 <= p <= 1 for p in self.probs):
                raise InvalidInput("layer probabilities must lie in [0, 1]")
            object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @classmethod
    def uniform(cls, d: int, n: int) -> "SamplingModel":
        return cls(UNIFORM, d, n=n)

    @classmethod
    def layers(cls, counts: Sequence[int]) -> "SamplingModel":
        return cls(LAYER, len(counts), counts=tuple(counts))

    @classmethod
    def bernoulli(cls, probs: Sequence[float]) -> "SamplingModel":
        return cls(BERNOULLI, len(probs), probs=tuple(probs))

    @property
    def shape(self) -> TreeShape:
        return TreeShape(self.d)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items() if v is not None}


@dataclass
class RunStats:
    trials: int
    successes: int
    mean: float
    stderr: float
    histogram: dict[int, int] = field(default_factory=dict)
    outcomes: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "trials": self.trials,
            "successes": self.successes,
            "mean": self.mean,
            "stderr": self.stderr,
        }
        if self.histogram:
            out["histogram"] = {str(k): v for k, v in sorted(self.histogram.items())}
        return out

    def rows(self):
        """Per-trial (trial, outcome, value) tuples for CSV output."""
        if self.outcomes is None:
            return []
        return [
            (i, int(o), int(v)) for i, (o, v) in enumerate(zip(self.outcomes, self.values))
        ]


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("TRPL_THREADS", "1")))
    except ValueError:
        return 1


def _map_blocks(fn, count: int):
    """Apply fn to block indices 0..count-1, results in index order."""
    workers = min(_workers(), count)
    if workers <= 1:
        return [fn(b) for b in range(count)]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, range(count)))


def block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def sample_presence(model: SamplingModel, trials: int, rng: np.random.Generator) -> np.ndarray:
    """(trials, 2k) presence masks drawn under ``model``."""
    d = model.d
    k = 1 << (d - 1)
    present = np.zeros((trials, 2 * k), dtype=np.bool_)
    rows = np.arange(trials)[:, None]
    if model.mode == UNIFORM:
        if model.n:
            present[rows, rng.integers(1, 2 * k, size=(trials, model.n))] = True
    elif model.mode == LAYER:
        for i, c in enumerate(model.counts, start=1):
            if c == 0:
                continue
            size = 1 << (d - i)
            present[rows, size + rng.integers(0, size, size=(trials, c))] = True
    else:
        per_vertex = np.empty(2 * k)
        per_vertex[0] = 0.0
        for i, p in enumerate(model.probs, start=1):
            size = 1 << (d - i)
            per_vertex[size : 2 * size] = p
        present[:, 1:] = rng.random((trials, 2 * k - 1)) < per_vertex[1:]
    return present


def sample_multiset(model: SamplingModel, rng: np.random.Generator) -> Multiset:
    """One multiset under ``model``; bernoulli inclusion gives weight 1 per present vertex."""
    d = model.d
    shape = TreeShape(d)
    k = shape.k
    w = np.zeros(2 * k, dtype=np.int64)
    if model.mode == UNIFORM:
        np.add.at(w, rng.integers(1, 2 * k, size=model.n), 1)
    elif model.mode == LAYER:
        for i, c in enumerate(model.counts, start=1):
            size = 1 << (d - i)
            np.add.at(w, size + rng.integers(0, size, size=c), 1)
    else:
        w[1:] = sample_presence(model, 1, rng)[0, 1:]
    return Multiset(shape, w)


def _run_blocks(model: SamplingModel, trials: int, seed: int, backend: str | None):
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    nblocks = -(-trials // BLOCK)

    def one(b):
        size = min(BLOCK, trials - b * BLOCK)
        present = sample_presence(model, size, block_rng(seed, b))
        return _kernels.batch_eval(present, backend)

    parts = _map_blocks(one, nblocks)
    dec = np.concatenate([p[0] for p in parts])
    total = np.concatenate([p[1] for p in parts])
    leaf = np.concatenate([p[2] for p in parts])
    return dec, total, leaf


def _conditional_stats(dec: np.ndarray, values: np.ndarray) -> RunStats:
    good = values[dec]
    m = int(good.size)
    mean = float(good.mean()) if m else float("nan")
    stderr = float(good.std(ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
    vals, counts = np.unique(good, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(vals, counts)}
    return RunStats(int(dec.size), m, mean, stderr, hist, dec, np.where(dec, values, -1))


def mc_decodability(model: SamplingModel, trials: int, seed: int, backend: str | None = None) -> RunStats:
    dec, _, _ = _run_blocks(model, trials, seed, backend)
    s = int(dec.sum())
    p = s / trials
    stderr = float(np.sqrt(p * (1 - p) / (trials - 1))) if trials > 1 else float("nan")
    return RunStats(trials, s, p, stderr, {}, dec, dec.astype(np.int64))


def mc_comm_cost(model: SamplingModel, trials: int, seed: int, per_leaf: bool = False,
                 backend: str | None = None) -> RunStats:
    """Mean recovery transfers over the decodable trials only.

    With ``per_leaf`` the statistic is the transfers spent on leaf (1,1),
    otherwise the total over all leaves.
    """
    dec, total, leaf = _run_blocks(model, trials, seed, backend)
    return _conditional_stats(dec, leaf if per_leaf else total)


def mc_mds_cost(k: int, n: int, trials: int, seed: int) -> RunStats:
    """Systematic MDS baseline over 2k - 1 symbols, n uniform draws.

    Decodable iff at least k distinct symbols are present. Every systematic
    symbol that is absent costs k - 1 transfers.
    """
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    m = 2 * k - 1
    nblocks = -(-trials // BLOCK)

    def one(b):
        size = min(BLOCK, trials - b * BLOCK)
        rng = block_rng(seed, b)
        present = np.zeros((size, m), dtype=np.bool_)
        if n:
            present[np.arange(size)[:, None], rng.integers(0, m, size=(size, n))] = True
        dec = present.sum(axis=1) >= k
        cost = (k - 1) * (k - present[:, :k].sum(axis=1))
        return dec, cost

    parts = _map_blocks(one, nblocks)
    dec = np.concatenate([p[0] for p in parts])
    cost = np.concatenate([p[1] for p in parts]).astype(np.int64)
    return _conditional_stats(dec, cost)


# ---------------------------------------------------------------------------
# birth-death churn
# ---------------------------------------------------------------------------

TREEPLICATION = "treeplication"
REPLICATION = "replication"
SIBLING = "sibling"
REPLICATE = "replicate"


@dataclass(frozen=True)
class BirthDeathConfig:
    k: int
    code: str = TREEPLICATION
    augmentation: str = SIBLING
    initial: SelectionDistribution | None = None  # default: optimal at n = 3k
    initial_n: int | None = None
    birth_prob: float = 0.5
    max_generations: int = 100_000
    seed: int = 0

    def __post_init__(self):
        TreeShape.from_k(self.k)
        if self.code not in (TREEPLICATION, REPLICATION):
            raise InvalidInput(f"unknown code scheme {self.code!r}")
        if self.augmentation not in (SIBLING, REPLICATE):
            raise InvalidInput(f"unknown augmentation {self.augmentation!r}")
        if self.code == REPLICATION and self.augmentation != REPLICATE:
            raise InvalidInput("replication only supports augmentation by replication")
        if not 0 <= self.birth_prob <= 1:
            raise InvalidInput("birth probability must lie in [0, 1]")

    @property
    def shape(self) -> TreeShape:
        return TreeShape.from_k(self.k)

    def resolved_n(self) -> int:
        if self.initial is not None:
            return self.initial.n
        return self.initial_n if self.initial_n is not None else 3 * self.k

    def initial_counts(self) -> tuple[int, ...]:
        if self.initial is not None:
            return self.initial.counts
        return optimal_distribution(self.shape.d, self.resolved_n()).best.counts

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "code": self.code,
            "augmentation": self.augmentation,
            "initial_n": self.resolved_n(),
            "birth_prob": self.birth_prob,
            "max_generations": self.max_generations,
            "seed": self.seed,
        }
        if self.code == TREEPLICATION:
            out["initial_counts"] = list(self.initial_counts())
        return out


@dataclass(frozen=True)
class BirthDeathResult:
    generations: int
    capped: bool
    rejects: int  # non-decodable initial draws discarded


def _initial_multiset(config: BirthDeathConfig, rng: np.random.Generator,
                      counts: tuple[int, ...] | None) -> tuple[np.ndarray, int]:
    shape = config.shape
    k = shape.k
    rejects = 0
    while True:
        if config.code == REPLICATION:
            w = np.zeros(2 * k, dtype=np.int64)
            np.add.at(w, k + rng.integers(0, k, size=config.resolved_n()), 1)
        else:
            w = sample_multiset(SamplingModel.layers(counts), rng).weights.copy()
        if _kernels.initial_states(w)[1] == _kernels.FULL:
            return w, rejects
        rejects += 1
        if rejects > 100_000:
            raise InvalidInput("initial distribution essentially never decodes")


def birth_death_run(config: BirthDeathConfig, run_index: int = 0, backend: str | None = None,
                    _counts: tuple[int, ...] | None = None) -> BirthDeathResult:
    """Instants survived by one data unit before its first non-decodable generation."""
    rng = block_rng(config.seed, run_index)
    counts = _counts
    if config.code == TREEPLICATION and counts is None:
        counts = config.initial_counts()
    weights, rejects = _initial_multiset(config, rng, counts)
    state = _kernels.initial_states(weights)
    aug = _kernels.AUG_SIBLING if config.augmentation == SIBLING else _kernels.AUG_REPLICATE
    leaves_only = config.code == REPLICATION
    gen = 0
    while True:
        uniforms = rng.random(2 * CHURN_CHUNK)
        gen, status = _kernels.churn_chunk(
            weights, state, uniforms, gen, config.max_generations, config.birth_prob,
            aug, leaves_only, backend,
        )
        if status != _kernels.RUNNING:
            return BirthDeathResult(gen, status == _kernels.CAPPED, rejects)


def birth_death_many(config: BirthDeathConfig, runs: int, backend: str | None = None) -> RunStats:
    """Survival statistics over ``runs`` independent trajectories (run r uses stream r)."""
    counts = config.initial_counts() if config.code == TREEPLICATION else None
    results = _map_blocks(lambda r: birth_death_run(config, r, backend, counts), runs)
    gens = np.array([r.generations for r in results], dtype=np.int64)
    capped = np.array([r.capped for r in results])
    m = gens.size
    stats = RunStats(
        trials=m,
        successes=int((~capped).sum()),  # runs that ended in data loss
        mean=float(gens.mean()),
        stderr=float(gens.std(ddof=1) / np.sqrt(m)) if m > 1 else float("nan"),
        histogram={},
        outcomes=np.where(capped, 2, 1),
        values=gens,
    )
    return stats

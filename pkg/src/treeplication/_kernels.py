"""Inner loops for the Monte-Carlo engine.

Two interchangeable backends produce identical results:

* numba: ``@njit`` loops, one trial at a time;
* numpy: vectorised over trials, one tree vertex at a time.

Numba is used when importable unless ``TRPL_DISABLE_NUMBA`` is set to a
non-empty value other than ``0``. Random numbers are always drawn outside
the kernels, so the backend never changes a result.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


def _numba_requested() -> bool:
    flag = os.environ.get("TRPL_DISABLE_NUMBA", "")
    return HAVE_NUMBA and flag in ("", "0")


USE_NUMBA = _numba_requested()

FULL, NEED_ROOT, DEAD = 0, 1, 2


# ---------------------------------------------------------------------------
# decodability + recovery cost over a batch of presence masks
# ---------------------------------------------------------------------------


def _batch_eval_py(present):
    """Per trial: decodable flag, total transfer count, transfers for leaf 1.

    ``present`` is (trials, 2k) boolean with column 0 unused. Cost entries of
    non-decodable trials are -1.
    """
    trials, width = present.shape
    k = width // 2
    decodable = np.zeros(trials, dtype=np.bool_)
    total = np.full(trials, -1, dtype=np.int64)
    leaf_cost = np.full(trials, -1, dtype=np.int64)
    tops = np.zeros(width, dtype=np.int64)
    miss = np.zeros(width, dtype=np.int64)
    recv = np.zeros(width, dtype=np.int64)
    for t in range(trials):
        ok = True
        cost = 0
        for h in range(k, width):
            if present[t, h]:
                tops[h] = 1
                miss[h] = 0
            else:
                tops[h] = 0
                miss[h] = 1
        for h in range(k - 1, 0, -1):
            ct = tops[2 * h] + tops[2 * h + 1]
            cm = miss[2 * h] + miss[2 * h + 1]
            recv[h] = 0
            if present[t, h]:
                if cm >= 2:
                    ok = False
                    break
                if cm == 1:
                    recv[h] = ct
                    cost += ct
                tops[h] = 1
                miss[h] = 0
            else:
                tops[h] = ct
                miss[h] = cm
        if not ok or miss[1] > 0:
            continue
        decodable[t] = True
        total[t] = cost
        h = k
        while not present[t, h]:
            h //= 2
        leaf_cost[t] = 0 if h == k else recv[h]
    return decodable, total, leaf_cost


_batch_eval_numba = njit(cache=True)(_batch_eval_py) if HAVE_NUMBA else _batch_eval_py


def batch_eval_numpy(present: np.ndarray):
    """Vectorised twin of the numba kernel: loops over vertices, not trials."""
    present = np.asarray(present, dtype=np.bool_)
    trials, width = present.shape
    k = width // 2
    tops = np.zeros((trials, width), dtype=np.int64)
    miss = np.zeros((trials, width), dtype=np.int64)
    recv = np.zeros((trials, width), dtype=np.int64)
    tops[:, k:] = present[:, k:]
    miss[:, k:] = ~present[:, k:]
    bad = np.zeros(trials, dtype=np.bool_)
    cost = np.zeros(trials, dtype=np.int64)
    for h in range(k - 1, 0, -1):
        ct = tops[:, 2 * h] + tops[:, 2 * h + 1]
        cm = miss[:, 2 * h] + miss[:, 2 * h + 1]
        here = present[:, h]
        bad |= here & (cm >= 2)
        rec = here & (cm == 1)
        recv[:, h] = np.where(rec, ct, 0)
        cost += recv[:, h]
        tops[:, h] = np.where(here, 1, ct)
        miss[:, h] = np.where(here, 0, cm)
    decodable = ~bad & (miss[:, 1] == 0)
    # lowest present vertex on the path from leaf 1 to the root
    leaf_cost = np.zeros(trials, dtype=np.int64)
    found = present[:, k].copy()
    h = k // 2
    while h >= 1:
        hit = ~found & present[:, h]
        leaf_cost[hit] = recv[hit, h]
        found |= hit
        h //= 2
    total = np.where(decodable, cost, -1)
    leaf_cost = np.where(decodable, leaf_cost, -1)
    return decodable, total, leaf_cost


def batch_eval_numba(present: np.ndarray):
    return _batch_eval_numba(np.ascontiguousarray(present, dtype=np.bool_))


def batch_eval(present: np.ndarray, backend: str | None = None):
    backend = backend or ("numba" if USE_NUMBA else "numpy")
    if backend == "numba":
        return batch_eval_numba(present)
    if backend == "numpy":
        return batch_eval_numpy(present)
    raise ValueError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# birth-death churn of one data unit
# ---------------------------------------------------------------------------

AUG_REPLICATE = 0
AUG_SIBLING = 1

RUNNING, LOST, CAPPED = 0, 1, 2


def _pick_element(weights, n, u):
    """Heap id of the element at uniform position u * n of the multiset."""
    target = int(u * n)
    if target >= n:
        target = n - 1
    acc = 0
    for h in range(1, weights.shape[0]):
        acc += weights[h]
        if target < acc:
            return h
    return weights.shape[0] - 1


def _refresh(state, weights, h, k):
    """Recompute subtree states from ``h`` upward, stopping once nothing changes."""
    if h >= k:
        new = FULL if weights[h] > 0 else NEED_ROOT
        if new == state[h]:
            return
        state[h] = new
        h //= 2
    while h >= 1:
        a = state[2 * h]
        b = state[2 * h + 1]
        if a == FULL and b == FULL:
            new = FULL
        elif (a == FULL and b == NEED_ROOT) or (a == NEED_ROOT and b == FULL):
            new = FULL if weights[h] > 0 else NEED_ROOT
        else:
            new = DEAD
        if new == state[h]:
            return
        state[h] = new
        h //= 2


def _make_churn(pick_element, refresh):
    def churn(weights, state, uniforms, gen, max_gen, birth_prob, aug, leaves_only):
        """Advance one birth-death trajectory through a chunk of uniforms.

        Two uniforms per instant: the event draw and the element pick.
        Returns (instants survived so far, status).
        """
        width = weights.shape[0]
        k = width // 2
        n = 0
        for h in range(1, width):
            n += weights[h]
        steps = uniforms.shape[0] // 2
        for s in range(steps):
            if gen >= max_gen:
                return gen, CAPPED
            u_event = uniforms[2 * s]
            u_pick = uniforms[2 * s + 1]
            z = pick_element(weights, n, u_pick)
            if u_event < birth_prob:
                target = z
                if aug == AUG_SIBLING and z > 1 and not leaves_only:
                    sib = z ^ 1
                    par = z >> 1
                    if weights[sib] > 0 or weights[par] > 0:
                        left = z if z < sib else sib
                        right = sib if z < sib else z
                        target = right if weights[right] < weights[left] else left
                weights[target] += 1
                n += 1
                if weights[target] == 1:
                    refresh(state, weights, target, k)
            else:
                weights[z] -= 1
                n -= 1
                if weights[z] == 0:
                    refresh(state, weights, z, k)
            if state[1] != FULL:
                return gen, LOST
            gen += 1
        if gen >= max_gen:
            return gen, CAPPED
        return gen, RUNNING

    return churn


_churn_py = _make_churn(_pick_element, _refresh)
if HAVE_NUMBA:
    _churn_numba = njit(cache=True)(
        _make_churn(njit(cache=True)(_pick_element), njit(cache=True)(_refresh))
    )
else:  # pragma: no cover
    _churn_numba = _churn_py


def churn_chunk(weights, state, uniforms, gen, max_gen, birth_prob, aug, leaves_only,
                backend: str | None = None):
    backend = backend or ("numba" if USE_NUMBA else "numpy")
    fn = _churn_numba if backend == "numba" else _churn_py
    g, status = fn(weights, state, uniforms, gen, max_gen, birth_prob, aug, leaves_only)
    return int(g), int(status)


def initial_states(weights: np.ndarray) -> np.ndarray:
    width = weights.shape[0]
    k = width // 2
    state = np.empty(width, dtype=np.int8)
    state[0] = DEAD
    for h in range(width - 1, 0, -1):
        if h >= k:
            state[h] = FULL if weights[h] > 0 else NEED_ROOT
            continue
        a, b = state[2 * h], state[2 * h + 1]
        if a == FULL and b == FULL:
            state[h] = FULL
        elif {int(a), int(b)} == {FULL, NEED_ROOT}:
            state[h] = FULL if weights[h] > 0 else NEED_ROOT
        else:
            state[h] = DEAD
    return state

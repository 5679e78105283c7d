"""Ground-truth machinery for tests: exhaustive search and direct sampling.

The exhaustive optimizer enumerates every subset of a small instance and
maximizes the objective over the sets the surrogate bound deems feasible,
giving an independent reference for the search algorithms.  The empirical
estimator measures the true violation probability by sampling the weight
distribution directly, giving an independent check on the tail bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .fitness import Subset, eval_g1
from .problems import ProblemInstance
from .weights import BoundKind, WeightModel, sample_total_weights

MAX_ENUM_BITS = 24
_CHUNK = 1 << 20


@dataclass(frozen=True)
class OracleResult:
    opt_value: float
    opt_subset: Subset
    feasible_count: int
    enumerated: int


def _uniform_feasible_cardinality(m: WeightModel, kind: BoundKind) -> int:
    # Tightness grows with cardinality under identical expected weights, so
    # feasibility is a cardinality threshold; -1 means nothing is feasible.
    best = -1
    for k in range(m.n + 1):
        if eval_g1(Subset(m.n, (1 << k) - 1), m, kind) <= m.alpha:
            best = k
        else:
            break
    return best


def _feasible_masks_nonuniform(m: WeightModel, kind: BoundKind, cap: int):
    expected = np.array(m.expected)
    n = m.n
    d, C, alpha = m.dispersion, m.bound, m.alpha
    for start in range(0, 1 << n, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, 1 << n), dtype=np.uint32)
        card = np.bitwise_count(masks).astype(np.int64)
        ew = np.zeros(len(masks))
        for i in range(n):
            ew[(masks >> np.uint32(i)) & np.uint32(1) == 1] += expected[i]
        slack = C - ew
        certain = slack >= d * card
        overweight = (ew >= C) & ~certain
        middle = ~certain & ~overweight
        g1 = np.empty(len(masks))
        g1[certain] = ew[certain] - C
        g1[overweight] = 1.0 + ew[overweight] - C
        if middle.any():
            k_mid = card[middle].astype(float)
            s_mid = slack[middle]
            if kind is BoundKind.CHEBYSHEV:
                num = d * d * k_mid
                val = num / (num + 3.0 * s_mid * s_mid)
            else:
                u = s_mid / (d * k_mid)
                val = np.exp(0.5 * k_mid * (u - (1.0 + u) * np.log1p(u)))
            g1[middle] = np.clip(val, 0.0, 1.0)
        feasible = (g1 <= alpha) & (card <= cap)
        for idx in np.flatnonzero(feasible):
            yield int(masks[idx])


def brute_force_optimum(inst: ProblemInstance, m: WeightModel, kind: BoundKind,
                        cardinality_cap: int | None = None) -> OracleResult:
    """Exact optimum over all surrogate-feasible subsets (n <= 24).

    cardinality_cap additionally restricts the search to sets of at most that
    size; the feasible count reflects both restrictions.
    """
    n = inst.n
    if n != m.n:
        raise ValueError(f"instance over {n} elements vs model over {m.n}")
    if n > MAX_ENUM_BITS:
        raise ValueError(f"refusing to enumerate 2^{n} subsets (cap {MAX_ENUM_BITS})")
    cap = n if cardinality_cap is None else min(cardinality_cap, n)
    objective = inst.make_objective(0)
    best_value, best_mask, feasible_count = -1.0, 0, 0

    if m.uniform_value is not None:
        k_max = min(_uniform_feasible_cardinality(m, kind), cap)
        for k in range(k_max + 1):
            feasible_count += comb(n, k)
            for combo in combinations(range(n), k):
                mask = 0
                for i in combo:
                    mask |= 1 << i
                value = objective(mask)
                if value > best_value:
                    best_value, best_mask = value, mask
    else:
        for mask in _feasible_masks_nonuniform(m, kind, cap):
            feasible_count += 1
            value = objective(mask)
            if value > best_value:
                best_value, best_mask = value, mask

    if feasible_count == 0:
        raise ValueError("no feasible subset (not even the empty set)")
    return OracleResult(best_value, Subset(n, best_mask), feasible_count, 1 << n)


def empirical_violation_probability(X: Subset, m: WeightModel, samples: int,
                                    seed: int) -> float:
    """Frequency of W(X) > C over direct weight draws; deterministic in seed."""
    if samples < 1:
        raise ValueError("need at least one sample")
    ew = m.expected_of_mask(X.mask, X.card)
    if X.card == 0 or m.dispersion == 0.0:
        return float(ew > m.bound)
    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    while remaining > 0:
        batch = min(remaining, _CHUNK)
        totals = sample_total_weights(X, m, batch, rng)
        hits += int(np.count_nonzero(totals > m.bound))
        remaining -= batch
    return hits / samples

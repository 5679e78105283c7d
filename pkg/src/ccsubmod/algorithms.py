"""Search algorithms over the two-objective fitness formulations.

GSEMO keeps an archive of mutually non-dominated solutions, mutates a
uniformly chosen member with independent per-bit flips at rate 1/n, and
inserts the offspring unless some member strongly dominates it (removing
everything the offspring weakly dominates).  NSGA-II is the standard
generational algorithm with binary tournaments, uniform crossover, and
crowding-distance truncation.  The greedy baseline adds the best
gain-per-expected-weight element while the surrogate bound stays within
alpha, falling back to the best feasible singleton.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .fitness import Formulation, ObjectivePair, Subset, constraint_evaluator
from .problems import ProblemInstance
from .weights import BoundKind, WeightModel

_STREAMS = {"init": 0, "select": 1, "mutate": 2, "crossover": 3,
            "cascade": 4, "report": 5}


@dataclass(frozen=True)
class RngStreams:
    """Independent per-purpose generators, all derived from one master seed."""

    init: random.Random
    select: random.Random
    mutate: random.Random
    crossover: random.Random
    cascade_seed: int
    report_seed: int


def make_streams(seed: int) -> RngStreams:
    def child(name: str) -> int:
        state = np.random.SeedSequence(seed, spawn_key=(_STREAMS[name],))
        words = state.generate_state(2)
        return int(words[0]) << 32 | int(words[1])

    return RngStreams(
        init=random.Random(child("init")),
        select=random.Random(child("select")),
        mutate=random.Random(child("mutate")),
        crossover=random.Random(child("crossover")),
        cascade_seed=child("cascade"),
        report_seed=child("report"),
    )


def mutate_mask(mask: int, n: int, rnd: random.Random) -> int:
    """Flip each of the n bits independently with probability 1/n, sampled
    via geometric gap jumps between flip positions."""
    if n == 1:
        return mask ^ 1
    log_keep = math.log1p(-1.0 / n)
    flips = 0
    pos = -1
    while True:
        pos += 1 + int(math.log(1.0 - rnd.random()) / log_keep)
        if pos >= n:
            break
        flips |= 1 << pos
    return mask ^ flips


@dataclass(frozen=True)
class AlgoConfig:
    budget: int = 5_000_000
    seed: int = 0
    bound: BoundKind = BoundKind.CHEBYSHEV
    parent_population: int = 20
    offspring_population: int = 10
    crossover_prob: float = 0.90
    max_generations: int = 500_000
    debug_checks: bool = False

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("evaluation budget must be >= 1")
        if self.parent_population < 2:
            raise ValueError("parent population must be >= 2")
        if self.offspring_population < 1:
            raise ValueError("offspring population must be >= 1")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover probability must lie in [0, 1]")


@dataclass(frozen=True)
class RunRecord:
    algorithm: str
    problem: str
    C: float
    alpha: float
    delta: float
    best_value: float | None
    best_subset: Subset | None
    feasible_found: bool
    evaluations: int
    seed: int
    wall_time: float


class Archive:
    """Pareto archive of (bitmask, o1, o2) triples, o1 minimized, o2 maximized.

    Insertion follows the replace rule: an offspring strongly dominated by a
    member is rejected; otherwise every member it weakly dominates (including
    objective-equal ones) is removed and the offspring joins.
    """

    __slots__ = ("n", "formulation", "entries", "debug_checks")

    def __init__(self, n: int, formulation: Formulation = Formulation.G,
                 debug_checks: bool = False):
        self.n = n
        self.formulation = formulation
        self.entries: list[tuple[int, float, float]] = []
        self.debug_checks = debug_checks

    def __len__(self) -> int:
        return len(self.entries)

    def insert(self, mask: int, o1: float, o2: float) -> bool:
        for _, e1, e2 in self.entries:
            if e1 <= o1 and e2 >= o2 and (e1 != o1 or e2 != o2):
                return False
        self.entries = [e for e in self.entries
                        if not (o1 <= e[1] and o2 >= e[2])]
        self.entries.append((mask, o1, o2))
        if self.debug_checks:
            self._check_invariants()
        return True

    def best_feasible(self) -> tuple[int, float] | None:
        best = None
        for mask, _, o2 in self.entries:
            if o2 >= 0.0 and (best is None or o2 > best[1]):
                best = (mask, o2)
        return best

    def pairs(self) -> list[tuple[Subset, ObjectivePair]]:
        return [(Subset(self.n, mask), ObjectivePair(o1, o2, self.formulation))
                for mask, o1, o2 in self.entries]

    def _check_invariants(self) -> None:
        entries = self.entries
        assert len({e[1] for e in entries}) == len(entries), \
            "archive holds two entries with the same first objective"
        assert sum(1 for e in entries if e[2] == -1.0) <= 1, \
            "archive holds more than one infeasible entry"
        for i, (_, a1, a2) in enumerate(entries):
            for j, (_, b1, b2) in enumerate(entries):
                if i != j:
                    assert not (a1 <= b1 and a2 >= b2 and (a1, a2) != (b1, b2)), \
                        "archive entries are not mutually non-dominated"


def _require_model(inst: ProblemInstance) -> WeightModel:
    if inst.weight_model is None:
        raise ValueError("instance has no weight model attached")
    return inst.weight_model


def _finish_record(algorithm: str, inst: ProblemInstance, m: WeightModel,
                   best: tuple[int, float] | None, evaluations: int, seed: int,
                   report_seed: int, started: float) -> RunRecord:
    if best is None:
        return RunRecord(algorithm, inst.problem_id, m.bound, m.alpha,
                         m.dispersion, None, None, False, evaluations, seed,
                         time.perf_counter() - started)
    mask, _ = best
    value = inst.report_value(mask, report_seed)
    return RunRecord(algorithm, inst.problem_id, m.bound, m.alpha, m.dispersion,
                     value, Subset(inst.n, mask), True, evaluations, seed,
                     time.perf_counter() - started)


def gsemo_run(inst: ProblemInstance, cfg: AlgoConfig,
              formulation: Formulation = Formulation.G) -> RunRecord:
    """Archive-based search from a single random bitstring.

    Each iteration picks a uniform archive member, applies 1/n bit mutation,
    evaluates the offspring (one unit of budget), and applies the archive
    insertion rule.  Returns the best feasible archive entry by value.
    """
    m = _require_model(inst)
    n = inst.n
    started = time.perf_counter()
    streams = make_streams(cfg.seed)
    objective = inst.make_objective(streams.cascade_seed)
    tightness = constraint_evaluator(m, cfg.bound)
    alpha = m.alpha
    use_expected = formulation is Formulation.G_HAT
    archive = Archive(n, formulation, cfg.debug_checks)

    def evaluate(mask: int) -> tuple[float, float]:
        g1, ew = tightness(mask, mask.bit_count())
        o2 = objective(mask) if g1 <= alpha else -1.0
        return (ew if use_expected else g1), o2

    mask = streams.init.getrandbits(n)
    o1, o2 = evaluate(mask)
    evaluations = 1
    archive.insert(mask, o1, o2)

    select, mutate = streams.select, streams.mutate
    budget = cfg.budget
    while evaluations < budget:
        entries = archive.entries
        parent = entries[select.randrange(len(entries))][0]
        child = mutate_mask(parent, n, mutate)
        o1, o2 = evaluate(child)
        evaluations += 1
        archive.insert(child, o1, o2)

    return _finish_record("gsemo", inst, m, archive.best_feasible(),
                          evaluations, cfg.seed, streams.report_seed, started)


def fast_nondominated_sort(points: list[tuple[float, float]]) -> list[list[int]]:
    """Indices grouped into fronts under (minimize first, maximize second)."""
    size = len(points)
    dominated_by: list[list[int]] = [[] for _ in range(size)]
    counts = [0] * size
    fronts: list[list[int]] = [[]]
    for i in range(size):
        a1, a2 = points[i]
        for j in range(size):
            if i == j:
                continue
            b1, b2 = points[j]
            if a1 <= b1 and a2 >= b2 and (a1 != b1 or a2 != b2):
                dominated_by[i].append(j)
            elif b1 <= a1 and b2 >= a2 and (a1 != b1 or a2 != b2):
                counts[i] += 1
        if counts[i] == 0:
            fronts[0].append(i)
    current = 0
    while fronts[current]:
        nxt: list[int] = []
        for i in fronts[current]:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def crowding_distance(points: list[tuple[float, float]],
                      front: list[int]) -> dict[int, float]:
    """Per-index crowding distance within one front; boundaries get +inf."""
    distance = {i: 0.0 for i in front}
    if len(front) <= 2:
        return {i: math.inf for i in front}
    for dim in (0, 1):
        ordered = sorted(front, key=lambda i: points[i][dim])
        distance[ordered[0]] = math.inf
        distance[ordered[-1]] = math.inf
        span = points[ordered[-1]][dim] - points[ordered[0]][dim]
        if span <= 0.0:
            continue
        for k in range(1, len(ordered) - 1):
            if distance[ordered[k]] == math.inf:
                continue
            gap = points[ordered[k + 1]][dim] - points[ordered[k - 1]][dim]
            distance[ordered[k]] += gap / span
    return distance


def nsga2_run(inst: ProblemInstance, cfg: AlgoConfig) -> RunRecord:
    """Generational NSGA-II on (minimize tightness, maximize value)."""
    m = _require_model(inst)
    n = inst.n
    started = time.perf_counter()
    streams = make_streams(cfg.seed)
    objective = inst.make_objective(streams.cascade_seed)
    tightness = constraint_evaluator(m, cfg.bound)
    alpha = m.alpha
    full_mask = (1 << n) - 1
    best: tuple[int, float] | None = None
    evaluations = 0

    def evaluate(mask: int) -> tuple[float, float]:
        nonlocal best, evaluations
        g1, _ = tightness(mask, mask.bit_count())
        o2 = objective(mask) if g1 <= alpha else -1.0
        evaluations += 1
        if o2 >= 0.0 and (best is None or o2 > best[1]):
            best = (mask, o2)
        return g1, o2

    population: list[tuple[int, float, float]] = []
    while len(population) < cfg.parent_population and evaluations < cfg.budget:
        mask = streams.init.getrandbits(n)
        o1, o2 = evaluate(mask)
        population.append((mask, o1, o2))

    select, mutate, crossover = streams.select, streams.mutate, streams.crossover
    generation = 0
    while evaluations < cfg.budget and generation < cfg.max_generations:
        points = [(o1, o2) for _, o1, o2 in population]
        fronts = fast_nondominated_sort(points)
        rank = [0] * len(points)
        crowd = [0.0] * len(points)
        for fi, front in enumerate(fronts):
            dist = crowding_distance(points, front)
            for i in front:
                rank[i] = fi
                crowd[i] = dist[i]

        def tournament() -> int:
            i = select.randrange(len(population))
            j = select.randrange(len(population))
            if rank[i] != rank[j]:
                return population[i][0] if rank[i] < rank[j] else population[j][0]
            if crowd[i] != crowd[j]:
                return population[i][0] if crowd[i] > crowd[j] else population[j][0]
            return population[i][0]

        offspring: list[tuple[int, float, float]] = []
        while (len(offspring) < cfg.offspring_population
               and evaluations < cfg.budget):
            p1, p2 = tournament(), tournament()
            if crossover.random() < cfg.crossover_prob:
                pattern = crossover.getrandbits(n)
                children = ((p1 & pattern) | (p2 & (full_mask ^ pattern)),
                            (p2 & pattern) | (p1 & (full_mask ^ pattern)))
            else:
                children = (p1, p2)
            for child in children:
                if (len(offspring) >= cfg.offspring_population
                        or evaluations >= cfg.budget):
                    break
                child = mutate_mask(child, n, mutate)
                o1, o2 = evaluate(child)
                offspring.append((child, o1, o2))

        combined = population + offspring
        comb_points = [(o1, o2) for _, o1, o2 in combined]
        population = []
        for front in fast_nondominated_sort(comb_points):
            if len(population) + len(front) <= cfg.parent_population:
                population.extend(combined[i] for i in front)
            else:
                dist = crowding_distance(comb_points, front)
                ordered = sorted(front, key=lambda i: dist[i], reverse=True)
                need = cfg.parent_population - len(population)
                population.extend(combined[i] for i in ordered[:need])
                break
        generation += 1

    return _finish_record("nsga2", inst, m, best, evaluations, cfg.seed,
                          streams.report_seed, started)


def greedy_run(inst: ProblemInstance, m: WeightModel,
               kind: BoundKind) -> RunRecord:
    """Deterministic gain-per-expected-weight greedy with singleton fallback.

    Grows the set by the element with the best marginal gain divided by its
    expected weight (plain gain for identical weights; ties break toward the
    lowest index) among elements keeping the surrogate within alpha, then
    returns the better of the grown set and the best feasible singleton.
    """
    if inst.n != m.n:
        raise ValueError(f"instance over {inst.n} elements vs model over {m.n}")
    n = inst.n
    started = time.perf_counter()
    objective = inst.make_objective(0)
    tightness = constraint_evaluator(m, kind)
    alpha = m.alpha
    uniform = m.uniform_value is not None

    mask, card = 0, 0
    current = 0.0
    evaluations = 0
    best_single: tuple[int, float] | None = None
    while card < n:
        if uniform and tightness(0, card + 1)[0] > alpha:
            break
        chosen: tuple[float, int, float] | None = None  # (ratio, element, value)
        for v in range(n):
            if mask >> v & 1:
                continue
            candidate = mask | (1 << v)
            if not uniform and tightness(candidate, card + 1)[0] > alpha:
                continue
            value = objective(candidate)
            evaluations += 1
            ratio = value - current
            if not uniform:
                ratio /= m.expected[v]
            if chosen is None or ratio > chosen[0]:
                chosen = (ratio, v, value)
            if card == 0 and (best_single is None or value > best_single[1]):
                best_single = (candidate, value)
        if chosen is None:
            break
        mask |= 1 << chosen[1]
        card += 1
        current = chosen[2]

    best = (mask, current)
    if best_single is not None and best_single[1] > current:
        best = best_single
    return _finish_record("greedy", inst, m, best, evaluations, 0,
                          0, started)


def max_safe_cardinality(m: WeightModel, kind: BoundKind) -> int:
    """Largest cardinality certified feasible by the tail bound for identical
    expected weights, found by integer search."""
    a = m.uniform_value
    if a is None:
        raise ValueError("requires identical expected weights")
    if a == 0.0:
        return m.n
    d, C, alpha = m.dispersion, m.bound, m.alpha
    k_opt = math.floor(C / a + 1e-9)
    best = 0
    for k in range(min(m.n, k_opt) + 1):
        if kind is BoundKind.CHEBYSHEV:
            penalty = math.sqrt((1.0 - alpha) * k * d * d) / (math.sqrt(3.0 * alpha) * a)
        else:
            penalty = math.sqrt(3.0 * d * k * math.log(1.0 / alpha)) / a
        if k + penalty <= k_opt:
            best = k
        else:
            break
    return best


def max_safe_expected_weight(r: int, m: WeightModel, kind: BoundKind) -> float:
    """Largest expected weight certified feasible for a set of r elements."""
    if r < 0:
        raise ValueError("element count must be >= 0")
    d, C, alpha = m.dispersion, m.bound, m.alpha
    if kind is BoundKind.CHEBYSHEV:
        return C - math.sqrt((1.0 - alpha) * r * d * d / (3.0 * alpha))
    return C - math.sqrt(3.0 * d * r * math.log(1.0 / alpha))

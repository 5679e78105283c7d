"""Submodular objective oracles: maximum coverage and influence maximization.

Coverage instances hold one bitmask per candidate set over a finite universe;
the objective is the exact size of the union.  Influence instances hold a
directed graph with per-edge activation probabilities; the objective is a
Monte-Carlo estimate of the expected independent-cascade spread.  Graph
ingestion covers DIMACS-style edge files, plain "u v" pair files, and
"u v p" probability-annotated files, plus a seeded synthetic generator.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Protocol, runtime_checkable

import numpy as np

from .fitness import Subset
from .weights import WeightModel


class ParseError(ValueError):
    """Malformed graph input; the message carries the offending line number."""


@runtime_checkable
class ProblemInstance(Protocol):
    """What the search algorithms need from a problem."""

    problem_id: str
    weight_model: WeightModel | None

    @property
    def n(self) -> int: ...

    def make_objective(self, sim_seed: int = 0) -> Callable[[int], float]: ...

    def report_value(self, mask: int, seed: int = 0) -> float: ...


def _iter_set_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass
class CoverageInstance:
    """Max-coverage instance: n candidate sets over a universe of elements."""

    universe_size: int
    sets: list[int]
    weight_model: WeightModel | None = None
    problem_id: str = "coverage"
    objective_calls: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.universe_size < 1:
            raise ValueError("universe must be nonempty")
        if not self.sets:
            raise ValueError("need at least one candidate set")
        limit = 1 << self.universe_size
        if any(not 0 <= s < limit for s in self.sets):
            raise ValueError("set mask out of range for the universe")
        if self.weight_model is not None and self.weight_model.n != len(self.sets):
            raise ValueError("weight model size differs from the number of sets")

    @property
    def n(self) -> int:
        return len(self.sets)

    def union_of_mask(self, mask: int) -> int:
        union = 0
        sets = self.sets
        for i in _iter_set_bits(mask):
            union |= sets[i]
        return union

    def make_objective(self, sim_seed: int = 0) -> Callable[[int], float]:
        sets = self.sets
        def objective(mask: int) -> float:
            self.objective_calls += 1
            union = 0
            for i in _iter_set_bits(mask):
                union |= sets[i]
            return float(union.bit_count())
        return objective

    def report_value(self, mask: int, seed: int = 0) -> float:
        return float(self.union_of_mask(mask).bit_count())

    def with_weight_model(self, m: WeightModel) -> "CoverageInstance":
        return replace(self, weight_model=m, objective_calls=0)


def coverage_value(X: Subset, inst: CoverageInstance) -> int:
    """Exact size of the union of the selected sets."""
    if X.n != inst.n:
        raise ValueError(f"subset over {X.n} sets vs instance with {inst.n}")
    inst.objective_calls += 1
    return inst.union_of_mask(X.mask).bit_count()


def graph_to_coverage(edges: Iterable[tuple[int, int]], node_count: int,
                      weight_model: WeightModel | None = None,
                      problem_id: str = "coverage") -> CoverageInstance:
    """Coverage instance from an undirected graph: one set per vertex holding
    the vertex itself and its neighbors (closed neighborhood)."""
    sets = [1 << v for v in range(node_count)]
    for u, v in edges:
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ValueError(f"edge ({u}, {v}) out of range for {node_count} nodes")
        sets[u] |= 1 << v
        sets[v] |= 1 << u
    return CoverageInstance(node_count, sets, weight_model, problem_id)


def random_coverage_instance(n_sets: int, universe_size: int, seed: int,
                             element_prob: float = 0.25,
                             weight_model: WeightModel | None = None) -> CoverageInstance:
    """Seeded random instance; every set gets at least one element."""
    rng = np.random.default_rng(seed)
    sets = []
    for _ in range(n_sets):
        members = rng.random(universe_size) < element_prob
        mask = 0
        for j in np.flatnonzero(members):
            mask |= 1 << int(j)
        if mask == 0:
            mask = 1 << int(rng.integers(universe_size))
        sets.append(mask)
    return CoverageInstance(universe_size, sets, weight_model,
                            f"coverage-rand-n{n_sets}-u{universe_size}-s{seed}")


@dataclass
class InfluenceInstance:
    """Influence maximization under the independent cascade model.

    With common random numbers (crn=True, the default for search) the cascade
    coin of edge e in simulation i is fixed by (base_seed, sim_seed, i, e), so
    each simulation index induces a fixed live-edge subgraph and the spread
    estimate is the mean reachable-set size over those subgraphs.  Reachable
    sets are precomputed per node and packed into one big integer per node
    (simulation i occupying bit block [i*n, (i+1)*n)), which turns a spread
    evaluation into |X| bitwise ORs and one popcount.
    """

    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    sims: int = 100
    weight_model: WeightModel | None = None
    base_seed: int = 0
    crn: bool = True
    report_sims: int = 10_000
    problem_id: str = "influence"
    objective_calls: int = field(default=0, compare=False)
    _adjacency: list[list[tuple[int, float]]] = field(init=False, repr=False,
                                                      compare=False)
    _reach_cache: dict = field(init=False, repr=False, compare=False,
                               default_factory=dict)

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("graph needs at least one node")
        if self.sims < 1:
            raise ValueError("simulation count must be >= 1")
        edges = tuple((int(u), int(v), float(p)) for u, v, p in self.edges)
        seen = set()
        for u, v, p in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge probability {p} outside [0, 1]")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        object.__setattr__(self, "edges", edges)
        if self.weight_model is not None and self.weight_model.n != self.node_count:
            raise ValueError("weight model size differs from the node count")
        adjacency = [[] for _ in range(self.node_count)]
        for u, v, p in edges:
            adjacency[u].append((v, p))
        self._adjacency = adjacency
        self._reach_cache = {}

    @property
    def n(self) -> int:
        return self.node_count

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_reach_cache"] = {}
        return state

    def _packed_reach(self, sim_seed: int) -> list[int]:
        cached = self._reach_cache.get(sim_seed)
        if cached is not None:
            return cached
        n, r = self.node_count, self.sims
        rng = np.random.default_rng(
            np.random.SeedSequence([self.base_seed, sim_seed, 0x1C]))
        if self.edges:
            probs = np.array([p for _, _, p in self.edges])
            live = rng.random((r, len(self.edges))) < probs
        else:
            live = np.zeros((r, 0), dtype=bool)
        packed = [0] * n
        for i in range(r):
            adj = [[] for _ in range(n)]
            for e in np.flatnonzero(live[i]):
                u, v, _ = self.edges[e]
                adj[u].append(v)
            shift = i * n
            for v in range(n):
                if not adj[v]:
                    packed[v] |= 1 << (shift + v)
                    continue
                visited = 1 << v
                stack = [v]
                while stack:
                    u = stack.pop()
                    for w in adj[u]:
                        if not visited >> w & 1:
                            visited |= 1 << w
                            stack.append(w)
                packed[v] |= visited << shift
        self._reach_cache[sim_seed] = packed
        return packed

    def make_objective(self, sim_seed: int = 0) -> Callable[[int], float]:
        if self.crn:
            packed = self._packed_reach(sim_seed)
            inv_r = 1.0 / self.sims
            def objective(mask: int) -> float:
                self.objective_calls += 1
                acc = 0
                for v in _iter_set_bits(mask):
                    acc |= packed[v]
                return acc.bit_count() * inv_r
            return objective
        def objective(mask: int) -> float:
            self.objective_calls += 1
            rnd = random.Random((self.base_seed, sim_seed, self.objective_calls))
            return self.independent_spread(mask, self.sims, rnd)
        return objective

    def independent_spread(self, mask: int, n_sims: int,
                           rnd: random.Random) -> float:
        """Average activated-node count over fresh cascade simulations."""
        adjacency = self._adjacency
        total = 0
        seeds = list(_iter_set_bits(mask))
        for _ in range(n_sims):
            active = mask
            frontier = seeds
            while frontier:
                next_frontier = []
                for u in frontier:
                    for v, p in adjacency[u]:
                        if not active >> v & 1 and rnd.random() < p:
                            active |= 1 << v
                            next_frontier.append(v)
                frontier = next_frontier
            total += active.bit_count()
        return total / n_sims

    def spread(self, mask: int) -> float:
        return self.make_objective(0)(mask)

    def report_value(self, mask: int, seed: int = 0) -> float:
        """High-precision estimate with independent simulations."""
        if mask == 0:
            return 0.0
        rnd = random.Random((self.base_seed, seed, 0x5E9))
        return self.independent_spread(mask, self.report_sims, rnd)

    def with_weight_model(self, m: WeightModel) -> "InfluenceInstance":
        return replace(self, weight_model=m, objective_calls=0)


def influence_spread(X: Subset, inst: InfluenceInstance) -> float:
    """Monte-Carlo estimate of the expected cascade size seeded by X."""
    if X.n != inst.n:
        raise ValueError(f"subset over {X.n} nodes vs instance with {inst.n}")
    return inst.spread(X.mask)


def generate_im_graph(nodes: int, edges: int, p: float, seed: int, *,
                      sims: int = 100, weight_model: WeightModel | None = None,
                      crn: bool = True) -> InfluenceInstance:
    """Seeded simple directed graph with exactly the requested edge count;
    all edges get activation probability p."""
    max_edges = nodes * (nodes - 1)
    if not 0 <= edges <= max_edges:
        raise ValueError(f"edge count {edges} infeasible for {nodes} nodes")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(max_edges, size=edges, replace=False) if edges else []
    edge_list = []
    for k in sorted(int(c) for c in chosen):
        u, j = divmod(k, nodes - 1)
        v = j if j < u else j + 1
        edge_list.append((u, v, p))
    return InfluenceInstance(
        nodes, tuple(edge_list), sims=sims, weight_model=weight_model,
        base_seed=seed, crn=crn,
        problem_id=f"im-synth-n{nodes}-m{edges}-p{p}-s{seed}")


def parse_dimacs_edges(stream) -> tuple[int, list[tuple[int, int]]]:
    """Undirected edge list from DIMACS ascii ('c' comments, 'p edge N M'
    header, 'e u v' lines with 1-based ids) or from headerless "u v" pair
    files (1-based unless a 0 id appears).

    Returns (node count, sorted 0-based edge list).  Duplicate edges are
    dropped with a warning; a header/edge-count mismatch warns and proceeds.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]
    declared_n = declared_m = None
    raw_pairs: list[tuple[int, int, int]] = []
    for ln, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "edge":
                raise ParseError(f"line {ln}: malformed problem line {line!r}")
            try:
                declared_n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"line {ln}: non-integer header fields") from None
            if declared_n < 1:
                raise ParseError(f"line {ln}: node count must be positive")
            continue
        if parts[0] == "e":
            parts = parts[1:]
        if len(parts) != 2:
            raise ParseError(f"line {ln}: expected an edge 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {ln}: non-integer vertex id in {line!r}") from None
        raw_pairs.append((ln, u, v))
    if not raw_pairs:
        raise ParseError("no edges found in input")
    one_based = declared_n is not None or all(u >= 1 and v >= 1
                                              for _, u, v in raw_pairs)
    offset = 1 if one_based else 0
    n = declared_n
    if n is None:
        n = max(max(u, v) for _, u, v in raw_pairs) + (0 if one_based else 1)
    edges: set[tuple[int, int]] = set()
    duplicates = 0
    for ln, u, v in raw_pairs:
        u -= offset
        v -= offset
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"line {ln}: vertex id out of range 1..{n}"
                             if one_based else
                             f"line {ln}: vertex id out of range 0..{n - 1}")
        if u == v:
            warnings.warn(f"line {ln}: dropping self-loop at vertex {u + offset}")
            continue
        key = (min(u, v), max(u, v))
        if key in edges:
            duplicates += 1
        else:
            edges.add(key)
    if duplicates:
        warnings.warn(f"dropped {duplicates} duplicate edge line(s)")
    if declared_m is not None and declared_m != len(edges):
        warnings.warn(f"header declares {declared_m} edges, parsed {len(edges)}")
    return n, sorted(edges)


def read_im_edges(stream) -> tuple[int, list[tuple[int, int, float]]]:
    """Directed probability-annotated edges from "u v p" lines (0-based ids,
    'c'/'#' comments allowed).  Returns (node count, sorted edge list)."""
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = [line.rstrip("\n") for line in stream]
    edges: list[tuple[int, int, float]] = []
    for ln, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts or parts[0] in ("c", "#"):
            continue
        if len(parts) != 3:
            raise ParseError(f"line {ln}: expected 'u v p', got {line!r}")
        try:
            u, v, p = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"line {ln}: malformed edge {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(f"line {ln}: negative vertex id")
        edges.append((u, v, p))
    if not edges:
        raise ParseError("no edges found in input")
    n = max(max(u, v) for u, v, _ in edges) + 1
    return n, sorted(edges)

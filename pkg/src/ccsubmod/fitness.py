"""Two-objective fitness for chance-constrained submodular maximization.

A candidate set X is scored by a pair (o1, o2): o1 is minimized and measures
constraint tightness, o2 is maximized and carries the submodular value f(X)
for feasible sets (and -1 for infeasible ones).  Two formulations share the
second objective:

  * standard: o1 is a three-case tightness value built around the surrogate
    violation probability;
  * expected-weight: o1 is simply E_W(X), used when elements have unequal
    expected weights.

Feasibility is the single guard o1_standard <= alpha: the negative
certain-feasible case and the >= 1 overweight case fall on the correct side
automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .weights import BoundKind, WeightModel, _chebyshev, _chernoff


@dataclass(frozen=True)
class Subset:
    """Subset of a ground set of size n, encoded as an n-bit mask."""

    n: int
    mask: int = 0
    card: int = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ground set must be nonempty")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"mask out of range for n={self.n}")
        object.__setattr__(self, "card", self.mask.bit_count())

    @classmethod
    def from_indices(cls, n: int, indices) -> "Subset":
        mask = 0
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"index {i} out of range for n={n}")
            mask |= 1 << i
        return cls(n, mask)

    def indices(self) -> list[int]:
        return [i for i in range(self.n) if self.mask >> i & 1]

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.n and bool(self.mask >> i & 1)

    def __iter__(self):
        return iter(self.indices())

    def flipped(self, flip_mask: int) -> "Subset":
        return Subset(self.n, self.mask ^ flip_mask)

    def to_hex(self) -> str:
        return format(self.mask, "x")


class Formulation(Enum):
    G = "g"
    G_HAT = "g_hat"


class Dominance(Enum):
    NONE = "none"
    WEAK = "weak"
    STRONG = "strong"


@dataclass(frozen=True)
class ObjectivePair:
    """(minimize o1, maximize o2) with the formulation it was computed under."""

    o1: float
    o2: float
    formulation: Formulation = Formulation.G


def dominates(Y: ObjectivePair, X: ObjectivePair) -> Dominance:
    """Dominance of Y over X: weak needs o1(Y) <= o1(X) and o2(Y) >= o2(X),
    strong additionally needs the pairs to differ."""
    if Y.formulation is not X.formulation:
        raise ValueError("cannot compare pairs from different formulations")
    if Y.o1 <= X.o1 and Y.o2 >= X.o2:
        if Y.o1 != X.o1 or Y.o2 != X.o2:
            return Dominance.STRONG
        return Dominance.WEAK
    return Dominance.NONE


def _g1_scalar(ew: float, card: int, bound: float, dispersion: float,
               kind: BoundKind) -> float:
    slack = bound - ew
    if slack >= dispersion * card:
        # Even the maximal draw ew + dispersion*card stays within the budget
        # (covers the empty set and dispersion == 0 with ew <= C).
        return ew - bound
    if ew >= bound:
        return 1.0 + (ew - bound)
    if kind is BoundKind.CHEBYSHEV:
        return _chebyshev(card, slack, dispersion)
    return _chernoff(card, slack, dispersion)


def eval_g1(X: Subset, m: WeightModel, kind: BoundKind) -> float:
    """Constraint-tightness objective (minimized).

    Three regimes: certainly-feasible sets get the negative value
    E_W(X) - C, sets with expected weight at or above C get 1 + (E_W(X) - C),
    and everything in between gets the surrogate violation probability.
    """
    if X.n != m.n:
        raise ValueError(f"subset over {X.n} elements vs model over {m.n}")
    ew = m.expected_of_mask(X.mask, X.card)
    return _g1_scalar(ew, X.card, m.bound, m.dispersion, kind)


def eval_g2(f_value: float, g1_value: float, alpha: float) -> float:
    """Quality objective (maximized): f(X) for feasible sets, -1 otherwise."""
    return f_value if g1_value <= alpha else -1.0


def eval_g1_hat(X: Subset, m: WeightModel) -> float:
    """Expected-weight objective (minimized) of the alternative formulation."""
    if X.n != m.n:
        raise ValueError(f"subset over {X.n} elements vs model over {m.n}")
    return m.expected_of_mask(X.mask, X.card)


def constraint_evaluator(m: WeightModel,
                         kind: BoundKind) -> Callable[[int, int], tuple[float, float]]:
    """Closure (mask, card) -> (g1, expected weight) for hot loops.

    Same semantics as eval_g1 but skips Subset construction; with uniform
    expected weights the expected-weight lookup is O(1).
    """
    bound = m.bound
    dispersion = m.dispersion
    a = m.uniform_value
    if a is not None:
        def evaluate(mask: int, card: int) -> tuple[float, float]:
            ew = a * card
            return _g1_scalar(ew, card, bound, dispersion, kind), ew
    else:
        def evaluate(mask: int, card: int) -> tuple[float, float]:
            ew = m.expected_of_mask(mask, card)
            return _g1_scalar(ew, card, bound, dispersion, kind), ew
    return evaluate

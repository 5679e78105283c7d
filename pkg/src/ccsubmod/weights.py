"""Uniform-interval random weights and surrogate bounds on constraint violation.

Each ground-set element s has a random weight drawn uniformly from
[a(s) - delta, a(s) + delta], independently, with a shared dispersion delta.
A solution X is subject to the chance constraint Pr[W(X) > C] <= alpha with
W(X) the sum of the element weights.  The exact violation probability is
expensive to evaluate, so feasibility checks go through one of two
computable upper bounds: a one-sided Chebyshev (Cantelli) bound or a
Chernoff bound, both specialized to the uniform-interval weight model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .fitness import Subset


class BoundKind(Enum):
    """Which tail inequality backs the surrogate violation probability."""

    CHEBYSHEV = "chebyshev"
    CHERNOFF = "chernoff"


@dataclass(frozen=True)
class WeightModel:
    """Per-element expected weights plus the shared constraint parameters.

    Fields
    ------
    expected : per-element expected weight a(s), all non-negative.
    dispersion : half-width delta of the uniform weight interval, delta >= 0
        and delta <= min(expected).
    bound : constraint budget C > 0.
    alpha : tolerated violation probability, strictly inside (0, 1).
    """

    expected: tuple[float, ...]
    dispersion: float
    bound: float
    alpha: float
    uniform_value: float | None = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        exp = tuple(float(a) for a in self.expected)
        object.__setattr__(self, "expected", exp)
        if len(exp) == 0:
            raise ValueError("weight model needs at least one element")
        if any(a < 0.0 for a in exp):
            raise ValueError("expected weights must be non-negative")
        if not self.dispersion >= 0.0:
            raise ValueError(f"dispersion must be >= 0, got {self.dispersion}")
        if self.dispersion > min(exp):
            raise ValueError(
                f"dispersion {self.dispersion} exceeds the smallest expected "
                f"weight {min(exp)}"
            )
        if self.dispersion > 0.0 and min(exp) <= 0.0:
            raise ValueError("expected weights must be positive when dispersion > 0")
        if not self.bound > 0.0:
            raise ValueError(f"constraint budget must be positive, got {self.bound}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        uniform = exp[0] if all(a == exp[0] for a in exp) else None
        object.__setattr__(self, "uniform_value", uniform)

    @classmethod
    def uniform(cls, n: int, a: float = 1.0, *, dispersion: float, bound: float,
                alpha: float) -> "WeightModel":
        """Model with n elements of identical expected weight a."""
        return cls((float(a),) * n, dispersion, bound, alpha)

    @property
    def n(self) -> int:
        return len(self.expected)

    def expected_of_mask(self, mask: int, card: int) -> float:
        """Expected weight of the set encoded by a bitmask (card = popcount)."""
        if self.uniform_value is not None:
            return self.uniform_value * card
        total = 0.0
        exp = self.expected
        while mask:
            low = mask & -mask
            total += exp[low.bit_length() - 1]
            mask ^= low
        return total


def _check_same_ground_set(X: "Subset", m: WeightModel) -> None:
    if X.n != m.n:
        raise ValueError(f"subset over {X.n} elements vs model over {m.n}")


def expected_weight(X: "Subset", m: WeightModel) -> float:
    """Sum of expected weights over the selected elements (0 for the empty set)."""
    _check_same_ground_set(X, m)
    return m.expected_of_mask(X.mask, X.card)


def _chebyshev(card: int, slack: float, dispersion: float) -> float:
    # Cantelli bound with Var(W) = card * dispersion^2 / 3, clamped to [0, 1].
    num = dispersion * dispersion * card
    val = num / (num + 3.0 * slack * slack)
    return min(1.0, max(0.0, val))


def _chernoff(card: int, slack: float, dispersion: float) -> float:
    # (e^u / (1+u)^(1+u))^(card/2) with u the slack per unit of maximum
    # deviation; evaluated in log-space so large cardinalities cannot overflow.
    u = slack / (dispersion * card)
    log_val = 0.5 * card * (u - (1.0 + u) * math.log1p(u))
    return min(1.0, max(0.0, math.exp(log_val)))


def chebyshev_bound(X: "Subset", m: WeightModel) -> float:
    """Chebyshev-type upper bound on Pr[W(X) > C].

    Requires positive slack C - E_W(X) and a nonempty set; callers handle the
    saturated and empty cases themselves.
    """
    _check_same_ground_set(X, m)
    if X.card == 0:
        raise ValueError("bound undefined for the empty set (violation prob. 0)")
    slack = m.bound - m.expected_of_mask(X.mask, X.card)
    if slack <= 0.0:
        raise ValueError("expected weight must stay below the budget")
    return _chebyshev(X.card, slack, m.dispersion)


def chernoff_bound(X: "Subset", m: WeightModel) -> float:
    """Chernoff-type upper bound on Pr[W(X) > C], computed in log-space."""
    _check_same_ground_set(X, m)
    if X.card == 0:
        raise ValueError("bound undefined for the empty set (violation prob. 0)")
    if m.dispersion == 0.0:
        raise ValueError("Chernoff form needs dispersion > 0")
    slack = m.bound - m.expected_of_mask(X.mask, X.card)
    if slack < 0.0:
        raise ValueError("expected weight must not exceed the budget")
    return _chernoff(X.card, slack, m.dispersion)


def surrogate_violation_probability(X: "Subset", m: WeightModel,
                                    kind: BoundKind) -> float:
    """Total-function surrogate for Pr[W(X) > C].

    Returns 0 when the set cannot violate the constraint (empty set, or
    slack >= dispersion * |X| so even the worst-case draw stays within C),
    saturates to 1 when the expected weight already reaches C, and otherwise
    dispatches to the selected tail bound.
    """
    _check_same_ground_set(X, m)
    card = X.card
    if card == 0:
        return 0.0
    ew = m.expected_of_mask(X.mask, X.card)
    slack = m.bound - ew
    if slack >= m.dispersion * card:
        return 0.0
    if ew >= m.bound:
        return 1.0
    if kind is BoundKind.CHEBYSHEV:
        return _chebyshev(card, slack, m.dispersion)
    return _chernoff(card, slack, m.dispersion)


def sample_weight(X: "Subset", m: WeightModel, rng: np.random.Generator) -> float:
    """One draw of W(X) = sum of independent Uniform[a(s)-delta, a(s)+delta]."""
    return float(sample_total_weights(X, m, 1, rng)[0])


def sample_total_weights(X: "Subset", m: WeightModel, n_samples: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Vectorized draws of W(X); shape (n_samples,)."""
    _check_same_ground_set(X, m)
    ew = m.expected_of_mask(X.mask, X.card)
    if X.card == 0 or m.dispersion == 0.0:
        return np.full(n_samples, ew)
    noise = rng.uniform(-m.dispersion, m.dispersion, size=(n_samples, X.card))
    return ew + noise.sum(axis=1)

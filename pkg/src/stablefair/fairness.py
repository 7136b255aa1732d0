"""Fairness constraints on classifier scores and the statistical-rate metric.

A constraint is any convex function of the training scores. The covariance
constraint used by default is the absolute score/group covariance minus a
slack ``c``; it is linear in the scores up to the absolute value, so the
feasible set is a slab ``|<a, scores>| <= c`` which the solver can project on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Dataset, sign_labels


class FairnessKind(str, enum.Enum):
    COVARIANCE = "covariance"
    NONE = "none"


@dataclass(frozen=True)
class FairnessSpec:
    kind: FairnessKind = FairnessKind.COVARIANCE
    c: float = 0.1
    mu: float = 0.0  # penalty weight, penalty mode only

    def __post_init__(self):
        object.__setattr__(self, "kind", FairnessKind(self.kind))
        if not self.c >= 0:
            raise ValueError(f"constraint slack must be nonnegative, got {self.c}")
        if not self.mu >= 0:
            raise ValueError(f"penalty weight must be nonnegative, got {self.mu}")


def _binary_groups(z, num_groups=2):
    z = np.asarray(z)
    if num_groups != 2:
        raise ValueError(f"statistical parity needs exactly 2 sensitive categories, got {num_groups}")
    if not np.all(np.isin(z, (0, 1))):
        raise ValueError("group indices must be 0 or 1")
    return z


def statistical_rate(predictions, groups) -> float:
    """min(p0 / p1, p1 / p0) with ``p_g = Pr[pred = +1 | group g]``.

    Both rates zero gives 1 (no disparity is observable); exactly one zero
    gives 0.
    """
    pred = np.asarray(predictions)
    z = np.asarray(groups)
    if pred.shape != z.shape:
        raise ValueError(f"length mismatch: {pred.shape[0]} predictions, {z.shape[0]} groups")
    _binary_groups(z)
    n0, n1 = np.sum(z == 0), np.sum(z == 1)
    if n0 == 0 or n1 == 0:
        raise ValueError("both groups must be present")
    # compare cross-multiplied counts so equal rates give exactly 1
    a = np.sum((pred == 1) & (z == 0)) * n1
    b = np.sum((pred == 1) & (z == 1)) * n0
    if a == 0 and b == 0:
        return 1.0
    if a == 0 or b == 0:
        return 0.0
    return float(min(a, b) / max(a, b))


def gamma(f, S: Dataset) -> float:
    return statistical_rate(sign_labels(f.scores(S.X)), _binary_groups(S.z, S.num_groups))


class CovarianceConstraint:
    """``Omega(scores) = |<a, scores>| - c`` with ``a_i = (z_i - mean(z)) / N``.

    ``a`` is the coefficient vector of the covariance functional, so the
    constraint is a slab in any parameterization that is linear in the scores.
    """

    def __init__(self, S: Dataset, c: float = 0.1):
        z = _binary_groups(S.z, S.num_groups).astype(float)
        if len(S) == 0 or np.all(z == z[0]):
            raise ValueError("covariance constraint needs both groups in the dataset")
        self.a = (z - z.mean()) / len(S)
        self.c = float(c)

    def covariance(self, scores) -> float:
        return float(self.a @ np.asarray(scores, dtype=float))

    def value(self, scores) -> float:
        return abs(self.covariance(scores)) - self.c

    def score_subgradient(self, scores) -> np.ndarray:
        return np.sign(self.covariance(scores)) * self.a

    def clip(self, u: float) -> float:
        """Nearest feasible covariance value."""
        return float(np.clip(u, -self.c, self.c))


def constraint_for(spec: FairnessSpec, S: Dataset):
    if spec.kind is FairnessKind.NONE:
        return None
    return CovarianceConstraint(S, spec.c)


def covariance_constraint(f, S: Dataset, c: float = 0.1) -> float:
    """Constraint value of classifier f on S; ``<= 0`` means satisfied."""
    return CovarianceConstraint(S, c).value(f.scores(S.X))


def fairness_penalty(f, S: Dataset, spec: FairnessSpec) -> float:
    """``mu * max(0, Omega(f))``: zero on the feasible set, convex in the scores."""
    if spec.kind is FairnessKind.NONE:
        raise ValueError("fairness_penalty needs a fairness constraint")
    if spec.mu == 0:
        return 0.0
    return spec.mu * max(0.0, covariance_constraint(f, S, spec.c))

"""Score-based losses ``L(score, y)``, their derivatives in the score, and
their admissibility (Lipschitz-in-score) constants."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit


class LossKind(str, enum.Enum):
    HINGE = "hinge"
    SQUARED = "squared"
    LOGISTIC = "logistic"
    ZERO_ONE = "zero_one"


@dataclass(frozen=True)
class LossSpec:
    kind: LossKind = LossKind.LOGISTIC
    B: Optional[float] = None  # score bound, Squared only

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.B is not None and not self.B > 0:
            raise ValueError(f"score bound B must be positive, got {self.B}")
        if self.kind is LossKind.SQUARED and self.B is None:
            raise ValueError("squared loss needs a score bound B")


def _check_labels(y):
    y = np.asarray(y)
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be -1 or +1")
    return y.astype(float)


def loss(spec: LossSpec, score, y):
    """Loss value; works elementwise on arrays and returns a float for scalars."""
    s = np.asarray(score, dtype=float)
    yf = _check_labels(y)
    k = spec.kind
    if k is LossKind.HINGE:
        out = np.maximum(0.0, 1.0 - yf * s)
    elif k is LossKind.SQUARED:
        out = (s - yf) ** 2
    elif k is LossKind.LOGISTIC:
        # log(1 + exp(-m)) without overflow for large |m|
        out = np.logaddexp(0.0, -yf * s)
    else:
        if not np.all(np.isin(s, (-1.0, 1.0))):
            raise ValueError("zero-one loss needs scores in {-1, +1}")
        out = (s != yf).astype(float)
    return float(out) if np.ndim(out) == 0 else out


def loss_grad(spec: LossSpec, score, y):
    """Derivative of the loss in the score (hinge uses 0 at the kink)."""
    s = np.asarray(score, dtype=float)
    yf = _check_labels(y)
    k = spec.kind
    if k is LossKind.HINGE:
        out = np.where(yf * s < 1.0, -yf, 0.0)
    elif k is LossKind.SQUARED:
        out = 2.0 * (s - yf)
    elif k is LossKind.LOGISTIC:
        out = -yf * expit(-yf * s)
    else:
        raise ValueError("zero-one loss has no useful derivative")
    return float(out) if np.ndim(out) == 0 else out


def loss_curvature(spec: LossSpec, score, y):
    """Second derivative in the score (0 for the piecewise-linear hinge)."""
    s = np.asarray(score, dtype=float)
    yf = _check_labels(y)
    if spec.kind is LossKind.LOGISTIC:
        p = expit(-yf * s)
        return p * (1.0 - p)
    if spec.kind is LossKind.SQUARED:
        return np.full_like(s, 2.0)
    if spec.kind is LossKind.HINGE:
        return np.zeros_like(s)
    raise ValueError("zero-one loss has no useful derivative")


def admissibility_constant(spec: LossSpec) -> float:
    """sigma such that ``|L(a, y) - L(b, y)| <= sigma |a - b|``.

    For the squared loss this holds only for scores in ``[-B, B]``.
    """
    k = spec.kind
    if k in (LossKind.HINGE, LossKind.LOGISTIC):
        return 1.0
    if k is LossKind.ZERO_ONE:
        return 0.5
    if spec.B is None:
        raise ValueError("squared loss needs a score bound B")
    return 2.0 * spec.B + 2.0

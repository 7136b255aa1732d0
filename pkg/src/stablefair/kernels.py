"""Kernel functions and RKHS quantities for kernel-expansion classifiers."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# rkhs_norm_sq tolerates this much negative round-off before declaring the kernel broken
NEG_ROUNDOFF = 1e-10


class KernelKind(str, enum.Enum):
    LINEAR = "linear"
    RBF = "rbf"
    MULTIQUADRIC = "multiquadric"
    INVERSE_MULTIQUADRIC = "inverse_multiquadric"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel identity plus the shape constant ``c`` of the multiquadric family.

    The RBF kernel has no bandwidth: ``k(x, y) = exp(-||x - y||^2)``. Scale the
    features instead.
    """

    kind: KernelKind = KernelKind.LINEAR
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"kernel shape constant must be positive, got {self.c}")


def _sq_dists(X, Y):
    d = (X * X).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * X @ Y.T
    return np.maximum(d, 0.0)


def gram(k: KernelSpec, X, Y=None) -> np.ndarray:
    """Kernel matrix ``G[i, j] = k(X[i], Y[j])`` for row-stacked point sets."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if k.kind is KernelKind.LINEAR:
        return X @ Y.T
    if Y is X:
        D = _sq_dists(X, X)
        np.fill_diagonal(D, 0.0)
    else:
        D = _sq_dists(X, Y)
    if k.kind is KernelKind.RBF:
        return np.exp(-D)
    if k.kind is KernelKind.MULTIQUADRIC:
        return np.sqrt(D + k.c**2)
    return 1.0 / np.sqrt(D + k.c**2)


def kernel_eval(k: KernelSpec, x, x_prime) -> float:
    x = np.asarray(x, dtype=float).ravel()
    x_prime = np.asarray(x_prime, dtype=float).ravel()
    if x.shape != x_prime.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {x_prime.shape[0]}")
    if k.kind is KernelKind.LINEAR:
        return float(x @ x_prime)
    diff = x - x_prime
    d2 = float(diff @ diff)
    if k.kind is KernelKind.RBF:
        return float(np.exp(-d2))
    if k.kind is KernelKind.MULTIQUADRIC:
        return float(np.sqrt(d2 + k.c**2))
    return float(1.0 / np.sqrt(d2 + k.c**2))


def kernel_diag(k: KernelSpec, X) -> np.ndarray:
    """``k(x, x)`` for every row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if k.kind is KernelKind.LINEAR:
        return (X * X).sum(1)
    if k.kind is KernelKind.RBF:
        return np.ones(n)
    if k.kind is KernelKind.MULTIQUADRIC:
        return np.full(n, k.c)
    return np.full(n, 1.0 / k.c)


def kappa_sq(k: KernelSpec, X=None) -> float:
    """Upper bound on ``k(x, x)`` over X.

    Only the linear kernel depends on the data; the other kinds have a constant
    diagonal and X may be omitted.
    """
    if k.kind is KernelKind.LINEAR:
        if X is None or np.size(X) == 0:
            raise ValueError("kappa_sq of the linear kernel needs a nonempty point set")
        return float(kernel_diag(k, X).max())
    if k.kind is KernelKind.RBF:
        return 1.0
    if k.kind is KernelKind.MULTIQUADRIC:
        return float(k.c)
    return float(1.0 / k.c)


def evaluate(f, x) -> float:
    """Score ``sum_i alpha_i k(anchor_i, x)`` of a kernel classifier at one point."""
    x = np.asarray(x, dtype=float).ravel()
    if f.anchors.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {f.anchors.shape[1]} vs {x.shape[0]}")
    return float(gram(f.kernel, f.anchors, x[None, :])[:, 0] @ f.alpha)


def quad_form(K, alpha) -> float:
    """``alpha^T K alpha`` with the round-off clamp used for all RKHS norms."""
    v = float(alpha @ K @ alpha)
    if not np.isfinite(v):
        raise FloatingPointError("non-finite RKHS norm")
    if v < 0:
        scale = max(1.0, float(np.abs(alpha).sum()) ** 2 * float(np.abs(K).max(initial=0.0)))
        if v < -NEG_ROUNDOFF * scale:
            raise ValueError(f"negative squared RKHS norm {v:.3e}; kernel is not positive semidefinite here")
        v = 0.0
    return v


def rkhs_norm_sq(f) -> float:
    if len(f.alpha) == 0:
        return 0.0
    return quad_form(gram(f.kernel, f.anchors), f.alpha)


def rkhs_distance(f, g) -> float:
    """RKHS norm of ``f - g`` for two kernel classifiers sharing a kernel.

    The difference is expanded over the union of both anchor sets.
    """
    if f.kernel != g.kernel:
        raise ValueError("classifiers use different kernels")
    anchors = np.vstack([f.anchors, g.anchors])
    coef = np.concatenate([f.alpha, -g.alpha])
    return float(np.sqrt(quad_form(gram(f.kernel, anchors), coef)))

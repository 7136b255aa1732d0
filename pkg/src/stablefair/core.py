"""Samples, datasets, classifiers, and the swap/split operations used by the
stability experiments.

Datasets are stored column-wise (feature matrix, group vector, label vector)
and frozen after construction, so they can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .kernels import KernelSpec, KernelKind, gram


class Sample(NamedTuple):
    x: np.ndarray
    z: int
    y: int


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered collection of samples ``(x_i, z_i, y_i)``.

    ``z`` is the sensitive-attribute category index in ``[0, num_groups)`` and
    ``y`` the label in ``{-1, +1}``.
    """

    X: np.ndarray
    z: np.ndarray
    y: np.ndarray
    num_groups: int = 2

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(0, 0)
        if X.ndim != 2:
            raise ValueError("features must be a 2-d array")
        z = np.asarray(self.z).reshape(-1)
        y = np.asarray(self.y).reshape(-1)
        n = X.shape[0]
        if z.shape[0] != n or y.shape[0] != n:
            raise ValueError(f"length mismatch: X has {n} rows, z {z.shape[0]}, y {y.shape[0]}")
        if self.num_groups < 1:
            raise ValueError("num_groups must be positive")
        if not np.all(np.isfinite(X)):
            raise ValueError("features must be finite")
        if n and not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if n and not np.all(np.equal(np.mod(z, 1), 0)):
            raise ValueError("group indices must be integers")
        if n and (z.min() < 0 or z.max() >= self.num_groups):
            raise ValueError(f"group index outside [0, {self.num_groups})")
        object.__setattr__(self, "X", _frozen(X, float))
        object.__setattr__(self, "z", _frozen(z, np.int64))
        object.__setattr__(self, "y", _frozen(y, np.int64))

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], num_groups: int = 2, dim: Optional[int] = None):
        if not samples:
            return cls(np.zeros((0, dim or 0)), [], [], num_groups)
        X = np.vstack([np.asarray(s.x, dtype=float).ravel() for s in samples])
        return cls(X, [s.z for s in samples], [s.y for s in samples], num_groups)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> list[Sample]:
        return [self[i] for i in range(len(self))]

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i) -> Sample:
        return Sample(self.X[i], int(self.z[i]), int(self.y[i]))

    def __iter__(self) -> Iterator[Sample]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.num_groups == other.num_groups
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.z[idx], self.y[idx], self.num_groups)

    def with_features(self, X) -> "Dataset":
        return Dataset(X, self.z, self.y, self.num_groups)

    def concat(self, other: "Dataset") -> "Dataset":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Dataset(
            np.vstack([self.X, other.X]),
            np.concatenate([self.z, other.z]),
            np.concatenate([self.y, other.y]),
            max(self.num_groups, other.num_groups),
        )


def swap_sample(S: Dataset, i: int, s_new: Sample) -> Dataset:
    """Return ``S^i``: a copy of S whose i-th sample is replaced by ``s_new``."""
    n = len(S)
    if not 0 <= i < n:
        raise IndexError(f"swap index {i} outside [0, {n})")
    x = np.asarray(s_new.x, dtype=float).ravel()
    if x.shape[0] != S.dim:
        raise ValueError(f"replacement has dimension {x.shape[0]}, dataset has {S.dim}")
    X = S.X.copy()
    z = S.z.copy()
    y = S.y.copy()
    X[i], z[i], y[i] = x, s_new.z, s_new.y
    return Dataset(X, z, y, S.num_groups)


def derive_seed(master: int, counter: int) -> np.random.SeedSequence:
    """Per-repetition seed: the SeedSequence keyed by ``(master, counter)``.

    Repetition ``r`` always gets ``derive_seed(master, r)``, independent of how
    many repetitions run or in which order.
    """
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF, int(counter)])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split(S: Dataset, test_frac: float, train_frac: float = 1.0, seed=0):
    """Draw a test set of ``floor(test_frac * N)`` samples, then a training set
    of ``floor(train_frac * (N - |test|))`` samples from the remainder.

    Both draws are without replacement. Returns ``(train, test)``.
    """
    if not 0 < test_frac < 1:
        raise ValueError("test_frac must lie in (0, 1)")
    if not 0 < train_frac <= 1:
        raise ValueError("train_frac must lie in (0, 1]")
    train_idx, test_idx = split_indices(len(S), test_frac, train_frac, seed)
    return S.subset(train_idx), S.subset(test_idx)


def split_indices(n: int, test_frac: float, train_frac: float = 1.0, seed=0):
    rng = _rng(seed)
    n_test = int(np.floor(test_frac * n))
    perm = rng.permutation(n)
    test_idx, rest = perm[:n_test], perm[n_test:]
    n_train = int(np.floor(train_frac * len(rest)))
    if n_test == 0 or n_train == 0:
        raise ValueError(f"split of {n} samples leaves an empty side (test {n_test}, train {n_train})")
    train_idx = rng.choice(rest, size=n_train, replace=False)
    return np.sort(train_idx), np.sort(test_idx)


@dataclass(frozen=True)
class Repetition:
    train: Dataset
    test: Dataset
    pool: Dataset  # samples in neither train nor test


def repeated_splits(
    S: Dataset,
    n: int,
    test_frac: float = 0.2,
    train_frac: float = 0.75,
    seed: int = 0,
    shared_test: bool = True,
) -> list[Repetition]:
    """Train/test partitions for ``n`` repetitions.

    With ``shared_test`` one common test set is drawn first (counter 0 of the
    master seed) and every repetition resamples its training set from the rest
    using counter ``r + 1``. Otherwise each repetition draws a fresh split.
    """
    if n < 1:
        raise ValueError("need at least one repetition")
    N = len(S)
    reps = []
    if shared_test:
        rng = np.random.default_rng(derive_seed(seed, 0))
        n_test = int(np.floor(test_frac * N))
        perm = rng.permutation(N)
        test_idx, rest = np.sort(perm[:n_test]), perm[n_test:]
        n_train = int(np.floor(train_frac * len(rest)))
        if n_test == 0 or n_train == 0:
            raise ValueError(f"split of {N} samples leaves an empty side")
        test = S.subset(test_idx)
        for r in range(n):
            rr = np.random.default_rng(derive_seed(seed, r + 1))
            train_idx = np.sort(rr.choice(rest, size=n_train, replace=False))
            pool_idx = np.setdiff1d(rest, train_idx)
            reps.append(Repetition(S.subset(train_idx), test, S.subset(pool_idx)))
    else:
        for r in range(n):
            train_idx, test_idx = split_indices(N, test_frac, train_frac, derive_seed(seed, r + 1))
            pool_idx = np.setdiff1d(np.arange(N), np.concatenate([train_idx, test_idx]))
            reps.append(Repetition(S.subset(train_idx), S.subset(test_idx), S.subset(pool_idx)))
    return reps


@dataclass(frozen=True, eq=False)
class KernelClassifier:
    """``f(x) = sum_i alpha_i k(anchor_i, x)``."""

    alpha: np.ndarray
    anchors: np.ndarray
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).ravel()
        anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        if anchors.shape[0] != alpha.shape[0]:
            raise ValueError(f"{alpha.shape[0]} coefficients for {anchors.shape[0]} anchors")
        if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(anchors))):
            raise ValueError("classifier entries must be finite")
        object.__setattr__(self, "alpha", _frozen(alpha, float))
        object.__setattr__(self, "anchors", _frozen(anchors, float))

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    def scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs {self.dim}")
        return gram(self.kernel, X, self.anchors) @ self.alpha

    def primal_weights(self) -> np.ndarray:
        """``beta = sum_i alpha_i x_i``; only meaningful for the linear kernel."""
        if self.kernel.kind is not KernelKind.LINEAR:
            raise ValueError("primal weights exist only for the linear kernel")
        return self.anchors.T @ self.alpha


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """``f(x) = <w, phi(x)>`` with ``phi`` the identity unless given."""

    weights: np.ndarray
    feature_map: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise ValueError("classifier entries must be finite")
        object.__setattr__(self, "weights", _frozen(w, float))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def features(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Phi = X if self.feature_map is None else np.atleast_2d(self.feature_map(X))
        if Phi.shape[1] != self.dim:
            raise ValueError(f"dimension mismatch: {Phi.shape[1]} vs {self.dim}")
        return Phi

    def scores(self, X) -> np.ndarray:
        return self.features(X) @ self.weights


def score(f, x) -> float:
    return float(f.scores(np.asarray(x, dtype=float).reshape(1, -1))[0])


def sign_labels(scores) -> np.ndarray:
    """+1 where the score is >= 0, else -1."""
    scores = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(scores)):
        raise FloatingPointError("non-finite classifier score")
    return np.where(scores >= 0, 1, -1)


def predict(f, x) -> int:
    """Label of a single point; a score of exactly 0 maps to +1."""
    return int(sign_labels(score(f, x)))


def predict_all(f, X) -> np.ndarray:
    return sign_labels(f.scores(X))


def accuracy(f, S: Dataset) -> float:
    return float(np.mean(predict_all(f, S.X) == S.y))


def norm_sq(f) -> float:
    """Squared RKHS norm of a classifier (``||w||^2`` for a linear classifier)."""
    if isinstance(f, LinearClassifier):
        return float(f.weights @ f.weights)
    from .kernels import rkhs_norm_sq

    return rkhs_norm_sq(f)


def _as_weights(f):
    if isinstance(f, LinearClassifier):
        return f.weights, f.feature_map
    if f.kernel.kind is KernelKind.LINEAR:
        return f.primal_weights(), None
    return None, None


def distance(f, g) -> float:
    """RKHS distance ``||f - g||``; linear-kernel expansions compare as weights."""
    wf, mf = _as_weights(f)
    wg, mg = _as_weights(g)
    if wf is not None and wg is not None and mf is mg:
        return float(np.linalg.norm(wf - wg))
    if isinstance(f, KernelClassifier) and isinstance(g, KernelClassifier):
        from .kernels import rkhs_distance

        return rkhs_distance(f, g)
    raise ValueError("cannot compare these classifiers in a common RKHS")

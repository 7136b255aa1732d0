"""Empirical stability, fairness and generalization measurements, and the
closed-form bounds they are checked against.

The bounds assume exact minimizers. Every empirical-vs-bound comparison here
adds a solver allowance derived from the stationarity gap: for a
``2*lam``-strongly convex objective the returned iterate lies within
``gap / lam`` of the exact minimizer in RKHS norm, so two trained
classifiers can add at most ``2 * gap / lam`` to a norm gap and
``2 * sigma * kappa * gap / lam`` to a loss gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Dataset, Sample, derive_seed, distance, repeated_splits, sign_labels, swap_sample, accuracy
from .fairness import gamma, _binary_groups, statistical_rate, FairnessKind, constraint_for
from .kernels import KernelKind, kappa_sq as kernel_kappa_sq
from .losses import LossKind, LossSpec, admissibility_constant, loss, loss_grad
from .solver import TrainConfig, TrainResult, empirical_risk, train


@dataclass(frozen=True)
class BoundInputs:
    sigma: float
    kappa_sq: float
    lam: Optional[float] = None
    N: int = 1
    B: Optional[float] = None  # norm bound on the best fair classifier
    G: Optional[float] = None  # gradient bound, linear models
    delta: Optional[float] = None  # confidence level

    def __post_init__(self):
        if not self.sigma > 0 or not self.kappa_sq > 0:
            raise ValueError("sigma and kappa_sq must be positive")
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def kappa(self) -> float:
        return math.sqrt(self.kappa_sq)


def _lam(inp: BoundInputs) -> float:
    if inp.lam is None or inp.lam <= 0:
        raise ValueError("bound is undefined for lambda = 0")
    return inp.lam


def stability_bound_rkhs(inp: BoundInputs) -> float:
    """``sigma^2 kappa^2 / (lam N)``."""
    return inp.sigma**2 * inp.kappa_sq / (_lam(inp) * inp.N)


def norm_gap_bound(inp: BoundInputs) -> float:
    """``sigma kappa / (lam N)``: RKHS distance between classifiers trained on
    sets differing in one sample."""
    return inp.sigma * inp.kappa / (_lam(inp) * inp.N)


def stability_bound_linear(inp: BoundInputs) -> float:
    """``G^2 / (lam N)``."""
    if inp.G is None:
        raise ValueError("linear-model bound needs the gradient bound G")
    return inp.G**2 / (_lam(inp) * inp.N)


def generalization_bound_highprob(inp: BoundInputs, linear: bool = False) -> float:
    """Deviation term ``8 sqrt((2 c / (lam N) + 1/N) ln(8/delta))`` with
    ``c = sigma^2 kappa^2``, or ``G^2`` for linear models."""
    if inp.delta is None:
        raise ValueError("high-probability bound needs delta")
    c = inp.G**2 if linear else inp.sigma**2 * inp.kappa_sq
    if linear and inp.G is None:
        raise ValueError("linear-model bound needs the gradient bound G")
    lam = _lam(inp)
    return 8.0 * math.sqrt((2.0 * c / (lam * inp.N) + 1.0 / inp.N) * math.log(8.0 / inp.delta))


def excess_risk_bound(inp: BoundInputs, linear: bool = False) -> float:
    """``sigma^2 kappa^2 / (lam N) + lam B^2`` (``G^2`` in place of
    ``sigma^2 kappa^2`` for linear models)."""
    if inp.B is None or inp.B <= 0:
        raise ValueError("excess-risk bound needs a positive norm bound B")
    stab = stability_bound_linear(inp) if linear else stability_bound_rkhs(inp)
    return stab + _lam(inp) * inp.B**2


def optimal_lambda(inp: BoundInputs) -> float:
    """Minimizer ``sigma kappa / (B sqrt(N))`` of the excess-risk bound; the
    bound there equals ``2 sigma kappa B / sqrt(N)``."""
    if inp.B is None or inp.B <= 0:
        raise ValueError("optimal lambda needs a positive norm bound B")
    return inp.sigma * inp.kappa / (inp.B * math.sqrt(inp.N))


def solver_allowance(gaps: Sequence[float], lam: float, sigma: float = 1.0, kappa: float = 1.0):
    """``(loss_allowance, norm_allowance)`` for a comparison of two trained
    classifiers whose worst stationarity gap is ``max(gaps)``."""
    if lam <= 0:
        raise ValueError("allowance needs lambda > 0")
    eps = max(gaps) / lam
    return 2.0 * sigma * kappa * eps, 2.0 * eps


@dataclass(frozen=True)
class GEstimate:
    estimate: float  # empirical lower estimate of G
    ceiling: float  # analytic sigma * kappa


def estimate_G(
    loss_spec: LossSpec,
    S: Dataset,
    classifier_samples: int = 100,
    seed=0,
    fairness=None,
    radius: float = 1.0,
    feature_map=None,
) -> GEstimate:
    """Largest ``|dL/dscore| * ||phi(x)||`` over S and sampled weight vectors.

    Weights are drawn uniformly from the ball of the given radius (plus the
    zero vector) and, when a fairness spec is given, projected onto the
    feasible slab of its constraint.
    """
    if classifier_samples < 1:
        raise ValueError("need at least one classifier sample")
    Phi = S.X if feature_map is None else np.atleast_2d(feature_map(S.X))
    rng = np.random.default_rng(seed)
    d = Phi.shape[1]
    W = rng.standard_normal((classifier_samples, d))
    W *= (radius * rng.random(classifier_samples) ** (1.0 / d) / np.maximum(np.linalg.norm(W, axis=1), 1e-300))[:, None]
    W = np.vstack([np.zeros(d), W])
    con = None
    if fairness is not None and fairness.kind is not FairnessKind.NONE:
        con = constraint_for(fairness, S)
        h = Phi.T @ con.a
        hh = float(h @ h)
        if hh > 0:
            u = W @ h
            W = W + ((np.clip(u, -con.c, con.c) - u) / hh)[:, None] * h[None, :]
    norms = np.linalg.norm(Phi, axis=1)
    scores = W @ Phi.T  # (samples, N)
    grads = np.abs(loss_grad(loss_spec, scores, np.broadcast_to(S.y, scores.shape)))
    est = float((grads * norms[None, :]).max()) if len(S) else 0.0
    kappa = float(norms.max()) if len(S) else 0.0
    return GEstimate(est, admissibility_constant(loss_spec) * kappa)


@dataclass(frozen=True)
class UniformStabilityResult:
    beta_hat: float
    norm_gap: float
    probe_beta: np.ndarray  # per-probe sup-norm loss gap over the eval set
    probe_norm: np.ndarray  # per-probe RKHS distance
    probe_index: np.ndarray
    loss_allowance: float
    norm_allowance: float
    converged: bool
    base: TrainResult = field(repr=False)


def _loss_gap(loss_spec, f, g, E: Dataset) -> float:
    return float(np.max(np.abs(loss(loss_spec, f.scores(E.X), E.y) - loss(loss_spec, g.scores(E.X), E.y))))


def empirical_uniform_stability(
    S: Dataset,
    config: TrainConfig,
    probes: int,
    replacement_sampler: Callable[[np.random.Generator], Sample],
    eval_set: Dataset,
    seed=0,
    base: Optional[TrainResult] = None,
) -> UniformStabilityResult:
    """Train on S and on ``probes`` single-swap neighbours ``S^i``.

    Each probe draws an index i uniformly and a replacement from
    ``replacement_sampler(rng)``. Returns the largest loss gap over
    ``eval_set`` and the largest RKHS distance seen.
    """
    if probes < 1:
        raise ValueError("need at least one probe")
    if config.lam <= 0:
        raise ValueError("uniform stability is only certified for lambda > 0")
    rng = np.random.default_rng(seed)
    g = base if base is not None else train(S, config)
    betas, norms, idx, gaps = [], [], [], [g.stationarity_gap]
    converged = g.converged
    for _ in range(probes):
        i = int(rng.integers(len(S)))
        Si = swap_sample(S, i, replacement_sampler(rng))
        gi = train(Si, config)
        converged &= gi.converged
        gaps.append(gi.stationarity_gap)
        betas.append(_loss_gap(config.loss, g.classifier, gi.classifier, eval_set))
        norms.append(distance(g.classifier, gi.classifier))
        idx.append(i)
    sigma = admissibility_constant(config.loss)
    kappa = math.sqrt(_kappa_sq(config, S.concat(eval_set)))
    la, na = solver_allowance(gaps, config.lam, sigma, kappa)
    return UniformStabilityResult(
        beta_hat=float(max(betas)),
        norm_gap=float(max(norms)),
        probe_beta=np.array(betas),
        probe_norm=np.array(norms),
        probe_index=np.array(idx),
        loss_allowance=la,
        norm_allowance=na,
        converged=bool(converged),
        base=g,
    )


def _kappa_sq(config: TrainConfig, S: Dataset) -> float:
    if config.feature_map is not None:
        Phi = np.atleast_2d(config.feature_map(S.X))
        return float((Phi * Phi).sum(1).max())
    return kernel_kappa_sq(config.kernel, S.X)


def swap_norm_bound(g, g_i, x_i, x_i_new, sigma: float, lam: float, N: int) -> float:
    """Right-hand side ``sigma/(2 lam N) (|g(x_i) - g^i(x_i)| + |g(x'_i) - g^i(x'_i)|)``
    bounding ``||g - g^i||^2`` for exact minimizers."""
    P = np.vstack([np.asarray(x_i, float).ravel(), np.asarray(x_i_new, float).ravel()])
    diff = np.abs(g.scores(P) - g_i.scores(P))
    return sigma / (2.0 * lam * N) * float(diff.sum())


@dataclass(frozen=True)
class AgreementCheck:
    violations: int
    low_margin_mass: float
    max_score_gap: float


def prediction_agreement_check(g, g_i, eval_set, margin_threshold: float) -> AgreementCheck:
    """Count sign disagreements among points where ``|g(x)| > margin_threshold``.

    When the threshold is at least the largest score gap between the two
    classifiers no such disagreement is possible, so the disagreement
    probability is bounded by the low-margin mass ``Pr[|g(x)| <= threshold]``.
    """
    if margin_threshold < 0:
        raise ValueError("margin threshold must be nonnegative")
    X = eval_set.X if isinstance(eval_set, Dataset) else np.atleast_2d(eval_set)
    a, b = g.scores(X), g_i.scores(X)
    high = np.abs(a) > margin_threshold
    flips = sign_labels(a) != sign_labels(b)
    return AgreementCheck(
        violations=int(np.sum(flips & high)),
        low_margin_mass=float(np.mean(~high)),
        max_score_gap=float(np.max(np.abs(a - b))) if len(a) else 0.0,
    )


def stab_metric(classifiers, T: Dataset) -> float:
    """Average over ordered pairs ``i != j`` of the number of test points on
    which classifiers i and j predict differently."""
    n = len(classifiers)
    if n < 2:
        raise ValueError("stab needs at least two classifiers")
    if len(T) == 0:
        raise ValueError("stab needs a nonempty test set")
    P = np.vstack([sign_labels(f.scores(T.X)) == 1 for f in classifiers])
    return stab_from_predictions(P)


def stab_from_predictions(P) -> float:
    """stab from an (n, |T|) array of ``I[f_i(x) >= 0]`` indicators.

    Per test point, ``k`` positive votes out of n give ``2 k (n - k)``
    disagreeing ordered pairs.
    """
    P = np.asarray(P, dtype=np.int64)
    n = P.shape[0]
    k = P.sum(0)
    return float(np.sum(2 * k * (n - k)) / (n * (n - 1)))


def generalization_gap(f, train_set: Dataset, holdout: Dataset, loss_spec: LossSpec) -> float:
    """Holdout risk minus training risk."""
    return empirical_risk(f, holdout, loss_spec) - empirical_risk(f, train_set, loss_spec)


def bregman(F, f, f_prime, grad=None, inner=None) -> float:
    """``F(f) - F(f') - <f - f', grad F(f')>`` in coefficient coordinates.

    ``grad`` defaults to ``F.grad``; ``inner`` defaults to the Euclidean dot
    product and may be a matrix ``M`` giving ``<a, b> = a^T M b``.
    """
    grad = grad if grad is not None else F.grad
    f = np.asarray(f, dtype=float)
    f_prime = np.asarray(f_prime, dtype=float)
    d = f - f_prime
    gp = np.asarray(grad(f_prime), dtype=float)
    ip = float(d @ gp) if inner is None else float(d @ np.asarray(inner) @ gp)
    val = float(F(f)) - float(F(f_prime)) - ip
    if not np.isfinite(val):
        raise FloatingPointError("non-finite Bregman divergence")
    return val


class QuadraticFunctional:
    """``F(v) = 0.5 v^T A v + b^T v + c``."""

    def __init__(self, A, b=None, c=0.0):
        self.A = np.asarray(A, dtype=float)
        self.b = np.zeros(self.A.shape[0]) if b is None else np.asarray(b, dtype=float)
        self.c = float(c)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        return 0.5 * float(v @ self.A @ v) + float(self.b @ v) + self.c

    def grad(self, v):
        return self.A @ np.asarray(v, dtype=float) + self.b


@dataclass(frozen=True)
class Protocol:
    n_reps: int = 50
    test_frac: float = 0.2
    train_frac: float = 0.75
    shared_test: bool = True
    seed: int = 0
    probes: int = 5  # single-swap retrainings for beta_hat; 0 disables
    replacement_sampler: Optional[Callable] = None  # default: uniform from unused data


@dataclass(frozen=True)
class StabilityReport:
    lam: float
    n_reps: int
    n_train: int
    acc_mean: float
    acc_std: float
    gamma_mean: float
    gamma_std: float
    stab: Optional[float]
    gen_gap: float
    beta_hat: Optional[float]
    norm_gap: Optional[float]
    beta_bound: Optional[float]
    loss_allowance: Optional[float]
    sigma: float
    kappa_sq: float
    converged: bool

    @property
    def compliant(self) -> Optional[bool]:
        if self.beta_bound is None or self.beta_hat is None:
            return None
        return self.beta_hat <= self.beta_bound + self.loss_allowance


def _std(v):
    v = np.asarray(v, dtype=float)
    return float(v.std(ddof=1)) if len(v) > 1 else 0.0


def run_stability_suite(S: Dataset, config: TrainConfig, protocol: Protocol = Protocol()) -> StabilityReport:
    """Repeated-split evaluation of one training configuration.

    Trains on ``n_reps`` resampled training sets, measures accuracy and the
    statistical rate on the test set, stab across the repetitions, the
    holdout-minus-train risk, and (for lam > 0) the empirical uniform
    stability of the first repetition against its bound.
    """
    reps = repeated_splits(S, protocol.n_reps, protocol.test_frac, protocol.train_frac, protocol.seed, protocol.shared_test)
    results = [train(r.train, config) for r in reps]
    clfs = [res.classifier for res in results]
    accs = [accuracy(f, r.test) for f, r in zip(clfs, reps)]
    gammas = [gamma(f, r.test) for f, r in zip(clfs, reps)]
    gaps = [generalization_gap(f, r.train, r.test, config.loss) for f, r in zip(clfs, reps)]
    stab = None
    if protocol.n_reps > 1:
        if protocol.shared_test:
            stab = stab_metric(clfs, reps[0].test)
        else:
            # no common test set: compare on the union of all test sets
            T = reps[0].test
            for r in reps[1:]:
                T = T.concat(r.test)
            stab = stab_metric(clfs, T)
    converged = all(res.converged for res in results)

    sigma = admissibility_constant(config.loss)
    ksq = _kappa_sq(config, S)
    n_train = len(reps[0].train)
    beta_hat = norm_gap = bound = allowance = None
    if config.lam > 0 and protocol.probes > 0:
        r0 = reps[0]
        sampler = protocol.replacement_sampler
        if sampler is None:
            source = r0.pool if len(r0.pool) else r0.test
            sampler = lambda rng, _src=source: _src[int(rng.integers(len(_src)))]
        us = empirical_uniform_stability(
            r0.train, config, protocol.probes, sampler, r0.test, derive_seed(protocol.seed, 10**6), base=results[0]
        )
        beta_hat, norm_gap, allowance = us.beta_hat, us.norm_gap, us.loss_allowance
        bound = stability_bound_rkhs(BoundInputs(sigma, ksq, config.lam, n_train))
        converged &= us.converged
    return StabilityReport(
        lam=config.lam,
        n_reps=protocol.n_reps,
        n_train=n_train,
        acc_mean=float(np.mean(accs)),
        acc_std=_std(accs),
        gamma_mean=float(np.mean(gammas)),
        gamma_std=_std(gammas),
        stab=stab,
        gen_gap=float(np.mean(gaps)),
        beta_hat=beta_hat,
        norm_gap=norm_gap,
        beta_bound=bound,
        loss_allowance=allowance,
        sigma=sigma,
        kappa_sq=ksq,
        converged=bool(converged),
    )

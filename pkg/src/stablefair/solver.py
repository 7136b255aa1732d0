"""Training for the regularized fair risk minimization problem

    min_f  (1/N) sum_i L(f(x_i), y_i) + lam * ||f||_k^2   s.t.  Omega_S(f) <= 0

and its penalty variant ``... + mu * max(0, Omega_S(f))``.

Iterates live in the span of the training points. Dual coefficients are used
for general kernels and primal weights for the linear kernel; in both cases
the gradient step is taken in the RKHS geometry, so the two representations
produce the same sequence of functions.

The covariance constraint is a slab ``|<h, f>| <= c`` for a fixed RKHS
element ``h``, so the proximal step is a one-dimensional operation along
``h``: a clip in constrained mode, a shrink towards the slab in penalty mode.
The exterior quadratic penalty with continuation is kept as an alternative
constrained method for constraints without a cheap projection.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np

from .core import Dataset, KernelClassifier, LinearClassifier, norm_sq
from .fairness import FairnessKind, FairnessSpec, constraint_for
from .kernels import KernelKind, KernelSpec, gram
from .losses import LossKind, LossSpec, loss, loss_grad

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class Mode(str, enum.Enum):
    CONSTRAINED = "constrained"
    PENALTY = "penalty"


class ConstraintMethod(str, enum.Enum):
    PROJECTION = "projection"
    QUADRATIC_PENALTY = "quadratic_penalty"


@dataclass(frozen=True)
class TrainConfig:
    loss: LossSpec = field(default_factory=LossSpec)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    lam: float = 0.01
    fairness: FairnessSpec = field(default_factory=FairnessSpec)
    mode: Mode = Mode.CONSTRAINED
    max_iters: int = 20000
    step_size: float = 1.0  # initial step; backtracking adapts it
    tol: float = 1e-6
    penalty_growth: float = 10.0
    seed: int = 0
    # "auto" trains primal weights for the linear kernel, dual coefficients otherwise
    representation: str = "auto"
    constraint_method: ConstraintMethod = ConstraintMethod.PROJECTION
    feature_map: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "constraint_method", ConstraintMethod(self.constraint_method))
        if not self.lam >= 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must exceed 1")
        if self.representation not in ("auto", "dual", "primal"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.feature_map is not None and self.kernel.kind is not KernelKind.LINEAR:
            raise ValueError("an explicit feature map requires the linear kernel")

    @property
    def primal(self) -> bool:
        if self.representation == "auto":
            return self.kernel.kind is KernelKind.LINEAR
        if self.representation == "primal" and self.kernel.kind is not KernelKind.LINEAR:
            raise ValueError("primal weights need the linear kernel")
        return self.representation == "primal"

    def with_lambda(self, lam: float) -> "TrainConfig":
        return replace(self, lam=lam)


Classifier = Union[KernelClassifier, LinearClassifier]


@dataclass(frozen=True)
class TrainResult:
    classifier: Classifier
    objective_value: float
    constraint_value: Optional[float]  # Omega at the returned point, None without a constraint
    iterations: int
    stationarity_gap: float
    max_abs_score: float
    converged: bool


def empirical_risk(f, S: Dataset, loss_spec: LossSpec) -> float:
    if len(S) == 0:
        raise ValueError("empirical risk of an empty dataset")
    return float(np.mean(loss(loss_spec, f.scores(S.X), S.y)))


def objective(f, S: Dataset, config: TrainConfig) -> float:
    """Risk plus ``lam * ||f||^2``, plus the fairness penalty in penalty mode."""
    val = empirical_risk(f, S, config.loss) + config.lam * norm_sq(f)
    fs = config.fairness
    if config.mode is Mode.PENALTY and fs.kind is not FairnessKind.NONE and fs.mu > 0:
        con = constraint_for(fs, S)
        val += fs.mu * max(0.0, con.value(f.scores(S.X)))
    if not np.isfinite(val):
        raise SolverError("non-finite objective")
    return float(val)


class _Primal:
    def __init__(self, Phi):
        self.Phi = Phi
        self.size = Phi.shape[1]

    def scores(self, th):
        return self.Phi @ th

    def pull(self, v):
        # score-space vector -> RKHS element, as weights
        return self.Phi.T @ v

    def inner(self, a, b):
        return float(a @ b)


class _Dual:
    def __init__(self, K):
        self.K = K
        self.size = K.shape[0]

    def scores(self, th):
        return self.K @ th

    def pull(self, v):
        return v

    def inner(self, a, b):
        return float(a @ (self.K @ b))


class _Problem:
    """Smooth part, gradient and proximal step for one training run."""

    def __init__(self, S: Dataset, config: TrainConfig, geom, constraint):
        self.S, self.cfg, self.geom, self.con = S, config, geom, constraint
        self.N = len(S)
        self.y = S.y
        self.rho = 0.0  # quadratic-penalty weight, continuation method only
        self.prox_kind = None
        if constraint is not None:
            self.h = geom.pull(constraint.a)
            self.hh = geom.inner(self.h, self.h)
            if config.mode is Mode.CONSTRAINED and config.constraint_method is ConstraintMethod.PROJECTION:
                self.prox_kind = "clip"
            elif config.mode is Mode.PENALTY and config.fairness.mu > 0:
                self.prox_kind = "shrink"
            if self.hh <= 1e-300:
                # h = 0: the covariance is identically zero, so the constraint is inactive
                self.prox_kind = None

    def smooth(self, th, s):
        val = float(np.mean(loss(self.cfg.loss, s, self.y))) + self.cfg.lam * self.geom.inner(th, th)
        if self.rho > 0:
            val += 0.5 * self.rho * max(0.0, self.con.value(s)) ** 2
        return val

    def grad(self, th, s):
        v = loss_grad(self.cfg.loss, s, self.y) / self.N
        if self.rho > 0:
            viol = max(0.0, self.con.value(s))
            if viol > 0:
                v = v + self.rho * viol * self.con.score_subgradient(s)
        return self.geom.pull(v) + 2.0 * self.cfg.lam * th

    def nonsmooth(self, th):
        if self.prox_kind != "shrink":
            return 0.0
        return self.cfg.fairness.mu * max(0.0, abs(self.geom.inner(th, self.h)) - self.con.c)

    def prox(self, th, t):
        if self.prox_kind is None:
            return th
        u = self.geom.inner(th, self.h)
        c = self.con.c
        if self.prox_kind == "clip":
            u_new = self.con.clip(u)
        elif abs(u) <= c:
            u_new = u
        else:
            u_new = np.sign(u) * max(c, abs(u) - t * self.cfg.fairness.mu * self.hh)
        if u_new == u:
            return th
        return th + ((u_new - u) / self.hh) * self.h


def _prox_gradient(prob: _Problem, th0, tol, max_iters, t0):
    """Proximal gradient with backtracking on the composite objective.

    Returns ``(theta, iterations, gap, converged)`` where ``gap`` is the RKHS
    norm of the gradient mapping at the last accepted iterate.
    """
    geom = prob.geom
    th = th0
    s = geom.scores(th)
    F = prob.smooth(th, s)
    t = t0
    gap = np.inf
    for it in range(1, max_iters + 1):
        g = prob.grad(th, s)
        while True:
            cand = prob.prox(th - t * g, t)
            d = cand - th
            s_c = geom.scores(cand)
            F_c = prob.smooth(cand, s_c)
            dd = geom.inner(d, d)
            if not np.isfinite(F_c):
                t *= 0.5
            elif F_c <= F + geom.inner(g, d) + dd / (2 * t) + 1e-14 * (1.0 + abs(F)):
                break
            else:
                t *= 0.5
            if t < 1e-18:
                log.debug("step size underflow after %d iterations", it)
                return th, it, gap, False
        gap = np.sqrt(max(dd, 0.0)) / t
        th, s, F = cand, s_c, F_c
        if not np.isfinite(F):
            raise SolverError("non-finite objective")
        if gap <= tol:
            return th, it, gap, True
        t *= 2.0
    return th, max_iters, gap, False


def train(S: Dataset, config: TrainConfig) -> TrainResult:
    """Approximately minimize the training objective for ``config`` on S.

    Starts from f = 0 and is deterministic. A run that does not reach the
    stationarity tolerance returns its last iterate with ``converged=False``.
    """
    if len(S) == 0:
        raise ValueError("cannot train on an empty dataset")
    if config.loss.kind is LossKind.ZERO_ONE:
        raise ValueError("zero-one loss is for evaluation only")
    fs = config.fairness
    constraint = None
    if fs.kind is not FairnessKind.NONE:
        if config.mode is Mode.CONSTRAINED or fs.mu > 0:
            constraint = constraint_for(fs, S)

    if config.primal:
        Phi = S.X if config.feature_map is None else np.atleast_2d(config.feature_map(S.X))
        geom = _Primal(Phi)
    else:
        geom = _Dual(gram(config.kernel, S.X))
    prob = _Problem(S, config, geom, constraint)
    th = np.zeros(geom.size)

    use_continuation = (
        constraint is not None
        and config.mode is Mode.CONSTRAINED
        and config.constraint_method is ConstraintMethod.QUADRATIC_PENALTY
    )
    total = 0
    if use_continuation:
        prob.rho = 1.0
        for _ in range(60):
            th, it, gap, conv = _prox_gradient(prob, th, config.tol, config.max_iters - total, config.step_size)
            total += it
            if max(0.0, constraint.value(geom.scores(th))) <= config.tol or total >= config.max_iters:
                break
            prob.rho *= config.penalty_growth
        # report stationarity of the penalized problem actually solved
        feasible = max(0.0, constraint.value(geom.scores(th))) <= config.tol
        conv = conv and feasible
    else:
        th, total, gap, conv = _prox_gradient(prob, th, config.tol, config.max_iters, config.step_size)

    if config.primal:
        f = LinearClassifier(th, config.feature_map)
    else:
        f = KernelClassifier(th, S.X, config.kernel)
    s = geom.scores(th)
    if not np.all(np.isfinite(s)):
        raise SolverError("non-finite scores")
    obj = objective(f, S, config)
    cval = None if constraint is None else constraint.value(s)
    if not conv:
        log.info("training stopped after %d iterations with gap %.3e (tol %.1e)", total, gap, config.tol)
    return TrainResult(
        classifier=f,
        objective_value=obj,
        constraint_value=cval,
        iterations=total,
        stationarity_gap=float(gap),
        max_abs_score=float(np.max(np.abs(s))),
        converged=bool(conv),
    )


def norm_path(S: Dataset, config: TrainConfig, lambdas) -> list[tuple[float, float]]:
    """``(lam, ||f_lam||)`` for each lambda of an ascending positive grid."""
    lambdas = list(lambdas)
    if any(l <= 0 for l in lambdas):
        raise ValueError("norm_path needs positive lambdas")
    if lambdas != sorted(lambdas):
        raise ValueError("lambdas must be sorted ascending")
    out = []
    for lam in lambdas:
        res = train(S, config.with_lambda(lam))
        out.append((lam, float(np.sqrt(norm_sq(res.classifier)))))
    return out

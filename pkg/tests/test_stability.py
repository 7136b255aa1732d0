import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stablefair.core import Dataset, LinearClassifier, distance, swap_sample
from stablefair.fairness import FairnessSpec
from stablefair.losses import LossSpec
from stablefair.solver import TrainConfig, train
from stablefair.stability import (
    BoundInputs,
    Protocol,
    QuadraticFunctional,
    bregman,
    empirical_uniform_stability,
    estimate_G,
    excess_risk_bound,
    generalization_bound_highprob,
    generalization_gap,
    norm_gap_bound,
    optimal_lambda,
    prediction_agreement_check,
    run_stability_suite,
    stab_from_predictions,
    stab_metric,
    stability_bound_linear,
    stability_bound_rkhs,
    swap_norm_bound,
)
from stablefair.synthetic import TwoGroupGaussians


# -- closed-form bounds

def test_rkhs_bound_examples():
    assert stability_bound_rkhs(BoundInputs(1, 1, 0.01, 100)) == pytest.approx(1.0)
    assert stability_bound_rkhs(BoundInputs(2, 9, 0.05, 1000)) == pytest.approx(0.72)
    with pytest.raises(ValueError):
        stability_bound_rkhs(BoundInputs(1, 1, 0.0, 100))
    assert norm_gap_bound(BoundInputs(2, 9, 0.05, 1000)) == pytest.approx(6 / 50)


def test_linear_bound_examples():
    assert stability_bound_linear(BoundInputs(1, 1, 0.01, 100, G=1.0)) == pytest.approx(1.0)
    assert stability_bound_linear(BoundInputs(1, 1, 0.05, 200, G=0.5)) == pytest.approx(0.025)
    inp = BoundInputs(1.5, 4.0, 0.02, 300, G=1.5 * 2.0)
    assert stability_bound_linear(inp) == pytest.approx(stability_bound_rkhs(inp))
    with pytest.raises(ValueError):
        stability_bound_linear(BoundInputs(1, 1, 0.05, 200))


def test_highprob_bound():
    # ln(8/delta) = 3 keeps delta inside (0, 1): 8 sqrt(0.03 * 3) = 2.4
    inp = BoundInputs(1, 1, 1.0, 100, delta=8 * math.exp(-3))
    assert generalization_bound_highprob(inp) == pytest.approx(2.4)
    a = BoundInputs(1, 1, 0.1, 100, delta=0.05)
    b = BoundInputs(1, 1, 0.05, 200, delta=0.05)
    # with lam N fixed only the 1/N term moves
    first = lambda i: 2 / (i.lam * i.N)
    assert first(a) == first(b)
    assert generalization_bound_highprob(b) < generalization_bound_highprob(a)
    assert math.isfinite(generalization_bound_highprob(BoundInputs(1, 1, 0.1, 100, delta=1 - 1e-12)))
    for bad in (0.0, 1.0, 8 / math.e):
        with pytest.raises(ValueError):
            BoundInputs(1, 1, 0.1, 100, delta=bad)


def test_highprob_linear_variant():
    inp = BoundInputs(1, 1, 1.0, 100, G=0.5, delta=8 * math.exp(-3))
    assert generalization_bound_highprob(inp, linear=True) == pytest.approx(8 * math.sqrt((0.5 / 100 + 0.01) * 3))


def test_optimal_lambda_example():
    inp = BoundInputs(1, 1, N=100, B=1.0)
    lam = optimal_lambda(inp)
    assert lam == pytest.approx(0.1)
    assert excess_risk_bound(BoundInputs(1, 1, lam, 100, B=1.0)) == pytest.approx(0.2)


@settings(max_examples=40)
@given(st.floats(0.1, 3), st.floats(0.1, 4), st.floats(0.1, 5), st.integers(10, 10_000))
def test_optimal_lambda_minimizes_grid(sigma, ksq, B, N):
    lam = optimal_lambda(BoundInputs(sigma, ksq, N=N, B=B))
    best = excess_risk_bound(BoundInputs(sigma, ksq, lam, N, B=B))
    assert best == pytest.approx(2 * sigma * math.sqrt(ksq) * B / math.sqrt(N), rel=1e-12)
    for l in lam * np.geomspace(0.05, 20, 81):
        assert excess_risk_bound(BoundInputs(sigma, ksq, l, N, B=B)) >= best * (1 - 1e-12)


def test_excess_risk_needs_B():
    with pytest.raises(ValueError):
        excess_risk_bound(BoundInputs(1, 1, 0.1, 100))
    with pytest.raises(ValueError):
        excess_risk_bound(BoundInputs(1, 1, 0.1, 100, B=0.0))


# -- G estimate

def test_estimate_G_unit_norm_logistic():
    S = TwoGroupGaussians().sample(200, 0)
    S = S.with_features(S.X / np.linalg.norm(S.X, axis=1, keepdims=True))
    g = estimate_G(LossSpec("logistic"), S, 50, seed=1)
    assert g.estimate <= 1.0
    assert g.ceiling == pytest.approx(1.0)


def test_estimate_G_hinge_single_sample():
    S = Dataset([[2.0, 0.0]], [0], [1])
    assert estimate_G(LossSpec("hinge"), S, 10).estimate == pytest.approx(2.0)


def test_estimate_G_zero_features():
    S = Dataset(np.zeros((5, 3)), [0, 1, 0, 1, 0], [1, -1, 1, 1, -1])
    assert estimate_G(LossSpec("logistic"), S, 10).estimate == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["logistic", "hinge"]))
def test_G_below_sigma_kappa(seed, kind):
    S = TwoGroupGaussians().sample(50, seed)
    g = estimate_G(LossSpec(kind), S, 20, seed=seed, fairness=FairnessSpec("covariance", 0.05), radius=3.0)
    assert g.estimate <= g.ceiling + 1e-12


# -- stab, agreement, gap

def stab_oracle(preds):
    n = len(preds)
    tot = 0
    for i, j in itertools.permutations(range(n), 2):
        tot += sum(abs(int(a >= 0) - int(b >= 0)) for a, b in zip(preds[i], preds[j]))
    return tot / (n * (n - 1))


def test_stab_examples():
    T = Dataset(np.arange(10, dtype=float).reshape(-1, 1) - 4.5, np.arange(10) % 2, np.ones(10, int))
    f = LinearClassifier([1.0])
    assert stab_metric([f, f, f], T) == 0
    # threshold moved past five points
    g = LinearClassifier([1.0, 5.0])
    T2 = T.with_features(np.column_stack([T.X, np.ones(10)]))
    assert stab_metric([LinearClassifier([1.0, 0.0]), g], T2) == 5
    P = np.array([[1, 1, 0, 0], [1, 1, 1, 1], [1, 1, 1, 1]])
    assert stab_from_predictions(P) == pytest.approx(4 / 3)
    with pytest.raises(ValueError):
        stab_metric([f], T)


@settings(max_examples=200)
@given(st.integers(2, 4), st.integers(1, 20), st.integers(0, 10**6))
def test_stab_brute_force(n, m, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(m, 2))
    T = Dataset(X, np.arange(m) % 2, np.ones(m, int))
    clfs = [LinearClassifier(rng.normal(size=2)) for _ in range(n)]
    preds = [f.scores(X) for f in clfs]
    assert stab_metric(clfs, T) == stab_oracle(preds)


def test_agreement_examples():
    E = TwoGroupGaussians().sample(100, 1)
    g = LinearClassifier(np.ones(E.dim))
    assert prediction_agreement_check(g, g, E, 0.0).violations == 0
    gi = LinearClassifier(np.ones(E.dim) + 0.2)
    gap = prediction_agreement_check(g, gi, E, 0.0).max_score_gap
    assert prediction_agreement_check(g, gi, E, gap).violations == 0
    Z = Dataset(np.vstack([np.zeros((3, E.dim)), E.X[:7]]), np.r_[0, 1, 0, E.z[:7]], np.ones(10, int))
    assert prediction_agreement_check(g, gi, Z, 0.0).low_margin_mass == pytest.approx(0.3)
    with pytest.raises(ValueError):
        prediction_agreement_check(g, g, E, -1.0)


def test_generalization_gap_examples():
    S = TwoGroupGaussians().sample(30, 0)
    f = LinearClassifier(np.ones(S.dim))
    assert generalization_gap(f, S, S, LossSpec()) == 0
    A = Dataset([[1.0], [1.0], [1.0], [1.0]], [0, 1, 0, 1], [1, 1, 1, -1])
    B = Dataset([[1.0], [1.0], [1.0], [1.0]], [0, 1, 0, 1], [-1, -1, 1, -1])
    const = LinearClassifier([0.5])
    # squared loss of a constant 0.5: 0.25 for y=+1, 2.25 for y=-1
    expected = (0.25 + 3 * 2.25) / 4 - (3 * 0.25 + 2.25) / 4
    assert generalization_gap(const, A, B, LossSpec("squared", 1.0)) == pytest.approx(expected)


# -- Bregman divergence

def test_bregman_examples():
    F = QuadraticFunctional(2 * np.eye(3))  # ||v||^2
    v = np.array([1.0, -2.0, 0.5])
    assert bregman(F, v, v) == 0
    w = np.array([0.0, 1.0, 1.0])
    assert bregman(F, v, w) == pytest.approx(np.sum((v - w) ** 2), abs=1e-9)


def test_bregman_random_quadratics():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        M = rng.normal(size=(d, d))
        F = QuadraticFunctional(M @ M.T, rng.normal(size=d), rng.normal())
        f, fp = rng.normal(size=d) * 3, rng.normal(size=d) * 3
        assert bregman(F, f, fp) >= -1e-9


def test_bregman_rkhs_inner():
    # F = ||alpha||_K^2 in dual coordinates: Bregman is the squared RKHS distance
    rng = np.random.default_rng(2)
    A = rng.normal(size=(4, 4))
    K = A @ A.T
    F = lambda a: float(a @ K @ a)
    grad = lambda a: 2 * a  # RKHS gradient in coefficient form
    a, b = rng.normal(size=4), rng.normal(size=4)
    assert bregman(F, a, b, grad=grad, inner=K) == pytest.approx((a - b) @ K @ (a - b), abs=1e-9)


# -- uniform stability probes

def _unit_synth(n, seed):
    return TwoGroupGaussians().sample(n, seed)


def test_identity_swap_is_noise_only():
    S = _unit_synth(80, 0)
    cfg = TrainConfig(lam=0.05, tol=1e-8)
    g = train(S, cfg)
    probe_idx = []

    def same(rng):
        # the probe index is drawn right before the sampler is called
        i = probe_idx.pop(0)
        return S[i]

    rng = np.random.default_rng(5)
    probe_idx.extend(int(rng.integers(len(S))) for _ in range(3))
    res = empirical_uniform_stability(S, cfg, 3, same, S, seed=5, base=g)
    assert res.beta_hat <= res.loss_allowance + 1e-15
    assert res.norm_gap <= res.norm_allowance + 1e-15


def test_uniform_stability_within_bound():
    S = _unit_synth(200, 11)
    E = _unit_synth(300, 12)
    pool = _unit_synth(100, 13)
    cfg = TrainConfig(lam=0.05, fairness=FairnessSpec("covariance", 0.1), tol=1e-8)
    res = empirical_uniform_stability(S, cfg, 5, lambda rng: pool[int(rng.integers(len(pool)))], E, seed=0)
    inp = BoundInputs(1.0, 1.0, 0.05, 200)
    assert res.converged
    assert np.all(res.probe_beta <= stability_bound_rkhs(inp) + res.loss_allowance)
    assert np.all(res.probe_norm <= norm_gap_bound(inp) + res.norm_allowance)
    assert res.beta_hat >= 0


def test_uniform_stability_refuses_lambda_zero():
    S = _unit_synth(20, 0)
    with pytest.raises(ValueError):
        empirical_uniform_stability(S, TrainConfig(lam=0.0), 1, lambda rng: S[0], S)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.02, 0.1, 0.5]))
def test_swap_norm_inequality(seed, lam):
    # ||g - g^i||^2 <= sigma / (2 lam N) (|dg(x_i)| + |dg(x'_i)|), no constraint
    S = _unit_synth(60, seed)
    new = _unit_synth(1, seed + 1)[0]
    i = seed % len(S)
    cfg = TrainConfig(lam=lam, fairness=FairnessSpec("none"), tol=1e-10)
    g, gi = train(S, cfg), train(swap_sample(S, i, new), cfg)
    lhs = distance(g.classifier, gi.classifier) ** 2
    rhs = swap_norm_bound(g.classifier, gi.classifier, S[i].x, new.x, 1.0, lam, len(S))
    slack = 4 * max(g.stationarity_gap, gi.stationarity_gap) / lam
    assert lhs <= rhs + slack


# -- suite

def test_suite_single_rep_has_no_stab():
    S = _unit_synth(100, 0)
    r = run_stability_suite(S, TrainConfig(lam=0.05), Protocol(n_reps=1, probes=0))
    assert r.stab is None
    assert 0 <= r.acc_mean <= 1 and 0 <= r.gamma_mean <= 1


def test_suite_deterministic():
    S = _unit_synth(120, 0)
    p = Protocol(n_reps=4, probes=2, seed=3)
    a = run_stability_suite(S, TrainConfig(lam=0.05), p)
    b = run_stability_suite(S, TrainConfig(lam=0.05), p)
    assert a == b
    assert a.beta_bound == pytest.approx(1.0 / (0.05 * a.n_train))
    assert a.compliant


def test_suite_lambda_zero_has_no_bound():
    S = _unit_synth(120, 0)
    r = run_stability_suite(S, TrainConfig(lam=0.0, max_iters=500), Protocol(n_reps=3, probes=2))
    assert r.beta_bound is None and r.beta_hat is None and r.compliant is None
    assert r.stab is not None

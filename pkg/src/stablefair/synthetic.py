"""Synthetic data with a known law.

``TwoGroupGaussians`` draws two Gaussian clusters (one per label) inside each
sensitive group, with group-dependent base rates and a group-correlated
feature so that an unconstrained classifier is measurably unfair. Points are
radially clipped into a ball so that ``k(x, x) <= radius^2`` holds for the
linear kernel on the whole population, not only on a sample.

``AdultSurrogate`` mimics the shape of the pre-processed Adult income data
(standardized numeric columns plus one-hot categorical blocks, about 24%
positive labels) with the published positive rates per sex / race group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import Dataset, Sample


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass(frozen=True)
class TwoGroupGaussians:
    dim: int = 5
    group1_frac: float = 0.5
    pos_rate: tuple = (0.25, 0.75)  # Pr[y = +1 | z]
    separation: float = 0.35  # label-cluster offset along the first axis
    group_shift: float = 0.4  # group offset along the second axis
    noise: float = 0.3
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("need at least two feature dimensions")

    def sample(self, n: int, seed=None) -> Dataset:
        rng = _rng(seed)
        z = (rng.random(n) < self.group1_frac).astype(int)
        p = np.asarray(self.pos_rate, dtype=float)[z]
        y = np.where(rng.random(n) < p, 1, -1)
        X = self.noise * rng.standard_normal((n, self.dim))
        X[:, 0] += self.separation * y
        X[:, 1] += self.group_shift * (2 * z - 1)
        norms = np.linalg.norm(X, axis=1)
        # the extra 1e-12 keeps clipped norms at or below radius after rounding
        X *= (self.radius / np.maximum(norms, self.radius) * (1 - 1e-12))[:, None]
        return Dataset(X, z, y, 2)

    def sample_one(self, rng) -> Sample:
        return self.sample(1, rng)[0]

    def sampler(self):
        """Replacement sampler ``rng -> Sample`` drawing from the same law."""
        return self.sample_one


# Published Adult marginals: P(male) = 0.675, P(white) = 0.86; positive rates
# 0.31 / 0.11 for male / female and 0.26 / 0.15 for white / non-white.
_ADULT_GROUPS = {
    "sex": (0.675, 0.11, 0.31),
    "race": (0.86, 0.15, 0.26),
}

# categorical blocks: (name, number of categories, Zipf exponent of their frequencies)
_ADULT_BLOCKS = (
    ("workclass", 7, 1.5),
    ("marital", 7, 1.2),
    ("occupation", 14, 0.8),
    ("relationship", 6, 1.0),
    ("country", 41, 2.2),
)
_NUMERIC = ("age", "education_num", "hours_per_week", "capital_gain", "capital_loss")

_OFFSET_CACHE: dict = {}


@dataclass(frozen=True)
class AdultSurrogate:
    """Adult-shaped synthetic data.

    Five standardized numeric columns followed by one-hot blocks for
    workclass, marital status, occupation, relationship and native country
    (75 indicator columns, many of them rare, as in the real data). Labels
    follow a fixed logistic law whose per-group intercepts are calibrated to
    the published positive rates of the chosen sensitive attribute.

    Neither sex nor race is a feature, but both leak through proxies the way
    they do in the real data: married men are husbands and married women
    wives, some occupations are sex-skewed, and rare native countries are
    concentrated among non-white rows. Rare categories concentrated in one
    group are what make an unregularized fit's group rates unstable.
    """

    attribute: str = "sex"

    def __post_init__(self):
        if self.attribute not in _ADULT_GROUPS:
            raise ValueError(f"attribute must be one of {sorted(_ADULT_GROUPS)}")

    @property
    def feature_names(self) -> list[str]:
        names = list(_NUMERIC)
        for block, k, _ in _ADULT_BLOCKS:
            names += [f"{block}_{j}" for j in range(k)]
        return names

    @staticmethod
    def _loadings():
        # fixed per-category effects and group loadings, independent of the sampling seed
        rng = np.random.default_rng(20190524)
        effects, sex_load, race_load = [], [], []
        for name, k, _ in _ADULT_BLOCKS:
            eff = rng.normal(0.0, 0.8, k)
            if name != "country":
                eff[3:] *= 0.5  # rare categories carry weaker signal
            effects.append(eff)
            sex_load.append(rng.normal(0.0, 0.7, k))
            race_load.append(np.abs(rng.normal(0.0, 1.2, k)) * (np.arange(k) >= 1))
        # about half of the non-white rows come from one of the rare countries
        race_load[-1] = np.where(np.arange(_ADULT_BLOCKS[-1][1]) >= 3, 1.0 + race_load[-1], 0.0)
        return effects, sex_load, race_load

    def _raw(self, n, rng):
        male = (rng.random(n) < 0.675).astype(int)
        white = (rng.random(n) < 0.86).astype(int)
        z = male if self.attribute == "sex" else white
        skill = rng.standard_normal(n)
        age = rng.standard_normal(n) + 0.3 * skill
        edu = 0.8 * skill + 0.6 * rng.standard_normal(n)
        hours = rng.standard_normal(n) + 0.5 * (male - 0.675)
        gain = (rng.random(n) < expit(-2.5 + 0.8 * skill)).astype(float)
        cap_loss = (rng.random(n) < 0.05).astype(float)
        married = rng.random(n) < expit(-0.3 + 0.6 * age + 1.2 * (male - 0.5))
        effects, sex_load, race_load = self._loadings()

        def draw(b, extra=0.0):
            _, k, expo = _ADULT_BLOCKS[b]
            logits = -expo * np.log1p(np.arange(k))[None, :] + extra
            return (logits + rng.gumbel(size=(n, k))).argmax(1)

        workclass = draw(0, np.outer(1 - white, race_load[0]) * 0.5)
        # marital: 0 is the married category, the rest are drawn among the others
        marital = np.where(married, 0, 1 + draw(1)[:] % 6)
        occupation = draw(2, np.outer(male - 0.5, sex_load[2]) + np.outer(skill, np.r_[np.full(4, 0.6), np.zeros(10)]))
        # relationship: 0 husband, 5 wife for the married; otherwise a Zipf draw over 1..4
        single = 1 + draw(3, np.outer(1 - male, np.r_[0, 0, 0, 0.8, 0, 0]))[:] % 4
        relationship = np.where(married, np.where(male == 1, 0, 5), single)
        country = draw(4, np.outer(1 - white, race_load[4]))
        cats = [workclass, marital, occupation, relationship, country]
        logit = 1.2 * edu + 0.6 * age + 0.5 * hours + 1.5 * gain + 0.4 * cap_loss
        for cat, eff in zip(cats, effects):
            logit = logit + eff[cat]
        numeric = np.column_stack([age, edu, hours, gain, cap_loss])
        onehots = [np.eye(k)[cat] for (_, k, _), cat in zip(_ADULT_BLOCKS, cats)]
        return numeric, onehots, z, logit

    def _law(self):
        # per-group intercepts matching the published base rates and the
        # numeric standardization constants, fitted once on a fixed reference
        # draw so that every sample (including single replacements) follows
        # the same law
        if self.attribute not in _OFFSET_CACHE:
            _, rate0, rate1 = _ADULT_GROUPS[self.attribute]
            numeric, _, z, logit = self._raw(200_000, np.random.default_rng(12345))
            offsets = (_rate_shift(logit[z == 0], rate0), _rate_shift(logit[z == 1], rate1))
            _OFFSET_CACHE[self.attribute] = (offsets, numeric.mean(0), numeric.std(0))
        return _OFFSET_CACHE[self.attribute]

    def sample(self, n: int, seed=None) -> Dataset:
        rng = _rng(seed)
        offsets, mu, sd = self._law()
        numeric, onehots, z, logit = self._raw(n, rng)
        X = np.column_stack([(numeric - mu) / sd] + onehots)
        y = np.where(rng.random(n) < expit(logit + np.asarray(offsets)[z]), 1, -1)
        return Dataset(X, z, y, 2)

    def sample_one(self, rng) -> Sample:
        return self.sample(1, rng)[0]


def _rate_shift(logit, target, iters=60):
    """Offset b with mean(sigmoid(logit + b)) = target, by bisection."""
    lo, hi = -20.0, 20.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if expit(logit + mid).mean() < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

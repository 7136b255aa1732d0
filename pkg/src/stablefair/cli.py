"""Command line interface: data ingestion, experiment configuration, the
lambda sweep and its table/plot output.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 solver
non-convergence, 4 certification failed (an empirical quantity exceeded its
bound plus allowance).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Dataset, KernelClassifier, LinearClassifier, accuracy, repeated_splits
from .fairness import FairnessKind, FairnessSpec, constraint_for, gamma
from .kernels import KernelKind, KernelSpec
from .losses import LossKind, LossSpec, admissibility_constant
from .solver import ConstraintMethod, Mode, SolverError, TrainConfig, empirical_risk, train
from .stability import (
    BoundInputs,
    Protocol,
    StabilityReport,
    empirical_uniform_stability,
    generalization_bound_highprob,
    norm_gap_bound,
    run_stability_suite,
    stability_bound_rkhs,
    _kappa_sq,
)
from .synthetic import AdultSurrogate, TwoGroupGaussians

log = logging.getLogger("stablefair")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_SOLVER, EXIT_CERTIFY = 0, 1, 2, 3, 4

TABLE_COLUMNS = ("lambda", "acc_mean", "acc_std", "gamma_mean", "gamma_std", "stab", "beta_hat", "beta_bound")
DEFAULT_LAMBDAS = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


# ---------------------------------------------------------------- data


@dataclass(frozen=True)
class Schema:
    sensitive: str
    label: str
    features: Optional[tuple] = None  # None: every other column
    positive_label: Optional[str] = None
    negative_label: Optional[str] = None


def _label_value(raw: str, schema: Schema, row: int) -> int:
    raw = raw.strip()
    if schema.positive_label is not None:
        if raw == schema.positive_label:
            return 1
        if schema.negative_label is None or raw == schema.negative_label:
            return -1
        raise DataError(f"row {row}: unknown label value {raw!r}")
    try:
        v = float(raw)
    except ValueError:
        raise DataError(f"row {row}: unknown label value {raw!r}") from None
    if v == 1:
        return 1
    if v in (0, -1):
        return -1
    raise DataError(f"row {row}: unknown label value {raw!r}")


def load_csv(path, schema: Schema) -> Dataset:
    """Read a header-first CSV into a Dataset.

    Labels 0/1 or -1/1 (or the schema's named values) map to -1/+1. Integer
    sensitive values are used as category indices directly; any other value
    gets the next index in order of first appearance.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        for col in (schema.sensitive, schema.label) + tuple(schema.features or ()):
            if col not in header:
                raise DataError(f"{path}: missing column {col!r}")
        feats = list(schema.features) if schema.features else [h for h in header if h not in (schema.sensitive, schema.label)]
        fi = [header.index(c) for c in feats]
        si, li = header.index(schema.sensitive), header.index(schema.label)
        X, z_raw, y = [], [], []
        bad = []
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                bad.append(f"row {rownum}: expected {len(header)} cells, got {len(row)}")
                continue
            try:
                x = [float(row[j]) for j in fi]
            except ValueError:
                bad.append(f"row {rownum}: non-numeric feature")
                continue
            if not all(math.isfinite(v) for v in x):
                bad.append(f"row {rownum}: non-finite feature")
                continue
            X.append(x)
            z_raw.append(row[si].strip())
            y.append(_label_value(row[li], schema, rownum))
    if bad:
        raise DataError(f"{path}: {len(bad)} unparsable rows; " + "; ".join(bad[:10]))
    if not X:
        raise DataError(f"{path}: no data rows")
    z = _category_indices(z_raw)
    return Dataset(np.array(X, dtype=float), z, y, max(2, int(z.max()) + 1))


def _category_indices(values) -> np.ndarray:
    try:
        ints = [int(v) for v in values]
        if all(i >= 0 and str(i) == v for i, v in zip(ints, values)):
            return np.array(ints)
    except ValueError:
        pass
    codes: dict = {}
    return np.array([codes.setdefault(v, len(codes)) for v in values])


def write_csv(S: Dataset, path, feature_names=None, sensitive="z", label="y") -> None:
    names = list(feature_names) if feature_names else [f"x{j}" for j in range(S.dim)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + [sensitive, label])
        for i in range(len(S)):
            w.writerow([repr(float(v)) for v in S.X[i]] + [int(S.z[i]), int(S.y[i])])


def normalize(S: Dataset):
    """Scale every feature vector by ``1 / max ||x||``; returns ``(dataset, factor)``."""
    if len(S) == 0:
        raise DataError("cannot normalize an empty dataset")
    m = float(np.linalg.norm(S.X, axis=1).max())
    if m == 0:
        raise DataError("all feature vectors are zero")
    factor = 1.0 / m
    return S.with_features(S.X * factor), factor


def add_bias(S: Dataset, value: float = 1.0) -> Dataset:
    return S.with_features(np.column_stack([S.X, np.full(len(S), value)]))


# ---------------------------------------------------------------- configuration

_KEYS = {
    "data": {
        "source": "synthetic",
        "synthetic": "two_gaussians",
        "n_samples": "1000",
        "data_seed": "0",
        "features": "",
        "sensitive": "z",
        "label": "y",
        "positive_label": "",
        "negative_label": "",
        "normalize": "true",
        "bias": "false",
    },
    "model": {
        "loss": "logistic",
        "loss_bound": "1.0",
        "kernel": "linear",
        "kernel_c": "1.0",
        "fairness": "covariance",
        "fairness_c": "0.1",
        "mu": "1.0",
        "modes": "constrained",
        "constraint_method": "projection",
        "max_iters": "20000",
        "step_size": "1.0",
        "tol": "1e-6",
        "penalty_growth": "10.0",
    },
    "experiment": {
        "lambdas": ", ".join(str(l) for l in DEFAULT_LAMBDAS),
        "reps": "50",
        "test_frac": "0.2",
        "train_frac": "0.75",
        "shared_test": "true",
        "probes": "5",
        "seed": "0",
        "delta": "0.05",
    },
    "output": {"dir": "results"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    source: str = "synthetic"
    synthetic: str = "two_gaussians"
    n_samples: int = 1000
    data_seed: int = 0
    schema: Optional[Schema] = None
    normalize: bool = True
    bias: bool = False
    train: TrainConfig = field(default_factory=TrainConfig)
    modes: tuple = (Mode.CONSTRAINED,)
    lambdas: tuple = DEFAULT_LAMBDAS
    reps: int = 50
    test_frac: float = 0.2
    train_frac: float = 0.75
    shared_test: bool = True
    probes: int = 5
    seed: int = 0
    delta: float = 0.05
    out: Path = Path("results")

    def __post_init__(self):
        if not self.lambdas:
            raise ConfigError("lambda grid is empty")
        if any(l < 0 for l in self.lambdas):
            raise ConfigError("lambdas must be nonnegative")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")

    def protocol(self) -> Protocol:
        return Protocol(self.reps, self.test_frac, self.train_frac, self.shared_test, self.seed, self.probes)


def _bool(section, key, raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")


def _floats(raw, what):
    try:
        return tuple(float(t) for t in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"{what}: expected a list of numbers, got {raw!r}") from None


def parse_config(text: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    """Parse the ``key = value`` sectioned config format.

    Sections ``[data]``, ``[model]``, ``[experiment]``, ``[output]``; keys
    and defaults are listed in the README. Unknown sections or keys are
    errors.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(str(e)) from None
    for sec in cp.sections():
        if sec not in _KEYS:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in _KEYS[sec]:
                raise ConfigError(f"[{sec}] unknown key {key!r}")
    v = {sec: {k: (cp[sec][k] if cp.has_option(sec, k) else d) for k, d in keys.items()} for sec, keys in _KEYS.items()}
    d, m, e = v["data"], v["model"], v["experiment"]
    try:
        schema = None
        source = d["source"].strip()
        if source != "synthetic":
            p = Path(source)
            source = str(p if p.is_absolute() else base_dir / p)
            feats = tuple(c.strip() for c in d["features"].split(",") if c.strip()) or None
            schema = Schema(
                d["sensitive"].strip(),
                d["label"].strip(),
                feats,
                d["positive_label"].strip() or None,
                d["negative_label"].strip() or None,
            )
        loss_kind = LossKind(m["loss"].strip())
        tcfg = TrainConfig(
            loss=LossSpec(loss_kind, float(m["loss_bound"]) if loss_kind is LossKind.SQUARED else None),
            kernel=KernelSpec(KernelKind(m["kernel"].strip()), float(m["kernel_c"])),
            lam=0.0,
            fairness=FairnessSpec(FairnessKind(m["fairness"].strip()), float(m["fairness_c"]), float(m["mu"])),
            constraint_method=ConstraintMethod(m["constraint_method"].strip()),
            max_iters=int(m["max_iters"]),
            step_size=float(m["step_size"]),
            tol=float(m["tol"]),
            penalty_growth=float(m["penalty_growth"]),
            seed=int(e["seed"]),
        )
        modes = tuple(Mode(t.strip()) for t in m["modes"].split(",") if t.strip())
        if not modes:
            raise ConfigError("[model] modes is empty")
        out = Path(v["output"]["dir"].strip())
        return ExperimentConfig(
            source=source,
            synthetic=d["synthetic"].strip(),
            n_samples=int(d["n_samples"]),
            data_seed=int(d["data_seed"]),
            schema=schema,
            normalize=_bool("data", "normalize", d["normalize"]),
            bias=_bool("data", "bias", d["bias"]),
            train=tcfg,
            modes=modes,
            lambdas=_floats(e["lambdas"], "[experiment] lambdas"),
            reps=int(e["reps"]),
            test_frac=float(e["test_frac"]),
            train_frac=float(e["train_frac"]),
            shared_test=_bool("experiment", "shared_test", e["shared_test"]),
            probes=int(e["probes"]),
            seed=int(e["seed"]),
            delta=float(e["delta"]),
            out=out if out.is_absolute() else base_dir / out,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such config file: {path}")
    return parse_config(path.read_text(), path.parent)


_SYNTHETIC = {
    "two_gaussians": lambda: TwoGroupGaussians(),
    "adult_sex": lambda: AdultSurrogate("sex"),
    "adult_race": lambda: AdultSurrogate("race"),
}


@dataclass(frozen=True)
class Prepared:
    data: Dataset
    scale: float  # normalization factor applied to the features (1 if none)
    bias: bool


def raw_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.source == "synthetic":
        if cfg.synthetic not in _SYNTHETIC:
            raise ConfigError(f"unknown synthetic generator {cfg.synthetic!r}; choose from {sorted(_SYNTHETIC)}")
        return _SYNTHETIC[cfg.synthetic]().sample(cfg.n_samples, cfg.data_seed)
    return load_csv(cfg.source, cfg.schema)


def preprocess(S: Dataset, bias: bool, do_normalize: bool, scale: Optional[float] = None) -> Prepared:
    """Optional constant column, then optional unit max-norm scaling.

    A known ``scale`` (from a saved model) is reapplied instead of being
    recomputed, so evaluation data sees the training transformation.
    """
    if bias:
        S = add_bias(S)
    if scale is not None:
        return Prepared(S.with_features(S.X * scale), scale, bias)
    if do_normalize:
        S, factor = normalize(S)
        return Prepared(S, factor, bias)
    return Prepared(S, 1.0, bias)


def prepare(cfg: ExperimentConfig) -> Prepared:
    return preprocess(raw_dataset(cfg), cfg.bias, cfg.normalize)


# ---------------------------------------------------------------- sweep


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.6g}"


def write_table(reports, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in reports:
            w.writerow([_fmt(r.lam), _fmt(r.acc_mean), _fmt(r.acc_std), _fmt(r.gamma_mean), _fmt(r.gamma_std),
                        _fmt(r.stab), _fmt(r.beta_hat), _fmt(r.beta_bound)])


def plot_stab(series: dict, path) -> None:
    """Line plot of stab against lambda, one series per mode, as SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "stablefair"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, reports in series.items():
        pts = [(r.lam, r.stab) for r in reports if r.stab is not None]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel("lambda")
    ax.set_ylabel("stab")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _report_dict(r: StabilityReport) -> dict:
    d = asdict(r)
    d["compliant"] = r.compliant
    return d


def run_sweep(cfg: ExperimentConfig, progress=None) -> dict:
    """Run the stability suite for every (mode, lambda) and write the tables,
    the stab plot and a JSON report into ``cfg.out``.

    Returns ``{"tables": {mode: path}, "plot": path, "report": path,
    "nonconverged": [(mode, lambda), ...]}``.
    """
    prep = prepare(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    series, tables, nonconv = {}, {}, []
    for mode in cfg.modes:
        reports = []
        for lam in cfg.lambdas:
            tc = replace(cfg.train, lam=lam, mode=mode)
            r = run_stability_suite(prep.data, tc, cfg.protocol())
            if not r.converged and lam > 0:
                nonconv.append((mode.value, lam))
            if progress:
                progress(mode, r)
            reports.append(r)
        series[mode.value] = reports
        tables[mode.value] = cfg.out / f"table_{mode.value}.csv"
        write_table(reports, tables[mode.value])
    plot = cfg.out / "stab_vs_lambda.svg"
    plot_stab(series, plot)
    report = cfg.out / "report.json"
    report.write_text(json.dumps({m: [_report_dict(r) for r in rs] for m, rs in series.items()}, indent=2, sort_keys=True) + "\n")
    return {"tables": tables, "plot": plot, "report": report, "nonconverged": nonconv}


# ---------------------------------------------------------------- models on disk


def model_to_dict(f, prep: Prepared) -> dict:
    if isinstance(f, LinearClassifier):
        if f.feature_map is not None:
            raise ValueError("models with a custom feature map cannot be serialized")
        body = {"type": "linear", "weights": f.weights.tolist()}
    else:
        body = {
            "type": "kernel",
            "kernel": {"kind": f.kernel.kind.value, "c": f.kernel.c},
            "alpha": f.alpha.tolist(),
            "anchors": f.anchors.tolist(),
        }
    body["preprocessing"] = {"scale": prep.scale, "bias": prep.bias}
    return body


def model_from_dict(d: dict):
    if d.get("type") == "linear":
        f = LinearClassifier(d["weights"])
    elif d.get("type") == "kernel":
        f = KernelClassifier(d["alpha"], d["anchors"], KernelSpec(d["kernel"]["kind"], d["kernel"]["c"]))
    else:
        raise DataError(f"unknown model type {d.get('type')!r}")
    pre = d.get("preprocessing", {"scale": 1.0, "bias": False})
    return f, float(pre["scale"]), bool(pre["bias"])


def _metrics(f, S: Dataset, tc: TrainConfig) -> dict:
    out = {"n": len(S), "accuracy": accuracy(f, S), "risk": empirical_risk(f, S, tc.loss)}
    if S.num_groups == 2 and len(set(S.z.tolist())) == 2:
        out["gamma"] = gamma(f, S)
        if tc.fairness.kind is not FairnessKind.NONE:
            out["constraint_value"] = constraint_for(tc.fairness, S).value(f.scores(S.X))
    return out


# ---------------------------------------------------------------- commands


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = Path(args.out)
    if args.lambdas is not None:
        changes["lambdas"] = _floats(args.lambdas, "--lambda")
    if args.reps is not None:
        changes["reps"] = args.reps
    return replace(cfg, **changes) if changes else cfg


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    """Repeated train/test runs over the lambda grid; writes tables, plot and report."""
    def progress(mode, r):
        print(f"{mode.value:12s} lambda={r.lam:<6g} acc={r.acc_mean:.4f}({r.acc_std:.4f}) "
              f"gamma={r.gamma_mean:.3f}({r.gamma_std:.3f}) stab={_fmt(r.stab) or '-'} "
              f"beta_hat={_fmt(r.beta_hat) or '-'} bound={_fmt(r.beta_bound) or '-'}")

    res = run_sweep(cfg, progress)
    for mode, path in res["tables"].items():
        print(f"wrote {path}")
    print(f"wrote {res['plot']}")
    print(f"wrote {res['report']}")
    if res["nonconverged"]:
        print(f"solver did not converge for {res['nonconverged']}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _single_lambda(cfg: ExperimentConfig) -> float:
    return cfg.lambdas[-1] if len(cfg.lambdas) > 1 else cfg.lambdas[0]


def cmd_train(cfg: ExperimentConfig, args) -> int:
    """Fit one model at the last lambda of the grid and save it as JSON."""
    prep = prepare(cfg)
    rep = repeated_splits(prep.data, 1, cfg.test_frac, cfg.train_frac, cfg.seed, cfg.shared_test)[0]
    lam = _single_lambda(cfg)
    tc = replace(cfg.train, lam=lam, mode=cfg.modes[0])
    res = train(rep.train, tc)
    cfg.out.mkdir(parents=True, exist_ok=True)
    model_path = cfg.out / "model.json"
    model_path.write_text(json.dumps(model_to_dict(res.classifier, prep)) + "\n")
    summary = {
        "lambda": lam,
        "mode": tc.mode.value,
        "objective": res.objective_value,
        "constraint_value": res.constraint_value,
        "iterations": res.iterations,
        "stationarity_gap": res.stationarity_gap,
        "converged": res.converged,
        "train": _metrics(res.classifier, rep.train, tc),
        "test": _metrics(res.classifier, rep.test, tc),
    }
    (cfg.out / "train_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    print(f"wrote {model_path}")
    if not res.converged and lam > 0:
        return EXIT_SOLVER
    return EXIT_OK


def cmd_evaluate(cfg: ExperimentConfig, args) -> int:
    """Accuracy and group rates of a saved model on the configured data."""
    model_path = Path(args.model) if args.model else cfg.out / "model.json"
    if not model_path.exists():
        raise DataError(f"no such model file: {model_path}")
    try:
        f, scale, bias = model_from_dict(json.loads(model_path.read_text()))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{model_path}: malformed model ({exc})") from None
    prep = preprocess(raw_dataset(cfg), bias, False, scale)
    if prep.data.dim != f.dim:
        raise DataError(f"model expects {f.dim} features, data has {prep.data.dim}")
    metrics = _metrics(f, prep.data, cfg.train)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "evaluation.json").write_text(json.dumps(metrics, indent=2) + "\n")
    print(json.dumps(metrics, indent=2))
    return EXIT_OK


def cmd_certify(cfg: ExperimentConfig, args) -> int:
    """Empirical uniform stability against its bound for every lambda > 0."""
    prep = prepare(cfg)
    rep = repeated_splits(prep.data, 1, cfg.test_frac, cfg.train_frac, cfg.seed, cfg.shared_test)[0]
    source = rep.pool if len(rep.pool) else rep.test
    sampler = lambda rng: source[int(rng.integers(len(source)))]
    rows, ok, converged = [], True, True
    for mode in cfg.modes:
        for lam in cfg.lambdas:
            if lam <= 0:
                print(f"{mode.value:12s} lambda={lam:g}: certification refused for lambda = 0")
                rows.append({"mode": mode.value, "lambda": lam, "certified": None})
                continue
            tc = replace(cfg.train, lam=lam, mode=mode)
            sigma = admissibility_constant(tc.loss)
            ksq = _kappa_sq(tc, prep.data)
            inp = BoundInputs(sigma, ksq, lam, len(rep.train), delta=cfg.delta)
            us = empirical_uniform_stability(rep.train, tc, max(cfg.probes, 1), sampler, rep.test, seed=cfg.seed)
            bound, nbound = stability_bound_rkhs(inp), norm_gap_bound(inp)
            passed = bool(us.beta_hat <= bound + us.loss_allowance and us.norm_gap <= nbound + us.norm_allowance)
            ok &= passed
            converged &= us.converged
            row = {
                "mode": mode.value, "lambda": lam, "N": len(rep.train), "sigma": sigma, "kappa_sq": ksq,
                "beta_hat": us.beta_hat, "beta_bound": bound, "norm_gap": us.norm_gap, "norm_bound": nbound,
                "loss_allowance": us.loss_allowance, "norm_allowance": us.norm_allowance,
                "gen_bound_highprob": generalization_bound_highprob(inp), "converged": us.converged,
                "certified": passed,
            }
            rows.append(row)
            print(f"{mode.value:12s} lambda={lam:<6g} beta_hat={us.beta_hat:.3e} <= {bound:.3e} "
                  f"norm_gap={us.norm_gap:.3e} <= {nbound:.3e}  {'PASS' if passed else 'FAIL'}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "certify.json"
    path.write_text(json.dumps(rows, indent=2) + "\n")
    print(f"wrote {path}")
    if not converged:
        return EXIT_SOLVER
    return EXIT_OK if ok else EXIT_CERTIFY


COMMANDS = {"train": cmd_train, "evaluate": cmd_evaluate, "sweep": cmd_sweep, "certify": cmd_certify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stablefair", description="Stability-regularized fair classification experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0] if fn.__doc__ else None)
        sp.add_argument("--config", help="experiment config file (defaults apply when omitted)")
        sp.add_argument("--seed", type=int, help="master seed")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--lambda", dest="lambdas", help="comma-separated lambda grid")
        sp.add_argument("--reps", type=int, help="number of repetitions")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "evaluate":
            sp.add_argument("--model", help="model file written by 'train' (default: <out>/model.json)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        cfg = _apply_overrides(cfg, args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

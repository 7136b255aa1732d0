import csv
import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from stablefair.cli import (
    TABLE_COLUMNS,
    ConfigError,
    DataError,
    Schema,
    load_csv,
    main,
    normalize,
    parse_config,
    run_sweep,
    write_csv,
)
from stablefair.core import Dataset


def write(path, text):
    path.write_text(text)
    return path


SCHEMA = Schema(sensitive="sex", label="income")


def test_load_csv_label_mapping(tmp_path):
    p = write(tmp_path / "d.csv", "a,b,sex,income\n1,2,F,0\n3,4,M,1\n5,6,F,1\n")
    S = load_csv(p, SCHEMA)
    assert list(S.y) == [-1, 1, 1]
    assert list(S.z) == [0, 1, 0]
    assert len(S) == 3 and S.dim == 2


def test_load_csv_pm1_labels_and_named_labels(tmp_path):
    p = write(tmp_path / "d.csv", "a,sex,income\n1,0,-1\n2,1,1\n")
    assert list(load_csv(p, SCHEMA).y) == [-1, 1]
    p = write(tmp_path / "e.csv", "a,sex,income\n1,0,<=50K\n2,1,>50K\n")
    S = load_csv(p, Schema("sex", "income", positive_label=">50K", negative_label="<=50K"))
    assert list(S.y) == [-1, 1]


def test_load_csv_errors(tmp_path):
    p = write(tmp_path / "d.csv", "a,b,income\n1,2,0\n")
    with pytest.raises(DataError, match="sex"):
        load_csv(p, SCHEMA)
    p = write(tmp_path / "e.csv", "a,sex,income\n1,0,0\nx,1,1\n2,0,1\n")
    with pytest.raises(DataError, match="row 3"):
        load_csv(p, SCHEMA)
    p = write(tmp_path / "f.csv", "a,sex,income\n1,0,7\n")
    with pytest.raises(DataError, match="label"):
        load_csv(p, SCHEMA)
    with pytest.raises(DataError):
        load_csv(tmp_path / "missing.csv", SCHEMA)


def test_load_csv_feature_subset(tmp_path):
    p = write(tmp_path / "d.csv", "a,b,c,sex,income\n1,2,3,0,0\n4,5,6,1,1\n")
    S = load_csv(p, Schema("sex", "income", features=("c", "a")))
    assert np.array_equal(S.X, [[3, 1], [6, 4]])


def test_normalize_examples():
    S = Dataset([[3.0, 4.0], [1.0, 0.0]], [0, 1], [1, -1])
    T, factor = normalize(S)
    assert factor == pytest.approx(0.2)
    assert np.linalg.norm(T.X, axis=1).max() == pytest.approx(1.0)
    U, f2 = normalize(Dataset([[0.6, 0.8], [0.1, 0.0]], [0, 1], [1, -1]))
    assert f2 == 1.0 and np.array_equal(U.X, [[0.6, 0.8], [0.1, 0.0]])
    with pytest.raises(DataError):
        normalize(Dataset(np.zeros((3, 2)), [0, 1, 0], [1, 1, 1]))


datasets = st.integers(1, 15).flatmap(
    lambda n: st.tuples(
        st.lists(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=3, max_size=3), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
    )
)


@settings(max_examples=60, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(datasets)
def test_csv_round_trip(tmp_path, data):
    X, z, y = data
    S = Dataset(np.array(X), z, y)
    p = tmp_path / "rt.csv"
    write_csv(S, p)
    assert load_csv(p, Schema("z", "y")) == S


def test_config_defaults_and_unknown_keys():
    cfg = parse_config("")
    assert cfg.lambdas == (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)
    assert cfg.reps == 50 and cfg.normalize
    with pytest.raises(ConfigError, match="lamdas"):
        parse_config("[experiment]\nlamdas = 0, 0.1\n")
    with pytest.raises(ConfigError):
        parse_config("[nope]\nx = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[experiment]\nlambdas =\n")
    with pytest.raises(ConfigError):
        parse_config("[experiment]\nreps = 0\n")
    with pytest.raises(ConfigError):
        parse_config("[model]\nloss = cubic\n")


def test_config_values(tmp_path):
    cfg = parse_config(
        "[data]\nsource = d.csv\nsensitive = sex\nlabel = income\nfeatures = a, b\n"
        "[model]\nkernel = rbf\nmodes = constrained, penalty\nmu = 2\n"
        "[experiment]\nlambdas = 0.1 0.2\nreps = 3\n",
        tmp_path,
    )
    assert cfg.source == str(tmp_path / "d.csv")
    assert cfg.schema.features == ("a", "b")
    assert cfg.train.kernel.kind.value == "rbf"
    assert [m.value for m in cfg.modes] == ["constrained", "penalty"]
    assert cfg.train.fairness.mu == 2.0
    assert cfg.lambdas == (0.1, 0.2)


def small_config(tmp_path, lambdas="0", extra=""):
    return write(
        tmp_path / "c.ini",
        f"[data]\nn_samples = 200\n[experiment]\nlambdas = {lambdas}\nreps = 3\nprobes = 2\n{extra}[output]\ndir = out\n",
    )


def test_sweep_lambda_zero_only(tmp_path):
    cfg = parse_config(small_config(tmp_path).read_text(), tmp_path)
    res = run_sweep(cfg)
    rows = list(csv.reader(open(res["tables"]["constrained"])))
    assert tuple(rows[0]) == TABLE_COLUMNS
    assert len(rows) == 2
    assert rows[1][TABLE_COLUMNS.index("beta_bound")] == ""
    assert res["plot"].read_text().lstrip().startswith("<?xml")


def test_sweep_full_grid_deterministic(tmp_path):
    cfg_path = small_config(tmp_path, "0, 0.01, 0.02, 0.03, 0.04, 0.05")
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "a")]) == 0
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "table_constrained.csv").read_bytes()
    b = (tmp_path / "b" / "table_constrained.csv").read_bytes()
    assert a == b
    rows = a.decode().strip().splitlines()
    assert len(rows) == 7
    assert (tmp_path / "a" / "stab_vs_lambda.svg").read_bytes() == (tmp_path / "b" / "stab_vs_lambda.svg").read_bytes()


def test_sweep_two_modes(tmp_path):
    cfg_path = small_config(tmp_path, "0.05")
    cfg_path.write_text(cfg_path.read_text().replace("[output]", "[model]\nmodes = constrained, penalty\n[output]"))
    assert main(["sweep", "--config", str(cfg_path)]) == 0
    svg = (tmp_path / "out" / "stab_vs_lambda.svg").read_text()
    assert "penalty" in svg and "constrained" in svg
    assert (tmp_path / "out" / "table_penalty.csv").exists()


def test_exit_codes(tmp_path, capsys):
    bad = write(tmp_path / "bad.ini", "[experiment]\nlamda = 1\n")
    assert main(["sweep", "--config", str(bad)]) == 1
    assert main(["sweep", "--config", str(tmp_path / "nothing.ini")]) == 1
    missing = write(tmp_path / "m.ini", "[data]\nsource = nope.csv\n")
    assert main(["sweep", "--config", str(missing)]) == 2
    nc = small_config(tmp_path, "0.05").read_text().replace("[output]", "[model]\nmax_iters = 1\n[output]")
    assert main(["sweep", "--config", str(write(tmp_path / "nc.ini", nc))]) == 3
    assert "did not converge" in capsys.readouterr().err


def test_overrides(tmp_path):
    cfg_path = small_config(tmp_path)
    out = tmp_path / "over"
    assert main(["sweep", "--config", str(cfg_path), "--lambda", "0.05,0.1", "--reps", "2", "--seed", "4",
                 "--out", str(out)]) == 0
    rows = (out / "table_constrained.csv").read_text().strip().splitlines()
    assert [r.split(",")[0] for r in rows[1:]] == ["0.05", "0.1"]
    report = json.loads((out / "report.json").read_text())
    assert report["constrained"][0]["n_reps"] == 2


def test_train_evaluate_certify(tmp_path):
    data = tmp_path / "d.csv"
    rng = np.random.default_rng(0)
    X = rng.normal(size=(150, 3)) * 4
    z = rng.integers(0, 2, 150)
    y = np.where(X[:, 0] + 0.5 * z + rng.normal(size=150) > 0, 1, 0)
    with data.open("w") as fh:
        fh.write("f1,f2,f3,g,label\n")
        for row, zi, yi in zip(X, z, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{zi},{yi}\n")
    cfg = write(tmp_path / "c.ini", "[data]\nsource = d.csv\nsensitive = g\nlabel = label\n"
                "[experiment]\nlambdas = 0.05\nprobes = 2\n[output]\ndir = out\n")
    assert main(["train", "--config", str(cfg)]) == 0
    model = json.loads((tmp_path / "out" / "model.json").read_text())
    assert model["type"] == "linear" and model["preprocessing"]["scale"] < 1
    assert main(["evaluate", "--config", str(cfg)]) == 0
    ev = json.loads((tmp_path / "out" / "evaluation.json").read_text())
    assert ev["n"] == 150 and ev["accuracy"] > 0.7
    assert main(["certify", "--config", str(cfg)]) == 0
    cert = json.loads((tmp_path / "out" / "certify.json").read_text())
    assert cert[0]["certified"] is True
    assert cert[0]["beta_hat"] <= cert[0]["beta_bound"] + cert[0]["loss_allowance"]


def test_evaluate_missing_model(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["evaluate", "--config", str(cfg), "--model", str(tmp_path / "none.json")]) == 2

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rsqnvr.errors import ConfigInvalid, ParseError
from rsqnvr.harness import (
    HEADER,
    MetricRow,
    format_rows,
    ingest_ratings,
    karcher_reference,
    parse_config,
    parse_rows,
    read_csv,
    run_case,
)
from rsqnvr.harness.cli import main
from rsqnvr.harness.ingest import split_labels
from rsqnvr.harness.runner import best_alphas, RunOutcome
from rsqnvr.problems import KarcherProblem

E = np.e

KARCHER_CFG = """
# tiny Karcher case
case = karcher
d = 3
N = 100
optimizers = rsgd, rsvrg, rsqnvr
inner_mult = 3
batch = 1
memory = 4
alpha_grid = 1e-2
max_epochs = 10
grad_tol = 0
seeds = 0, 1
timing = off
output = km.csv
"""


# config


def test_parse_config_values():
    cfg = parse_config(KARCHER_CFG)
    assert cfg.case == "karcher" and cfg.N == 100 and cfg.alpha_grid == [1e-2]
    assert cfg.optimizers == ["rsgd", "rsvrg", "rsqnvr"] and cfg.seeds == [0, 1]
    assert cfg.timing is False and cfg.m(100) == 300
    oc = cfg.optimizer_config(100, 0.01, 1, "rsgd")
    assert oc.schedule.kind == "decaying" and oc.schedule.decay == 1e-3
    assert cfg.optimizer_config(100, 0.01, 1, "rsvrg").schedule.kind == "fixed"


@pytest.mark.parametrize("text, fragment", [
    ("optimizers =", "empty"),
    ("case = torus", "case"),
    ("bogus = 1", "unknown key"),
    ("d = 3\nd = 4", "duplicate"),
    ("d = three", "bad value"),
    ("just words", "key = value"),
    ("optimizers = adam", "unknown optimizers"),
    ("alpha_grid = 0.1, -1", "alpha_grid"),
    ("case = mc\nd = 10\nN = 10\nr = 11", "r must"),
    ("retraction = qr", "unknown retraction"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigInvalid, match=fragment):
        parse_config(text)


def test_config_flavor():
    assert parse_config("case = mc\nd = 10\nN = 10\nretraction = exponential").flavor().transport == "projection"
    assert parse_config("case = karcher").flavor() is None


# metrics


finite = st.floats(allow_nan=False, allow_infinity=False)
maybe = st.one_of(st.none(), finite)
metric_rows = st.builds(
    MetricRow, st.sampled_from(["rsgd", "rsvrg", "rsqnvr", "rsd", "rlbfgs"]), st.integers(0, 10**6),
    maybe, st.integers(0, 10**4), st.integers(0, 10**12), maybe, maybe, maybe, maybe, maybe)


@given(st.lists(metric_rows, max_size=20))
def test_csv_round_trip(rows):
    text = format_rows(rows)
    assert text.splitlines()[0] == ",".join(HEADER)
    assert parse_rows(text) == rows
    assert format_rows(parse_rows(text)) == text


def test_csv_na_literal():
    row = MetricRow("rsd", 0, None, 1, 10, None, 1.5, None, None, 0.25)
    assert format_rows([row], header=False) == "rsd,0,NA,1,10,NA,1.5,NA,NA,0.25\n"


# ingestion


def write_lines(tmp_path, lines, name="ratings.dat"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


def test_ingest_ten_lines_split_counts(tmp_path):
    lines = [f"{u}::{i}::{(u + i) % 5 + 1}::97830{u}" for u, i in
             [(1, 1), (1, 2), (2, 1), (2, 3), (3, 2), (3, 3), (4, 1), (4, 4), (5, 2), (5, 4)]]
    data = ingest_ratings(write_lines(tmp_path, lines), split_seed=3, r=1)
    labels = split_labels(10, 3)
    n_train, n_val, n_test = (int(np.sum(labels == k)) for k in range(3))
    kept_train = data.problem.n_observed
    assert kept_train == n_train
    assert kept_train + len(data.validation) + len(data.test) + (
        10 - n_train - n_val - n_test) == 10
    assert len(data.validation) + len(data.test) <= n_val + n_test
    assert data.problem.d == 5


def test_ingest_whitespace_and_comma_triples(tmp_path):
    data = ingest_ratings(write_lines(tmp_path, ["1 1 4", "2,1,3.5", "2\t2\t1", "1 2 5"]), split_seed=0, r=1)
    assert data.problem.d == 2


def test_ingest_malformed_line(tmp_path):
    path = write_lines(tmp_path, ["1::1::5::0", "2::1::4::0", "oops", "3::1::2::0"])
    with pytest.raises(ParseError, match="line 3"):
        ingest_ratings(path, 0)
    with pytest.raises(ParseError, match="line 2"):
        ingest_ratings(write_lines(tmp_path, ["1 1 5", "0 1 5"], "zero.txt"), 0)


def test_ingest_drops_items_without_training(tmp_path):
    rng = np.random.default_rng(0)
    lines = [f"{u} 1 {rng.integers(1, 6)}" for u in range(1, 41)] + ["1 7 3"]
    seed = next(s for s in range(100) if split_labels(41, s)[-1] != 0)
    data = ingest_ratings(write_lines(tmp_path, lines), seed, r=1)
    assert data.dropped == 6  # items 2..7: 2..6 never rated, 7 only outside train
    assert list(data.items) == [1]
    # item 1's training ratings form the full observed set of its column
    assert data.problem.n_observed == int(np.sum(split_labels(41, seed)[:40] == 0))


# reference solve


def test_karcher_reference_examples():
    rng = np.random.default_rng(0)
    Q = KarcherProblem.random(3, 1, rng).Q
    w, f = karcher_reference(KarcherProblem(Q))
    assert np.allclose(w, Q[0], atol=1e-10) and abs(f) <= 1e-20
    w, f = karcher_reference(KarcherProblem(np.array([[[1.0]], [[E**2]]])))
    assert np.isclose(w[0, 0], E) and np.isclose(f, 1.0)


# runs


def test_run_case_karcher_rows_and_gap(tmp_path):
    cfg = parse_config(KARCHER_CFG)
    rows, outcomes, best = run_case(cfg, out_dir=tmp_path)
    for opt in cfg.optimizers:
        for seed in cfg.seeds:
            assert len([r for r in rows if r.optimizer == opt and r.seed == seed]) == 10
    assert all(r.gap_or_test_mse >= -1e-12 for r in rows)
    assert all(r.train_mse is None and r.seconds is None for r in rows)
    assert read_csv(tmp_path / "km.csv") == rows
    assert set(best) == {"rsgd", "rsvrg", "rsqnvr"}
    runs = (tmp_path / "km.runs.csv").read_text().splitlines()
    assert runs[0].startswith("optimizer,seed,alpha,status") and len(runs) == 7


def test_run_case_mc_populates_mse_columns(tmp_path):
    cfg = parse_config("""
case = mc
d = 30
N = 60
r = 2
os = 4
cn = 5
optimizers = rsvrg, rsqnvr, rsd, rlbfgs
inner_iters = 20
batch = 5
alpha_grid = 1e-2, 5e-2
max_epochs = 3
batch_iters = 3
output = mc.csv
""")
    rows, outcomes, _ = run_case(cfg, out_dir=tmp_path)
    assert rows and all(r.train_mse is not None and r.gap_or_test_mse is not None for r in rows)
    assert {r.alpha for r in rows if r.optimizer == "rsd"} == {None}


def test_run_case_is_deterministic_and_parallel_safe(tmp_path):
    cfg = parse_config(KARCHER_CFG.replace("max_epochs = 10", "max_epochs = 3"))
    run_case(cfg, out_dir=tmp_path / "a")
    run_case(cfg, out_dir=tmp_path / "b")
    run_case(cfg, out_dir=tmp_path / "c", parallel=2)
    a = (tmp_path / "a" / "km.csv").read_bytes()
    assert a == (tmp_path / "b" / "km.csv").read_bytes() == (tmp_path / "c" / "km.csv").read_bytes()


def test_best_alpha_ties_prefer_smaller():
    def outcome(alpha, final, status="max_epochs"):
        row = MetricRow("rsvrg", 0, alpha, 1, 1, None, 1.0, final, None, 1.0)
        return RunOutcome("rsvrg", 0, alpha, [row], status, "")

    assert best_alphas([outcome(0.1, 1e-3), outcome(0.01, 1e-3)]) == {"rsvrg": 0.01}
    assert best_alphas([outcome(0.1, 1e-4), outcome(0.01, 1e-3)]) == {"rsvrg": 0.1}
    assert best_alphas([outcome(0.1, 1e-9, "aborted"), outcome(0.01, 1e-3)]) == {"rsvrg": 0.01}
    assert math.isinf(outcome(0.1, 1e-9, "aborted").final)


# CLI


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / "km.cfg"
    good.write_text(KARCHER_CFG.replace("max_epochs = 10", "max_epochs = 2"))
    assert main(["run", "--config", str(good), "--out", str(tmp_path / "out"), "--seeds", "3"]) == 0
    assert {r.seed for r in read_csv(tmp_path / "out" / "km.csv")} == {3}
    bad = tmp_path / "bad.cfg"
    bad.write_text("optimizers =\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["reference", "--config", str(good)]) == 0
    assert float(capsys.readouterr().out.strip().splitlines()[-1]) > 0
    out = tmp_path / "synth.npz"
    assert main(["gen-synth", "--d", "20", "--n", "30", "--r", "2", "--os", "3", "--out", str(out)]) == 0
    with np.load(out) as z:
        assert z["rows"].size == round(3 * 2 * 48)
    assert main(["gen-synth", "--d", "4", "--n", "4", "--r", "2", "--os", "9", "--out", str(out)]) == 1


def test_cli_runtime_error(tmp_path):
    cfg = tmp_path / "ml.cfg"
    cfg.write_text(f"case = movielens\ndata_path = {tmp_path / 'nope.dat'}\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2

import math

import numpy as np
import pytest

from snlslab.errors import ConfigError
from snlslab.harness.cli import main
from snlslab.harness.config import RunConfig, dump_config, load_config, override, parse_config_text, parse_real
from snlslab.harness.experiments import (
    double_limit_experiment,
    stopping_time_experiment,
    uniform_bound_experiment,
)
from snlslab.harness.montecarlo import (
    PATH_CHUNK,
    ExperimentFailure,
    LomegaEstimate,
    chunks,
    estimate_lomega,
    parallel_map,
    power_mean,
    run_batch,
    run_paths,
)
from snlslab.harness.output import ExperimentResult, read_table, render_csv, strip_timestamp
from snlslab.integrator import solve
from snlslab.spectral import INF, Field, x_norm

SMALL = """
[grid]
half_length = 8*pi
points = 256

[solver]
eps = 0, 0.5, 1
m = 0.5, inf
dt = 0.02
horizon = 0.2

[data]
families = gaussian
norms = 1

[noise]
rank = 4

[montecarlo]
paths = 20
seed = 7
"""


@pytest.fixture
def small():
    return parse_config_text(SMALL)


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


# --------------------------------------------------------------------------
# configuration


def test_parse_real():
    assert parse_real("inf") == INF
    assert parse_real("20*pi") == pytest.approx(20 * math.pi)
    assert parse_real("pi") == pytest.approx(math.pi)
    assert parse_real("1e-3") == 1e-3
    with pytest.raises(ValueError):
        parse_real("abc")


def test_parse_small_config(small):
    assert small.points == 256
    assert small.m == (0.5, INF)
    assert small.families == ("gaussian",)
    assert small.rank == 4 and small.paths == 20
    assert small.rho == 5.0  # untouched defaults survive


def test_dump_round_trip(small):
    assert parse_config_text(dump_config(small)) == small
    default = RunConfig()
    assert parse_config_text(dump_config(default)) == default


def test_load_config(tmp_path, small):
    assert load_config(write(tmp_path, SMALL)) == small
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_unknown_key_names_line():
    with pytest.raises(ConfigError, match=r"run\.ini:3: unknown key 'pointz' in \[grid\]"):
        parse_config_text("[grid]\nhalf_length = 8*pi\npointz = 3\n", "run.ini")


def test_unknown_section_names_line():
    with pytest.raises(ConfigError, match=r":2: unknown section \[gird\]"):
        parse_config_text("\n[gird]\npoints = 3\n")


def test_bad_value_names_field():
    with pytest.raises(ConfigError, match=r":2: \[solver\] eps"):
        parse_config_text("[solver]\neps = 0, zero\n")


def test_contract_violations_are_config_errors():
    with pytest.raises(ConfigError, match="rho"):
        parse_config_text("[montecarlo]\nrho = 2\n")
    with pytest.raises(ConfigError, match="paths"):
        RunConfig(paths=0)
    with pytest.raises(ConfigError, match="eps"):
        RunConfig(eps=(1.5,))
    with pytest.raises(ConfigError):
        RunConfig(dt=0.3)
    with pytest.raises(ConfigError):
        parse_config_text("[stopping]\npairs = 2:1\n")
    with pytest.raises(ConfigError, match="zero family"):
        parse_config_text("[data]\nfamilies = zero\n")


def test_override_ignores_none(small):
    rc = override(small, seed=None, paths=40)
    assert rc.seed == 7 and rc.paths == 40


def test_manifest_leaves_out_execution_settings(small):
    a, b = small.manifest(), override(small, threads=8, out_dir="elsewhere").manifest()
    assert a == b
    assert "threads" not in a and a["m"] == [0.5, "inf"]


# --------------------------------------------------------------------------
# Monte Carlo


def test_power_mean():
    assert power_mean(np.array([2.0, 2.0]), 5) == pytest.approx(2.0)
    assert power_mean(np.zeros(3), 5) == 0.0
    assert power_mean(np.array([1.0, 0.0]), 5) == pytest.approx(0.5**0.2)


def test_chunks_fixed_size():
    parts = chunks(range(40))
    assert [len(p) for p in parts] == [PATH_CHUNK, PATH_CHUNK, 40 - 2 * PATH_CHUNK]
    assert sum(parts, ()) == tuple(range(40))


def test_parallel_map_keeps_order():
    assert parallel_map(lambda x: x * x, range(10), threads=4) == [x * x for x in range(10)]


def test_zero_noise_estimate_is_deterministic_norm(small):
    grid = small.grid()
    u0 = small.bank()[0].build(grid)
    cfg = small.solver_config(0.5, INF)
    est = estimate_lomega(cfg, u0, 17, seed=3)
    assert est.standard_error == 0.0 and est.paths == 17
    assert est.value == pytest.approx(x_norm(solve(u0, cfg)), rel=1e-14)


def test_lomega_estimate_basics():
    est = LomegaEstimate.from_samples([1.0], 5)
    assert est.standard_error == 0.0
    lo, hi = LomegaEstimate(2.0, 0.5, 10).interval(2.0)
    assert (lo, hi) == (1.0, 3.0)


@pytest.fixture(scope="module")
def stochastic_samples():
    rc = parse_config_text(SMALL)
    grid = rc.grid()
    u0 = rc.bank()[0].build(grid)
    cfg = rc.solver_config(0.5, INF, noise=rc.noise_model(grid))
    return rc, u0, cfg, np.array([s.x for s in run_paths(u0, cfg, 256, rc.seed)])


def test_rho_monotone(stochastic_samples):
    *_, x = stochastic_samples
    assert LomegaEstimate.from_samples(x, 10).value >= LomegaEstimate.from_samples(x, 5).value


def test_standard_error_shrinks_with_paths(stochastic_samples):
    *_, x = stochastic_samples
    se = [LomegaEstimate.from_samples(x[:P], 5, seed=1).standard_error for P in (64, 128, 256)]
    for a, b in zip(se, se[1:]):
        assert b / a == pytest.approx(1 / math.sqrt(2), rel=0.3)


def test_estimate_matches_path_samples(stochastic_samples):
    rc, u0, cfg, x = stochastic_samples
    est = estimate_lomega(cfg, u0, 64, seed=rc.seed)
    assert est.value == power_mean(x[:64], 5)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_names_path(small):
    grid = small.grid()
    huge = Field(grid, 1e80 * np.exp(-grid.x**2) + 0j)
    with pytest.raises(ExperimentFailure, match=r"\[path 5\]") as info:
        run_batch(huge, small.solver_config(0.0, INF), (5,), 0)
    assert info.value.path == 5


# --------------------------------------------------------------------------
# output


def test_csv_layout_and_read_back(tmp_path):
    result = ExperimentResult("demo", [{"m": "inf", "eps": 0.5}, {"m": 1.0, "eps": 0.25, "x": 3.0}], True, {"k": 1})
    text = render_csv(result, {"seed": 1}, timestamp="T0")
    lines = text.splitlines()
    assert lines[0] == "# experiment: demo"
    assert lines[2] == "# timestamp: T0"
    assert lines[3] == "# verdict: PASS"
    assert lines[5] == "m,eps,x"
    assert "# timestamp" not in strip_timestamp(text)
    path = tmp_path / "demo.csv"
    path.write_text(text)
    header, rows = read_table(path)
    assert header["manifest"]["config"] == {"seed": 1}
    assert header["summary"] == {"k": 1}
    assert rows[0] == {"m": "inf", "eps": "0.5", "x": ""}


# --------------------------------------------------------------------------
# experiments


def test_mu_zero_slice_is_eps_independent(small):
    rc = override(small, mu=(0.0,), paths=16)
    res = uniform_bound_experiment(rc)
    for sl in ("deterministic", "stochastic"):
        for m in ("inf", 0.5):
            xs = [r["x"] for r in res.rows if r["slice"] == sl and r["m"] == m]
            assert len(xs) == 3 and max(xs) == min(xs)
    assert res.passed


def test_uniform_bound_rows_carry_parameters(small):
    res = uniform_bound_experiment(override(small, paths=16))
    keys = {"slice", "data", "family", "M", "m", "eps", "mu", "A", "rho", "paths", "dt", "T"}
    assert all(keys <= set(r) for r in res.rows)
    assert len(res.rows) == 2 * 2 * 3


def test_deterministic_double_limit(small):
    rc = override(small, rank=0, m=(0.5, 1.0, 4.0, INF))
    res = double_limit_experiment(rc)
    corner = [r for r in res.rows if r["m"] == "inf" and r["eps"] == 0.5]
    assert corner[0]["D"] == 0.0
    # truncation inactive above the accumulator maximum: D stops depending on m
    at = {r["m"]: r["D"] for r in res.rows if r["eps"] == 1.0}
    assert at[4.0] == at["inf"]
    assert res.passed


def test_stopping_time_trivial_pairs(small):
    rc = override(small, paths=16)
    same = stopping_time_experiment(rc, pairs=((0.5, 0.5),), eps=0.5)
    assert same.rows[0]["violations"] == 0
    assert same.rows[0]["max_pre_tau_discrepancy"] == 0.0
    huge = stopping_time_experiment(rc, pairs=((1e6, 2e6),), eps=0.5)
    assert huge.rows[0]["stopped_fraction_m1"] == 0.0
    assert huge.rows[0]["mean_tau_m1"] == rc.horizon
    assert huge.rows[0]["max_pre_tau_discrepancy"] == 0.0


# --------------------------------------------------------------------------
# CLI


def test_cli_solve_zero_data(tmp_path, capsys):
    cfg = write(tmp_path, SMALL.replace("families = gaussian\nnorms = 1", "families = zero\nnorms = 0"))
    code = main(["solve", "--config", str(cfg), "--out", str(tmp_path / "out"), "--paths", "4"])
    assert code == 0
    assert "solve: PASS" in capsys.readouterr().out
    header, rows = read_table(tmp_path / "out" / "solve.csv")
    assert header["verdict"] == "PASS"
    assert rows and all(float(r["x"]) == 0.0 for r in rows)


def test_cli_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


def test_cli_malformed_config(tmp_path, capsys):
    cfg = write(tmp_path, "[grid]\npoints = many\n")
    assert main(["solve", "--config", str(cfg)]) == 1
    assert "run.ini:2" in capsys.readouterr().err


def test_cli_missing_config(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.ini")]) == 1


def test_cli_fail_verdict_exit_code(tmp_path, monkeypatch):
    from snlslab.harness import cli

    monkeypatch.setitem(cli.EXPERIMENTS, "solve", lambda rc: ExperimentResult("solve", [], False))
    assert main(["solve", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("command", ["solve", "stopping-time"])
def test_cli_reproducible_across_threads(tmp_path, command):
    cfg = write(tmp_path, SMALL)
    outputs = []
    for threads, sub in ((1, "a"), (1, "b"), (8, "c")):
        out = tmp_path / sub
        assert main([command, "--config", str(cfg), "--out", str(out), "--paths", "40",
                     "--threads", str(threads)]) == 0
        outputs.append(strip_timestamp((out / f"{command}.csv").read_text()))
    assert outputs[0] == outputs[1] == outputs[2]


def test_cli_seed_changes_output(tmp_path):
    cfg = write(tmp_path, SMALL)
    texts = []
    for seed in ("1", "2"):
        out = tmp_path / seed
        assert main(["solve", "--config", str(cfg), "--out", str(out), "--seed", seed]) == 0
        texts.append(strip_timestamp((out / "solve.csv").read_text()))
    assert texts[0] != texts[1]


def test_cli_dispersive_check_default(tmp_path):
    assert main(["dispersive-check", "--out", str(tmp_path)]) == 0
    header, rows = read_table(tmp_path / "dispersive-check.csv")
    assert float(rows[0]["fitted_exponent"]) == pytest.approx(-0.5, abs=0.05)
    assert header["manifest"]["versions"]["snlslab"]


def test_noise_check_rows(small):
    from snlslab.harness.experiments import noise_check

    res = noise_check(small, samples=4000)
    checks = {r["check"]: r for r in res.rows}
    assert set(checks) >= {"basis_independence", "increment_variance", "common_random_numbers", "mean_field"}
    assert res.passed

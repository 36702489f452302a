"""Experiment harness tests: config handling, tables, determinism."""

from __future__ import annotations

import numpy as np
import pytest

import dsel.linkcap as linkcap
from dsel.corrstats import CorrelationParams
from dsel.experiments import (
    ConfigError,
    CsvTable,
    ExperimentConfig,
    default_config,
    format_csv,
    load_config,
    replace,
    run_capacity,
    run_mse_surface,
    run_rate_section,
    run_rate_surface,
    write_csv,
)
from dsel.linkcap import capacity_ergodic
from dsel.quantizer import train_codebook

RATE_AT_ZERO = 21.28771237954945


def write_cfg(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# --- configuration -----------------------------------------------------------


def test_per_experiment_defaults():
    mse = default_config("mse_surface")
    assert mse.trials == 100 and mse.field_dims == (17, 17)
    cap = default_config("capacity")
    assert cap.trials == 2000 and cap.field_dims == (8, 8)
    assert cap.bits_list == (2, 4, 6, 8, 10, 12)
    assert cap.alpha_t == 0.9 and cap.alpha_f == 0.9
    sec = default_config("rate_section")
    assert sec.trials == 1
    assert sec.grid == (0.0, 0.95, 0.05)
    assert sec.d == 0.025


def test_load_minimal_config(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "experiment = rate_section\n"))
    assert cfg == default_config("rate_section")


def test_load_config_with_overrides(tmp_path):
    text = (
        "# comment line\n"
        "experiment=capacity\n"
        "\n"
        "d_total = 0.2\n"
        "bits_list = 2, 4\n"
        "trials=50\n"
        "field_m=6\n"
        "field_n=7\n"
        "grid_stop=0.9\n"
        "out=results.csv\n"
    )
    cfg = load_config(write_cfg(tmp_path, text))
    assert cfg.d_total == 0.2 and cfg.d == 0.05
    assert cfg.bits_list == (2, 4)
    assert cfg.trials == 50
    assert cfg.field_dims == (6, 7)
    assert cfg.grid == (0.0, 0.9, 0.05)
    assert cfg.out_path == "results.csv"
    assert ("d", "0.05") in cfg.echo_items()


def test_load_config_experiment_argument(tmp_path):
    path = write_cfg(tmp_path, "trials=5\n")
    cfg = load_config(path, experiment="mse_surface")
    assert cfg.experiment == "mse_surface" and cfg.trials == 5
    with pytest.raises(ConfigError, match="experiment"):
        load_config(path)  # no experiment anywhere
    path2 = write_cfg(tmp_path, "experiment=capacity\n", name="other.cfg")
    with pytest.raises(ConfigError, match="capacity"):
        load_config(path2, experiment="mse_surface")


@pytest.mark.parametrize(
    "text,needle",
    [
        ("experiment=capacity\nn_r two\n", "line 2"),
        ("experiment=capacity\nn_r=two\n", "integer"),
        ("experiment=capacity\nwibble=3\n", "unknown key"),
        ("experiment=capacity\nn_r=2\nn_r=3\n", "duplicate"),
        ("experiment=capacity\nbits_list=\n", "bits_list"),
        ("experiment=capacity\nsnr_db=nan\n", "finite"),
    ],
)
def test_parse_errors_carry_diagnostics(tmp_path, text, needle):
    with pytest.raises(ConfigError, match=needle):
        load_config(write_cfg(tmp_path, text))


def test_missing_config_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("/nonexistent/path.cfg")


@pytest.mark.parametrize(
    "changes,needle",
    [
        (dict(grid=(0.0, 0.9, 0.0)), "grid_step"),
        (dict(grid=(0.5, 0.2, 0.1)), "grid"),
        (dict(grid=(0.0, 1.0, 0.1)), "grid_stop"),
        (dict(d_total=0.0), "d_total"),
        (dict(d_total=8.1), "d_total"),  # d = 2.025 > sigma2_h
        (dict(trials=0), "trials"),
        (dict(n_r=0), "n_r"),
        (dict(sigma2_h=-1.0), "sigma2_h"),
        (dict(alpha_t=1.0), "alpha_t"),
        (dict(bits_list=()), "bits_list"),
        (dict(field_dims=(1, 8)), "field_dims"),
        (dict(seed=-1), "seed"),
    ],
)
def test_invariant_violations_name_the_field(changes, needle):
    with pytest.raises(ConfigError, match=needle):
        ExperimentConfig(experiment="capacity", **changes)


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigError, match="experiment"):
        ExperimentConfig(experiment="heatmap")


def test_replace_revalidates():
    cfg = default_config("rate_section")
    with pytest.raises(ConfigError):
        replace(cfg, d_total=-0.5)
    assert replace(cfg, seed=7).seed == 7


def test_runner_rejects_foreign_config():
    with pytest.raises(ConfigError):
        run_rate_section(default_config("capacity"))


# --- tables ------------------------------------------------------------------


def test_rate_section_table():
    table = run_rate_section(default_config("rate_section"))
    assert table.header == ("alpha", "bits_2d", "bits_1d", "bits_nondiff", "reduction_2d_vs_1d")
    assert len(table.rows) == 20
    alpha = table.column("alpha")
    assert alpha[0] == 0.0 and alpha[-1] == 0.95  # grid labels stay clean
    first = table.rows[0]
    assert first[1] == first[2] == first[3] == pytest.approx(RATE_AT_ZERO, abs=1e-12)
    last = table.rows[-1]
    assert last[1] == pytest.approx(5.4242883198197385, abs=1e-9)
    assert last[2] == pytest.approx(9.05514245556321, abs=1e-9)
    assert last[4] == pytest.approx(0.4009715091243852, abs=1e-9)
    for row in table.rows:
        assert row[1] <= row[2] + 1e-12 and row[2] <= row[3] + 1e-12


def test_rate_surface_table():
    table = run_rate_surface(default_config("rate_surface"))
    assert len(table.rows) == 400
    grid = np.asarray(table.column("bits_2d")).reshape(20, 20)
    assert grid[0, 0] == pytest.approx(RATE_AT_ZERO, abs=1e-12)
    assert grid[18, 18] == pytest.approx(8.934814724177347, abs=1e-9)
    # more correlation on either axis never costs bits
    assert np.all(np.diff(grid, axis=0) <= 1e-12)
    assert np.all(np.diff(grid, axis=1) <= 1e-12)


def test_mse_surface_table_consistency():
    cfg = default_config("mse_surface", grid=(0.5, 0.95, 0.45))
    table = run_mse_surface(cfg)
    assert len(table.rows) == 4
    for a_t, a_f, analytic, mc, se in table.rows:
        assert se > 0.0
        assert abs(mc - analytic) < 3.0 * se, (a_t, a_f)


def test_capacity_table_small(monkeypatch):
    monkeypatch.setattr(linkcap, "DEFAULT_TRAIN_SIZE", 20_000)
    cfg = default_config("capacity", bits_list=(2, 3), trials=30, field_dims=(5, 5))
    table = run_capacity(cfg)
    assert table.header == ("bits", "scheme", "capacity_mean", "stderr")
    assert len(table.rows) == 8
    assert [r[1] for r in table.rows[:4]] == ["lloyd_2d", "lloyd_1d", "theory_2d", "theory_1d"]
    by_key = {(r[0], r[1]): r[2] for r in table.rows}
    for b in (2, 3):
        assert by_key[(b, "lloyd_2d")] > by_key[(b, "lloyd_1d")]
        assert by_key[(b, "theory_2d")] > by_key[(b, "lloyd_2d")]
        assert by_key[(b, "theory_1d")] > by_key[(b, "lloyd_1d")]
    assert all(r[3] > 0.0 for r in table.rows)


def test_capacity_schemes_consume_identical_fields(monkeypatch):
    # inject a recording generator: every scheme must request exactly
    # the same channel substreams in the same order
    seen: list[tuple] = []
    real = linkcap.gen_field

    def recorder(params, m, n, n_r, n_t, seed):
        assert isinstance(seed, np.random.SeedSequence)
        seen.append((seed.entropy, tuple(seed.spawn_key)))
        return real(params, m, n, n_r, n_t, seed)

    monkeypatch.setattr(linkcap, "gen_field", recorder)
    rng = np.random.default_rng(0)
    cb = train_codebook(
        (rng.standard_normal((200, 4)) + 1j * rng.standard_normal((200, 4))), bits=2
    )
    p = CorrelationParams(alpha_t=0.9, alpha_f=0.9)
    kwargs = dict(n_r=2, n_t=2, snr_a2=2.0, trials=3, field_dims=(4, 4), seed=5)

    capacity_ergodic("perfect_csi", p, **kwargs)
    reference = seen.copy()
    for call in (
        lambda: capacity_ergodic("theory_2d", p, d_theory=0.05, **kwargs),
        lambda: capacity_ergodic("theory_1d", p, d_theory=0.05, **kwargs),
        lambda: capacity_ergodic("lloyd_2d", p, bits=2, codebook=cb, **kwargs),
        lambda: capacity_ergodic("lloyd_1d", p, bits=2, codebook=cb, **kwargs),
    ):
        seen.clear()
        call()
        assert seen == reference


# --- serialization -----------------------------------------------------------


def test_csv_header_and_determinism():
    cfg = default_config("rate_section")
    table = run_rate_section(cfg)
    text = format_csv(table, cfg)
    assert text.startswith("# experiment=rate_section seed=0 ")
    assert "bits_units=total_per_matrix" in text.splitlines()[0]
    assert text.splitlines()[1] == "alpha,bits_2d,bits_1d,bits_nondiff,reduction_2d_vs_1d"
    assert len(text.splitlines()) == 22
    assert format_csv(run_rate_section(cfg), cfg) == text


def test_mse_csv_changes_with_seed():
    base = default_config("mse_surface", grid=(0.9, 0.9, 0.1), trials=10, field_dims=(6, 6))
    a = format_csv(run_mse_surface(base), base)
    b = format_csv(run_mse_surface(replace(base, seed=1)), replace(base, seed=1))
    assert a != b


def test_write_csv(tmp_path):
    cfg = default_config("rate_section", grid=(0.0, 0.2, 0.1))
    table = run_rate_section(cfg)
    path = tmp_path / "out.csv"
    write_csv(table, cfg, str(path))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# experiment=rate_section")
    assert len(lines) == 2 + 3


def test_csvtable_validation():
    with pytest.raises(ValueError, match="cells"):
        CsvTable(header=("a", "b"), rows=((1.0,),))
    with pytest.raises(ValueError, match="non-finite"):
        CsvTable(header=("a",), rows=((float("inf"),),))
    t = CsvTable(header=("a", "s"), rows=((1.0, "x"), (2.0, "y")))
    assert t.column("s") == ["x", "y"]

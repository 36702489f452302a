"""Figure rendering writes a valid PNG for every experiment type."""

import pytest

from dsel.experiments import (
    CsvTable,
    default_config,
    run_mse_surface,
    run_rate_section,
    run_rate_surface,
)
from dsel.figures import render_figure

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _check(table, cfg, path):
    render_figure(table, cfg, str(path))
    blob = path.read_bytes()
    assert blob[:8] == PNG_MAGIC
    assert len(blob) > 1000


def test_mse_surface_figure(tmp_path):
    cfg = default_config("mse_surface", grid=(0.5, 0.95, 0.45), trials=3, field_dims=(4, 4))
    _check(run_mse_surface(cfg), cfg, tmp_path / "mse.png")


def test_rate_surface_figure(tmp_path):
    cfg = default_config("rate_surface", grid=(0.0, 0.3, 0.1))
    _check(run_rate_surface(cfg), cfg, tmp_path / "rate.png")


def test_rate_section_figure(tmp_path):
    cfg = default_config("rate_section", grid=(0.0, 0.2, 0.1))
    _check(run_rate_section(cfg), cfg, tmp_path / "section.png")


def test_capacity_figure_from_table(tmp_path):
    # rendering only needs the table shape, not a real capacity run
    rows = []
    for b in (2, 4):
        for i, scheme in enumerate(("lloyd_2d", "lloyd_1d", "theory_2d", "theory_1d")):
            rows.append((b, scheme, 3.0 + 0.1 * b - 0.2 * i, 0.05))
    table = CsvTable(header=("bits", "scheme", "capacity_mean", "stderr"), rows=tuple(rows))
    _check(table, default_config("capacity"), tmp_path / "cap.png")


def test_unknown_experiment_rejected(tmp_path):
    table = CsvTable(header=("a",), rows=((1.0,),))
    cfg = default_config("rate_section")
    object.__setattr__(cfg, "experiment", "nonsense")
    with pytest.raises(KeyError):
        render_figure(table, cfg, str(tmp_path / "x.png"))

"""Experiment orchestration: config, the four experiments, CSV output.

A config is a flat key=value text file; unspecified keys take the
defaults documented in ``describe_defaults``. Each experiment returns a
:class:`CsvTable`, and ``write_csv`` serializes it with a single
``#``-prefixed header line that echoes the full resolved configuration
(including derived quantities such as the per-entry budget d), so every
output file records exactly what produced it. Identical config and seed
give byte-identical files: floats are written with ``repr``, reductions
run in fixed index order, and all randomness flows from the seed.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corrstats import CorrelationParams
from .chansim import gen_field
from .linkcap import capacity_ergodic
from .predictor import predictor_coeffs
from .ratecalc import (
    distortion_for_rate_1d,
    distortion_for_rate_2d,
    rate_diff_1d,
    rate_diff_2d,
    rate_nondiff,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "CsvTable",
    "EXPERIMENTS",
    "default_config",
    "load_config",
    "run_experiment",
    "run_mse_surface",
    "run_rate_surface",
    "run_rate_section",
    "run_capacity",
    "write_csv",
    "format_csv",
]

EXPERIMENTS = ("mse_surface", "rate_surface", "rate_section", "capacity")

# capacity rows appear in this order for every bit budget
CAPACITY_SCHEMES = ("lloyd_2d", "lloyd_1d", "theory_2d", "theory_1d")


class ConfigError(ValueError):
    """Invalid configuration: parse failure or invariant violation."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings for one experiment run.

    ``grid`` is (start, stop, step) for the correlation axes of the
    surface/section experiments; ``alpha_t``/``alpha_f`` fix the
    operating point of the capacity experiment; ``trials`` and
    ``field_dims`` size the Monte Carlo work.
    """

    experiment: str
    grid: tuple[float, float, float] = (0.0, 0.95, 0.05)
    n_r: int = 2
    n_t: int = 2
    sigma2_h: float = 1.0
    d_total: float = 0.1
    snr_db: float = 5.0
    bits_list: tuple[int, ...] = (2, 4, 6, 8, 10, 12)
    trials: int = 1
    field_dims: tuple[int, int] = (8, 8)
    alpha_t: float = 0.9
    alpha_f: float = 0.9
    seed: int = 0
    out_path: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment: expected one of {', '.join(EXPERIMENTS)}, "
                f"got {self.experiment!r}"
            )
        start, stop, step = self.grid
        if not step > 0.0:
            raise ConfigError(f"grid_step: must be > 0, got {step}")
        if not 0.0 <= start <= stop:
            raise ConfigError(f"grid: need 0 <= start <= stop, got [{start}, {stop}]")
        if not stop < 1.0:
            raise ConfigError(f"grid_stop: must be < 1, got {stop}")
        for name in ("n_r", "n_t", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1, got {getattr(self, name)}")
        if not self.sigma2_h > 0.0:
            raise ConfigError(f"sigma2_h: must be > 0, got {self.sigma2_h}")
        if not self.d_total > 0.0:
            raise ConfigError(f"d_total: must be > 0, got {self.d_total}")
        if self.d > self.sigma2_h:
            raise ConfigError(
                f"d_total: per-entry budget d = d_total/(n_r*n_t) = {self.d} "
                f"exceeds sigma2_h = {self.sigma2_h}"
            )
        if len(self.bits_list) == 0 or any(b < 1 for b in self.bits_list):
            raise ConfigError(f"bits_list: need positive bit counts, got {self.bits_list}")
        if self.field_dims[0] < 2 or self.field_dims[1] < 2:
            raise ConfigError(f"field_dims: must be at least (2, 2), got {self.field_dims}")
        for name in ("alpha_t", "alpha_f"):
            a = getattr(self, name)
            if not 0.0 <= a < 1.0:
                raise ConfigError(f"{name}: must lie in [0, 1), got {a}")
        if self.seed < 0:
            raise ConfigError(f"seed: must be >= 0, got {self.seed}")

    @property
    def d(self) -> float:
        """Per-entry distortion budget d_total/(n_r*n_t)."""
        return self.d_total / (self.n_r * self.n_t)

    def echo_items(self) -> list[tuple[str, str]]:
        """Resolved config as (key, value-text) pairs in fixed order."""
        start, stop, step = self.grid
        return [
            ("experiment", self.experiment),
            ("seed", str(self.seed)),
            ("n_r", str(self.n_r)),
            ("n_t", str(self.n_t)),
            ("sigma2_h", repr(self.sigma2_h)),
            ("d_total", repr(self.d_total)),
            ("d", repr(self.d)),
            ("snr_db", repr(self.snr_db)),
            ("grid_start", repr(start)),
            ("grid_stop", repr(stop)),
            ("grid_step", repr(step)),
            ("alpha_t", repr(self.alpha_t)),
            ("alpha_f", repr(self.alpha_f)),
            ("bits_list", ",".join(str(b) for b in self.bits_list)),
            ("trials", str(self.trials)),
            ("field_m", str(self.field_dims[0])),
            ("field_n", str(self.field_dims[1])),
            ("bits_units", "total_per_matrix"),
        ]


@dataclass(frozen=True)
class CsvTable:
    """Rectangular table: column names plus rows of finite values."""

    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self) -> None:
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, header has {width}")
            for name, cell in zip(self.header, row):
                if isinstance(cell, str):
                    continue
                if not math.isfinite(cell):
                    raise ValueError(f"row {i}, column {name}: non-finite value {cell}")

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [row[j] for row in self.rows]


# Monte Carlo budgets differ by experiment; the analytic experiments
# leave trials at 1. mse_surface: 100 fields of 17x17 give
# 100 * 16 * 16 * n_r * n_t >= 1e5 interior prediction samples at the
# default 2x2 antenna setup.
_TRIALS_DEFAULT = {"mse_surface": 100, "capacity": 2000}
_FIELD_DIMS_DEFAULT = {"mse_surface": (17, 17)}


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """Config for ``experiment`` with documented defaults applied."""
    kwargs: dict = {"experiment": experiment}
    if experiment in _TRIALS_DEFAULT:
        kwargs["trials"] = _TRIALS_DEFAULT[experiment]
    if experiment in _FIELD_DIMS_DEFAULT:
        kwargs["field_dims"] = _FIELD_DIMS_DEFAULT[experiment]
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def _parse_int(key: str, text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: key {key!r} needs an integer, got {text!r}") from None


def _parse_float(key: str, text: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: key {key!r} needs a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"line {lineno}: key {key!r} must be finite, got {text!r}")
    return value


_INT_KEYS = ("seed", "n_r", "n_t", "trials", "field_m", "field_n")
_FLOAT_KEYS = (
    "sigma2_h", "d_total", "snr_db",
    "grid_start", "grid_stop", "grid_step",
    "alpha_t", "alpha_f",
)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat key=value lines into a raw settings dict.

    Blank lines and ``#`` comments are skipped. Errors carry the line
    number and offending key.
    """
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key == "experiment":
            raw[key] = value
        elif key == "out":
            raw["out_path"] = value
        elif key == "bits_list":
            parts = [p for p in value.replace(",", " ").split() if p]
            if not parts:
                raise ConfigError(f"line {lineno}: key 'bits_list' is empty")
            raw[key] = tuple(_parse_int("bits_list", p, lineno) for p in parts)
        elif key in _INT_KEYS:
            raw[key] = _parse_int(key, value, lineno)
        elif key in _FLOAT_KEYS:
            raw[key] = _parse_float(key, value, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in {source}")
    return raw


def load_config(path: str, experiment: str | None = None) -> ExperimentConfig:
    """Load and validate a config file.

    ``experiment`` (e.g. from the command line) fills in the experiment
    when the file does not name one; if both are present they must
    agree.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    raw = parse_config_text(text, source=str(path))

    named = raw.pop("experiment", None)
    if named is not None and experiment is not None and named != experiment:
        raise ConfigError(
            f"experiment: config file says {named!r} but {experiment!r} was requested"
        )
    chosen = named or experiment
    if chosen is None:
        raise ConfigError("experiment: not named in the config file nor on the command line")

    grid_overrides = {}
    defaults = default_config(chosen)
    start = raw.pop("grid_start", defaults.grid[0])
    stop = raw.pop("grid_stop", defaults.grid[1])
    step = raw.pop("grid_step", defaults.grid[2])
    grid_overrides["grid"] = (start, stop, step)
    field_m = raw.pop("field_m", defaults.field_dims[0])
    field_n = raw.pop("field_n", defaults.field_dims[1])
    grid_overrides["field_dims"] = (field_m, field_n)
    return default_config(chosen, **grid_overrides, **raw)


def _grid_values(grid: tuple[float, float, float]) -> list[float]:
    start, stop, step = grid
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding keeps accumulated float error out of the emitted labels
    return [round(start + k * step, 12) for k in range(count)]


def run_mse_surface(cfg: ExperimentConfig) -> CsvTable:
    """Analytic and Monte Carlo predictor MSE over the correlation grid.

    Per grid point, ``trials`` independent fields are generated and each
    interior cell (m >= 1, n >= 1) is predicted from its true
    neighbours. The standard error comes from the spread of per-field
    mean squared errors, which are independent replicates.
    """
    _require(cfg, "mse_surface")
    axis = _grid_values(cfg.grid)
    m_dim, n_dim = cfg.field_dims
    rows = []
    for i, a_t in enumerate(axis):
        for j, a_f in enumerate(axis):
            coeffs = predictor_coeffs(a_t, a_f, cfg.sigma2_h)
            params = CorrelationParams(alpha_t=a_t, alpha_f=a_f, sigma2_h=cfg.sigma2_h)
            point = i * len(axis) + j
            per_field = np.empty(cfg.trials)
            for t in range(cfg.trials):
                ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(point, t))
                data = gen_field(params, m_dim, n_dim, cfg.n_r, cfg.n_t, ss).data
                pred = coeffs.a1 * data[:-1, 1:] + coeffs.a2 * data[1:, :-1]
                per_field[t] = np.mean(np.abs(data[1:, 1:] - pred) ** 2)
            stderr = 0.0
            if cfg.trials > 1:
                stderr = float(per_field.std(ddof=1) / math.sqrt(cfg.trials))
            rows.append((a_t, a_f, coeffs.mse, float(per_field.mean()), stderr))
    return CsvTable(
        header=("alpha_t", "alpha_f", "mse_analytic", "mse_montecarlo", "mc_stderr"),
        rows=tuple(rows),
    )


def run_rate_surface(cfg: ExperimentConfig) -> CsvTable:
    """Minimal 2-D differential feedback rate over the correlation grid."""
    _require(cfg, "rate_surface")
    axis = _grid_values(cfg.grid)
    rows = []
    for a_t in axis:
        for a_f in axis:
            r = rate_diff_2d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d, a_t, a_f)
            rows.append((a_t, a_f, r.bits_total))
    return CsvTable(header=("alpha_t", "alpha_f", "bits_2d"), rows=tuple(rows))


def run_rate_section(cfg: ExperimentConfig) -> CsvTable:
    """Rates along the diagonal alpha_t = alpha_f, all three schemes."""
    _require(cfg, "rate_section")
    nondiff = rate_nondiff(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d).bits_total
    rows = []
    for a in _grid_values(cfg.grid):
        b2 = rate_diff_2d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d, a, a).bits_total
        b1 = rate_diff_1d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.d, a).bits_total
        reduction = 0.0 if b1 == 0.0 else 1.0 - b2 / b1
        rows.append((a, b2, b1, nondiff, reduction))
    return CsvTable(
        header=("alpha", "bits_2d", "bits_1d", "bits_nondiff", "reduction_2d_vs_1d"),
        rows=tuple(rows),
    )


def run_capacity(cfg: ExperimentConfig) -> CsvTable:
    """Ergodic capacity versus feedback bits for the four feedback schemes.

    Every scheme at every bit budget draws the same per-trial channel
    realizations (the field substream depends only on seed and trial),
    so rows are paired comparisons. Theory rows evaluate at the
    distortion implied by inverting the rate formula at the given
    budget; Lloyd rows run the quantized feedback loop.
    """
    _require(cfg, "capacity")
    params = CorrelationParams(
        alpha_t=cfg.alpha_t, alpha_f=cfg.alpha_f, sigma2_h=cfg.sigma2_h
    )
    a2_amp = 10.0 ** (cfg.snr_db / 10.0)
    common = dict(
        params=params, n_r=cfg.n_r, n_t=cfg.n_t, snr_a2=a2_amp,
        trials=cfg.trials, field_dims=cfg.field_dims, seed=cfg.seed,
    )
    rows = []
    for b in cfg.bits_list:
        d2 = distortion_for_rate_2d(
            cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.alpha_t, cfg.alpha_f, float(b)
        )
        d1 = distortion_for_rate_1d(cfg.n_r, cfg.n_t, cfg.sigma2_h, cfg.alpha_t, float(b))
        by_scheme = {
            "lloyd_2d": capacity_ergodic("lloyd_2d", bits=b, **common),
            "lloyd_1d": capacity_ergodic("lloyd_1d", bits=b, **common),
            "theory_2d": capacity_ergodic("theory_2d", d_theory=d2, **common),
            "theory_1d": capacity_ergodic("theory_1d", d_theory=d1, **common),
        }
        for scheme in CAPACITY_SCHEMES:
            mean, stderr = by_scheme[scheme]
            rows.append((b, scheme, mean, stderr))
    return CsvTable(header=("bits", "scheme", "capacity_mean", "stderr"), rows=tuple(rows))


_RUNNERS = {
    "mse_surface": run_mse_surface,
    "rate_surface": run_rate_surface,
    "rate_section": run_rate_section,
    "capacity": run_capacity,
}


def _require(cfg: ExperimentConfig, experiment: str) -> None:
    if cfg.experiment != experiment:
        raise ConfigError(
            f"experiment: config is for {cfg.experiment!r}, runner expects {experiment!r}"
        )


def run_experiment(cfg: ExperimentConfig) -> CsvTable:
    """Dispatch to the runner named by ``cfg.experiment``."""
    return _RUNNERS[cfg.experiment](cfg)


def _fmt_cell(cell) -> str:
    if isinstance(cell, str):
        return cell
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    return repr(float(cell))


def format_csv(table: CsvTable, cfg: ExperimentConfig) -> str:
    """Render the table with the resolved-config provenance header."""
    echo = " ".join(f"{k}={v}" for k, v in cfg.echo_items())
    lines = [f"# {echo}", ",".join(table.header)]
    lines.extend(",".join(_fmt_cell(c) for c in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def write_csv(table: CsvTable, cfg: ExperimentConfig, path: str) -> None:
    """Write the table to ``path`` (see :func:`format_csv`)."""
    Path(path).write_text(format_csv(table, cfg))


def replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy with fields changed; revalidates all invariants."""
    return dataclasses.replace(cfg, **changes)

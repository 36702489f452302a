"""Doubly-selective MIMO channel field generation and empirical statistics.

A field is an M x N grid (symbol interval m, subchannel n) of N_r x N_t
complex matrices. Generation cascades two AR1 filters over an i.i.d.
complex Gaussian grid: first along the time axis with coefficient
alpha_t, then along the frequency axis with alpha_f. The cascade
realizes exactly the separable correlation

    E{H[m+dm, n+dn] conj(H[m, n])} = sigma2_h * alpha_t^|dm| * alpha_f^|dn|

per entry, with no burn-in: every 1-D pass starts from the stationary
marginal (the first slice is taken at full variance), so interior and
edge cells share one distribution. A naive joint recursion
H[m,n] = a*H[m-1,n] + b*H[m,n-1] + noise does not have separable
correlation, which is why the cascade form is used.

Entries at distinct antenna pairs are independent (no spatial
correlation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corrstats import CorrelationParams

__all__ = [
    "ChannelField",
    "complex_normal",
    "ar1_step",
    "gen_field",
    "empirical_corr",
    "dump_field",
    "load_field",
]


@dataclass(frozen=True)
class ChannelField:
    """One realization of the channel over an M x N time-frequency grid.

    ``data`` has shape (m_slots, n_slots, n_r, n_t), complex entries.
    Immutable after construction; the array is marked read-only.
    """

    data: np.ndarray
    params: CorrelationParams
    seed: int

    def __post_init__(self) -> None:
        if self.data.ndim != 4:
            raise ValueError(f"field data must be 4-d, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field data contains non-finite entries")
        self.data.flags.writeable = False

    @property
    def m_slots(self) -> int:
        return self.data.shape[0]

    @property
    def n_slots(self) -> int:
        return self.data.shape[1]

    @property
    def n_r(self) -> int:
        return self.data.shape[2]

    @property
    def n_t(self) -> int:
        return self.data.shape[3]


def complex_normal(rng: np.random.Generator, sigma2: float, shape: tuple) -> np.ndarray:
    # CN(0, sigma2): independent real/imag parts, each N(0, sigma2/2)
    s = np.sqrt(sigma2 / 2.0)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def ar1_step(
    prev: np.ndarray,
    alpha: float,
    sigma2_h: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """One AR1 update: alpha*prev + sqrt(1 - alpha^2)*W, W ~ CN(0, sigma2_h).

    Stationary: if ``prev`` has per-entry variance sigma2_h, so does the
    output, with lag-1 correlation alpha.

    Raises:
        ValueError: if alpha is outside [0, 1] or prev is not finite.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"AR1 coefficient must lie in [0, 1], got {alpha}")
    if not np.all(np.isfinite(prev)):
        raise ValueError("ar1_step requires finite input")
    gain = np.sqrt(1.0 - alpha * alpha)
    return alpha * prev + gain * complex_normal(rng, sigma2_h, np.shape(prev))


def _ar1_filter_axis0(white: np.ndarray, alpha: float) -> np.ndarray:
    # y[0] = x[0]; y[k] = alpha*y[k-1] + sqrt(1-alpha^2)*x[k]
    out = np.empty_like(white)
    out[0] = white[0]
    gain = np.sqrt(1.0 - alpha * alpha)
    for k in range(1, white.shape[0]):
        out[k] = alpha * out[k - 1] + gain * white[k]
    return out


def gen_field(
    params: CorrelationParams,
    m_slots: int,
    n_slots: int,
    n_r: int,
    n_t: int,
    seed,
) -> ChannelField:
    """Generate one field realization by cascade AR1 filtering.

    ``seed`` may be an unsigned integer or a ``numpy.random.SeedSequence``
    (callers running many trials hand each trial its own substream).
    Identical seed gives a bit-identical field.

    Raises:
        ValueError: on non-positive dimensions.
    """
    if m_slots < 1 or n_slots < 1 or n_r < 1 or n_t < 1:
        raise ValueError(
            f"field dimensions must be positive, got "
            f"({m_slots}, {n_slots}, {n_r}, {n_t})"
        )
    rng = np.random.default_rng(seed)
    white = complex_normal(rng, params.sigma2_h, (m_slots, n_slots, n_r, n_t))
    timed = _ar1_filter_axis0(white, params.alpha_t)
    # frequency axis: same filter applied along axis 1
    data = np.swapaxes(
        _ar1_filter_axis0(np.swapaxes(timed, 0, 1), params.alpha_f), 0, 1
    )
    seed_repr = seed if isinstance(seed, int) else -1
    return ChannelField(data=np.ascontiguousarray(data), params=params, seed=seed_repr)


def empirical_corr(field: ChannelField, dm: int, dn: int) -> float:
    """Sample correlation at lag (dm, dn), averaged per antenna entry.

    Returns the mean of Re{H[m+dm, n+dn] * conj(H[m, n])} over all valid
    grid positions and all antenna entries. Lags may be negative (even
    symmetry); |dm| must be < m_slots and |dn| < n_slots.
    """
    dm, dn = abs(dm), abs(dn)
    m, n = field.m_slots, field.n_slots
    if dm >= m or dn >= n:
        raise ValueError(
            f"lags ({dm}, {dn}) out of range for a {m}x{n} field"
        )
    a = field.data
    shifted = a[dm:, dn:]
    base = a[: m - dm, : n - dn]
    return float(np.mean((shifted * np.conj(base)).real))


# --- field dump -------------------------------------------------------------
#
# Text layout (one grid cell per data row):
#   line 1: "# dsel field m_slots=<M> n_slots=<N> n_r=<R> n_t=<T>
#            alpha_t=<..> alpha_f=<..> sigma2_h=<..> seed=<..>"
#   line 2: "m,n,re_0_0,im_0_0,...": antenna entries row-major, each as a
#            real/imag pair
#   data:   one row per (m, n) in row-major grid order; floats printed with
#           17 significant digits so a reload is bit-exact.


def _fmt(x: float) -> str:
    return format(x, ".17g")


def dump_field(field: ChannelField, path: str) -> None:
    """Write the field as documented CSV text (bit-exact reload)."""
    p = field.params
    cols = ["m", "n"]
    for r in range(field.n_r):
        for t in range(field.n_t):
            cols += [f"re_{r}_{t}", f"im_{r}_{t}"]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(
            f"# dsel field m_slots={field.m_slots} n_slots={field.n_slots} "
            f"n_r={field.n_r} n_t={field.n_t} "
            f"alpha_t={_fmt(p.alpha_t)} alpha_f={_fmt(p.alpha_f)} "
            f"sigma2_h={_fmt(p.sigma2_h)} seed={field.seed}\n"
        )
        fh.write(",".join(cols) + "\n")
        for m in range(field.m_slots):
            for n in range(field.n_slots):
                vals = []
                for r in range(field.n_r):
                    for t in range(field.n_t):
                        z = field.data[m, n, r, t]
                        vals += [_fmt(z.real), _fmt(z.imag)]
                fh.write(f"{m},{n}," + ",".join(vals) + "\n")


def load_field(path: str) -> ChannelField:
    """Reload a field written by :func:`dump_field`."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if not header.startswith("# dsel field "):
            raise ValueError(f"{path}: not a field dump")
        kv = dict(tok.split("=", 1) for tok in header[len("# dsel field "):].split())
        m_slots, n_slots = int(kv["m_slots"]), int(kv["n_slots"])
        n_r, n_t = int(kv["n_r"]), int(kv["n_t"])
        params = CorrelationParams(
            alpha_t=float(kv["alpha_t"]),
            alpha_f=float(kv["alpha_f"]),
            sigma2_h=float(kv["sigma2_h"]),
        )
        fh.readline()  # column header
        data = np.empty((m_slots, n_slots, n_r, n_t), dtype=complex)
        for line in fh:
            parts = line.strip().split(",")
            m, n = int(parts[0]), int(parts[1])
            flat = np.array([float(v) for v in parts[2:]])
            data[m, n] = (flat[0::2] + 1j * flat[1::2]).reshape(n_r, n_t)
    return ChannelField(data=data, params=params, seed=int(kv["seed"]))

"""Closed-form feedback-rate calculators.

All rates are reported in bits (log base 2) for one N_r x N_t channel
matrix per feedback block, at per-entry mean squared distortion d.

Non-differential feedback of a CN(0, sigma2) entry needs
log2(sigma2/d) bits; the differential schemes replace sigma2 by the
prediction-error variance but pay two correction terms for the fact
that the predictor at the transmitter only ever sees quantized history:

    R_2d = N_r*N_t * log2( a1^2 + a2^2 + 2*a1*a2*alpha_t*alpha_f*d/sigma2
                           + var_d/d )

where (a1, a2, var_d) come from the predictor module. The cross term is
the quantization-error correlation between the two history cells,
r(E_time, E_freq) = d^2*alpha_t*alpha_f/sigma2, divided by d^2. The 1-D
specialization (a1 = alpha, a2 = 0) collapses to

    R_1d = N_r*N_t * log2( alpha^2 + sigma2*(1 - alpha^2)/d ).

A rate argument below 1 would make the bound negative; rates are
nonnegative by definition, so such results are clamped to zero and
flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .predictor import predictor_coeffs

__all__ = [
    "RateReport",
    "gaussian_entropy_bits",
    "rate_nondiff",
    "rate_diff_2d",
    "rate_diff_1d",
    "quant_error_corr",
    "distortion_for_rate_2d",
    "distortion_for_rate_1d",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class RateReport:
    """A rate figure together with the inputs that produced it."""

    bits_total: float
    bits_per_entry: float
    scheme: str  # non_differential | diff_1d_time | diff_1d_freq | diff_2d
    d: float
    sigma2_h: float
    n_r: int
    n_t: int
    alpha_t: float | None = None
    alpha_f: float | None = None
    clamped: bool = False

    @property
    def nats_total(self) -> float:
        """Same rate in natural-log units."""
        return self.bits_total * _LN2


def gaussian_entropy_bits(sigma2: float) -> float:
    """Differential entropy of a real N(0, sigma2) variable, in bits."""
    if not sigma2 > 0.0:
        raise ValueError(f"variance must be positive, got {sigma2}")
    return 0.5 * math.log2(2.0 * math.pi * math.e * sigma2)


def _check_budget(sigma2_h: float, d: float) -> None:
    if not sigma2_h > 0.0:
        raise ValueError(f"sigma2_h must be positive, got {sigma2_h}")
    if not 0.0 < d <= sigma2_h:
        raise ValueError(
            f"per-entry distortion d must satisfy 0 < d <= sigma2_h, got d={d}"
        )


def _report(arg: float, scheme: str, n_r: int, n_t: int, sigma2_h: float, d: float,
            alpha_t: float | None, alpha_f: float | None) -> RateReport:
    clamped = arg < 1.0
    bits_total = 0.0 if clamped else n_r * n_t * math.log2(arg)
    return RateReport(
        bits_total=bits_total,
        bits_per_entry=bits_total / (n_r * n_t),
        scheme=scheme,
        d=d,
        sigma2_h=sigma2_h,
        n_r=n_r,
        n_t=n_t,
        alpha_t=alpha_t,
        alpha_f=alpha_f,
        clamped=clamped,
    )


def rate_nondiff(n_r: int, n_t: int, sigma2_h: float, d: float) -> RateReport:
    """Rate to feed back the full matrix: N_r*N_t*log2(sigma2_h/d)."""
    _check_budget(sigma2_h, d)
    return _report(sigma2_h / d, "non_differential", n_r, n_t, sigma2_h, d, None, None)


def _arg_2d(sigma2_h: float, d: float, alpha_t: float, alpha_f: float) -> float:
    c = predictor_coeffs(alpha_t, alpha_f, sigma2_h)
    return (
        c.a1 * c.a1
        + c.a2 * c.a2
        + 2.0 * c.a1 * c.a2 * alpha_t * alpha_f * d / sigma2_h
        + c.mse / d
    )


def rate_diff_2d(
    n_r: int, n_t: int, sigma2_h: float, d: float, alpha_t: float, alpha_f: float
) -> RateReport:
    """Minimal rate for 2-D differential feedback (joint time/frequency)."""
    _check_budget(sigma2_h, d)
    arg = _arg_2d(sigma2_h, d, alpha_t, alpha_f)
    return _report(arg, "diff_2d", n_r, n_t, sigma2_h, d, alpha_t, alpha_f)


def rate_diff_1d(
    n_r: int, n_t: int, sigma2_h: float, d: float, alpha: float, axis: str = "time"
) -> RateReport:
    """Minimal rate using one correlation axis only (a1 = alpha, a2 = 0)."""
    _check_budget(sigma2_h, d)
    if not 0.0 <= alpha < 1.0:
        raise ValueError(
            f"1-D differential rate needs 0 <= alpha < 1, got {alpha}"
        )
    if axis not in ("time", "freq"):
        raise ValueError(f"axis must be 'time' or 'freq', got {axis!r}")
    arg = alpha * alpha + sigma2_h * (1.0 - alpha * alpha) / d
    scheme = "diff_1d_time" if axis == "time" else "diff_1d_freq"
    a_t = alpha if axis == "time" else None
    a_f = alpha if axis == "freq" else None
    return _report(arg, scheme, n_r, n_t, sigma2_h, d, a_t, a_f)


def quant_error_corr(d: float, sigma2_h: float, alpha_t: float, alpha_f: float) -> float:
    """Correlation of the two history quantization errors: d^2*alpha_t*alpha_f/sigma2_h."""
    if not d > 0.0:
        raise ValueError(f"d must be positive, got {d}")
    if not sigma2_h > 0.0:
        raise ValueError(f"sigma2_h must be positive, got {sigma2_h}")
    return d * d * alpha_t * alpha_f / sigma2_h


# --- rate inversion ----------------------------------------------------------
#
# The capacity experiment needs the distortion implied by a bit budget.
# Both rate formulas are strictly decreasing in d on the branch that
# matters: the 1-D argument falls monotonically until it reaches 1 at
# d = sigma2; the 2-D argument falls until d* = sqrt(var_d*sigma2 /
# (2*a1*a2*alpha_t*alpha_f)) where the cross term takes over. Root
# finding runs on the unclamped log to keep strict monotonicity.


def distortion_for_rate_2d(
    n_r: int, n_t: int, sigma2_h: float, alpha_t: float, alpha_f: float, bits_total: float
) -> float:
    """Invert the 2-D rate formula: the d at which the rate equals bits_total."""
    if not bits_total > 0.0:
        raise ValueError(f"bits_total must be positive, got {bits_total}")
    c = predictor_coeffs(alpha_t, alpha_f, sigma2_h)
    if c.mse == 0.0:
        raise ValueError("degenerate statistics: zero prediction error, any rate suffices")
    cross = 2.0 * c.a1 * c.a2 * alpha_t * alpha_f
    if cross > 0.0:
        d_hi = min(math.sqrt(c.mse * sigma2_h / cross), sigma2_h)
    else:
        d_hi = sigma2_h
    n = n_r * n_t

    def gap(d: float) -> float:
        return n * math.log2(_arg_2d(sigma2_h, d, alpha_t, alpha_f)) - bits_total

    if gap(d_hi) > 0.0:
        raise ValueError(
            f"bits_total={bits_total} below the formula's minimum on the "
            f"monotone branch; no admissible distortion"
        )
    d_lo = 1e-12 * sigma2_h
    return float(brentq(gap, d_lo, d_hi, xtol=1e-15, rtol=8.9e-16))


def distortion_for_rate_1d(
    n_r: int, n_t: int, sigma2_h: float, alpha: float, bits_total: float
) -> float:
    """Invert the 1-D rate formula for d given a positive bit budget."""
    if not bits_total > 0.0:
        raise ValueError(f"bits_total must be positive, got {bits_total}")
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"need 0 <= alpha < 1, got {alpha}")
    n = n_r * n_t

    def gap(d: float) -> float:
        return n * math.log2(alpha * alpha + sigma2_h * (1.0 - alpha * alpha) / d) - bits_total

    d_lo = 1e-12 * sigma2_h
    return float(brentq(gap, d_lo, sigma2_h, xtol=1e-15, rtol=8.9e-16))

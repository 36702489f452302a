"""Second-order statistics of the doubly-selective channel.

The channel decorrelates along two axes: symbol intervals (Doppler) and
subchannels (delay spread). Both are summarized by lag-1 coefficients,

    alpha_t = J0(2*pi*f_d*t_s)
    alpha_f = 1/sqrt(1 + (2*pi*f_s*delta)^2)

and the two-dimensional correlation is the separable product
sigma2_H * alpha_t^|dm| * alpha_f^|dn| under the AR1 extension to
multi-lag. This module evaluates those quantities; field generation
lives in :mod:`dsel.chansim`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import j0 as _scipy_j0

__all__ = [
    "CorrelationParams",
    "bessel_j0",
    "temporal_corr",
    "spectral_corr",
    "separable_corr",
]

# Absolute accuracy documented for bessel_j0 on |x| <= 50. The backing
# Cephes evaluation is far tighter; tests pin this bound.
J0_ABS_TOL = 1e-10

_PHYS_REL_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationParams:
    """Lag-1 correlation coefficients and channel power.

    Physical parameters (Doppler, symbol period, subchannel spacing, RMS
    delay spread) are optional; when supplied they must reproduce the
    stored coefficients.

    Attributes:
        alpha_t: lag-1 temporal correlation, in [0, 1].
        alpha_f: lag-1 spectral correlation, in [0, 1].
        sigma2_h: per-entry channel power, > 0.
        f_d: Doppler frequency in Hz (optional).
        t_s: symbol period in seconds (optional).
        f_s: subchannel spacing in Hz (optional).
        delay_spread: RMS delay spread in seconds (optional).
    """

    alpha_t: float
    alpha_f: float
    sigma2_h: float = 1.0
    f_d: float | None = None
    t_s: float | None = None
    f_s: float | None = None
    delay_spread: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha_t <= 1.0):
            raise ValueError(f"alpha_t must lie in [0, 1], got {self.alpha_t}")
        if not (0.0 <= self.alpha_f <= 1.0):
            raise ValueError(f"alpha_f must lie in [0, 1], got {self.alpha_f}")
        if not self.sigma2_h > 0.0:
            raise ValueError(f"sigma2_h must be positive, got {self.sigma2_h}")
        if self.f_d is not None and self.t_s is not None:
            derived = temporal_corr(self.f_d, self.t_s)
            if abs(derived - self.alpha_t) > _PHYS_REL_TOL * max(1.0, abs(self.alpha_t)):
                raise ValueError(
                    "alpha_t inconsistent with (f_d, t_s): "
                    f"stored {self.alpha_t}, derived {derived}"
                )
        if self.f_s is not None and self.delay_spread is not None:
            derived = spectral_corr(self.f_s, self.delay_spread)
            if abs(derived - self.alpha_f) > _PHYS_REL_TOL * max(1.0, abs(self.alpha_f)):
                raise ValueError(
                    "alpha_f inconsistent with (f_s, delay_spread): "
                    f"stored {self.alpha_f}, derived {derived}"
                )


def bessel_j0(x: float) -> float:
    """Zero-order Bessel function of the first kind.

    Args:
        x: finite real argument.

    Returns:
        J0(x), absolute error below ``J0_ABS_TOL`` on |x| <= 50.

    Raises:
        ValueError: if ``x`` is not finite.
    """
    if not math.isfinite(x):
        raise ValueError(f"bessel_j0 requires a finite argument, got {x}")
    return float(_scipy_j0(x))


def temporal_corr(f_d: float, t_s: float) -> float:
    """Lag-1 temporal correlation J0(2*pi*f_d*t_s).

    Args:
        f_d: Doppler frequency in Hz, >= 0.
        t_s: symbol period in seconds, > 0.

    Raises:
        ValueError: on negative Doppler or non-positive symbol period.

    Note:
        J0 goes negative past its first zero (2*pi*f_d*t_s > 2.4048...).
        The raw value is returned; :class:`CorrelationParams` rejects
        coefficients outside [0, 1] rather than clamping.
    """
    if f_d < 0.0:
        raise ValueError(f"Doppler frequency must be >= 0, got {f_d}")
    if not t_s > 0.0:
        raise ValueError(f"symbol period must be > 0, got {t_s}")
    return bessel_j0(2.0 * math.pi * f_d * t_s)


def spectral_corr(f_s: float, delay_spread: float) -> float:
    """Lag-1 spectral correlation 1/sqrt(1 + (2*pi*f_s*delta)^2).

    Args:
        f_s: subchannel spacing in Hz, >= 0.
        delay_spread: RMS delay spread in seconds, >= 0.

    Returns:
        A value in (0, 1].

    Raises:
        ValueError: on negative inputs.
    """
    if f_s < 0.0:
        raise ValueError(f"subchannel spacing must be >= 0, got {f_s}")
    if delay_spread < 0.0:
        raise ValueError(f"delay spread must be >= 0, got {delay_spread}")
    x = 2.0 * math.pi * f_s * delay_spread
    return 1.0 / math.sqrt(1.0 + x * x)


def separable_corr(params: CorrelationParams, dm: int, dn: int) -> float:
    """Two-dimensional correlation sigma2_h * alpha_t^|dm| * alpha_f^|dn|.

    Even in both lags by stationarity, hence the absolute values.
    """
    return params.sigma2_h * params.alpha_t ** abs(dm) * params.alpha_f ** abs(dn)

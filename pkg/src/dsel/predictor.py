"""Two-dimensional MMSE channel predictor and differential CSI.

The predictor estimates H[m,n] from its time and frequency neighbours,

    Hhat[m,n] = a1*H[m-1,n] + a2*H[m,n-1],

with coefficients chosen by the orthogonality principle for the
separable AR1 statistics. The differential CSI is the prediction error
H_d = H - Hhat; reconstruction adds the (quantized) differential back
onto the prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PredictorCoeffs", "predictor_coeffs", "predict", "differential", "reconstruct"]


@dataclass(frozen=True)
class PredictorCoeffs:
    a1: float
    a2: float
    mse: float


def predictor_coeffs(alpha_t: float, alpha_f: float, sigma2_h: float) -> PredictorCoeffs:
    """Solve the 2x2 normal equations for the optimal (a1, a2) and its MSE.

        a1 = alpha_t*(1 - alpha_f^2) / (1 - alpha_t^2*alpha_f^2)
        a2 = alpha_f*(1 - alpha_t^2) / (1 - alpha_t^2*alpha_f^2)
        mse = sigma2_h*(1 - a1^2 - a2^2 - 2*a1*a2*alpha_t*alpha_f)

    Raises ValueError outside [0,1]^2, for non-positive power, and at the
    singular corner alpha_t = alpha_f = 1.
    """
    if not (0.0 <= alpha_t <= 1.0 and 0.0 <= alpha_f <= 1.0):
        raise ValueError(f"correlations must lie in [0, 1], got ({alpha_t}, {alpha_f})")
    if not sigma2_h > 0.0:
        raise ValueError(f"sigma2_h must be positive, got {sigma2_h}")
    den = 1.0 - alpha_t * alpha_t * alpha_f * alpha_f
    if den == 0.0:
        raise ValueError("singular system: alpha_t = alpha_f = 1 has no unique predictor")
    a1 = alpha_t * (1.0 - alpha_f * alpha_f) / den
    a2 = alpha_f * (1.0 - alpha_t * alpha_t) / den
    mse = sigma2_h * (1.0 - a1 * a1 - a2 * a2 - 2.0 * a1 * a2 * alpha_t * alpha_f)
    if mse < 0.0:
        # the closed form is nonnegative; tolerate rounding at the extremes only
        if mse < -1e-12 * sigma2_h:
            raise ValueError(f"prediction MSE came out negative: {mse}")
        mse = 0.0
    return PredictorCoeffs(a1=a1, a2=a2, mse=mse)


def _check_shapes(*mats: np.ndarray) -> None:
    shapes = {np.shape(m) for m in mats}
    if len(shapes) != 1:
        raise ValueError(f"matrix shapes differ: {sorted(shapes)}")


def predict(h_time_prev: np.ndarray, h_freq_prev: np.ndarray, coeffs: PredictorCoeffs) -> np.ndarray:
    """a1*h_time_prev + a2*h_freq_prev, elementwise."""
    _check_shapes(h_time_prev, h_freq_prev)
    return coeffs.a1 * h_time_prev + coeffs.a2 * h_freq_prev


def differential(
    h_current: np.ndarray,
    h_time_prev: np.ndarray,
    h_freq_prev: np.ndarray,
    coeffs: PredictorCoeffs,
) -> np.ndarray:
    """Prediction error H_d = h_current - a1*h_time_prev - a2*h_freq_prev."""
    _check_shapes(h_current, h_time_prev, h_freq_prev)
    return h_current - predict(h_time_prev, h_freq_prev, coeffs)


def reconstruct(
    h_time_prev: np.ndarray,
    h_freq_prev: np.ndarray,
    h_d_quantized: np.ndarray,
    coeffs: PredictorCoeffs,
) -> np.ndarray:
    """Prediction plus fed-back differential; inverse of ``differential``."""
    _check_shapes(h_time_prev, h_freq_prev, h_d_quantized)
    return predict(h_time_prev, h_freq_prev, coeffs) + h_d_quantized

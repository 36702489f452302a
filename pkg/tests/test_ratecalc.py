"""Feedback-rate tests.

Every closed-form value asserted here was frozen from an independent
evaluation (high-precision arithmetic and a separate root finder), so
these constants are oracles, not copies of the implementation output.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from dsel.predictor import predictor_coeffs
from dsel.ratecalc import (
    distortion_for_rate_1d,
    distortion_for_rate_2d,
    gaussian_entropy_bits,
    quant_error_corr,
    rate_diff_1d,
    rate_diff_2d,
    rate_nondiff,
)

NR, NT, S2, D = 2, 2, 1.0, 0.025


def test_entropy_bits():
    # real N(0, 1): 0.5*log2(2*pi*e)
    assert abs(gaussian_entropy_bits(1.0) - 2.047095585180641) < 1e-12
    # doubling the variance adds half a bit per real dimension
    assert math.isclose(
        gaussian_entropy_bits(2.0) - gaussian_entropy_bits(1.0), 0.5, rel_tol=1e-12
    )
    with pytest.raises(ValueError):
        gaussian_entropy_bits(0.0)


def test_nondiff_rate_value_and_entropy_route():
    r = rate_nondiff(NR, NT, S2, D)
    assert abs(r.bits_total - 21.28771237954945) < 1e-12
    assert math.isclose(r.bits_total, 4.0 * math.log2(40.0), rel_tol=1e-15)
    # dual route: each complex entry is two real dimensions, so its rate
    # is twice the real-Gaussian entropy difference
    via_entropy = NR * NT * 2.0 * (gaussian_entropy_bits(S2) - gaussian_entropy_bits(D))
    assert math.isclose(r.bits_total, via_entropy, rel_tol=1e-12)
    assert r.bits_per_entry * NR * NT == pytest.approx(r.bits_total, rel=1e-15)
    assert not r.clamped


def test_rate_2d_frozen_points():
    assert abs(rate_diff_2d(NR, NT, S2, D, 0.9, 0.9).bits_total - 8.934814724177347) < 1e-9
    assert abs(rate_diff_2d(NR, NT, S2, D, 0.95, 0.95).bits_total - 5.4242883198197385) < 1e-9


def test_rate_1d_frozen_points():
    assert abs(rate_diff_1d(NR, NT, S2, D, 0.9).bits_total - 12.288423201921677) < 1e-9
    assert abs(rate_diff_1d(NR, NT, S2, D, 0.95).bits_total - 9.05514245556321) < 1e-9
    # the 1-D argument is exact at alpha = 0.9: 0.81 + 0.19/0.025
    assert math.isclose(
        rate_diff_1d(NR, NT, S2, D, 0.9).bits_total, 4.0 * math.log2(8.41), rel_tol=1e-14
    )


def test_reduction_values():
    b2 = rate_diff_2d(NR, NT, S2, D, 0.9, 0.9).bits_total
    b1 = rate_diff_1d(NR, NT, S2, D, 0.9).bits_total
    assert abs((1.0 - b2 / b1) - 0.27290795756610087) < 1e-9
    b2 = rate_diff_2d(NR, NT, S2, D, 0.95, 0.95).bits_total
    b1 = rate_diff_1d(NR, NT, S2, D, 0.95).bits_total
    assert abs((1.0 - b2 / b1) - 0.4009715091243852) < 1e-9


def test_boundary_identities_on_grid():
    # no correlation at all: differential buys nothing
    assert math.isclose(
        rate_diff_2d(NR, NT, S2, D, 0.0, 0.0).bits_total,
        rate_nondiff(NR, NT, S2, D).bits_total,
        rel_tol=1e-12,
    )
    # dead frequency axis: 2-D collapses onto the 1-D formula
    for alpha in np.arange(0.0, 0.96, 0.05):
        a = float(alpha)
        b2 = rate_diff_2d(NR, NT, S2, D, a, 0.0).bits_total
        b1 = rate_diff_1d(NR, NT, S2, D, a).bits_total
        assert abs(b2 - b1) < 1e-9, a
        # and symmetrically for a dead time axis
        b2f = rate_diff_2d(NR, NT, S2, D, 0.0, a).bits_total
        b1f = rate_diff_1d(NR, NT, S2, D, a, axis="freq").bits_total
        assert abs(b2f - b1f) < 1e-9, a


def test_dominance_chain_on_diagonal():
    nondiff = rate_nondiff(NR, NT, S2, D).bits_total
    for alpha in np.arange(0.0, 0.96, 0.05):
        a = float(alpha)
        b2 = rate_diff_2d(NR, NT, S2, D, a, a).bits_total
        b1 = rate_diff_1d(NR, NT, S2, D, a).bits_total
        assert b2 <= b1 + 1e-12
        assert b1 <= nondiff + 1e-12
        if a >= 0.05:
            assert b2 < b1 and b1 < nondiff


def test_rates_decrease_with_budget():
    budgets = [0.005, 0.01, 0.02, 0.05, 0.1]
    vals_1d = [rate_diff_1d(NR, NT, S2, d, 0.9).bits_total for d in budgets]
    vals_2d = [rate_diff_2d(NR, NT, S2, d, 0.9, 0.9).bits_total for d in budgets]
    assert all(a > b for a, b in zip(vals_1d, vals_1d[1:]))
    assert all(a > b for a, b in zip(vals_2d, vals_2d[1:]))


def test_clamping():
    # at d = sigma2 both arguments equal 1 identically (the three terms
    # sum to one by the mse closed form): zero bits, no clamp flag
    for r in (rate_diff_2d(NR, NT, S2, 1.0, 0.9, 0.9), rate_diff_1d(NR, NT, S2, 1.0, 0.9)):
        assert r.bits_total == 0.0
        assert not r.clamped
    # between the branch minimum and sigma2 the 2-D argument is below 1
    r = rate_diff_2d(NR, NT, S2, 0.5, 0.9, 0.9)
    assert r.bits_total == 0.0
    assert r.clamped


def test_budget_validation():
    with pytest.raises(ValueError):
        rate_nondiff(NR, NT, S2, 0.0)
    with pytest.raises(ValueError):
        rate_nondiff(NR, NT, S2, 1.5)  # d > sigma2
    with pytest.raises(ValueError):
        rate_diff_1d(NR, NT, S2, D, 1.0)
    with pytest.raises(ValueError):
        rate_diff_1d(NR, NT, S2, D, 0.5, axis="space")


def test_quant_error_corr():
    assert abs(quant_error_corr(0.025, 1.0, 0.9, 0.9) - 0.00050625) < 1e-15
    assert quant_error_corr(0.025, 1.0, 0.0, 0.9) == 0.0
    with pytest.raises(ValueError):
        quant_error_corr(0.0, 1.0, 0.9, 0.9)


def test_rate_report_metadata():
    r = rate_diff_2d(NR, NT, S2, D, 0.9, 0.8)
    assert r.scheme == "diff_2d"
    assert (r.alpha_t, r.alpha_f) == (0.9, 0.8)
    assert r.nats_total == pytest.approx(r.bits_total * math.log(2.0), rel=1e-15)
    assert rate_diff_1d(NR, NT, S2, D, 0.7, axis="freq").scheme == "diff_1d_freq"


# --- inversion ---------------------------------------------------------------


@pytest.mark.parametrize("bits", [2.0, 4.0, 6.0, 8.0, 10.0, 12.0])
def test_inversion_round_trip(bits):
    d2 = distortion_for_rate_2d(NR, NT, S2, 0.9, 0.9, bits)
    assert 0.0 < d2 < S2
    assert abs(rate_diff_2d(NR, NT, S2, d2, 0.9, 0.9).bits_total - bits) < 1e-9

    d1 = distortion_for_rate_1d(NR, NT, S2, 0.9, bits)
    assert 0.0 < d1 < S2
    assert abs(rate_diff_1d(NR, NT, S2, d1, 0.9).bits_total - bits) < 1e-9
    # looser feedback budget always means more distortion
    assert d2 < d1 or bits == 0.0


def test_inversion_frozen_points():
    assert abs(distortion_for_rate_2d(NR, NT, S2, 0.9, 0.9, 12.0) - 0.0139964968809337) < 1e-12
    assert abs(distortion_for_rate_1d(NR, NT, S2, 0.9, 12.0) - 0.02642559109874825) < 1e-12


def test_inversion_edge_budgets():
    with pytest.raises(ValueError):
        distortion_for_rate_2d(NR, NT, S2, 0.9, 0.9, 0.0)
    with pytest.raises(ValueError):
        distortion_for_rate_1d(NR, NT, S2, 0.9, -1.0)
    # the rate sweeps (0, inf) on the monotone branch (its minimum is
    # 1 - (sqrt(cross) - sqrt(mse))^2 <= 1 in argument), so even a tiny
    # budget inverts cleanly
    d = distortion_for_rate_2d(NR, NT, S2, 0.1, 0.1, 1e-5)
    assert 0.0 < d <= S2
    assert abs(rate_diff_2d(NR, NT, S2, d, 0.1, 0.1).bits_total - 1e-5) < 1e-12

import math

import numpy as np
import pytest

from twinbeam.detection import conditional_state, povm_ideal, povm_poisson_dark
from twinbeam.fockstate import GainParams, number_state, twin_beam_reduced
from twinbeam.wigner import (
    CLASSICAL_AT_ORIGIN,
    nonclassicality_index,
    w0_ideal,
    ws0_dark,
    ws0_dark_closed,
    ws0_ideal,
    ws_operator,
    ws_origin_trace,
)

from oracles import ws_trace_sum

LAM_GRID = (0.1, 0.5, 0.8, 1.2, 1.5)
ETA_GRID = (0.3, 0.6, 0.7, 0.9, 1.0)
S_GRID = (-0.9, -0.5, -0.3, 0.0, 0.25, 0.5)
DARK_GRID = (0.0, 0.05, 0.08)

# Margin on the geometric ratio of the trace series: the closed forms are
# analytic continuations, but the truncated sum only reproduces them where
# the series converges, i.e. xi^2 (1+s)/(1-s) < 1.
_CONVERGENCE_MARGIN = 0.9


def series_converges(lam: float, s: float) -> bool:
    xi_sq = math.tanh(lam) ** 2
    return xi_sq * (1.0 + s) / (1.0 - s) <= _CONVERGENCE_MARGIN


# Large enough that the s-weighted trace tail stays below 1e-12 on the
# whole filtered grid: 0.9^401 ~ 4e-19.
_ORACLE_CUTOFF = 400


def ideal_conditional(lam, eta_a, cutoff=_ORACLE_CUTOFF):
    beam = twin_beam_reduced(GainParams(lam), cutoff, tol=1e-9)
    return conditional_state(beam, povm_ideal(eta_a, cutoff)).conditional


def dark_conditional(lam, eta_a, dark, cutoff=_ORACLE_CUTOFF):
    beam = twin_beam_reduced(GainParams(lam), cutoff, tol=1e-9)
    return conditional_state(beam, povm_poisson_dark(dark, eta_a, cutoff)).conditional


class TestWsOperator:
    def test_alternating_signs(self):
        for s in (-0.9, -0.5, 0.0, 0.5):
            diag = ws_operator(s, 12).diag
            signs = np.sign(diag)
            assert np.all(signs == (-1.0) ** np.arange(13))

    def test_geometric_decrease_below_zero_order(self):
        for s in (-0.9, -0.4, -0.1):
            diag = np.abs(ws_operator(s, 12).diag)
            assert np.all(np.diff(diag) < 0.0)

    def test_order_range(self):
        with pytest.raises(ValueError):
            ws_operator(1.0, 4)
        with pytest.raises(ValueError):
            ws_operator(-1.1, 4)


class TestWsOriginTrace:
    def test_vacuum(self):
        vac = number_state(0, 8)
        for s in (-1.0, -0.5, 0.0, 0.5, 0.999):
            assert ws_origin_trace(vac, s) == pytest.approx(
                2.0 / (math.pi * (1.0 - s)), rel=1e-14)

    def test_one_photon_wigner(self):
        assert ws_origin_trace(number_state(1, 8), 0.0) == pytest.approx(
            -2.0 / math.pi, rel=1e-14)

    def test_q_function_boundary(self):
        # At s = -1 only the vacuum weight contributes.
        state = ideal_conditional(0.5, 0.6)
        assert ws_origin_trace(state, -1.0) == 0.0

    def test_matches_compensated_sum(self):
        state = dark_conditional(0.8, 0.7, 0.08)
        for s in (-0.9, -0.4, 0.0):
            assert ws_origin_trace(state, s) == pytest.approx(
                ws_trace_sum(state.weights, s), rel=1e-13)


class TestIdealClosedForms:
    def test_w0_low_gain_limit(self):
        assert w0_ideal(1e-8, 0.6) == pytest.approx(-2.0 / math.pi, abs=1e-6)

    def test_w0_against_trace(self):
        state = ideal_conditional(0.5, 0.6)
        assert abs(w0_ideal(0.5, 0.6) - ws_origin_trace(state, 0.0)) < 1e-10

    def test_w0_unit_detector_efficiency(self):
        # eta_a = 1, xi^2 = 1/4: the trace oracle gives -(2/pi) * 0.6.
        lam = math.atanh(0.5)
        state = ideal_conditional(lam, 1.0)
        value = w0_ideal(lam, 1.0)
        assert abs(value - ws_origin_trace(state, 0.0)) < 1e-10
        assert value == pytest.approx(-(2.0 / math.pi) * 0.6, rel=1e-12)

    def test_ws0_consistent_with_w0(self):
        assert ws0_ideal(0.5, 0.6, 0.0) == pytest.approx(w0_ideal(0.5, 0.6),
                                                         rel=1e-14)

    def test_ws0_vanishes_from_below_at_q_boundary(self):
        value = ws0_ideal(0.5, 0.6, -1.0 + 1e-9)
        assert -1e-8 < value < 0.0

    @pytest.mark.parametrize("lam", LAM_GRID)
    @pytest.mark.parametrize("eta", ETA_GRID)
    def test_trace_oracle_equivalence(self, lam, eta):
        state = ideal_conditional(lam, eta)
        for s in S_GRID:
            if not series_converges(lam, s):
                continue
            assert abs(ws0_ideal(lam, eta, s) - ws_origin_trace(state, s)) < 1e-10

    @pytest.mark.parametrize("lam", LAM_GRID)
    @pytest.mark.parametrize("eta", ETA_GRID)
    def test_strictly_negative_for_nonpositive_s(self, lam, eta):
        for s in (-0.9, -0.5, -0.3, -0.1, 0.0):
            assert ws0_ideal(lam, eta, s) < 0.0

    def test_zero_gain_rejected(self):
        with pytest.raises(ValueError):
            w0_ideal(0.0, 0.6)
        with pytest.raises(ValueError):
            ws0_ideal(0.0, 0.6, -0.5)


class TestDarkClosedForms:
    def test_reduces_to_ideal_without_dark_counts(self):
        assert ws0_dark(0.5, 0.6, -0.5, 0.0) == pytest.approx(
            ws0_ideal(0.5, 0.6, -0.5), abs=1e-12)
        assert ws0_dark_closed(0.5, 0.6, -0.5, 0.0) == pytest.approx(
            ws0_ideal(0.5, 0.6, -0.5), rel=1e-14)

    @pytest.mark.parametrize("lam", LAM_GRID)
    @pytest.mark.parametrize("eta", ETA_GRID)
    @pytest.mark.parametrize("dark", DARK_GRID)
    def test_trace_oracle_equivalence(self, lam, eta, dark):
        for s in S_GRID:
            if not series_converges(lam, s):
                continue
            trace = ws0_dark(lam, eta, s, dark)
            assert abs(ws0_dark_closed(lam, eta, s, dark) - trace) < 1e-9

    def test_fig3_operating_point(self):
        state = dark_conditional(0.8, 0.7, 0.08)
        trace = ws_origin_trace(state, -0.4)
        assert ws0_dark(0.8, 0.7, -0.4, 0.08) == pytest.approx(trace, abs=1e-12)
        assert trace < 0.0

    def test_noise_destroys_negativity_at_low_gain(self):
        # Strong background with weak heralding: the value turns nonnegative.
        assert ws0_dark(0.1, 0.3, -0.9, 0.08) > 0.0

    def test_requires_gain_or_noise(self):
        with pytest.raises(ValueError):
            ws0_dark(0.0, 0.6, -0.5, 0.0)


class TestNonclassicalityIndex:
    @pytest.mark.parametrize("lam", (0.1, 0.5, 1.2))
    @pytest.mark.parametrize("eta", (0.3, 0.6, 1.0))
    def test_ideal_conditional_reaches_minus_one(self, lam, eta):
        state = ideal_conditional(lam, eta)
        assert nonclassicality_index(state, tolerance=1e-4) == pytest.approx(
            -1.0, abs=1e-4)

    def test_vacuum_is_classical_at_origin(self):
        assert nonclassicality_index(number_state(0, 8)) == CLASSICAL_AT_ORIGIN

    def test_dark_state_interior_crossing(self):
        state = dark_conditional(0.8, 0.7, 0.08)
        s_star = nonclassicality_index(state, tolerance=1e-4)
        assert -1.0 + 1e-4 < s_star < 0.0
        # The returned index brackets the sign change of the trace value.
        assert ws_origin_trace(state, s_star + 1e-3) < 0.0
        assert ws_origin_trace(state, s_star - 1e-3) > 0.0

    def test_continuity_of_trace_in_s(self):
        state = dark_conditional(0.8, 0.7, 0.08)
        grid = np.linspace(-1.0, 0.0, 201)
        values = np.array([ws_origin_trace(state, s) for s in grid])
        assert np.max(np.abs(np.diff(values))) < 0.02

    def test_tolerance_check(self):
        with pytest.raises(ValueError):
            nonclassicality_index(number_state(0, 4), tolerance=0.0)

import math

import numpy as np
import pytest

from airy_ids.band_structure import Params, band_edge_pair
from airy_ids.errors import PreconditionError
from airy_ids.finite_spectrum import full_spectrum
from airy_ids.ids import (band_index_floor, band_index_p, bloch_phase,
                          bloch_phase_arctan, counting_diagnostics, ids_empirical,
                          ids_formula, ids_grid)
from airy_ids.ids import ids_empirical_from_report
from airy_ids.transfer import WellParity, transfer_data


@pytest.fixture(scope="module")
def par3():
    return Params(c=3.0)


def test_phase_endpoint_values(par3):
    # even band: phi = 0 at E_min, pi at E_max (resolvable band at c = 3)
    b0 = band_edge_pair(par3, 0)
    eps = b0.width_y * 1e-8
    assert bloch_phase(b0.e_min + eps, par3).phi == pytest.approx(0.0, abs=1e-3)
    assert bloch_phase(b0.e_max - eps, par3).phi == pytest.approx(math.pi, abs=1e-3)
    # odd band reversed
    b1 = band_edge_pair(par3, 1)
    assert bloch_phase(b1.e_min + eps, par3).phi == pytest.approx(math.pi, abs=1e-2)
    assert bloch_phase(b1.e_max - eps, par3).phi == pytest.approx(0.0, abs=1e-2)


def test_phase_monotone_homeomorphism(par3):
    # 500 samples per band: strictly monotone with endpoints {0, pi}; in the
    # y variable phi decreases on even bands and increases on odd ones, which
    # in E (y = -c - E reverses orientation) reads increasing / decreasing
    b0, b1 = band_edge_pair(par3, 0), band_edge_pair(par3, 1)
    e0 = np.linspace(b0.e_min + b0.width_y * 1e-6, b0.e_max - b0.width_y * 1e-6, 500)
    ph0 = [bloch_phase(float(e), par3).phi for e in e0]
    assert all(b > a for a, b in zip(ph0[:-1], ph0[1:]))
    assert ph0[0] < 1e-2 and ph0[-1] > math.pi - 1e-2
    e1 = np.linspace(b1.e_min + b1.width_y * 1e-6, b1.e_max - b1.width_y * 1e-6, 500)
    ph1 = [bloch_phase(float(e), par3).phi for e in e1]
    assert all(b < a for a, b in zip(ph1[:-1], ph1[1:]))
    assert ph1[0] > math.pi - 1e-2 and ph1[-1] < 1e-2


def test_phase_cos_sin_consistency(par3):
    for p in (0, 1):
        b = band_edge_pair(par3, p)
        for e in np.linspace(b.e_min + b.width_y * 0.01, b.e_max - b.width_y * 0.01, 200):
            td = transfer_data(-3.0 - float(e), par3)
            phi = bloch_phase(float(e), par3).phi
            assert math.cos(phi) == pytest.approx(td.a, abs=1e-9)
            assert math.sin(phi) == pytest.approx(td.b, abs=1e-9)


def test_phase_outside_bands_is_zero(par3):
    pv = bloch_phase(-1.5, par3)
    assert pv.phi == 0.0 and not pv.in_band and pv.branch is None


def test_phase_branch_decomposition_agrees(par3):
    for p in (0, 1):
        b = band_edge_pair(par3, p)
        for e in np.linspace(b.e_min + b.width_y * 0.02, b.e_max - b.width_y * 0.02, 101):
            a = bloch_phase(float(e), par3).phi
            s = bloch_phase_arctan(float(e), par3)
            assert a == pytest.approx(s, abs=1e-12)


def test_phase_is_half_pi_at_trace_zero(par3):
    # Y0: the unique in-band zero of the half-trace
    b0 = band_edge_pair(par3, 0)
    lo, hi = b0.y_max + b0.width_y * 1e-6, b0.y_min - b0.width_y * 1e-6
    flo = transfer_data(lo, par3).a
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        fm = transfer_data(mid, par3).a
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    y0 = 0.5 * (lo + hi)
    pv = bloch_phase(-3.0 - y0, par3)
    assert pv.phi == pytest.approx(0.5 * math.pi, abs=1e-9)
    from airy_ids.ids import PhaseBranch
    assert pv.branch in (PhaseBranch.AT_Y0, PhaseBranch.ABOVE_Y0, PhaseBranch.BELOW_Y0)


def test_ids_values_and_continuity(par3):
    b0 = band_edge_pair(par3, 0)
    b1 = band_edge_pair(par3, 1)
    # spectrum bottom: square-root approach, exact zero at one ulp inside
    assert ids_formula(float(np.nextafter(b0.e_min, b0.e_max)), par3) <= 5e-8
    assert ids_formula(b0.e_min + b0.width_y * 1e-9, par3) <= 1e-4
    assert ids_formula(-3.0 + 1e-9, par3) == 0.0
    # gap between bands 0 and 1 carries 1/2
    assert ids_formula(0.5 * (b0.e_max + b1.e_min), par3) == pytest.approx(0.5)
    # continuity at the four resolvable edges: the IDS approaches every edge
    # with square-root slope, so the one-ulp jump is the honest residual
    for edge in (b0.e_min, b0.e_max, b1.e_min, b1.e_max):
        lo = float(np.nextafter(edge, -np.inf))
        hi = float(np.nextafter(edge, np.inf))
        assert abs(ids_formula(hi, par3) - ids_formula(lo, par3)) <= 5e-8
    # and the jump across +-delta shrinks like sqrt(delta)
    for d, cap in ((1e-10, 5e-5), (1e-14, 5e-7)):
        jump = abs(ids_formula(b0.e_min + d, par3) - ids_formula(b0.e_min - d, par3))
        assert jump <= cap


def test_ids_nondecreasing(par3):
    es = np.linspace(-3.0 + 1e-9, -1e-9, 1500)
    vals = [ids_formula(float(e), par3) for e in es]
    assert all(b >= a - 1e-12 for a, b in zip(vals[:-1], vals[1:]))


def test_ids_requires_c0():
    with pytest.raises(PreconditionError):
        ids_formula(-0.5, Params(c=1.0))


def test_band_index_examples(params10):
    # E = -c gives p = 0
    assert band_index_p(-10.0 + 1e-12, params10, check_formula=False) == 0
    # E = 0: 13 bands lie entirely below at c = 10, matching the closed form
    p0 = band_index_p(-1e-12, params10, check_formula=False)
    flr = band_index_floor(-1e-12, params10)
    assert p0 == flr == 13
    count_below = sum(
        1 for p in range(13)
        if band_edge_pair(params10, p, enforce=False).e_max < 0.0)
    assert count_below == 13


def test_band_index_formula_in_band(params10):
    # in-band energies: exact agreement of the floor form with direct counting
    for p in range(10):
        b = band_edge_pair(params10, p)
        for e in np.linspace(b.e_min + b.width_y * 1e-3, b.e_max - b.width_y * 1e-3, 9):
            assert band_index_p(float(e), params10) == band_index_floor(float(e), params10) == p


def test_band_index_gap_halves_documented(params10):
    # the floor form undershoots by one on the lower part of each gap: the
    # direct definition is authoritative there
    b0 = band_edge_pair(params10, 0)
    b1 = band_edge_pair(params10, 1)
    e_low_gap = b0.e_max + 0.1 * (b1.e_min - b0.e_max)
    assert band_index_p(e_low_gap, params10, check_formula=False) == 1
    assert band_index_floor(e_low_gap, params10) == 0


def test_empirical_trivial_and_gap_values(par3):
    assert ids_empirical(-3.0 + 1e-9, par3, 5) == 0.0
    b0 = band_edge_pair(par3, 0)
    b1 = band_edge_pair(par3, 1)
    e_gap = 0.5 * (b0.e_max + b1.e_min)
    for n_half in (1, 4, 9):
        want = (2 * n_half + 2) / (2.0 * (2 * n_half + 1))
        assert ids_empirical(e_gap, par3, n_half) == pytest.approx(want, rel=1e-14)


def test_empirical_matches_report_counting(par3, spectrum_cache):
    # e = -0.1 and above enter the band straddling E = 0, which the report
    # (fully-contained bands only) does not carry: stay below it here
    rep = spectrum_cache(3.0, 2)
    for e in (-2.95, -2.3, -1.98, -1.5, -0.8, -0.3):
        fast = ids_empirical(e, par3, 2)
        slow = ids_empirical_from_report(e, rep)
        assert fast == pytest.approx(slow, abs=1e-14)


def test_empirical_convergence_rate(params10):
    b0 = band_edge_pair(params10, 0)
    e = 0.5 * (b0.e_min + b0.e_max)
    errs = [abs(ids_empirical(e, params10, n) - ids_formula(e, params10))
            for n in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]
    # O(1/N): halving N roughly doubles the error
    assert 1.5 <= errs[0] / errs[1] <= 3.0
    assert 1.5 <= errs[1] / errs[2] <= 3.0


def test_counting_diagnostics_bounds(par3):
    # the partition index m_E obeys (K phi/pi) -/+ 1/2 sandwich
    b1 = band_edge_pair(par3, 1)
    for e in np.linspace(b1.e_min + b1.width_y * 0.03, b1.e_max - b1.width_y * 0.03, 25):
        d = counting_diagnostics(float(e), par3, 4)
        assert d["in_band"]
        assert d["n_e"] in (0, 1, 2)
        k_phi = 9 * d["phi"] / math.pi  # K = 2N+1 = 9
        if b1.p % 2 == 1:
            k_phi = 9 * (math.pi - d["phi"]) / math.pi
        assert k_phi - 0.5 - 1e-9 <= d["m_e"] <= k_phi + 0.5 + 1e-9


def test_ids_grid_rows(par3):
    rows = ids_grid(par3, np.linspace(-2.9, -0.1, 7), n_half=2)
    assert len(rows) == 7
    assert all(r.ids_empirical is not None and r.n_used == 2 for r in rows)
    assert all(rows[i + 1].ids >= rows[i].ids - 1e-12 for i in range(6))

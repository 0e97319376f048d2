import math

import numpy as np
import pytest

from airy_ids.band_structure import Params, band_edge_pair, uv_arrays
from airy_ids.errors import NumericError, PreconditionError
from airy_ids.transfer import (Regime, Sign, WellParity, chain_mismatch,
                               effective_wells, phi_eval, phi_gap_barrier_terms,
                               phi_signs_arrays, transfer_data)
from airy_ids.verification import shooting_mismatch


@pytest.fixture(scope="module")
def par3():
    return Params(c=3.0)


def phi_direct(y, c, m):
    """Reference: literal cap contraction of the matrix power."""
    U, Up, V, Vp = (float(v[0]) for v in uv_arrays(np.array([y]), c))
    r = math.sqrt(y + c)
    SU, SV = Up + r * U, Vp + r * V
    T = np.array([[U * Vp + Up * V, 2 * V * Vp], [2 * U * Up, U * Vp + Up * V]])
    w = np.array([SV, SU])
    for _ in range(m - 1):
        w = T @ w
    return SU * w[0] + SV * w[1]


def test_determinant_and_regimes(par3):
    b0 = band_edge_pair(par3, 0)
    b1 = band_edge_pair(par3, 1)
    cases = [(-2.7, Regime.GAP), (-1.5, Regime.GAP), (-0.3, Regime.GAP),
             (0.5 * (b0.y_max + b0.y_min), Regime.EVEN_BAND),
             (0.5 * (b1.y_max + b1.y_min), Regime.ODD_BAND)]
    for y, want in cases:
        td = transfer_data(y, par3)
        assert td.regime is want
        assert td.det() == pytest.approx(1.0, abs=1e-9)
        if want is Regime.GAP:
            assert td.b0_sq > 0.0 and td.b1_sq > 0.0
            assert 0.0 < td.b < abs(td.a)
        elif want is Regime.EVEN_BAND:
            assert td.b0_sq < 0.0 < td.b1_sq
            assert td.a ** 2 + td.b ** 2 == pytest.approx(1.0, abs=1e-9)
        else:
            assert td.b1_sq < 0.0 < td.b0_sq
            assert td.a ** 2 + td.b ** 2 == pytest.approx(1.0, abs=1e-9)


def test_band_unit_modulus_bulk(par3):
    b1 = band_edge_pair(par3, 1)
    ys = np.linspace(b1.y_max + b1.width_y * 1e-3, b1.y_min - b1.width_y * 1e-3, 1000)
    U, Up, V, Vp = uv_arrays(ys, 3.0)
    a = U * Vp + Up * V
    b = 2.0 * np.sqrt(np.abs(U * Up * V * Vp))
    assert np.max(np.abs(a * a + b * b - 1.0)) <= 1e-9


def test_edge_regime_rejected(par3):
    b0 = band_edge_pair(par3, 0)
    td = transfer_data(b0.y_max, par3)
    assert td.regime is Regime.EDGE
    with pytest.raises(NumericError):
        chain_mismatch(b0.y_max, par3, 3)


def test_edge_half_trace_is_unimodular(par3):
    for p in (0, 1):
        b = band_edge_pair(par3, p)
        for y in (b.y_max, b.y_min):
            td = transfer_data(y, par3)
            assert abs(abs(td.a) - 1.0) <= 1e-8


def test_chain_mismatch_vs_direct(par3):
    b0 = band_edge_pair(par3, 0)
    b1 = band_edge_pair(par3, 1)
    ys = [-2.7, -2.6, -1.5, -1.2, -0.5, -0.1,
          0.5 * (b0.y_max + b0.y_min), b0.y_max + 0.25 * b0.width_y,
          0.5 * (b1.y_max + b1.y_min), b1.y_max + 0.125 * b1.width_y]
    for m in (1, 2, 3, 4, 5, 6):
        for y in ys:
            pv = chain_mismatch(y, par3, m)
            ref = phi_direct(y, 3.0, m)
            if pv.raw is not None:
                assert pv.raw == pytest.approx(ref, rel=1e-10, abs=1e-12)
            assert pv.log_magnitude == pytest.approx(math.log(abs(ref)), abs=1e-8)
            assert pv.sign.value == (0 if ref == 0 else math.copysign(1, ref))


def test_chain_mismatch_equals_shooting(par3):
    # Phi is exactly F(E)/c for the left-normalized shooting solution
    b1 = band_edge_pair(par3, 1)
    for m in (2, 3, 4):
        for y in (0.5 * (b1.y_max + b1.y_min), -1.5, -2.6):
            E = -3.0 - y
            F = shooting_mismatch([E], par3, m, rtol=1e-12)[0][0]
            pv = chain_mismatch(y, par3, m)
            assert pv.raw == pytest.approx(F / 3.0, rel=1e-8)


def test_gap_positivity_odd_parity(par3):
    b0 = band_edge_pair(par3, 0)
    b1 = band_edge_pair(par3, 1)
    gaps = [(b1.y_min, b0.y_max), (b0.y_min, 0.0)]
    for n_half in (1, 2, 5):
        for ylo, yhi in gaps:
            ys = np.linspace(ylo + (yhi - ylo) * 1e-3, yhi - (yhi - ylo) * 1e-3, 500)
            for y in ys[::25]:
                assert phi_eval(float(y), par3, n_half, WellParity.ODD).sign is Sign.POSITIVE
            m = effective_wells(n_half, WellParity.ODD)
            assert np.all(phi_signs_arrays(ys, par3, m) > 0)


def test_even_parity_gap_sign_constancy(par3):
    b0 = band_edge_pair(par3, 0)
    b1 = band_edge_pair(par3, 1)
    for n_half in (1, 2):
        m = effective_wells(n_half, WellParity.EVEN)
        for ylo, yhi in ((b1.y_min, b0.y_max), (b0.y_min, 0.0)):
            ys = np.linspace(ylo + (yhi - ylo) * 1e-3, yhi - (yhi - ylo) * 1e-3, 500)
            signs = phi_signs_arrays(ys, par3, m)
            assert np.all(signs != 0) and np.all(signs == signs[0])


def test_barrier_gap_decomposition(par3):
    # negative-trace gap: the displayed terms have opposite signs, their
    # corrected combination equals the chain mismatch and cannot vanish
    for n_half, y in ((1, -1.5), (2, -1.5), (2, -2.0)):
        m = 2 * n_half  # nominal even chain
        t1, t2, val = phi_gap_barrier_terms(y, par3, power=m)
        assert t1 > 0.0 > t2
        ref = chain_mismatch(y, par3, m)
        assert val == pytest.approx(ref.raw, rel=1e-10)
    with pytest.raises(PreconditionError):
        phi_gap_barrier_terms(-0.5, par3, power=2)  # positive-trace region


def test_effective_wells_mapping():
    assert effective_wells(1, WellParity.ODD) == 4
    assert effective_wells(1, WellParity.EVEN) == 3
    assert effective_wells(0, WellParity.ODD) == 2
    assert effective_wells(3, WellParity.EVEN) == 7


def test_phi_eval_band_form_finite_at_partition_points(par3):
    # the phase form has no tan singularities: values stay finite and match
    # the direct contraction on a dense in-band grid
    b1 = band_edge_pair(par3, 1)
    ys = np.linspace(b1.y_max + b1.width_y * 0.01, b1.y_min - b1.width_y * 0.01, 97)
    for y in ys:
        pv = phi_eval(float(y), par3, 1, WellParity.ODD)
        ref = phi_direct(float(y), 3.0, 4)
        assert pv.raw == pytest.approx(ref, rel=5e-8, abs=1e-10)


def test_log_form_no_overflow_deep_gap(params10):
    # deep gaps at c = 10: raw overflows for large chains, log form stays exact
    pv = chain_mismatch(-5.0, params10, 800)   # odd power: positive in gaps
    assert pv.raw is None and pv.sign is Sign.POSITIVE
    assert math.isfinite(pv.log_magnitude) and pv.log_magnitude > 700.0
    # even power on a negative-trace gap flips the sign but stays nonzero
    pv2 = chain_mismatch(-5.0, params10, 801)
    assert pv2.sign is Sign.NEGATIVE and math.isfinite(pv2.log_magnitude)

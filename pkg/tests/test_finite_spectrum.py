import math

import numpy as np
import pytest

from airy_ids.band_structure import Params, SpectralBand, band_edge_pair
from airy_ids.errors import IntegrityError, NumericError, PreconditionError
from airy_ids.finite_spectrum import (eigenvalues_in_band, full_spectrum,
                                      included_band_count, subdivision_points,
                                      _eigs_mp)
from airy_ids.transfer import WellParity, effective_wells
from airy_ids.verification import shooting_oracle


@pytest.fixture(scope="module")
def par3():
    return Params(c=3.0)


def test_partition_targets_and_order(par3):
    b1 = band_edge_pair(par3, 1)
    part = subdivision_points(b1, 1, par3)
    # K = 3 singular points at phitilde = pi/6, pi/2, 5pi/6
    assert part.power == 3
    assert np.allclose(sorted(part.targets),
                       [math.pi / 6, math.pi / 2, 5 * math.pi / 6], atol=1e-12)
    assert all(b > a for a, b in zip(part.points[:-1], part.points[1:]))
    # each point attains its target phase to 1e-10
    from airy_ids.finite_spectrum import _phit
    for y, tgt in zip(part.points, part.targets):
        assert abs(float(_phit(y, 3.0)[0]) - tgt) <= 1e-10


def test_partition_first_target_arithmetic(par3):
    # N = 1: the first splitting value is (2*1-1)pi/(2*(2N+1)) = pi/6
    b0 = band_edge_pair(par3, 0)
    part = subdivision_points(b0, 1, par3)
    assert min(part.targets) == pytest.approx(math.pi / 6, rel=1e-15)


def test_phase_endpoints_per_parity(par3):
    # phitilde hits pi at Y_max and 0 at Y_min on even bands; reversed on odd
    from airy_ids.finite_spectrum import _phit
    for p in (0, 1):
        b = band_edge_pair(par3, p)
        eps = b.width_y * 1e-7
        at_max = float(_phit(b.y_max + eps, 3.0)[0])
        at_min = float(_phit(b.y_min - eps, 3.0)[0])
        if p % 2 == 0:
            assert at_max == pytest.approx(math.pi, abs=1e-3)
            assert at_min == pytest.approx(0.0, abs=1e-3)
        else:
            assert at_max == pytest.approx(0.0, abs=1e-3)
            assert at_min == pytest.approx(math.pi, abs=1e-3)


def test_counts_small_c(par3):
    for n_half in (1, 2, 3):
        for p in (0, 1):
            b = band_edge_pair(par3, p)
            bs = eigenvalues_in_band(b, n_half, par3)
            assert bs.count == 2 * n_half + 2
            assert all(b.y_max < y < b.y_min for y in bs.eigenvalues_y)
            assert bs.method == "bisection"


def test_counts_even_parity(par3):
    for n_half in (1, 2):
        b = band_edge_pair(par3, 1)
        bs = eigenvalues_in_band(b, n_half, par3, WellParity.EVEN)
        assert bs.count == 2 * n_half + 1


def test_interlacing_with_partition(par3):
    # one eigenvalue per generic partition interval; two in each of the two
    # intervals containing the |q| = 1 points
    for p, n_half in ((0, 2), (1, 3)):
        b = band_edge_pair(par3, p)
        part = subdivision_points(b, n_half, par3)
        bs = eigenvalues_in_band(b, n_half, par3)
        edges = [b.y_max, *part.points, b.y_min]
        counts = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            counts.append(sum(1 for y in bs.eigenvalues_y if lo < y <= hi))
        assert counts[0] == 0 and counts[-1] == 0  # no zeros in the edge strips
        assert sorted(counts[1:-1], reverse=True)[:2] == [2, 2]
        assert all(c == 1 for c in sorted(counts[1:-1], reverse=True)[2:])
        # the doubled intervals are exactly those containing q = +-1
        doubled = [i for i, cnt in enumerate(counts) if cnt == 2]
        for qy in part.q_unit_points:
            if not math.isnan(qy):
                i = next(k for k in range(len(edges) - 1)
                         if edges[k] < qy <= edges[k + 1])
                assert i in doubled


def test_single_well_pair_counts(par3):
    # degenerate half-count N = 0 (one nominal well): two zeros per band,
    # validated against the matching two-well shooting oracle
    for p in (0, 1):
        b = band_edge_pair(par3, p)
        bs = eigenvalues_in_band(b, 0, par3)
        assert bs.count == 2
        orc = shooting_oracle(par3, 2, b, n_grid=200)
        assert len(orc.values) == 2
        got = np.sort(-3.0 - np.asarray(bs.eigenvalues_y))
        assert np.allclose(np.sort(orc.values), got, atol=1e-6)


def test_mp_escalation_matches_double_on_marginal_band(params10):
    b2 = band_edge_pair(params10, 2)
    d = eigenvalues_in_band(b2, 1, params10)
    m = _eigs_mp(b2, effective_wells(1, WellParity.ODD) - 1, params10)
    assert d.method == "bisection"
    assert np.max(np.abs(np.array(d.eigenvalues_y) - np.array(m.eigenvalues_y))) < 5e-15


def test_degenerate_band_cluster(params10):
    b0 = band_edge_pair(params10, 0)
    bs = eigenvalues_in_band(b0, 1, params10)
    assert bs.method == "mp_cluster"
    assert bs.count == 4
    assert all(b0.y_max - 1e-12 <= y <= b0.y_min + 1e-12 for y in bs.eigenvalues_y)


def test_subdivision_rejects_sub_resolution_band(params10):
    b0 = band_edge_pair(params10, 0)
    with pytest.raises(NumericError):
        subdivision_points(b0, 1, params10)


def test_eigenvalues_requires_threshold_and_containment(par3):
    b1 = band_edge_pair(par3, 1)
    with pytest.raises(PreconditionError):
        eigenvalues_in_band(b1, 1, Params(c=2.0))  # c below c_1
    fake = SpectralBand(1, b1.y_max, 0.5, -3.5, -3.0 - b1.y_max, 2.33, truncated=True)
    with pytest.raises(PreconditionError):
        eigenvalues_in_band(fake, 1, par3)


def test_count_integrity_error_on_tampered_band(par3):
    # a band interval deliberately cut in half cannot bracket all phase
    # targets: the integrity machinery must refuse rather than undercount
    b1 = band_edge_pair(par3, 1)
    cut = SpectralBand(1, b1.y_max, b1.y_max + 0.4 * b1.width_y,
                       -3.0 - (b1.y_max + 0.4 * b1.width_y), b1.e_max,
                       b1.center_offset)
    with pytest.raises(IntegrityError):
        eigenvalues_in_band(cut, 1, par3)


def test_full_spectrum_report(par3, spectrum_cache):
    rep = spectrum_cache(3.0, 1)
    assert included_band_count(par3) == 2
    assert len(rep.per_band) == 2
    assert rep.total_count == 8
    assert all(ok for _, ok in rep.gaps_empty)
    evs = rep.eigenvalues_e()
    assert np.all(np.diff(evs) > 0)


def test_full_spectrum_even_parity(par3):
    rep = full_spectrum(par3, 1, WellParity.EVEN)
    assert rep.total_count == 2 * 3  # 2N+1 = 3 per band, two bands
    assert all(bs.count == 3 for bs in rep.per_band)


def test_phitilde_monotone_dense(params10):
    # dense monotonicity of the in-band phase used by the partition (odd band)
    from airy_ids.finite_spectrum import _phit
    b1 = band_edge_pair(params10, 9)
    ys = np.linspace(b1.y_max + b1.width_y * 1e-4, b1.y_min - b1.width_y * 1e-4, 2000)
    ph = _phit(ys, 10.0)
    assert np.all(np.diff(ph) > 0)  # odd band: increasing in y
    part = subdivision_points(b1, 3, params10)
    assert all(b > a for a, b in zip(part.points[:-1], part.points[1:]))

"""Eigenvalues of the finite chain inside each spectral band, and gap-emptiness
certification.

The workhorse is the band phase psi(y) = 2*arctan(q) - K*phitilde with
K = power = (effective wells - 1): psi is strictly monotone across a band,
sweeps from -(K+1)*pi to pi, and the chain eigenvalues are exactly its
interior crossings of multiples of pi -- K+1 of them. The public partition is
the classical one (the K singular points of tan(K*phitilde), i.e.
phitilde = (2l-1)pi/(2K)); generic partition intervals carry one crossing and
the two intervals containing the |q| = 1 points carry two.

Bands narrower than what double precision can subdivide (they shrink like
exp(-(4/3)(c - center)^{3/2})) are escalated to arbitrary precision: the same
construction evaluated through mpmath's Airy functions. Counts are exact
either way; clustered eigenvalues are reported at their rounded double
locations with a resolution flag.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .band_structure import (Params, SpectralBand, band_edge_pair, c_constant,
                             uv_arrays)
from .errors import IntegrityError, NumericError, PreconditionError
from .transfer import (WellParity, band_phase_arrays, effective_wells,
                       phi_signs_arrays)

__all__ = [
    "BandPartition",
    "BandSpectrum",
    "EigenvalueReport",
    "subdivision_points",
    "eigenvalues_in_band",
    "full_spectrum",
    "included_band_count",
    "worker_count",
]

RESOLVABLE_ULPS = 64.0


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("AIRY_IDS_THREADS")
    try:
        cap = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError:
        cap = 1
    return max(1, min(n_tasks, cap))


def _is_resolvable(band: SpectralBand, power: int) -> bool:
    scale = max(abs(band.y_max), abs(band.y_min), 1.0)
    return band.width_y / (power + 2) > RESOLVABLE_ULPS * math.ulp(scale)


def _phit(y, c):
    from .transfer import transfer_arrays
    a, b0, b1, b = transfer_arrays(np.atleast_1d(y), c)
    return np.arctan2(b, a)


def _psi(y, c, power):
    phit, q, _ = band_phase_arrays(np.atleast_1d(y), c)
    return 2.0 * np.arctan(q) - power * phit


def _bisect_to(fvec, lo, hi, flo_target, tol):
    """Bisect f(y) - target across [lo, hi] given f(lo)-target = flo_target."""
    flo = flo_target
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = fvec(mid)
        if fm == 0.0:
            return mid
        if fm * flo < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _bisect_many(f, targets, lo0, hi0, tol, max_iter=200):
    """Batched monotone bisection: solve f(y) = targets[i] on [lo0, hi0]."""
    targets = np.asarray(targets, dtype=float)
    lo = np.full(targets.shape, lo0)
    hi = np.full(targets.shape, hi0)
    flo = f(lo) - targets
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid) - targets
        neg = fm * flo < 0.0
        hi = np.where(neg, mid, hi)
        lo = np.where(neg, lo, mid)
        flo = np.where(neg, flo, fm)
    return 0.5 * (lo + hi)


def _inner_window(band: SpectralBand, c: float, power: int):
    """Endpoints strictly inside the band, stepped inward until the band phase
    brackets every structural target (the raw edges sit within evaluation
    noise of the edge degeneracies)."""
    scale = max(abs(band.y_max), abs(band.y_min), 1.0)
    step = 4.0 * math.ulp(scale)
    eps = max(band.width_y * 1e-9, step)
    lim = band.width_y / 8.0
    while eps <= lim:
        lo, hi = band.y_max + eps, band.y_min - eps
        psi_lo = float(_psi(lo, c, power)[0])
        psi_hi = float(_psi(hi, c, power)[0])
        pmin, pmax = min(psi_lo, psi_hi), max(psi_lo, psi_hi)
        if pmin < -power * math.pi and pmax > 0.0:
            return lo, hi, psi_lo, psi_hi
        eps *= 2.0
    raise IntegrityError(
        f"band {band.p}: no interior window brackets the phase targets",
        trace={"band": band.p, "power": power, "width": band.width_y})


@dataclass(frozen=True)
class BandPartition:
    """The singular points of tan(K*phitilde) inside one band, plus edges.

    points are strictly increasing in y; targets[i] is the phitilde value
    (2m-1)pi/(2K) attained at points[i]. q_unit_points locates q = -1 and
    q = +1 (the two partition intervals containing them carry two eigenvalues
    each; all other interior intervals carry one).
    """

    band: SpectralBand
    power: int
    points: tuple
    targets: tuple
    q_unit_points: tuple


def subdivision_points(band: SpectralBand, n_half: int, params: Params,
                       parity: WellParity = WellParity.ODD) -> BandPartition:
    if n_half < 1:
        raise PreconditionError("the partition needs n_half >= 1")
    cp = c_constant(band.p)
    if params.c < cp:
        raise PreconditionError(
            f"band {band.p} needs c >= c_{band.p} = {cp:.12g}")
    power = effective_wells(n_half, parity) - 1
    if not _is_resolvable(band, power):
        raise NumericError(
            "band too narrow to subdivide in double precision; "
            "eigenvalues_in_band escalates internally",
            bracket=(band.y_max, band.y_min))
    return _partition_double(band, power, params)


def _partition_double(band: SpectralBand, power: int, params: Params) -> BandPartition:
    c = params.c
    lo, hi, _, _ = _inner_window(band, c, power)
    phit_lo = float(_phit(lo, c)[0])
    phit_hi = float(_phit(hi, c)[0])
    tol = max(4.0 * math.ulp(max(abs(lo), abs(hi))), band.width_y * 1e-13)
    tgts = np.array([(2 * m - 1) * math.pi / (2 * power) for m in range(1, power + 1)])
    inside = (tgts - phit_lo) * (tgts - phit_hi) < 0.0
    if not np.all(inside):
        raise NumericError(
            f"phitilde targets not bracketed inside band {band.p}",
            bracket=(lo, hi))
    pts = _bisect_many(lambda y: _phit(y, c), tgts, lo, hi, tol)
    order = np.argsort(pts)
    pts_s = tuple(float(v) for v in pts[order])
    tgts_s = tuple(float(v) for v in tgts[order])
    if any(b <= a for a, b in zip(pts_s[:-1], pts_s[1:])):
        raise NumericError(f"partition of band {band.p} is not strictly ordered "
                           "(phitilde monotonicity violated)", bracket=(lo, hi))

    def q_many(y):
        _, q, _ = band_phase_arrays(y, c)
        return q

    q_lo = float(q_many(np.array([lo]))[0])
    q_hi = float(q_many(np.array([hi]))[0])
    unit = []
    for target in (-1.0, 1.0):
        if (q_lo - target) * (q_hi - target) < 0.0:
            unit.append(float(_bisect_many(q_many, [target], lo, hi, tol)[0]))
        else:
            unit.append(math.nan)
    return BandPartition(band, power, pts_s, tgts_s, tuple(unit))


@dataclass(frozen=True)
class BandSpectrum:
    p: int
    band: SpectralBand
    eigenvalues_y: tuple
    eigenvalues_e: tuple
    count: int
    method: str                      # "bisection" | "mp_cluster"
    partition: Optional[BandPartition] = None
    oracle_deltas: Optional[tuple] = None


def eigenvalues_in_band(band: SpectralBand, n_half: int, params: Params,
                        parity: WellParity = WellParity.ODD) -> BandSpectrum:
    """All chain eigenvalues inside one fully-contained band, with exact count.

    Count must equal power+1 (2N+2 for odd parity, 2N+1 for even); any other
    outcome raises IntegrityError carrying the phase trace.
    """
    c = params.c
    if band.truncated or band.y_max < -c or band.y_min > 0.0:
        raise PreconditionError(f"band {band.p} is not fully contained in [-c, 0]")
    cp = c_constant(band.p)
    if c < cp:
        raise PreconditionError(f"band {band.p} needs c >= c_{band.p} = {cp:.12g}")
    power = effective_wells(n_half, parity) - 1
    if _is_resolvable(band, power):
        return _eigs_double(band, power, params)
    return _eigs_mp(band, power, params)


def _eigs_double(band: SpectralBand, power: int, params: Params) -> BandSpectrum:
    """Batched monotone bisection of psi(y) = l*pi for every l in {-K..0}.

    psi is strictly monotone across the band and sweeps (-(K+1)pi, pi), so
    each structural target is bracketed by the band ends; the ends themselves
    are excluded by a relative margin (psi's endpoint limits are the edge
    degeneracies, not eigenvalues).
    """
    c = params.c
    part = _partition_double(band, power, params) if power >= 1 else None
    lo0, hi0, psi_lo, psi_hi = _inner_window(band, c, power)
    targets = np.arange(-power, 1) * math.pi
    bad = (targets - psi_lo) * (targets - psi_hi) >= 0.0
    if np.any(bad):
        raise IntegrityError(
            f"band {band.p}: psi endpoints fail to bracket targets "
            f"{targets[bad] / math.pi}",
            trace={"band": band.p, "power": power, "psi_ends": (psi_lo, psi_hi)})
    tol = max(4.0 * math.ulp(max(abs(lo0), abs(hi0))), band.width_y * 1e-13)
    roots = np.sort(_bisect_many(lambda y: _psi(y, c, power), targets, lo0, hi0, tol))
    ys = tuple(float(r) for r in roots)
    return BandSpectrum(band.p, band, ys, tuple(float(-c - r) for r in roots),
                        len(ys), "bisection", part)


# ----------------------------------------------------------------------------
# arbitrary-precision escalation for sub-resolution bands

def _mp_context(width_hint: float):
    import mpmath
    dps = 40
    if width_hint > 0 and width_hint < 1e-30:
        dps = 40 + int(-math.log10(width_hint)) // 2
    return mpmath, dps


def _eigs_mp(band: SpectralBand, power: int, params: Params) -> BandSpectrum:
    mpmath, dps = _mp_context(band.width_y)
    mp = mpmath.mp
    old = mp.dps
    try:
        mp.dps = dps
        c = mpmath.mpf(params.c)
        pi = mpmath.pi
        ai0 = mpmath.airyai(0)
        aip0 = mpmath.airyai(0, derivative=1)
        bi0 = mpmath.airybi(0)
        bip0 = mpmath.airybi(0, derivative=1)

        def uv(x):
            ai = mpmath.airyai(x)
            aip = mpmath.airyai(x, derivative=1)
            bi = mpmath.airybi(x)
            bip = mpmath.airybi(x, derivative=1)
            return (pi * (bip0 * ai - aip0 * bi), pi * (bip0 * aip - aip0 * bip),
                    pi * (ai0 * bi - bi0 * ai), pi * (ai0 * bip - bi0 * aip))

        def quad(y):
            u_y, up_y, v_y, vp_y = uv(y)
            u_x, up_x, v_x, vp_x = uv(y + c)
            U = vp_y * u_x - up_y * v_x
            Up = vp_y * up_x - up_y * vp_x
            V = u_y * v_x - v_y * u_x
            Vp = u_y * vp_x - v_y * up_x
            return U, Up, V, Vp

        def psi(y):
            U, Up, V, Vp = quad(y)
            a = U * Vp + Up * V
            b0 = U * Up
            b1 = V * Vp
            b = 2 * mpmath.sqrt(abs(b0 * b1))
            phit = mpmath.atan2(b, a)
            r = mpmath.sqrt(y + c)
            SU = Up + r * U
            SV = Vp + r * V
            rho = mpmath.sqrt(abs(b1) / abs(b0))
            q = rho * SU / SV if b0 < 0 else SV / (rho * SU)
            return 2 * mpmath.atan(q) - power * phit

        def edge(fidx, guess):
            lo = mpmath.mpf(guess) - mpmath.mpf("1e-10")
            hi = mpmath.mpf(guess) + mpmath.mpf("1e-10")
            f = lambda y: quad(y)[fidx]
            flo, fhi = f(lo), f(hi)
            if flo * fhi > 0:
                raise NumericError("mp edge bracket failed", bracket=(float(lo), float(hi)))
            for _ in range(int(3.4 * dps) + 20):
                mid = (lo + hi) / 2
                fm = f(mid)
                if fm == 0:
                    return mid
                if fm * flo < 0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            return (lo + hi) / 2

        iu_max = 0 if band.p % 2 == 0 else 2   # U or V at y_max
        iu_min = 1 if band.p % 2 == 0 else 3   # U' or V' at y_min
        y_max = edge(iu_max, band.y_max)
        y_min = edge(iu_min, band.y_min)
        width = y_min - y_max
        eps = width * mpmath.mpf("1e-9")
        lo, hi = y_max + eps, y_min - eps
        p_lo, p_hi = psi(lo), psi(hi)
        for l in (-power, 0):
            tgt = l * pi
            if (p_lo - tgt) * (p_hi - tgt) >= 0:
                raise IntegrityError(
                    f"band {band.p} (mp path): psi endpoints fail to bracket l={l}",
                    trace={"band": band.p, "psi_ends": (float(p_lo), float(p_hi))})
        roots = []
        for l in range(-power, 1):
            tgt = l * pi
            a_, b_ = lo, hi
            fa = p_lo - tgt
            for _ in range(int(3.4 * dps) + 20):
                mid = (a_ + b_) / 2
                fm = psi(mid) - tgt
                if fm == 0:
                    a_ = b_ = mid
                    break
                if fm * fa < 0:
                    b_ = mid
                else:
                    a_, fa = mid, fm
            roots.append((a_ + b_) / 2)
        roots.sort()
        ys = tuple(float(r) for r in roots)
        return BandSpectrum(band.p, band, ys, tuple(float(-c - r) for r in roots),
                            len(ys), "mp_cluster", None)
    finally:
        mp.dps = old


# ----------------------------------------------------------------------------
# whole-spectrum assembly

@dataclass(frozen=True)
class EigenvalueReport:
    c: float
    n_half: int
    parity: WellParity
    per_band: tuple
    gaps_empty: tuple          # (gap index, bool) pairs; index -1 = below band 0
    gap_samples: int
    oracle_deltas: Optional[dict] = None

    @property
    def total_count(self) -> int:
        return sum(bs.count for bs in self.per_band)

    def eigenvalues_e(self):
        return np.sort(np.concatenate([np.asarray(bs.eigenvalues_e) for bs in self.per_band])) \
            if self.per_band else np.array([])


def included_band_count(params: Params) -> int:
    """Number of bands fully contained in [-c, 0] with c >= c_p (0 if none)."""
    p = 0
    while True:
        if params.c < c_constant(p):
            return p
        band = band_edge_pair(params, p, enforce=False)
        if band.truncated or band.y_min > 0.0 or band.y_max < -params.c:
            return p
        p += 1


def _gap_grid(lo: float, hi: float, n: int) -> np.ndarray:
    pad = (hi - lo) * 1e-6
    return np.linspace(lo + pad, hi - pad, n)


def full_spectrum(params: Params, n_half: int,
                  parity: WellParity = WellParity.ODD,
                  gap_samples: int = 500) -> EigenvalueReport:
    """Eigenvalues of every fully-contained band plus gap-emptiness certificates.

    Gap certificates: Phi keeps one sign on a dense grid per gap (positive for
    odd parity, where the power is odd), and the decay caps S_U, S_V keep one
    sign per gap as well. Violations raise IntegrityError.
    """
    parity = WellParity(parity)
    n_bands = included_band_count(params)
    if n_bands == 0:
        raise PreconditionError(
            f"no fully-contained band with c >= c_p at c = {params.c}")
    bands = [band_edge_pair(params, p) for p in range(n_bands)]

    def solve(band):
        return eigenvalues_in_band(band, n_half, params, parity)

    workers = worker_count(n_bands)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            per_band = tuple(ex.map(solve, bands))
    else:
        per_band = tuple(solve(b) for b in bands)

    m_eff = effective_wells(n_half, parity)
    gaps = []
    c = params.c
    # gap between band p+1 and band p in y is (Y_min^{p+1}, Y_max^p);
    # index -1 denotes the region above Y_min^0 (below the spectrum in E)
    intervals = [(-1, bands[0].y_min, 0.0)]
    for p in range(n_bands - 1):
        intervals.append((p, bands[p + 1].y_min, bands[p].y_max))
    for g, ylo, yhi in intervals:
        ys = _gap_grid(ylo, yhi, gap_samples)
        U, Up, V, Vp = uv_arrays(ys, c)
        r = np.sqrt(ys + c)
        SU = Up + r * U
        SV = Vp + r * V
        if np.any(SU == 0.0) or np.any(np.sign(SU) != np.sign(SU[0])) or \
           np.any(SV == 0.0) or np.any(np.sign(SV) != np.sign(SV[0])):
            raise IntegrityError(f"decay-cap sign changes inside gap {g}",
                                 trace={"gap": g})
        signs = phi_signs_arrays(ys, params, m_eff)
        if parity is WellParity.ODD:
            if np.any(signs <= 0.0):
                i = int(np.argmin(signs))
                raise IntegrityError(f"Phi not positive in gap {g}",
                                     trace={"gap": g, "y": float(ys[i])})
        else:
            if np.any(signs == 0.0) or np.any(signs != signs[0]):
                raise IntegrityError(f"Phi changes sign in gap {g}", trace={"gap": g})
        gaps.append((g, True))

    for bs in per_band:
        if bs.count != m_eff:
            raise IntegrityError(
                f"band {bs.p} carries {bs.count} eigenvalues, expected {m_eff}",
                trace={"band": bs.p})
    return EigenvalueReport(params.c, n_half, parity, per_band, tuple(gaps),
                            gap_samples)

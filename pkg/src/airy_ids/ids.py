"""Bloch phase, band indexing, the closed-form integrated density of states of
the periodic operator, and its empirical counterpart from finite-chain counts.

Orientation bookkeeping. The phase phi = Arg(a + ib) in [0, pi] equals the
reduced rotation angle of the period map: as a function of E it increases
0 -> pi across even-index bands and decreases pi -> 0 across odd ones (the
y-variable reverses these). The IDS is

    I(E) = p/2 + phi/(2 pi)            inside even bands,
    I(E) = p/2 + 1/2 - phi/(2 pi)      inside odd bands,
    I(E) = p/2                         in gaps,

with p = p(E) the number of bands lying entirely below E. This case
assignment is forced by continuity at every band edge and I(inf spectrum) = 0,
and is cross-checked against eigenvalue counting in the tests.

The closed-form index floor((4/(3 pi))(c+E)^{3/2}) reproduces p(E) for every
in-band energy; inside gaps it undershoots by one on the lower part (the flip
sits mid-gap), so the direct edge-comparison definition is authoritative here
and the floor form is exposed separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .airy_core import c_constant
from .band_structure import Params, SpectralBand, band_edge_pair
from .errors import IntegrityError, PreconditionError
from .finite_spectrum import included_band_count
from .transfer import WellParity, effective_wells, transfer_data, Regime, band_phase_arrays

_BAND_REGIMES = (Regime.EVEN_BAND, Regime.ODD_BAND)

__all__ = [
    "PhaseBranch",
    "PhaseValue",
    "IdsSample",
    "bloch_phase",
    "bloch_phase_arctan",
    "band_index_p",
    "band_index_floor",
    "ids_formula",
    "ids_empirical",
    "counting_diagnostics",
    "ids_grid",
]


class PhaseBranch(Enum):
    BELOW_Y0 = "below_Y0"
    AT_Y0 = "at_Y0"
    ABOVE_Y0 = "above_Y0"


@dataclass(frozen=True)
class PhaseValue:
    e: float
    y: float
    phi: float
    branch: Optional[PhaseBranch]   # None outside the band spectrum
    in_band: bool


def _locate(e: float, params: Params):
    """(p, in_band) for e in [-c, 0].

    Below the last fully-contained band the location comes from the band
    edges; above it (inside the band straddling E = 0, or the gap below it)
    the transfer regime at y(e) decides, so no over-barrier edge search is
    ever needed.
    """
    n_inc = included_band_count(params)
    p = 0
    while p < n_inc:
        band = band_edge_pair(params, p)
        if e <= band.e_max:
            return p, band.e_min <= e <= band.e_max
        p += 1
    td = transfer_data(-params.c - e, params)
    return p, td.regime in _BAND_REGIMES


def bloch_phase(e: float, params: Params) -> PhaseValue:
    """phi = Arg(a + ib) in [0, pi]; the extension outside bands maps to 0.

    The branch tags the position relative to Y0, the unique in-band zero of
    the half-trace (where phi passes pi/2).
    """
    c = params.c
    if not (-c <= e <= 0.0):
        raise PreconditionError(f"energy {e} outside [-c, 0]")
    y = -c - e
    p, in_band = _locate(e, params)
    if not in_band:
        return PhaseValue(e, y, 0.0, None, False)
    td = transfer_data(y, params)
    phi = math.atan2(td.b, td.a)
    if td.a > 0.0:
        branch = PhaseBranch.ABOVE_Y0 if p % 2 == 0 else PhaseBranch.BELOW_Y0
    elif td.a < 0.0:
        branch = PhaseBranch.BELOW_Y0 if p % 2 == 0 else PhaseBranch.ABOVE_Y0
    else:
        branch = PhaseBranch.AT_Y0
    return PhaseValue(e, y, phi, branch, True)


def bloch_phase_arctan(e: float, params: Params) -> float:
    """Secondary evaluation through the arctangent branch decomposition around
    Y0 (g = half-trace changes sign there); kept as an independent path and
    compared against atan2 in the tests."""
    c = params.c
    y = -c - e
    td = transfer_data(y, params)
    if td.regime not in (Regime.EVEN_BAND, Regime.ODD_BAND):
        return 0.0
    if td.a == 0.0:
        return 0.5 * math.pi
    base = math.atan(td.b / td.a)
    return base + math.pi if td.a < 0.0 else base


def band_index_floor(e: float, params: Params) -> int:
    return int(math.floor(4.0 / (3.0 * math.pi) * (params.c + e) ** 1.5))


def band_index_p(e: float, params: Params, check_formula: bool = True) -> int:
    """Smallest p with e <= E_max^p (= number of bands entirely below e).

    With check_formula=True and e inside band p, the closed-form floor index
    must agree exactly; disagreement raises IntegrityError. (In gaps the floor
    form is systematically one low on the lower half and is not enforced.)
    """
    c = params.c
    if not (-c <= e <= 0.0):
        raise PreconditionError(f"energy {e} outside [-c, 0]")
    p, in_band = _locate(e, params)
    if check_formula and in_band and p < included_band_count(params):
        flr = band_index_floor(e, params)
        if flr != p:
            raise IntegrityError(
                f"closed-form band index {flr} disagrees with direct counting {p} "
                f"at in-band energy {e}",
                trace={"e": e, "floor": flr, "direct": p})
    return p


def ids_formula(e: float, params: Params) -> float:
    """Closed-form IDS at energy e in [-c, 0]; requires c >= c_0."""
    c = params.c
    c0 = c_constant(0)
    if c < c0:
        raise PreconditionError(f"the IDS formula requires c >= c_0 = {c0:.12g}")
    if not (-c <= e <= 0.0):
        raise PreconditionError(f"energy {e} outside [-c, 0]")
    p, in_band = _locate(e, params)
    if not in_band:
        return 0.5 * p
    phi = bloch_phase(e, params).phi
    if p % 2 == 0:
        return 0.5 * p + phi / (2.0 * math.pi)
    return 0.5 * p + 0.5 - phi / (2.0 * math.pi)


# ----------------------------------------------------------------------------
# empirical counting

def _phase_count_below(e: float, p_parity: int, params: Params, power: int) -> int:
    """Number of chain eigenvalues <= e inside the band containing e, by the
    band phase.

    psi = 2 arctan(q) - power*phitilde crosses l*pi (l = -power..0) exactly at
    the eigenvalues; psi increases with y on even-p bands and decreases on odd
    ones, and eigenvalues below e are those with y above y(e).
    """
    y = -params.c - e
    phit, q, _ = band_phase_arrays(np.array([y]), params.c)
    psi = float(2.0 * np.arctan(q[0]) - power * phit[0])
    if p_parity % 2 == 0:
        # psi increasing in y: count targets in (psi(y), pi)
        l_min = math.floor(psi / math.pi) + 1
        count = 0 - l_min + 1
    else:
        # psi decreasing in y: count targets in (-(power+1)pi, psi(y))
        l_max = math.ceil(psi / math.pi) - 1
        count = l_max - (-power) + 1
    return max(0, min(power + 1, count))


def ids_empirical(e: float, params: Params, n_half: int,
                  parity: WellParity = WellParity.ODD) -> float:
    """Finite-chain counting estimate of the IDS at energy e.

    Counts the chain eigenvalues <= e (strict-with-tolerance 1e-12 at band
    edges) and divides by twice the nominal well count, 2(2N+1) for odd
    parity and 2(2N) for even. Band-interior partial counts go through the
    band phase, which is exact and cheap for any chain size.
    """
    c = params.c
    if not (-c <= e <= 0.0):
        raise PreconditionError(f"energy {e} outside [-c, 0]")
    parity = WellParity(parity)
    m_eff = effective_wells(n_half, parity)
    power = m_eff - 1
    nominal = 2 * n_half + 1 if parity is WellParity.ODD else 2 * n_half
    n_inc = included_band_count(params)
    count = 0
    p = 0
    while p < n_inc:
        band = band_edge_pair(params, p)
        # edge tolerance for the <= comparison, capped well below the band
        # width so that near-edge in-band energies keep their phase count
        tol = min(1e-12, 1e-3 * (band.e_max - band.e_min))
        if e >= band.e_max - tol:
            count += m_eff
            p += 1
            continue
        if e >= band.e_min - tol:
            count += _phase_count_below(e, p, params, power)
        return count / (2.0 * nominal)
    # above every fully-contained band: possibly inside the band straddling 0
    td = transfer_data(-params.c - e, params)
    if td.regime in _BAND_REGIMES:
        count += _phase_count_below(e, p, params, power)
    return count / (2.0 * nominal)


def ids_empirical_from_report(e: float, report) -> float:
    """Counting route through an explicit EigenvalueReport (resolved spectra).

    Equivalent to ids_empirical on configurations where every band is
    resolvable; kept as the cross-validation path.
    """
    evs = report.eigenvalues_e()
    nominal = 2 * report.n_half + 1 if WellParity(report.parity) is WellParity.ODD \
        else 2 * report.n_half
    return float(np.sum(evs <= e + 1e-12)) / (2.0 * nominal)


def counting_diagnostics(e: float, params: Params, n_half: int,
                         parity: WellParity = WellParity.ODD) -> dict:
    """In-band counting intermediaries: the partition index m_E of the energy,
    the residual count n_E in {0, 1, 2}, and the phase bounds sandwiching m_E."""
    p, in_band = _locate(e, params)
    if not in_band:
        return {"in_band": False}
    m_eff = effective_wells(n_half, parity)
    power = m_eff - 1
    phi = bloch_phase(e, params).phi
    below = _phase_count_below(e, p, params, power)
    if p % 2 == 0:
        m_e = int(np.clip(round(power * phi / math.pi), 0, power - 1))
    else:
        m_e = int(np.clip(round(power * (math.pi - phi) / math.pi), 0, power - 1))
    n_e = below - m_e
    return {"in_band": True, "p": p, "phi": phi, "m_e": m_e, "n_e": n_e,
            "count_below_in_band": below,
            "m_lower_bound": power * phi / math.pi - 0.5,
            "m_upper_bound": power * phi / math.pi + 0.5}


@dataclass(frozen=True)
class IdsSample:
    e: float
    p_of_e: int
    in_band: bool
    phi: float
    ids: float
    ids_empirical: Optional[float] = None
    n_used: Optional[int] = None


def ids_grid(params: Params, energies, n_half: Optional[int] = None,
             parity: WellParity = WellParity.ODD) -> list[IdsSample]:
    out = []
    for e in np.asarray(energies, dtype=float):
        e = float(e)
        p = band_index_p(e, params, check_formula=False)
        pv = bloch_phase(e, params)
        ids = ids_formula(e, params)
        emp = ids_empirical(e, params, n_half, parity) if n_half else None
        out.append(IdsSample(e, p, pv.in_band, pv.phi, ids, emp,
                             n_half if n_half else None))
    return out

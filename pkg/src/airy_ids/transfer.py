"""Transfer matrix across one potential period, regime classification, and the
eigenvalue-condition function Phi of the finite chain.

The chain with m wells (unit half-width, spacing 2, symmetric about 0) reduces
to m-1 transfer-matrix applications between decay caps. Phi(y; m) below is
exactly F(E)/c where F = psi'(right) + lambda*psi(right) for the solution
normalized to (psi, psi') = (1, lambda) at the left end of the support: its
zeros in a spectral band are the m bound states the band carries.

The classical half-count surface phi_eval(y, params, n_half, parity) applies
the closed forms with matrix power 2N+1 (odd parity) or 2N (even parity);
these powers correspond to chains of 2N+2 and 2N+1 wells respectively, one
well more than the nominal 2N+1 / 2N configuration, and carry one extra
eigenvalue per band (2N+2 resp. 2N+1). The matching oracle well count is
exposed as effective_wells().

In gaps Phi is evaluated in (sign, log-magnitude) form: with mu = |a| + b and
mu_plus*mu_minus = 1 (unimodular transfer matrix), the powers never overflow.
In bands Phi = (alpha+beta) * sin(2*arctan(q) - K*phitilde), a singularity-free
rewrite of the tan-bracket form; both raw and log forms are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .band_structure import Params, UVSample, uv_sample, uv_arrays, barrier_uv_sample
from .errors import NumericError, PreconditionError

__all__ = [
    "Regime",
    "Sign",
    "WellParity",
    "TransferData",
    "PhiValue",
    "transfer_data",
    "transfer_arrays",
    "chain_mismatch",
    "phi_eval",
    "effective_wells",
    "band_phase",
    "band_phase_arrays",
    "phi_gap_barrier_terms",
]

EDGE_DEADBAND = 1e-13


class Regime(Enum):
    GAP = "gap"
    EVEN_BAND = "even_band"
    ODD_BAND = "odd_band"
    EDGE = "edge"


class Sign(Enum):
    POSITIVE = 1
    NEGATIVE = -1
    ZERO = 0


class WellParity(Enum):
    ODD = "odd_wells"
    EVEN = "even_wells"


def effective_wells(n_half: int, parity: WellParity) -> int:
    """Well count of the physical chain whose spectrum phi_eval(n_half, parity)
    resolves: 2N+2 for odd parity (nominal 2N+1), 2N+1 for even (nominal 2N)."""
    parity = WellParity(parity)
    return 2 * n_half + 2 if parity is WellParity.ODD else 2 * n_half + 1


@dataclass(frozen=True)
class TransferData:
    """Entries of the one-period transfer matrix [[a, 2*b1_sq], [2*b0_sq, a]].

    a = (UV' + U'V)(-E), b0_sq = (UU')(-E), b1_sq = (VV')(-E),
    b = 2*sqrt(|b0_sq*b1_sq|); det = a^2 - 4 b0_sq b1_sq = 1.
    """

    y: float
    a: float
    b0_sq: float
    b1_sq: float
    b: float
    regime: Regime

    def det(self) -> float:
        return self.a * self.a - 4.0 * self.b0_sq * self.b1_sq


def _classify(b0_sq: float, b1_sq: float, scale: float) -> Regime:
    """Classification with a deadband relative to the working magnitude of the
    four factors (their products span many orders across [-c, 0], so an
    absolute deadband would swallow entire gaps at large c)."""
    if abs(b0_sq) <= EDGE_DEADBAND * scale or abs(b1_sq) <= EDGE_DEADBAND * scale:
        return Regime.EDGE
    if b0_sq > 0.0 and b1_sq > 0.0:
        return Regime.GAP
    if b0_sq < 0.0 < b1_sq:
        return Regime.EVEN_BAND
    if b1_sq < 0.0 < b0_sq:
        return Regime.ODD_BAND
    return Regime.EDGE


def _scale(u, up, v, vp):
    return (abs(u) + abs(v)) * (abs(up) + abs(vp))


def transfer_data(y: float, params: Params) -> TransferData:
    s = uv_sample(y, params)
    return _from_sample(s)


def _from_sample(s: UVSample) -> TransferData:
    a = s.u * s.v_prime + s.u_prime * s.v
    b0_sq = s.u * s.u_prime
    b1_sq = s.v * s.v_prime
    b = 2.0 * math.sqrt(abs(b0_sq * b1_sq))
    regime = _classify(b0_sq, b1_sq, _scale(s.u, s.u_prime, s.v, s.v_prime))
    return TransferData(s.y, a, b0_sq, b1_sq, b, regime)


def transfer_arrays(y, c):
    """Vectorized (a, b0_sq, b1_sq, b)."""
    U, Up, V, Vp = uv_arrays(y, c)
    a = U * Vp + Up * V
    b0 = U * Up
    b1 = V * Vp
    return a, b0, b1, 2.0 * np.sqrt(np.abs(b0 * b1))


@dataclass(frozen=True)
class PhiValue:
    """Phi in (sign, log|Phi|) form; raw is None where it is not representable."""

    y: float
    sign: Sign
    log_magnitude: float
    raw: Optional[float]
    regime: Regime


def _caps(y, c):
    """S_U = U' + sqrt(y+c) U and S_V likewise, vectorized."""
    U, Up, V, Vp = uv_arrays(y, c)
    r = np.sqrt(y + c)
    return Up + r * U, Vp + r * V, U, Up, V, Vp


def band_phase_arrays(y, c):
    """(phitilde, q, log_apb) on band points: phitilde = Arg(a+ib) in [0, pi],
    q = the k (even-band) / ktilde (odd-band) cap ratio, apb = alpha + beta."""
    SU, SV, U, Up, V, Vp = _caps(np.asarray(y, dtype=float), c)
    a = U * Vp + Up * V
    b0 = U * Up
    b1 = V * Vp
    b = 2.0 * np.sqrt(np.abs(b0 * b1))
    phit = np.arctan2(b, a)
    even = b0 < 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rho = np.sqrt(np.abs(b1) / np.abs(b0))
        q = np.where(even, rho * SU / SV, SV / (rho * SU))
        apb = rho * SU ** 2 + SV ** 2 / rho  # alpha+beta, same in both band parities
    q = np.where(np.isnan(q), 0.0, q)
    return phit, q, apb


def band_phase(y: float, params: Params, n_wells: int) -> float:
    """psi(y) = 2*arctan(q) - (n_wells - 1)*phitilde; eigenvalues at psi = l*pi.

    Strictly monotone across each band (increasing on even-p, decreasing on
    odd-p bands), sweeping (-(K+1)pi, pi) with K = n_wells - 1.
    """
    phit, q, _ = band_phase_arrays(np.array([float(y)]), params.c)
    return float(2.0 * np.arctan(q[0]) - (n_wells - 1) * phit[0])


def chain_mismatch(y: float, params: Params, n_wells: int) -> PhiValue:
    """Phi(y) = F(E)/c for the chain with n_wells wells; K = n_wells - 1."""
    if n_wells < 1:
        raise PreconditionError("the chain needs at least one well")
    c = params.c
    if not (-c <= y <= 0.0):
        raise PreconditionError(f"y={y} outside [-c, 0]")
    K = n_wells - 1
    s = uv_sample(y, params)
    td = _from_sample(s)
    x = y + c
    r = math.sqrt(x)
    SU = s.u_prime + r * s.u
    SV = s.v_prime + r * s.v

    if td.regime is Regime.GAP:
        b0 = math.sqrt(td.b0_sq)
        b1 = math.sqrt(td.b1_sq)
        sgn_a = 1.0 if td.a >= 0.0 else -1.0
        # dominant eigenvalue is sgn_a*(|a| + b); the other is its reciprocal,
        # so mu+^K + mu-^K = sgn_a^K (e^{KL} + e^{-KL}) while the difference
        # picks up one extra sgn_a.
        L = math.log(abs(td.a) + td.b)
        em = math.exp(-2.0 * K * L)
        one_minus = -math.expm1(-2.0 * K * L)
        bracket = SU * SV * (1.0 + em) + \
            sgn_a * 0.5 * ((b1 / b0) * SU ** 2 + (b0 / b1) * SV ** 2) * one_minus
        if bracket == 0.0:
            return PhiValue(y, Sign.ZERO, -math.inf, 0.0, td.regime)
        log_mag = K * L + math.log(abs(bracket))
        sgn = (sgn_a ** K) * (1.0 if bracket > 0.0 else -1.0)
        raw = sgn * math.exp(log_mag) if log_mag < 700.0 else None
        return PhiValue(y, Sign(int(sgn)), log_mag, raw, td.regime)

    if td.regime is Regime.EDGE:
        raise NumericError(
            "Phi is evaluated only strictly inside bands and gaps; "
            "the point sits in the edge deadband", bracket=(y, y))

    # band regimes: Phi = (alpha+beta) * sin(2*arctan(q) - K*phitilde)
    phit = math.atan2(td.b, td.a)
    rho = math.sqrt(abs(td.b1_sq) / abs(td.b0_sq))
    if td.regime is Regime.EVEN_BAND:
        q = rho * SU / SV if SV != 0.0 else math.copysign(math.inf, rho * SU)
    else:
        q = SV / (rho * SU) if SU != 0.0 else math.copysign(math.inf, SV)
    apb = rho * SU ** 2 + SV ** 2 / rho
    psi = 2.0 * math.atan(q) - K * phit
    sval = math.sin(psi)
    value = apb * sval
    if value == 0.0:
        return PhiValue(y, Sign.ZERO, -math.inf, 0.0, td.regime)
    log_mag = math.log(apb) + math.log(abs(sval))
    sgn = Sign.POSITIVE if value > 0.0 else Sign.NEGATIVE
    return PhiValue(y, sgn, log_mag, value, td.regime)


def phi_eval(y: float, params: Params, n_half: int, parity: WellParity = WellParity.ODD) -> PhiValue:
    """The classical eigenvalue-condition function for half-count n_half.

    Odd parity: closed forms with power 2*n_half+1 ((a+-b)^{2N+1},
    tan((2N+1) phitilde)); even parity: power 2*n_half. Zeros per band:
    2N+2 resp. 2N+1.
    """
    if n_half < 0:
        raise PreconditionError("n_half must be nonnegative")
    return chain_mismatch(y, params, effective_wells(n_half, parity))


def phi_signs_arrays(y, params: Params, n_wells: int):
    """Vectorized sign of the chain mismatch (+1/-1/0) over mixed-regime y.

    Uses the log-safe gap form and the phase form in bands; points falling in
    the edge deadband get sign 0 (callers treat them separately).
    """
    y = np.asarray(y, dtype=float)
    c = params.c
    K = n_wells - 1
    SU, SV, U, Up, V, Vp = _caps(y, c)
    a = U * Vp + Up * V
    b0 = U * Up
    b1 = V * Vp
    sc = (np.abs(U) + np.abs(V)) * (np.abs(Up) + np.abs(Vp))
    edge = (np.abs(b0) <= EDGE_DEADBAND * sc) | (np.abs(b1) <= EDGE_DEADBAND * sc)
    gap = (b0 > 0.0) & (b1 > 0.0) & ~edge
    band = ((b0 < 0.0) & (b1 > 0.0) | (b1 < 0.0) & (b0 > 0.0)) & ~edge
    out = np.zeros_like(y)

    if np.any(gap):
        sb0 = np.sqrt(b0[gap])
        sb1 = np.sqrt(b1[gap])
        ag = a[gap]
        sgn_a = np.where(ag >= 0.0, 1.0, -1.0)
        L = np.log(np.abs(ag) + 2.0 * sb0 * sb1)
        one_minus = -np.expm1(-2.0 * K * L)
        em = np.exp(-2.0 * K * L)
        bracket = SU[gap] * SV[gap] * (1.0 + em) + \
            sgn_a * 0.5 * ((sb1 / sb0) * SU[gap] ** 2 + (sb0 / sb1) * SV[gap] ** 2) * one_minus
        out[gap] = sgn_a ** K * np.sign(bracket)

    if np.any(band):
        phit = np.arctan2(2.0 * np.sqrt(np.abs(b0[band] * b1[band])), a[band])
        even = b0[band] < 0.0
        rho = np.sqrt(np.abs(b1[band]) / np.abs(b0[band]))
        q = np.where(even, rho * SU[band] / SV[band], SV[band] / (rho * SU[band]))
        out[band] = np.sign(np.sin(2.0 * np.arctan(q) - K * phit))
    return out


def phi_gap_barrier_terms(y: float, params: Params, power: int):
    """Gap-form decomposition of Phi over the barrier-based pair (even chains).

    Returns (term1, term2, value): term1 = S_U S_V (mu+^K + mu-^K) and
    term2 = (cap-ratio combination)/2 * (mu+^K - mu-^K), in the convention of
    the classical display where they appear added; the actual mismatch is
    value = term1 - term2 (the barrier-frame expansion carries a minus). The
    caps are re-based at y+c, so S_U = sqrt(y+c) and S_V = 1, and the transfer
    entries are the barrier products at y. On negative-trace gaps with even
    power, term1 > 0 and term2 < 0, so both contributions to value reinforce
    and Phi cannot vanish there.
    """
    s = barrier_uv_sample(y, params)
    b0_sq = s.u * s.u_prime
    b1_sq = s.v * s.v_prime
    a = s.u * s.v_prime + s.u_prime * s.v
    if not (b0_sq > 0.0 and b1_sq > 0.0):
        raise PreconditionError(
            "barrier gap decomposition requires both barrier products positive "
            "(negative-trace spectral gap)")
    b0, b1 = math.sqrt(b0_sq), math.sqrt(b1_sq)
    mu_p = a + 2.0 * b0 * b1
    mu_m = a - 2.0 * b0 * b1
    su = math.sqrt(y + params.c)
    term1 = su * (mu_p ** power + mu_m ** power)
    term2 = 0.5 * ((b1 / b0) * su ** 2 + (b0 / b1)) * (mu_p ** power - mu_m ** power)
    return term1, term2, term1 - term2

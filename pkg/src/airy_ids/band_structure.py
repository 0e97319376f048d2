"""Rescaled-energy machinery: the re-based pair U, V, spectral band edges of
the periodic operator, sign tables, and the physical/rescaled energy maps.

Conventions. Energies E live in [-c, 0]; the working variable is y = -c - E.
U(.; y) and V(.; y) are the canonical Airy pair re-based at y (U(y) = 1,
U'(y) = 0, V(y) = 0, V'(y) = 1); all spectral quantities evaluate them at
x = y + c = -E. The p-th band is [Y_max^p, Y_min^p] in y (note Y_max < Y_min)
with center at -frak_a(p), where frak_a alternates Ai'-zero / Ai-zero
magnitudes. Even-p band edges are zeros of U (left) and U' (right), odd-p
edges zeros of V and V'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np

from .airy_core import band_center_offset, c_constant, canonical_arrays, canonical_uv
from .errors import PreconditionError, NumericError

__all__ = [
    "Params",
    "UVSample",
    "SpectralBand",
    "RescaleDirection",
    "uv_sample",
    "uv_arrays",
    "barrier_uv_sample",
    "band_edges",
    "band_edge_pair",
    "rescale_map",
    "band_sign_pattern",
    "gap_sign_pattern",
]


@dataclass(frozen=True)
class Params:
    """Semiclassical parameter c, optionally tied to a physical triple.

    c = (2 m L0^2 V0 / hbar^2)^(1/3); pass mass/length/depth (with hbar in
    matching units, default 1) to have the consistency checked at 1e-12.
    """

    c: float
    mass: Optional[float] = None
    l0: Optional[float] = None
    v0: Optional[float] = None
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise PreconditionError("semiclassical parameter c must be positive")
        triple = (self.mass, self.l0, self.v0)
        if any(t is not None for t in triple):
            if any(t is None for t in triple):
                raise PreconditionError("physical triple requires mass, l0 and v0 together")
            implied = (2.0 * self.mass * self.l0 ** 2 * self.v0 / self.hbar ** 2) ** (1.0 / 3.0)
            if abs(implied - self.c) > 1e-12 * abs(self.c):
                raise PreconditionError(
                    f"c={self.c} inconsistent with physical triple (implies {implied})")

    @property
    def has_physical(self) -> bool:
        return self.v0 is not None


@dataclass(frozen=True)
class UVSample:
    """U, U', V, V' at x = y + c for the pair re-based at y; UV' - U'V = 1."""

    y: float
    u: float
    u_prime: float
    v: float
    v_prime: float

    def wronskian(self) -> float:
        return self.u * self.v_prime - self.u_prime * self.v


def uv_arrays(y, c):
    """Vectorized (U, U', V, V') at y + c with coefficients at y."""
    y = np.asarray(y, dtype=float)
    u_y, up_y, v_y, vp_y = canonical_arrays(y)
    u_x, up_x, v_x, vp_x = canonical_arrays(y + c)
    U = vp_y * u_x - up_y * v_x
    Up = vp_y * up_x - up_y * vp_x
    V = u_y * v_x - v_y * u_x
    Vp = u_y * vp_x - v_y * up_x
    return U, Up, V, Vp


def uv_sample(y: float, params: Params, margin: float = 1.0) -> UVSample:
    c = params.c
    if not (-c - margin <= y <= margin):
        raise PreconditionError(
            f"y={y} outside [-c-{margin}, {margin}] for c={c}")
    U, Up, V, Vp = uv_arrays(np.array([float(y)]), c)
    return UVSample(float(y), float(U[0]), float(Up[0]), float(V[0]), float(Vp[0]))


def barrier_uv_sample(y: float, params: Params) -> UVSample:
    """The pair re-based at the barrier-top argument y + c, evaluated at y.

    This is the basis used for barrier-centered cell decompositions (even
    well counts); its half-trace at y equals the standard one at y + c.
    """
    c = params.c
    x = y + c
    u_x, up_x, v_x, vp_x = canonical_arrays(np.array([x]))
    u_y, up_y, v_y, vp_y = canonical_arrays(np.array([float(y)]))
    U = vp_x * u_y - up_x * v_y
    Up = vp_x * up_y - up_x * vp_y
    V = u_x * v_y - v_x * u_y
    Vp = u_x * vp_y - v_x * up_y
    return UVSample(float(y), float(U[0]), float(Up[0]), float(V[0]), float(Vp[0]))


# ----------------------------------------------------------------------------
# sign tables (band index p, gap index g = gap between bands g and g+1)

_BAND_SIGNS = {0: (1, -1, 1, 1), 1: (-1, -1, 1, -1), 2: (-1, 1, -1, -1), 3: (1, 1, -1, 1)}
_GAP_SIGNS = {0: (-1, -1, 1, 1), 1: (-1, -1, -1, -1), 2: (1, 1, -1, -1), 3: (1, 1, 1, 1)}


def band_sign_pattern(p: int):
    """Expected signs of (U, U', V, V') strictly inside band p."""
    return _BAND_SIGNS[p % 4]


def gap_sign_pattern(g: int):
    """Expected signs of (U, U', V, V') inside the gap between bands g and g+1.

    g = -1 addresses the region below the lowest band.
    """
    return _GAP_SIGNS[g % 4]


# ----------------------------------------------------------------------------
# band edges

@dataclass(frozen=True)
class SpectralBand:
    """One spectral band: y-edges (y_max < y_min), E-edges, center offset."""

    p: int
    y_max: float
    y_min: float
    e_min: float
    e_max: float
    center_offset: float
    truncated: bool = False

    @property
    def width_y(self) -> float:
        return self.y_min - self.y_max


def _edge_function(p: int, which: str):
    idx = {("max", 0): 0, ("min", 0): 1, ("max", 1): 2, ("min", 1): 3}[(which, p % 2)]

    def f(y, c):
        return uv_arrays(y, c)[idx]

    return f


def _bisect_edge(f, c, lo, hi):
    flo = float(f(np.array([lo]), c)[0])
    fhi = float(f(np.array([hi]), c)[0])
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NumericError("band-edge bracket lost its sign change", bracket=(lo, hi))
    while hi - lo > 2.0 * math.ulp(max(abs(lo), abs(hi))):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = float(f(np.array([mid]), c)[0])
        if fm == 0.0:
            return mid
        if fm * flo < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def band_edge_pair(params: Params, p: int, enforce: bool = True) -> SpectralBand:
    """Edges of band p by sign-change bisection of the Table-assigned function.

    With enforce=True the threshold c >= c_p is checked first (the edge/sign
    layout is guaranteed in that regime).
    """
    if enforce:
        cp = c_constant(p)
        if params.c < cp:
            raise PreconditionError(
                f"band {p} requires c >= c_{p} = {cp:.12g}, got c = {params.c}")
    return _band_edge_cached(params.c, p)


@lru_cache(maxsize=16384)
def _band_edge_cached(c: float, p: int) -> SpectralBand:
    center = -band_center_offset(p)
    if center < -c - 1.0:
        raise PreconditionError(
            f"band {p} lies outside the potential range for c = {c}")
    lo_nb = -band_center_offset(p + 1)
    hi_nb = -band_center_offset(p - 1) if p >= 1 else 0.0
    w = 0.5 * min(center - lo_nb, hi_nb - center)
    f_max = _edge_function(p, "max")
    f_min = _edge_function(p, "min")
    y_max = _bisect_edge(f_max, c, center - w, center + w)
    y_min = _bisect_edge(f_min, c, center - w, center + w)
    if y_max > y_min:
        raise NumericError(f"band {p} edges came out unordered", bracket=(y_max, y_min))
    truncated = (y_max < -c) or (y_min > 0.0)
    return SpectralBand(p, y_max, y_min, -c - y_min, -c - y_max,
                        band_center_offset(p), truncated)


def band_edges(params: Params, p_max: int) -> list[SpectralBand]:
    """Bands 0..p_max; requires c >= c_{p_max} (checked, raising with the value)."""
    if p_max < 0:
        raise PreconditionError("p_max must be nonnegative")
    cp = c_constant(p_max)
    if params.c < cp:
        raise PreconditionError(
            f"band_edges up to p={p_max} requires c >= c_{p_max} = {cp:.12g}, "
            f"got c = {params.c}")
    bands = [band_edge_pair(params, p, enforce=False) for p in range(p_max + 1)]
    for lower, upper in zip(bands[:-1], bands[1:]):
        if not upper.y_min < lower.y_max:
            raise NumericError(
                f"bands {upper.p} and {lower.p} fail the gap/band alternation")
    return bands


# ----------------------------------------------------------------------------
# energy maps

class RescaleDirection(Enum):
    PHYSICAL_TO_RESCALED = "physical_to_rescaled"   # E -> c E / V0
    RESCALED_TO_PHYSICAL = "rescaled_to_physical"   # bold E -> V0 E / c
    RESCALED_TO_Y = "rescaled_to_y"                 # bold E -> -c - E
    Y_TO_RESCALED = "y_to_rescaled"                 # y -> -c - y


def rescale_map(value: float, params: Params, direction: RescaleDirection) -> float:
    direction = RescaleDirection(direction)
    if direction is RescaleDirection.PHYSICAL_TO_RESCALED:
        if not params.has_physical:
            raise PreconditionError("physical parameters (v0) required for this direction")
        return params.c * value / params.v0
    if direction is RescaleDirection.RESCALED_TO_PHYSICAL:
        if not params.has_physical:
            raise PreconditionError("physical parameters (v0) required for this direction")
        return params.v0 * value / params.c
    if direction is RescaleDirection.RESCALED_TO_Y:
        return -params.c - value
    return -params.c - value  # Y_TO_RESCALED: same involution

"""Shared fixtures: common parameter sets, cached spectra and oracle runs
(several acceptance criteria consume the same expensive objects)."""

import numpy as np
import pytest

from airy_ids.band_structure import Params, band_edge_pair
from airy_ids.finite_spectrum import full_spectrum
from airy_ids.transfer import WellParity


@pytest.fixture(scope="session")
def params3():
    return Params(c=3.0)


@pytest.fixture(scope="session")
def params10():
    return Params(c=10.0)


@pytest.fixture(scope="session")
def params12():
    return Params(c=12.0)


_SPECTRA = {}


@pytest.fixture(scope="session")
def spectrum_cache():
    """Memoized full_spectrum runs keyed by (c, n_half, parity)."""

    def get(c, n_half, parity=WellParity.ODD):
        key = (c, n_half, WellParity(parity))
        if key not in _SPECTRA:
            _SPECTRA[key] = full_spectrum(Params(c=c), n_half, parity)
        return _SPECTRA[key]

    return get


@pytest.fixture(scope="session")
def bands10():
    par = Params(c=10.0)
    return [band_edge_pair(par, p) for p in range(13)]


# ----------------------------------------------------------------------------
# independent Airy oracle: high-order Taylor stepping of y'' = x*y from 0,
# in extended precision; used only by tests, shares nothing with the library.

def _taylor_step(x0, y, yp, h, terms=30):
    c = np.zeros(terms, dtype=np.longdouble)
    c[0], c[1] = y, yp
    c[2] = x0 * c[0] / 2.0
    for k in range(3, terms):
        # y'' = (x0 + t) y  =>  k(k-1) c_k = x0 c_{k-2} + c_{k-3}
        c[k] = (x0 * c[k - 2] + c[k - 3]) / (k * (k - 1))
    hl = np.longdouble(h)
    val = np.longdouble(0.0)
    for k in range(terms - 1, -1, -1):
        val = val * hl + c[k]
    der = np.longdouble(0.0)
    for k in range(terms - 1, 0, -1):
        der = der * hl + k * c[k]
    return val, der


def taylor_march(x_target, y0, yp0, step=0.125):
    """Propagate (y, y') of y'' = x*y from x = 0 to x_target."""
    x = np.longdouble(0.0)
    y, yp = np.longdouble(y0), np.longdouble(yp0)
    n = max(1, int(np.ceil(abs(x_target) / step)))
    h = np.longdouble(x_target) / n
    for _ in range(n):
        y, yp = _taylor_step(x, y, yp, h)
        x += h
    return float(y), float(yp)


@pytest.fixture(scope="session")
def airy_ode_oracle():
    return taylor_march

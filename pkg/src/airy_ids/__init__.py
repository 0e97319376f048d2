"""Spectral theory of the sawtooth-well (Airy) Schrodinger family: band
structure of the periodic operator, spectra of finite chains, and the
closed-form integrated density of states, with independent oracles.
"""

__version__ = "0.1.0"

from .errors import (AiryIdsError, ConfigError, IntegrityError, NumericError,
                     PreconditionError, RangeError)
from .airy_core import (AiryQuad, CanonicalPair, ScaledAiryQuad, ZeroFamily,
                        ZeroKind, airy_eval, airy_eval_scaled, band_center_offset,
                        c_constant, canonical_uv, zero_of)
from .band_structure import (Params, RescaleDirection, SpectralBand, UVSample,
                             band_edge_pair, band_edges, band_sign_pattern,
                             gap_sign_pattern, rescale_map, uv_sample)
from .transfer import (PhiValue, Regime, Sign, TransferData, WellParity,
                       chain_mismatch, effective_wells, phi_eval, transfer_data)
from .finite_spectrum import (BandPartition, BandSpectrum, EigenvalueReport,
                              eigenvalues_in_band, full_spectrum,
                              included_band_count, subdivision_points)
from .ids import (IdsSample, PhaseBranch, PhaseValue, band_index_floor,
                  band_index_p, bloch_phase, counting_diagnostics, ids_empirical,
                  ids_formula, ids_grid)
from .verification import (HGF, BandWidthBound, OracleMethod, OracleResult,
                           appendix_inequalities, band_width_bound, chain_potential,
                           fd_oracle, hgf_eval, lemma_h_check, monodromy_oracle,
                           shooting_mismatch, shooting_oracle, well_centers)

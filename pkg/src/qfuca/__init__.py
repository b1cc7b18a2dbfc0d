"""Vortex-wave multiplexing over quasi-fractal circular antenna arrays.

The package covers the full simulation chain: recursive array geometry with
shared-element layouts (`geometry`), nested DFT modulation operators
(`transforms`), the free-space line-of-sight channel (`channel`), the
modulation / block-diagonalization / SVD-precoding / zero-forcing pipeline
(`modem`), spectral- and layout-efficiency metrics (`capacity`), exhaustive
layout optimization (`search`), and a batch command-line front end (`cli`).
"""

from .geometry import (DimensionSpec, EnumerationCaps, LayoutError, LayoutType,
                       PairRelation, QfUcaGeometry, ToleranceError, build_geometry,
                       check_layout_conditions, enumerate_layouts, load_layout,
                       position_of, save_layout, validate_geometrically)
from .transforms import (NestedModulation, apply_modulation, block_idft,
                         idft_matrix, kronecker_chain, nested_modulation)
from .channel import (ChannelParams, SPEED_OF_LIGHT, assemble_H, block_diagonalize,
                      circulant_deviation, element_gain, exact_distance,
                      approx_distance)
from .modem import (EndToEndResult, NoiseModel, PrecodingSet, ReconstructionError,
                    analytic_noise_variance, derive_precoding, end_to_end,
                    nod_demodulate, nom_modulate, symmetrization_diagnostic,
                    synthetic_block_circulant)
from .capacity import (SeReport, eoal, mode_tuples, sigma2_for_snr,
                       spectral_efficiency, uniform_power_allocation)
from .search import (CandidateResult, SearchResult, evaluate_layout,
                     optimize_layout)

__version__ = "0.1.0"

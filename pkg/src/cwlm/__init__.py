"""Joint output statistics of continuous weak measurement of sigma_x and
sigma_y on a qubit, with pre- and post-selection."""
from .detectors import (DetectorCorrelators, DissipationRates, SystemConfig, check_appendix_conditions,
                        check_pairwise_cs, check_two_detector, delta_z, derived_quantities, scenario,
                        validate)
from .distributions import (ChiGrid, JointDistribution, auto_grid, conditional_slice,
                            difference_and_certainty, grid_for_output_range, joint_distribution,
                            marginal, moments)
from .errors import (CWLMError, GridError, InvalidConfiguration, InvalidPolarization,
                     InvalidPostSelection, NumericalOverflow, ZeroOverlap,
                     ZeroPostSelectionProbability)
from .evolution import build_liouvillian, generating_function, postselect_probability, propagate
from .qubit import (BlochVector, HamiltonianParams, PostSelection, bloch_to_density,
                    build_postselection, expectation, frame_rotate)
from .shifts import (PolarizationPair, ShiftMeasure, convolve_with_gaussian, shift_char_exact,
                     shift_quasi_2d, shift_weights_1d)
from .shorttime import ShortTimeParams, average_outputs, char_function_xy, joint_dist_xy

__version__ = "0.1.0"

__all__ = [
    "BlochVector", "CWLMError", "ChiGrid", "DetectorCorrelators", "DissipationRates",
    "GridError", "HamiltonianParams", "InvalidConfiguration", "InvalidPolarization",
    "InvalidPostSelection", "JointDistribution", "NumericalOverflow", "PolarizationPair",
    "PostSelection", "ShiftMeasure", "ShortTimeParams", "SystemConfig", "ZeroOverlap",
    "ZeroPostSelectionProbability", "auto_grid", "average_outputs", "bloch_to_density",
    "build_liouvillian", "build_postselection", "char_function_xy",
    "check_appendix_conditions", "check_pairwise_cs", "check_two_detector",
    "conditional_slice", "convolve_with_gaussian", "delta_z", "derived_quantities",
    "difference_and_certainty", "expectation", "frame_rotate", "generating_function",
    "grid_for_output_range", "joint_dist_xy", "joint_distribution", "marginal", "moments",
    "postselect_probability", "propagate", "scenario", "shift_char_exact", "shift_quasi_2d",
    "shift_weights_1d", "validate",
]

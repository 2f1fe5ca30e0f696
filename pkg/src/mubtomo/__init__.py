"""Simulated two-qubit tomography with mutually unbiased and separable bases."""

from .bases import certify_complete, certify_unbiased, mub_scheme, overlap, ssqst_scheme
from .estimate import MleOptions, linear_inversion, log_likelihood, mle_reconstruct, predict_mixed_ratio
from .metrics import fidelity, infidelity, purity
from .simulate import CountData, born_probabilities, sample_counts
from .states import RngStream, bell_state, density_from_pure, ket, maximally_mixed

__version__ = "0.1.0"

"""Multilevel polar-coded modulation over real ASK constellations."""

__version__ = "0.1.0"

from .channels import (AwgnChannel, BecChannel, Constellation, ask_constellation,
                       awgn_transmit, bec_transmit, ebno_to_sigma, make_rng, sigma_to_ebno)
from .sbp import (CapacityProfile, Labeling, LinearSbp, compose_variance, gray_labeling,
                  linear_product_matrix, product_bit_index, profile_mean, profile_variance,
                  sp_labeling)
from .polar import PolarCode, encode, generator_matrix, sc_decode, select_frozen, wer_sc
from .analysis import (GaussianBitChannel, bec_polarize, cm_capacity, ga_capacity,
                       ga_mean_from_capacity, ga_polarize, level_capacities,
                       mc_bit_level_profile, pe_from_mean, variance_curve_bec)
from .mlc import MultilevelPolarCode, design, ml_encode, ml_variance, msd_decode

__all__ = [name for name in dir() if not name.startswith("_")]

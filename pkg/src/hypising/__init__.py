"""Ising metastability toolkit on finite hyperbolic {p,q} lattices.

Builds the layered patch with a frozen minus boundary, evaluates all the
closed-form metastability constants, simulates the Metropolis single-flip
dynamics, constructs reference paths and critical droplets, and computes
energy-landscape quantities exactly on enumerable instances.
"""
from .energy import ExactEnergy, SpinConfig, clusters, delta_h, flip_delta
from .errors import CapacityError, DomainError, InsufficientSamplesError
from .lattice import LatticeGraph, boundary_exposure, build, embed_poincare, validate
from .params import (CriticalRadius, FieldWindow, ModelParams, Region,
                     SpectralConstants, critical_radius, field_window,
                     layer_counts, region_classify, spectral_constants)
from .landscape import (ball_config, ball_increment, critical_droplet,
                        exhaustive_landscape, fill_layer_path, kstar,
                        manifold_slice, min_perimeter_table, reference_gamma,
                        reference_path, shape_classify)
from .dynamics import (ChainState, HittingTimeSample, detailed_balance_audit,
                       exact_chain_analysis, hit, step, tail_statistics)

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ChainState", "CriticalRadius", "DomainError", "ExactEnergy",
    "FieldWindow", "HittingTimeSample", "InsufficientSamplesError", "LatticeGraph",
    "ModelParams", "Region", "SpectralConstants", "SpinConfig", "ball_config",
    "ball_increment", "boundary_exposure", "build", "clusters", "critical_droplet",
    "critical_radius", "delta_h", "detailed_balance_audit", "embed_poincare",
    "exact_chain_analysis", "exhaustive_landscape", "field_window", "fill_layer_path",
    "flip_delta", "hit", "kstar", "layer_counts", "manifold_slice",
    "min_perimeter_table", "reference_gamma", "reference_path", "region_classify",
    "shape_classify", "spectral_constants", "step", "tail_statistics", "validate",
]

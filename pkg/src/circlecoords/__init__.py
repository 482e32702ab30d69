"""Density-corrected circular coordinates from persistent cohomology."""

from .alignment import AlignmentResult, O2Element, align_and_average, circle_distance, circle_loss, hill_climb, procrustes_o2_seed
from .circular import CircularCoordinate, extend_coordinate, harmonic_smooth, to_circle
from .config import PipelineConfig
from .data import (SyntheticSample, TimeSeries, delay_embed, detrend, gen_limit_cycle_series, gen_unbalanced_circle,
                   gen_unbalanced_ellipse, pca_reduce)
from .density import estimate_density, make_acceptance, rejection_sample, scott_bandwidth
from .errors import CircleCoordsError, DegenerateEnsemble, NoLoopDetected
from .evaluation import circular_rmse_aligned, evaluate, ksg_mi, winding_number
from .persistence import build_rips, choose_scale, lift_cocycle, persistent_cohomology_h1, select_bar
from .pipeline import bench, corrected_coordinate, mi_compare, run_corrected, run_uncorrected, single_coordinate

__version__ = "0.1.0"

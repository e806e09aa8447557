"""Compactified Voronoi density estimation with Monte Carlo raycasting."""
from .accel import BACKEND
from .baselines import KdeModel, fit_adakde, fit_kde, kde_log_density, scott_bandwidth
from .errors import CVDEError, DataError, NumericError
from .estimator import (DensityModel, FitMeta, avg_log_likelihood, fit, fit_independent, fit_many,
                        log_density, log_volume_path, max_mixture_log_density, sample_direction_set,
                        score)
from .geometry import (Box, DirectionSet, GeneratorTable, RadiusPair, build_generator_table, cell_radii,
                       directional_radius_from_generator, directional_radius_from_point,
                       nearest_generator, ray_box_exit)
from .io import load_model, save_model
from .kernels import (KernelSpec, kernel_eval, log_radial_mass, reg_lower_incomplete_gamma,
                      sample_line_truncated)
from .sampler import ChainState, Chains, init_chains, sample, step

__version__ = "0.1.0"

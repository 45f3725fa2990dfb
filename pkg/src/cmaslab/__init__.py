"""Competitive multi-agent search laboratory on dynamic NK landscapes."""

from .landscape import (Landscape, FlockingConfig, build_landscape,
                        hamming, hamming_ball, point_from_bits, point_to_bits,
                        point_from_str, point_to_str)
from .strategy import (Strategy, S1Table, S2Table, StateOccupancy, discretize,
                       normalize_rows, select_s1, select_s2,
                       strategy_to_vector, vector_to_strategy)
from .simulation import (EnvironmentConfig, Memory, MemoryEntry, RunTrace,
                         run_simulation, evaluate_strategy, exploit_step,
                         explore_step)
from .cppn import Genome, NodeGene, LinkGene, activate, decode_strategy
from .neat import NeatConfig, InnovationRegistry, compatibility, evolve
from .rtts import RttsConfig, rtts_step, scan_size, steps_per_move
from .analysis import (StrategyEnsemble, pca_project, welch_t_test,
                       count_prior_visits, aggregate_occupancy)
from .sphereviz import SphericalGrid, build_grid, place_point, render
from .harness import ExperimentSpec, manual_catalog, manual_strategy

__version__ = "0.1.0"

"""Discrete pairwise energy minimization.

Exact min-cut for submodular binary energies, QPBO/QPBOI for the general
binary case, ICM and large-move solvers for multilabel energies,
correlation clustering with exploration moves, and a multiscale energy
pyramid with energy-aware coarsening of variables and labels.
"""

from .core import (BinaryEnergy, Energy, EnergyFormatError, classify,
                   evaluate, evaluate_relaxed, evaluate_relaxed_matrix,
                   from_labeling, read_pwe, to_labeling, write_pwe)
from .mincut import FlowGraph, SubmodularityViolation, build_graph, min_cut
from .qpbo import qpbo_solve, qpboi_improve
from .local_moves import adaptive_icm, compact_labels, icm
from .large_moves import (alpha_beta_swap, alpha_expansion, expand_and_explore,
                          swap_and_explore, winner_take_all)
from .multiscale import (CorrelationEstimate, EnergyPyramid, build_interpolation,
                         build_label_interpolation, build_pyramid,
                         coarsen_labels, coarsen_variables, dump_pyramid,
                         estimate_correlations, label_correlations,
                         select_coarse_variables, solve_multiscale)
from .corrclust import (cc_energy, log_odds, prior_on_k, purity, read_aff,
                        sketch_to_cc, write_aff)
from .bench import (SizeCapExceeded, bench_run, brute_force,
                    brute_force_partitions, gen_cc_matrix, gen_grid_energy)

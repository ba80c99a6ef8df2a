"""Logistic-regression-augmented community detection with a background group."""

from .em import FitOptions, FitResult, ModelParams, Variant, e_step, fit, inner_em, m_step, pseudo_log_likelihood
from .io import load_covariates, load_dataset, load_network
from .likelihood import joint_log_likelihood, robust_joint_log_likelihood
from .logistic import LogisticFit, fit_weighted, predict_prob
from .metrics import adjusted_rand_index, misclassification_rate
from .network import Network, block_counts, edge_block_sums
from .select import bic, icl, select_k
from .simulate import SelectionSpec, SimulationSpec, run_selection_study, run_simulation
from .synth import GenConfig, SyntheticNetwork, generate, scenario_table1, scenario_table2, scenario_table3

__version__ = "0.1.0"

"""Experiment planning, reference caching, convergence tables and the CLI."""
from .cache import ReferenceCache
from .config import (ExperimentPlan, GridSpec, InitialSpec, PotentialSpec, TauRule, initial_field, load_plan,
                     parse_potential)
from .experiment import ConvergenceTable, compute_reference, observed_order, run_experiment
from .tables import emit, read_csv, to_csv, to_markdown

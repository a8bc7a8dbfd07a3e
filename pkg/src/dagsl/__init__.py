"""Causal path modelling with one Super Learner per endogenous DAG variable."""
from .bootstrap import BootstrapConfig, BootstrapResult, percentile_ci, run_bootstrap
from .dag import BIN, CONT, CausalOrdering, Dag, VarType, cat, load_dag, save_dag
from .daglearner import DagLearner, FitReport, InterventionSpec, PathAteTable
from .errors import DagslError
from .learners import LEARNER_KINDS, LearnerSpec, Task
from .metrics import GroundTruthEffects, e_ate, e_pehe, evaluate_benchmark
from .simulate import DgpSpec, generate, lambda_sweep, run_comparison
from .superlearner import SuperLearner, fit_super_learner, sl_predict, solve_simplex_weights
from .tabular import Dataset, Standardizer, read_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "BIN",
    "CONT",
    "BootstrapConfig",
    "BootstrapResult",
    "CausalOrdering",
    "Dag",
    "DagLearner",
    "DagslError",
    "Dataset",
    "DgpSpec",
    "FitReport",
    "GroundTruthEffects",
    "InterventionSpec",
    "LEARNER_KINDS",
    "LearnerSpec",
    "PathAteTable",
    "Standardizer",
    "SuperLearner",
    "Task",
    "VarType",
    "cat",
    "e_ate",
    "e_pehe",
    "evaluate_benchmark",
    "fit_super_learner",
    "generate",
    "lambda_sweep",
    "load_dag",
    "percentile_ci",
    "read_csv",
    "run_bootstrap",
    "run_comparison",
    "save_dag",
    "sl_predict",
    "solve_simplex_weights",
    "write_csv",
]

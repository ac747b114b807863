"""Value functions of one-sector capital accumulation models via the HJB equation."""

from .diagnostics import (counterexample_suite, diagnose, euler_residual,
                          magic_of_capital_demo, subgradient_interval, transversality_check)
from .hjb import (CertificateReport, DegenerateGrid, NonConvergence, SolveConfig, ValueFunctionEstimator,
                  ValueGrid, assumption6_upper_bound, check_class_V, hjb_residual, solve_hjb)
from .model import (Assumption6Params, ModelSpec, ScalarField2, check_assumptions, crra_eval,
                    make_ak_crra, make_linear_counterexample, make_log_ak, make_magic_model,
                    make_rck, make_rck_cobb_douglas)
from .ode import (AnalyticValue, IntegratorConfig, Path, euler_shooting, optimal_path, payoff,
                  pure_accumulation_path)
from .policy import BracketFailure, maximize_hamiltonian, policy_independence_check, policy_map

__version__ = "0.1.0"

__all__ = [
    "AnalyticValue", "Assumption6Params", "BracketFailure", "CertificateReport", "DegenerateGrid",
    "IntegratorConfig", "ModelSpec", "NonConvergence", "Path", "ScalarField2", "SolveConfig",
    "ValueFunctionEstimator", "ValueGrid", "assumption6_upper_bound", "check_assumptions",
    "check_class_V", "counterexample_suite", "crra_eval", "diagnose", "euler_residual",
    "euler_shooting", "hjb_residual", "magic_of_capital_demo", "make_ak_crra",
    "make_linear_counterexample", "make_log_ak", "make_magic_model", "make_rck",
    "make_rck_cobb_douglas", "maximize_hamiltonian", "optimal_path", "payoff",
    "policy_independence_check", "policy_map", "pure_accumulation_path", "solve_hjb",
    "subgradient_interval", "transversality_check",
]

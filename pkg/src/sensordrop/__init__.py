"""Multi-UAV sensor-drop planning under landing uncertainty.

Sensors released from UAVs drift with the wind, so each drop vertex induces a
Gaussian landing distribution.  Plans maximize a Gaussian-process mutual
information surrogate that accounts for this uncertainty, subject to per-UAV
route budgets and sensor counts.
"""

from .dropsim import SensorBody, WindField, estimate_landing_distribution, sample_landing, simulate_descent, wind_at
from .evaluation import (
    EvalReport,
    GaussianBump,
    GroundTruth,
    TrialResult,
    bench_runtime,
    ground_truth_value,
    monte_carlo_eval,
    paired_bootstrap,
    run_trial,
)
from .exceptions import (
    DisconnectedGraphError,
    EnumerationRefused,
    InvalidInputError,
    NotPositiveDefiniteError,
    NumericError,
    PathValidationError,
    ScenarioError,
    SensorDropError,
)
from .gp import (
    CovTriple,
    KernelParams,
    NoiseParams,
    UncertainLocation,
    assemble_covariances,
    expected_cov_entry,
    gaussian_entropy,
    gp_posterior,
    mutual_information,
    se_kernel,
)
from .planner import (
    UAV,
    Plan,
    Scenario,
    baseline_deterministic,
    baseline_random,
    brute_force,
    gcb,
    objective,
    plan_violations,
    sga,
)
from .scenario_io import load_scenario, scenario_from_dict, scenario_to_dict
from .world import DropNode, RoutePath, WorldGraph, metric_completion, path_cost, tsp_tour, validate_path

__version__ = "0.1.0"

"""Monte Carlo evaluation of drop plans against a synthetic ground truth."""

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ._validation import check_finite_array, check_positive
from .dropsim import sample_landing
from .exceptions import EnumerationRefused, InvalidInputError
from .gp import gp_posterior
from .planner import Scenario, brute_force, sga


@dataclass(frozen=True)
class GaussianBump:
    center: tuple
    amplitude: float
    width: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(check_finite_array(self.center, "center", shape=(2,))))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        object.__setattr__(self, "width", check_positive(self.width, "width"))


@dataclass(frozen=True)
class GroundTruth:
    """Spatial field as a sum of isotropic Gaussian bumps.

    ``scale`` converts field values back to raw units (raw = scale * value)
    when the amplitudes were normalized; it only affects reported raw MSE.
    """

    components: tuple
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise InvalidInputError(f"ground truth scale must be positive, got {self.scale}")
        comps = tuple(c if isinstance(c, GaussianBump) else GaussianBump(**c) for c in self.components)
        if not comps:
            raise InvalidInputError("ground truth needs at least one component")
        object.__setattr__(self, "components", comps)

    def __call__(self, p):
        return ground_truth_value(self, p)


def ground_truth_value(gt, p):
    """Field value at ``p`` (shape (2,)) or at each row of ``p`` (shape (n, 2))."""
    p = np.asarray(p, dtype=float)
    pts = p.reshape(-1, 2)
    out = np.zeros(len(pts))
    for c in gt.components:
        d2 = np.sum((pts - np.asarray(c.center)) ** 2, axis=1)
        out += c.amplitude * np.exp(-d2 / (2.0 * c.width ** 2))
    return float(out[0]) if p.ndim == 1 else out


@dataclass(eq=False)
class TrialResult:
    landings: np.ndarray
    measurements: np.ndarray
    poi_predictions: np.ndarray
    poi_truth: np.ndarray
    sse: float
    mse: float
    seed: int = 0


def vertex_stream(seed, vertex):
    # one stream per (trial seed, vertex): plans sharing a vertex share its landing and noise
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(vertex)]))


def trial_seed(master_seed, trial):
    return int(np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(1)[0])


def run_trial(plan, scenario, gt, seed):
    """Drop, measure, and predict the PoIs once.

    Each drop vertex samples its landing and its measurement noise from its
    own stream, and the GP posterior uses the realized landing points.
    """
    drops = plan.drop_vertices
    noise_sd = math.sqrt(scenario.noise.measurement_variance)
    landings = np.zeros((len(drops), 2))
    meas = np.zeros(len(drops))
    for i, v in enumerate(drops):
        rng = vertex_stream(seed, v)
        landings[i] = sample_landing(scenario.graph.vertices[v].landing, rng)
        meas[i] = ground_truth_value(gt, landings[i]) + noise_sd * rng.standard_normal()
    pred, _ = gp_posterior(landings, meas, scenario.noise, scenario.kernel, scenario.pois)
    truth = ground_truth_value(gt, scenario.pois)
    sse = math.fsum((pred - truth) ** 2)
    return TrialResult(landings, meas, pred, truth, sse, sse / len(truth), int(seed))


@dataclass
class PlannerStats:
    planner: str
    mean_mse: float
    std_mse: float
    mean_sse: float
    mean_mse_raw: float
    mean_objective: float
    mean_wall_time: float
    n_drops: int


@dataclass
class EvalReport:
    planners: list
    n_trials: int
    master_seed: int
    scenario_digest: str
    rows: list = field(default_factory=list)  # (trial, planner, sse, mse, n_drops, seed)
    meta: dict = field(default_factory=dict)

    def stats(self, name):
        for p in self.planners:
            if p.planner == name:
                return p
        raise KeyError(name)

    def mse_samples(self, name):
        return np.array([r[3] for r in self.rows if r[1] == name])

    def to_dict(self):
        return {
            "n_trials": self.n_trials,
            "master_seed": self.master_seed,
            "scenario_digest": self.scenario_digest,
            "planners": [asdict(p) for p in self.planners],
            "meta": dict(self.meta),
        }


def scenario_digest(scenario):
    """Stable hash of the numeric content of a scenario."""
    h = hashlib.sha256()
    means, covs = scenario.landing_arrays
    for arr in (scenario.graph.weights, means, covs, scenario.pois):
        h.update(np.ascontiguousarray(arr, dtype=float).tobytes())
    meta = {
        "kernel": [scenario.kernel.signal_variance, list(scenario.kernel.length_scales)],
        "noise": [scenario.noise.measurement_variance, scenario.noise.jitter],
        "uavs": [[u.depot, u.budget, u.sensors] for u in scenario.uavs],
        "eta": scenario.eta,
    }
    h.update(json.dumps(meta, sort_keys=True).encode())
    return h.hexdigest()[:16]


def _mean(xs):
    return math.fsum(xs) / len(xs)


def _std(xs):
    if len(xs) < 2:
        return 0.0
    m = _mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def monte_carlo_eval(plans, scenario, gt, n_trials, master_seed, threads=1):
    """Paired trials: trial ``t`` uses the same seed for every plan."""
    if int(n_trials) < 1:
        raise InvalidInputError(f"n_trials must be >= 1, got {n_trials}")
    n_trials = int(n_trials)
    names = [p.planner_name for p in plans]
    if len(set(names)) != len(names):
        names = [f"{n}#{i}" for i, n in enumerate(names)]
    seeds = [trial_seed(master_seed, t) for t in range(n_trials)]
    jobs = [(t, j) for t in range(n_trials) for j in range(len(plans))]

    def work(job):
        t, j = job
        return run_trial(plans[j], scenario, gt, seeds[t])

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            results = list(ex.map(work, jobs))
    else:
        results = [work(job) for job in jobs]

    rows = []
    per = {n: [] for n in names}
    for (t, j), res in zip(jobs, results):
        per[names[j]].append(res)
        rows.append((t, names[j], res.sse, res.mse, len(plans[j].drop_vertices), seeds[t]))
    stats = []
    for j, name in enumerate(names):
        res = per[name]
        stats.append(PlannerStats(
            planner=name,
            mean_mse=_mean([r.mse for r in res]),
            std_mse=_std([r.mse for r in res]),
            mean_sse=_mean([r.sse for r in res]),
            mean_mse_raw=_mean([r.mse for r in res]) * gt.scale ** 2,
            mean_objective=plans[j].objective_value,
            mean_wall_time=plans[j].wall_time,
            n_drops=len(plans[j].drop_vertices),
        ))
    return EvalReport(stats, n_trials, int(master_seed), scenario_digest(scenario), rows)


def paired_bootstrap(a, b, n_boot=10_000, seed=0):
    """Fraction of paired bootstrap resamples in which mean(a) < mean(b)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInputError("paired samples must be 1-D arrays of equal length")
    diff = a - b
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(diff), size=(n_boot, len(diff)))
    return float(np.mean(diff[idx].mean(axis=1) < 0))


@dataclass
class BenchRow:
    k: int
    sga_seconds: float
    sga_objective: float
    oracle_seconds: float = None
    oracle_objective: float = None
    oracle_status: str = "skipped"


def bench_runtime(scenario, sensors_per_uav, run_oracle=True, max_assignments=50_000):
    """Time SGA (and brute force where its guard allows) for each sensor count."""
    rows = []
    for k in sensors_per_uav:
        sc = replace_uavs(scenario, [replace(u, sensors=int(k)) for u in scenario.uavs])
        t0 = time.perf_counter()
        plan = sga(sc)
        row = BenchRow(int(k), time.perf_counter() - t0, plan.objective_value)
        if run_oracle:
            try:
                t0 = time.perf_counter()
                opt = brute_force(sc, max_assignments=max_assignments)
                row.oracle_seconds = time.perf_counter() - t0
                row.oracle_objective = opt.objective_value
                row.oracle_status = "ok"
            except EnumerationRefused as exc:
                row.oracle_status = f"refused: {exc}"
        rows.append(row)
    return rows


def replace_uavs(scenario, uavs):
    """Copy of ``scenario`` with a new UAV list, sharing the completed graph."""
    sc = Scenario(scenario.graph, scenario.pois, scenario.kernel, scenario.noise, uavs, scenario.eta)
    if "completed_graph" in scenario.__dict__:
        sc.__dict__["completed_graph"] = scenario.completed_graph
    return sc

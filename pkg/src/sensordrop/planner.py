"""Multi-UAV drop planning: sequential greedy assignment over cost-benefit routes.

Each UAV in turn runs a cost-benefit greedy that conditions on the drops
already committed by earlier UAVs.  Routes are planned on the metric
completion of the input graph, so every interior vertex of a returned path
is a drop vertex.
"""

import time
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np

from ._validation import as_generator, check_points, check_positive
from .exceptions import EnumerationRefused, InvalidInputError
from .gp import KernelParams, NoiseParams, surrogate_mi
from .world import (
    RoutePath,
    Violation,
    exact_tsp_tour,
    metric_completion,
    tour_length,
    tsp_tour,
    validate_path,
)


@dataclass(frozen=True)
class UAV:
    depot: int
    budget: float
    sensors: int

    def __post_init__(self):
        check_positive(self.budget, "budget")
        if int(self.sensors) != self.sensors or self.sensors < 0:
            raise InvalidInputError(f"sensors must be a nonnegative integer, got {self.sensors!r}")
        object.__setattr__(self, "depot", int(self.depot))
        object.__setattr__(self, "budget", float(self.budget))
        object.__setattr__(self, "sensors", int(self.sensors))


@dataclass(eq=False)
class Scenario:
    """A complete problem instance."""

    graph: object
    pois: np.ndarray
    kernel: KernelParams
    noise: NoiseParams
    uavs: list
    eta: float = 0.0

    def __post_init__(self):
        self.pois = check_points(self.pois, "pois")
        if len(self.pois) == 0:
            raise InvalidInputError("pois must be nonempty")
        self.eta = check_positive(self.eta, "eta", strict=False)
        self.uavs = [u if isinstance(u, UAV) else UAV(**u) for u in self.uavs]
        for i, u in enumerate(self.uavs):
            if not 0 <= u.depot < len(self.graph):
                raise InvalidInputError(f"uavs[{i}].depot {u.depot} is not a vertex")
        self.noise.check_against(self.kernel)

    @cached_property
    def completed_graph(self):
        return metric_completion(self.graph)

    @cached_property
    def landing_arrays(self):
        return self.graph.landing_arrays()


@dataclass(eq=False)
class Plan:
    paths: list
    objective_value: float
    planner_name: str
    wall_time: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def drop_vertices(self):
        return sorted(v for p in self.paths for v in p.drops)

    def to_dict(self):
        return {
            "planner": self.planner_name,
            "objective_value": self.objective_value,
            "wall_time": self.wall_time,
            "paths": [
                {"uav": p.uav_index, "vertices": list(p.vertices), "drops": list(p.drops)}
                for p in self.paths
            ],
            "meta": dict(self.meta),
        }

    @classmethod
    def from_dict(cls, d):
        paths = [RoutePath(p["uav"], p["vertices"], p["drops"]) for p in d["paths"]]
        return cls(paths, float(d["objective_value"]), d["planner"], float(d.get("wall_time", 0.0)),
                   dict(d.get("meta", {})))


def make_objective(scenario, ignore_uncertainty=False):
    """Set-function oracle over vertex ids; memoized per frozenset.

    With ``ignore_uncertainty`` every landing covariance is taken as zero.
    """
    means, covs = scenario.landing_arrays
    if ignore_uncertainty:
        covs = np.zeros_like(covs)
    n = len(means)
    cache = {}

    def f(vertices):
        key = frozenset(int(v) for v in vertices)
        if key not in cache:
            idx = sorted(key)
            if idx and not (0 <= idx[0] and idx[-1] < n):
                raise InvalidInputError(f"unknown vertex id in {idx}")
            cache[key] = surrogate_mi(scenario.pois, means[idx], covs[idx], scenario.kernel, scenario.noise)
        return cache[key]

    return f


def objective(scenario, drop_vertices):
    """Surrogate MI of the landing distributions of ``drop_vertices``."""
    return make_objective(scenario)(drop_vertices)


def _route_cost(selected, depot, g, eta, cache):
    key = frozenset(selected)
    if key not in cache:
        tour = tsp_tour(key, depot, g)
        cache[key] = (tour_length(tour, g) + len(key) * eta, tour)
    return cache[key]


def gcb(committed, budget, g, objective_fn, depot, k, eta, uav_index=0):
    """Cost-benefit greedy route for one UAV with a cap of ``k`` sensors.

    Candidates are all vertices except the depot and ``committed``.  Each round
    picks the candidate with the best marginal-gain / marginal-cost ratio
    (smallest id on ties), adds it when the resulting tour fits the budget,
    and drops it from the candidate pool either way.
    """
    n = len(g)
    if not 0 <= int(depot) < n:
        raise InvalidInputError(f"depot {depot} not in graph")
    depot = int(depot)
    k = int(k)
    if k < 0 or budget < 0:
        raise InvalidInputError("k and budget must be nonnegative")
    committed = frozenset(int(v) for v in committed)
    candidates = [v for v in range(n) if v != depot and v not in committed]
    floor = 1e-6 * budget if budget > 0 else np.finfo(float).tiny
    costs = {}
    S = frozenset()
    f_cur = objective_fn(committed)
    c_cur, _ = _route_cost(S, depot, g, eta, costs)
    while candidates and k > 0:
        best, best_ratio = None, -np.inf
        for v in candidates:
            df = objective_fn(committed | S | {v}) - f_cur
            dc = max(_route_cost(S | {v}, depot, g, eta, costs)[0] - c_cur, floor)
            ratio = df / dc
            if ratio > best_ratio:
                best, best_ratio = v, ratio
        if best is None:
            best = candidates[0]
        c_new, _ = _route_cost(S | {best}, depot, g, eta, costs)
        if c_new <= budget:
            S = S | {best}
            k -= 1
            f_cur = objective_fn(committed | S)
            c_cur = c_new
        candidates.remove(best)
    _, tour = _route_cost(S, depot, g, eta, costs)
    return RoutePath(uav_index, tour, tuple(tour[1:-1]))


def _sequential(scenario, objective_fn, name):
    start = time.perf_counter()
    g = scenario.completed_graph
    committed = frozenset()
    paths = []
    for i, uav in enumerate(scenario.uavs):
        path = gcb(committed, uav.budget, g, objective_fn, uav.depot, uav.sensors, scenario.eta, i)
        paths.append(path)
        committed = committed | set(path.drops)
    value = objective(scenario, committed)
    return Plan(paths, value, name, time.perf_counter() - start)


def sga(scenario):
    """Sequential greedy assignment on the uncertainty-aware surrogate."""
    return _sequential(scenario, make_objective(scenario), "sga")


def baseline_deterministic(scenario):
    """Same pipeline as :func:`sga` but planning as if sensors land at their means.

    The reported objective is re-scored with the true covariances.
    """
    return _sequential(scenario, make_objective(scenario, ignore_uncertainty=True), "baseline")


def baseline_random(scenario, seed=None):
    """Per UAV, accept uniformly random vertices while budget and sensors allow."""
    start = time.perf_counter()
    rng = as_generator(seed)
    g = scenario.completed_graph
    used = set()
    paths = []
    for i, uav in enumerate(scenario.uavs):
        costs = {}
        pool = np.array([v for v in range(len(g)) if v != uav.depot and v not in used], dtype=int)
        S = frozenset()
        for v in rng.permutation(pool):
            if len(S) >= uav.sensors:
                break
            if _route_cost(S | {int(v)}, uav.depot, g, scenario.eta, costs)[0] <= uav.budget:
                S = S | {int(v)}
        _, tour = _route_cost(S, uav.depot, g, scenario.eta, costs)
        paths.append(RoutePath(i, tour, tuple(tour[1:-1])))
        used |= S
    value = objective(scenario, used)
    return Plan(paths, value, "random", time.perf_counter() - start, {"seed": None if seed is None else int(seed)})


def enumeration_size(scenario, max_subset_size=8):
    """Upper bound on the assignments brute force would enumerate, per UAV and total."""
    n = len(scenario.graph)
    per_uav = []
    for uav in scenario.uavs:
        m = n - 1
        kk = min(uav.sensors, m)
        per_uav.append({"candidates": m, "max_subset": kk, "subsets": sum(comb(m, j) for j in range(kk + 1))})
    total = int(np.prod([p["subsets"] for p in per_uav], dtype=object)) if per_uav else 1
    return {"vertices": n, "per_uav": per_uav, "assignments": total, "max_subset_size": max_subset_size}


def brute_force(scenario, max_assignments=50_000, max_subset_size=8):
    """Exact optimum of the surrogate by exhaustive enumeration.

    Every UAV gets a (possibly empty) subset of at most ``k_i`` vertices, the
    subsets are pairwise disjoint, and each is feasible under its exact TSP
    cost.  Raises :class:`EnumerationRefused` when the instance exceeds the
    guards instead of running for hours.
    """
    size = enumeration_size(scenario, max_subset_size)
    too_deep = [i for i, p in enumerate(size["per_uav"]) if p["max_subset"] > max_subset_size]
    if too_deep:
        raise EnumerationRefused(
            f"exact TSP is limited to {max_subset_size} drops per UAV; UAVs {too_deep} exceed it", size)
    if size["assignments"] > max_assignments:
        raise EnumerationRefused(
            f"{size['assignments']} assignments exceed the enumeration guard of {max_assignments}", size)
    start = time.perf_counter()
    g = scenario.completed_graph
    n = len(g)
    f = make_objective(scenario)
    feasible = []
    for uav in scenario.uavs:
        cands = [v for v in range(n) if v != uav.depot]
        options = []
        for j in range(min(uav.sensors, len(cands)) + 1):
            for sub in combinations(cands, j):
                tour = exact_tsp_tour(sub, uav.depot, g)
                if tour_length(tour, g) + j * scenario.eta <= uav.budget:
                    options.append((frozenset(sub), tour))
        feasible.append(options)

    best = [-np.inf, None]

    def search(i, used, chosen):
        if i == len(feasible):
            val = f(used)
            if val > best[0]:
                best[0], best[1] = val, list(chosen)
            return
        for sub, tour in feasible[i]:
            if sub & used:
                continue
            chosen.append(tour)
            search(i + 1, used | sub, chosen)
            chosen.pop()

    search(0, frozenset(), [])
    paths = [RoutePath(i, t, tuple(t[1:-1])) for i, t in enumerate(best[1])]
    value = objective(scenario, {v for p in paths for v in p.drops})
    return Plan(paths, value, "oracle", time.perf_counter() - start, {"assignments": size["assignments"]})


def plan_violations(plan, scenario):
    """Map UAV index -> violation list for every infeasible path.

    Drops shared between UAVs are reported under the key ``"plan"``.
    """
    if len(plan.paths) != len(scenario.uavs):
        raise InvalidInputError(f"plan has {len(plan.paths)} paths for {len(scenario.uavs)} UAVs")
    out = {}
    g = scenario.completed_graph
    for path, uav in zip(plan.paths, scenario.uavs):
        v = validate_path(path, g, uav.budget, uav.sensors, scenario.eta, depot=uav.depot)
        if v:
            out[path.uav_index] = v
    drops = plan.drop_vertices
    if len(set(drops)) != len(drops):
        out.setdefault("plan", []).append(Violation("duplicate", f"a vertex is dropped twice: {drops}"))
    return out


PLANNERS = {
    "sga": lambda sc, seed=None: sga(sc),
    "baseline": lambda sc, seed=None: baseline_deterministic(sc),
    "random": lambda sc, seed=None: baseline_random(sc, seed),
    "oracle": lambda sc, seed=None: brute_force(sc),
}

"""Drop-vertex graph, metric completion, route costs and TSP tours.

Edge weights are travel times; a route's cost is its tour length plus a fixed
drop time per released sensor.
"""

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from ._validation import check_finite_array, check_positive
from .exceptions import DisconnectedGraphError, InvalidInputError, PathValidationError
from .gp import UncertainLocation

IMPROVE_TOL = 1e-12


@dataclass(eq=False)
class DropNode:
    """Airborne release vertex and the landing distribution it induces."""

    id: int
    position: np.ndarray
    landing: UncertainLocation

    def __post_init__(self):
        self.id = int(self.id)
        self.position = check_finite_array(self.position, f"vertex {self.id} position", shape=(3,))
        if self.position[2] <= 0:
            raise InvalidInputError(f"vertex {self.id} must be airborne (z > 0)")


class WorldGraph:
    """Undirected weighted graph over drop nodes with per-UAV depots.

    Weights are kept in a dense symmetric matrix with ``inf`` for missing
    edges and zeros on the diagonal.
    """

    def __init__(self, vertices, edges, depots=()):
        self.vertices = list(vertices)
        n = len(self.vertices)
        for i, v in enumerate(self.vertices):
            if v.id != i:
                raise InvalidInputError(f"vertex ids must be dense 0..{n - 1}; found {v.id} at index {i}")
        w = np.full((n, n), np.inf)
        np.fill_diagonal(w, 0.0)
        for u, v, weight in edges:
            u, v = int(u), int(v)
            self._check_vertex(u)
            self._check_vertex(v)
            weight = check_positive(weight, f"weight of edge ({u}, {v})", strict=False)
            # parallel edges: keep the cheapest
            if weight < w[u, v]:
                w[u, v] = w[v, u] = weight
        w.setflags(write=False)
        self._weights = w
        self.depots = tuple(int(d) for d in depots)
        for d in self.depots:
            self._check_vertex(d)

    def _check_vertex(self, v):
        if not 0 <= int(v) < len(self.vertices):
            raise InvalidInputError(f"vertex {v} not in graph (0..{len(self.vertices) - 1})")

    def __len__(self):
        return len(self.vertices)

    @property
    def weights(self):
        return self._weights

    @property
    def edges(self):
        iu, ju = np.triu_indices(len(self), k=1)
        mask = np.isfinite(self._weights[iu, ju])
        return [(int(i), int(j), float(self._weights[i, j])) for i, j in zip(iu[mask], ju[mask])]

    @property
    def is_complete(self):
        return bool(np.all(np.isfinite(self._weights)))

    def weight(self, u, v):
        return float(self._weights[u, v])

    def landing_arrays(self):
        """Landing means (n, 2) and covariances (n, 2, 2) indexed by vertex id."""
        means = np.array([v.landing.mean for v in self.vertices]).reshape(-1, 2)
        covs = np.array([v.landing.covariance for v in self.vertices]).reshape(-1, 2, 2)
        return means, covs

    def with_weights(self, weights):
        """Same vertices and depots, complete graph on the given weight matrix."""
        n = len(self)
        iu, ju = np.triu_indices(n, k=1)
        edges = [(i, j, weights[i, j]) for i, j in zip(iu, ju)]
        return WorldGraph(self.vertices, edges, self.depots)


@dataclass(eq=False)
class RoutePath:
    """Closed walk of one UAV and the interior vertices where it releases sensors."""

    uav_index: int
    vertices: tuple
    drops: tuple = field(default=())

    def __post_init__(self):
        self.uav_index = int(self.uav_index)
        self.vertices = tuple(int(v) for v in self.vertices)
        self.drops = tuple(int(v) for v in self.drops)

    @property
    def depot(self):
        return self.vertices[0]

    @property
    def interior(self):
        return self.vertices[1:-1]


@dataclass(frozen=True)
class Violation:
    kind: str  # "budget" | "sensors" | "endpoints" | "duplicate" | "drops" | "edge"
    message: str
    excess: float = 0.0


def metric_completion(g):
    """Complete graph of shortest-path distances.

    Floyd-Warshall sweeps are repeated until a full sweep changes nothing, so
    the returned weights satisfy the triangle inequality exactly in floating
    point, not just up to rounding.
    """
    d = np.array(g.weights, dtype=float)
    n = len(d)
    changed = True
    while changed:
        changed = False
        for k in range(n):
            via = d[:, k, None] + d[None, k, :]
            better = via < d
            if better.any():
                d[better] = via[better]
                changed = True
    if not np.all(np.isfinite(d)):
        u, v = np.argwhere(~np.isfinite(d))[0]
        raise DisconnectedGraphError(u, v)
    return g.with_weights(d)


def tour_length(tour, g):
    w = g.weights
    return float(sum(w[a, b] for a, b in zip(tour[:-1], tour[1:])))


def path_cost(path, g, eta):
    """Tour length plus ``eta`` per released sensor."""
    eta = check_positive(eta, "eta", strict=False)
    _check_walk(path, g)
    return tour_length(path.vertices, g) + len(path.drops) * eta


def _check_walk(path, g):
    if len(path.vertices) < 2:
        raise PathValidationError(f"path of UAV {path.uav_index} needs at least the depot twice")
    for v in path.vertices:
        if not 0 <= v < len(g):
            raise PathValidationError(f"path of UAV {path.uav_index} visits unknown vertex {v}")
    for a, b in zip(path.vertices[:-1], path.vertices[1:]):
        if not np.isfinite(g.weights[a, b]):
            raise PathValidationError(f"path of UAV {path.uav_index} uses missing edge ({a}, {b})")


def _two_opt(tour, w):
    # tour is closed: tour[0] == tour[-1] == depot
    tour = list(tour)
    n = len(tour)
    improved = True
    while improved:
        improved = False
        for i in range(n - 3):
            for j in range(i + 2, n - 1):
                a, b = tour[i], tour[i + 1]
                c, e = tour[j], tour[j + 1]
                delta = w[a, c] + w[b, e] - w[a, b] - w[c, e]
                if delta < -IMPROVE_TOL:
                    tour[i + 1 : j + 1] = tour[i + 1 : j + 1][::-1]
                    improved = True
    return tour


def tsp_tour(selected, depot, g):
    """Closed tour from ``depot`` through ``selected``: nearest neighbor, then 2-opt.

    Ties are broken by smallest vertex id, so the result depends only on the
    set of selected vertices, not their order.
    """
    g._check_vertex(depot)
    todo = sorted({int(v) for v in selected})
    for v in todo:
        g._check_vertex(v)
    if depot in todo:
        raise InvalidInputError(f"selected vertices must exclude the depot {depot}")
    w = g.weights
    tour = [depot]
    current = depot
    while todo:
        # min over (distance, id) keeps the smallest id on ties
        nxt = min(todo, key=lambda v: (w[current, v], v))
        tour.append(nxt)
        todo.remove(nxt)
        current = nxt
    tour.append(depot)
    if len(tour) > 4:
        tour = _two_opt(tour, w)
    return tour


def exact_tsp_tour(selected, depot, g):
    """Optimal closed tour by enumerating all visiting orders (small sets only)."""
    todo = sorted({int(v) for v in selected})
    if len(todo) > 8:
        raise InvalidInputError(f"exact TSP limited to 8 vertices, got {len(todo)}")
    w = g.weights
    best, best_len = None, np.inf
    for order in permutations(todo):
        tour = (depot, *order, depot)
        length = sum(w[a, b] for a, b in zip(tour[:-1], tour[1:]))
        if length < best_len:
            best, best_len = list(tour), length
    return best


def validate_path(path, g, budget, max_drops, eta, depot=None):
    """Return every constraint the path violates; an empty list means feasible."""
    out = []
    verts = path.vertices
    if depot is None:
        depot = verts[0] if verts else None
    if len(verts) < 2 or verts[0] != depot or verts[-1] != depot:
        out.append(Violation("endpoints", f"path must start and end at depot {depot}, got {verts}"))
    interior = path.interior
    seen = set()
    for v in interior:
        if v in seen:
            out.append(Violation("duplicate", f"interior vertex {v} repeats"))
        seen.add(v)
    stray = [v for v in path.drops if v not in seen]
    if stray or len(set(path.drops)) != len(path.drops):
        out.append(Violation("drops", f"drops {list(path.drops)} must be distinct interior vertices"))
    if len(path.drops) > max_drops:
        excess = len(path.drops) - max_drops
        out.append(Violation("sensors", f"{len(path.drops)} drops exceed the {max_drops} sensors", excess))
    try:
        cost = path_cost(path, g, eta)
    except PathValidationError as exc:
        out.append(Violation("edge", str(exc)))
    else:
        if cost > budget:
            excess = cost - budget
            out.append(Violation("budget", f"cost {cost!r} exceeds budget {budget!r} by {excess!r}", excess))
    return out

"""Compile Bell-pair requests into measurement plans and execute them.

Plan bases are expressed in the graph frame of the state the plan was made
for. :func:`execute_plan` translates all of them to physical Paulis before
the first measurement, so the plan is a fixed set of single-qubit
measurements whose result does not depend on the order of execution.

Zipper plans
------------
The route is a zig-zag of alternating horizontal and vertical steps with at
most one turning portion, where two steps along the major axis follow each
other. On a holed cluster the route is projected onto the live vertices and
must stay connected through the bridging edges left by earlier paths.
Interior vertices are measured in X with the next route vertex as special
neighbour; a Z cleanup set is drawn from the off-path neighbours of the
route ends, the turning portion and any crossing, checked by simulating the
plan on a copy of the state, then pruned greedily. Since graph updates do
not depend on measurement outcomes, one simulated run covers every outcome
branch.
"""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

from .graphstate import GraphState
from .lattice import Lattice, Round, Schedule, cz, measure

STRATEGIES = ("cut", "zipper", "sequential")


class RoutingError(ValueError):
    """Routing failure; ``index`` names the failing request in a batch."""

    def __init__(self, msg: str, index: int | None = None):
        super().__init__(msg if index is None else f"request {index}: {msg}")
        self.index = index


@dataclass(frozen=True)
class PairRequest:
    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise RoutingError(f"request endpoints coincide: {self.a}")

    def check_roles(self, lat: Lattice) -> None:
        for v in (self.a, self.b):
            if not 0 <= v < lat.n or lat.role(v) != "auxiliary":
                raise RoutingError(f"endpoint {v} is not an auxiliary qubit")


@dataclass(frozen=True)
class Step:
    vertex: int
    basis: str
    special_neighbor: int | None = None

    def to_dict(self) -> dict:
        d: dict = {"vertex": self.vertex, "basis": self.basis}
        if self.special_neighbor is not None:
            d["special_neighbor"] = self.special_neighbor
        return d


@dataclass(frozen=True)
class MeasurementPlan:
    """Ordered graph-frame measurements extracting one Bell pair.

    ``path`` is the route through the cluster, kept for reporting.
    """

    pair: tuple[int, int]
    steps: tuple[Step, ...]
    strategy: str
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        vs = [s.vertex for s in self.steps]
        if len(set(vs)) != len(vs):
            raise RoutingError("a vertex appears twice in the plan")
        if set(vs) & set(self.pair):
            raise RoutingError("plan measures one of its endpoints")
        if self.strategy not in STRATEGIES:
            raise RoutingError(f"unknown strategy {self.strategy!r}")
        for s in self.steps:
            if s.basis not in ("X", "Y", "Z"):
                raise RoutingError(f"bad basis {s.basis!r}")

    @property
    def vertices(self) -> list[int]:
        return [s.vertex for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "strategy": self.strategy,
            "path": list(self.path),
            "steps": [s.to_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> MeasurementPlan:
        steps = tuple(
            Step(int(s["vertex"]), s["basis"], s.get("special_neighbor")) for s in d["steps"]
        )
        return cls(tuple(d["pair"]), steps, d["strategy"], tuple(d.get("path", ())))


@dataclass(frozen=True)
class BellRecord:
    """Outcome of executing a plan.

    ``byproduct`` holds the vertex operators left on ``a`` and ``b``;
    ``log`` lists ``(vertex, physical basis, outcome)`` in execution order.
    """

    pair: tuple[int, int]
    byproduct: tuple[str, str]
    measured_count: int
    log: tuple[tuple[int, str, int], ...] = ()

    @property
    def outcomes(self) -> dict[int, int]:
        return {v: o for v, _, o in self.log}

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "byproduct": list(self.byproduct),
            "measured_count": self.measured_count,
            "log": [list(t) for t in self.log],
        }


# -- execution ---------------------------------------------------------------


def _physical(state: GraphState, steps: Iterable[Step]) -> dict[int, str]:
    return {s.vertex: state.physical_basis(s.vertex, s.basis)[1] for s in steps}


def _run(
    state: GraphState,
    steps: Sequence[Step],
    forced: Mapping[int, int] | None = None,
    order: Sequence[int] | None = None,
) -> list[tuple[int, str, int]]:
    phys = _physical(state, steps)
    seq = steps if order is None else [steps[k] for k in order]
    log = []
    for s in seq:
        sn = s.special_neighbor if s.special_neighbor in state.adj[s.vertex] else None
        f = forced.get(s.vertex) if forced else None
        out = state.measure_pauli(s.vertex, phys[s.vertex], forced=f, special_neighbor=sn)
        log.append((s.vertex, phys[s.vertex], out.value))
    return log


def execute_plan(
    state: GraphState,
    plan: MeasurementPlan,
    forced: Mapping[int, int] | None = None,
    order: Sequence[int] | None = None,
) -> BellRecord:
    """Apply ``plan`` to ``state`` in place and return the Bell record.

    Parameters
    ----------
    forced : mapping, optional
        Physical outcomes to pin, by vertex.
    order : sequence of int, optional
        Permutation of the plan steps; defaults to plan order.
    """
    for v in list(plan.vertices) + list(plan.pair):
        if v in state.removed:
            raise RoutingError(f"plan touches measured vertex {v}")
    log = _run(state, plan.steps, forced, order)
    check = state.is_bell_pair(*plan.pair)
    if not check:
        raise RoutingError(f"plan did not isolate a Bell pair on {plan.pair}")
    return BellRecord(plan.pair, check.vops, len(log), tuple(log))


def canonicalize(state: GraphState, record: BellRecord) -> None:
    """Undo the byproducts so the pair is exactly ``CZ|+>|+>``."""
    from . import clifford as cl

    for v in record.pair:
        state.apply_local_clifford(v, cl.inverse(state.vop[v]))


# -- cut ---------------------------------------------------------------------


def _bfs(state: GraphState, src: int, blocked: set[int] = frozenset()) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for w in state.adj[v]:
            if w not in dist and w not in blocked:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def shortest_path(state: GraphState, a: int, b: int, blocked: set[int] = frozenset()) -> list[int]:
    """BFS shortest path; ties go to the smallest next vertex id."""
    dist = _bfs(state, b, blocked)
    if a not in dist:
        raise RoutingError(f"vertices {a} and {b} are not connected")
    path = [a]
    while path[-1] != b:
        v = path[-1]
        path.append(min(w for w in state.adj[v] if dist.get(w) == dist[v] - 1))
    return path


def _check_request(state: GraphState, req: PairRequest) -> None:
    for v in (req.a, req.b):
        if not 0 <= v < state.n:
            raise RoutingError(f"vertex {v} out of range")
        if v in state.removed:
            raise RoutingError(f"endpoint {v} has already been measured")


def _cut_steps(state: GraphState, path: Sequence[int], keep: set[int] = frozenset()) -> list[Step]:
    on = set(path)
    zs = sorted({w for v in path for w in state.adj[v]} - on - set(keep))
    return [Step(z, "Z") for z in zs] + [Step(v, "Y") for v in path[1:-1]]


def plan_cut(state: GraphState, req: PairRequest) -> MeasurementPlan:
    """Y on the interior of a shortest path, Z on every off-path neighbour."""
    _check_request(state, req)
    path = shortest_path(state, req.a, req.b)
    return MeasurementPlan((req.a, req.b), tuple(_cut_steps(state, path)), "cut", tuple(path))


# -- zipper ------------------------------------------------------------------


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def zigzag_routes(a: Sequence[int], b: Sequence[int]) -> list[tuple[list[tuple[int, int]], int | None]]:
    """Candidate zig-zag routes from ``a`` to ``b`` in grid coordinates.

    Each entry is ``(points, turn)`` where ``turn`` indexes the middle vertex
    of the straight turning portion, or ``None``. The first candidate starts
    along the major axis (x when ``|dx| >= |dy|``).
    """
    dx, dy = b[0] - a[0], b[1] - a[1]
    major = 0 if abs(dx) >= abs(dy) else 1
    dM, dm = (dx, dy) if major == 0 else (dy, dx)
    M = (_sign(dM), 0) if major == 0 else (0, _sign(dM))

    def minor(s):
        return (0, s) if major == 0 else (s, 0)

    def walk(steps):
        pts = [tuple(a)]
        for sx, sy in steps:
            pts.append((pts[-1][0] + sx, pts[-1][1] + sy))
        return pts

    out = []
    gap = abs(dM) - abs(dm)
    if gap in (0, 1):
        m = minor(_sign(dm))
        n = abs(dM) + abs(dm)
        out.append((walk([M if k % 2 == 0 else m for k in range(n)]), None))
        if gap == 0:
            out.append((walk([m if k % 2 == 0 else M for k in range(n)]), None))
        return out
    firsts = [_sign(dm) or 1, -(_sign(dm) or 1)]
    for s1 in firsts:
        for e in (0, 1):
            tot = abs(dM) - 1 - e
            diff = abs(dm) if s1 == (_sign(dm) or 1) else -abs(dm)
            if dm == 0:
                diff = 0
            if (tot + diff) % 2 or tot < abs(diff):
                continue
            v1, v2 = (tot + diff) // 2, (tot - diff) // 2
            steps = [M, minor(s1)] * v1 + [M] + [M, minor(-s1)] * v2 + [M] * e
            out.append((walk(steps), 2 * v1 + 1))
    return out


def _project(
    state: GraphState, ids: Sequence[int]
) -> tuple[list[int], list[int]] | None:
    """Drop measured vertices; return the live path and the jump positions."""
    path, jumps = [], []
    skipped = False
    for v in ids:
        if v in state.removed:
            skipped = True
            continue
        if path and skipped:
            jumps.append(len(path) - 1)
        skipped = False
        path.append(v)
    for u, v in zip(path, path[1:]):
        if v not in state.adj[u]:
            return None
    return path, jumps


def _zipper_steps(path: Sequence[int], zs: Iterable[int]) -> list[Step]:
    return [Step(z, "Z") for z in sorted(zs)] + [
        Step(path[k], "X", path[k + 1]) for k in range(1, len(path) - 1)
    ]


def _search(
    state: GraphState,
    build: Callable[[Iterable[int]], list[Step]],
    candidates: Sequence[set[int]],
    ok: Callable[[GraphState], bool],
) -> list[Step] | None:
    """First candidate Z set that works, greedily pruned, as a step list."""

    def works(zs):
        g = state.copy()
        _run(g, build(zs))
        return ok(g)

    for cand in candidates:
        if not works(cand):
            continue
        zs = sorted(cand)
        for z in sorted(cand, reverse=True):
            trial = [w for w in zs if w != z]
            if works(trial):
                zs = trial
        return build(zs)
    return None


def _around(state: GraphState, vs: Iterable[int], exclude: set[int]) -> set[int]:
    return {w for v in vs for w in state.adj[v] if w not in state.removed} - exclude


def _zipper_candidates(
    state: GraphState, ids: Sequence[int], turn: int | None, exclude: set[int]
) -> tuple[list[int], list[set[int]]] | None:
    proj = _project(state, ids)
    if proj is None:
        return None
    path, jumps = proj
    if set(path[1:-1]) & exclude:
        return None
    off = set(path) | exclude
    k = len(path)
    core = [path[i] for i in {0, 1, k - 2, k - 1} if 0 <= i < k]
    if turn is not None:
        core += [v for v in ids[max(0, turn - 2): turn + 3] if v in set(path)]
    for j in jumps:
        core += path[max(0, j - 1): j + 3]
    return path, [_around(state, core, off), _around(state, path, off)]


def plan_zipper(
    state: GraphState,
    req: PairRequest,
    coords: Mapping[int, Sequence[int]],
    keep: Iterable[int] = (),
) -> MeasurementPlan:
    """Zig-zag X-measurement plan on a (possibly holed) 2D cluster.

    ``coords`` maps auxiliary vertex ids to integer grid coordinates.
    Vertices in ``keep`` (e.g. endpoints of other requests) are never
    measured.
    """
    keep = set(keep) - {req.a, req.b}
    _check_request(state, req)
    at = {tuple(c): v for v, c in coords.items()}
    if req.a not in coords or req.b not in coords:
        raise RoutingError("endpoints have no grid coordinates")

    def ok(g):
        return bool(g.is_bell_pair(req.a, req.b))

    for pts, turn in zigzag_routes(coords[req.a], coords[req.b]):
        ids = [at.get(p) for p in pts]
        if None in ids:
            continue
        found = _zipper_candidates(state, ids, turn, keep)
        if found is None:
            continue
        path, cands = found
        steps = _search(state, lambda zs, p=path: _zipper_steps(p, zs), cands, ok)
        if steps is not None:
            return MeasurementPlan((req.a, req.b), tuple(steps), "zipper", tuple(path))
    raise RoutingError(f"no admissible zig-zag route between {req.a} and {req.b}")


def route_parallel(
    state: GraphState,
    reqs: Sequence[PairRequest],
    coords: Mapping[int, Sequence[int]],
) -> list[tuple[MeasurementPlan, BellRecord]]:
    """Plan and execute zipper requests greedily in order, on ``state`` in place."""
    ends = [v for r in reqs for v in (r.a, r.b)]
    if len(set(ends)) != len(ends):
        raise RoutingError("requests must have pairwise distinct endpoints")
    out = []
    others = set(ends)
    for k, req in enumerate(reqs):
        try:
            plan = plan_zipper(state, req, coords, keep=others)
            out.append((plan, execute_plan(state, plan)))
        except RoutingError as exc:
            raise RoutingError(str(exc), k) from None
    return out


# -- linked trees (GHZ construction) ------------------------------------------


def plan_links(
    state: GraphState,
    links: Sequence[tuple[int, int]],
    coords: Mapping[int, Sequence[int]] | None = None,
) -> tuple[list[Step], list[list[int]]]:
    """Joint plan turning ``links`` into edges of an isolated tree.

    All links are routed on the same snapshot and executed as one round.
    Zig-zag routes are tried first when ``coords`` is given, shortest paths
    with a one-vertex buffer otherwise or as a fallback. Returns the steps
    and the chosen paths.
    """
    terminals = {v for e in links for v in e}

    def ok(g):
        if any(g.adj[t] - terminals for t in terminals):
            return False
        return lc_repair(g, links) is not None

    attempts = []
    if coords is not None:
        attempts.append("zipper")
    attempts.append("cut")
    for mode in attempts:
        paths = _link_paths(state, links, coords, terminals, mode)
        if paths is None:
            continue
        on = set(terminals) | {v for p in paths for v in p}

        def build(zs, paths=paths, mode=mode):
            steps = [Step(z, "Z") for z in sorted(zs)]
            for p in paths:
                if mode == "zipper":
                    steps += [Step(p[k], "X", p[k + 1]) for k in range(1, len(p) - 1)]
                else:
                    steps += [Step(v, "Y") for v in p[1:-1]]
            return steps if mode == "zipper" else _sequential_frame(state, steps)

        full = _around(state, on, on)
        cands = [full]
        if mode == "zipper":
            ends = [v for p in paths for v in (p[:2] + p[-2:])]
            cands = [_around(state, ends, on), full]
        steps = _search(state, build, cands, ok)
        if steps is not None:
            return steps, paths
    raise RoutingError(f"could not realize links {list(links)}")


def _sequential_frame(state: GraphState, steps: Sequence[Step]) -> list[Step]:
    """Re-express steps meant one after another in the current graph frame.

    Each step is translated with the vertex operators it would meet at its
    turn. Earlier outcomes only flip signs of later bases, so the result is
    still a single round of physical measurements.
    """
    g = state.copy()
    out = []
    for s in steps:
        _, phys = g.physical_basis(s.vertex, s.basis)
        basis = next(b for b in "XYZ" if state.physical_basis(s.vertex, b)[1] == phys)
        out.append(Step(s.vertex, basis, s.special_neighbor))
        sn = s.special_neighbor if s.special_neighbor in g.adj[s.vertex] else None
        g.measure_pauli(s.vertex, phys, special_neighbor=sn)
    return out


def lc_repair(state: GraphState, links: Sequence[tuple[int, int]], depth: int = 2) -> list[int] | None:
    """Local complementations turning the link terminals' subgraph into ``links``.

    Jointly measured links can leave a graph that is only LC-equivalent to
    the wanted tree. Searches sequences of at most ``depth`` terminals and
    returns the shortest one, or ``None``.
    """
    terms = sorted({v for e in links for v in e})
    want = frozenset((min(e), max(e)) for e in links)
    start = frozenset(
        (a, b) for a in terms for b in state.adj[a] if a < b and b in terms
    )

    def lc(edges, v):
        nb = sorted({a if b == v else b for a, b in edges if v in (a, b)})
        flip = {(x, y) for i, x in enumerate(nb) for y in nb[i + 1:]}
        return frozenset(edges ^ flip)

    frontier = {start: []}
    seen = {start}
    for _ in range(depth + 1):
        for edges, seq in frontier.items():
            if edges == want:
                return seq
        nxt = {}
        for edges, seq in frontier.items():
            for v in terms:
                e2 = lc(edges, v)
                if e2 not in seen:
                    seen.add(e2)
                    nxt[e2] = seq + [v]
        frontier = nxt
    return None


def settle_links(state: GraphState, links: Sequence[tuple[int, int]]) -> None:
    """Apply :func:`lc_repair` in place; the physical state is unchanged."""
    seq = lc_repair(state, links)
    if seq is None:
        raise RoutingError(f"links {list(links)} are not LC-equivalent to the measured graph")
    for v in seq:
        state.local_complement(v)


def _link_paths(state, links, coords, terminals, mode):
    used: set[int] = set()
    paths = []
    at = {tuple(c): v for v, c in coords.items()} if coords is not None else {}
    for a, b in links:
        blocked = (used | terminals) - {a, b}
        if mode == "cut":
            buffer = {w for v in used for w in state.adj[v]} - {a, b}
            try:
                p = shortest_path(state, a, b, blocked | buffer)
            except RoutingError:
                return None
        else:
            p = None
            for pts, _ in zigzag_routes(coords[a], coords[b]):
                ids = [at.get(q) for q in pts]
                if None in ids:
                    continue
                proj = _project(state, ids)
                if proj is not None and not set(proj[0][1:-1]) & blocked:
                    p = proj[0]
                    break
            if p is None:
                return None
        used |= set(p[1:-1])
        paths.append(p)
    return paths


# -- 3D ----------------------------------------------------------------------


def route_3d(state: GraphState, reqs: Sequence[PairRequest]) -> list[MeasurementPlan]:
    """Cut plans on the current snapshot, one per request (not executed)."""
    plans = []
    for k, req in enumerate(reqs):
        try:
            plans.append(plan_cut(state, req))
        except RoutingError as exc:
            raise RoutingError(str(exc), k) from None
    return plans


def paths_disjoint(plans: Sequence[MeasurementPlan]) -> bool:
    seen: set[int] = set()
    for p in plans:
        if seen & set(p.path):
            return False
        seen |= set(p.path)
    return True


def merge_plans(plans: Sequence[MeasurementPlan]) -> list[Step]:
    """Union of compatible plans, for executing them as one round.

    Raises when a vertex gets two bases or an endpoint of one plan is
    measured by another.
    """
    bases: dict[int, Step] = {}
    ends = {v for p in plans for v in p.pair}
    for p in plans:
        for s in p.steps:
            if s.vertex in ends:
                raise RoutingError(f"vertex {s.vertex} is an endpoint of another plan")
            prev = bases.setdefault(s.vertex, s)
            if prev.basis != s.basis:
                raise RoutingError(f"vertex {s.vertex} measured in {prev.basis} and {s.basis}")
    return sorted(bases.values(), key=lambda s: (s.basis != "Z", s.vertex))


def execute_steps(
    state: GraphState, steps: Sequence[Step], forced: Mapping[int, int] | None = None
) -> list[tuple[int, str, int]]:
    """Run raw steps (graph frame at call time); returns the execution log."""
    for s in steps:
        if s.vertex in state.removed:
            raise RoutingError(f"plan touches measured vertex {s.vertex}")
    return _run(state, steps, forced)


# -- sequential scheme ---------------------------------------------------------


def l_path(coords: Mapping[int, Sequence[int]], a: int, b: int) -> list[int]:
    """Horizontal leg from ``a`` to the column of ``b``, then vertical."""
    at = {tuple(c): v for v, c in coords.items()}
    (xa, ya), (xb, yb) = coords[a], coords[b]
    pts = [(x, ya) for x in _span(xa, xb)] + [(xb, y) for y in _span(ya, yb)[1:]]
    return [at[p] for p in pts]


def _span(u: int, v: int) -> list[int]:
    step = 1 if v >= u else -1
    return list(range(u, v + step, step))


def sequential_two_round(
    lat: Lattice, reqs: Sequence[PairRequest], paths: Sequence[Sequence[int]] | None = None
) -> Schedule:
    """Two-round schedule building Bell pairs on bare auxiliary qubits.

    Round one entangles every path edge except vertical edges at crossings
    and Y-measures the interior of each resulting chain; crossing vertices
    are reset after their readout. Round two adds the deferred vertical
    edges and Y-measures the remaining intermediates.
    """
    coords = lat.grid_coords()
    if lat.kind != "rect_leaves" or coords is None:
        raise RoutingError("the sequential scheme needs a rectangular auxiliary grid")
    ends = [v for r in reqs for v in (r.a, r.b)]
    if len(set(ends)) != len(ends):
        raise RoutingError("two requests share an endpoint")
    for r in reqs:
        r.check_roles(lat)
    paths = [list(p) for p in paths] if paths is not None else [l_path(coords, r.a, r.b) for r in reqs]

    def direction(p, k):
        """'h', 'v', or 'turn' for interior vertex k of path p."""
        (x0, y0), (x1, y1) = coords[p[k - 1]], coords[p[k + 1]]
        if y0 == y1:
            return "h"
        if x0 == x1:
            return "v"
        return "turn"

    use: dict[int, list[tuple[int, str]]] = {}
    for i, p in enumerate(paths):
        for k, v in enumerate(p):
            kind = "end" if k in (0, len(p) - 1) else direction(p, k)
            use.setdefault(v, []).append((i, kind))
    crossing: dict[int, int] = {}
    for v, us in use.items():
        if len(us) == 1:
            continue
        kinds = sorted(k for _, k in us)
        if len(us) != 2 or kinds != ["h", "v"]:
            raise RoutingError(f"paths overlap at vertex {v} without a clean crossing")
        crossing[v] = next(i for i, k in us if k == "v")

    deferred: set[tuple[int, int]] = set()
    for v, i in crossing.items():
        p = paths[i]
        k = p.index(v)
        deferred |= {(min(v, p[k - 1]), max(v, p[k - 1])), (min(v, p[k + 1]), max(v, p[k + 1]))}

    cz1, cz2, m1, m2 = [], [], [], []
    measured1: set[int] = set()
    for i, p in enumerate(paths):
        edges = [(min(u, v), max(u, v)) for u, v in zip(p, p[1:])]
        pieces = [[p[0]]]
        for (u, v), e in zip(zip(p, p[1:]), edges):
            if e in deferred:
                cz2.append(cz(u, v))
                pieces.append([v])
            else:
                cz1.append(cz(u, v))
                pieces[-1].append(v)
        for piece in pieces:
            for v in piece[1:-1]:
                m1.append(measure(v, "Y", reset=v in crossing))
                measured1.add(v)
    for i, p in enumerate(paths):
        if not any((min(u, v), max(u, v)) in deferred for u, v in zip(p, p[1:])):
            continue
        for v in p[1:-1]:
            if v not in measured1 or (v in crossing and crossing[v] == i):
                m2.append(measure(v, "Y"))
    rounds = (
        Round(tuple(cz1), "round1:cz"),
        Round(tuple(m1), "round1:measure"),
        Round(tuple(cz2), "round2:cz"),
        Round(tuple(m2), "round2:measure"),
    )
    sched = Schedule(rounds)
    sched.check(lat)
    return sched


# -- JSON --------------------------------------------------------------------


def dump_requests(reqs: Sequence[PairRequest], strategy: str) -> str:
    return json.dumps({"pairs": [[r.a, r.b] for r in reqs], "strategy": strategy}, sort_keys=True)


def load_requests(text: str) -> tuple[list[PairRequest], str]:
    d = json.loads(text)
    strategy = d.get("strategy", "zipper")
    if strategy not in STRATEGIES:
        raise RoutingError(f"unknown strategy {strategy!r}")
    return [PairRequest(int(a), int(b)) for a, b in d.get("pairs", [])], strategy


def dump_plans(plans: Sequence[MeasurementPlan]) -> str:
    return json.dumps([p.to_dict() for p in plans], sort_keys=True)


def load_plans(text: str) -> list[MeasurementPlan]:
    return [MeasurementPlan.from_dict(d) for d in json.loads(text)]

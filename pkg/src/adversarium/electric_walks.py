"""Electric networks, classical hitting times and the electric quantum walk.

Graphs are undirected with positive conductances.  Effective resistance
and hitting times are computed by grounding the marked set in the weighted
Laplacian.  The quantum walk alternates the diffusions of the two sides of
a bipartite graph and is run through phase detection.
"""

import json
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import BudgetError, InfeasibleError, ParseError
from .functions import Assignment, is_certificate
from .quantum_sim import MAX_DIM, RunResult, phase_detection


class WeightedGraph:
    """Undirected graph on vertices ``0..n-1`` with positive edge weights.

    Parallel edges are merged by adding their weights.  ``labels`` keeps
    the external vertex names; ``part`` is an optional 0/1 bipartition
    (0 marks side A).
    """

    def __init__(self, n, edges, labels=None, part=None):
        self.n = int(n)
        acc = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside the vertex range")
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            acc[key] = acc.get(key, 0.0) + w
        self.edges = [(u, v, w) for (u, v), w in sorted(acc.items())]
        self.labels = list(labels) if labels is not None else list(range(self.n))
        self.part = None if part is None else np.asarray(part, dtype=int)
        if self.part is not None:
            for u, v, _ in self.edges:
                if self.part[u] == self.part[v]:
                    raise ValueError(f"edge ({u}, {v}) inside one side of the bipartition")

    @property
    def total_weight(self):
        return float(sum(w for _, _, w in self.edges))

    def laplacian(self):
        lap = np.zeros((self.n, self.n))
        for u, v, w in self.edges:
            lap[u, u] += w
            lap[v, v] += w
            lap[u, v] -= w
            lap[v, u] -= w
        return lap

    def vertex_weights(self):
        return np.diag(self.laplacian()).copy()

    def reachable(self, sources):
        adj = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen, stack = set(sources), list(sources)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown vertex {label!r}") from None


def read_edge_list(text):
    """Parse ``u v w`` lines (``#`` comments allowed) into a graph; labels are kept as strings."""
    labels, edges = [], []
    pos = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {ln}: expected 'u v w'")
        try:
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"line {ln}: bad weight {parts[2]!r}") from None
        for lab in parts[:2]:
            if lab not in pos:
                pos[lab] = len(labels)
                labels.append(lab)
        edges.append((pos[parts[0]], pos[parts[1]], w))
    try:
        return WeightedGraph(len(labels), edges, labels)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def write_edge_list(g):
    return "".join(f"{g.labels[u]} {g.labels[v]} {w!r}\n" for u, v, w in g.edges)


def read_sidecar(g, text):
    """``(σ, M)`` from JSON ``{"sigma": {label: mass}, "marked": [labels]}``."""
    try:
        d = json.loads(text)
        sigma = np.zeros(g.n)
        for lab, m in d.get("sigma", {}).items():
            sigma[g.index(lab)] = float(m)
        marked = {g.index(lab) for lab in d.get("marked", [])}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad sidecar: {exc}") from exc
    return sigma, marked


def _distribution(g, sigma):
    s = np.zeros(g.n)
    if isinstance(sigma, (int, np.integer)):
        s[int(sigma)] = 1.0
    else:
        s = np.asarray(sigma, dtype=float).reshape(g.n)
    if np.any(s < 0) or abs(s.sum() - 1.0) > 1e-9:
        raise ValueError("initial distribution must be non-negative and sum to 1")
    return s


def _marked(marked):
    if isinstance(marked, (int, np.integer)):
        return {int(marked)}
    return {int(m) for m in marked}


@dataclass(frozen=True)
class FlowAssignment:
    """Flow ``p_{uv}`` on every edge ``(u, v, w)`` of a graph, oriented from ``u`` to ``v``."""

    edges: tuple
    values: np.ndarray

    def energy(self):
        return float(sum(p * p / w for (_, _, w), p in zip(self.edges, self.values)))

    def conservation_residual(self, sigma, marked, n):
        out = np.zeros(n)
        for (u, v, _), p in zip(self.edges, self.values):
            out[u] += p
            out[v] -= p
        free = [u for u in range(n) if u not in marked]
        return float(np.max(np.abs(out[free] - np.asarray(sigma)[free]), initial=0.0))


def _grounded_solve(g, rhs, marked, relevant):
    idx = [u for u in sorted(relevant) if u not in marked]
    x = np.zeros(g.n)
    if idx:
        lap = g.laplacian()
        x[idx] = np.linalg.solve(lap[np.ix_(idx, idx)], rhs[idx])
    return x


def effective_resistance(g, sigma, marked):
    """``(R_{σ,M}, optimal flow)`` from the Laplacian with ``M`` grounded.

    Currents ``σ_u`` enter each vertex and leave through ``M``; the
    potentials ``φ`` solve the grounded system, ``R = Σ σ_u φ_u`` and the
    flow is ``w_{uv}(φ_u - φ_v)``.
    """
    m = _marked(marked)
    if not m:
        raise InfeasibleError("marked set is empty")
    s = _distribution(g, sigma)
    support = set(np.flatnonzero(s))
    relevant = g.reachable(support)
    if support and not relevant & m:
        raise InfeasibleError("no marked vertex is reachable from the initial distribution")
    for comp_start in support:
        if not g.reachable([comp_start]) & m:
            raise InfeasibleError(f"vertex {comp_start} cannot reach the marked set")
    phi = _grounded_solve(g, s, m, relevant)
    flow = FlowAssignment(tuple(g.edges), np.array([w * (phi[u] - phi[v]) for u, v, w in g.edges]))
    return float(s @ phi), flow


def hitting_time(g, sigma, marked):
    """``H_{σ,M}`` from ``H_u = 1 + (1/w_u) Σ_v w_{uv} H_v`` off ``M`` and ``H = 0`` on ``M``."""
    m = _marked(marked)
    if not m:
        raise InfeasibleError("marked set is empty")
    s = _distribution(g, sigma)
    support = set(np.flatnonzero(s))
    relevant = g.reachable(support)
    for u in relevant - m:
        if not g.reachable([u]) & m:
            raise InfeasibleError(f"vertex {u} cannot reach the marked set")
    idx = [u for u in sorted(relevant) if u not in m]
    h = np.zeros(g.n)
    if idx:
        wu = g.vertex_weights()
        p = np.zeros((g.n, g.n))
        for u, v, w in g.edges:
            p[u, v] += w / wu[u]
            p[v, u] += w / wu[v]
        a = np.eye(len(idx)) - p[np.ix_(idx, idx)]
        h[idx] = np.linalg.solve(a, np.ones(len(idx)))
    return float(s @ h)


def stationary(g):
    wu = g.vertex_weights()
    return wu / wu.sum()


def commute_identity_check(g, s, t):
    """``(H_{s,t} + H_{t,s}, 2 W R_{s,t})``."""
    lhs = hitting_time(g, s, t) + hitting_time(g, t, s)
    r, _ = effective_resistance(g, s, t)
    return lhs, 2 * g.total_weight * r


def stationary_identity_check(g, marked):
    """``(H_{π,M}, 2 W R_{π,M})`` for the stationary distribution ``π``."""
    pi = stationary(g)
    return hitting_time(g, pi, marked), 2 * g.total_weight * effective_resistance(g, pi, marked)[0]


def bipartite_double(g, sigma, marked):
    """Double cover on ``V × {0,1}``: vertex ``(u, b)`` has index ``2u + b``.

    Edges join ``(u,0)(v,1)`` and ``(u,1)(v,0)``; ``σ`` moves to side 0 and
    ``M`` is copied to both sides.  Returns ``(graph, σ', M')``.
    """
    if not g.edges:
        raise ValueError("graph has no edges: its double cover is totally disconnected")
    s = _distribution(g, sigma)
    edges = []
    for u, v, w in g.edges:
        edges.append((2 * u, 2 * v + 1, w))
        edges.append((2 * u + 1, 2 * v, w))
    labels = [(lab, b) for lab in g.labels for b in (0, 1)]
    part = [b for _ in range(g.n) for b in (0, 1)]
    s2 = np.zeros(2 * g.n)
    s2[0::2] = s
    m2 = {2 * u + b for u in _marked(marked) for b in (0, 1)}
    return WeightedGraph(2 * g.n, edges, labels, part), s2, m2


def _walk_space(g, sigma):
    support = [u for u in range(g.n) if sigma[u] > 0]
    dim = len(support) + len(g.edges)
    if dim > MAX_DIM:
        raise BudgetError(f"walk dimension {dim} exceeds {MAX_DIM}")
    vidx = {u: i for i, u in enumerate(support)}
    eidx = {k: len(support) + k for k in range(len(g.edges))}
    return support, vidx, eidx, dim


def walk_operator(g, sigma, marked, R, C1=4.0):
    """``R_B R_A`` for a bipartite graph with ``σ`` supported on side A.

    ``D_u`` is the identity on marked ``u`` and otherwise the reflection
    about the complement of ``ψ_u = sqrt(σ_u/(C1 R))|u> + Σ sqrt(w_uv)|uv>``.
    """
    if g.part is None:
        raise ValueError("walk needs a bipartite graph")
    s = _distribution(g, sigma)
    if np.any(s[g.part == 1] > 0):
        raise ValueError("initial distribution must be supported on side A")
    m = _marked(marked)
    support, vidx, eidx, dim = _walk_space(g, s)

    def side(b):
        r = np.eye(dim)
        for u in range(g.n):
            if g.part[u] != b or u in m:
                continue
            psi = np.zeros(dim)
            if u in vidx:
                psi[vidx[u]] = sqrt(s[u] / (C1 * R))
            for k, (a, c, w) in enumerate(g.edges):
                if u in (a, c):
                    psi[eidx[k]] = sqrt(w)
            nrm = psi @ psi
            if nrm > 0:
                r -= 2 * np.outer(psi, psi) / nrm
        return r
    start = np.zeros(dim)
    for u in support:
        start[vidx[u]] = sqrt(s[u])
    return side(1) @ side(0), start


def walk_eigenvector(g, sigma, marked, R, C1=4.0):
    """``sqrt(C1 R) Σ sqrt(σ_u)|u> - Σ p_e/sqrt(w_e)|e>`` from the optimal flow (edges oriented A to B)."""
    s = _distribution(g, sigma)
    _, flow = effective_resistance(g, s, marked)
    support, vidx, eidx, dim = _walk_space(g, s)
    phi = np.zeros(dim)
    for u in support:
        phi[vidx[u]] = sqrt(C1 * R * s[u])
    for k, ((u, v, w), p) in enumerate(zip(g.edges, flow.values)):
        sign = 1.0 if g.part[u] == 0 else -1.0
        phi[eidx[k]] = -sign * p / sqrt(w)
    return phi


def electric_walk_run(g, sigma, marked, R, C=32.0, C1=4.0, rng=None, shots=1):
    """Detect whether ``M`` is non-empty with the electric quantum walk.

    A measurement of the initial distribution first checks for a marked
    vertex (returning 1 if one is seen) and otherwise collapses ``σ`` off
    ``M``.  Phase detection on ``R_B R_A`` at ``δ = 1/(C sqrt(RW))`` then
    decides; phase 0 means a marked vertex is present.  The query count of
    the result is the number of walk steps applied.  ``shots`` repeats the
    execution by resampling both measurements.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    s = _distribution(g, sigma)
    m = _marked(marked)
    hit = float(sum(s[u] for u in m))
    seen = [hit > 0 and rng.random() < hit for _ in range(shots)]
    if all(seen):
        return RunResult(1, 0, 1.0, shots, shots)
    if hit > 0:
        s = s.copy()
        s[list(m)] = 0.0
        s /= s.sum()
    u_op, start = walk_operator(g, s, m, R, C1)
    delta = 1 / (C * sqrt(R * g.total_weight))
    res = phase_detection(lambda v: u_op @ v, delta, start.astype(complex), rng=rng, shots=shots)
    bits = [1 if hit_k else 1 - b for hit_k, b in zip(seen, res.bits)]
    p_accept = hit + (1 - hit) * res.p_zero
    return RunResult(bits[0], res.applications, p_accept, shots, sum(bits))


def lg_walk_graph(lg):
    """The weighted subset graph of a learning graph, bipartitioned by parity of ``|S|``.

    Arcs between the same pair of subsets are merged by adding weights.
    Returns ``(graph, subsets)`` with the empty set at index 0.
    """
    if lg.adaptive:
        raise ValueError("the walk needs constant arc weights")
    subsets = [frozenset()]
    pos = {frozenset(): 0}
    edges = []
    for e, a in enumerate(lg.arcs):
        s, t = lg.vertices[a.src][0], lg.vertices[a.dst][0]
        for x in (s, t):
            if x not in pos:
                pos[x] = len(subsets)
                subsets.append(x)
        if lg.weights[e] > 0:
            edges.append((pos[s], pos[t], lg.weights[e]))
    part = [len(x) % 2 for x in subsets]
    return WeightedGraph(len(subsets), edges, [tuple(sorted(x)) for x in subsets], part), subsets


def lg_marked(subsets, f, z):
    return {i for i, s in enumerate(subsets) if is_certificate(f, Assignment.restrict(z, s))}


def lg_resistance_bound(lg, f):
    """Largest effective resistance from the empty set to the marked subsets over positive inputs."""
    g, subsets = lg_walk_graph(lg)
    return max(effective_resistance(g, 0, lg_marked(subsets, f, x))[0] for x in f.positives)


def lg_as_walk(lg, f, z, R=None, C=32.0, C1=4.0, rng=None, shots=1):
    """Evaluate ``f(z)`` with the electric walk on the subset graph of a learning graph.

    Marked vertices are the subsets carrying a 1-certificate of ``z``.  Each
    walk step costs two queries (computing and uncomputing the loaded
    value), so ``queries = 2 × steps``.
    """
    g, subsets = lg_walk_graph(lg)
    R = R if R is not None else lg_resistance_bound(lg, f)
    marked = lg_marked(subsets, f, z)
    res = electric_walk_run(g, 0, marked, R, C, C1, rng, shots)
    return RunResult(res.bit, 2 * res.queries, res.p_accept, shots, res.accepted)

"""Learning graphs: complexities, conversions, named constructions and dual certificates.

A learning graph is a DAG whose vertices are labelled by subsets of the
input indices (plus an optional tag, so distinct transitions can keep
their internal vertices apart) and whose arcs load one index each.  A flow
assigns, for every member ``M`` of a certificate structure (or, for
adaptive graphs, every positive input), a unit flow from the root to
vertices in ``M``.
"""

import itertools
import json
from dataclasses import dataclass
from math import comb, hypot, sqrt

import numpy as np

from .dual_adversary import DualAdversarySolution
from .errors import InfeasibleError, ParseError
from .functions import (Assignment, CertificateStructure, is_certificate,
                        member_of)

ROOT = (frozenset(), None)


@dataclass(frozen=True)
class Arc:
    src: int
    dst: int
    j: int


class LearningGraph:
    """Vertices ``(S, tag)``, arcs ``(src, dst, j)`` and arc weights.

    ``weights`` is an array of non-negative constants.  An adaptive graph
    additionally has ``weight_fn(e, alpha)`` giving the weight of arc ``e``
    on inputs whose restriction to the arc's source set (sorted order) is
    ``alpha``.
    """

    def __init__(self, n, vertices, arcs, weights, weight_fn=None, stages=None):
        self.n = n
        self.vertices = list(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        if len(self.index) != len(self.vertices):
            raise ValueError("duplicate vertex")
        if not self.vertices or self.vertices[0] != ROOT:
            raise ValueError("vertex 0 must be the root (empty set, no tag)")
        self.arcs = list(arcs)
        for a in self.arcs:
            s, t = self.vertices[a.src][0], self.vertices[a.dst][0]
            if a.j in s or t != s | {a.j} or not 0 <= a.j < n:
                raise ValueError(f"arc {a} does not load one new index")
        self.weights = np.array(weights, dtype=float).reshape(len(self.arcs))
        if np.any(self.weights < 0):
            raise ValueError("arc weights must be non-negative")
        self.weight_fn = weight_fn
        self.stages = dict(stages or {})

    @property
    def adaptive(self):
        return self.weight_fn is not None

    def source_set(self, e):
        return self.vertices[self.arcs[e].src][0]

    def weight(self, e, z=None):
        """Weight of arc ``e``; adaptive graphs need the input ``z``."""
        if self.weight_fn is None:
            return float(self.weights[e])
        if z is None:
            raise ValueError("adaptive weights need an input")
        s = sorted(self.source_set(e))
        return float(self.weight_fn(e, tuple(z[i] for i in s)))

    def weight_vector(self, z=None):
        if self.weight_fn is None:
            return self.weights
        return np.array([self.weight(e, z) for e in range(len(self.arcs))])

    def scaled(self, factor):
        """Multiply every weight by ``factor`` (rebalancing)."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        fn = None
        if self.weight_fn is not None:
            base = self.weight_fn

            def fn(e, alpha):
                return factor * base(e, alpha)
        return LearningGraph(self.n, self.vertices, self.arcs, self.weights * factor, fn, self.stages)

    def to_dict(self):
        if self.adaptive:
            raise ValueError("adaptive weights cannot be serialized")

        def tag(t):
            return None if t is None else repr(t)
        return {"n": self.n, "arcs": [
            {"from": sorted(self.vertices[a.src][0]), "from_tag": tag(self.vertices[a.src][1]),
             "j": a.j, "to_tag": tag(self.vertices[a.dst][1]), "weight": float(w)}
            for a, w in zip(self.arcs, self.weights)]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            b = Builder(int(d["n"]))
            for a in d["arcs"]:
                b.add(a["from"], a["j"], float(a["weight"]), a.get("from_tag"), a.get("to_tag"))
            return b.build()
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad learning graph: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc


class Builder:
    """Incremental construction of a learning graph."""

    def __init__(self, n):
        self.n = n
        self.vertices = [ROOT]
        self.index = {ROOT: 0}
        self.arcs, self.weights = [], []
        self.arc_index = {}
        self.stages = {}

    def vertex(self, s, tag=None):
        v = (frozenset(s), tag)
        if v not in self.index:
            self.index[v] = len(self.vertices)
            self.vertices.append(v)
        return self.index[v]

    def add(self, s, j, weight, src_tag=None, dst_tag=None, stage=None):
        """Add (or return) the arc loading ``j`` from ``(s, src_tag)``."""
        s = frozenset(s)
        src = self.vertex(s, src_tag)
        dst = self.vertex(s | {j}, dst_tag)
        key = (src, dst, j)
        if key in self.arc_index:
            return self.arc_index[key]
        self.arc_index[key] = len(self.arcs)
        self.arcs.append(Arc(src, dst, j))
        self.weights.append(weight)
        if stage is not None:
            self.stages.setdefault(stage, []).append(len(self.arcs) - 1)
        return len(self.arcs) - 1

    def path(self, s, elements, weight, tag, stage=None):
        """Transition loading ``elements`` in order from ``s``; internal vertices carry ``tag``."""
        cur = frozenset(s)
        out = []
        for i, j in enumerate(elements):
            src_tag = None if i == 0 else tag
            dst_tag = None if i == len(elements) - 1 else tag
            out.append(self.add(cur, j, weight, src_tag, dst_tag, stage))
            cur = cur | {j}
        return out

    def build(self, weight_fn=None):
        return LearningGraph(self.n, self.vertices, self.arcs, self.weights, weight_fn, self.stages)


class Flow:
    """Flows on a learning graph.

    ``rule(key)`` returns the flow vector over the arcs.  Keys are member
    generator tuples (``mode="member"``, with ``cert`` listing the members)
    or positive inputs (``mode="input"``, for adaptive graphs).
    """

    def __init__(self, graph, rule, cert=None, mode="member"):
        if mode not in ("member", "input"):
            raise ValueError("flow mode must be 'member' or 'input'")
        self.graph, self.rule, self.cert, self.mode = graph, rule, cert, mode
        self._cache = {}

    def __call__(self, key):
        if key not in self._cache:
            v = np.asarray(self.rule(key), dtype=float).reshape(len(self.graph.arcs))
            v.setflags(write=False)
            self._cache[key] = v
        return self._cache[key]

    def for_input(self, f, x):
        if self.mode == "input":
            return self(tuple(x))
        if self.cert is None:
            raise ValueError("member flows need a certificate structure to match inputs")
        return self(self.cert.members[member_of(self.cert, f, x)])

    def residual(self, key, is_sink):
        """Worst violation of the flow rules for ``key``.

        ``is_sink(S)`` says whether a vertex labelled ``S`` may absorb flow.
        """
        g = self.graph
        p = self(key)
        net = np.zeros(len(g.vertices))
        for e, a in enumerate(g.arcs):
            net[a.src] -= p[e]
            net[a.dst] += p[e]
        worst = abs(net[0] + 1.0)
        for v in range(1, len(g.vertices)):
            if is_sink(g.vertices[v][0]):
                worst = max(worst, -net[v])
            else:
                worst = max(worst, abs(net[v]))
        return float(worst)


def member_sink(cert, member):
    gens = [set(g) for g in member]
    return lambda s: any(g <= s for g in gens)


def input_sink(f, x):
    return lambda s: is_certificate(f, Assignment.restrict(x, s))


def check_flow(flow, keys=None, f=None):
    """Worst flow residual over members (or positive inputs of ``f``)."""
    if flow.mode == "member":
        members = keys if keys is not None else flow.cert.members
        return max((flow.residual(m, member_sink(flow.cert, m)) for m in members), default=0.0)
    xs = keys if keys is not None else f.positives
    return max((flow.residual(tuple(x), input_sink(f, x)) for x in xs), default=0.0)


def _ratio(p, w):
    if np.any((w <= 0) & (np.abs(p) > 0)):
        raise InfeasibleError("flow passes through an arc of zero weight")
    return float(np.sum(np.divide(p * p, w, out=np.zeros_like(p), where=w > 0)))


def complexities(g, flow, f=None, keys=None):
    """``(C_N, C_P, sqrt(C_N C_P))``.

    Without ``f``: ``C_N = Σ w_e`` and ``C_P`` is the maximum of
    ``Σ p_e(M)² / w_e`` over ``keys`` (default: the flow's members).  With
    ``f`` both maxima run over the inputs of ``f``, which is required for
    adaptive graphs.
    """
    if f is None:
        if g.adaptive:
            raise ValueError("adaptive graphs need the function to evaluate weights")
        cn = float(np.sum(g.weights))
        members = keys if keys is not None else flow.cert.members
        cp = max((_ratio(flow(m), g.weights) for m in members), default=0.0)
    else:
        cn = max((float(np.sum(g.weight_vector(y))) for y in f.negatives), default=0.0)
        cp = max((_ratio(flow.for_input(f, x), g.weight_vector(x)) for x in f.positives), default=0.0)
    return cn, cp, sqrt(cn * cp)


def balanced(g, flow, f=None, keys=None):
    """Rescale the weights so that ``C_N = C_P``."""
    cn, cp, _ = complexities(g, flow, f, keys)
    if cn <= 0 or cp <= 0:
        raise InfeasibleError("cannot balance a graph with zero complexity")
    return g.scaled(sqrt(cp / cn))


def stage_complexity(length, speciality):
    """Complexity ``L sqrt(T)`` of a stage with a symmetric flow."""
    if length < 0 or speciality < 0:
        raise ValueError("length and speciality must be non-negative")
    return length * sqrt(speciality)


def merge_duplicates(g, flow):
    """Merge vertices with equal labels, summing weights and flows of parallel arcs."""
    b = Builder(g.n)
    arc_map = []
    for a in g.arcs:
        s = g.vertices[a.src][0]
        arc_map.append(b.add(s, a.j, 0.0))
    m = len(b.arcs)
    merge = np.zeros((m, len(g.arcs)))
    for e, e2 in enumerate(arc_map):
        merge[e2, e] = 1.0
    weights = merge @ g.weights
    fn = None
    if g.adaptive:
        groups = [np.flatnonzero(merge[i]) for i in range(m)]

        def fn(e, alpha):
            return sum(g.weight_fn(int(k), alpha) for k in groups[e])
    b.weights = list(weights)
    g2 = b.build(fn)
    return g2, Flow(g2, lambda key: merge @ flow(key), flow.cert, flow.mode)


# ------------------------------------------------------------ constructions

def trivial_lg(n):
    """A single path loading ``0, ..., n-1`` with unit weights and unit flow."""
    b = Builder(n)
    b.path((), range(n), 1.0, "path", stage="path")
    g = b.build()
    cert = CertificateStructure.trivial(n)
    return g, Flow(g, lambda m: np.ones(n), cert)


def or_lg(n, k=1):
    """Star from the root with unit weights; flow ``1/k`` on arcs to marked singletons.

    With ``k = 1`` this is the OR structure; for larger ``k`` members are the
    ``k``-sets of marked singletons.
    """
    b = Builder(n)
    for j in range(n):
        b.add((), j, 1.0, stage="I")
    g = b.build()
    members = tuple(tuple((j,) for j in c) for c in itertools.combinations(range(n), k))
    cert = CertificateStructure(n, members)

    def rule(m):
        p = np.zeros(n)
        for (j,) in m:
            p[j] = 1.0 / len(m)
        return p
    return g, Flow(g, rule, cert)


def procedure_lg(n, cert, procedure, weights="symmetric"):
    """Learning graph of a randomised loading procedure.

    ``procedure(member)`` yields ``(probability, [S_1, ..., S_d])``: the
    loaded sets after each stage for one choice of the internal randomness.
    Every distinct ``(stage, S_{i-1}, S_i)`` becomes a transition whose
    internal vertices are tagged by it.  The flow through a transition is
    the probability that it is taken.  ``weights`` is ``"symmetric"``
    (weight ``q/sqrt(T)`` per stage, with ``q`` the largest flow value and
    ``T`` the speciality) or a dict ``stage -> weight``.
    """
    b = Builder(n)
    transitions = {}
    runs = {}
    for member in cert.members:
        acc = {}
        for prob, seq in procedure(member):
            prev = frozenset()
            for stage, cur in enumerate(seq):
                cur = frozenset(cur)
                key = (stage, prev, cur)
                if key not in transitions:
                    new = sorted(cur - prev)
                    if not new or not prev <= cur:
                        raise ValueError("each stage must load at least one new element")
                    tag = (stage, tuple(sorted(prev)), tuple(sorted(cur)))
                    transitions[key] = b.path(prev, new, 0.0, tag, stage=stage)
                acc[key] = acc.get(key, 0.0) + prob
                prev = cur
        runs[member] = acc
    meta = {}
    nstages = max((k[0] for k in transitions), default=-1) + 1
    for stage in range(nstages):
        keys = [k for k in transitions if k[0] == stage]
        lengths = {len(k[2] - k[1]) for k in keys}
        used = [sum(1 for k in acc if k[0] == stage) for acc in runs.values()]
        special = max(len(keys) / u for u in used if u)
        qmax = max(v for acc in runs.values() for k, v in acc.items() if k[0] == stage)
        length = max(sum(v * len(k[2] - k[1]) for k, v in acc.items() if k[0] == stage)
                     for acc in runs.values())
        if weights == "symmetric":
            w = qmax / sqrt(special)
        else:
            w = weights[stage]
        for k in keys:
            for e in transitions[k]:
                b.weights[e] = w
        meta[stage] = {"length": length, "speciality": special, "flow": qmax,
                       "lengths": sorted(lengths), "transitions": len(keys)}
    g = b.build()
    g.stages = {s: {"arcs": b.stages.get(s, []), **meta[s]} for s in meta}

    def rule(member):
        p = np.zeros(len(g.arcs))
        for key, v in runs[member].items():
            p[transitions[key]] += v
        return p
    return g, Flow(g, rule, cert)


def ksubset_lg(n, k, r):
    """Learning graph for the ``k``-subset structure.

    Stage I loads ``r`` elements outside the certificate uniformly at random
    (probability ``C(n-k, r)^{-1}`` each); stages II.1..II.k load the
    certificate elements one at a time.  Weights follow the symmetric-flow
    rule ``q / sqrt(T)``.
    """
    if not (1 <= k <= n and 0 <= r <= n - k):
        raise ValueError("ksubset_lg needs 1 <= k <= n and 0 <= r <= n - k")
    cert = CertificateStructure.k_subset(n, k)
    p = 1.0 / comb(n - k, r)

    def procedure(member):
        a = member[0]
        rest = [i for i in range(n) if i not in a]
        for R in itertools.combinations(rest, r):
            seq = [set(R)] if r else []
            cur = set(R)
            for ai in a:
                cur = cur | {ai}
                seq.append(set(cur))
            yield p, seq
    return procedure_lg(n, cert, procedure)


def collision_structure(n):
    """Collision structure on ``n`` (even) variables: one member per perfect matching."""
    if n % 2:
        raise ValueError("collision structure needs an even number of variables")

    def matchings(items):
        if not items:
            yield ()
            return
        a = items[0]
        for i in range(1, len(items)):
            rest = items[1:i] + items[i + 1:]
            for m in matchings(rest):
                yield ((a, items[i]),) + m
    return CertificateStructure(n, tuple(matchings(list(range(n)))))


def collision_lg(n, r, w=None):
    """Transition ``∅ → [r]`` of weight ``w`` (default ``n/r``) then unit arcs ``[r] → [r] ∪ {j}``.

    The flow for a member (a list of pairs) is 1 on the transition and
    ``1/r`` on the arcs loading the partners of ``0, ..., r-1``; it stops at
    ``[r]`` when ``[r]`` already contains a pair.
    """
    if not 1 <= r < n:
        raise ValueError("collision_lg needs 1 <= r < n")
    w = n / r if w is None else w
    b = Builder(n)
    first = b.path((), range(r), w, "I", stage="I")
    base = frozenset(range(r))
    second = {j: b.add(base, j, 1.0, stage="II") for j in range(r, n)}
    g = b.build()
    g.stages = {"I": {"arcs": first, "length": r, "weight": w},
                "II": {"arcs": list(second.values()), "length": 1, "weight": 1.0}}

    def rule(member):
        p = np.zeros(len(g.arcs))
        p[first] = 1.0
        pairs = [set(m) for m in member]
        if any(m <= base for m in pairs):
            return p
        partner = {}
        for a, c in member:
            partner[a], partner[c] = c, a
        for i in range(r):
            if i not in partner:
                raise ValueError(f"member leaves element {i} unmatched")
            p[second[partner[i]]] += 1.0 / r
        return p
    cert = collision_structure(n) if n % 2 == 0 and n <= 10 else None
    return g, Flow(g, rule, cert)


def triangle_structure(nv):
    from .functions import pair_index
    idx = pair_index(nv)
    return CertificateStructure(len(idx), tuple(
        ((idx[(a, b)], idx[(a, c)], idx[(b, c)]),) for a, b, c in itertools.combinations(range(nv), 3)))


def triangle_lg(nv, r1, r2, ell):
    """Six-stage learning graph for the triangle structure on ``nv`` vertices.

    For a triangle ``a < b < c``: (I) pick disjoint ``A, B`` of sizes
    ``r1, r2`` avoiding the triangle and load ``A × B``; (II) add ``a`` to
    ``A`` and load ``a × B``; (III) add ``b`` to ``B`` and load ``b × A``;
    (IV) pick ``ell`` vertices of ``B \\ {b}`` and load their edges to
    ``c``; (V) load ``bc``; (VI) load ``ac``.
    """
    from .functions import pair_index
    if not (r1 >= 1 and r2 >= 1 and r1 + r2 <= nv - 3 and 1 <= ell <= r2):
        raise ValueError("triangle_lg needs r1, r2 >= 1, r1 + r2 <= nv - 3, 1 <= ell <= r2")
    idx = pair_index(nv)
    cert = triangle_structure(nv)
    by_edges = {m[0]: tuple(sorted(t)) for m, t in
                zip(cert.members, itertools.combinations(range(nv), 3))}

    def e(u, v):
        return idx[(min(u, v), max(u, v))]

    choices = comb(nv - 3, r1) * comb(nv - 3 - r1, r2) * comb(r2, ell)

    def procedure(member):
        a, b_, c = by_edges[member[0]]
        rest = [v for v in range(nv) if v not in (a, b_, c)]
        for A in itertools.combinations(rest, r1):
            others = [v for v in rest if v not in A]
            for B in itertools.combinations(others, r2):
                s1 = {e(u, v) for u in A for v in B}
                s2 = s1 | {e(a, v) for v in B}
                s3 = s2 | {e(b_, u) for u in A + (a,)}
                for L in itertools.combinations(B, ell):
                    s4 = s3 | {e(c, v) for v in L}
                    s5 = s4 | {e(b_, c)}
                    s6 = s5 | {e(a, c)}
                    yield 1.0 / choices, [s1, s2, s3, s4, s5, s6]
    return procedure_lg(len(idx), cert, procedure)


def adaptive_threshold_lg(n, k, d):
    """Adaptive learning graph for the promise threshold (0 on ``|z| <= k``, 1 on ``|z| >= k+d``).

    Vertices are the subsets of size at most ``k+1`` with all arcs between
    them.  An arc from ``S`` has weight ``w_|S|`` when ``z_S`` is all ones
    and 0 otherwise, with ``w_i = [C(k,i) C(k+d,i) (k+d-i)]^{-1/2}``.  The
    flow from each all-ones vertex splits evenly over the arcs loading ones.
    """
    if not (k >= 0 and d >= 1 and k + d <= n):
        raise ValueError("adaptive_threshold_lg needs k >= 0, d >= 1, k + d <= n")
    b = Builder(n)
    for size in range(k + 1):
        for s in itertools.combinations(range(n), size):
            for j in range(n):
                if j not in s:
                    b.add(s, j, 0.0, stage=size)
    wi = [(comb(k, i) * comb(k + d, i) * (k + d - i)) ** -0.5 for i in range(k + 1)]
    arcs = b.arcs
    sizes = [len(b.vertices[a.src][0]) for a in arcs]

    def weight_fn(e, alpha):
        return wi[sizes[e]] if all(alpha) else 0.0
    b.weights = [wi[s] for s in sizes]
    g = b.build(weight_fn)
    g.stages = {i: {"weight": wi[i]} for i in range(k + 1)}

    def rule(x):
        ones = [i for i in range(n) if x[i]]
        m = len(ones)
        p = np.zeros(len(g.arcs))
        for e, a in enumerate(g.arcs):
            s = g.vertices[a.src][0]
            if x[a.j] and all(x[i] for i in s):
                i = len(s)
                p[e] = 1.0 / (comb(m, i) * (m - i))
        return p
    return g, Flow(g, rule, None, mode="input")


def counting_sums(n, k, d):
    """The two closed-form sums ``(C_N, C_P)`` of the adaptive threshold graph."""
    wi = [(comb(k, i) * comb(k + d, i) * (k + d - i)) ** -0.5 for i in range(k + 1)]
    cn = sum(comb(k, i) * (n - i) * wi[i] for i in range(k + 1))
    cp = sum(1.0 / (comb(k + d, i) * (k + d - i) * wi[i]) for i in range(k + 1))
    return cn, cp


def speciality_check(g, flow, stage, members=None):
    """Recount the speciality of a procedure stage: transitions / used transitions."""
    arcs = g.stages[stage]["arcs"]
    tags = {}
    for e in arcs:
        a = g.arcs[e]
        tag = g.vertices[a.dst][1] or g.vertices[a.src][1] or (g.vertices[a.src][0], g.vertices[a.dst][0])
        tags.setdefault(tag, []).append(e)
    members = members if members is not None else flow.cert.members
    worst = 0.0
    for m in members:
        p = flow(m)
        used = sum(1 for es in tags.values() if np.any(p[es] > 0))
        if used:
            worst = max(worst, len(tags) / used)
    return worst


# -------------------------------------------------------------- conversions

def _groups(f, s):
    out = {}
    for row, z in enumerate(f.domain):
        out.setdefault(tuple(z[i] for i in s), []).append(row)
    return out


def to_dual_adversary(g, flow, f):
    """Dual adversary solution with objective ``max(C_N, C_P)``.

    For every arc ``e`` loading ``j`` and assignment ``α`` on its source set
    the block ``ψψ*`` is added to ``X_j``, with ``ψ[z] = p_e(z)/sqrt(w_e)``
    on positives and ``sqrt(w_e)`` on negatives that satisfy ``α``.
    """
    pos_flows = {}
    for x in f.positives:
        try:
            pos_flows[x] = flow.for_input(f, x)
        except ValueError as exc:
            raise InfeasibleError(f"no flow for positive input {x}: {exc}") from exc
    cols = [[] for _ in range(f.n)]
    for e, a in enumerate(g.arcs):
        s = sorted(g.vertices[a.src][0])
        if len(s) > 12:
            raise ValueError("arc source too large to enumerate assignments")
        for alpha, rows in _groups(f, s).items():
            w = g.weight(e, _expand(f.n, s, alpha))
            psi = np.zeros(len(f.domain))
            for row in rows:
                z = f.domain[row]
                if f(z):
                    pe = pos_flows[z][e]
                    if pe != 0:
                        if w <= 0:
                            raise InfeasibleError("flow passes through an arc of zero weight")
                        psi[row] = pe / sqrt(w)
                else:
                    psi[row] = sqrt(w)
            if np.any(psi):
                cols[a.j].append(psi)
    factors = tuple(np.array(c).T if c else np.zeros((len(f.domain), 1)) for c in cols)
    return DualAdversarySolution(f, factors)


def _expand(n, s, alpha):
    z = [0] * n
    for i, v in zip(s, alpha):
        z[i] = v
    return z


def to_span_program(g, flow, f):
    """Span program of a learning graph for a Boolean ``f`` with stored witnesses.

    Each vertex ``v`` labelled ``S`` owns orthonormal vectors ``t_{v,α}``,
    ``α ∈ {0,1}^S``; the target is the root vector.  Vectors ``t_{v,α}``
    with ``α`` a 1-certificate are free.  Every arc ``e`` and ``α`` gives
    ``sqrt(w_e) (t_{v,α} - t_{u,α ∪ {j ↦ b}})`` labelled ``(j, b)``.
    Positive witnesses take the available vector with coefficient
    ``p_e/sqrt(w_e)``; negative witnesses are 1 on every ``t_{v,α}`` with
    ``α`` agreeing with the input.
    """
    from .span_programs import SpanProgram, WitnessRecord

    if f.q != 2:
        raise ValueError("learning-graph span programs need a Boolean alphabet")
    coord = {}
    for vi, (s, _) in enumerate(g.vertices):
        for alpha in itertools.product((0, 1), repeat=len(s)):
            coord[(vi, alpha)] = len(coord)
    dim = len(coord)
    order = [sorted(s) for s, _ in g.vertices]
    cols, labels, keys = [], [], []
    for e, a in enumerate(g.arcs):
        s = order[a.src]
        t = order[a.dst]
        pos = t.index(a.j)
        for alpha in itertools.product((0, 1), repeat=len(s)):
            w = g.weight(e, _expand(f.n, s, alpha))
            for b in (0, 1):
                beta = alpha[:pos] + (b,) + alpha[pos:]
                v = np.zeros(dim)
                v[coord[(a.src, alpha)]] += sqrt(w)
                v[coord[(a.dst, beta)]] -= sqrt(w)
                cols.append(v)
                labels.append((a.j, b))
                keys.append((e, alpha, b))
    free = []
    for (vi, alpha), k in coord.items():
        s = order[vi]
        if is_certificate(f, Assignment(tuple(s), alpha)):
            v = np.zeros(dim)
            v[k] = 1.0
            free.append(v)
    V = np.array(cols).T if cols else np.zeros((dim, 0))
    F = np.array(free).T if free else np.zeros((dim, 0))
    target = np.zeros(dim)
    target[coord[(0, ())]] = 1.0
    key_index = {key: i for i, key in enumerate(keys)}
    wit = {}
    for x in f.positives:
        p = flow.for_input(f, x)
        w = np.zeros(len(cols))
        for e, a in enumerate(g.arcs):
            if p[e] != 0:
                alpha = tuple(x[i] for i in order[a.src])
                we = g.weight(e, x)
                if we <= 0:
                    raise InfeasibleError("flow passes through an arc of zero weight")
                w[key_index[(e, alpha, x[a.j])]] = p[e] / sqrt(we)
        wit[x] = WitnessRecord("positive", w, float(w @ w))
    for y in f.negatives:
        wv = np.zeros(dim)
        for (vi, alpha), k in coord.items():
            if all(y[i] == v for i, v in zip(order[vi], alpha)):
                wv[k] = 1.0
        wit[y] = WitnessRecord("negative", wv, float(np.sum((V.T @ wv) ** 2)))
    return SpanProgram(f.n, 2, target, V, tuple(labels), F, wit)


# ------------------------------------------------------ dual certificates

class DualLGCertificate:
    """Sparse ``α_S(M)`` keyed by ``(frozenset S, member index)``; missing entries are 0."""

    def __init__(self, cert, table):
        self.cert = cert
        self.table = {(frozenset(s), int(m)): float(v) for (s, m), v in table.items() if v != 0}

    def value(self, s, m):
        return self.table.get((frozenset(s), m), 0.0)

    def scaled(self, c):
        return DualLGCertificate(self.cert, {k: c * v for k, v in self.table.items()})

    def to_triples(self):
        return [(sum(1 << i for i in s), m, v) for (s, m), v in sorted(
            self.table.items(), key=lambda kv: (sorted(kv[0][0]), kv[0][1]))]

    @classmethod
    def from_triples(cls, cert, triples):
        try:
            return cls(cert, {(frozenset(i for i in range(cert.n) if mask >> i & 1), m): v
                              for mask, m, v in triples})
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad certificate triples: {exc}") from exc


def radial_certificate(cert, radius, scale):
    """``α_S(M) = scale * max(radius - |S|, 0)`` for ``S ∉ M``, 0 otherwise."""
    table = {}
    top = int(np.ceil(radius)) - 1
    for size in range(0, min(top, cert.n) + 1):
        val = scale * max(radius - size, 0.0)
        if val == 0:
            continue
        for s in itertools.combinations(range(cert.n), size):
            for m in range(len(cert)):
                if not cert.contains(m, s):
                    table[(frozenset(s), m)] = val
    return DualLGCertificate(cert, table)


def _power(n, num, den):
    """``n^{num/den}``, exact when the result is an integer."""
    x = n ** (num / den)
    r = round(x)
    return float(r) if r ** den == n ** num else x


def ksubset_certificate(n, k):
    """``C(n,k)^{-1/2} max(n^{k/(k+1)} - |S|, 0)`` on the ``k``-subset structure."""
    return radial_certificate(CertificateStructure.k_subset(n, k), _power(n, k, k + 1), comb(n, k) ** -0.5)


def hidden_shift_certificate(n):
    """``n^{-1/2} max(n^{1/3} - |S|, 0)`` on the hidden-shift structure."""
    return radial_certificate(CertificateStructure.hidden_shift(n), _power(n, 1, 3), n ** -0.5)


def check_dual_certificate(cert, a):
    """``(objective, worst arc constraint)`` of a dual learning-graph certificate.

    The objective is ``sqrt(Σ_M α_∅(M)²)``; the constraint value of the arc
    ``S → S ∪ {j}`` is ``Σ_M (α_S(M) - α_{S∪{j}}(M))²``.  Only arcs touching
    the support are scanned.  Raises ``InfeasibleError`` when ``α`` is
    non-zero on a set inside its member.
    """
    for (s, m), v in a.table.items():
        if cert.contains(m, s):
            raise InfeasibleError(f"alpha is non-zero on {sorted(s)} which lies in member {m}")
    support = {s for s, _ in a.table}
    arcs = set()
    for s in support:
        for j in range(cert.n):
            if j in s:
                arcs.add((s - {j}, j))
            else:
                arcs.add((s, j))
    by_set = {}
    for (s, m), v in a.table.items():
        by_set.setdefault(s, {})[m] = v
    worst = 0.0
    for s, j in arcs:
        lo = by_set.get(s, {})
        hi = by_set.get(s | {j}, {})
        tot = sum((lo.get(m, 0.0) - hi.get(m, 0.0)) ** 2 for m in set(lo) | set(hi))
        worst = max(worst, tot)
    obj = hypot(*(a.value(frozenset(), m) for m in range(len(cert))))
    return obj, worst


def weak_lg_duality_check(g, flow, a, cert, keys=None):
    """Check that the normalized dual objective is at most the primal complexity.

    Returns ``(holds, normalized dual objective, primal sqrt(C_N C_P))``.
    """
    obj, worst = check_dual_certificate(cert, a)
    dual = obj / sqrt(worst) if worst > 0 else (0.0 if obj == 0 else float("inf"))
    _, _, primal = complexities(g, flow, keys=keys if keys is not None else cert.members)
    return dual <= primal + 1e-9, dual, primal

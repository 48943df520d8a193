"""Span programs: evaluation, witnesses, transformations and constructions.

A program lives in ``R^dim`` and has a target ``τ``, input vectors (the
columns of ``vectors``) each carrying one label, and optional free vectors
spanning ``H_free``.  Labels are ``(j, b)`` (available when ``z_j = b``),
``"always"`` or ``"never"``.  The program accepts ``z`` when ``τ`` lies in
the span of the available vectors together with ``H_free``.
"""

import itertools
import json
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import InfeasibleError, ParseError
from .functions import PartialFunction, pair_index
from .numerics import kernel_projector, min_norm_solution, range_basis

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class WitnessRecord:
    """A witness: ``kind`` is ``"positive"`` (coefficients over the input
    vectors) or ``"negative"`` (a vector of the ambient space)."""

    kind: str
    vector: np.ndarray
    size: float

    def __post_init__(self):
        if self.kind not in ("positive", "negative"):
            raise ValueError(f"bad witness kind {self.kind!r}")


def _check_label(lab):
    if lab in ("always", "never"):
        return lab
    if isinstance(lab, (tuple, list)) and len(lab) == 2:
        return (int(lab[0]), int(lab[1]))
    raise ValueError(f"bad label {lab!r}")


@dataclass(frozen=True)
class SpanProgram:
    n: int
    q: int
    target: np.ndarray
    vectors: np.ndarray
    labels: tuple
    free: np.ndarray = None
    witnesses: dict = field(default=None, compare=False)
    basis: tuple = None
    names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        t = np.array(self.target, dtype=float).reshape(-1)
        dim = t.shape[0]
        v = np.array(self.vectors, dtype=float).reshape(dim, -1)
        labels = tuple(_check_label(lab) for lab in self.labels)
        if len(labels) != v.shape[1]:
            raise ValueError(f"{v.shape[1]} input vectors but {len(labels)} labels")
        for lab in labels:
            if isinstance(lab, tuple) and not (0 <= lab[0] < self.n and 0 <= lab[1] < self.q):
                raise ValueError(f"label {lab} outside {self.n} variables over alphabet {self.q}")
        fr = np.zeros((dim, 0)) if self.free is None else np.array(self.free, dtype=float).reshape(dim, -1)
        if not np.any(t):
            raise ValueError("target vector must be non-zero")
        if self.basis is not None and len(self.basis) != dim:
            raise ValueError("basis labels must match the dimension")
        for a in (t, v, fr):
            a.setflags(write=False)
        object.__setattr__(self, "target", t)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "free", fr)
        object.__setattr__(self, "witnesses", dict(self.witnesses or {}))
        if self.basis is not None:
            object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def dim(self):
        return self.target.shape[0]

    @property
    def size(self):
        return self.vectors.shape[1]

    def available(self, z):
        """Boolean mask of the input vectors available on ``z``."""
        if len(z) != self.n:
            raise ValueError(f"input of length {len(z)} for a program on {self.n} variables")
        if any(not 0 <= s < self.q for s in z):
            raise ValueError(f"input {tuple(z)} outside the alphabet of size {self.q}")
        return np.array([lab == "always" or (isinstance(lab, tuple) and z[lab[0]] == lab[1])
                         for lab in self.labels], dtype=bool)

    def _free_projector(self):
        """Projector onto the orthogonal complement of ``H_free``."""
        if self.free.shape[1] == 0:
            return np.eye(self.dim)
        b = range_basis(self.free)
        return np.eye(self.dim) - b @ b.T

    def _positive(self, z):
        mask = self.available(z)
        pi = self._free_projector()
        a = pi @ self.vectors[:, mask]
        w = min_norm_solution(a, pi @ self.target, tol=RESIDUAL_TOL)
        if w is None:
            return None
        full = np.zeros(self.size)
        full[mask] = w
        return full

    def evaluate(self, z):
        """True iff ``τ`` is in the span of the available and free vectors."""
        return self._positive(z) is not None

    def positive_witness(self, z):
        """Minimum-size positive witness; raises ``InfeasibleError`` on a rejected input."""
        w = self._positive(z)
        if w is None:
            raise InfeasibleError(f"program rejects {tuple(z)}: no positive witness")
        return WitnessRecord("positive", w, float(w @ w))

    def negative_witness(self, z, tol=1e-9):
        """Minimum-size negative witness ``w'``.

        Minimizes ``||V* w'||²`` subject to ``<τ, w'> = 1`` and ``w'``
        orthogonal to the available and free vectors; among minimizers the
        least-norm ``w'`` is returned.
        """
        mask = self.available(z)
        blocked = np.hstack([self.vectors[:, mask], self.free])
        if blocked.shape[1]:
            _, s, vh = np.linalg.svd(blocked.T, full_matrices=True)
            rank = int(np.sum(s > tol * max(1.0, s[0]))) if s.size else 0
            basis = vh[rank:].T
        else:
            basis = np.eye(self.dim)
        a = basis.T @ self.target
        if np.linalg.norm(a) <= RESIDUAL_TOL * np.linalg.norm(self.target):
            raise InfeasibleError(f"program accepts {tuple(z)}: no negative witness")
        vb = self.vectors.T @ basis
        m = vb.T @ vb
        kp = kernel_projector(vb, tol)
        ka = kp @ a
        if np.linalg.norm(ka) > 1e-10 * np.linalg.norm(a):
            c = ka / (ka @ ka)
        else:
            mp = np.linalg.pinv(m, rcond=1e-12, hermitian=True)
            c = mp @ a / (a @ mp @ a)
        w = basis @ c
        return WitnessRecord("negative", w, float(np.sum((self.vectors.T @ w) ** 2)))

    def witness(self, z, stored=True):
        if stored and z in self.witnesses:
            return self.witnesses[z]
        return self.positive_witness(z) if self.evaluate(z) else self.negative_witness(z)

    def check_witness(self, z, rec, tol=1e-9):
        """Validate a witness record for ``z``; returns the worst residual."""
        mask = self.available(z)
        if rec.kind == "positive":
            if np.any(np.abs(rec.vector[~mask]) > tol):
                return float(np.max(np.abs(rec.vector[~mask])))
            pi = self._free_projector()
            res = np.linalg.norm(pi @ (self.vectors @ rec.vector - self.target))
            return max(float(res), abs(rec.size - float(rec.vector @ rec.vector)))
        w = rec.vector
        res = abs(float(self.target @ w) - 1.0)
        if mask.any():
            res = max(res, float(np.max(np.abs(self.vectors[:, mask].T @ w))))
        if self.free.shape[1]:
            res = max(res, float(np.max(np.abs(self.free.T @ w))))
        return max(res, abs(rec.size - float(np.sum((self.vectors.T @ w) ** 2))))

    def witness_size(self, f, stored=True):
        """``(W0, W1, sqrt(W0 W1))`` over the domain of ``f``.

        Stored witnesses are used where present, minimal ones elsewhere.
        Raises ``InfeasibleError`` when the program disagrees with ``f``.
        """
        w = {0: 0.0, 1: 0.0}
        for z in f.domain:
            ok = self.evaluate(z)
            if int(ok) != int(bool(f(z))):
                raise InfeasibleError(f"program outputs {int(ok)} on {z}, function value {f(z)}")
            rec = self.witness(z, stored)
            w[int(ok)] = max(w[int(ok)], rec.size)
        return w[0], w[1], float(np.sqrt(w[0] * w[1]))

    def rebalance(self, factor):
        """Scale the target by ``factor``: ``W1`` scales by ``factor²`` and ``W0`` by its inverse."""
        if not factor > 0:
            raise ValueError("rebalance factor must be positive")
        wit = {}
        for z, rec in self.witnesses.items():
            if rec.kind == "positive":
                wit[z] = WitnessRecord("positive", rec.vector * factor, rec.size * factor ** 2)
            else:
                wit[z] = WitnessRecord("negative", rec.vector / factor, rec.size / factor ** 2)
        return SpanProgram(self.n, self.q, self.target * factor, self.vectors, self.labels,
                           self.free, wit, self.basis, self.names)

    def eliminate_free(self):
        """Project target and input vectors onto ``H_free``'s orthogonal complement."""
        pi = self._free_projector()
        t = pi @ self.target
        if np.linalg.norm(t) <= RESIDUAL_TOL * np.linalg.norm(self.target):
            raise InfeasibleError("target lies in the free subspace: the program is constant 1")
        return SpanProgram(self.n, self.q, t, pi @ self.vectors, self.labels, None,
                           self.witnesses, self.basis, self.names)

    def canonicalize(self, f, tol=1e-9):
        """Canonical program over the negatives of ``f`` via ``A = Σ_y e_y w'_y*``.

        Needs a stored negative witness for every negative input.  Positive
        witnesses are kept (minimal ones are stored where missing).
        """
        neg = f.negatives
        missing = [y for y in neg if y not in self.witnesses or self.witnesses[y].kind != "negative"]
        if missing:
            raise InfeasibleError(f"missing stored negative witnesses for {missing[:3]}")
        a = np.array([self.witnesses[y].vector for y in neg]).reshape(len(neg), self.dim)
        target = a @ self.target
        if np.max(np.abs(target - 1.0), initial=0.0) > tol:
            raise InfeasibleError("stored negative witnesses do not satisfy <τ, w'> = 1")
        vectors = a @ self.vectors
        wit = {}
        for k, y in enumerate(neg):
            e = np.zeros(len(neg))
            e[k] = 1.0
            wit[y] = WitnessRecord("negative", e, float(np.sum(vectors[k] ** 2)))
        for x in f.positives:
            rec = self.witnesses.get(x)
            wit[x] = rec if rec is not None and rec.kind == "positive" else self.positive_witness(x)
        return SpanProgram(self.n, self.q, np.ones(len(neg)), vectors, self.labels, None, wit, tuple(neg))

    def is_canonical(self, tol=1e-9):
        """Check the three canonicity conditions against the basis labels."""
        if self.basis is None or self.free.shape[1] and np.any(np.abs(self.free) > tol):
            return False
        if np.max(np.abs(self.target - 1.0)) > tol:
            return False
        for k, y in enumerate(self.basis):
            if np.any(np.abs(self.vectors[k, self.available(y)]) > tol):
                return False
        return True

    def to_dict(self):
        def lab(x):
            return list(x) if isinstance(x, tuple) else x
        d = {"n": self.n, "q": self.q, "dim": self.dim, "target": self.target.tolist(),
             "inputs": [{"vector": self.vectors[:, i].tolist(), "label": lab(self.labels[i])}
                        for i in range(self.size)],
             "free": [self.free[:, i].tolist() for i in range(self.free.shape[1])]}
        if self.basis is not None:
            d["basis"] = [list(b) if isinstance(b, tuple) else b for b in self.basis]
        if self.witnesses:
            d["witnesses"] = [{"input": list(z), "kind": r.kind, "vector": r.vector.tolist(),
                               "size": r.size} for z, r in self.witnesses.items()]
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            dim = int(d["dim"])
            inputs = d["inputs"]
            vecs = np.array([i["vector"] for i in inputs], dtype=float).reshape(len(inputs), dim).T
            labels = tuple(i["label"] for i in inputs)
            free = np.array(d.get("free", []), dtype=float).reshape(-1, dim).T
            wit = {tuple(w["input"]): WitnessRecord(w["kind"], np.array(w["vector"], float), float(w["size"]))
                   for w in d.get("witnesses", [])}
            basis = d.get("basis")
            if basis is not None:
                basis = tuple(tuple(b) if isinstance(b, list) else b for b in basis)
            return cls(int(d["n"]), int(d.get("q", 2)), np.array(d["target"], float), vecs, labels,
                       free, wit, basis)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad span program: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc


def or_program(n):
    """One-dimensional program: ``τ = (1)`` and ``v_j = (1)`` labelled ``(j, 1)``."""
    return SpanProgram(n, 2, [1.0], np.ones((1, n)), tuple((j, 1) for j in range(n)))


def maj3_program():
    """Nine-vector program for the 2-threshold on 3 bits over the negatives 100, 010, 001."""
    h = 1 / np.sqrt(2)
    cols = [(0, h, h), (0, h, 0), (0, 0, h),
            (h, 0, h), (h, 0, 0), (0, 0, h),
            (h, h, 0), (h, 0, 0), (0, h, 0)]
    labels = tuple((j, 1) for j in range(3) for _ in range(3))
    V = np.array(cols).T
    w = h * np.array([1, 1, 0, 1, 1, 0, 0, 0, 0], dtype=float)
    e = np.array([0.0, 0.0, 1.0])
    wit = {(1, 1, 0): WitnessRecord("positive", w, float(w @ w)),
           (0, 0, 1): WitnessRecord("negative", e, float(np.sum((V.T @ e) ** 2)))}
    return SpanProgram(3, 2, np.ones(3), V, labels, None, wit,
                       ((1, 0, 0), (0, 1, 0), (0, 0, 1)))


# ---------------------------------------------------------------- graphs

def graph_input(nv, edges):
    """Adjacency string of a graph over the lexicographic vertex pairs."""
    idx = pair_index(nv)
    z = [0] * len(idx)
    for u, v in edges:
        if u == v:
            raise ValueError("self-loops are not allowed")
        z[idx[tuple(sorted((u, v)))]] = 1
    return tuple(z)


def graph_edges(nv, z):
    return [p for p, k in pair_index(nv).items() if z[k]]


def read_adjacency(text):
    """Parse adjacency-matrix text: first line ``n``, then ``n`` rows of 0/1."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    try:
        nv = int(lines[0][0])
        rows = [[int(c) for c in ln] for ln in lines[1:]]
    except (IndexError, ValueError) as exc:
        raise ParseError(f"bad adjacency text: {exc}") from exc
    if len(rows) != nv or any(len(r) != nv for r in rows):
        raise ParseError(f"expected {nv} rows of {nv} entries")
    a = np.array(rows)
    if np.any((a != 0) & (a != 1)) or np.any(a != a.T) or np.any(np.diag(a)):
        raise ParseError("adjacency matrix must be symmetric 0/1 with zero diagonal")
    return nv, [(i, j) for i, j in itertools.combinations(range(nv), 2) if a[i, j]]


def write_adjacency(nv, edges):
    a = np.zeros((nv, nv), dtype=int)
    for u, v in edges:
        a[u, v] = a[v, u] = 1
    return "\n".join([str(nv)] + [" ".join(map(str, r)) for r in a]) + "\n"


def st_connectivity_function(nv, s, t):
    """Total function on all graphs: 1 iff ``s`` and ``t`` are connected."""
    def rule(z):
        g = nx.Graph()
        g.add_nodes_from(range(nv))
        g.add_edges_from(graph_edges(nv, z))
        return nx.has_path(g, s, t)
    return PartialFunction.from_rule(nv * (nv - 1) // 2, 2, rule)


def st_connectivity_program(nv, s, t):
    """``τ = e_t - e_s`` with one vector ``e_v - e_u`` per vertex pair, labelled by the edge."""
    if s == t or not (0 <= s < nv and 0 <= t < nv):
        raise ValueError("need distinct vertices s, t in range")
    idx = pair_index(nv)
    vecs = np.zeros((nv, len(idx)))
    for (u, v), k in idx.items():
        vecs[v, k], vecs[u, k] = 1.0, -1.0
    tau = np.zeros(nv)
    tau[t], tau[s] = 1.0, -1.0
    return SpanProgram(len(idx), 2, tau, vecs, tuple((k, 1) for k in range(len(idx))))


def st_cut_witness(p, nv, t, edges):
    """Negative witness equal to 1 on the component of ``t`` and 0 elsewhere."""
    g = nx.Graph()
    g.add_nodes_from(range(nv))
    g.add_edges_from(edges)
    w = np.zeros(nv)
    w[list(nx.node_connected_component(g, t))] = 1.0
    return WitnessRecord("negative", w, float(np.sum((p.vectors.T @ w) ** 2)))


class _Basis:
    """Name → coordinate registry used while assembling a program."""

    def __init__(self):
        self.index = {}

    def __call__(self, name):
        if name not in self.index:
            self.index[name] = len(self.index)
        return self.index[name]

    def vec(self, terms):
        v = {}
        for coef, name in terms:
            k = self(name)
            v[k] = v.get(k, 0.0) + coef
        return v


def _assemble(n, basis, target, inputs, free, meta=None):
    dim = len(basis.index)

    def dense(v):
        out = np.zeros(dim)
        for k, c in v.items():
            out[k] = c
        return out
    V = np.array([dense(v) for v, _ in inputs]).T if inputs else np.zeros((dim, 0))
    F = np.array([dense(v) for v in free]).T if free else np.zeros((dim, 0))
    names = sorted(basis.index, key=basis.index.get)
    return SpanProgram(n, 2, dense(target), V, tuple(lab for _, lab in inputs), F, names=tuple(names))


def subdivided_star(legs):
    """The star with leg lengths ``legs``; vertices ``"r"`` and ``(j, i)`` (leg ``j``, depth ``i``)."""
    if not legs or any(l < 1 for l in legs):
        raise ValueError("a subdivided star needs at least one leg of positive length")
    g = nx.Graph()
    g.add_node("r")
    for j, l in enumerate(legs):
        prev = "r"
        for i in range(1, l + 1):
            g.add_edge(prev, (j, i))
            prev = (j, i)
    return g


def star_program(legs, nv, colouring):
    """Paired-edge span program detecting a subdivided star.

    ``legs`` lists the leg lengths, ``colouring[u]`` is a vertex of the
    star (``"r"`` or ``(j, i)``, legs and depths 0-indexed and 1-indexed).
    The input variables are the vertex pairs of an ``nv``-vertex graph.
    """
    d = len(legs)
    idx = pair_index(nv)
    B = _Basis()
    B("s"), B("t")
    col = list(colouring)
    if len(col) != nv:
        raise ValueError("colouring must assign a star vertex to every graph vertex")
    roots = [u for u in range(nv) if col[u] == "r"]

    def e(u, b):
        j, i = col[u]
        return ("e", u, 1 if i == legs[j] else b)

    for u in roots:
        for b in range(d + 1):
            B(("h", u, b))
    free = []
    for u in roots:
        free.append(B.vec([(1, ("h", u, 0)), (-1, "s")]))
        free.append(B.vec([(1, "t"), (-1, ("h", u, d))]))
    inputs = []
    for (a, b), k in idx.items():
        for u, v in ((a, b), (b, a)):
            cu, cv = col[u], col[v]
            if cu == "r" and cv != "r" and cv[1] == 1:
                j = cv[0]
                vec = B.vec([(1, e(v, 1)), (-1, ("h", u, j)), (1, ("h", u, j + 1)), (-1, e(v, 2))])
                inputs.append((vec, (k, 1)))
            elif cu != "r" and cv != "r" and cu[0] == cv[0] and cv[1] == cu[1] + 1:
                inputs.append((B.vec([(1, e(v, 1)), (-1, e(u, 1))]), (k, 1)))
                inputs.append((B.vec([(1, e(u, 2)), (-1, e(v, 2))]), (k, 1)))
    return _assemble(len(idx), B, B.vec([(1, "t"), (-1, "s")]), inputs, free)


def triangle_forest_program(nv, colouring):
    """Span program accepting correctly 3-coloured triangles and rejecting forests."""
    col = list(colouring)
    if len(col) != nv or any(c not in (0, 1, 2) for c in col):
        raise ValueError("colouring must map every vertex to 0, 1 or 2")
    idx = pair_index(nv)
    B = _Basis()
    B("s"), B("t")
    for u in range(nv):
        B(("e", u, col[u]))
        if col[u] == 0:
            B(("e", u, 3))
    free = [B.vec([(1, "t"), (-1, "s"), (1, ("e", u, 0)), (-1, ("e", u, 3))])
            for u in range(nv) if col[u] == 0]
    inputs = []
    for (a, b), k in idx.items():
        for u, v in ((a, b), (b, a)):
            j = col[u]
            if col[v] == (j + 1) % 3:
                head = ("e", v, 3) if j == 2 else ("e", v, j + 1)
                inputs.append((B.vec([(1, head), (-1, ("e", u, j))]), (k, 1)))
    return _assemble(len(idx), B, B.vec([(1, "t"), (-1, "s")]), inputs, free)


def triangle_level_witness(p, nv, colouring, edges):
    """Negative witness of the triangle program on a forest from vertex levels.

    Splits every colour-0 vertex into its ``0`` and ``3`` copies joined by
    an extra edge, roots each component of the resulting forest and sets the
    coefficient of a vertex to the signed count of ``0 → 3`` edges on the
    root path; ``s`` gets 0 and ``t`` gets 1.
    """
    col = list(colouring)
    h = nx.Graph()
    names = {n: k for k, n in enumerate(p.names)}
    for name in p.names:
        if name not in ("s", "t"):
            h.add_node(name)
    for u, v in edges:
        for a, b in ((u, v), (v, u)):
            j = col[a]
            if col[b] == (j + 1) % 3:
                head = ("e", b, 3) if j == 2 else ("e", b, j + 1)
                h.add_edge(("e", a, j), head)
    for u in range(nv):
        if col[u] == 0:
            h.add_edge(("e", u, 0), ("e", u, 3), split=True)
    if not nx.is_forest(h):
        raise InfeasibleError("graph is not a forest after splitting")
    w = np.zeros(p.dim)
    w[names["t"]] = 1.0
    for comp in nx.connected_components(h):
        root = min(comp, key=str)
        level = {root: 0}
        for a, b in nx.bfs_edges(h, root):
            step = 0
            if h.edges[a, b].get("split"):
                step = 1 if a[2] == 0 else -1
            level[b] = level[a] + step
        for node, lv in level.items():
            w[names[node]] = lv
    return WitnessRecord("negative", w, float(np.sum((p.vectors.T @ w) ** 2)))


# ---------------------------------------------------------- K5 traversal

SKEW_K5_SIGNS = {**{tuple(sorted((i, (i + 1) % 5))): 0 for i in range(5)},
                 **{tuple(sorted((i, (i + 2) % 5))): 1 for i in range(5)}}


def skew_product(t_edges, signs):
    """Two-fold skew product: vertices ``(v, i)``, edges ``(u, i)(v, i + s_uv)``."""
    g = nx.Graph()
    for u, v in t_edges:
        key = tuple(sorted((u, v)))
        s = signs.get(key, signs.get((u, v), 0)) % 2
        for i in (0, 1):
            g.add_node((u, i))
            g.add_node((v, i))
            g.add_edge((u, i), (v, (i + s) % 2))
    return g


def euler_circuit(t_edges):
    g = nx.MultiGraph(list(t_edges))
    if not nx.is_eulerian(g):
        raise ValueError("traversal programs need an Eulerian pattern graph")
    return [u for u, _ in nx.eulerian_circuit(g, source=min(g.nodes))]


def traversal_program(t_edges, nv, colouring):
    """Paired-edge traversal program for an Eulerian pattern graph ``T``.

    Follows an Euler circuit ``c_0, ..., c_{m-1}`` of ``T``.  Every graph
    vertex ``u`` gets an in-copy and an out-copy per occurrence of its
    colour on the circuit, tied together by one free vector
    ``(t_{c(u)} - s_{c(u)}) + Σ (out - in)``; each step ``c_i → c_{i+1}``
    has vectors ``in_{i+1}(w) - out_i(u)`` for the edges ``uw`` of ``G``.
    The target is ``Σ_c (t_c - s_c)``.  This generalises the star and
    triangle programs to ``T = K5`` and accepts every correctly coloured
    skew product of ``T``.
    """
    circ = euler_circuit(t_edges)
    m = len(circ)
    col = list(colouring)
    idx = pair_index(nv)
    B = _Basis()
    colours = sorted(set(circ))
    for c in colours:
        B(("s", c)), B(("t", c))
    free = []
    for u in range(nv):
        occ = [i for i in range(m) if circ[i] == col[u]]
        if not occ:
            continue
        terms = [(1, ("t", col[u])), (-1, ("s", col[u]))]
        for i in occ:
            terms += [(1, ("out", u, i)), (-1, ("in", u, i))]
        free.append(B.vec(terms))
    inputs = []
    for (a, b), k in idx.items():
        for u, w in ((a, b), (b, a)):
            for i in range(m):
                if col[u] == circ[i] and col[w] == circ[(i + 1) % m]:
                    inputs.append((B.vec([(1, ("in", w, (i + 1) % m)), (-1, ("out", u, i))]), (k, 1)))
    target = B.vec([term for c in colours for term in ((1, ("t", c)), (-1, ("s", c)))])
    return _assemble(len(idx), B, target, inputs, free)


def relabel_graph(g):
    """Integer relabelling of a graph; returns ``(nv, edges, mapping)``."""
    nodes = sorted(g.nodes, key=str)
    m = {v: i for i, v in enumerate(nodes)}
    return len(nodes), [tuple(sorted((m[u], m[v]))) for u, v in g.edges], m


# ---------------------------------------------------------------- oracles

def has_subgraph(g_edges, nv, t_graph):
    """True iff the graph contains ``t_graph`` as a (not necessarily induced) subgraph."""
    g = nx.Graph()
    g.add_nodes_from(range(nv))
    g.add_edges_from(g_edges)
    gm = nx.algorithms.isomorphism.GraphMatcher(g, t_graph)
    return any(True for _ in gm.subgraph_monomorphisms_iter())


def has_coloured_subgraph(g_edges, colouring, t_graph):
    """True iff some injection ``ι`` with ``c ∘ ι = id`` maps ``T``'s edges to edges."""
    edges = {frozenset(e) for e in g_edges}
    classes = [[u for u, c in enumerate(colouring) if c == v] for v in t_graph.nodes]
    order = list(t_graph.nodes)
    for choice in itertools.product(*classes):
        iota = dict(zip(order, choice))
        if all(frozenset((iota[a], iota[b])) in edges for a, b in t_graph.edges):
            return True
    return False


def has_minor(g_edges, nv, t_graph, budget=2_000_000):
    """Exhaustive minor test: some contraction of ``G`` contains ``T`` as a subgraph.

    Walks all connected vertex partitions of ``G`` by repeated edge
    contraction.  Partitions with fewer edges than ``T`` are not expanded and
    the subgraph test is skipped when too few parts reach ``T``'s minimum
    degree.
    """
    tn, te = t_graph.number_of_nodes(), t_graph.number_of_edges()
    min_deg = min((dg for _, dg in t_graph.degree), default=0)
    start = tuple(range(nv))
    seen = {start}
    stack = [start]
    steps = 0
    while stack:
        part = stack.pop()
        steps += 1
        if steps > budget:
            raise RuntimeError("minor search budget exceeded")
        q = nx.Graph()
        q.add_nodes_from(set(part))
        for u, v in g_edges:
            if part[u] != part[v]:
                q.add_edge(part[u], part[v])
        if q.number_of_edges() < te:
            continue
        if sum(1 for _, dg in q.degree if dg >= min_deg) >= tn:
            gm = nx.algorithms.isomorphism.GraphMatcher(q, t_graph)
            if any(True for _ in gm.subgraph_monomorphisms_iter()):
                return True
        if q.number_of_nodes() <= tn:
            continue
        for a, b in q.edges:
            lo, hi = min(a, b), max(a, b)
            merged = tuple(lo if x == hi else x for x in part)
            if merged not in seen:
                seen.add(merged)
                stack.append(merged)
    return False

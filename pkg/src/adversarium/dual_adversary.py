"""Feasible solutions of the dual adversary program.

A solution stores, for every variable ``j``, a matrix ``factors[j]`` whose
row ``i`` is the vector ``ψ_{j,z}`` of the ``i``-th domain input ``z``.  The
PSD matrices of the program are the Gram matrices
``X_j = factors[j] @ factors[j].T``, so positive semidefiniteness holds by
construction.  Feasibility asks that ``Σ_{j: x_j ≠ y_j} X_j[x, y] = 1`` for
every positive ``x`` and negative ``y``; a *relaxed* solution only needs
``>= 1`` and bounds the positive-weight adversary instead.
"""

import itertools
import json
from dataclasses import dataclass
from math import comb, sqrt

import numpy as np

from .errors import InfeasibleError, ParseError
from .functions import PartialFunction, make_named, _minimal_certificates, certificate_complexity
from .numerics import psd_factor


@dataclass(frozen=True)
class DualAdversarySolution:
    f: PartialFunction
    factors: tuple
    relaxed: bool = False

    def __post_init__(self):
        if len(self.factors) != self.f.n:
            raise ValueError(f"need one factor matrix per variable, got {len(self.factors)}")
        fs = []
        for F in self.factors:
            F = np.array(F, dtype=float)
            if F.ndim == 1:
                F = F.reshape(-1, 1)
            if F.shape[0] != len(self.f.domain):
                raise ValueError("factor matrix must have one row per domain input")
            F.setflags(write=False)
            fs.append(F)
        object.__setattr__(self, "factors", tuple(fs))

    def gram(self, j):
        F = self.factors[j]
        return F @ F.T

    def psi(self, j, z):
        return self.factors[j][self.f.index(z)]

    def diagonal_sums(self):
        """``Σ_j X_j[z, z]`` for every domain input ``z`` (domain order)."""
        return sum(np.sum(F * F, axis=1) for F in self.factors)

    def objective(self):
        """``max_z Σ_j ||ψ_{j,z}||²``."""
        return float(np.max(self.diagonal_sums(), initial=0.0))

    def constraint_sums(self):
        """Matrix of ``Σ_{j: x_j ≠ y_j} X_j[x, y]`` over positives × negatives."""
        pos = [self.f.index(x) for x in self.f.positives]
        neg = [self.f.index(y) for y in self.f.negatives]
        dom = np.array(self.f.domain, dtype=int).reshape(len(self.f.domain), self.f.n)
        total = np.zeros((len(pos), len(neg)))
        for j, F in enumerate(self.factors):
            mask = dom[pos, j][:, None] != dom[neg, j][None, :]
            total += (F[pos] @ F[neg].T) * mask
        return total

    def check_feasible(self, tol=1e-9):
        """Return ``(feasible, worst violation)`` over all positive/negative pairs."""
        s = self.constraint_sums()
        if s.size == 0:
            return True, 0.0
        if self.relaxed:
            worst = float(np.max(np.maximum(1.0 - s, 0.0)))
        else:
            worst = float(np.max(np.abs(s - 1.0)))
        return worst <= tol, worst

    def to_dict(self):
        return {"n": self.f.n, "q": self.f.q, "domain_hash": self.f.domain_hash(),
                "relaxed": self.relaxed, "factors": [F.tolist() for F in self.factors]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d, f):
        try:
            if d["domain_hash"] != f.domain_hash() or d["n"] != f.n or d["q"] != f.q:
                raise ParseError("solution does not belong to the given function")
            return cls(f, tuple(np.array(F, dtype=float).reshape(len(f.domain), -1)
                                for F in d["factors"]), bool(d.get("relaxed", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad dual solution: {exc}") from exc

    @classmethod
    def from_json(cls, text, f):
        try:
            return cls.from_dict(json.loads(text), f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc


def from_gram(f, grams, relaxed=False):
    """Build a solution from explicit PSD matrices ``X_j`` (domain order)."""
    return DualAdversarySolution(f, tuple(psd_factor(np.asarray(X, float)) for X in grams), relaxed)


def threshold_dual(k, n):
    """Optimal dual solution for the ``k``-threshold function on ``n`` bits.

    Uses ``X_j = B_j ∘ D`` with ``D`` the rank-1 block matrix taking values
    ``sqrt((n-k+1)/k)``, 1 and ``sqrt(k/(n-k+1))`` and
    ``B_j[a, b] = 1 / (k - #{i != j : a'_i = b'_i = 1})`` on the inputs used
    by ``X_j``.  Here ``x'`` keeps only the first ``k`` ones of a positive
    input and ``y'`` keeps only the first ``n-k+1`` zeros of a negative one;
    an input is used by ``X_j`` when its truncation is 1 (positive) or 0
    (negative) at ``j``.  Objective ``sqrt(k(n-k+1))``.
    """
    if not 1 <= k <= n:
        raise ValueError("threshold_dual needs 1 <= k <= n")
    f = make_named("threshold", k=k, n=n)

    def trunc(z):
        if sum(z) >= k:
            out, seen = [], 0
            for s in z:
                out.append(1 if s and seen < k else 0)
                seen += s
            return tuple(out)
        out, seen = [], 0
        for s in z:
            out.append(0 if not s and seen < n - k + 1 else 1)
            seen += 1 - s
        return tuple(out)

    primes = [np.array(trunc(z)) for z in f.domain]
    pos = np.array(f.values, dtype=bool)
    dpos, dneg = sqrt((n - k + 1) / k), sqrt(k / (n - k + 1))
    grams = []
    for j in range(n):
        used = np.array([(p[j] == 1) == bool(v) for p, v in zip(primes, f.values)])
        P = np.array(primes)
        P_other = np.delete(P, j, axis=1)
        common = P_other @ P_other.T
        both = np.outer(used, used)
        B = np.divide(1.0, k - common, out=np.zeros(common.shape), where=both)
        D = np.where(pos[:, None] & pos[None, :], dpos,
                     np.where(~pos[:, None] & ~pos[None, :], dneg, 1.0))
        X = B * D * both
        grams.append(X)
    return from_gram(f, grams)


def decision_tree_dual(f, tree):
    """Dual solution read off a decision tree that computes ``f`` on its domain.

    ``tree`` is either a leaf value (0 or 1) or a pair ``(j, children)`` with
    ``children`` a dict mapping each symbol to a subtree.  ``ψ_{j,z}`` is the
    indicator of the tree nodes querying ``j`` that ``z`` reaches, so the
    objective is the depth of the tree on the domain.  Raises
    ``InfeasibleError`` when the tree disagrees with ``f``.
    """
    nodes = []

    def collect(t):
        if isinstance(t, tuple):
            nodes.append(t)
            for child in t[1].values():
                collect(child)
    collect(tree)
    node_id = {id(t): i for i, t in enumerate(nodes)}
    factors = [np.zeros((len(f.domain), len(nodes))) for _ in range(f.n)]
    for row, z in enumerate(f.domain):
        t = tree
        while isinstance(t, tuple):
            j, children = t
            factors[j][row, node_id[id(t)]] = 1.0
            if z[j] not in children:
                raise InfeasibleError(f"tree has no branch for symbol {z[j]} at variable {j}")
            t = children[z[j]]
        if t != f(z):
            raise InfeasibleError(f"tree outputs {t} on {z}, function value is {f(z)}")
    return DualAdversarySolution(f, tuple(factors))


def ambainis_decision_tree():
    """Depth-3 tree for the monotone-sequence function.

    Query bits 1 and 3 (0-indexed 0 and 2); if they agree query bit 2,
    otherwise bit 4.
    """
    def third(a):
        children = {}
        for c in (0, 1):
            if a == c:
                children[c] = (1, {v: int(v == a) for v in (0, 1)})
            else:
                children[c] = (3, {v: int(v == c) for v in (0, 1)})
        return (2, children)
    return (0, {a: third(a) for a in (0, 1)})


def ambainis_positive_dual():
    """Rank-1 relaxed dual: ``ψ_j[z] = 1`` when ``j`` is sensitive for ``z``, else 1/2."""
    f = make_named("ambainis")
    factors = []
    for j in range(4):
        col = []
        for z in f.domain:
            flipped = tuple(1 - s if i == j else s for i, s in enumerate(z))
            col.append(1.0 if f(flipped) != f(z) else 0.5)
        factors.append(np.array(col).reshape(-1, 1))
    return DualAdversarySolution(f, tuple(factors), relaxed=True)


def barrier_solution(f, variant, eps=None):
    """Relaxed dual solutions behind the positive-adversary barriers.

    ``variant`` is ``"a"`` (objective ``sqrt(n min(C0, C1))``), ``"b"``
    (total ``f``, objective ``sqrt(C0 C1)``) or ``"c"`` (inputs of
    different value at Hamming distance at least ``eps * n``, objective
    ``1/eps``).  When ``eps`` is omitted for ``"c"`` it is computed from ``f``.
    The rank-1 vectors use fourth roots of the certificate-size ratios so
    that the diagonal sums attain the stated objectives.
    """
    n = f.n
    if variant == "c":
        pos, neg = f.positives, f.negatives
        dist = min((sum(a != b for a, b in zip(x, y)) for x in pos for y in neg), default=n)
        if eps is None:
            eps = dist / n
        if dist < eps * n - 1e-12:
            raise ValueError(f"inputs of different value at distance {dist} < eps*n = {eps * n}")
        col = np.full((len(f.domain), 1), 1.0 / sqrt(eps * n))
        return DualAdversarySolution(f, tuple(col.copy() for _ in range(n)), relaxed=True)
    if variant not in ("a", "b"):
        raise ValueError(f"unknown barrier variant {variant!r}")
    if variant == "b" and not f.is_total:
        raise ValueError("variant b needs a total function")
    _, c0, c1 = certificate_complexity(f)
    small = 1 if c1 <= c0 else 0
    c_small, c_big = (c1, c0) if small == 1 else (c0, c1)
    factors = [np.zeros((len(f.domain), 1)) for _ in range(n)]
    for row, z in enumerate(f.domain):
        v = f(z)
        cert = min(_minimal_certificates(f, z, v), key=len)
        for j in range(n):
            if variant == "a":
                if v == small and j in cert:
                    factors[j][row, 0] = (n / c_small) ** 0.25
                elif v != small:
                    factors[j][row, 0] = (c_small / n) ** 0.25
            else:
                if j in cert:
                    factors[j][row, 0] = (c_big / c_small) ** 0.25 if v == small else (c_small / c_big) ** 0.25
    return DualAdversarySolution(f, tuple(factors), relaxed=True)


def independence_number(nv, edges):
    adj = {frozenset(e) for e in edges}
    for size in range(nv, 0, -1):
        for s in itertools.combinations(range(nv), size):
            if not any(frozenset(p) in adj for p in itertools.combinations(s, 2)):
                return size
    return 0


@dataclass(frozen=True)
class CollisionArc:
    """One arc of the graph-collision construction with its factor vectors."""

    stage: str
    source: tuple
    randomness: tuple
    j: int
    factors: np.ndarray


class GraphCollisionDual(object):
    """The graph-collision dual solution together with its per-arc data."""

    def __init__(self, nv, edges, r, alpha, p, solution, arcs, certificate):
        self.nv, self.edges, self.r = nv, edges, r
        self.alpha, self.p = alpha, p
        self.solution = solution
        self.arcs = arcs
        self.certificate = certificate

    def arc_entry(self, arc, x, y):
        f = self.solution.f
        return float(arc.factors[f.index(x)] @ arc.factors[f.index(y)])

    def taken_arcs(self, x, R):
        """The arcs loading ``t_1, ..., t_r, a, b`` for positive ``x`` and randomness ``R``."""
        a, b = self.certificate(x)
        if set(R) & {a, b}:
            raise ValueError("randomness is not consistent with the input")
        out = []
        for arc in self.arcs:
            if arc.stage == "I" and arc.randomness == tuple(R):
                out.append(arc)
            elif arc.stage == "II.1" and arc.source == tuple(R) and arc.j == a:
                out.append(arc)
            elif arc.stage == "II.2" and arc.source == tuple(sorted(set(R) | {a})) and arc.j == b:
                out.append(arc)
        return out

    def collision_sum(self, x, y, R):
        """``Σ_{j: x_j ≠ y_j} Z_j[x, y]`` over the arcs taken for ``(x, R)``."""
        return sum(self.arc_entry(arc, x, y) for arc in self.taken_arcs(x, R) if x[arc.j] != y[arc.j])


def graph_collision_dual(nv, edges, r, weights=None):
    """Dual solution for graph collision on the promise of at most ``2α`` ones.

    ``α`` is the independence number of the graph.  The loading procedure
    draws an ``r``-subset ``R`` avoiding the chosen certificate edge
    ``{a, b}`` (the lexicographically first edge with both ends 1), loads
    ``R`` in increasing order and then ``a`` and ``b``.  Every arc carries
    the block matrix ``p(ψψ* + φφ*)`` per assignment of its loaded set, with
    stage weights ``(w0, w1)``: stage I ``(sqrt(α/n), sqrt(n/α))``, stage II.1
    ``(0, 1/sqrt(n))``, stage II.2 ``(0, sqrt(r)/n)`` (``1/n`` when ``r = 0``).  ``weights`` may
    override the stage weights as a dict ``stage -> (w0, w1)``.
    """
    edges = sorted(tuple(sorted(e)) for e in edges)
    n = nv
    if not 0 <= r <= n - 2:
        raise ValueError("need 0 <= r <= n - 2")
    alpha = independence_number(nv, edges)
    f = make_named("graph_collision", nv=nv, edges=edges, max_weight=2 * alpha)
    p = 1.0 / comb(n - 2, r)
    w = {"I": (sqrt(alpha / n), sqrt(n / alpha)), "II.1": (0.0, 1 / sqrt(n)), "II.2": (0.0, sqrt(max(r, 1)) / n)}
    if weights:
        w.update(weights)

    def certificate(x):
        for a, b in edges:
            if x[a] and x[b]:
                return a, b
        raise ValueError(f"{x} is not a positive input")

    dom = f.domain
    cert_of = {z: certificate(z) for z in dom if f(z)}

    def satisfies_arc(z, stage, source, R, j):
        a, b = cert_of[z]
        if stage == "I":
            return not set(R) & {a, b}
        if stage == "II.1":
            return j == a and not set(source) & {a, b}
        return j == b and a in source and b not in source and not (set(source) - {a}) & {a, b}

    arcs = []

    def make_arc(stage, source, R, j):
        w0, w1 = w[stage]
        cols = []
        groups = {}
        for row, z in enumerate(dom):
            groups.setdefault(tuple(z[i] for i in source), []).append(row)
        for rows in groups.values():
            psi = np.zeros(len(dom))
            phi = np.zeros(len(dom))
            for row in rows:
                z = dom[row]
                if f(z):
                    if not satisfies_arc(z, stage, source, R, j):
                        continue
                    if z[j] == 1:
                        psi[row] = 1 / sqrt(w1)
                    elif w0 > 0:
                        phi[row] = 1 / sqrt(w0)
                else:
                    if z[j] == 0:
                        psi[row] = sqrt(w1)
                    else:
                        phi[row] = sqrt(w0)
            for v in (psi, phi):
                if np.any(v):
                    cols.append(sqrt(p) * v)
        F = np.array(cols).T if cols else np.zeros((len(dom), 0))
        arcs.append(CollisionArc(stage, tuple(source), tuple(R), j, F))

    for R in itertools.combinations(range(n), r):
        for ell in range(r):
            make_arc("I", R[:ell], R, R[ell])
    for S in itertools.combinations(range(n), r):
        for j in range(n):
            if j not in S:
                make_arc("II.1", S, (), j)
    for S in itertools.combinations(range(n), r + 1):
        for j in range(n):
            if j not in S:
                make_arc("II.2", S, (), j)

    factors = []
    for j in range(n):
        blocks = [a.factors for a in arcs if a.j == j and a.factors.shape[1]]
        factors.append(np.hstack(blocks) if blocks else np.zeros((len(dom), 1)))
    sol = DualAdversarySolution(f, tuple(factors))
    return GraphCollisionDual(nv, edges, r, alpha, p, sol, arcs, certificate)


def to_span_program(s):
    """Canonical span program of a Boolean dual solution.

    The ambient basis is indexed by the negative inputs and the target is
    the all-ones vector.  For every ``j``, ``b`` and coordinate ``i`` of
    ``ψ_j`` there is an input vector labelled ``(j, b)`` with entries
    ``ψ_{j,y}[i]`` at negatives ``y`` with ``y_j ≠ b``.  The positive witness
    of ``x`` is ``ψ_{j,x}`` on the ``(j, x_j)`` blocks and the negative
    witness of ``y`` is ``e_y``; both are stored on the program.
    """
    from .span_programs import SpanProgram, WitnessRecord

    f = s.f
    if f.q != 2:
        raise ValueError("to_span_program needs a Boolean alphabet")
    neg = f.negatives
    cols, labels, owner = [], [], []
    for j, F in enumerate(s.factors):
        for b in (0, 1):
            for i in range(F.shape[1]):
                cols.append([F[f.index(y), i] if y[j] != b else 0.0 for y in neg])
                labels.append((j, b))
                owner.append((j, b, i))
    V = np.array(cols).T if cols else np.zeros((len(neg), 0))
    witnesses = {}
    for x in f.positives:
        w = np.array([s.factors[j][f.index(x), i] if b == x[j] else 0.0 for j, b, i in owner])
        witnesses[x] = WitnessRecord("positive", w, float(w @ w))
    for k, y in enumerate(neg):
        e = np.zeros(len(neg))
        e[k] = 1.0
        witnesses[y] = WitnessRecord("negative", e, float(np.sum((V.T @ e) ** 2)))
    return SpanProgram(f.n, 2, np.ones(len(neg)), V, tuple(labels), witnesses=witnesses,
                       basis=tuple(neg))


def from_canonical_span_program(p, f, tol=1e-9):
    """Dual solution of a canonical span program over the negatives of ``f``.

    ``ψ_{j,x}`` is the stored positive witness of ``x`` restricted to the
    ``(j, x_j)`` block and ``ψ_{j,y}`` collects the entries ``v_i[y]`` of the
    inputs labelled ``(j, ·)``.  Raises ``InfeasibleError`` when the program
    is not canonical or a positive witness is missing.
    """
    neg = f.negatives
    if p.basis is None or tuple(p.basis) != tuple(neg):
        raise InfeasibleError("program basis is not the negative inputs of f")
    if not p.is_canonical(tol):
        raise InfeasibleError("span program is not canonical")
    groups = {j: [i for i, lab in enumerate(p.labels) if isinstance(lab, tuple) and lab[0] == j]
              for j in range(f.n)}
    factors = []
    for j in range(f.n):
        idx = groups[j]
        F = np.zeros((len(f.domain), max(len(idx), 1)))
        for row, z in enumerate(f.domain):
            if f(z):
                rec = p.witnesses.get(z) if p.witnesses else None
                if rec is None:
                    rec = p.positive_witness(z)
                w = rec.vector
                for c, i in enumerate(idx):
                    if p.labels[i][1] == z[j]:
                        F[row, c] = w[i]
            else:
                k = neg.index(z)
                for c, i in enumerate(idx):
                    F[row, c] = p.vectors[k, i]
        factors.append(F)
    return DualAdversarySolution(f, tuple(factors))

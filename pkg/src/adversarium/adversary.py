"""Primal adversary matrices and the boundedly-generated lower bound.

An adversary matrix is stored in the bipartite layout: rows are labelled by
positive inputs and columns by negative inputs.  Row labels may repeat,
which is how the stacked matrices of the boundedly-generated construction
are represented (one row block per certificate-structure member).
"""

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .errors import InfeasibleError, ParseError, BudgetError
from .functions import PartialFunction
from .numerics import as_matrix, spectral_norm


@dataclass(frozen=True)
class AdversaryMatrix:
    """A real matrix with rows labelled by positive and columns by negative inputs."""

    f: PartialFunction
    m: np.ndarray
    rows: tuple = None
    cols: tuple = None

    def __post_init__(self):
        rows = tuple(self.f.positives) if self.rows is None else tuple(map(tuple, self.rows))
        cols = tuple(self.f.negatives) if self.cols is None else tuple(map(tuple, self.cols))
        m = np.array(as_matrix(self.m), dtype=float)
        if m.shape != (len(rows), len(cols)):
            raise ValueError(f"matrix shape {m.shape} does not match labels {len(rows)}x{len(cols)}")
        for x in rows:
            if x not in self.f or self.f(x) != 1:
                raise ValueError(f"row label {x} is not a positive input")
        for y in cols:
            if y not in self.f or self.f(y) != 0:
                raise ValueError(f"column label {y} is not a negative input")
        m.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "m", m)

    def norm(self):
        return spectral_norm(self.m)

    def to_dict(self):
        return {"n": self.f.n, "q": self.f.q, "rows": [list(r) for r in self.rows],
                "cols": [list(c) for c in self.cols], "matrix": self.m.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d, f=None):
        """Rebuild from a dict; when ``f`` is omitted it is read off the labels.

        The reconstructed function is the partial function defined on the
        row labels (value 1) and column labels (value 0) only.
        """
        try:
            rows = [tuple(r) for r in d["rows"]]
            cols = [tuple(c) for c in d["cols"]]
            m = np.array(d["matrix"], dtype=float).reshape(len(rows), len(cols))
            if f is None:
                dom = list(dict.fromkeys(rows)) + list(dict.fromkeys(cols))
                vals = [1] * len(dict.fromkeys(rows)) + [0] * len(dict.fromkeys(cols))
                f = PartialFunction(int(d["n"]), int(d["q"]), tuple(dom), tuple(vals))
            return cls(f, m, tuple(rows), tuple(cols))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad adversary matrix: {exc}") from exc

    @classmethod
    def from_json(cls, text, f=None):
        try:
            return cls.from_dict(json.loads(text), f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc


@dataclass(frozen=True)
class DeltaMask:
    j: int
    m: np.ndarray


def _labels(target):
    if isinstance(target, AdversaryMatrix):
        return target.f.n, target.rows, target.cols
    if isinstance(target, PartialFunction):
        return target.n, tuple(target.positives), tuple(target.negatives)
    raise TypeError("expected a PartialFunction or an AdversaryMatrix")


def delta_mask(target, j):
    """0/1 mask with entry 1 where the row and column inputs differ at ``j``."""
    n, rows, cols = _labels(target)
    if not 0 <= j < n:
        raise ValueError(f"variable index {j} outside [0, {n})")
    r = np.array([x[j] for x in rows]).reshape(-1, 1)
    c = np.array([y[j] for y in cols]).reshape(1, -1)
    return DeltaMask(j, (r != c).astype(float).reshape(len(rows), len(cols)))


class AdvReport(NamedTuple):
    norm: float
    masked_norms: tuple
    ratio: float
    infinite: bool


def adv_report(g):
    """Norm of ``g``, the norms of every ``g ∘ Δ_j`` and their ratio."""
    top = g.norm()
    if top == 0.0:
        raise ValueError("adversary matrix is zero")
    masked = tuple(spectral_norm(g.m * delta_mask(g, j).m) for j in range(g.f.n))
    worst = max(masked, default=0.0)
    if worst == 0.0:
        return AdvReport(top, masked, float("inf"), True)
    return AdvReport(top, masked, top / worst, False)


def adv_ratio(g):
    """The adversary value ``||Γ|| / max_j ||Γ ∘ Δ_j||`` (``inf`` when unbounded)."""
    return adv_report(g).ratio


def relation_adversary(f, X, Y, rel):
    """0/1 matrix with ones on related pairs of ``X × Y``, in the full layout."""
    X = {tuple(x) for x in X}
    Y = {tuple(y) for y in Y}
    for x in X:
        if x not in f or f(x) != 1:
            raise ValueError(f"{x} is not a positive input")
    for y in Y:
        if y not in f or f(y) != 0:
            raise ValueError(f"{y} is not a negative input")
    rows, cols = f.positives, f.negatives
    m = np.zeros((len(rows), len(cols)))
    for a, x in enumerate(rows):
        if x not in X:
            continue
        for b, y in enumerate(cols):
            if y in Y and rel(x, y):
                m[a, b] = 1.0
    return AdversaryMatrix(f, m)


def hamming(x, y):
    return sum(1 for a, b in zip(x, y) if a != b)


def hamming_one(x, y):
    return hamming(x, y) == 1


AMBAINIS_ROWS = ("0000", "0001", "0011", "0111", "1111", "1110", "1100", "1000")
AMBAINIS_COLS = ("0010", "0101", "1011", "0110", "1101", "1010", "0100", "1001")
_AMBAINIS_PATTERN = ("acdbdcab", "bacdbdca", "abacdbdc", "cabacdbd",
                     "dcabacdb", "bdcabacd", "dbdcabac", "cdbdcaba")


def ambainis_gamma(a, b, c, d):
    """The symmetric adversary matrix of the 4-bit monotone-sequence function."""
    from .functions import make_named

    f = make_named("ambainis")
    val = {"a": a, "b": b, "c": c, "d": d}
    rows = tuple(tuple(int(ch) for ch in r) for r in AMBAINIS_ROWS)
    cols = tuple(tuple(int(ch) for ch in r) for r in AMBAINIS_COLS)
    m = np.array([[val[ch] for ch in line] for line in _AMBAINIS_PATTERN], dtype=float)
    return AdversaryMatrix(f, m, rows, cols)


def mathias_bound(a, b, c, tol=1e-12):
    """Upper bound on ``||a||`` from a factorization ``a = b ∘ c``.

    Returns the maximum of ``r_i(b) c_j(c)`` over entries with ``a[i,j] != 0``,
    where ``r_i`` is the Euclidean norm of row ``i`` and ``c_j`` that of
    column ``j``.
    """
    a, b, c = as_matrix(a), as_matrix(b), as_matrix(c)
    if not a.shape == b.shape == c.shape:
        raise ValueError("shape mismatch")
    if np.max(np.abs(a - b * c), initial=0.0) > tol:
        raise ValueError("a is not the entrywise product of b and c")
    r = np.linalg.norm(b, axis=1)
    cn = np.linalg.norm(c, axis=0)
    support = np.abs(a) > 0
    if not support.any():
        return 0.0
    return float(np.max(np.outer(r, cn)[support]))


def hadamard_delta_check(a, mask):
    """Return ``(||a ∘ Δ||, 2 ||a||)``; the first never exceeds the second."""
    a = as_matrix(a)
    m = mask.m if isinstance(mask, DeltaMask) else as_matrix(mask)
    if m.shape != a.shape:
        raise ValueError("shape mismatch")
    return spectral_norm(a * m), 2 * spectral_norm(a)


@dataclass(frozen=True)
class OrthogonalArray:
    k: int
    q: int
    rows: tuple

    def is_valid(self):
        """Every position, with the others fixed, has ``|T| / q^(k-1)`` completions."""
        if self.k == 0:
            return True
        target = len(self.rows) / self.q ** (self.k - 1)
        for i in range(self.k):
            counts = {}
            for r in self.rows:
                key = r[:i] + r[i + 1:]
                counts[key] = counts.get(key, 0) + 1
            if len(counts) != self.q ** (self.k - 1) or any(v != target for v in counts.values()):
                return False
        return True


def modular_sum_array(k, q):
    """All ``k``-tuples over ``[q]`` summing to 0 modulo ``q``."""
    if k < 1 or q < 2:
        raise ValueError("modular_sum_array needs k >= 1 and q >= 2")
    rows = tuple(t for t in itertools.product(range(q), repeat=k) if sum(t) % q == 0)
    return OrthogonalArray(k, q, rows)


def e_projectors(q):
    """``E_0`` (all entries 1/q) and ``E_1 = I - E_0``."""
    e0 = np.full((q, q), 1.0 / q)
    return e0, np.eye(q) - e0


def e_subset(n, q, s, flip=None):
    """Tensor product ``E_S``; position ``flip`` carries ``-E_0`` instead of ``E_1``."""
    e0, e1 = e_projectors(q)
    factors = []
    for j in range(n):
        if j in s:
            factors.append(-e0 if j == flip else e1)
        else:
            factors.append(e0)
    return reduce(np.kron, factors, np.ones((1, 1)))


class BoundedGamma(NamedTuple):
    gamma: AdversaryMatrix
    gamma_prime: list
    gamma_hat: list
    y_size: int


def sum_problem(cert, q):
    """The function whose positives are ``∪_M X_M`` and negatives lie outside all ``X_M``.

    ``X_M`` holds the inputs whose restriction to the single generator of
    ``M`` sums to 0 modulo ``q``.  For the ``k``-subset structure this is
    the ``k``-sum function.
    """
    gens = [m[0] for m in cert.members]
    return PartialFunction.from_rule(
        cert.n, q, lambda z: any(sum(z[i] for i in g) % q == 0 for g in gens))


def boundedly_generated_gamma(cert, q, alpha, tol=1e-9, max_dim=4096):
    """Adversary matrix for the sum problem of a boundedly-generated structure.

    ``alpha`` is a dual learning-graph certificate for ``cert``; it must
    satisfy the arc constraints with value at most 1.  Returns the stacked
    matrix ``Γ`` (rows ``(M, x)`` for ``x ∈ X_M``, columns the negatives),
    and for every ``j`` the matrix ``Γ'`` obtained by replacing ``E_1`` with
    ``-E_0`` at position ``j`` (restricted to the same rows and columns, so
    ``Γ ∘ Δ_j = Γ' ∘ Δ_j``) together with its unrestricted-column version
    ``Γ̂'``.
    """
    from .learning_graphs import check_dual_certificate

    n = cert.n
    for m in cert.members:
        if len(m) != 1:
            raise ValueError("every member needs exactly one generator")
    if q < 2 * len(cert):
        raise ValueError("need q >= 2|cert| so that half the inputs are negative")
    if q ** n > max_dim:
        raise BudgetError(f"dimension q^n = {q ** n} exceeds {max_dim}")
    _, worst = check_dual_certificate(cert, alpha)
    if worst > 1 + tol:
        raise InfeasibleError(f"alpha violates the arc constraints (max {worst:.6g} > 1)")

    f = sum_problem(cert, q)
    allz = list(itertools.product(range(q), repeat=n))
    zindex = {z: i for i, z in enumerate(allz)}
    ys = f.negatives
    ycols = [zindex[y] for y in ys]
    subsets = [frozenset(s) for r in range(n + 1) for s in itertools.combinations(range(n), r)]
    es = {s: e_subset(n, q, s) for s in subsets}

    blocks, hats, primes, labels = [], [[] for _ in range(n)], [[] for _ in range(n)], []
    for mi, member in enumerate(cert.members):
        gen = member[0]
        xm = [z for z in allz if sum(z[i] for i in gen) % q == 0]
        xrows = [zindex[x] for x in xm]
        scale = np.sqrt(q ** n / len(xm))
        gt = sum((alpha.value(s, mi) * es[s] for s in subsets if alpha.value(s, mi) != 0),
                 np.zeros((q ** n, q ** n)))
        blocks.append(scale * gt[np.ix_(xrows, ycols)])
        labels.extend(xm)
        for j in range(n):
            gp = np.zeros((q ** n, q ** n))
            for s in subsets:
                v = alpha.value(s, mi)
                if v != 0:
                    gp += v * e_subset(n, q, s, flip=j)
            hat = scale * gp[xrows, :]
            hats[j].append(hat)
            primes[j].append(hat[:, ycols])
    gamma = AdversaryMatrix(f, np.vstack(blocks), tuple(labels), tuple(ys))
    return BoundedGamma(gamma, [np.vstack(p) for p in primes], [np.vstack(h) for h in hats], len(ys))

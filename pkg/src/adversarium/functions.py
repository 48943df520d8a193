"""Explicit finite partial functions and certificate machinery.

A ``PartialFunction`` is a table ``f: [q]^n ⊇ D -> {0,1}`` listing its
domain explicitly, so promise problems carry exactly their promised inputs.
Variables and symbols are 0-indexed throughout.
"""

import csv
import hashlib
import io
import itertools
import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import ParseError


@dataclass(frozen=True)
class Assignment:
    """Values fixed on a subset of the variables."""

    support: tuple
    values: tuple

    def __post_init__(self):
        if len(self.support) != len(self.values):
            raise ValueError("support and values differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support has repeated indices")

    @classmethod
    def of(cls, mapping):
        items = sorted(dict(mapping).items())
        return cls(tuple(i for i, _ in items), tuple(v for _, v in items))

    @classmethod
    def restrict(cls, z, support):
        s = tuple(sorted(support))
        return cls(s, tuple(z[i] for i in s))

    def satisfied_by(self, z):
        return all(z[i] == v for i, v in zip(self.support, self.values))


@dataclass(frozen=True)
class PartialFunction:
    n: int
    q: int
    domain: tuple
    values: tuple
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        dom = tuple(tuple(int(s) for s in z) for z in self.domain)
        vals = tuple(int(v) for v in self.values)
        if len(dom) != len(vals):
            raise ValueError("domain and values differ in length")
        for z in dom:
            if len(z) != self.n:
                raise ValueError(f"input {z} does not have length {self.n}")
            if any(s < 0 or s >= self.q for s in z):
                raise ValueError(f"input {z} has a symbol outside [0, {self.q})")
        if any(v not in (0, 1) for v in vals):
            raise ValueError("values must be 0 or 1")
        index = {z: i for i, z in enumerate(dom)}
        if len(index) != len(dom):
            raise ValueError("domain has repeated inputs")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_rule(cls, n, q, rule, domain=None):
        """Tabulate ``rule`` over ``domain`` (default: all of ``[q]^n``).

        ``rule`` may return ``None`` to exclude an input from the domain.
        """
        dom, vals = [], []
        source = itertools.product(range(q), repeat=n) if domain is None else domain
        for z in source:
            v = rule(tuple(z))
            if v is None:
                continue
            dom.append(tuple(z))
            vals.append(int(bool(v)))
        return cls(n, q, tuple(dom), tuple(vals))

    def __call__(self, z):
        return self.values[self._index[tuple(z)]]

    def __contains__(self, z):
        return tuple(z) in self._index

    def __len__(self):
        return len(self.domain)

    def index(self, z):
        return self._index[tuple(z)]

    def preimage(self, b):
        return [z for z, v in zip(self.domain, self.values) if v == b]

    @property
    def positives(self):
        return self.preimage(1)

    @property
    def negatives(self):
        return self.preimage(0)

    @property
    def is_total(self):
        return len(self.domain) == self.q ** self.n

    def domain_hash(self):
        payload = json.dumps([self.n, self.q, self.domain, self.values], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_dict(self):
        return {
            "n": self.n,
            "q": self.q,
            "rows": [{"input": list(z), "value": v} for z, v in zip(self.domain, self.values)],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        try:
            rows = d["rows"]
            return cls(int(d["n"]), int(d["q"]), tuple(tuple(r["input"]) for r in rows),
                       tuple(r["value"] for r in rows))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad function table: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
        return cls.from_dict(d)

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.n)] + ["f"])
        for z, v in zip(self.domain, self.values):
            w.writerow(list(z) + [v])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text, q=None):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ParseError("empty CSV")
        header = [h.strip() for h in rows[0]]
        n = len(header) - 1
        if header != [f"x{i + 1}" for i in range(n)] + ["f"]:
            raise ParseError(f"CSV header must be x1,...,xn,f; got {','.join(header)}")
        try:
            body = [[int(c) for c in r] for r in rows[1:] if r]
        except ValueError as exc:
            raise ParseError(f"non-integer CSV entry: {exc}") from exc
        if any(len(r) != n + 1 for r in body):
            raise ParseError("ragged CSV row")
        if q is None:
            q = max([max(r[:n], default=0) for r in body] + [1]) + 1
        try:
            return cls(n, q, tuple(tuple(r[:n]) for r in body), tuple(r[n] for r in body))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc


def pair_index(nv):
    """Lexicographic variable index of the vertex pairs ``(i, j)``, ``i < j``."""
    return {p: k for k, p in enumerate(itertools.combinations(range(nv), 2))}


def _weight(z):
    return sum(1 for s in z if s)


def _is_permutation_free(z):
    return len(set(z)) == len(z)


def _collision_rule(z):
    counts = {}
    for s in z:
        counts[s] = counts.get(s, 0) + 1
    c = set(counts.values())
    if c == {1}:
        return 0
    if c == {2}:
        return 1
    return None


def make_named(family, **params):
    """Build a named problem family as an explicit table.

    Families and their parameters:

    ``threshold`` (k, n); ``or`` (n); ``and`` (n); ``parity`` (n);
    ``identity`` (no parameters, one bit); ``ambainis``;
    ``promise_threshold`` (n, k, d): 0 on weight <= k, 1 on weight >= k + d;
    ``element_distinctness`` (n, q); ``k_distinctness`` (n, q, k);
    ``k_sum`` (n, q, k); ``collision`` (n, q); ``set_equality`` (n, q);
    ``hidden_shift`` (n, q); ``graph_collision`` (nv, edges, optional
    max_weight); ``triangle`` (nv).
    """
    p = dict(params)

    def need(*names):
        for name in names:
            if name not in p:
                raise ValueError(f"family {family!r} needs parameter {name!r}")
        return [p[name] for name in names]

    if family == "threshold":
        k, n = need("k", "n")
        if not 0 <= k <= n or n < 1:
            raise ValueError("threshold needs 0 <= k <= n, n >= 1")
        return PartialFunction.from_rule(n, 2, lambda z: _weight(z) >= k)
    if family == "or":
        (n,) = need("n")
        return make_named("threshold", k=1, n=n)
    if family == "and":
        (n,) = need("n")
        return make_named("threshold", k=n, n=n)
    if family == "parity":
        (n,) = need("n")
        if n < 1:
            raise ValueError("parity needs n >= 1")
        return PartialFunction.from_rule(n, 2, lambda z: _weight(z) % 2)
    if family == "identity":
        return PartialFunction(1, 2, ((0,), (1,)), (0, 1))
    if family == "ambainis":
        def monotone(z):
            return all(a <= b for a, b in zip(z, z[1:])) or all(a >= b for a, b in zip(z, z[1:]))
        return PartialFunction.from_rule(4, 2, monotone)
    if family == "promise_threshold":
        n, k, d = need("n", "k", "d")
        if not (0 <= k and d >= 1 and k + d <= n):
            raise ValueError("promise_threshold needs k >= 0, d >= 1, k + d <= n")
        return PartialFunction.from_rule(
            n, 2, lambda z: 0 if _weight(z) <= k else (1 if _weight(z) >= k + d else None))
    if family in ("element_distinctness", "k_distinctness"):
        n, q = need("n", "q")
        k = p.get("k", 2) if family == "k_distinctness" else 2
        if family == "k_distinctness":
            need("k")
        if k < 2 or n < 1 or q < 1:
            raise ValueError("distinctness needs k >= 2, n >= 1, q >= 1")

        def rule(z):
            counts = {}
            for s in z:
                counts[s] = counts.get(s, 0) + 1
            return max(counts.values()) >= k
        return PartialFunction.from_rule(n, q, rule)
    if family == "k_sum":
        n, q, k = need("n", "q", "k")
        if not 1 <= k <= n or q < 2:
            raise ValueError("k_sum needs 1 <= k <= n, q >= 2")

        def rule(z):
            return any(sum(z[i] for i in c) % q == 0 for c in itertools.combinations(range(n), k))
        return PartialFunction.from_rule(n, q, rule)
    if family in ("collision", "set_equality", "hidden_shift"):
        n, q = need("n", "q")
        if n < 2 or n % 2:
            raise ValueError(f"{family} needs an even n >= 2")
        if q < n:
            raise ValueError(f"{family} needs q >= n so that 1-to-1 inputs exist")
        m = n // 2

        def rule(z):
            v = _collision_rule(z)
            if v != 1 or family == "collision":
                return v
            first, second = z[:m], z[m:]
            if not _is_permutation_free(first) or set(first) != set(second):
                return None
            if family == "set_equality":
                return 1
            for d in range(m):
                if all(second[(i + d) % m] == first[i] for i in range(m)):
                    return 1
            return None
        return PartialFunction.from_rule(n, q, rule)
    if family == "graph_collision":
        nv, edges = need("nv", "edges")
        edges = [tuple(sorted(e)) for e in edges]
        max_weight = p.get("max_weight")

        def rule(z):
            if max_weight is not None and _weight(z) > max_weight:
                return None
            return any(z[a] and z[b] for a, b in edges)
        return PartialFunction.from_rule(nv, 2, rule)
    if family == "triangle":
        (nv,) = need("nv")
        if nv < 1:
            raise ValueError("triangle needs nv >= 1")
        idx = pair_index(nv)
        n = len(idx)

        def rule(z):
            return any(z[idx[(a, b)]] and z[idx[(a, c)]] and z[idx[(b, c)]]
                       for a, b, c in itertools.combinations(range(nv), 3))
        return PartialFunction.from_rule(n, 2, rule)
    raise ValueError(f"unknown family {family!r}")


def _consistent(f, assignment):
    return [i for i, z in enumerate(f.domain) if assignment.satisfied_by(z)]


def is_certificate(f, a, b=1):
    """True iff every domain input satisfying ``a`` has value ``b``."""
    if any(i < 0 or i >= f.n for i in a.support):
        raise ValueError("assignment support outside [0, n)")
    return all(f.values[i] == b for i in _consistent(f, a))


def _subsets_by_size(n):
    for size in range(n + 1):
        yield from itertools.combinations(range(n), size)


def _minimal_certificates(f, z, b):
    """Inclusion-minimal sets ``S`` with ``z_S`` a ``b``-certificate."""
    dom = np.array(f.domain, dtype=int).reshape(len(f.domain), f.n)
    vals = np.array(f.values)
    zz = np.array(z)
    found = []
    for s in _subsets_by_size(f.n):
        if any(set(g) <= set(s) for g in found):
            continue
        cols = list(s)
        mask = np.all(dom[:, cols] == zz[cols], axis=1) if cols else np.ones(len(vals), bool)
        if np.all(vals[mask] == b):
            found.append(s)
    return found


def _smallest_certificate_size(dom, vals, z, b):
    n = dom.shape[1]
    zz = np.array(z)
    for size in range(n + 1):
        for s in itertools.combinations(range(n), size):
            cols = list(s)
            mask = np.all(dom[:, cols] == zz[cols], axis=1) if cols else np.ones(len(vals), bool)
            if np.all(vals[mask] == b):
                return size
    return n


def certificate_complexity(f):
    """Return ``(C, C0, C1)``; ``C_b`` is 0 when ``f`` has no ``b``-input."""
    dom = np.array(f.domain, dtype=int).reshape(len(f.domain), f.n)
    vals = np.array(f.values)
    best = {0: 0, 1: 0}
    for z, v in zip(f.domain, f.values):
        best[v] = max(best[v], _smallest_certificate_size(dom, vals, z, v))
    return max(best.values()), best[0], best[1]


def block_sensitivity(f):
    """Maximum number of disjoint sensitive blocks over domain inputs.

    A block ``B`` is sensitive for ``z`` when some domain input agrees with
    ``z`` outside ``B``, differs from ``z`` at every position of ``B`` and
    has a different value (the standard definition for partial functions;
    for Boolean alphabets it is the usual flip of ``B``).
    """
    n = f.n
    best = 0
    for z, v in zip(f.domain, f.values):
        sensitive = set()
        for y in f.domain:
            if f(y) == v:
                continue
            mask = sum(1 << i for i in range(n) if y[i] != z[i])
            sensitive.add(mask)
        # only minimal blocks matter for a disjoint packing
        masks = sorted(sensitive, key=lambda m: bin(m).count("1"))
        minimal = []
        for m in masks:
            if not any((o & m) == o for o in minimal):
                minimal.append(m)
        best = max(best, _max_disjoint(minimal))
    return best


def _max_disjoint(masks):
    best = 0

    def go(start, used, count):
        nonlocal best
        best = max(best, count)
        for i in range(start, len(masks)):
            if not masks[i] & used:
                go(i + 1, used | masks[i], count + 1)
    go(0, 0, 0)
    return best


@dataclass(frozen=True)
class CertificateStructure:
    """A family of upward-closed subset collections, one per member.

    Each member is stored by its generators, an antichain of subsets of
    ``[n]``; the member is the upward closure of the generators.
    """

    n: int
    members: tuple

    def __post_init__(self):
        mem = tuple(tuple(sorted({tuple(sorted(g)) for g in m})) for m in self.members)
        for m in mem:
            if not m:
                raise ValueError("member with no generators")
            for g in m:
                if any(i < 0 or i >= self.n for i in g):
                    raise ValueError("generator outside [0, n)")
            for g, h in itertools.permutations(m, 2):
                if set(g) <= set(h):
                    raise ValueError("generators of a member do not form an antichain")
        object.__setattr__(self, "members", mem)

    def contains(self, member, s):
        """True iff the subset ``s`` belongs to member number ``member``."""
        ss = set(s)
        return any(set(g) <= ss for g in self.members[member])

    def canonical(self):
        return tuple(sorted(self.members))

    def __len__(self):
        return len(self.members)

    @classmethod
    def k_subset(cls, n, k):
        return cls(n, tuple((c,) for c in itertools.combinations(range(n), k)))

    @classmethod
    def trivial(cls, n):
        """The structure with a single member, the whole set ``[n]``."""
        return cls(n, ((tuple(range(n)),),))

    @classmethod
    def hidden_shift(cls, n):
        """Hidden-shift structure on ``n`` variables (``n`` even).

        Member ``d`` contains ``S`` iff ``S`` holds ``i`` and
        ``m + (i + d) mod m`` for some ``i < m = n/2``.
        """
        if n % 2:
            raise ValueError("hidden-shift structure needs an even n")
        m = n // 2
        return cls(n, tuple(tuple((i, m + (i + d) % m) for i in range(m)) for d in range(m)))


def certificate_structure_of(f):
    """The certificate structure of ``f``: the minimal ``M(f, x)``, x positive.

    ``M(f, x)`` is the collection of ``S`` such that ``x_S`` is a
    1-certificate; it is upward closed and generated by the minimal such
    ``S``.  Members that strictly contain another member are discarded.
    """
    pos = f.positives
    if not pos:
        raise ValueError("function has no positive input")
    gens = {tuple(_minimal_certificates(f, x, 1)) for x in pos}

    def closure_contains(a, b):
        # member generated by ``a`` contains the member generated by ``b``
        return all(any(set(g) <= set(h) for g in a) for h in b)

    minimal = [g for g in gens if not any(h != g and closure_contains(g, h) for h in gens)]
    return CertificateStructure(f.n, tuple(sorted(minimal)))


def member_of(cert, f, x):
    """Index of a member ``M`` of ``cert`` that certifies the positive ``x``.

    That is, every ``S`` in ``M`` makes ``x_S`` a 1-certificate of ``f``;
    the member with the lexicographically first generator list is chosen.
    Raises ``ValueError`` when no member fits.
    """
    mins = _minimal_certificates(f, x, 1)
    for idx, member in enumerate(cert.members):
        if all(any(set(h) <= set(g) for h in mins) for g in member):
            return idx
    raise ValueError(f"no member of the structure certifies input {x}")


def ksubset_count(n, k):
    return comb(n, k)

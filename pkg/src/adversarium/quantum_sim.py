"""Dense statevector simulation of query algorithms.

Every input-dependent operation goes through a ``QueryOracle`` that counts
its applications.  The walks built from span programs and dual adversary
solutions are run through phase detection with an explicit counter
register, so the reported query counts are those of the algorithm as
written.
"""

import json
from dataclasses import dataclass
from math import asin, ceil, log2, pi, sqrt

import numpy as np
from scipy.linalg import schur
from scipy.optimize import linear_sum_assignment

from .errors import BudgetError, InfeasibleError
from .numerics import kernel_projector, range_basis

MAX_DIM = 2000
NORM_TOL = 1e-9


@dataclass
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(a)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"state has norm {nrm}, expected 1")
        self.amplitudes = a

    @property
    def dim(self):
        return self.amplitudes.size

    @classmethod
    def basis(cls, dim, i=0):
        a = np.zeros(dim, dtype=complex)
        a[i] = 1.0
        return cls(a)

    @classmethod
    def uniform(cls, dim):
        return cls(np.full(dim, 1 / sqrt(dim), dtype=complex))

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def measure(self, rng):
        p = self.probabilities()
        return int(rng.choice(self.dim, p=p / p.sum()))


class QueryOracle:
    """Access to an input string ``z`` that counts every application.

    ``phase`` applies ``|j> -> (-1)^{z_j} |j>`` (Boolean inputs),
    ``register`` applies ``|j, b> -> |j, b + z_j mod q>`` and its inverse,
    and ``make_reflection`` wraps an input-dependent reflection whose every
    use costs ``cost`` queries (compute and uncompute).
    """

    def __init__(self, z, q=2):
        self._z = tuple(int(s) for s in z)
        if any(not 0 <= s < q for s in self._z):
            raise ValueError(f"input {self._z} outside the alphabet of size {q}")
        self.n, self.q = len(self._z), q
        self.queries = 0

    def classical(self, j):
        self.queries += 1
        return self._z[j]

    def phase(self, v):
        if self.q != 2:
            raise ValueError("phase oracle needs a Boolean input")
        self.queries += 1
        return np.asarray(v) * (1 - 2 * np.array(self._z))

    def register(self, v, inverse=False):
        m = np.asarray(v).reshape(self.n, self.q)
        self.queries += 1
        sign = -1 if inverse else 1
        return np.stack([np.roll(m[j], sign * self._z[j]) for j in range(self.n)]).reshape(-1)

    def make_reflection(self, projector_of, cost=2):
        """Return ``apply(v)`` computing ``(2P_z - I) v`` with ``P_z = projector_of(z)``."""
        r = 2 * np.asarray(projector_of(self._z)) - np.eye(len(projector_of(self._z)))

        def apply(v):
            self.queries += cost
            return r @ v
        return apply

    def make_phase_on(self, marked_of):
        """Return ``apply(v)`` flipping the sign of basis states marked on ``z`` (one query)."""
        mask = np.asarray(marked_of(self._z), dtype=bool)

        def apply(v):
            self.queries += 1
            return np.where(mask, -v, v)
        return apply


@dataclass(frozen=True)
class DetectionResult:
    bit: int
    p_zero: float
    rounds: int
    applications: int
    bits: tuple = ()


def detection_probability(apply_u, delta, state, K=None):
    """``(p0, mean vector, applications)`` for one round of phase detection.

    A uniform superposition over the ``K = ceil(8/δ)`` counter values
    controls ``U^k``; undoing the superposition and reading counter value 0
    leaves ``K^{-1} Σ_k U^k ψ``.
    """
    if not delta > 0:
        raise ValueError("phase detection needs delta > 0")
    K = K or ceil(8 / delta)
    v = np.asarray(state, dtype=complex)
    acc = v.copy()
    for _ in range(K - 1):
        v = apply_u(v)
        acc += v
    mean = acc / K
    return float(np.vdot(mean, mean).real), mean, K - 1


def phase_detection(apply_u, delta, state, eps=None, rng=None, K=None, shots=1):
    """Report 0 when the state looks like a 1-eigenvector of ``U``, else 1.

    One round outputs 1 with probability ``1 - ||K^{-1} Σ U^k ψ||²``.  With
    ``eps`` the round is repeated ``ceil(log2(1/eps))`` times on fresh
    copies of the state and 1 is reported if any round says so, which keeps
    the error one-sided.  The statevector is evolved once; ``shots``
    independent executions are then obtained by sampling the counter
    measurement, and ``bits`` lists their outputs (``bit`` is the first).
    ``applications`` is the cost of a single execution.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    rounds = 1 if eps is None else max(1, ceil(log2(1 / eps)))
    p0, _, apps = detection_probability(apply_u, delta, state, K)
    bits = tuple(int(np.any(rng.random(rounds) >= p0)) for _ in range(shots))
    return DetectionResult(bits[0], p0, rounds, apps * rounds, bits)


def amplitude_amplification(psi, apply_check, eps, mode="detect", rng=None, is_marked=None,
                            max_rounds=64):
    """Detect or find marked elements in the support of ``psi``.

    A walk step is the check phase ``apply_check`` followed by the
    reflection about ``psi``.  ``detect`` runs phase detection at
    ``δ = 2 arcsin(sqrt(ε))`` and returns a bit.  ``find`` draws a random
    number of steps below a geometrically growing cap, measures, and
    returns the element when ``is_marked`` confirms it, else ``None``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    psi = np.asarray(psi, dtype=complex)

    def step(v):
        v = apply_check(v)
        return 2 * psi * np.vdot(psi, v) - v

    if mode == "detect":
        return phase_detection(step, 2 * asin(sqrt(min(eps, 1.0))), psi, rng=rng).bit
    if mode != "find":
        raise ValueError("mode must be 'detect' or 'find'")
    if is_marked is None:
        raise ValueError("find mode needs a classical marking check")
    cap, limit = 1.0, 1 / sqrt(eps)
    for _ in range(max_rounds):
        k = int(rng.integers(0, max(1, int(cap))))
        v = psi.copy()
        for _ in range(k):
            v = step(v)
        p = np.abs(v) ** 2
        i = int(rng.choice(len(v), p=p / p.sum()))
        if is_marked(i):
            return i
        if cap > limit:
            break
        cap *= 6 / 5
    return None


def grover(oracle, n=None, k=None, rng=None):
    """Find an index with ``z_j = 1``.

    With the number of marked elements ``k`` known, runs
    ``round(π/(4θ) - 1/2)`` steps with ``sin θ = sqrt(k/n)``; otherwise
    uses the find-mode schedule.  Returns ``None`` when nothing is found.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    n = n or oracle.n
    psi = np.full(n, 1 / sqrt(n), dtype=complex)
    if k is None:
        return amplitude_amplification(psi, oracle.phase, 1 / n, "find", rng,
                                       is_marked=lambda i: oracle.classical(i) == 1)
    if k == 0:
        return None
    theta = asin(sqrt(k / n))
    v = psi.copy()
    for _ in range(int(round(pi / (4 * theta) - 0.5))):
        v = oracle.phase(v)
        v = 2 * psi * np.vdot(psi, v) - v
    p = np.abs(v) ** 2
    i = int(rng.choice(n, p=p / p.sum()))
    return i if oracle.classical(i) == 1 else None


def deutsch_jozsa(oracle, rng=None):
    """0 for a constant input, 1 for a balanced one; a single phase query."""
    rng = rng if rng is not None else np.random.default_rng(0)
    n = oracle.n
    psi = np.full(n, 1 / sqrt(n), dtype=complex)
    v = oracle.phase(psi)
    p_same = abs(np.vdot(psi, v)) ** 2
    return 0 if rng.random() < p_same else 1


# ------------------------------------------------------- spectral lemmas

def _check_isometry(a, name):
    a = np.asarray(a)
    if a.ndim != 2 or np.linalg.norm(a.conj().T @ a - np.eye(a.shape[1])) > 1e-9:
        raise ValueError(f"{name} does not have orthonormal columns")
    return a


def _walk(a, b):
    n = a.shape[0]
    ra = 2 * a @ a.conj().T - np.eye(n)
    rb = 2 * b @ b.conj().T - np.eye(n)
    return rb @ ra


def reflection_spectrum_check(a, b, tol=1e-8):
    """Compare the eigenphases of ``(2BB* - I)(2AA* - I)`` with the singular values of ``A*B``.

    Each singular value ``cos θ`` strictly between 0 and 1 contributes the
    phases ``±2θ``; singular values 1 and the common complement give phase
    0; ``ker D`` and ``ker D*`` give phase ``π``.
    """
    a = _check_isometry(a, "A")
    b = _check_isometry(b, "B")
    if a.shape[0] != b.shape[0]:
        raise ValueError("A and B need the same number of rows")
    n = a.shape[0]
    s = np.linalg.svd(a.conj().T @ b, compute_uv=False)
    s = np.clip(s, 0.0, 1.0)
    ones = int(np.sum(s > 1 - tol))
    mid = s[(s > tol) & (s <= 1 - tol)]
    rank = int(np.sum(s > tol))
    minus = (a.shape[1] - rank) + (b.shape[1] - rank)
    theta = np.arccos(mid)
    expected = list(2 * theta) + list(-2 * theta) + [pi] * minus
    zeros = n - len(expected)
    expected += [0.0] * zeros
    eig = np.linalg.eigvals(_walk(a, b))
    exp_pts = np.exp(1j * np.array(expected))
    cost = np.abs(eig[:, None] - exp_pts[None, :])
    r, c = linear_sum_assignment(cost)
    err = float(cost[r, c].max(initial=0.0))
    phases = np.angle(eig)
    return {"phases": np.sort(phases), "expected": np.sort(np.angle(exp_pts)),
            "max_error": err, "match": err <= tol,
            "dims": {"one": zeros, "minus_one": minus, "minus_one_observed": int(np.sum(np.abs(eig + 1) < 1e-6)),
                     "one_observed": int(np.sum(np.abs(eig - 1) < 1e-6)), "pairs": len(mid)}}


def phase_projector(u, delta):
    """Projector onto eigenvectors of the unitary ``u`` with phases ``|θ| <= δ``."""
    t, z = schur(np.asarray(u, dtype=complex), output="complex")
    keep = np.abs(np.angle(np.diag(t))) <= delta
    zk = z[:, keep]
    return zk @ zk.conj().T


def effective_gap_check(a, b, delta, u):
    """``(||P_δ Π_B u||, (δ/2)||u||)`` for ``u`` in the kernel of ``AA*``."""
    a = _check_isometry(a, "A")
    b = _check_isometry(b, "B")
    u = np.asarray(u, dtype=complex)
    if np.linalg.norm(a.conj().T @ u) > 1e-9 * max(1.0, np.linalg.norm(u)):
        raise ValueError("u is not in the kernel of AA*")
    p = phase_projector(_walk(a, b), delta)
    lhs = float(np.linalg.norm(p @ (b @ (b.conj().T @ u))))
    return lhs, delta / 2 * float(np.linalg.norm(u))


def make_mu_nu(q):
    """Vectors ``μ_i, ν_j`` in ``R^q`` with ``<μ_i, ν_j> = 1 - δ_ij`` and norms at most ``sqrt 2``.

    ``μ_i = ρ(q^{-1/2} J + e_i)`` and ``ν_j = ρ^{-1}(q^{-1/2} J - e_j)`` with
    ``ρ⁴ = (sqrt q - 1)/(sqrt q + 1)``; both have squared norm
    ``2 sqrt(1 - 1/q)``.
    """
    if q < 2:
        raise ValueError("make_mu_nu needs q >= 2")
    rq = sqrt(q)
    rho = ((rq - 1) / (rq + 1)) ** 0.25
    j = np.full((q, q), 1 / rq)
    mu = rho * (j + np.eye(q))
    nu = (j - np.eye(q)) / rho
    return mu, nu


# ------------------------------------------------------------ algorithms

@dataclass(frozen=True)
class RunResult:
    """Outcome of a simulated algorithm.

    ``queries`` is the cost of one execution.  With several shots
    ``accepted`` counts the executions that output 1 and ``bit`` is the
    output of the first one.
    """

    bit: int
    queries: int
    p_accept: float
    shots: int = 1
    accepted: int = None

    def __post_init__(self):
        if self.accepted is None:
            object.__setattr__(self, "accepted", self.bit)

    def to_json(self):
        return json.dumps({"bit": self.bit, "queries": self.queries, "p_accept": self.p_accept,
                           "shots": self.shots, "accepted": self.accepted})


def _from_detection(res, queries, shots):
    """Accept on phase 0: flip the detection bits."""
    bits = [1 - b for b in res.bits]
    return RunResult(bits[0], queries, res.p_zero, shots, sum(bits))


def span_walk(p):
    """``(Ṽ, Λ, α-free pieces)``: the fixed half of the span-program walk.

    Returns the kernel projector of ``[τ/α | V]`` as a function of ``α``.
    Free vectors must be eliminated first.
    """
    def lam(alpha):
        vt = np.hstack([p.target.reshape(-1, 1) / alpha, p.vectors])
        return kernel_projector(vt)
    return lam


def _span_available(p, z):
    return np.concatenate([[True], p.available(z)])


def run_span_program(p, z, sizes, C1=4.0, C2=16.0, rng=None, shots=1):
    """Evaluate a span program on ``z`` by phase detection on ``U = R_Π R_Λ``.

    ``sizes = (W0, W1)`` bounds the witness sizes.  The space has one
    coordinate for ``v_0 = τ/α`` (``α = C1 sqrt(W1)``) and one per input
    vector; ``Λ`` projects onto the kernel of ``[v_0 | V]`` and ``Π_z`` onto
    ``e_0`` and the available coordinates.  Detection runs at
    ``δ = 1/(C2 W)`` from ``e_0`` and the program accepts iff phase 0 is
    reported.  Each ``R_Π`` costs two queries.  ``shots`` repeats the
    execution by resampling the final measurement.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if p.free.shape[1]:
        try:
            p = p.eliminate_free()
        except InfeasibleError:
            return RunResult(1, 0, 1.0, shots, shots)
    dim = 1 + p.size
    if dim > MAX_DIM:
        raise BudgetError(f"walk dimension {dim} exceeds {MAX_DIM}")
    w0, w1 = sizes
    W = max(sqrt(w0 * w1), 0.5)
    alpha = C1 * sqrt(max(w1, 1e-12))
    r_lam = 2 * span_walk(p)(alpha) - np.eye(dim)
    oracle = QueryOracle(z, p.q)
    r_pi = oracle.make_reflection(lambda zz: np.diag(_span_available(p, zz).astype(float)))

    def step(v):
        return r_pi(r_lam @ v)

    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    res = phase_detection(step, 1 / (C2 * W), e0, rng=rng, shots=shots)
    return _from_detection(res, oracle.queries, shots)


def span_eigenvector(p, x, w1, C1=4.0):
    """The 1-eigenvector ``α e_0 - w_x`` of the walk on a positive input."""
    alpha = C1 * sqrt(w1)
    w = p.positive_witness(x).vector
    return np.concatenate([[alpha], -w]), alpha


def span_walk_matrix(p, z, w1, C1=4.0):
    dim = 1 + p.size
    r_lam = 2 * span_walk(p)(C1 * sqrt(w1)) - np.eye(dim)
    r_pi = 2 * np.diag(_span_available(p, z).astype(float)) - np.eye(dim)
    return r_pi @ r_lam


def dual_walk_parts(s, W=None, C1=4.0):
    """``(Λ, μ, α, d)`` for the walk of a dual adversary solution on ``C ⊕ (C^n ⊗ C^d ⊗ C^q)``."""
    f = s.f
    n, q = f.n, f.q
    d = max(F.shape[1] for F in s.factors)
    dim = 1 + n * d * q
    if dim > MAX_DIM:
        raise BudgetError(f"walk dimension {dim} exceeds {MAX_DIM}")
    W = W if W is not None else max(s.objective(), 0.5)
    alpha = C1 * sqrt(W)
    mu, _ = make_mu_nu(max(q, 2))
    vs = []
    for y in f.negatives:
        v = np.zeros(dim)
        v[0] = 1.0
        block = np.zeros((n, d, q))
        for j in range(n):
            psi = np.zeros(d)
            psi[:s.factors[j].shape[1]] = s.psi(j, y)
            block[j] = np.outer(psi, mu[y[j]])
        v[1:] = alpha * block.reshape(-1)
        vs.append(v)
    if vs:
        span = range_basis(np.array(vs).T)
        lam = np.eye(dim) - span @ span.T
    else:
        lam = np.eye(dim)
    return lam, mu, alpha, d


def _dual_pi(n, d, q, mu):
    def projector_of(z):
        dim = 1 + n * d * q
        blocked = np.zeros((dim, dim))
        for j in range(n):
            m = mu[z[j]] / np.linalg.norm(mu[z[j]])
            pj = np.zeros((n, n))
            pj[j, j] = 1.0
            blocked[1:, 1:] += np.kron(pj, np.kron(np.eye(d), np.outer(m, m)))
        return np.eye(dim) - blocked
    return projector_of


def run_dual_adversary(s, z, W=None, C1=4.0, C2=16.0, rng=None, shots=1):
    """Evaluate ``f(z)`` from a dual adversary solution via the same phase-detection walk.

    ``Λ`` projects onto the complement of the vectors
    ``v_y = e_0 + α Σ_j e_j ⊗ ψ_{j,y} ⊗ μ_{y_j}`` over negative ``y``;
    ``Π_z`` onto the complement of ``Σ_j e_j e_j* ⊗ I ⊗ μ_{z_j} μ_{z_j}*``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    W = W if W is not None else max(s.objective(), 0.5)
    lam, mu, alpha, d = dual_walk_parts(s, W, C1)
    f = s.f
    r_lam = 2 * lam - np.eye(lam.shape[0])
    oracle = QueryOracle(z, f.q)
    r_pi = oracle.make_reflection(_dual_pi(f.n, d, max(f.q, 2), mu))

    def step(v):
        return r_pi(r_lam @ v)

    e0 = np.zeros(lam.shape[0], dtype=complex)
    e0[0] = 1.0
    res = phase_detection(step, 1 / (C2 * W), e0, rng=rng, shots=shots)
    return _from_detection(res, oracle.queries, shots)


def dual_eigenvector(s, x, W=None, C1=4.0):
    """``α e_0 - Σ_j e_j ⊗ ψ_{j,x} ⊗ ν_{x_j}`` for a positive ``x``."""
    lam, mu, alpha, d = dual_walk_parts(s, W, C1)
    f = s.f
    _, nu = make_mu_nu(max(f.q, 2))
    block = np.zeros((f.n, d, max(f.q, 2)))
    for j in range(f.n):
        psi = np.zeros(d)
        psi[:s.factors[j].shape[1]] = s.psi(j, x)
        block[j] = np.outer(psi, nu[x[j]])
    u = np.concatenate([[alpha], -block.reshape(-1)])
    r_pi = 2 * _dual_pi(f.n, d, max(f.q, 2), mu)(x) - np.eye(len(u))
    return u, r_pi @ (2 * lam - np.eye(len(u)))

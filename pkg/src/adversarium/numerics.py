"""Dense linear algebra used throughout the package.

Everything here is a thin contract layer over LAPACK as exposed by numpy.
Matrices are plain ``numpy.ndarray`` objects, real or complex.  All
routines are pure and deterministic for a fixed input, and every tolerance
defaults to ``DEFAULT_TOL`` but can be overridden per call.
"""

import numpy as np

from .errors import NotHermitianError, SingularMatrixError

DEFAULT_TOL = 1e-9


def as_matrix(m):
    """Return ``m`` as a finite 2-d array, raising ``ValueError`` otherwise."""
    a = np.asarray(m)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got an array of shape {a.shape}")
    if a.dtype.kind not in "fc":
        a = a.astype(float)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v):
    a = np.asarray(v)
    if a.dtype.kind not in "fc":
        a = a.astype(float)
    a = a.reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def spectral_norm(m):
    """Largest singular value of ``m`` (0 for an empty matrix)."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def svd(m):
    """Thin SVD with numerically zero singular values dropped.

    Returns ``(u, s, vh)`` with ``s`` descending and
    ``m = u @ diag(s) @ vh``.  A singular value is dropped when it is below
    ``max(shape) * eps * s_max``, the same cutoff numpy uses for rank, so
    the zero matrix yields an empty list.
    """
    a = as_matrix(m)
    r, c = a.shape
    if a.size == 0:
        return np.zeros((r, 0), a.dtype), np.zeros(0), np.zeros((0, c), a.dtype)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        keep = 0
    else:
        keep = int(np.sum(s > max(r, c) * np.finfo(float).eps * s[0]))
    return u[:, :keep], s[:keep], vh[:keep, :]


def numerical_rank(m, tol=DEFAULT_TOL):
    """Number of singular values above ``tol`` times the largest one."""
    s = np.linalg.svd(as_matrix(m), compute_uv=False) if np.size(m) else np.zeros(0)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def is_hermitian(m, tol=DEFAULT_TOL):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(a), initial=0.0)))


def is_psd(m, tol=DEFAULT_TOL):
    """True iff the Hermitian matrix ``m`` has minimum eigenvalue >= -tol.

    Raises ``NotHermitianError`` when ``m`` is not Hermitian within ``tol``.
    """
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    if a.size == 0:
        return True
    h = (a + a.conj().T) / 2
    return bool(np.linalg.eigvalsh(h)[0] >= -tol)


def psd_factor(m, clamp=1e-12):
    """Gram factor of a PSD matrix: rows ``g`` with ``m = g @ g.conj().T``.

    Eigenvalues below ``-clamp`` are rejected; those in ``[-clamp, 0]`` are
    treated as zero.  Columns belonging to zero eigenvalues are dropped.
    """
    a = as_matrix(m)
    h = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[0] < -clamp * scale:
        raise ValueError(f"matrix is not PSD: eigenvalue {w[0]:.3e}")
    keep = w > clamp * scale
    return v[:, keep] * np.sqrt(w[keep])


def min_norm_solution(m, b, tol=DEFAULT_TOL):
    """Least-norm solution of ``m w = b``, or ``None`` when infeasible.

    The system counts as feasible when the least-squares residual is at
    most ``tol * ||b||`` (absolute ``tol`` when ``b = 0``).
    """
    a = as_matrix(m)
    bb = as_vector(b)
    if a.shape[0] != bb.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} vs {bb.shape}")
    if a.shape[1] == 0:
        w = np.zeros(0, dtype=np.result_type(a, bb))
    else:
        w = np.linalg.pinv(a) @ bb
    res = np.linalg.norm(a @ w - bb) if a.shape[1] else np.linalg.norm(bb)
    bound = tol * np.linalg.norm(bb) if np.linalg.norm(bb) > 0 else tol
    if res > bound:
        return None
    return w


def range_basis(m, tol=DEFAULT_TOL):
    """Orthonormal basis (columns) of the column space of ``m``."""
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), a.dtype)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], 0), a.dtype)
    return u[:, s > tol * max(1.0, s[0])]


def range_projector(m, tol=DEFAULT_TOL):
    """Orthogonal projector onto the column space of ``m``."""
    q = range_basis(m, tol)
    return q @ q.conj().T


def kernel_projector(m, tol=DEFAULT_TOL):
    """Orthogonal projector onto the kernel (null space) of ``m``."""
    a = as_matrix(m)
    cols = a.shape[1]
    if a.size == 0:
        return np.eye(cols, dtype=a.dtype)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = 0 if s.size == 0 or s[0] == 0.0 else int(np.sum(s > tol * max(1.0, s[0])))
    null = vh[rank:].conj().T
    return null @ null.conj().T


def condition_number(m):
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    if s.size == 0:
        return 1.0
    return float(np.inf) if s[-1] == 0.0 else float(s[0] / s[-1])


def solve_linear(m, b, tol=DEFAULT_TOL):
    """Solve the square system ``m x = b``.

    Raises ``SingularMatrixError`` when the smallest singular value is below
    ``tol`` times the largest (the condition number is in the message), or
    when the residual exceeds ``1e-8 * ||b||``.
    """
    a = as_matrix(m)
    bb = as_vector(b)
    if a.shape[0] != a.shape[1] or a.shape[0] != bb.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} vs {bb.shape}")
    cond = condition_number(a)
    if not cond < 1.0 / tol:
        raise SingularMatrixError(f"matrix is singular within tolerance (condition number {cond:.3e})")
    x = np.linalg.solve(a, bb)
    if np.linalg.norm(a @ x - bb) > 1e-8 * max(np.linalg.norm(bb), 1e-300):
        raise SingularMatrixError(f"residual too large (condition number {cond:.3e})")
    return x


def reflection(projector):
    """The reflection ``2P - I`` about the range of a projector."""
    p = as_matrix(projector)
    return 2 * p - np.eye(p.shape[0], dtype=p.dtype)

"""Dense linear-algebra kernels shared by the geometries and problems.

Everything here is a thin, validated wrapper over LAPACK via numpy. The
wrappers add the input checks and sign conventions the rest of the package
relies on for reproducible output.
"""
from typing import Callable, NamedTuple

import numpy as np

from .errors import NonSquare, NotFinite, NotSPD, RankDeficient

SPD_FLOOR = 1e-12
RANK_TOL = 1e-12
SYM_TOL = 1e-8


class SymEig(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite 2-d float array, raising NotFinite otherwise."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NotFinite("matrix has NaN or Inf entries")
    return A


def sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def sym_eig(A) -> SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    The input is symmetrized as ``(A + A.T) / 2`` after checking that the
    asymmetry is within ``SYM_TOL`` relative to the infinity norm.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise NonSquare(f"sym_eig needs a square matrix, got {A.shape}")
    scale = np.abs(A).sum(axis=1).max()
    if np.abs(A - A.T).sum(axis=1).max() > SYM_TOL * max(scale, 1.0):
        raise ValueError("sym_eig input is not symmetric")
    w, V = np.linalg.eigh(sym(A))
    return SymEig(w, V)


_SPD_FUNS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
    "exp": np.exp,
    "log": np.log,
    "inv": lambda w: 1.0 / w,
}


def spd_fun(A, f: str) -> np.ndarray:
    """Apply a scalar function to the spectrum of a symmetric matrix.

    ``f`` is one of ``sqrt``, ``inv_sqrt``, ``exp``, ``log`` (and ``inv``).
    All but ``exp`` require every eigenvalue to exceed ``SPD_FLOOR``.
    """
    if f not in _SPD_FUNS:
        raise ValueError(f"unknown spectral function {f!r}")
    w, V = sym_eig(A)
    if f != "exp" and w[0] <= SPD_FLOOR:
        raise NotSPD(f"smallest eigenvalue {w[0]:.3e} <= {SPD_FLOOR}")
    return sym((V * _SPD_FUNS[f](w)) @ V.T)


def thin_qr(A):
    """Thin QR with a strictly positive R diagonal.

    Returns ``(Q, R)`` with ``Q`` of shape (d, r) and ``R`` upper triangular.
    """
    A = as_matrix(A)
    d, r = A.shape
    if d < r:
        raise ValueError(f"thin_qr needs rows >= cols, got {A.shape}")
    Q, R = np.linalg.qr(A, mode="reduced")
    smin = np.linalg.svd(R, compute_uv=False)[-1]
    if smin <= RANK_TOL * max(1.0, np.linalg.norm(A)):
        raise RankDeficient(f"smallest singular value {smin:.3e}")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def qf(A) -> np.ndarray:
    """Orthonormal factor of the sign-fixed thin QR."""
    return thin_qr(A)[0]


def thin_svd(A):
    """Thin SVD ``A = W @ diag(s) @ V.T`` with deterministic signs.

    Each left singular vector is flipped so its largest-magnitude entry is
    positive; the matching right singular vector is flipped with it.
    """
    A = as_matrix(A)
    W, s, Vt = np.linalg.svd(A, full_matrices=False)
    idx = np.argmax(np.abs(W), axis=0)
    signs = np.where(W[idx, np.arange(W.shape[1])] < 0, -1.0, 1.0)
    return W * signs, s, Vt.T * signs


def solve_least_squares(A, b, ridge: float = 0.0) -> np.ndarray:
    """Minimize ``||A a - b||^2 + ridge * ||a||^2`` over ``a``."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"rhs length {b.shape[0]} != rows {A.shape[0]}")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    G = A.T @ A
    if ridge > 0:
        G = G + ridge * np.eye(A.shape[1])
    else:
        s = np.linalg.svd(A, compute_uv=False)
        if s.size < A.shape[1] or s[-1] <= RANK_TOL * max(1.0, s[0]):
            raise RankDeficient("normal equations are singular")
    return np.linalg.solve(G, A.T @ b)

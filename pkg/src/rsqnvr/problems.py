"""Finite-sum objectives ``f(w) = (1/N) sum_n f_n(w)``.

Every problem exposes ``cost(w, batch)`` and ``grad(w, batch)`` where
``batch`` is a sequence of sample indices (``None`` means all of them) and
the result is the mean over the batch. Gradients are Riemannian gradients,
i.e. tangent vectors at ``w`` for the problem's manifold.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleSampling, NotSPD, RankDeficient, ShapeMismatch
from .linalg import SPD_FLOOR, sym
from .manifolds import SPD, Euclidean, GeometryFlavor, Grassmann, Manifold
from .manifolds.grassmann import _qf
from .manifolds.spd import factors


class FiniteSumProblem:
    manifold: Manifold
    N: int

    def _batch(self, batch):
        if batch is None:
            return np.arange(self.N)
        idx = np.sort(np.asarray(batch, dtype=np.intp).reshape(-1))
        if idx.size == 0:
            raise ValueError("batch must be nonempty")
        if idx[0] < 0 or idx[-1] >= self.N:
            raise IndexError(f"batch indices must lie in [0, {self.N})")
        return idx

    def cost(self, w, batch=None) -> float:
        raise NotImplementedError

    def grad(self, w, batch=None):
        raise NotImplementedError

    def sample_grads(self, w, batch=None):
        """Per-sample gradients stacked along axis 0 (batch order, ascending)."""
        idx = self._batch(batch)
        return np.stack([self.grad(w, [n]) for n in idx])


class KarcherProblem(FiniteSumProblem):
    """Karcher mean of SPD matrices: ``f_n(X) = dist(X, Q_n)^2``."""

    def __init__(self, samples, flavor: GeometryFlavor | None = None):
        Q = np.asarray(samples, dtype=float)
        if Q.ndim != 3 or Q.shape[1] != Q.shape[2]:
            raise ShapeMismatch("samples must have shape (N, d, d)")
        Q = 0.5 * (Q + Q.transpose(0, 2, 1))
        if np.linalg.eigvalsh(Q)[:, 0].min() <= SPD_FLOOR:
            raise NotSPD("every Karcher sample must be SPD")
        self.Q = Q
        self.N, self.d = Q.shape[0], Q.shape[1]
        self.manifold = SPD(self.d, flavor)

    def _whitened_eig(self, X, idx):
        S, Si, _ = factors(X)
        w, V = np.linalg.eigh(Si @ self.Q[idx] @ Si)
        if w.min() <= 0:
            raise NotSPD("whitened sample lost positive definiteness")
        return S, w, V

    def cost(self, X, batch=None):
        idx = self._batch(batch)
        _, w, _ = self._whitened_eig(X, idx)
        return float(np.mean(np.sum(np.log(w) ** 2, axis=1)))

    def sample_grads(self, X, batch=None):
        # -2 log(Q X^-1) X  ==  -2 X^{1/2} log(X^{-1/2} Q X^{-1/2}) X^{1/2}
        idx = self._batch(batch)
        S, w, V = self._whitened_eig(X, idx)
        L = (V * np.log(w)[:, None, :]) @ V.transpose(0, 2, 1)
        G = -2.0 * (S @ L @ S)
        return 0.5 * (G + G.transpose(0, 2, 1))

    def grad(self, X, batch=None):
        return sym(self.sample_grads(X, batch).mean(axis=0))

    @classmethod
    def random(cls, d, N, rng, spread: float = 1.0, flavor=None):
        """Samples ``Exp_I(spread * S_n)`` for symmetric Gaussian ``S_n``."""
        A = rng.standard_normal((N, d, d)) / np.sqrt(2 * d)
        A = spread * (A + A.transpose(0, 2, 1))
        w, V = np.linalg.eigh(A)
        return cls((V * np.exp(w)[:, None, :]) @ V.transpose(0, 2, 1), flavor)


@dataclass
class EntrySet:
    """Coordinate list of matrix entries."""

    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __len__(self):
        return int(self.rows.size)


# matrices with at most this many entries use dense masked storage
DENSE_LIMIT = 5_000_000


class MatCompProblem(FiniteSumProblem):
    """Rank-r completion of a d x N matrix; one sample per column.

    ``f_n(U) = min_a ||P_n(U a) - P_n(x_n)||^2 + ridge ||a||^2`` where the
    inner minimizer has a closed form, so the cost depends only on the
    column space of ``U``.

    Small matrices are held as dense masks so a batch reduces to a few
    matrix products; large ones (``dense=False``) use a compressed-column
    layout.
    """

    def __init__(self, d, N, r, entries: EntrySet, ridge: float = 1e-12, flavor=None, dense=None):
        rows = np.asarray(entries.rows, dtype=np.intp)
        cols = np.asarray(entries.cols, dtype=np.intp)
        vals = np.asarray(entries.vals, dtype=float)
        if not (rows.shape == cols.shape == vals.shape):
            raise ShapeMismatch("rows, cols and vals must have equal length")
        if not np.all(np.isfinite(vals)):
            raise ValueError("observed values must be finite")
        if rows.size and (rows.min() < 0 or rows.max() >= d or cols.min() < 0 or cols.max() >= N):
            raise IndexError("entry index out of range")
        counts = np.bincount(cols, minlength=N)
        if np.any(counts == 0):
            raise ValueError(f"{int(np.sum(counts == 0))} columns have no observed entries")
        order = np.lexsort((rows, cols))
        self.rows, self.vals = rows[order], vals[order]
        self.colptr = np.concatenate([[0], np.cumsum(counts)])
        self.d, self.N, self.r = d, N, r
        self.ridge = float(ridge)
        self.manifold = Grassmann(d, r, flavor or GeometryFlavor("qr", "projection"))
        self.dense = d * N <= DENSE_LIMIT if dense is None else bool(dense)
        if self.dense:
            # column-major masks: row n of each array is column n of the matrix
            col_of = np.repeat(np.arange(N), counts)
            self._maskT = np.zeros((N, d))
            self._maskT[col_of, self.rows] = 1.0
            self._obsT = np.zeros((N, d))
            self._obsT[col_of, self.rows] = self.vals

    @property
    def n_observed(self):
        return int(self.rows.size)

    def _gather(self, idx):
        starts, ends = self.colptr[idx], self.colptr[idx + 1]
        lens = ends - starts
        seg = np.repeat(np.arange(idx.size), lens)
        pos = np.arange(lens.sum()) - np.repeat(np.cumsum(lens) - lens, lens) + np.repeat(starts, lens)
        return seg, self.rows[pos], self.vals[pos], lens

    def _solve(self, U, idx):
        """Coefficients, residuals on observed entries and gather layout for a batch."""
        seg, rows, vals, lens = self._gather(idx)
        A = U[rows]
        bounds = np.concatenate([[0], np.cumsum(lens)[:-1]])
        G = np.add.reduceat(A[:, :, None] * A[:, None, :], bounds, axis=0)
        rhs = np.add.reduceat(A * vals[:, None], bounds, axis=0)
        if self.ridge > 0:
            G = G + self.ridge * np.eye(self.r)
        elif np.any(np.linalg.svd(G, compute_uv=False)[:, -1] <= 1e-14):
            raise RankDeficient("observed rows of U are rank deficient and ridge is 0")
        a = np.linalg.solve(G, rhs[:, :, None])[:, :, 0]
        res = np.einsum("kr,kr->k", A, a[seg]) - vals
        return a, res, seg, rows

    def _solve_dense(self, U, idx):
        """Coefficients (b, r) and masked residual matrix (b, d) for a batch."""
        d, r = self.d, self.r
        mask, obs = self._maskT[idx], self._obsT[idx]
        G = (mask @ (U[:, :, None] * U[:, None, :]).reshape(d, r * r)).reshape(-1, r, r)
        if self.ridge > 0:
            G = G + self.ridge * np.eye(r)
        elif np.any(np.linalg.svd(G, compute_uv=False)[:, -1] <= 1e-14):
            raise RankDeficient("observed rows of U are rank deficient and ridge is 0")
        a = np.linalg.solve(G, (obs @ U)[:, :, None])[:, :, 0]
        return a, mask * (a @ U.T - obs)

    def solve_column(self, U, n):
        """Least-squares coefficients ``a_n`` for column ``n``."""
        return self._solve(U, np.array([n]))[0][0]

    def coefficients(self, U):
        idx = np.arange(self.N)
        return self._solve_dense(U, idx)[0] if self.dense else self._solve(U, idx)[0]

    def cost(self, U, batch=None):
        idx = self._batch(batch)
        if self.dense:
            res = self._solve_dense(U, idx)[1]
            return float(np.sum(res * res)) / idx.size
        _, res, _, _ = self._solve(U, idx)
        return float(res @ res) / idx.size

    def _scatter(self, U, rows, weights):
        E = np.empty((self.d, self.r))
        for j in range(self.r):
            E[:, j] = np.bincount(rows, weights=weights[:, j], minlength=self.d)
        return E - U @ (U.T @ E)

    def grad(self, U, batch=None):
        # the a_n dependence drops out by optimality of the inner solve
        idx = self._batch(batch)
        if self.dense:
            a, res = self._solve_dense(U, idx)
            E = res.T @ a
            return (2.0 / idx.size) * (E - U @ (U.T @ E))
        a, res, seg, rows = self._solve(U, idx)
        return (2.0 / idx.size) * self._scatter(U, rows, res[:, None] * a[seg])

    def sample_grads(self, U, batch=None):
        idx = self._batch(batch)
        if self.dense:
            a, res = self._solve_dense(U, idx)
            out = 2.0 * res[:, :, None] * a[:, None, :]
        else:
            a, res, seg, rows = self._solve(U, idx)
            out = np.zeros((idx.size, self.d, self.r))
            np.add.at(out, (seg, rows), 2.0 * res[:, None] * a[seg])
        return out - U @ (U.T @ out)

    def predict(self, U, entries: EntrySet, coeffs=None):
        a = self.coefficients(U) if coeffs is None else coeffs
        return np.einsum("kr,kr->k", U[entries.rows], a[entries.cols])

    def mse(self, U, entries: EntrySet, coeffs=None) -> float:
        err = self.predict(U, entries, coeffs) - entries.vals
        return float(np.mean(err**2))

    def train_mse(self, U, coeffs=None) -> float:
        a = self.coefficients(U) if coeffs is None else coeffs
        cols = np.repeat(np.arange(self.N), np.diff(self.colptr))
        err = np.einsum("kr,kr->k", U[self.rows], a[cols]) - self.vals
        return float(np.mean(err**2))


@dataclass
class SynthInstance:
    problem: MatCompProblem
    test: EntrySet
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def truth(self):
        return (self.left * self.singular_values) @ self.right.T


def synth_lowrank(d, N, r, os, cn, sigma, seed, ridge=1e-12, flavor=None) -> SynthInstance:
    """Synthetic low-rank completion instance.

    Ground truth ``L diag(s) R^T`` with orthonormal factors and singular
    values spaced geometrically from ``cn`` down to 1. ``round(os * r(d+N-r))``
    entries are observed, at least one per column, and receive Gaussian noise
    of standard deviation ``sigma * rms(clean observed entries)``. The test
    set is a disjoint uniform sample of the same size (or of the whole
    complement if it is smaller) holding clean values.
    """
    rng = np.random.default_rng(seed)
    n_obs = int(round(os * r * (d + N - r)))
    if n_obs > d * N:
        raise InfeasibleSampling(f"{n_obs} observations requested for a {d}x{N} matrix")
    if n_obs < N:
        raise InfeasibleSampling(f"{n_obs} observations cannot cover {N} columns")
    left = _qf(rng.standard_normal((d, r)))[0]
    right = _qf(rng.standard_normal((N, r)))[0]
    s = np.geomspace(cn, 1.0, r) if r > 1 else np.array([1.0])

    # one guaranteed entry per column, the rest uniform over what is left
    first = rng.integers(0, d, size=N) * N + np.arange(N)
    taken = np.zeros(d * N, dtype=bool)
    taken[first] = True
    rest = rng.choice(np.flatnonzero(~taken), size=n_obs - N, replace=False)
    taken[rest] = True
    omega = np.flatnonzero(taken)
    n_test = min(n_obs, d * N - n_obs)
    phi = np.sort(rng.choice(np.flatnonzero(~taken), size=n_test, replace=False))

    def clean_entries(lin):
        rows, cols = np.divmod(lin, N)
        return EntrySet(rows, cols, np.einsum("kr,kr->k", left[rows] * s, right[cols]))

    train = clean_entries(omega)
    rms = float(np.sqrt(np.mean(train.vals**2)))
    train.vals = train.vals + sigma * rms * rng.standard_normal(train.vals.size)
    test = clean_entries(phi)
    problem = MatCompProblem(d, N, r, train, ridge=ridge, flavor=flavor)
    info = dict(d=d, N=N, r=r, os=os, cn=cn, sigma=sigma, seed=seed, n_obs=n_obs, rms=rms)
    return SynthInstance(problem, test, left, s, right, info)


class LeastSquaresProblem(FiniteSumProblem):
    """Flat ridge regression ``f_n(x) = (a_n.x - b_n)^2 / 2 + lam |x|^2 / 2``.

    A strongly convex quadratic used to check the Riemannian algorithms
    against their Euclidean closed forms.
    """

    def __init__(self, A, b, lam=0.0):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.lam = float(lam)
        self.N, self.n = self.A.shape
        self.manifold = Euclidean(self.n)

    def cost(self, x, batch=None):
        idx = self._batch(batch)
        r = self.A[idx] @ x - self.b[idx]
        return float(0.5 * np.mean(r**2) + 0.5 * self.lam * x @ x)

    def sample_grads(self, x, batch=None):
        idx = self._batch(batch)
        r = self.A[idx] @ x - self.b[idx]
        return self.A[idx] * r[:, None] + self.lam * x

    def grad(self, x, batch=None):
        return self.sample_grads(x, batch).mean(axis=0)

    @property
    def hessian(self):
        return self.A.T @ self.A / self.N + self.lam * np.eye(self.n)

    @property
    def minimizer(self):
        return np.linalg.solve(self.hessian, self.A.T @ self.b / self.N)

"""Limited-memory inverse-Hessian operator living in one tangent space."""
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import BasePointMismatch
from ..manifolds import Manifold


@dataclass
class CurvaturePair:
    s: np.ndarray
    y: np.ndarray
    rho: float


class QnMemory:
    """Ring of at most ``L`` curvature pairs, all tangent at ``base``.

    ``chi`` is the scaling of the initial operator ``chi * id``, taken from
    the newest pair (1 when the memory is empty).
    """

    def __init__(self, manifold: Manifold, L: int, base=None):
        if L < 1:
            raise ValueError("memory size L must be >= 1")
        self.manifold = manifold
        self.L = L
        self.base = base
        self.pairs: deque[CurvaturePair] = deque()
        self.chi = 1.0

    def __len__(self):
        return len(self.pairs)

    def _refresh_chi(self):
        if not self.pairs:
            self.chi = 1.0
            return
        last = self.pairs[-1]
        M, x = self.manifold, self.base
        self.chi = 1.0 / (last.rho * M.inner(x, last.y, last.y))

    def accepts(self, s, y, eps: float, at=None) -> bool:
        """Cautious test ``<y, s> >= eps ||s||^2``; ``s = 0`` never passes."""
        M, x = self.manifold, self.base if at is None else at
        ss = M.inner(x, s, s)
        return ss > 0.0 and M.inner(x, s, y) >= eps * ss

    def push(self, s, y, eps: float) -> bool:
        """Store ``(s, y)`` if it passes the cautious test; evict the oldest beyond ``L``."""
        if not self.accepts(s, y, eps):
            return False
        self.pairs.append(CurvaturePair(s, y, 1.0 / self.manifold.inner(self.base, s, y)))
        while len(self.pairs) > self.L:
            self.pairs.popleft()
        self._refresh_chi()
        return True

    def transport(self, eta, new_base):
        """Carry every stored pair to the tangent space at ``new_base`` along ``eta``.

        Pairs whose curvature ``<y, s>`` turns non-positive under a
        non-isometric transport are dropped, keeping the operator positive
        definite.
        """
        M, x = self.manifold, self.base
        kept = deque()
        for p in self.pairs:
            s = M.transport(x, eta, p.s, dest=new_base)
            y = M.transport(x, eta, p.y, dest=new_base)
            sy = M.inner(new_base, s, y)
            if sy > 0:
                kept.append(CurvaturePair(s, y, 1.0 / sy))
        self.pairs = kept
        self.base = new_base
        self._refresh_chi()

    def clear(self):
        self.pairs.clear()
        self.chi = 1.0


def two_loop_apply(memory: QnMemory, p, base=None):
    """Apply the L-BFGS inverse-Hessian approximation to the tangent ``p``."""
    if base is not None and memory.base is not None and not np.array_equal(base, memory.base):
        raise BasePointMismatch("memory pairs and vector live at different points")
    M, x = memory.manifold, memory.base
    q = p
    alphas = []
    for pair in reversed(memory.pairs):
        a = pair.rho * M.inner(x, pair.s, q)
        alphas.append(a)
        q = q - a * pair.y
    r = memory.chi * q
    for pair, a in zip(memory.pairs, reversed(alphas)):
        b = pair.rho * M.inner(x, pair.y, r)
        r = r + (a - b) * pair.s
    return r


def curvature_update(memory: QnMemory, w_old, w_new, grad_old, grad_new, eps: float, eta=None) -> bool:
    """Form the curvature pair between two reference points and move the memory to ``w_new``.

    ``s = T_eta eta`` and ``y = grad_new / kappa - T_eta grad_old`` with
    ``eta = R^{-1}_{w_old}(w_new)`` unless given. The pair is stored only if
    ``<y, s> >= eps ||s||^2`` at ``w_new``; surviving older pairs are
    transported along the same ``eta``. Returns whether the pair was stored.
    """
    M = memory.manifold
    if memory.base is None:
        memory.base = w_old
    if eta is None:
        eta = M.inverse_retract(w_old, w_new)
    if not np.any(eta):
        memory.transport(eta, w_new)
        return False
    s = M.transport(w_old, eta, eta, dest=w_new)
    y = grad_new / M.kappa(w_old, eta) - M.transport(w_old, eta, grad_old, dest=w_new)
    accepted = memory.accepts(s, y, eps, at=w_new)
    if accepted and len(memory.pairs) >= memory.L:
        memory.pairs.popleft()
    memory.transport(eta, w_new)
    if accepted:
        memory.push(s, y, eps)
    return accepted

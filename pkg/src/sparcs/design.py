"""Design matrix operators.

Two realizations of the n x ML design matrix:

* ``gaussian``: dense i.i.d. N(0, 1/n) entries, materialized once.
* ``hadamard``: ``A = S H_N D / sqrt(n)`` applied with a fast Walsh-Hadamard
  transform. ``N`` is the smallest power of two >= max(n+1, ML), ``D`` random
  signs on the first ML coordinates and ``S`` picks n distinct rows other
  than the all-ones row 0. Every column has entries +-1/sqrt(n).

Randomness comes from numpy's PCG64 generator seeded with the operator seed.
"""

from __future__ import annotations

import numba
import numpy as np

_MAX_TRANSFORM = 1 << 30
_MAX_DENSE_ENTRIES = 1 << 27


@numba.njit(cache=True)
def fwht_inplace(x):
    """Unnormalized Walsh-Hadamard transform of a length-2^k vector, in place."""
    N = x.shape[0]
    h = 1
    while h < N:
        for i in range(0, N, 2 * h):
            for j in range(i, i + h):
                a = x[j]
                b = x[j + h]
                x[j] = a + b
                x[j + h] = a - b
        h *= 2


def fwht(x) -> np.ndarray:
    out = np.array(x, dtype=np.float64)
    N = out.shape[0]
    if N & (N - 1):
        raise ValueError("length must be a power of two")
    fwht_inplace(out)
    return out


class DesignOperator:
    kind = ""

    def __init__(self, n: int, L: int, M: int, seed: int):
        if n < 1 or L < 1 or M < 1:
            raise ValueError("n, L, M must be positive")
        self.n, self.L, self.M, self.seed = int(n), int(L), int(M), int(seed)

    @property
    def ML(self) -> int:
        return self.L * self.M

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.ML

    def _check_beta(self, beta):
        beta = np.asarray(beta, dtype=np.float64)
        if beta.shape != (self.ML,):
            raise ValueError(f"expected vector of length {self.ML}, got shape {beta.shape}")
        return beta

    def _check_z(self, z):
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.n,):
            raise ValueError(f"expected vector of length {self.n}, got shape {z.shape}")
        return z

    def forward(self, beta) -> np.ndarray:
        raise NotImplementedError

    def adjoint(self, z) -> np.ndarray:
        raise NotImplementedError

    def materialize(self) -> np.ndarray:
        """Dense matrix built column by column from ``forward``; for small oracles."""
        A = np.empty((self.n, self.ML))
        e = np.zeros(self.ML)
        for j in range(self.ML):
            e[j] = 1.0
            A[:, j] = self.forward(e)
            e[j] = 0.0
        return A

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, L={self.L}, M={self.M}, seed={self.seed})"


class GaussianOperator(DesignOperator):
    kind = "gaussian"

    def __init__(self, n, L, M, seed):
        super().__init__(n, L, M, seed)
        if self.n * self.ML > _MAX_DENSE_ENTRIES:
            raise OverflowError(f"dense {self.n}x{self.ML} design matrix is too large")
        rng = np.random.default_rng(self.seed)
        self.A = rng.standard_normal((self.n, self.ML)) / np.sqrt(self.n)
        self.A.setflags(write=False)

    def forward(self, beta):
        return self.A @ self._check_beta(beta)

    def adjoint(self, z):
        return self.A.T @ self._check_z(z)

    def materialize(self):
        return np.array(self.A)


class HadamardOperator(DesignOperator):
    kind = "hadamard"

    def __init__(self, n, L, M, seed):
        super().__init__(n, L, M, seed)
        N = 1
        while N < max(self.n + 1, self.ML):
            N *= 2
        if N > _MAX_TRANSFORM:
            raise OverflowError(f"transform size {N} is too large")
        self.N = N
        rng = np.random.default_rng(self.seed)
        self.signs = rng.choice(np.array([-1.0, 1.0]), size=self.ML)
        self.rows = 1 + rng.choice(N - 1, size=self.n, replace=False)
        self.signs.setflags(write=False)
        self.rows.setflags(write=False)
        self._scale = 1.0 / np.sqrt(self.n)

    def forward(self, beta):
        beta = self._check_beta(beta)
        buf = np.zeros(self.N)
        buf[: self.ML] = self.signs * beta
        fwht_inplace(buf)
        return buf[self.rows] * self._scale

    def adjoint(self, z):
        z = self._check_z(z)
        buf = np.zeros(self.N)
        buf[self.rows] = z
        fwht_inplace(buf)
        return buf[: self.ML] * self.signs * self._scale


_KINDS = {
    "gaussian": GaussianOperator,
    "dense": GaussianOperator,
    "hadamard": HadamardOperator,
}


def new_operator(kind: str, n: int, L: int, M: int, seed: int) -> DesignOperator:
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown operator kind {kind!r}") from None
    return cls(n, L, M, seed)

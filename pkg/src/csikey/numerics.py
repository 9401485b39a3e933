"""Dense real linear algebra and seeded randomness used everywhere else.

Matrices are plain float64 numpy arrays.  Basis vectors are stored as
matrix *columns* throughout the package.
"""

from typing import NamedTuple

import numpy as np

from .errors import DegenerateBasisError, IllConditionedError, NumericalError

COND_LIMIT = 1e12


class SvdTriple(NamedTuple):
    """A = U @ diag(sigma) @ V.T with sigma non-increasing."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def sigma_min(self) -> float:
        return float(self.sigma[-1])


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Reproducible generator: identical (seed, stream) gives identical draws.

    Streams with distinct ids are statistically independent, which is what
    Monte Carlo workers use.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.default_rng(ss)


def svd(a: np.ndarray) -> SvdTriple:
    """Full SVD with sigma sorted non-increasing (numpy convention)."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("svd input contains non-finite entries")
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"svd failed to converge on {a.shape} matrix") from exc
    return SvdTriple(U=u, sigma=s, V=vh.T)


def gram_schmidt(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Classical Gram-Schmidt on the columns of b (no normalization).

    Returns (bstar, mu) with b_i = bstar_i + sum_{j<i} mu[i, j] * bstar_j.
    mu is lower triangular with unit diagonal.
    """
    b = np.asarray(b, dtype=float)
    m, n = b.shape
    bstar = np.zeros_like(b)
    mu = np.eye(n)
    norms2 = np.zeros(n)
    scale = max(np.linalg.norm(b), 1.0)
    for i in range(n):
        v = b[:, i].copy()
        for j in range(i):
            mu[i, j] = np.dot(b[:, i], bstar[:, j]) / norms2[j]
            v -= mu[i, j] * bstar[:, j]
        norms2[i] = np.dot(v, v)
        if norms2[i] <= (1e-13 * scale) ** 2:
            raise DegenerateBasisError(f"column {i} is linearly dependent")
        bstar[:, i] = v
    return bstar, mu


def pseudo_inverse(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose inverse of a full-column-rank matrix."""
    a = np.asarray(a, dtype=float)
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] == 0 or s[0] / s[-1] > COND_LIMIT:
        raise IllConditionedError(
            f"condition number {s[0] / max(s[-1], 1e-300):.3e} exceeds {COND_LIMIT:.0e}"
        )
    return np.linalg.pinv(a)

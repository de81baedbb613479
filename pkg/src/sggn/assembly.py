"""Assembly of the structured least-squares objects over a point set.

For points x^k with weights w_k, targets u^k, features sigma_hat and
heaviside H (see model.features), and homogeneous coordinates y^k:

    mass matrix      A = sum_k w_k sigma_hat(x^k) sigma_hat(x^k)^T
    right-hand side  f = sum_k w_k u^k sigma_hat(x^k)
    layer GN matrix  H = sum_k w_k (H(x^k) H(x^k)^T) kron (y^k y^k^T)
    scaled gradient  G = sum_k w_k (v(x^k) - u^k) H(x^k) kron y^k

The full Gauss-Newton matrix factors as (D(c) kron I) H (D(c) kron I),
so its null directions are exactly the neurons with c_i = 0; filtering
those out (the active set) leaves a positive definite reduced system.

All sums run in point order with BLAS accumulation; symmetric matrices
are built from their lower triangle and mirrored, so A == A.T and
H == H.T hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NetworkParams, features
from .problem import WeightedPointSet

__all__ = [
    "ActiveSet",
    "AssemblyBundle",
    "active_set",
    "assemble_bundle",
    "assemble_layer_gn",
    "assemble_mass",
    "assemble_scaled_gradient",
    "gn_matrix",
    "reduce_system",
    "save_matrix_binary",
    "save_matrix_csv",
]


@dataclass(frozen=True)
class AssemblyBundle:
    """Mass matrix A, rhs f, layer GN matrix H, scaled gradient G."""

    A: np.ndarray  # (n+1, n+1)
    f: np.ndarray  # (n+1,)
    H: np.ndarray  # (n(d+1), n(d+1))
    G: np.ndarray  # (n(d+1),)


@dataclass(frozen=True)
class ActiveSet:
    """Neurons whose output coefficient magnitude meets the threshold.

    ``indices`` are 0-based neuron indices, sorted ascending.
    """

    indices: np.ndarray
    threshold: float

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        if self.threshold <= 0:
            raise ValueError("active-set threshold must be positive")

    @property
    def count(self) -> int:
        return self.indices.size

    def __bool__(self) -> bool:
        return self.count > 0


def _mirror_lower(m: np.ndarray) -> np.ndarray:
    """Exactly symmetric matrix from the lower triangle of m."""
    lower = np.tril(m)
    return lower + np.tril(m, -1).T


def _block_features(heav: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Rows H(x^k) kron y^k, shape (m, n*(d+1))."""
    m = heav.shape[0]
    return (heav[:, :, None] * y[:, None, :]).reshape(m, -1)


def assemble_mass(params: NetworkParams, pts: WeightedPointSet):
    """Mass matrix A(r) and right-hand side f(r)."""
    sigma_hat, _, _ = features(params, pts.points)
    weighted = sigma_hat * pts.weights[:, None]
    A = _mirror_lower(sigma_hat.T @ weighted)
    f = sigma_hat.T @ (pts.weights * pts.targets)
    return A, f


def assemble_layer_gn(params: NetworkParams, pts: WeightedPointSet) -> np.ndarray:
    """Layer GN matrix H(r), shape (n(d+1), n(d+1))."""
    _, heav, y = features(params, pts.points)
    b = _block_features(heav, y)
    return _mirror_lower(b.T @ (b * pts.weights[:, None]))


def assemble_scaled_gradient(params: NetworkParams, pts: WeightedPointSet) -> np.ndarray:
    """Scaled gradient G(c_hat, r), length n(d+1).

    (D(c) kron I) G is the gradient of the loss with respect to the
    nonlinear parameters r.
    """
    sigma_hat, heav, y = features(params, pts.points)
    residual = sigma_hat @ params.c_hat - pts.targets
    b = _block_features(heav, y)
    return b.T @ (pts.weights * residual)


def assemble_bundle(params: NetworkParams, pts: WeightedPointSet) -> AssemblyBundle:
    """Assemble A, f, H, G in a single pass over the point set."""
    sigma_hat, heav, y = features(params, pts.points)
    w = pts.weights
    weighted = sigma_hat * w[:, None]
    A = _mirror_lower(sigma_hat.T @ weighted)
    f = sigma_hat.T @ (w * pts.targets)
    b = _block_features(heav, y)
    H = _mirror_lower(b.T @ (b * w[:, None]))
    residual = sigma_hat @ params.c_hat - pts.targets
    G = b.T @ (w * residual)
    return AssemblyBundle(A=A, f=f, H=H, G=G)


def coefficient_scaling(c: np.ndarray, d: int) -> np.ndarray:
    """Diagonal of D(c) kron I_{d+1}: each c_i repeated d+1 times."""
    return np.repeat(np.asarray(c, dtype=float), d + 1)


def gn_matrix(params: NetworkParams, pts: WeightedPointSet) -> np.ndarray:
    """Full GN matrix (D(c) kron I) H(r) (D(c) kron I).

    Exposed for verification; the optimizer never forms it, working with
    the factored pieces instead.
    """
    H = assemble_layer_gn(params, pts)
    s = coefficient_scaling(params.c, params.d)
    return s[:, None] * H * s[None, :]


def active_set(c, eps_c: float) -> ActiveSet:
    """Indices i with |c_i| >= eps_c, sorted ascending (0-based)."""
    if eps_c <= 0:
        raise ValueError("eps_c must be positive")
    c = np.asarray(c, dtype=float)
    return ActiveSet(indices=np.flatnonzero(np.abs(c) >= eps_c), threshold=eps_c)


def block_indices(active: ActiveSet, d: int) -> np.ndarray:
    """Flat indices of the (d+1)-sized blocks of the active neurons."""
    return (active.indices[:, None] * (d + 1) + np.arange(d + 1)[None, :]).ravel()


def reduce_system(H: np.ndarray, G: np.ndarray, c: np.ndarray, active: ActiveSet):
    """Restrict (H, G, c) to the active neurons.

    Returns (H_tilde, G_tilde, c_tilde): the principal block submatrix of
    H, the matching blocks of G, and the active coefficients.
    """
    if not active:
        raise ValueError("active set is empty; nothing to reduce")
    c = np.asarray(c, dtype=float)
    n = c.size
    if H.shape[0] % n != 0 or H.shape[0] < 2 * n:
        raise ValueError(f"H of size {H.shape[0]} is not n={n} blocks of size d+1")
    d = H.shape[0] // n - 1
    idx = block_indices(active, d)
    return H[np.ix_(idx, idx)], G[idx], c[active.indices]


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    """Write a dense matrix as CSV: a header row with the dimensions,
    then one row per matrix row (row-major)."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    rows, cols = matrix.shape
    with open(path, "w", newline="") as fh:
        fh.write("rows,cols\n")
        fh.write(f"{rows},{cols}\n")
        for row in matrix:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def save_matrix_binary(matrix: np.ndarray, path) -> None:
    """Write a dense matrix in .npy format (row-major, self-describing)."""
    np.save(path, np.ascontiguousarray(np.atleast_2d(matrix), dtype=float))

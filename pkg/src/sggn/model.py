"""Shallow ReLU network: parameters, evaluation, feature vectors, and
breaking-hyperplane geometry.

A network with ``n`` neurons on inputs of dimension ``d`` is

    v(x) = c0 + sum_i c_i * relu(omega_i . x + b_i),

with each direction ``omega_i`` kept on the unit sphere. Writing
``y = (1, x)`` for homogeneous coordinates and ``r_i = (b_i, omega_i)``,
each neuron is ``relu(r_i . y)`` and switches regimes on the breaking
hyperplane ``{x : omega_i . x + b_i = 0}``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateNeuronError",
    "Domain",
    "HyperplaneDescriptor",
    "NetworkParams",
    "NeuronParams",
    "evaluate",
    "feature_vectors",
    "features",
    "homogeneous",
    "hyperplanes",
    "normalize",
]


class DegenerateNeuronError(ValueError):
    """A neuron's weight vector has zero norm and cannot be normalized."""


def _readonly(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class NeuronParams:
    """One hidden neuron: bias ``b`` and weight vector ``omega`` (length d)."""

    b: float
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", float(self.b))
        omega = _readonly(np.atleast_1d(self.omega))
        if omega.ndim != 1 or omega.size < 1:
            raise ValueError("omega must be a nonempty 1-D vector")
        if not np.isfinite(self.b) or not np.all(np.isfinite(omega)):
            raise ValueError("neuron parameters must be finite")
        object.__setattr__(self, "omega", omega)

    @property
    def r(self) -> np.ndarray:
        """Homogeneous parameter block (b, omega), length d+1."""
        return np.concatenate(([self.b], self.omega))


@dataclass(frozen=True)
class NetworkParams:
    """Full parameter set of a shallow ReLU network.

    ``c0`` and ``c`` are the linear (output-layer) parameters; ``neurons``
    carries the nonlinear (hidden-layer) parameters. Instances are
    immutable value objects and safe to share across threads.
    """

    c0: float
    c: np.ndarray
    neurons: tuple[NeuronParams, ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "c", _readonly(np.atleast_1d(self.c)))
        object.__setattr__(self, "neurons", tuple(self.neurons))
        object.__setattr__(self, "d", int(self.d))
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 neurons and input dimension d >= 1")
        if self.c.shape != (self.n,):
            raise ValueError(
                f"c has shape {self.c.shape}, expected ({len(self.neurons)},)"
            )
        if not np.isfinite(self.c0) or not np.all(np.isfinite(self.c)):
            raise ValueError("linear parameters must be finite")
        for i, nrn in enumerate(self.neurons):
            if nrn.omega.size != self.d:
                raise ValueError(f"neuron {i} has dimension {nrn.omega.size} != d={self.d}")

    @property
    def n(self) -> int:
        return len(self.neurons)

    @property
    def c_hat(self) -> np.ndarray:
        """Linear parameters (c0, c1, ..., cn), length n+1."""
        return np.concatenate(([self.c0], self.c))

    @property
    def hidden_matrix(self) -> np.ndarray:
        """(n, d+1) matrix with row i = (b_i, omega_i)."""
        return np.stack([nrn.r for nrn in self.neurons])

    @classmethod
    def from_arrays(cls, c0, c, hidden, d=None) -> "NetworkParams":
        """Build from a (n, d+1) hidden matrix with rows (b_i, omega_i)."""
        hidden = np.atleast_2d(np.asarray(hidden, dtype=float))
        if d is None:
            d = hidden.shape[1] - 1
        neurons = tuple(NeuronParams(row[0], row[1:]) for row in hidden)
        return cls(c0=c0, c=np.asarray(c, dtype=float), neurons=neurons, d=d)

    def with_linear(self, c_hat) -> "NetworkParams":
        """Copy with new linear parameters (c0, c)."""
        c_hat = np.asarray(c_hat, dtype=float)
        return NetworkParams(c0=c_hat[0], c=c_hat[1:], neurons=self.neurons, d=self.d)

    def with_hidden(self, hidden) -> "NetworkParams":
        """Copy with a new (n, d+1) hidden matrix, linear parameters kept."""
        return NetworkParams.from_arrays(self.c0, self.c, hidden, d=self.d)

    # JSON document: {d, n, c0, c, neurons:[{b, omega}...]} (field order fixed)
    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "c0": self.c0,
            "c": self.c.tolist(),
            "neurons": [{"b": nrn.b, "omega": nrn.omega.tolist()} for nrn in self.neurons],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NetworkParams":
        neurons = tuple(NeuronParams(entry["b"], entry["omega"]) for entry in doc["neurons"])
        params = cls(c0=doc["c0"], c=doc["c"], neurons=neurons, d=doc["d"])
        if params.n != doc["n"]:
            raise ValueError(f"n={doc['n']} does not match {params.n} neuron entries")
        return params

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "NetworkParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box [lower_1, upper_1] x ... x [lower_d, upper_d]."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _readonly(np.atleast_1d(self.lower)))
        object.__setattr__(self, "upper", _readonly(np.atleast_1d(self.upper)))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if not np.all(self.lower < self.upper):
            raise ValueError("need lower[k] < upper[k] for every axis")

    @property
    def d(self) -> int:
        return self.lower.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def corners(self) -> np.ndarray:
        """(2^d, d) array of box corners."""
        return np.array(list(itertools.product(*zip(self.lower, self.upper))))


@dataclass(frozen=True)
class HyperplaneDescriptor:
    """Breaking hyperplane of one neuron and whether it meets the domain."""

    index: int
    b: float
    omega: np.ndarray
    intersects_domain: bool


def homogeneous(x) -> np.ndarray:
    """Homogeneous coordinates: prepend 1 to each point.

    Accepts a single point (d,) or a batch (m, d); returns (d+1,) or (m, d+1).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return np.concatenate(([1.0], x))
    return np.hstack([np.ones((x.shape[0], 1)), x])


def features(params: NetworkParams, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batch feature matrices at points ``x`` of shape (m, d).

    Returns ``(sigma_hat, heaviside, y)`` where ``sigma_hat[k] =
    (1, relu(r_1 . y_k), ..., relu(r_n . y_k))``, ``heaviside[k, i]`` is 1
    where ``r_i . y_k > 0`` and 0 otherwise (0 on the hyperplane itself,
    so discrete sums are deterministic), and ``y[k] = (1, x_k)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != params.d:
        raise ValueError(f"points have dimension {x.shape[1]}, network expects {params.d}")
    y = homogeneous(x)
    z = y @ params.hidden_matrix.T
    sigma = np.maximum(z, 0.0)
    heav = (z > 0.0).astype(float)
    sigma_hat = np.hstack([np.ones((x.shape[0], 1)), sigma])
    return sigma_hat, heav, y


def feature_vectors(params: NetworkParams, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Feature vectors at a single point: (sigma_hat, heaviside, y)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size != params.d:
        raise ValueError(f"point has dimension {x.size}, network expects {params.d}")
    sigma_hat, heav, y = features(params, x[None, :])
    return sigma_hat[0], heav[0], y[0]


def evaluate(params: NetworkParams, x):
    """Evaluate the network at ``x``: a single point (d,) or a batch (m, d).

    Computed as sigma_hat(x)^T c_hat, so it agrees exactly with the
    feature-vector representation.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    sigma_hat, _, _ = features(params, x[None, :] if single else x)
    vals = sigma_hat @ params.c_hat
    return float(vals[0]) if single else vals


def normalize(params: NetworkParams) -> NetworkParams:
    """Rescale every neuron so its weight vector is unit length.

    Uses the positive homogeneity of ReLU: omega_i /= s, b_i /= s,
    c_i *= s with s = |omega_i| leaves the network function unchanged.
    Already-normalized parameters are returned as-is.
    """
    hidden = params.hidden_matrix
    norms = np.linalg.norm(hidden[:, 1:], axis=1)
    if np.any(norms == 0.0):
        idx = int(np.argmin(norms))
        raise DegenerateNeuronError(f"neuron {idx} has zero weight vector")
    if np.all(norms == 1.0):
        return params
    return NetworkParams.from_arrays(
        params.c0, params.c * norms, hidden / norms[:, None], d=params.d
    )


def hyperplanes(params: NetworkParams, domain: Domain) -> list[HyperplaneDescriptor]:
    """Breaking hyperplane of each neuron with a corner sign test.

    The plane omega.x + b = 0 meets the (closed) box iff the linear form
    changes sign over the corners or vanishes at one of them.
    """
    if domain.d != params.d:
        raise ValueError(f"domain dimension {domain.d} != network dimension {params.d}")
    corners = domain.corners()
    out = []
    for i, nrn in enumerate(params.neurons):
        vals = corners @ nrn.omega + nrn.b
        intersects = bool(vals.min() <= 0.0 <= vals.max())
        out.append(
            HyperplaneDescriptor(index=i, b=nrn.b, omega=nrn.omega, intersects_domain=intersects)
        )
    return out

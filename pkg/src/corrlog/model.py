"""Correlated logistic model: parameters, datasets, and pointwise probabilities.

The model assigns a label vector y in {-1,+1}^m to a feature vector x via

    p(y | x) propto exp( sum_i y_i <beta_i, x> + sum_{i<j} alpha_ij y_i y_j ),

i.e. one logistic regression per label coupled by symmetric pairwise
interaction weights (an Ising model conditioned on x).  With all alpha_ij = 0
the model factorizes into independent logistic regressions (ILRs).

Indices are 0-based throughout; alpha is stored sparsely on ordered pairs
(i, j) with i < j, one symmetric weight per pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DataError


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


def log_sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    """log(sigmoid(z)) without overflow: -log(1 + exp(-z))."""
    res = -np.logaddexp(0.0, -np.asarray(z, dtype=float))
    return res if res.ndim else float(res)


@dataclass(eq=False)
class ModelParams:
    """Learned parameters: per-label coefficients and sparse pairwise weights.

    beta has one row per label (shape m x D).  alpha maps ordered pairs
    (i, j), 0 <= i < j < m, to a real weight; pairs absent from the map are
    zero.  Access through :meth:`alpha_at` resolves (j, i) to the same entry.
    """

    beta: np.ndarray
    alpha: dict[tuple[int, int], float]
    num_labels: int
    num_features: int

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        if self.beta.shape != (self.num_labels, self.num_features):
            raise DataError(
                f"beta shape {self.beta.shape} does not match "
                f"(num_labels, num_features)=({self.num_labels}, {self.num_features})"
            )
        if not np.all(np.isfinite(self.beta)):
            raise DataError("beta contains non-finite values")
        for (i, j), v in self.alpha.items():
            if not (0 <= i < j < self.num_labels):
                raise DataError(f"alpha key ({i}, {j}) is not an ordered pair in range")
            if not np.isfinite(v):
                raise DataError(f"alpha[{i}, {j}] is not finite")

    @classmethod
    def zeros(cls, num_labels: int, num_features: int) -> "ModelParams":
        return cls(
            beta=np.zeros((num_labels, num_features)),
            alpha={},
            num_labels=num_labels,
            num_features=num_features,
        )

    def alpha_at(self, i: int, j: int) -> float:
        """Pairwise weight for labels i and j (order-insensitive); 0 if absent."""
        if i == j:
            raise DataError("no self-interaction weights")
        key = (i, j) if i < j else (j, i)
        return self.alpha.get(key, 0.0)

    def alpha_matrix(self) -> np.ndarray:
        """Dense symmetric m x m interaction matrix with zero diagonal."""
        a = np.zeros((self.num_labels, self.num_labels))
        for (i, j), v in self.alpha.items():
            a[i, j] = v
            a[j, i] = v
        return a

    def nnz_alpha(self) -> int:
        return sum(1 for v in self.alpha.values() if v != 0.0)

    def nnz_beta(self) -> int:
        return int(np.count_nonzero(self.beta))


@dataclass
class Instance:
    """One example: a feature vector and its {-1,+1} label vector."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float).reshape(-1)
        self.labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if self.labels.size and not np.all(np.abs(self.labels) == 1):
            raise DataError("labels must be exactly -1 or +1")


@dataclass
class MultilabelDataset:
    """A collection of instances sharing feature dimension D and label count m."""

    instances: list[Instance]
    num_features: int
    num_labels: int
    label_names: tuple[str, ...]

    def __post_init__(self):
        if len(self.instances) < 1:
            raise DataError("dataset must contain at least one instance")
        if len(self.label_names) != self.num_labels:
            raise DataError("label_names length must equal num_labels")
        for idx, inst in enumerate(self.instances):
            if inst.features.size != self.num_features:
                raise DataError(
                    f"instance {idx} has {inst.features.size} features, expected {self.num_features}"
                )
            if inst.labels.size != self.num_labels:
                raise DataError(
                    f"instance {idx} has {inst.labels.size} labels, expected {self.num_labels}"
                )

    def __len__(self) -> int:
        return len(self.instances)

    @cached_property
    def feature_matrix(self) -> np.ndarray:
        """n x D feature matrix (computed once, then cached)."""
        return np.array([inst.features for inst in self.instances], dtype=float)

    @cached_property
    def label_matrix(self) -> np.ndarray:
        """n x m label matrix of +-1 floats (computed once, then cached)."""
        return np.array([inst.labels for inst in self.instances], dtype=float)


def _check_dims(params: ModelParams, x: np.ndarray, y: np.ndarray | None = None) -> None:
    if x.shape != (params.num_features,):
        raise DataError(
            f"feature vector has shape {x.shape}, expected ({params.num_features},)"
        )
    if y is not None and y.shape != (params.num_labels,):
        raise DataError(
            f"label vector has shape {y.shape}, expected ({params.num_labels},)"
        )


def joint_score(params: ModelParams, x: np.ndarray, y: np.ndarray) -> float:
    """Unnormalized log-probability sum_i y_i <beta_i, x> + sum_{i<j} alpha_ij y_i y_j."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(params, x, y)
    score = float(y @ (params.beta @ x))
    for (i, j), v in params.alpha.items():
        score += v * y[i] * y[j]
    return score


def _activation(params: ModelParams, x: np.ndarray, y: np.ndarray, i: int) -> float:
    """<beta_i, x> plus the interaction field sum_{j != i} alpha_{ij} y_j."""
    a = float(params.beta[i] @ x)
    for (p, q), v in params.alpha.items():
        if p == i:
            a += v * y[q]
        elif q == i:
            a += v * y[p]
    return a


def conditional_label_prob(
    params: ModelParams, x: np.ndarray, y: np.ndarray, i: int
) -> float:
    """p(y_i | y_{-i}, x): the logistic of twice the activation at label i.

    Equals sigmoid(2 * y_i * (<beta_i, x> + sum_{j != i} alpha_{ij} y_j)).
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(params, x, y)
    if not 0 <= i < params.num_labels:
        raise IndexError(f"label index {i} out of range [0, {params.num_labels})")
    return float(sigmoid(2.0 * y[i] * _activation(params, x, y, i)))


def ilrs_label_prob(params: ModelParams, x: np.ndarray, i: int, y_i: int) -> float:
    """Independent-logistic probability of label i, ignoring all pairwise weights."""
    x = np.asarray(x, dtype=float).reshape(-1)
    _check_dims(params, x)
    if not 0 <= i < params.num_labels:
        raise IndexError(f"label index {i} out of range [0, {params.num_labels})")
    if y_i not in (-1, 1):
        raise DataError("y_i must be -1 or +1")
    return float(sigmoid(2.0 * y_i * float(params.beta[i] @ x)))

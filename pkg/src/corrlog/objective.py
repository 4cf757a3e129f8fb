"""Training objective: negative log pseudo-likelihood with elastic-net penalty.

The pseudo-likelihood replaces the intractable joint likelihood by the product
of each label's conditional given the remaining labels, so the partition
function never appears.  The full objective splits as

    full = nll_pl + lambda1*(||beta||_2^2 + eps*||beta||_1)
                  + lambda2*(||alpha||_2^2 + eps*||alpha||_1)

whose smooth part (everything except the l1 terms) has the closed-form
gradient implemented here.  Pairwise gradients are materialized for all
m(m-1)/2 candidate pairs so the proximal step can activate or kill any pair.

Vectorized internals operate on the dense representation (beta: m x D array,
alpha: strictly-upper-triangular m x m array); public functions accept
:class:`~corrlog.model.ModelParams` and :class:`~corrlog.model.MultilabelDataset`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError
from .model import ModelParams, MultilabelDataset, sigmoid


@dataclass(frozen=True)
class RegularizationConfig:
    """Elastic-net weights: lambda1 on beta, lambda2 on alpha, epsilon on the l1 part."""

    lambda1: float = 0.001
    lambda2: float = 0.001
    epsilon: float = 1.0

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0 or self.epsilon < 0:
            raise DataError("regularization weights must be nonnegative")


@dataclass
class GradientBuffer:
    """Gradient of the smooth objective part.

    grad_alpha is an m x m array whose strictly upper triangle holds the
    gradient for every candidate pair (i, j), i < j, including pairs currently
    absent from the sparse parameter map (treated as zero-valued).
    """

    grad_beta: np.ndarray
    grad_alpha: np.ndarray

    def alpha_pair(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        return float(self.grad_alpha[i, j])


def dense_alpha_upper(params: ModelParams) -> np.ndarray:
    """Strictly upper-triangular m x m array of the sparse pairwise weights."""
    a = np.zeros((params.num_labels, params.num_labels))
    for (i, j), v in params.alpha.items():
        a[i, j] = v
    return a


def params_from_dense(beta: np.ndarray, alpha_upper: np.ndarray,
                      num_features: int) -> ModelParams:
    """Build ModelParams from dense arrays, storing only nonzero pairs."""
    m = beta.shape[0]
    idx = np.nonzero(np.triu(alpha_upper, 1))
    alpha = {(int(i), int(j)): float(alpha_upper[i, j]) for i, j in zip(*idx)}
    return ModelParams(beta=beta.copy(), alpha=alpha, num_labels=m,
                       num_features=num_features)


def _dataset_arrays(dataset: MultilabelDataset) -> tuple[np.ndarray, np.ndarray]:
    if len(dataset) == 0:
        raise DataError("dataset is empty")
    return dataset.feature_matrix, dataset.label_matrix


def _activations(beta: np.ndarray, alpha_upper: np.ndarray,
                 x_mat: np.ndarray, y_mat: np.ndarray) -> np.ndarray:
    """n x m activations: a[l, i] = <beta_i, x_l> + sum_{j != i} alpha_{ij} y_{lj}."""
    alpha_sym = alpha_upper + alpha_upper.T
    return x_mat @ beta.T + y_mat @ alpha_sym


def nll_pl_dense(beta: np.ndarray, alpha_upper: np.ndarray,
                 x_mat: np.ndarray, y_mat: np.ndarray) -> float:
    """Mean over instances of the summed per-label conditional negative log-probs."""
    a = _activations(beta, alpha_upper, x_mat, y_mat)
    # -log sigmoid(2 y a) = softplus(-2 y a), stable for any score magnitude
    losses = np.logaddexp(0.0, -2.0 * y_mat * a)
    return float(losses.sum(axis=1).mean())


def smooth_value_dense(beta: np.ndarray, alpha_upper: np.ndarray,
                       x_mat: np.ndarray, y_mat: np.ndarray,
                       reg: RegularizationConfig) -> float:
    return (
        nll_pl_dense(beta, alpha_upper, x_mat, y_mat)
        + reg.lambda1 * float(np.sum(beta * beta))
        + reg.lambda2 * float(np.sum(alpha_upper * alpha_upper))
    )


def full_value_dense(beta: np.ndarray, alpha_upper: np.ndarray,
                     x_mat: np.ndarray, y_mat: np.ndarray,
                     reg: RegularizationConfig) -> float:
    return (
        smooth_value_dense(beta, alpha_upper, x_mat, y_mat, reg)
        + reg.lambda1 * reg.epsilon * float(np.sum(np.abs(beta)))
        + reg.lambda2 * reg.epsilon * float(np.sum(np.abs(alpha_upper)))
    )


def smooth_grad_dense(beta: np.ndarray, alpha_upper: np.ndarray,
                      x_mat: np.ndarray, y_mat: np.ndarray,
                      reg: RegularizationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the smooth part wrt beta and (upper-triangular) alpha."""
    n = x_mat.shape[0]
    a = _activations(beta, alpha_upper, x_mat, y_mat)
    # xi[l, i] = -2 y_li * sigmoid(-2 y_li a_li), the per-term loss derivative
    xi = -2.0 * y_mat * sigmoid(-2.0 * y_mat * a)
    grad_beta = (xi.T @ x_mat) / n + 2.0 * reg.lambda1 * beta
    pair = xi.T @ y_mat
    grad_alpha = np.triu(pair + pair.T, 1) / n + 2.0 * reg.lambda2 * alpha_upper
    return grad_beta, grad_alpha


def neg_log_pseudo_likelihood(params: ModelParams, dataset: MultilabelDataset) -> float:
    """Mean negative log pseudo-likelihood over the dataset; always >= 0."""
    x_mat, y_mat = _dataset_arrays(dataset)
    _check_model_data(params, dataset)
    return nll_pl_dense(params.beta, dense_alpha_upper(params), x_mat, y_mat)


def elastic_net_penalty(params: ModelParams, reg: RegularizationConfig) -> float:
    """lambda1*(||beta||_2^2 + eps*||beta||_1) + lambda2*(||alpha||_2^2 + eps*||alpha||_1)."""
    beta_sq = float(np.sum(params.beta * params.beta))
    beta_l1 = float(np.sum(np.abs(params.beta)))
    alpha_sq = sum(v * v for v in params.alpha.values())
    alpha_l1 = sum(abs(v) for v in params.alpha.values())
    return (
        reg.lambda1 * (beta_sq + reg.epsilon * beta_l1)
        + reg.lambda2 * (alpha_sq + reg.epsilon * alpha_l1)
    )


def smooth_objective(params: ModelParams, dataset: MultilabelDataset,
                     reg: RegularizationConfig) -> float:
    """Pseudo-likelihood plus only the quadratic penalty terms (epsilon plays no role)."""
    x_mat, y_mat = _dataset_arrays(dataset)
    _check_model_data(params, dataset)
    return smooth_value_dense(params.beta, dense_alpha_upper(params), x_mat, y_mat, reg)


def full_objective(params: ModelParams, dataset: MultilabelDataset,
                   reg: RegularizationConfig) -> float:
    """The quantity training minimizes: pseudo-likelihood plus elastic-net penalty."""
    return neg_log_pseudo_likelihood(params, dataset) + elastic_net_penalty(params, reg)


def smooth_gradient(params: ModelParams, dataset: MultilabelDataset,
                    reg: RegularizationConfig) -> GradientBuffer:
    """Exact gradient of :func:`smooth_objective` over beta and all candidate pairs."""
    x_mat, y_mat = _dataset_arrays(dataset)
    _check_model_data(params, dataset)
    gb, ga = smooth_grad_dense(params.beta, dense_alpha_upper(params), x_mat, y_mat, reg)
    return GradientBuffer(grad_beta=gb, grad_alpha=ga)


def surrogate_objective(candidate: ModelParams, anchor: ModelParams,
                        grad: GradientBuffer, eta: float,
                        dataset: MultilabelDataset, reg: RegularizationConfig) -> float:
    """Quadratic-plus-l1 upper model of the full objective around ``anchor``.

    smooth(anchor) + <grad, c - a> + ||c - a||^2 / (2 eta) + l1 penalties at the
    candidate.  Majorizes the full objective whenever 1/eta dominates the
    smooth gradient's Lipschitz constant, with equality at the anchor.
    """
    if eta <= 0:
        raise DataError("eta must be positive")
    db = candidate.beta - anchor.beta
    da = np.triu(dense_alpha_upper(candidate) - dense_alpha_upper(anchor), 1)
    value = smooth_objective(anchor, dataset, reg)
    value += float(np.sum(grad.grad_beta * db)) + float(np.sum(db * db)) / (2.0 * eta)
    value += float(np.sum(grad.grad_alpha * da)) + float(np.sum(da * da)) / (2.0 * eta)
    value += reg.lambda1 * reg.epsilon * float(np.sum(np.abs(candidate.beta)))
    value += reg.lambda2 * reg.epsilon * sum(abs(v) for v in candidate.alpha.values())
    return value


def _check_model_data(params: ModelParams, dataset: MultilabelDataset) -> None:
    if params.num_features != dataset.num_features or params.num_labels != dataset.num_labels:
        raise DataError(
            f"model dimensions ({params.num_labels} labels, {params.num_features} features) "
            f"do not match dataset ({dataset.num_labels} labels, {dataset.num_features} features)"
        )


def check_finite_dataset(dataset: MultilabelDataset) -> None:
    """Raise :class:`NumericError` naming the first instance with non-finite features."""
    x_mat = dataset.feature_matrix
    bad = ~np.isfinite(x_mat)
    if bad.any():
        idx = int(np.nonzero(bad.any(axis=1))[0][0])
        raise NumericError(f"instance {idx} has non-finite feature values")

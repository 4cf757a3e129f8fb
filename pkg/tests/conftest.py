"""Shared test helpers: independent brute-force oracles and problem generators.

The oracle code here deliberately avoids the package's vectorized paths:
scores and probabilities are recomputed with plain Python loops so that
agreement between the two is meaningful.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from corrlog.model import Instance, ModelParams, MultilabelDataset


def oracle_score(beta, alpha_pairs, x, y) -> float:
    """Joint score recomputed with explicit loops (independent of the package)."""
    s = 0.0
    for i in range(len(y)):
        dot = 0.0
        for d in range(len(x)):
            dot += beta[i][d] * x[d]
        s += y[i] * dot
    for (i, j), v in alpha_pairs.items():
        s += v * y[i] * y[j]
    return s


def all_label_vectors(m: int):
    """All label vectors in lexicographic order with +1 before -1 per coordinate."""
    for bits in itertools.product((1, -1), repeat=m):
        yield np.array(bits, dtype=np.int8)


def oracle_joint_table(params: ModelParams, x) -> dict[tuple[int, ...], float]:
    """Map from each label configuration to its unnormalized log-probability."""
    alpha_pairs = dict(params.alpha)
    beta = params.beta.tolist()
    return {
        tuple(int(v) for v in y): oracle_score(beta, alpha_pairs, list(x), list(y))
        for y in all_label_vectors(params.num_labels)
    }


def oracle_conditional(params: ModelParams, x, y, i: int) -> float:
    """p(y_i | y_{-i}, x) from the brute-force joint table."""
    table = oracle_joint_table(params, x)
    y = np.asarray(y, dtype=np.int8)
    y_flip = y.copy()
    y_flip[i] = -y_flip[i]
    s_keep = table[tuple(int(v) for v in y)]
    s_flip = table[tuple(int(v) for v in y_flip)]
    # p / (p + p_flip) computed stably in log space
    return 1.0 / (1.0 + math.exp(s_flip - s_keep))


def random_params(rng: np.random.Generator, m: int, d: int, *,
                  alpha_scale: float = 1.0, density: float = 1.0) -> ModelParams:
    beta = rng.normal(size=(m, d))
    alpha = {}
    for i in range(m):
        for j in range(i + 1, m):
            if rng.uniform() < density:
                alpha[(i, j)] = float(rng.normal() * alpha_scale)
    return ModelParams(beta=beta, alpha=alpha, num_labels=m, num_features=d)


def random_dataset(rng: np.random.Generator, n: int, m: int, d: int) -> MultilabelDataset:
    instances = []
    for _ in range(n):
        x = rng.normal(size=d)
        x /= max(1.0, np.linalg.norm(x))
        y = rng.choice([-1, 1], size=m)
        instances.append(Instance(features=x, labels=y))
    return MultilabelDataset(
        instances=instances,
        num_features=d,
        num_labels=m,
        label_names=tuple(f"label{i + 1}" for i in range(m)),
    )

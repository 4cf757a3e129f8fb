"""Joint MAP label prediction by loopy max-product message passing.

The prediction problem  argmax_y  sum_i y_i <beta_i, x> + sum_{i<j} alpha_ij y_i y_j
is a MAP query on a pairwise graphical model whose nodes are labels and whose
edges are the nonzero pairwise weights.  Max-product is exact when that graph
is a forest and a well-tested heuristic on loopy graphs; messages live in the
log domain, are updated synchronously (flooding), and are renormalized every
round by subtracting their maximum, which never changes the argmax.

Ties at decode time resolve to +1; the brute-force oracle mirrors this by
scanning configurations in lexicographic order with +1 sorted before -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .model import ModelParams

ENUMERATION_LIMIT = 20
_CHUNK = 1 << 16

# index 0 holds the value for state +1, index 1 for state -1
_STATES = np.array([1.0, -1.0])


@dataclass(frozen=True)
class BpConfig:
    max_iters: int = 50
    damping: float = 0.0
    convergence_tol: float = 1e-9

    def __post_init__(self):
        if self.max_iters < 1:
            raise DataError("max_iters must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise DataError("damping must lie in [0, 1)")
        if self.convergence_tol < 0:
            raise DataError("convergence_tol must be nonnegative")


@dataclass
class BeliefState:
    """Messages and beliefs left by a decoding run.

    ``messages[(i, j)]`` is the log-domain message from label i to label j,
    one value per target state (+1 first); messages exist only for edges with
    a nonzero pairwise weight.  ``beliefs[i]`` holds the two log max-marginals
    of label i.
    """

    messages: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    beliefs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    converged: bool = False
    iterations_run: int = 0


def predict_map_bp(params: ModelParams, x: np.ndarray,
                   config: BpConfig | None = None) -> tuple[np.ndarray, BeliefState]:
    """Decode the most probable label vector for x; returns (labels, state).

    With an empty interaction map this reduces exactly to per-label sign
    decisions (ties to +1).  Non-convergence within the iteration budget is
    reported on the state, not raised.
    """
    if config is None:
        config = BpConfig()
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (params.num_features,):
        raise DataError(
            f"feature vector has shape {x.shape}, expected ({params.num_features},)"
        )
    m = params.num_labels
    unary = params.beta @ x  # node i carries log-potential y_i * unary[i]

    edges = [(i, j, v) for (i, j), v in sorted(params.alpha.items()) if v != 0.0]
    neighbors: dict[int, list[tuple[int, float]]] = {i: [] for i in range(m)}
    for i, j, v in edges:
        neighbors[i].append((j, v))
        neighbors[j].append((i, v))

    state = BeliefState()
    if edges:
        messages = {}
        for i, j, _ in edges:
            messages[(i, j)] = np.zeros(2)
            messages[(j, i)] = np.zeros(2)

        converged = False
        iterations = 0
        for iterations in range(1, config.max_iters + 1):
            new_messages = {}
            max_change = 0.0
            for (src, dst), old in messages.items():
                weight = params.alpha_at(src, dst)
                # accumulated log-belief of src excluding what dst sent it
                src_belief = unary[src] * _STATES
                for nbr, _ in neighbors[src]:
                    if nbr != dst:
                        src_belief = src_belief + messages[(nbr, src)]
                # msg[s_dst] = max over s_src of src_belief + weight*s_src*s_dst
                pairwise = weight * np.outer(_STATES, _STATES)
                msg = (src_belief[:, None] + pairwise).max(axis=0)
                msg = msg - msg.max()
                if config.damping > 0.0:
                    msg = config.damping * old + (1.0 - config.damping) * msg
                new_messages[(src, dst)] = msg
                max_change = max(max_change, float(np.max(np.abs(msg - old))))
            messages = new_messages
            if max_change < config.convergence_tol:
                converged = True
                break
        state.messages = messages
        state.converged = converged
        state.iterations_run = iterations
    else:
        state.converged = True

    beliefs = np.outer(unary, _STATES)
    for (src, dst), msg in state.messages.items():
        beliefs[dst] += msg
    state.beliefs = beliefs

    labels = np.where(beliefs[:, 0] >= beliefs[:, 1], 1, -1).astype(np.int8)
    return labels, state


def _config_chunks(m: int):
    """Yield (offset, config_block) over all 2^m label vectors, lexicographic."""
    total = 1 << m
    shifts = np.arange(m - 1, -1, -1)
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        bits = (np.arange(start, stop, dtype=np.int64)[:, None] >> shifts) & 1
        yield start, (1 - 2 * bits).astype(float)


def _chunk_scores(params: ModelParams, x: np.ndarray, configs: np.ndarray) -> np.ndarray:
    unary = params.beta @ x
    scores = configs @ unary
    for (i, j), v in params.alpha.items():
        scores += v * configs[:, i] * configs[:, j]
    return scores


def _guard_enumeration(m: int) -> None:
    if m > ENUMERATION_LIMIT:
        raise DataError(
            f"exact enumeration over 2^{m} label vectors is refused (limit m <= {ENUMERATION_LIMIT})"
        )


def map_bruteforce(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Exact MAP by scoring all 2^m label vectors; the testing oracle for BP.

    Ties go to the lexicographically first optimum with +1 ordered before -1.
    """
    _guard_enumeration(params.num_labels)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (params.num_features,):
        raise DataError(
            f"feature vector has shape {x.shape}, expected ({params.num_features},)"
        )
    best_score = -np.inf
    best = None
    for _, configs in _config_chunks(params.num_labels):
        scores = _chunk_scores(params, x, configs)
        idx = int(np.argmax(scores))
        if scores[idx] > best_score:
            best_score = float(scores[idx])
            best = configs[idx]
    return best.astype(np.int8)


def margin(params: ModelParams, x: np.ndarray, y: np.ndarray) -> float:
    """Score of y minus the best score among all other label vectors.

    Positive exactly when y is the unique MAP labeling; uses full enumeration,
    so it is a desk-scale diagnostic (m <= 20).
    """
    _guard_enumeration(params.num_labels)
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y).reshape(-1)
    m = params.num_labels
    if x.shape != (params.num_features,) or y.shape != (m,):
        raise DataError("dimension mismatch between parameters, features, and labels")
    y_index = 0
    for pos, value in enumerate(y):
        if value == -1:
            y_index |= 1 << (m - 1 - pos)

    own_score = None
    best_other = -np.inf
    for offset, configs in _config_chunks(m):
        scores = _chunk_scores(params, x, configs)
        local = y_index - offset
        if 0 <= local < scores.shape[0]:
            own_score = float(scores[local])
            scores[local] = -np.inf
        best_other = max(best_other, float(scores.max()))
    return own_score - best_other


def margin_loss(params: ModelParams, x: np.ndarray, y: np.ndarray,
                gamma: float = 1.0) -> float:
    """Ramp loss of the margin: 1 below zero, 0 above gamma, linear between."""
    if gamma <= 0:
        raise DataError("gamma must be positive")
    f = margin(params, x, y)
    if f < 0:
        return 1.0
    if f >= gamma:
        return 0.0
    return 1.0 - f / gamma

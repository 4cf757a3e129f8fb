"""Cross-validation, paired significance testing, and the stability check.

The paired t-test's two-sided p-value comes from the Student-t CDF expressed
through the regularized incomplete beta function, implemented here with the
standard continued-fraction expansion so the package needs no statistics
dependency.

The stability check retrains after swapping one training example for a fresh
one and compares the parameter movement

    sum_i ||beta_i' - beta_i||_2 + sum_{i<j} |alpha_ij' - alpha_ij|

against the theoretical ceiling 16 / (min(lambda1, lambda2) * n), which holds
for exact minimizers; the report records the training tolerance used since a
loose tolerance can void the premise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DataError
from .inference import BpConfig, predict_map_bp
from .metrics import DISPLAY_NAMES, METRIC_NAMES, MetricsReport, compute_metrics
from .model import Instance, ModelParams, MultilabelDataset
from .optimizer import TrainConfig, train_corrlog, train_ilrs

TRAINERS = ("corrlog", "ilrs")


# --- paired t-test -----------------------------------------------------------

def _beta_cont_frac(a: float, b: float, x: float, max_iters: int = 300,
                    eps: float = 3e-16) -> float:
    """Continued fraction for the incomplete beta integral (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iters + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise DataError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    dof: int
    degenerate: bool = False


def paired_t_test(per_fold_a, per_fold_b) -> TTestResult:
    """Two-sided paired t-test on per-fold scores of two methods.

    Zero-variance differences are flagged degenerate instead of crashing:
    identical inputs give p = 1, a deterministic nonzero shift gives p = 0.
    """
    a = np.asarray(per_fold_a, dtype=float)
    b = np.asarray(per_fold_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("paired t-test needs two equal-length score vectors")
    k = a.size
    if k < 2:
        raise DataError("paired t-test needs at least two pairs")
    diffs = a - b
    mean = float(diffs.mean())
    spread = float(np.max(np.abs(diffs - mean)))
    if spread <= 1e-15 * max(1.0, float(np.max(np.abs(diffs)))):
        if abs(mean) <= 1e-15:
            return TTestResult(0.0, 1.0, k - 1, degenerate=True)
        return TTestResult(math.copysign(math.inf, mean), 0.0, k - 1, degenerate=True)
    sd = float(diffs.std(ddof=1))
    t = mean / (sd / math.sqrt(k))
    dof = k - 1
    p = regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))
    return TTestResult(t, p, dof)


# --- cross-validation --------------------------------------------------------

@dataclass
class CvResult:
    """Per-fold metrics with their mean/std aggregation."""

    trainer: str
    k: int
    seed: int
    folds: list[MetricsReport]
    means: dict[str, float]
    stds: dict[str, float]
    ttests: dict[str, TTestResult] | None = None

    def per_fold(self, metric: str) -> list[float]:
        return [getattr(r, metric) for r in self.folds]

    def to_json(self) -> str:
        doc = {}
        for name in METRIC_NAMES:
            entry = {
                "mean": self.means[name],
                "std": self.stds[name],
                "per_fold": self.per_fold(name),
            }
            if self.ttests is not None:
                tt = self.ttests[name]
                entry["t_test"] = {
                    "t_statistic": tt.t_statistic,
                    "p_value": tt.p_value,
                    "dof": tt.dof,
                    "degenerate": tt.degenerate,
                }
            doc[name] = entry
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{self.k}-fold cross-validation, trainer={self.trainer}, seed={self.seed}"]
        for name in METRIC_NAMES:
            row = f"  {DISPLAY_NAMES[name]:<13} {self.means[name]:.4f} +- {self.stds[name]:.4f}"
            if self.ttests is not None:
                tt = self.ttests[name]
                flag = " (degenerate)" if tt.degenerate else ""
                row += f"   t={tt.t_statistic:+.3f} p={tt.p_value:.4f}{flag}"
            lines.append(row)
        return "\n".join(lines)


def _subset(dataset: MultilabelDataset, indices) -> MultilabelDataset:
    return MultilabelDataset(
        [dataset.instances[i] for i in indices],
        dataset.num_features,
        dataset.num_labels,
        dataset.label_names,
    )


def fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded permutation split into k near-equal disjoint folds covering 0..n-1."""
    if k < 2:
        raise DataError("need at least 2 folds")
    if n < k:
        raise DataError(f"cannot split {n} instances into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return list(np.array_split(perm, k))


def _fit(trainer: str, train_set: MultilabelDataset, config: TrainConfig) -> ModelParams:
    if trainer == "corrlog":
        params, _ = train_corrlog(train_set, config)
        return params
    if trainer == "ilrs":
        return train_ilrs(train_set, config)
    raise DataError(f"unknown trainer {trainer!r}; expected one of {TRAINERS}")


def predict_dataset(params: ModelParams, dataset: MultilabelDataset,
                    bp_config: BpConfig | None = None) -> tuple[np.ndarray, list[int]]:
    """Decode every instance; returns (n x m predictions, non-converged indices)."""
    preds = np.empty((len(dataset), dataset.num_labels), dtype=np.int8)
    flagged = []
    for idx, inst in enumerate(dataset.instances):
        labels, state = predict_map_bp(params, inst.features, bp_config)
        preds[idx] = labels
        if not state.converged:
            flagged.append(idx)
    return preds, flagged


def cross_validate(dataset: MultilabelDataset, k: int, trainer: str,
                   config: TrainConfig, seed: int,
                   bp_config: BpConfig | None = None) -> CvResult:
    """Train on k-1 folds and score the held-out fold, for every fold."""
    folds = fold_indices(len(dataset), k, seed)
    reports = []
    for held_out in range(k):
        train_idx = np.concatenate([f for i, f in enumerate(folds) if i != held_out])
        train_set = _subset(dataset, train_idx)
        test_set = _subset(dataset, folds[held_out])
        params = _fit(trainer, train_set, config)
        preds, _ = predict_dataset(params, test_set, bp_config)
        reports.append(compute_metrics(test_set.label_matrix.astype(int), preds))
    means = {n: float(np.mean([getattr(r, n) for r in reports])) for n in METRIC_NAMES}
    stds = {n: float(np.std([getattr(r, n) for r in reports], ddof=1)) for n in METRIC_NAMES}
    return CvResult(trainer=trainer, k=k, seed=seed, folds=reports, means=means, stds=stds)


def compare_cv(result: CvResult, baseline: CvResult) -> CvResult:
    """Attach per-metric paired t-tests of ``result`` against ``baseline``."""
    if result.k != baseline.k:
        raise DataError("cannot pair fold scores across different fold counts")
    ttests = {
        name: paired_t_test(result.per_fold(name), baseline.per_fold(name))
        for name in METRIC_NAMES
    }
    return replace(result, ttests=ttests)


# --- stability check ---------------------------------------------------------

def params_distance(a: ModelParams, b: ModelParams) -> float:
    """Sum of per-label l2 beta-row distances plus l1 distance over pairs."""
    if a.num_labels != b.num_labels or a.num_features != b.num_features:
        raise DataError("models have different shapes")
    dist = float(np.linalg.norm(a.beta - b.beta, axis=1).sum())
    for key in set(a.alpha) | set(b.alpha):
        dist += abs(a.alpha.get(key, 0.0) - b.alpha.get(key, 0.0))
    return dist


@dataclass
class StabilityReport:
    bound: float
    diffs: list[float]
    n: int
    min_lambda: float
    rel_tol: float
    trials: int
    replaced_indices: list[int] = field(default_factory=list)

    @property
    def max_diff(self) -> float:
        return max(self.diffs)

    @property
    def mean_diff(self) -> float:
        return float(np.mean(self.diffs))

    @property
    def all_within_bound(self) -> bool:
        return all(d <= self.bound for d in self.diffs)

    def to_json(self) -> str:
        return json.dumps(
            {
                "bound": self.bound,
                "n": self.n,
                "min_lambda": self.min_lambda,
                "rel_tol": self.rel_tol,
                "trials": self.trials,
                "diffs": self.diffs,
                "max_diff": self.max_diff,
                "mean_diff": self.mean_diff,
                "all_within_bound": self.all_within_bound,
            },
            indent=2,
            sort_keys=True,
        )

    def to_text(self) -> str:
        lines = [
            f"replace-one stability over {self.trials} trials "
            f"(n={self.n}, min lambda={self.min_lambda:g}, training tolerance={self.rel_tol:g})",
            f"  bound 16/(min_lambda*n) = {self.bound:.6g}",
            f"  max parameter movement  = {self.max_diff:.6g}",
            f"  mean parameter movement = {self.mean_diff:.6g}",
            f"  all within bound: {self.all_within_bound}",
        ]
        return "\n".join(lines)


def stability_experiment(dataset: MultilabelDataset, config: TrainConfig,
                         trials: int, seed: int,
                         pool: MultilabelDataset) -> StabilityReport:
    """Measure how much one swapped training example moves the fitted model.

    Each trial replaces a random training example with a random one from the
    held-out ``pool`` and retrains from the zero initialization to the same
    tolerance, so both runs approximate exact minimizers of their objectives.
    """
    if pool is None or len(pool) < 1:
        raise DataError("stability experiment needs a held-out replacement pool")
    if pool.num_features != dataset.num_features or pool.num_labels != dataset.num_labels:
        raise DataError("pool dimensions do not match the training set")
    if trials < 1:
        raise DataError("need at least one trial")
    reg = config.reg
    if reg.lambda1 <= 0 or reg.lambda2 <= 0:
        raise DataError("stability bound requires lambda1, lambda2 > 0")

    base_params, _ = train_corrlog(dataset, config)
    n = len(dataset)
    min_lambda = min(reg.lambda1, reg.lambda2)
    rng = np.random.default_rng(seed)

    diffs = []
    replaced = []
    for _ in range(trials):
        swap_at = int(rng.integers(0, n))
        fresh = pool.instances[int(rng.integers(0, len(pool)))]
        instances = list(dataset.instances)
        instances[swap_at] = Instance(fresh.features.copy(), fresh.labels.copy())
        modified = MultilabelDataset(instances, dataset.num_features,
                                     dataset.num_labels, dataset.label_names)
        new_params, _ = train_corrlog(modified, config)
        diffs.append(params_distance(base_params, new_params))
        replaced.append(swap_at)

    return StabilityReport(
        bound=16.0 / (min_lambda * n),
        diffs=diffs,
        n=n,
        min_lambda=min_lambda,
        rel_tol=config.rel_tol,
        trials=trials,
        replaced_indices=replaced,
    )

"""Desk-scale graph-convolutional node classifier and fairness metrics.

A two-layer GCN (symmetric self-loop normalization, relu, dropout on the
hidden activations) trained full-batch with Adam and cross-entropy; plus
utility metrics (AUC by the rank statistic, F1 at threshold 0.5) and group
fairness metrics (statistical-parity and equal-opportunity differences).
Training is seed-deterministic and numpy-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import AttributedNetwork, minmax_normalize, selfloop_normalize


@dataclass
class GcnHyper:
    epochs: int = 1000
    lr: float = 1e-3
    dropout: float = 0.05
    hidden: int = 16
    seed: int = 0


@dataclass
class GcnModel:
    w1: np.ndarray
    w2: np.ndarray
    hidden: int
    seed: int


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_gcn(n_features: int, n_classes: int = 2, hidden: int = 16, seed: int = 0) -> GcnModel:
    rng = np.random.default_rng(seed)
    return GcnModel(_glorot(rng, n_features, hidden), _glorot(rng, hidden, n_classes),
                    hidden, seed)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def gcn_forward(model: GcnModel, net: AttributedNetwork, training: bool = False,
                dropout: float = 0.05, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Per-node class probabilities: softmax(P (relu(P X W1)) W2).

    P is the self-loop-normalized adjacency. In training mode the hidden
    activations get inverted dropout from the supplied generator.
    """
    p_hat = selfloop_normalize(net.adjacency)
    hidden = np.maximum(p_hat @ net.attributes @ model.w1, 0.0)
    if training:
        if rng is None:
            raise ValueError("training-mode forward needs a random generator")
        hidden = hidden * (rng.random(hidden.shape) >= dropout) / (1.0 - dropout)
    return _softmax(p_hat @ hidden @ model.w2)


class _Adam:
    def __init__(self, shapes, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        scale = np.sqrt(1.0 - self.beta2 ** self.t) / (1.0 - self.beta1 ** self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g ** 2
            p -= self.lr * scale * m / (np.sqrt(v) + self.eps)


def train_gcn(net: AttributedNetwork, splits: dict, hyper: Optional[GcnHyper] = None):
    """Train the classifier full-batch on the train split.

    Returns (model, per-epoch loss history). No early stopping; the val split
    is not consumed here. Deterministic given hyper.seed.
    """
    if net.labels is None:
        raise ValueError("network has no labels to train on")
    hyper = hyper or GcnHyper()
    train_idx = np.asarray(splits["train"], dtype=int)
    if train_idx.size == 0:
        raise ValueError("train split is empty")

    n_classes = 2
    model = init_gcn(net.n_attributes, n_classes, hyper.hidden, hyper.seed)
    rng = np.random.default_rng(hyper.seed)
    p_hat = selfloop_normalize(net.adjacency)
    px = p_hat @ net.attributes                      # fixed across epochs
    y = net.labels
    onehot = np.eye(n_classes)[y[train_idx]]
    optimizer = _Adam([model.w1.shape, model.w2.shape], hyper.lr)

    history = []
    for _ in range(hyper.epochs):
        pre = px @ model.w1
        hidden = np.maximum(pre, 0.0)
        mask = (rng.random(hidden.shape) >= hyper.dropout) / (1.0 - hyper.dropout)
        dropped = hidden * mask
        pooled = p_hat @ dropped
        probs = _softmax(pooled @ model.w2)
        history.append(float(-np.mean(np.log(probs[train_idx, y[train_idx]] + 1e-12))))

        d_logits = np.zeros_like(probs)
        d_logits[train_idx] = (probs[train_idx] - onehot) / train_idx.size
        d_w2 = pooled.T @ d_logits
        d_dropped = p_hat @ (d_logits @ model.w2.T)   # p_hat is symmetric
        d_pre = d_dropped * mask * (pre > 0)
        d_w1 = px.T @ d_pre
        optimizer.step([model.w1, model.w2], [d_w1, d_w2])

    return model, history


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outscores a random negative (ties: 1/2)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: test labels are single-class")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0   # average rank, 1-based
        i = j + 1
    pos_rank_sum = ranks[labels == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def f1_score_binary(predictions: np.ndarray, labels: np.ndarray) -> float:
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    tp = int(np.sum((predictions == 1) & (labels == 1)))
    fp = int(np.sum((predictions == 1) & (labels == 0)))
    fn = int(np.sum((predictions == 0) & (labels == 1)))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2.0 * tp / (2 * tp + fp + fn)


def evaluate_utility(model: GcnModel, net: AttributedNetwork, test_split) -> tuple:
    """(AUC, F1) on the test split; errors out if the split is single-class."""
    test_idx = np.asarray(test_split, dtype=int)
    probs = gcn_forward(model, net)
    scores = probs[test_idx, 1]
    y = net.labels[test_idx]
    auc = auc_score(scores, y)
    f1 = f1_score_binary((scores >= 0.5).astype(int), y)
    return auc, f1


def _rate(mask_num: np.ndarray, mask_den: np.ndarray) -> float:
    den = int(mask_den.sum())
    if den == 0:
        return float("nan")     # conditioning set empty: flagged undefined
    return float(np.sum(mask_num & mask_den) / den)


def evaluate_fairness(predictions: np.ndarray, labels: np.ndarray,
                      sensitive: np.ndarray, test_split):
    """Statistical-parity and equal-opportunity gaps on the test split.

    delta_sp = |P(yhat=1 | s=i) - P(yhat=1 | s=j)| and delta_eo conditions
    additionally on y=1. For two groups returns scalars; for more, symmetric
    G x G tables with NaN marking undefined entries, plus the mean over
    defined pairs as the headline scalar.
    """
    test_idx = np.asarray(test_split, dtype=int)
    pred = np.asarray(predictions, dtype=int)[test_idx]
    y = np.asarray(labels, dtype=int)[test_idx]
    s = np.asarray(sensitive, dtype=int)[test_idx]
    n_groups = int(np.asarray(sensitive, dtype=int).max()) + 1

    pos_rate = [_rate(pred == 1, s == g) for g in range(n_groups)]
    tpr = [_rate(pred == 1, (s == g) & (y == 1)) for g in range(n_groups)]

    if n_groups == 2:
        return abs(pos_rate[0] - pos_rate[1]), abs(tpr[0] - tpr[1])

    sp = np.zeros((n_groups, n_groups))
    eo = np.zeros((n_groups, n_groups))
    for i in range(n_groups):
        for j in range(i + 1, n_groups):
            sp[i, j] = sp[j, i] = abs(pos_rate[i] - pos_rate[j])
            eo[i, j] = eo[j, i] = abs(tpr[i] - tpr[j])
    return sp, eo


@dataclass(frozen=True)
class FairnessReport:
    """Utility and group-fairness summary of one trained classifier."""

    auc: float
    f1: float
    delta_sp: float
    delta_eo: float
    sp_pairs: Optional[np.ndarray] = None
    eo_pairs: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and np.isnan(v) else v

        d = {"auc": self.auc, "f1": self.f1,
             "delta_sp": clean(self.delta_sp), "delta_eo": clean(self.delta_eo)}
        if self.sp_pairs is not None:
            d["sp_pairs"] = [[clean(float(v)) for v in row] for row in self.sp_pairs]
            d["eo_pairs"] = [[clean(float(v)) for v in row] for row in self.eo_pairs]
        return d


def make_splits(labels: np.ndarray, seed: int = 0,
                fractions: tuple = (0.5, 0.25, 0.25)) -> dict:
    """Seeded train/val/test node splits, stratified by label."""
    labels = np.asarray(labels, dtype=int)
    rng = np.random.default_rng(seed)
    parts = {"train": [], "val": [], "test": []}
    for value in np.unique(labels):
        idx = np.flatnonzero(labels == value)
        rng.shuffle(idx)
        n_train = int(round(fractions[0] * idx.size))
        n_val = int(round(fractions[1] * idx.size))
        parts["train"].append(idx[:n_train])
        parts["val"].append(idx[n_train:n_train + n_val])
        parts["test"].append(idx[n_train + n_val:])
    return {k: np.sort(np.concatenate(v)) for k, v in parts.items()}


def fairness_evaluation(net: AttributedNetwork, seed: int = 0,
                        hyper: Optional[GcnHyper] = None,
                        normalize: bool = True) -> FairnessReport:
    """Train the classifier and report utility plus fairness metrics.

    With ``normalize`` the attributes are min-max mapped first; debiased
    networks already live on that scale and should pass ``normalize=False``.
    Uses the network's stored splits when present, otherwise seeded
    label-stratified 50/25/25 splits.
    """
    if net.labels is None:
        raise ValueError("fairness evaluation needs labels")
    hyper = hyper or GcnHyper(seed=seed)
    work = net
    if normalize:
        work = AttributedNetwork(net.adjacency, minmax_normalize(net.attributes),
                                 net.sensitive, net.labels, net.splits)
    splits = work.splits or make_splits(work.labels, seed=seed)
    model, _ = train_gcn(work, splits, hyper)
    auc, f1 = evaluate_utility(model, work, splits["test"])
    probs = gcn_forward(model, work)
    predictions = (probs[:, 1] >= 0.5).astype(int)
    sp, eo = evaluate_fairness(predictions, work.labels, work.sensitive, splits["test"])
    if isinstance(sp, float):
        return FairnessReport(auc, f1, sp, eo)
    iu = np.triu_indices(sp.shape[0], k=1)
    sp_mean = float(np.nanmean(sp[iu]))
    eo_mean = float(np.nanmean(eo[iu]))
    return FairnessReport(auc, f1, sp_mean, eo_mean, sp, eo)

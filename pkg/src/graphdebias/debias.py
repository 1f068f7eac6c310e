"""Alternating debiasing of attributes and structure via clipped critics.

Per attribute dimension, an affine critic with weights clipped to [-c, c]
estimates (up to a constant) the Wasserstein distance between the two groups'
joint distributions of (original value, 1-hop propagated value, ..., H-hop
propagated value). The critics ascend that estimate; a diagonal reweighting
of the attribute columns and a continuous relaxation of the adjacency
descend it under proximal-gradient steps with closeness and sparsity
regularizers. After the epoch budget, the weakest attribute dimensions are
masked and the continuous adjacency is thresholded back to a binary graph.

All gradients are computed analytically. The only nontrivial pieces are the
reverse pass through the hop recursion Z_h = P Z_{h-1} and the derivative of
the degree-normalized adjacency with respect to its own entries (degrees are
recomputed from the current continuous adjacency, so each entry also moves
its row/column scaling); both are finite-difference checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .graph import AttributedNetwork, degree_normalize, minmax_normalize
from .metrics import measure_bias


@dataclass(frozen=True)
class DebiasConfig:
    """Hyperparameters of the alternating optimization.

    ``mask_z=None`` resolves to ceil(0.1 * M) at run time. The learning rate
    drops from ``lr_high`` to ``lr_low`` at ``lr_switch_epoch``. ``mu1``/``mu3``
    keep the debiased attributes/adjacency close to the originals, ``mu2``/
    ``mu4`` are the L1 sparsity weights handled by proximal soft-thresholding.
    """

    epochs: int = 500
    lr_high: float = 3e-3
    lr_low: float = 1e-3
    lr_switch_epoch: int = 400
    mu1: float = 1e-3
    mu2: float = 1e-4
    mu3: float = 1e-1
    mu4: float = 1e-4
    clip_c: float = 0.1
    mask_z: Optional[int] = None
    binarize_r: float = 0.5
    alpha: float = 0.5
    horizon: int = 2
    betas: tuple = (2.0 / 3.0, 1.0 / 3.0)
    critic_steps_per_epoch: int = 1
    critic_lr: float = 0.1
    rms_decay: float = 0.99
    rms_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.lr_high <= 0 or self.lr_low <= 0 or self.critic_lr <= 0:
            raise ValueError("learning rates must be positive")
        if min(self.mu1, self.mu2, self.mu3, self.mu4) < 0:
            raise ValueError("mu1..mu4 must be nonnegative")
        if self.clip_c <= 0:
            raise ValueError("clip_c must be positive")
        if not 0.0 < self.binarize_r < 1.0:
            raise ValueError("binarize_r must lie in (0, 1)")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        betas = tuple(float(b) for b in self.betas)
        if len(betas) != self.horizon or any(b <= 0 for b in betas):
            raise ValueError("betas must be positive, one per hop")
        if any(b2 > b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("betas must be non-increasing")
        object.__setattr__(self, "betas", betas)

    def lr_at(self, epoch: int) -> float:
        return self.lr_high if epoch < self.lr_switch_epoch else self.lr_low

    def resolve_mask_z(self, n_dims: int) -> int:
        z = self.mask_z if self.mask_z is not None else math.ceil(0.1 * n_dims)
        if not 0 <= z < n_dims:
            raise ValueError(f"mask_z must satisfy 0 <= z < {n_dims}, got {z}")
        return z

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs, "lr_high": self.lr_high, "lr_low": self.lr_low,
            "lr_switch_epoch": self.lr_switch_epoch,
            "mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3, "mu4": self.mu4,
            "clip_c": self.clip_c, "mask_z": self.mask_z, "binarize_r": self.binarize_r,
            "alpha": self.alpha, "horizon": self.horizon, "betas": list(self.betas),
            "critic_steps_per_epoch": self.critic_steps_per_epoch,
            "critic_lr": self.critic_lr, "rms_decay": self.rms_decay,
            "rms_eps": self.rms_eps, "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DebiasConfig":
        d = dict(d)
        if "betas" in d:
            d["betas"] = tuple(d["betas"])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class GroupContext:
    """Group membership plus the mean-difference vectors for each group pair."""

    indices: list
    pair_diffs: np.ndarray   # (P, n); row p has 1/|g_i| on group i, -1/|g_j| on group j
    pairs: list              # list of (i, j) with i < j

    @property
    def multigroup(self) -> bool:
        return len(self.indices) > 2


def group_context(sensitive: np.ndarray) -> GroupContext:
    sensitive = np.asarray(sensitive, dtype=int)
    n_groups = int(sensitive.max()) + 1
    indices = [np.flatnonzero(sensitive == g) for g in range(n_groups)]
    if any(idx.size == 0 for idx in indices):
        raise ValueError("every group must be nonempty")
    pairs = [(i, j) for i in range(n_groups) for j in range(i + 1, n_groups)]
    diffs = np.zeros((len(pairs), sensitive.size))
    for p, (i, j) in enumerate(pairs):
        diffs[p, indices[i]] = 1.0 / indices[i].size
        diffs[p, indices[j]] = -1.0 / indices[j].size
    return GroupContext(indices, diffs, pairs)


@dataclass
class Views:
    """Hop-stacked node values: z[h] is the n x M matrix of h-hop propagations.

    z[0] is the (debiased) attribute matrix itself; z[h] = p_norm @ z[h-1]
    with p_norm rebuilt from the current continuous adjacency.
    """

    z: np.ndarray       # (H+1, n, M)
    p_norm: np.ndarray  # (n, n)
    alpha: float

    def group_matrix(self, indices: np.ndarray, dim: int) -> np.ndarray:
        """|group| x (H+1) sample matrix for one attribute dimension."""
        return self.z[:, indices, dim].T


def build_joint_views(x_tilde: np.ndarray, soft_adj: np.ndarray, alpha: float,
                      horizon: int) -> Views:
    """Propagate the attribute matrix for 1..H hops over the soft adjacency."""
    soft_adj = np.asarray(soft_adj, dtype=float)
    if np.any(soft_adj < 0):
        raise ValueError("soft adjacency entries must be nonnegative")
    p_norm = alpha * degree_normalize(soft_adj) + (1.0 - alpha) * np.eye(soft_adj.shape[0])
    z = np.empty((horizon + 1,) + x_tilde.shape)
    z[0] = x_tilde
    for h in range(1, horizon + 1):
        z[h] = p_norm @ z[h - 1]
    return Views(z, p_norm, alpha)


def critic_value(weights: np.ndarray, offset: float, x: np.ndarray) -> float:
    """Affine critic w^T x + b for one (H+1)-dimensional hop vector."""
    return float(np.dot(weights, x) + offset)


def _hop_gaps(views: Views, ctx: GroupContext) -> np.ndarray:
    """(P, H+1, M) per-pair group-mean differences of every hop level."""
    return np.einsum("pn,hnm->phm", ctx.pair_diffs, views.z)


def _head(gaps: np.ndarray, critic_w: np.ndarray, ctx: GroupContext):
    """Loss value, critic gradient, and d loss / d gap coefficients.

    ``gaps`` is the (P, H+1, M) tensor of per-pair hop-level group-mean
    differences; everything the loss needs is a function of it, because the
    critic offsets cancel in group-mean differences.
    """
    if ctx.multigroup:
        applied = np.einsum("mh,phm->pm", critic_w, gaps)        # (P, M)
        loss = float(np.sum(applied ** 2))
        d_critic = np.einsum("pm,phm->mh", 2.0 * applied, gaps)
        coeff = 2.0 * applied[:, None, :] * critic_w.T[None, :, :]  # (P, H+1, M)
    else:
        loss = float(np.sum(critic_w.T * gaps[0]))
        d_critic = gaps[0].T
        coeff = np.broadcast_to(critic_w.T, (1,) + critic_w.T.shape)
    return loss, d_critic, coeff


def loss_l1(views: Views, critic_w: np.ndarray, ctx: GroupContext) -> float:
    """Sum over dimensions of the critic-estimated group gap (binary groups).

    Expectations are exact means over all group members; the critic offsets
    cancel in the difference and do not appear.
    """
    if ctx.multigroup:
        raise ValueError("binary loss called with more than two groups")
    gaps = _hop_gaps(views, ctx)[0]          # (H+1, M)
    return float(np.sum(critic_w.T * gaps))


def loss_l1_multigroup(views: Views, critic_w: np.ndarray, ctx: GroupContext) -> float:
    """Sum of squared critic gaps over all unordered group pairs and dims."""
    gaps = _hop_gaps(views, ctx)             # (P, H+1, M)
    applied = np.einsum("mh,phm->pm", critic_w, gaps)
    return float(np.sum(applied ** 2))


def _loss_and_coefficients(views: Views, critic_w: np.ndarray, ctx: GroupContext):
    """Loss value, critic gradient, and dL/dZ_h head adjoints.

    Returns (loss, d_critic (M, H+1), zbar (H+1, n, M)) where zbar[h] is the
    adjoint of views.z[h] under the active loss.
    """
    loss, d_critic, coeff = _head(_hop_gaps(views, ctx), critic_w, ctx)
    zbar = np.einsum("pn,phm->hnm", ctx.pair_diffs, coeff)
    return loss, d_critic, zbar


def _reverse_through_hops(views: Views, zbar: np.ndarray):
    """Backpropagate the head adjoints through Z_h = P Z_{h-1}.

    Returns (p_bar, x_bar): the adjoints of p_norm and of z[0].
    """
    horizon = views.z.shape[0] - 1
    adjoint = zbar[horizon].copy()
    p_bar = np.zeros_like(views.p_norm)
    for h in range(horizon, 0, -1):
        p_bar += adjoint @ views.z[h - 1].T
        adjoint = views.p_norm.T @ adjoint + zbar[h - 1]
    return p_bar, adjoint


def _soft_adj_adjoint(p_bar: np.ndarray, soft_adj: np.ndarray, alpha: float) -> np.ndarray:
    """Adjoint of the entries of the soft adjacency through its normalization.

    With degrees d = A1, scaling e = d^{-1/2} (0 at d=0) and
    p_norm = alpha * (e_i e_j A_ij) + (1-alpha) I, entry (k, l) contributes
    directly through its own normalized value and, via the degree of row k,
    through every normalized entry in row/column k:

        dL/dA_kl = alpha * e_k e_l pbar_kl
                   - (alpha/2) * e_k^3 * [((pbar + pbar^T) * A) e]_k
    """
    deg = soft_adj.sum(axis=1)
    scale = np.zeros_like(deg)
    pos = deg > 0
    scale[pos] = deg[pos] ** -0.5
    direct = alpha * (scale[:, None] * p_bar * scale[None, :])
    row_term = ((p_bar + p_bar.T) * soft_adj) @ scale
    return direct - (alpha / 2.0) * (scale ** 3 * row_term)[:, None]


def objective_gradients(x_norm: np.ndarray, theta: np.ndarray, soft_adj: np.ndarray,
                        critic_w: np.ndarray, ctx: GroupContext, cfg: DebiasConfig,
                        adj_original: np.ndarray):
    """Analytic gradients of loss + closeness terms w.r.t. theta and adjacency.

    The adjacency gradient is the symmetric-pair derivative: entry (i, j)
    holds d objective / dh when both A_ij and A_ji move by h together, i.e.
    abar + abar^T (diagonal zeroed; the diagonal is pinned at zero anyway).
    Sparsity terms (mu2, mu4) are excluded; they enter via proximal steps.
    """
    views = build_joint_views(x_norm * theta, soft_adj, cfg.alpha, cfg.horizon)
    loss, _, zbar = _loss_and_coefficients(views, critic_w, ctx)
    p_bar, x_bar = _reverse_through_hops(views, zbar)

    g_theta = np.sum(x_norm * x_bar, axis=0)
    g_theta = g_theta + 2.0 * cfg.mu1 * (theta - 1.0) * np.sum(x_norm ** 2, axis=0)

    abar = _soft_adj_adjoint(p_bar, soft_adj, cfg.alpha)
    g_adj = abar + abar.T + 4.0 * cfg.mu3 * (soft_adj - adj_original)
    np.fill_diagonal(g_adj, 0.0)

    fit_x = cfg.mu1 * np.sum((x_norm * theta - x_norm) ** 2)
    fit_a = cfg.mu3 * np.sum((soft_adj - adj_original) ** 2)
    return g_theta, g_adj, loss + fit_x + fit_a, views


def objective_value(x_norm, theta, soft_adj, critic_w, ctx, cfg, adj_original) -> float:
    """loss + mu1 ||X theta - X||_F^2 + mu3 ||A~ - A||_F^2 (no sparsity terms)."""
    views = build_joint_views(x_norm * theta, soft_adj, cfg.alpha, cfg.horizon)
    loss = (loss_l1_multigroup if ctx.multigroup else loss_l1)(views, critic_w, ctx)
    fit_x = cfg.mu1 * np.sum((x_norm * theta - x_norm) ** 2)
    fit_a = cfg.mu3 * np.sum((soft_adj - adj_original) ** 2)
    return float(loss + fit_x + fit_a)


def _soft_threshold(x: np.ndarray, amount: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - amount, 0.0)


@dataclass
class DebiasState:
    """Mutable optimization state evolving across epochs."""

    theta: np.ndarray         # (M,) diagonal attribute weights in [0, 1]
    soft_adj: np.ndarray      # (n, n) symmetric continuous adjacency in [0, 1]
    critic_w: np.ndarray      # (M, H+1) clipped critic weights
    critic_b: np.ndarray      # (M,) clipped critic offsets (cancel in the loss)
    rms_theta: np.ndarray = field(default=None)
    rms_adj: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.rms_theta is None:
            self.rms_theta = np.zeros_like(self.theta)
        if self.rms_adj is None:
            self.rms_adj = np.zeros_like(self.soft_adj)


def initial_gaps(net: AttributedNetwork, cfg: DebiasConfig) -> np.ndarray:
    """Hop-level group-mean gaps of the untouched network, (P, H+1, M)."""
    x_norm = minmax_normalize(net.attributes)
    ctx = group_context(net.sensitive)
    views = build_joint_views(x_norm, net.adjacency.astype(float), cfg.alpha, cfg.horizon)
    return _hop_gaps(views, ctx)


def init_state(net: AttributedNetwork, cfg: DebiasConfig) -> DebiasState:
    """Fresh state: theta at one, soft adjacency at the input graph.

    Critic weights start at the clipped inner optimum for the initial state,
    clip_c * sign(initial gap): for an affine critic under weight clipping
    the supremum sits at that box corner, so the recorded loss estimates the
    group distance from the first epoch instead of ramping up from a cold
    start. (Exact zeros would also be a stationary point of the squared
    multigroup loss.) Tiny seeded noise covers exactly-zero gaps.
    """
    rng = np.random.default_rng(cfg.seed)
    m = net.n_attributes
    gaps = initial_gaps(net, cfg).sum(axis=0)            # (H+1, M), pair-summed
    critic_w = cfg.clip_c * np.sign(gaps.T)
    noise = rng.uniform(-1e-3, 1e-3, size=critic_w.shape)
    critic_w = np.where(critic_w == 0, noise, critic_w)
    return DebiasState(
        theta=np.ones(m),
        soft_adj=net.adjacency.astype(float).copy(),
        critic_w=np.clip(critic_w, -cfg.clip_c, cfg.clip_c),
        critic_b=np.zeros(m),
    )


def critic_step(state: DebiasState, views: Views, ctx: GroupContext, lr: float,
                clip_c: float) -> np.ndarray:
    """One full-batch gradient-ascent step on the critics, then clip.

    The gradient of a mean of affine maps is the mean of the inputs, so the
    update is analytic: each weight moves by lr times the corresponding
    hop-level group-mean gap (chain-ruled through the square for multigroup).
    Offsets have zero gradient and only get re-clipped.
    """
    _, d_critic, _ = _loss_and_coefficients(views, state.critic_w, ctx)
    state.critic_w = np.clip(state.critic_w + lr * d_critic, -clip_c, clip_c)
    state.critic_b = np.clip(state.critic_b, -clip_c, clip_c)
    return state.critic_w


def _rmsprop(grad: np.ndarray, accum: np.ndarray, lr: float, cfg: DebiasConfig) -> np.ndarray:
    accum *= cfg.rms_decay
    accum += (1.0 - cfg.rms_decay) * grad ** 2
    return lr * grad / (np.sqrt(accum) + cfg.rms_eps)


def theta_step(state: DebiasState, x_norm: np.ndarray, ctx: GroupContext,
               cfg: DebiasConfig, lr: float, adj_original: np.ndarray) -> np.ndarray:
    """Proximal RMSprop step on the attribute weights; returns new X~.

    Adaptive gradient step on loss + mu1 closeness, then soft-threshold by
    lr * mu2 (the L1 proximal map), then projection onto [0, 1].
    """
    g_theta, _, _, _ = objective_gradients(x_norm, state.theta, state.soft_adj,
                                           state.critic_w, ctx, cfg, adj_original)
    if not np.all(np.isfinite(g_theta)):
        raise FloatingPointError("non-finite attribute-weight gradient")
    theta = state.theta - _rmsprop(g_theta, state.rms_theta, lr, cfg)
    theta = _soft_threshold(theta, lr * cfg.mu2)
    state.theta = np.clip(theta, 0.0, 1.0)
    return x_norm * state.theta


def adjacency_step(state: DebiasState, x_norm: np.ndarray, ctx: GroupContext,
                   cfg: DebiasConfig, lr: float, adj_original: np.ndarray) -> np.ndarray:
    """Proximal RMSprop step on the continuous adjacency.

    The gradient includes the degree dependence of the normalization. After
    the adaptive step: soft-threshold by lr * mu4, clip to [0, 1], zero the
    diagonal, and re-symmetrize (a no-op up to rounding, since the gradient
    itself is symmetric).
    """
    _, g_adj, _, _ = objective_gradients(x_norm, state.theta, state.soft_adj,
                                         state.critic_w, ctx, cfg, adj_original)
    if not np.all(np.isfinite(g_adj)):
        raise FloatingPointError("non-finite adjacency gradient")
    adj = state.soft_adj - _rmsprop(g_adj, state.rms_adj, lr, cfg)
    adj = _soft_threshold(adj, lr * cfg.mu4)
    adj = np.clip(adj, 0.0, 1.0)
    np.fill_diagonal(adj, 0.0)
    state.soft_adj = 0.5 * (adj + adj.T)
    return state.soft_adj


def _smallest_indices(theta: np.ndarray, z: int) -> np.ndarray:
    # stable sort breaks ties by lowest dimension index
    return np.argsort(theta, kind="stable")[:z]


def mask_smallest(theta: np.ndarray, z: int) -> np.ndarray:
    """Zero out the z smallest attribute weights (ties: lowest index first)."""
    if z >= theta.size:
        raise ValueError("cannot mask every attribute dimension")
    masked = np.asarray(theta, dtype=float).copy()
    masked[_smallest_indices(masked, z)] = 0.0
    return masked


def binarize(soft_adj: np.ndarray, adj_original: np.ndarray, r: float) -> np.ndarray:
    """Threshold the optimized adjacency back to a binary graph.

    Relative to the original graph, a missing edge is added when its weight
    rose by more than r * (largest rise), and an existing edge is removed
    when its weight fell by more than r * (largest fall); every other entry
    keeps its original value.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("binarization threshold must lie in (0, 1)")
    delta = soft_adj - adj_original
    added = (adj_original == 0) & (delta > r * delta.max())
    removed = (adj_original == 1) & (-delta > r * abs(delta.min()))
    out = adj_original.astype(float).copy()
    out[added] = 1.0
    out[removed] = 0.0
    np.fill_diagonal(out, 0.0)
    return out


@dataclass(frozen=True)
class DebiasResult:
    """Output of a debiasing run, all in the normalized attribute scale."""

    x_debiased: np.ndarray
    adj_binary: np.ndarray
    adj_continuous: np.ndarray
    theta: np.ndarray
    masked_dims: list
    loss_trace: list


def run_edits(net: AttributedNetwork, cfg: DebiasConfig,
              on_epoch=None) -> DebiasResult:
    """Run the full alternating optimization on a network.

    Attributes are min-max normalized first; the returned ``x_debiased`` is
    the reweighted normalized matrix. Per epoch: record the loss, ascend the
    critics (with clipping), step the attribute weights, then step the
    continuous adjacency (with symmetrization). After the loop the z weakest
    dimensions are masked and the adjacency is binarized. Fully deterministic
    given the config seed; ``on_epoch(epoch, state)`` is an optional hook.

    The loss, critic, and attribute-weight gradients only need the group-mean
    gap tensor, which is computed from the H propagations of the P group
    difference vectors instead of the full n x M hop matrices; the hop
    matrices are materialized once per epoch for the adjacency reverse pass.
    """
    x_norm = minmax_normalize(net.attributes)
    adj_original = net.adjacency.astype(float).copy()
    ctx = group_context(net.sensitive)
    z = cfg.resolve_mask_z(x_norm.shape[1])
    n = x_norm.shape[0]
    identity = np.eye(n)
    col_sq = np.sum(x_norm ** 2, axis=0)

    state = init_state(net, cfg)
    trace = []
    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        # p_norm only changes in the adjacency step at the end of the epoch
        p_norm = cfg.alpha * degree_normalize(state.soft_adj) + (1.0 - cfg.alpha) * identity

        diffs = np.empty((cfg.horizon + 1,) + ctx.pair_diffs.shape)
        diffs[0] = ctx.pair_diffs
        for h in range(1, cfg.horizon + 1):
            diffs[h] = diffs[h - 1] @ p_norm
        # gap[p, h, m] = (u_p P^h) (X theta)[:, m]; proj is its theta-free part
        proj = np.einsum("hpn,nm->phm", diffs, x_norm)
        gaps = proj * state.theta

        loss, d_critic, _ = _head(gaps, state.critic_w, ctx)
        trace.append(loss)
        for _ in range(cfg.critic_steps_per_epoch):
            state.critic_w = np.clip(state.critic_w + cfg.critic_lr * d_critic,
                                     -cfg.clip_c, cfg.clip_c)
            if cfg.critic_steps_per_epoch > 1:
                _, d_critic, _ = _head(gaps, state.critic_w, ctx)
        state.critic_b = np.clip(state.critic_b, -cfg.clip_c, cfg.clip_c)

        # attribute-weight step against the freshly clipped critics
        _, _, coeff = _head(gaps, state.critic_w, ctx)
        g_theta = np.einsum("phm,phm->m", coeff, proj)
        g_theta += 2.0 * cfg.mu1 * (state.theta - 1.0) * col_sq
        theta = state.theta - _rmsprop(g_theta, state.rms_theta, lr, cfg)
        state.theta = np.clip(_soft_threshold(theta, lr * cfg.mu2), 0.0, 1.0)

        # adjacency step at the new theta, same p_norm
        _, _, coeff = _head(proj * state.theta, state.critic_w, ctx)
        zbar = np.einsum("pn,phm->hnm", ctx.pair_diffs, coeff)
        hop = np.empty((cfg.horizon + 1,) + x_norm.shape)
        hop[0] = x_norm * state.theta
        for h in range(1, cfg.horizon + 1):
            hop[h] = p_norm @ hop[h - 1]
        p_bar, _ = _reverse_through_hops(Views(hop, p_norm, cfg.alpha), zbar)
        abar = _soft_adj_adjoint(p_bar, state.soft_adj, cfg.alpha)
        g_adj = abar + abar.T + 4.0 * cfg.mu3 * (state.soft_adj - adj_original)
        np.fill_diagonal(g_adj, 0.0)
        adj = state.soft_adj - _rmsprop(g_adj, state.rms_adj, lr, cfg)
        adj = np.clip(_soft_threshold(adj, lr * cfg.mu4), 0.0, 1.0)
        np.fill_diagonal(adj, 0.0)
        state.soft_adj = 0.5 * (adj + adj.T)

        if on_epoch is not None:
            on_epoch(epoch, state)

    theta = mask_smallest(state.theta, z)
    masked = sorted(int(i) for i in _smallest_indices(state.theta, z))
    return DebiasResult(
        x_debiased=x_norm * theta,
        adj_binary=binarize(state.soft_adj, adj_original, cfg.binarize_r),
        adj_continuous=state.soft_adj,
        theta=theta,
        masked_dims=masked,
        loss_trace=trace,
    )


def debias_network(net: AttributedNetwork, cfg: DebiasConfig):
    """Debias a network and measure bias before/after.

    Returns (debiased network, DebiasResult, report dict). The debiased
    network carries the binarized adjacency and the reweighted normalized
    attributes, so downstream measurements should not re-normalize it. The
    report includes structural bias for both the binarized and the continuous
    adjacency.
    """
    result = run_edits(net, cfg)
    debiased = AttributedNetwork(result.adj_binary, result.x_debiased,
                                 net.sensitive, net.labels, net.splits)
    before = measure_bias(net.adjacency, net.attributes, net.sensitive,
                          alpha=cfg.alpha, horizon=cfg.horizon, betas=cfg.betas,
                          normalize=True)
    after = measure_bias(result.adj_binary, result.x_debiased, net.sensitive,
                         alpha=cfg.alpha, horizon=cfg.horizon, betas=cfg.betas,
                         normalize=False)
    after_cont = measure_bias(result.adj_continuous, result.x_debiased, net.sensitive,
                              alpha=cfg.alpha, horizon=cfg.horizon, betas=cfg.betas,
                              normalize=False)
    report = {
        "bias_before": before.to_dict(),
        "bias_after": after.to_dict(),
        "bias_after_continuous": after_cont.to_dict(),
        "theta": [float(v) for v in result.theta],
        "masked_dims": result.masked_dims,
        "loss_trace": [float(v) for v in result.loss_trace],
    }
    return debiased, result, report

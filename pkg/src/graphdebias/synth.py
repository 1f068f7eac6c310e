"""Seeded generators for the benchmark synthetic networks.

Three flavors: a network whose attributes are biased but whose structure is
group-independent (case 1), a network with unbiased attributes but a biased
community structure (case 2), and a three-group variant with both kinds of
bias. Everything is driven by a single 64-bit seed and fixed draw order, so
the same config reproduces the same network bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import AttributedNetwork, selfloop_normalize

# probabilities of the random-graph blocks
CASE1_EDGE_P = 2e-3
COMMUNITY_P = 5e-2
THIRD_COMMUNITY_P = 1e-2
CROSS_COMMUNITY_P = 2e-4

_ATTR_SHIFT = 1.5          # case-1 per-group attribute mean: -1.5 / +1.5
_TERNARY_SHIFTS = (-1.0, 0.0, 1.0)


@dataclass(frozen=True)
class SynthConfig:
    n_nodes: int = 1000
    seed: int = 0
    t: int = 250           # community cutoff count for the biased structure
    noise_sigma: float = 0.5
    extra_dims: int = 8

    def __post_init__(self):
        if 2 * self.t > self.n_nodes:
            raise ValueError("community cutoff requires 2*t <= n_nodes")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def _require_even(cfg: SynthConfig) -> None:
    # binary cases put half the nodes in each group; the ternary generator
    # has its own divisibility rule instead
    if cfg.n_nodes % 2 != 0:
        raise ValueError("n_nodes must be even (half per group)")


def _rng(cfg: SynthConfig, phase: int) -> np.random.Generator:
    # independent stream per generation phase, all derived from cfg.seed
    return np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(phase,)))


def _sample_edges(rng: np.random.Generator, prob: np.ndarray) -> np.ndarray:
    """Symmetric binary adjacency with per-pair edge probabilities."""
    n = prob.shape[0]
    upper = np.triu(rng.random((n, n)) < prob, k=1)
    return (upper | upper.T).astype(float)


def gen_case_biased_attributes(cfg: SynthConfig) -> AttributedNetwork:
    """Biased attributes, unbiased structure.

    Two attribute dimensions drawn i.i.d. from N(-1.5, 1) for group 0 and
    N(+1.5, 1) for group 1; edges from a flat random-graph model with
    probability 2e-3, independent of group membership.
    """
    _require_even(cfg)
    rng = _rng(cfg, phase=0)
    n = cfg.n_nodes
    half = n // 2
    sensitive = np.repeat([0, 1], half)
    attrs = rng.normal(size=(n, 2))
    attrs[:half] -= _ATTR_SHIFT
    attrs[half:] += _ATTR_SHIFT
    adjacency = _sample_edges(rng, np.full((n, n), CASE1_EDGE_P))
    return AttributedNetwork(adjacency, attrs, sensitive)


def gen_case_biased_structure(cfg: SynthConfig) -> AttributedNetwork:
    """Unbiased attributes, biased structure.

    Attributes are N(0, 1) for everyone. Nodes are ranked by attribute sum;
    the t highest-ranked group-0 nodes and the t lowest-ranked group-1 nodes
    form two dense communities (edge prob 5e-2 within each), the remaining
    nodes form a third community (1e-2 within), and each dense community
    links to the third with probability 2e-4. No edges are generated between
    the two dense communities.
    """
    _require_even(cfg)
    rng = _rng(cfg, phase=1)
    n, t = cfg.n_nodes, cfg.t
    half = n // 2
    sensitive = np.repeat([0, 1], half)
    attrs = rng.normal(size=(n, 2))
    sums = attrs.sum(axis=1)

    community = np.full(n, 2)
    top_g0 = np.argsort(-sums[:half], kind="stable")[:t]
    bottom_g1 = half + np.argsort(sums[half:], kind="stable")[:t]
    community[top_g0] = 0
    community[bottom_g1] = 1

    block = np.array([
        [COMMUNITY_P, 0.0, CROSS_COMMUNITY_P],
        [0.0, COMMUNITY_P, CROSS_COMMUNITY_P],
        [CROSS_COMMUNITY_P, CROSS_COMMUNITY_P, THIRD_COMMUNITY_P],
    ])
    adjacency = _sample_edges(rng, block[np.ix_(community, community)])
    return AttributedNetwork(adjacency, attrs, sensitive)


def attach_labels_and_padding(net: AttributedNetwork, cfg: SynthConfig) -> AttributedNetwork:
    """Append uniform padding dimensions and derive binary labels.

    ``extra_dims`` columns of Uniform[0, 1] are appended; the label score is
    the sum of the first two appended columns plus N(0, noise_sigma^2), and
    the top-ranked half of the nodes get label 1.
    """
    rng = _rng(cfg, phase=3)
    n = net.n_nodes
    extra = rng.random((n, cfg.extra_dims))
    score = extra[:, 0] + extra[:, 1] + rng.normal(0.0, cfg.noise_sigma, size=n)
    labels = np.zeros(n, dtype=int)
    labels[np.argsort(-score, kind="stable")[: n // 2]] = 1
    attrs = np.hstack([net.attributes, extra])
    return AttributedNetwork(net.adjacency, attrs, net.sensitive, labels, net.splits)


def gen_ternary(cfg: SynthConfig) -> AttributedNetwork:
    """Three-group network with biased attributes, structure, and labels.

    Groups are three equal communities (n must be divisible by 3). The first
    two of ten attribute dimensions are shifted per group by -1 / 0 / +1; the
    rest are N(0, 1). Intra-community edge probability reuses the dense-block
    value 5e-2, inter-community pairs use 2e-4. Labels rank the noisy sum of
    the first two unbiased dimensions (columns 2 and 3) and flag the top half.
    """
    if cfg.n_nodes % 3 != 0:
        raise ValueError("ternary generation requires n_nodes divisible by 3")
    rng = _rng(cfg, phase=2)
    n = cfg.n_nodes
    third = n // 3
    sensitive = np.repeat([0, 1, 2], third)

    attrs = rng.normal(size=(n, 10))
    for g, shift in enumerate(_TERNARY_SHIFTS):
        attrs[sensitive == g, :2] += shift

    prob = np.where(sensitive[:, None] == sensitive[None, :], COMMUNITY_P, CROSS_COMMUNITY_P)
    adjacency = _sample_edges(rng, prob)

    score = attrs[:, 2] + attrs[:, 3] + rng.normal(0.0, cfg.noise_sigma, size=n)
    labels = np.zeros(n, dtype=int)
    labels[np.argsort(-score, kind="stable")[: n // 2]] = 1
    return AttributedNetwork(adjacency, attrs, sensitive, labels)


def one_step_propagation_demo(net: AttributedNetwork) -> np.ndarray:
    """Attributes after one self-loop-normalized propagation step.

    Returns D^{-1/2} (A + I) D^{-1/2} X, the single message-passing round a
    graph convolution performs, for comparing per-group distribution gaps
    before and after propagation.
    """
    return selfloop_normalize(net.adjacency) @ net.attributes

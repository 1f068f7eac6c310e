import numpy as np
import pytest

from graphdebias import (
    AttributedNetwork,
    SynthConfig,
    attach_labels_and_padding,
    gen_case_biased_attributes,
    gen_case_biased_structure,
    gen_ternary,
    one_step_propagation_demo,
    wasserstein1_empirical,
)
from graphdebias.synth import CASE1_EDGE_P, COMMUNITY_P


def _binomial_window(trials, p, sigmas=5.0):
    mean = trials * p
    sd = np.sqrt(trials * p * (1 - p))
    return mean - sigmas * sd, mean + sigmas * sd


def test_binary_cases_reject_odd_n():
    # the ternary generator accepts odd n (own divisibility rule), the
    # half-per-group cases do not
    with pytest.raises(ValueError):
        gen_case_biased_attributes(SynthConfig(n_nodes=999, t=100))
    with pytest.raises(ValueError):
        gen_case_biased_structure(SynthConfig(n_nodes=999, t=100))


def test_config_rejects_oversized_t():
    with pytest.raises(ValueError):
        SynthConfig(n_nodes=100, t=60)


def test_determinism_bit_identical():
    cfg = SynthConfig(n_nodes=200, seed=42, t=50)
    for gen in (gen_case_biased_attributes, gen_case_biased_structure):
        a = gen(cfg)
        b = gen(cfg)
        assert np.array_equal(a.adjacency, b.adjacency)
        assert np.array_equal(a.attributes, b.attributes)
    t1 = gen_ternary(SynthConfig(n_nodes=201, seed=42, t=50))
    t2 = gen_ternary(SynthConfig(n_nodes=201, seed=42, t=50))
    assert np.array_equal(t1.adjacency, t2.adjacency)
    assert np.array_equal(t1.labels, t2.labels)


def test_case1_group_sizes_and_means():
    net = gen_case_biased_attributes(SynthConfig(n_nodes=1000, seed=1))
    sizes = np.bincount(net.sensitive)
    assert sizes.tolist() == [500, 500]
    for m in range(2):
        # CLT bound: 3 sigma / sqrt(500) = 0.134 < 0.15
        assert abs(net.attributes[net.sensitive == 0, m].mean() + 1.5) < 0.15
        assert abs(net.attributes[net.sensitive == 1, m].mean() - 1.5) < 0.15


def test_case1_edge_count_binomial():
    net = gen_case_biased_attributes(SynthConfig(n_nodes=1000, seed=2))
    pairs = 1000 * 999 // 2
    lo, hi = _binomial_window(pairs, CASE1_EDGE_P)
    assert lo < net.adjacency.sum() / 2 < hi


def test_case1_neighbor_group_fraction_balanced():
    net = gen_case_biased_attributes(SynthConfig(n_nodes=1000, seed=3))
    deg = net.adjacency.sum(axis=1)
    frac_group1 = (net.adjacency @ (net.sensitive == 1)) [deg > 0] / deg[deg > 0]
    for g in (0, 1):
        members = (net.sensitive == g)[deg > 0]
        assert abs(frac_group1[members].mean() - 0.5) < 0.05


def test_case2_community_sizes_and_block_density():
    cfg = SynthConfig(n_nodes=1000, seed=4, t=250)
    net = gen_case_biased_structure(cfg)
    sums = net.attributes.sum(axis=1)
    g0 = np.flatnonzero(net.sensitive == 0)
    g1 = np.flatnonzero(net.sensitive == 1)
    comm0 = g0[np.argsort(-sums[g0], kind="stable")[:250]]
    comm1 = g1[np.argsort(sums[g1], kind="stable")[:250]]
    assert len(set(comm0) | set(comm1)) == 500

    within0 = net.adjacency[np.ix_(comm0, comm0)].sum() / 2
    lo, hi = _binomial_window(250 * 249 // 2, COMMUNITY_P)
    assert lo < within0 < hi

    # no edges between the two dense communities
    assert net.adjacency[np.ix_(comm0, comm1)].sum() == 0


def test_generated_adjacency_well_formed():
    for net in (gen_case_biased_attributes(SynthConfig(n_nodes=100, seed=5, t=25)),
                gen_case_biased_structure(SynthConfig(n_nodes=100, seed=5, t=25)),
                gen_ternary(SynthConfig(n_nodes=102, seed=5, t=25))):
        a = net.adjacency
        assert np.array_equal(a, a.T)
        assert np.all(np.diag(a) == 0)
        assert set(np.unique(a)) <= {0.0, 1.0}


def test_labels_balance_and_width():
    cfg = SynthConfig(n_nodes=500, seed=6, t=100)
    net = attach_labels_and_padding(gen_case_biased_attributes(cfg), cfg)
    assert net.labels.sum() == 250
    assert net.n_attributes == 10  # two original plus eight padding dims


def test_labels_zero_noise_median_rule():
    cfg = SynthConfig(n_nodes=400, seed=7, t=100, noise_sigma=0.0)
    net = attach_labels_and_padding(gen_case_biased_attributes(cfg), cfg)
    score = net.attributes[:, 2] + net.attributes[:, 3]
    assert np.array_equal(net.labels, (score > np.median(score)).astype(int))


def test_ternary_group_sizes_and_means():
    net = gen_ternary(SynthConfig(n_nodes=999 + 3, seed=8, t=100))  # 1002 divisible by 3
    sizes = np.bincount(net.sensitive)
    assert sizes.tolist() == [334, 334, 334]
    for g, target in enumerate((-1.0, 0.0, 1.0)):
        assert abs(net.attributes[net.sensitive == g, 0].mean() - target) < 0.2
        assert abs(net.attributes[net.sensitive == g, 1].mean() - target) < 0.2
    assert net.n_attributes == 10
    assert net.labels.sum() == 1002 // 2


def test_ternary_rejects_indivisible_n():
    with pytest.raises(ValueError):
        gen_ternary(SynthConfig(n_nodes=1000, seed=0))


def test_ternary_pairwise_attribute_gap_ordering():
    # outer pair (0,2) carries twice the mean shift of adjacent pairs
    from graphdebias import bias_report

    net = gen_ternary(SynthConfig(n_nodes=999, seed=9, t=100))
    rep = bias_report(net)
    assert rep.attr_pairs[0, 2] > rep.attr_pairs[0, 1]
    assert rep.attr_pairs[0, 2] > rep.attr_pairs[1, 2]


def test_demo_empty_graph_keeps_attributes():
    attrs = np.array([[1.0, 2.0], [3.0, 4.0]])
    net = AttributedNetwork(np.zeros((2, 2)), attrs, np.array([0, 1]))
    np.testing.assert_allclose(one_step_propagation_demo(net), attrs)


def _per_dim_group_w1(net, x):
    g0, g1 = net.group_indices()
    return [wasserstein1_empirical(x[g0, m], x[g1, m]) for m in range(x.shape[1])]


def test_demo_case1_propagation_shrinks_gap():
    net = gen_case_biased_attributes(SynthConfig(n_nodes=1000, seed=10))
    before = _per_dim_group_w1(net, net.attributes)
    after = _per_dim_group_w1(net, one_step_propagation_demo(net))
    assert all(a < b for a, b in zip(after, before))


def test_demo_case2_propagation_grows_gap():
    net = gen_case_biased_structure(SynthConfig(n_nodes=1000, seed=10))
    before = _per_dim_group_w1(net, net.attributes)
    after = _per_dim_group_w1(net, one_step_propagation_demo(net))
    assert all(a > b for a, b in zip(after, before))

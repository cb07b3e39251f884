#include <gtest/gtest.h>

#include <sstream>

#include "scoresort/graph.hpp"

using namespace scoresort;

TEST(SampleEr, ForcedEdgeAtPOne) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(seed);
        const Dag g = sample_er(2, EdgeProbability{1.0}, rng);
        EXPECT_EQ(g.edges.size(), 1u);
        EXPECT_TRUE(g.has_edge(0, 1) || g.has_edge(1, 0));
    }
}

TEST(SampleEr, SmallSparseGraphsResampledToTwoEdges) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng = make_rng(seed);
        const Dag g = sample_er(5, EdgeProbability{0.1}, rng);
        EXPECT_GE(g.edges.size(), 2u);
        EXPECT_TRUE(is_acyclic(g));
    }
}

TEST(SampleEr, EdgesPerNodeModeMatchesExpectedCount) {
    Rng rng = make_rng(7);
    double total = 0.0;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) total += static_cast<double>(sample_er(10, EdgesPerNode{2.0}, rng).edges.size());
    const double mean = total / draws;
    EXPECT_NEAR(mean, 20.0, 2.0);  // within 10%
}

TEST(SampleEr, DeterministicInSeed) {
    Rng a = make_rng(123), b = make_rng(123);
    EXPECT_EQ(sample_er(8, EdgesPerNode{1.5}, a).edges, sample_er(8, EdgesPerNode{1.5}, b).edges);
}

TEST(SampleEr, RejectsBadDensity) {
    Rng rng = make_rng(0);
    EXPECT_THROW(sample_er(5, EdgeProbability{0.0}, rng), ParameterError);
    EXPECT_THROW(sample_er(5, EdgesPerNode{0.5}, rng), ParameterError);
    EXPECT_THROW(sample_er(1, EdgeProbability{0.5}, rng), ParameterError);
}

TEST(SampleSf, TreeForSingleAttachment) {
    Rng rng = make_rng(3);
    const Dag g3 = sample_sf(3, 1, rng);
    EXPECT_EQ(g3.edges.size(), 2u);
    EXPECT_TRUE(is_acyclic(g3));
    const Dag g20 = sample_sf(20, 1, rng);
    EXPECT_EQ(g20.edges.size(), 19u);
    EXPECT_TRUE(is_acyclic(g20));
}

TEST(SampleSf, RejectsAttachmentAtLeastD) {
    Rng rng = make_rng(0);
    EXPECT_THROW(sample_sf(5, 5, rng), ParameterError);
    EXPECT_THROW(sample_sf(5, 0, rng), ParameterError);
}

// Preferential attachment concentrates many children on a few hub nodes, so
// the out-degree tail is heavier than for ER graphs of equal edge count.
// (In-degree is the wrong statistic here: with old->new orientation every
// attached node receives exactly m in-edges.)
TEST(SampleSf, HeavierDegreeTailThanEr) {
    Rng rng = make_rng(11);
    double sf_max_out = 0.0, er_max_out = 0.0;
    const int draws = 200;
    for (int i = 0; i < draws; ++i) {
        const Dag sf = sample_sf(50, 2, rng);
        int worst = 0;
        for (int v = 0; v < 50; ++v) worst = std::max(worst, sf.out_degree(v));
        sf_max_out += worst;

        const double m_equiv = static_cast<double>(sf.edges.size()) / 50.0;
        const Dag er = sample_er(50, EdgesPerNode{m_equiv}, rng);
        worst = 0;
        for (int v = 0; v < 50; ++v) worst = std::max(worst, er.out_degree(v));
        er_max_out += worst;
    }
    EXPECT_GT(sf_max_out / draws, 1.5 * er_max_out / draws);
}

TEST(SampleSf, DeterministicInSeed) {
    Rng a = make_rng(5), b = make_rng(5);
    EXPECT_EQ(sample_sf(12, 2, a).edges, sample_sf(12, 2, b).edges);
}

TEST(FullDagFromOrder, MatchesDefinition) {
    EXPECT_EQ(full_dag_from_order(TopOrder{{0, 1}}).edges, (std::set<std::pair<int, int>>{{0, 1}}));
    EXPECT_EQ(full_dag_from_order(TopOrder{{2, 0, 1}}).edges,
              (std::set<std::pair<int, int>>{{2, 0}, {2, 1}, {0, 1}}));
    EXPECT_EQ(full_dag_from_order(TopOrder{{0, 1, 2, 3, 4}}).edges.size(), 10u);
}

TEST(FullDagFromOrder, AdmitsItsOrder) {
    Rng rng = make_rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        std::uniform_int_distribution<int> dd(2, 12);
        TopOrder order;
        order.perm.resize(static_cast<std::size_t>(dd(rng)));
        std::iota(order.perm.begin(), order.perm.end(), 0);
        std::shuffle(order.perm.begin(), order.perm.end(), rng);
        const Dag g = full_dag_from_order(order);
        const auto pos = order.positions();
        for (const auto& [i, j] : g.edges)
            EXPECT_LT(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
    }
}

TEST(Leaves, Fixtures) {
    Dag example;
    example.d = 3;
    example.edges = {{0, 1}, {0, 2}, {1, 2}};
    EXPECT_EQ(leaves(example), (std::set<int>{2}));

    Dag empty;
    empty.d = 3;
    EXPECT_EQ(leaves(empty), (std::set<int>{0, 1, 2}));

    Dag chain;
    chain.d = 3;
    chain.edges = {{0, 1}, {1, 2}};
    EXPECT_EQ(leaves(chain), (std::set<int>{2}));
}

TEST(EdgeCsv, RoundTripIsExact) {
    Rng rng = make_rng(17);
    const Dag g = sample_er(9, EdgesPerNode{2.0}, rng);
    std::stringstream ss;
    write_edge_csv(g, ss);
    const Dag back = read_edge_csv(ss, g.d);
    EXPECT_EQ(back.d, g.d);
    EXPECT_EQ(back.edges, g.edges);
}

TEST(EdgeCsv, RejectsMalformedRows) {
    std::stringstream ss("src,dst\n1,banana\n");
    EXPECT_THROW(read_edge_csv(ss), InputError);
}

TEST(OrderSerialization, RoundTrip) {
    const TopOrder order{{3, 0, 2, 1}};
    EXPECT_EQ(order_to_string(order), "3,0,2,1");
    EXPECT_EQ(order_from_string("3,0,2,1").perm, order.perm);
    EXPECT_THROW(order_from_string("0,0,1"), ParameterError);
}

TEST(SampledGraphs, AlwaysAcyclic) {
    Rng rng = make_rng(29);
    for (int rep = 0; rep < 100; ++rep) {
        std::uniform_int_distribution<int> dd(2, 15);
        const int d = dd(rng);
        EXPECT_TRUE(is_acyclic(sample_er(d, EdgesPerNode{1.0 + (rep % 3)}, rng)));
        EXPECT_TRUE(is_acyclic(sample_sf(d, std::min(d - 1, 1 + rep % 3), rng)));
    }
}

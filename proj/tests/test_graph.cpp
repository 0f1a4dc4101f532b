#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "repgraph/error.hpp"
#include "repgraph/graph.hpp"
#include "repgraph/util.hpp"

using namespace repgraph;

namespace {

graph::SimilarityMatrix noise_matrix(std::size_t n, double lo, double hi,
                                     std::uint64_t seed) {
    graph::SimilarityMatrix m;
    m.n = n;
    util::SplitRng rng(seed, 0);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            m.entries[{i, j}] = lo + (hi - lo) * rng.next_double();
    return m;
}

// Two planted blocks: within-block weight 0.9, sparse cross noise up to 0.2.
graph::SimilarityMatrix planted_two_block(std::size_t n, std::uint64_t seed) {
    graph::SimilarityMatrix m;
    m.n = n;
    util::SplitRng rng(seed, 1);
    const std::size_t half = n / 2;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const bool same = (i < half) == (j < half);
            if (same)
                m.entries[{i, j}] = 0.9;
            else if (rng.next_double() < 0.3)
                m.entries[{i, j}] = 0.2 * rng.next_double();
        }
    return m;
}

} // namespace

TEST_CASE("similarity assembly") {
    SUBCASE("empty input") {
        CHECK(graph::assemble_similarity(4, {}).entries.empty());
    }
    SUBCASE("symmetric retrieval and implicit diagonal") {
        affinity::AffinityChannelSet a;
        a.pair = {0, 1};
        a.fused = 0.9;
        const auto m = graph::assemble_similarity(3, {a});
        CHECK(m.get(0, 1) == 0.9);
        CHECK(m.get(1, 0) == 0.9);
        CHECK(m.get(2, 2) == 1.0);
        CHECK(m.get(0, 2) == 0.0);
    }
    SUBCASE("duplicates keep the maximum") {
        affinity::AffinityChannelSet a, b;
        a.pair = b.pair = {0, 1};
        a.fused = 0.4;
        b.fused = 0.6;
        CHECK(graph::assemble_similarity(2, {a, b}).get(0, 1) == 0.6);
    }
    SUBCASE("out-of-range index") {
        affinity::AffinityChannelSet a;
        a.pair = {0, 5};
        a.fused = 0.4;
        CHECK_THROWS_AS(graph::assemble_similarity(3, {a}), InvalidArgument);
    }
}

TEST_CASE("thresholding") {
    graph::SimilarityMatrix m;
    m.n = 4;
    m.entries[{0, 1}] = 0.4;
    m.entries[{0, 2}] = 0.7;
    m.entries[{1, 2}] = 0.9;
    SUBCASE("boundary inclusive") {
        CHECK(graph::threshold_to_graph(m, 0.7).edges.size() == 2);
        CHECK(graph::threshold_to_graph(m, 0.0).edges.size() == 3);
        CHECK(graph::threshold_to_graph(m, 1.0 + 1e-9).edges.empty());
    }
    SUBCASE("monotone in the threshold") {
        std::size_t prev = m.entries.size();
        for (double tau : {0.1, 0.5, 0.8, 0.95}) {
            const auto g = graph::threshold_to_graph(m, tau);
            CHECK(g.edges.size() <= prev);
            prev = g.edges.size();
        }
    }
    SUBCASE("adjacency is consistent") {
        auto g = graph::threshold_to_graph(m, 0.0);
        CHECK(g.degree(0) == 2);
        CHECK(g.degree(1) == 2);
        CHECK(g.degree(3) == 0);
    }
}

TEST_CASE("bulk cutoff input validation") {
    CHECK_THROWS_AS(graph::rmt_bulk_cutoff(noise_matrix(2, 0, 1, 1),
                                           graph::RmtMode::Mp),
                    InvalidArgument);
    graph::SimilarityMatrix empty;
    empty.n = 10;
    const auto rep = graph::rmt_bulk_cutoff(empty, graph::RmtMode::Mp);
    CHECK(rep.above_bulk == 0);
    CHECK(rep.weight_threshold == 0.7); // global default when nothing stands out
}

TEST_CASE("pure noise spectrum stays inside the bulk") {
    const auto m = noise_matrix(200, 0.0, 0.4, 17);
    const auto rep = graph::rmt_bulk_cutoff(m, graph::RmtMode::Mp);
    CHECK(static_cast<double>(rep.above_bulk) / 200.0 <= 0.02);
    const auto g = graph::threshold_to_graph(m, rep.weight_threshold);
    const double kept = static_cast<double>(g.edges.size()) /
                        static_cast<double>(m.entries.size());
    CHECK(kept <= 0.05); // >= 95% of stored entries removed
}

TEST_CASE("planted two-block matrix yields exactly two spiked eigenvalues") {
    const auto m = planted_two_block(100, 23);
    const auto rep = graph::rmt_bulk_cutoff(m, graph::RmtMode::Mp);
    CHECK(rep.above_bulk == 2);
    const auto g = graph::threshold_to_graph(m, rep.weight_threshold);
    CHECK_FALSE(g.edges.empty());
    std::vector<std::size_t> within_degree(100, 0);
    for (const auto& e : g.edges) {
        const bool same = (e.i < 50) == (e.j < 50);
        CHECK(same); // zero cross-block edges survive
        ++within_degree[e.i];
        ++within_degree[e.j];
    }
    for (std::size_t v = 0; v < 100; ++v) CHECK(within_degree[v] > 0);
}

TEST_CASE("shuffle mode removes planted cross-block noise deterministically") {
    const auto m = planted_two_block(60, 29);
    const auto a = graph::rmt_bulk_cutoff(m, graph::RmtMode::Shuffle);
    const auto b = graph::rmt_bulk_cutoff(m, graph::RmtMode::Shuffle);
    CHECK(a.weight_threshold == b.weight_threshold);
    CHECK(a.weight_threshold >= 0.0);
    CHECK(a.weight_threshold <= 1.0);
    const auto g = graph::threshold_to_graph(m, a.weight_threshold);
    for (const auto& e : g.edges) CHECK(((e.i < 30) == (e.j < 30)));
    CHECK_FALSE(g.edges.empty());
}

TEST_CASE("iterative top eigenvalues agree with the dense solver") {
    const auto m = planted_two_block(80, 31);
    std::vector<std::pair<std::pair<std::uint32_t, std::uint32_t>, double>> entries(
        m.entries.begin(), m.entries.end());
    const auto top = graph::lanczos_top_eigenvalues(entries, m.n, 3, 7);
    const double dense = graph::top_eigenvalue_dense(m, false);
    REQUIRE_FALSE(top.empty());
    CHECK(top[0] == doctest::Approx(dense).epsilon(1e-8));
}

TEST_CASE("graph export and re-parse") {
    graph::WeightedGraph g;
    g.n = 2;
    g.edges = {{0, 1, 0.75}};
    std::vector<std::string> labels = {"a", "b"};

    SUBCASE("edge list has one data line") {
        std::ostringstream out;
        graph::export_graph(g, labels, graph::GraphFormat::EdgeList, out);
        CHECK(out.str() == "# source\ttarget\tweight\na\tb\t0.75\n");
    }
    SUBCASE("empty graph writes only the header") {
        graph::WeightedGraph empty;
        std::ostringstream out;
        graph::export_graph(empty, {}, graph::GraphFormat::EdgeList, out);
        CHECK(out.str() == "# source\ttarget\tweight\n");
    }
    SUBCASE("graph markup mentions the weight attribute") {
        std::ostringstream out;
        graph::export_graph(g, labels, graph::GraphFormat::GraphMarkup, out);
        CHECK(out.str().find("weight") != std::string::npos);
        CHECK(out.str().find("0.75") != std::string::npos);
    }
    SUBCASE("round trip reproduces the edge multiset") {
        graph::WeightedGraph big;
        big.n = 5;
        big.edges = {{0, 1, 0.5}, {0, 4, 0.25}, {2, 3, 1.0}};
        std::vector<std::string> ids = {"p", "q", "r", "s", "t"};
        std::ostringstream out;
        graph::export_graph(big, ids, graph::GraphFormat::EdgeList, out);
        std::istringstream in(out.str());
        std::vector<std::string> back_labels;
        const auto back = graph::parse_edge_list(in, back_labels);
        REQUIRE(back.edges.size() == big.edges.size());
        for (std::size_t i = 0; i < big.edges.size(); ++i) {
            CHECK(back_labels[back.edges[i].i] == ids[big.edges[i].i]);
            CHECK(back_labels[back.edges[i].j] == ids[big.edges[i].j]);
            CHECK(back.edges[i].w == big.edges[i].w);
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "repgraph/error.hpp"
#include "repgraph/faircluster.hpp"
#include "repgraph/util.hpp"

using namespace repgraph;
using faircluster::Points;

namespace {

// Build a Partition by hand from an assignment vector.
faircluster::Partition make_partition(const Points& points,
                                      const std::vector<std::uint32_t>& assignment,
                                      std::size_t k,
                                      const faircluster::Subgroups& sg) {
    faircluster::Partition p;
    p.k = k;
    p.assignment = assignment;
    p.sizes.assign(k, 0);
    p.contingency.assign(k, std::vector<std::size_t>(sg.count(), 0));
    const std::size_t d = points.empty() ? 0 : points[0].size();
    p.centroids.assign(k, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        ++p.sizes[assignment[i]];
        if (sg.membership[i] >= 0) ++p.contingency[assignment[i]][sg.membership[i]];
        for (std::size_t x = 0; x < d; ++x)
            p.centroids[assignment[i]][x] += points[i][x];
    }
    for (std::size_t j = 0; j < k; ++j)
        if (p.sizes[j] > 0)
            for (std::size_t x = 0; x < d; ++x)
                p.centroids[j][x] /= static_cast<double>(p.sizes[j]);
    return p;
}

std::vector<double> random_distribution(util::SplitRng& rng, std::size_t dim) {
    std::vector<double> p(dim);
    double sum = 0;
    for (auto& v : p) {
        v = rng.next_double() + 1e-6;
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

} // namespace

TEST_CASE("jensen-shannon divergence") {
    CHECK(faircluster::js_divergence({0.3, 0.7}, {0.3, 0.7}) == 0.0);
    CHECK(faircluster::js_divergence({1, 0}, {0, 1}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(faircluster::js_divergence({1, 0}, {0.5, 0.5}) ==
          doctest::Approx(0.21576).epsilon(1e-4));
    CHECK_THROWS_AS(faircluster::js_divergence({0.5, 0.6}, {0.5, 0.5}),
                    InvalidArgument);
    CHECK_THROWS_AS(faircluster::js_divergence({1.5, -0.5}, {0.5, 0.5}),
                    InvalidArgument);
    CHECK_THROWS_AS(faircluster::js_divergence({1}, {0.5, 0.5}), InvalidArgument);
}

TEST_CASE("two-point lifting agrees with the full divergence") {
    util::SplitRng rng(7, 0);
    for (int t = 0; t < 50; ++t) {
        const double r = rng.next_double();
        const double s = rng.next_double();
        CHECK(faircluster::js_two_point(r, s) ==
              doctest::Approx(faircluster::js_divergence({r, 1 - r}, {s, 1 - s}))
                  .epsilon(1e-12));
    }
}

TEST_CASE("sqrt of js satisfies the metric axioms on random triples") {
    util::SplitRng rng(9, 0);
    for (int t = 0; t < 1000; ++t) {
        const auto p = random_distribution(rng, 4);
        const auto q = random_distribution(rng, 4);
        const auto r = random_distribution(rng, 4);
        const double dpq = std::sqrt(faircluster::js_divergence(p, q));
        const double dqp = std::sqrt(faircluster::js_divergence(q, p));
        const double dpr = std::sqrt(faircluster::js_divergence(p, r));
        const double drq = std::sqrt(faircluster::js_divergence(r, q));
        CHECK(dpq == doctest::Approx(dqp).epsilon(1e-12));
        CHECK(dpq <= std::sqrt(std::log(2.0)) + 1e-12);
        CHECK(dpq <= dpr + drq + 1e-9);
    }
}

TEST_CASE("subgroup table construction") {
    const auto sg = faircluster::Subgroups::from_table(
        4, {{"z", {0}}, {"a", {1, 2}}});
    REQUIRE(sg.names == std::vector<std::string>{"a", "z"});
    CHECK(sg.sizes == std::vector<std::size_t>{2, 1});
    CHECK(sg.membership == std::vector<int>{1, 0, 0, -1});
    CHECK_THROWS_AS(faircluster::Subgroups::from_table(2, {{"a", {5}}}),
                    InvalidArgument);
}

TEST_CASE("objective evaluation") {
    const Points points = {{0, 0}, {0, 1}, {10, 0}, {10, 1}};
    const auto sg = faircluster::Subgroups::from_table(4, {{"g", {0, 2}}});
    faircluster::FairnessConfig cfg;

    SUBCASE("lambda zero gives the within-cluster sum of squares") {
        const auto p = make_partition(points, {0, 0, 1, 1}, 2, sg);
        CHECK(faircluster::objective(points, p, sg, cfg) == doctest::Approx(1.0));
    }
    SUBCASE("single cluster has zero js penalty") {
        cfg.lambda = 5.0;
        const auto p = make_partition(points, {0, 0, 0, 0}, 1, sg);
        CHECK(faircluster::fairness_penalty(p, sg, cfg) == doctest::Approx(0.0));
    }
    SUBCASE("even subgroup split beats a lopsided one") {
        cfg.lambda = 1.0;
        const auto even = make_partition(points, {0, 0, 1, 1}, 2, sg);
        const auto skew = make_partition(points, {0, 1, 0, 1}, 2, sg);
        CHECK(faircluster::fairness_penalty(even, sg, cfg) <
              faircluster::fairness_penalty(skew, sg, cfg));
    }
    SUBCASE("negative lambda is rejected") {
        cfg.lambda = -1;
        const auto p = make_partition(points, {0, 0, 1, 1}, 2, sg);
        CHECK_THROWS_AS(faircluster::objective(points, p, sg, cfg),
                        InvalidArgument);
    }
    SUBCASE("objective is invariant under cluster relabeling") {
        cfg.lambda = 0.7;
        const auto p = make_partition(points, {0, 0, 1, 1}, 2, sg);
        const auto swapped = make_partition(points, {1, 1, 0, 0}, 2, sg);
        CHECK(faircluster::objective(points, p, sg, cfg) ==
              doctest::Approx(faircluster::objective(points, swapped, sg, cfg))
                  .epsilon(1e-12));
    }
}

TEST_CASE("penalized lloyd basics") {
    util::SplitRng rng(13, 0);
    Points blobs;
    for (int i = 0; i < 20; ++i)
        blobs.push_back({rng.next_double() * 0.5, rng.next_double() * 0.5});
    for (int i = 0; i < 20; ++i)
        blobs.push_back({8 + rng.next_double() * 0.5, rng.next_double() * 0.5});
    faircluster::Subgroups none;
    none.membership.assign(blobs.size(), -1);
    faircluster::FairnessConfig cfg;

    SUBCASE("k=1 collapses everything") {
        const auto p = faircluster::fair_partition(blobs, 1, cfg, none, 3);
        CHECK(p.sizes[0] == blobs.size());
    }
    SUBCASE("two well-separated blobs recovered at lambda zero") {
        const auto p = faircluster::fair_partition(blobs, 2, cfg, none, 3);
        for (std::size_t i = 1; i < 20; ++i)
            CHECK(p.assignment[i] == p.assignment[0]);
        for (std::size_t i = 21; i < 40; ++i)
            CHECK(p.assignment[i] == p.assignment[20]);
        CHECK(p.assignment[0] != p.assignment[20]);
    }
    SUBCASE("objective trace never increases") {
        const auto sg = faircluster::Subgroups::from_table(
            blobs.size(), {{"g", {0, 1, 2, 20, 21}}});
        faircluster::FairnessConfig fair;
        fair.lambda = 0.4;
        const auto p = faircluster::fair_partition(blobs, 3, fair, sg, 5);
        for (std::size_t t = 1; t < p.objective_trace.size(); ++t)
            CHECK(p.objective_trace[t] <= p.objective_trace[t - 1] + 1e-9);
    }
    SUBCASE("thread count does not change the result") {
        const auto a = faircluster::fair_partition(blobs, 2, cfg, none, 3, 100, 1);
        const auto b = faircluster::fair_partition(blobs, 2, cfg, none, 3, 100, 8);
        CHECK(a.assignment == b.assignment);
    }
    SUBCASE("infeasible k is rejected") {
        CHECK_THROWS_AS(faircluster::fair_partition(blobs, 100, cfg, none, 3),
                        InvalidArgument);
    }
}

TEST_CASE("lambda zero matches an unpenalized lloyd reference") {
    util::SplitRng rng(17, 0);
    Points pts;
    for (int i = 0; i < 60; ++i)
        pts.push_back({rng.next_double() * 4, rng.next_double() * 4});
    faircluster::Subgroups none;
    none.membership.assign(pts.size(), -1);
    const auto p =
        faircluster::fair_partition(pts, 4, faircluster::FairnessConfig{}, none, 11);
    // At convergence every point must sit in its nearest cluster (ties to
    // the lower index), which characterizes the unpenalized assignment step.
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t j = 0; j < 4; ++j) {
            double d = 0;
            for (std::size_t x = 0; x < 2; ++x) {
                const double diff = pts[i][x] - p.centroids[j][x];
                d += diff * diff;
            }
            if (d + 1e-12 < best_d) {
                best_d = d;
                best = j;
            }
        }
        CHECK(p.assignment[i] == best);
    }
}

TEST_CASE("coverage under wcd versus js on the rare-subgroup construction") {
    // Ten tight blobs of three points; the rare subgroup has one member per
    // blob, so proportional (js) clustering caps its coverage at 0.1 while
    // the coverage-seeking wcd penalty concentrates two members together.
    util::SplitRng rng(19, 0);
    Points pts;
    std::vector<std::size_t> rare;
    for (int b = 0; b < 10; ++b)
        for (int x = 0; x < 3; ++x) {
            pts.push_back({static_cast<double>(b) * 2 + 0.02 * rng.next_double(),
                           0.02 * rng.next_double()});
            if (x == 0) rare.push_back(pts.size() - 1);
        }
    std::vector<std::size_t> common;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (std::find(rare.begin(), rare.end(), i) == rare.end())
            common.push_back(i);
    const auto sg = faircluster::Subgroups::from_table(
        pts.size(), {{"rare", rare}, {"common", common}});

    faircluster::FairnessConfig wcd;
    wcd.mode = faircluster::FairMode::Wcd;
    wcd.tau = 0.2;
    wcd.lambda = 600.0;
    const auto pw = faircluster::fair_partition(pts, 10, wcd, sg, 2);
    const auto rw = faircluster::equity_report(pw, sg);
    CHECK(rw.coverage.at("rare") >= 0.2);

    faircluster::FairnessConfig js = wcd;
    js.mode = faircluster::FairMode::Js;
    const auto pj = faircluster::fair_partition(pts, 10, js, sg, 2);
    const auto rj = faircluster::equity_report(pj, sg);
    CHECK(rj.coverage.at("rare") < 0.2);
}

TEST_CASE("spectral embedding and graph clustering") {
    SUBCASE("empty graph is degenerate") {
        graph::WeightedGraph g;
        CHECK_THROWS_AS(faircluster::spectral_embedding(g, 2), InvalidArgument);
    }
    SUBCASE("two cliques separate cleanly") {
        graph::WeightedGraph g;
        g.n = 10;
        for (std::uint32_t i = 0; i < 5; ++i)
            for (std::uint32_t j = i + 1; j < 5; ++j) {
                g.edges.push_back({i, j, 1.0});
                g.edges.push_back({i + 5, j + 5, 1.0});
            }
        g.edges.push_back({4, 5, 0.05}); // faint bridge keeps it connected
        std::sort(g.edges.begin(), g.edges.end(),
                  [](const auto& a, const auto& b) {
                      return std::pair(a.i, a.j) < std::pair(b.i, b.j);
                  });
        faircluster::Subgroups none;
        none.membership.assign(10, -1);
        const auto p = faircluster::fair_partition_graph(
            g, 2, faircluster::FairnessConfig{}, none, 7);
        for (std::size_t i = 1; i < 5; ++i) CHECK(p.assignment[i] == p.assignment[0]);
        for (std::size_t i = 6; i < 10; ++i) CHECK(p.assignment[i] == p.assignment[5]);
        CHECK(p.assignment[0] != p.assignment[5]);
    }
}

TEST_CASE("equity report") {
    const Points pts = {{0, 0}, {0, 1}, {1, 0}, {1, 1},
                        {5, 0}, {5, 1}, {6, 0}, {6, 1}, {5, 2}, {6, 2}};
    SUBCASE("perfect proportionality zeroes the deviation") {
        const auto sg = faircluster::Subgroups::from_table(
            4, {{"g", {0, 2}}, {"h", {1, 3}}});
        const Points four(pts.begin(), pts.begin() + 4);
        const auto p = make_partition(four, {0, 0, 1, 1}, 2, sg);
        const auto rep = faircluster::equity_report(p, sg);
        CHECK(rep.d_eq == doctest::Approx(0.0));
        CHECK(rep.js_disparity == doctest::Approx(0.0));
        CHECK(rep.r_prop == doctest::Approx(0.5));
    }
    SUBCASE("a cluster monopolizing a subgroup scores 0.5") {
        const auto sg = faircluster::Subgroups::from_table(
            10, {{"g", {0, 1, 2, 3, 4}}});
        const auto p = make_partition(
            pts, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1}, 2, sg);
        const auto rep = faircluster::equity_report(p, sg);
        CHECK(rep.d_eq == doctest::Approx(0.5));
        CHECK(rep.coverage.at("g") == doctest::Approx(1.0));
    }
    SUBCASE("labels identical to clusters give purity one") {
        const auto sg = faircluster::Subgroups::from_table(4, {});
        const Points four(pts.begin(), pts.begin() + 4);
        const auto p = make_partition(four, {0, 0, 1, 1}, 2, sg);
        const auto rep =
            faircluster::equity_report(p, sg, {"x", "x", "y", "y"});
        CHECK(rep.purity == 1.0);
    }
}

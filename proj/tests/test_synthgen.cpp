#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <string>

#include "repgraph/error.hpp"
#include "repgraph/sketch.hpp"
#include "repgraph/synthgen.hpp"

using namespace repgraph;

namespace {

double exact_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t inter = 0;
    for (const auto& s : a) inter += b.count(s);
    return static_cast<double>(inter) /
           static_cast<double>(a.size() + b.size() - inter);
}

} // namespace

TEST_CASE("zero mutation makes every within-block pair identical") {
    synthgen::SynthSpec spec;
    spec.n = 40;
    spec.blocks = 4;
    spec.mutation_rate = 0.0;
    spec.seed = 3;
    const auto out = synthgen::generate(spec);
    REQUIRE(out.dataset.n() == 40);
    // 4 blocks of 10: all C(10,2) pairs per block are true pairs at Jaccard 1.
    CHECK(out.truth.true_pairs.size() == 4 * 45);
    for (const auto& [i, j] : out.truth.true_pairs) {
        CHECK(out.truth.block_of[i] == out.truth.block_of[j]);
        CHECK(out.dataset.records[i].residues == out.dataset.records[j].residues);
    }
}

TEST_CASE("rare subgroup size follows its fraction") {
    synthgen::SynthSpec spec;
    spec.n = 1000;
    spec.blocks = 4;
    spec.mutation_rate = 0.02;
    spec.subgroup_fractions = {{"common", 0.99}, {"rare", 0.01}};
    spec.seed = 11;
    const auto out = synthgen::generate(spec);
    CHECK(out.dataset.subgroup_table.at("rare").size() == 10);
    CHECK(out.dataset.subgroup_table.at("common").size() == 990);
}

TEST_CASE("generation is deterministic per seed") {
    synthgen::SynthSpec spec;
    spec.n = 60;
    spec.blocks = 3;
    spec.mutation_rate = 0.05;
    spec.seed = 21;
    const auto a = synthgen::generate(spec);
    const auto b = synthgen::generate(spec);
    REQUIRE(a.dataset.n() == b.dataset.n());
    for (std::size_t i = 0; i < a.dataset.n(); ++i)
        CHECK(a.dataset.records[i].residues == b.dataset.records[i].residues);
    CHECK(a.truth.true_pairs == b.truth.true_pairs);
    spec.seed = 22;
    const auto c = synthgen::generate(spec);
    bool differs = false;
    for (std::size_t i = 0; i < a.dataset.n() && !differs; ++i)
        differs = a.dataset.records[i].residues != c.dataset.records[i].residues;
    CHECK(differs);
}

TEST_CASE("ground truth equals an independent brute-force enumeration") {
    synthgen::SynthSpec spec;
    spec.n = 50;
    spec.blocks = 5;
    spec.mutation_rate = 0.04;
    spec.seed = 31;
    const auto out = synthgen::generate(spec);
    std::set<std::pair<std::uint32_t, std::uint32_t>> brute;
    std::vector<std::set<std::string>> shingles(out.dataset.n());
    for (std::size_t i = 0; i < out.dataset.n(); ++i)
        shingles[i] = sketch::shingle(out.dataset.records[i].residues,
                                      spec.shingle_len);
    for (std::uint32_t i = 0; i < out.dataset.n(); ++i)
        for (std::uint32_t j = i + 1; j < out.dataset.n(); ++j)
            if (exact_jaccard(shingles[i], shingles[j]) >= spec.shingle_jaccard_tau)
                brute.insert({i, j});
    const std::set<std::pair<std::uint32_t, std::uint32_t>> truth(
        out.truth.true_pairs.begin(), out.truth.true_pairs.end());
    CHECK(truth == brute);
}

TEST_CASE("invalid specs are rejected") {
    synthgen::SynthSpec spec;
    spec.subgroup_fractions = {{"a", 0.6}, {"b", 0.6}};
    CHECK_THROWS_AS(synthgen::generate(spec), InvalidArgument);
    spec.subgroup_fractions = {{"a", 1.0}};
    spec.blocks = 0;
    CHECK_THROWS_AS(synthgen::generate(spec), InvalidArgument);
    spec.blocks = 2;
    spec.mutation_rate = 1.5;
    CHECK_THROWS_AS(synthgen::generate(spec), InvalidArgument);
}

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "repgraph/ingest.hpp"

namespace repgraph::synthgen {

struct SynthSpec {
    std::size_t n = 100;
    std::size_t blocks = 4;
    double mutation_rate = 0.05; // per-residue ancestor mutation probability
    double cross_noise = 0.0;    // chance a sequence is drawn fresh, off-block
    std::size_t min_len = 12;
    std::size_t max_len = 20;
    // (name, fraction) pairs summing to 1; a trailing rare group models the
    // epsilon-rare regime.
    std::vector<std::pair<std::string, double>> subgroup_fractions = {
        {"common", 0.99}, {"rare", 0.01}};
    double shingle_jaccard_tau = 0.5; // ground-truth pair cutoff (exact Jaccard)
    std::size_t shingle_len = 4;
    std::uint64_t seed = 1;
};

struct GroundTruth {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> true_pairs; // i < j
    std::vector<std::size_t> block_of;
    std::vector<std::string> subgroup_of;
};

struct SynthResult {
    ingest::RepertoireDataset dataset;
    GroundTruth truth;
};

// Deterministic per seed. True pairs are the within-block pairs whose exact
// shingle Jaccard clears tau; generation double-checks this list against a
// brute-force enumeration over all pairs.
SynthResult generate(const SynthSpec& spec);

} // namespace repgraph::synthgen

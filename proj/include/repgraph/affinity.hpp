#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repgraph/ingest.hpp"
#include "repgraph/sketch.hpp"

namespace repgraph::affinity {

// Edit-operation costs. When `sub_table` is set, substitution cost comes
// from the labeled symmetric matrix instead of the flat `substitution`.
struct CostScheme {
    double insertion = 1.0;
    double deletion = 1.0;
    double substitution = 1.0;

    struct SubTable {
        std::string labels;                       // row/column order
        std::vector<std::vector<double>> costs;   // symmetric, zero diagonal
        double lookup(char a, char b) const;
    };
    std::optional<SubTable> sub_table;

    double max_single_cost() const;
};

CostScheme::SubTable parse_cost_table(std::istream& in);

struct EmbeddingVector {
    std::vector<double> values;
    std::size_t owner = 0;

    std::size_t dim() const { return values.size(); }
};

struct EmbeddingConfig {
    std::size_t kmer_len = 3;
    std::size_t kmer_dims = 64; // hashed k-mer count block
};

struct AffinityChannelSet {
    std::pair<std::uint32_t, std::uint32_t> pair{0, 0};
    std::vector<double> channels;
    std::vector<double> gate_scores;
    std::vector<double> weights;
    double fused = 0.0;
};

// Gate scorer (two affine layers with a rectifier), channel-importance
// affine map, and layer-norm parameters. Zero defaults make the fusion
// equal-weight.
struct GateParams {
    static constexpr std::size_t kScorerInputs = 4;
    std::size_t hidden = 8;
    std::vector<std::vector<double>> w1; // hidden x kScorerInputs
    std::vector<double> b1;              // hidden
    std::vector<double> w2;              // hidden (single output row)
    double b2 = 0.0;

    std::vector<double> w_meta;          // kScorerInputs
    double b_meta = 0.0;

    double gamma = 1.0;
    double beta = 0.0;
    double eps = 1e-5;

    bool compose_gates = false;

    static GateParams zero_default();
    static GateParams load(std::istream& in);
};

struct TilePlan {
    std::size_t grid_x = 0;
    std::size_t grid_y = 0;
    std::size_t block_x = 0;
    std::size_t block_y = 0;
};

// Two-row DP over the three-branch recurrence.
double edit_distance(std::string_view a, std::string_view b, const CostScheme& costs);

// 1 - d(a,b) / (max(|a|,|b|) * c_max), clamped to [0,1]; both empty -> 1.
double alignment_affinity(std::string_view a, std::string_view b, const CostScheme& costs);

// Hashed k-mer counts (length-normalized) plus mean hydropathy, charge and
// volume descriptors. Deterministic.
EmbeddingVector embed_sequence(const ingest::SequenceRecord& record,
                               const EmbeddingConfig& config = {});

// (cosine + 1) / 2; either vector zero -> 0.5.
double embedding_affinity(const EmbeddingVector& u, const EmbeddingVector& v);

// Sigmoid of the affine map over per-channel features.
double channel_importance(const std::vector<double>& features, const GateParams& params);

// Gate score for one channel: two affine layers with a rectifier between.
double gate_score(const std::vector<double>& features, const GateParams& params);

// Softmax weights over gate scores, convex fusion of channels.
AffinityChannelSet gate_and_fuse(const std::vector<double>& channels,
                                 const std::vector<double>& gate_scores);

// Sum_m alpha_m * LayerNorm(F_m).
std::vector<double> layer_norm_fuse(const std::vector<std::vector<double>>& features,
                                    const std::vector<double>& alphas,
                                    const GateParams& params);

TilePlan tile_plan(std::size_t n, std::size_t m_rows, std::size_t block_x,
                   std::size_t block_y);

struct AffinityConfig {
    EmbeddingConfig embedding;
    std::size_t len_max = 32;      // normalizer for the length-gap feature
    unsigned threads = 1;
    std::size_t tile = 256;        // pairs per work tile
};

// Both channels, gated and fused, for every candidate pair. Output order
// matches candidate order; identical for any thread count.
std::vector<AffinityChannelSet> compute_affinity_channels(
    const ingest::RepertoireDataset& dataset, const sketch::CandidateSet& candidates,
    const GateParams& params, const CostScheme& costs, const AffinityConfig& config);

} // namespace repgraph::affinity

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "repgraph/affinity.hpp"

namespace repgraph::graph {

// Symmetric sparse similarity matrix; diagonal implicitly 1, no self
// entries stored. Keys are canonical (i < j).
struct SimilarityMatrix {
    std::size_t n = 0;
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> entries;

    // 0 when the pair is not stored.
    double get(std::uint32_t i, std::uint32_t j) const;
};

struct WeightedGraph {
    struct Edge {
        std::uint32_t i;
        std::uint32_t j;
        double w;
        bool operator==(const Edge&) const = default;
    };
    std::size_t n = 0;
    std::vector<Edge> edges; // i < j, sorted

    // CSR-style adjacency for traversal.
    std::vector<std::size_t> adjacency_offsets;
    std::vector<std::uint32_t> adjacency;
    std::vector<double> adjacency_weights;

    void build_adjacency();
    std::size_t degree(std::uint32_t v) const;
};

struct SpectrumReport {
    std::vector<double> eigenvalues; // descending; top-k only in iterative mode
    double bulk_edge = 0.0;          // lambda_plus
    double aspect_ratio = 0.0;       // q used for the MP edge
    double weight_threshold = 0.0;   // tau_w derived from the cutoff
    std::size_t above_bulk = 0;      // eigenvalues above lambda_plus
};

enum class RmtMode { Mp, Shuffle };

struct RmtOptions {
    std::size_t shuffles = 20;      // S, shuffle mode
    std::uint64_t seed = 1;
    double default_tau = 0.7;       // fallback when nothing rises above the bulk
    std::size_t dense_limit = 4096; // dense eigensolve at or below this n
};

// Duplicate pairs keep the maximum fused affinity.
SimilarityMatrix assemble_similarity(
    std::size_t n, const std::vector<affinity::AffinityChannelSet>& affinities);

// Estimates the noise bulk edge of the spectrum and maps it to an edge
// weight threshold. Mp mode scales entries to unit second moment and uses
// the Marchenko-Pastur edge (1 + sqrt(q))^2 with q = n_eff/n; shuffle mode
// takes the largest eigenvalue over S weight shuffles and bisects for the
// largest threshold whose removal set still looks like noise.
SpectrumReport rmt_bulk_cutoff(const SimilarityMatrix& matrix, RmtMode mode,
                               const RmtOptions& options = {});

// Edge (i, j) retained iff entry >= tau_w (boundary inclusive).
WeightedGraph threshold_to_graph(const SimilarityMatrix& matrix, double tau_w);

enum class GraphFormat { EdgeList, GraphMarkup };

void export_graph(const WeightedGraph& g, const std::vector<std::string>& labels,
                  GraphFormat format, std::ostream& out);

// Re-parses an edge-list export; labels come back through `labels`.
WeightedGraph parse_edge_list(std::istream& in, std::vector<std::string>& labels);

// Largest eigenvalue helpers, exposed for tests. Dense path uses a full
// symmetric solve; the iterative path is Lanczos with reorthogonalization.
double top_eigenvalue_dense(const SimilarityMatrix& matrix, bool scaled);
std::vector<double> lanczos_top_eigenvalues(
    const std::vector<std::pair<std::pair<std::uint32_t, std::uint32_t>, double>>& entries,
    std::size_t n, std::size_t k, std::uint64_t seed);

} // namespace repgraph::graph

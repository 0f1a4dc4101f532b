#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "repgraph/graph.hpp"

namespace repgraph::faircluster {

enum class FairMode { Js, Wcd };

struct FairnessConfig {
    FairMode mode = FairMode::Js;
    double lambda = 0.0;
    double tau = 0.2; // uniform target coverage, wcd mode
};

// Subgroup structure in a fixed, sorted name order. Points without a label
// carry membership -1 and contribute to no penalty term.
struct Subgroups {
    std::vector<std::string> names;
    std::vector<int> membership; // point -> group index or -1
    std::vector<std::size_t> sizes;

    static Subgroups from_table(
        std::size_t n,
        const std::unordered_map<std::string, std::vector<std::size_t>>& table);

    std::size_t count() const { return names.size(); }
};

struct Partition {
    std::size_t k = 0;
    std::vector<std::uint32_t> assignment;
    std::vector<std::vector<double>> centroids;
    std::vector<std::vector<std::size_t>> contingency; // k x |G|
    std::vector<std::size_t> sizes;
    std::vector<double> objective_trace; // one value per Lloyd iteration
    std::size_t iterations = 0;
};

struct EquityReport {
    double r_prop = 0.0;
    double d_eq = 0.0;
    double js_disparity = 0.0;
    std::map<std::string, double> coverage;
    double purity = 0.0;
};

using Points = std::vector<std::vector<double>>;

// Jensen-Shannon divergence with natural log; range [0, ln 2].
double js_divergence(const std::vector<double>& p, const std::vector<double>& q);

// JS between the two-point liftings (r, 1-r) and (s, 1-s).
double js_two_point(double r, double s);

// Fairness penalty alone (the lambda-weighted term of the objective).
double fairness_penalty(const Partition& partition, const Subgroups& subgroups,
                        const FairnessConfig& config);

// Cohesion + lambda * penalty.
double objective(const Points& points, const Partition& partition,
                 const Subgroups& subgroups, const FairnessConfig& config);

// Penalized Lloyd with farthest-point seeding. Deterministic given seed.
Partition fair_partition(const Points& points, std::size_t k,
                         const FairnessConfig& config, const Subgroups& subgroups,
                         std::uint64_t seed, std::size_t max_iter = 100,
                         unsigned threads = 1);

// Spectral variant: rows of the first k non-trivial eigenvectors of the
// normalized Laplacian, each column damped by its diffusion factor
// max(0, 1 - eigenvalue).
Partition fair_partition_graph(const graph::WeightedGraph& g, std::size_t k,
                               const FairnessConfig& config, const Subgroups& subgroups,
                               std::uint64_t seed, std::size_t max_iter = 100,
                               unsigned threads = 1);

// Eigenvector coordinates used by the spectral variant and the 2D layout.
Points spectral_embedding(const graph::WeightedGraph& g, std::size_t dims,
                          bool diffusion_scale = true);

EquityReport equity_report(const Partition& partition, const Subgroups& subgroups,
                           const std::vector<std::string>& labels = {});

} // namespace repgraph::faircluster

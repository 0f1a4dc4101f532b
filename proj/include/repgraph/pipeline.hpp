#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "repgraph/faircluster.hpp"
#include "repgraph/graph.hpp"
#include "repgraph/ingest.hpp"
#include "repgraph/sketch.hpp"
#include "repgraph/tuner.hpp"

namespace repgraph::pipeline {

struct PipelineConfig {
    std::string input_path;
    std::string alphabet = "amino"; // amino | nucleotide
    std::size_t max_len = 0;        // 0 = no truncation

    std::size_t shingle_len = 4;
    std::size_t minhash_m = 128;
    std::size_t bands = 32;
    std::string block_column; // metadata column keying LSH blocks; empty = one block

    std::string gate_params_path; // optional key=value parameter file
    std::string cost_table_path;  // optional substitution matrix

    std::string rmt_mode = "mp"; // mp | shuffle
    double default_tau = 0.7;

    std::size_t k_clusters = 2;
    std::string fairness_mode = "js"; // js | wcd
    double coverage_tau = 0.2;
    double lambda = -1.0;   // >= 0 pins the equity coefficient directly
    std::string preset;     // viral | tumor; used when lambda < 0 and no tuner
    std::string tune;       // "" | bisect | grid | gd
    double delta_max = 0.1;

    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string outdir = "out";

    static PipelineConfig from_json_file(const std::string& path);
    static PipelineConfig from_json_text(const std::string& text);
    void validate() const; // throws InvalidArgument on a bad field or missing file
};

struct PipelineResult {
    ingest::RepertoireDataset dataset;
    sketch::CandidateSet candidates;
    graph::SpectrumReport spectrum;
    graph::WeightedGraph graph;
    faircluster::Subgroups subgroups;
    faircluster::Partition partition;
    faircluster::EquityReport equity;
    faircluster::Points layout2d; // per-node 2D spectral coordinates
    tuner::TuneTrace tune_trace;
    bool tuned = false;
    double chosen_lambda = 0.0;
};

struct RunManifest {
    std::string config_echo;                 // canonical JSON of the config
    std::string version;
    std::vector<std::string> stages;         // canonical execution order
    std::map<std::string, double> timings_ms;
    std::size_t candidate_count = 0;
    std::size_t edge_count = 0;
    double chosen_lambda = 0.0;
    faircluster::EquityReport equity;
    std::map<std::string, std::string> checksums; // file -> sha256 hex

    std::string to_json() const;
};

// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::string& path);

// Runs every stage in order and writes all artifacts into config.outdir.
RunManifest run_pipeline(const PipelineConfig& config);

// Writes clusters.tsv, graph.tsv, equity.json, disparity_heatmap.tsv,
// layout2d.tsv and, when tuning ran, tuner_trace.json. Returns the emitted
// file names (relative to outdir).
std::vector<std::string> emit_reports(const PipelineResult& result,
                                      const std::string& outdir);

} // namespace repgraph::pipeline

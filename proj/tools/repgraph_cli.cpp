#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "repgraph/affinity.hpp"
#include "repgraph/error.hpp"
#include "repgraph/faircluster.hpp"
#include "repgraph/graph.hpp"
#include "repgraph/ingest.hpp"
#include "repgraph/pipeline.hpp"
#include "repgraph/repdist.hpp"
#include "repgraph/sketch.hpp"
#include "repgraph/synthgen.hpp"
#include "repgraph/tuner.hpp"

namespace {

using namespace repgraph;
using nlohmann::json;

ingest::RepertoireDataset load_dataset(const std::string& path,
                                       const std::string& alphabet_name,
                                       std::size_t max_len) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input: " + path);
    const std::string alphabet = alphabet_name == "nt"
                                     ? ingest::nucleotide_alphabet()
                                     : ingest::amino_alphabet();
    return ingest::parse_repertoire(in, {}, alphabet, max_len);
}

repdist::LabeledGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph: " + path);
    repdist::LabeledGraph lg;
    lg.g = graph::parse_edge_list(in, lg.labels);
    return lg;
}

// Cluster an edge-list graph with the spectral variant and report equity.
int run_cluster(const std::string& graph_path, std::size_t k,
                const std::string& fair_mode, double lambda, double tau,
                std::uint64_t seed, const std::string& out_path) {
    auto lg = load_graph(graph_path);
    faircluster::FairnessConfig cfg;
    cfg.mode = fair_mode == "wcd" ? faircluster::FairMode::Wcd
                                  : faircluster::FairMode::Js;
    cfg.lambda = lambda;
    cfg.tau = tau;
    // Edge-list inputs carry no subgroup labels; everything is unlabeled.
    faircluster::Subgroups subgroups;
    subgroups.membership.assign(lg.g.n, -1);
    const auto part = faircluster::fair_partition_graph(lg.g, k, cfg, subgroups, seed);
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw IoError("cannot write " + out_path);
        out = &file;
    }
    *out << "id\tcluster\n";
    for (std::size_t i = 0; i < lg.g.n; ++i)
        *out << lg.labels[i] << '\t' << part.assignment[i] << '\n';
    return 0;
}

int run_repdist(const std::string& a_path, const std::string& b_path,
                std::size_t k, const std::string& mode, std::uint64_t seed) {
    const auto ga = load_graph(a_path);
    const auto gb = load_graph(b_path);
    json detail{{"mode", mode}, {"a", a_path}, {"b", b_path}};
    double value = 0;
    if (mode == "js") {
        faircluster::FairnessConfig cfg;
        faircluster::Subgroups empty_a, empty_b;
        empty_a.membership.assign(ga.g.n, -1);
        empty_b.membership.assign(gb.g.n, -1);
        const auto pa = faircluster::fair_partition_graph(ga.g, k, cfg, empty_a, seed);
        const auto pb = faircluster::fair_partition_graph(gb.g, k, cfg, empty_b, seed);
        value = repdist::js_repertoire_distance(repdist::cluster_mass(pa),
                                                repdist::cluster_mass(pb));
        detail["k"] = k;
    } else {
        const auto costs = repdist::GedCosts::defaults();
        const double ged = mode == "ged" ? repdist::ged_exact(ga, gb, costs)
                                         : repdist::ged_assignment(ga, gb, costs);
        value = repdist::ged_normalized(ged, ga, gb);
        detail["ged_raw"] = ged;
    }
    detail["value"] = value;
    std::cout << value << '\n' << detail.dump(2) << '\n';
    return 0;
}

int run_synth(const std::string& spec_path, const std::string& out_path) {
    std::ifstream in(spec_path);
    if (!in) throw IoError("cannot open spec: " + spec_path);
    json j = json::parse(in);
    synthgen::SynthSpec spec;
    if (j.contains("n")) spec.n = j["n"].get<std::size_t>();
    if (j.contains("blocks")) spec.blocks = j["blocks"].get<std::size_t>();
    if (j.contains("mutation_rate")) spec.mutation_rate = j["mutation_rate"];
    if (j.contains("cross_noise")) spec.cross_noise = j["cross_noise"];
    if (j.contains("min_len")) spec.min_len = j["min_len"].get<std::size_t>();
    if (j.contains("max_len")) spec.max_len = j["max_len"].get<std::size_t>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("shingle_jaccard_tau")) spec.shingle_jaccard_tau = j["shingle_jaccard_tau"];
    if (j.contains("subgroups")) {
        spec.subgroup_fractions.clear();
        for (const auto& [name, frac] : j["subgroups"].items())
            spec.subgroup_fractions.emplace_back(name, frac.get<double>());
        std::sort(spec.subgroup_fractions.begin(), spec.subgroup_fractions.end());
    }
    const auto result = synthgen::generate(spec);
    {
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write " + out_path);
        ingest::serialize_repertoire(result.dataset, out);
    }
    {
        std::ofstream out(out_path + ".truth.tsv");
        if (!out) throw IoError("cannot write ground-truth sidecar");
        out << "i\tj\n";
        for (const auto& [i, jdx] : result.truth.true_pairs)
            out << i << '\t' << jdx << '\n';
    }
    std::cout << "wrote " << result.dataset.n() << " sequences, "
              << result.truth.true_pairs.size() << " true pairs\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"repertoire similarity graphs: sketching, fair clustering, "
                 "repertoire distances"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "full pipeline from a JSON config");
    std::string config_path;
    std::optional<unsigned> run_threads;
    std::optional<std::uint64_t> run_seed;
    run->add_option("--config", config_path, "pipeline config JSON")->required();
    run->add_option("--threads", run_threads, "worker thread override");
    run->add_option("--seed", run_seed, "seed override");

    // sketch
    auto* sk = app.add_subcommand("sketch", "sketch sequences into a cache file");
    std::string sk_input, sk_cache, sk_alphabet = "aa", sk_block_col;
    std::size_t sk_k = 4, sk_m = 128, sk_maxlen = 0;
    std::uint64_t sk_seed = 1;
    unsigned sk_threads = 1;
    sk->add_option("--input", sk_input, "input TSV")->required();
    sk->add_option("--sketch-cache", sk_cache, "output cache path")->required();
    sk->add_option("--alphabet", sk_alphabet, "aa or nt");
    sk->add_option("--max-len", sk_maxlen, "truncate sequences");
    sk->add_option("--kmer", sk_k, "shingle length");
    sk->add_option("--sketch-len", sk_m, "signature slots");
    sk->add_option("--block-col", sk_block_col, "metadata column for blocks");
    sk->add_option("--seed", sk_seed, "hash seed");
    sk->add_option("--threads", sk_threads, "worker threads");

    // cluster
    auto* cl = app.add_subcommand("cluster", "cluster an edge-list graph");
    std::string cl_graph, cl_out, cl_mode = "js";
    std::size_t cl_k = 2;
    double cl_lambda = 0.0, cl_tau = 0.2;
    std::uint64_t cl_seed = 1;
    cl->add_option("--graph", cl_graph, "edge-list TSV")->required();
    cl->add_option("--k", cl_k, "cluster count")->required();
    cl->add_option("--fair-mode", cl_mode, "js or wcd");
    cl->add_option("--lambda", cl_lambda, "equity coefficient");
    cl->add_option("--tau", cl_tau, "coverage target (wcd)");
    cl->add_option("--seed", cl_seed, "seed");
    cl->add_option("--out", cl_out, "output TSV (default stdout)");

    // tune
    auto* tu = app.add_subcommand("tune", "pipeline run with a tuner enabled");
    std::string tu_config, tu_mode = "bisect", tu_preset;
    double tu_delta = 0.1;
    tu->add_option("--config", tu_config, "pipeline config JSON")->required();
    tu->add_option("--tune", tu_mode, "bisect, grid or gd");
    tu->add_option("--delta-max", tu_delta, "disparity budget");
    tu->add_option("--preset", tu_preset, "viral or tumor fallback preset");

    // repdist
    auto* rd = app.add_subcommand("repdist", "distance between two graphs");
    std::string rd_a, rd_b, rd_mode = "js";
    std::size_t rd_k = 2;
    std::uint64_t rd_seed = 1;
    rd->add_option("--a", rd_a, "first edge-list graph")->required();
    rd->add_option("--b", rd_b, "second edge-list graph")->required();
    rd->add_option("--k", rd_k, "clusters for the js mode");
    rd->add_option("--mode", rd_mode, "js, ged or ged-approx");
    rd->add_option("--seed", rd_seed, "seed for the js mode");

    // synth
    auto* sy = app.add_subcommand("synth", "generate a synthetic repertoire");
    std::string sy_spec, sy_out;
    sy->add_option("--spec", sy_spec, "generator spec JSON")->required();
    sy->add_option("--out", sy_out, "output TSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed() || tu->parsed()) {
            auto cfg = pipeline::PipelineConfig::from_json_file(
                run->parsed() ? config_path : tu_config);
            if (run->parsed()) {
                if (run_threads) cfg.threads = *run_threads;
                if (run_seed) cfg.seed = *run_seed;
            } else {
                cfg.tune = tu_mode;
                cfg.delta_max = tu_delta;
                if (!tu_preset.empty()) cfg.preset = tu_preset;
            }
            const auto manifest = pipeline::run_pipeline(cfg);
            std::cout << manifest.to_json() << '\n';
            return 0;
        }
        if (sk->parsed()) {
            const auto data = load_dataset(sk_input, sk_alphabet, sk_maxlen);
            std::vector<std::string> seqs, blocks;
            for (const auto& rec : data.records) {
                seqs.push_back(rec.residues);
                std::string key;
                if (!sk_block_col.empty()) {
                    auto it = rec.metadata.find(sk_block_col);
                    if (it != rec.metadata.end()) key = it->second;
                }
                blocks.push_back(key);
            }
            const auto sketches = sketch::sketch_all(seqs, blocks, sk_k, sk_m,
                                                     sk_seed, sk_threads);
            sketch::write_sketch_cache(sk_cache, sketches,
                                       static_cast<std::uint32_t>(sk_k), sk_seed);
            std::cout << "cached " << sketches.size() << " sketches\n";
            return 0;
        }
        if (cl->parsed())
            return run_cluster(cl_graph, cl_k, cl_mode, cl_lambda, cl_tau, cl_seed,
                               cl_out);
        if (rd->parsed()) return run_repdist(rd_a, rd_b, rd_k, rd_mode, rd_seed);
        if (sy->parsed()) return run_synth(sy_spec, sy_out);
    } catch (const ParseError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

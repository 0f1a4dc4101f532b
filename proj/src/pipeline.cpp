#include "repgraph/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "repgraph/affinity.hpp"
#include "repgraph/error.hpp"

namespace repgraph::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json config_to_json(const PipelineConfig& c) {
    return json{{"input_path", c.input_path},
                {"alphabet", c.alphabet},
                {"max_len", c.max_len},
                {"shingle_len", c.shingle_len},
                {"minhash_m", c.minhash_m},
                {"bands", c.bands},
                {"block_column", c.block_column},
                {"gate_params_path", c.gate_params_path},
                {"cost_table_path", c.cost_table_path},
                {"rmt_mode", c.rmt_mode},
                {"default_tau", c.default_tau},
                {"k_clusters", c.k_clusters},
                {"fairness_mode", c.fairness_mode},
                {"coverage_tau", c.coverage_tau},
                {"lambda", c.lambda},
                {"preset", c.preset},
                {"tune", c.tune},
                {"delta_max", c.delta_max},
                {"seed", c.seed},
                {"threads", c.threads},
                {"outdir", c.outdir}};
}

json equity_to_json(const faircluster::EquityReport& e) {
    json cov = json::object();
    for (const auto& [name, v] : e.coverage) cov[name] = v;
    return json{{"r_prop", e.r_prop},
                {"d_eq", e.d_eq},
                {"js_disparity", e.js_disparity},
                {"coverage", cov},
                {"purity", e.purity}};
}

struct StageClock {
    std::map<std::string, double>& sink;
    std::vector<std::string>& order;
    std::string name;
    std::chrono::steady_clock::time_point start;

    StageClock(std::map<std::string, double>& s, std::vector<std::string>& o,
               std::string n)
        : sink(s), order(o), name(std::move(n)),
          start(std::chrono::steady_clock::now()) {
        order.push_back(name);
    }
    ~StageClock() {
        const auto dt = std::chrono::steady_clock::now() - start;
        sink[name] =
            std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(dt)
                .count();
    }
};

faircluster::Partition trivial_partition(std::size_t n,
                                         std::size_t groups) {
    faircluster::Partition p;
    p.k = 1;
    p.assignment.assign(n, 0);
    p.sizes.assign(1, n);
    p.contingency.assign(1, std::vector<std::size_t>(groups, 0));
    return p;
}

} // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what(), 0);
    }
    PipelineConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("input_path", c.input_path);
    get("alphabet", c.alphabet);
    get("max_len", c.max_len);
    get("shingle_len", c.shingle_len);
    get("minhash_m", c.minhash_m);
    get("bands", c.bands);
    get("block_column", c.block_column);
    get("gate_params_path", c.gate_params_path);
    get("cost_table_path", c.cost_table_path);
    get("rmt_mode", c.rmt_mode);
    get("default_tau", c.default_tau);
    get("k_clusters", c.k_clusters);
    get("fairness_mode", c.fairness_mode);
    get("coverage_tau", c.coverage_tau);
    get("lambda", c.lambda);
    get("preset", c.preset);
    get("tune", c.tune);
    get("delta_max", c.delta_max);
    get("seed", c.seed);
    get("threads", c.threads);
    get("outdir", c.outdir);
    return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void PipelineConfig::validate() const {
    if (input_path.empty() || !fs::exists(input_path))
        throw InvalidArgument("config: input_path missing or nonexistent: " +
                              input_path);
    if (alphabet != "amino" && alphabet != "nucleotide")
        throw InvalidArgument("config: alphabet must be amino or nucleotide");
    if (minhash_m == 0 || bands == 0 || minhash_m % bands != 0)
        throw InvalidArgument("config: bands must divide minhash_m");
    if (rmt_mode != "mp" && rmt_mode != "shuffle")
        throw InvalidArgument("config: rmt_mode must be mp or shuffle");
    if (fairness_mode != "js" && fairness_mode != "wcd")
        throw InvalidArgument("config: fairness_mode must be js or wcd");
    if (k_clusters == 0) throw InvalidArgument("config: k_clusters must be >= 1");
    if (!tune.empty() && tune != "bisect" && tune != "grid" && tune != "gd")
        throw InvalidArgument("config: tune must be bisect, grid or gd");
    if (!preset.empty() && preset != "viral" && preset != "tumor")
        throw InvalidArgument("config: preset must be viral or tumor");
    if (lambda < 0 && tune.empty() && preset.empty())
        throw InvalidArgument("config: set lambda, a tuner, or a preset");
    for (const std::string* p : {&gate_params_path, &cost_table_path})
        if (!p->empty() && !fs::exists(*p))
            throw InvalidArgument("config: referenced file missing: " + *p);
    if (outdir.empty()) throw InvalidArgument("config: outdir required");
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for checksum: " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::vector<std::string> emit_reports(const PipelineResult& result,
                                      const std::string& outdir) {
    fs::create_directories(outdir);
    std::vector<std::string> files;
    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(outdir) / name);
        if (!out) throw IoError("cannot write " + name + " in " + outdir);
        files.push_back(name);
        return out;
    };

    {
        auto out = open("clusters.tsv");
        out << "id\tcluster\tsubgroup\n";
        for (std::size_t i = 0; i < result.dataset.n(); ++i) {
            const auto& rec = result.dataset.records[i];
            out << rec.id << '\t' << result.partition.assignment[i] << '\t'
                << rec.subgroup.value_or("") << '\n';
        }
    }
    {
        auto out = open("graph.tsv");
        std::vector<std::string> labels;
        for (const auto& rec : result.dataset.records) labels.push_back(rec.id);
        graph::export_graph(result.graph, labels, graph::GraphFormat::EdgeList, out);
    }
    {
        auto out = open("equity.json");
        out << equity_to_json(result.equity).dump(2) << '\n';
    }
    {
        auto out = open("disparity_heatmap.tsv");
        out << "cluster";
        for (const auto& name : result.subgroups.names) out << '\t' << name;
        out << '\n';
        const double n = static_cast<double>(result.dataset.n());
        for (std::size_t i = 0; i < result.partition.k; ++i) {
            out << i;
            const double s = static_cast<double>(result.partition.sizes[i]) / n;
            for (std::size_t g = 0; g < result.subgroups.count(); ++g) {
                const double r =
                    static_cast<double>(result.partition.contingency[i][g]) /
                    static_cast<double>(result.subgroups.sizes[g]);
                out << '\t' << fmt_double(std::abs(r - s));
            }
            out << '\n';
        }
    }
    {
        auto out = open("layout2d.tsv");
        out << "id\tx\ty\n";
        for (std::size_t i = 0; i < result.layout2d.size(); ++i) {
            const auto& p = result.layout2d[i];
            out << result.dataset.records[i].id << '\t' << fmt_double(p[0]) << '\t'
                << fmt_double(p.size() > 1 ? p[1] : 0.0) << '\n';
        }
    }
    if (result.tuned) {
        auto out = open("tuner_trace.json");
        json evals = json::array();
        for (const auto& [l, d] : result.tune_trace.evaluations)
            evals.push_back(json{{"lambda", l}, {"disparity", d}});
        out << json{{"evaluations", evals},
                    {"chosen", result.tune_trace.chosen},
                    {"feasible", result.tune_trace.feasible}}
                   .dump(2)
            << '\n';
    }
    return files;
}

std::string RunManifest::to_json() const {
    json tim = json::object();
    for (const auto& [k, v] : timings_ms) tim[k] = v;
    json sums = json::object();
    for (const auto& [k, v] : checksums) sums[k] = v;
    return json{{"config", json::parse(config_echo)},
                {"version", version},
                {"stages", stages},
                {"timings_ms", tim},
                {"candidate_count", candidate_count},
                {"edge_count", edge_count},
                {"chosen_lambda", chosen_lambda},
                {"equity", equity_to_json(equity)},
                {"checksums", sums}}
        .dump(2);
}

RunManifest run_pipeline(const PipelineConfig& config) {
    config.validate();

    RunManifest manifest;
    manifest.version = kVersion;
    manifest.config_echo = config_to_json(config).dump();

    PipelineResult result;
    const std::string alphabet = config.alphabet == "amino"
                                     ? ingest::amino_alphabet()
                                     : ingest::nucleotide_alphabet();
    {
        StageClock clock(manifest.timings_ms, manifest.stages, "ingest");
        std::ifstream in(config.input_path);
        if (!in) throw IoError("cannot open input: " + config.input_path);
        result.dataset =
            ingest::parse_repertoire(in, {}, alphabet, config.max_len);
    }

    std::vector<sketch::Sketch> sketches;
    {
        StageClock clock(manifest.timings_ms, manifest.stages, "sketch");
        std::vector<std::string> seqs, blocks;
        for (const auto& rec : result.dataset.records) {
            seqs.push_back(rec.residues);
            std::string key;
            if (!config.block_column.empty()) {
                auto it = rec.metadata.find(config.block_column);
                if (it != rec.metadata.end()) key = it->second;
            }
            blocks.push_back(key);
        }
        sketches = sketch::sketch_all(seqs, blocks, config.shingle_len,
                                      config.minhash_m, config.seed,
                                      config.threads);
    }

    {
        StageClock clock(manifest.timings_ms, manifest.stages, "candidates");
        sketch::LshIndex index(sketches, config.bands,
                               config.minhash_m / config.bands);
        result.candidates = index.query_candidates();
        manifest.candidate_count = result.candidates.count();
    }

    std::vector<affinity::AffinityChannelSet> affinities;
    {
        StageClock clock(manifest.timings_ms, manifest.stages, "affinity");
        affinity::GateParams gate = affinity::GateParams::zero_default();
        if (!config.gate_params_path.empty()) {
            std::ifstream in(config.gate_params_path);
            gate = affinity::GateParams::load(in);
        }
        affinity::CostScheme costs;
        if (!config.cost_table_path.empty()) {
            std::ifstream in(config.cost_table_path);
            costs.sub_table = affinity::parse_cost_table(in);
        }
        affinity::AffinityConfig acfg;
        acfg.threads = config.threads;
        affinities = affinity::compute_affinity_channels(
            result.dataset, result.candidates, gate, costs, acfg);
    }

    graph::SimilarityMatrix matrix;
    {
        StageClock clock(manifest.timings_ms, manifest.stages, "matrix");
        matrix = graph::assemble_similarity(result.dataset.n(), affinities);
    }

    {
        StageClock clock(manifest.timings_ms, manifest.stages, "threshold");
        graph::RmtOptions opts;
        opts.seed = config.seed;
        opts.default_tau = config.default_tau;
        const auto mode = config.rmt_mode == "mp" ? graph::RmtMode::Mp
                                                  : graph::RmtMode::Shuffle;
        result.spectrum = graph::rmt_bulk_cutoff(matrix, mode, opts);
        result.graph =
            graph::threshold_to_graph(matrix, result.spectrum.weight_threshold);
        manifest.edge_count = result.graph.edges.size();
    }

    result.subgroups = faircluster::Subgroups::from_table(
        result.dataset.n(), result.dataset.subgroup_table);
    faircluster::FairnessConfig fcfg;
    fcfg.mode = config.fairness_mode == "js" ? faircluster::FairMode::Js
                                             : faircluster::FairMode::Wcd;
    fcfg.tau = config.coverage_tau;

    const bool have_edges = !result.graph.edges.empty();
    faircluster::Points points;
    if (have_edges)
        points = faircluster::spectral_embedding(result.graph, config.k_clusters);

    double lambda = config.lambda;
    if (lambda < 0 && !config.preset.empty() && config.tune.empty())
        lambda = tuner::lambda_preset(config.preset);
    if (!config.tune.empty() && have_edges) {
        StageClock clock(manifest.timings_ms, manifest.stages, "tune");
        auto measure = [&](double l) {
            faircluster::FairnessConfig probe = fcfg;
            probe.lambda = l;
            const auto part =
                faircluster::fair_partition(points, config.k_clusters, probe,
                                            result.subgroups, config.seed, 100,
                                            config.threads);
            return faircluster::equity_report(part, result.subgroups).d_eq;
        };
        if (config.tune == "bisect") {
            result.tune_trace = tuner::tune_bisect(measure, config.delta_max);
        } else if (config.tune == "grid") {
            std::vector<double> grid;
            for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
            result.tune_trace =
                tuner::tune_grid(measure, grid, config.delta_max, true);
        } else {
            result.tune_trace =
                tuner::tune_gd(measure, 0.5, 0.5, 1.0, 20, 1e-3);
        }
        result.tuned = true;
        lambda = result.tune_trace.chosen;
    }
    if (lambda < 0) lambda = 0.0;
    fcfg.lambda = lambda;
    result.chosen_lambda = lambda;
    manifest.chosen_lambda = lambda;

    {
        StageClock clock(manifest.timings_ms, manifest.stages, "cluster");
        if (have_edges)
            result.partition = faircluster::fair_partition(
                points, config.k_clusters, fcfg, result.subgroups, config.seed,
                100, config.threads);
        else
            result.partition =
                trivial_partition(result.dataset.n(), result.subgroups.count());
        if (!result.partition.contingency.empty() &&
            result.subgroups.count() > 0 && !have_edges) {
            for (std::size_t i = 0; i < result.dataset.n(); ++i)
                if (result.subgroups.membership[i] >= 0)
                    ++result.partition.contingency[0][result.subgroups.membership[i]];
        }
    }

    {
        StageClock clock(manifest.timings_ms, manifest.stages, "equity");
        result.equity = faircluster::equity_report(result.partition,
                                                   result.subgroups);
        manifest.equity = result.equity;
    }

    {
        StageClock clock(manifest.timings_ms, manifest.stages, "export");
        if (have_edges)
            result.layout2d = faircluster::spectral_embedding(result.graph, 2, false);
        const auto files = emit_reports(result, config.outdir);
        for (const auto& name : files)
            manifest.checksums[name] =
                sha256_file((fs::path(config.outdir) / name).string());
        std::ofstream mout(fs::path(config.outdir) / "manifest.json");
        if (!mout) throw IoError("cannot write manifest.json in " + config.outdir);
        mout << manifest.to_json() << '\n';
    }
    return manifest;
}

} // namespace repgraph::pipeline

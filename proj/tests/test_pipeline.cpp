#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "repgraph/error.hpp"
#include "repgraph/ingest.hpp"
#include "repgraph/pipeline.hpp"
#include "repgraph/synthgen.hpp"

using namespace repgraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "repgraph_pipeline_tests";
    fs::create_directories(dir);
    return dir;
}

// 50-sequence structured input shared by the pipeline cases.
std::string write_synthetic_input(const std::string& name) {
    synthgen::SynthSpec spec;
    spec.n = 50;
    spec.blocks = 2;
    spec.mutation_rate = 0.03;
    spec.subgroup_fractions = {{"common", 0.9}, {"rare", 0.1}};
    spec.seed = 101;
    const auto data = synthgen::generate(spec);
    const auto path = (scratch_dir() / name).string();
    std::ofstream out(path);
    ingest::serialize_repertoire(data.dataset, out);
    return path;
}

} // namespace

TEST_CASE("config parsing and validation") {
    SUBCASE("defaults mirror the sweep midpoints") {
        const auto cfg = pipeline::PipelineConfig::from_json_text("{}");
        CHECK(cfg.minhash_m == 128);
        CHECK(cfg.default_tau == 0.7);
        CHECK(cfg.bands == 32);
        CHECK(cfg.shingle_len == 4);
    }
    SUBCASE("missing input path fails validation before any work") {
        auto cfg = pipeline::PipelineConfig::from_json_text(
            "{\"input_path\": \"/nonexistent/x.tsv\", \"lambda\": 0.1}");
        CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
        CHECK_THROWS_AS(pipeline::run_pipeline(cfg), InvalidArgument);
    }
    SUBCASE("malformed json is a parse error") {
        CHECK_THROWS_AS(pipeline::PipelineConfig::from_json_text("{oops"),
                        ParseError);
    }
    SUBCASE("field validation") {
        const auto input = write_synthetic_input("valid.tsv");
        auto cfg = pipeline::PipelineConfig::from_json_text(
            "{\"input_path\": \"" + input + "\", \"lambda\": 0.1}");
        CHECK_NOTHROW(cfg.validate());
        auto bad = cfg;
        bad.rmt_mode = "other";
        CHECK_THROWS_AS(bad.validate(), InvalidArgument);
        bad = cfg;
        bad.bands = 33;
        CHECK_THROWS_AS(bad.validate(), InvalidArgument);
        bad = cfg;
        bad.lambda = -1; // and no tuner or preset either
        CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    }
}

TEST_CASE("sha-256 matches the published test vector") {
    const auto path = (scratch_dir() / "abc.bin").string();
    std::ofstream(path, std::ios::binary) << "abc";
    CHECK(pipeline::sha256_file(path) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("full pipeline run emits every artifact") {
    pipeline::PipelineConfig cfg;
    cfg.input_path = write_synthetic_input("run.tsv");
    cfg.k_clusters = 2;
    cfg.lambda = 0.1;
    cfg.seed = 5;
    cfg.outdir = (scratch_dir() / "run_out").string();
    const auto manifest = pipeline::run_pipeline(cfg);

    for (const char* f : {"clusters.tsv", "graph.tsv", "equity.json",
                          "disparity_heatmap.tsv", "layout2d.tsv"}) {
        CHECK(fs::exists(fs::path(cfg.outdir) / f));
        CHECK(manifest.checksums.count(f) == 1);
        CHECK(manifest.checksums.at(f) ==
              pipeline::sha256_file((fs::path(cfg.outdir) / f).string()));
    }
    CHECK(fs::exists(fs::path(cfg.outdir) / "manifest.json"));
    CHECK(manifest.candidate_count > 0);
    CHECK(manifest.edge_count > 0);
    CHECK(manifest.chosen_lambda == 0.1);

    SUBCASE("stage order is canonical") {
        const std::vector<std::string> expect = {
            "ingest", "sketch",    "candidates", "affinity",
            "matrix", "threshold", "cluster",    "equity",
            "export"};
        CHECK(manifest.stages == expect);
    }
    SUBCASE("heatmap is a k x groups matrix") {
        std::ifstream in(fs::path(cfg.outdir) / "disparity_heatmap.tsv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "cluster\tcommon\trare");
        std::size_t rows = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 2);
    }
}

TEST_CASE("reruns and thread counts leave outputs byte-identical") {
    pipeline::PipelineConfig cfg;
    cfg.input_path = write_synthetic_input("deterministic.tsv");
    cfg.k_clusters = 2;
    cfg.lambda = 0.2;
    cfg.seed = 9;
    cfg.outdir = (scratch_dir() / "det_a").string();
    const auto a = pipeline::run_pipeline(cfg);
    cfg.outdir = (scratch_dir() / "det_b").string();
    cfg.threads = 8;
    const auto b = pipeline::run_pipeline(cfg);
    CHECK(a.checksums == b.checksums); // timings aside, same bytes everywhere
    CHECK(a.candidate_count == b.candidate_count);
    CHECK(a.edge_count == b.edge_count);
}

TEST_CASE("preset supplies the equity coefficient") {
    pipeline::PipelineConfig cfg;
    cfg.input_path = write_synthetic_input("preset.tsv");
    cfg.k_clusters = 2;
    cfg.preset = "viral";
    cfg.seed = 5;
    cfg.outdir = (scratch_dir() / "preset_out").string();
    CHECK(pipeline::run_pipeline(cfg).chosen_lambda == 0.5);
    cfg.preset = "tumor";
    cfg.outdir = (scratch_dir() / "preset_out2").string();
    CHECK(pipeline::run_pipeline(cfg).chosen_lambda == 0.6);
}

TEST_CASE("tuned run records its trace") {
    pipeline::PipelineConfig cfg;
    cfg.input_path = write_synthetic_input("tuned.tsv");
    cfg.k_clusters = 2;
    cfg.tune = "bisect";
    cfg.delta_max = 0.2;
    cfg.seed = 5;
    cfg.outdir = (scratch_dir() / "tuned_out").string();
    const auto manifest = pipeline::run_pipeline(cfg);
    CHECK(fs::exists(fs::path(cfg.outdir) / "tuner_trace.json"));
    CHECK(manifest.checksums.count("tuner_trace.json") == 1);
    CHECK(std::find(manifest.stages.begin(), manifest.stages.end(), "tune") !=
          manifest.stages.end());
}

TEST_CASE("edgeless input degrades gracefully") {
    // Unrelated random sequences: LSH yields no candidates, so the graph is
    // empty and the 2D layout holds only its header.
    const auto path = (scratch_dir() / "edgeless.tsv").string();
    {
        std::ofstream out(path);
        out << "id\tcdr3\n";
        const char* seqs[] = {"ACDEFGHIKLMNPQ", "WYVTSRQPNMLKIH", "GGGGSSSSTTTTAA",
                              "MKLVFFAEDVGSNK", "HHEEGGLLPPRRSS", "NQWERTYIPASDFG"};
        for (std::size_t i = 0; i < 6; ++i)
            out << "s" << i << '\t' << seqs[i] << '\n';
    }
    pipeline::PipelineConfig cfg;
    cfg.input_path = path;
    cfg.k_clusters = 2;
    cfg.lambda = 0.0;
    cfg.outdir = (scratch_dir() / "edgeless_out").string();
    const auto manifest = pipeline::run_pipeline(cfg);
    CHECK(manifest.edge_count == 0);
    std::ifstream layout(fs::path(cfg.outdir) / "layout2d.tsv");
    std::stringstream buf;
    buf << layout.rdbuf();
    CHECK(buf.str() == "id\tx\ty\n");
}

#include "repgraph/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>

#include "repgraph/error.hpp"
#include "repgraph/util.hpp"

namespace repgraph::affinity {

double CostScheme::SubTable::lookup(char a, char b) const {
    const auto ia = labels.find(a);
    const auto ib = labels.find(b);
    if (ia == std::string::npos || ib == std::string::npos)
        throw InvalidArgument(std::string("substitution table has no entry for '") +
                              a + "'/'" + b + "'");
    return costs[ia][ib];
}

double CostScheme::max_single_cost() const {
    double c = std::max({insertion, deletion, substitution});
    if (sub_table)
        for (const auto& row : sub_table->costs)
            for (double v : row) c = std::max(c, v);
    return c;
}

CostScheme::SubTable parse_cost_table(std::istream& in) {
    CostScheme::SubTable t;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty cost table");
    {
        std::istringstream hs(line);
        std::string tok;
        while (hs >> tok) {
            if (tok.size() != 1) throw Error("cost table labels must be single characters");
            t.labels += tok[0];
        }
    }
    const std::size_t n = t.labels.size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream rs(line);
        std::string row_label;
        rs >> row_label;
        std::vector<double> row;
        double v;
        while (rs >> v) row.push_back(v);
        if (row.size() != n) throw Error("cost table row width mismatch");
        t.costs.push_back(std::move(row));
    }
    if (t.costs.size() != n) throw Error("cost table row count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (t.costs[i][i] != 0.0) throw Error("cost table diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            if (t.costs[i][j] < 0) throw Error("cost table entries must be >= 0");
            if (t.costs[i][j] != t.costs[j][i]) throw Error("cost table must be symmetric");
        }
    }
    return t;
}

double edit_distance(std::string_view a, std::string_view b, const CostScheme& costs) {
    const std::size_t la = a.size();
    const std::size_t lb = b.size();
    std::vector<double> prev(lb + 1), curr(lb + 1);
    for (std::size_t y = 0; y <= lb; ++y) prev[y] = static_cast<double>(y) * costs.insertion;
    for (std::size_t x = 1; x <= la; ++x) {
        curr[0] = static_cast<double>(x) * costs.deletion;
        for (std::size_t y = 1; y <= lb; ++y) {
            double sub = 0.0;
            if (a[x - 1] != b[y - 1])
                sub = costs.sub_table ? costs.sub_table->lookup(a[x - 1], b[y - 1])
                                      : costs.substitution;
            curr[y] = std::min({prev[y] + costs.deletion,
                                curr[y - 1] + costs.insertion,
                                prev[y - 1] + sub});
        }
        std::swap(prev, curr);
    }
    return prev[lb];
}

double alignment_affinity(std::string_view a, std::string_view b, const CostScheme& costs) {
    const std::size_t len = std::max(a.size(), b.size());
    if (len == 0) return 1.0;
    const double d = edit_distance(a, b, costs);
    const double aff = 1.0 - d / (static_cast<double>(len) * costs.max_single_cost());
    return std::clamp(aff, 0.0, 1.0);
}

namespace {

struct ResidueProps {
    double hydropathy;
    double charge;
    double volume;
};

// Kyte-Doolittle hydropathy; unit charges with partial His; side-chain
// volumes in cubic angstroms.
ResidueProps residue_props(char r) {
    switch (r) {
        case 'A': return {1.8, 0.0, 88.6};
        case 'R': return {-4.5, 1.0, 173.4};
        case 'N': return {-3.5, 0.0, 114.1};
        case 'D': return {-3.5, -1.0, 111.1};
        case 'C': return {2.5, 0.0, 108.5};
        case 'Q': return {-3.5, 0.0, 143.8};
        case 'E': return {-3.5, -1.0, 138.4};
        case 'G': return {-0.4, 0.0, 60.1};
        case 'H': return {-3.2, 0.1, 153.2};
        case 'I': return {4.5, 0.0, 166.7};
        case 'L': return {3.8, 0.0, 166.7};
        case 'K': return {-3.9, 1.0, 168.6};
        case 'M': return {1.9, 0.0, 162.9};
        case 'F': return {2.8, 0.0, 189.9};
        case 'P': return {-1.6, 0.0, 112.7};
        case 'S': return {-0.8, 0.0, 89.0};
        case 'T': return {-0.7, 0.0, 116.1};
        case 'W': return {-0.9, 0.0, 227.8};
        case 'Y': return {-1.3, 0.0, 193.6};
        case 'V': return {4.2, 0.0, 140.0};
        default: return {0.0, 0.0, 0.0}; // wildcard / nucleotide mode
    }
}

} // namespace

EmbeddingVector embed_sequence(const ingest::SequenceRecord& record,
                               const EmbeddingConfig& config) {
    EmbeddingVector out;
    out.values.assign(config.kmer_dims + 3, 0.0);

    const auto kmers = sketch::shingle(record.residues, config.kmer_len);
    for (const auto& kmer : kmers)
        out.values[util::hash_string(kmer) % config.kmer_dims] += 1.0;
    for (std::size_t i = 0; i < config.kmer_dims; ++i)
        out.values[i] /= static_cast<double>(kmers.size());

    double hyd = 0, chg = 0, vol = 0;
    for (char r : record.residues) {
        const auto p = residue_props(r);
        hyd += p.hydropathy;
        chg += p.charge;
        vol += p.volume;
    }
    const double n = static_cast<double>(record.residues.size());
    out.values[config.kmer_dims] = hyd / n;
    out.values[config.kmer_dims + 1] = chg / n;
    out.values[config.kmer_dims + 2] = vol / n * 0.01; // keep magnitudes comparable
    return out;
}

double embedding_affinity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw InvalidArgument("embedding_affinity: dimension mismatch");
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) return 0.5;
    const double cosine = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp((cosine + 1.0) / 2.0, 0.0, 1.0);
}

GateParams GateParams::zero_default() {
    GateParams p;
    p.w1.assign(p.hidden, std::vector<double>(kScorerInputs, 0.0));
    p.b1.assign(p.hidden, 0.0);
    p.w2.assign(p.hidden, 0.0);
    p.w_meta.assign(kScorerInputs, 0.0);
    return p;
}

namespace {

std::vector<std::vector<double>> parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream ss(text);
    std::string row_text;
    while (std::getline(ss, row_text, ';')) {
        std::istringstream rs(row_text);
        std::vector<double> row;
        double v;
        while (rs >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

GateParams GateParams::load(std::istream& in) {
    GateParams p = zero_default();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("gate params: expected key=value");
        const std::string key = line.substr(0, eq);
        const auto mat = parse_matrix(line.substr(eq + 1));
        if (mat.empty()) throw Error("gate params: empty value for " + key);
        if (key == "W1") {
            p.w1 = mat;
            p.hidden = mat.size();
        } else if (key == "b1") {
            p.b1 = mat[0];
        } else if (key == "W2") {
            p.w2 = mat[0];
        } else if (key == "b2") {
            p.b2 = mat[0][0];
        } else if (key == "Wmeta") {
            p.w_meta = mat[0];
        } else if (key == "bmeta") {
            p.b_meta = mat[0][0];
        } else if (key == "gamma") {
            p.gamma = mat[0][0];
        } else if (key == "beta") {
            p.beta = mat[0][0];
        } else if (key == "eps") {
            p.eps = mat[0][0];
        } else {
            throw Error("gate params: unknown key " + key);
        }
    }
    if (p.eps <= 0) throw Error("gate params: eps must be > 0");
    if (p.b1.size() != p.hidden || p.w2.size() != p.hidden)
        throw Error("gate params: inconsistent hidden width");
    for (const auto& row : p.w1)
        if (row.size() != kScorerInputs)
            throw Error("gate params: W1 must have 4 columns");
    if (p.w_meta.size() != kScorerInputs)
        throw Error("gate params: Wmeta must have 4 entries");
    return p;
}

double channel_importance(const std::vector<double>& features, const GateParams& params) {
    if (features.size() != params.w_meta.size())
        throw InvalidArgument("channel_importance: feature shape mismatch");
    double z = params.b_meta;
    for (std::size_t i = 0; i < features.size(); ++i)
        z += params.w_meta[i] * features[i];
    return 1.0 / (1.0 + std::exp(-z));
}

double gate_score(const std::vector<double>& features, const GateParams& params) {
    if (features.size() != GateParams::kScorerInputs)
        throw InvalidArgument("gate_score: feature shape mismatch");
    double out = params.b2;
    for (std::size_t h = 0; h < params.hidden; ++h) {
        double z = params.b1[h];
        for (std::size_t i = 0; i < features.size(); ++i)
            z += params.w1[h][i] * features[i];
        out += params.w2[h] * std::max(0.0, z);
    }
    return out;
}

namespace {

std::vector<double> softmax(const std::vector<double>& scores) {
    const double peak = *std::max_element(scores.begin(), scores.end());
    std::vector<double> w(scores.size());
    double total = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        w[i] = std::exp(scores[i] - peak);
        total += w[i];
    }
    for (auto& v : w) v /= total;
    return w;
}

} // namespace

AffinityChannelSet gate_and_fuse(const std::vector<double>& channels,
                                 const std::vector<double>& gate_scores) {
    if (channels.empty() || channels.size() != gate_scores.size())
        throw InvalidArgument("gate_and_fuse: need M >= 1 channels with matching scores");
    AffinityChannelSet set;
    set.channels = channels;
    set.gate_scores = gate_scores;
    set.weights = softmax(gate_scores);
    set.fused = std::inner_product(set.weights.begin(), set.weights.end(),
                                   channels.begin(), 0.0);
    return set;
}

std::vector<double> layer_norm_fuse(const std::vector<std::vector<double>>& features,
                                    const std::vector<double>& alphas,
                                    const GateParams& params) {
    if (features.empty() || features.size() != alphas.size())
        throw InvalidArgument("layer_norm_fuse: channel/alpha count mismatch");
    if (params.eps <= 0) throw InvalidArgument("layer_norm_fuse: eps must be > 0");
    const std::size_t d = features.front().size();
    std::vector<double> fused(d, 0.0);
    for (std::size_t m = 0; m < features.size(); ++m) {
        const auto& f = features[m];
        if (f.size() != d)
            throw InvalidArgument("layer_norm_fuse: feature dimension mismatch");
        double mu = 0;
        for (double v : f) mu += v;
        mu /= static_cast<double>(d);
        double var = 0;
        for (double v : f) var += (v - mu) * (v - mu);
        var /= static_cast<double>(d);
        const double denom = std::sqrt(var + params.eps);
        for (std::size_t i = 0; i < d; ++i)
            fused[i] += alphas[m] * (params.gamma * (f[i] - mu) / denom + params.beta);
    }
    return fused;
}

TilePlan tile_plan(std::size_t n, std::size_t m_rows, std::size_t block_x,
                   std::size_t block_y) {
    if (n == 0 || m_rows == 0 || block_x == 0 || block_y == 0)
        throw InvalidArgument("tile_plan: all dimensions must be positive");
    TilePlan plan;
    plan.block_x = block_x;
    plan.block_y = block_y;
    plan.grid_x = (n + block_x - 1) / block_x;
    plan.grid_y = (m_rows + block_y - 1) / block_y;
    return plan;
}

std::vector<AffinityChannelSet> compute_affinity_channels(
    const ingest::RepertoireDataset& dataset, const sketch::CandidateSet& candidates,
    const GateParams& params, const CostScheme& costs, const AffinityConfig& config) {
    const std::size_t n = dataset.n();
    for (const auto& [i, j] : candidates.pairs)
        if (i >= n || j >= n)
            throw InvalidArgument("compute_affinity_channels: pair index out of range");

    // Embed only records that appear in a candidate pair.
    std::vector<std::uint8_t> needed(n, 0);
    for (const auto& [i, j] : candidates.pairs) needed[i] = needed[j] = 1;
    std::vector<EmbeddingVector> embeds(n);
    util::parallel_for(n, config.threads, [&](std::size_t i) {
        if (needed[i]) embeds[i] = embed_sequence(dataset.records[i], config.embedding);
    });

    const double len_max = static_cast<double>(std::max<std::size_t>(1, config.len_max));
    std::vector<AffinityChannelSet> out(candidates.pairs.size());

    // Pair workload split into tiles; each slot written by exactly one worker.
    const std::size_t tile = std::max<std::size_t>(1, config.tile);
    const std::size_t tiles = (candidates.pairs.size() + tile - 1) / tile;
    util::parallel_for(tiles, config.threads, [&](std::size_t t) {
        const std::size_t lo = t * tile;
        const std::size_t hi = std::min(candidates.pairs.size(), lo + tile);
        for (std::size_t p = lo; p < hi; ++p) {
            const auto [i, j] = candidates.pairs[p];
            const auto& ri = dataset.records[i];
            const auto& rj = dataset.records[j];
            const double a_align = alignment_affinity(ri.residues, rj.residues, costs);
            const double a_embed = embedding_affinity(embeds[i], embeds[j]);
            const std::vector<double> channels{a_align, a_embed};

            const double len_gap =
                std::abs(static_cast<double>(ri.residues.size()) -
                         static_cast<double>(rj.residues.size())) /
                len_max;
            const double lo_ch = std::min(a_align, a_embed);
            const double hi_ch = std::max(a_align, a_embed);
            std::vector<double> scores(channels.size());
            std::vector<double> alphas(channels.size());
            for (std::size_t m = 0; m < channels.size(); ++m) {
                const std::vector<double> feats{channels[m], len_gap, lo_ch, hi_ch};
                scores[m] = gate_score(feats, params);
                if (params.compose_gates)
                    alphas[m] = channel_importance(feats, params);
            }
            auto set = gate_and_fuse(channels, scores);
            if (params.compose_gates) {
                double total = 0;
                for (std::size_t m = 0; m < set.weights.size(); ++m) {
                    set.weights[m] *= alphas[m];
                    total += set.weights[m];
                }
                if (total > 0)
                    for (auto& w : set.weights) w /= total;
                set.fused = std::inner_product(set.weights.begin(), set.weights.end(),
                                               set.channels.begin(), 0.0);
            }
            set.pair = {i, j};
            out[p] = std::move(set);
        }
    });
    return out;
}

} // namespace repgraph::affinity

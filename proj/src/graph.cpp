#include "repgraph/graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "repgraph/error.hpp"
#include "repgraph/util.hpp"

namespace repgraph::graph {

double SimilarityMatrix::get(std::uint32_t i, std::uint32_t j) const {
    if (i == j) return 1.0;
    const auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
    const auto it = entries.find(key);
    return it == entries.end() ? 0.0 : it->second;
}

void WeightedGraph::build_adjacency() {
    adjacency_offsets.assign(n + 1, 0);
    for (const auto& e : edges) {
        ++adjacency_offsets[e.i + 1];
        ++adjacency_offsets[e.j + 1];
    }
    for (std::size_t v = 0; v < n; ++v)
        adjacency_offsets[v + 1] += adjacency_offsets[v];
    adjacency.assign(adjacency_offsets.back(), 0);
    adjacency_weights.assign(adjacency_offsets.back(), 0.0);
    std::vector<std::size_t> cursor(adjacency_offsets.begin(),
                                    adjacency_offsets.end() - 1);
    for (const auto& e : edges) {
        adjacency[cursor[e.i]] = e.j;
        adjacency_weights[cursor[e.i]++] = e.w;
        adjacency[cursor[e.j]] = e.i;
        adjacency_weights[cursor[e.j]++] = e.w;
    }
}

std::size_t WeightedGraph::degree(std::uint32_t v) const {
    return adjacency_offsets[v + 1] - adjacency_offsets[v];
}

SimilarityMatrix assemble_similarity(
    std::size_t n, const std::vector<affinity::AffinityChannelSet>& affinities) {
    SimilarityMatrix mat;
    mat.n = n;
    for (const auto& a : affinities) {
        auto [i, j] = a.pair;
        if (i >= n || j >= n)
            throw InvalidArgument("assemble_similarity: pair index out of range");
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        auto [it, inserted] = mat.entries.try_emplace({i, j}, a.fused);
        if (!inserted) it->second = std::max(it->second, a.fused);
    }
    return mat;
}

namespace {

using EntryList = std::vector<std::pair<std::pair<std::uint32_t, std::uint32_t>, double>>;

Eigen::MatrixXd to_dense(const EntryList& entries, std::size_t n, double scale) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [ij, w] : entries) {
        m(ij.first, ij.second) = w * scale;
        m(ij.second, ij.first) = w * scale;
    }
    return m;
}

// Descending eigenvalues of the symmetric zero-diagonal matrix.
std::vector<double> dense_spectrum(const EntryList& entries, std::size_t n, double scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_dense(entries, n, scale),
                                                          Eigen::EigenvaluesOnly);
    std::vector<double> eig(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + n);
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

double top_eigenvalue(const EntryList& entries, std::size_t n, double scale,
                      std::size_t dense_limit, std::uint64_t seed) {
    if (entries.empty()) return 0.0;
    if (n <= dense_limit) return dense_spectrum(entries, n, scale).front();
    EntryList scaled = entries;
    for (auto& [ij, w] : scaled) w *= scale;
    return lanczos_top_eigenvalues(scaled, n, 1, seed).front();
}

} // namespace

std::vector<double> lanczos_top_eigenvalues(const EntryList& entries, std::size_t n,
                                            std::size_t k, std::uint64_t seed) {
    const std::size_t steps = std::min(n, std::max<std::size_t>(2 * k + 10, 30));
    auto apply = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (const auto& [ij, w] : entries) {
            y[ij.first] += w * x[ij.second];
            y[ij.second] += w * x[ij.first];
        }
        return y;
    };

    util::SplitRng rng(seed, 0xfeed);
    Eigen::VectorXd v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.next_double() - 0.5;
    v.normalize();

    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alpha, beta;
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
    double b = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        basis.push_back(v);
        Eigen::VectorXd w = apply(v) - b * prev;
        const double a = w.dot(v);
        alpha.push_back(a);
        w -= a * v;
        // Full reorthogonalization keeps the small factorization stable.
        for (const auto& q : basis) w -= q.dot(w) * q;
        b = w.norm();
        if (b < 1e-12) break;
        beta.push_back(b);
        prev = v;
        v = w / b;
    }

    const std::size_t m = alpha.size();
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        tri(i, i) = alpha[i];
        if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tri, Eigen::EigenvaluesOnly);
    std::vector<double> ritz(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + m);
    std::sort(ritz.begin(), ritz.end(), std::greater<>());
    ritz.resize(std::min(k, ritz.size()));
    return ritz;
}

double top_eigenvalue_dense(const SimilarityMatrix& matrix, bool scaled) {
    EntryList entries(matrix.entries.begin(), matrix.entries.end());
    if (entries.empty()) return 0.0;
    double scale = 1.0;
    if (scaled) {
        double ss = 0;
        for (const auto& [ij, w] : entries) ss += w * w;
        const double rms = std::sqrt(ss / static_cast<double>(entries.size()));
        scale = rms > 0 ? 1.0 / (rms * std::sqrt(static_cast<double>(matrix.n))) : 1.0;
    }
    return dense_spectrum(entries, matrix.n, scale).front();
}

namespace {

SpectrumReport degenerate_report(const SimilarityMatrix& matrix, double default_tau) {
    SpectrumReport rep;
    rep.eigenvalues.assign(std::min<std::size_t>(matrix.n, 8), 0.0);
    rep.bulk_edge = 1.0;
    rep.aspect_ratio = 0.0;
    rep.weight_threshold = default_tau;
    rep.above_bulk = 0;
    return rep;
}

std::vector<double> sorted_weights_desc(const SimilarityMatrix& matrix) {
    std::vector<double> w;
    w.reserve(matrix.entries.size());
    for (const auto& [ij, v] : matrix.entries) w.push_back(v);
    std::sort(w.begin(), w.end(), std::greater<>());
    return w;
}

SpectrumReport rmt_mp(const SimilarityMatrix& matrix, const RmtOptions& opt) {
    EntryList entries(matrix.entries.begin(), matrix.entries.end());
    const std::size_t n = matrix.n;

    double ss = 0;
    for (const auto& [ij, w] : entries) ss += w * w;
    const double rms = std::sqrt(ss / static_cast<double>(entries.size()));
    if (rms <= 0) return degenerate_report(matrix, opt.default_tau);
    const double scale = 1.0 / (rms * std::sqrt(static_cast<double>(n)));

    // Aspect-ratio surrogate: n_eff is the average stored row degree, so a
    // dense matrix reduces to the classical q ~ 1 edge of 4.
    const double n_eff = 2.0 * static_cast<double>(entries.size()) /
                         static_cast<double>(n);
    const double q = n_eff / static_cast<double>(n);
    const double lambda_plus = (1.0 + std::sqrt(q)) * (1.0 + std::sqrt(q));

    SpectrumReport rep;
    rep.aspect_ratio = q;
    rep.bulk_edge = lambda_plus;
    if (n <= opt.dense_limit) {
        rep.eigenvalues = dense_spectrum(entries, n, scale);
    } else {
        EntryList scaled = entries;
        for (auto& [ij, w] : scaled) w *= scale;
        std::size_t k = 8;
        while (true) {
            rep.eigenvalues = lanczos_top_eigenvalues(scaled, n, k, opt.seed);
            if (rep.eigenvalues.size() < k || rep.eigenvalues.back() <= lambda_plus ||
                k >= 64)
                break;
            k *= 2;
        }
    }
    for (double e : rep.eigenvalues)
        if (e > lambda_plus) ++rep.above_bulk;

    if (rep.above_bulk == 0) {
        rep.weight_threshold = opt.default_tau;
        return rep;
    }
    // The spectral mass above the bulk sets the keep quantile on weights.
    const auto weights = sorted_weights_desc(matrix);
    const double frac = static_cast<double>(rep.above_bulk) / static_cast<double>(n);
    std::size_t keep = static_cast<std::size_t>(
        std::llround(frac * static_cast<double>(weights.size())));
    keep = std::clamp<std::size_t>(keep, 1, weights.size());
    rep.weight_threshold = weights[keep - 1];
    return rep;
}

SpectrumReport rmt_shuffle(const SimilarityMatrix& matrix, const RmtOptions& opt) {
    EntryList entries(matrix.entries.begin(), matrix.entries.end());
    const std::size_t n = matrix.n;

    // Degree-preserving null model: weights permuted over the fixed
    // sparsity pattern.
    double lambda_plus = 0.0;
    for (std::size_t s = 0; s < opt.shuffles; ++s) {
        util::SplitRng rng(opt.seed, s + 1);
        EntryList shuffled = entries;
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            const std::size_t j = rng.next_below(i);
            std::swap(shuffled[i - 1].second, shuffled[j].second);
        }
        lambda_plus = std::max(
            lambda_plus, top_eigenvalue(shuffled, n, 1.0, opt.dense_limit, opt.seed));
    }

    SpectrumReport rep;
    rep.bulk_edge = lambda_plus;
    rep.aspect_ratio = 2.0 * static_cast<double>(entries.size()) /
                       (static_cast<double>(n) * static_cast<double>(n));
    if (n <= opt.dense_limit)
        rep.eigenvalues = dense_spectrum(entries, n, 1.0);
    else
        rep.eigenvalues = lanczos_top_eigenvalues(entries, n, 8, opt.seed);
    for (double e : rep.eigenvalues)
        if (e > lambda_plus) ++rep.above_bulk;
    if (rep.above_bulk == 0) {
        rep.weight_threshold = opt.default_tau;
        return rep;
    }

    // Largest threshold whose removal set (entries below it) still has its
    // whole spectrum inside the shuffle bulk.
    std::vector<double> candidates;
    for (const auto& [ij, w] : entries) candidates.push_back(w);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    candidates.push_back(std::nextafter(candidates.back(), 2.0));

    auto feasible = [&](double tau) {
        EntryList removed;
        for (const auto& e : entries)
            if (e.second < tau) removed.push_back(e);
        if (removed.empty()) return true;
        return top_eigenvalue(removed, n, 1.0, opt.dense_limit, opt.seed) <=
               lambda_plus + 1e-12;
    };
    std::size_t lo = 0, hi = candidates.size() - 1;
    if (!feasible(candidates[lo])) {
        rep.weight_threshold = std::clamp(candidates[lo], 0.0, 1.0);
        return rep;
    }
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (feasible(candidates[mid]))
            lo = mid;
        else
            hi = mid - 1;
    }
    rep.weight_threshold = std::clamp(candidates[lo], 0.0, 1.0);
    return rep;
}

} // namespace

SpectrumReport rmt_bulk_cutoff(const SimilarityMatrix& matrix, RmtMode mode,
                               const RmtOptions& options) {
    if (matrix.n < 3)
        throw InvalidArgument("rmt_bulk_cutoff: need n >= 3");
    if (matrix.entries.empty())
        return degenerate_report(matrix, options.default_tau);
    return mode == RmtMode::Mp ? rmt_mp(matrix, options)
                               : rmt_shuffle(matrix, options);
}

WeightedGraph threshold_to_graph(const SimilarityMatrix& matrix, double tau_w) {
    // tau_w slightly above 1 is legal and simply cuts everything.
    if (!(tau_w >= 0.0))
        throw InvalidArgument("threshold_to_graph: tau_w must be >= 0");
    WeightedGraph g;
    g.n = matrix.n;
    for (const auto& [ij, w] : matrix.entries)
        if (w >= tau_w) g.edges.push_back({ij.first, ij.second, w});
    g.build_adjacency();
    return g;
}

void export_graph(const WeightedGraph& g, const std::vector<std::string>& labels,
                  GraphFormat format, std::ostream& out) {
    if (labels.size() < g.n)
        throw InvalidArgument("export_graph: labels must cover all nodes");
    char buf[64];
    if (format == GraphFormat::EdgeList) {
        out << "# source\ttarget\tweight\n";
        for (const auto& e : g.edges) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.w);
            out << labels[e.i] << '\t' << labels[e.j] << '\t' << buf << '\n';
        }
    } else {
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
            << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" "
               "attr.type=\"double\"/>\n"
            << "  <graph edgedefault=\"undirected\">\n";
        for (std::size_t v = 0; v < g.n; ++v)
            out << "    <node id=\"" << labels[v] << "\"/>\n";
        for (const auto& e : g.edges) {
            std::snprintf(buf, sizeof(buf), "%.17g", e.w);
            out << "    <edge source=\"" << labels[e.i] << "\" target=\""
                << labels[e.j] << "\"><data key=\"weight\">" << buf
                << "</data></edge>\n";
        }
        out << "  </graph>\n</graphml>\n";
    }
    if (!out) throw IoError("export_graph: write failure");
}

WeightedGraph parse_edge_list(std::istream& in, std::vector<std::string>& labels) {
    labels.clear();
    std::map<std::string, std::uint32_t> index;
    auto node = [&](const std::string& id) {
        auto [it, inserted] = index.try_emplace(
            id, static_cast<std::uint32_t>(labels.size()));
        if (inserted) labels.push_back(id);
        return it->second;
    };
    WeightedGraph g;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cols = util::split_tsv(line);
        if (cols.size() != 3) throw Error("edge list: expected 3 columns");
        auto i = node(cols[0]);
        auto j = node(cols[1]);
        if (i > j) std::swap(i, j);
        g.edges.push_back({i, j, std::stod(cols[2])});
    }
    g.n = labels.size();
    std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    g.build_adjacency();
    return g;
}

} // namespace repgraph::graph

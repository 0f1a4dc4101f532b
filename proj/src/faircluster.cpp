#include "repgraph/faircluster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "repgraph/error.hpp"
#include "repgraph/util.hpp"

namespace repgraph::faircluster {

namespace {

// x log(x/y) with the 0 log 0 convention.
double xlogx_over(double x, double y) {
    if (x <= 0.0) return 0.0;
    return x * std::log(x / y);
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

} // namespace

double js_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size())
        throw InvalidArgument("js_divergence: length mismatch");
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0 || q[i] < 0)
            throw InvalidArgument("js_divergence: negative mass");
        sp += p[i];
        sq += q[i];
    }
    if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
        throw InvalidArgument("js_divergence: distributions must sum to 1");
    double js = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (m > 0)
            js += 0.5 * xlogx_over(p[i], m) + 0.5 * xlogx_over(q[i], m);
    }
    return std::max(0.0, js);
}

double js_two_point(double r, double s) {
    r = std::clamp(r, 0.0, 1.0);
    s = std::clamp(s, 0.0, 1.0);
    double js = 0;
    const double m1 = 0.5 * (r + s);
    const double m0 = 0.5 * ((1 - r) + (1 - s));
    if (m1 > 0) js += 0.5 * xlogx_over(r, m1) + 0.5 * xlogx_over(s, m1);
    if (m0 > 0) js += 0.5 * xlogx_over(1 - r, m0) + 0.5 * xlogx_over(1 - s, m0);
    return std::max(0.0, js);
}

Subgroups Subgroups::from_table(
    std::size_t n,
    const std::unordered_map<std::string, std::vector<std::size_t>>& table) {
    Subgroups sg;
    sg.membership.assign(n, -1);
    for (const auto& [name, members] : table) sg.names.push_back(name);
    std::sort(sg.names.begin(), sg.names.end());
    sg.sizes.resize(sg.names.size());
    for (std::size_t g = 0; g < sg.names.size(); ++g) {
        const auto& members = table.at(sg.names[g]);
        sg.sizes[g] = members.size();
        for (std::size_t idx : members) {
            if (idx >= n) throw InvalidArgument("Subgroups: member index out of range");
            sg.membership[idx] = static_cast<int>(g);
        }
    }
    return sg;
}

namespace {

// Penalty machinery shared by objective() and the Lloyd assignment step.
struct PenaltyState {
    const Subgroups* sg;
    FairnessConfig cfg;
    std::size_t n;

    // js mode: per-cluster term summed over subgroups.
    double js_cluster_term(const std::vector<std::size_t>& counts,
                           std::size_t size) const {
        const double s = static_cast<double>(size) / static_cast<double>(n);
        double total = 0;
        for (std::size_t g = 0; g < sg->count(); ++g) {
            const double r = static_cast<double>(counts[g]) /
                             static_cast<double>(sg->sizes[g]);
            total += js_two_point(r, s);
        }
        return total;
    }

    // wcd mode: per-subgroup term over the whole contingency column.
    // Over-concentration beyond tau is charged per cluster; shortfall is
    // charged on the best-covered cluster so the target acts as a floor.
    double wcd_group_term(const std::vector<std::vector<std::size_t>>& contingency,
                          std::size_t g) const {
        const double wg = 1.0 / static_cast<double>(sg->sizes[g]);
        double over = 0, best = 0;
        for (const auto& row : contingency) {
            const double r = static_cast<double>(row[g]) /
                             static_cast<double>(sg->sizes[g]);
            over += std::max(0.0, r - cfg.tau);
            best = std::max(best, r);
        }
        return wg * (over + std::max(0.0, cfg.tau - best));
    }

    double total(const Partition& p) const {
        double pen = 0;
        if (cfg.mode == FairMode::Js) {
            for (std::size_t i = 0; i < p.k; ++i)
                pen += js_cluster_term(p.contingency[i], p.sizes[i]);
        } else {
            for (std::size_t g = 0; g < sg->count(); ++g)
                pen += wcd_group_term(p.contingency, g);
        }
        return pen;
    }

    // Penalty change if a point of group `gx` (or -1) moves a -> b.
    double move_delta(Partition& p, std::size_t a, std::size_t b, int gx) const {
        if (a == b) return 0.0;
        double before = 0, after = 0;
        if (cfg.mode == FairMode::Js) {
            before = js_cluster_term(p.contingency[a], p.sizes[a]) +
                     js_cluster_term(p.contingency[b], p.sizes[b]);
            apply_move(p, a, b, gx);
            after = js_cluster_term(p.contingency[a], p.sizes[a]) +
                    js_cluster_term(p.contingency[b], p.sizes[b]);
            apply_move(p, b, a, gx); // undo
        } else {
            if (gx < 0) return 0.0; // wcd depends only on labeled points
            before = wcd_group_term(p.contingency, gx);
            apply_move(p, a, b, gx);
            after = wcd_group_term(p.contingency, gx);
            apply_move(p, b, a, gx);
        }
        return after - before;
    }

    static void apply_move(Partition& p, std::size_t from, std::size_t to, int gx) {
        --p.sizes[from];
        ++p.sizes[to];
        if (gx >= 0) {
            --p.contingency[from][gx];
            ++p.contingency[to][gx];
        }
    }
};

double cohesion(const Points& points, const Partition& p) {
    double total = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
        total += squared_distance(points[i], p.centroids[p.assignment[i]]);
    return total;
}

std::vector<std::size_t> farthest_point_seeds(const Points& points, std::size_t k,
                                              std::uint64_t seed) {
    const std::size_t n = points.size();
    util::SplitRng rng(seed, 0x5eed);
    std::vector<std::size_t> seeds{static_cast<std::size_t>(rng.next_below(n))};
    std::vector<double> nearest(n, std::numeric_limits<double>::max());
    while (seeds.size() < k) {
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i],
                                  squared_distance(points[i], points[seeds.back()]));
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (nearest[i] > nearest[best]) best = i;
        seeds.push_back(best);
    }
    return seeds;
}

void recompute_centroids(const Points& points, Partition& p) {
    const std::size_t d = points.front().size();
    for (auto& c : p.centroids) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& c = p.centroids[p.assignment[i]];
        for (std::size_t x = 0; x < d; ++x) c[x] += points[i][x];
    }
    for (std::size_t j = 0; j < p.k; ++j)
        if (p.sizes[j] > 0)
            for (std::size_t x = 0; x < d; ++x)
                p.centroids[j][x] /= static_cast<double>(p.sizes[j]);
}

// Reseed each empty cluster with the point farthest from its own centroid.
void fix_empty_clusters(const Points& points, Partition& p, const Subgroups& sg) {
    for (std::size_t j = 0; j < p.k; ++j) {
        if (p.sizes[j] > 0) continue;
        std::size_t far = 0;
        double far_d = -1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (p.sizes[p.assignment[i]] <= 1) continue;
            const double d = squared_distance(points[i], p.centroids[p.assignment[i]]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        const std::size_t from = p.assignment[far];
        PenaltyState::apply_move(p, from, j, sg.membership[far]);
        p.assignment[far] = static_cast<std::uint32_t>(j);
        p.centroids[j] = points[far];
    }
}

} // namespace

double fairness_penalty(const Partition& partition, const Subgroups& subgroups,
                        const FairnessConfig& config) {
    PenaltyState ps{&subgroups, config, partition.assignment.size()};
    return ps.total(partition);
}

double objective(const Points& points, const Partition& partition,
                 const Subgroups& subgroups, const FairnessConfig& config) {
    if (config.lambda < 0) throw InvalidArgument("objective: lambda must be >= 0");
    return cohesion(points, partition) +
           config.lambda * fairness_penalty(partition, subgroups, config);
}

Partition fair_partition(const Points& points, std::size_t k,
                         const FairnessConfig& config, const Subgroups& subgroups,
                         std::uint64_t seed, std::size_t max_iter, unsigned threads) {
    const std::size_t n = points.size();
    if (k == 0 || k > n)
        throw InvalidArgument("fair_partition: need 1 <= k <= n");
    if (config.lambda < 0)
        throw InvalidArgument("fair_partition: lambda must be >= 0");
    if (subgroups.membership.size() != n)
        throw InvalidArgument("fair_partition: subgroup membership size mismatch");

    Partition p;
    p.k = k;
    p.assignment.assign(n, 0);
    p.sizes.assign(k, 0);
    p.contingency.assign(k, std::vector<std::size_t>(subgroups.count(), 0));
    p.centroids.assign(k, std::vector<double>(points.front().size(), 0.0));

    const auto seeds = farthest_point_seeds(points, k, seed);
    for (std::size_t j = 0; j < k; ++j) p.centroids[j] = points[seeds[j]];

    // Initial assignment by nearest seed, ties toward the lower index.
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = squared_distance(points[i], p.centroids[0]);
        for (std::size_t j = 1; j < k; ++j) {
            const double d = squared_distance(points[i], p.centroids[j]);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        p.assignment[i] = static_cast<std::uint32_t>(best);
    }
    for (std::size_t i = 0; i < n; ++i) {
        ++p.sizes[p.assignment[i]];
        if (subgroups.membership[i] >= 0)
            ++p.contingency[p.assignment[i]][subgroups.membership[i]];
    }
    recompute_centroids(points, p);

    PenaltyState ps{&subgroups, config, n};
    std::vector<double> dist(n * k);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Distances against the frozen centroids are computed in parallel;
        // the move decisions run in canonical point order so that results
        // do not depend on the thread count.
        util::parallel_for(n, threads, [&](std::size_t i) {
            for (std::size_t j = 0; j < k; ++j)
                dist[i * k + j] = squared_distance(points[i], p.centroids[j]);
        });

        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = p.assignment[i];
            std::size_t best = a;
            double best_cost = dist[i * k + a];
            for (std::size_t j = 0; j < k; ++j) {
                if (j == a) continue;
                const double cost =
                    dist[i * k + j] +
                    config.lambda * ps.move_delta(p, a, j, subgroups.membership[i]);
                if (cost + 1e-12 < best_cost ||
                    (std::abs(cost - best_cost) <= 1e-12 && j < best)) {
                    best_cost = cost;
                    best = j;
                }
            }
            if (best != a) {
                PenaltyState::apply_move(p, a, best, subgroups.membership[i]);
                p.assignment[i] = static_cast<std::uint32_t>(best);
                moved = true;
            }
        }
        fix_empty_clusters(points, p, subgroups);
        recompute_centroids(points, p);
        p.objective_trace.push_back(objective(points, p, subgroups, config));
        p.iterations = iter + 1;
        if (!moved) break;
    }
    return p;
}

Points spectral_embedding(const graph::WeightedGraph& g, std::size_t dims,
                          bool diffusion_scale) {
    if (g.n == 0 || g.edges.empty())
        throw InvalidArgument("spectral_embedding: degenerate (empty) graph");
    const std::size_t n = g.n;
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(n);
    for (const auto& e : g.edges) {
        deg[e.i] += e.w;
        deg[e.j] += e.w;
    }
    Eigen::VectorXd dinv = deg.unaryExpr(
        [](double d) { return d > 0 ? 1.0 / std::sqrt(d) : 0.0; });

    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
    for (const auto& e : g.edges) {
        const double v = e.w * dinv[e.i] * dinv[e.j];
        lap(e.i, e.j) -= v;
        lap(e.j, e.i) -= v;
    }
    // Deflate the trivial direction so the smallest dims eigenvectors are
    // the non-trivial ones even on disconnected graphs.
    Eigen::VectorXd trivial(n);
    for (std::size_t i = 0; i < n; ++i) trivial[i] = std::sqrt(std::max(0.0, deg[i]));
    trivial.normalize();
    lap += 4.0 * trivial * trivial.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    const std::size_t take = std::min(dims, n);
    Points points(n, std::vector<double>(take, 0.0));
    for (std::size_t c = 0; c < take; ++c) {
        const double lambda = solver.eigenvalues()[c];
        const double scale = diffusion_scale ? std::max(0.0, 1.0 - lambda) : 1.0;
        // Fix the sign deterministically: first nonzero component positive.
        double sign = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = solver.eigenvectors()(i, c);
            if (std::abs(v) > 1e-12) {
                sign = v > 0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            points[i][c] = sign * scale * solver.eigenvectors()(i, c);
    }
    return points;
}

Partition fair_partition_graph(const graph::WeightedGraph& g, std::size_t k,
                               const FairnessConfig& config, const Subgroups& subgroups,
                               std::uint64_t seed, std::size_t max_iter,
                               unsigned threads) {
    const auto points = spectral_embedding(g, k);
    return fair_partition(points, k, config, subgroups, seed, max_iter, threads);
}

EquityReport equity_report(const Partition& partition, const Subgroups& subgroups,
                           const std::vector<std::string>& labels) {
    const std::size_t n = partition.assignment.size();
    EquityReport rep;
    if (subgroups.count() > 0) {
        double prop_sum = 0;
        for (std::size_t g = 0; g < subgroups.count(); ++g) {
            double best = 0;
            for (std::size_t i = 0; i < partition.k; ++i) {
                const double r = static_cast<double>(partition.contingency[i][g]) /
                                 static_cast<double>(subgroups.sizes[g]);
                const double s = static_cast<double>(partition.sizes[i]) /
                                 static_cast<double>(n);
                best = std::max(best, r);
                rep.d_eq = std::max(rep.d_eq, std::abs(r - s));
                rep.js_disparity = std::max(rep.js_disparity, js_two_point(r, s));
            }
            rep.coverage[subgroups.names[g]] = best;
            prop_sum += best;
        }
        rep.r_prop = prop_sum / static_cast<double>(subgroups.count());
    }
    if (!labels.empty()) {
        if (labels.size() != n)
            throw InvalidArgument("equity_report: label count mismatch");
        std::size_t agree = 0;
        for (std::size_t i = 0; i < partition.k; ++i) {
            std::map<std::string, std::size_t> counts;
            for (std::size_t x = 0; x < n; ++x)
                if (partition.assignment[x] == i) ++counts[labels[x]];
            std::size_t top = 0;
            for (const auto& [lab, c] : counts) top = std::max(top, c);
            agree += top;
        }
        rep.purity = static_cast<double>(agree) / static_cast<double>(n);
    }
    return rep;
}

} // namespace repgraph::faircluster

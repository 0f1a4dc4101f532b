#include "repgraph/repdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "repgraph/affinity.hpp"
#include "repgraph/error.hpp"

namespace repgraph::repdist {

namespace {

constexpr int kMappedNull = -1;
constexpr int kUnassigned = -2;
constexpr double kInf = std::numeric_limits<double>::infinity();

using EdgeMap = std::map<std::pair<std::uint32_t, std::uint32_t>, double>;

EdgeMap edge_map(const graph::WeightedGraph& g) {
    EdgeMap m;
    for (const auto& e : g.edges) m[{e.i, e.j}] = e.w;
    return m;
}

const double* find_edge(const EdgeMap& m, std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    auto it = m.find({a, b});
    return it == m.end() ? nullptr : &it->second;
}

// Full cost of a complete mapping (A node -> B node or kMappedNull).
// Unmapped B nodes count as insertions; every B edge not matched by a
// mapped A edge counts as an edge insertion.
double mapping_cost(const LabeledGraph& ga, const LabeledGraph& gb,
                    const EdgeMap& ea, const EdgeMap& eb,
                    const std::vector<int>& mapping, const GedCosts& costs) {
    const std::size_t na = ga.g.n, nb = gb.g.n;
    double total = 0;
    std::vector<bool> b_used(nb, false);
    for (std::size_t u = 0; u < na; ++u) {
        if (mapping[u] == kMappedNull) {
            total += costs.node_indel;
        } else {
            b_used[mapping[u]] = true;
            total += costs.node_sub(ga.labels[u], gb.labels[mapping[u]]);
        }
    }
    for (std::size_t v = 0; v < nb; ++v)
        if (!b_used[v]) total += costs.node_indel;

    for (const auto& [key, wa] : ea) {
        const int x = mapping[key.first], y = mapping[key.second];
        if (x == kMappedNull || y == kMappedNull) {
            total += costs.edge_indel;
            continue;
        }
        if (const double* wb = find_edge(eb, static_cast<std::uint32_t>(x),
                                         static_cast<std::uint32_t>(y)))
            total += costs.edge_sub(wa, *wb);
        else
            total += costs.edge_indel;
    }
    // Preimage lookup for B edges untouched by the pass above.
    std::vector<int> pre(nb, kMappedNull);
    for (std::size_t u = 0; u < na; ++u)
        if (mapping[u] != kMappedNull) pre[mapping[u]] = static_cast<int>(u);
    for (const auto& [key, wb] : eb) {
        const int pu = pre[key.first], pv = pre[key.second];
        const bool matched =
            pu != kMappedNull && pv != kMappedNull &&
            find_edge(ea, static_cast<std::uint32_t>(pu),
                      static_cast<std::uint32_t>(pv)) != nullptr;
        if (!matched) total += costs.edge_indel;
    }
    return total;
}

struct ExactSearch {
    const LabeledGraph& ga;
    const LabeledGraph& gb;
    const EdgeMap& ea;
    const EdgeMap& eb;
    const GedCosts& costs;
    std::vector<int> mapping;
    std::vector<bool> used;
    double best = kInf;

    // Admissible remaining bound: each unassigned A node pays at least the
    // cheaper of deletion and its best substitution into an unused B node.
    double lower_bound(std::size_t next) const {
        double bound = 0;
        for (std::size_t u = next; u < ga.g.n; ++u) {
            double cheapest = costs.node_indel;
            for (std::size_t v = 0; v < gb.g.n; ++v)
                if (!used[v])
                    cheapest = std::min(cheapest,
                                        costs.node_sub(ga.labels[u], gb.labels[v]));
            bound += cheapest;
        }
        return bound;
    }

    // Incremental cost of fixing A node u: its node operation plus the
    // operations on A edges between u and previously assigned nodes.
    double step_cost(std::size_t u, int target) const {
        double c = target == kMappedNull
                       ? costs.node_indel
                       : costs.node_sub(ga.labels[u], gb.labels[target]);
        for (std::size_t t = 0; t < u; ++t) {
            const double* wa = find_edge(ea, static_cast<std::uint32_t>(t),
                                         static_cast<std::uint32_t>(u));
            if (!wa) continue;
            if (target == kMappedNull || mapping[t] == kMappedNull) {
                c += costs.edge_indel;
                continue;
            }
            if (const double* wb =
                    find_edge(eb, static_cast<std::uint32_t>(mapping[t]),
                              static_cast<std::uint32_t>(target)))
                c += costs.edge_sub(*wa, *wb);
            else
                c += costs.edge_indel;
        }
        return c;
    }

    void dfs(std::size_t u, double partial) {
        if (partial + lower_bound(u) >= best) return;
        if (u == ga.g.n) {
            best = std::min(best, mapping_cost(ga, gb, ea, eb, mapping, costs));
            return;
        }
        for (std::size_t v = 0; v < gb.g.n; ++v) {
            if (used[v]) continue;
            mapping[u] = static_cast<int>(v);
            used[v] = true;
            dfs(u + 1, partial + step_cost(u, static_cast<int>(v)));
            used[v] = false;
        }
        mapping[u] = kMappedNull;
        dfs(u + 1, partial + step_cost(u, kMappedNull));
        mapping[u] = kUnassigned;
    }
};

// O(n^3) Hungarian algorithm (potentials form) minimizing a square matrix.
// Returns row -> column assignment.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> visited(n + 1, false);
        do {
            visited[j0] = true;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= n; ++j) {
                if (visited[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (visited[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

} // namespace

GedCosts GedCosts::defaults() {
    GedCosts c;
    c.node_sub = [](const std::string& a, const std::string& b) {
        if (a.empty() && b.empty()) return 0.0;
        const double d = static_cast<double>(
            affinity::edit_distance(a, b, affinity::CostScheme{}));
        return d / static_cast<double>(std::max(a.size(), b.size()));
    };
    c.edge_sub = [](double wa, double wb) { return std::abs(wa - wb); };
    return c;
}

ClusterMass cluster_mass(const faircluster::Partition& partition) {
    const std::size_t n = partition.assignment.size();
    if (partition.k == 0 || n == 0)
        throw InvalidArgument("cluster_mass: empty partition");
    ClusterMass cm;
    cm.masses.resize(partition.k, 0.0);
    for (std::uint32_t a : partition.assignment)
        cm.masses[a] += 1.0 / static_cast<double>(n);
    return cm;
}

double js_repertoire_distance(const ClusterMass& pa, const ClusterMass& pb) {
    if (pa.masses.size() != pb.masses.size())
        throw InvalidArgument("js_repertoire_distance: cluster counts differ");
    return std::sqrt(faircluster::js_divergence(pa.masses, pb.masses));
}

double ged_exact(const LabeledGraph& ga, const LabeledGraph& gb,
                 const GedCosts& costs) {
    if (ga.g.n > 8 || gb.g.n > 8)
        throw InvalidArgument(
            "ged_exact: graphs above 8 nodes; use ged_assignment instead");
    if (ga.labels.size() != ga.g.n || gb.labels.size() != gb.g.n)
        throw InvalidArgument("ged_exact: label count mismatch");
    const EdgeMap ea = edge_map(ga.g), eb = edge_map(gb.g);
    ExactSearch search{ga, gb, ea, eb, costs,
                       std::vector<int>(ga.g.n, kUnassigned),
                       std::vector<bool>(gb.g.n, false)};
    search.dfs(0, 0.0);
    return search.best == kInf ? 0.0 : search.best;
}

double ged_assignment(const LabeledGraph& ga, const LabeledGraph& gb,
                      const GedCosts& costs) {
    if (ga.labels.size() != ga.g.n || gb.labels.size() != gb.g.n)
        throw InvalidArgument("ged_assignment: label count mismatch");
    const std::size_t na = ga.g.n, nb = gb.g.n;
    const EdgeMap ea = edge_map(ga.g), eb = edge_map(gb.g);
    if (na == 0 && nb == 0) return 0.0;

    // Standard indel-augmented square matrix: substitutions top-left,
    // deletions on the top-right diagonal, insertions bottom-left diagonal,
    // zeros bottom-right. A large-but-finite blocker keeps the solver exact.
    const std::size_t n = na + nb;
    double big = costs.node_indel;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j)
            big = std::max(big, costs.node_sub(ga.labels[i], gb.labels[j]));
    big = (big + 1.0) * static_cast<double>(n + 1);

    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i < na && j < nb)
                cost[i][j] = costs.node_sub(ga.labels[i], gb.labels[j]);
            else if (i < na)
                cost[i][j] = (j - nb == i) ? costs.node_indel : big;
            else if (j < nb)
                cost[i][j] = (i - na == j) ? costs.node_indel : big;
        }

    const auto row_to_col = hungarian(cost);
    std::vector<int> mapping(na, kMappedNull);
    for (std::size_t i = 0; i < na; ++i)
        if (row_to_col[i] >= 0 && row_to_col[i] < static_cast<int>(nb))
            mapping[i] = row_to_col[i];
    return mapping_cost(ga, gb, ea, eb, mapping, costs);
}

double ged_normalized(double ged, const LabeledGraph& ga, const LabeledGraph& gb) {
    if (ged < 0) throw InvalidArgument("ged_normalized: negative distance");
    const double denom =
        static_cast<double>(std::max(ga.g.n, gb.g.n) +
                            std::max(ga.g.edges.size(), gb.g.edges.size()));
    return denom == 0.0 ? 0.0 : ged / denom;
}

} // namespace repgraph::repdist

#include "repgraph/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "repgraph/error.hpp"

namespace repgraph::tuner {

namespace {

// Shared loop so grid refinement can bisect an arbitrary bracket.
TuneTrace bisect_between(const Measure& measure, double low, double high,
                         double delta_max, double gap) {
    TuneTrace trace;
    while (high - low > gap) {
        const double mid = 0.5 * (low + high);
        const double d = measure(mid);
        trace.evaluations.emplace_back(mid, d);
        if (d > delta_max)
            low = mid;
        else
            high = mid;
    }
    trace.chosen = high;
    trace.feasible = measure(high) <= delta_max;
    trace.iterations = trace.evaluations.size();
    return trace;
}

} // namespace

TuneTrace tune_bisect(const Measure& measure, double delta_max) {
    return bisect_between(measure, 0.0, 1.0, delta_max, 0.05);
}

TuneTrace tune_grid(const Measure& measure, const std::vector<double>& grid,
                    double delta_max, bool refine) {
    if (grid.empty()) throw InvalidArgument("tune_grid: empty grid");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw InvalidArgument("tune_grid: grid must be sorted");

    TuneTrace trace;
    std::size_t feasible_at = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = measure(grid[i]);
        trace.evaluations.emplace_back(grid[i], d);
        if (feasible_at == grid.size() && d <= delta_max) feasible_at = i;
    }
    trace.iterations = trace.evaluations.size();
    if (feasible_at == grid.size()) {
        trace.chosen = grid.back();
        trace.feasible = false;
        return trace;
    }
    trace.chosen = grid[feasible_at];
    trace.feasible = true;
    if (refine && feasible_at > 0) {
        TuneTrace fine = bisect_between(measure, grid[feasible_at - 1],
                                        grid[feasible_at], delta_max, 0.05);
        trace.evaluations.insert(trace.evaluations.end(), fine.evaluations.begin(),
                                 fine.evaluations.end());
        trace.iterations = trace.evaluations.size();
        if (fine.feasible) trace.chosen = fine.chosen;
    }
    return trace;
}

TuneTrace tune_gd(const Measure& objective, double lambda0, double eta0,
                  double alpha, std::size_t steps, double fd_delta) {
    if (!(alpha > 0.5 && alpha <= 1.0))
        throw InvalidArgument("tune_gd: alpha must lie in (0.5, 1]");
    if (steps < 1) throw InvalidArgument("tune_gd: need at least one step");

    TuneTrace trace;
    double lambda = std::clamp(lambda0, 0.0, 1.0);
    double best = lambda;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t t = 1; t <= steps; ++t) {
        const double val = objective(lambda);
        if (!std::isfinite(val)) break;
        trace.evaluations.emplace_back(lambda, val);
        if (val < best_val) {
            best_val = val;
            best = lambda;
        }
        const double grad =
            (objective(lambda + fd_delta) - objective(lambda - fd_delta)) /
            (2.0 * fd_delta);
        if (!std::isfinite(grad)) break;
        const double eta = eta0 * std::pow(static_cast<double>(t), -alpha);
        lambda = std::clamp(lambda - eta * grad, 0.0, 1.0);
    }
    trace.chosen = best;
    trace.feasible = std::isfinite(best_val);
    trace.iterations = trace.evaluations.size();
    return trace;
}

std::vector<double> meta_weights(const std::vector<double>& f_risk,
                                 const MetaControllerParams& params) {
    if (params.b2.size() != 3 || params.w2.size() != 3)
        throw InvalidArgument("meta_weights: output dimension must be 3");
    const std::size_t hidden = params.b1.size();
    if (params.w1.size() != hidden)
        throw InvalidArgument("meta_weights: w1/b1 shape mismatch");
    std::vector<double> h(hidden, 0.0);
    for (std::size_t i = 0; i < hidden; ++i) {
        if (params.w1[i].size() != f_risk.size())
            throw InvalidArgument("meta_weights: w1 column count != feature count");
        double acc = params.b1[i];
        for (std::size_t j = 0; j < f_risk.size(); ++j)
            acc += params.w1[i][j] * f_risk[j];
        h[i] = std::max(0.0, acc);
    }
    std::vector<double> s(3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        if (params.w2[i].size() != hidden)
            throw InvalidArgument("meta_weights: w2/b1 shape mismatch");
        double acc = params.b2[i];
        for (std::size_t j = 0; j < hidden; ++j) acc += params.w2[i][j] * h[j];
        s[i] = acc;
    }
    const double shift = *std::max_element(s.begin(), s.end());
    double z = 0;
    for (auto& v : s) {
        v = std::exp(v - shift);
        z += v;
    }
    for (auto& v : s) v /= z;
    return s;
}

double fd_gradient(const std::function<double(const std::vector<double>&)>& risk,
                   const std::vector<double>& lambdas,
                   const std::vector<double>& deltas, std::size_t m) {
    if (deltas.empty()) throw InvalidArgument("fd_gradient: need at least one delta");
    if (m >= lambdas.size()) throw InvalidArgument("fd_gradient: coordinate out of range");
    double total = 0;
    std::vector<double> probe = lambdas;
    for (double d : deltas) {
        if (d <= 0) throw InvalidArgument("fd_gradient: deltas must be positive");
        probe[m] = lambdas[m] + d;
        const double up = risk(probe);
        probe[m] = lambdas[m] - d;
        const double down = risk(probe);
        probe[m] = lambdas[m];
        total += (up - down) / (2.0 * d);
    }
    return total / static_cast<double>(deltas.size());
}

double compound_objective(double throughput, double recall_at_10, double disparity,
                          double alpha, double beta, double gamma) {
    return alpha * throughput + beta * recall_at_10 - gamma * disparity;
}

double lambda_preset(const std::string& task) {
    if (task == "viral") return 0.5;
    if (task == "tumor") return 0.6;
    throw InvalidArgument("unknown lambda preset: " + task);
}

} // namespace repgraph::tuner

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace repgraph::tuner {

// One tuning run: every (lambda, disparity-or-objective) evaluation in
// order, the chosen lambda, and whether it met the constraint.
struct TuneTrace {
    std::vector<std::pair<double, double>> evaluations;
    double chosen = 0.0;
    bool feasible = false;
    std::size_t iterations = 0;
};

using Measure = std::function<double(double)>;

// Binary search for the smallest lambda with Delta(lambda) <= delta_max,
// assuming Delta is non-increasing. Loop guard high - low > 0.05 gives
// exactly five midpoint evaluations; the returned lambda is the feasible
// endpoint `high`, with feasibility confirmed by one final evaluation.
TuneTrace tune_bisect(const Measure& measure, double delta_max);

// Sweep a sorted grid, pick the smallest feasible point; with refine, run
// the bisection on the bracketing interval around it.
TuneTrace tune_grid(const Measure& measure, const std::vector<double>& grid,
                    double delta_max, bool refine);

// Decaying-step gradient descent: eta_t = eta0 * t^(-alpha), gradient by
// central finite difference, iterates clamped to [0,1]. Returns the best
// observed lambda. A non-finite objective value stops the run early.
TuneTrace tune_gd(const Measure& objective, double lambda0, double eta0,
                  double alpha, std::size_t steps, double fd_delta = 1e-4);

struct MetaControllerParams {
    std::vector<std::vector<double>> w1; // hidden x features
    std::vector<double> b1;
    std::vector<std::vector<double>> w2; // 3 x hidden
    std::vector<double> b2;              // 3
};

// Rectified affine layer followed by softmax over the three metric scores.
std::vector<double> meta_weights(const std::vector<double>& f_risk,
                                 const MetaControllerParams& params);

// Averaged central differences along coordinate m: for each delta_k,
// [R(l + d e_m) - R(l - d e_m)] / (2 d), then the mean over k.
double fd_gradient(const std::function<double(const std::vector<double>&)>& risk,
                   const std::vector<double>& lambdas,
                   const std::vector<double>& deltas, std::size_t m);

// alpha * throughput + beta * recall_at_10 - gamma * disparity.
double compound_objective(double throughput, double recall_at_10, double disparity,
                          double alpha, double beta, double gamma);

// Named default equity coefficients by task family.
double lambda_preset(const std::string& task);

} // namespace repgraph::tuner

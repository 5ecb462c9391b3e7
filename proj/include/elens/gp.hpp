#ifndef ELENS_GP_HPP
#define ELENS_GP_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace elens {

struct GpTracePoint {
    int iteration = 0; // 1-based
    double theta = 0.0;
    double objective = 0.0;
    bool finite = true; // false when the raw objective was non-finite
};

struct GpResult {
    double best_theta = 0.0;
    double best_objective = 0.0;
    std::vector<GpTracePoint> trace;
};

// Minimizes a scalar objective over [lo, hi] with a Gaussian-process
// surrogate: squared-exponential kernel on inputs scaled to [0, 1],
// standardized observations, length scale by maximum marginal likelihood over
// a fixed grid, next point by expected improvement on a dense grid. The first
// n_init points are uniform draws. Non-finite objective values are recorded
// as the worst seen so far and the search continues.
GpResult gp_optimize(const std::function<double(double)>& objective, double lo, double hi,
                     int n_iters = 50, int n_init = 10, std::uint64_t seed = 0);

inline constexpr double kGpJitter = 1e-8;
inline constexpr int kGpAcquisitionGrid = 1001;

// Surrogate diagnostic: expected improvement at `query` given evaluated
// (theta, value) pairs, using the optimizer's exact fitting procedure.
double gp_expected_improvement(const std::vector<double>& thetas,
                               const std::vector<double>& values, double lo, double hi,
                               double query);

// CSV "iteration,theta,loss" (loss as recorded, after worst-seen
// substitution).
void write_gp_trace_csv(const GpResult& result, std::ostream& out);

} // namespace elens

#endif

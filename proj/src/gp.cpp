#include "elens/gp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "elens/errors.hpp"
#include "elens/rng.hpp"

namespace elens {

namespace {

constexpr double kLengthScales[] = {0.02, 0.05, 0.1, 0.2, 0.5, 1.0};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& x, double ell) {
    Eigen::Index n = x.size();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double d = (x(i) - x(j)) / ell;
            k(i, j) = std::exp(-0.5 * d * d);
        }
    k.diagonal().array() += kGpJitter;
    return k;
}

struct Surrogate {
    Eigen::VectorXd x;      // scaled inputs
    Eigen::VectorXd alpha;  // K^-1 y
    Eigen::LLT<Eigen::MatrixXd> llt;
    double ell = 0.1;

    void fit(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
        x = xs;
        double best_ml = -std::numeric_limits<double>::infinity();
        for (double cand : kLengthScales) {
            Eigen::MatrixXd k = kernel_matrix(xs, cand);
            Eigen::LLT<Eigen::MatrixXd> f(k);
            if (f.info() != Eigen::Success) continue;
            Eigen::VectorXd a = f.solve(ys);
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < xs.size(); ++i)
                logdet += 2.0 * std::log(f.matrixL()(i, i));
            double ml = -0.5 * ys.dot(a) - 0.5 * logdet;
            if (ml > best_ml) {
                best_ml = ml;
                ell = cand;
                alpha = a;
                llt = f;
            }
        }
    }

    void posterior(double xq, double& mean, double& var) const {
        Eigen::VectorXd k(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double d = (xq - x(i)) / ell;
            k(i) = std::exp(-0.5 * d * d);
        }
        mean = k.dot(alpha);
        Eigen::VectorXd v = llt.matrixL().solve(k);
        var = std::max(1.0 + kGpJitter - v.squaredNorm(), 0.0);
    }
};

double expected_improvement(const Surrogate& gp, double best_y, double u) {
    double mu, var;
    gp.posterior(u, mu, var);
    double s = std::sqrt(var);
    if (s < 1e-12) return 0.0;
    double z = (best_y - mu) / s;
    return (best_y - mu) * normal_cdf(z) + s * normal_pdf(z);
}

Surrogate fit_standardized(const std::vector<double>& thetas, const std::vector<double>& values,
                           double lo, double hi, double& best_y) {
    Eigen::Index n = Eigen::Index(thetas.size());
    Eigen::VectorXd xs(n), ys(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        xs(i) = (thetas[std::size_t(i)] - lo) / (hi - lo);
        ys(i) = values[std::size_t(i)];
    }
    double mean_y = ys.mean();
    double std_y = std::sqrt((ys.array() - mean_y).square().mean());
    if (std_y < 1e-12) std_y = 1.0;
    Eigen::VectorXd ys_std = (ys.array() - mean_y) / std_y;

    Surrogate gp;
    gp.fit(xs, ys_std);
    best_y = ys_std.minCoeff();
    return gp;
}

} // namespace

GpResult gp_optimize(const std::function<double(double)>& objective, double lo, double hi,
                     int n_iters, int n_init, std::uint64_t seed) {
    if (!(hi > lo))
        throw ConfigError("gp_optimize: search box is degenerate");
    if (n_iters < 1 || n_init < 1 || n_init > n_iters)
        throw ConfigError("gp_optimize: need 1 <= n_init <= n_iters");

    std::mt19937_64 rng(seed);
    GpResult result;
    result.best_objective = std::numeric_limits<double>::infinity();

    std::vector<double> thetas, values; // values after worst-seen substitution
    double worst_finite = -std::numeric_limits<double>::infinity();

    auto evaluate = [&](double theta, int iteration) {
        double raw = objective(theta);
        bool finite = std::isfinite(raw);
        double recorded;
        if (finite) {
            worst_finite = std::max(worst_finite, raw);
            recorded = raw;
            if (raw < result.best_objective) {
                result.best_objective = raw;
                result.best_theta = theta;
            }
        } else {
            // Worst seen so far; before any finite value, an arbitrary high
            // constant keeps the surrogate defined.
            recorded = std::isfinite(worst_finite) ? worst_finite : 1e10;
        }
        thetas.push_back(theta);
        values.push_back(recorded);
        result.trace.push_back({iteration, theta, recorded, finite});
    };

    int iteration = 0;
    for (int i = 0; i < n_init; ++i) evaluate(uniform_in(rng, lo, hi), ++iteration);

    while (iteration < n_iters) {
        double best_y = 0.0;
        Surrogate gp = fit_standardized(thetas, values, lo, hi, best_y);

        double best_ei = 0.0;
        double best_u = -1.0;
        for (int i = 0; i < kGpAcquisitionGrid; ++i) {
            double u = double(i) / double(kGpAcquisitionGrid - 1);
            double ei = expected_improvement(gp, best_y, u);
            if (ei > best_ei) {
                best_ei = ei;
                best_u = u;
            }
        }
        double theta = best_ei > 1e-16 ? lo + (hi - lo) * best_u
                                       : uniform_in(rng, lo, hi); // flat surrogate: explore
        evaluate(theta, ++iteration);
    }

    if (!std::isfinite(result.best_objective) && !result.trace.empty()) {
        // Every evaluation failed; report the first point rather than nothing.
        result.best_theta = result.trace.front().theta;
        result.best_objective = result.trace.front().objective;
    }
    return result;
}

double gp_expected_improvement(const std::vector<double>& thetas,
                               const std::vector<double>& values, double lo, double hi,
                               double query) {
    if (thetas.size() != values.size() || thetas.empty())
        throw ConfigError("gp_expected_improvement: need matching, non-empty evaluations");
    if (!(hi > lo))
        throw ConfigError("gp_expected_improvement: degenerate box");
    double best_y = 0.0;
    Surrogate gp = fit_standardized(thetas, values, lo, hi, best_y);
    return expected_improvement(gp, best_y, (query - lo) / (hi - lo));
}

void write_gp_trace_csv(const GpResult& result, std::ostream& out) {
    out << "iteration,theta,loss\n";
    char buf[64];
    for (const auto& p : result.trace) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g", p.iteration, p.theta, p.objective);
        out << buf << '\n';
    }
}

} // namespace elens

#ifndef ELENS_LOGREG_HPP
#define ELENS_LOGREG_HPP

#include <vector>

#include <Eigen/Dense>

namespace elens {

// One-vs-rest logistic regression. Each class gets a sigmoid scorer; class
// probabilities are the normalized per-class sigmoids and predictions take
// the argmax with ties broken by lower class index.
struct LogisticModel {
    // One row per class; the last column is the intercept.
    Eigen::MatrixXd weights;
    double inverse_l2 = 1.0;

    int n_classes() const { return int(weights.rows()); }
    int n_features() const { return int(weights.cols()) - 1; }
};

// Objective of one binary subproblem: mean log loss plus an L2 penalty
// lambda/(2n) * |w|^2 over the non-intercept weights, lambda = 1/inverse_l2.
struct BinaryObjective {
    double loss = 0.0;
    Eigen::VectorXd gradient;
};
BinaryObjective binary_logreg_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                                        const Eigen::VectorXd& beta, double lambda);

// Damped Newton per class to gradient tolerance 1e-6 (infinity norm) or the
// iteration cap. Throws ValidationError on non-finite features and
// ConfigError on inverse_l2 <= 0.
LogisticModel train_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           double inverse_l2 = 1.0, int max_iters = 100);

inline constexpr double kLogregGradTolerance = 1e-6;

Eigen::MatrixXd logreg_predict_proba(const LogisticModel& model, const Eigen::MatrixXd& X);
std::vector<int> logreg_predict(const LogisticModel& model, const Eigen::MatrixXd& X);

} // namespace elens

#endif

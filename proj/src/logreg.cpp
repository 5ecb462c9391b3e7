#include "elens/logreg.hpp"

#include <algorithm>
#include <cmath>

#include "elens/errors.hpp"

namespace elens {

namespace {

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + e^t), overflow-safe.
double log1pexp(double t) {
    if (t > 35.0) return t;
    if (t < -35.0) return std::exp(t);
    return std::log1p(std::exp(t));
}

} // namespace

BinaryObjective binary_logreg_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y01,
                                        const Eigen::VectorXd& beta, double lambda) {
    Eigen::Index n = X.rows();
    Eigen::Index d = X.cols();
    if (y01.size() != n || beta.size() != d + 1)
        throw ValidationError("binary objective: dimension mismatch");

    Eigen::VectorXd scores = X * beta.head(d);
    scores.array() += beta(d);

    BinaryObjective out;
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // -y log h(s) - (1-y) log(1 - h(s)) = log(1+e^s) - y s
        out.loss += log1pexp(scores(i)) - y01(i) * scores(i);
        p(i) = sigmoid(scores(i));
    }
    out.loss /= double(n);
    out.loss += lambda / (2.0 * double(n)) * beta.head(d).squaredNorm();

    out.gradient.resize(d + 1);
    Eigen::VectorXd r = p - y01;
    out.gradient.head(d) = (X.transpose() * r + lambda * beta.head(d)) / double(n);
    out.gradient(d) = r.sum() / double(n);
    return out;
}

LogisticModel train_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           double inverse_l2, int max_iters) {
    if (inverse_l2 <= 0.0)
        throw ConfigError("inverse_l2 must be positive");
    if (X.rows() == 0 || std::size_t(X.rows()) != y.size())
        throw ValidationError("training matrix and labels disagree");
    if (!X.allFinite())
        throw ValidationError("non-finite feature value in training matrix");

    int n_classes = 0;
    for (int c : y) {
        if (c < 0) throw ValidationError("negative class index");
        n_classes = std::max(n_classes, c + 1);
    }
    if (n_classes < 2)
        throw ValidationError("logistic regression needs at least 2 classes");

    Eigen::Index n = X.rows();
    Eigen::Index d = X.cols();
    double lambda = 1.0 / inverse_l2;

    LogisticModel model;
    model.inverse_l2 = inverse_l2;
    model.weights = Eigen::MatrixXd::Zero(n_classes, d + 1);

    for (int c = 0; c < n_classes; ++c) {
        Eigen::VectorXd y01(n);
        for (Eigen::Index i = 0; i < n; ++i) y01(i) = (y[std::size_t(i)] == c) ? 1.0 : 0.0;

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
        BinaryObjective obj = binary_logreg_objective(X, y01, beta, lambda);
        for (int iter = 0; iter < max_iters; ++iter) {
            if (obj.gradient.lpNorm<Eigen::Infinity>() < kLogregGradTolerance) break;

            // Newton direction; the ridge term keeps the Hessian positive
            // definite even on separable data.
            Eigen::VectorXd scores = X * beta.head(d);
            scores.array() += beta(d);
            Eigen::VectorXd w(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                double p = sigmoid(scores(i));
                w(i) = std::max(p * (1.0 - p), 1e-12);
            }
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d + 1, d + 1);
            Eigen::MatrixXd xw = X.transpose() * w.asDiagonal();
            h.topLeftCorner(d, d) = xw * X;
            h.topLeftCorner(d, d).diagonal().array() += lambda;
            h.topRightCorner(d, 1) = xw.rowwise().sum();
            h.bottomLeftCorner(1, d) = h.topRightCorner(d, 1).transpose();
            h(d, d) = w.sum();
            h /= double(n);
            h.diagonal().array() += 1e-10;

            Eigen::VectorXd step = h.ldlt().solve(obj.gradient);
            double scale = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                Eigen::VectorXd cand = beta - scale * step;
                BinaryObjective cand_obj = binary_logreg_objective(X, y01, cand, lambda);
                if (cand_obj.loss <= obj.loss) {
                    beta = cand;
                    obj = cand_obj;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if (!accepted) break; // no descent direction left at double precision
        }
        model.weights.row(c).head(d) = beta.head(d).transpose();
        model.weights(c, d) = beta(d);
    }
    return model;
}

Eigen::MatrixXd logreg_predict_proba(const LogisticModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.n_features())
        throw ValidationError("prediction width " + std::to_string(X.cols()) +
                              " does not match model width " +
                              std::to_string(model.n_features()));
    Eigen::Index n = X.rows();
    int k = model.n_classes();
    Eigen::MatrixXd p(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        double total = 0.0;
        for (int c = 0; c < k; ++c) {
            double s = model.weights.row(c).head(X.cols()).dot(X.row(i)) +
                       model.weights(c, model.n_features());
            p(i, c) = sigmoid(s);
            total += p(i, c);
        }
        if (total <= 0.0) {
            p.row(i).setConstant(1.0 / double(k));
        } else {
            p.row(i) /= total;
        }
    }
    return p;
}

std::vector<int> logreg_predict(const LogisticModel& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd p = logreg_predict_proba(model, X);
    std::vector<int> labels(std::size_t(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < p.cols(); ++c)
            if (p(i, c) > p(i, best)) best = c;
        labels[std::size_t(i)] = best;
    }
    return labels;
}

} // namespace elens

#ifndef ELENS_GBDT_HPP
#define ELENS_GBDT_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace elens {

struct GbdtParams {
    double learning_rate = 0.1;
    int max_leaves = 31;
    int min_samples_leaf = 20;
    int max_iters = 500;
    // Stop after this many consecutive stages without validation improvement;
    // 0 disables early stopping.
    int early_stopping_rounds = 10;
};

// Binary regression tree over raw feature values. Internal nodes route
// x[feature] <= threshold to the left child; leaves carry the additive score
// contribution (learning rate folded in).
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double gain = 0.0; // split criterion reduction, 0 for leaves
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    int n_leaves() const;
    double total_gain() const;
};

// Multiclass boosted ensemble: softmax log-loss, one regression tree per
// class per stage fit to the residuals y - p, leaf values by the standard
// multiclass Newton step scaled by the learning rate.
struct BoostedEnsemble {
    GbdtParams params;
    int n_classes = 0;
    int n_features = 0;
    Eigen::VectorXd init_scores;          // log class priors
    std::vector<std::vector<Tree>> stages; // stages[m][class]
    // Number of stages used for prediction: the validation-best stage when a
    // validation set was given, otherwise all stages.
    int best_iteration = 0;
    double init_train_loss = 0.0;
    std::vector<double> train_loss; // after each stage
    std::vector<double> valid_loss; // empty without a validation set
    // Per-stage multiplier applied on top of the learning rate when the
    // stage's raw Newton step would have increased the training loss; 1.0
    // otherwise.
    std::vector<double> stage_scale;
};

// Throws ValidationError on a single-class training set, non-finite features
// or label/row mismatch; ConfigError on out-of-range parameters. Validation
// set is optional but required for early stopping.
BoostedEnsemble train_gbdt(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           const GbdtParams& params = {},
                           const Eigen::MatrixXd* X_valid = nullptr,
                           const std::vector<int>* y_valid = nullptr);

Eigen::MatrixXd gbdt_predict_proba(const BoostedEnsemble& model, const Eigen::MatrixXd& X);
std::vector<int> gbdt_predict(const BoostedEnsemble& model, const Eigen::MatrixXd& X);

double multiclass_log_loss(const Eigen::MatrixXd& proba, const std::vector<int>& y);

// Total split gain per feature over the first best_iteration stages,
// descending, ties by feature index.
std::vector<std::pair<int, double>> feature_importance(const BoostedEnsemble& model);

} // namespace elens

#endif

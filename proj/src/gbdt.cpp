#include "elens/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "elens/errors.hpp"

namespace elens {

namespace {

constexpr double kMinSplitGain = 1e-12;
// Stage contributions below this are treated as no progress.
constexpr double kNoopLeafValue = 1e-15;

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd p(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        double mx = scores.row(i).maxCoeff();
        Eigen::ArrayXd e = (scores.row(i).array() - mx).exp();
        p.row(i) = (e / e.sum()).matrix();
    }
    return p;
}

struct Candidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    int node = -1;

    bool operator<(const Candidate& o) const { // max-heap: higher gain first
        if (gain != o.gain) return gain < o.gain;
        return node > o.node;
    }
};

// Exact greedy regression tree on residual targets, grown leaf-wise.
class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const std::vector<std::vector<int>>& order,
                const GbdtParams& params)
        : x_(X), order_(order), params_(params) {}

    Tree build(const Eigen::VectorXd& residuals, double leaf_factor) {
        Tree tree;
        std::size_t n = std::size_t(x_.rows());
        node_of_.assign(n, 0);

        tree.nodes.push_back({});
        members_.assign(1, {});
        members_[0].resize(n);
        for (std::size_t i = 0; i < n; ++i) members_[0][i] = int(i);

        std::priority_queue<Candidate> heap;
        if (auto c = best_split(0, residuals); c.feature >= 0) heap.push(c);

        int leaves = 1;
        while (leaves < params_.max_leaves && !heap.empty()) {
            Candidate c = heap.top();
            heap.pop();
            apply_split(tree, c);
            ++leaves;
            if (auto l = best_split(tree.nodes[std::size_t(c.node)].left, residuals);
                l.feature >= 0)
                heap.push(l);
            if (auto r = best_split(tree.nodes[std::size_t(c.node)].right, residuals);
                r.feature >= 0)
                heap.push(r);
        }

        for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
            if (tree.nodes[v].feature >= 0) continue;
            double num = 0.0, den = 0.0;
            for (int row : members_[v]) {
                double r = residuals(row);
                num += r;
                den += std::abs(r) * (1.0 - std::abs(r));
            }
            tree.nodes[v].value = den > 1e-12 ? leaf_factor * num / den : 0.0;
        }
        return tree;
    }

private:
    Candidate best_split(int node, const Eigen::VectorXd& residuals) const {
        const auto& rows = members_[std::size_t(node)];
        int m = int(rows.size());
        if (m < 2 * params_.min_samples_leaf) return {};
        double total = 0.0;
        double lo = residuals(rows.front()), hi = lo;
        for (int row : rows) {
            double r = residuals(row);
            total += r;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (!(hi > lo)) return {}; // constant target: no split can help
        double parent_score = total * total / double(m);

        // Zero-gain splits stay eligible: balanced xor-style targets need the
        // free root split before the children expose any gain. Ties keep the
        // lower feature and the earliest threshold.
        Candidate best;
        best.node = node;
        best.gain = -kMinSplitGain;
        for (int f = 0; f < int(x_.cols()); ++f) {
            double left_sum = 0.0;
            int left_n = 0;
            double prev_value = 0.0;
            bool have_prev = false;
            for (int row : order_[std::size_t(f)]) {
                if (node_of_[std::size_t(row)] != node) continue;
                double value = x_(row, f);
                if (have_prev && value != prev_value && left_n >= params_.min_samples_leaf &&
                    m - left_n >= params_.min_samples_leaf) {
                    double right_sum = total - left_sum;
                    double gain = left_sum * left_sum / double(left_n) +
                                  right_sum * right_sum / double(m - left_n) - parent_score;
                    if (gain > best.gain) {
                        best.gain = gain;
                        best.feature = f;
                        best.threshold = prev_value; // route x <= prev_value left
                    }
                }
                left_sum += residuals(row);
                ++left_n;
                prev_value = value;
                have_prev = true;
            }
        }
        return best;
    }

    void apply_split(Tree& tree, const Candidate& c) {
        int left = int(tree.nodes.size());
        {
            // scope the reference: the push_backs below may reallocate nodes
            TreeNode& parent = tree.nodes[std::size_t(c.node)];
            parent.feature = c.feature;
            parent.threshold = c.threshold;
            parent.gain = std::max(c.gain, 0.0); // rounding can dip a hair below zero
            parent.left = left;
            parent.right = left + 1;
        }
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        members_.emplace_back();
        members_.emplace_back();
        auto& lm = members_[std::size_t(left)];
        auto& rm = members_[std::size_t(left + 1)];
        for (int row : members_[std::size_t(c.node)]) {
            if (x_(row, c.feature) <= c.threshold) {
                node_of_[std::size_t(row)] = left;
                lm.push_back(row);
            } else {
                node_of_[std::size_t(row)] = left + 1;
                rm.push_back(row);
            }
        }
        members_[std::size_t(c.node)].clear();
    }

    const Eigen::MatrixXd& x_;
    const std::vector<std::vector<int>>& order_;
    const GbdtParams& params_;
    std::vector<int> node_of_;
    std::vector<std::vector<int>> members_;
};

void validate_params(const GbdtParams& p) {
    if (p.learning_rate <= 0.0 || p.learning_rate > 2.0)
        throw ConfigError("learning_rate must lie in (0, 2]");
    if (p.max_leaves < 2) throw ConfigError("max_leaves must be at least 2");
    if (p.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
    if (p.max_iters < 1) throw ConfigError("max_iters must be at least 1");
    if (p.early_stopping_rounds < 0) throw ConfigError("early_stopping_rounds must be >= 0");
}

Eigen::MatrixXd stage_outputs(const std::vector<Tree>& trees, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), Eigen::Index(trees.size()));
    for (std::size_t k = 0; k < trees.size(); ++k)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out(i, Eigen::Index(k)) = trees[k].predict_row(X.row(i));
    return out;
}

} // namespace

double Tree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int v = 0;
    while (nodes[std::size_t(v)].feature >= 0) {
        const TreeNode& n = nodes[std::size_t(v)];
        v = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[std::size_t(v)].value;
}

int Tree::n_leaves() const {
    int leaves = 0;
    for (const auto& n : nodes) leaves += n.feature < 0;
    return leaves;
}

double Tree::total_gain() const {
    double g = 0.0;
    for (const auto& n : nodes)
        if (n.feature >= 0) g += n.gain;
    return g;
}

double multiclass_log_loss(const Eigen::MatrixXd& proba, const std::vector<int>& y) {
    if (std::size_t(proba.rows()) != y.size() || y.empty())
        throw ValidationError("log loss: probability rows and labels disagree");
    double loss = 0.0;
    for (Eigen::Index i = 0; i < proba.rows(); ++i) {
        int c = y[std::size_t(i)];
        if (c < 0 || c >= proba.cols())
            throw ValidationError("log loss: class index out of range");
        loss -= std::log(std::max(proba(i, c), 1e-15));
    }
    return loss / double(proba.rows());
}

BoostedEnsemble train_gbdt(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           const GbdtParams& params, const Eigen::MatrixXd* X_valid,
                           const std::vector<int>* y_valid) {
    validate_params(params);
    if (X.rows() == 0 || std::size_t(X.rows()) != y.size())
        throw ValidationError("training matrix and labels disagree");
    if (!X.allFinite())
        throw ValidationError("non-finite feature value in training matrix");
    if ((X_valid == nullptr) != (y_valid == nullptr))
        throw ConfigError("validation features and labels must come together");
    if (X_valid && (std::size_t(X_valid->rows()) != y_valid->size() ||
                    X_valid->cols() != X.cols()))
        throw ValidationError("validation matrix and labels disagree");

    int k = 0;
    for (int c : y) {
        if (c < 0) throw ValidationError("negative class index");
        k = std::max(k, c + 1);
    }
    if (k < 2)
        throw ValidationError("training set has a single class; nothing to boost");
    std::vector<Eigen::Index> counts(std::size_t(k), 0);
    for (int c : y) counts[std::size_t(c)] += 1;
    for (int c = 0; c < k; ++c)
        if (counts[std::size_t(c)] == 0)
            throw ValidationError("class index " + std::to_string(c) +
                                  " absent from training set");

    Eigen::Index n = X.rows();
    BoostedEnsemble model;
    model.params = params;
    model.n_classes = k;
    model.n_features = int(X.cols());
    model.init_scores.resize(k);
    for (int c = 0; c < k; ++c)
        model.init_scores(c) = std::log(double(counts[std::size_t(c)]) / double(n));

    // Rows pre-sorted per feature once; node membership filters them later.
    std::vector<std::vector<int>> order(std::size_t(X.cols()));
    for (int f = 0; f < int(X.cols()); ++f) {
        auto& idx = order[std::size_t(f)];
        idx.resize(std::size_t(n));
        for (Eigen::Index i = 0; i < n; ++i) idx[std::size_t(i)] = int(i);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return X(a, f) < X(b, f); });
    }

    Eigen::MatrixXd f_train = model.init_scores.transpose().replicate(n, 1);
    Eigen::MatrixXd f_valid;
    if (X_valid) f_valid = model.init_scores.transpose().replicate(X_valid->rows(), 1);

    model.init_train_loss = multiclass_log_loss(softmax_rows(f_train), y);
    double prev_loss = model.init_train_loss;

    bool use_es = X_valid && params.early_stopping_rounds > 0;
    double best_valid = std::numeric_limits<double>::infinity();
    int best_iter = 0;
    int stall = 0;

    TreeBuilder builder(X, order, params);
    double leaf_factor = params.learning_rate * double(k - 1) / double(k);

    for (int m = 0; m < params.max_iters; ++m) {
        Eigen::MatrixXd p = softmax_rows(f_train);
        std::vector<Tree> trees;
        trees.reserve(std::size_t(k));
        for (int c = 0; c < k; ++c) {
            Eigen::VectorXd residuals(n);
            for (Eigen::Index i = 0; i < n; ++i)
                residuals(i) = (y[std::size_t(i)] == c ? 1.0 : 0.0) - p(i, c);
            trees.push_back(builder.build(residuals, leaf_factor));
        }

        bool noop = true;
        for (const auto& t : trees)
            for (const auto& node : t.nodes)
                if (node.feature < 0 && std::abs(node.value) > kNoopLeafValue) noop = false;
        if (noop) break;

        // The Newton step is an ascent direction of the data fit, so some
        // scale always restores monotone training loss; halve until it does.
        Eigen::MatrixXd contrib = stage_outputs(trees, X);
        double scale = 1.0;
        double loss = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 11; ++bt) {
            loss = multiclass_log_loss(softmax_rows(f_train + scale * contrib), y);
            if (loss <= prev_loss) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;

        if (scale != 1.0)
            for (auto& t : trees)
                for (auto& node : t.nodes)
                    if (node.feature < 0) node.value *= scale;

        f_train += scale * contrib;
        prev_loss = loss;
        model.train_loss.push_back(loss);
        model.stage_scale.push_back(scale);
        model.stages.push_back(std::move(trees));

        if (X_valid) {
            f_valid += stage_outputs(model.stages.back(), *X_valid);
            double vloss = multiclass_log_loss(softmax_rows(f_valid), *y_valid);
            model.valid_loss.push_back(vloss);
            if (vloss < best_valid) {
                best_valid = vloss;
                best_iter = int(model.stages.size());
                stall = 0;
            } else {
                ++stall;
                if (use_es && stall >= params.early_stopping_rounds) break;
            }
        }
    }

    model.best_iteration = X_valid ? best_iter : int(model.stages.size());
    return model;
}

Eigen::MatrixXd gbdt_predict_proba(const BoostedEnsemble& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.n_features)
        throw ValidationError("prediction width " + std::to_string(X.cols()) +
                              " does not match model width " +
                              std::to_string(model.n_features));
    Eigen::MatrixXd f = model.init_scores.transpose().replicate(X.rows(), 1);
    for (int m = 0; m < model.best_iteration; ++m)
        f += stage_outputs(model.stages[std::size_t(m)], X);
    return softmax_rows(f);
}

std::vector<int> gbdt_predict(const BoostedEnsemble& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd p = gbdt_predict_proba(model, X);
    std::vector<int> labels(std::size_t(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < p.cols(); ++c)
            if (p(i, c) > p(i, best)) best = c;
        labels[std::size_t(i)] = best;
    }
    return labels;
}

std::vector<std::pair<int, double>> feature_importance(const BoostedEnsemble& model) {
    std::vector<std::pair<int, double>> gains(std::size_t(model.n_features));
    for (int f = 0; f < model.n_features; ++f) gains[std::size_t(f)] = {f, 0.0};
    for (int m = 0; m < model.best_iteration; ++m)
        for (const auto& tree : model.stages[std::size_t(m)])
            for (const auto& node : tree.nodes)
                if (node.feature >= 0) gains[std::size_t(node.feature)].second += node.gain;
    std::sort(gains.begin(), gains.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return gains;
}

} // namespace elens

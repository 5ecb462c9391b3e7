#include "elens/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <set>

#include "elens/errors.hpp"
#include "elens/rng.hpp"

namespace elens {

namespace {

struct Carve {
    Eigen::MatrixXd X_fit, X_val;
    std::vector<int> y_fit, y_val;
};

Carve carve_validation(const Eigen::MatrixXd& X, const std::vector<int>& y, std::uint64_t seed) {
    auto idx = stratified_split_indices(y, seed, 1.0 - kValidationFraction);
    Carve c;
    c.X_fit.resize(Eigen::Index(idx.train.size()), X.cols());
    c.X_val.resize(Eigen::Index(idx.test.size()), X.cols());
    for (std::size_t i = 0; i < idx.train.size(); ++i) {
        c.X_fit.row(Eigen::Index(i)) = X.row(Eigen::Index(idx.train[i]));
        c.y_fit.push_back(y[idx.train[i]]);
    }
    for (std::size_t i = 0; i < idx.test.size(); ++i) {
        c.X_val.row(Eigen::Index(i)) = X.row(Eigen::Index(idx.test[i]));
        c.y_val.push_back(y[idx.test[i]]);
    }
    return c;
}

double macro_f1_loss(const std::vector<int>& truth, const std::vector<int>& predicted) {
    return 1.0 - compute_metrics(truth, predicted).macro_f1;
}

// Columns of the full schema belonging to the given groups, ascending.
std::vector<int> group_columns(const FeatureSchema& schema,
                               const std::vector<FeatureGroup>& groups) {
    std::set<int> wanted;
    for (FeatureGroup g : groups) wanted.insert(int(g));
    std::vector<int> cols;
    for (int i = 0; i < schema.width(); ++i)
        if (wanted.count(int(schema.columns()[std::size_t(i)].group))) cols.push_back(i);
    return cols;
}

void append_csv_value(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    line += buf;
}

} // namespace

Metrics evaluate_model(const BoostedEnsemble& model, const FeatureMatrix& test) {
    return compute_metrics(label_indices(test), gbdt_predict(model, test.values));
}

Metrics evaluate_model(const LogisticModel& model, const FeatureMatrix& test) {
    return compute_metrics(label_indices(test), logreg_predict(model, test.values));
}

BoostedEnsemble train_gbdt_holdout(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                   const GbdtParams& params, std::uint64_t seed) {
    Carve c = carve_validation(X, y, seed);
    return train_gbdt(c.X_fit, c.y_fit, params, &c.X_val, &c.y_val);
}

TunedGbdt tune_gbdt(const FeatureMatrix& train, std::uint64_t seed, int n_iters) {
    std::vector<int> y = label_indices(train);
    std::uint64_t carve_seed = derive_seed(seed, "tune-carve");
    Carve c = carve_validation(train.values, y, carve_seed);

    auto objective = [&](double lr) {
        GbdtParams p;
        p.learning_rate = lr;
        BoostedEnsemble m = train_gbdt(c.X_fit, c.y_fit, p, &c.X_val, &c.y_val);
        return macro_f1_loss(c.y_val, gbdt_predict(m, c.X_val));
    };
    TunedGbdt out;
    out.search = gp_optimize(objective, kGbdtLearningRateLo, kGbdtLearningRateHi, n_iters, 10,
                             derive_seed(seed, "tune-gbdt"));
    GbdtParams best;
    best.learning_rate = out.search.best_theta;
    out.model = train_gbdt(c.X_fit, c.y_fit, best, &c.X_val, &c.y_val);
    return out;
}

TunedLogreg tune_logreg(const FeatureMatrix& train, std::uint64_t seed, int n_iters) {
    std::vector<int> y = label_indices(train);
    std::uint64_t carve_seed = derive_seed(seed, "tune-carve");
    Carve c = carve_validation(train.values, y, carve_seed);

    auto objective = [&](double inverse_l2) {
        LogisticModel m = train_logreg(c.X_fit, c.y_fit, inverse_l2);
        return macro_f1_loss(c.y_val, logreg_predict(m, c.X_val));
    };
    TunedLogreg out;
    out.search = gp_optimize(objective, kLogregInverseL2Lo, kLogregInverseL2Hi, n_iters, 10,
                             derive_seed(seed, "tune-logreg"));
    out.model = train_logreg(train.values, y, out.search.best_theta);
    return out;
}

std::vector<StudyRow> incremental_groups_study(const FeatureMatrix& train,
                                               const FeatureMatrix& test, std::uint64_t seed) {
    static const std::vector<FeatureGroup> kOrder = {
        FeatureGroup::Address,  FeatureGroup::Entity, FeatureGroup::Motif1,
        FeatureGroup::Temporal, FeatureGroup::Centrality, FeatureGroup::Motif2,
        FeatureGroup::Motif3,
    };
    if (train.schema.width() != test.schema.width())
        throw ValidationError("train and test schemas disagree");

    std::vector<int> y_train = label_indices(train);
    std::vector<int> y_test = label_indices(test);

    std::vector<StudyRow> rows;
    std::vector<FeatureGroup> prefix;
    for (FeatureGroup g : kOrder) {
        prefix.push_back(g);
        std::vector<int> cols = group_columns(train.schema, prefix);
        Eigen::MatrixXd X_train = select_columns(train.values, cols);
        Eigen::MatrixXd X_test = select_columns(test.values, cols);

        LogisticModel lr = train_logreg(X_train, y_train);
        StudyRow lr_row;
        lr_row.group = to_string(g);
        lr_row.n_features = int(cols.size());
        lr_row.alg = "logreg";
        lr_row.metrics = compute_metrics(y_test, logreg_predict(lr, X_test));
        rows.push_back(std::move(lr_row));

        BoostedEnsemble gbdt = train_gbdt_holdout(X_train, y_train, GbdtParams{}, seed);
        StudyRow gb_row;
        gb_row.group = to_string(g);
        gb_row.n_features = int(cols.size());
        gb_row.alg = "gbdt";
        gb_row.metrics = compute_metrics(y_test, gbdt_predict(gbdt, X_test));
        rows.push_back(std::move(gb_row));
    }
    return rows;
}

void write_study_rows_csv(const std::vector<StudyRow>& rows, std::ostream& out) {
    out << "group,n_features,alg,accuracy,f1,precision\n";
    for (const auto& r : rows) {
        std::string line = r.group + "," + std::to_string(r.n_features) + "," + r.alg + ",";
        append_csv_value(line, r.metrics.accuracy);
        line += ",";
        append_csv_value(line, r.metrics.macro_f1);
        line += ",";
        append_csv_value(line, r.metrics.macro_precision);
        out << line << '\n';
    }
}

std::vector<SelectionPoint> selection_curve(const FeatureMatrix& train, const FeatureMatrix& test,
                                            const std::vector<int>& ranking,
                                            const std::vector<int>& ks, std::uint64_t seed) {
    int width = train.schema.width();
    if (int(ranking.size()) != width)
        throw ValidationError("ranking must cover every schema column");
    std::set<int> seen(ranking.begin(), ranking.end());
    if (int(seen.size()) != width || *seen.begin() < 0 || *seen.rbegin() >= width)
        throw ValidationError("ranking is not a permutation of the schema columns");

    std::vector<int> y_train = label_indices(train);
    std::vector<int> y_test = label_indices(test);

    std::vector<SelectionPoint> points;
    for (int k : ks) {
        if (k < 1 || k > width)
            throw ConfigError("selection k out of range: " + std::to_string(k));
        std::vector<int> cols(ranking.begin(), ranking.begin() + k);
        std::sort(cols.begin(), cols.end());
        Eigen::MatrixXd X_train = select_columns(train.values, cols);
        Eigen::MatrixXd X_test = select_columns(test.values, cols);

        LogisticModel lr = train_logreg(X_train, y_train);
        points.push_back({k, "logreg", compute_metrics(y_test, logreg_predict(lr, X_test))});

        BoostedEnsemble gbdt = train_gbdt_holdout(X_train, y_train, GbdtParams{}, seed);
        points.push_back({k, "gbdt", compute_metrics(y_test, gbdt_predict(gbdt, X_test))});
    }
    return points;
}

void write_selection_curve_csv(const std::vector<SelectionPoint>& points, std::ostream& out) {
    out << "k,alg,accuracy,f1\n";
    for (const auto& p : points) {
        std::string line = std::to_string(p.k) + "," + p.alg + ",";
        append_csv_value(line, p.metrics.accuracy);
        line += ",";
        append_csv_value(line, p.metrics.macro_f1);
        out << line << '\n';
    }
}

void write_importance_csv(const FeatureSchema& schema,
                          const std::vector<std::pair<int, double>>& ranked, std::ostream& out) {
    out << "rank,feature,gain\n";
    char buf[32];
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6g", ranked[i].second);
        out << (i + 1) << ',' << schema.label(ranked[i].first) << ',' << buf << '\n';
    }
}

std::vector<RankStability> bootstrap_rank_stability(const FeatureMatrix& train,
                                                    const GbdtParams& params, int n_resamples,
                                                    std::uint64_t seed) {
    if (n_resamples < 1)
        throw ConfigError("bootstrap needs at least one resample");
    std::vector<int> y = label_indices(train);
    int width = train.schema.width();

    std::array<std::vector<std::size_t>, kNumCategories> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[std::size_t(y[i])].push_back(i);

    std::vector<std::vector<int>> ranks(static_cast<std::size_t>(width)); // per feature, 1-based
    std::mt19937_64 rng(derive_seed(seed, "bootstrap"));
    for (int b = 0; b < n_resamples; ++b) {
        // Stratified bootstrap: per class, draw that class's row count with
        // replacement, keeping class balance so the holdout carve stays legal.
        std::vector<std::size_t> rows;
        for (const auto& members : by_class)
            for (std::size_t i = 0; i < members.size(); ++i)
                rows.push_back(members[uniform_index(rng, members.size())]);
        std::sort(rows.begin(), rows.end());

        Eigen::MatrixXd X_b(Eigen::Index(rows.size()), train.values.cols());
        std::vector<int> y_b;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            X_b.row(Eigen::Index(i)) = train.values.row(Eigen::Index(rows[i]));
            y_b.push_back(y[rows[i]]);
        }
        BoostedEnsemble m =
            train_gbdt_holdout(X_b, y_b, params, derive_seed(seed, "bootstrap-carve"));
        auto ranked = feature_importance(m);
        for (std::size_t r = 0; r < ranked.size(); ++r)
            ranks[std::size_t(ranked[r].first)].push_back(int(r) + 1);
    }

    std::vector<RankStability> out;
    for (int f = 0; f < width; ++f) {
        const auto& rs = ranks[std::size_t(f)];
        double mean = 0.0;
        for (int r : rs) mean += r;
        mean /= double(rs.size());
        double var = 0.0;
        for (int r : rs) var += (r - mean) * (r - mean);
        var /= double(rs.size());
        int top = 0;
        for (int r : rs)
            if (r <= 20) ++top;
        out.push_back({f, mean, std::sqrt(var), double(top) / double(rs.size())});
    }
    std::sort(out.begin(), out.end(), [](const RankStability& a, const RankStability& b) {
        if (a.mean_rank != b.mean_rank) return a.mean_rank < b.mean_rank;
        return a.feature < b.feature;
    });
    return out;
}

void write_rank_stability_csv(const FeatureSchema& schema,
                              const std::vector<RankStability>& rows, std::ostream& out) {
    out << "feature,mean_rank,std_rank,top20_share\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, ",%.3f,%.3f,%.3f", r.mean_rank, r.std_rank, r.top20_share);
        out << schema.label(r.feature) << buf << '\n';
    }
}

} // namespace elens

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "elens/dataset.hpp"
#include "elens/errors.hpp"
#include "elens/gbdt.hpp"
#include "elens/gp.hpp"
#include "elens/logreg.hpp"
#include "elens/metrics.hpp"
#include "elens/model_io.hpp"
#include "elens/rng.hpp"

using namespace elens;

namespace {

FeatureMatrix toy_matrix(int rows, std::uint64_t seed) {
    FeatureMatrix m;
    m.schema = FeatureSchema::full().subset({FeatureGroup::Entity});
    std::mt19937_64 rng(seed);
    m.values.resize(rows, m.schema.width());
    for (int r = 0; r < rows; ++r) {
        m.entity_ids.push_back(EntityId(r * 3));
        m.entity_idxs.push_back(EntityIdx(r));
        m.labels.push_back(Category(r % 3)); // three classes, balanced-ish
        m.truncated.push_back(0);
        for (int c = 0; c < m.schema.width(); ++c) m.values(r, c) = uniform_in(rng, -2.0, 2.0);
    }
    return m;
}

// Two informative columns out of four: class = (x0 > 0) + (x1 > 0).
void blobs(std::mt19937_64& rng, int rows, Eigen::MatrixXd& X, std::vector<int>& y) {
    X.resize(rows, 4);
    y.resize(std::size_t(rows));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < 4; ++c) X(r, c) = uniform_in(rng, -1.0, 1.0);
        y[std::size_t(r)] = (X(r, 0) > 0 ? 1 : 0) + (X(r, 1) > 0 ? 1 : 0);
    }
}

} // namespace

TEST_CASE("stratified split keeps class shares and covers every row") {
    std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1, 2, 2};
    auto s = stratified_split_indices(labels, 7, 0.7);
    CHECK(s.train.size() == 4 + 2 + 1);
    CHECK(s.test.size() == 3);
    CHECK(std::is_sorted(s.train.begin(), s.train.end()));
    CHECK(std::is_sorted(s.test.begin(), s.test.end()));

    std::set<std::size_t> seen(s.train.begin(), s.train.end());
    seen.insert(s.test.begin(), s.test.end());
    CHECK(seen.size() == labels.size());

    auto count = [&](const std::vector<std::size_t>& rows, int cls) {
        std::size_t n = 0;
        for (auto r : rows) n += labels[r] == cls ? 1 : 0;
        return n;
    };
    CHECK(count(s.train, 0) == 4);
    CHECK(count(s.train, 1) == 2);
    CHECK(count(s.train, 2) == 1);

    // extreme fractions still leave a row on each side
    auto hi = stratified_split_indices(labels, 7, 0.99);
    CHECK(count(hi.test, 2) == 1);
    auto lo = stratified_split_indices(labels, 7, 0.01);
    CHECK(count(lo.train, 2) == 1);

    CHECK(stratified_split_indices(labels, 8, 0.7).train != s.train);
    CHECK(stratified_split_indices(labels, 7, 0.7).train == s.train);

    std::vector<int> lone{0, 0, 1};
    CHECK_THROWS_AS(stratified_split_indices(lone, 1, 0.7), ValidationError);
}

TEST_CASE("split_dataset carries rows through untouched") {
    auto m = toy_matrix(12, 3);
    auto d = split_dataset(m, 42, 0.7);
    CHECK(d.seed == 42);
    CHECK(d.train.rows() + d.test.rows() == m.rows());
    CHECK(d.train.schema.hash() == m.schema.hash());

    // every train row is a verbatim copy of some source row
    for (std::size_t r = 0; r < d.train.rows(); ++r) {
        auto it = std::find(m.entity_ids.begin(), m.entity_ids.end(), d.train.entity_ids[r]);
        REQUIRE(it != m.entity_ids.end());
        auto src = std::size_t(it - m.entity_ids.begin());
        CHECK(d.train.values.row(Eigen::Index(r)) == m.values.row(Eigen::Index(src)));
        CHECK(d.train.labels[r] == m.labels[src]);
    }

    auto sub = subset_rows(m, {0, 5, 7});
    CHECK(sub.rows() == 3);
    CHECK(sub.entity_ids == std::vector<EntityId>{0, 15, 21});
    CHECK(sub.values.row(1) == m.values.row(5));

    auto idx = label_indices(m);
    CHECK(idx[0] == 0);
    CHECK(idx[4] == 1);

    auto cols = select_columns(m.values, {3, 0});
    CHECK(cols.cols() == 2);
    CHECK(cols.col(0) == m.values.col(3));
    CHECK(cols.col(1) == m.values.col(0));
}

TEST_CASE("metrics recount a hand confusion table") {
    std::vector<int> truth{0, 0, 1, 2, 1};
    std::vector<int> pred{0, 1, 1, 2, 2};
    auto m = compute_metrics(truth, pred);

    CHECK(m.total == 5);
    CHECK(m.confusion[0][0] == 1);
    CHECK(m.confusion[0][1] == 1);
    CHECK(m.confusion[1][2] == 1);
    CHECK(m.accuracy == doctest::Approx(0.6));
    CHECK(m.recall[0] == doctest::Approx(0.5));
    CHECK(m.precision[0] == doctest::Approx(1.0));
    CHECK(m.f1[0] == doctest::Approx(2.0 / 3.0));
    CHECK(m.precision[1] == doctest::Approx(0.5));
    CHECK(m.recall[2] == doctest::Approx(1.0));
    CHECK(m.f1[4] == 0.0); // absent class contributes zero, not NaN
    CHECK(m.macro_precision == doctest::Approx((1.0 + 0.5 + 0.5) / 5.0));
    CHECK(m.macro_f1 == doctest::Approx((2.0 / 3.0 + 0.5 + 2.0 / 3.0) / 5.0));
    CHECK(m.support(1) == 2);

    CHECK_THROWS_AS(compute_metrics({}, {}), ValidationError);
    CHECK_THROWS_AS(compute_metrics({0, 1}, {0}), ValidationError);

    std::ostringstream os;
    write_metrics_csv(m, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "metric,class,value");
    std::getline(is, line);
    CHECK(line == "accuracy,,0.600000");
    std::getline(is, line);
    CHECK(line.rfind("macro_f1,,0.3666", 0) == 0);
    int lines = 3; // already consumed header, accuracy, macro_f1
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 1 + 3 + 15 + 25); // header, overall, per-class, confusion
}

TEST_CASE("logreg objective gradient matches central differences") {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 120; ++trial) {
        int n = 8 + int(uniform_index(rng, 20));
        int d = 2 + int(uniform_index(rng, 5));
        Eigen::MatrixXd X(n, d); // intercept lives in beta(d), not in X
        Eigen::VectorXd y(n), beta(d + 1);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < d; ++c) X(r, c) = uniform_in(rng, -2.0, 2.0);
            y(r) = uniform01(rng) < 0.5 ? 0.0 : 1.0;
        }
        for (int c = 0; c <= d; ++c) beta(c) = uniform_in(rng, -1.0, 1.0);
        double lambda = uniform_in(rng, 0.0, 3.0);

        auto obj = binary_logreg_objective(X, y, beta, lambda);
        REQUIRE(obj.gradient.size() == d + 1);
        const double h = 1e-6;
        for (int c = 0; c <= d; ++c) {
            Eigen::VectorXd up = beta, dn = beta;
            up(c) += h;
            dn(c) -= h;
            double fd = (binary_logreg_objective(X, y, up, lambda).loss -
                         binary_logreg_objective(X, y, dn, lambda).loss) /
                        (2.0 * h);
            double denom = std::max({std::abs(fd), std::abs(obj.gradient(c)), 1e-8});
            worst = std::max(worst, std::abs(fd - obj.gradient(c)) / denom);
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("logreg separates separable classes and respects regularization") {
    std::mt19937_64 rng(13);
    Eigen::MatrixXd X(40, 2);
    std::vector<int> y(40);
    for (int r = 0; r < 40; ++r) {
        double cls = r % 2;
        X(r, 0) = (cls == 0 ? -1.0 : 1.0) + uniform_in(rng, -0.3, 0.3);
        X(r, 1) = uniform_in(rng, -1.0, 1.0);
        y[std::size_t(r)] = int(cls);
    }
    auto model = train_logreg(X, y, 1.0);
    CHECK(model.n_classes() == 2);
    CHECK(model.n_features() == 2);
    auto pred = logreg_predict(model, X);
    CHECK(std::equal(pred.begin(), pred.end(), y.begin()));

    auto proba = logreg_predict_proba(model, X);
    for (int r = 0; r < proba.rows(); ++r)
        CHECK(proba.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));

    // stronger penalty shrinks the slope
    auto tight = train_logreg(X, y, 0.01);
    CHECK(tight.weights.leftCols(2).norm() < model.weights.leftCols(2).norm());

    CHECK_THROWS_AS(train_logreg(X, y, 0.0), ConfigError);
    Eigen::MatrixXd bad = X;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(train_logreg(bad, y, 1.0), ValidationError);

    // argmax ties break toward the lower class
    LogisticModel flat;
    flat.weights = Eigen::MatrixXd::Zero(3, 3);
    auto p = logreg_predict(flat, X);
    for (int v : p) CHECK(v == 0);
}

TEST_CASE("gbdt training loss never increases") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXd X;
    std::vector<int> y;
    blobs(rng, 120, X, y);
    GbdtParams p;
    p.min_samples_leaf = 5;
    p.max_iters = 60;
    p.early_stopping_rounds = 0;
    auto model = train_gbdt(X, y, p);

    REQUIRE(!model.train_loss.empty());
    CHECK(model.train_loss.front() <= model.init_train_loss + 1e-12);
    for (std::size_t i = 1; i < model.train_loss.size(); ++i)
        CHECK(model.train_loss[i] <= model.train_loss[i - 1] + 1e-12);
    CHECK(model.best_iteration == int(model.stages.size()));
    CHECK(model.valid_loss.empty());
    for (double s : model.stage_scale) CHECK(s <= 1.0);

    auto proba = gbdt_predict_proba(model, X);
    for (int r = 0; r < proba.rows(); ++r)
        CHECK(proba.row(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gbdt learns xor within fifty stages") {
    Eigen::MatrixXd X(40, 2);
    std::vector<int> y(40);
    for (int r = 0; r < 40; ++r) {
        int a = r % 2, b2 = (r / 2) % 2;
        X(r, 0) = a;
        X(r, 1) = b2;
        y[std::size_t(r)] = a ^ b2;
    }
    GbdtParams p;
    p.min_samples_leaf = 1;
    p.max_leaves = 4;
    p.max_iters = 50;
    p.early_stopping_rounds = 0;
    auto model = train_gbdt(X, y, p);
    CHECK(int(model.stages.size()) <= 50);
    auto pred = gbdt_predict(model, X);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i] ? 1 : 0;
    CHECK(hits == y.size());
}

TEST_CASE("early stopping halts after the configured stall") {
    std::mt19937_64 rng(19);
    Eigen::MatrixXd X, Xv;
    std::vector<int> y, yv;
    blobs(rng, 150, X, y);
    // noise labels: validation loss cannot keep improving
    blobs(rng, 60, Xv, yv);
    for (auto& v : yv) v = int(uniform_index(rng, 3));

    GbdtParams p;
    p.min_samples_leaf = 5;
    p.max_iters = 400;
    p.early_stopping_rounds = 10;
    auto model = train_gbdt(X, y, p, &Xv, &yv);

    REQUIRE(!model.valid_loss.empty());
    CHECK(model.valid_loss.size() == model.stages.size());
    REQUIRE(int(model.stages.size()) < p.max_iters); // it did stop
    CHECK(int(model.stages.size()) == model.best_iteration + p.early_stopping_rounds);
    double best = model.valid_loss[std::size_t(model.best_iteration - 1)];
    for (double v : model.valid_loss) CHECK(best <= v + 1e-12);
}

TEST_CASE("feature importance sums the used stages' split gains") {
    std::mt19937_64 rng(23);
    Eigen::MatrixXd X;
    std::vector<int> y;
    blobs(rng, 120, X, y);
    GbdtParams p;
    p.min_samples_leaf = 5;
    p.max_iters = 30;
    p.early_stopping_rounds = 0;
    auto model = train_gbdt(X, y, p);

    auto ranked = feature_importance(model);
    REQUIRE(int(ranked.size()) == model.n_features); // every feature listed
    double total = 0.0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        total += ranked[i].second;
        if (i > 0) {
            CHECK(ranked[i].second <= ranked[i - 1].second);
            if (ranked[i].second == ranked[i - 1].second)
                CHECK(ranked[i].first > ranked[i - 1].first);
        }
    }
    double expect = 0.0;
    for (int m = 0; m < model.best_iteration; ++m)
        for (const auto& tree : model.stages[std::size_t(m)]) expect += tree.total_gain();
    CHECK(total == doctest::Approx(expect).epsilon(1e-12));

    // the two informative columns carry the gain
    CHECK((ranked[0].first == 0 || ranked[0].first == 1));
    CHECK((ranked[1].first == 0 || ranked[1].first == 1));

    GbdtParams bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(train_gbdt(X, y, bad), ConfigError);
    std::vector<int> ones(y.size(), 1);
    CHECK_THROWS_AS(train_gbdt(X, ones, p), ValidationError);
}

TEST_CASE("models survive a save/load round trip") {
    std::mt19937_64 rng(29);
    Eigen::MatrixXd X;
    std::vector<int> y;
    blobs(rng, 100, X, y);
    GbdtParams p;
    p.min_samples_leaf = 5;
    p.max_iters = 15;
    p.early_stopping_rounds = 0;
    auto gbdt = train_gbdt(X, y, p);
    std::uint64_t hash = FeatureSchema::full().hash();

    std::stringstream buf;
    save_gbdt_model(gbdt, hash, buf);
    CHECK(model_kind(buf) == "gbdt");
    std::stringstream again(buf.str());
    auto loaded = load_gbdt_model(again, &hash);
    CHECK(loaded.best_iteration == gbdt.best_iteration);
    CHECK(loaded.stages.size() == gbdt.stages.size());
    CHECK(gbdt_predict_proba(loaded, X) == gbdt_predict_proba(gbdt, X));

    std::uint64_t other = hash ^ 1;
    std::stringstream mismatch(buf.str());
    CHECK_THROWS_AS(load_gbdt_model(mismatch, &other), ParseError);

    auto lr = train_logreg(X, y, 0.7);
    std::stringstream lbuf;
    save_logreg_model(lr, hash, lbuf);
    CHECK(model_kind(lbuf) == "logreg");
    std::stringstream lagain(lbuf.str());
    auto lr2 = load_logreg_model(lagain, &hash);
    CHECK(lr2.weights == lr.weights);
    CHECK(lr2.inverse_l2 == lr.inverse_l2);

    std::stringstream wrong(lbuf.str());
    CHECK_THROWS_AS(load_gbdt_model(wrong), ParseError);
    std::stringstream junk("not json");
    CHECK_THROWS_AS(load_logreg_model(junk), ParseError);
}

TEST_CASE("gp finds the minimum of a smooth bowl") {
    auto f = [](double t) { return (t - 0.3) * (t - 0.3); };
    auto r = gp_optimize(f, 0.0, 1.0, 50, 10, 7);
    CHECK(std::abs(r.best_theta - 0.3) < 0.05);
    REQUIRE(r.trace.size() == 50);
    double best = r.trace[0].objective;
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].iteration == int(i) + 1);
        CHECK(r.trace[i].finite);
        best = std::min(best, r.trace[i].objective);
    }
    CHECK(r.best_objective == doctest::Approx(best));

    std::ostringstream os;
    write_gp_trace_csv(r, os);
    CHECK(os.str().rfind("iteration,theta,loss\n", 0) == 0);
}

TEST_CASE("gp substitutes the worst seen value for non-finite scores") {
    // most of the box is poisoned, so the init draws are certain to step in it
    auto f = [](double t) { return t >= 0.3 ? std::nan("") : (t - 0.2) * (t - 0.2); };
    auto r = gp_optimize(f, 0.0, 1.0, 40, 10, 3);
    CHECK(std::isfinite(r.best_objective));
    CHECK(r.best_theta < 0.3);
    double worst = -1.0;
    bool saw_nan = false;
    for (const auto& pt : r.trace) {
        CHECK(std::isfinite(pt.objective));
        if (pt.finite) worst = std::max(worst, pt.objective);
        if (!pt.finite) {
            saw_nan = true;
            CHECK(pt.objective >= worst - 1e-12); // substituted, not invented
        }
    }
    CHECK(saw_nan);
}

TEST_CASE("expected improvement vanishes at evaluated points") {
    std::vector<double> thetas{0.1, 0.4, 0.65, 0.9};
    std::vector<double> values;
    for (double t : thetas) values.push_back((t - 0.5) * (t - 0.5));
    for (double q = 0.0; q <= 1.0; q += 0.01)
        CHECK(gp_expected_improvement(thetas, values, 0.0, 1.0, q) >= 0.0);
    for (double t : thetas)
        CHECK(gp_expected_improvement(thetas, values, 0.0, 1.0, t) < 1e-4);
}

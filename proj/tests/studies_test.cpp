#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <sstream>

#include "elens/errors.hpp"
#include "elens/rng.hpp"
#include "elens/studies.hpp"

using namespace elens;

namespace {

// Full-width matrix with one indicator column per class. Classes 3 and 4
// share their early indicator; only a motif3 column tells them apart, so
// prefixes below motif3 must confuse exactly that pair.
FeatureMatrix planted(int per_class, std::uint64_t seed) {
    FeatureMatrix m;
    m.schema = FeatureSchema::full();
    int rows = per_class * kNumCategories;
    m.values.resize(rows, m.schema.width());
    std::mt19937_64 rng(seed);
    for (int r = 0; r < rows; ++r) {
        int cls = r % kNumCategories;
        m.entity_ids.push_back(EntityId(r));
        m.entity_idxs.push_back(EntityIdx(r));
        m.labels.push_back(Category(cls));
        m.truncated.push_back(0);
        for (int c = 0; c < m.schema.width(); ++c) m.values(r, c) = uniform_in(rng, -1.0, 1.0);
        switch (cls) {
        case 0: m.values(r, 0) += 5.0; break;   // address group
        case 1: m.values(r, 11) += 5.0; break;  // entity group
        case 2: m.values(r, 30) += 5.0; break;  // temporal group
        default: m.values(r, 6) += 5.0; break;  // classes 3 and 4 look alike
        }
        if (cls == 4) m.values(r, 300) += 5.0; // motif3 group
    }
    return m;
}

struct Split {
    FeatureMatrix train, test;
    Split() {
        auto d = split_dataset(planted(30, 99), 5);
        train = std::move(d.train);
        test = std::move(d.test);
    }
};

} // namespace

TEST_CASE("evaluate_model agrees with manual prediction plus metrics") {
    Split s;
    auto y_train = label_indices(s.train);
    auto y_test = label_indices(s.test);

    auto lr = train_logreg(s.train.values, y_train);
    auto got = evaluate_model(lr, s.test);
    auto want = compute_metrics(y_test, logreg_predict(lr, s.test.values));
    CHECK(got.accuracy == want.accuracy);
    CHECK(got.confusion == want.confusion);

    auto gbdt = train_gbdt_holdout(s.train.values, y_train, GbdtParams{}, 1);
    auto g2 = evaluate_model(gbdt, s.test);
    auto w2 = compute_metrics(y_test, gbdt_predict(gbdt, s.test.values));
    CHECK(g2.accuracy == w2.accuracy);
    CHECK(g2.macro_f1 == w2.macro_f1);
}

TEST_CASE("holdout training is reproducible and actually validates") {
    Split s;
    auto y = label_indices(s.train);
    auto a = train_gbdt_holdout(s.train.values, y, GbdtParams{}, 17);
    auto b = train_gbdt_holdout(s.train.values, y, GbdtParams{}, 17);

    CHECK(!a.valid_loss.empty());
    CHECK(a.best_iteration >= 1);
    CHECK(a.best_iteration <= int(a.stages.size()));
    CHECK(a.stages.size() == b.stages.size());
    CHECK(a.train_loss == b.train_loss);
    CHECK(gbdt_predict_proba(a, s.test.values) == gbdt_predict_proba(b, s.test.values));
}

TEST_CASE("incremental study walks the fixed prefixes with both algorithms") {
    Split s;
    std::uint64_t seed = 23;
    auto rows = incremental_groups_study(s.train, s.test, seed);
    REQUIRE(rows.size() == 14);

    const char* order[] = {"address", "entity", "motif1", "temporal",
                           "centrality", "motif2", "motif3"};
    const int widths[] = {10, 18, 62, 78, 120, 201, 315};
    for (int i = 0; i < 7; ++i) {
        CHECK(rows[std::size_t(2 * i)].group == order[i]);
        CHECK(rows[std::size_t(2 * i)].alg == "logreg");
        CHECK(rows[std::size_t(2 * i)].n_features == widths[i]);
        CHECK(rows[std::size_t(2 * i + 1)].group == order[i]);
        CHECK(rows[std::size_t(2 * i + 1)].alg == "gbdt");
        CHECK(rows[std::size_t(2 * i + 1)].n_features == widths[i]);
    }

    // independent re-run of the entity-prefix logreg row: the first 18
    // schema columns are exactly the address + entity groups
    auto y_train = label_indices(s.train);
    auto y_test = label_indices(s.test);
    Eigen::MatrixXd Xp = s.train.values.leftCols(18);
    auto lr = train_logreg(Xp, y_train);
    auto want = compute_metrics(y_test, logreg_predict(lr, Eigen::MatrixXd(s.test.values.leftCols(18))));
    CHECK(rows[2].metrics.accuracy == want.accuracy);
    CHECK(rows[2].metrics.confusion == want.confusion);

    // classes 3/4 are indistinguishable before motif3 and trivial after
    const auto& m2 = rows[11].metrics; // motif2 prefix, gbdt
    const auto& m3 = rows[13].metrics; // motif3 prefix, gbdt
    CHECK(m3.accuracy > m2.accuracy);
    CHECK(m3.accuracy == doctest::Approx(1.0));

    std::ostringstream os;
    write_study_rows_csv(rows, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "group,n_features,alg,accuracy,f1,precision");
    std::getline(is, line);
    CHECK(line.rfind("address,10,logreg,", 0) == 0);
    int n = 1;
    while (std::getline(is, line)) ++n;
    CHECK(n == 14);
}

TEST_CASE("selection curve with k = width reproduces the full models") {
    Split s;
    std::uint64_t seed = 23;
    int width = s.train.schema.width();
    std::vector<int> identity(static_cast<std::size_t>(width));
    std::iota(identity.begin(), identity.end(), 0);

    auto points = selection_curve(s.train, s.test, identity, {1, 20, width}, seed);
    REQUIRE(points.size() == 6);
    CHECK(points[0].k == 1);
    CHECK(points[0].alg == "logreg");
    CHECK(points[1].alg == "gbdt");

    // the full study trains the same estimators on the same columns
    auto rows = incremental_groups_study(s.train, s.test, seed);
    CHECK(points[4].metrics.accuracy == rows[12].metrics.accuracy);
    CHECK(points[4].metrics.confusion == rows[12].metrics.confusion);
    CHECK(points[5].metrics.accuracy == rows[13].metrics.accuracy);
    CHECK(points[5].metrics.confusion == rows[13].metrics.confusion);

    // ranking the motif3 indicator first makes k = 1 solve the 3-vs-4 pair
    std::vector<int> fronted = identity;
    std::swap(fronted[0], fronted[300]);
    auto one = selection_curve(s.train, s.test, fronted, {1}, seed);
    CHECK(one[1].metrics.recall[4] == doctest::Approx(1.0));

    std::vector<int> dup = identity;
    dup[1] = 0;
    CHECK_THROWS_AS(selection_curve(s.train, s.test, dup, {1}, seed), ValidationError);
    std::vector<int> shorter(identity.begin(), identity.end() - 1);
    CHECK_THROWS_AS(selection_curve(s.train, s.test, shorter, {1}, seed), ValidationError);
    CHECK_THROWS_AS(selection_curve(s.train, s.test, identity, {0}, seed), ConfigError);
    CHECK_THROWS_AS(selection_curve(s.train, s.test, identity, {width + 1}, seed), ConfigError);

    std::ostringstream os;
    write_selection_curve_csv(points, os);
    CHECK(os.str().rfind("k,alg,accuracy,f1\n1,logreg,", 0) == 0);
}

TEST_CASE("tuning searches the documented boxes deterministically") {
    Split s;
    auto a = tune_gbdt(s.train, 31, 12);
    auto b = tune_gbdt(s.train, 31, 12);
    REQUIRE(a.search.trace.size() == 12);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(a.search.trace[i].theta == b.search.trace[i].theta);
        CHECK(a.search.trace[i].theta >= kGbdtLearningRateLo);
        CHECK(a.search.trace[i].theta <= kGbdtLearningRateHi);
        CHECK(a.search.trace[i].objective >= 0.0);
        CHECK(a.search.trace[i].objective <= 1.0); // 1 - macro F1
    }
    CHECK(a.search.best_theta == b.search.best_theta);
    CHECK(a.model.params.learning_rate == a.search.best_theta);
    CHECK(evaluate_model(a.model, s.test).accuracy > 0.5);

    auto lr = tune_logreg(s.train, 31, 10);
    REQUIRE(lr.search.trace.size() == 10);
    CHECK(lr.model.inverse_l2 == lr.search.best_theta);
    CHECK(lr.model.inverse_l2 >= kLogregInverseL2Lo);
    CHECK(lr.model.inverse_l2 <= kLogregInverseL2Hi);
    CHECK(lr.model.n_features() == s.train.schema.width());
}

TEST_CASE("bootstrap rank stability favors the planted columns") {
    Split s;
    auto rows = bootstrap_rank_stability(s.train, GbdtParams{}, 4, 7);
    int width = s.train.schema.width();
    REQUIRE(int(rows.size()) == width);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mean_rank >= 1.0);
        CHECK(rows[i].mean_rank <= double(width));
        CHECK(rows[i].std_rank >= 0.0);
        CHECK(rows[i].top20_share >= 0.0);
        CHECK(rows[i].top20_share <= 1.0);
        if (i > 0) {
            CHECK(rows[i].mean_rank >= rows[i - 1].mean_rank);
            if (rows[i].mean_rank == rows[i - 1].mean_rank)
                CHECK(rows[i].feature > rows[i - 1].feature);
        }
    }

    auto rank_of = [&](int feature) {
        for (const auto& r : rows)
            if (r.feature == feature) return r.mean_rank;
        REQUIRE(false);
        return 0.0;
    };
    for (int planted_col : {0, 6, 11, 30, 300})
        CHECK(rank_of(planted_col) < rank_of(250)); // beats a noise column

    auto again = bootstrap_rank_stability(s.train, GbdtParams{}, 4, 7);
    CHECK(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].feature == rows[i].feature);
        CHECK(again[i].mean_rank == rows[i].mean_rank);
    }

    std::ostringstream os;
    write_rank_stability_csv(s.train.schema, rows, os);
    CHECK(os.str().rfind("feature,mean_rank,std_rank,top20_share\n", 0) == 0);

    std::ostringstream imp;
    auto y = label_indices(s.train);
    auto model = train_gbdt_holdout(s.train.values, y, GbdtParams{}, 3);
    auto ranked = feature_importance(model);
    write_importance_csv(s.train.schema, ranked, imp);
    std::string first = imp.str().substr(0, imp.str().find('\n'));
    CHECK(first == "rank,feature,gain");
    std::string second = imp.str().substr(imp.str().find('\n') + 1);
    second = second.substr(0, second.find('\n'));
    CHECK(second.rfind("1,", 0) == 0);
    CHECK(second.find(s.train.schema.label(ranked[0].first)) != std::string::npos);
}

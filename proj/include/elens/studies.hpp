#ifndef ELENS_STUDIES_HPP
#define ELENS_STUDIES_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "elens/dataset.hpp"
#include "elens/gbdt.hpp"
#include "elens/gp.hpp"
#include "elens/logreg.hpp"
#include "elens/metrics.hpp"

namespace elens {

// Search boxes, one scalar per model.
inline constexpr double kGbdtLearningRateLo = 0.01;
inline constexpr double kGbdtLearningRateHi = 0.5;
inline constexpr double kLogregInverseL2Lo = 0.01;
inline constexpr double kLogregInverseL2Hi = 3.0;

// Share of the training split carved off (stratified) for early stopping and
// tuning objectives.
inline constexpr double kValidationFraction = 0.15;

Metrics evaluate_model(const BoostedEnsemble& model, const FeatureMatrix& test);
Metrics evaluate_model(const LogisticModel& model, const FeatureMatrix& test);

// Trains with a stratified validation carve of (X, y) for early stopping; the
// carve uses `seed` directly, so equal seeds reproduce the carve.
BoostedEnsemble train_gbdt_holdout(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                   const GbdtParams& params, std::uint64_t seed);

struct TunedGbdt {
    BoostedEnsemble model;
    GpResult search; // over the learning rate
};
struct TunedLogreg {
    LogisticModel model;
    GpResult search; // over the inverse L2 strength
};

// GP search minimizing 1 - macro-F1 on a validation carve of `train`. The
// returned GBDT is the best carve-trained model; the returned LR retrains on
// all of `train` at the best strength.
TunedGbdt tune_gbdt(const FeatureMatrix& train, std::uint64_t seed, int n_iters = 50);
TunedLogreg tune_logreg(const FeatureMatrix& train, std::uint64_t seed, int n_iters = 50);

struct StudyRow {
    std::string group; // group completing the cumulative prefix
    int n_features = 0;
    std::string alg; // "logreg" | "gbdt"
    Metrics metrics;
};

// Cumulative prefixes address, entity, motif1, temporal, centrality, motif2,
// motif3 (widths 10, 18, 62, 78, 120, 201, 315), both algorithms with default
// parameters, one shared train/test split for every row.
std::vector<StudyRow> incremental_groups_study(const FeatureMatrix& train,
                                               const FeatureMatrix& test, std::uint64_t seed);

// CSV "group,n_features,alg,accuracy,f1,precision".
void write_study_rows_csv(const std::vector<StudyRow>& rows, std::ostream& out);

struct SelectionPoint {
    int k = 0;
    std::string alg;
    Metrics metrics;
};

inline const std::vector<int> kSelectionKs = {1, 5, 10, 15, 20, 50, 100, 315};

// `ranking` lists feature indices by descending importance and must cover the
// whole schema. The top-k columns are restored to schema order before
// training, so k = width reproduces the full model exactly.
std::vector<SelectionPoint> selection_curve(const FeatureMatrix& train, const FeatureMatrix& test,
                                            const std::vector<int>& ranking,
                                            const std::vector<int>& ks, std::uint64_t seed);

// CSV "k,alg,accuracy,f1".
void write_selection_curve_csv(const std::vector<SelectionPoint>& points, std::ostream& out);

// CSV "rank,feature,gain" for a ranked importance list.
void write_importance_csv(const FeatureSchema& schema,
                          const std::vector<std::pair<int, double>>& ranked, std::ostream& out);

struct RankStability {
    int feature = 0;
    double mean_rank = 0.0; // 1-based importance ranks over resamples
    double std_rank = 0.0;
    double top20_share = 0.0; // fraction of resamples placing it in the top 20
};

// Gain-importance rank stability under stratified bootstrap resampling of the
// training rows.
std::vector<RankStability> bootstrap_rank_stability(const FeatureMatrix& train,
                                                    const GbdtParams& params, int n_resamples,
                                                    std::uint64_t seed);

// CSV "feature,mean_rank,std_rank,top20_share", most stable first.
void write_rank_stability_csv(const FeatureSchema& schema,
                              const std::vector<RankStability>& rows, std::ostream& out);

} // namespace elens

#endif

#ifndef ELENS_DATASET_HPP
#define ELENS_DATASET_HPP

#include <cstdint>
#include <vector>

#include "elens/features.hpp"

namespace elens {

struct Dataset {
    FeatureMatrix train;
    FeatureMatrix test;
    std::uint64_t seed = 0;
};

// Stratified split: per class, round(train_fraction * n) rows go to train,
// clamped so both sides keep at least one row. Row order within each side
// follows the original matrix. Throws ValidationError if any class has fewer
// than 2 rows.
Dataset split_dataset(const FeatureMatrix& m, std::uint64_t seed, double train_fraction = 0.7);

// Row-index core of the stratified split, over integer class labels. Both
// sides come back sorted ascending.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
SplitIndices stratified_split_indices(const std::vector<int>& labels, std::uint64_t seed,
                                      double train_fraction);

FeatureMatrix subset_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows);

// Class indices per row.
std::vector<int> label_indices(const FeatureMatrix& m);

// Column selection for model input; indices refer to m.values columns.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& values, const std::vector<int>& columns);

} // namespace elens

#endif

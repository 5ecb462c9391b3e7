#include "elens/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "elens/errors.hpp"
#include "elens/rng.hpp"

namespace elens {

FeatureMatrix subset_rows(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.schema = m.schema;
    out.values.resize(Eigen::Index(rows.size()), m.values.cols());
    Eigen::Index r = 0;
    for (std::size_t i : rows) {
        out.entity_ids.push_back(m.entity_ids.at(i));
        out.entity_idxs.push_back(m.entity_idxs.at(i));
        out.labels.push_back(m.labels.at(i));
        out.truncated.push_back(m.truncated.at(i));
        out.values.row(r++) = m.values.row(Eigen::Index(i));
    }
    return out;
}

std::vector<int> label_indices(const FeatureMatrix& m) {
    std::vector<int> y;
    y.reserve(m.labels.size());
    for (Category c : m.labels) y.push_back(int(c));
    return y;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& values, const std::vector<int>& columns) {
    Eigen::MatrixXd out(values.rows(), Eigen::Index(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        int c = columns[j];
        if (c < 0 || c >= values.cols())
            throw LookupError("column index " + std::to_string(c) + " out of range");
        out.col(Eigen::Index(j)) = values.col(c);
    }
    return out;
}

SplitIndices stratified_split_indices(const std::vector<int>& labels, std::uint64_t seed,
                                      double train_fraction) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train fraction must lie in (0, 1)");

    std::array<std::vector<std::size_t>, kNumCategories> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int c = labels[i];
        if (c < 0 || c >= kNumCategories)
            throw ValidationError("label index out of range");
        by_class[std::size_t(c)].push_back(i);
    }

    std::mt19937_64 rng(seed);
    SplitIndices out;
    for (int c = 0; c < kNumCategories; ++c) {
        auto& rows = by_class[std::size_t(c)];
        if (rows.empty()) continue;
        if (rows.size() < 2)
            throw ValidationError(std::string("class ") + kCategoryNames[c] +
                                  " has a single row; stratified split needs at least 2");
        shuffle_fy(rows, rng);
        std::size_t n_train = std::size_t(std::llround(train_fraction * double(rows.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_train ? out.train : out.test).push_back(rows[i]);
    }
    if (out.train.empty() || out.test.empty())
        throw ValidationError("split produced an empty partition");
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Dataset split_dataset(const FeatureMatrix& m, std::uint64_t seed, double train_fraction) {
    auto idx = stratified_split_indices(label_indices(m), seed, train_fraction);
    Dataset d;
    d.seed = seed;
    d.train = subset_rows(m, idx.train);
    d.test = subset_rows(m, idx.test);
    return d;
}

} // namespace elens

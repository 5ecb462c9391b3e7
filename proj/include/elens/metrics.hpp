#ifndef ELENS_METRICS_HPP
#define ELENS_METRICS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "elens/txmodel.hpp"

namespace elens {

// Multiclass classification metrics over the fixed category order. Per-class
// precision/recall with zero denominators evaluate to 0; macro averages run
// over all five classes.
struct Metrics {
    std::array<std::array<std::uint64_t, kNumCategories>, kNumCategories>
        confusion{}; // [true][predicted]
    std::uint64_t total = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double macro_precision = 0.0;
    std::array<double, kNumCategories> recall{};
    std::array<double, kNumCategories> precision{};
    std::array<double, kNumCategories> f1{};

    std::uint64_t support(int cls) const;
};

// Throws ValidationError on size mismatch or empty input.
Metrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted);

// Long-form CSV: "metric,class,value"; overall rows first, then per-class
// rows in class order, then confusion counts row-major.
void write_metrics_csv(const Metrics& m, std::ostream& out);

} // namespace elens

#endif

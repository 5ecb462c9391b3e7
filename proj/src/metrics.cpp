#include "elens/metrics.hpp"

#include <cstdio>
#include <ostream>

#include "elens/errors.hpp"

namespace elens {

std::uint64_t Metrics::support(int cls) const {
    std::uint64_t s = 0;
    for (int j = 0; j < kNumCategories; ++j) s += confusion[std::size_t(cls)][std::size_t(j)];
    return s;
}

Metrics compute_metrics(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
        throw ValidationError("metrics: truth and prediction sizes differ");
    if (truth.empty())
        throw ValidationError("metrics: empty evaluation set");

    Metrics m;
    m.total = truth.size();
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        int t = truth[i];
        int p = predicted[i];
        if (t < 0 || t >= kNumCategories || p < 0 || p >= kNumCategories)
            throw ValidationError("metrics: class index out of range");
        m.confusion[std::size_t(t)][std::size_t(p)] += 1;
        if (t == p) ++correct;
    }
    m.accuracy = double(correct) / double(m.total);

    for (int c = 0; c < kNumCategories; ++c) {
        std::uint64_t tp = m.confusion[std::size_t(c)][std::size_t(c)];
        std::uint64_t fn = m.support(c) - tp;
        std::uint64_t fp = 0;
        for (int t = 0; t < kNumCategories; ++t)
            if (t != c) fp += m.confusion[std::size_t(t)][std::size_t(c)];

        double prec = (tp + fp) ? double(tp) / double(tp + fp) : 0.0;
        double rec = (tp + fn) ? double(tp) / double(tp + fn) : 0.0;
        double f1 = (prec + rec > 0) ? 2.0 * prec * rec / (prec + rec) : 0.0;
        m.precision[std::size_t(c)] = prec;
        m.recall[std::size_t(c)] = rec;
        m.f1[std::size_t(c)] = f1;
        m.macro_precision += prec / kNumCategories;
        m.macro_f1 += f1 / kNumCategories;
    }
    return m;
}

void write_metrics_csv(const Metrics& m, std::ostream& out) {
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return buf;
    };
    out << "metric,class,value\n";
    out << "accuracy,," << num(m.accuracy) << '\n';
    out << "macro_f1,," << num(m.macro_f1) << '\n';
    out << "macro_precision,," << num(m.macro_precision) << '\n';
    for (int c = 0; c < kNumCategories; ++c) {
        out << "recall," << kCategoryNames[c] << ',' << num(m.recall[std::size_t(c)]) << '\n';
        out << "precision," << kCategoryNames[c] << ',' << num(m.precision[std::size_t(c)])
            << '\n';
        out << "f1," << kCategoryNames[c] << ',' << num(m.f1[std::size_t(c)]) << '\n';
    }
    for (int t = 0; t < kNumCategories; ++t)
        for (int p = 0; p < kNumCategories; ++p)
            out << "confusion," << kCategoryNames[t] << '>' << kCategoryNames[p] << ','
                << m.confusion[std::size_t(t)][std::size_t(p)] << '\n';
}

} // namespace elens

#ifndef ELENS_MODEL_IO_HPP
#define ELENS_MODEL_IO_HPP

#include <cstdint>
#include <iosfwd>

#include "elens/gbdt.hpp"
#include "elens/logreg.hpp"

namespace elens {

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON with the class order and the feature-schema hash the model
// was trained against. Loading verifies version, kind, class order, and
// (when the caller passes one) the schema hash.
void save_gbdt_model(const BoostedEnsemble& model, std::uint64_t schema_hash,
                     std::ostream& out);
BoostedEnsemble load_gbdt_model(std::istream& in, const std::uint64_t* expect_schema = nullptr);

void save_logreg_model(const LogisticModel& model, std::uint64_t schema_hash,
                       std::ostream& out);
LogisticModel load_logreg_model(std::istream& in,
                                const std::uint64_t* expect_schema = nullptr);

// Peeks the "model" field so callers can dispatch; rewinds nothing, so pass a
// fresh stream to the loader afterwards.
std::string model_kind(std::istream& in);

} // namespace elens

#endif

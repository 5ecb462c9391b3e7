#ifndef ELENS_FEATURES_HPP
#define ELENS_FEATURES_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elens/centrality.hpp"
#include "elens/graph.hpp"
#include "elens/motifs.hpp"

namespace elens {

enum class FeatureGroup : int {
    Address = 0,
    Entity,
    Temporal,
    Centrality,
    Motif1,
    Motif2,
    Motif3,
};
inline constexpr int kNumFeatureGroups = 7;
inline constexpr std::array<int, kNumFeatureGroups> kGroupSizes = {10, 8, 16, 42, 44, 81, 114};
inline constexpr int kTotalFeatures = 315;

std::string_view to_string(FeatureGroup g);

struct FeatureColumn {
    std::string name;
    FeatureGroup group;
    std::string units;
};

// Fixed, versioned column layout. The full schema concatenates the seven
// groups in declaration order; subsets preserve that order.
class FeatureSchema {
public:
    static const FeatureSchema& full();
    FeatureSchema subset(const std::vector<FeatureGroup>& groups) const;

    const std::vector<FeatureColumn>& columns() const { return columns_; }
    int width() const { return int(columns_.size()); }

    // Column label used in CSV headers: "<group>.<name>".
    std::string label(int column) const;
    int column_index(std::string_view label) const; // -1 when absent

    std::uint64_t hash() const; // stable digest of labels, for model files
    void write_json(std::ostream& out) const;

    static constexpr int kVersion = 1;

private:
    std::vector<FeatureColumn> columns_;
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::vector<EntityId> entity_ids;   // canonical ids, one per row
    std::vector<EntityIdx> entity_idxs; // dense graph indices
    std::vector<Category> labels;
    Eigen::MatrixXd values; // rows x schema.width()
    std::vector<std::uint8_t> truncated;

    std::size_t rows() const { return entity_ids.size(); }
};

void write_feature_matrix_csv(const FeatureMatrix& m, std::ostream& out);
FeatureMatrix read_feature_matrix_csv(std::istream& in);

// Computes every feature group for every entity of the graph. Construction
// does all the work (window centralities, motif enumeration with `threads`
// workers); lookups afterwards are O(width) copies. Deterministic for any
// thread count.
class FeatureExtractor {
public:
    FeatureExtractor(const AddressTxGraph& addr_graph, const EntityTxGraph& graph,
                     const EntityMap& entities, const PriceTable& prices,
                     const MotifLimits& limits = {}, int threads = 1);

    Eigen::VectorXd address_features(EntityIdx e) const;
    Eigen::VectorXd entity_features(EntityIdx e) const;
    Eigen::VectorXd temporal_features(EntityIdx e) const;
    Eigen::VectorXd centrality_features(EntityIdx e) const;
    Eigen::VectorXd motif_features(EntityIdx e, int n) const; // n in {1,2,3}

    bool truncated(EntityIdx e) const;
    const MotifSummary& direct_summary(int n) const; // n in {2,3}

    // Rows for labeled entities only, in increasing entity index, columns for
    // the requested groups (default: all seven). Throws ValidationError if the
    // resulting width disagrees with the schema.
    FeatureMatrix assemble(const std::map<EntityIdx, Category>& labels) const;
    FeatureMatrix assemble(const std::map<EntityIdx, Category>& labels,
                           const std::vector<FeatureGroup>& groups) const;

    std::size_t entity_count() const { return graph_.entity_count(); }

private:
    void compute_address_entity();
    void compute_temporal();
    void compute_centrality(int threads);
    void compute_motifs(int threads);

    const AddressTxGraph& addr_graph_;
    const EntityTxGraph& graph_;
    const EntityMap& entities_;
    const PriceTable& prices_;
    MotifLimits limits_;

    // One block per group, entity-indexed rows.
    std::array<Eigen::MatrixXd, kNumFeatureGroups> blocks_;
    std::vector<std::uint8_t> truncated_;
    MotifSummary summary2_, summary3_;
};

} // namespace elens

#endif

#ifndef ELENS_CLUSTER_HPP
#define ELENS_CLUSTER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "elens/txmodel.hpp"

namespace elens {

using AddressId = std::uint32_t;
// Canonical entity id = smallest address index in the entity's address set,
// fixed at finalize() so ids are deterministic across runs.
using EntityId = std::uint32_t;

// Disjoint-set partition of addresses into entities (union by rank, path
// compression). Build with intern()/unite(), then finalize(); lookups are
// valid only afterwards and the map is immutable from then on.
class EntityMap {
public:
    AddressId intern(const std::string& address);
    std::optional<AddressId> find_address(const std::string& address) const;
    const std::string& address_name(AddressId a) const;

    void unite(AddressId a, AddressId b);
    void finalize();

    EntityId entity_of(AddressId a) const;
    EntityId entity_of(const std::string& address) const; // throws LookupError
    // Members of an entity, sorted by address id. Throws LookupError for an
    // unknown entity id.
    const std::vector<AddressId>& addresses_of(EntityId e) const;

    // Canonical entity ids in increasing order.
    const std::vector<EntityId>& entities() const;

    std::size_t address_count() const { return parent_.size(); }
    std::size_t entity_count() const { return entity_ids_.size(); }
    bool finalized() const { return finalized_; }

private:
    AddressId find_root(AddressId a);

    std::vector<AddressId> parent_;
    std::vector<std::uint8_t> rank_;
    std::unordered_map<std::string, AddressId> index_;
    std::vector<std::string> names_;

    bool finalized_ = false;
    std::vector<EntityId> canonical_;             // address id -> entity id
    std::vector<EntityId> entity_ids_;            // sorted canonical ids
    std::unordered_map<EntityId, std::vector<AddressId>> members_;
};

// Common-spending heuristic with transitive closure: all input addresses of a
// transaction are united; output-only addresses become singletons. Coinbase
// transactions induce no unions. Returns a finalized map over every address
// seen in `txs`.
EntityMap cluster_common_spending(std::span<const TxRecord> txs);

enum class LabelConflictPolicy { DropEntity, Fail };

struct LabelConflict {
    EntityId entity;
    std::vector<Category> categories; // the >= 2 categories seen, in class order
};

struct EntityLabels {
    std::map<EntityId, Category> by_entity;
    std::vector<LabelConflict> conflicts; // only populated under DropEntity
};

// Propagates address labels to entities. Entities with no labeled address are
// absent from the result; entities whose addresses carry different categories
// are dropped with a conflict record (or throw, under Fail).
EntityLabels label_entities(const EntityMap& map, const LabelSet& labels,
                            LabelConflictPolicy policy = LabelConflictPolicy::DropEntity);

} // namespace elens

#endif

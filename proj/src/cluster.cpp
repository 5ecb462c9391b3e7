#include "elens/cluster.hpp"

#include <algorithm>
#include <set>

#include "elens/errors.hpp"

namespace elens {

AddressId EntityMap::intern(const std::string& address) {
    if (finalized_)
        throw ValidationError("EntityMap: intern after finalize");
    auto it = index_.find(address);
    if (it != index_.end()) return it->second;
    AddressId id = AddressId(parent_.size());
    index_.emplace(address, id);
    names_.push_back(address);
    parent_.push_back(id);
    rank_.push_back(0);
    return id;
}

std::optional<AddressId> EntityMap::find_address(const std::string& address) const {
    auto it = index_.find(address);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& EntityMap::address_name(AddressId a) const {
    if (a >= names_.size())
        throw LookupError("unknown address id " + std::to_string(a));
    return names_[a];
}

AddressId EntityMap::find_root(AddressId a) {
    AddressId root = a;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[a] != root) {
        AddressId next = parent_[a];
        parent_[a] = root;
        a = next;
    }
    return root;
}

void EntityMap::unite(AddressId a, AddressId b) {
    if (finalized_)
        throw ValidationError("EntityMap: unite after finalize");
    AddressId ra = find_root(a), rb = find_root(b);
    if (ra == rb) return;
    if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    if (rank_[ra] == rank_[rb]) ++rank_[ra];
}

void EntityMap::finalize() {
    if (finalized_) return;
    std::size_t n = parent_.size();
    canonical_.assign(n, 0);
    // Canonical id = smallest member, so scanning addresses in increasing
    // order assigns each root's id on first sight.
    std::vector<EntityId> root_to_canonical(n, UINT32_MAX);
    for (AddressId a = 0; a < n; ++a) {
        AddressId root = find_root(a);
        if (root_to_canonical[root] == UINT32_MAX) root_to_canonical[root] = a;
        canonical_[a] = root_to_canonical[root];
        members_[canonical_[a]].push_back(a);
    }
    entity_ids_.clear();
    entity_ids_.reserve(members_.size());
    for (const auto& [id, addrs] : members_) entity_ids_.push_back(id);
    std::sort(entity_ids_.begin(), entity_ids_.end());
    finalized_ = true;
}

EntityId EntityMap::entity_of(AddressId a) const {
    if (!finalized_)
        throw ValidationError("EntityMap: lookup before finalize");
    if (a >= canonical_.size())
        throw LookupError("unknown address id " + std::to_string(a));
    return canonical_[a];
}

EntityId EntityMap::entity_of(const std::string& address) const {
    auto id = find_address(address);
    if (!id)
        throw LookupError("unknown address '" + address + "'");
    return entity_of(*id);
}

const std::vector<AddressId>& EntityMap::addresses_of(EntityId e) const {
    if (!finalized_)
        throw ValidationError("EntityMap: lookup before finalize");
    auto it = members_.find(e);
    if (it == members_.end())
        throw LookupError("unknown entity id " + std::to_string(e));
    return it->second;
}

const std::vector<EntityId>& EntityMap::entities() const {
    if (!finalized_)
        throw ValidationError("EntityMap: lookup before finalize");
    return entity_ids_;
}

EntityMap cluster_common_spending(std::span<const TxRecord> txs) {
    EntityMap map;
    for (const auto& tx : txs) {
        AddressId first = 0;
        bool have_first = false;
        for (const auto& io : tx.inputs) {
            AddressId id = map.intern(io.address);
            if (have_first)
                map.unite(first, id);
            else {
                first = id;
                have_first = true;
            }
        }
        for (const auto& io : tx.outputs) map.intern(io.address);
    }
    map.finalize();
    return map;
}

EntityLabels label_entities(const EntityMap& map, const LabelSet& labels,
                            LabelConflictPolicy policy) {
    // Gather per-entity category sets; std::set keeps class order for reports.
    std::map<EntityId, std::set<Category>> seen;
    for (const auto& [address, category] : labels.entries()) {
        auto id = map.find_address(address);
        if (!id) continue; // label for an address outside the ingested window
        seen[map.entity_of(*id)].insert(category);
    }
    EntityLabels out;
    for (const auto& [entity, cats] : seen) {
        if (cats.size() == 1) {
            out.by_entity.emplace(entity, *cats.begin());
            continue;
        }
        LabelConflict conflict{entity, {cats.begin(), cats.end()}};
        if (policy == LabelConflictPolicy::Fail) {
            std::string what = "entity " + std::to_string(entity) + " carries labels";
            for (Category c : conflict.categories) what += " " + std::string(to_string(c));
            throw ValidationError(what);
        }
        out.conflicts.push_back(std::move(conflict));
    }
    return out;
}

} // namespace elens

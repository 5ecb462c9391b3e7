#ifndef ELENS_GRAPH_HPP
#define ELENS_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "elens/calendar.hpp"
#include "elens/cluster.hpp"
#include "elens/txmodel.hpp"

namespace elens {

using TxId = std::uint32_t;
// Dense entity index into EntityTxGraph::entities (not the canonical id).
using EntityIdx = std::uint32_t;

// Directed weighted bipartite multigraph of addresses and transactions.
// Transaction order equals input order, which doubles as the within-block
// order used for motif time tie-breaking.
class AddressTxGraph {
public:
    struct Edge {
        AddressId address;
        Sats sats;
    };

    struct TxNode {
        std::string txid;
        std::int64_t height = 0;
        std::int64_t timestamp = 0;
        bool coinbase = false;
        Sats fee = 0;
        std::vector<Edge> inputs;  // one edge per TxIo; multi-edges preserved
        std::vector<Edge> outputs;
    };

    struct AddressNode {
        std::vector<TxId> receiving_txs; // txs with an output to this address, deduplicated
        std::vector<TxId> spending_txs;  // txs with an input from this address, deduplicated
    };

    const std::vector<TxNode>& txs() const { return txs_; }
    const std::vector<AddressNode>& addresses() const { return addresses_; }
    const std::string& address_name(AddressId a) const { return names_[a]; }
    std::optional<AddressId> find_address(const std::string& name) const;
    std::size_t edge_count() const { return edge_count_; }

    friend AddressTxGraph build_address_graph(std::vector<TxRecord> txs);

private:
    std::vector<TxNode> txs_;
    std::vector<AddressNode> addresses_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, AddressId> index_;
    std::size_t edge_count_ = 0;
};

// Every TxIo becomes exactly one edge. Throws ValidationError on duplicate
// txid or invalid records.
AddressTxGraph build_address_graph(std::vector<TxRecord> txs);

// Entity-transaction bipartite graph obtained by aggregating the address
// graph under an entity partition. Each non-coinbase transaction has exactly
// one input entity; per-entity output edges carry summed amounts and the
// count of subsumed address edges.
class EntityTxGraph {
public:
    struct Edge {
        EntityIdx entity;
        Sats sats;
        std::uint32_t subsumed; // address-graph edges aggregated into this one
    };

    struct TxNode {
        std::int64_t height = 0;
        std::int64_t timestamp = 0;
        bool coinbase = false;
        Sats fee = 0;
        std::optional<Edge> input;  // absent only for coinbase
        std::vector<Edge> outputs;  // sorted by entity index
        std::uint32_t nb_inputs = 0;  // address-level edge counts
        std::uint32_t nb_outputs = 0;
        Sats input_total = 0;
        Sats output_total = 0;
    };

    struct EntityNode {
        EntityId canonical_id;
        std::vector<TxId> receiving_txs; // deduplicated, increasing
        std::vector<TxId> spending_txs;
    };

    const std::vector<TxNode>& txs() const { return txs_; }
    const std::vector<EntityNode>& entities() const { return entities_; }
    EntityIdx index_of(EntityId canonical) const; // throws LookupError
    std::size_t entity_count() const { return entities_.size(); }

    // Earliest/latest transaction timestamp; 0/0 when empty.
    std::int64_t span_begin() const { return span_begin_; }
    std::int64_t span_end() const { return span_end_; }

    friend EntityTxGraph project_entity_graph(const AddressTxGraph& g, const EntityMap& m);

private:
    std::vector<TxNode> txs_;
    std::vector<EntityNode> entities_;
    std::unordered_map<EntityId, EntityIdx> index_;
    std::int64_t span_begin_ = 0;
    std::int64_t span_end_ = 0;
};

// Throws LookupError if an address of `g` is missing from `m`, and
// ValidationError if a transaction's input addresses span several entities
// (the partition must already satisfy common spending).
EntityTxGraph project_entity_graph(const AddressTxGraph& g, const EntityMap& m);

// Window restriction of the entity graph: only entities transacting in
// [window.begin, window.end] appear; edges aggregate in-window transactions
// between an input entity and each of its output entities. Coinbase
// transactions mark the receiving entity active but yield no edges.
struct DiscreteTimeGraph {
    TimeWindow window;

    std::vector<EntityIdx> active; // sorted

    struct Edge {
        EntityIdx src;
        EntityIdx dst;
        Sats sats;               // total value, primary weight
        std::uint32_t tx_count;  // secondary weight
    };
    std::vector<Edge> edges; // sorted by (src, dst)

    bool is_active(EntityIdx e) const;
};

DiscreteTimeGraph aggregate_window(const EntityTxGraph& g, std::int64_t t1, std::int64_t t2);

} // namespace elens

#endif

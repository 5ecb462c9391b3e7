#include "elens/graph.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "elens/errors.hpp"

namespace elens {

std::optional<AddressId> AddressTxGraph::find_address(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

namespace {

void push_unique(std::vector<TxId>& v, TxId t) {
    if (v.empty() || v.back() != t) v.push_back(t);
}

} // namespace

AddressTxGraph build_address_graph(std::vector<TxRecord> txs) {
    AddressTxGraph g;
    std::unordered_set<std::string> seen_txids;
    g.txs_.reserve(txs.size());

    auto intern = [&g](const std::string& name) {
        auto it = g.index_.find(name);
        if (it != g.index_.end()) return it->second;
        AddressId id = AddressId(g.names_.size());
        g.index_.emplace(name, id);
        g.names_.push_back(name);
        g.addresses_.emplace_back();
        return id;
    };

    for (auto& tx : txs) {
        tx.validate();
        if (!seen_txids.insert(tx.txid).second)
            throw ValidationError("duplicate txid '" + tx.txid + "'");
        TxId tid = TxId(g.txs_.size());
        AddressTxGraph::TxNode node;
        node.txid = std::move(tx.txid);
        node.height = tx.height;
        node.timestamp = tx.timestamp;
        node.coinbase = tx.coinbase;
        node.inputs.reserve(tx.inputs.size());
        for (const auto& io : tx.inputs) {
            AddressId a = intern(io.address);
            node.inputs.push_back({a, io.sats});
            push_unique(g.addresses_[a].spending_txs, tid);
        }
        node.outputs.reserve(tx.outputs.size());
        for (const auto& io : tx.outputs) {
            AddressId a = intern(io.address);
            node.outputs.push_back({a, io.sats});
            push_unique(g.addresses_[a].receiving_txs, tid);
        }
        Sats in = 0, out = 0;
        for (const auto& e : node.inputs) in += e.sats;
        for (const auto& e : node.outputs) out += e.sats;
        node.fee = node.coinbase ? 0 : in - out;
        g.edge_count_ += node.inputs.size() + node.outputs.size();
        g.txs_.push_back(std::move(node));
    }
    return g;
}

EntityIdx EntityTxGraph::index_of(EntityId canonical) const {
    auto it = index_.find(canonical);
    if (it == index_.end())
        throw LookupError("entity " + std::to_string(canonical) + " not in graph");
    return it->second;
}

EntityTxGraph project_entity_graph(const AddressTxGraph& g, const EntityMap& m) {
    EntityTxGraph eg;

    // Dense entity indices in canonical-id order, covering the whole partition
    // so isolated entities keep stable indices.
    const auto& ids = m.entities();
    eg.entities_.reserve(ids.size());
    for (EntityId id : ids) {
        eg.index_.emplace(id, EntityIdx(eg.entities_.size()));
        eg.entities_.push_back({id, {}, {}});
    }

    auto entity_of = [&](AddressId a) -> EntityIdx {
        const std::string& name = g.address_name(a);
        auto id = m.find_address(name);
        if (!id)
            throw LookupError("address '" + name + "' missing from entity map");
        return eg.index_.at(m.entity_of(*id));
    };

    bool first = true;
    for (TxId tid = 0; tid < g.txs().size(); ++tid) {
        const auto& tx = g.txs()[tid];
        EntityTxGraph::TxNode node;
        node.height = tx.height;
        node.timestamp = tx.timestamp;
        node.coinbase = tx.coinbase;
        node.fee = tx.fee;
        node.nb_inputs = std::uint32_t(tx.inputs.size());
        node.nb_outputs = std::uint32_t(tx.outputs.size());

        if (!tx.inputs.empty()) {
            EntityIdx e = entity_of(tx.inputs.front().address);
            Sats total = 0;
            for (const auto& edge : tx.inputs) {
                if (entity_of(edge.address) != e)
                    throw ValidationError("tx '" + tx.txid +
                                          "': input addresses span several entities");
                total += edge.sats;
            }
            node.input = EntityTxGraph::Edge{e, total, std::uint32_t(tx.inputs.size())};
            node.input_total = total;
            eg.entities_[e].spending_txs.push_back(tid);
        }

        std::map<EntityIdx, EntityTxGraph::Edge> outs; // sorted by entity index
        for (const auto& edge : tx.outputs) {
            EntityIdx e = entity_of(edge.address);
            auto [it, inserted] = outs.emplace(e, EntityTxGraph::Edge{e, edge.sats, 1});
            if (!inserted) {
                it->second.sats += edge.sats;
                it->second.subsumed += 1;
            }
            node.output_total += edge.sats;
        }
        node.outputs.reserve(outs.size());
        for (auto& [e, edge] : outs) {
            node.outputs.push_back(edge);
            eg.entities_[e].receiving_txs.push_back(tid);
        }

        if (first) {
            eg.span_begin_ = eg.span_end_ = tx.timestamp;
            first = false;
        } else {
            eg.span_begin_ = std::min(eg.span_begin_, tx.timestamp);
            eg.span_end_ = std::max(eg.span_end_, tx.timestamp);
        }
        eg.txs_.push_back(std::move(node));
    }
    return eg;
}

bool DiscreteTimeGraph::is_active(EntityIdx e) const {
    return std::binary_search(active.begin(), active.end(), e);
}

DiscreteTimeGraph aggregate_window(const EntityTxGraph& g, std::int64_t t1, std::int64_t t2) {
    if (t1 > t2)
        throw ConfigError("aggregate_window: t1 > t2");
    DiscreteTimeGraph dg;
    dg.window = {t1, t2};

    std::unordered_set<EntityIdx> active;
    std::map<std::pair<EntityIdx, EntityIdx>, DiscreteTimeGraph::Edge> edges;

    for (const auto& tx : g.txs()) {
        if (!dg.window.contains(tx.timestamp)) continue;
        if (tx.input) active.insert(tx.input->entity);
        for (const auto& out : tx.outputs) active.insert(out.entity);
        if (!tx.input) continue; // coinbase: activity only, no entity edge
        EntityIdx src = tx.input->entity;
        for (const auto& out : tx.outputs) {
            auto key = std::make_pair(src, out.entity);
            auto [it, inserted] =
                edges.emplace(key, DiscreteTimeGraph::Edge{src, out.entity, out.sats, 1});
            if (!inserted) {
                it->second.sats += out.sats;
                it->second.tx_count += 1;
            }
        }
    }

    dg.active.assign(active.begin(), active.end());
    std::sort(dg.active.begin(), dg.active.end());
    dg.edges.reserve(edges.size());
    for (auto& [key, e] : edges) dg.edges.push_back(e);
    return dg;
}

} // namespace elens

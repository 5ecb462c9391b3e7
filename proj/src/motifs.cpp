#include "elens/motifs.hpp"

#include <algorithm>
#include <ostream>

#include "elens/errors.hpp"
#include "elens/parallel.hpp"

namespace elens {

namespace {

// Strict total order over transactions: timestamp, then input order (which is
// within-block order for same-block transactions).
struct OrderKey {
    std::int64_t timestamp;
    TxId tx;
    bool operator<(const OrderKey& o) const {
        return timestamp != o.timestamp ? timestamp < o.timestamp : tx < o.tx;
    }
};

OrderKey key_of(const EntityTxGraph& g, TxId t) {
    return {g.txs()[t].timestamp, t};
}

struct Link {
    TxId next;
    std::uint32_t shared; // distinct addresses in O(t) ∩ I(next)
};

// For each transaction, the later transactions taking one of its output
// addresses as an input (the Direct constraint), with shared-address counts.
std::vector<std::vector<Link>> build_links(const EntityTxGraph& g, const AddressTxGraph& ag) {
    const auto& txs = ag.txs();
    std::size_t n = txs.size();

    // Spending lists per address, sorted by order key.
    std::vector<std::vector<TxId>> spends(ag.addresses().size());
    for (AddressId a = 0; a < ag.addresses().size(); ++a) {
        spends[a] = ag.addresses()[a].spending_txs;
        std::sort(spends[a].begin(), spends[a].end(),
                  [&](TxId x, TxId y) { return key_of(g, x) < key_of(g, y); });
    }

    std::vector<std::vector<Link>> links(n);
    std::vector<AddressId> out_addrs;
    for (TxId t = 0; t < n; ++t) {
        out_addrs.clear();
        for (const auto& e : txs[t].outputs) out_addrs.push_back(e.address);
        std::sort(out_addrs.begin(), out_addrs.end());
        out_addrs.erase(std::unique(out_addrs.begin(), out_addrs.end()), out_addrs.end());

        OrderKey self = key_of(g, t);
        std::map<TxId, std::uint32_t> shared;
        for (AddressId a : out_addrs) {
            const auto& sp = spends[a];
            auto it = std::upper_bound(sp.begin(), sp.end(), self, [&](const OrderKey& k, TxId x) {
                return k < key_of(g, x);
            });
            for (; it != sp.end(); ++it) shared[*it] += 1;
        }
        auto& lv = links[t];
        lv.reserve(shared.size());
        for (const auto& [next, count] : shared) lv.push_back({next, count});
        std::sort(lv.begin(), lv.end(),
                  [&](const Link& x, const Link& y) { return key_of(g, x.next) < key_of(g, y.next); });
    }
    return links;
}

MotifHop hop_of(const EntityTxGraph& g, TxId t) {
    const auto& tx = g.txs()[t];
    return {t, tx.timestamp, tx.fee, tx.nb_inputs, tx.nb_outputs, tx.input_total, tx.output_total};
}

Sats output_to(const EntityTxGraph& g, TxId t, EntityIdx e) {
    const auto& outs = g.txs()[t].outputs;
    auto it = std::lower_bound(outs.begin(), outs.end(), e,
                               [](const EntityTxGraph::Edge& edge, EntityIdx idx) {
                                   return edge.entity < idx;
                               });
    if (it == outs.end() || it->entity != e)
        throw LookupError("motif expansion: missing output edge");
    return it->sats;
}

} // namespace

void for_each_1motif(const EntityTxGraph& g,
                     const std::function<void(const MotifInstance&)>& sink) {
    for (TxId t = 0; t < g.txs().size(); ++t) {
        const auto& tx = g.txs()[t];
        if (!tx.input) continue; // coinbase has no input entity to start from
        MotifInstance m;
        m.n = 1;
        m.entities[0] = tx.input->entity;
        m.hops[0] = hop_of(g, t);
        for (const auto& out : tx.outputs) {
            m.entities[1] = out.entity;
            m.hop_value[0] = out.sats;
            m.last_subsumed = out.subsumed;
            m.loop = out.entity == m.entities[0];
            sink(m);
        }
    }
}

std::vector<MotifInstance> enumerate_1motifs(const EntityTxGraph& g) {
    std::vector<MotifInstance> motifs;
    for_each_1motif(g, [&](const MotifInstance& m) { motifs.push_back(m); });
    return motifs;
}

MotifSummary for_each_direct_motif(const EntityTxGraph& g, const AddressTxGraph& addr_g, int n,
                                   const MotifLimits& limits, int threads,
                                   const std::function<void(const MotifInstance&)>& sink) {
    if (n != 2 && n != 3)
        throw ConfigError("direct motifs support N=2 or N=3");

    const auto links = build_links(g, addr_g);

    struct EntityResult {
        std::vector<MotifInstance> motifs;
        bool truncated = false;
    };

    auto expand_entity = [&](std::size_t start) {
        EntityResult result;
        const auto& spending = g.entities()[start].spending_txs;
        if (spending.empty()) return result;
        std::uint64_t budget = limits.max_paths_per_entity;

        auto emit_tails = [&](MotifInstance& m, TxId last_tx) {
            for (const auto& out : g.txs()[last_tx].outputs) {
                if (result.motifs.size() >= budget) {
                    result.truncated = true;
                    return false;
                }
                m.entities[m.n] = out.entity;
                m.hop_value[m.n - 1] = out.sats;
                m.last_subsumed = out.subsumed;
                m.loop = out.entity == m.entities[0];
                result.motifs.push_back(m);
            }
            return true;
        };

        for (TxId t1 : spending) {
            for (const auto& l12 : links[t1]) {
                TxId t2 = l12.next;
                EntityIdx mid1 = g.txs()[t2].input->entity;
                MotifInstance m;
                m.n = std::uint8_t(n);
                m.entities[0] = EntityIdx(start);
                m.entities[1] = mid1;
                m.hops[0] = hop_of(g, t1);
                m.hops[1] = hop_of(g, t2);
                m.hop_value[0] = output_to(g, t1, mid1);
                m.shared_addresses[0] = l12.shared;
                if (n == 2) {
                    if (!emit_tails(m, t2)) return result;
                    continue;
                }
                for (const auto& l23 : links[t2]) {
                    TxId t3 = l23.next;
                    EntityIdx mid2 = g.txs()[t3].input->entity;
                    m.entities[2] = mid2;
                    m.hops[2] = hop_of(g, t3);
                    m.hop_value[1] = output_to(g, t2, mid2);
                    m.shared_addresses[1] = l23.shared;
                    if (!emit_tails(m, t3)) return result;
                }
            }
        }
        return result;
    };

    MotifSummary summary;
    ordered_parallel_fold<EntityResult>(
        g.entity_count(), threads, expand_entity, [&](std::size_t start, EntityResult&& r) {
            for (const auto& m : r.motifs) sink(m);
            summary.emitted += r.motifs.size();
            if (r.truncated) summary.truncated.push_back(EntityIdx(start));
        });
    return summary;
}

MotifEnumeration enumerate_direct_motifs(const EntityTxGraph& g, const AddressTxGraph& addr_g,
                                         int n, const MotifLimits& limits, int threads) {
    MotifEnumeration out;
    out.summary = for_each_direct_motif(g, addr_g, n, limits, threads,
                                        [&](const MotifInstance& m) { out.motifs.push_back(m); });
    return out;
}

std::array<double, kNumCategories> MotifStats::Row::shares() const {
    std::array<double, kNumCategories> s{};
    std::uint64_t labeled = 0;
    for (auto c : by_category) labeled += c;
    if (labeled == 0) return s;
    for (int i = 0; i < kNumCategories; ++i) s[i] = double(by_category[i]) / double(labeled);
    return s;
}

void MotifStats::count(const MotifInstance& m, const std::map<EntityIdx, Category>& labels) {
    Row& row = rows[{int(m.n), m.loop}];
    row.quantity += 1;
    auto it = labels.find(m.first());
    if (it == labels.end())
        row.unlabeled += 1;
    else
        row.by_category[int(it->second)] += 1;
}

void write_motif_stats_csv(const MotifStats& stats, std::ostream& out) {
    out << "type,subtype,quantity,Exchange,Gambling,Mining,Service,Darknet\n";
    // Table column order differs from the class order; remap.
    const Category columns[] = {Category::Exchange, Category::Gambling, Category::Mining,
                                Category::Service, Category::Darknet};
    for (const auto& [key, row] : stats.rows) {
        auto [n, loop] = key;
        out << n << "-motif,";
        if (n == 1)
            out << (loop ? "Loop" : "Distinct");
        else
            out << (loop ? "Direct Loop" : "Direct Distinct");
        out << ',' << row.quantity;
        auto s = row.shares();
        char buf[32];
        for (Category c : columns) {
            std::snprintf(buf, sizeof buf, "%.6f", s[int(c)]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace elens

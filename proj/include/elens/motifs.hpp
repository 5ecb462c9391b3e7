#ifndef ELENS_MOTIFS_HPP
#define ELENS_MOTIFS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "elens/graph.hpp"

namespace elens {

// Per-transaction attributes of one hop on a motif path.
struct MotifHop {
    TxId tx = 0;
    std::int64_t timestamp = 0;
    Sats fee = 0;
    std::uint32_t nb_inputs = 0;
    std::uint32_t nb_outputs = 0;
    Sats input_total = 0;
    Sats output_total = 0;
};

// A path e_1, t_1, ..., t_N, e_{N+1} on the entity-transaction graph.
// Interior entities are forced: e_{k+1} is the input entity of t_{k+1}.
// Transactions are strictly ordered by (timestamp, input order), the input
// order standing in for within-block position when timestamps tie.
struct MotifInstance {
    std::uint8_t n = 1;
    bool loop = false;                       // e_1 == e_{N+1}
    std::array<EntityIdx, 4> entities{};     // e_1 .. e_{N+1}
    std::array<MotifHop, 3> hops{};          // t_1 .. t_N
    // Value received by e_{k+1} from t_{k+1}'s predecessor hop, i.e. the
    // aggregated output edge t_k -> e_{k+1}.
    std::array<Sats, 3> hop_value{};
    // Distinct addresses shared between O(t_k) and I(t_{k+1}), k = 1..N-1.
    std::array<std::uint32_t, 2> shared_addresses{};
    // Address-level output edges aggregated into t_N -> e_{N+1}.
    std::uint32_t last_subsumed = 0;

    EntityIdx first() const { return entities[0]; }
    EntityIdx last() const { return entities[n]; }
};

struct MotifLimits {
    // Cap on paths expanded per starting entity; exceeding it truncates that
    // entity's motif set and flags it.
    std::uint64_t max_paths_per_entity = 1'000'000;
};

struct MotifSummary {
    std::uint64_t emitted = 0;
    std::vector<EntityIdx> truncated; // starting entities that hit the cap, sorted
};

// Streaming enumeration. The sink runs on the calling thread in a fixed
// deterministic order (starting entity ascending, then expansion order), for
// any thread count.
void for_each_1motif(const EntityTxGraph& g, const std::function<void(const MotifInstance&)>& sink);

MotifSummary for_each_direct_motif(const EntityTxGraph& g, const AddressTxGraph& addr_g, int n,
                                   const MotifLimits& limits, int threads,
                                   const std::function<void(const MotifInstance&)>& sink);

// Materialized variants for tests and small instances.
std::vector<MotifInstance> enumerate_1motifs(const EntityTxGraph& g);

struct MotifEnumeration {
    std::vector<MotifInstance> motifs;
    MotifSummary summary;
};
MotifEnumeration enumerate_direct_motifs(const EntityTxGraph& g, const AddressTxGraph& addr_g,
                                         int n, const MotifLimits& limits = {}, int threads = 1);

// Category-conditioned motif distribution, keyed by the first entity's
// category. Row shares are taken over labeled first entities only; motifs
// with unlabeled first entities are tallied separately.
struct MotifStats {
    struct Row {
        std::uint64_t quantity = 0; // labeled + unlabeled
        std::array<std::uint64_t, kNumCategories> by_category{};
        std::uint64_t unlabeled = 0;

        std::array<double, kNumCategories> shares() const;
    };

    // Keyed by (N, loop).
    std::map<std::pair<int, bool>, Row> rows;
    std::uint64_t truncated_entities = 0;

    void count(const MotifInstance& m, const std::map<EntityIdx, Category>& labels);
};

// Table-shaped CSV: "type,subtype,quantity,Exchange,Gambling,Mining,Service,Darknet".
void write_motif_stats_csv(const MotifStats& stats, std::ostream& out);

} // namespace elens

#endif

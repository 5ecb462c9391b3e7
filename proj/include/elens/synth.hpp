#ifndef ELENS_SYNTH_HPP
#define ELENS_SYNTH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "elens/txmodel.hpp"

namespace elens {

// Behavior knobs for one entity class. Per-entity values are drawn uniformly
// from the [lo, hi] ranges so entities of a class overlap without being
// identical.
struct ArchetypeParams {
    double tx_rate_lo = 0.0, tx_rate_hi = 0.0; // ordinary payments per day
    int fan_in_max = 1;                        // input addresses per payment
    int fan_out_lo = 1, fan_out_hi = 1;        // recipients per payment
    double amount_btc_lo = 0.1, amount_btc_hi = 1.0; // log-uniform payment size
    double address_reuse = 0.5;   // receive on an existing address with this prob
    int clique_lo = 0, clique_hi = 0; // fixed partner pool size; 0 = anyone
    double exchange_bias = 0.0;   // prob a global payment goes to an exchange

    // Reactive forward chains: a payment starts, with prob chain_trigger, a
    // chain of chain_depth prompt relays through random entities; the final
    // relay sprays across chain_fan_out recipients, the first of which is the
    // originator itself when chain_return is set (a mixing round trip).
    double chain_trigger = 0.0;
    int chain_depth = 0;
    int chain_fan_out = 1;
    bool chain_return = false;

    // Gambling: bet/return ping-pong (each delivery returns to the sender
    // with prob loop_propensity) and internal shuffle txs.
    double loop_propensity = 0.0;
    double self_churn_rate = 0.0; // per day

    // Mining: income events (coinbase with prob coinbase_share, otherwise a
    // transfer in) and wide payout fan-outs.
    double income_rate = 0.0; // per day
    double coinbase_share = 0.0;
    double payout_rate = 0.0; // per day
    int payout_fan_out = 0;
};

struct SynthConfig {
    std::array<int, kNumCategories> entity_counts = {20, 20, 20, 20, 20};
    int duration_days = 60;
    std::uint64_t seed = 0;
    std::string start_date = "2015-01-01";
    double start_price_usd = 250.0;
    std::array<ArchetypeParams, kNumCategories> archetypes = default_archetypes();

    static std::array<ArchetypeParams, kNumCategories> default_archetypes();
};

struct GroundTruthRow {
    std::string address;
    int entity_id = 0; // generator ordinal, not a cluster id
    Category category = Category::Exchange;
};

struct SynthData {
    std::vector<TxRecord> txs; // timestamp order
    PriceTable prices;
    std::vector<GroundTruthRow> ground_truth; // ordered by entity, then creation
};

// Deterministic single-threaded generation. Every emitted transaction passes
// TxRecord::validate(); inputs only ever co-spend addresses of one entity, and
// a final per-entity sweep co-spends the whole wallet so common-spending
// clustering recovers the ground-truth partition exactly. Throws ConfigError
// on invalid or infeasible configs.
SynthData generate_synth(const SynthConfig& config);

LabelSet synth_labels(const SynthData& data);

// CSV "address,entity_id,category".
void write_ground_truth_csv(const SynthData& data, std::ostream& out);
// CSV "address,category", same row order as the ground truth.
void write_labels_csv(const SynthData& data, std::ostream& out);

} // namespace elens

#endif

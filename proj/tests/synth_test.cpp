#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "elens/cluster.hpp"
#include "elens/errors.hpp"
#include "elens/features.hpp"
#include "elens/synth.hpp"

using namespace elens;

namespace {

SynthConfig small_config(std::uint64_t seed = 1) {
    SynthConfig cfg;
    cfg.entity_counts = {3, 3, 3, 3, 3};
    cfg.duration_days = 30;
    cfg.seed = seed;
    return cfg;
}

std::string to_jsonl(const std::vector<TxRecord>& txs) {
    std::ostringstream os;
    serialize_transactions(txs, os);
    return os.str();
}

} // namespace

TEST_CASE("generated chains are valid, ordered, and conserve value") {
    auto data = generate_synth(small_config());
    REQUIRE(!data.txs.empty());

    std::set<std::string> ids;
    std::int64_t prev_ts = std::numeric_limits<std::int64_t>::min();
    std::int64_t prev_h = -1;
    for (const auto& tx : data.txs) {
        tx.validate(); // throws on any malformed record
        CHECK(ids.insert(tx.txid).second);
        CHECK(tx.timestamp >= prev_ts);
        CHECK(tx.height >= prev_h);
        prev_ts = tx.timestamp;
        prev_h = tx.height;
        if (tx.coinbase) {
            CHECK(tx.inputs.empty());
            CHECK(tx.fee() == 0);
        } else {
            Sats in = 0, out = 0;
            for (const auto& e : tx.inputs) in += e.sats;
            for (const auto& e : tx.outputs) out += e.sats;
            CHECK(in == out + tx.fee());
            CHECK(tx.fee() > 0);
        }
    }

    // the projection re-derives the totals; they must balance exactly
    EntityMap m = cluster_common_spending(data.txs);
    auto g = project_entity_graph(build_address_graph(data.txs), m);
    for (const auto& tx : g.txs())
        if (tx.input) CHECK(tx.input_total == tx.output_total + tx.fee);
}

TEST_CASE("common-spending clustering recovers the ground truth exactly") {
    auto data = generate_synth(small_config());
    EntityMap m = cluster_common_spending(data.txs);

    std::map<int, std::set<EntityId>> clusters_of_entity;
    std::set<EntityId> all_clusters;
    std::set<int> gt_entities;
    for (const auto& row : data.ground_truth) {
        CHECK(row.address.rfind("e", 0) == 0); // wallet address namespace
        EntityId c = m.entity_of(row.address);  // throws if absent
        clusters_of_entity[row.entity_id].insert(c);
        all_clusters.insert(c);
        gt_entities.insert(row.entity_id);
    }
    // no entity split across clusters...
    for (const auto& [entity, clusters] : clusters_of_entity) CHECK(clusters.size() == 1);
    // ...and no two entities merged into one
    CHECK(all_clusters.size() == gt_entities.size());
    CHECK(gt_entities.size() == 15);

    // faucet addresses never co-spend, so each one stays a singleton
    for (const char* fx : {"fx0", "fx17", "fx49"}) {
        CHECK(m.addresses_of(m.entity_of(fx)).size() == 1);
        CHECK(!all_clusters.count(m.entity_of(fx)));
    }

    auto labels = synth_labels(data);
    CHECK(labels.size() == data.ground_truth.size());
}

TEST_CASE("ground truth lists each entity's addresses contiguously") {
    auto data = generate_synth(small_config());
    int prev = -1;
    std::set<int> seen;
    for (const auto& row : data.ground_truth) {
        if (row.entity_id != prev) {
            CHECK(!seen.count(row.entity_id)); // ids never reappear
            seen.insert(row.entity_id);
            CHECK(row.entity_id > prev);
            prev = row.entity_id;
        }
    }

    std::ostringstream gt;
    write_ground_truth_csv(data, gt);
    std::istringstream is(gt.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "address,entity_id,category");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == data.ground_truth.size());

    std::ostringstream lb;
    write_labels_csv(data, lb);
    CHECK(lb.str().rfind("address,category\n", 0) == 0);
    std::istringstream in(lb.str());
    auto loaded = load_labels(in);
    CHECK(loaded.size() == data.ground_truth.size());
}

TEST_CASE("equal seeds reproduce the chain byte for byte") {
    auto a = generate_synth(small_config(7));
    auto b = generate_synth(small_config(7));
    CHECK(to_jsonl(a.txs) == to_jsonl(b.txs));
    CHECK(a.ground_truth.size() == b.ground_truth.size());

    auto c = generate_synth(small_config(8));
    CHECK(to_jsonl(a.txs) != to_jsonl(c.txs));
}

TEST_CASE("a lone miner on full coinbase income earns only subsidies") {
    SynthConfig cfg;
    cfg.entity_counts = {0, 0, 0, 1, 0};
    cfg.duration_days = 40;
    cfg.archetypes[int(Category::Mining)].coinbase_share = 1.0;
    auto data = generate_synth(cfg);

    bool any_coinbase = false;
    for (const auto& tx : data.txs) any_coinbase = any_coinbase || tx.coinbase;
    CHECK(any_coinbase);

    EntityMap m = cluster_common_spending(data.txs);
    auto addr = build_address_graph(data.txs);
    auto g = project_entity_graph(addr, m);
    PriceTable unit = PriceTable::constant(1.0);
    FeatureExtractor fx(addr, g, m, unit);

    REQUIRE(!data.ground_truth.empty());
    EntityIdx miner = g.index_of(m.entity_of(data.ground_truth.front().address));
    auto ent = fx.entity_features(miner);
    CHECK(ent[6] > 0);                       // coinbase receipts
    CHECK(ent[7] == doctest::Approx(1.0));   // every receipt is one
}

TEST_CASE("infeasible configs are rejected up front") {
    auto expect_bad = [](SynthConfig cfg) {
        CHECK_THROWS_AS(generate_synth(cfg), ConfigError);
    };

    SynthConfig none = small_config();
    none.entity_counts = {0, 0, 0, 0, 0};
    expect_bad(none);

    SynthConfig negative = small_config();
    negative.entity_counts[0] = -1;
    expect_bad(negative);

    SynthConfig short_run = small_config();
    short_run.duration_days = 0;
    expect_bad(short_run);

    SynthConfig free_coins = small_config();
    free_coins.start_price_usd = 0.0;
    expect_bad(free_coins);

    SynthConfig lonely = small_config();
    lonely.entity_counts = {1, 0, 0, 0, 0};
    expect_bad(lonely); // payments need a counterparty

    SynthConfig bad_prob = small_config();
    bad_prob.archetypes[0].address_reuse = 1.5;
    expect_bad(bad_prob);

    SynthConfig inverted = small_config();
    inverted.archetypes[1].amount_btc_lo = 2.0;
    inverted.archetypes[1].amount_btc_hi = 1.0;
    expect_bad(inverted);

    SynthConfig wide = small_config();
    wide.archetypes[4].chain_fan_out = 9;
    expect_bad(wide);

    SynthConfig bad_date = small_config();
    bad_date.start_date = "not-a-date";
    CHECK_THROWS(generate_synth(bad_date));
}

TEST_CASE("price table covers the run and round trips") {
    auto data = generate_synth(small_config(3));
    std::int64_t day0 = parse_date("2015-01-01");
    for (int d = 0; d <= 30; ++d) CHECK(data.prices.rate_at((day0 + d) * 86400) > 0.0);

    std::ostringstream os;
    write_prices(data.prices, os);
    CHECK(os.str().rfind("date,usd_per_btc\n", 0) == 0);
    std::istringstream is(os.str());
    auto back = load_prices(is);
    for (int d = 0; d <= 30; ++d) {
        std::int64_t ts = (day0 + d) * 86400;
        CHECK(back.rate_at(ts) == doctest::Approx(data.prices.rate_at(ts)).epsilon(1e-6));
    }
}

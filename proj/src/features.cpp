#include "elens/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "elens/digest.hpp"
#include "elens/errors.hpp"
#include "elens/parallel.hpp"

namespace elens {

namespace {

constexpr std::array<FeatureGroup, kNumFeatureGroups> kAllGroups = {
    FeatureGroup::Address,  FeatureGroup::Entity, FeatureGroup::Temporal,
    FeatureGroup::Centrality, FeatureGroup::Motif1, FeatureGroup::Motif2,
    FeatureGroup::Motif3,
};

constexpr const char* kMotifRoles[3] = {"incoming", "outgoing", "loop"};
enum Role { kIncoming = 0, kOutgoing = 1, kLoop = 2 };

// Per-motif quantities aggregated as mean/std, in schema order.
constexpr const char* kMotif2Quantities[13] = {
    "nb_inputs", "nb_outputs", "in_val_btc",  "in_val_usd", "out_val_btc",
    "out_val_usd", "mid_val_btc", "mid_val_usd", "fee_1_btc", "fee_1_usd",
    "fee_2_btc", "fee_2_usd", "nb_address",
};
constexpr const char* kMotif3Quantities[18] = {
    "nb_inputs", "nb_outputs", "in_val_btc", "in_val_usd", "out_val_btc",
    "out_val_usd", "mid_val_1_btc", "mid_val_1_usd", "mid_val_2_btc",
    "mid_val_2_usd", "fee_1_btc", "fee_1_usd", "fee_2_btc", "fee_2_usd",
    "fee_3_btc", "fee_3_usd", "nb_address_1", "nb_address_2",
};

std::string quantity_units(std::string_view q) {
    if (q.ends_with("_btc")) return "btc";
    if (q.ends_with("_usd")) return "usd";
    return "count";
}

std::vector<FeatureColumn> build_full_schema() {
    std::vector<FeatureColumn> c;
    c.reserve(kTotalFeatures);
    auto add = [&](FeatureGroup g, std::string name, std::string units) {
        c.push_back({std::move(name), g, std::move(units)});
    };

    // Address features are per-address statistics averaged over the entity's
    // address set.
    add(FeatureGroup::Address, "total_received_btc", "btc");
    add(FeatureGroup::Address, "balance_btc", "btc");
    add(FeatureGroup::Address, "nb_input_txs", "count");
    add(FeatureGroup::Address, "nb_output_txs", "count");
    add(FeatureGroup::Address, "nb_predecessors", "count");
    add(FeatureGroup::Address, "nb_unique_predecessors", "count");
    add(FeatureGroup::Address, "nb_successors", "count");
    add(FeatureGroup::Address, "nb_unique_successors", "count");
    add(FeatureGroup::Address, "nb_predecessor_successor", "count");
    add(FeatureGroup::Address, "nb_siblings", "count");

    add(FeatureGroup::Entity, "total_received_btc", "btc");
    add(FeatureGroup::Entity, "balance_btc", "btc");
    add(FeatureGroup::Entity, "nb_input_txs", "count");
    add(FeatureGroup::Entity, "nb_output_txs", "count");
    add(FeatureGroup::Entity, "nb_unique_predecessors", "count");
    add(FeatureGroup::Entity, "nb_unique_successors", "count");
    add(FeatureGroup::Entity, "nb_coinbase", "count");
    add(FeatureGroup::Entity, "prop_coinbase", "ratio");

    add(FeatureGroup::Temporal, "weeks_active", "count");
    add(FeatureGroup::Temporal, "months_active", "count");
    add(FeatureGroup::Temporal, "years_active", "count");
    for (const char* g : {"week", "month", "year"}) {
        add(FeatureGroup::Temporal, std::string("mean_traded_per_") + g, "count");
        add(FeatureGroup::Temporal, std::string("std_traded_per_") + g, "count");
    }
    add(FeatureGroup::Temporal, "receiving_days", "count");
    add(FeatureGroup::Temporal, "sending_days", "count");
    add(FeatureGroup::Temporal, "active_days", "count");
    add(FeatureGroup::Temporal, "duration_days", "days");
    add(FeatureGroup::Temporal, "active_day_ratio", "ratio");
    add(FeatureGroup::Temporal, "receiving_day_ratio", "ratio");
    add(FeatureGroup::Temporal, "sending_day_ratio", "ratio");

    for (const char* m : {"betweenness", "closeness", "degree", "in_degree", "out_degree",
                          "pagerank", "load"}) {
        for (const char* g : {"week", "month", "year"}) {
            add(FeatureGroup::Centrality, std::string(m) + "_" + g + "_mean", "score");
            add(FeatureGroup::Centrality, std::string(m) + "_" + g + "_std", "score");
        }
    }

    // 1-motifs: incoming/outgoing carry 16 columns, loops 12 (no address or
    // per-day statistics, which are directionless for self-payments).
    for (int r = 0; r < 3; ++r) {
        std::string p = kMotifRoles[r];
        add(FeatureGroup::Motif1, p + "_nb_motifs", "count");
        add(FeatureGroup::Motif1, p + "_mean_val_btc", "btc");
        add(FeatureGroup::Motif1, p + "_std_val_btc", "btc");
        add(FeatureGroup::Motif1, p + "_mean_val_usd", "usd");
        add(FeatureGroup::Motif1, p + "_std_val_usd", "usd");
        add(FeatureGroup::Motif1, p + "_total_val_btc", "btc");
        add(FeatureGroup::Motif1, p + "_total_val_usd", "usd");
        add(FeatureGroup::Motif1, p + "_mean_fee_btc", "btc");
        add(FeatureGroup::Motif1, p + "_std_fee_btc", "btc");
        add(FeatureGroup::Motif1, p + "_mean_fee_usd", "usd");
        add(FeatureGroup::Motif1, p + "_std_fee_usd", "usd");
        add(FeatureGroup::Motif1, p + "_total_fee_btc", "btc");
        if (r != kLoop) {
            add(FeatureGroup::Motif1, p + "_mean_nb_addresses", "count");
            add(FeatureGroup::Motif1, p + "_std_nb_addresses", "count");
            add(FeatureGroup::Motif1, p + "_mean_tx_per_day", "txs_per_day");
            add(FeatureGroup::Motif1, p + "_std_tx_per_day", "txs_per_day");
        }
    }

    for (int r = 0; r < 3; ++r) {
        std::string p = kMotifRoles[r];
        add(FeatureGroup::Motif2, p + "_2_nb_motifs", "count");
        for (const char* q : kMotif2Quantities) {
            add(FeatureGroup::Motif2, p + "_2_mean_" + q, quantity_units(q));
            add(FeatureGroup::Motif2, p + "_2_std_" + q, quantity_units(q));
        }
    }

    for (int r = 0; r < 3; ++r) {
        std::string p = kMotifRoles[r];
        add(FeatureGroup::Motif3, p + "_3_nb_motifs", "count");
        for (const char* q : kMotif3Quantities) {
            add(FeatureGroup::Motif3, p + "_3_mean_" + q, quantity_units(q));
            add(FeatureGroup::Motif3, p + "_3_std_" + q, quantity_units(q));
        }
    }
    add(FeatureGroup::Motif3, "unique_entity_3_predecessor", "count");
    add(FeatureGroup::Motif3, "unique_entity_3_middle", "count");
    add(FeatureGroup::Motif3, "unique_entity_3_successor", "count");

    return c;
}

struct MeanVar {
    std::uint64_t n = 0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sumsq += x * x;
    }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double stddev() const { // population
        if (n < 2) return 0.0;
        double m = mean();
        double v = sumsq / double(n) - m * m;
        return v > 0.0 ? std::sqrt(v) : 0.0;
    }
};

} // namespace

std::string_view to_string(FeatureGroup g) {
    switch (g) {
    case FeatureGroup::Address: return "address";
    case FeatureGroup::Entity: return "entity";
    case FeatureGroup::Temporal: return "temporal";
    case FeatureGroup::Centrality: return "centrality";
    case FeatureGroup::Motif1: return "motif1";
    case FeatureGroup::Motif2: return "motif2";
    case FeatureGroup::Motif3: return "motif3";
    }
    return "?";
}

const FeatureSchema& FeatureSchema::full() {
    static const FeatureSchema schema = [] {
        FeatureSchema s;
        s.columns_ = build_full_schema();
        std::array<int, kNumFeatureGroups> sizes{};
        std::set<std::string> labels;
        for (int i = 0; i < int(s.columns_.size()); ++i) {
            sizes[int(s.columns_[i].group)]++;
            if (!labels.insert(s.label(i)).second)
                throw ValidationError("duplicate feature column " + s.label(i));
        }
        for (int g = 0; g < kNumFeatureGroups; ++g)
            if (sizes[g] != kGroupSizes[g])
                throw ValidationError("feature group " +
                                      std::string(to_string(FeatureGroup(g))) + " has " +
                                      std::to_string(sizes[g]) + " columns, expected " +
                                      std::to_string(kGroupSizes[g]));
        if (s.width() != kTotalFeatures)
            throw ValidationError("feature schema width " + std::to_string(s.width()));
        return s;
    }();
    return schema;
}

FeatureSchema FeatureSchema::subset(const std::vector<FeatureGroup>& groups) const {
    if (groups.empty())
        throw ConfigError("feature subset needs at least one group");
    std::set<int> wanted;
    for (FeatureGroup g : groups) wanted.insert(int(g));
    FeatureSchema s;
    for (const auto& col : columns_)
        if (wanted.count(int(col.group))) s.columns_.push_back(col);
    return s;
}

std::string FeatureSchema::label(int column) const {
    const auto& c = columns_.at(std::size_t(column));
    return std::string(to_string(c.group)) + "." + c.name;
}

int FeatureSchema::column_index(std::string_view label) const {
    for (int i = 0; i < width(); ++i)
        if (this->label(i) == label) return i;
    return -1;
}

std::uint64_t FeatureSchema::hash() const {
    std::uint64_t h = fnv1a(std::to_string(kVersion));
    for (int i = 0; i < width(); ++i) {
        h = fnv1a(label(i), h);
        h = fnv1a("|", h);
        h = fnv1a(columns_[std::size_t(i)].units, h);
        h = fnv1a("\n", h);
    }
    return h;
}

void FeatureSchema::write_json(std::ostream& out) const {
    nlohmann::ordered_json j;
    j["version"] = kVersion;
    j["total"] = width();
    auto groups = nlohmann::ordered_json::array();
    std::array<int, kNumFeatureGroups> sizes{};
    for (const auto& c : columns_) sizes[int(c.group)]++;
    for (int g = 0; g < kNumFeatureGroups; ++g) {
        if (sizes[g] == 0) continue;
        groups.push_back({{"group", std::string(to_string(FeatureGroup(g)))}, {"size", sizes[g]}});
    }
    j["groups"] = groups;
    auto cols = nlohmann::ordered_json::array();
    for (int i = 0; i < width(); ++i) {
        const auto& c = columns_[std::size_t(i)];
        cols.push_back({{"index", i},
                        {"label", label(i)},
                        {"group", std::string(to_string(c.group))},
                        {"name", c.name},
                        {"units", c.units}});
    }
    j["columns"] = cols;
    j["notes"] = {
        "address-group values are means of per-address statistics over the entity's addresses",
        "siblings of an address are the distinct co-recipient addresses across its receiving transactions",
        "usd columns apply the last known daily price at the relevant transaction's time",
        "motif mean/std are population statistics over motif instances; tx_per_day is over days with at least one such transaction",
        "centrality mean/std are over the calendar windows in which the entity is active",
    };
    out << j.dump(2) << '\n';
}

namespace {

void append_double(std::string& line, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    line.append(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

} // namespace

void write_feature_matrix_csv(const FeatureMatrix& m, std::ostream& out) {
    std::string line = "entity_id,label";
    for (int i = 0; i < m.schema.width(); ++i) {
        line += ',';
        line += m.schema.label(i);
    }
    line += '\n';
    out << line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        line.clear();
        line += std::to_string(m.entity_ids[r]);
        line += ',';
        line += to_string(m.labels[r]);
        for (int j = 0; j < m.schema.width(); ++j) {
            line += ',';
            append_double(line, m.values(Eigen::Index(r), j));
        }
        line += '\n';
        out << line;
    }
}

FeatureMatrix read_feature_matrix_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("feature csv: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv(line);
    if (header.size() < 3 || header[0] != "entity_id" || header[1] != "label")
        throw ParseError("feature csv: header must start with entity_id,label");

    const FeatureSchema& full = FeatureSchema::full();
    FeatureMatrix m;
    {
        // Rebuild the schema from the header; every column must exist in the
        // full schema.
        FeatureSchema s;
        std::vector<FeatureColumn> cols;
        for (std::size_t i = 2; i < header.size(); ++i) {
            int idx = full.column_index(header[i]);
            if (idx < 0)
                throw ParseError("feature csv: unknown column '" + header[i] + "'");
            cols.push_back(full.columns()[std::size_t(idx)]);
        }
        std::vector<FeatureGroup> groups;
        for (const auto& c : cols) groups.push_back(c.group);
        s = full.subset(groups);
        if (s.columns().size() != cols.size())
            throw ParseError("feature csv: columns out of schema order or duplicated");
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (s.columns()[i].name != cols[i].name)
                throw ParseError("feature csv: columns out of schema order");
        m.schema = std::move(s);
    }

    int width = m.schema.width();
    std::vector<double> data;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (int(fields.size()) != width + 2)
            throw ParseError("feature csv line " + std::to_string(lineno) + ": expected " +
                             std::to_string(width + 2) + " fields, got " +
                             std::to_string(fields.size()));
        EntityId id = 0;
        auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id);
        if (ec != std::errc() || p != fields[0].data() + fields[0].size())
            throw ParseError("feature csv line " + std::to_string(lineno) + ": bad entity_id '" +
                             fields[0] + "'");
        auto cat = category_from_string(fields[1]);
        if (!cat)
            throw ParseError("feature csv line " + std::to_string(lineno) + ": unknown label '" +
                             fields[1] + "'");
        m.entity_ids.push_back(id);
        m.labels.push_back(*cat);
        for (int j = 0; j < width; ++j) {
            const std::string& f = fields[std::size_t(j) + 2];
            double v = 0.0;
            auto [fp, fec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (fec != std::errc() || fp != f.data() + f.size())
                throw ParseError("feature csv line " + std::to_string(lineno) +
                                 ": bad number '" + f + "'");
            data.push_back(v);
        }
    }
    std::size_t rows = m.entity_ids.size();
    m.values.resize(Eigen::Index(rows), width);
    for (std::size_t r = 0; r < rows; ++r)
        for (int j = 0; j < width; ++j)
            m.values(Eigen::Index(r), j) = data[r * std::size_t(width) + std::size_t(j)];
    m.entity_idxs.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) m.entity_idxs[r] = EntityIdx(r);
    m.truncated.assign(rows, 0);
    return m;
}

FeatureExtractor::FeatureExtractor(const AddressTxGraph& addr_graph, const EntityTxGraph& graph,
                                   const EntityMap& entities, const PriceTable& prices,
                                   const MotifLimits& limits, int threads)
    : addr_graph_(addr_graph), graph_(graph), entities_(entities), prices_(prices),
      limits_(limits) {
    if (prices_.empty())
        throw ConfigError("feature extraction requires a non-empty price table");
    Eigen::Index n = Eigen::Index(graph_.entity_count());
    for (int g = 0; g < kNumFeatureGroups; ++g)
        blocks_[std::size_t(g)] = Eigen::MatrixXd::Zero(n, kGroupSizes[std::size_t(g)]);
    truncated_.assign(std::size_t(n), 0);
    if (n == 0) return;
    compute_address_entity();
    compute_temporal();
    compute_centrality(threads);
    compute_motifs(threads);
}

namespace {

// Aggregated output edge tx -> e, or null if the transaction pays e nothing.
const EntityTxGraph::Edge* entity_output(const EntityTxGraph::TxNode& tx, EntityIdx e) {
    auto it = std::lower_bound(tx.outputs.begin(), tx.outputs.end(), e,
                               [](const EntityTxGraph::Edge& edge, EntityIdx idx) {
                                   return edge.entity < idx;
                               });
    return (it != tx.outputs.end() && it->entity == e) ? &*it : nullptr;
}

} // namespace

void FeatureExtractor::compute_address_entity() {
    auto& addr_block = blocks_[int(FeatureGroup::Address)];
    auto& ent_block = blocks_[int(FeatureGroup::Entity)];
    const auto& etxs = graph_.txs();
    const auto& atxs = addr_graph_.txs();

    std::vector<AddressId> scratch;
    auto distinct_inputs = [&](const AddressTxGraph::TxNode& tx) -> const std::vector<AddressId>& {
        scratch.clear();
        for (const auto& e : tx.inputs) scratch.push_back(e.address);
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        return scratch;
    };
    auto distinct_outputs = [&](const AddressTxGraph::TxNode& tx) -> const std::vector<AddressId>& {
        scratch.clear();
        for (const auto& e : tx.outputs) scratch.push_back(e.address);
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        return scratch;
    };

    for (EntityIdx e = 0; e < graph_.entity_count(); ++e) {
        const auto& node = graph_.entities()[e];

        double received = 0.0;
        std::uint64_t coinbase = 0;
        std::set<EntityIdx> pred, succ;
        for (TxId t : node.receiving_txs) {
            const auto& tx = etxs[t];
            if (const auto* edge = entity_output(tx, e)) received += to_btc(edge->sats);
            if (tx.coinbase)
                ++coinbase;
            else if (tx.input)
                pred.insert(tx.input->entity);
        }
        double sent = 0.0;
        for (TxId t : node.spending_txs) {
            const auto& tx = etxs[t];
            sent += to_btc(tx.input->sats);
            for (const auto& out : tx.outputs) succ.insert(out.entity);
        }
        double nb_in = double(node.receiving_txs.size());
        ent_block(e, 0) = received;
        ent_block(e, 1) = received - sent;
        ent_block(e, 2) = nb_in;
        ent_block(e, 3) = double(node.spending_txs.size());
        ent_block(e, 4) = double(pred.size());
        ent_block(e, 5) = double(succ.size());
        ent_block(e, 6) = double(coinbase);
        ent_block(e, 7) = nb_in > 0 ? double(coinbase) / nb_in : 0.0;

        const auto& members = entities_.addresses_of(node.canonical_id);
        Eigen::Matrix<double, 10, 1> acc = Eigen::Matrix<double, 10, 1>::Zero();
        for (AddressId member : members) {
            auto a = addr_graph_.find_address(entities_.address_name(member));
            if (!a)
                throw LookupError("entity address missing from transaction graph");
            const auto& an = addr_graph_.addresses()[*a];

            double a_received = 0.0, a_spent = 0.0;
            std::uint64_t n_pred = 0, n_succ = 0;
            std::set<AddressId> u_pred, u_succ, u_sibling;
            for (TxId t : an.receiving_txs) {
                const auto& tx = atxs[t];
                for (const auto& out : tx.outputs)
                    if (out.address == *a) a_received += to_btc(out.sats);
                for (AddressId in : distinct_inputs(tx)) {
                    ++n_pred;
                    u_pred.insert(in);
                }
                for (AddressId out : distinct_outputs(tx))
                    if (out != *a) u_sibling.insert(out);
            }
            for (TxId t : an.spending_txs) {
                const auto& tx = atxs[t];
                for (const auto& in : tx.inputs)
                    if (in.address == *a) a_spent += to_btc(in.sats);
                for (AddressId out : distinct_outputs(tx)) {
                    ++n_succ;
                    u_succ.insert(out);
                }
            }
            std::uint64_t both = 0;
            for (AddressId p : u_pred) both += u_succ.count(p);

            acc[0] += a_received;
            acc[1] += a_received - a_spent;
            acc[2] += double(an.receiving_txs.size());
            acc[3] += double(an.spending_txs.size());
            acc[4] += double(n_pred);
            acc[5] += double(u_pred.size());
            acc[6] += double(n_succ);
            acc[7] += double(u_succ.size());
            acc[8] += double(both);
            acc[9] += double(u_sibling.size());
        }
        addr_block.row(e) = (acc / double(members.size())).transpose();
    }
}

void FeatureExtractor::compute_temporal() {
    auto& block = blocks_[int(FeatureGroup::Temporal)];
    const auto& etxs = graph_.txs();
    constexpr Granularity kGrans[3] = {Granularity::Week, Granularity::Month, Granularity::Year};

    for (EntityIdx e = 0; e < graph_.entity_count(); ++e) {
        const auto& node = graph_.entities()[e];
        std::set<std::int64_t> receiving_days, sending_days, active_days;
        std::array<std::map<std::int64_t, std::set<EntityIdx>>, 3> traded;

        auto touch = [&](std::int64_t ts) {
            std::int64_t day = utc_day(ts);
            active_days.insert(day);
            for (int gi = 0; gi < 3; ++gi) traded[gi][window_start_day(day, kGrans[gi])];
            return day;
        };
        for (TxId t : node.receiving_txs) {
            const auto& tx = etxs[t];
            std::int64_t day = touch(tx.timestamp);
            receiving_days.insert(day);
            if (tx.input && tx.input->entity != e)
                for (int gi = 0; gi < 3; ++gi)
                    traded[gi][window_start_day(day, kGrans[gi])].insert(tx.input->entity);
        }
        for (TxId t : node.spending_txs) {
            const auto& tx = etxs[t];
            std::int64_t day = touch(tx.timestamp);
            sending_days.insert(day);
            for (const auto& out : tx.outputs)
                if (out.entity != e)
                    for (int gi = 0; gi < 3; ++gi)
                        traded[gi][window_start_day(day, kGrans[gi])].insert(out.entity);
        }

        std::array<MeanVar, 3> traded_stats;
        for (int gi = 0; gi < 3; ++gi)
            for (const auto& [start, partners] : traded[gi])
                traded_stats[std::size_t(gi)].add(double(partners.size()));

        double duration = 0.0;
        if (!active_days.empty())
            duration = double(*active_days.rbegin() - *active_days.begin() + 1);

        int col = 0;
        for (int gi = 0; gi < 3; ++gi) block(e, col++) = double(traded[std::size_t(gi)].size());
        for (int gi = 0; gi < 3; ++gi) {
            block(e, col++) = traded_stats[std::size_t(gi)].mean();
            block(e, col++) = traded_stats[std::size_t(gi)].stddev();
        }
        block(e, col++) = double(receiving_days.size());
        block(e, col++) = double(sending_days.size());
        block(e, col++) = double(active_days.size());
        block(e, col++) = duration;
        block(e, col++) = duration > 0 ? double(active_days.size()) / duration : 0.0;
        block(e, col++) = duration > 0 ? double(receiving_days.size()) / duration : 0.0;
        block(e, col++) = duration > 0 ? double(sending_days.size()) / duration : 0.0;
    }
}

void FeatureExtractor::compute_centrality(int threads) {
    auto& block = blocks_[int(FeatureGroup::Centrality)];
    constexpr Granularity kGrans[3] = {Granularity::Week, Granularity::Month, Granularity::Year};
    constexpr int kMeasures = 7;

    std::size_t n = graph_.entity_count();
    // acc[entity][measure * 3 + granularity]
    std::vector<std::array<MeanVar, std::size_t(kMeasures) * 3>> acc(n);

    struct WindowScores {
        std::vector<EntityIdx> active;
        CentralityScores scores;
    };
    for (int gi = 0; gi < 3; ++gi) {
        auto windows = window_partition(graph_.span_begin(), graph_.span_end(), kGrans[gi]);
        ordered_parallel_fold<WindowScores>(
            windows.size(), threads,
            [&](std::size_t wi) {
                DiscreteTimeGraph dt =
                    aggregate_window(graph_, windows[wi].begin, windows[wi].end);
                return WindowScores{dt.active, compute_centralities(dt)};
            },
            [&](std::size_t, WindowScores&& w) {
                const Eigen::VectorXd* measures[kMeasures] = {
                    &w.scores.betweenness, &w.scores.closeness,  &w.scores.degree,
                    &w.scores.in_degree,   &w.scores.out_degree, &w.scores.pagerank,
                    &w.scores.load};
                for (std::size_t i = 0; i < w.active.size(); ++i)
                    for (int m = 0; m < kMeasures; ++m)
                        acc[w.active[i]][std::size_t(m * 3 + gi)].add(
                            (*measures[m])(Eigen::Index(i)));
            });
    }

    for (std::size_t e = 0; e < n; ++e) {
        int col = 0;
        for (int m = 0; m < kMeasures; ++m)
            for (int gi = 0; gi < 3; ++gi) {
                block(Eigen::Index(e), col++) = acc[e][std::size_t(m * 3 + gi)].mean();
                block(Eigen::Index(e), col++) = acc[e][std::size_t(m * 3 + gi)].stddev();
            }
    }
}

namespace {

struct Motif1Acc {
    std::uint64_t n = 0;
    MeanVar val_btc, val_usd, fee_btc, fee_usd, nb_addr;
    std::map<std::int64_t, std::uint32_t> tx_days;
    TxId last_tx = 0;
    bool seen_tx = false;

    void add(double vb, double vu, double fb, double fu, double addrs, TxId tx,
             std::int64_t day) {
        ++n;
        val_btc.add(vb);
        val_usd.add(vu);
        fee_btc.add(fb);
        fee_usd.add(fu);
        nb_addr.add(addrs);
        // Motifs sharing a transaction arrive consecutively per bucket, so
        // adjacent deduplication counts distinct transactions per day.
        if (!seen_tx || tx != last_tx) {
            seen_tx = true;
            last_tx = tx;
            tx_days[day] += 1;
        }
    }
};

template <std::size_t N>
struct PathAcc {
    std::uint64_t n = 0;
    std::array<MeanVar, N> q;

    void add(const std::array<double, N>& values) {
        ++n;
        for (std::size_t i = 0; i < N; ++i) q[i].add(values[i]);
    }
};

} // namespace

void FeatureExtractor::compute_motifs(int threads) {
    std::size_t n = graph_.entity_count();
    std::vector<std::array<Motif1Acc, 3>> m1(n);
    std::vector<std::array<PathAcc<13>, 3>> m2(n);
    std::vector<std::array<PathAcc<18>, 3>> m3(n);
    std::vector<std::set<EntityIdx>> u_pred(n), u_mid(n), u_succ(n);

    for_each_1motif(graph_, [&](const MotifInstance& m) {
        const MotifHop& h = m.hops[0];
        double vb = to_btc(m.hop_value[0]);
        double vu = prices_.usd_value(vb, h.timestamp);
        double fb = to_btc(h.fee);
        double fu = prices_.usd_value(fb, h.timestamp);
        std::int64_t day = utc_day(h.timestamp);
        if (m.loop) {
            m1[m.first()][kLoop].add(vb, vu, fb, fu, double(m.last_subsumed), h.tx, day);
        } else {
            m1[m.first()][kOutgoing].add(vb, vu, fb, fu, double(m.last_subsumed), h.tx, day);
            m1[m.last()][kIncoming].add(vb, vu, fb, fu, double(h.nb_inputs), h.tx, day);
        }
    });

    summary2_ = for_each_direct_motif(
        graph_, addr_graph_, 2, limits_, threads, [&](const MotifInstance& m) {
            const MotifHop& h1 = m.hops[0];
            const MotifHop& h2 = m.hops[1];
            std::array<double, 13> q;
            q[0] = double(h1.nb_inputs);
            q[1] = double(h2.nb_outputs);
            double in_b = to_btc(h1.input_total);
            q[2] = in_b;
            q[3] = prices_.usd_value(in_b, h1.timestamp);
            double out_b = to_btc(h2.output_total);
            q[4] = out_b;
            q[5] = prices_.usd_value(out_b, h2.timestamp);
            double mid_b = to_btc(m.hop_value[0]);
            q[6] = mid_b;
            q[7] = prices_.usd_value(mid_b, h1.timestamp);
            double f1 = to_btc(h1.fee);
            q[8] = f1;
            q[9] = prices_.usd_value(f1, h1.timestamp);
            double f2 = to_btc(h2.fee);
            q[10] = f2;
            q[11] = prices_.usd_value(f2, h2.timestamp);
            q[12] = double(m.shared_addresses[0]);
            if (m.loop) {
                m2[m.first()][kLoop].add(q);
            } else {
                m2[m.first()][kOutgoing].add(q);
                m2[m.last()][kIncoming].add(q);
            }
        });

    summary3_ = for_each_direct_motif(
        graph_, addr_graph_, 3, limits_, threads, [&](const MotifInstance& m) {
            const MotifHop& h1 = m.hops[0];
            const MotifHop& h2 = m.hops[1];
            const MotifHop& h3 = m.hops[2];
            std::array<double, 18> q;
            q[0] = double(h1.nb_inputs);
            q[1] = double(h3.nb_outputs);
            double in_b = to_btc(h1.input_total);
            q[2] = in_b;
            q[3] = prices_.usd_value(in_b, h1.timestamp);
            double out_b = to_btc(h3.output_total);
            q[4] = out_b;
            q[5] = prices_.usd_value(out_b, h3.timestamp);
            double mid1_b = to_btc(m.hop_value[0]);
            q[6] = mid1_b;
            q[7] = prices_.usd_value(mid1_b, h1.timestamp);
            double mid2_b = to_btc(m.hop_value[1]);
            q[8] = mid2_b;
            q[9] = prices_.usd_value(mid2_b, h2.timestamp);
            double f1 = to_btc(h1.fee);
            q[10] = f1;
            q[11] = prices_.usd_value(f1, h1.timestamp);
            double f2 = to_btc(h2.fee);
            q[12] = f2;
            q[13] = prices_.usd_value(f2, h2.timestamp);
            double f3 = to_btc(h3.fee);
            q[14] = f3;
            q[15] = prices_.usd_value(f3, h3.timestamp);
            q[16] = double(m.shared_addresses[0]);
            q[17] = double(m.shared_addresses[1]);
            if (m.loop) {
                m3[m.first()][kLoop].add(q);
                u_mid[m.first()].insert(m.entities[1]);
                u_mid[m.first()].insert(m.entities[2]);
            } else {
                m3[m.first()][kOutgoing].add(q);
                u_succ[m.first()].insert(m.last());
                u_mid[m.first()].insert(m.entities[1]);
                u_mid[m.first()].insert(m.entities[2]);
                m3[m.last()][kIncoming].add(q);
                u_pred[m.last()].insert(m.first());
                u_mid[m.last()].insert(m.entities[1]);
                u_mid[m.last()].insert(m.entities[2]);
            }
        });

    for (EntityIdx e : summary2_.truncated) truncated_[e] = 1;
    for (EntityIdx e : summary3_.truncated) truncated_[e] = 1;

    auto& b1 = blocks_[int(FeatureGroup::Motif1)];
    for (std::size_t e = 0; e < n; ++e) {
        int col = 0;
        for (int r = 0; r < 3; ++r) {
            const Motif1Acc& a = m1[e][std::size_t(r)];
            b1(Eigen::Index(e), col++) = double(a.n);
            b1(Eigen::Index(e), col++) = a.val_btc.mean();
            b1(Eigen::Index(e), col++) = a.val_btc.stddev();
            b1(Eigen::Index(e), col++) = a.val_usd.mean();
            b1(Eigen::Index(e), col++) = a.val_usd.stddev();
            b1(Eigen::Index(e), col++) = a.val_btc.sum;
            b1(Eigen::Index(e), col++) = a.val_usd.sum;
            b1(Eigen::Index(e), col++) = a.fee_btc.mean();
            b1(Eigen::Index(e), col++) = a.fee_btc.stddev();
            b1(Eigen::Index(e), col++) = a.fee_usd.mean();
            b1(Eigen::Index(e), col++) = a.fee_usd.stddev();
            b1(Eigen::Index(e), col++) = a.fee_btc.sum;
            if (r != kLoop) {
                MeanVar per_day;
                for (const auto& [day, count] : a.tx_days) per_day.add(double(count));
                b1(Eigen::Index(e), col++) = a.nb_addr.mean();
                b1(Eigen::Index(e), col++) = a.nb_addr.stddev();
                b1(Eigen::Index(e), col++) = per_day.mean();
                b1(Eigen::Index(e), col++) = per_day.stddev();
            }
        }
    }

    auto fill_path = [](auto& block, std::size_t e, const auto& roles) {
        int col = 0;
        for (int r = 0; r < 3; ++r) {
            const auto& a = roles[std::size_t(r)];
            block(Eigen::Index(e), col++) = double(a.n);
            for (const MeanVar& mv : a.q) {
                block(Eigen::Index(e), col++) = mv.mean();
                block(Eigen::Index(e), col++) = mv.stddev();
            }
        }
        return col;
    };
    auto& b2 = blocks_[int(FeatureGroup::Motif2)];
    auto& b3 = blocks_[int(FeatureGroup::Motif3)];
    for (std::size_t e = 0; e < n; ++e) {
        fill_path(b2, e, m2[e]);
        int col = fill_path(b3, e, m3[e]);
        b3(Eigen::Index(e), col++) = double(u_pred[e].size());
        b3(Eigen::Index(e), col++) = double(u_mid[e].size());
        b3(Eigen::Index(e), col++) = double(u_succ[e].size());
    }
}

Eigen::VectorXd FeatureExtractor::address_features(EntityIdx e) const {
    return blocks_[int(FeatureGroup::Address)].row(e).transpose();
}
Eigen::VectorXd FeatureExtractor::entity_features(EntityIdx e) const {
    return blocks_[int(FeatureGroup::Entity)].row(e).transpose();
}
Eigen::VectorXd FeatureExtractor::temporal_features(EntityIdx e) const {
    return blocks_[int(FeatureGroup::Temporal)].row(e).transpose();
}
Eigen::VectorXd FeatureExtractor::centrality_features(EntityIdx e) const {
    return blocks_[int(FeatureGroup::Centrality)].row(e).transpose();
}
Eigen::VectorXd FeatureExtractor::motif_features(EntityIdx e, int n) const {
    switch (n) {
    case 1: return blocks_[int(FeatureGroup::Motif1)].row(e).transpose();
    case 2: return blocks_[int(FeatureGroup::Motif2)].row(e).transpose();
    case 3: return blocks_[int(FeatureGroup::Motif3)].row(e).transpose();
    default: throw ConfigError("motif features exist for N in {1,2,3}");
    }
}

bool FeatureExtractor::truncated(EntityIdx e) const {
    return truncated_.at(e) != 0;
}

const MotifSummary& FeatureExtractor::direct_summary(int n) const {
    if (n == 2) return summary2_;
    if (n == 3) return summary3_;
    throw ConfigError("direct motif summaries exist for N in {2,3}");
}

FeatureMatrix FeatureExtractor::assemble(const std::map<EntityIdx, Category>& labels) const {
    return assemble(labels, std::vector<FeatureGroup>(kAllGroups.begin(), kAllGroups.end()));
}

FeatureMatrix FeatureExtractor::assemble(const std::map<EntityIdx, Category>& labels,
                                         const std::vector<FeatureGroup>& groups) const {
    FeatureMatrix out;
    out.schema = FeatureSchema::full().subset(groups);

    std::vector<FeatureGroup> ordered;
    int width = 0;
    for (FeatureGroup g : kAllGroups) {
        bool wanted = false;
        for (FeatureGroup r : groups) wanted |= (r == g);
        if (!wanted) continue;
        ordered.push_back(g);
        width += kGroupSizes[std::size_t(g)];
    }
    if (width != out.schema.width())
        throw ValidationError("feature matrix width mismatch against schema");

    out.values.resize(Eigen::Index(labels.size()), width);
    Eigen::Index row = 0;
    for (const auto& [e, cat] : labels) {
        if (e >= graph_.entity_count())
            throw LookupError("label refers to unknown entity index " + std::to_string(e));
        out.entity_ids.push_back(graph_.entities()[e].canonical_id);
        out.entity_idxs.push_back(e);
        out.labels.push_back(cat);
        out.truncated.push_back(truncated_[e]);
        int col = 0;
        for (FeatureGroup g : ordered) {
            int size = kGroupSizes[std::size_t(g)];
            out.values.block(row, col, 1, size) = blocks_[std::size_t(g)].row(e);
            col += size;
        }
        ++row;
    }
    if (out.values.size() > 0 && !out.values.allFinite())
        throw ValidationError("non-finite feature value");
    return out;
}

} // namespace elens

#include "elens/txmodel.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "elens/calendar.hpp"
#include "elens/errors.hpp"

namespace elens {

using nlohmann::json;

Sats TxRecord::input_total() const {
    Sats total = 0;
    for (const auto& io : inputs) total += io.sats;
    return total;
}

Sats TxRecord::output_total() const {
    Sats total = 0;
    for (const auto& io : outputs) total += io.sats;
    return total;
}

Sats TxRecord::fee() const {
    if (coinbase) return 0;
    return input_total() - output_total();
}

void TxRecord::validate() const {
    if (txid.empty())
        throw ValidationError("transaction with empty txid");
    if (height < 0)
        throw ValidationError("tx " + txid + ": negative block height");
    if (coinbase != inputs.empty())
        throw ValidationError("tx " + txid + ": coinbase flag requires empty inputs and vice versa");
    if (outputs.empty())
        throw ValidationError("tx " + txid + ": outputs must be non-empty");
    for (const auto& io : inputs) {
        if (io.address.empty()) throw ValidationError("tx " + txid + ": input with empty address");
        if (io.sats < 0) throw ValidationError("tx " + txid + ": negative input amount");
    }
    for (const auto& io : outputs) {
        if (io.address.empty()) throw ValidationError("tx " + txid + ": output with empty address");
        if (io.sats < 0) throw ValidationError("tx " + txid + ": negative output amount");
    }
    if (!coinbase && fee() < 0)
        throw ValidationError("tx " + txid + ": outputs exceed inputs (negative fee)");
}

namespace {

std::vector<TxIo> parse_io_array(const json& arr, const char* key) {
    if (!arr.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
    std::vector<TxIo> ios;
    ios.reserve(arr.size());
    for (const auto& item : arr) {
        TxIo io;
        io.address = item.at("address").get<std::string>();
        io.sats = item.at("sats").get<Sats>();
        ios.push_back(std::move(io));
    }
    return ios;
}

TxRecord parse_tx_line(const std::string& line) {
    json obj = json::parse(line);
    TxRecord tx;
    tx.txid = obj.at("txid").get<std::string>();
    tx.height = obj.at("height").get<std::int64_t>();
    tx.timestamp = obj.at("time").get<std::int64_t>();
    tx.coinbase = obj.at("coinbase").get<bool>();
    tx.inputs = parse_io_array(obj.at("inputs"), "inputs");
    tx.outputs = parse_io_array(obj.at("outputs"), "outputs");
    return tx;
}

} // namespace

std::vector<TxRecord> parse_transactions(std::istream& in) {
    std::vector<TxRecord> txs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            TxRecord tx = parse_tx_line(line);
            tx.validate();
            txs.push_back(std::move(tx));
        } catch (const json::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return txs;
}

void serialize_transactions(const std::vector<TxRecord>& txs, std::ostream& out) {
    for (const auto& tx : txs) {
        json ins = json::array();
        for (const auto& io : tx.inputs) ins.push_back({{"address", io.address}, {"sats", io.sats}});
        json outs = json::array();
        for (const auto& io : tx.outputs) outs.push_back({{"address", io.address}, {"sats", io.sats}});
        json obj{{"txid", tx.txid},         {"height", tx.height}, {"time", tx.timestamp},
                 {"coinbase", tx.coinbase}, {"inputs", ins},       {"outputs", outs}};
        out << obj.dump() << '\n';
    }
}

const char* const kCategoryNames[kNumCategories] = {"Exchange", "Service", "Gambling", "Mining",
                                                    "Darknet"};

std::string_view to_string(Category c) {
    return kCategoryNames[int(c)];
}

std::optional<Category> category_from_string(std::string_view name) {
    for (int i = 0; i < kNumCategories; ++i)
        if (name == kCategoryNames[i]) return Category(i);
    return std::nullopt;
}

void LabelSet::insert(const std::string& address, Category c) {
    auto [it, inserted] = map_.emplace(address, c);
    if (!inserted && it->second != c)
        throw ValidationError("address '" + address + "' labeled both " +
                              std::string(to_string(it->second)) + " and " +
                              std::string(to_string(c)));
}

std::optional<Category> LabelSet::find(const std::string& address) const {
    auto it = map_.find(address);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::string valid_category_names() {
    std::string names;
    for (int i = 0; i < kNumCategories; ++i) {
        if (i) names += ", ";
        names += kCategoryNames[i];
    }
    return names;
}

// Split a CSV line at commas. Fields in our formats never contain commas or
// quotes.
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

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

} // namespace

LabelSet load_labels(std::istream& in) {
    LabelSet labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (lineno == 1 && line == "address,category") continue;
        auto fields = split_csv(line);
        if (fields.size() != 2 || fields[0].empty())
            throw ParseError("labels line " + std::to_string(lineno) +
                             ": expected 'address,category'");
        auto cat = category_from_string(fields[1]);
        if (!cat)
            throw ParseError("labels line " + std::to_string(lineno) + ": unknown category '" +
                             fields[1] + "', valid: " + valid_category_names());
        labels.insert(fields[0], *cat);
    }
    return labels;
}

void PriceTable::add(std::int64_t day, double usd_per_btc) {
    if (usd_per_btc <= 0.0)
        throw ValidationError("price table: rate must be positive");
    if (!days_.empty() && day <= days_.back())
        throw ValidationError("price table: dates must be strictly increasing");
    days_.push_back(day);
    rates_.push_back(usd_per_btc);
}

double PriceTable::rate_at(std::int64_t timestamp) const {
    if (days_.empty())
        throw ConfigError("price table is empty");
    std::int64_t day = utc_day(timestamp);
    // First entry > day, then step back.
    auto it = std::upper_bound(days_.begin(), days_.end(), day);
    if (it == days_.begin()) return rates_.front();
    return rates_[std::size_t(it - days_.begin()) - 1];
}

double PriceTable::usd_value(double amount_btc, std::int64_t timestamp) const {
    return amount_btc * rate_at(timestamp);
}

PriceTable PriceTable::constant(double usd_per_btc) {
    PriceTable table;
    table.add(0, usd_per_btc);
    return table;
}

PriceTable load_prices(std::istream& in) {
    PriceTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        if (lineno == 1 && line == "date,usd_per_btc") continue;
        auto fields = split_csv(line);
        if (fields.size() != 2)
            throw ParseError("prices line " + std::to_string(lineno) +
                             ": expected 'date,usd_per_btc'");
        std::int64_t day;
        double rate;
        try {
            day = parse_date(fields[0]);
            rate = std::stod(fields[1]);
        } catch (const std::exception& e) {
            throw ParseError("prices line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            table.add(day, rate);
        } catch (const ValidationError& e) {
            throw ValidationError("prices line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return table;
}

void write_prices(const PriceTable& table, std::ostream& out) {
    out << "date,usd_per_btc\n";
    char buf[32];
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f", table.rate(i));
        out << format_date(table.day(i)) << ',' << buf << '\n';
    }
}

} // namespace elens

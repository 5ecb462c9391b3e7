#ifndef ELENS_TXMODEL_HPP
#define ELENS_TXMODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace elens {

// Amounts are integer satoshis internally; BTC appears only at feature
// boundaries.
using Sats = std::int64_t;
inline constexpr double kSatsPerBtc = 1e8;

inline double to_btc(Sats sats) { return double(sats) / kSatsPerBtc; }

// One edge endpoint of a transaction: an address and the amount it sends
// (input) or receives (output).
struct TxIo {
    std::string address;
    Sats sats = 0;

    bool operator==(const TxIo&) const = default;
};

struct TxRecord {
    std::string txid;
    std::int64_t height = 0;
    std::int64_t timestamp = 0; // unix seconds, UTC
    bool coinbase = false;
    std::vector<TxIo> inputs;
    std::vector<TxIo> outputs;

    Sats input_total() const;
    Sats output_total() const;
    // Recomputed from inputs/outputs, never trusted from input files.
    // Coinbase transactions have fee 0.
    Sats fee() const;

    // Throws ValidationError on: coinbase with inputs, non-coinbase without
    // inputs, empty outputs, negative amount, empty address, negative fee.
    void validate() const;

    bool operator==(const TxRecord&) const = default;
};

// Line-delimited JSON, one transaction object per line. Errors carry the
// 1-based line number. Blank lines are ignored.
std::vector<TxRecord> parse_transactions(std::istream& in);
void serialize_transactions(const std::vector<TxRecord>& txs, std::ostream& out);

enum class Category : int { Exchange = 0, Service, Gambling, Mining, Darknet };
inline constexpr int kNumCategories = 5;

// Fixed class order used everywhere a category index appears.
extern const char* const kCategoryNames[kNumCategories];

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view name);

// address -> category; each address maps to exactly one category.
class LabelSet {
public:
    // Re-inserting the same (address, category) is a no-op; inserting the same
    // address with a different category throws ValidationError.
    void insert(const std::string& address, Category c);
    std::optional<Category> find(const std::string& address) const;
    std::size_t size() const { return map_.size(); }
    const std::unordered_map<std::string, Category>& entries() const { return map_; }

private:
    std::unordered_map<std::string, Category> map_;
};

// CSV "address,category"; header row optional.
LabelSet load_labels(std::istream& in);

// Daily close prices with step-function (last-known-rate) lookup.
class PriceTable {
public:
    // Days must be appended in strictly increasing order with positive rates.
    void add(std::int64_t day, double usd_per_btc);

    // Rate of the latest table date <= the timestamp's UTC date; the first
    // rate if the timestamp precedes the table. Throws ConfigError when empty.
    double rate_at(std::int64_t timestamp) const;
    double usd_value(double amount_btc, std::int64_t timestamp) const;

    bool empty() const { return days_.empty(); }
    std::size_t size() const { return days_.size(); }
    std::int64_t day(std::size_t i) const { return days_[i]; }
    double rate(std::size_t i) const { return rates_[i]; }

    static PriceTable constant(double usd_per_btc);

private:
    std::vector<std::int64_t> days_;
    std::vector<double> rates_;
};

// CSV "date,usd_per_btc" with ISO-8601 dates; header row optional.
PriceTable load_prices(std::istream& in);
void write_prices(const PriceTable& table, std::ostream& out);

} // namespace elens

#endif

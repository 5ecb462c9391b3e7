#include "elens/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <queue>

#include "elens/calendar.hpp"
#include "elens/errors.hpp"
#include "elens/rng.hpp"

namespace elens {

namespace {

constexpr Sats kCoinbaseSubsidy = 2'500'000'000; // 25 BTC, pre-2016 era
constexpr Sats kMinPayment = 10'000;
constexpr std::int64_t kBlockSpacing = 600;

// Chain state delivered along with funds. Relay hops move to a fresh random
// entity while remaining > 0; Bounce hops return to the sender while a coin
// flip at probability `prob` keeps the rally going.
struct Reaction {
    enum Mode { None, Relay, Bounce };
    Mode mode = None;
    int remaining = 0;
    double prob = 0.0;
    int fan = 1;     // recipients of the chain's final hop
    int origin = -1; // >= 0: the final hop's first recipient (round trip)
};

struct Event {
    enum Kind { Seed, Payment, Round, Churn, Income, Payout, Hop, Sweep };
    double time = 0.0; // seconds since the configured start date
    std::uint64_t seq = 0;
    Kind kind = Payment;
    int entity = -1;
    int target = -1;  // recipient entity (Seed, Hop)
    int address = -1; // reserved input address (Hop)
    Sats amount = 0;  // Seed size
    Reaction reaction;
};

struct LaterEvent {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

struct Wallet {
    int id = -1;
    Category cat = Category::Exchange;
    bool faucet = false;

    double rate = 0.0;
    double amt_lo = 0.0, amt_hi = 0.0; // log satoshis
    int fan_in = 1, fan_lo = 1, fan_hi = 1;
    double reuse = 0.5;
    double bias = 0.0;
    double trigger = 0.0;
    int depth = 0;
    int chain_fan = 1;
    bool chain_return = false;
    double loop_prop = 0.0;
    double churn = 0.0;
    double income = 0.0, share = 0.0, payout = 0.0;
    int payout_fan = 0;
    std::vector<int> clique;

    std::vector<std::string> addrs;
    std::vector<Sats> balance;
    std::vector<std::uint8_t> reserved;
};

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

void check_rate(double r, const char* what) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw ConfigError(std::string(what) + " must be finite and >= 0");
}

class Generator {
public:
    explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    SynthData run() {
        validate();
        t0_ = parse_date(cfg_.start_date) * kSecondsPerDay;
        genesis_ts_ = t0_ - kSecondsPerDay;
        end_ = double(cfg_.duration_days) * double(kSecondsPerDay);
        make_prices();
        make_wallets();
        bootstrap();
        schedule_initial();
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            process(ev);
        }
        finish_txids();
        // Creation order is event-driven; regroup by entity for the output.
        std::stable_sort(ground_truth_.begin(), ground_truth_.end(),
                         [](const GroundTruthRow& a, const GroundTruthRow& b) {
                             return a.entity_id < b.entity_id;
                         });
        SynthData out;
        out.txs = std::move(txs_);
        out.prices = std::move(prices_);
        out.ground_truth = std::move(ground_truth_);
        return out;
    }

private:
    void validate() const {
        int total = 0;
        for (int c = 0; c < kNumCategories; ++c) {
            if (cfg_.entity_counts[std::size_t(c)] < 0)
                throw ConfigError("entity count must be >= 0");
            total += cfg_.entity_counts[std::size_t(c)];
        }
        if (total == 0)
            throw ConfigError("config generates no entities");
        if (cfg_.duration_days < 1)
            throw ConfigError("duration must be at least one day");
        if (!(cfg_.start_price_usd > 0.0))
            throw ConfigError("start price must be positive");

        bool non_mining = false;
        for (int c = 0; c < kNumCategories; ++c)
            if (c != int(Category::Mining) && cfg_.entity_counts[std::size_t(c)] > 0)
                non_mining = true;
        if (non_mining && total < 2)
            throw ConfigError("payments need at least two entities");

        for (int c = 0; c < kNumCategories; ++c) {
            const auto& a = cfg_.archetypes[std::size_t(c)];
            if (cfg_.entity_counts[std::size_t(c)] == 0) continue;
            check_rate(a.tx_rate_lo, "tx rate");
            check_rate(a.tx_rate_hi, "tx rate");
            check_rate(a.self_churn_rate, "churn rate");
            check_rate(a.income_rate, "income rate");
            check_rate(a.payout_rate, "payout rate");
            if (a.tx_rate_lo > a.tx_rate_hi)
                throw ConfigError("tx rate bounds inverted");
            if (!(a.amount_btc_lo > 0.0) || a.amount_btc_lo > a.amount_btc_hi)
                throw ConfigError("amount bounds must satisfy 0 < lo <= hi");
            if (a.fan_in_max < 1 || a.fan_out_lo < 1 || a.fan_out_lo > a.fan_out_hi)
                throw ConfigError("fan bounds must be >= 1 and ordered");
            if (a.clique_lo < 0 || a.clique_lo > a.clique_hi)
                throw ConfigError("clique bounds inverted");
            if (a.chain_depth < 0 || a.chain_depth > 8)
                throw ConfigError("chain depth must lie in [0, 8]");
            if (a.chain_fan_out < 1 || a.chain_fan_out > 8)
                throw ConfigError("chain fan-out must lie in [1, 8]");
            if (a.payout_rate > 0.0 && a.payout_fan_out < 1)
                throw ConfigError("payout fan-out must be >= 1");
            check_probability(a.address_reuse, "address reuse");
            check_probability(a.exchange_bias, "exchange bias");
            check_probability(a.chain_trigger, "chain trigger");
            check_probability(a.loop_propensity, "loop propensity");
            check_probability(a.coinbase_share, "coinbase share");
            if (c == int(Category::Gambling) && a.loop_propensity > 0.0 && total < 2)
                throw ConfigError("loop propensity needs at least two entities");
        }
    }

    // ---- setup ----

    void make_prices() {
        std::int64_t day0 = parse_date(cfg_.start_date);
        double p = cfg_.start_price_usd;
        for (std::int64_t d = day0 - 2; d <= day0 + cfg_.duration_days + 2; ++d) {
            prices_.add(d, p);
            p *= std::exp(0.03 * normal());
        }
    }

    void make_wallets() {
        for (int c = 0; c < kNumCategories; ++c) {
            const auto& a = cfg_.archetypes[std::size_t(c)];
            for (int i = 0; i < cfg_.entity_counts[std::size_t(c)]; ++i) {
                Wallet w;
                w.id = int(wallets_.size());
                w.cat = Category(c);
                w.rate = uniform_in(rng_, a.tx_rate_lo, a.tx_rate_hi);
                w.amt_lo = std::log(a.amount_btc_lo * kSatsPerBtc);
                w.amt_hi = std::log(a.amount_btc_hi * kSatsPerBtc);
                w.fan_in = a.fan_in_max;
                w.fan_lo = a.fan_out_lo;
                w.fan_hi = a.fan_out_hi;
                w.reuse = a.address_reuse;
                w.bias = a.exchange_bias;
                w.trigger = a.chain_trigger;
                w.depth = a.chain_depth;
                w.chain_fan = a.chain_fan_out;
                w.chain_return = a.chain_return;
                w.loop_prop = a.loop_propensity;
                w.churn = a.self_churn_rate;
                w.income = a.income_rate;
                w.share = a.coinbase_share;
                w.payout = a.payout_rate;
                w.payout_fan = a.payout_fan_out;
                wallets_.push_back(std::move(w));
                if (Category(c) == Category::Exchange)
                    exchanges_.push_back(int(wallets_.size()) - 1);
            }
        }
        n_entities_ = int(wallets_.size());

        // Fixed partner pools, drawn after every entity exists.
        for (auto& w : wallets_) {
            const auto& a = cfg_.archetypes[std::size_t(int(w.cat))];
            if (a.clique_hi == 0 || n_entities_ < 2) continue;
            int want = a.clique_lo + int(uniform_index(rng_, std::uint64_t(a.clique_hi -
                                                                           a.clique_lo + 1)));
            want = std::min(want, n_entities_ - 1);
            std::vector<int> pool;
            for (int e = 0; e < n_entities_; ++e)
                if (e != w.id) pool.push_back(e);
            shuffle_fy(pool, rng_);
            w.clique.assign(pool.begin(), pool.begin() + want);
            std::sort(w.clique.begin(), w.clique.end());
        }

        Wallet faucet;
        faucet.id = n_entities_;
        faucet.faucet = true;
        faucet.reuse = 1.0;
        wallets_.push_back(std::move(faucet));
        faucet_ = n_entities_;
    }

    // Genesis coinbase plus a split so the faucet can seed entities from many
    // addresses without cross-linking them.
    void bootstrap() {
        Wallet& f = wallets_[std::size_t(faucet_)];
        int a0 = fresh_address(f);
        TxRecord genesis;
        genesis.coinbase = true;
        genesis.outputs.push_back({f.addrs[std::size_t(a0)], 10'000'000'000'000});
        f.balance[std::size_t(a0)] += 10'000'000'000'000;
        emit(std::move(genesis), -double(kSecondsPerDay));

        Sats in = take_all(f, a0);
        TxRecord split;
        split.inputs.push_back({f.addrs[std::size_t(a0)], in});
        Sats per = 20'000'000'000; // 200 BTC per faucet address
        for (int i = 1; i < 50; ++i) {
            int a = fresh_address(f);
            split.outputs.push_back({f.addrs[std::size_t(a)], per});
            f.balance[std::size_t(a)] += per;
        }
        Sats fee = 100'000;
        Sats change = in - 49 * per - fee;
        split.outputs.push_back({f.addrs[std::size_t(a0)], change});
        f.balance[std::size_t(a0)] += change;
        emit(std::move(split), -double(kSecondsPerDay) / 2);
    }

    void schedule_initial() {
        // Two faucet seeds per non-mining entity inside the first two days.
        for (int e = 0; e < n_entities_; ++e) {
            if (wallets_[std::size_t(e)].cat == Category::Mining) continue;
            for (int k = 0; k < 2; ++k) {
                Event ev;
                ev.kind = Event::Seed;
                ev.time = uniform_in(rng_, 0.0, 2.0 * double(kSecondsPerDay));
                ev.entity = faucet_;
                ev.target = e;
                ev.amount = Sats(uniform_in(rng_, 4.0, 8.0) * kSatsPerBtc);
                push(ev);
            }
        }
        for (int e = 0; e < n_entities_; ++e) {
            const Wallet& w = wallets_[std::size_t(e)];
            if (w.rate > 0.0)
                recur(w.cat == Category::Gambling ? Event::Round : Event::Payment, e, 0.0,
                      w.rate);
            if (w.churn > 0.0) recur(Event::Churn, e, 0.0, w.churn);
            if (w.income > 0.0) recur(Event::Income, e, 0.0, w.income);
            if (w.payout > 0.0) recur(Event::Payout, e, 0.0, w.payout);
        }
        for (int e = 0; e < n_entities_; ++e) {
            Event ev;
            ev.kind = Event::Sweep;
            ev.time = end_ + 3600.0 + 30.0 * double(e);
            ev.entity = e;
            push(ev);
        }
    }

    // ---- event machinery ----

    void push(Event ev) {
        ev.seq = next_seq_++;
        queue_.push(ev);
    }

    void recur(Event::Kind kind, int entity, double now, double per_day) {
        double gap = -std::log(1.0 - uniform01(rng_)) / per_day * double(kSecondsPerDay);
        double t = now + gap;
        if (t >= end_) return;
        Event ev;
        ev.kind = kind;
        ev.time = t;
        ev.entity = entity;
        push(ev);
    }

    void process(const Event& ev) {
        Wallet& w = wallets_[std::size_t(ev.entity)];
        switch (ev.kind) {
        case Event::Seed: seed(ev); break;
        case Event::Payment:
            payment(w, ev.time);
            recur(Event::Payment, ev.entity, ev.time, w.rate);
            break;
        case Event::Round:
            round(w, ev.time);
            recur(Event::Round, ev.entity, ev.time, w.rate);
            break;
        case Event::Churn:
            churn(w, ev.time);
            recur(Event::Churn, ev.entity, ev.time, w.churn);
            break;
        case Event::Income:
            income(w, ev.time);
            recur(Event::Income, ev.entity, ev.time, w.income);
            break;
        case Event::Payout:
            payout(w, ev.time);
            recur(Event::Payout, ev.entity, ev.time, w.payout);
            break;
        case Event::Hop: hop(ev); break;
        case Event::Sweep: sweep(w, ev.time); break;
        }
    }

    void seed(const Event& ev) {
        Wallet& f = wallets_[std::size_t(faucet_)];
        int a = 1 + int(seed_round_++ % 49);
        if (f.balance[std::size_t(a)] < ev.amount + 100'000) a = 0;
        Sats in = take_all(f, a);
        if (in <= ev.amount) { // refund and shrink if the faucet ran dry
            f.balance[std::size_t(a)] += in;
            return;
        }
        TxRecord tx;
        tx.inputs.push_back({f.addrs[std::size_t(a)], in});
        Sats fee = std::max<Sats>(1000, in / 2000);
        fee = std::min(fee, in - ev.amount - 1);
        tx.outputs.push_back({deliver(ev.target, ev.amount, ev.time, {}, faucet_), ev.amount});
        Sats change = in - ev.amount - fee;
        tx.outputs.push_back({f.addrs[std::size_t(a)], change});
        f.balance[std::size_t(a)] += change;
        emit(std::move(tx), ev.time);
    }

    void payment(Wallet& w, double now) {
        if (n_entities_ < 2) return;
        std::vector<int> ins = gather(w, w.fan_in);
        if (ins.empty()) return;
        Sats total = 0;
        for (int a : ins) total += w.balance[std::size_t(a)] - 1;
        Sats fee = std::max<Sats>(1000, total / 2000);
        if (total - fee < kMinPayment) return;

        Sats want = Sats(std::exp(uniform_in(rng_, w.amt_lo, w.amt_hi)));
        Sats pay = std::min(want, total - fee);
        Sats change = total - fee - pay;

        int fan = w.fan_lo + int(uniform_index(rng_, std::uint64_t(w.fan_hi - w.fan_lo + 1)));
        bool chained = w.depth > 0 && uniform01(rng_) < w.trigger;

        TxRecord tx;
        for (int a : ins) tx.inputs.push_back({w.addrs[std::size_t(a)], take_all(w, a)});
        Sats left = pay;
        for (int i = 0; i < fan && left > 0; ++i) {
            Sats part = (i + 1 == fan) ? left : std::max<Sats>(1, left / (fan - i));
            left -= part;
            int to = pick_target(w);
            Reaction r;
            if (i == 0 && chained)
                r = {Reaction::Relay, w.depth, 0.0, w.chain_fan, w.chain_return ? w.id : -1};
            tx.outputs.push_back({deliver(to, part, now, r, w.id), part});
        }
        if (change > 0) tx.outputs.push_back({deliver(w.id, change, now, {}, w.id), change});
        emit(std::move(tx), now);
    }

    // A bet: small single-recipient payment whose delivery may bounce back,
    // producing gambler-centered loop motifs.
    void round(Wallet& w, double now) {
        if (n_entities_ < 2) return;
        std::vector<int> ins = gather(w, w.fan_in);
        if (ins.empty()) return;
        Sats total = 0;
        for (int a : ins) total += w.balance[std::size_t(a)] - 1;
        Sats fee = std::max<Sats>(1000, total / 2000);
        if (total - fee < kMinPayment) return;

        Sats want = Sats(std::exp(uniform_in(rng_, w.amt_lo, w.amt_hi)));
        Sats pay = std::min(want, total - fee);
        int to = pick_global(w.id);
        if (to < 0) return;

        TxRecord tx;
        for (int a : ins) tx.inputs.push_back({w.addrs[std::size_t(a)], take_all(w, a)});
        Reaction r{Reaction::Bounce, 8, w.loop_prop};
        tx.outputs.push_back({deliver(to, pay, now, r, w.id), pay});
        Sats change = total - fee - pay;
        if (change > 0) tx.outputs.push_back({deliver(w.id, change, now, {}, w.id), change});
        emit(std::move(tx), now);
    }

    void churn(Wallet& w, double now) {
        std::vector<int> ins = gather(w, 2);
        if (ins.empty()) return;
        Sats total = 0;
        for (int a : ins) total += w.balance[std::size_t(a)] - 1;
        Sats fee = std::max<Sats>(1000, total / 2000);
        if (total - fee < kMinPayment) return;
        TxRecord tx;
        for (int a : ins) tx.inputs.push_back({w.addrs[std::size_t(a)], take_all(w, a)});
        Sats out = total - fee;
        tx.outputs.push_back({deliver(w.id, out, now, {}, w.id), out});
        emit(std::move(tx), now);
    }

    void income(Wallet& w, double now) {
        if (uniform01(rng_) < w.share) {
            TxRecord tx;
            tx.coinbase = true;
            tx.outputs.push_back(
                {deliver(w.id, kCoinbaseSubsidy, now, {}, w.id), kCoinbaseSubsidy});
            emit(std::move(tx), now);
            return;
        }
        // Non-coinbase income arrives as a faucet transfer.
        Event ev;
        ev.kind = Event::Seed;
        ev.time = now;
        ev.entity = faucet_;
        ev.target = w.id;
        ev.amount = Sats(std::exp(uniform_in(rng_, w.amt_lo, w.amt_hi)));
        seed(ev);
    }

    void payout(Wallet& w, double now) {
        if (n_entities_ < 2) return;
        std::vector<int> ins = gather(w, 6);
        if (ins.empty()) return;
        Sats total = 0;
        for (int a : ins) total += w.balance[std::size_t(a)] - 1;
        Sats fee = std::max<Sats>(1000, total / 2000);
        Sats pool = total - fee;
        int fan = std::min<int>(w.payout_fan, n_entities_ - 1);
        if (pool < fan || fan < 1) return;

        TxRecord tx;
        for (int a : ins) tx.inputs.push_back({w.addrs[std::size_t(a)], take_all(w, a)});
        Sats left = pool;
        for (int i = 0; i < fan && left > 0; ++i) {
            Sats part = (i + 1 == fan) ? left : std::max<Sats>(1, pool / fan);
            part = std::min(part, left);
            left -= part;
            int to = pick_target(w);
            tx.outputs.push_back({deliver(to, part, now, {}, w.id), part});
        }
        emit(std::move(tx), now);
    }

    void hop(const Event& ev) {
        Wallet& w = wallets_[std::size_t(ev.entity)];
        int a = ev.address;
        w.reserved[std::size_t(a)] = 0;
        Sats in = w.balance[std::size_t(a)] - 1;
        Sats fee = std::max<Sats>(500, in / 4000);
        if (in - fee < 1) return;
        Sats out = in - fee;
        w.balance[std::size_t(a)] = 1;
        TxRecord tx;
        tx.inputs.push_back({w.addrs[std::size_t(a)], in});
        // The final hop sprays across `fan` recipients; earlier hops relay
        // the whole amount onward.
        int fan = ev.reaction.remaining == 0 ? std::max(1, ev.reaction.fan) : 1;
        Sats left = out;
        for (int i = 0; i < fan && left > 0; ++i) {
            Sats part = i + 1 == fan ? left : std::max<Sats>(1, left / (fan - i));
            int to = i == 0 ? ev.target : pick_global(w.id);
            if (to < 0) to = ev.target;
            tx.outputs.push_back({deliver(to, part, ev.time, ev.reaction, w.id), part});
            left -= part;
        }
        emit(std::move(tx), ev.time);
    }

    // The sweep co-spends every funded address, pinning the whole wallet to
    // one cluster; proceeds leave for the faucet so the sweep never counts as
    // entity income.
    void sweep(Wallet& w, double now) {
        TxRecord tx;
        Sats total = 0;
        for (std::size_t a = 0; a < w.addrs.size(); ++a) {
            Sats b = w.balance[a];
            if (b < 1) continue;
            tx.inputs.push_back({w.addrs[a], b});
            w.balance[a] = 0;
            total += b;
        }
        if (tx.inputs.empty()) return;
        Sats fee = std::min<Sats>(std::max<Sats>(1000, total / 2000), total - 1);
        Wallet& f = wallets_[std::size_t(faucet_)];
        tx.outputs.push_back({f.addrs[0], total - fee});
        f.balance[0] += total - fee;
        emit(std::move(tx), now);
    }

    // ---- wallet helpers ----

    int fresh_address(Wallet& w) {
        std::string name = w.faucet ? "fx" + std::to_string(w.addrs.size())
                                    : "e" + std::to_string(w.id) + "a" +
                                          std::to_string(w.addrs.size());
        if (!w.faucet)
            ground_truth_.push_back({name, w.id, w.cat});
        w.addrs.push_back(std::move(name));
        w.balance.push_back(0);
        w.reserved.push_back(0);
        return int(w.addrs.size()) - 1;
    }

    Sats take_all(Wallet& w, int a) {
        Sats b = w.balance[std::size_t(a)];
        w.balance[std::size_t(a)] = 1; // dust keeps every address sweepable
        return b - 1;
    }

    // Spendable addresses, shuffled, at most `want` of them.
    std::vector<int> gather(Wallet& w, int want) {
        std::vector<int> c;
        for (std::size_t a = 0; a < w.addrs.size(); ++a)
            if (w.balance[a] >= 2 && !w.reserved[a]) c.push_back(int(a));
        if (c.empty()) return c;
        shuffle_fy(c, rng_);
        int k = 1 + int(uniform_index(rng_, std::uint64_t(std::min<int>(want, int(c.size())))));
        c.resize(std::size_t(k));
        return c;
    }

    int pick_global(int self) {
        if (n_entities_ < 2) return -1;
        int t;
        do {
            t = int(uniform_index(rng_, std::uint64_t(n_entities_)));
        } while (t == self);
        return t;
    }

    int pick_target(const Wallet& w) {
        if (!w.clique.empty())
            return w.clique[uniform_index(rng_, w.clique.size())];
        if (w.bias > 0.0 && !exchanges_.empty() && uniform01(rng_) < w.bias) {
            int t = exchanges_[uniform_index(rng_, exchanges_.size())];
            if (t != w.id) return t;
        }
        return pick_global(w.id);
    }

    // Books `sats` into the recipient wallet and returns the funded address.
    // A live reaction reserves a fresh address and schedules the next hop.
    std::string deliver(int entity, Sats sats, double now, Reaction r, int sender) {
        Wallet& w = wallets_[std::size_t(entity)];
        bool cont = false;
        double delay = 0.0;
        if (r.mode == Reaction::Relay && r.remaining > 0) {
            cont = true;
            delay = uniform_in(rng_, 600.0, 7200.0);
        } else if (r.mode == Reaction::Bounce && r.remaining > 0 &&
                   uniform01(rng_) < r.prob) {
            cont = true;
            delay = uniform_in(rng_, 900.0, 14400.0);
        }
        int a;
        if (cont && now + delay < end_) { // hops after the horizon would dodge the sweep
            a = fresh_address(w);
            w.reserved[std::size_t(a)] = 1;
            Event ev;
            ev.kind = Event::Hop;
            ev.time = now + delay;
            ev.entity = entity;
            ev.address = a;
            if (r.mode == Reaction::Bounce)
                ev.target = sender;
            else if (r.remaining == 1 && r.origin >= 0)
                ev.target = r.origin;
            else
                ev.target = pick_global(entity);
            ev.reaction = {r.mode, r.remaining - 1, r.prob, r.fan, r.origin};
            if (ev.target >= 0)
                push(ev);
            else
                w.reserved[std::size_t(a)] = 0;
        } else {
            a = receive_address(w);
        }
        w.balance[std::size_t(a)] += sats;
        return w.addrs[std::size_t(a)];
    }

    int receive_address(Wallet& w) {
        if (!w.addrs.empty() && uniform01(rng_) < w.reuse) {
            int a = int(uniform_index(rng_, w.addrs.size()));
            if (!w.reserved[std::size_t(a)]) return a;
        }
        return fresh_address(w);
    }

    // ---- emission ----

    void emit(TxRecord tx, double time) {
        tx.timestamp = t0_ + std::llround(time);
        tx.height = (tx.timestamp - genesis_ts_) / kBlockSpacing;
        txs_.push_back(std::move(tx));
    }

    void finish_txids() {
        char buf[16];
        for (std::size_t i = 0; i < txs_.size(); ++i) {
            std::snprintf(buf, sizeof buf, "t%06zu", i);
            txs_[i].txid = buf;
            txs_[i].validate();
        }
    }

    double normal() {
        double u1 = 1.0 - uniform01(rng_);
        double u2 = uniform01(rng_);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    SynthConfig cfg_;
    std::mt19937_64 rng_;
    std::int64_t t0_ = 0, genesis_ts_ = 0;
    double end_ = 0.0;
    int n_entities_ = 0, faucet_ = 0;
    std::uint64_t next_seq_ = 0, seed_round_ = 0;

    std::vector<Wallet> wallets_;
    std::vector<int> exchanges_;
    std::priority_queue<Event, std::vector<Event>, LaterEvent> queue_;
    std::vector<TxRecord> txs_;
    PriceTable prices_;
    std::vector<GroundTruthRow> ground_truth_;
};

} // namespace

std::array<ArchetypeParams, kNumCategories> SynthConfig::default_archetypes() {
    std::array<ArchetypeParams, kNumCategories> a{};

    ArchetypeParams& exchange = a[std::size_t(Category::Exchange)];
    exchange.tx_rate_lo = 1.2;
    exchange.tx_rate_hi = 2.0;
    exchange.fan_in_max = 3;
    exchange.fan_out_lo = 2;
    exchange.fan_out_hi = 4;
    exchange.amount_btc_lo = 0.2;
    exchange.amount_btc_hi = 3.0;
    exchange.address_reuse = 0.35;
    exchange.exchange_bias = 0.25;

    ArchetypeParams& service = a[std::size_t(Category::Service)];
    service.tx_rate_lo = 0.7;
    service.tx_rate_hi = 1.3;
    service.fan_in_max = 2;
    service.fan_out_lo = 1;
    service.fan_out_hi = 2;
    service.amount_btc_lo = 0.05;
    service.amount_btc_hi = 0.8;
    service.address_reuse = 0.75;
    service.clique_lo = 4;
    service.clique_hi = 6;
    // Settlement round trips: funds hop through two intermediaries and come
    // back whole.
    service.chain_trigger = 0.65;
    service.chain_depth = 2;
    service.chain_return = true;

    ArchetypeParams& gambling = a[std::size_t(Category::Gambling)];
    gambling.tx_rate_lo = 1.5;
    gambling.tx_rate_hi = 2.5;
    gambling.fan_in_max = 2;
    gambling.fan_out_lo = 1;
    gambling.fan_out_hi = 1;
    gambling.amount_btc_lo = 0.01;
    gambling.amount_btc_hi = 0.15;
    gambling.address_reuse = 0.5;
    gambling.loop_propensity = 0.65;
    gambling.self_churn_rate = 0.5;

    ArchetypeParams& mining = a[std::size_t(Category::Mining)];
    mining.tx_rate_lo = 0.15;
    mining.tx_rate_hi = 0.3;
    mining.fan_in_max = 2;
    mining.fan_out_lo = 1;
    mining.fan_out_hi = 2;
    mining.amount_btc_lo = 0.5;
    mining.amount_btc_hi = 2.0;
    mining.address_reuse = 0.6;
    mining.exchange_bias = 0.3;
    mining.income_rate = 0.65;
    mining.coinbase_share = 0.75;
    mining.payout_rate = 0.3;
    mining.payout_fan_out = 10;

    // Same traffic profile as services; the only tell is the mix exit, which
    // disperses across several parties instead of returning whole.
    ArchetypeParams& darknet = a[std::size_t(Category::Darknet)];
    darknet = service;
    darknet.chain_fan_out = 5;

    return a;
}

SynthData generate_synth(const SynthConfig& config) {
    return Generator(config).run();
}

LabelSet synth_labels(const SynthData& data) {
    LabelSet labels;
    for (const auto& row : data.ground_truth) labels.insert(row.address, row.category);
    return labels;
}

void write_ground_truth_csv(const SynthData& data, std::ostream& out) {
    out << "address,entity_id,category\n";
    for (const auto& row : data.ground_truth)
        out << row.address << ',' << row.entity_id << ',' << to_string(row.category) << '\n';
}

void write_labels_csv(const SynthData& data, std::ostream& out) {
    out << "address,category\n";
    for (const auto& row : data.ground_truth)
        out << row.address << ',' << to_string(row.category) << '\n';
}

} // namespace elens

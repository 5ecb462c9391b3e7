#ifndef TESTS_SUPPORT_HPP
#define TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "elens/rng.hpp"
#include "elens/txmodel.hpp"

namespace elens::test {

// Random but always-valid transaction soup: coinbase seeds fund a pool of
// addresses, later transactions spend random funded subsets in full. Shared
// by the clustering / motif / window oracles so they all exercise the same
// shapes: multi-input spends, address reuse, timestamp ties, value splits.
inline std::vector<TxRecord> random_txs(std::mt19937_64& rng, int n_addresses, int n_txs) {
    std::vector<Sats> balance(std::size_t(n_addresses), 0);
    std::vector<int> funded;
    auto name = [](int a) { return "a" + std::to_string(a); };

    std::vector<TxRecord> txs;
    std::int64_t ts = 1420000000;
    int n_seeds = std::max(1, n_txs / 4);
    for (int i = 0; i < n_txs; ++i) {
        TxRecord tx;
        tx.txid = "t" + std::to_string(i);
        tx.height = i / 3;
        // occasional ties exercise the within-block order
        if (uniform01(rng) > 0.3) ts += 1 + std::int64_t(uniform_index(rng, 900));
        tx.timestamp = ts;

        Sats total = 0;
        if (i < n_seeds || funded.empty()) {
            tx.coinbase = true;
            total = 50'0000'0000;
        } else {
            int k = 1 + int(uniform_index(rng, std::uint64_t(std::min<std::size_t>(3, funded.size()))));
            for (int j = 0; j < k && !funded.empty(); ++j) {
                std::size_t pick = std::size_t(uniform_index(rng, funded.size()));
                int a = funded[pick];
                funded[pick] = funded.back();
                funded.pop_back();
                tx.inputs.push_back({name(a), balance[std::size_t(a)]});
                total += balance[std::size_t(a)];
                balance[std::size_t(a)] = 0;
            }
        }

        Sats fee = tx.coinbase ? 0 : std::min<Sats>(total - 1, 1 + Sats(uniform_index(rng, 1000)));
        Sats left = total - fee;
        int n_out = 1 + int(uniform_index(rng, 3));
        for (int j = 0; j < n_out && left > 0; ++j) {
            Sats part = j + 1 == n_out ? left : std::max<Sats>(1, left / (n_out - j));
            left -= part;
            int a = int(uniform_index(rng, std::uint64_t(n_addresses)));
            tx.outputs.push_back({name(a), part});
            if (balance[std::size_t(a)] == 0) funded.push_back(a);
            balance[std::size_t(a)] += part;
        }
        tx.validate();
        txs.push_back(std::move(tx));
    }
    return txs;
}

} // namespace elens::test

#endif

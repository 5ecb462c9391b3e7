#ifndef ELENS_PARALLEL_HPP
#define ELENS_PARALLEL_HPP

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace elens {

// Runs produce(i) for i in [0, n_items) on `threads` workers and folds the
// results on the calling thread in increasing i. Folding order is fixed, so
// results are identical for any thread count. Workers stall once they are a
// bounded window ahead of the fold cursor to keep memory flat.
template <typename Result, typename Produce, typename Fold>
void ordered_parallel_fold(std::size_t n_items, int threads, Produce produce, Fold fold) {
    if (threads <= 1 || n_items <= 1) {
        for (std::size_t i = 0; i < n_items; ++i) fold(i, produce(i));
        return;
    }

    std::mutex mu;
    std::condition_variable cv_ready, cv_space;
    std::map<std::size_t, Result> ready;
    std::atomic<std::size_t> next_item{0};
    std::size_t fold_cursor = 0;
    std::exception_ptr error;
    const std::size_t window = std::size_t(threads) * 4;

    auto worker = [&] {
        while (true) {
            std::size_t i = next_item.fetch_add(1);
            if (i >= n_items) return;
            try {
                Result r = produce(i);
                std::unique_lock lock(mu);
                cv_space.wait(lock, [&] {
                    return error || i < fold_cursor + window;
                });
                if (error) return;
                ready.emplace(i, std::move(r));
                cv_ready.notify_all();
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                cv_ready.notify_all();
                cv_space.notify_all();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(std::size_t(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);

    {
        std::unique_lock lock(mu);
        while (fold_cursor < n_items) {
            cv_ready.wait(lock, [&] { return error || ready.count(fold_cursor) > 0; });
            if (error) break;
            Result r = std::move(ready.at(fold_cursor));
            ready.erase(fold_cursor);
            std::size_t i = fold_cursor;
            lock.unlock();
            try {
                fold(i, std::move(r));
            } catch (...) {
                lock.lock();
                if (!error) error = std::current_exception();
                break;
            }
            lock.lock();
            ++fold_cursor;
            cv_space.notify_all();
        }
        if (error) {
            // Unblock stalled workers and stop handing out items.
            next_item.store(n_items);
            cv_space.notify_all();
        }
    }

    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace elens

#endif

#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace equiclass {

namespace detail {
inline bool& on_worker_thread() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

/**
 * A fixed pool of worker threads shared by every fan-out in the library.
 * Batches submitted from inside a worker run inline, so nested fan-outs
 * (a gradient over gamma evaluations over per-object solves) cannot deadlock.
 * Results are always joined in index order, which keeps floating-point
 * reductions identical for any worker count.
 */
class WorkerPool {
   public:
    explicit WorkerPool(int workers) {
        const int count = workers > 1 ? workers - 1 : 0;  // caller thread participates
        threads_.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            threads_.emplace_back([this] {
                detail::on_worker_thread() = true;
                work_loop();
            });
        }
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        wake_.notify_all();
        for (std::thread& t : threads_) t.join();
    }

    int worker_count() const { return static_cast<int>(threads_.size()) + 1; }

    /// Runs fn(i) for i in [0, count); the caller participates and blocks until done.
    void run(std::size_t count, const std::function<void(std::size_t)>& fn) {
        if (count == 0) return;
        if (threads_.empty() || count == 1 || detail::on_worker_thread()) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        auto batch = std::make_shared<Batch>();
        batch->fn = &fn;
        batch->count = count;
        {
            std::lock_guard lock(mutex_);
            batches_.push_back(batch);
        }
        wake_.notify_all();
        drain(*batch);
        std::unique_lock lock(mutex_);
        finished_.wait(lock, [&] { return batch->done.load() == count; });
        std::erase(batches_, batch);
    }

   private:
    struct Batch {
        const std::function<void(std::size_t)>* fn = nullptr;
        std::size_t count = 0;
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> done{0};
    };

    void drain(Batch& batch) {
        for (;;) {
            const std::size_t i = batch.next.fetch_add(1);
            if (i >= batch.count) return;
            (*batch.fn)(i);
            if (batch.done.fetch_add(1) + 1 == batch.count) finished_.notify_all();
        }
    }

    void work_loop() {
        std::unique_lock lock(mutex_);
        for (;;) {
            wake_.wait(lock, [&] { return stopping_ || !batches_.empty(); });
            if (stopping_) return;
            std::shared_ptr<Batch> batch = batches_.front();
            if (batch->next.load() >= batch->count) {
                // No work left to hand out; the owner erases it once done.
                batches_.pop_front();
                continue;
            }
            lock.unlock();
            drain(*batch);
            lock.lock();
        }
    }

    std::vector<std::thread> threads_;
    std::deque<std::shared_ptr<Batch>> batches_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable finished_;
    bool stopping_ = false;
};

/// Maps fn over [0, count) on the pool (or inline when pool is null),
/// returning results in index order.
template <class T, class Fn>
std::vector<T> parallel_map(WorkerPool* pool, std::size_t count, Fn&& fn) {
    std::vector<T> results(count);
    if (pool == nullptr) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    const std::function<void(std::size_t)> task = [&](std::size_t i) { results[i] = fn(i); };
    pool->run(count, task);
    return results;
}

}  // namespace equiclass

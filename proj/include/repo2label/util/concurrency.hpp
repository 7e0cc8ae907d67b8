#pragma once

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <queue>
#include <thread>
#include <vector>

namespace repo2label::concurrency {

/// Fixed-size worker pool. Tasks are plain void() closures; results travel
/// through promises owned by the caller.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t workers) {
        if (workers == 0) workers = 1;
        for (std::size_t i = 0; i < workers; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard lock(mu_);
            stopping_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void submit(std::function<void()> task) {
        {
            std::lock_guard lock(mu_);
            tasks_.push(std::move(task));
        }
        cv_.notify_one();
    }

private:
    void worker_loop() {
        while (true) {
            std::function<void()> task;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
                if (stopping_ && tasks_.empty()) return;
                task = std::move(tasks_.front());
                tasks_.pop();
            }
            task();
        }
    }

    std::mutex mu_;
    std::condition_variable cv_;
    std::queue<std::function<void()>> tasks_;
    std::vector<std::thread> threads_;
    bool stopping_ = false;
};

/// One slot per input; either a value or an error message.
template <typename T>
struct Outcome {
    std::optional<T> value;
    std::string error;

    bool ok() const { return value.has_value(); }
};

/// Run fn(i) for i in [0, count) on a bounded pool, preserving input order in
/// the result vector. Exceptions are captured per item, never propagated.
template <typename Fn>
auto parallel_map(std::size_t parallelism, std::size_t count, Fn&& fn)
    -> std::vector<Outcome<std::invoke_result_t<Fn, std::size_t>>> {
    using T = std::invoke_result_t<Fn, std::size_t>;
    std::vector<Outcome<T>> results(count);
    if (count == 0) return results;

    ThreadPool pool(std::min(parallelism, count));
    std::vector<std::promise<void>> done(count);
    for (std::size_t i = 0; i < count; ++i) {
        pool.submit([&, i] {
            try {
                results[i].value = fn(i);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            } catch (...) {
                results[i].error = "unknown error";
            }
            done[i].set_value();
        });
    }
    for (auto& p : done) p.get_future().wait();
    return results;
}

/// Blocking token bucket; guards request rate against a live backend.
class TokenBucket {
public:
    TokenBucket(double tokens_per_second, double burst)
        : rate_(tokens_per_second), burst_(burst), tokens_(burst),
          last_(std::chrono::steady_clock::now()) {}

    void acquire() {
        std::unique_lock lock(mu_);
        refill();
        while (tokens_ < 1.0) {
            const double deficit = 1.0 - tokens_;
            const auto wait = std::chrono::duration<double>(deficit / rate_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
            refill();
        }
        tokens_ -= 1.0;
    }

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
        last_ = now;
    }

    std::mutex mu_;
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

} // namespace repo2label::concurrency

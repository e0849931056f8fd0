#include "vp2d/workers.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace vp2d {

struct WorkerPool::Impl {
    std::vector<std::thread> threads;
    std::mutex mu;
    std::condition_variable cv_work;
    std::condition_variable cv_done;
    const std::function<void(std::size_t, std::size_t, std::size_t)>* fn = nullptr;
    std::size_t total = 0;
    std::atomic<std::size_t> next{0};
    std::size_t generation = 0;
    unsigned active = 0;
    bool stop = false;

    void run_chunks() {
        std::size_t c;
        while ((c = next.fetch_add(1)) * kChunk < total) {
            std::size_t b = c * kChunk;
            std::size_t e = b + kChunk < total ? b + kChunk : total;
            (*fn)(c, b, e);
        }
    }

    void worker() {
        std::size_t seen = 0;
        for (;;) {
            {
                std::unique_lock<std::mutex> lk(mu);
                cv_work.wait(lk, [&] { return stop || generation != seen; });
                if (stop) return;
                seen = generation;
            }
            run_chunks();
            {
                std::lock_guard<std::mutex> lk(mu);
                if (--active == 0) cv_done.notify_all();
            }
        }
    }
};

WorkerPool::WorkerPool(unsigned nworkers) : nworkers_(nworkers == 0 ? 1 : nworkers) {
    if (nworkers_ > 1) {
        impl_ = new Impl;
        for (unsigned i = 0; i + 1 < nworkers_; ++i)
            impl_->threads.emplace_back([this] { impl_->worker(); });
    }
}

WorkerPool::~WorkerPool() {
    if (impl_) {
        {
            std::lock_guard<std::mutex> lk(impl_->mu);
            impl_->stop = true;
        }
        impl_->cv_work.notify_all();
        for (auto& t : impl_->threads) t.join();
        delete impl_;
    }
}

void WorkerPool::for_chunks(std::size_t n,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (!impl_ || n <= kChunk) {
        for (std::size_t c = 0; c * kChunk < n; ++c) {
            std::size_t b = c * kChunk;
            std::size_t e = b + kChunk < n ? b + kChunk : n;
            fn(c, b, e);
        }
        return;
    }
    {
        std::lock_guard<std::mutex> lk(impl_->mu);
        impl_->fn = &fn;
        impl_->total = n;
        impl_->next.store(0);
        impl_->active = nworkers_;  // helpers + this thread
        ++impl_->generation;
    }
    impl_->cv_work.notify_all();
    impl_->run_chunks();
    {
        std::unique_lock<std::mutex> lk(impl_->mu);
        if (--impl_->active > 0) impl_->cv_done.wait(lk, [&] { return impl_->active == 0; });
        impl_->fn = nullptr;
    }
}

unsigned WorkerPool::workers_from_env(unsigned config_value) {
    if (const char* s = std::getenv("VP2D_WORKERS")) {
        long v = std::strtol(s, nullptr, 10);
        if (v >= 1) return unsigned(v);
    }
    if (config_value >= 1) return config_value;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace vp2d

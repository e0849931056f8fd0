#pragma once

#include <cstddef>
#include <functional>

namespace vp2d {

// Work is always split into fixed-size chunks (independent of the worker
// count), so any per-chunk partial results can be merged in chunk order and
// the final floating-point result is identical for 1 or N workers.
inline constexpr std::size_t kChunk = 16384;

inline std::size_t chunk_count(std::size_t n) { return n == 0 ? 0 : (n + kChunk - 1) / kChunk; }

class WorkerPool {
  public:
    // nworkers <= 1 runs inline on the calling thread.
    explicit WorkerPool(unsigned nworkers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    unsigned size() const { return nworkers_; }

    // fn(chunk_index, begin, end) over [0, n) in kChunk pieces.
    void for_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

    // Reads VP2D_WORKERS, falling back to the hardware concurrency.
    static unsigned workers_from_env(unsigned config_value);

  private:
    struct Impl;
    Impl* impl_ = nullptr;
    unsigned nworkers_;
};

}  // namespace vp2d

#pragma once

#include <cstddef>
#include <functional>

namespace ngnn {

/// Worker count: the in-process override if set, else NGNN_THREADS if set
/// and positive, else std::thread::hardware_concurrency() (at least 1).
std::size_t worker_count();

/// Overrides worker_count() for the process; 0 clears the override.
/// Returns the previous override.
std::size_t set_worker_override(std::size_t workers);

class ScopedWorkerOverride {
public:
    explicit ScopedWorkerOverride(std::size_t workers) : previous_(set_worker_override(workers)) {}
    ~ScopedWorkerOverride() { set_worker_override(previous_); }
    ScopedWorkerOverride(const ScopedWorkerOverride&) = delete;
    ScopedWorkerOverride& operator=(const ScopedWorkerOverride&) = delete;

private:
    std::size_t previous_;
};

/// Calls body(i) for i in [0, count), split into contiguous chunks across
/// worker_count() threads. body must only write state owned by index i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace ngnn

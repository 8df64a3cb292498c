#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace lensdepth {

// Upper bound on worker threads used by parallel loops. 0 restores the
// OpenMP default.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Every iteration must write only to its own
// output slot; results are then independent of the thread count. The first
// exception thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count())
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace lensdepth

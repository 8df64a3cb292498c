#include "lensdepth/parallel.hpp"

#include <atomic>

#include <omp.h>

namespace lensdepth {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count() {
    const int n = g_threads.load();
    return n > 0 ? n : omp_get_max_threads();
}

}  // namespace lensdepth

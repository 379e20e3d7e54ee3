#include "nfbo/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nfbo::parallel {

namespace {

int env_cap() {
    const char* s = std::getenv("NOISEFREE_BO_THREADS");
    if (!s) return 0;
    try {
        int n = std::stoi(s);
        return n > 0 ? n : 0;
    } catch (...) {
        return 0;
    }
}

std::atomic<int> g_override{0};

}  // namespace

int max_threads() {
    int n = g_override.load(std::memory_order_relaxed);
    if (n <= 0) {
#ifdef _OPENMP
        n = omp_get_max_threads();
#else
        n = 1;
#endif
        if (int cap = env_cap(); cap > 0 && cap < n) n = cap;
    }
    return n < 1 ? 1 : n;
}

void set_threads(int n) { g_override.store(n, std::memory_order_relaxed); }

}  // namespace nfbo::parallel

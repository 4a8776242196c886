#include "localinv/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace localinv::par {

namespace {
std::atomic<int> g_override{0};
}

void set_thread_override(int n) { g_override.store(n < 0 ? 0 : n); }

int thread_limit() {
    const int ov = g_override.load();
    if (ov > 0) return ov;
    if (const char* env = std::getenv("LOCALINV_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
            // fall through to the default
        }
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace localinv::par

#include "ionlrb/parallel.hpp"

#include <atomic>

namespace ionlrb {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(); }

void set_thread_count(int n) {
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = hw > 0 ? hw : 1;
    g_threads.store(n);
}

}  // namespace ionlrb

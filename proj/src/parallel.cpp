#include "porewet/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace porewet {

namespace {
std::atomic<int> g_override{0};
}

int thread_count() {
  if (const int o = g_override.load(); o > 0) return o;
  if (const char* env = std::getenv("POREWET_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void set_thread_count(int n) { g_override.store(std::max(0, n)); }

} // namespace porewet

#include "lqdim/parallel.hpp"

namespace lqdim {

namespace {
std::atomic<unsigned> g_workers{0};  // 0 means hardware concurrency
}

void set_workers(unsigned n) { g_workers = n; }

unsigned workers() {
  const unsigned n = g_workers;
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace lqdim

#include "rdbridge/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "rdbridge/errors.hpp"

namespace rdbridge {

namespace {
std::atomic<int> g_override{0};
}

int configured_threads() {
  if (const int o = g_override.load(); o > 0) return o;
  const char* env = std::getenv("RD_BRIDGE_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  const std::string text(env);
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != text.size() || value < 1)
    throw InvalidInput("RD_BRIDGE_THREADS must be an integer >= 1, got '" + text + "'");
  return value;
}

void set_thread_override(int threads) { g_override.store(std::max(threads, 0)); }

void parallel_for(std::size_t n, std::size_t min_grain,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t grain = std::max<std::size_t>(min_grain, 1);
  const auto cap = static_cast<std::size_t>(configured_threads());
  const std::size_t workers = std::min(cap, (n + grain - 1) / grain);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin < end) pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(n, chunk));
}

}  // namespace rdbridge

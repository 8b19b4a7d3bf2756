#include "discovars/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace discovars {

std::size_t default_thread_count() {
  if (const char* env = std::getenv("DISCOVARS_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body,
                  const std::function<bool()>& stop) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      if (stop && stop()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::size_t pool_size = std::min(threads ? threads : default_thread_count(), count);
  if (pool_size <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(pool_size);
  for (std::size_t t = 0; t < pool_size; ++t) pool.emplace_back(worker);
}

}  // namespace discovars

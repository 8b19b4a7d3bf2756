#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace discovars {

/// DISCOVARS_THREADS when set to a positive integer, else hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = default).
/// Workers stop picking up new indices once `stop` returns true.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body,
                  const std::function<bool()>& stop = {});

}  // namespace discovars

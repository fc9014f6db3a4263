// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace projdens::detail {

inline unsigned resolve_threads(unsigned requested) noexcept {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Calls body(r) for r = 0..count-1 on a pool of workers. Each r is handled
// exactly once; callers write results into slot r so the outcome does not
// depend on scheduling. The exception of the lowest failing r is rethrown.
template <class Body>
void for_each_replication(std::size_t count, unsigned threads, Body &&body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1)));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r; (r = next.fetch_add(1)) < count;) {
      try {
        body(r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace projdens::detail

#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mams {

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(begin, end) over a static partition of [0, total). The partition
// depends only on `total` and a fixed chunk size, never on the thread count,
// so per-chunk results are identical however many workers run them.
template <typename Fn>
void parallel_chunks(std::uint64_t total, int threads, std::uint64_t chunk_size, Fn&& fn) {
  if (total == 0) return;
  const std::uint64_t n_chunks = (total + chunk_size - 1) / chunk_size;
  if (threads <= 1 || n_chunks == 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      const std::uint64_t b = c * chunk_size;
      fn(c, b, std::min(total, b + chunk_size));
    }
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  const int n_workers = static_cast<int>(std::min<std::uint64_t>(threads, n_chunks));
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t c = w; c < n_chunks; c += n_workers) {
          const std::uint64_t b = c * chunk_size;
          fn(c, b, std::min(total, b + chunk_size));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace mams

#pragma once

// Fixed-size worker pool over contiguous chunks of an index range.
//
// Items inside a chunk run in order on one thread, so a chunk may chain
// state (e.g. warm starts) from one item to the next. Chunk boundaries
// depend only on the item and worker counts, which keeps results
// reproducible for a given worker count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace zeropi {

struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
};

inline std::vector<Chunk> make_chunks(std::size_t count, std::size_t workers) {
  std::vector<Chunk> out;
  if (count == 0) return out;
  const std::size_t n = std::clamp<std::size_t>(workers, 1, count);
  for (std::size_t c = 0; c < n; ++c) out.push_back({c * count / n, (c + 1) * count / n});
  return out;
}

/// Calls body(chunk) for every chunk, on up to `workers` threads. The first
/// exception escaping a body is rethrown after all threads have joined.
inline void run_chunks(std::size_t count, std::size_t workers,
                       const std::function<void(const Chunk&)>& body) {
  const auto chunks = make_chunks(count, workers);
  if (chunks.size() <= 1) {
    for (const auto& c : chunks) body(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < chunks.size(); i = next++) {
      try {
        body(chunks[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < chunks.size(); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace zeropi

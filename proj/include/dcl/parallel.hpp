#pragma once
#include <atomic>
#include <cstddef>
#include <thread>
#include <utility>
#include <vector>

namespace dcl {

// Work is always split into this fixed number of chunks, independent of the
// worker count.  Reductions combine chunk partials in chunk order on the
// calling thread, so floating-point results are bit-identical for any
// number of workers (the scheduling only decides who computes each chunk).
inline constexpr std::size_t kParallelChunks = 64;

namespace detail {
inline std::size_t chunk_lo(std::size_t n, std::size_t c) { return n * c / kParallelChunks; }
inline std::size_t chunk_hi(std::size_t n, std::size_t c) { return n * (c + 1) / kParallelChunks; }

template <class ChunkFn>
void run_chunks(std::size_t workers, ChunkFn&& per_chunk) {
  if (workers <= 1) {
    for (std::size_t c = 0; c < kParallelChunks; ++c) per_chunk(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= kParallelChunks) return;
      per_chunk(c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}
} // namespace detail

// body(i) for i in [0, n).  Writes from different i must not alias.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  if (n == 0) return;
  detail::run_chunks(workers, [&](std::size_t c) {
    const std::size_t hi = detail::chunk_hi(n, c);
    for (std::size_t i = detail::chunk_lo(n, c); i < hi; ++i) body(i);
  });
}

// chunk_fn(lo, hi) returns the partial over [lo, hi).  Partials are added to
// `init` in fixed chunk order, giving a worker-count-independent result.
template <class T, class ChunkFn>
T parallel_reduce(std::size_t n, std::size_t workers, T init, ChunkFn&& chunk_fn) {
  if (n == 0) return init;
  std::vector<T> partial(kParallelChunks, init);
  detail::run_chunks(workers, [&](std::size_t c) {
    partial[c] = chunk_fn(detail::chunk_lo(n, c), detail::chunk_hi(n, c));
  });
  T acc = init;
  for (std::size_t c = 0; c < kParallelChunks; ++c) acc = acc + partial[c];
  return acc;
}

} // namespace dcl

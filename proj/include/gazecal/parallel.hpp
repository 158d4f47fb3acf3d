#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace gazecal {

// Deterministic blocked execution: the input range is cut into fixed-size
// blocks independent of the worker count, each block is processed whole, and
// per-block results are reduced in block order. Output is therefore
// bit-identical for any number of threads.
inline constexpr std::size_t kParallelBlock = 8192;

template <typename T, typename Fn>
std::vector<T> map_blocks(std::size_t n, int threads, Fn&& fn) {
  const std::size_t n_blocks = (n + kParallelBlock - 1) / kParallelBlock;
  std::vector<T> results(n_blocks);
  if (n_blocks == 0) return results;

  auto run_block = [&](std::size_t block) {
    const std::size_t begin = block * kParallelBlock;
    const std::size_t end = std::min(begin + kParallelBlock, n);
    results[block] = fn(begin, end);
  };

  if (threads <= 1 || n_blocks == 1) {
    for (std::size_t block = 0; block < n_blocks; ++block) run_block(block);
    return results;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t block = next.fetch_add(1); block < n_blocks; block = next.fetch_add(1)) {
      run_block(block);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace gazecal

#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

#include "hyperpack/types.hpp"

namespace hyperpack {

// Worker cap from HYPERPACK_THREADS; 0 or unset means auto. Read on every
// call so tests can vary the environment.
inline int max_worker_threads() {
  const char* env = std::getenv("HYPERPACK_THREADS");
  long n = 0;
  if (env != nullptr) n = std::strtol(env, nullptr, 10);
  if (n <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n = hw == 0 ? 1 : static_cast<long>(std::min(hw, 16u));
  }
  return static_cast<int>(n);
}

// Runs fn(begin, end) over contiguous blocks of [0, total). Callers must
// make per-block results order-independent to merge deterministically; every
// scan in this library reduces blocks in ascending index order afterwards.
// Small totals run inline: thread spawn costs would dominate tight loops.
inline void parallel_blocks(Index total,
                            const std::function<void(Index, Index)>& fn,
                            Index min_block = 1024) {
  if (total <= 0) return;
  const int workers = max_worker_threads();
  const Index max_blocks = std::max<Index>(1, total / std::max<Index>(1, min_block));
  const Index blocks = std::min<Index>(workers, max_blocks);
  if (blocks <= 1) {
    fn(0, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(blocks));
  const Index chunk = (total + blocks - 1) / blocks;
  for (Index b = 0; b < blocks; ++b) {
    const Index begin = b * chunk;
    const Index end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& t : pool) t.join();
}

}  // namespace hyperpack

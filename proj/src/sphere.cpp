#include "hyperpack/sphere.hpp"

#include <cmath>
#include <thread>

#include "hyperpack/parallel.hpp"

namespace hyperpack {

namespace {

// Scans pairs (rows[a], rows[b]) for a in [begin, end), b > a. Pairs are
// visited in lexicographic order, so keeping the first strict improvement
// yields the lexicographically smallest minimizer of the block.
MinPair scan_block(const Mat& points, const std::vector<Index>& rows,
                   Index begin, Index end) {
  MinPair best;
  best.distance = 3.0;  // above any cosine distance
  const Index m = static_cast<Index>(rows.size());
  for (Index a = begin; a < end; ++a) {
    const Index i = rows[a];
    for (Index b = a + 1; b < m; ++b) {
      const Index j = rows[b];
      const double d = cosine_distance(points.row(i), points.row(j));
      if (d < best.distance) best = {i, j, d};
    }
  }
  return best;
}

// First row index not yet covered once a prefix holds `want` of the
// m(m-1)/2 pairs; row a contributes m-a-1 pairs. Solves the quadratic for
// the suffix size s with C(s, 2) = total - want.
Index balanced_boundary(Index m, double want, double total) {
  const double remain = std::max(0.0, total - want);
  const double s = 0.5 * (1.0 + std::sqrt(1.0 + 8.0 * remain));
  return std::max<Index>(0, m - static_cast<Index>(std::ceil(s)));
}

}  // namespace

MinPair pairwise_min_subset(const Mat& points,
                            const std::vector<Index>& subset) {
  const Index m = static_cast<Index>(subset.size());
  if (m < 2)
    throw TooFewPoints("pairwise_min needs at least 2 points, got " +
                       std::to_string(m));

  const int workers = max_worker_threads();
  const double total_pairs = 0.5 * static_cast<double>(m) * (m - 1);
  const bool small = total_pairs * static_cast<double>(points.cols()) < 2e6;
  if (workers <= 1 || small) return scan_block(points, subset, 0, m);

  // Each block records its own lexicographically-first minimum; merging
  // blocks in ascending order with a strict comparison preserves the tie
  // rule globally, so the result matches a single sequential scan exactly.
  const Index blocks = std::min<Index>(workers, m / 2);
  std::vector<MinPair> partial(static_cast<std::size_t>(blocks));
  std::vector<std::thread> pool;
  pool.reserve(partial.size());
  Index begin = 0;
  for (Index b = 0; b < blocks; ++b) {
    const Index end =
        (b + 1 == blocks)
            ? m
            : std::max(begin + 1,
                       balanced_boundary(
                           m, total_pairs * (b + 1) / blocks, total_pairs));
    pool.emplace_back([&points, &subset, &partial, b, begin, end] {
      partial[static_cast<std::size_t>(b)] =
          scan_block(points, subset, begin, end);
    });
    begin = end;
    if (begin >= m) {
      partial.resize(static_cast<std::size_t>(b) + 1);
      break;
    }
  }
  for (auto& t : pool) t.join();

  MinPair best;
  best.distance = 3.0;
  for (const MinPair& p : partial)
    if (p.i >= 0 && p.distance < best.distance) best = p;
  return best;
}

MinPair pairwise_min(const Mat& points) {
  std::vector<Index> all(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return pairwise_min_subset(points, all);
}

}  // namespace hyperpack

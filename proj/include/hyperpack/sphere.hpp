#pragma once

#include <utility>
#include <vector>

#include "hyperpack/errors.hpp"
#include "hyperpack/rng.hpp"
#include "hyperpack/types.hpp"

namespace hyperpack {

/*
 * Core geometry on the unit hypersphere. Distances are cosine distances,
 * d(a, b) = 1 - <a, b>, which is 1 - cos(angle) for unit vectors and lives
 * in [0, 2]. Free functions accept Eigen expressions; the wrapper types
 * below hold validated, materialized point sets.
 */

template <typename Derived>
double vector_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

// Direction of v. Throws DegenerateVector when the norm is under eps and no
// direction is recoverable.
template <typename Derived>
VecX<typename Derived::Scalar> unit_vector(const Eigen::MatrixBase<Derived>& v,
                                           double eps = kNormEpsilon) {
  const double n = v.norm();
  if (!(n > eps))
    throw DegenerateVector("cannot normalize vector with norm " +
                           std::to_string(n));
  return v / n;
}

// Cosine distance between unit vectors, clamped to [0, 2] so accumulated
// rounding can never leak outside the metric's range.
template <typename DerivedA, typename DerivedB>
double cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                       const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("cosine_distance: " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + " components");
  const double d = 1.0 - a.dot(b);
  return d < 0.0 ? 0.0 : (d > 2.0 ? 2.0 : d);
}

// A single point on the sphere; construction enforces the unit norm.
class UnitEmbedding {
 public:
  explicit UnitEmbedding(Vec coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2)
      throw InvalidArgument("embedding dimension must be at least 2");
    const double dev = std::abs(coords_.norm() - 1.0);
    if (!(dev <= kUnitNormTol))
      throw InvalidArgument("embedding norm deviates from 1 by " +
                            std::to_string(dev));
  }

  const Vec& coords() const { return coords_; }
  Index dim() const { return coords_.size(); }

 private:
  Vec coords_;
};

inline UnitEmbedding normalize(const Vec& v) {
  return UnitEmbedding(unit_vector(v));
}

// Immutable set of unit points, one per row. Optimization loops work on a
// raw matrix and re-wrap when the unit invariant is re-established.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(Mat points) : points_(std::move(points)) {
    if (points_.rows() < 1) throw InvalidArgument("embedding set is empty");
    if (points_.cols() < 2)
      throw InvalidArgument("embedding dimension must be at least 2");
    for (Index i = 0; i < points_.rows(); ++i) {
      const double dev = std::abs(points_.row(i).norm() - 1.0);
      if (!(dev <= kUnitNormTol))
        throw InvalidArgument("row " + std::to_string(i) +
                              " norm deviates from 1 by " +
                              std::to_string(dev));
    }
  }

  Index count() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const Mat& points() const { return points_; }
  Vec point(Index i) const { return points_.row(i); }

 private:
  Mat points_;
};

struct MinPair {
  Index i = -1;
  Index j = -1;
  double distance = 0.0;
};

// Closest pair under cosine distance, ties broken toward the
// lexicographically smallest (i, j) with i < j. May scan row blocks in
// parallel; the blockwise merge reproduces the sequential result exactly.
MinPair pairwise_min(const Mat& points);

// Same scan restricted to a subset of rows; indices are reported in the
// original numbering. subset must be sorted ascending and duplicate-free.
MinPair pairwise_min_subset(const Mat& points, const std::vector<Index>& subset);

// Random point: iid standard normal components, then normalized. Uniform on
// the sphere by rotational symmetry of the Gaussian.
inline Vec random_unit(Index dim, Rng& rng) {
  if (dim < 2) throw InvalidArgument("embedding dimension must be at least 2");
  return unit_vector(gaussian_vector(dim, rng));
}

}  // namespace hyperpack

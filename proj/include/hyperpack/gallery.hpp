#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hyperpack/sphere.hpp"

namespace hyperpack {

/*
 * A gallery is a fixed set of unit embeddings standing in for points that
 * are known to lie on the feasible manifold of some upstream encoder. The
 * regularizer measures how far optimized references stray from it. Galleries
 * come either from a file or from the synthetic cluster model below.
 */

class Gallery {
 public:
  Gallery(EmbeddingSet points, std::string source_label)
      : points_(std::move(points)), source_label_(std::move(source_label)) {}

  Index count() const { return points_.count(); }
  Index dim() const { return points_.dim(); }
  const Mat& matrix() const { return points_.points(); }
  const EmbeddingSet& points() const { return points_; }
  const std::string& source_label() const { return source_label_; }

 private:
  EmbeddingSet points_;
  std::string source_label_;
};

// Synthetic stand-in: uniform cluster centers, points assigned round-robin,
// Gaussian spread around each center scaled by `concentration`, then
// renormalized. concentration 0 collapses every point onto its center.
struct ManifoldSpec {
  Index dim = 512;
  Index n_points = 0;
  Index n_clusters = 1;
  double concentration = 0.05;
  std::uint64_t seed = 0;
};

Gallery synthesize_gallery(const ManifoldSpec& spec);

// Index and distance of the gallery point closest to x; ties resolve to the
// smallest index.
std::pair<Index, double> nearest_gallery(const Vec& x, const Gallery& gallery);

// Nearest-gallery index for each listed row of a point matrix. Rows are
// independent, so the scan may run in parallel without affecting results.
std::vector<Index> nearest_gallery_indices(const Mat& points,
                                           const std::vector<Index>& rows,
                                           const Gallery& gallery);

// Diagnostic sweep over raw point data before it is trusted as a gallery:
// finite entries, unit norms, usable dimension.
struct ValidationIssue {
  Index row = -1;
  std::string issue;
};

struct ValidationReport {
  bool pass = true;
  std::vector<ValidationIssue> issues;
};

ValidationReport validate_points(const Mat& points);

}  // namespace hyperpack

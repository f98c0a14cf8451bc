#include "hyperpack/gallery.hpp"

#include <cmath>

#include "hyperpack/parallel.hpp"

namespace hyperpack {

Gallery synthesize_gallery(const ManifoldSpec& spec) {
  if (spec.n_points < 1) throw InvalidArgument("gallery needs at least 1 point");
  if (spec.n_clusters < 1 || spec.n_clusters > spec.n_points)
    throw InvalidArgument("cluster count must be in [1, n_points]");
  if (spec.dim < 2) throw InvalidArgument("gallery dimension must be at least 2");
  if (!(spec.concentration >= 0.0))
    throw InvalidArgument("concentration must be non-negative");

  Rng rng = make_rng(spec.seed);
  Mat centers(spec.n_clusters, spec.dim);
  for (Index c = 0; c < spec.n_clusters; ++c)
    centers.row(c) = random_unit(spec.dim, rng);

  Mat points(spec.n_points, spec.dim);
  for (Index p = 0; p < spec.n_points; ++p) {
    const Index c = p % spec.n_clusters;
    if (spec.concentration == 0.0) {
      points.row(p) = centers.row(c);
      continue;
    }
    const Vec noise = gaussian_vector(spec.dim, rng);
    points.row(p) =
        unit_vector(centers.row(c).transpose() + spec.concentration * noise);
  }
  return Gallery(EmbeddingSet(std::move(points)),
                 "synthetic:" + std::to_string(spec.n_clusters) + "x" +
                     std::to_string(spec.n_points));
}

std::pair<Index, double> nearest_gallery(const Vec& x, const Gallery& gallery) {
  if (gallery.count() < 1) throw EmptyGallery("gallery has no points");
  if (x.size() != gallery.dim())
    throw DimensionMismatch("query dim " + std::to_string(x.size()) +
                            " vs gallery dim " + std::to_string(gallery.dim()));
  Index best = 0;
  double best_d = cosine_distance(x, gallery.matrix().row(0).transpose());
  for (Index g = 1; g < gallery.count(); ++g) {
    const double d = cosine_distance(x, gallery.matrix().row(g).transpose());
    if (d < best_d) {
      best = g;
      best_d = d;
    }
  }
  return {best, best_d};
}

std::vector<Index> nearest_gallery_indices(const Mat& points,
                                           const std::vector<Index>& rows,
                                           const Gallery& gallery) {
  std::vector<Index> out(rows.size(), -1);
  parallel_blocks(
      static_cast<Index>(rows.size()),
      [&](Index begin, Index end) {
        for (Index k = begin; k < end; ++k) {
          const Vec x = points.row(rows[static_cast<std::size_t>(k)]);
          out[static_cast<std::size_t>(k)] = nearest_gallery(x, gallery).first;
        }
      },
      /*min_block=*/256);
  return out;
}

ValidationReport validate_points(const Mat& points) {
  ValidationReport report;
  if (points.cols() < 2) {
    report.pass = false;
    report.issues.push_back({-1, "dimension must be at least 2, got " +
                                     std::to_string(points.cols())});
    return report;
  }
  if (points.rows() < 1) {
    report.pass = false;
    report.issues.push_back({-1, "no points"});
    return report;
  }
  for (Index i = 0; i < points.rows(); ++i) {
    if (!points.row(i).allFinite()) {
      report.pass = false;
      report.issues.push_back({i, "non-finite component"});
      continue;
    }
    const double dev = std::abs(points.row(i).norm() - 1.0);
    if (!(dev <= kUnitNormTol)) {
      report.pass = false;
      report.issues.push_back(
          {i, "norm deviates from 1 by " + std::to_string(dev)});
    }
  }
  return report;
}

}  // namespace hyperpack

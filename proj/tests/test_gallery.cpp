#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyperpack/gallery.hpp"
#include "oracles.hpp"

using namespace hyperpack;

namespace {

ManifoldSpec spec_of(Index dim, Index n_points, Index n_clusters,
                     double concentration, std::uint64_t seed) {
  ManifoldSpec spec;
  spec.dim = dim;
  spec.n_points = n_points;
  spec.n_clusters = n_clusters;
  spec.concentration = concentration;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("synthesize_gallery is deterministic and unit-norm") {
  const ManifoldSpec spec = spec_of(16, 24, 3, 0.05, 9);
  const Gallery a = synthesize_gallery(spec);
  const Gallery b = synthesize_gallery(spec);
  CHECK_EQ(a.count(), 24);
  CHECK_EQ(a.dim(), 16);
  CHECK_EQ(a.source_label(), "synthetic:3x24");
  CHECK_EQ((a.matrix() - b.matrix()).lpNorm<Eigen::Infinity>(), 0.0);
  for (Index i = 0; i < a.count(); ++i)
    CHECK_LT(std::abs(a.matrix().row(i).norm() - 1.0), 1e-12);

  ManifoldSpec other = spec;
  other.seed = 10;
  const Gallery c = synthesize_gallery(other);
  CHECK_GT((a.matrix() - c.matrix()).lpNorm<Eigen::Infinity>(), 0.0);
}

TEST_CASE("zero concentration collapses points onto their centers") {
  const Gallery gallery = synthesize_gallery(spec_of(8, 9, 3, 0.0, 4));
  // Round-robin assignment: points p and p + 3 share a cluster center.
  for (Index p = 3; p < 9; ++p)
    CHECK_EQ((gallery.matrix().row(p) - gallery.matrix().row(p % 3))
                 .lpNorm<Eigen::Infinity>(),
             0.0);
  // Distinct clusters get distinct centers.
  CHECK_GT((gallery.matrix().row(0) - gallery.matrix().row(1))
               .lpNorm<Eigen::Infinity>(),
           0.0);
}

TEST_CASE("small concentration keeps points near their centers") {
  const Index n_clusters = 2;
  const Gallery tight = synthesize_gallery(spec_of(32, 40, n_clusters, 0.05, 7));
  const Gallery centers = synthesize_gallery(spec_of(32, 2, n_clusters, 0.0, 7));
  double total = 0.0;
  for (Index p = 0; p < tight.count(); ++p) {
    const double d = cosine_distance(
        Vec(tight.matrix().row(p)), Vec(centers.matrix().row(p % n_clusters)));
    CHECK_LT(d, 0.5);
    total += d;
  }
  CHECK_LT(total / static_cast<double>(tight.count()), 0.1);
}

TEST_CASE("synthesize_gallery validates its spec") {
  CHECK_THROWS_AS(synthesize_gallery(spec_of(1, 4, 1, 0.05, 0)),
                  InvalidArgument);
  CHECK_THROWS_AS(synthesize_gallery(spec_of(8, 0, 1, 0.05, 0)),
                  InvalidArgument);
  CHECK_THROWS_AS(synthesize_gallery(spec_of(8, 4, 0, 0.05, 0)),
                  InvalidArgument);
  CHECK_THROWS_AS(synthesize_gallery(spec_of(8, 4, 2, -0.01, 0)),
                  InvalidArgument);
  CHECK_NOTHROW((void)synthesize_gallery(spec_of(8, 4, 4, 0.0, 0)));
}

TEST_CASE("nearest_gallery finds the closest point and breaks ties low") {
  Mat pts = Mat::Zero(3, 4);
  pts(0, 0) = 1.0;
  pts(1, 1) = 1.0;
  pts(2, 2) = 1.0;
  const Gallery gallery(EmbeddingSet(std::move(pts)), "axes");

  Vec probe = Vec::Zero(4);
  probe(1) = 1.0;
  const auto [idx, dist] = nearest_gallery(probe, gallery);
  CHECK_EQ(idx, 1);
  CHECK_EQ(dist, 0.0);

  // Equidistant from axes 0 and 1: the tie goes to index 0.
  Vec tie = Vec::Zero(4);
  tie(0) = tie(1) = 1.0 / std::sqrt(2.0);
  CHECK_EQ(nearest_gallery(tie, gallery).first, 0);
}

TEST_CASE("nearest_gallery_indices matches the scalar scan") {
  Rng rng = make_rng(31);
  Mat gal_pts(20, 6);
  for (Index g = 0; g < 20; ++g) gal_pts.row(g) = random_unit(6, rng);
  const Gallery gallery(EmbeddingSet(std::move(gal_pts)), "random");

  Mat points(15, 6);
  for (Index p = 0; p < 15; ++p) points.row(p) = random_unit(6, rng);
  std::vector<Index> rows;
  for (Index p = 0; p < 15; p += 2) rows.push_back(p);

  const std::vector<Index> batch =
      nearest_gallery_indices(points, rows, gallery);
  REQUIRE_EQ(batch.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k)
    CHECK_EQ(batch[k], nearest_gallery(Vec(points.row(rows[k])), gallery).first);
}

TEST_CASE("validate_points flags bad rows and passes clean ones") {
  Rng rng = make_rng(3);
  Mat pts(4, 5);
  for (Index i = 0; i < 4; ++i) pts.row(i) = random_unit(5, rng);
  CHECK(validate_points(pts).pass);

  pts.row(1) *= 1.5;                                   // norm off
  pts(3, 2) = std::numeric_limits<double>::quiet_NaN();  // non-finite
  const ValidationReport report = validate_points(pts);
  CHECK_FALSE(report.pass);
  REQUIRE_EQ(report.issues.size(), 2u);
  CHECK_EQ(report.issues[0].row, 1);
  CHECK_EQ(report.issues[1].row, 3);

  CHECK_FALSE(validate_points(Mat(Mat::Ones(2, 1))).pass);
}

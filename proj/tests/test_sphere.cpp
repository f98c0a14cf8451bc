#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "hyperpack/sphere.hpp"
#include "oracles.hpp"

using namespace hyperpack;

namespace {

Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Index>(values.size()));
  Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("unit_vector rescales a classic 3-4-5 triangle exactly") {
  const Vec u = unit_vector(make_vec({3.0, 4.0}));
  CHECK_EQ(u[0], 0.6);
  CHECK_EQ(u[1], 0.8);
}

TEST_CASE("unit_vector rejects vectors without a direction") {
  CHECK_THROWS_AS(unit_vector(make_vec({0.0, 0.0, 0.0})), DegenerateVector);
  CHECK_THROWS_AS(unit_vector(make_vec({1e-13, 0.0})), DegenerateVector);
}

TEST_CASE("normalize is scale invariant") {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec v = gaussian_vector(6, rng);
    const Vec base = unit_vector(v);
    // Power-of-two scales only shift exponents, so the quotient must come
    // out bit for bit identical.
    for (const double s : {0.25, 0.5, 2.0, 64.0, 1024.0}) {
      const Vec scaled = unit_vector((s * v).eval());
      CHECK_EQ((scaled - base).lpNorm<Eigen::Infinity>(), 0.0);
    }
    // Arbitrary scales round the input first; direction agrees to a few ulp.
    for (const double s : {3.0, 0.1, 97.31}) {
      const Vec scaled = unit_vector((s * v).eval());
      CHECK_LT((scaled - base).lpNorm<Eigen::Infinity>(), 1e-14);
    }
  }
}

TEST_CASE("UnitEmbedding validates its invariants") {
  CHECK_NOTHROW(UnitEmbedding(make_vec({0.6, 0.8})));
  CHECK_THROWS_AS(UnitEmbedding(make_vec({0.6, 0.9})), InvalidArgument);
  CHECK_THROWS_AS(UnitEmbedding(make_vec({1.0})), InvalidArgument);
  CHECK_EQ(normalize(make_vec({3.0, 4.0})).coords()[0], 0.6);
}

TEST_CASE("cosine_distance matches hand values on axis vectors") {
  const Vec e1 = make_vec({1.0, 0.0, 0.0});
  const Vec e2 = make_vec({0.0, 1.0, 0.0});
  CHECK_EQ(cosine_distance(e1, e1), 0.0);
  CHECK_EQ(cosine_distance(e1, e2), 1.0);
  CHECK_EQ(cosine_distance(e1, (-e1).eval()), 2.0);
  CHECK_THROWS_AS(cosine_distance(e1, make_vec({1.0, 0.0})),
                  DimensionMismatch);
}

TEST_CASE("cosine_distance is symmetric bitwise and stays in range") {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec a = random_unit(9, rng);
    const Vec b = random_unit(9, rng);
    const double ab = cosine_distance(a, b);
    CHECK_EQ(ab, cosine_distance(b, a));
    CHECK_GE(ab, 0.0);
    CHECK_LE(ab, 2.0);
  }
  // Near-duplicate and near-antipodal points must clamp, not leak out.
  const Vec a = random_unit(5, rng);
  CHECK_GE(cosine_distance(a, a), 0.0);
  CHECK_LE(cosine_distance(a, (-a).eval()), 2.0);
}

TEST_CASE("pairwise_min picks the tied pair with the smallest indices") {
  Mat pts(3, 3);
  pts.row(0) = make_vec({1.0, 0.0, 0.0});
  pts.row(1) = make_vec({0.0, 1.0, 0.0});
  pts.row(2) = unit_vector(make_vec({1.0, 1.0, 0.0}));
  const MinPair mp = pairwise_min(pts);
  CHECK_EQ(mp.i, 0);
  CHECK_EQ(mp.j, 2);
  // Both (0,2) and (1,2) sit at distance 1 - 1/sqrt(2).
  CHECK_EQ(mp.distance, doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("pairwise_min needs two points") {
  Mat one(1, 4);
  one.row(0) = make_vec({1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(pairwise_min(one), TooFewPoints);
}

TEST_CASE("pairwise_min agrees with a brute-force oracle") {
  Rng rng = make_rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 3 + static_cast<Index>(uniform_below(rng, 40));
    const Index dim = 2 + static_cast<Index>(uniform_below(rng, 14));
    Mat pts(n, dim);
    for (Index i = 0; i < n; ++i) pts.row(i) = random_unit(dim, rng);
    // Occasionally plant an exact duplicate to force a tie at distance 0.
    if (trial % 4 == 0 && n > 3) pts.row(n - 1) = pts.row(1);
    const auto [bi, bj, bd] = oracles::brute_min_pair(pts);
    const MinPair mp = pairwise_min(pts);
    CHECK_EQ(mp.i, bi);
    CHECK_EQ(mp.j, bj);
    CHECK_EQ(mp.distance, doctest::Approx(std::max(bd, 0.0)).epsilon(1e-15));
  }
}

TEST_CASE("pairwise_min is identical across worker counts") {
  Rng rng = make_rng(91);
  Mat pts(320, 48);
  for (Index i = 0; i < pts.rows(); ++i) pts.row(i) = random_unit(48, rng);
  setenv("HYPERPACK_THREADS", "1", 1);
  const MinPair seq = pairwise_min(pts);
  setenv("HYPERPACK_THREADS", "7", 1);
  const MinPair par = pairwise_min(pts);
  unsetenv("HYPERPACK_THREADS");
  CHECK_EQ(seq.i, par.i);
  CHECK_EQ(seq.j, par.j);
  CHECK_EQ(seq.distance, par.distance);
}

TEST_CASE("pairwise_min_subset reports original row indices") {
  Mat pts(5, 3);
  pts.row(0) = make_vec({1.0, 0.0, 0.0});
  pts.row(1) = make_vec({0.0, 1.0, 0.0});
  pts.row(2) = make_vec({0.0, 0.0, 1.0});
  pts.row(3) = unit_vector(make_vec({1.0, 0.05, 0.0}));
  pts.row(4) = make_vec({-1.0, 0.0, 0.0});
  const MinPair mp = pairwise_min_subset(pts, {0, 2, 3});
  CHECK_EQ(mp.i, 0);
  CHECK_EQ(mp.j, 3);
}

TEST_CASE("random_unit draws unit vectors deterministically per seed") {
  Rng a = make_rng(5);
  Rng b = make_rng(5);
  Rng c = make_rng(6);
  const Vec va = random_unit(16, a);
  const Vec vb = random_unit(16, b);
  const Vec vc = random_unit(16, c);
  CHECK_EQ((va - vb).lpNorm<Eigen::Infinity>(), 0.0);
  CHECK_GT((va - vc).lpNorm<Eigen::Infinity>(), 0.0);
  CHECK_LT(std::abs(va.norm() - 1.0), 1e-12);
  CHECK_THROWS_AS(random_unit(1, a), InvalidArgument);
}

TEST_CASE("random_unit has no directional bias") {
  Rng rng = make_rng(2024);
  Vec mean = Vec::Zero(8);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) mean += random_unit(8, rng);
  mean /= static_cast<double>(draws);
  CHECK_LT(mean.lpNorm<Eigen::Infinity>(), 0.05);
}

TEST_CASE("EmbeddingSet enforces unit rows") {
  Mat good(2, 3);
  good.row(0) = make_vec({1.0, 0.0, 0.0});
  good.row(1) = make_vec({0.0, 0.6, 0.8});
  CHECK_NOTHROW((void)EmbeddingSet(good));

  Mat bad = good;
  bad(1, 1) = 0.7;
  CHECK_THROWS_AS((void)EmbeddingSet(bad), InvalidArgument);
  CHECK_THROWS_AS((void)EmbeddingSet(Mat(0, 3)), InvalidArgument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <set>

#include "hyperpack/sampling.hpp"
#include "oracles.hpp"

using namespace hyperpack;

namespace {

EmbeddingSet random_refs(Index n, Index dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Mat refs(n, dim);
  for (Index i = 0; i < n; ++i) refs.row(i) = random_unit(dim, rng);
  return EmbeddingSet(std::move(refs));
}

SampleSpec spec_of(double beta, Index per_id, std::uint64_t master) {
  SampleSpec spec;
  spec.beta = beta;
  spec.per_id = per_id;
  spec.master_seed = master;
  return spec;
}

}  // namespace

TEST_CASE("derived seeds are stable and collision-free on a small grid") {
  CHECK_EQ(derive_v_seed(7, 3, 11), derive_v_seed(7, 3, 11));
  CHECK_EQ(derive_z_seed(7, 3, 11), derive_z_seed(7, 3, 11));

  std::set<std::uint64_t> seen;
  for (Index id = 0; id < 8; ++id) {
    for (Index s = 0; s < 32; ++s) {
      seen.insert(derive_v_seed(99, id, s));
      seen.insert(derive_z_seed(99, id, s));
    }
  }
  CHECK_EQ(seen.size(), 2u * 8u * 32u);
  CHECK_NE(derive_v_seed(1, 0, 0), derive_v_seed(2, 0, 0));
}

TEST_CASE("perturb_reference at beta zero is the identity, bit for bit") {
  Rng rng = make_rng(5);
  const UnitEmbedding ref = normalize(Vec((Vec(6) << 1, -2, 3, 0, 1, 4).finished()));
  Rng noise = make_rng(17);
  const UnitEmbedding out = perturb_reference(ref, 0.0, noise);
  CHECK_EQ((out.coords() - ref.coords()).lpNorm<Eigen::Infinity>(), 0.0);
  (void)rng;
}

TEST_CASE("perturb_reference stays on the sphere and respects its seed") {
  const UnitEmbedding ref = normalize(Vec((Vec(8) << 2, 1, 0, -1, 3, 0, 1, 1).finished()));
  Rng a = make_rng(100), b = make_rng(100), c = make_rng(101);
  const UnitEmbedding pa = perturb_reference(ref, 0.05, a);
  const UnitEmbedding pb = perturb_reference(ref, 0.05, b);
  const UnitEmbedding pc = perturb_reference(ref, 0.05, c);
  CHECK_LT(std::abs(pa.coords().norm() - 1.0), 1e-12);
  CHECK_EQ((pa.coords() - pb.coords()).lpNorm<Eigen::Infinity>(), 0.0);
  CHECK_GT((pa.coords() - pc.coords()).lpNorm<Eigen::Infinity>(), 0.0);
  CHECK_GT(cosine_distance(pa.coords(), ref.coords()), 0.0);
  CHECK_LT(cosine_distance(pa.coords(), ref.coords()), 0.5);
}

TEST_CASE("generate_manifest lays out entries identity-major with derived seeds") {
  const EmbeddingSet refs = random_refs(4, 10, 21);
  const SampleSpec spec = spec_of(0.01, 6, 77);
  const SampleManifest manifest = generate_manifest(refs, spec);

  CHECK_EQ(manifest.n_id, 4);
  CHECK_EQ(manifest.per_id, 6);
  CHECK_EQ(manifest.beta, 0.01);
  CHECK_EQ(manifest.master_seed, 77u);
  REQUIRE_EQ(manifest.entries.size(), 24u);

  for (Index id = 0; id < 4; ++id) {
    for (Index s = 0; s < 6; ++s) {
      const SampleEntry& e = manifest.entries[static_cast<std::size_t>(id * 6 + s)];
      CHECK_EQ(e.identity, id);
      CHECK_EQ(e.sample, s);
      CHECK_EQ(e.v_seed, derive_v_seed(77, id, s));
      CHECK_EQ(e.z_seed, derive_z_seed(77, id, s));
      CHECK_LT(std::abs(e.embedding.norm() - 1.0), 1e-12);
    }
  }
}

TEST_CASE("each entry replays from its own recorded seed") {
  const EmbeddingSet refs = random_refs(3, 12, 8);
  const SampleManifest manifest = generate_manifest(refs, spec_of(0.02, 5, 4));
  for (const SampleEntry& e : manifest.entries) {
    Rng rng = make_rng(e.v_seed);
    const UnitEmbedding ref(refs.point(e.identity));
    const UnitEmbedding redo = perturb_reference(ref, 0.02, rng);
    CHECK_EQ((redo.coords() - e.embedding).lpNorm<Eigen::Infinity>(), 0.0);
  }
}

TEST_CASE("generate_manifest is reproducible and thread-count invariant") {
  const EmbeddingSet refs = random_refs(9, 16, 2);
  const SampleSpec spec = spec_of(0.01, 8, 12);

  setenv("HYPERPACK_THREADS", "1", 1);
  const SampleManifest serial = generate_manifest(refs, spec);
  setenv("HYPERPACK_THREADS", "7", 1);
  const SampleManifest threaded = generate_manifest(refs, spec);
  unsetenv("HYPERPACK_THREADS");

  REQUIRE_EQ(serial.entries.size(), threaded.entries.size());
  for (std::size_t k = 0; k < serial.entries.size(); ++k) {
    CHECK_EQ(serial.entries[k].v_seed, threaded.entries[k].v_seed);
    CHECK_EQ((serial.entries[k].embedding - threaded.entries[k].embedding)
                 .lpNorm<Eigen::Infinity>(),
             0.0);
  }
}

TEST_CASE("beta zero reproduces every reference exactly") {
  const EmbeddingSet refs = random_refs(5, 9, 33);
  const SampleManifest manifest = generate_manifest(refs, spec_of(0.0, 4, 1));
  for (const SampleEntry& e : manifest.entries)
    CHECK_EQ((e.embedding - refs.points().row(e.identity).transpose())
                 .lpNorm<Eigen::Infinity>(),
             0.0);
}

TEST_CASE("intra_class_stats reports exact per-identity distances") {
  Mat refs = Mat::Zero(2, 4);
  refs(0, 0) = 1.0;
  refs(1, 1) = 1.0;
  const EmbeddingSet ref_set((Mat(refs)));

  SampleManifest manifest;
  manifest.n_id = 2;
  manifest.per_id = 2;
  manifest.beta = 0.1;
  const double r = 1.0 / std::sqrt(2.0);
  const auto entry = [](Index id, Index s, Vec emb) {
    SampleEntry e;
    e.identity = id;
    e.sample = s;
    e.embedding = std::move(emb);
    return e;
  };
  manifest.entries.push_back(entry(0, 0, Vec((Vec(4) << 1, 0, 0, 0).finished())));
  manifest.entries.push_back(entry(0, 1, Vec((Vec(4) << r, r, 0, 0).finished())));
  manifest.entries.push_back(entry(1, 0, Vec((Vec(4) << 0, 1, 0, 0).finished())));
  manifest.entries.push_back(entry(1, 1, Vec((Vec(4) << 0, 0, 1, 0).finished())));

  const std::vector<IntraClassStats> stats = intra_class_stats(manifest, ref_set);
  REQUIRE_EQ(stats.size(), 2u);
  CHECK_EQ(stats[0].identity, 0);
  CHECK_EQ(stats[0].mean_distance,
           doctest::Approx((0.0 + (1.0 - r)) / 2.0).epsilon(1e-14));
  CHECK_EQ(stats[0].max_distance, doctest::Approx(1.0 - r).epsilon(1e-14));
  CHECK_EQ(stats[1].mean_distance, doctest::Approx(0.5).epsilon(1e-14));
  CHECK_EQ(stats[1].max_distance, 1.0);
}

TEST_CASE("intra_class_stats rejects manifests that mismatch the references") {
  const EmbeddingSet refs = random_refs(3, 6, 13);
  SampleManifest manifest = generate_manifest(refs, spec_of(0.01, 2, 0));

  SampleManifest wrong_count = manifest;
  wrong_count.n_id = 2;
  CHECK_THROWS_AS(intra_class_stats(wrong_count, refs), IdentityMismatch);

  SampleManifest stray = manifest;
  stray.entries[0].identity = 9;
  CHECK_THROWS_AS(intra_class_stats(stray, refs), IdentityMismatch);

  const EmbeddingSet narrow = random_refs(3, 5, 13);
  CHECK_THROWS_AS(intra_class_stats(manifest, narrow), DimensionMismatch);
}

TEST_CASE("sample spread grows with beta on average") {
  const EmbeddingSet refs = random_refs(6, 24, 40);
  double prev = -1.0;
  for (const double beta : {0.0, 0.01, 0.05}) {
    const SampleManifest manifest =
        generate_manifest(refs, spec_of(beta, 16, 5));
    const std::vector<IntraClassStats> stats = intra_class_stats(manifest, refs);
    double mean = 0.0;
    for (const IntraClassStats& s : stats) mean += s.mean_distance;
    mean /= static_cast<double>(stats.size());
    CHECK_GT(mean, prev);
    prev = mean;
  }
}

TEST_CASE("generate_manifest validates its inputs") {
  const EmbeddingSet refs = random_refs(2, 4, 1);
  CHECK_THROWS_AS(generate_manifest(refs, spec_of(-0.1, 4, 0)),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_manifest(refs, spec_of(0.1, 0, 0)),
                  InvalidArgument);
}

#include "hyperpack/sampling.hpp"

#include <algorithm>

#include "hyperpack/parallel.hpp"

namespace hyperpack {

namespace {

// Stream tags keeping the noise seed and the reserved generator seed of the
// same (identity, sample) cell decorrelated.
constexpr std::uint64_t kNoiseStream = 0x6e6f697365;   // "noise"
constexpr std::uint64_t kLatentStream = 0x6c6174656e;  // "laten"

}  // namespace

std::uint64_t derive_v_seed(std::uint64_t master_seed, Index identity,
                            Index sample) {
  return mix_seed(mix_seed(master_seed, kNoiseStream),
                  static_cast<std::uint64_t>(identity),
                  static_cast<std::uint64_t>(sample));
}

std::uint64_t derive_z_seed(std::uint64_t master_seed, Index identity,
                            Index sample) {
  return mix_seed(mix_seed(master_seed, kLatentStream),
                  static_cast<std::uint64_t>(identity),
                  static_cast<std::uint64_t>(sample));
}

UnitEmbedding perturb_reference(const UnitEmbedding& ref, double beta,
                                Rng& rng) {
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be non-negative");
  if (beta == 0.0) return ref;
  const Vec noise = gaussian_vector(ref.dim(), rng);
  return UnitEmbedding(unit_vector(ref.coords() + beta * noise));
}

SampleManifest generate_manifest(const EmbeddingSet& refs,
                                 const SampleSpec& spec) {
  if (spec.per_id < 1) throw InvalidArgument("per_id must be at least 1");
  if (!(spec.beta >= 0.0)) throw InvalidArgument("beta must be non-negative");

  SampleManifest manifest;
  manifest.n_id = refs.count();
  manifest.per_id = spec.per_id;
  manifest.beta = spec.beta;
  manifest.master_seed = spec.master_seed;
  manifest.entries.resize(
      static_cast<std::size_t>(refs.count() * spec.per_id));

  // Entries are seed-addressed, so identities can be filled in parallel
  // while the identity-major output order stays fixed.
  parallel_blocks(
      refs.count(),
      [&](Index begin, Index end) {
        for (Index id = begin; id < end; ++id) {
          const UnitEmbedding ref(refs.point(id));
          for (Index s = 0; s < spec.per_id; ++s) {
            SampleEntry& entry = manifest.entries[static_cast<std::size_t>(
                id * spec.per_id + s)];
            entry.identity = id;
            entry.sample = s;
            entry.v_seed = derive_v_seed(spec.master_seed, id, s);
            entry.z_seed = derive_z_seed(spec.master_seed, id, s);
            Rng rng = make_rng(entry.v_seed);
            entry.embedding =
                perturb_reference(ref, spec.beta, rng).coords();
          }
        }
      },
      /*min_block=*/4);
  return manifest;
}

std::vector<IntraClassStats> intra_class_stats(const SampleManifest& manifest,
                                               const EmbeddingSet& refs) {
  if (manifest.n_id != refs.count())
    throw IdentityMismatch("manifest covers " + std::to_string(manifest.n_id) +
                           " identities, references hold " +
                           std::to_string(refs.count()));
  std::vector<IntraClassStats> stats(static_cast<std::size_t>(refs.count()));
  std::vector<Index> counts(static_cast<std::size_t>(refs.count()), 0);
  for (Index id = 0; id < refs.count(); ++id)
    stats[static_cast<std::size_t>(id)].identity = id;
  for (const SampleEntry& entry : manifest.entries) {
    if (entry.identity < 0 || entry.identity >= refs.count())
      throw IdentityMismatch("entry identity " +
                             std::to_string(entry.identity) +
                             " outside [0, " + std::to_string(refs.count()) +
                             ")");
    if (entry.embedding.size() != refs.dim())
      throw DimensionMismatch("entry dim " +
                              std::to_string(entry.embedding.size()) +
                              " vs reference dim " +
                              std::to_string(refs.dim()));
    const double d =
        cosine_distance(entry.embedding, refs.point(entry.identity));
    auto& row = stats[static_cast<std::size_t>(entry.identity)];
    row.mean_distance += d;
    row.max_distance = std::max(row.max_distance, d);
    counts[static_cast<std::size_t>(entry.identity)] += 1;
  }
  for (std::size_t id = 0; id < stats.size(); ++id) {
    if (counts[id] == 0)
      throw IdentityMismatch("identity " + std::to_string(id) +
                             " has no samples");
    stats[id].mean_distance /= static_cast<double>(counts[id]);
  }
  return stats;
}

}  // namespace hyperpack

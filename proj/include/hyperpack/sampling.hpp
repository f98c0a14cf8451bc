#pragma once

#include <cstdint>
#include <vector>

#include "hyperpack/sphere.hpp"

namespace hyperpack {

/*
 * Per-identity sample generation: each sample is the reference nudged by
 * isotropic Gaussian noise of magnitude beta and renormalized,
 *
 *     x = (x_ref + beta * v) / ||x_ref + beta * v||,  v ~ N(0, I).
 *
 * Every entry draws from its own seed derived from (master_seed, identity,
 * sample), so generation order is irrelevant and any entry can be redrawn
 * in isolation. Each entry also carries a second derived seed (z_seed)
 * reserved for a downstream conditional generator; it is recorded, never
 * expanded here.
 */

struct SampleSpec {
  double beta = 0.01;
  Index per_id = 64;
  std::uint64_t master_seed = 0;
};

struct SampleEntry {
  Index identity = -1;
  Index sample = -1;
  std::uint64_t v_seed = 0;
  std::uint64_t z_seed = 0;
  Vec embedding;
};

struct SampleManifest {
  Index n_id = 0;
  Index per_id = 0;
  double beta = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<SampleEntry> entries;  // identity-major, sample-minor
};

// Seeds for entry (identity, sample) under a master seed. Exposed so a
// recorded manifest can be cross-checked entry by entry.
std::uint64_t derive_v_seed(std::uint64_t master_seed, Index identity,
                            Index sample);
std::uint64_t derive_z_seed(std::uint64_t master_seed, Index identity,
                            Index sample);

// One noisy draw around a reference. beta == 0 returns the reference
// itself, bit for bit.
UnitEmbedding perturb_reference(const UnitEmbedding& ref, double beta,
                                Rng& rng);

SampleManifest generate_manifest(const EmbeddingSet& refs,
                                 const SampleSpec& spec);

// Distance-to-own-reference statistics, one row per identity.
struct IntraClassStats {
  Index identity = -1;
  double mean_distance = 0.0;
  double max_distance = 0.0;
};

std::vector<IntraClassStats> intra_class_stats(const SampleManifest& manifest,
                                               const EmbeddingSet& refs);

}  // namespace hyperpack

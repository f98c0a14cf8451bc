#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperpack/packing.hpp"
#include "hyperpack/sampling.hpp"

namespace hyperpack {

/*
 * On-disk formats. Embedding sets use a fixed little-endian binary layout:
 *
 *   offset  size  field
 *        0     4  magic "HYPF"
 *        4     2  format version, currently 1
 *        6     4  point count
 *       10     4  dimension
 *       14   4*count*dim  float32 payload, row-major
 *
 * Values are widened to double on load and every row is renormalized; a row
 * whose norm strays from 1 by more than 1e-3 fails the load outright, since
 * that cannot be storage rounding. Writes go through a temp file and a
 * rename so readers never observe a half-written artifact.
 */

inline constexpr std::uint16_t kHypfVersion = 1;

struct LoadResult {
  EmbeddingSet embeddings;
  // Largest |norm - 1| seen before renormalization. Values above ~1e-5
  // exceed what float32 rounding alone can explain.
  double max_norm_deviation = 0.0;
};

void save_embeddings(const std::string& path, const EmbeddingSet& set);
LoadResult load_embeddings(const std::string& path);

// Optimization traces: one JSON object per line with keys iter, min_i,
// min_j, min_dist, reg, lr, ms.
void write_trace(const std::string& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace(const std::string& path);

// Sample manifests: one JSON object per line with keys id, sample, v_seed,
// z_seed, emb. Reading infers identity count and samples-per-identity;
// beta and the master seed are not part of the line format.
void write_manifest(const std::string& path, const SampleManifest& manifest);
SampleManifest read_manifest(const std::string& path);

// Flat key = value run configuration. Parsing rejects unknown keys; every
// field has a resolved value after parsing so a serialized config replays a
// run exactly.
struct RunConfig {
  std::string command;

  Index n_id = 0;
  Index dim = 512;
  long n_itr = 100000;
  double alpha = 0.5;
  double lr = 0.01;
  double lr_decay_factor = 0.75;
  long lr_decay_interval = 5000;
  Index batch_size = 0;
  std::uint64_t seed = 1;
  long reg_refresh_interval = 1;
  bool reg_in_cost = true;

  std::string init = "uniform";  // uniform | gallery | file
  std::string refs_in;

  std::string gallery_file;
  Index gallery_synth_points = 0;
  Index gallery_synth_clusters = 1;
  double gallery_synth_concentration = 0.05;
  std::uint64_t gallery_synth_seed = 0;

  double beta = 0.01;
  Index per_id = 64;
  std::uint64_t sample_seed = 0;

  std::string out;
  std::string trace;
  std::string manifest_out;
  std::string emb_out;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string serialize_run_config(const RunConfig& config);

PackingConfig to_packing_config(const RunConfig& config);

// Writes content to path via a temp file and an atomic rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace hyperpack

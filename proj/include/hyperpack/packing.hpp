#pragma once

#include <cstdint>
#include <vector>

#include "hyperpack/gallery.hpp"
#include "hyperpack/optimizer.hpp"
#include "hyperpack/sphere.hpp"

namespace hyperpack {

/*
 * Reference packing: spread n_id unit embeddings so the smallest pairwise
 * cosine distance is as large as possible. Each iteration finds the current
 * closest pair, forms the cost
 *
 *     cost = -d(x_i*, x_j*) + alpha * Reg
 *
 * where Reg is the mean nearest-gallery distance of the points being
 * updated, takes one Adam step on the Euclidean gradient, and renormalizes.
 * The stochastic variant restricts every part of this to a random batch.
 */

struct PackingConfig {
  Index n_id = 0;
  Index dim = 512;
  long n_itr = 100000;
  double alpha = 0.5;
  LrSchedule schedule;
  Index batch_size = 0;  // 0 selects the full-batch step
  std::uint64_t seed = 1;
  // Nearest-gallery assignments are recomputed every this many iterations;
  // 1 keeps them exact, larger values trade accuracy for speed.
  long reg_refresh_interval = 1;
  // When false, the regularizer is still reported in the trace but its
  // gradient is not applied, so the min-pair term alone drives the update.
  bool reg_in_cost = true;
};

struct TraceRecord {
  long iteration = 0;
  Index min_i = -1;
  Index min_j = -1;
  double min_distance = 0.0;
  double reg_value = 0.0;
  double lr = 0.0;
  double wall_time_ms = 0.0;
};

enum class InitMode { kUniformRandom, kGallerySubset };

// Starting references: either uniform random unit points drawn from the
// config seed, or the first n_id gallery entries.
EmbeddingSet init_references(const PackingConfig& config, InitMode mode,
                             const Gallery* gallery = nullptr);

// Mean nearest-gallery distance of the active rows and its gradient. The
// gallery is held fixed, so the gradient w.r.t. active row k is simply
// -g_k / |active| with g_k the nearest gallery point. The alpha weight is
// the caller's business.
struct RegTerm {
  double value = 0.0;
  Mat grads;                    // one row per active entry
  std::vector<Index> nearest;   // gallery index per active entry
};

RegTerm regularization_term(const Mat& refs, const Gallery& gallery,
                            const std::vector<Index>& active);

// Draws uniform batches without replacement by partially shuffling a
// persistent index deck. Batches come back sorted ascending so downstream
// pair scans visit them in the same order a full scan would.
class BatchSampler {
 public:
  BatchSampler(Index n, std::uint64_t seed);
  std::vector<Index> next(Index batch_size);
  Index population() const { return static_cast<Index>(deck_.size()); }

 private:
  std::vector<Index> deck_;
  Rng rng_;
};

// One full-batch iteration at 0-based step t: closest pair over all rows,
// regularizer over all rows, one Adam step, renormalization. nearest_cache
// must have refs.rows() entries (-1 meaning unset) when a gallery is given;
// it carries assignments between refresh iterations.
TraceRecord full_batch_step(Mat& refs, const Gallery* gallery,
                            const PackingConfig& config, AdamState& opt,
                            std::vector<Index>& nearest_cache, long t);

// One stochastic iteration: everything above restricted to a sampled batch.
// Rows outside the batch stay bitwise identical, parameters and moments
// alike. With batch_size == n_id this reproduces full_batch_step exactly.
TraceRecord stochastic_step(Mat& refs, const Gallery* gallery,
                            const PackingConfig& config, AdamState& opt,
                            std::vector<Index>& nearest_cache,
                            BatchSampler& sampler, long t);

struct OptimizeResult {
  EmbeddingSet references;
  std::vector<TraceRecord> trace;
};

// Full optimization run from explicit starting references. The gallery may
// be null only when alpha == 0; with n_itr == 0 the input comes back as-is.
OptimizeResult optimize(const PackingConfig& config, const Gallery* gallery,
                        const EmbeddingSet& init);
OptimizeResult optimize(const PackingConfig& config, const Gallery* gallery,
                        InitMode mode);

// Exhaustive check that the batch gradient of the smooth mean-over-pairs
// objective (pair loss -d) is an unbiased estimator of the full gradient:
// averages the 1/C(b,2)-scaled gradient over every size-b batch and
// compares. Enumeration refuses to run past 1e6 batches.
struct UnbiasednessResult {
  Mat full_gradient;
  Mat mean_batch_gradient;
  double max_abs_diff = 0.0;
  std::uint64_t batch_count = 0;
};

UnbiasednessResult verify_unbiasedness(const Mat& refs, Index batch_size);

// Central finite differences against the analytic gradient of the cost at
// a configuration whose min pair and nearest-gallery assignments stay put
// under every probe; a crossed selection boundary raises UnstableSelection.
// Errors are measured relative to the gradient's overall magnitude.
struct GradientCheckResult {
  double max_rel_error = 0.0;
  Index worst_row = -1;
  Index worst_col = -1;
};

GradientCheckResult check_gradient(const Mat& refs, const Gallery* gallery,
                                   double alpha, double fd_step = 1e-6);

}  // namespace hyperpack

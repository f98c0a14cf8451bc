#include "hyperpack/packing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace hyperpack {

namespace {

// Sub-seed tags so initialization and batch sampling draw from
// decorrelated streams of one master seed.
constexpr std::uint64_t kInitStream = 0x696e6974;
constexpr std::uint64_t kBatchStream = 0x62617463;

std::vector<Index> all_rows(Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Index>(i);
  return rows;
}

void validate_config(const PackingConfig& c) {
  if (c.n_id < 1) throw InvalidArgument("n_id must be at least 1");
  if (c.dim < 2) throw InvalidArgument("dim must be at least 2");
  if (c.n_itr < 0) throw InvalidArgument("n_itr must be non-negative");
  if (!(c.alpha >= 0.0)) throw InvalidArgument("alpha must be non-negative");
  if (c.reg_refresh_interval < 1)
    throw InvalidArgument("reg_refresh_interval must be at least 1");
  if (c.batch_size < 0 || c.batch_size > c.n_id)
    throw InvalidArgument("batch_size must be 0 (full) or in [2, n_id]");
  if (c.batch_size == 1)
    throw BatchTooSmall("a batch of 1 has no pair to separate");
  lr_at(c.schedule, 0);  // validates the schedule fields
}

void renormalize_rows(Mat& refs, const std::vector<Index>& rows) {
  for (const Index r : rows) {
    const double n = refs.row(r).norm();
    if (!(n > kNormEpsilon))
      throw DegenerateVector("row " + std::to_string(r) +
                             " collapsed to norm " + std::to_string(n));
    refs.row(r) /= n;
  }
}

// Refreshes (per policy) and reads the cached nearest-gallery assignment
// for each active row, returning the mean distance and filling grads with
// the per-row gradient -g_k / |active|.
double cached_reg(const Mat& refs, const std::vector<Index>& active,
                  const Gallery& gallery, std::vector<Index>& cache,
                  bool refresh, Mat* grads) {
  std::vector<Index> stale;
  if (refresh) {
    stale = active;
  } else {
    for (const Index r : active)
      if (cache[static_cast<std::size_t>(r)] < 0) stale.push_back(r);
  }
  if (!stale.empty()) {
    const std::vector<Index> found =
        nearest_gallery_indices(refs, stale, gallery);
    for (std::size_t k = 0; k < stale.size(); ++k)
      cache[static_cast<std::size_t>(stale[k])] = found[k];
  }
  const double inv_m = 1.0 / static_cast<double>(active.size());
  double value = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Index r = active[k];
    const Index g = cache[static_cast<std::size_t>(r)];
    value += cosine_distance(refs.row(r), gallery.matrix().row(g));
    if (grads != nullptr)
      grads->row(static_cast<Index>(k)) -= inv_m * gallery.matrix().row(g);
  }
  return value * inv_m;
}

// Shared body of the full-batch and stochastic steps; `rows` is sorted.
TraceRecord step_on_rows(Mat& refs, const std::vector<Index>& rows,
                         const Gallery* gallery, const PackingConfig& config,
                         AdamState& opt, std::vector<Index>& nearest_cache,
                         long t) {
  const auto started = std::chrono::steady_clock::now();
  const MinPair pair = pairwise_min_subset(refs, rows);
  const double lr = lr_at(config.schedule, t);

  Mat grads = Mat::Zero(static_cast<Index>(rows.size()), refs.cols());
  const auto pos = [&rows](Index r) {
    return static_cast<Index>(
        std::lower_bound(rows.begin(), rows.end(), r) - rows.begin());
  };
  // d(x_i, x_j) = 1 - x_i.x_j, so the cost term -d contributes +x_j to the
  // gradient at x_i; descent then pushes the pair apart.
  grads.row(pos(pair.i)) += refs.row(pair.j);
  grads.row(pos(pair.j)) += refs.row(pair.i);

  double reg_value = 0.0;
  if (gallery != nullptr) {
    const bool refresh = t % config.reg_refresh_interval == 0;
    const bool in_cost = config.reg_in_cost && config.alpha > 0.0;
    Mat reg_grads;
    if (in_cost) reg_grads = Mat::Zero(grads.rows(), grads.cols());
    reg_value = cached_reg(refs, rows, *gallery, nearest_cache, refresh,
                           in_cost ? &reg_grads : nullptr);
    if (in_cost) grads += config.alpha * reg_grads;
  }

  adam_step_rows(opt, refs, grads, rows, lr);
  renormalize_rows(refs, rows);

  TraceRecord rec;
  rec.iteration = t;
  rec.min_i = pair.i;
  rec.min_j = pair.j;
  rec.min_distance = pair.distance;
  rec.reg_value = reg_value;
  rec.lr = lr;
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - started)
          .count();
  return rec;
}

}  // namespace

EmbeddingSet init_references(const PackingConfig& config, InitMode mode,
                             const Gallery* gallery) {
  validate_config(config);
  if (mode == InitMode::kGallerySubset) {
    if (gallery == nullptr)
      throw InvalidArgument("gallery-subset initialization needs a gallery");
    if (gallery->count() < config.n_id)
      throw GalleryTooSmall("gallery holds " + std::to_string(gallery->count()) +
                            " points, need " + std::to_string(config.n_id));
    if (gallery->dim() != config.dim)
      throw DimensionMismatch("gallery dim " + std::to_string(gallery->dim()) +
                              " vs config dim " + std::to_string(config.dim));
    return EmbeddingSet(gallery->matrix().topRows(config.n_id));
  }
  Rng rng = make_rng(mix_seed(config.seed, kInitStream));
  Mat points(config.n_id, config.dim);
  for (Index i = 0; i < config.n_id; ++i)
    points.row(i) = random_unit(config.dim, rng);
  return EmbeddingSet(std::move(points));
}

RegTerm regularization_term(const Mat& refs, const Gallery& gallery,
                            const std::vector<Index>& active) {
  if (active.empty()) throw InvalidArgument("no active rows");
  if (refs.cols() != gallery.dim())
    throw DimensionMismatch("refs dim " + std::to_string(refs.cols()) +
                            " vs gallery dim " + std::to_string(gallery.dim()));
  RegTerm term;
  term.nearest = nearest_gallery_indices(refs, active, gallery);
  term.grads = Mat::Zero(static_cast<Index>(active.size()), refs.cols());
  const double inv_m = 1.0 / static_cast<double>(active.size());
  double value = 0.0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const Index g = term.nearest[k];
    value += cosine_distance(refs.row(active[k]), gallery.matrix().row(g));
    term.grads.row(static_cast<Index>(k)) = -inv_m * gallery.matrix().row(g);
  }
  term.value = value * inv_m;
  return term;
}

BatchSampler::BatchSampler(Index n, std::uint64_t seed)
    : deck_(all_rows(n)), rng_(make_rng(mix_seed(seed, kBatchStream))) {
  if (n < 1) throw InvalidArgument("population must be at least 1");
}

std::vector<Index> BatchSampler::next(Index batch_size) {
  const Index n = population();
  if (batch_size < 2)
    throw BatchTooSmall("batch of " + std::to_string(batch_size) +
                        " has no pair to separate");
  if (batch_size > n)
    throw InvalidArgument("batch of " + std::to_string(batch_size) +
                          " exceeds population " + std::to_string(n));
  // Partial Fisher-Yates: after b swaps the deck prefix is a uniform
  // without-replacement sample whatever permutation the deck started in.
  for (Index i = 0; i < batch_size; ++i) {
    const Index j =
        i + static_cast<Index>(uniform_below(
                rng_, static_cast<std::uint64_t>(n - i)));
    std::swap(deck_[static_cast<std::size_t>(i)],
              deck_[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> batch(deck_.begin(), deck_.begin() + batch_size);
  std::sort(batch.begin(), batch.end());
  return batch;
}

TraceRecord full_batch_step(Mat& refs, const Gallery* gallery,
                            const PackingConfig& config, AdamState& opt,
                            std::vector<Index>& nearest_cache, long t) {
  return step_on_rows(refs, all_rows(refs.rows()), gallery, config, opt,
                      nearest_cache, t);
}

TraceRecord stochastic_step(Mat& refs, const Gallery* gallery,
                            const PackingConfig& config, AdamState& opt,
                            std::vector<Index>& nearest_cache,
                            BatchSampler& sampler, long t) {
  return step_on_rows(refs, sampler.next(config.batch_size), gallery, config,
                      opt, nearest_cache, t);
}

OptimizeResult optimize(const PackingConfig& config, const Gallery* gallery,
                        const EmbeddingSet& init) {
  validate_config(config);
  if (init.count() != config.n_id || init.dim() != config.dim)
    throw DimensionMismatch(
        "initial references are " + std::to_string(init.count()) + "x" +
        std::to_string(init.dim()) + ", config wants " +
        std::to_string(config.n_id) + "x" + std::to_string(config.dim));
  if (config.alpha > 0.0 && gallery == nullptr)
    throw EmptyGallery("alpha > 0 requires a gallery");
  if (gallery != nullptr && gallery->dim() != config.dim)
    throw DimensionMismatch("gallery dim " + std::to_string(gallery->dim()) +
                            " vs config dim " + std::to_string(config.dim));
  if (config.n_itr > 0 && config.n_id < 2)
    throw TooFewPoints("cannot separate fewer than 2 points");

  Mat refs = init.points();
  AdamState opt;
  std::vector<Index> nearest_cache(
      gallery != nullptr ? static_cast<std::size_t>(config.n_id) : 0, -1);
  BatchSampler sampler(std::max<Index>(config.n_id, 1), config.seed);

  OptimizeResult result{init, {}};
  result.trace.reserve(static_cast<std::size_t>(config.n_itr));
  try {
    for (long t = 0; t < config.n_itr; ++t) {
      if (config.batch_size == 0)
        result.trace.push_back(
            full_batch_step(refs, gallery, config, opt, nearest_cache, t));
      else
        result.trace.push_back(stochastic_step(refs, gallery, config, opt,
                                               nearest_cache, sampler, t));
    }
  } catch (const NonFiniteGradient& e) {
    throw NonFiniteGradient(std::string(e.what()) + " (at iteration " +
                            std::to_string(result.trace.size()) + ")");
  }
  result.references = EmbeddingSet(std::move(refs));
  return result;
}

OptimizeResult optimize(const PackingConfig& config, const Gallery* gallery,
                        InitMode mode) {
  return optimize(config, gallery, init_references(config, mode, gallery));
}

namespace {

// Gradient of the smooth objective (1/C(m,2)) * sum_{a<b} -d(x_a, x_b)
// accumulated over the given rows in lexicographic pair order. Shared by
// the full and per-batch paths so a batch of everything matches the full
// gradient bit for bit.
Mat pair_mean_gradient(const Mat& refs, const std::vector<Index>& rows,
                       double inv_pairs) {
  Mat grad = Mat::Zero(refs.rows(), refs.cols());
  const Index m = static_cast<Index>(rows.size());
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      const Index i = rows[static_cast<std::size_t>(a)];
      const Index j = rows[static_cast<std::size_t>(b)];
      grad.row(i) += inv_pairs * refs.row(j);
      grad.row(j) += inv_pairs * refs.row(i);
    }
  }
  return grad;
}

std::uint64_t binomial_guarded(Index n, Index k, std::uint64_t cap) {
  double value = 1.0;
  for (Index i = 0; i < k; ++i) {
    value *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (value > static_cast<double>(cap) * 2.0) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(value));
}

}  // namespace

UnbiasednessResult verify_unbiasedness(const Mat& refs, Index batch_size) {
  const Index n = refs.rows();
  if (n < 2) throw TooFewPoints("need at least 2 points");
  if (batch_size < 2) throw BatchTooSmall("batch must hold at least one pair");
  if (batch_size > n)
    throw InvalidArgument("batch of " + std::to_string(batch_size) +
                          " exceeds population " + std::to_string(n));
  constexpr std::uint64_t kMaxBatches = 1000000;
  const std::uint64_t n_batches = binomial_guarded(n, batch_size, kMaxBatches);
  if (n_batches > kMaxBatches)
    throw TooManyBatches("C(" + std::to_string(n) + ", " +
                         std::to_string(batch_size) + ") exceeds " +
                         std::to_string(kMaxBatches));

  UnbiasednessResult result;
  result.batch_count = n_batches;
  const double inv_full = 2.0 / (static_cast<double>(n) * (n - 1));
  result.full_gradient = pair_mean_gradient(refs, all_rows(n), inv_full);

  const double inv_batch_pairs =
      2.0 / (static_cast<double>(batch_size) * (batch_size - 1));
  Mat sum = Mat::Zero(n, refs.cols());
  // Lexicographic enumeration of all size-b index combinations.
  std::vector<Index> combo(static_cast<std::size_t>(batch_size));
  for (Index i = 0; i < batch_size; ++i) combo[static_cast<std::size_t>(i)] = i;
  while (true) {
    sum += pair_mean_gradient(refs, combo, inv_batch_pairs);
    Index slot = batch_size - 1;
    while (slot >= 0 &&
           combo[static_cast<std::size_t>(slot)] == n - batch_size + slot)
      --slot;
    if (slot < 0) break;
    ++combo[static_cast<std::size_t>(slot)];
    for (Index k = slot + 1; k < batch_size; ++k)
      combo[static_cast<std::size_t>(k)] =
          combo[static_cast<std::size_t>(k - 1)] + 1;
  }
  result.mean_batch_gradient = sum / static_cast<double>(n_batches);
  result.max_abs_diff =
      (result.mean_batch_gradient - result.full_gradient).array().abs().maxCoeff();
  return result;
}

namespace {

struct CostEval {
  MinPair pair;
  std::vector<Index> nearest;
  double value = 0.0;
};

// Cost at an arbitrary (possibly off-sphere) configuration. Uses the raw
// 1 - dot form rather than the clamped metric: finite differences probe
// points slightly off the sphere, where clamping would flatten the surface.
CostEval eval_cost(const Mat& refs, const Gallery* gallery, double alpha) {
  CostEval eval;
  eval.pair = pairwise_min(refs);
  eval.value = -(1.0 - refs.row(eval.pair.i).dot(refs.row(eval.pair.j)));
  if (alpha > 0.0) {
    if (gallery == nullptr) throw EmptyGallery("alpha > 0 requires a gallery");
    const std::vector<Index> rows = all_rows(refs.rows());
    eval.nearest = nearest_gallery_indices(refs, rows, *gallery);
    double reg = 0.0;
    for (Index k = 0; k < refs.rows(); ++k)
      reg += 1.0 - refs.row(k).dot(gallery->matrix().row(
                 eval.nearest[static_cast<std::size_t>(k)]));
    eval.value += alpha * reg / static_cast<double>(refs.rows());
  }
  return eval;
}

}  // namespace

GradientCheckResult check_gradient(const Mat& refs, const Gallery* gallery,
                                   double alpha, double fd_step) {
  if (refs.rows() < 2) throw TooFewPoints("need at least 2 points");
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  const CostEval base = eval_cost(refs, gallery, alpha);

  Mat analytic = Mat::Zero(refs.rows(), refs.cols());
  analytic.row(base.pair.i) += refs.row(base.pair.j);
  analytic.row(base.pair.j) += refs.row(base.pair.i);
  if (alpha > 0.0) {
    const double inv_n = 1.0 / static_cast<double>(refs.rows());
    for (Index k = 0; k < refs.rows(); ++k)
      analytic.row(k) -= alpha * inv_n *
                         gallery->matrix().row(
                             base.nearest[static_cast<std::size_t>(k)]);
  }

  const auto probe = [&](Mat& work, Index r, Index c, double delta) {
    const double original = work(r, c);
    work(r, c) = original + delta;
    const CostEval eval = eval_cost(work, gallery, alpha);
    work(r, c) = original;
    if (eval.pair.i != base.pair.i || eval.pair.j != base.pair.j)
      throw UnstableSelection("min pair moved under perturbation of (" +
                              std::to_string(r) + ", " + std::to_string(c) +
                              ")");
    if (eval.nearest != base.nearest)
      throw UnstableSelection(
          "nearest-gallery assignment moved under perturbation of (" +
          std::to_string(r) + ", " + std::to_string(c) + ")");
    return eval.value;
  };

  Mat fd(refs.rows(), refs.cols());
  Mat work = refs;
  for (Index r = 0; r < refs.rows(); ++r) {
    for (Index c = 0; c < refs.cols(); ++c) {
      const double up = probe(work, r, c, fd_step);
      const double down = probe(work, r, c, -fd_step);
      fd(r, c) = (up - down) / (2.0 * fd_step);
    }
  }

  // Component errors are judged against the gradient's overall scale; a
  // pure per-component ratio would blow up on coordinates near zero.
  const double scale = std::max(
      {analytic.array().abs().maxCoeff(), fd.array().abs().maxCoeff(), 1e-12});
  GradientCheckResult result;
  for (Index r = 0; r < refs.rows(); ++r) {
    for (Index c = 0; c < refs.cols(); ++c) {
      const double err = std::abs(analytic(r, c) - fd(r, c)) / scale;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_row = r;
        result.worst_col = c;
      }
    }
  }
  return result;
}

}  // namespace hyperpack

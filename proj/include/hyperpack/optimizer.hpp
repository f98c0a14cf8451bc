#pragma once

#include <vector>

#include "hyperpack/errors.hpp"
#include "hyperpack/types.hpp"

namespace hyperpack {

// Step decay: the rate drops by a constant factor once per interval.
struct LrSchedule {
  double initial_lr = 0.01;
  double decay_factor = 0.75;
  long decay_interval = 5000;
};

// Rate in effect at 0-based iteration t. Integer exponentiation keeps the
// value exact for factors like 0.75 that are exact in binary.
inline double lr_at(const LrSchedule& s, long t) {
  if (!(s.initial_lr > 0.0))
    throw InvalidArgument("initial_lr must be positive");
  if (!(s.decay_factor > 0.0 && s.decay_factor <= 1.0))
    throw InvalidArgument("decay_factor must be in (0, 1]");
  if (s.decay_interval < 1)
    throw InvalidArgument("decay_interval must be at least 1");
  if (t < 0) throw InvalidArgument("iteration index must be non-negative");
  double lr = s.initial_lr;
  for (long k = t / s.decay_interval; k > 0; --k) lr *= s.decay_factor;
  return lr;
}

// Adam accumulator state. Moments are flat and row-major-aligned with the
// parameter matrix they serve, so row r occupies [r*dim, (r+1)*dim).
struct AdamState {
  Vec first_moment;
  Vec second_moment;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One Adam update over a flat parameter vector. Bias-corrected; a zero
// gradient on a fresh state leaves parameters bitwise unchanged.
void adam_step(AdamState& state, Eigen::Ref<Vec> params,
               const Eigen::Ref<const Vec>& grads, double lr);

// One Adam update restricted to the given rows of a row-major parameter
// matrix. row_grads.row(k) is the gradient for params.row(rows[k]). Rows
// outside `rows` keep both their parameters and their moments bitwise
// intact, and step_count advances once for the whole call.
void adam_step_rows(AdamState& state, Mat& params, const Mat& row_grads,
                    const std::vector<Index>& rows, double lr);

}  // namespace hyperpack

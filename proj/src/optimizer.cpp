#include "hyperpack/optimizer.hpp"

#include <cmath>

namespace hyperpack {

namespace {

void ensure_moments(AdamState& state, Index size) {
  if (state.first_moment.size() == 0) {
    state.first_moment = Vec::Zero(size);
    state.second_moment = Vec::Zero(size);
  } else if (state.first_moment.size() != size) {
    throw DimensionMismatch("optimizer state tracks " +
                            std::to_string(state.first_moment.size()) +
                            " parameters, got " + std::to_string(size));
  }
}

void check_finite(const Eigen::Ref<const Vec>& grads) {
  if (grads.allFinite()) return;
  for (Index k = 0; k < grads.size(); ++k)
    if (!std::isfinite(grads[k]))
      throw NonFiniteGradient("non-finite gradient component at index " +
                              std::to_string(k) + ": " +
                              std::to_string(grads[k]));
}

// Core update on one contiguous slice. bc1/bc2 are the bias corrections
// 1 - beta^t for the step count already advanced by the caller.
void apply_segment(const AdamState& state, Eigen::Ref<Vec> m,
                   Eigen::Ref<Vec> v, Eigen::Ref<Vec> p,
                   const Eigen::Ref<const Vec>& g, double lr, double bc1,
                   double bc2) {
  m = state.beta1 * m + (1.0 - state.beta1) * g;
  v.array() = state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square();
  p.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
}

}  // namespace

void adam_step(AdamState& state, Eigen::Ref<Vec> params,
               const Eigen::Ref<const Vec>& grads, double lr) {
  if (params.size() != grads.size())
    throw DimensionMismatch("params/grads size mismatch: " +
                            std::to_string(params.size()) + " vs " +
                            std::to_string(grads.size()));
  check_finite(grads);
  ensure_moments(state, params.size());
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  apply_segment(state, state.first_moment, state.second_moment, params, grads,
                lr, bc1, bc2);
}

void adam_step_rows(AdamState& state, Mat& params, const Mat& row_grads,
                    const std::vector<Index>& rows, double lr) {
  const Index dim = params.cols();
  if (row_grads.cols() != dim ||
      row_grads.rows() != static_cast<Index>(rows.size()))
    throw DimensionMismatch("row gradient block must be " +
                            std::to_string(rows.size()) + "x" +
                            std::to_string(dim));
  ensure_moments(state, params.size());
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  Eigen::Map<Vec> flat(params.data(), params.size());
  for (Index k = 0; k < row_grads.rows(); ++k) {
    const Index r = rows[static_cast<std::size_t>(k)];
    if (r < 0 || r >= params.rows())
      throw InvalidArgument("row index " + std::to_string(r) +
                            " outside parameter matrix");
    check_finite(row_grads.row(k).transpose());
    apply_segment(state, state.first_moment.segment(r * dim, dim),
                  state.second_moment.segment(r * dim, dim),
                  flat.segment(r * dim, dim), row_grads.row(k).transpose(), lr,
                  bc1, bc2);
  }
}

}  // namespace hyperpack

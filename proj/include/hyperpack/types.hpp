#pragma once

#include <Eigen/Core>

namespace hyperpack {

// All internal arithmetic runs in double; float32 appears only in on-disk
// payloads. Point sets are row-major so each embedding is contiguous.
using Index = Eigen::Index;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vec = VecX<double>;
using Mat = MatX<double>;
using VecF = VecX<float>;
using MatF = MatX<float>;

// Norm floor below which a vector has no usable direction.
inline constexpr double kNormEpsilon = 1e-12;

// Tolerance for the unit-norm invariant on stored embeddings.
inline constexpr double kUnitNormTol = 1e-6;

}  // namespace hyperpack

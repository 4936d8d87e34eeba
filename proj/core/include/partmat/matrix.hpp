// Copyright (c) 2026 The partmat Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARTMAT_MATRIX_HPP_
#define PARTMAT_MATRIX_HPP_

#include <Eigen/Core>

namespace partmat {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

}  // namespace partmat

#endif  // PARTMAT_MATRIX_HPP_

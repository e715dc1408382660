// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gemm.hpp"

#include <Eigen/Core>

namespace gaitformer::detail {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

// Below this many multiply-adds the plain loops beat Eigen's dispatch.
constexpr std::size_t kSmallProduct = 4096;

void gemm_small(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = trans_a ? a[p * m + i] : a[i * k + p];
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * b[j * k + p];
      } else {
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace

void gemm_accumulate(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                     const double* a, const double* b, double* c) {
  if (m * n * k < kSmallProduct) {
    gemm_small(trans_a, trans_b, m, n, k, a, b, c);
    return;
  }
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);
  const auto inner = static_cast<Eigen::Index>(k);
  Map out(c, rows, cols);
  if (!trans_a && !trans_b) {
    out.noalias() += ConstMap(a, rows, inner) * ConstMap(b, inner, cols);
  } else if (!trans_a && trans_b) {
    out.noalias() += ConstMap(a, rows, inner) * ConstMap(b, cols, inner).transpose();
  } else if (trans_a && !trans_b) {
    out.noalias() += ConstMap(a, inner, rows).transpose() * ConstMap(b, inner, cols);
  } else {
    out.noalias() += ConstMap(a, inner, rows).transpose() * ConstMap(b, cols, inner).transpose();
  }
}

}  // namespace gaitformer::detail

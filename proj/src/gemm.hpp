// Copyright 2026 The Gaitformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace gaitformer::detail {

// Row-major C (m x n) += op(A) * op(B), where op(A) is m x k and op(B) is
// k x n. A transposed operand is stored in its untransposed layout.
void gemm_accumulate(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                     const double* a, const double* b, double* c);

}  // namespace gaitformer::detail

#pragma once

#include <span>

#include "tdm/tensor.hpp"

namespace tdm {

/// Elementwise product. Requires equal order and mode-wise equal sizes;
/// result carries x's dimensions. Boolean x boolean is logical AND; mixed
/// types promote (boolean -> integer -> real). The result default is the
/// product of the input defaults, and when either default is zero only the
/// relevant stored entries are visited.
TypedTensor hadamard(const TypedTensor& x, const TypedTensor& y);

/// Kronecker product: block (i,j) of the result is a(i,j) * b.
DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b);

/// Column-wise Kronecker product; operands need equal column counts.
DenseMatrix khatri_rao(const DenseMatrix& a, const DenseMatrix& b);

/// Outer product of 1-order tensors: entry (i1..iN) = prod vs[n][i_n].
/// Dimension names of the inputs must be pairwise distinct.
TypedTensor outer(std::span<const TypedTensor> vectors);

/// Mode-n product x ×_n m. The contracted dimension is replaced by an
/// anonymous integer dimension "<name>_proj" with keys 1..m.rows(). The
/// result is real-valued and satisfies unfold(result, n) = m * unfold(x, n).
TypedTensor n_mode_product(const TypedTensor& x, const DenseMatrix& m, std::size_t mode);

}  // namespace tdm

#pragma once

#include <cstdint>
#include <vector>

#include "tdm/tensor.hpp"

namespace tdm {

/// CP decomposition: t ≈ sum_r weights[r] * a1_r ∘ a2_r ∘ ... ∘ aN_r.
/// Factor columns are unit 2-norm; norms live in weights, sorted descending
/// (ties broken by the first differing factor entry).
struct CpResult {
    std::size_t rank = 0;
    std::vector<double> weights;
    std::vector<DenseMatrix> factors;   // factor n: dims[n].size x rank
    std::size_t iterations = 0;
    double final_fit = 0.0;
    /// True when a least-squares update hit the pseudo-inverse cutoff.
    bool singular_update = false;
    /// Fit after every completed sweep (non-decreasing for ALS).
    std::vector<double> fit_trace;
};

/// Tucker form produced by HOSVD: t ≈ core ×_1 factors[0] ... ×_N factors[N-1]
/// with orthonormal factor columns.
struct TuckerResult {
    TypedTensor core;
    std::vector<DenseMatrix> factors;   // factor n: dims[n].size x ranks[n]
    std::vector<Dimension> dims;        // original dimensions of the input
};

/// Alternating least squares. Deterministic given (tensor, rank, seed):
/// factors initialize uniform [0,1) from the seed, sweeps solve each mode
/// exactly via a pseudo-inverse (cutoff 1e-12 * sigma_max), and iteration
/// stops when the fit change drops below tol or max_iters is reached.
/// A zero tensor returns the trivial rank-0 result.
CpResult cp_als(const TypedTensor& t, std::size_t rank, std::size_t max_iters = 500,
                double tol = 1e-8, std::uint64_t seed = 0);

/// Truncated higher-order SVD: factor n holds the leading ranks[n] left
/// singular vectors of unfold(t, n); the core is t contracted with every
/// factor transpose. Full ranks reconstruct t to ~1e-10 relative error.
TuckerResult hosvd(const TypedTensor& t, std::vector<std::size_t> ranks);

/// Materialize the CP model over the given dimensions (dense in the model's
/// support, re-sparsified at kSparsifyEps).
TypedTensor reconstruct_cp(const CpResult& r, std::vector<Dimension> dims);

TypedTensor reconstruct_tucker(const TuckerResult& r);

/// 1 - |t - approx|_F / |t|_F; 1 when both norms vanish.
double fit(const TypedTensor& t, const TypedTensor& approx);

}  // namespace tdm

#include "tdm/decomp.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdm/algebra.hpp"
#include "tdm/error.hpp"
#include "tdm/rng.hpp"

namespace tdm {

namespace {

constexpr double kPinvCutoff = 1e-12;

/// Pseudo-inverse of a symmetric PSD matrix via eigendecomposition.
/// Sets *truncated when an eigenvalue falls under cutoff * lambda_max.
DenseMatrix psd_pinv(const DenseMatrix& v, bool* truncated) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(v);
    const Eigen::VectorXd evals = es.eigenvalues();
    const double lambda_max = evals.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(evals.size());
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (std::abs(evals(i)) > kPinvCutoff * lambda_max && evals(i) != 0.0) {
            inv(i) = 1.0 / evals(i);
        } else if (truncated) {
            *truncated = true;
        }
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Matricized-tensor times Khatri-Rao product, computed directly from the
/// sparse entries: out(i_n, r) = sum over entries v * prod_{m!=n} A_m(i_m, r).
DenseMatrix mttkrp(const std::vector<std::pair<Coords, double>>& entries,
                   const std::vector<DenseMatrix>& factors, std::size_t mode_idx,
                   std::size_t rows, std::size_t rank) {
    DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(rank));
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(rank));
    for (const auto& [coords, v] : entries) {
        row.setConstant(v);
        for (std::size_t m = 0; m < factors.size(); ++m) {
            if (m == mode_idx) continue;
            row = row.cwiseProduct(factors[m].row(coords[m] - 1));
        }
        out.row(coords[mode_idx] - 1) += row;
    }
    return out;
}

/// Model value at one coordinate: sum_r weights[r] * prod_n A_n(i_n, r).
double cp_value(const std::vector<DenseMatrix>& factors, const Eigen::VectorXd& weights,
                const Coords& coords) {
    Eigen::RowVectorXd row = weights.transpose();
    for (std::size_t n = 0; n < factors.size(); ++n) {
        row = row.cwiseProduct(factors[n].row(coords[n] - 1));
    }
    return row.sum();
}

}  // namespace

CpResult cp_als(const TypedTensor& t, std::size_t rank, std::size_t max_iters, double tol,
                std::uint64_t seed) {
    if (!t.is_numeric()) throw NonNumericValueTypeError("cp_als requires a numeric tensor");
    if (value_as_real(t.default_value()) != 0.0) {
        throw TypeMismatchError("cp_als requires a zero default value");
    }
    if (t.order() < 2) throw ModeOutOfRangeError("cp_als requires an order >= 2 tensor");
    if (rank < 1) throw RankOutOfRangeError("cp_als rank must be >= 1");

    const std::size_t order = t.order();
    const double norm_t = frobenius_norm(t);

    CpResult result;
    if (norm_t == 0.0) {
        // Zero tensor: trivial rank-0 model fits exactly.
        result.final_fit = 1.0;
        for (std::size_t n = 0; n < order; ++n) {
            result.factors.emplace_back(DenseMatrix::Zero(
                static_cast<Eigen::Index>(t.dim(n + 1).size()), 0));
        }
        return result;
    }

    // Deterministic reduction order for MTTKRP: iterate entries sorted.
    std::vector<std::pair<Coords, double>> entries;
    entries.reserve(t.stored_count());
    for (const auto& [coords, v] : t.sorted_entries()) {
        entries.emplace_back(coords, value_as_real(v));
    }

    Rng rng(seed);
    std::vector<DenseMatrix> factors(order);
    std::vector<DenseMatrix> grams(order);
    for (std::size_t n = 0; n < order; ++n) {
        const auto rows = static_cast<Eigen::Index>(t.dim(n + 1).size());
        factors[n].resize(rows, static_cast<Eigen::Index>(rank));
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rank); ++r) {
                factors[n](i, r) = rng.next_double();
            }
        }
        grams[n] = factors[n].transpose() * factors[n];
    }

    Eigen::VectorXd weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rank));
    double prev_fit = 0.0;
    bool have_prev = false;
    bool singular = false;

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        for (std::size_t n = 0; n < order; ++n) {
            DenseMatrix v = DenseMatrix::Ones(static_cast<Eigen::Index>(rank),
                                              static_cast<Eigen::Index>(rank));
            for (std::size_t m = 0; m < order; ++m) {
                if (m != n) v = v.cwiseProduct(grams[m]);
            }
            const DenseMatrix m = mttkrp(entries, factors, n, t.dim(n + 1).size(), rank);
            factors[n] = m * psd_pinv(v, &singular);

            // Column norms move into the weights; zero columns stay zero.
            for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(rank); ++r) {
                const double norm = factors[n].col(r).norm();
                weights(r) = norm;
                if (norm > 0.0) factors[n].col(r) /= norm;
            }
            grams[n] = factors[n].transpose() * factors[n];
        }

        // Error split into a stable on-support sum plus the model's
        // off-support mass (Gram identity minus the on-support part);
        // avoids the cancellation of the textbook |t|^2 - 2<t,m> + |m|^2
        // form near perfect fits.
        double on_support_err = 0.0;
        double on_support_model = 0.0;
        for (const auto& [coords, v] : entries) {
            const double m = cp_value(factors, weights, coords);
            const double d = v - m;
            on_support_err += d * d;
            on_support_model += m * m;
        }
        double off_support = 0.0;
        if (static_cast<double>(t.stored_count()) != t.dense_extent()) {
            DenseMatrix w = weights * weights.transpose();
            for (std::size_t n = 0; n < order; ++n) w = w.cwiseProduct(grams[n]);
            off_support = std::max(0.0, w.sum() - on_support_model);
        }
        const double err_sq = on_support_err + off_support;
        const double fit_now = 1.0 - std::sqrt(err_sq) / norm_t;

        result.iterations = iter;
        result.fit_trace.push_back(fit_now);
        const bool converged = have_prev && std::abs(fit_now - prev_fit) < tol;
        prev_fit = fit_now;
        have_prev = true;
        if (converged) break;
    }

    // Canonical order: weights descending, ties by first differing factor
    // entry scanning factors in mode order.
    std::vector<std::size_t> perm(rank);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        if (weights(ia) != weights(ib)) return weights(ia) > weights(ib);
        for (const auto& f : factors) {
            for (Eigen::Index i = 0; i < f.rows(); ++i) {
                if (f(i, ia) != f(i, ib)) return f(i, ia) < f(i, ib);
            }
        }
        return false;
    });

    result.rank = rank;
    result.weights.resize(rank);
    result.factors.resize(order);
    for (std::size_t n = 0; n < order; ++n) {
        result.factors[n].resize(factors[n].rows(), static_cast<Eigen::Index>(rank));
    }
    for (std::size_t r = 0; r < rank; ++r) {
        result.weights[r] = weights(static_cast<Eigen::Index>(perm[r]));
        for (std::size_t n = 0; n < order; ++n) {
            result.factors[n].col(static_cast<Eigen::Index>(r)) =
                factors[n].col(static_cast<Eigen::Index>(perm[r]));
        }
    }
    result.final_fit = result.fit_trace.empty() ? 0.0 : result.fit_trace.back();
    result.singular_update = singular;
    return result;
}

TuckerResult hosvd(const TypedTensor& t, std::vector<std::size_t> ranks) {
    if (!t.is_numeric()) throw NonNumericValueTypeError("hosvd requires a numeric tensor");
    if (ranks.size() != t.order()) {
        throw RankOutOfRangeError("hosvd needs one rank per mode");
    }
    for (std::size_t n = 0; n < ranks.size(); ++n) {
        if (ranks[n] < 1 || ranks[n] > t.dim(n + 1).size()) {
            throw RankOutOfRangeError("rank " + std::to_string(ranks[n]) +
                                      " out of range [1, " + std::to_string(t.dim(n + 1).size()) +
                                      "] in mode " + std::to_string(n + 1));
        }
    }

    std::vector<DenseMatrix> factors(t.order());
    for (std::size_t n = 0; n < t.order(); ++n) {
        const DenseMatrix m = unfold(t, n + 1);
        const auto want = static_cast<Eigen::Index>(ranks[n]);
        const bool need_full = want > std::min(m.rows(), m.cols());
        Eigen::BDCSVD<DenseMatrix> svd(m, need_full ? Eigen::ComputeFullU : Eigen::ComputeThinU);
        factors[n] = svd.matrixU().leftCols(want);

        // Sign convention: the largest-magnitude entry of each column is
        // positive (first occurrence wins ties).
        for (Eigen::Index c = 0; c < factors[n].cols(); ++c) {
            Eigen::Index arg = 0;
            factors[n].col(c).cwiseAbs().maxCoeff(&arg);
            if (factors[n](arg, c) < 0.0) factors[n].col(c) = -factors[n].col(c);
        }
    }

    TypedTensor core = cast_values(t, ValueType::Real);
    for (std::size_t n = 0; n < t.order(); ++n) {
        core = n_mode_product(core, factors[n].transpose(), n + 1);
    }
    return TuckerResult{std::move(core), std::move(factors), t.dims()};
}

TypedTensor reconstruct_cp(const CpResult& r, std::vector<Dimension> dims) {
    if (r.factors.size() != dims.size()) {
        throw ShapeMismatchError("reconstruct_cp: " + std::to_string(r.factors.size()) +
                                 " factors vs " + std::to_string(dims.size()) + " dimensions");
    }
    double extent = 1.0;
    for (std::size_t n = 0; n < dims.size(); ++n) {
        if (static_cast<std::size_t>(r.factors[n].rows()) != dims[n].size()) {
            throw ShapeMismatchError("reconstruct_cp: factor " + std::to_string(n + 1) +
                                     " rows do not match dimension size");
        }
        extent *= static_cast<double>(dims[n].size());
    }
    if (extent > 5e7) {
        throw Error("reconstruct_cp would materialize " + format_real(extent) + " entries");
    }

    TensorBuilder out("", dims, ValueType::Real, 0.0);
    if (r.rank == 0 || extent == 0.0) return std::move(out).build();

    Eigen::Map<const Eigen::VectorXd> weights(r.weights.data(),
                                              static_cast<Eigen::Index>(r.weights.size()));
    Coords coords(dims.size(), 1);
    while (true) {
        double v = cp_value(r.factors, weights, coords);
        if (std::abs(v) > kSparsifyEps) out.set_at(coords, v);
        std::size_t n = dims.size();
        bool done = true;
        while (n-- > 0) {
            if (++coords[n] <= dims[n].size()) {
                done = false;
                break;
            }
            coords[n] = 1;
        }
        if (done) break;
    }
    return std::move(out).build();
}

TypedTensor reconstruct_tucker(const TuckerResult& r) {
    TypedTensor out = r.core;
    for (std::size_t n = 0; n < r.factors.size(); ++n) {
        out = n_mode_product(out, r.factors[n], n + 1);
    }
    return with_dims(out, r.dims);
}

double fit(const TypedTensor& t, const TypedTensor& approx) {
    if (t.order() != approx.order()) {
        throw ShapeMismatchError("fit: order " + std::to_string(t.order()) + " vs " +
                                 std::to_string(approx.order()));
    }
    for (std::size_t n = 1; n <= t.order(); ++n) {
        if (t.dim(n).size() != approx.dim(n).size()) {
            throw ShapeMismatchError("fit: mode " + std::to_string(n) + " size mismatch");
        }
    }
    if (!t.is_numeric() || !approx.is_numeric()) {
        throw NonNumericValueTypeError("fit requires numeric tensors");
    }

    const double dt = value_as_real(t.default_value());
    const double da = value_as_real(approx.default_value());
    double err_sq = 0.0;
    std::size_t seen_both = 0;
    for (const auto& [coords, v] : t.stored()) {
        const double d = value_as_real(v) - value_as_real(approx.at(coords));
        err_sq += d * d;
        if (approx.stored().count(coords)) ++seen_both;
    }
    for (const auto& [coords, v] : approx.stored()) {
        if (t.stored().count(coords)) continue;
        const double d = dt - value_as_real(v);
        err_sq += d * d;
    }
    if (dt != da) {
        const double in_union = static_cast<double>(t.stored_count()) +
                                static_cast<double>(approx.stored_count()) -
                                static_cast<double>(seen_both);
        const double d = dt - da;
        err_sq += d * d * (t.dense_extent() - in_union);
    }

    const double norm_t = frobenius_norm(t);
    if (norm_t == 0.0) return err_sq == 0.0 ? 1.0 : 0.0;
    return 1.0 - std::sqrt(err_sq) / norm_t;
}

}  // namespace tdm

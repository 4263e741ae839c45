// Independent reference implementations used to compute expected values.
// Everything here is deliberately brute-force and kept free of the library's
// own computation paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tdm/tensor.hpp"

namespace oracle {

/// Dense N-d shadow array with 1-based coordinates.
class Dense {
public:
    explicit Dense(std::vector<std::size_t> sizes, double def = 0.0)
        : sizes_(std::move(sizes)) {
        std::size_t total = 1;
        for (std::size_t s : sizes_) total *= s;
        data_.assign(total, def);
    }

    std::size_t offset(const tdm::Coords& c) const {
        std::size_t off = 0, stride = 1;
        for (std::size_t n = 0; n < sizes_.size(); ++n) {
            off += (c[n] - 1) * stride;
            stride *= sizes_[n];
        }
        return off;
    }

    double& at(const tdm::Coords& c) { return data_[offset(c)]; }
    double at(const tdm::Coords& c) const { return data_[offset(c)]; }

    const std::vector<std::size_t>& sizes() const { return sizes_; }

    /// Visit every coordinate tuple (odometer order).
    void for_each(const std::function<void(const tdm::Coords&)>& fn) const {
        if (data_.empty()) return;
        tdm::Coords c(sizes_.size(), 1);
        for (std::size_t n = 0; n < sizes_.size(); ++n) {
            if (sizes_[n] == 0) return;
        }
        while (true) {
            fn(c);
            std::size_t n = sizes_.size();
            bool done = true;
            while (n-- > 0) {
                if (++c[n] <= sizes_[n]) {
                    done = false;
                    break;
                }
                c[n] = 1;
            }
            if (done) return;
        }
    }

    double norm() const {
        double s = 0;
        for (double v : data_) s += v * v;
        return std::sqrt(s);
    }

    /// Sum away one 1-based mode.
    Dense sum_axis(std::size_t mode) const {
        std::vector<std::size_t> out_sizes;
        for (std::size_t n = 0; n < sizes_.size(); ++n) {
            if (n + 1 != mode) out_sizes.push_back(sizes_[n]);
        }
        Dense out(out_sizes);
        for_each([&](const tdm::Coords& c) {
            tdm::Coords r;
            for (std::size_t n = 0; n < c.size(); ++n) {
                if (n + 1 != mode) r.push_back(c[n]);
            }
            out.at(r) += at(c);
        });
        return out;
    }

private:
    std::vector<std::size_t> sizes_;
    std::vector<double> data_;
};

/// Shadow of a sparse tensor.
inline Dense shadow(const tdm::TypedTensor& t) {
    std::vector<std::size_t> sizes;
    for (std::size_t n = 1; n <= t.order(); ++n) sizes.push_back(t.dim(n).size());
    Dense out(sizes, tdm::value_as_real(t.default_value()));
    for (const auto& [c, v] : t.stored()) out.at(c) = tdm::value_as_real(v);
    return out;
}

/// The canonical mode-n unfolding column (1-based), restated from the
/// definition: j = 1 + sum_{k != n} (i_k - 1) * J_k, J_k = prod_{m<k, m!=n} I_m.
inline std::size_t unfold_column(const tdm::Coords& coords, std::size_t mode,
                                 const std::vector<std::size_t>& sizes) {
    std::size_t j = 1;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (k + 1 == mode) continue;
        std::size_t jk = 1;
        for (std::size_t m = 0; m < k; ++m) {
            if (m + 1 != mode) jk *= sizes[m];
        }
        j += (coords[k] - 1) * jk;
    }
    return j;
}

/// Pair-counting adjusted Rand index, O(n^2), independent of the library's
/// contingency-table version.
inline double pair_ari(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const std::size_t n = a.size();
    double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) n11 += 1;
            else if (!sa && !sb) n00 += 1;
            else if (sa) n10 += 1;
            else n01 += 1;
        }
    }
    const double total = n11 + n00 + n10 + n01;
    if (total == 0) return 1.0;
    const double expected = (n11 + n10) * (n11 + n01) / total;
    const double max_index = 0.5 * ((n11 + n10) + (n11 + n01));
    const double denom = max_index - expected;
    if (denom == 0.0) {
        return (n10 + n01) == 0 ? 1.0 : 0.0;
    }
    return (n11 - expected) / denom;
}

/// Best split of a series by the two-sample energy divergence
///   Q = nl*nr/(nl+nr) * (2 E|X-Y| - E|X-X'| - E|Y-Y'|),
/// every candidate evaluated by direct O(n^2) pairwise summation (no
/// incremental structures).
struct SplitOracle {
    double stat = 0.0;
    std::size_t split = 0;
};

inline SplitOracle best_split(const std::vector<double>& values, std::size_t min_segment) {
    SplitOracle best;
    const std::size_t n = values.size();
    for (std::size_t split = min_segment; split + min_segment <= n; ++split) {
        const double nl = static_cast<double>(split);
        const double nr = static_cast<double>(n - split);
        double cross = 0, within_l = 0, within_r = 0;
        for (std::size_t i = 0; i < split; ++i) {
            for (std::size_t j = i + 1; j < split; ++j) {
                within_l += std::abs(values[i] - values[j]);
            }
            for (std::size_t j = split; j < n; ++j) {
                cross += std::abs(values[i] - values[j]);
            }
        }
        for (std::size_t i = split; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                within_r += std::abs(values[i] - values[j]);
            }
        }
        const double a = cross / (nl * nr);
        const double b = nl > 1 ? 2.0 * within_l / (nl * (nl - 1)) : 0.0;
        const double c = nr > 1 ? 2.0 * within_r / (nr * (nr - 1)) : 0.0;
        const double stat = (nl * nr / (nl + nr)) * (2.0 * a - b - c);
        if (stat > best.stat) {
            best.stat = stat;
            best.split = split;
        }
    }
    return best;
}

/// Exhaustive best 2-partition by k-means objective (centroid = mean,
/// cost = sum of squared distances). Feasible up to ~15 points.
inline std::vector<std::size_t> best_two_partition(const std::vector<std::vector<double>>& pts) {
    const std::size_t n = pts.size();
    const std::size_t dim = pts[0].size();
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_labels(n, 1);

    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
        std::vector<double> mean0(dim, 0), mean1(dim, 0);
        std::size_t c0 = 0, c1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                ++c1;
                for (std::size_t d = 0; d < dim; ++d) mean1[d] += pts[i][d];
            } else {
                ++c0;
                for (std::size_t d = 0; d < dim; ++d) mean0[d] += pts[i][d];
            }
        }
        for (std::size_t d = 0; d < dim; ++d) {
            mean0[d] /= static_cast<double>(c0);
            mean1[d] /= static_cast<double>(c1);
        }
        double cost = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& mean = (mask & (std::size_t{1} << i)) ? mean1 : mean0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double x = pts[i][d] - mean[d];
                cost += x * x;
            }
        }
        if (cost < best_cost) {
            best_cost = cost;
            for (std::size_t i = 0; i < n; ++i) {
                best_labels[i] = (mask & (std::size_t{1} << i)) ? 2 : 1;
            }
        }
    }
    return best_labels;
}

/// Reference hash group-by over raw text rows: returns key-tuple -> count
/// and key-tuple -> sum maps in sorted order.
inline std::map<std::vector<std::string>, std::int64_t> group_count(
    const std::vector<std::vector<std::string>>& rows) {
    std::map<std::vector<std::string>, std::int64_t> out;
    for (const auto& r : rows) out[r] += 1;
    return out;
}

}  // namespace oracle

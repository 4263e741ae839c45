#include "tdm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tdm/decomp.hpp"
#include "tdm/error.hpp"
#include "tdm/rng.hpp"
#include "tdm/time.hpp"

namespace tdm {

TimeSeries time_series(const TypedTensor& t, std::size_t time_mode, std::int64_t window,
                       std::span<const DimCondition> conds) {
    if (time_mode < 1 || time_mode > t.order()) {
        throw ModeOutOfRangeError("time mode " + std::to_string(time_mode) + " out of range");
    }
    const Dimension& time_dim = t.dim(time_mode);
    if (time_dim.key_type() != KeyType::Timestamp) {
        throw UnknownDimensionError("dimension '" + time_dim.name() + "' is not a timestamp");
    }
    if (window < 1 || window % time_dim.granularity() != 0) {
        throw WindowNotMultipleError("window " + std::to_string(window) +
                                     " is not a positive multiple of granularity " +
                                     std::to_string(time_dim.granularity()));
    }

    TypedTensor filtered = select(t, conds, ValueCondition::any());
    if (!filtered.is_numeric()) filtered = cast_values(filtered, ValueType::Integer);

    // Sum away everything except the time mode.
    std::size_t mode = time_mode;
    while (filtered.order() > 1) {
        const std::size_t collapse = mode == 1 ? 2 : 1;
        filtered = aggregate(filtered, collapse, Reducer::Sum);
        if (collapse < mode) --mode;
    }

    TimeSeries out;
    out.window = window;

    // Bin span comes from the dimension itself, not just the stored data.
    std::int64_t min_epoch = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_epoch = std::numeric_limits<std::int64_t>::min();
    for (const auto& key : time_dim.keys()) {
        if (is_null(key)) continue;
        const auto epoch = std::get<std::int64_t>(key);
        min_epoch = std::min(min_epoch, epoch);
        max_epoch = std::max(max_epoch, epoch);
    }
    if (min_epoch > max_epoch) return out;  // empty or null-only dimension

    const std::int64_t first = bucket_epoch(min_epoch, window);
    const std::int64_t last = bucket_epoch(max_epoch, window);
    const std::size_t bins = static_cast<std::size_t>((last - first) / window) + 1;
    out.timestamps.resize(bins);
    out.counts.assign(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        out.timestamps[b] = first + static_cast<std::int64_t>(b) * window;
    }
    for (const auto& [coords, v] : filtered.stored()) {
        const Key& key = time_dim.key_of(coords[0]);
        if (is_null(key)) continue;
        const auto epoch = std::get<std::int64_t>(key);
        const auto bin = static_cast<std::size_t>((bucket_epoch(epoch, window) - first) / window);
        out.counts[bin] += value_as_real(v);
    }
    return out;
}

namespace {

/// Sorted multiset with prefix sums; answers sum_x |v - x| in O(log n),
/// insert/erase in O(n). Plenty at time-series scale.
class SortedWindow {
public:
    void insert(double x) {
        sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), x), x);
        rebuild();
    }
    void erase(double x) {
        sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), x));
        rebuild();
    }
    std::size_t size() const { return sorted_.size(); }

    /// sum over stored x of |v - x|.
    double abs_sum(double v) const {
        const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), v);
        const auto below = static_cast<std::size_t>(it - sorted_.begin());
        const double sum_below = below ? prefix_[below - 1] : 0.0;
        const double sum_above = total_ - sum_below;
        const double n_above = static_cast<double>(sorted_.size() - below);
        return v * static_cast<double>(below) - sum_below + (sum_above - v * n_above);
    }

private:
    void rebuild() {
        prefix_.resize(sorted_.size());
        double run = 0.0;
        for (std::size_t i = 0; i < sorted_.size(); ++i) {
            run += sorted_[i];
            prefix_[i] = run;
        }
        total_ = run;
    }

    std::vector<double> sorted_;
    std::vector<double> prefix_;
    double total_ = 0.0;
};

struct SplitStat {
    double stat = 0.0;
    std::size_t split = 0;   // elements left of the split
};

/// Max over eligible splits of the two-sample energy divergence
///   Q = nl*nr/(nl+nr) * (2A - B - C)
/// with A the mean between-segment |x-y| and B, C the mean within-segment
/// distances. Scanned incrementally; the first maximum wins, so the result
/// is deterministic.
SplitStat max_split_stat(std::span<const double> values, std::size_t min_segment) {
    const std::size_t n = values.size();
    SplitStat best;
    if (n < 2 * min_segment) return best;

    SortedWindow left, right;
    for (std::size_t i = 0; i < min_segment; ++i) left.insert(values[i]);
    for (std::size_t i = min_segment; i < n; ++i) right.insert(values[i]);

    // Pairwise distance sums for the initial split.
    double within_left = 0.0, within_right = 0.0, cross = 0.0;
    for (std::size_t i = 0; i < min_segment; ++i) {
        for (std::size_t j = i + 1; j < min_segment; ++j) {
            within_left += std::abs(values[i] - values[j]);
        }
        for (std::size_t j = min_segment; j < n; ++j) {
            cross += std::abs(values[i] - values[j]);
        }
    }
    for (std::size_t i = min_segment; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            within_right += std::abs(values[i] - values[j]);
        }
    }

    for (std::size_t split = min_segment; split + min_segment <= n; ++split) {
        const double nl = static_cast<double>(split);
        const double nr = static_cast<double>(n - split);
        const double a = cross / (nl * nr);
        const double b = nl > 1 ? 2.0 * within_left / (nl * (nl - 1)) : 0.0;
        const double c = nr > 1 ? 2.0 * within_right / (nr * (nr - 1)) : 0.0;
        const double stat = (nl * nr / (nl + nr)) * (2.0 * a - b - c);
        if (stat > best.stat) {
            best.stat = stat;
            best.split = split;
        }
        if (split + min_segment < n) {
            // Move values[split] from the right segment into the left one.
            const double v = values[split];
            right.erase(v);
            const double to_left = left.abs_sum(v);
            const double to_right = right.abs_sum(v);
            within_left += to_left;
            within_right -= to_right;
            cross += to_right - to_left;
            left.insert(v);
        }
    }
    return best;
}

void segment_breakouts(std::span<const double> values, std::size_t offset,
                       std::size_t min_segment, std::size_t n_permutations, double alpha,
                       const Rng& base, std::vector<std::size_t>& out) {
    const SplitStat observed = max_split_stat(values, min_segment);
    if (observed.stat <= 0.0) return;

    // Permutation test with a per-segment deterministic stream.
    Rng rng = base.fork(offset * 0x9e3779b1ULL + values.size());
    std::vector<double> shuffled(values.begin(), values.end());
    std::size_t at_least = 0;
    for (std::size_t p = 0; p < n_permutations; ++p) {
        shuffle(shuffled, rng);
        if (max_split_stat(shuffled, min_segment).stat >= observed.stat) ++at_least;
    }
    const double p_value = static_cast<double>(1 + at_least) /
                           static_cast<double>(n_permutations + 1);
    if (p_value > alpha) return;

    out.push_back(offset + observed.split + 1);  // 1-based first right element
    segment_breakouts(values.subspan(0, observed.split), offset, min_segment, n_permutations,
                      alpha, base, out);
    segment_breakouts(values.subspan(observed.split), offset + observed.split, min_segment,
                      n_permutations, alpha, base, out);
}

}  // namespace

std::vector<std::size_t> detect_breakouts(const TimeSeries& s, std::size_t min_segment,
                                          std::size_t n_permutations, double alpha,
                                          std::uint64_t seed) {
    if (min_segment < 1) min_segment = 1;
    if (s.counts.size() < 2 * min_segment) {
        throw SeriesTooShortError("series of length " + std::to_string(s.counts.size()) +
                                  " cannot host two segments of " + std::to_string(min_segment));
    }
    std::vector<std::size_t> out;
    segment_breakouts(std::span<const double>(s.counts), 0, min_segment, n_permutations, alpha,
                      Rng(seed), out);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i] - b[i];
        d += x * x;
    }
    return d;
}

struct LloydResult {
    std::vector<std::size_t> assign;   // 0-based cluster per point
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    std::vector<double> trace;
};

LloydResult lloyd_once(const std::vector<std::vector<double>>& points, std::size_t k,
                       std::size_t max_iter, Rng rng) {
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();

    // k-means++ seeding.
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.next_below(n)]);
    std::vector<double> dist(n);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& centroid : centroids) {
                best = std::min(best, sq_distance(points[i], centroid));
            }
            dist[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centroids.push_back(points[rng.next_below(n)]);
            continue;
        }
        const double r = rng.next_double() * total;
        double cum = 0.0;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            cum += dist[i];
            if (r < cum) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[chosen]);
    }

    LloydResult result;
    result.assign.assign(n, 0);
    std::vector<std::size_t> counts(k, 0);

    for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iter, 1); ++iter) {
        // Assign: nearest centroid, lowest index on ties.
        bool changed = iter == 0;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_distance(points[i], centroids[c]);
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            if (result.assign[i] != arg) changed = true;
            result.assign[i] = arg;
            inertia += best;
        }
        result.trace.push_back(inertia);
        if (!changed) break;

        // Update means; reseed empty clusters to the farthest point.
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        counts.assign(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[result.assign[i]] += 1;
            for (std::size_t d = 0; d < dim; ++d) sums[result.assign[i]][d] += points[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t d = 0; d < dim; ++d) {
                    centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
                }
                continue;
            }
            double worst = -1.0;
            std::size_t farthest = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = sq_distance(points[i], centroids[result.assign[i]]);
                if (d > worst) {
                    worst = d;
                    farthest = i;
                }
            }
            centroids[c] = points[farthest];
        }
    }

    // Final means over the converged assignment, then the exact inertia.
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    counts.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        counts[result.assign[i]] += 1;
        for (std::size_t d = 0; d < dim; ++d) sums[result.assign[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) {
            for (std::size_t d = 0; d < dim; ++d) {
                centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
            }
        }
    }
    result.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        result.inertia += sq_distance(points[i], centroids[result.assign[i]]);
    }
    result.centroids = std::move(centroids);
    return result;
}

}  // namespace

Clustering kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                  std::size_t max_iter, std::size_t n_restarts, std::uint64_t seed) {
    if (points.empty()) throw EmptyInputError("kmeans over zero points");
    if (k < 1 || k > points.size()) {
        throw KTooLargeError("k = " + std::to_string(k) + " with " +
                             std::to_string(points.size()) + " points");
    }
    const std::size_t dim = points[0].size();
    for (const auto& p : points) {
        if (p.size() != dim) throw ShapeMismatchError("kmeans points differ in length");
    }

    const Rng base(seed);
    LloydResult best;
    bool have_best = false;
    for (std::size_t r = 0; r < std::max<std::size_t>(n_restarts, 1); ++r) {
        LloydResult candidate = lloyd_once(points, k, max_iter, base.fork(r));
        if (!have_best || candidate.inertia < best.inertia) {
            best = std::move(candidate);
            have_best = true;
        }
    }

    Clustering out;
    out.k = k;
    out.assignments.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out.assignments[i] = best.assign[i] + 1;
    out.centroids = std::move(best.centroids);
    out.inertia = best.inertia;
    out.inertia_trace = std::move(best.trace);
    return out;
}

double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw ShapeMismatchError("labelings differ in length");
    const std::size_t n = a.size();
    if (n == 0) return 1.0;

    auto relabel = [](std::span<const std::size_t> v) {
        std::vector<std::size_t> out(v.size());
        std::unordered_map<std::size_t, std::size_t> ids;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto [it, inserted] = ids.emplace(v[i], ids.size());
            out[i] = it->second;
        }
        return std::pair(out, ids.size());
    };
    auto [la, ka] = relabel(a);
    auto [lb, kb] = relabel(b);

    std::vector<std::vector<std::size_t>> table(ka, std::vector<std::size_t>(kb, 0));
    std::vector<std::size_t> ra(ka, 0), rb(kb, 0);
    for (std::size_t i = 0; i < n; ++i) {
        table[la[i]][lb[i]] += 1;
        ra[la[i]] += 1;
        rb[lb[i]] += 1;
    }
    auto choose2 = [](std::size_t m) { return static_cast<double>(m) * (m - 1) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < ka; ++i) {
        for (std::size_t j = 0; j < kb; ++j) sum_ij += choose2(table[i][j]);
    }
    for (std::size_t i = 0; i < ka; ++i) sum_a += choose2(ra[i]);
    for (std::size_t j = 0; j < kb; ++j) sum_b += choose2(rb[j]);
    const double total = choose2(n);
    const double expected = total > 0 ? sum_a * sum_b / total : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) {
        // Both partitions degenerate (all singletons or one block each).
        return la == lb ? 1.0 : 0.0;
    }
    return (sum_ij - expected) / denom;
}

namespace {

std::vector<std::vector<double>> factor_rows(const DenseMatrix& factor) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(factor.rows()));
    for (Eigen::Index i = 0; i < factor.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(factor.cols()));
        for (Eigen::Index c = 0; c < factor.cols(); ++c) {
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = factor(i, c);
        }
    }
    return rows;
}

constexpr std::size_t kPipelineLloydIters = 100;
constexpr std::size_t kPipelineRestarts = 8;
constexpr std::size_t kCpRestarts = 4;

/// ALS lands in local optima; a few deterministic restarts picking the best
/// fit make the embeddings reliable (first restart wins ties).
CpResult cp_als_best(const TypedTensor& t, std::size_t rank, const Rng& base) {
    CpResult best;
    bool have = false;
    for (std::size_t r = 0; r < kCpRestarts; ++r) {
        CpResult candidate = cp_als(t, rank, 500, 1e-8, base.fork(r).next_u64());
        if (!have || candidate.final_fit > best.final_fit) {
            best = std::move(candidate);
            have = true;
        }
    }
    return best;
}

}  // namespace

RankSelection rank_by_cluster_stability(const TypedTensor& t, std::size_t user_mode,
                                        std::size_t k, const std::vector<std::size_t>& rank_range,
                                        std::uint64_t seed, double ari_threshold) {
    if (rank_range.empty()) throw EmptyInputError("empty rank range");
    for (std::size_t i = 1; i < rank_range.size(); ++i) {
        if (rank_range[i] <= rank_range[i - 1]) throw RankOutOfRangeError("rank range must ascend");
    }

    const Rng base(seed);
    auto cluster_at = [&](std::size_t rank) {
        const CpResult cp = cp_als_best(t, rank, base.fork(2 * rank));
        const auto points = factor_rows(cp.factors[user_mode - 1]);
        return kmeans(points, k, kPipelineLloydIters, kPipelineRestarts,
                      base.fork(2 * rank + 1).next_u64());
    };

    Clustering prev = cluster_at(rank_range[0]);
    for (std::size_t i = 0; i + 1 < rank_range.size(); ++i) {
        Clustering next = cluster_at(rank_range[i + 1]);
        if (adjusted_rand_index(prev.assignments, next.assignments) >= ari_threshold) {
            return {rank_range[i], true};
        }
        prev = std::move(next);
    }
    return {rank_range.back(), false};
}

UserClustering bot_pipeline(const TypedTensor& t, std::size_t user_mode, std::size_t rank,
                            std::size_t k, std::uint64_t seed) {
    const Rng base(seed);
    const CpResult cp = cp_als_best(t, rank, base.fork(0));
    const auto points = factor_rows(cp.factors[user_mode - 1]);

    UserClustering out;
    out.rank = rank;
    out.fit = cp.final_fit;
    out.clustering =
        kmeans(points, k, kPipelineLloydIters, kPipelineRestarts, base.fork(1).next_u64());
    out.users = t.dim(user_mode).keys();
    out.user_key_type = t.dim(user_mode).key_type();
    return out;
}

}  // namespace tdm

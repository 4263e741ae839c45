#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tdm/query.hpp"
#include "tdm/tensor.hpp"

namespace tdm {

/// Uniformly spaced counting series: timestamps[i] is the start of bucket i,
/// spacing equals window.
struct TimeSeries {
    std::vector<std::int64_t> timestamps;
    std::vector<double> counts;
    std::int64_t window = 0;
};

/// Select by conds, sum away every non-time mode, then re-bucket the time
/// dimension's counts into window-sized bins covering the dimension's key
/// span (gaps zero-filled). window must be a positive multiple of the time
/// dimension's granularity.
TimeSeries time_series(const TypedTensor& t, std::size_t time_mode, std::int64_t window,
                       std::span<const DimCondition> conds);

/// Change-point detection: recursive binary segmentation maximizing the
/// two-sample energy divergence
///   stat(split) = nl*nr/(nl+nr) * (2 E|X-Y| - E|X-X'| - E|Y-Y'|),
/// each split kept only when its permutation-test p-value is <= alpha.
/// The statistic is location invariant and level-shift sensitive. Returned
/// indices are 1-based positions of the first element right of each accepted
/// split, ascending. Deterministic given seed.
std::vector<std::size_t> detect_breakouts(const TimeSeries& s, std::size_t min_segment = 24,
                                          std::size_t n_permutations = 199, double alpha = 0.05,
                                          std::uint64_t seed = 0);

struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;            // point -> cluster id in [1, k]
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
    std::vector<double> inertia_trace;               // winning restart, per Lloyd step
};

/// Lloyd iterations with k-means++ seeding, best of n_restarts by inertia;
/// an emptied cluster reseeds to the point farthest from its centroid.
/// Deterministic given seed.
Clustering kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                  std::size_t max_iter = 100, std::size_t n_restarts = 8,
                  std::uint64_t seed = 0);

/// Similarity of two labelings of the same points, 1 = identical up to
/// label permutation. Degenerate identical partitions also report 1.
double adjusted_rand_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct RankSelection {
    std::size_t rank = 0;
    bool stabilized = false;
};

/// Sweep ranks ascending; at each rank embed users as rows of the user-mode
/// CP factor and cluster them. Returns the smallest rank whose clustering
/// matches the next rank's (ARI >= threshold); falls back to the largest
/// rank with stabilized = false.
RankSelection rank_by_cluster_stability(const TypedTensor& t, std::size_t user_mode,
                                        std::size_t k, const std::vector<std::size_t>& rank_range,
                                        std::uint64_t seed, double ari_threshold = 1.0);

struct UserClustering {
    std::size_t rank = 0;
    double fit = 0.0;
    Clustering clustering;
    std::vector<Key> users;      // position i labels point i (user index i+1)
    KeyType user_key_type = KeyType::String;
};

/// CP-decompose, embed users as their factor rows, k-means them, and label
/// the clusters with the user dimension's keys.
UserClustering bot_pipeline(const TypedTensor& t, std::size_t user_mode, std::size_t rank,
                            std::size_t k, std::uint64_t seed);

}  // namespace tdm

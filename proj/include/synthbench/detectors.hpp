#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthbench/kde.hpp"
#include "synthbench/matrix.hpp"
#include "synthbench/rng.hpp"
#include "synthbench/scores.hpp"

namespace synthbench {

namespace detector_detail {

// Euclidean distances from row i to all other rows.
inline void distance_row(const Matrix& data, std::size_t i, std::vector<double>& out) {
    out.resize(data.rows());
    for (std::size_t j = 0; j < data.rows(); ++j) {
        out[j] = (j == i) ? 0.0 : std::sqrt(squared_distance(data.row(i), data.row(j)));
    }
}

}  // namespace detector_detail

// Local Outlier Factor per the original definition: the k-distance
// neighborhood includes every point tied at the k-distance, reachability
// distances are floored so duplicate clusters stay finite.
inline ScoreVector lof_scores(const Matrix& data, int min_pts) {
    const std::size_t n = data.rows();
    if (min_pts < 1 || n <= static_cast<std::size_t>(min_pts)) {
        throw std::invalid_argument("lof_scores: need n > min_pts >= 1");
    }
    constexpr double kReachFloor = 1e-12;

    std::vector<double> kdist(n);
    std::vector<std::vector<std::size_t>> neighbors(n);
    std::vector<double> dists;
    std::vector<double> sorted;
    for (std::size_t i = 0; i < n; ++i) {
        detector_detail::distance_row(data, i, dists);
        sorted.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sorted.push_back(dists[j]);
        }
        std::nth_element(sorted.begin(), sorted.begin() + (min_pts - 1), sorted.end());
        kdist[i] = sorted[static_cast<std::size_t>(min_pts - 1)];
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && dists[j] <= kdist[i]) neighbors[i].push_back(j);
        }
    }

    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double reach_sum = 0.0;
        for (std::size_t o : neighbors[i]) {
            const double d = std::sqrt(squared_distance(data.row(i), data.row(o)));
            reach_sum += std::max(kdist[o], d);
        }
        const double mean_reach =
            std::max(reach_sum / static_cast<double>(neighbors[i].size()), kReachFloor);
        lrd[i] = 1.0 / mean_reach;
    }

    ScoreVector sv;
    sv.orientation = Orientation::higher_is_outlier;
    sv.method_id = "lof_" + std::to_string(min_pts);
    sv.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t o : neighbors[i]) s += lrd[o];
        sv.scores[i] = s / (static_cast<double>(neighbors[i].size()) * lrd[i]);
    }
    return sv;
}

// Weighted kNN outlier score: the sum of distances to the k nearest
// neighbors, exact search, ties at the boundary broken by index.
inline ScoreVector wknn_scores(const Matrix& data, int k) {
    const std::size_t n = data.rows();
    if (k < 1 || n <= static_cast<std::size_t>(k)) {
        throw std::invalid_argument("wknn_scores: need n > k >= 1");
    }
    ScoreVector sv;
    sv.orientation = Orientation::higher_is_outlier;
    sv.method_id = "wknn_" + std::to_string(k);
    sv.scores.resize(n);
    std::vector<double> dists;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < n; ++i) {
        detector_detail::distance_row(data, i, dists);
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) order.emplace_back(dists[j], j);
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        double s = 0.0;
        for (int m = 0; m < k; ++m) s += order[static_cast<std::size_t>(m)].first;
        sv.scores[i] = s;
    }
    return sv;
}

namespace detector_detail {

struct IsoNode {
    int attr = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    int size = 0;
};

// Average unsuccessful-search path length in a BST of m nodes, the
// normalization term from the isolation forest.
inline double average_path_length(int m) {
    if (m <= 1) return 0.0;
    constexpr double kEulerGamma = 0.5772156649015329;
    const double h = std::log(static_cast<double>(m - 1)) + kEulerGamma;
    return 2.0 * h - 2.0 * static_cast<double>(m - 1) / static_cast<double>(m);
}

inline int build_iso_tree(std::vector<IsoNode>& nodes, const Matrix& data,
                          std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                          int depth, int height_limit, Rng& rng) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(IsoNode{});
    nodes[static_cast<std::size_t>(node_id)].size = static_cast<int>(hi - lo);
    if (hi - lo <= 1 || depth >= height_limit) return node_id;

    // choose among attributes with spread in this node
    const std::size_t d = data.cols();
    std::vector<std::pair<std::size_t, std::pair<double, double>>> usable;
    for (std::size_t a = 0; a < d; ++a) {
        double mn = data(idx[lo], a), mx = mn;
        for (std::size_t r = lo + 1; r < hi; ++r) {
            mn = std::min(mn, data(idx[r], a));
            mx = std::max(mx, data(idx[r], a));
        }
        if (mx > mn) usable.push_back({a, {mn, mx}});
    }
    if (usable.empty()) return node_id;

    const auto& pick = usable[rng.uniform_index(usable.size())];
    const std::size_t attr = pick.first;
    const double split = rng.uniform(pick.second.first, pick.second.second);

    auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                 idx.begin() + static_cast<std::ptrdiff_t>(hi),
                                 [&](std::size_t r) { return data(r, attr) < split; });
    const std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());
    if (mid == lo || mid == hi) return node_id;

    const int left = build_iso_tree(nodes, data, idx, lo, mid, depth + 1, height_limit, rng);
    const int right = build_iso_tree(nodes, data, idx, mid, hi, depth + 1, height_limit, rng);
    IsoNode& nd = nodes[static_cast<std::size_t>(node_id)];
    nd.attr = static_cast<int>(attr);
    nd.split = split;
    nd.left = left;
    nd.right = right;
    return node_id;
}

inline double iso_path_length(const std::vector<IsoNode>& nodes, std::span<const double> x) {
    int cur = 0;
    double depth = 0.0;
    while (nodes[static_cast<std::size_t>(cur)].attr >= 0) {
        const IsoNode& nd = nodes[static_cast<std::size_t>(cur)];
        cur = (x[static_cast<std::size_t>(nd.attr)] < nd.split) ? nd.left : nd.right;
        depth += 1.0;
    }
    return depth + average_path_length(nodes[static_cast<std::size_t>(cur)].size);
}

}  // namespace detector_detail

// Anomaly score s = 2^(-E[h]/c(psi)); exposed separately so the score mapping
// can be checked at the c(psi) fixed point.
inline double iforest_anomaly_score(double mean_path, int psi) {
    return std::pow(2.0, -mean_path / detector_detail::average_path_length(psi));
}

inline ScoreVector iforest_scores(const Matrix& data, std::uint64_t seed, int psi = 256,
                                  int trees = 100) {
    const std::size_t n = data.rows();
    if (n < 2) throw std::invalid_argument("iforest_scores: need n >= 2");
    const int psi_eff = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(psi), n));
    const int height_limit =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max(psi_eff, 2)))));

    std::vector<double> path_sum(n, 0.0);
    std::vector<std::size_t> pool(n);
    for (int t = 0; t < trees; ++t) {
        Rng rng(stable_hash64(seed, "iforest/" + std::to_string(t)));
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < static_cast<std::size_t>(psi_eff); ++i) {
            const std::size_t j = i + rng.uniform_index(n - i);
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> sample(pool.begin(), pool.begin() + psi_eff);
        std::vector<detector_detail::IsoNode> nodes;
        nodes.reserve(2 * static_cast<std::size_t>(psi_eff));
        detector_detail::build_iso_tree(nodes, data, sample, 0, static_cast<std::size_t>(psi_eff),
                                        0, height_limit, rng);
        for (std::size_t i = 0; i < n; ++i) {
            path_sum[i] += detector_detail::iso_path_length(nodes, data.row(i));
        }
    }

    ScoreVector sv;
    sv.orientation = Orientation::higher_is_outlier;
    sv.method_id = "iforest";
    sv.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sv.scores[i] = iforest_anomaly_score(path_sum[i] / trees, psi_eff);
    }
    return sv;
}

// Leave-one-out product-kernel log density, one bandwidth per attribute by
// the normal-reference rule. Lower scores mean more outlying.
inline ScoreVector kde_scores(const Matrix& data) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n < 2) throw std::invalid_argument("kde_scores: need n >= 2");

    std::vector<double> bw(d);
    double log_bw_norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const std::vector<double> col = data.column(k);
        const double sd = sample_sd(col);
        bw[k] = std::max(normal_reference_bandwidth(sd, n), 1e-6);
        log_bw_norm += std::log(bw[k]);
    }

    ScoreVector sv;
    sv.orientation = Orientation::lower_is_outlier;
    sv.method_id = "kde";
    sv.scores.resize(n);
    std::vector<double> lk(n);
    for (std::size_t i = 0; i < n; ++i) {
        double m = kNegInf;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double e = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double z = (data(i, k) - data(j, k)) / bw[k];
                e += -0.5 * z * z;
            }
            lk[j] = e;
            m = std::max(m, e);
        }
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) s += std::exp(lk[j] - m);
        }
        sv.scores[i] = m + std::log(s) - std::log(static_cast<double>(n - 1)) -
                       0.5 * static_cast<double>(d) * kLogTwoPi - log_bw_norm;
    }
    return sv;
}

// Detector registry keyed by the method ids used in configs and result files.
using DetectorFn = std::function<ScoreVector(const Matrix&, std::uint64_t seed)>;

inline const std::map<std::string, DetectorFn>& detector_registry() {
    static const std::map<std::string, DetectorFn> registry = {
        {"lof_5", [](const Matrix& m, std::uint64_t) { return lof_scores(m, 5); }},
        {"lof_100", [](const Matrix& m, std::uint64_t) { return lof_scores(m, 100); }},
        {"wknn_5", [](const Matrix& m, std::uint64_t) { return wknn_scores(m, 5); }},
        {"wknn_100", [](const Matrix& m, std::uint64_t) { return wknn_scores(m, 100); }},
        {"iforest", [](const Matrix& m, std::uint64_t s) { return iforest_scores(m, s); }},
        {"kde", [](const Matrix& m, std::uint64_t) { return kde_scores(m); }},
    };
    return registry;
}

}  // namespace synthbench

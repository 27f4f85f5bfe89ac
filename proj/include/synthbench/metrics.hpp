#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthbench/scores.hpp"
#include "synthbench/stats.hpp"

namespace synthbench {

struct MetricReport {
    double auc_pr_adjusted = 0.0;
    double auc_pr_raw = 0.0;
    double auc_roc = 0.0;
    double prevalence = 0.0;
};

enum class PrAdjustment { normalized, subtract_only };

namespace detail {

// Scores oriented so that larger means more outlying.
inline std::vector<double> oriented(const ScoreVector& sv) {
    std::vector<double> s = sv.scores;
    if (sv.orientation == Orientation::lower_is_outlier) {
        for (double& x : s) x = -x;
    }
    return s;
}

inline void check_two_classes(std::span<const Label> labels) {
    std::size_t out = 0;
    for (Label l : labels) out += (l == Label::outlier);
    if (out == 0 || out == labels.size()) {
        throw std::invalid_argument("metrics: both classes must be present");
    }
}

}  // namespace detail

// Area under the precision-recall curve with outliers as the positive class.
// Thresholds run over distinct score values (ties enter as one group) and the
// area is accumulated step-wise: each recall increment contributes at the
// precision achieved at that threshold, never linearly interpolated.
inline MetricReport auc_pr_adjusted(const ScoreVector& sv, std::span<const Label> labels,
                                    PrAdjustment adjustment = PrAdjustment::normalized) {
    if (sv.scores.size() != labels.size()) {
        throw std::invalid_argument("auc_pr_adjusted: length mismatch");
    }
    detail::check_two_classes(labels);
    const std::vector<double> s = detail::oriented(sv);
    for (double x : s) {
        if (std::isnan(x)) throw std::invalid_argument("auc_pr_adjusted: NaN score");
    }

    const std::size_t n = s.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

    std::size_t total_pos = 0;
    for (Label l : labels) total_pos += (l == Label::outlier);

    double area = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && s[order[j + 1]] == s[order[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == Label::outlier) ++tp; else ++fp;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }

    MetricReport r;
    r.auc_pr_raw = area;
    r.prevalence = static_cast<double>(total_pos) / static_cast<double>(n);
    r.auc_pr_adjusted = (adjustment == PrAdjustment::normalized)
                            ? (area - r.prevalence) / (1.0 - r.prevalence)
                            : area - r.prevalence;
    return r;
}

// Mann-Whitney AUC with tie correction, via average ranks.
inline double auc_roc(const ScoreVector& sv, std::span<const Label> labels) {
    if (sv.scores.size() != labels.size()) {
        throw std::invalid_argument("auc_roc: length mismatch");
    }
    detail::check_two_classes(labels);
    const std::vector<double> s = detail::oriented(sv);
    const std::vector<double> ranks = average_ranks(s);
    double rank_sum = 0.0;
    std::size_t n_out = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == Label::outlier) {
            rank_sum += ranks[i];
            ++n_out;
        }
    }
    const std::size_t n_reg = labels.size() - n_out;
    const double u = rank_sum - static_cast<double>(n_out) * (static_cast<double>(n_out) + 1.0) / 2.0;
    return u / (static_cast<double>(n_out) * static_cast<double>(n_reg));
}

struct TauResult {
    double tau = 0.0;
    bool defined = false;
};

// Kendall tau-b by direct pair enumeration.
inline TauResult kendall_tau_b(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("kendall_tau_b: need at least 2 values");
    long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ta = (a[i] == a[j]);
            const bool tb = (b[i] == b[j]);
            if (ta && tb) continue;
            if (ta) { ++ties_a; continue; }
            if (tb) { ++ties_b; continue; }
            const bool up_a = a[i] < a[j];
            const bool up_b = b[i] < b[j];
            if (up_a == up_b) ++concordant; else ++discordant;
        }
    }
    TauResult r;
    const double na = static_cast<double>(concordant + discordant + ties_a);
    const double nb = static_cast<double>(concordant + discordant + ties_b);
    if (na == 0.0 || nb == 0.0) return r;  // a side is fully tied
    r.tau = static_cast<double>(concordant - discordant) / std::sqrt(na * nb);
    r.defined = true;
    return r;
}

struct KappaResult {
    double kappa = 0.0;
    bool defined = false;
};

inline KappaResult cohens_kappa(std::span<const Label> pred, std::span<const Label> truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("cohens_kappa: length mismatch");
    if (pred.empty()) throw std::invalid_argument("cohens_kappa: empty input");
    const double n = static_cast<double>(pred.size());
    double agree = 0.0, pred_out = 0.0, truth_out = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        agree += (pred[i] == truth[i]);
        pred_out += (pred[i] == Label::outlier);
        truth_out += (truth[i] == Label::outlier);
    }
    const double po = agree / n;
    const double pe = (pred_out / n) * (truth_out / n) +
                      ((n - pred_out) / n) * ((n - truth_out) / n);
    KappaResult r;
    if (pe == 1.0) {
        // Both sides constant and identical is perfect agreement; otherwise
        // kappa has no chance-corrected meaning.
        if (po == 1.0) {
            r.kappa = 1.0;
            r.defined = true;
        }
        return r;
    }
    r.kappa = (po - pe) / (1.0 - pe);
    r.defined = true;
    return r;
}

}  // namespace synthbench

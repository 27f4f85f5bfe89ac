#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "synthbench/copula.hpp"

namespace synthbench {

// Kendall tau-b in O(n log n) (Knight's algorithm), used during vine
// construction where the quadratic enumeration would dominate.
inline double kendall_tau_fast(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) throw std::invalid_argument("kendall_tau_fast: bad input");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        if (a[i] != a[j]) return a[i] < a[j];
        return b[i] < b[j];
    });

    auto pairs_in_groups = [](const std::vector<double>& v) {
        double total = 0.0;
        std::size_t i = 0;
        while (i < v.size()) {
            std::size_t j = i;
            while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            total += t * (t - 1.0) / 2.0;
            i = j + 1;
        }
        return total;
    };

    double n1 = 0.0, n3 = 0.0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && a[idx[j + 1]] == a[idx[i]]) ++j;
            const double t = static_cast<double>(j - i + 1);
            n1 += t * (t - 1.0) / 2.0;
            std::size_t p = i;
            while (p <= j) {
                std::size_t q = p;
                while (q + 1 <= j && b[idx[q + 1]] == b[idx[p]]) ++q;
                const double s = static_cast<double>(q - p + 1);
                n3 += s * (s - 1.0) / 2.0;
                p = q + 1;
            }
            i = j + 1;
        }
    }

    std::vector<double> bs(n);
    for (std::size_t i = 0; i < n; ++i) bs[i] = b[idx[i]];
    double n2 = 0.0;
    {
        std::vector<double> sb(b.begin(), b.end());
        std::sort(sb.begin(), sb.end());
        n2 = pairs_in_groups(sb);
    }

    // Merge sort counting inversions of b after sorting by (a, b).
    double swaps = 0.0;
    std::vector<double> tmp(n);
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (bs[j] < bs[i]) {
                    swaps += static_cast<double>(mid - i);
                    tmp[k++] = bs[j++];
                } else {
                    tmp[k++] = bs[i++];
                }
            }
            while (i < mid) tmp[k++] = bs[i++];
            while (j < hi) tmp[k++] = bs[j++];
            std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
                      tmp.begin() + static_cast<std::ptrdiff_t>(hi),
                      bs.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }

    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double num = n0 - n1 - n2 + n3 - 2.0 * swaps;
    const double den = std::sqrt((n0 - n1) * (n0 - n2));
    if (den == 0.0) return 0.0;
    return num / den;
}

namespace copula_detail {

template <class F>
double golden_max(F&& f, double lo, double hi, double tol = 1e-6) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

inline double loglik(const PairCopula& pc, std::span<const double> u, std::span<const double> v) {
    double ll = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ll += pc.log_density(u[i], v[i]);
    return ll;
}

}  // namespace copula_detail

struct PairCopulaFit {
    PairCopula copula;
    double loglik = 0.0;
    double bic = 0.0;
};

// Selects family, rotation and parameter for one edge. The parameter starts
// at the Kendall-tau inversion where a closed form exists and is refined by
// golden-section maximum likelihood; the winner has minimal
// BIC = -2 loglik + p ln n (independence scores p = 0).
inline PairCopulaFit select_pair_copula(std::span<const double> u, std::span<const double> v,
                                        std::span<const CopulaFamily> families) {
    const std::size_t n = u.size();
    if (n != v.size() || n < 2) throw std::invalid_argument("select_pair_copula: bad input");
    const double log_n = std::log(static_cast<double>(n));
    const double tau = kendall_tau_fast(u, v);

    PairCopulaFit best;
    best.bic = kPosInf;

    auto consider = [&](const PairCopula& pc) {
        const double ll = copula_detail::loglik(pc, u, v);
        const double bic = -2.0 * ll + (pc.is_independence() ? 0.0 : 1.0) * log_n;
        if (bic < best.bic) best = PairCopulaFit{pc, ll, bic};
    };

    for (CopulaFamily family : families) {
        switch (family) {
            case CopulaFamily::independence:
                consider(PairCopula::independence());
                break;
            case CopulaFamily::gaussian: {
                const double theta = copula_detail::golden_max(
                    [&](double r) {
                        return copula_detail::loglik(
                            PairCopula::make(CopulaFamily::gaussian, 0, r), u, v);
                    },
                    -0.9999, 0.9999);
                consider(PairCopula::make(CopulaFamily::gaussian, 0, theta));
                break;
            }
            case CopulaFamily::frank: {
                const double lo = (tau >= 0.0) ? 1e-3 : -35.0;
                const double hi = (tau >= 0.0) ? 35.0 : -1e-3;
                const double theta = copula_detail::golden_max(
                    [&](double t) {
                        return copula_detail::loglik(PairCopula::make(CopulaFamily::frank, 0, t),
                                                     u, v);
                    },
                    lo, hi);
                consider(PairCopula::make(CopulaFamily::frank, 0, theta));
                break;
            }
            case CopulaFamily::clayton:
            case CopulaFamily::gumbel: {
                for (int rot : {0, 90, 180, 270}) {
                    const double lo = (family == CopulaFamily::clayton) ? 1e-4 : 1.0 + 1e-9;
                    const double hi = (family == CopulaFamily::clayton) ? 28.0 : 17.0;
                    const double theta = copula_detail::golden_max(
                        [&](double t) {
                            return copula_detail::loglik(PairCopula::make(family, rot, t), u, v);
                        },
                        lo, hi);
                    consider(PairCopula::make(family, rot, theta));
                }
                break;
            }
        }
    }
    if (best.bic == kPosInf) throw std::invalid_argument("select_pair_copula: empty family set");
    return best;
}

}  // namespace synthbench

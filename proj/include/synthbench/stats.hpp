#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace synthbench {

inline constexpr double kLogTwoPi = 1.8378770664093454836;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) * 0.3989422804014326779;
}

inline double norm_logpdf(double x) {
    return -0.5 * x * x - 0.5 * kLogTwoPi;
}

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Inverse standard-normal cdf, Wichura's AS241 (PPND16). Accurate to about
// 1e-15 over (0,1); the tails fall back to the outer rational approximations.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("norm_quantile: p must be in (0,1)");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r +
                    4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r +
                  1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r +
                    2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r +
                  6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r +
                1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r +
                 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r +
               5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r +
             1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r +
                 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r +
               1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r +
             1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r +
                 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r +
               1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r +
             6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r +
                 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r +
               1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r +
             1.0);
    }
    return (q < 0.0) ? -x : x;
}

inline double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline double logsumexp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

// Unbiased (n-1) sample standard deviation.
inline double sample_sd(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) throw std::invalid_argument("sample_sd: need at least 2 values");
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

// Average ranks in 1..n, ties share the mean of their rank block.
inline std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace synthbench

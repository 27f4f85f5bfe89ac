#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "synthbench/stats.hpp"

namespace synthbench {

inline double normal_reference_bandwidth(double sd, std::size_t n) {
    return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

//! Univariate Gaussian-kernel density estimate of one attribute.
//!
//! The cdf F(x) = mean_j Phi((x - x_j)/h) is strictly increasing, so the
//! quantile is obtained by safeguarded Newton iteration (bisection bracket
//! on [min - 5h, max + 5h]) down to |F(x) - u| < 1e-10.
class MarginalKde {
public:
    static MarginalKde fit(std::span<const double> column) {
        if (column.size() < 2) {
            throw std::invalid_argument("MarginalKde: need at least 2 observations");
        }
        MarginalKde m;
        m.points_.assign(column.begin(), column.end());
        std::sort(m.points_.begin(), m.points_.end());
        const double sd = sample_sd(column);
        if (sd <= 0.0) throw std::invalid_argument("MarginalKde: zero-variance column");
        m.bandwidth_ = normal_reference_bandwidth(sd, column.size());
        m.lo_ = m.points_.front() - 5.0 * m.bandwidth_;
        m.hi_ = m.points_.back() + 5.0 * m.bandwidth_;
        return m;
    }

    double pdf(double x) const {
        double s = 0.0;
        for (double p : points_) s += norm_pdf((x - p) / bandwidth_);
        return s / (static_cast<double>(points_.size()) * bandwidth_);
    }

    double log_pdf(double x) const {
        double m = kNegInf;
        const double inv_h = 1.0 / bandwidth_;
        for (double p : points_) {
            const double z = (x - p) * inv_h;
            m = std::max(m, -0.5 * z * z);
        }
        if (m == kNegInf) return kNegInf;
        double s = 0.0;
        for (double p : points_) {
            const double z = (x - p) * inv_h;
            s += std::exp(-0.5 * z * z - m);
        }
        return m + std::log(s) - 0.5 * kLogTwoPi -
               std::log(static_cast<double>(points_.size()) * bandwidth_);
    }

    double cdf(double x) const {
        double s = 0.0;
        for (double p : points_) s += norm_cdf((x - p) / bandwidth_);
        return s / static_cast<double>(points_.size());
    }

    double quantile(double u) const {
        if (!(u > 0.0 && u < 1.0)) {
            throw std::invalid_argument("MarginalKde::quantile: u must be in (0,1)");
        }
        double lo = lo_, hi = hi_;
        if (cdf(lo) >= u) return lo;
        if (cdf(hi) <= u) return hi;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double f = cdf(x) - u;
            if (std::abs(f) < 1e-10) return x;
            if (f > 0.0) hi = x; else lo = x;
            const double deriv = pdf(x);
            double next = x - f / deriv;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo < 1e-15 * std::max(1.0, std::abs(x))) return next;
            x = next;
        }
        return x;
    }

    double bandwidth() const { return bandwidth_; }
    const std::vector<double>& support_points() const { return points_; }

private:
    std::vector<double> points_;  // sorted fit observations
    double bandwidth_ = 0.0;
    double lo_ = 0.0, hi_ = 0.0;
};

}  // namespace synthbench

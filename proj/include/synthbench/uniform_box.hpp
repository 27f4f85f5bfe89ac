#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "synthbench/matrix.hpp"
#include "synthbench/rng.hpp"
#include "synthbench/stats.hpp"

namespace synthbench {

// Axis-aligned uniform box. The global-outlier modification widens every
// bound outward by a fraction of the attribute range, so generated points can
// land outside the regular support on each attribute.
struct UniformModel {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dim() const { return lower.size(); }

    double log_volume() const {
        double s = 0.0;
        for (std::size_t k = 0; k < lower.size(); ++k) s += std::log(upper[k] - lower[k]);
        return s;
    }

    bool contains(std::span<const double> x) const {
        for (std::size_t k = 0; k < lower.size(); ++k) {
            if (x[k] < lower[k] || x[k] > upper[k]) return false;
        }
        return true;
    }
};

inline UniformModel uniform_fit(const Matrix& data) {
    if (data.rows() < 2) throw std::invalid_argument("uniform_fit: need at least 2 rows");
    UniformModel m;
    m.lower.resize(data.cols());
    m.upper.resize(data.cols());
    for (std::size_t k = 0; k < data.cols(); ++k) {
        double lo = data(0, k), hi = lo;
        for (std::size_t i = 1; i < data.rows(); ++i) {
            lo = std::min(lo, data(i, k));
            hi = std::max(hi, data(i, k));
        }
        if (!(lo < hi)) throw std::invalid_argument("uniform_fit: constant attribute");
        m.lower[k] = lo;
        m.upper[k] = hi;
    }
    return m;
}

inline Matrix uniform_gen(const UniformModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("uniform_gen: n must be >= 1");
    Matrix out(n, model.dim());
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < model.dim(); ++k) {
            out(i, k) = rng.uniform(model.lower[k], model.upper[k]);
        }
    }
    return out;
}

inline std::vector<double> uniform_logdens(const UniformModel& model, const Matrix& data) {
    if (data.cols() != model.dim()) {
        throw std::invalid_argument("uniform_logdens: dimension mismatch");
    }
    const double inside = -model.log_volume();
    std::vector<double> out(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out[i] = model.contains(data.row(i)) ? inside : kNegInf;
    }
    return out;
}

inline UniformModel uniform_modify_expand(const UniformModel& model, double expansion = 0.10) {
    if (!(expansion > 0.0)) {
        throw std::invalid_argument("uniform_modify_expand: expansion must be > 0");
    }
    UniformModel out = model;
    for (std::size_t k = 0; k < model.dim(); ++k) {
        const double r = model.upper[k] - model.lower[k];
        out.lower[k] = model.lower[k] - expansion * r;
        out.upper[k] = model.upper[k] + expansion * r;
    }
    return out;
}

}  // namespace synthbench

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthbench/stats.hpp"

namespace synthbench {

enum class CopulaFamily { independence, gaussian, clayton, gumbel, frank };

inline std::string to_string(CopulaFamily f) {
    switch (f) {
        case CopulaFamily::independence: return "independence";
        case CopulaFamily::gaussian: return "gaussian";
        case CopulaFamily::clayton: return "clayton";
        case CopulaFamily::gumbel: return "gumbel";
        case CopulaFamily::frank: return "frank";
    }
    return "?";
}

namespace copula_detail {

inline constexpr double kUEps = 1e-10;

inline double clamp_u(double u) { return std::clamp(u, kUEps, 1.0 - kUEps); }

// ---- base-family formulas (rotation 0) -------------------------------------
// h(u, v) below is the conditional cdf P(U <= u | V = v) = dC/dv. All base
// families are exchangeable, so the other conditional swaps arguments.

inline double gaussian_log_density(double u, double v, double rho) {
    const double zu = norm_quantile(u), zv = norm_quantile(v);
    const double r2 = rho * rho;
    return -0.5 * std::log(1.0 - r2) -
           (r2 * (zu * zu + zv * zv) - 2.0 * rho * zu * zv) / (2.0 * (1.0 - r2));
}

inline double gaussian_h(double u, double v, double rho) {
    const double s = std::sqrt(1.0 - rho * rho);
    return norm_cdf((norm_quantile(u) - rho * norm_quantile(v)) / s);
}

inline double gaussian_h_inv(double w, double v, double rho) {
    const double s = std::sqrt(1.0 - rho * rho);
    return norm_cdf(norm_quantile(w) * s + rho * norm_quantile(v));
}

inline double clayton_log_density(double u, double v, double theta) {
    const double lu = std::log(u), lv = std::log(v);
    const double t = std::exp(-theta * lu) + std::exp(-theta * lv) - 1.0;
    return std::log1p(theta) - (theta + 1.0) * (lu + lv) - (2.0 + 1.0 / theta) * std::log(t);
}

inline double clayton_h(double u, double v, double theta) {
    const double t = std::pow(u, -theta) + std::pow(v, -theta) - 1.0;
    return std::pow(v, -theta - 1.0) * std::pow(t, -1.0 - 1.0 / theta);
}

inline double clayton_h_inv(double w, double v, double theta) {
    const double t = std::pow(w * std::pow(v, theta + 1.0), -theta / (theta + 1.0));
    const double base = t + 1.0 - std::pow(v, -theta);
    if (!(base > 0.0) || !std::isfinite(base)) return -1.0;  // caller falls back
    return std::pow(base, -1.0 / theta);
}

inline double gumbel_log_density(double u, double v, double theta) {
    const double x = -std::log(u), y = -std::log(v);
    const double t = std::pow(x, theta) + std::pow(y, theta);
    const double s = std::pow(t, 1.0 / theta);
    return -s + x + y + (theta - 1.0) * (std::log(x) + std::log(y)) +
           (2.0 / theta - 2.0) * std::log(t) + std::log1p((theta - 1.0) / s);
}

inline double gumbel_h(double u, double v, double theta) {
    const double x = -std::log(u), y = -std::log(v);
    const double t = std::pow(x, theta) + std::pow(y, theta);
    const double s = std::pow(t, 1.0 / theta);
    // C(u,v) * t^(1/theta - 1) * y^(theta-1) / v
    return std::exp(-s + (1.0 / theta - 1.0) * std::log(t) + (theta - 1.0) * std::log(y) + y);
}

inline double frank_log_density(double u, double v, double theta) {
    const double emt = std::expm1(-theta);
    const double d = -emt - std::expm1(-theta * u) * std::expm1(-theta * v);
    const double num = theta * (-emt);  // theta*(1-e^-theta) > 0 for both signs
    return std::log(num) - theta * (u + v) - 2.0 * std::log(std::abs(d));
}

inline double frank_h(double u, double v, double theta) {
    const double num = std::exp(-theta * v) * std::expm1(-theta * u);
    const double den = std::expm1(-theta) + std::expm1(-theta * u) * std::expm1(-theta * v);
    return num / den;
}

inline double frank_h_inv(double w, double v, double theta) {
    const double den = std::exp(-theta * v) - w * std::expm1(-theta * v);
    if (den == 0.0 || !std::isfinite(den)) return -1.0;
    const double a = w * std::expm1(-theta) / den;
    if (!(a > -1.0) || !std::isfinite(a)) return -1.0;
    return -std::log1p(a) / theta;
}

// Debye function D1, used for the frank family's tau.
inline double debye1(double x) {
    if (x == 0.0) return 1.0;
    const int n = 200;
    const double h = x / n;
    auto f = [](double t) { return (std::abs(t) < 1e-12) ? 1.0 : t / std::expm1(t); };
    double s = f(0.0) + f(x);
    for (int i = 1; i < n; ++i) s += f(i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    return (s * h / 3.0) / x;
}

inline double frank_tau(double theta) {
    if (theta == 0.0) return 0.0;
    const double a = std::abs(theta);
    const double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
    return theta > 0.0 ? tau : -tau;
}

inline double frank_theta_from_tau(double tau) {
    if (std::abs(tau) < 1e-6) return tau >= 0.0 ? 1e-4 : -1e-4;
    const double target = std::abs(tau);
    double lo = 1e-6, hi = 50.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (frank_tau(mid) < target) lo = mid; else hi = mid;
    }
    const double theta = 0.5 * (lo + hi);
    return tau > 0.0 ? theta : -theta;
}

}  // namespace copula_detail

// A bivariate copula building block: family, rotation and dependence
// parameter. Rotations mirror the copula into the other dependence quadrants
// and are exposed for the asymmetric-tail families (clayton, gumbel).
// h1(u, v) = P(U <= u | V = v) and h2(v, u) = P(V <= v | U = u).
class PairCopula {
public:
    PairCopula() = default;  // independence

    static PairCopula make(CopulaFamily family, int rotation, double theta) {
        PairCopula pc;
        pc.family_ = family;
        pc.rotation_ = rotation;
        pc.theta_ = theta;
        switch (family) {
            case CopulaFamily::independence:
                if (rotation != 0) throw std::invalid_argument("independence has no rotation");
                pc.theta_ = 0.0;
                break;
            case CopulaFamily::gaussian:
                if (rotation != 0) throw std::invalid_argument("gaussian has no rotation");
                if (!(theta > -1.0 && theta < 1.0)) {
                    throw std::invalid_argument("gaussian: rho must be in (-1,1)");
                }
                break;
            case CopulaFamily::clayton:
                if (!(theta > 0.0)) throw std::invalid_argument("clayton: theta must be > 0");
                pc.check_rotation();
                break;
            case CopulaFamily::gumbel:
                if (!(theta >= 1.0)) throw std::invalid_argument("gumbel: theta must be >= 1");
                pc.check_rotation();
                break;
            case CopulaFamily::frank:
                if (rotation != 0) throw std::invalid_argument("frank has no rotation");
                if (theta == 0.0) throw std::invalid_argument("frank: theta must be nonzero");
                break;
        }
        return pc;
    }

    static PairCopula independence() { return PairCopula{}; }

    CopulaFamily family() const { return family_; }
    int rotation() const { return rotation_; }
    double theta() const { return theta_; }
    bool is_independence() const { return family_ == CopulaFamily::independence; }

    double log_density(double u, double v) const {
        u = copula_detail::clamp_u(u);
        v = copula_detail::clamp_u(v);
        if (rotation_ == 90 || rotation_ == 180) u = 1.0 - u;
        if (rotation_ == 270 || rotation_ == 180) v = 1.0 - v;
        return base_log_density(u, v);
    }

    double density(double u, double v) const { return std::exp(log_density(u, v)); }

    double h1(double u, double v) const {
        u = copula_detail::clamp_u(u);
        v = copula_detail::clamp_u(v);
        switch (rotation_) {
            case 0: return clamp01(base_h(u, v));
            case 90: return clamp01(1.0 - base_h(1.0 - u, v));
            case 180: return clamp01(1.0 - base_h(1.0 - u, 1.0 - v));
            default: return clamp01(base_h(u, 1.0 - v));
        }
    }

    double h2(double v, double u) const {
        u = copula_detail::clamp_u(u);
        v = copula_detail::clamp_u(v);
        switch (rotation_) {
            case 0: return clamp01(base_h(v, u));
            case 90: return clamp01(base_h(v, 1.0 - u));
            case 180: return clamp01(1.0 - base_h(1.0 - v, 1.0 - u));
            default: return clamp01(1.0 - base_h(1.0 - v, u));
        }
    }

    double h1_inv(double w, double v) const {
        w = copula_detail::clamp_u(w);
        v = copula_detail::clamp_u(v);
        switch (rotation_) {
            case 0: return clamp01(base_h_inv(w, v));
            case 90: return clamp01(1.0 - base_h_inv(1.0 - w, v));
            case 180: return clamp01(1.0 - base_h_inv(1.0 - w, 1.0 - v));
            default: return clamp01(base_h_inv(w, 1.0 - v));
        }
    }

    double h2_inv(double w, double u) const {
        w = copula_detail::clamp_u(w);
        u = copula_detail::clamp_u(u);
        switch (rotation_) {
            case 0: return clamp01(base_h_inv(w, u));
            case 90: return clamp01(base_h_inv(w, 1.0 - u));
            case 180: return clamp01(1.0 - base_h_inv(1.0 - w, 1.0 - u));
            default: return clamp01(1.0 - base_h_inv(1.0 - w, u));
        }
    }

    // Population Kendall tau implied by the parameters.
    double tau() const {
        double t = 0.0;
        switch (family_) {
            case CopulaFamily::independence: return 0.0;
            case CopulaFamily::gaussian: return 2.0 * std::asin(theta_) / M_PI;
            case CopulaFamily::clayton: t = theta_ / (theta_ + 2.0); break;
            case CopulaFamily::gumbel: t = 1.0 - 1.0 / theta_; break;
            case CopulaFamily::frank: return copula_detail::frank_tau(theta_);
        }
        return (rotation_ == 90 || rotation_ == 270) ? -t : t;
    }

    std::string id() const {
        if (family_ == CopulaFamily::independence) return "independence";
        std::string s = to_string(family_);
        if (rotation_ != 0) s += std::to_string(rotation_);
        return s;
    }

private:
    CopulaFamily family_ = CopulaFamily::independence;
    int rotation_ = 0;
    double theta_ = 0.0;

    void check_rotation() const {
        if (rotation_ != 0 && rotation_ != 90 && rotation_ != 180 && rotation_ != 270) {
            throw std::invalid_argument("rotation must be one of 0, 90, 180, 270");
        }
    }

    static double clamp01(double x) {
        return std::clamp(x, copula_detail::kUEps, 1.0 - copula_detail::kUEps);
    }

    double base_log_density(double u, double v) const {
        switch (family_) {
            case CopulaFamily::independence: return 0.0;
            case CopulaFamily::gaussian: return copula_detail::gaussian_log_density(u, v, theta_);
            case CopulaFamily::clayton: return copula_detail::clayton_log_density(u, v, theta_);
            case CopulaFamily::gumbel: return copula_detail::gumbel_log_density(u, v, theta_);
            case CopulaFamily::frank: return copula_detail::frank_log_density(u, v, theta_);
        }
        return 0.0;
    }

    double base_h(double u, double v) const {
        switch (family_) {
            case CopulaFamily::independence: return u;
            case CopulaFamily::gaussian: return copula_detail::gaussian_h(u, v, theta_);
            case CopulaFamily::clayton: return copula_detail::clayton_h(u, v, theta_);
            case CopulaFamily::gumbel: return copula_detail::gumbel_h(u, v, theta_);
            case CopulaFamily::frank: return copula_detail::frank_h(u, v, theta_);
        }
        return u;
    }

    double base_h_inv(double w, double v) const {
        double x = -1.0;
        switch (family_) {
            case CopulaFamily::independence: return w;
            case CopulaFamily::gaussian: return copula_detail::gaussian_h_inv(w, v, theta_);
            case CopulaFamily::clayton: x = copula_detail::clayton_h_inv(w, v, theta_); break;
            case CopulaFamily::gumbel: break;  // no closed form
            case CopulaFamily::frank: x = copula_detail::frank_h_inv(w, v, theta_); break;
        }
        if (x > 0.0 && x < 1.0 && std::isfinite(x)) return x;
        return numeric_h_inv(w, v);
    }

    // Safeguarded Newton on the monotone map u -> h(u|v); the derivative is
    // the copula density.
    double numeric_h_inv(double w, double v) const {
        double lo = copula_detail::kUEps, hi = 1.0 - copula_detail::kUEps;
        double x = std::clamp(w, lo, hi);
        for (int it = 0; it < 100; ++it) {
            const double f = base_h(x, v) - w;
            if (std::abs(f) < 1e-12) return x;
            if (f > 0.0) hi = x; else lo = x;
            const double deriv = std::exp(base_log_density(x, v));
            double next = (deriv > 0.0) ? x - f / deriv : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (hi - lo < 1e-16) return next;
            x = next;
        }
        return x;
    }
};

}  // namespace synthbench

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "synthbench/matrix.hpp"
#include "synthbench/rng.hpp"
#include "synthbench/stats.hpp"

namespace synthbench {

// Covariance configurations, all diagonal:
//   spherical_equal      one shared variance for every component
//   spherical_varying    one variance per component
//   diagonal_varying     full diagonal per component
//   diagonal_equal_shape per-component volume, shared normalized diagonal shape
enum class CovConfig {
    spherical_equal,
    spherical_varying,
    diagonal_varying,
    diagonal_equal_shape,
};

inline std::string to_string(CovConfig c) {
    switch (c) {
        case CovConfig::spherical_equal: return "spherical-equal";
        case CovConfig::spherical_varying: return "spherical-varying";
        case CovConfig::diagonal_varying: return "diagonal-varying";
        case CovConfig::diagonal_equal_shape: return "diagonal-equal-shape";
    }
    return "?";
}

struct GmmComponent {
    std::vector<double> mean;
    std::vector<double> var;  // diagonal of the covariance matrix
};

struct GmmFitStats {
    double loglik = 0.0;
    double bic = 0.0;
    int iterations = 0;
    int restarts = 0;
};

struct GmmModel {
    std::vector<double> weights;
    std::vector<GmmComponent> components;
    CovConfig config = CovConfig::diagonal_equal_shape;
    GmmFitStats fit_stats;

    std::size_t g() const { return components.size(); }
    std::size_t dim() const { return components.empty() ? 0 : components.front().mean.size(); }
};

// Log-likelihood path of one EM run, for convergence diagnostics.
struct EmTrace {
    int g = 0;
    CovConfig config = CovConfig::diagonal_equal_shape;
    int restart = 0;
    std::vector<double> loglik_path;
    bool degenerate = false;
};

namespace gmm_detail {

inline constexpr double kVarFloor = 1e-6;
inline constexpr double kHardVarFloor = 1e-9;
inline constexpr double kRelTol = 1e-8;
inline constexpr int kMaxIter = 500;
inline constexpr int kRestarts = 3;
inline constexpr int kShapeInnerIter = 20;
inline constexpr int kMaxConsecutiveFloorHits = 50;

inline double component_logpdf(std::span<const double> x, const GmmComponent& c) {
    double ll = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - c.mean[k];
        ll += -0.5 * (kLogTwoPi + std::log(c.var[k]) + d * d / c.var[k]);
    }
    return ll;
}

// k-means++ seeding followed by hard assignment to the nearest center.
inline std::vector<std::size_t> kmeanspp_assign(const Matrix& data, std::size_t g, Rng& rng) {
    const std::size_t n = data.rows();
    std::vector<std::size_t> centers;
    centers.push_back(rng.uniform_index(n));
    std::vector<double> d2(n, kPosInf);
    while (centers.size() < g) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_distance(data.row(i), data.row(centers.back())));
            total += d2[i];
        }
        std::size_t next;
        if (total <= 0.0) {
            next = rng.uniform_index(n);
        } else {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            next = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    next = i;
                    break;
                }
            }
        }
        centers.push_back(next);
    }
    std::vector<std::size_t> assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = kPosInf;
        for (std::size_t j = 0; j < g; ++j) {
            const double d = squared_distance(data.row(i), data.row(centers[j]));
            if (d < best) {
                best = d;
                assign[i] = j;
            }
        }
    }
    return assign;
}

struct MStepResult {
    bool floor_hit = false;
};

// Maximizes the expected complete-data log-likelihood under the configuration
// constraint. Variances are clipped at the floor, which keeps the update the
// constrained maximizer and so preserves the EM ascent property.
inline MStepResult m_step(const Matrix& data, const std::vector<double>& resp_flat,
                          CovConfig config, GmmModel& model) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    const std::size_t g = model.g();
    MStepResult res;

    std::vector<double> nj(g, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < g; ++j) nj[j] += resp_flat[i * g + j];
    }
    for (std::size_t j = 0; j < g; ++j) {
        model.weights[j] = nj[j] / static_cast<double>(n);
        auto& mu = model.components[j].mean;
        std::fill(mu.begin(), mu.end(), 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < g; ++j) {
            const double r = resp_flat[i * g + j];
            if (r == 0.0) continue;
            auto& mu = model.components[j].mean;
            for (std::size_t k = 0; k < d; ++k) mu[k] += r * row[k];
        }
    }
    for (std::size_t j = 0; j < g; ++j) {
        const double denom = std::max(nj[j], 1e-300);
        for (double& m : model.components[j].mean) m /= denom;
    }

    // Weighted diagonal scatter W[j][k] = sum_i r_ij (x_ik - mu_jk)^2.
    std::vector<double> scatter(g * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < g; ++j) {
            const double r = resp_flat[i * g + j];
            if (r == 0.0) continue;
            const auto& mu = model.components[j].mean;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = row[k] - mu[k];
                scatter[j * d + k] += r * diff * diff;
            }
        }
    }

    const auto clip = [&res](double v) {
        if (v < kVarFloor) {
            res.floor_hit = true;
            return kVarFloor;
        }
        return v;
    };

    switch (config) {
        case CovConfig::spherical_equal: {
            double total = std::accumulate(scatter.begin(), scatter.end(), 0.0);
            const double v = clip(total / (static_cast<double>(n) * static_cast<double>(d)));
            for (auto& c : model.components) std::fill(c.var.begin(), c.var.end(), v);
            break;
        }
        case CovConfig::spherical_varying: {
            for (std::size_t j = 0; j < g; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) s += scatter[j * d + k];
                const double v = clip(s / (std::max(nj[j], 1e-300) * static_cast<double>(d)));
                std::fill(model.components[j].var.begin(), model.components[j].var.end(), v);
            }
            break;
        }
        case CovConfig::diagonal_varying: {
            for (std::size_t j = 0; j < g; ++j) {
                for (std::size_t k = 0; k < d; ++k) {
                    model.components[j].var[k] =
                        clip(scatter[j * d + k] / std::max(nj[j], 1e-300));
                }
            }
            break;
        }
        case CovConfig::diagonal_equal_shape: {
            // Sigma_j = lambda_j * diag(a), prod_k a_k = 1. Alternate the
            // closed-form volume and shape updates, warm-started from the
            // current parameters so every pass is an ascent step.
            std::vector<double> shape(d, 1.0);
            {
                // Recover the current shape from component 0 as warm start.
                const auto& v0 = model.components[0].var;
                double log_gm = 0.0;
                for (std::size_t k = 0; k < d; ++k) log_gm += std::log(v0[k]);
                log_gm /= static_cast<double>(d);
                for (std::size_t k = 0; k < d; ++k) shape[k] = v0[k] / std::exp(log_gm);
            }
            std::vector<double> volume(g, 1.0);
            for (int inner = 0; inner < kShapeInnerIter; ++inner) {
                double change = 0.0;
                for (std::size_t j = 0; j < g; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < d; ++k) s += scatter[j * d + k] / shape[k];
                    const double lam =
                        clip(s / (std::max(nj[j], 1e-300) * static_cast<double>(d)));
                    change = std::max(change, std::abs(lam - volume[j]) /
                                                   std::max(volume[j], 1e-300));
                    volume[j] = lam;
                }
                std::vector<double> b(d, 0.0);
                double log_gm = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    for (std::size_t j = 0; j < g; ++j) b[k] += scatter[j * d + k] / volume[j];
                    b[k] = std::max(b[k], 1e-300);
                    log_gm += std::log(b[k]);
                }
                log_gm /= static_cast<double>(d);
                for (std::size_t k = 0; k < d; ++k) {
                    const double a = b[k] / std::exp(log_gm);
                    change = std::max(change, std::abs(a - shape[k]) / std::max(shape[k], 1e-300));
                    shape[k] = a;
                }
                if (change < 1e-6) break;
            }
            for (std::size_t j = 0; j < g; ++j) {
                for (std::size_t k = 0; k < d; ++k) {
                    model.components[j].var[k] = std::max(volume[j] * shape[k], kHardVarFloor);
                }
            }
            break;
        }
    }
    return res;
}

inline std::size_t free_cov_params(CovConfig config, std::size_t g, std::size_t d) {
    switch (config) {
        case CovConfig::spherical_equal: return 1;
        case CovConfig::spherical_varying: return g;
        case CovConfig::diagonal_varying: return g * d;
        case CovConfig::diagonal_equal_shape: return g + (d - 1);
    }
    return 0;
}

struct EmRun {
    GmmModel model;
    bool degenerate = false;
    std::vector<double> loglik_path;
};

inline EmRun run_em(const Matrix& data, std::size_t g, CovConfig config, Rng& rng) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    EmRun run;
    run.model.config = config;
    run.model.weights.assign(g, 0.0);
    run.model.components.assign(g, GmmComponent{std::vector<double>(d, 0.0),
                                                std::vector<double>(d, 1.0)});

    const std::vector<std::size_t> assign = kmeanspp_assign(data, g, rng);
    std::vector<double> resp(n * g, 0.0);
    for (std::size_t i = 0; i < n; ++i) resp[i * g + assign[i]] = 1.0;
    m_step(data, resp, config, run.model);

    const double min_weight = 2.0 / static_cast<double>(n);
    double prev_ll = kNegInf;
    int consecutive_floor = 0;
    for (int iter = 1; iter <= kMaxIter; ++iter) {
        double ll = 0.0;
        std::vector<double> lw(g);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = data.row(i);
            for (std::size_t j = 0; j < g; ++j) {
                lw[j] = std::log(run.model.weights[j]) +
                        component_logpdf(row, run.model.components[j]);
            }
            const double norm = logsumexp(lw);
            ll += norm;
            for (std::size_t j = 0; j < g; ++j) resp[i * g + j] = std::exp(lw[j] - norm);
        }
        if (!std::isfinite(ll)) {
            run.degenerate = true;
            return run;
        }
        run.loglik_path.push_back(ll);
        run.model.fit_stats.iterations = iter;
        run.model.fit_stats.loglik = ll;
        if (std::abs(ll - prev_ll) < kRelTol * std::max(1.0, std::abs(ll))) break;
        prev_ll = ll;

        const MStepResult ms = m_step(data, resp, config, run.model);
        consecutive_floor = ms.floor_hit ? consecutive_floor + 1 : 0;
        for (double w : run.model.weights) {
            if (w < min_weight) run.degenerate = true;
        }
        if (consecutive_floor >= kMaxConsecutiveFloorHits) run.degenerate = true;
        if (run.degenerate) return run;
    }
    return run;
}

}  // namespace gmm_detail

// Fits a Gaussian mixture by EM over every (component count, configuration)
// candidate and returns the one with minimal BIC = -2 loglik + p ln n. Each
// candidate starts from k-means++ hard assignments with 3 restarts.
// Degenerate candidates (a component weight below 2/n, or the variance floor
// binding persistently) are discarded.
inline GmmModel gmm_fit(const Matrix& data, const std::vector<int>& g_range,
                        const std::vector<CovConfig>& configs, std::uint64_t seed,
                        std::vector<EmTrace>* traces = nullptr) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n <= d) throw std::invalid_argument("gmm_fit: need n > d");
    if (g_range.empty() || configs.empty()) {
        throw std::invalid_argument("gmm_fit: empty candidate set");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(data(i, j))) throw std::invalid_argument("gmm_fit: non-finite data");
        }
    }

    std::optional<GmmModel> best;
    for (CovConfig config : configs) {
        for (int g : g_range) {
            if (g < 1) throw std::invalid_argument("gmm_fit: G must be >= 1");
            std::optional<gmm_detail::EmRun> best_run;
            for (int restart = 0; restart < gmm_detail::kRestarts; ++restart) {
                Rng rng(stable_hash64(seed, "gmm/" + std::to_string(g) + "/" +
                                                to_string(config) + "/" +
                                                std::to_string(restart)));
                gmm_detail::EmRun run =
                    gmm_detail::run_em(data, static_cast<std::size_t>(g), config, rng);
                if (traces) {
                    traces->push_back(EmTrace{g, config, restart, run.loglik_path,
                                              run.degenerate || run.loglik_path.empty()});
                }
                if (run.degenerate || run.loglik_path.empty()) continue;
                run.model.fit_stats.restarts = restart;
                if (!best_run || run.model.fit_stats.loglik > best_run->model.fit_stats.loglik) {
                    best_run = std::move(run);
                }
            }
            if (!best_run) continue;
            GmmModel& m = best_run->model;
            const std::size_t p = static_cast<std::size_t>(g) - 1 +
                                  static_cast<std::size_t>(g) * d +
                                  gmm_detail::free_cov_params(config, static_cast<std::size_t>(g), d);
            m.fit_stats.bic = -2.0 * m.fit_stats.loglik +
                              static_cast<double>(p) * std::log(static_cast<double>(n));
            if (!best || m.fit_stats.bic < best->fit_stats.bic) best = std::move(m);
        }
    }
    if (!best) throw std::runtime_error("gmm_fit: all candidates degenerate");
    return *best;
}

// Draws n rows; optionally reports the component index of each row.
inline Matrix gmm_gen(const GmmModel& model, std::size_t n, std::uint64_t seed,
                      std::vector<int>* components_out = nullptr) {
    if (n < 1) throw std::invalid_argument("gmm_gen: n must be >= 1");
    const std::size_t d = model.dim();
    Matrix out(n, d);
    Rng rng(seed);
    if (components_out) components_out->assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        double acc = 0.0;
        std::size_t j = model.g() - 1;
        for (std::size_t c = 0; c < model.g(); ++c) {
            acc += model.weights[c];
            if (u < acc) {
                j = c;
                break;
            }
        }
        if (components_out) (*components_out)[i] = static_cast<int>(j);
        const auto& comp = model.components[j];
        for (std::size_t k = 0; k < d; ++k) {
            out(i, k) = comp.mean[k] + std::sqrt(comp.var[k]) * rng.normal();
        }
    }
    return out;
}

inline std::vector<double> gmm_logdens(const GmmModel& model, const Matrix& data) {
    if (data.cols() != model.dim()) throw std::invalid_argument("gmm_logdens: dimension mismatch");
    std::vector<double> out(data.rows());
    std::vector<double> lw(model.g());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < model.g(); ++j) {
            lw[j] = (model.weights[j] > 0.0)
                        ? std::log(model.weights[j]) +
                              gmm_detail::component_logpdf(data.row(i), model.components[j])
                        : kNegInf;
        }
        out[i] = logsumexp(lw);
    }
    return out;
}

// Local-outlier modification: every covariance is scaled by alpha > 1, so
// samples stay attached to their component but spread beyond it.
inline GmmModel gmm_modify_local(const GmmModel& model, double alpha) {
    if (!(alpha > 1.0)) {
        throw std::invalid_argument("gmm_modify_local: alpha must exceed 1");
    }
    GmmModel out = model;
    for (auto& c : out.components) {
        for (double& v : c.var) v *= alpha;
    }
    return out;
}

}  // namespace synthbench

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "synthbench/gmm.hpp"
#include "synthbench/matrix.hpp"
#include "synthbench/uniform_box.hpp"
#include "synthbench/vine.hpp"

namespace synthbench {

enum class ModelSpec { gauss, vine, unif };

inline std::string to_string(ModelSpec s) {
    switch (s) {
        case ModelSpec::gauss: return "gauss";
        case ModelSpec::vine: return "vine";
        case ModelSpec::unif: return "unif";
    }
    return "?";
}

// Knobs of the generation process. Every default that the source material
// leaves open is fixed here so runs are reproducible from the config alone.
struct GenParams {
    double alpha = 5.0;        // covariance scale of the local-outlier modification
    double expansion = 0.10;   // box widening of the global-outlier modification
    double jitter_sd = 1e-3;   // fitting noise on [0,1]-scaled data
    std::vector<int> g_range = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<CovConfig> configs = {CovConfig::diagonal_equal_shape};
    std::vector<CopulaFamily> families = {CopulaFamily::independence, CopulaFamily::gaussian,
                                          CopulaFamily::clayton, CopulaFamily::gumbel,
                                          CopulaFamily::frank};
};

// Uniform fit/gen/logdens interface over the three model families.
class GenerativeModel {
public:
    explicit GenerativeModel(GmmModel m) : impl_(std::move(m)) {}
    explicit GenerativeModel(VineModel m) : impl_(std::move(m)) {}
    explicit GenerativeModel(UniformModel m) : impl_(std::move(m)) {}

    Matrix gen(std::size_t n, std::uint64_t seed) const {
        if (const auto* g = std::get_if<GmmModel>(&impl_)) return gmm_gen(*g, n, seed);
        if (const auto* v = std::get_if<VineModel>(&impl_)) return v->gen(n, seed);
        return uniform_gen(std::get<UniformModel>(impl_), n, seed);
    }

    std::vector<double> logdens(const Matrix& data) const {
        if (const auto* g = std::get_if<GmmModel>(&impl_)) return gmm_logdens(*g, data);
        if (const auto* v = std::get_if<VineModel>(&impl_)) return v->logdens(data);
        return uniform_logdens(std::get<UniformModel>(impl_), data);
    }

    std::string family() const {
        if (std::holds_alternative<GmmModel>(impl_)) return "gauss";
        if (std::holds_alternative<VineModel>(impl_)) return "vine";
        return "unif";
    }

    const GmmModel* as_gmm() const { return std::get_if<GmmModel>(&impl_); }
    const VineModel* as_vine() const { return std::get_if<VineModel>(&impl_); }
    const UniformModel* as_uniform() const { return std::get_if<UniformModel>(&impl_); }

private:
    std::variant<GmmModel, VineModel, UniformModel> impl_;
};

inline GenerativeModel fit_model(ModelSpec spec, const Matrix& data, const GenParams& params,
                                 std::uint64_t seed) {
    switch (spec) {
        case ModelSpec::gauss:
            return GenerativeModel(gmm_fit(data, params.g_range, params.configs, seed));
        case ModelSpec::vine:
            return GenerativeModel(vine_fit(data, params.families, seed));
        case ModelSpec::unif:
            return GenerativeModel(uniform_fit(data));
    }
    throw std::logic_error("fit_model: unknown spec");
}

// A regular-instance model family paired with an outlier modification. The
// five supported ids name the regular family before the underscore and the
// outlier family after it.
struct GeneratorPair {
    std::string id;
    ModelSpec regular = ModelSpec::gauss;
    enum class OutlierKind { local_scale, independence, uniform_expand } outlier =
        OutlierKind::local_scale;
};

inline GeneratorPair parse_pair(const std::string& id) {
    GeneratorPair p;
    p.id = id;
    if (id == "gauss_gauss") {
        p.regular = ModelSpec::gauss;
        p.outlier = GeneratorPair::OutlierKind::local_scale;
    } else if (id == "vine_vine") {
        p.regular = ModelSpec::vine;
        p.outlier = GeneratorPair::OutlierKind::independence;
    } else if (id == "gauss_unif") {
        p.regular = ModelSpec::gauss;
        p.outlier = GeneratorPair::OutlierKind::uniform_expand;
    } else if (id == "vine_unif") {
        p.regular = ModelSpec::vine;
        p.outlier = GeneratorPair::OutlierKind::uniform_expand;
    } else if (id == "unif_unif") {
        p.regular = ModelSpec::unif;
        p.outlier = GeneratorPair::OutlierKind::uniform_expand;
    } else {
        throw std::invalid_argument("unknown generator pair: " + id);
    }
    return p;
}

// Derives the outlier model from the fitted regular model. The uniform
// modification re-reads the attribute bounds from the fitting data, which is
// what the box would have been fitted to regardless of the regular family.
inline GenerativeModel derive_outlier_model(const GeneratorPair& pair,
                                            const GenerativeModel& regular_model,
                                            const Matrix& fit_data, const GenParams& params) {
    switch (pair.outlier) {
        case GeneratorPair::OutlierKind::local_scale: {
            const GmmModel* g = regular_model.as_gmm();
            if (!g) throw std::invalid_argument("local-scale modification needs a gauss fit");
            return GenerativeModel(gmm_modify_local(*g, params.alpha));
        }
        case GeneratorPair::OutlierKind::independence: {
            const VineModel* v = regular_model.as_vine();
            if (!v) throw std::invalid_argument("independence modification needs a vine fit");
            return GenerativeModel(v->modify_independence());
        }
        case GeneratorPair::OutlierKind::uniform_expand: {
            const UniformModel* u = regular_model.as_uniform();
            const UniformModel box = u ? *u : uniform_fit(fit_data);
            return GenerativeModel(uniform_modify_expand(box, params.expansion));
        }
    }
    throw std::logic_error("derive_outlier_model: unknown kind");
}

}  // namespace synthbench

#pragma once

#include <json.hpp>

#include "synthbench/generator.hpp"

namespace synthbench {

inline nlohmann::json to_json(const GmmModel& m) {
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t i = 0; i < m.g(); ++i) {
        comps.push_back({{"weight", m.weights[i]},
                         {"mean", m.components[i].mean},
                         {"var_diagonal", m.components[i].var}});
    }
    return {{"family", "gauss"},
            {"config", to_string(m.config)},
            {"components", comps},
            {"loglik", m.fit_stats.loglik},
            {"bic", m.fit_stats.bic},
            {"em_iterations", m.fit_stats.iterations}};
}

inline nlohmann::json to_json(const UniformModel& m) {
    return {{"family", "unif"}, {"lower", m.lower}, {"upper", m.upper}};
}

inline nlohmann::json to_json(const VineModel& m) {
    nlohmann::json marginals = nlohmann::json::array();
    for (const MarginalKde& k : m.marginals()) {
        marginals.push_back({{"bandwidth", k.bandwidth()}, {"support_points", k.support_points()}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const VineEdge& e : m.edges()) {
        std::vector<int> cond;
        for (int j = 0; j < m.dim(); ++j) {
            if (e.cond_mask & (1u << static_cast<unsigned>(j))) cond.push_back(j);
        }
        edges.push_back({{"a", e.a},
                         {"b", e.b},
                         {"conditioning", cond},
                         {"tree", e.level},
                         {"family", to_string(e.copula.family())},
                         {"rotation", e.copula.rotation()},
                         {"theta", e.copula.theta()}});
    }
    return {{"family", "vine"}, {"marginals", marginals}, {"edges", edges}};
}

inline nlohmann::json to_json(const GenerativeModel& m) {
    if (const GmmModel* g = m.as_gmm()) return to_json(*g);
    if (const VineModel* v = m.as_vine()) return to_json(*v);
    return to_json(*m.as_uniform());
}

inline nlohmann::json to_json(const Provenance& p) {
    return {{"source", p.source}, {"transforms", p.transforms}};
}

}  // namespace synthbench

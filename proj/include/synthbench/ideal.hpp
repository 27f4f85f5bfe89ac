#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "synthbench/scores.hpp"
#include "synthbench/stats.hpp"

namespace synthbench {

// The three ideal scorings computed from the true generative log-densities:
//   RD  log dens_Reg                                   (lower is outlier)
//   OD  log(xi dens_Out + (1-xi) dens_Reg)             (lower is outlier)
//   C   log(xi dens_Out) - log((1-xi) dens_Reg)        (higher is outlier)
// Everything stays in log space; -inf marks a point outside a model's
// support, and C becomes +inf where only the outlier model covers the point.
struct IdealScores {
    std::vector<double> logdens_reg;
    std::vector<double> logdens_out;
    double xi = 0.0;
    ScoreVector rd, od, c;
};

inline IdealScores ideal_scores(std::vector<double> logdens_reg, std::vector<double> logdens_out,
                                double xi) {
    if (logdens_reg.size() != logdens_out.size()) {
        throw std::invalid_argument("ideal_scores: length mismatch");
    }
    if (!(xi > 0.0 && xi < 1.0)) {
        throw std::invalid_argument("ideal_scores: xi must be in (0,1)");
    }
    const std::size_t n = logdens_reg.size();
    const double log_xi = std::log(xi);
    const double log_om = std::log1p(-xi);

    IdealScores s;
    s.xi = xi;
    s.rd = ScoreVector{logdens_reg, Orientation::lower_is_outlier, "ideal_rd"};
    s.od = ScoreVector{std::vector<double>(n), Orientation::lower_is_outlier, "ideal_od"};
    s.c = ScoreVector{std::vector<double>(n), Orientation::higher_is_outlier, "ideal_c"};
    for (std::size_t i = 0; i < n; ++i) {
        const double lr = logdens_reg[i];
        const double lo = logdens_out[i];
        s.od.scores[i] = logaddexp(log_xi + lo, log_om + lr);
        if (lr == kNegInf && lo > kNegInf) {
            s.c.scores[i] = kPosInf;  // certain outlier: no regular support
        } else if (lo == kNegInf) {
            s.c.scores[i] = kNegInf;
        } else {
            s.c.scores[i] = log_xi + lo - log_om - lr;
        }
    }
    s.logdens_reg = std::move(logdens_reg);
    s.logdens_out = std::move(logdens_out);
    return s;
}

}  // namespace synthbench

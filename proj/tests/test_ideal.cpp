#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "synthbench/ideal.hpp"
#include "synthbench/metrics.hpp"
#include "synthbench/rng.hpp"
#include "synthbench/uniform_box.hpp"

using namespace synthbench;

TEST_CASE("ideal scores reproduce the linear-space arithmetic") {
    // dens_reg = 1.0, dens_out = 2.0, xi = 0.05
    const IdealScores s = ideal_scores({std::log(1.0)}, {std::log(2.0)}, 0.05);
    REQUIRE(s.rd.scores[0] == Catch::Approx(std::log(1.0)).margin(1e-12));
    REQUIRE(s.od.scores[0] == Catch::Approx(std::log(1.05)).margin(1e-12));
    REQUIRE(s.c.scores[0] == Catch::Approx(std::log(0.05 * 2.0 / 0.95)).margin(1e-12));
    REQUIRE(s.rd.orientation == Orientation::lower_is_outlier);
    REQUIRE(s.od.orientation == Orientation::lower_is_outlier);
    REQUIRE(s.c.orientation == Orientation::higher_is_outlier);
}

TEST_CASE("equal densities collapse C to a constant") {
    Rng rng(1);
    std::vector<double> ld(50);
    for (double& v : ld) v = rng.normal();
    const IdealScores s = ideal_scores(ld, ld, 0.05);
    const double expect = std::log(0.05 / 0.95);
    for (double c : s.c.scores) REQUIRE(c == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("support sentinels propagate") {
    const IdealScores s =
        ideal_scores({kNegInf, 0.0, 0.0}, {0.0, kNegInf, kNegInf}, 0.05);
    REQUIRE(s.c.scores[0] == kPosInf);
    REQUIRE(s.c.scores[1] == kNegInf);
    REQUIRE(std::isfinite(s.od.scores[1]));
    REQUIRE(s.od.scores[0] == Catch::Approx(std::log(0.05)).margin(1e-12));

    // the +inf instance ranks as the most outlying under C
    std::vector<Label> labels{Label::outlier, Label::regular, Label::regular};
    REQUIRE(auc_pr_adjusted(s.c, labels).auc_pr_raw == 1.0);
}

TEST_CASE("C crosses zero exactly at the mixture break-even") {
    const double xi = 0.2;
    // xi * dens_out = (1-xi) * dens_reg  <=>  C_log = 0
    const double ld_reg = std::log(0.5);
    const double even = std::log((1.0 - xi) * 0.5 / xi);
    const IdealScores s = ideal_scores({ld_reg, ld_reg, ld_reg},
                                       {even - 1e-9, even, even + 1e-9}, xi);
    REQUIRE(s.c.scores[0] < 0.0);
    REQUIRE(s.c.scores[1] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(s.c.scores[2] > 0.0);
}

TEST_CASE("RD and OD rank identically where dens_out is constant") {
    Rng rng(2);
    const std::size_t n = 40;
    std::vector<double> ld_reg(n), ld_out(n, std::log(0.7));
    for (double& v : ld_reg) v = rng.normal();
    const IdealScores s = ideal_scores(ld_reg, ld_out, 0.1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const bool rd_less = s.rd.scores[i] < s.rd.scores[j];
            const bool od_less = s.od.scores[i] < s.od.scores[j];
            REQUIRE(rd_less == od_less);
        }
    }
}

TEST_CASE("nested uniform boxes give identical adjusted AUC PR for all three scorings") {
    UniformModel regular{{0.0, 0.0}, {1.0, 1.0}};
    const UniformModel expanded = uniform_modify_expand(regular, 0.10);
    const Matrix reg_samples = uniform_gen(regular, 190, 3);
    const Matrix out_samples = uniform_gen(expanded, 10, 4);
    const Matrix all = Matrix::vstack(reg_samples, out_samples);
    std::vector<Label> labels(200, Label::regular);
    for (std::size_t i = 190; i < 200; ++i) labels[i] = Label::outlier;

    const IdealScores s =
        ideal_scores(uniform_logdens(regular, all), uniform_logdens(expanded, all), 0.05);
    const double a_c = auc_pr_adjusted(s.c, labels).auc_pr_adjusted;
    const double a_rd = auc_pr_adjusted(s.rd, labels).auc_pr_adjusted;
    const double a_od = auc_pr_adjusted(s.od, labels).auc_pr_adjusted;
    REQUIRE(std::abs(a_c - a_rd) <= 1e-9);
    REQUIRE(std::abs(a_c - a_od) <= 1e-9);
}

TEST_CASE("ideal score preconditions") {
    REQUIRE_THROWS_AS(ideal_scores({0.0}, {0.0, 1.0}, 0.05), std::invalid_argument);
    REQUIRE_THROWS_AS(ideal_scores({0.0}, {0.0}, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ideal_scores({0.0}, {0.0}, 1.0), std::invalid_argument);
}

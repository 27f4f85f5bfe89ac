#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "synthbench/copula_select.hpp"
#include "synthbench/detectors.hpp"
#include "synthbench/rng.hpp"

using namespace synthbench;

namespace {

Matrix column(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

Matrix shuffled(const Matrix& m, const std::vector<std::size_t>& perm) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(perm[i], j);
    }
    return out;
}

}  // namespace

TEST_CASE("lof hand-computed values on the 1d fixture") {
    const ScoreVector sv = lof_scores(column({0.0, 1.0, 2.0, 10.0}), 2);
    REQUIRE(sv.orientation == Orientation::higher_is_outlier);
    REQUIRE(sv.scores[0] == Catch::Approx(7.0 / 8.0).margin(1e-9));
    REQUIRE(sv.scores[1] == Catch::Approx(4.0 / 3.0).margin(1e-9));
    REQUIRE(sv.scores[2] == Catch::Approx(7.0 / 8.0).margin(1e-9));
    REQUIRE(sv.scores[3] == Catch::Approx(119.0 / 24.0).margin(1e-9));
    REQUIRE(sv.scores[3] > 2.0);
    REQUIRE(*std::max_element(sv.scores.begin(), sv.scores.end()) == sv.scores[3]);
}

TEST_CASE("lof is about 1 in homogeneous density") {
    Matrix grid(400, 2);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            grid(static_cast<std::size_t>(i * 20 + j), 0) = i;
            grid(static_cast<std::size_t>(i * 20 + j), 1) = j;
        }
    }
    const ScoreVector sv = lof_scores(grid, 4);
    for (int i = 5; i < 15; ++i) {
        for (int j = 5; j < 15; ++j) {
            const double s = sv.scores[static_cast<std::size_t>(i * 20 + j)];
            REQUIRE(s > 0.8);
            REQUIRE(s < 1.2);
        }
    }
}

TEST_CASE("lof on an equidistant simplex is exactly 1") {
    Matrix tri(3, 2);
    tri(0, 0) = 0.0; tri(0, 1) = 0.0;
    tri(1, 0) = 1.0; tri(1, 1) = 0.0;
    tri(2, 0) = 0.5; tri(2, 1) = std::sqrt(3.0) / 2.0;
    const ScoreVector sv = lof_scores(tri, 2);
    for (double s : sv.scores) REQUIRE(s == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("lof stays finite on duplicate clusters") {
    const ScoreVector sv = lof_scores(column({1.0, 1.0, 1.0, 1.0, 5.0}), 3);
    for (double s : sv.scores) REQUIRE(std::isfinite(s));
    REQUIRE_THROWS_AS(lof_scores(column({1.0, 2.0}), 2), std::invalid_argument);
}

TEST_CASE("wknn hand values and dominance") {
    const ScoreVector sv = wknn_scores(column({0.0, 1.0, 3.0}), 2);
    REQUIRE(sv.scores[0] == Catch::Approx(4.0).margin(1e-12));
    REQUIRE(sv.scores[1] == Catch::Approx(3.0).margin(1e-12));
    REQUIRE(sv.scores[2] == Catch::Approx(5.0).margin(1e-12));

    const ScoreVector zeros = wknn_scores(column({2.0, 2.0, 2.0}), 2);
    for (double s : zeros.scores) REQUIRE(s == 0.0);

    Rng rng(6);
    Matrix data(40, 2);
    for (std::size_t i = 0; i < 39; ++i) {
        data(i, 0) = rng.uniform01();
        data(i, 1) = rng.uniform01();
    }
    data(39, 0) = 100.0;
    data(39, 1) = 100.0;
    const ScoreVector iso = wknn_scores(data, 5);
    REQUIRE(*std::max_element(iso.scores.begin(), iso.scores.end()) == iso.scores[39]);
}

TEST_CASE("iforest score formula fixed point and anomaly separation") {
    for (int psi : {16, 64, 256}) {
        const double c = detector_detail::average_path_length(psi);
        REQUIRE(iforest_anomaly_score(c, psi) == 0.5);
    }

    Rng rng(15);
    Matrix data(500, 2);
    for (std::size_t i = 0; i < 499; ++i) {
        data(i, 0) = 0.02 * rng.normal();
        data(i, 1) = 0.02 * rng.normal();
    }
    data(499, 0) = 0.2;  // 10 sigma away
    data(499, 1) = 0.2;
    const ScoreVector sv = iforest_scores(data, 11);
    REQUIRE(*std::max_element(sv.scores.begin(), sv.scores.end()) == sv.scores[499]);
    REQUIRE(sv.scores[499] > 0.6);

    const ScoreVector again = iforest_scores(data, 11);
    REQUIRE(sv.scores == again.scores);
}

TEST_CASE("kde detector symmetry, dominance and density agreement") {
    const ScoreVector two = kde_scores(column({0.0, 1.0}));
    REQUIRE(two.orientation == Orientation::lower_is_outlier);
    REQUIRE(two.scores[0] == Catch::Approx(two.scores[1]).margin(1e-12));

    Rng rng(25);
    Matrix data(60, 1);
    for (std::size_t i = 0; i < 59; ++i) data(i, 0) = rng.uniform01() * 0.2;
    data(59, 0) = 5.0;
    const ScoreVector iso = kde_scores(data);
    REQUIRE(*std::min_element(iso.scores.begin(), iso.scores.end()) == iso.scores[59]);

    // rank agreement with the true normal log density
    Matrix normal(10000, 1);
    std::vector<double> truth(10000);
    for (std::size_t i = 0; i < normal.rows(); ++i) {
        normal(i, 0) = rng.normal();
        truth[i] = -0.5 * normal(i, 0) * normal(i, 0);
    }
    const ScoreVector sv = kde_scores(normal);
    REQUIRE(kendall_tau_fast(sv.scores, truth) > 0.8);
}

TEST_CASE("detectors are permutation-equivariant with fixed seeds") {
    Rng rng(35);
    const std::size_t n = 120;
    Matrix data(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        data(i, 0) = rng.uniform01();
        data(i, 1) = rng.uniform01();
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    const Matrix permuted = shuffled(data, perm);

    for (const char* id : {"lof_5", "wknn_5", "kde"}) {
        const ScoreVector a = detector_registry().at(id)(data, 1);
        const ScoreVector b = detector_registry().at(id)(permuted, 1);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(b.scores[i] == Catch::Approx(a.scores[perm[i]]).margin(1e-12));
        }
    }

    // iforest trees depend on row order through the subsample, but the top
    // outlier must be stable under shuffling
    Matrix with_outlier = data;
    with_outlier(0, 0) = 10.0;
    with_outlier(0, 1) = 10.0;
    const ScoreVector i1 = iforest_scores(with_outlier, 2);
    const Matrix shuf = shuffled(with_outlier, perm);
    const ScoreVector i2 = iforest_scores(shuf, 2);
    const std::size_t top1 = static_cast<std::size_t>(
        std::max_element(i1.scores.begin(), i1.scores.end()) - i1.scores.begin());
    const std::size_t top2 = static_cast<std::size_t>(
        std::max_element(i2.scores.begin(), i2.scores.end()) - i2.scores.begin());
    REQUIRE(top1 == 0);
    REQUIRE(perm[top2] == 0);
}

TEST_CASE("lof and wknn are translation invariant") {
    Rng rng(45);
    const std::size_t n = 80;
    Matrix data(n, 2), moved(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            data(i, j) = rng.uniform01();
            moved(i, j) = data(i, j) + 13.75;
        }
    }
    const ScoreVector l1 = lof_scores(data, 5), l2 = lof_scores(moved, 5);
    const ScoreVector w1 = wknn_scores(data, 5), w2 = wknn_scores(moved, 5);
    for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(std::abs(l1.scores[i] - l2.scores[i]) <= 1e-9);
        REQUIRE(std::abs(w1.scores[i] - w2.scores[i]) <= 1e-9);
    }
}

TEST_CASE("registry covers the configured method ids and never emits non-finite scores") {
    Rng rng(55);
    Matrix data(150, 3);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) data(i, j) = rng.uniform01();
    }
    for (const char* id : {"lof_5", "lof_100", "wknn_5", "wknn_100", "iforest", "kde"}) {
        const ScoreVector sv = detector_registry().at(id)(data, 9);
        REQUIRE(sv.method_id == id);
        REQUIRE(sv.scores.size() == data.rows());
        for (double s : sv.scores) REQUIRE(std::isfinite(s));
    }
}

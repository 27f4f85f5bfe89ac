#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "synthbench/dataset.hpp"
#include "synthbench/matrix.hpp"
#include "synthbench/rng.hpp"

namespace synthbench {

struct TreeNode {
    int attr = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1, right = -1;
    int count_regular = 0, count_outlier = 0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    Label predict(std::span<const double> x) const {
        int cur = 0;
        while (nodes[static_cast<std::size_t>(cur)].attr >= 0) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(cur)];
            cur = (x[static_cast<std::size_t>(nd.attr)] <= nd.threshold) ? nd.left : nd.right;
        }
        const TreeNode& leaf = nodes[static_cast<std::size_t>(cur)];
        return leaf.count_outlier > leaf.count_regular ? Label::outlier : Label::regular;
    }
};

struct Forest {
    std::vector<DecisionTree> trees;
    int mtry = 1;
    std::uint64_t seed = 0;
    double oob_error = 0.0;
};

namespace forest_detail {

inline double gini(double n_reg, double n_out) {
    const double n = n_reg + n_out;
    if (n == 0.0) return 0.0;
    const double p = n_out / n;
    return 2.0 * p * (1.0 - p) * n;
}

inline int grow(std::vector<TreeNode>& nodes, const Matrix& x, const std::vector<Label>& y,
                std::vector<std::size_t>& rows, std::size_t lo, std::size_t hi, int mtry,
                Rng& rng) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    int n_reg = 0, n_out = 0;
    for (std::size_t r = lo; r < hi; ++r) {
        (y[rows[r]] == Label::outlier ? n_out : n_reg) += 1;
    }
    nodes[static_cast<std::size_t>(node_id)].count_regular = n_reg;
    nodes[static_cast<std::size_t>(node_id)].count_outlier = n_out;
    if (n_reg == 0 || n_out == 0 || hi - lo <= 1) return node_id;

    // sample mtry attributes without replacement
    const std::size_t d = x.cols();
    std::vector<std::size_t> attrs(d);
    std::iota(attrs.begin(), attrs.end(), std::size_t{0});
    for (int i = 0; i < mtry && static_cast<std::size_t>(i) < d; ++i) {
        const std::size_t j = static_cast<std::size_t>(i) +
                              rng.uniform_index(d - static_cast<std::size_t>(i));
        std::swap(attrs[static_cast<std::size_t>(i)], attrs[j]);
    }

    int best_attr = -1;
    double best_threshold = 0.0;
    double best_impurity = gini(n_reg, n_out);
    std::vector<std::pair<double, Label>> vals;
    for (int a = 0; a < mtry && static_cast<std::size_t>(a) < d; ++a) {
        const std::size_t attr = attrs[static_cast<std::size_t>(a)];
        vals.clear();
        for (std::size_t r = lo; r < hi; ++r) {
            vals.emplace_back(x(rows[r], attr), y[rows[r]]);
        }
        std::sort(vals.begin(), vals.end(),
                  [](const auto& p, const auto& q) { return p.first < q.first; });
        double left_reg = 0.0, left_out = 0.0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            (vals[i].second == Label::outlier ? left_out : left_reg) += 1.0;
            if (vals[i].first == vals[i + 1].first) continue;
            const double impurity = gini(left_reg, left_out) +
                                    gini(n_reg - left_reg, n_out - left_out);
            if (impurity < best_impurity - 1e-12) {
                best_impurity = impurity;
                best_attr = static_cast<int>(attr);
                best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
            }
        }
    }
    if (best_attr < 0) return node_id;

    auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(lo),
                                 rows.begin() + static_cast<std::ptrdiff_t>(hi),
                                 [&](std::size_t r) {
                                     return x(r, static_cast<std::size_t>(best_attr)) <=
                                            best_threshold;
                                 });
    const std::size_t mid = static_cast<std::size_t>(mid_it - rows.begin());
    if (mid == lo || mid == hi) return node_id;

    const int left = grow(nodes, x, y, rows, lo, mid, mtry, rng);
    const int right = grow(nodes, x, y, rows, mid, hi, mtry, rng);
    TreeNode& nd = nodes[static_cast<std::size_t>(node_id)];
    nd.attr = best_attr;
    nd.threshold = best_threshold;
    nd.left = left;
    nd.right = right;
    return node_id;
}

}  // namespace forest_detail

// Bagged Gini trees grown to purity, ceil(sqrt(d)) features per split. Fixed
// hyperparameters, no tuning: the realness protocol compares training-data
// variants, so the classifier is held constant.
inline Forest rf_train(const LabeledDataset& train, int ntrees, std::uint64_t seed) {
    const std::size_t n = train.n();
    if (train.count(Label::outlier) == 0 || train.count(Label::regular) == 0) {
        throw std::invalid_argument("rf_train: need both classes in the training set");
    }
    Forest f;
    f.seed = seed;
    f.mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(train.dim()))));
    f.trees.resize(static_cast<std::size_t>(ntrees));

    std::vector<int> oob_reg(n, 0), oob_out(n, 0);
    for (int t = 0; t < ntrees; ++t) {
        Rng rng(stable_hash64(seed, "tree/" + std::to_string(t)));
        std::vector<std::size_t> rows(n);
        std::vector<bool> in_bag(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = rng.uniform_index(n);
            in_bag[rows[i]] = true;
        }
        auto& tree = f.trees[static_cast<std::size_t>(t)];
        forest_detail::grow(tree.nodes, train.instances, train.labels, rows, 0, n, f.mtry, rng);
        for (std::size_t i = 0; i < n; ++i) {
            if (in_bag[i]) continue;
            (tree.predict(train.instances.row(i)) == Label::outlier ? oob_out : oob_reg)[i] += 1;
        }
    }

    std::size_t voted = 0, wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (oob_reg[i] + oob_out[i] == 0) continue;
        ++voted;
        const Label pred = oob_out[i] > oob_reg[i] ? Label::outlier : Label::regular;
        wrong += (pred != train.labels[i]);
    }
    f.oob_error = voted ? static_cast<double>(wrong) / static_cast<double>(voted) : 0.0;
    return f;
}

// Majority vote across trees; an exact tie predicts regular, the majority
// prior.
inline std::vector<Label> rf_predict(const Forest& forest, const Matrix& test) {
    std::vector<Label> out(test.rows());
    for (std::size_t i = 0; i < test.rows(); ++i) {
        int votes_out = 0;
        for (const DecisionTree& t : forest.trees) {
            votes_out += (t.predict(test.row(i)) == Label::outlier);
        }
        out[i] = (2 * votes_out > static_cast<int>(forest.trees.size())) ? Label::outlier
                                                                         : Label::regular;
    }
    return out;
}

}  // namespace synthbench

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "synthbench/copula.hpp"
#include "synthbench/copula_select.hpp"
#include "synthbench/kde.hpp"
#include "synthbench/matrix.hpp"
#include "synthbench/rng.hpp"

namespace synthbench {

// One pair copula of a regular vine: conditioned pair (a,b) given the
// conditioning set. Variable sets are kept as bit masks (d <= 30).
struct VineEdge {
    int a = 0, b = 0;
    std::uint32_t cond_mask = 0;
    int level = 1;  // tree number, |cond| + 1
    PairCopula copula;

    std::uint32_t full_mask() const {
        return cond_mask | (1u << static_cast<unsigned>(a)) | (1u << static_cast<unsigned>(b));
    }
};

//! Marginal-plus-copula generative model: KDE marginals coupled by a regular
//! vine of bivariate copulas. Sampling runs the inverse Rosenblatt transform
//! along an elimination ordering of the vine; rosenblatt() is the forward
//! transform and inverts gen() exactly (up to the marginal quantile
//! tolerance), which the tests rely on.
class VineModel {
public:
    VineModel() = default;

    VineModel(std::vector<MarginalKde> marginals, std::vector<VineEdge> edges)
        : marginals_(std::move(marginals)), edges_(std::move(edges)) {
        dim_ = static_cast<int>(marginals_.size());
        if (edges_.size() != static_cast<std::size_t>(dim_) * (dim_ - 1) / 2) {
            throw std::invalid_argument("VineModel: expected d(d-1)/2 edges");
        }
        std::stable_sort(edges_.begin(), edges_.end(),
                         [](const VineEdge& x, const VineEdge& y) { return x.level < y.level; });
        build_structures();
    }

    int dim() const { return dim_; }
    const std::vector<VineEdge>& edges() const { return edges_; }
    const std::vector<MarginalKde>& marginals() const { return marginals_; }

    // Dependency-outlier modification: the marginals stay untouched, every
    // pair copula becomes independence.
    VineModel modify_independence() const {
        std::vector<VineEdge> edges = edges_;
        for (VineEdge& e : edges) e.copula = PairCopula::independence();
        return VineModel(marginals_, std::move(edges));
    }

    Matrix gen(std::size_t n, std::uint64_t seed) const {
        if (n < 1) throw std::invalid_argument("VineModel::gen: n must be >= 1");
        Matrix out(n, static_cast<std::size_t>(dim_));
        Rng rng(seed);
        std::vector<double> w(static_cast<std::size_t>(dim_));
        std::vector<double> u(static_cast<std::size_t>(dim_));
        CondCache cache;
        for (std::size_t i = 0; i < n; ++i) {
            for (double& x : w) x = rng.uniform01();
            sample_uniforms(w, u, cache);
            for (int j = 0; j < dim_; ++j) {
                out(i, static_cast<std::size_t>(j)) =
                    marginals_[static_cast<std::size_t>(j)].quantile(u[static_cast<std::size_t>(j)]);
            }
        }
        return out;
    }

    std::vector<double> logdens(const Matrix& data) const {
        if (data.cols() != static_cast<std::size_t>(dim_)) {
            throw std::invalid_argument("VineModel::logdens: dimension mismatch");
        }
        std::vector<double> out(data.rows());
        std::vector<double> u(static_cast<std::size_t>(dim_));
        CondCache cache;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            double ll = 0.0;
            for (int j = 0; j < dim_; ++j) {
                const double x = data(i, static_cast<std::size_t>(j));
                ll += marginals_[static_cast<std::size_t>(j)].log_pdf(x);
                u[static_cast<std::size_t>(j)] =
                    marginals_[static_cast<std::size_t>(j)].cdf(x);
            }
            cache.reset(u);
            for (const VineEdge& e : edges_) {
                const double su = cache.eval(*this, e.a, e.cond_mask);
                const double sv = cache.eval(*this, e.b, e.cond_mask);
                ll += e.copula.log_density(su, sv);
            }
            out[i] = ll;
        }
        return out;
    }

    // Forward Rosenblatt transform; returns the uniform coordinates that
    // gen() would have consumed to produce each row.
    Matrix rosenblatt(const Matrix& data) const {
        if (data.cols() != static_cast<std::size_t>(dim_)) {
            throw std::invalid_argument("VineModel::rosenblatt: dimension mismatch");
        }
        Matrix out(data.rows(), static_cast<std::size_t>(dim_));
        std::vector<double> u(static_cast<std::size_t>(dim_));
        CondCache cache;
        for (std::size_t i = 0; i < data.rows(); ++i) {
            for (int j = 0; j < dim_; ++j) {
                u[static_cast<std::size_t>(j)] = marginals_[static_cast<std::size_t>(j)].cdf(
                    data(i, static_cast<std::size_t>(j)));
            }
            cache.reset(u);
            for (int k = dim_ - 1; k >= 0; --k) {
                const int v = order_[static_cast<std::size_t>(k)];
                double t = u[static_cast<std::size_t>(v)];
                for (int ei : columns_[static_cast<std::size_t>(k)]) {
                    const VineEdge& e = edges_[static_cast<std::size_t>(ei)];
                    const int partner = (e.a == v) ? e.b : e.a;
                    const double s = cache.eval(*this, partner, e.cond_mask);
                    t = (e.a == v) ? e.copula.h1(t, s) : e.copula.h2(t, s);
                }
                out(i, static_cast<std::size_t>(k)) = t;
            }
        }
        return out;
    }

private:
    int dim_ = 0;
    std::vector<MarginalKde> marginals_;
    std::vector<VineEdge> edges_;

    // Sampling structures derived from the tree layout: an elimination order
    // of the variables and, per eliminated variable, its column of edges
    // (one per tree level, nested conditioning sets).
    std::vector<int> order_;
    std::vector<std::vector<int>> columns_;
    std::unordered_map<std::uint64_t, int> edge_by_var_set_;

    static std::uint64_t key(int var, std::uint32_t full_mask) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(var)) << 32) | full_mask;
    }

    // Memoized conditional cdf values F(u_var | u_cond) for one instance.
    struct CondCache {
        const std::vector<double>* u = nullptr;
        std::unordered_map<std::uint64_t, double> memo;

        void reset(const std::vector<double>& uu) {
            u = &uu;
            memo.clear();
        }

        double eval(const VineModel& m, int var, std::uint32_t cond_mask) {
            if (cond_mask == 0) return (*u)[static_cast<std::size_t>(var)];
            const std::uint64_t k = key(var, cond_mask);
            auto it = memo.find(k);
            if (it != memo.end()) return it->second;
            const auto found = m.edge_by_var_set_.find(
                key(var, cond_mask | (1u << static_cast<unsigned>(var))));
            if (found == m.edge_by_var_set_.end()) {
                throw std::logic_error("VineModel: missing edge for conditional");
            }
            const VineEdge& e = m.edges_[static_cast<std::size_t>(found->second)];
            const int partner = (e.a == var) ? e.b : e.a;
            const std::uint32_t sub = cond_mask & ~(1u << static_cast<unsigned>(partner));
            const double sv = eval(m, var, sub);
            const double sp = eval(m, partner, sub);
            const double r = (e.a == var) ? e.copula.h1(sv, sp) : e.copula.h2(sv, sp);
            memo.emplace(k, r);
            return r;
        }
    };

    void sample_uniforms(const std::vector<double>& w, std::vector<double>& u,
                         CondCache& cache) const {
        cache.reset(u);
        for (int k = dim_ - 1; k >= 0; --k) {
            const int v = order_[static_cast<std::size_t>(k)];
            double t = w[static_cast<std::size_t>(k)];
            const auto& col = columns_[static_cast<std::size_t>(k)];
            for (auto it = col.rbegin(); it != col.rend(); ++it) {
                const VineEdge& e = edges_[static_cast<std::size_t>(*it)];
                const int partner = (e.a == v) ? e.b : e.a;
                const double s = cache.eval(*this, partner, e.cond_mask);
                t = (e.a == v) ? e.copula.h1_inv(t, s) : e.copula.h2_inv(t, s);
            }
            u[static_cast<std::size_t>(v)] = t;
        }
    }

    void build_structures() {
        edge_by_var_set_.clear();
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const VineEdge& e = edges_[i];
            const std::uint32_t full = e.full_mask();
            if (!edge_by_var_set_.emplace(key(e.a, full), static_cast<int>(i)).second ||
                !edge_by_var_set_.emplace(key(e.b, full), static_cast<int>(i)).second) {
                throw std::invalid_argument("VineModel: duplicate edge variable set");
            }
        }

        order_.assign(static_cast<std::size_t>(dim_), -1);
        columns_.assign(static_cast<std::size_t>(dim_), {});
        std::vector<bool> removed(edges_.size(), false);
        std::uint32_t remaining_vars = (dim_ == 32) ? ~0u : ((1u << dim_) - 1u);

        for (int k = 0; k < dim_ - 1; ++k) {
            int top = -1;
            for (std::size_t i = 0; i < edges_.size(); ++i) {
                if (!removed[i] && (top < 0 || edges_[i].level > edges_[static_cast<std::size_t>(top)].level)) {
                    top = static_cast<int>(i);
                }
            }
            const VineEdge& te = edges_[static_cast<std::size_t>(top)];
            const int v = std::min(te.a, te.b);
            std::vector<int> column;
            for (std::size_t i = 0; i < edges_.size(); ++i) {
                if (!removed[i] && (edges_[i].a == v || edges_[i].b == v)) {
                    column.push_back(static_cast<int>(i));
                }
            }
            std::sort(column.begin(), column.end(), [&](int x, int y) {
                return edges_[static_cast<std::size_t>(x)].level <
                       edges_[static_cast<std::size_t>(y)].level;
            });
            const int expect = dim_ - 1 - k;
            if (static_cast<int>(column.size()) != expect) {
                throw std::logic_error("VineModel: not a regular vine (column size)");
            }
            for (int l = 0; l < expect; ++l) {
                if (edges_[static_cast<std::size_t>(column[static_cast<std::size_t>(l)])].level !=
                    l + 1) {
                    throw std::logic_error("VineModel: not a regular vine (column levels)");
                }
            }
            order_[static_cast<std::size_t>(k)] = v;
            columns_[static_cast<std::size_t>(k)] = column;
            for (int ei : column) removed[static_cast<std::size_t>(ei)] = true;
            remaining_vars &= ~(1u << static_cast<unsigned>(v));
        }
        for (int j = 0; j < dim_; ++j) {
            if (remaining_vars & (1u << static_cast<unsigned>(j))) {
                order_[static_cast<std::size_t>(dim_ - 1)] = j;
            }
        }
    }
};

// Pseudo-observations rank(x)/(n+1), ties resolved by average rank.
inline Matrix pseudo_observations(const Matrix& data) {
    Matrix u(data.rows(), data.cols());
    for (std::size_t j = 0; j < data.cols(); ++j) {
        const std::vector<double> col = data.column(j);
        const std::vector<double> ranks = average_ranks(col);
        for (std::size_t i = 0; i < data.rows(); ++i) {
            u(i, j) = ranks[i] / (static_cast<double>(data.rows()) + 1.0);
        }
    }
    return u;
}

namespace vine_detail {

struct FitNode {
    std::uint32_t mask = 0;  // variable set
    int var_a = -1, var_b = -1;
    std::vector<double> stream_a;  // F(u_a | mask \ {a})
    std::vector<double> stream_b;  // F(u_b | mask \ {b}); unused at tree 1
    int end1 = -1, end2 = -1;      // endpoints in the previous tree
};

inline const std::vector<double>& stream_for(const FitNode& n, int var) {
    if (var == n.var_a) return n.stream_a;
    if (var == n.var_b) return n.stream_b;
    throw std::logic_error("vine_fit: variable not in conditioned pair");
}

}  // namespace vine_detail

// Fits the vine by the greedy Dissmann construction: per tree a maximum
// spanning tree on |Kendall tau| over the allowed (proximity) pairs, each
// edge's family selected by BIC. Tau ties resolve to the lexicographically
// smallest node pair, so the structure is deterministic.
inline VineModel vine_fit(const Matrix& data, std::span<const CopulaFamily> families,
                          std::uint64_t /*seed*/ = 0) {
    const std::size_t n = data.rows();
    const int d = static_cast<int>(data.cols());
    if (d < 2) throw std::invalid_argument("vine_fit: need at least 2 attributes");
    if (d > 30) {
        throw std::invalid_argument(
            "vine_fit: more than 30 attributes; vine fitting cost is quadratic in the "
            "dimension, exclude high-dimensional data");
    }
    if (n < 30) throw std::invalid_argument("vine_fit: need at least 30 rows");

    std::vector<MarginalKde> marginals;
    marginals.reserve(static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < data.cols(); ++j) {
        marginals.push_back(MarginalKde::fit(data.column(j)));
    }

    const Matrix u = pseudo_observations(data);
    std::vector<vine_detail::FitNode> nodes(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        auto& node = nodes[static_cast<std::size_t>(j)];
        node.mask = 1u << static_cast<unsigned>(j);
        node.var_a = j;
        node.stream_a = u.column(static_cast<std::size_t>(j));
    }

    std::vector<VineEdge> edges;
    for (int level = 1; level < d; ++level) {
        const int m = static_cast<int>(nodes.size());
        struct Candidate {
            int i, j;
            int x, y;  // conditioned pair
            double weight;
        };
        std::vector<Candidate> cand;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                const auto& p = nodes[static_cast<std::size_t>(i)];
                const auto& q = nodes[static_cast<std::size_t>(j)];
                if (level > 1) {
                    const bool share = p.end1 == q.end1 || p.end1 == q.end2 ||
                                       p.end2 == q.end1 || p.end2 == q.end2;
                    if (!share) continue;
                }
                const std::uint32_t only_p = p.mask & ~q.mask;
                const std::uint32_t only_q = q.mask & ~p.mask;
                if (std::popcount(only_p) != 1 || std::popcount(only_q) != 1) continue;
                const int x = std::countr_zero(only_p);
                const int y = std::countr_zero(only_q);
                const double tau = kendall_tau_fast(vine_detail::stream_for(p, x),
                                                    vine_detail::stream_for(q, y));
                cand.push_back(Candidate{i, j, x, y, std::abs(tau)});
            }
        }

        // Prim's algorithm, deterministic tie-breaking on the node pair.
        std::vector<bool> in_tree(static_cast<std::size_t>(m), false);
        in_tree[0] = true;
        std::vector<vine_detail::FitNode> next_nodes;
        std::vector<const Candidate*> chosen;
        for (int step = 0; step + 1 < m; ++step) {
            const Candidate* pick = nullptr;
            for (const Candidate& c : cand) {
                if (in_tree[static_cast<std::size_t>(c.i)] ==
                    in_tree[static_cast<std::size_t>(c.j)]) {
                    continue;
                }
                if (!pick || c.weight > pick->weight ||
                    (c.weight == pick->weight &&
                     std::pair(c.i, c.j) < std::pair(pick->i, pick->j))) {
                    pick = &c;
                }
            }
            if (!pick) throw std::logic_error("vine_fit: proximity graph not connected");
            in_tree[static_cast<std::size_t>(pick->i)] = true;
            in_tree[static_cast<std::size_t>(pick->j)] = true;
            chosen.push_back(pick);
        }
        std::sort(chosen.begin(), chosen.end(), [](const Candidate* a, const Candidate* b) {
            return std::pair(a->i, a->j) < std::pair(b->i, b->j);
        });

        for (const Candidate* c : chosen) {
            const auto& p = nodes[static_cast<std::size_t>(c->i)];
            const auto& q = nodes[static_cast<std::size_t>(c->j)];
            const auto& su = vine_detail::stream_for(p, c->x);
            const auto& sv = vine_detail::stream_for(q, c->y);
            const PairCopulaFit fit = select_pair_copula(su, sv, families);

            VineEdge e;
            e.a = c->x;
            e.b = c->y;
            e.cond_mask = p.mask & q.mask;
            e.level = level;
            e.copula = fit.copula;
            edges.push_back(e);

            vine_detail::FitNode nn;
            nn.mask = p.mask | q.mask;
            nn.var_a = c->x;
            nn.var_b = c->y;
            nn.end1 = c->i;
            nn.end2 = c->j;
            nn.stream_a.resize(n);
            nn.stream_b.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                nn.stream_a[i] = fit.copula.h1(su[i], sv[i]);
                nn.stream_b[i] = fit.copula.h2(sv[i], su[i]);
            }
            next_nodes.push_back(std::move(nn));
        }
        nodes = std::move(next_nodes);
    }
    return VineModel(std::move(marginals), std::move(edges));
}

}  // namespace synthbench

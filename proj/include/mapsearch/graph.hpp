// graph.hpp -- moral/interaction graphs, min-fill elimination orders, widths.
#ifndef MAPSEARCH_GRAPH_HPP
#define MAPSEARCH_GRAPH_HPP

#include <cassert>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bn.hpp"

namespace mapsearch {

// Undirected irreflexive graph over variable ids, adjacency-matrix backed.
class InteractionGraph {
public:
    explicit InteractionGraph(int n)
        : n_(n), adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

    int size() const { return n_; }

    void add_edge(VarId u, VarId v) {
        assert(u >= 0 && u < n_ && v >= 0 && v < n_);
        if (u == v) return;
        adj_[idx(u, v)] = 1;
        adj_[idx(v, u)] = 1;
    }

    bool has_edge(VarId u, VarId v) const { return u != v && adj_[idx(u, v)] != 0; }

    std::vector<VarId> neighbors(VarId u) const {
        std::vector<VarId> r;
        for (VarId v = 0; v < n_; ++v)
            if (adj_[idx(u, v)]) r.push_back(v);
        return r;
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (VarId u = 0; u < n_; ++u)
            for (VarId v = u + 1; v < n_; ++v)
                if (adj_[idx(u, v)]) ++e;
        return e;
    }

private:
    std::size_t idx(VarId u, VarId v) const {
        return static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(v);
    }
    int n_;
    std::vector<std::uint8_t> adj_;
};

// A permutation of all variables; when `constraint` is present every variable
// outside it must precede every variable inside it.
struct EliminationOrder {
    std::vector<VarId> sequence;
    std::optional<std::vector<VarId>> constraint;

    bool is_permutation_of(int n) const {
        if (static_cast<int>(sequence.size()) != n) return false;
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (VarId v : sequence) {
            if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
            seen[static_cast<std::size_t>(v)] = 1;
        }
        return true;
    }

    bool satisfies_constraint() const {
        if (!constraint) return true;
        std::vector<char> in_s;
        std::size_t n = sequence.size();
        in_s.assign(n, 0);
        for (VarId v : *constraint) in_s[static_cast<std::size_t>(v)] = 1;
        bool seen_s = false;
        for (VarId v : sequence) {
            if (in_s[static_cast<std::size_t>(v)])
                seen_s = true;
            else if (seen_s)
                return false;
        }
        return true;
    }
};

struct WidthStats {
    int min = 0;
    int max = 0;
    double average = 0.0;
    double weighted_average = 0.0;
};

// Moralization: connect each variable to its parents and marry co-parents.
inline InteractionGraph moral_graph_of(int n, const std::vector<std::vector<VarId>>& parent_lists) {
    InteractionGraph g(n);
    for (VarId v = 0; v < n; ++v) {
        const auto& parents = parent_lists[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < parents.size(); ++i) {
            g.add_edge(v, parents[i]);
            for (std::size_t j = i + 1; j < parents.size(); ++j)
                g.add_edge(parents[i], parents[j]);
        }
    }
    return g;
}

inline InteractionGraph moral_graph(const BayesianNetwork& net) {
    std::vector<std::vector<VarId>> parents;
    parents.reserve(static_cast<std::size_t>(net.size()));
    for (VarId v = 0; v < net.size(); ++v) parents.push_back(net.cpt(v).parents);
    return moral_graph_of(net.size(), parents);
}

namespace detail {

// Mutable elimination state over a copy of the graph.
class ElimState {
public:
    explicit ElimState(const InteractionGraph& g) : n_(g.size()), alive_(n_, 1) {
        adj_.resize(static_cast<std::size_t>(n_));
        for (VarId u = 0; u < n_; ++u) {
            adj_[static_cast<std::size_t>(u)].assign(static_cast<std::size_t>(n_), 0);
            for (VarId v = 0; v < n_; ++v)
                if (g.has_edge(u, v)) adj_[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
        }
    }

    std::vector<VarId> alive_neighbors(VarId u) const {
        std::vector<VarId> r;
        const auto& row = adj_[static_cast<std::size_t>(u)];
        for (VarId v = 0; v < n_; ++v)
            if (row[static_cast<std::size_t>(v)] && alive_[static_cast<std::size_t>(v)]) r.push_back(v);
        return r;
    }

    // Number of missing edges among the alive neighbors of u.
    std::size_t fill_count(VarId u) const {
        auto nb = alive_neighbors(u);
        std::size_t missing = 0;
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j)
                if (!adj_[static_cast<std::size_t>(nb[i])][static_cast<std::size_t>(nb[j])]) ++missing;
        return missing;
    }

    // Connects u's alive neighbors pairwise, removes u; returns the neighbor count.
    int eliminate(VarId u) {
        auto nb = alive_neighbors(u);
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j) {
                adj_[static_cast<std::size_t>(nb[i])][static_cast<std::size_t>(nb[j])] = 1;
                adj_[static_cast<std::size_t>(nb[j])][static_cast<std::size_t>(nb[i])] = 1;
            }
        alive_[static_cast<std::size_t>(u)] = 0;
        return static_cast<int>(nb.size());
    }

    bool alive(VarId u) const { return alive_[static_cast<std::size_t>(u)] != 0; }

private:
    int n_;
    std::vector<char> alive_;
    std::vector<std::vector<std::uint8_t>> adj_;
};

} // namespace detail

// Greedy min-fill ordering. With a constraint set S, min-fill runs over the
// non-S vertices to exhaustion first and then over S; ties always break
// toward the lowest variable id so orders are reproducible.
inline EliminationOrder min_fill_order(const InteractionGraph& g,
                                       std::optional<std::vector<VarId>> constraint = std::nullopt) {
    const int n = g.size();
    std::vector<char> in_s(static_cast<std::size_t>(n), 0);
    if (constraint)
        for (VarId v : *constraint) {
            if (v < 0 || v >= n) throw std::invalid_argument("constraint variable out of range");
            in_s[static_cast<std::size_t>(v)] = 1;
        }

    detail::ElimState st(g);
    EliminationOrder order;
    order.sequence.reserve(static_cast<std::size_t>(n));
    order.constraint = std::move(constraint);

    auto run_phase = [&](bool phase_s) {
        for (;;) {
            VarId best = -1;
            std::size_t best_fill = 0;
            for (VarId v = 0; v < n; ++v) {
                if (!st.alive(v) || (in_s[static_cast<std::size_t>(v)] != 0) != phase_s) continue;
                const std::size_t f = st.fill_count(v);
                if (best < 0 || f < best_fill) {
                    best = v;
                    best_fill = f;
                }
            }
            if (best < 0) break;
            st.eliminate(best);
            order.sequence.push_back(best);
        }
    };

    run_phase(false);
    run_phase(true);
    return order;
}

// Width of an order: simulate elimination with fill-in; the largest
// intermediate table has (1 + neighbor count) variables, so the width is the
// maximum neighbor count at elimination time.
inline int order_width(const InteractionGraph& g, const EliminationOrder& order) {
    if (!order.is_permutation_of(g.size()))
        throw std::invalid_argument("order is not a permutation of the graph's vertices");
    detail::ElimState st(g);
    int width = 0;
    for (VarId v : order.sequence) width = std::max(width, st.eliminate(v));
    return width;
}

// Plain and exponentially weighted width averages over a set of orders:
// average = sum(w_i)/k, weighted = log2(sum(2^w_i)/k). The weighted form is
// computed with the maximum factored out so large widths cannot overflow.
inline WidthStats width_stats(const std::vector<int>& widths) {
    if (widths.empty()) throw std::invalid_argument("width_stats: empty width list");
    WidthStats s;
    s.min = widths[0];
    s.max = widths[0];
    double sum = 0.0;
    for (int w : widths) {
        s.min = std::min(s.min, w);
        s.max = std::max(s.max, w);
        sum += w;
    }
    s.average = sum / static_cast<double>(widths.size());
    double acc = 0.0;
    for (int w : widths) acc += std::exp2(static_cast<double>(w - s.max));
    s.weighted_average =
        static_cast<double>(s.max) + std::log2(acc / static_cast<double>(widths.size()));
    return s;
}

} // namespace mapsearch

#endif

// trace.hpp -- a recorded arithmetic circuit for the network polynomial.
//
// Running variable elimination once *symbolically* (cells hold node ids, not
// numbers) yields a straight-line program whose leaves are CPT constants and
// per-value evidence indicators. Evaluating it bottom-up with the indicators
// set for an assignment gives the probability of that assignment joined with
// whatever the indicators leave free; differentiating it top-down afterwards
// gives, at every indicator leaf at once, the value the evaluation would have
// produced had that variable been flipped to that value. One forward+backward
// sweep therefore scores a state and its entire neighborhood together.
//
// All arithmetic runs on (mantissa, exponent) pairs with the mantissa in
// [0.5, 1) or exactly 0, the same representation as ScaledReal, so deep
// products of small probabilities cannot underflow.
#ifndef MAPSEARCH_TRACE_HPP
#define MAPSEARCH_TRACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bn.hpp"
#include "graph.hpp"
#include "scaled_real.hpp"

namespace mapsearch {

class Trace {
public:
    // Every variable is kept symbolic; evidence enters later through the
    // indicator values. The order must cover all variables. Trace size is
    // governed by the order's induced width.
    Trace(const BayesianNetwork& net, const EliminationOrder& order) {
        if (!order.is_permutation_of(net.size()))
            throw std::invalid_argument("trace construction needs a full elimination order");
        var_count_ = net.size();
        ind_offset_.resize(static_cast<std::size_t>(var_count_) + 1, 0);
        for (VarId v = 0; v < var_count_; ++v)
            ind_offset_[static_cast<std::size_t>(v) + 1] =
                ind_offset_[static_cast<std::size_t>(v)] +
                static_cast<std::size_t>(net.cardinality(v));
        indicator_node_.assign(ind_offset_.back(), -1);

        std::vector<SymFactor> pool;
        pool.reserve(2 * static_cast<std::size_t>(var_count_));
        for (VarId v = 0; v < var_count_; ++v) {
            pool.push_back(cpt_factor(net, v));
            pool.push_back(indicator_factor(net, v));
        }
        for (VarId v : order.sequence) {
            SymFactor prod;
            bool found = false;
            std::vector<SymFactor> rest;
            rest.reserve(pool.size());
            for (auto& f : pool) {
                if (f.mentions(v)) {
                    prod = found ? product(prod, f) : std::move(f);
                    found = true;
                } else {
                    rest.push_back(std::move(f));
                }
            }
            pool = std::move(rest);
            if (found) pool.push_back(sum_out_var(prod, v));
        }
        // everything is eliminated; fold the residual scalars into the root
        std::int32_t root = -1;
        for (const auto& f : pool)
            root = root < 0 ? f.cells[0] : emit_mul2(root, f.cells[0]);
        root_ = root;
    }

    std::size_t node_count() const { return kind_.size(); }
    std::int32_t root() const { return root_; }

    // Scratch arrays for one evaluation; reusable across calls, one per thread.
    struct Workspace {
        std::vector<double> val_m;
        std::vector<std::int32_t> val_e;
        std::vector<double> adj_m;
        std::vector<std::int32_t> adj_e;
    };

    Workspace make_workspace() const {
        Workspace ws;
        ws.val_m.resize(node_count());
        ws.val_e.resize(node_count());
        ws.adj_m.resize(node_count());
        ws.adj_e.resize(node_count());
        return ws;
    }

    // Forward sweep. Indicators of a bound variable are 1 at the bound value
    // and 0 elsewhere; indicators of a free variable are all 1, which sums
    // the free variable out. Returns the polynomial's value.
    ScaledReal evaluate(const Assignment& setting, Workspace& ws) const {
        forward(setting, ws);
        return value(ws);
    }

    // Forward plus backward sweep; afterwards derivative() is valid for every
    // (variable, value) pair.
    void differentiate(const Assignment& setting, Workspace& ws) const {
        forward(setting, ws);
        backward(ws);
    }

    ScaledReal value(const Workspace& ws) const {
        const auto r = static_cast<std::size_t>(root_);
        return ScaledReal::from_parts(ws.val_m[r], ws.val_e[r]);
    }

    // dP/dlambda(v=x): for v bound in the setting this is the value the
    // forward pass would produce with v rebound to x; for v free it is the
    // value with v bound to x.
    ScaledReal derivative(const Workspace& ws, VarId v, int x) const {
        const auto n = static_cast<std::size_t>(
            indicator_node_[ind_offset_[static_cast<std::size_t>(v)] + static_cast<std::size_t>(x)]);
        return ScaledReal::from_parts(ws.adj_m[n], ws.adj_e[n]);
    }

private:
    enum Kind : std::uint8_t { kConst, kIndicator, kAdd, kMul2 };

    // Node payloads, struct-of-arrays. Meaning of a/b by kind:
    //   kConst:     a = index into const_m_/const_e_
    //   kIndicator: a = variable, b = value
    //   kAdd:       [a, b) = range in add_kids_
    //   kMul2:      a, b = operand node ids
    std::vector<Kind> kind_;
    std::vector<std::int32_t> a_, b_;
    std::vector<std::int32_t> add_kids_;
    std::vector<double> const_m_;
    std::vector<std::int32_t> const_e_;
    std::vector<std::size_t> ind_offset_;    // per variable, into indicator_node_
    std::vector<std::int32_t> indicator_node_;
    std::int32_t root_ = -1;
    int var_count_ = 0;

    struct SymFactor {
        std::vector<VarId> scope; // strictly increasing
        std::vector<int> cards;
        std::vector<std::int32_t> cells; // node ids, last scope variable fastest

        bool mentions(VarId v) const {
            for (VarId u : scope)
                if (u == v) return true;
            return false;
        }
        int position_of(VarId v) const {
            for (std::size_t i = 0; i < scope.size(); ++i)
                if (scope[i] == v) return static_cast<int>(i);
            return -1;
        }
    };

    std::int32_t new_node(Kind k, std::int32_t a, std::int32_t b) {
        const auto id = static_cast<std::int32_t>(kind_.size());
        kind_.push_back(k);
        a_.push_back(a);
        b_.push_back(b);
        return id;
    }

    std::int32_t emit_const(double p) {
        const auto idx = static_cast<std::int32_t>(const_m_.size());
        const ScaledReal s(p);
        const_m_.push_back(s.mantissa());
        const_e_.push_back(static_cast<std::int32_t>(s.exponent()));
        return new_node(kConst, idx, 0);
    }

    std::int32_t emit_indicator(VarId v, int x) {
        const auto id = new_node(kIndicator, v, x);
        indicator_node_[ind_offset_[static_cast<std::size_t>(v)] + static_cast<std::size_t>(x)] = id;
        return id;
    }

    std::int32_t emit_mul2(std::int32_t x, std::int32_t y) { return new_node(kMul2, x, y); }

    std::int32_t emit_add(const std::int32_t* kids, std::size_t n) {
        const auto begin = static_cast<std::int32_t>(add_kids_.size());
        add_kids_.insert(add_kids_.end(), kids, kids + n);
        return new_node(kAdd, begin, static_cast<std::int32_t>(add_kids_.size()));
    }

    SymFactor cpt_factor(const BayesianNetwork& net, VarId child) {
        const Cpt& c = net.cpt(child);
        SymFactor f;
        f.scope = c.parents;
        f.scope.push_back(child);
        std::sort(f.scope.begin(), f.scope.end());
        for (VarId v : f.scope) f.cards.push_back(net.cardinality(v));
        std::size_t total = 1;
        for (int cd : f.cards) total *= static_cast<std::size_t>(cd);
        f.cells.resize(total);
        const auto child_card = static_cast<std::size_t>(net.cardinality(child));
        std::vector<std::size_t> digit(f.scope.size(), 0);
        for (std::size_t cell = 0;;) {
            std::size_t row = 0, child_val = 0;
            for (std::size_t d = 0; d < f.scope.size(); ++d) {
                if (f.scope[d] == child)
                    child_val = digit[d];
                else
                    row = row * static_cast<std::size_t>(f.cards[d]) + digit[d];
            }
            f.cells[cell] = emit_const(c.table[row * child_card + child_val]);
            if (++cell == total) break;
            for (std::size_t d = f.scope.size(); d-- > 0;) {
                if (++digit[d] < static_cast<std::size_t>(f.cards[d])) break;
                digit[d] = 0;
            }
        }
        return f;
    }

    SymFactor indicator_factor(const BayesianNetwork& net, VarId v) {
        SymFactor f;
        f.scope = {v};
        f.cards = {net.cardinality(v)};
        f.cells.reserve(static_cast<std::size_t>(net.cardinality(v)));
        for (int x = 0; x < net.cardinality(v); ++x) f.cells.push_back(emit_indicator(v, x));
        return f;
    }

    SymFactor product(const SymFactor& a, const SymFactor& b) {
        SymFactor r;
        std::size_t i = 0, j = 0;
        while (i < a.scope.size() || j < b.scope.size()) {
            if (j == b.scope.size() || (i < a.scope.size() && a.scope[i] < b.scope[j])) {
                r.scope.push_back(a.scope[i]);
                r.cards.push_back(a.cards[i]);
                ++i;
            } else if (i == a.scope.size() || b.scope[j] < a.scope[i]) {
                r.scope.push_back(b.scope[j]);
                r.cards.push_back(b.cards[j]);
                ++j;
            } else {
                r.scope.push_back(a.scope[i]);
                r.cards.push_back(a.cards[i]);
                ++i;
                ++j;
            }
        }
        std::size_t total = 1;
        for (int cd : r.cards) total *= static_cast<std::size_t>(cd);
        r.cells.resize(total);

        // strides of each result dimension within the operands (0 if absent)
        const std::size_t nd = r.scope.size();
        std::vector<std::size_t> sa(nd, 0), sb(nd, 0);
        {
            std::size_t s = 1;
            for (std::size_t k = a.scope.size(); k-- > 0;) {
                const int p = position_in(r.scope, a.scope[k]);
                sa[static_cast<std::size_t>(p)] = s;
                s *= static_cast<std::size_t>(a.cards[k]);
            }
            s = 1;
            for (std::size_t k = b.scope.size(); k-- > 0;) {
                const int p = position_in(r.scope, b.scope[k]);
                sb[static_cast<std::size_t>(p)] = s;
                s *= static_cast<std::size_t>(b.cards[k]);
            }
        }
        std::vector<std::size_t> digit(nd, 0);
        std::size_t ia = 0, ib = 0;
        for (std::size_t cell = 0;;) {
            r.cells[cell] = emit_mul2(a.cells[ia], b.cells[ib]);
            if (++cell == total) break;
            for (std::size_t d = nd; d-- > 0;) {
                ia += sa[d];
                ib += sb[d];
                if (++digit[d] < static_cast<std::size_t>(r.cards[d])) break;
                digit[d] = 0;
                ia -= sa[d] * static_cast<std::size_t>(r.cards[d]);
                ib -= sb[d] * static_cast<std::size_t>(r.cards[d]);
            }
        }
        return r;
    }

    static int position_in(const std::vector<VarId>& scope, VarId v) {
        for (std::size_t i = 0; i < scope.size(); ++i)
            if (scope[i] == v) return static_cast<int>(i);
        return -1;
    }

    SymFactor sum_out_var(const SymFactor& f, VarId v) {
        const int p = f.position_of(v);
        SymFactor r;
        for (std::size_t i = 0; i < f.scope.size(); ++i)
            if (static_cast<int>(i) != p) {
                r.scope.push_back(f.scope[i]);
                r.cards.push_back(f.cards[i]);
            }
        std::size_t block = 1;
        for (std::size_t i = static_cast<std::size_t>(p) + 1; i < f.scope.size(); ++i)
            block *= static_cast<std::size_t>(f.cards[i]);
        const auto nx = static_cast<std::size_t>(f.cards[static_cast<std::size_t>(p)]);
        const std::size_t outer = f.cells.size() / (nx * block);
        r.cells.resize(outer * block);
        std::vector<std::int32_t> kids(nx);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t k = 0; k < block; ++k) {
                for (std::size_t x = 0; x < nx; ++x)
                    kids[x] = f.cells[o * nx * block + x * block + k];
                r.cells[o * block + k] = emit_add(kids.data(), nx);
            }
        return r;
    }

    // ---- numeric sweeps ----

    // target (tm * 2^te) += addend (am * 2^ae); both nonnegative
    static void acc_add(double& tm, std::int32_t& te, double am, std::int32_t ae) {
        if (am == 0.0) return;
        if (tm == 0.0) {
            tm = am;
            te = ae;
            return;
        }
        const std::int64_t d = static_cast<std::int64_t>(te) - ae;
        if (d >= 64) return; // addend below one ulp of the target
        if (d <= -64) {
            tm = am;
            te = ae;
            return;
        }
        double sum;
        std::int32_t base;
        if (d >= 0) {
            sum = tm + std::ldexp(am, static_cast<int>(-d));
            base = te;
        } else {
            sum = std::ldexp(tm, static_cast<int>(d)) + am;
            base = ae;
        }
        int k;
        tm = std::frexp(sum, &k);
        te = base + k;
    }

    void forward(const Assignment& setting, Workspace& ws) const {
        const std::size_t n = node_count();
        for (std::size_t i = 0; i < n; ++i) {
            switch (kind_[i]) {
            case kConst: {
                const auto c = static_cast<std::size_t>(a_[i]);
                ws.val_m[i] = const_m_[c];
                ws.val_e[i] = const_e_[c];
                break;
            }
            case kIndicator: {
                const VarId v = a_[i];
                const bool on = !setting.is_bound(v) || setting.value(v) == b_[i];
                ws.val_m[i] = on ? 0.5 : 0.0;
                ws.val_e[i] = on ? 1 : 0;
                break;
            }
            case kMul2: {
                const auto x = static_cast<std::size_t>(a_[i]);
                const auto y = static_cast<std::size_t>(b_[i]);
                double m = ws.val_m[x] * ws.val_m[y];
                std::int32_t e = ws.val_e[x] + ws.val_e[y];
                if (m == 0.0)
                    e = 0;
                else if (m < 0.5) {
                    m *= 2.0;
                    --e;
                }
                ws.val_m[i] = m;
                ws.val_e[i] = e;
                break;
            }
            case kAdd: {
                std::int32_t emax = std::numeric_limits<std::int32_t>::min();
                for (std::int32_t k = a_[i]; k < b_[i]; ++k) {
                    const auto c = static_cast<std::size_t>(add_kids_[static_cast<std::size_t>(k)]);
                    if (ws.val_m[c] != 0.0 && ws.val_e[c] > emax) emax = ws.val_e[c];
                }
                if (emax == std::numeric_limits<std::int32_t>::min()) {
                    ws.val_m[i] = 0.0;
                    ws.val_e[i] = 0;
                    break;
                }
                double acc = 0.0;
                for (std::int32_t k = a_[i]; k < b_[i]; ++k) {
                    const auto c = static_cast<std::size_t>(add_kids_[static_cast<std::size_t>(k)]);
                    const std::int64_t d = static_cast<std::int64_t>(ws.val_e[c]) - emax;
                    if (ws.val_m[c] != 0.0 && d > -64)
                        acc += std::ldexp(ws.val_m[c], static_cast<int>(d));
                }
                int k2;
                ws.val_m[i] = std::frexp(acc, &k2);
                ws.val_e[i] = emax + k2;
                break;
            }
            }
        }
    }

    void backward(Workspace& ws) const {
        const std::size_t n = node_count();
        std::fill(ws.adj_m.begin(), ws.adj_m.end(), 0.0);
        ws.adj_m[static_cast<std::size_t>(root_)] = 0.5;
        ws.adj_e[static_cast<std::size_t>(root_)] = 1;
        for (std::size_t i = n; i-- > 0;) {
            if (ws.adj_m[i] == 0.0) continue;
            switch (kind_[i]) {
            case kMul2: {
                const auto x = static_cast<std::size_t>(a_[i]);
                const auto y = static_cast<std::size_t>(b_[i]);
                // d/dx (x*y) = y, d/dy = x
                if (ws.val_m[y] != 0.0) {
                    double m = ws.adj_m[i] * ws.val_m[y];
                    std::int32_t e = ws.adj_e[i] + ws.val_e[y];
                    if (m < 0.5) {
                        m *= 2.0;
                        --e;
                    }
                    acc_add(ws.adj_m[x], ws.adj_e[x], m, e);
                }
                if (ws.val_m[x] != 0.0) {
                    double m = ws.adj_m[i] * ws.val_m[x];
                    std::int32_t e = ws.adj_e[i] + ws.val_e[x];
                    if (m < 0.5) {
                        m *= 2.0;
                        --e;
                    }
                    acc_add(ws.adj_m[y], ws.adj_e[y], m, e);
                }
                break;
            }
            case kAdd: {
                for (std::int32_t k = a_[i]; k < b_[i]; ++k) {
                    const auto c = static_cast<std::size_t>(add_kids_[static_cast<std::size_t>(k)]);
                    acc_add(ws.adj_m[c], ws.adj_e[c], ws.adj_m[i], ws.adj_e[i]);
                }
                break;
            }
            default:
                break; // leaves
            }
        }
    }
};

// Scores of every single-variable change to a MAP assignment s: for each
// X in S a vector over values x of Pr(s - X, x, e), plus the base Pr(s, e).
// The entry at s's own value of X reproduces the base score.
struct NeighborScores {
    std::vector<VarId> vars;                     // S, ascending
    std::vector<std::vector<ScaledReal>> scores; // parallel to vars, indexed by value
    ScaledReal base;                             // Pr(s, e)

    const std::vector<ScaledReal>& for_var(VarId v) const {
        const auto it = std::lower_bound(vars.begin(), vars.end(), v);
        if (it == vars.end() || *it != v)
            throw std::invalid_argument("variable is not a MAP variable");
        return scores[static_cast<std::size_t>(it - vars.begin())];
    }
};

// One forward + one backward sweep over a prebuilt trace: every neighbor of
// s is scored for the cost of a constant factor over a single evaluation.
// s must bind exactly S, and S must be disjoint from the evidence.
inline NeighborScores all_neighbor_scores(const BayesianNetwork& net, const std::vector<VarId>& S,
                                          const Assignment& s, const Assignment& e,
                                          const Trace& trace, Trace::Workspace& ws) {
    NeighborScores out;
    out.vars = S;
    std::sort(out.vars.begin(), out.vars.end());
    Assignment setting = e;
    for (VarId v : out.vars) {
        if (!s.is_bound(v)) throw std::invalid_argument("s must bind every MAP variable");
        if (e.is_bound(v)) throw std::invalid_argument("MAP variable appears in the evidence");
        setting.bind(v, s.value(v));
    }
    trace.differentiate(setting, ws);
    out.base = trace.value(ws);
    out.scores.reserve(out.vars.size());
    for (VarId v : out.vars) {
        std::vector<ScaledReal> row(static_cast<std::size_t>(net.cardinality(v)));
        for (int x = 0; x < net.cardinality(v); ++x)
            row[static_cast<std::size_t>(x)] = trace.derivative(ws, v, x);
        out.scores.push_back(std::move(row));
    }
    return out;
}

// Convenience form that records a fresh trace for the given order. Callers
// scoring many states against one network should build the Trace once and
// use the overload above with a reused workspace.
inline NeighborScores all_neighbor_scores(const BayesianNetwork& net, const std::vector<VarId>& S,
                                          const Assignment& s, const Assignment& e,
                                          const EliminationOrder& order) {
    const Trace trace(net, order);
    Trace::Workspace ws = trace.make_workspace();
    return all_neighbor_scores(net, S, s, e, trace, ws);
}

} // namespace mapsearch

#endif

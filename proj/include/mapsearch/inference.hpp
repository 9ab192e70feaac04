// inference.hpp -- exact inference by variable elimination: evidence
// probability, posterior marginals, MPE, and MAP under a constrained order.
// A direct-enumeration MAP solver is included as a cross-check for small nets.
#ifndef MAPSEARCH_INFERENCE_HPP
#define MAPSEARCH_INFERENCE_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bn.hpp"
#include "factor.hpp"
#include "graph.hpp"
#include "scaled_real.hpp"

namespace mapsearch {

struct MapSolution {
    Assignment assignment; // bound on the solved-for variables (plus evidence copies where noted)
    ScaledReal value;      // joint probability of the solution with the evidence

    double probability() const { return value.to_double(); }
    double log2_probability() const { return value.log2(); }
};

// Joint probability of one complete assignment: the product of one CPT entry
// per variable.
inline ScaledReal joint_probability(const BayesianNetwork& net, const Assignment& a) {
    if (a.size() != static_cast<std::size_t>(net.size()) || !a.complete())
        throw std::invalid_argument("joint_probability requires a complete assignment");
    ScaledReal p(1.0);
    for (VarId v = 0; v < net.size(); ++v)
        p *= ScaledReal(net.cpt_entry(v, a.value(v), a));
    return p;
}

namespace detail {

inline void require_full_order(const BayesianNetwork& net, const EliminationOrder& order) {
    if (!order.is_permutation_of(net.size()))
        throw std::invalid_argument("elimination order must be a permutation of all variables");
}

// One factor per CPT, with all evidence variables sliced out up front.
inline std::vector<Factor> restricted_factors(const BayesianNetwork& net, const Assignment& e) {
    std::vector<Factor> pool;
    pool.reserve(static_cast<std::size_t>(net.size()));
    for (VarId v = 0; v < net.size(); ++v) {
        Factor f = factor_from_cpt(net, v);
        // restrict shrinks the scope, so walk a copy
        const std::vector<VarId> scope = f.scope;
        for (VarId u : scope)
            if (e.is_bound(u)) f = restrict_var(f, u, e.value(u));
        pool.push_back(std::move(f));
    }
    return pool;
}

// Pull every factor mentioning v out of the pool and return their product
// (unit if none mentions v).
inline Factor collect_product(std::vector<Factor>& pool, VarId v) {
    Factor acc;
    bool found = false;
    std::vector<Factor> rest;
    rest.reserve(pool.size());
    for (auto& f : pool) {
        if (f.mentions(v)) {
            acc = found ? factor_product(acc, f) : std::move(f);
            found = true;
        } else {
            rest.push_back(std::move(f));
        }
    }
    pool = std::move(rest);
    if (!found) acc = Factor::unit();
    return acc;
}

inline ScaledReal pool_scalar(const std::vector<Factor>& pool) {
    ScaledReal r(1.0);
    for (const auto& f : pool) r *= f.scalar();
    return r;
}

// Recorded max-elimination step, for tracing an argmax assignment back.
struct MaxStep {
    VarId var;
    Factor shape;            // result factor: its scope/cards index the argmax table
    std::vector<int> argmax; // parallel to shape.values
};

inline std::size_t index_under(const Factor& shape, const Assignment& a) {
    std::size_t idx = 0;
    for (std::size_t d = 0; d < shape.scope.size(); ++d)
        idx = idx * static_cast<std::size_t>(shape.cards[d]) +
              static_cast<std::size_t>(a.value(shape.scope[d]));
    return idx;
}

} // namespace detail

inline ScaledReal probability_of_evidence(const BayesianNetwork& net, const Assignment& e,
                                          const EliminationOrder& order) {
    detail::require_full_order(net, order);
    auto pool = detail::restricted_factors(net, e);
    for (VarId v : order.sequence) {
        if (e.is_bound(v)) continue;
        Factor prod = detail::collect_product(pool, v);
        pool.push_back(prod.mentions(v) ? sum_out(prod, v) : std::move(prod));
    }
    return detail::pool_scalar(pool);
}

// Pr(X = x, e) for every variable X and value x. A variable bound by the
// evidence gets all its mass on the bound value. Normalizing a row by Pr(e)
// gives the posterior.
inline std::vector<std::vector<ScaledReal>> posterior_marginals(const BayesianNetwork& net,
                                                                const Assignment& e,
                                                                const EliminationOrder& order) {
    detail::require_full_order(net, order);
    std::vector<std::vector<ScaledReal>> out(static_cast<std::size_t>(net.size()));
    const ScaledReal pe = probability_of_evidence(net, e, order);
    for (VarId x = 0; x < net.size(); ++x) {
        auto& row = out[static_cast<std::size_t>(x)];
        row.assign(static_cast<std::size_t>(net.cardinality(x)), ScaledReal(0.0));
        if (e.is_bound(x)) {
            row[static_cast<std::size_t>(e.value(x))] = pe;
            continue;
        }
        auto pool = detail::restricted_factors(net, e);
        for (VarId v : order.sequence) {
            if (v == x || e.is_bound(v)) continue;
            Factor prod = detail::collect_product(pool, v);
            pool.push_back(prod.mentions(v) ? sum_out(prod, v) : std::move(prod));
        }
        Factor last = detail::collect_product(pool, x);
        const ScaledReal rest = detail::pool_scalar(pool);
        for (int val = 0; val < net.cardinality(x); ++val) {
            ScaledReal cell = last.mentions(x)
                                  ? ScaledReal::from_parts(last.values[static_cast<std::size_t>(val)],
                                                           last.log2_offset)
                                  : ScaledReal(0.0);
            row[static_cast<std::size_t>(val)] = cell * rest;
        }
    }
    return out;
}

// MAP over S given evidence e: sum out every other unbound variable, then
// maximize over S. The order must eliminate all non-S (non-evidence)
// variables before any variable of S. Returns nullopt when Pr(e) = 0; value
// ties resolve to the lexicographically least assignment over S in id order.
inline std::optional<MapSolution> exact_map(const BayesianNetwork& net, const std::vector<VarId>& S,
                                            const Assignment& e, const EliminationOrder& order) {
    detail::require_full_order(net, order);
    std::vector<char> in_s(static_cast<std::size_t>(net.size()), 0);
    for (VarId v : S) {
        if (v < 0 || v >= net.size())
            throw std::invalid_argument("MAP variable id out of range");
        if (e.is_bound(v))
            throw std::invalid_argument("MAP variable " + net.variable(v).name +
                                        " is fixed by the evidence");
        in_s[static_cast<std::size_t>(v)] = 1;
    }
    bool seen_s = false;
    for (VarId v : order.sequence) {
        if (e.is_bound(v)) continue; // sliced out; its position is irrelevant
        if (in_s[static_cast<std::size_t>(v)])
            seen_s = true;
        else if (seen_s)
            throw std::invalid_argument(
                "elimination order must sum out all non-MAP variables before the MAP variables");
    }

    auto pool = detail::restricted_factors(net, e);
    std::vector<detail::MaxStep> steps;
    for (VarId v : order.sequence) {
        if (e.is_bound(v)) continue;
        Factor prod = detail::collect_product(pool, v);
        if (!prod.mentions(v)) {
            pool.push_back(std::move(prod));
            continue;
        }
        if (in_s[static_cast<std::size_t>(v)]) {
            MaxOutResult mr = max_out(prod, v);
            steps.push_back({v, mr.factor, std::move(mr.argmax)});
            pool.push_back(std::move(mr.factor));
        } else {
            pool.push_back(sum_out(prod, v));
        }
    }
    const ScaledReal score = detail::pool_scalar(pool);
    if (score.is_zero()) return std::nullopt;

    // Trace back in reverse elimination order; each step's table is indexed
    // by variables maximized later, which are bound by then.
    Assignment a(static_cast<std::size_t>(net.size()));
    for (auto it = steps.rbegin(); it != steps.rend(); ++it)
        a.bind(it->var, it->argmax[detail::index_under(it->shape, a)]);
    return MapSolution{std::move(a), score};
}

// MPE: MAP over every unbound variable. Any full order works because no
// summation phase remains.
inline std::optional<MapSolution> mpe(const BayesianNetwork& net, const Assignment& e,
                                      const EliminationOrder& order) {
    std::vector<VarId> all;
    for (VarId v = 0; v < net.size(); ++v)
        if (!e.is_bound(v)) all.push_back(v);
    auto sol = exact_map(net, all, e, order);
    if (!sol) return sol;
    // An MPE extends the evidence to a full assignment; fold it in.
    for (VarId v = 0; v < net.size(); ++v)
        if (e.is_bound(v)) sol->assignment.bind(v, e.value(v));
    return sol;
}

// Direct-enumeration MAP for cross-checking: sums the joint over all
// completions of every assignment to S. Refuses instances whose free-variable
// state space exceeds 2^24.
inline MapSolution brute_force_map(const BayesianNetwork& net, const std::vector<VarId>& S,
                                   const Assignment& e) {
    std::vector<VarId> free_vars;
    for (VarId v = 0; v < net.size(); ++v)
        if (!e.is_bound(v)) free_vars.push_back(v);
    for (VarId v : S)
        if (v < 0 || v >= net.size() || e.is_bound(v))
            throw std::invalid_argument("MAP variables must be unbound and in range");

    double log_states = 0.0;
    for (VarId v : free_vars) log_states += std::log2(static_cast<double>(net.cardinality(v)));
    if (log_states > 24.0)
        throw std::invalid_argument("brute_force_map: state space exceeds 2^24 configurations");

    std::size_t s_states = 1;
    for (VarId v : S) s_states *= static_cast<std::size_t>(net.cardinality(v));
    std::vector<ScaledReal> bucket(s_states, ScaledReal(0.0));

    std::vector<VarId> s_sorted = S;
    std::sort(s_sorted.begin(), s_sorted.end());

    Assignment a = e;
    for (VarId v : free_vars) a.rebind(v, 0);
    for (;;) {
        std::size_t sidx = 0;
        for (VarId v : s_sorted)
            sidx = sidx * static_cast<std::size_t>(net.cardinality(v)) +
                   static_cast<std::size_t>(a.value(v));
        bucket[sidx] += joint_probability(net, a);
        // odometer over free vars, last (highest id) fastest
        std::size_t d = free_vars.size();
        while (d-- > 0) {
            const VarId v = free_vars[d];
            if (a.value(v) + 1 < net.cardinality(v)) {
                a.rebind(v, a.value(v) + 1);
                break;
            }
            a.rebind(v, 0);
        }
        if (d == static_cast<std::size_t>(-1)) break;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < s_states; ++i)
        if (bucket[i] > bucket[best]) best = i;

    Assignment sol(static_cast<std::size_t>(net.size()));
    std::size_t rem = best;
    for (std::size_t i = s_sorted.size(); i-- > 0;) {
        const auto card = static_cast<std::size_t>(net.cardinality(s_sorted[i]));
        sol.bind(s_sorted[i], static_cast<int>(rem % card));
        rem /= card;
    }
    return MapSolution{std::move(sol), bucket[best]};
}

} // namespace mapsearch

#endif

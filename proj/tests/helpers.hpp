#ifndef MAPSEARCH_TESTS_HELPERS_HPP
#define MAPSEARCH_TESTS_HELPERS_HPP

// Hand-built fixture networks and seeded generator instances shared across
// the test files.

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

#include <mapsearch/bn.hpp>
#include <mapsearch/graph.hpp>
#include <mapsearch/netgen.hpp>
#include <mapsearch/rng.hpp>

namespace fixtures {

using namespace mapsearch;

// Chain A -> B with Pr(a1) = 0.6, Pr(b1 | a1) = 0.9, Pr(b1 | a0) = 0.2.
// Joint entries: (a0,b0) .32, (a0,b1) .08, (a1,b0) .06, (a1,b1) .54.
inline BayesianNetwork chain_ab() {
    std::vector<Variable> vars{{0, "A", 2}, {1, "B", 2}};
    std::vector<Cpt> cpts{{0, {}, {0.4, 0.6}}, {1, {0}, {0.8, 0.2, 0.1, 0.9}}};
    return BayesianNetwork(std::move(vars), std::move(cpts));
}

// A is the single parent of both B and C.
inline BayesianNetwork fork_abc() {
    std::vector<Variable> vars{{0, "A", 2}, {1, "B", 2}, {2, "C", 2}};
    std::vector<Cpt> cpts{{0, {}, {0.3, 0.7}},
                          {1, {0}, {0.6, 0.4, 0.25, 0.75}},
                          {2, {0}, {0.9, 0.1, 0.5, 0.5}}};
    return BayesianNetwork(std::move(vars), std::move(cpts));
}

// Two binary variables whose joint entries are p00 = .3, p01 = .1, p10 = .2,
// p11 = .4: state 00 is a strict local peak (both single-variable moves go
// downhill) while 11 is the global optimum.
inline BayesianNetwork peak_ab() {
    std::vector<Variable> vars{{0, "A", 2}, {1, "B", 2}};
    std::vector<Cpt> cpts{{0, {}, {0.4, 0.6}},
                          {1, {0}, {0.75, 0.25, 1.0 / 3.0, 2.0 / 3.0}}};
    return BayesianNetwork(std::move(vars), std::move(cpts));
}

inline Assignment bind_by_name(const BayesianNetwork& net,
                               std::initializer_list<std::pair<const char*, int>> items) {
    Assignment a(static_cast<std::size_t>(net.size()));
    for (const auto& [name, val] : items) a.bind(*net.find_variable(name), val);
    return a;
}

inline EliminationOrder mf_order(const BayesianNetwork& net) {
    return min_fill_order(moral_graph(net));
}

inline EliminationOrder mf_order(const BayesianNetwork& net, const std::vector<VarId>& S) {
    return min_fill_order(moral_graph(net), S);
}

// One seeded generator instance mirroring the experiment harness's stream
// layout. Roots that are also leaves end up bound by the evidence, so they
// are dropped from S to keep S and dom(e) disjoint.
struct Instance {
    BayesianNetwork net;
    std::vector<VarId> S;
    Assignment e;
};

inline Instance random_instance(std::uint64_t seed, int n, double p, double bias,
                                int map_cap = 25) {
    Rng rs(mix_seed(seed, 1));
    const Dag dag = gen_structure_edge_prob(n, p, rs);
    Rng rm(mix_seed(seed, 2));
    const std::vector<VarId> picked = select_map_vars(dag, map_cap, rm);
    Rng rq(mix_seed(seed, 3));
    BayesianNetwork net = quantify(dag, bias, rq);
    Rng re(mix_seed(seed, 4));
    Assignment e = sample_evidence(net, re);
    std::vector<VarId> S;
    for (VarId v : picked)
        if (!e.is_bound(v)) S.push_back(v);
    return {std::move(net), std::move(S), std::move(e)};
}

} // namespace fixtures

#endif

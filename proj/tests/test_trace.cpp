#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <mapsearch/inference.hpp>
#include <mapsearch/trace.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace mapsearch;

namespace {

// evaluate() under the oracle: sum of the joint over completions of `setting`
long double oracle_eval(const BayesianNetwork& net, const Assignment& setting) {
    return oracle::pr_evidence(net, setting);
}

} // namespace

TEST_CASE("trace evaluation on the chain", "[trace]") {
    const BayesianNetwork net = fixtures::chain_ab();
    const Trace trace(net, fixtures::mf_order(net));
    Trace::Workspace ws = trace.make_workspace();

    Assignment b1(2);
    b1.bind(1, 1);
    CHECK(trace.evaluate(b1, ws).to_double() == Catch::Approx(0.62));

    CHECK(trace.evaluate(Assignment(2), ws).to_double() == Catch::Approx(1.0));

    Assignment complete(2);
    complete.bind(0, 1);
    complete.bind(1, 1);
    CHECK(trace.evaluate(complete, ws).to_double() == Catch::Approx(0.54));
}

TEST_CASE("chain neighbor scores match the worked example", "[trace]") {
    const BayesianNetwork net = fixtures::chain_ab();
    const Trace trace(net, fixtures::mf_order(net));
    Trace::Workspace ws = trace.make_workspace();

    Assignment s(2);
    s.bind(0, 0); // current MAP guess: A = 0
    Assignment e(2);
    e.bind(1, 1);

    const NeighborScores scores = all_neighbor_scores(net, {0}, s, e, trace, ws);
    CHECK(scores.base.to_double() == Catch::Approx(0.08));
    REQUIRE(scores.vars == std::vector<VarId>{0});
    CHECK(scores.for_var(0)[0].to_double() == Catch::Approx(0.08));
    CHECK(scores.for_var(0)[1].to_double() == Catch::Approx(0.54));
    CHECK_THROWS_AS(scores.for_var(1), std::invalid_argument);

    // order-only convenience overload agrees
    const NeighborScores again = all_neighbor_scores(net, {0}, s, e, fixtures::mf_order(net));
    CHECK(again.base.to_double() == Catch::Approx(0.08));
    CHECK(again.for_var(0)[1].to_double() == Catch::Approx(0.54));
}

TEST_CASE("evaluation equals summed-out enumeration for any binding pattern", "[trace]") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto inst = fixtures::random_instance(mix_seed(800, seed), 9, 0.3,
                                                    (seed % 2) ? 0.5 : 0.25);
        const Trace trace(inst.net, fixtures::mf_order(inst.net));
        Trace::Workspace ws = trace.make_workspace();
        Rng rng(mix_seed(801, seed));

        // all free, evidence only, evidence plus random extras, complete
        std::vector<Assignment> settings;
        settings.emplace_back(static_cast<std::size_t>(inst.net.size()));
        settings.push_back(inst.e);
        Assignment mixed = inst.e;
        for (VarId v = 0; v < inst.net.size(); ++v)
            if (!mixed.is_bound(v) && rng.bernoulli(0.5))
                mixed.bind(v, static_cast<int>(rng.uniform_int(2)));
        settings.push_back(mixed);
        Assignment full = mixed;
        for (VarId v = 0; v < inst.net.size(); ++v)
            if (!full.is_bound(v)) full.bind(v, static_cast<int>(rng.uniform_int(2)));
        settings.push_back(full);

        for (const Assignment& setting : settings)
            REQUIRE(oracle::close(trace.evaluate(setting, ws), oracle_eval(inst.net, setting)));
    }
}

TEST_CASE("derivatives equal rebinding for every variable and value", "[trace]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = fixtures::random_instance(mix_seed(810, seed), 8, 0.35, 0.5);
        const Trace trace(inst.net, fixtures::mf_order(inst.net));
        Trace::Workspace ws = trace.make_workspace();
        Rng rng(mix_seed(811, seed));

        Assignment setting = inst.e;
        for (VarId v = 0; v < inst.net.size(); ++v)
            if (!setting.is_bound(v) && rng.bernoulli(0.6))
                setting.bind(v, static_cast<int>(rng.uniform_int(2)));

        trace.differentiate(setting, ws);
        const ScaledReal base = trace.value(ws);
        REQUIRE(oracle::close(base, oracle_eval(inst.net, setting)));

        for (VarId v = 0; v < inst.net.size(); ++v) {
            ScaledReal total(0.0);
            for (int x = 0; x < inst.net.cardinality(v); ++x) {
                const ScaledReal d = trace.derivative(ws, v, x);
                Assignment moved = setting;
                moved.rebind(v, x);
                REQUIRE(oracle::close(d, oracle_eval(inst.net, moved)));
                total += d;
            }
            // summing a variable's derivatives marginalizes it away entirely
            Assignment dropped = setting;
            dropped.unbind(v);
            REQUIRE(oracle::close(total, oracle_eval(inst.net, dropped)));
        }

        // the derivative at a bound variable's own value reproduces the base
        for (VarId v = 0; v < inst.net.size(); ++v)
            if (setting.is_bound(v))
                REQUIRE(rel_close(trace.derivative(ws, v, setting.value(v)), base, 1e-9));
    }
}

TEST_CASE("differentiation at bare evidence reproduces posterior marginals", "[trace]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto inst = fixtures::random_instance(mix_seed(820, seed), 10, 0.25, 0.375);
        const EliminationOrder order = fixtures::mf_order(inst.net);
        const Trace trace(inst.net, order);
        Trace::Workspace ws = trace.make_workspace();

        trace.differentiate(inst.e, ws);
        const auto marg = posterior_marginals(inst.net, inst.e, order);
        for (VarId v = 0; v < inst.net.size(); ++v) {
            if (inst.e.is_bound(v)) continue;
            for (int x = 0; x < inst.net.cardinality(v); ++x)
                REQUIRE(rel_close(trace.derivative(ws, v, x),
                                  marg[static_cast<std::size_t>(v)][static_cast<std::size_t>(x)],
                                  1e-9));
        }
    }
}

TEST_CASE("neighbor-score invariants on generated instances", "[trace]") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto inst = fixtures::random_instance(mix_seed(830, seed), 9, 0.3, 0.5, 5);
        if (inst.S.empty()) continue;
        const Trace trace(inst.net, fixtures::mf_order(inst.net));
        Trace::Workspace ws = trace.make_workspace();
        Rng rng(mix_seed(831, seed));

        Assignment s(static_cast<std::size_t>(inst.net.size()));
        for (VarId v : inst.S) s.bind(v, static_cast<int>(rng.uniform_int(2)));

        const NeighborScores scores = all_neighbor_scores(inst.net, inst.S, s, inst.e, trace, ws);
        std::vector<VarId> sorted_s = inst.S;
        std::sort(sorted_s.begin(), sorted_s.end());
        REQUIRE(scores.vars == sorted_s);

        REQUIRE(oracle::close(scores.base,
                              oracle_eval(inst.net, [&] {
                                  Assignment full = inst.e;
                                  for (VarId v : inst.S) full.bind(v, s.value(v));
                                  return full;
                              }())));

        for (std::size_t k = 0; k < scores.vars.size(); ++k) {
            const VarId v = scores.vars[k];
            ScaledReal total(0.0);
            for (int x = 0; x < inst.net.cardinality(v); ++x) {
                const ScaledReal& entry = scores.scores[k][static_cast<std::size_t>(x)];
                // brute-force Pr(s - X, x, e)
                std::vector<int> vals;
                for (VarId q : sorted_s) vals.push_back(q == v ? x : s.value(q));
                REQUIRE(oracle::close(entry, oracle::map_score(inst.net, sorted_s, vals, inst.e)));
                REQUIRE(entry.to_double() <= 1.0 + 1e-12);
                total += entry;
            }
            // current-value entry equals the base score
            REQUIRE(rel_close(scores.scores[k][static_cast<std::size_t>(s.value(v))], scores.base,
                              1e-9));
            // marginal consistency: summing over x frees the variable
            Assignment freed = inst.e;
            for (VarId q : inst.S)
                if (q != v) freed.bind(q, s.value(q));
            REQUIRE(oracle::close(total, oracle_eval(inst.net, freed)));
        }
    }
}

TEST_CASE("workspaces replay bitwise", "[trace]") {
    const auto inst = fixtures::random_instance(42, 12, 0.25, 0.5);
    const Trace trace(inst.net, fixtures::mf_order(inst.net));
    Trace::Workspace w1 = trace.make_workspace();
    Trace::Workspace w2 = trace.make_workspace();

    const ScaledReal a = trace.evaluate(inst.e, w1);
    const ScaledReal b = trace.evaluate(inst.e, w2);
    CHECK(a.mantissa() == b.mantissa());
    CHECK(a.exponent() == b.exponent());

    // a reused workspace (after unrelated work) produces the same answer
    trace.differentiate(Assignment(static_cast<std::size_t>(inst.net.size())), w1);
    const ScaledReal c = trace.evaluate(inst.e, w1);
    CHECK(a.mantissa() == c.mantissa());
    CHECK(a.exponent() == c.exponent());
}

TEST_CASE("trace arithmetic survives the 150-variable chain", "[trace][scaled]") {
    // same construction as the inference test: staying at value 0 costs 2^-64 a link
    const double tiny = std::ldexp(1.0, -64);
    std::vector<Variable> vars;
    std::vector<Cpt> cpts;
    for (VarId v = 0; v < 150; ++v) {
        vars.push_back({v, "X" + std::to_string(v), 2});
        if (v == 0)
            cpts.push_back({v, {}, {tiny, 1.0 - tiny}});
        else
            cpts.push_back({v, {v - 1}, {tiny, 1.0 - tiny, 0.5, 0.5}});
    }
    const BayesianNetwork net(std::move(vars), std::move(cpts));
    const Trace trace(net, fixtures::mf_order(net));
    Trace::Workspace ws = trace.make_workspace();

    Assignment zeros(150);
    for (VarId v = 0; v < 150; ++v) zeros.bind(v, 0);
    const ScaledReal p = trace.evaluate(zeros, ws);
    REQUIRE_FALSE(p.is_zero());
    CHECK(p.log2() == Catch::Approx(-9600.0));

    trace.differentiate(zeros, ws);
    REQUIRE(rel_close(trace.derivative(ws, 0, 0), p, 1e-9));
    // flipping the deep end of the chain still yields a finite, nonzero score
    const ScaledReal flipped = trace.derivative(ws, 0, 1);
    REQUIRE_FALSE(flipped.is_zero());
    CHECK(std::isfinite(flipped.log2()));
    CHECK(flipped.log2() < -9000.0);
}

TEST_CASE("trace size grows with the network, not the state space", "[trace]") {
    const auto small = fixtures::random_instance(7, 12, 0.15, 0.5);
    const auto large = fixtures::random_instance(7, 60, 0.05, 0.5);
    const Trace t_small(small.net, fixtures::mf_order(small.net));
    const Trace t_large(large.net, fixtures::mf_order(large.net));
    CHECK(t_small.node_count() > 0);
    CHECK(t_large.node_count() > t_small.node_count());
    CHECK(t_large.node_count() < 200000); // far below 2^60 states
}

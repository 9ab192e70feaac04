#ifndef MAPSEARCH_TESTS_ORACLES_HPP
#define MAPSEARCH_TESTS_ORACLES_HPP

// Brute-force long-double reference implementations for the tests. Everything
// here enumerates the joint distribution directly from the CPT tables — none
// of the library's factor / elimination / scaled-arithmetic machinery is
// involved, so agreement between the two sides is meaningful evidence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <mapsearch/bn.hpp>
#include <mapsearch/scaled_real.hpp>

namespace oracle {

using mapsearch::Assignment;
using mapsearch::BayesianNetwork;
using mapsearch::Cpt;
using mapsearch::VarId;

// Joint probability of one complete state (values indexed by variable id).
// Indexes the CPT tables per the documented layout: parents ascending, last
// parent fastest, child value innermost.
inline long double joint(const BayesianNetwork& net, const std::vector<int>& state) {
    long double p = 1.0L;
    for (VarId v = 0; v < net.size(); ++v) {
        const Cpt& c = net.cpt(v);
        std::size_t row = 0;
        for (VarId q : c.parents)
            row = row * static_cast<std::size_t>(net.cardinality(q)) +
                  static_cast<std::size_t>(state[static_cast<std::size_t>(q)]);
        p *= static_cast<long double>(
            c.table[row * static_cast<std::size_t>(net.cardinality(v)) +
                    static_cast<std::size_t>(state[static_cast<std::size_t>(v)])]);
    }
    return p;
}

// Visit every complete state consistent with e, lexicographically (variable 0
// most significant).
template <typename Fn>
void for_each_completion(const BayesianNetwork& net, const Assignment& e, Fn&& fn) {
    const VarId n = net.size();
    std::vector<int> state(static_cast<std::size_t>(n), 0);
    std::vector<VarId> free;
    for (VarId v = 0; v < n; ++v) {
        if (e.is_bound(v))
            state[static_cast<std::size_t>(v)] = e.value(v);
        else
            free.push_back(v);
    }
    for (;;) {
        fn(static_cast<const std::vector<int>&>(state));
        std::size_t k = free.size();
        while (k > 0) {
            const VarId v = free[k - 1];
            int& x = state[static_cast<std::size_t>(v)];
            if (++x < net.cardinality(v)) break;
            x = 0;
            --k;
        }
        if (k == 0) return;
    }
}

inline long double pr_evidence(const BayesianNetwork& net, const Assignment& e) {
    long double sum = 0.0L;
    for_each_completion(net, e, [&](const std::vector<int>& st) { sum += joint(net, st); });
    return sum;
}

// Pr(X = x, e) for every variable and value; a bound variable carries all its
// mass on the bound value.
inline std::vector<std::vector<long double>> marginals(const BayesianNetwork& net,
                                                       const Assignment& e) {
    std::vector<std::vector<long double>> m(static_cast<std::size_t>(net.size()));
    for (VarId v = 0; v < net.size(); ++v)
        m[static_cast<std::size_t>(v)].assign(static_cast<std::size_t>(net.cardinality(v)), 0.0L);
    for_each_completion(net, e, [&](const std::vector<int>& st) {
        const long double p = joint(net, st);
        for (VarId v = 0; v < net.size(); ++v)
            m[static_cast<std::size_t>(v)][static_cast<std::size_t>(
                st[static_cast<std::size_t>(v)])] += p;
    });
    return m;
}

struct Best {
    std::vector<int> state; // complete state (mpe) or values parallel to sorted S (map)
    long double p = -1.0L;
};

// Most probable completion of e; ties keep the lexicographically first state.
inline Best mpe(const BayesianNetwork& net, const Assignment& e) {
    Best best;
    for_each_completion(net, e, [&](const std::vector<int>& st) {
        const long double p = joint(net, st);
        if (p > best.p) {
            best.p = p;
            best.state = st;
        }
    });
    return best;
}

// Pr(S = s_vals, e) with s_vals parallel to S.
inline long double map_score(const BayesianNetwork& net, const std::vector<VarId>& S,
                             const std::vector<int>& s_vals, const Assignment& e) {
    Assignment ext = e;
    for (std::size_t i = 0; i < S.size(); ++i) ext.bind(S[i], s_vals[i]);
    return pr_evidence(net, ext);
}

// Argmax over instantiations of S of Pr(s, e); ties keep the lexicographically
// first instantiation (S sorted ascending, earlier variable more significant).
inline Best map(const BayesianNetwork& net, std::vector<VarId> S, const Assignment& e) {
    std::sort(S.begin(), S.end());
    Best best;
    std::vector<int> s_vals(S.size(), 0);
    for (;;) {
        const long double p = map_score(net, S, s_vals, e);
        if (p > best.p) {
            best.p = p;
            best.state = s_vals;
        }
        std::size_t k = S.size();
        while (k > 0) {
            if (++s_vals[k - 1] < net.cardinality(S[k - 1])) break;
            s_vals[k - 1] = 0;
            --k;
        }
        if (k == 0) return best;
    }
}

// Relative closeness between a library score and an oracle value, judged in
// log space so probabilities far below double range still compare: |a - b| <=
// tol * max(a, b) becomes |log2 a - log2 b| <= log2(1 + tol).
inline bool close(const mapsearch::ScaledReal& a, long double b, long double tol = 1e-9L) {
    if (a.is_zero() || b == 0.0L) return a.is_zero() && b == 0.0L;
    const long double band = std::log2(1.0L + tol);
    const long double gap = static_cast<long double>(a.log2()) - std::log2(b);
    return (gap < 0.0L ? -gap : gap) <= band;
}

inline bool close(long double a, long double b, long double tol = 1e-9L) {
    const long double diff = a >= b ? a - b : b - a;
    const long double mag = std::max(a >= 0.0L ? a : -a, b >= 0.0L ? b : -b);
    return diff <= tol * mag;
}

} // namespace oracle

#endif

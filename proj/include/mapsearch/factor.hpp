// factor.hpp -- nonnegative tables over variable scopes with a power-of-two
// scale offset, plus the product / marginalization / restriction kernels used
// by variable elimination.
#ifndef MAPSEARCH_FACTOR_HPP
#define MAPSEARCH_FACTOR_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bn.hpp"
#include "scaled_real.hpp"

namespace mapsearch {

// A factor holds values * 2^log2_offset. After every operation the table is
// rescaled so its maximum lies in [0.5, 1); the scale moves into the offset.
// Rescaling is by exact powers of two and costs no precision.
struct Factor {
    std::vector<VarId> scope; // strictly increasing
    std::vector<int> cards;   // parallel to scope
    std::vector<double> values; // row-major, last scope variable fastest
    std::int64_t log2_offset = 0;

    static Factor unit() {
        Factor f;
        f.values = {1.0};
        return f;
    }

    std::size_t cell_count() const { return values.size(); }

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

    void normalize() {
        double mx = 0.0;
        for (double v : values) mx = std::max(mx, v);
        if (mx == 0.0) return;
        int k = 0;
        std::frexp(mx, &k);
        if (k == 0) return;
        const double scale = std::ldexp(1.0, -k);
        for (double& v : values) v *= scale;
        log2_offset += k;
    }

    // Only meaningful for empty-scope factors.
    ScaledReal scalar() const {
        assert(scope.empty() && values.size() == 1);
        return ScaledReal::from_parts(values[0], log2_offset);
    }
};

namespace detail {

inline std::size_t table_size(const std::vector<int>& cards) {
    std::size_t n = 1;
    for (int c : cards) n *= static_cast<std::size_t>(c);
    return n;
}

// Strides of each result dimension inside an operand laid out last-fastest;
// dimensions absent from the operand get stride 0.
inline std::vector<std::size_t> strides_in(const std::vector<VarId>& result_scope,
                                           const Factor& f) {
    std::vector<std::size_t> own(f.scope.size());
    std::size_t s = 1;
    for (std::size_t i = f.scope.size(); i-- > 0;) {
        own[i] = s;
        s *= static_cast<std::size_t>(f.cards[i]);
    }
    std::vector<std::size_t> out(result_scope.size(), 0);
    for (std::size_t d = 0; d < result_scope.size(); ++d) {
        const int p = f.position_of(result_scope[d]);
        if (p >= 0) out[d] = own[static_cast<std::size_t>(p)];
    }
    return out;
}

} // namespace detail

inline Factor factor_product(const Factor& a, const Factor& b) {
    Factor r;
    r.log2_offset = a.log2_offset + b.log2_offset;
    // merge scopes (both strictly increasing)
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
            assert(a.cards[i] == b.cards[j]);
            r.scope.push_back(a.scope[i]);
            r.cards.push_back(a.cards[i]);
            ++i;
            ++j;
        }
    }
    const std::size_t total = detail::table_size(r.cards);
    r.values.resize(total);
    const auto sa = detail::strides_in(r.scope, a);
    const auto sb = detail::strides_in(r.scope, b);
    const std::size_t nd = r.scope.size();
    std::vector<std::size_t> digit(nd, 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t cell = 0;;) {
        r.values[cell] = a.values[ia] * b.values[ib];
        if (++cell == total) break;
        // odometer increment, last dimension fastest
        for (std::size_t d = nd; d-- > 0;) {
            ia += sa[d];
            ib += sb[d];
            if (++digit[d] < static_cast<std::size_t>(r.cards[d])) break;
            digit[d] = 0;
            ia -= sa[d] * static_cast<std::size_t>(r.cards[d]);
            ib -= sb[d] * static_cast<std::size_t>(r.cards[d]);
        }
    }
    r.normalize();
    return r;
}

namespace detail {

// Shared loop shape for summing/maxing/slicing one variable out of a factor.
template <typename PerCell>
inline Factor drop_var(const Factor& f, VarId v, PerCell&& per_cell) {
    const int p = f.position_of(v);
    assert(p >= 0);
    Factor r;
    r.log2_offset = f.log2_offset;
    r.scope.reserve(f.scope.size() - 1);
    r.cards.reserve(f.scope.size() - 1);
    for (std::size_t i = 0; i < f.scope.size(); ++i)
        if (static_cast<int>(i) != p) {
            r.scope.push_back(f.scope[i]);
            r.cards.push_back(f.cards[i]);
        }
    std::size_t block = 1;
    for (std::size_t i = static_cast<std::size_t>(p) + 1; i < f.scope.size(); ++i)
        block *= static_cast<std::size_t>(f.cards[i]);
    const auto nx = static_cast<std::size_t>(f.cards[static_cast<std::size_t>(p)]);
    const std::size_t outer = f.values.size() / (nx * block);
    r.values.resize(outer * block);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t in_base = o * nx * block;
        const std::size_t out_base = o * block;
        for (std::size_t k = 0; k < block; ++k)
            per_cell(out_base + k, in_base + k, block, nx, r);
    }
    return r;
}

} // namespace detail

inline Factor sum_out(const Factor& f, VarId v) {
    Factor r = detail::drop_var(
        f, v,
        [&](std::size_t out, std::size_t in, std::size_t block, std::size_t nx, Factor& dst) {
            double acc = 0.0;
            for (std::size_t x = 0; x < nx; ++x) acc += f.values[in + x * block];
            dst.values[out] = acc;
        });
    r.normalize();
    return r;
}

struct MaxOutResult {
    Factor factor;
    std::vector<int> argmax; // parallel to factor.values; ties keep the lowest value
};

inline MaxOutResult max_out(const Factor& f, VarId v) {
    MaxOutResult res;
    // drop_var visits result cells in strictly increasing order, so push_back
    // keeps argmax parallel to the value table.
    res.factor = detail::drop_var(
        f, v,
        [&](std::size_t out, std::size_t in, std::size_t block, std::size_t nx, Factor& dst) {
            double best = f.values[in];
            std::size_t best_x = 0;
            for (std::size_t x = 1; x < nx; ++x) {
                const double val = f.values[in + x * block];
                if (val > best) {
                    best = val;
                    best_x = x;
                }
            }
            dst.values[out] = best;
            assert(res.argmax.size() == out);
            res.argmax.push_back(static_cast<int>(best_x));
        });
    res.factor.normalize();
    return res;
}

inline Factor restrict_var(const Factor& f, VarId v, int x) {
    Factor r = detail::drop_var(
        f, v,
        [&](std::size_t out, std::size_t in, std::size_t block, std::size_t /*nx*/, Factor& dst) {
            dst.values[out] = f.values[in + static_cast<std::size_t>(x) * block];
        });
    r.normalize();
    return r;
}

// CPT as a factor over sorted(parents + child).
inline Factor factor_from_cpt(const BayesianNetwork& net, VarId child) {
    const Cpt& c = net.cpt(child);
    Factor f;
    f.scope = c.parents;
    f.scope.push_back(child);
    std::sort(f.scope.begin(), f.scope.end());
    f.cards.reserve(f.scope.size());
    for (VarId v : f.scope) f.cards.push_back(net.cardinality(v));
    f.values.resize(detail::table_size(f.cards));

    const auto child_card = static_cast<std::size_t>(net.cardinality(child));
    const std::size_t nd = f.scope.size();
    std::vector<std::size_t> digit(nd, 0);
    for (std::size_t cell = 0;;) {
        // cpt index: parents in id order (they are sorted), last fastest; child innermost
        std::size_t row = 0;
        std::size_t child_val = 0;
        for (std::size_t d = 0; d < nd; ++d) {
            if (f.scope[d] == child)
                child_val = digit[d];
            else
                row = row * static_cast<std::size_t>(f.cards[d]) + digit[d];
        }
        f.values[cell] = c.table[row * child_card + child_val];
        if (++cell == f.values.size()) break;
        for (std::size_t d = nd; d-- > 0;) {
            if (++digit[d] < static_cast<std::size_t>(f.cards[d])) break;
            digit[d] = 0;
        }
    }
    f.normalize();
    return f;
}

} // namespace mapsearch

#endif

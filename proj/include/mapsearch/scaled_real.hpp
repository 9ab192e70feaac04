// scaled_real.hpp -- nonnegative reals carried as mantissa * 2^exponent.
#ifndef MAPSEARCH_SCALED_REAL_HPP
#define MAPSEARCH_SCALED_REAL_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace mapsearch {

// A nonnegative real m * 2^e with m in [0.5, 1), or exactly zero.
// Scaling by powers of two is exact in binary floating point, so this
// representation survives products of thousands of probabilities without
// introducing rounding beyond ordinary double arithmetic at a common scale.
class ScaledReal {
public:
    ScaledReal() = default;

    explicit ScaledReal(double v) {
        assert(v >= 0.0 && std::isfinite(v));
        if (v != 0.0) {
            int k = 0;
            m_ = std::frexp(v, &k);
            e_ = k;
        }
    }

    static ScaledReal zero() { return {}; }
    static ScaledReal one() { return ScaledReal(1.0); }
    static ScaledReal from_parts(double mantissa, std::int64_t exp2) {
        ScaledReal r;
        if (mantissa != 0.0) {
            int k = 0;
            r.m_ = std::frexp(mantissa, &k);
            r.e_ = exp2 + k;
        }
        return r;
    }

    bool is_zero() const { return m_ == 0.0; }
    double mantissa() const { return m_; }
    std::int64_t exponent() const { return e_; }

    // log base 2; -inf for zero.
    double log2() const {
        if (m_ == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log2(m_) + static_cast<double>(e_);
    }

    // Collapses to a plain double; underflows to 0 / overflows to inf
    // when the exponent leaves double range.
    double to_double() const {
        if (m_ == 0.0) return 0.0;
        if (e_ > 1100) return std::numeric_limits<double>::infinity();
        if (e_ < -1200) return 0.0;
        return std::ldexp(m_, static_cast<int>(e_));
    }

    friend ScaledReal operator*(ScaledReal a, ScaledReal b) {
        if (a.m_ == 0.0 || b.m_ == 0.0) return {};
        ScaledReal r;
        r.m_ = a.m_ * b.m_; // in [0.25, 1)
        r.e_ = a.e_ + b.e_;
        if (r.m_ < 0.5) {
            r.m_ *= 2.0;
            --r.e_;
        }
        return r;
    }

    friend ScaledReal operator+(ScaledReal a, ScaledReal b) {
        if (a.m_ == 0.0) return b;
        if (b.m_ == 0.0) return a;
        if (a.e_ < b.e_) std::swap(a, b);
        const std::int64_t d = a.e_ - b.e_;
        double m = a.m_;
        if (d < 1100) m += std::ldexp(b.m_, static_cast<int>(-d));
        ScaledReal r;
        int k = 0;
        r.m_ = std::frexp(m, &k);
        r.e_ = a.e_ + k;
        return r;
    }

    ScaledReal& operator*=(ScaledReal o) { return *this = *this * o; }
    ScaledReal& operator+=(ScaledReal o) { return *this = *this + o; }

    friend bool operator==(ScaledReal a, ScaledReal b) {
        return a.m_ == b.m_ && (a.m_ == 0.0 || a.e_ == b.e_);
    }
    friend bool operator!=(ScaledReal a, ScaledReal b) { return !(a == b); }
    friend bool operator<(ScaledReal a, ScaledReal b) {
        if (a.m_ == 0.0) return b.m_ != 0.0;
        if (b.m_ == 0.0) return false;
        if (a.e_ != b.e_) return a.e_ < b.e_;
        return a.m_ < b.m_;
    }
    friend bool operator>(ScaledReal a, ScaledReal b) { return b < a; }
    friend bool operator<=(ScaledReal a, ScaledReal b) { return !(b < a); }
    friend bool operator>=(ScaledReal a, ScaledReal b) { return !(a < b); }

private:
    double m_ = 0.0;
    std::int64_t e_ = 0;
};

// |a-b| <= tol * max(a, b), with two zeros counting as equal.
inline bool rel_close(double a, double b, double tol) {
    const double hi = std::max(std::abs(a), std::abs(b));
    if (hi == 0.0) return true;
    return std::abs(a - b) <= tol * hi;
}

inline bool rel_close(ScaledReal a, ScaledReal b, double tol) {
    if (a.is_zero() && b.is_zero()) return true;
    if (a.is_zero() || b.is_zero()) return false;
    // compare in log space: |log2 a - log2 b| <= log2(1+tol) ~= tol/ln2
    const double band = std::log2(1.0 + tol);
    return std::abs(a.log2() - b.log2()) <= band;
}

} // namespace mapsearch

#endif

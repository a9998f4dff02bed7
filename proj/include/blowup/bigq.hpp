#pragma once

// Exact integer/rational scalars used by the symbolic layers.
// Backed by Boost.Multiprecision (header-only, arbitrary precision):
// Hermite product linearization overflows int64 already around m+n ~ 26.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace blowup {

using BigInt = boost::multiprecision::cpp_int;
using BigQ = boost::multiprecision::cpp_rational;

inline double to_double(const BigQ& q) { return q.template convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.template convert_to<double>(); }

inline std::string to_string(const BigQ& q) {
    if (boost::multiprecision::denominator(q) == 1)
        return boost::multiprecision::numerator(q).str();
    return boost::multiprecision::numerator(q).str() + "/" +
           boost::multiprecision::denominator(q).str();
}

inline BigInt factorial(int n) {
    BigInt f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline BigInt int_pow(const BigInt& b, int e) {
    BigInt r = 1;
    for (int k = 0; k < e; ++k) r *= b;
    return r;
}

inline BigQ int_pow(const BigQ& b, int e) {
    BigQ r = 1;
    for (int k = 0; k < (e >= 0 ? e : -e); ++k) r *= b;
    return e >= 0 ? r : BigQ(1) / r;
}

inline BigInt int_pow(int b, int e) { return int_pow(BigInt(b), e); }

}  // namespace blowup

#pragma once

#include <cmath>
#include <string>

#include "lindyn/core.hpp"

namespace lindyn {

/// Growth class of a positive sequence, up to a bounded positive oscillation:
///
///     u_n  =  Theta( (n!)^factorial * e^{rate*n} * n^poly * (log n)^logpow )
///
/// This is exact for the closed-form norm generators and eventually periodic
/// weight products handled by the toolkit; anything outside that vocabulary is
/// marked unknown and every classifier downstream answers Undecided.
struct Growth {
    bool known{true};
    double factorial{0.0};
    double rate{0.0};  // log of the geometric ratio
    double poly{0.0};
    double logpow{0.0};

    static Growth constant() { return {}; }
    static Growth geometric(double log_ratio) { return {true, 0.0, log_ratio, 0.0, 0.0}; }
    static Growth polynomial(double degree) { return {true, 0.0, 0.0, degree, 0.0}; }
    static Growth logarithmic(double power) { return {true, 0.0, 0.0, 0.0, power}; }
    static Growth factorial_type(double deg) { return {true, deg, 0.0, 0.0, 0.0}; }
    static Growth unknown() { return {false, 0.0, 0.0, 0.0, 0.0}; }

    Growth operator*(const Growth& o) const {
        if (!known || !o.known) return unknown();
        return {true, factorial + o.factorial, rate + o.rate, poly + o.poly, logpow + o.logpow};
    }
    Growth inverse() const {
        if (!known) return unknown();
        return {true, -factorial, -rate, -poly, -logpow};
    }
    Growth operator/(const Growth& o) const { return *this * o.inverse(); }

    std::string describe() const;
};

enum class SeriesClass { Divergent, Convergent, Undecided };
enum class SeqLimit { Zero, Infinity, BoundedPositive, Undecided };

const char* to_string(SeriesClass c);
const char* to_string(SeqLimit l);

/// Classification of sum(u_n) for u_n of the given growth class.
/// The bounded oscillation does not affect the outcome in any of the cases
/// decided here; ties on the geometric rate use kLogTol.
SeriesClass classify_series(const Growth& g);

/// Limit behaviour of the sequence u_n itself.
SeqLimit sequence_limit(const Growth& g);

}  // namespace lindyn

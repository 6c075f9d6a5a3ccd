#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lindyn {

inline constexpr std::string_view kVersion = "0.1.0";

using Scalar = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerance for comparisons of exact log-magnitude quantities against the
/// thresholds 0 (log scale) resp. 1 (linear scale). Products are accumulated
/// in log space with relative error below this per factor.
inline constexpr double kLogTol = 1e-12;

enum class Trilean { Yes, No, Undecided };

inline const char* to_string(Trilean t) {
    switch (t) {
        case Trilean::Yes: return "yes";
        case Trilean::No: return "no";
        default: return "undecided";
    }
}

/// Certified enclosure [lower, upper] of a nonnegative quantity.
struct Interval {
    double lower{0.0};
    double upper{0.0};

    static Interval exact(double v) { return {v, v}; }

    Interval operator+(const Interval& o) const { return {lower + o.lower, upper + o.upper}; }

    /// Three-valued comparison "value <= threshold".
    Trilean le(double threshold) const {
        if (upper <= threshold) return Trilean::Yes;
        if (lower > threshold) return Trilean::No;
        return Trilean::Undecided;
    }
    /// Three-valued comparison "value < threshold".
    Trilean lt(double threshold) const {
        if (upper < threshold) return Trilean::Yes;
        if (lower >= threshold) return Trilean::No;
        return Trilean::Undecided;
    }
};

/// Scalar kept as (log-magnitude, phase) so that long weight products never
/// overflow; zero is carried as an explicit flag.
struct LogMag {
    bool zero{false};
    double log_mag{0.0};
    double phase{0.0};

    static LogMag one() { return {}; }
    static LogMag from(Scalar z) {
        if (z == Scalar{0.0, 0.0}) return {true, 0.0, 0.0};
        return {false, std::log(std::abs(z)), std::arg(z)};
    }

    LogMag operator*(const LogMag& o) const {
        if (zero || o.zero) return {true, 0.0, 0.0};
        return {false, log_mag + o.log_mag, phase + o.phase};
    }
    LogMag inverse() const {
        if (zero) throw std::domain_error("LogMag: inverse of zero");
        return {false, -log_mag, -phase};
    }
    LogMag pow(std::int64_t n) const {
        if (zero) return n == 0 ? one() : LogMag{true, 0.0, 0.0};
        return {false, log_mag * static_cast<double>(n), phase * static_cast<double>(n)};
    }
    double abs() const { return zero ? 0.0 : std::exp(log_mag); }
    Scalar value() const {
        if (zero) return {0.0, 0.0};
        return std::polar(std::exp(log_mag), phase);
    }
};

/// Coordinate address: block tag (nonzero only inside direct sums) + index.
struct Coord {
    std::int32_t block{0};
    std::int64_t index{0};
    auto operator<=>(const Coord&) const = default;
};

/// Finitely supported vector, canonical form (no explicit zeros stored),
/// entries sorted by coordinate.
class CoordinateVector {
public:
    using Entry = std::pair<Coord, Scalar>;

    CoordinateVector() = default;

    static CoordinateVector unit(std::int64_t index, Scalar c = Scalar{1.0, 0.0},
                                 std::int32_t block = 0) {
        CoordinateVector v;
        v.set({block, index}, c);
        return v;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t support_size() const { return entries_.size(); }

    Scalar at(Coord c) const {
        auto it = find(c);
        return it == entries_.end() ? Scalar{0.0, 0.0} : it->second;
    }
    Scalar at(std::int64_t index, std::int32_t block = 0) const { return at({block, index}); }

    void set(Coord c, Scalar v) {
        auto it = lower_bound(c);
        if (it != entries_.end() && it->first == c) {
            if (v == Scalar{0.0, 0.0})
                entries_.erase(it);
            else
                it->second = v;
        } else if (v != Scalar{0.0, 0.0}) {
            entries_.insert(it, {c, v});
        }
    }
    void add(Coord c, Scalar v) { set(c, at(c) + v); }

    CoordinateVector& operator+=(const CoordinateVector& o) {
        for (const auto& [c, v] : o.entries_) add(c, v);
        return *this;
    }
    CoordinateVector& operator-=(const CoordinateVector& o) {
        for (const auto& [c, v] : o.entries_) add(c, -v);
        return *this;
    }
    CoordinateVector& operator*=(Scalar s) {
        if (s == Scalar{0.0, 0.0}) {
            entries_.clear();
            return *this;
        }
        for (auto& [c, v] : entries_) v *= s;
        return *this;
    }

    friend CoordinateVector operator+(CoordinateVector a, const CoordinateVector& b) {
        a += b;
        return a;
    }
    friend CoordinateVector operator-(CoordinateVector a, const CoordinateVector& b) {
        a -= b;
        return a;
    }
    friend CoordinateVector operator*(Scalar s, CoordinateVector a) {
        a *= s;
        return a;
    }

    bool operator==(const CoordinateVector&) const = default;

    std::int64_t min_index() const;
    std::int64_t max_index() const;
    std::int32_t max_block() const;

private:
    std::vector<Entry> entries_;

    std::vector<Entry>::const_iterator find(Coord c) const {
        auto it = lower_bound(c);
        if (it != entries_.end() && it->first == c) return it;
        return entries_.end();
    }
    std::vector<Entry>::const_iterator lower_bound(Coord c) const {
        std::size_t lo = 0, hi = entries_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (entries_[mid].first < c)
                lo = mid + 1;
            else
                hi = mid;
        }
        return entries_.begin() + static_cast<std::ptrdiff_t>(lo);
    }
    std::vector<Entry>::iterator lower_bound(Coord c) {
        auto cit = static_cast<const CoordinateVector*>(this)->lower_bound(c);
        return entries_.begin() + (cit - entries_.cbegin());
    }
};

/// FNV-1a content hash used to reference serialized artifacts in reports.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t h);

}  // namespace lindyn

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lindyn/operators.hpp"

namespace lindyn {

/// A certified delta-chain: every step error interval has upper bound <= delta.
/// Objects of this type only come out of verify_chain (or builders that end by
/// calling it), so holding one is the certificate.
struct Chain {
    std::vector<CoordinateVector> points;
    double delta{0.0};
    std::vector<Interval> step_errors;

    std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }  // # steps
};

struct ChainCheck {
    enum class Status { Accepted, Rejected, Undecided };
    Status status{Status::Undecided};
    std::optional<Chain> chain;  // set iff Accepted
    std::size_t fail_index{0};
    Interval fail_interval;
};

ChainCheck verify_chain(const OperatorDescriptor& T, const std::vector<CoordinateVector>& points,
                        double delta);

enum class ChainStatus { ChainRecurrent, NotChainRecurrent, Undecided };
const char* to_string(ChainStatus s);

struct SeriesEvidence {
    int k{1};  // seminorm level (may exceed k_max for a symbolic witness)
    std::string side;  // "positive" / "negative"
    SeriesClass cls{SeriesClass::Undecided};
    std::string method;  // "asymptotic" / "numeric" / "degenerate-zero-norm"
    Growth term_growth;
    double partial_sum{0.0};
};

struct ChainVerdict {
    ChainStatus status{ChainStatus::Undecided};
    std::vector<SeriesEvidence> evidence;
    bool all_k_certified{false};  // divergence extends to every seminorm level
    std::string note;
};

/// Chain recurrence classifier for shifts and their algebra (scalar multiples,
/// powers, inverses, direct sums, diagonals). Decides the divergence of the
/// weight-product series per seminorm level from exact term asymptotics, with
/// a numeric partial-sum fallback (budget 10^6 terms, threshold 10^6) and
/// Undecided when neither route applies. Finite matrices are out of scope here
/// (use the grid oracle) and raise a domain error.
ChainVerdict classify_chain_recurrence(const OperatorDescriptor& T);

struct TransitivityVerdict {
    Trilean transitive{Trilean::Undecided};
    std::string evidence;
};

/// Companion transitivity test for shifts: searches for the canonical-vector
/// subsequence going to zero; bilateral inputs are probed over |j| <= j_window
/// as a necessary-condition proxy.
TransitivityVerdict transitivity_test(const OperatorDescriptor& T, std::int64_t j_window = 8);

struct ChainBuildResult {
    bool ok{false};
    Chain chain;
    std::string error;
};

/// Chain from 0 to e_i following the constructive recipe: pick the metric
/// threshold level, find the smallest m with the partial sum of the series
/// terms past i exceeding the 2/delta-style threshold, emit the telescoping
/// points, and certify the result with verify_chain.
ChainBuildResult build_chain_zero_to_e(const OperatorDescriptor& T, std::int64_t i, double delta,
                                       std::int64_t m_budget = 10'000'000);

/// Chain from e_{-i} to 0 for bilateral shifts (negative-series recipe).
ChainBuildResult build_chain_e_to_zero(const OperatorDescriptor& T, std::int64_t i, double delta,
                                       std::int64_t m_budget = 10'000'000);

/// Staircase chain from x to 0 for any x with bounded forward orbit: points
/// t_j T^j x on a uniform grid 1 = t_0 > ... > t_k = 0.
ChainBuildResult build_chain_to_zero_staircase(const OperatorDescriptor& T,
                                               const CoordinateVector& x, double delta,
                                               std::int64_t step_budget = 1'000'000);

/// Front-end for reaching 0: canonical bilateral-shift targets use the
/// negative-series recipe, everything else the bounded-orbit staircase.
ChainBuildResult build_chain_to_zero(const OperatorDescriptor& T, const CoordinateVector& x,
                                     double delta);

/// Blend two delta/4 loop chains (x -> x and y -> y) into a delta-chain from x
/// to y: repeat both to a common length k large enough that the 1/k cross
/// terms fit the budget, interpolate pointwise, certify.
ChainBuildResult interpolation_chain(const OperatorDescriptor& T, const Chain& loop_x,
                                     const Chain& loop_y, double delta);

/// Smallest seminorm level l with: ||x||_i < delta/2 for all i <= l implies
/// d(x, 0) < delta. Level 1 on single-norm spaces; requires 2^-l <= delta/2 on
/// Fréchet ones (domain error when delta is below the k_max metric resolution).
int metric_threshold_level(const SpaceSpec& space, double delta);

}  // namespace lindyn

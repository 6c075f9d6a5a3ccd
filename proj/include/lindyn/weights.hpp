#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lindyn/asymptotics.hpp"
#include "lindyn/core.hpp"

namespace lindyn {

enum class WeightDomain { Unilateral, Bilateral };

/// A weight sequence given as a finite explicit prefix plus eventually
/// periodic tails. This representation makes every product w_k ... w_{k+n}
/// exactly computable (in log-magnitude/phase form) and every geometric-mean
/// limit an exact cycle mean.
///
/// Layout: the prefix covers indices [prefix_start, prefix_start + len - 1].
/// For n beyond the prefix, w_n = tail_pos[(n - prefix_end - 1) mod L+].
/// For n below it (bilateral only), w_n = tail_neg[(prefix_start - 1 - n) mod L-],
/// i.e. tail_neg is read leftwards starting just below the prefix.
///
/// Two escape hatches cover weights outside that vocabulary:
///  - ramp: w_n = n (the derivative-operator model); unbounded, so the
///    shadowing classifiers refuse it, but products/continuity still work.
///  - irregular: evaluation uses the stored prefix/tails, but the asymptotic
///    structure is declared unknown and classifiers answer Undecided.
struct WeightSpec {
    enum class Kind { PrefixCycle, Ramp };

    WeightDomain domain{WeightDomain::Unilateral};
    Kind kind{Kind::PrefixCycle};
    std::vector<Scalar> prefix;
    std::int64_t prefix_start{1};
    std::vector<Scalar> tail_pos;
    std::vector<Scalar> tail_neg;
    Scalar scale{1.0, 0.0};  // uniform multiplier applied to every weight
    bool irregular{false};   // asymptotics unclassifiable; evaluation still defined

    static WeightSpec constant(Scalar c, WeightDomain d = WeightDomain::Unilateral);
    static WeightSpec unilateral_cycle(std::vector<Scalar> cycle,
                                       std::vector<Scalar> prefix = {},
                                       std::int64_t prefix_start = 1);
    static WeightSpec bilateral_cycles(std::vector<Scalar> neg, std::vector<Scalar> pos,
                                       std::vector<Scalar> prefix = {},
                                       std::int64_t prefix_start = 1);
    static WeightSpec ramp();  // w_n = n, n >= 1

    std::int64_t prefix_end() const {
        return prefix_start + static_cast<std::int64_t>(prefix.size()) - 1;
    }
    std::int64_t min_index() const;  // smallest valid index (unilateral: 1)

    Scalar at(std::int64_t n) const;
    LogMag log_at(std::int64_t n) const { return LogMag::from(at(n)); }

    bool bounded() const { return kind != Kind::Ramp; }
    bool inf_positive() const;  // inf |w_n| > 0 over the domain
    double sup_abs() const;     // +inf for ramp

    /// Scale every weight by a scalar (a scalar multiple of a shift is again
    /// a weighted shift).
    WeightSpec scaled(Scalar s) const;

    void validate() const;
    std::string render() const;
};

/// Exact product w_k * w_{k+1} * ... * w_{k+n} in log form.
LogMag weight_product(const WeightSpec& w, std::int64_t k, std::int64_t n);

/// Geometric mean of a nonempty cycle (log scale).
double cycle_log_gm(const std::vector<Scalar>& cycle);

enum class GmSide { Unilateral, BilateralPos, BilateralNeg, BilateralAllK };

/// Values of lim_n sup_k |w_k ... w_{k+n}|^(1/n) and the liminf twin, where k
/// ranges per `side`. For eventually periodic weights the limits are exact
/// cycle geometric means (for the all-k family, the extremes over the two
/// tail cycles; windows crossing the prefix interpolate between them and never
/// exceed the extremes in the limit). Ramp weights give +infinity; irregular
/// ones have no value.
struct GmLimits {
    std::optional<double> limsup_gm;
    std::optional<double> liminf_gm;
    std::string achieving_window;
};

GmLimits gm_limits(const WeightSpec& w, GmSide side);

/// Growth of n -> |w * w * ... (n factors from the tail direction)|, i.e. of
/// |w_{i0} ... w_{i0+n-1}| for forward products or |w_{-n+1} ... w_{0}|-style
/// backward ones. Bounded oscillation absorbed in the Growth contract.
Growth forward_product_growth(const WeightSpec& w);
Growth backward_product_growth(const WeightSpec& w);

/// Certified distortion constant: the least beta with
///     |w_{k} ... w_{k+n-1}| <= beta * exp(log_rate * n)
/// over all windows of the given sign region (side). Finite whenever
/// log_rate >= the relevant cycle mean. Used to build hyperbolic splitting
/// constants for shifts.
double product_distortion(const WeightSpec& w, GmSide side, double log_rate);

}  // namespace lindyn

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lindyn/chain.hpp"

namespace lindyn {

/// Finite indexed family of points with certified step errors. `start_index`
/// anchors the window (0 for forward trajectories, negative for Z-windows,
/// which are conceptually extended by zero outside the window). A periodic
/// trajectory stores one period; the wrap-around step is certified too.
struct Pseudotrajectory {
    std::vector<CoordinateVector> points;
    std::int64_t start_index{0};
    double delta{0.0};
    std::optional<int> period;
    std::vector<Interval> step_errors;  // includes the wrap step when periodic
    std::string provenance;

    std::int64_t lo() const { return start_index; }
    std::int64_t hi() const { return start_index + static_cast<std::int64_t>(points.size()) - 1; }

    /// Point at index j: modular for periodic trajectories, zero-extended
    /// outside the window otherwise.
    const CoordinateVector& at(std::int64_t j) const;
};

enum class PtMode { UniformNoise, AdversarialDrift, Periodic };

/// Seeded pseudotrajectory generator. Noise / drift scale is delta*(1 - 1e-6)
/// so the steps certify strictly below delta. With `per_seminorm` the noise is
/// bounded by delta in every seminorm level (used by contraction-bound
/// experiments); otherwise the bound is on the canonical metric. Periodic mode
/// closes the loop exactly by solving the period-p fixed-point equation for
/// the sampled defects.
Pseudotrajectory generate_pseudotrajectory(const OperatorDescriptor& T,
                                           const CoordinateVector& x0, double delta,
                                           std::int64_t horizon, std::uint64_t seed, PtMode mode,
                                           int period = 1, bool per_seminorm = false,
                                           std::int64_t support_radius = 100);

struct ShadowCertificate {
    CoordinateVector point;
    double epsilon{0.0};
    std::int64_t window_lo{0};
    std::int64_t window_hi{0};
    Interval max_error;
    double tail_bound{0.0};  // already folded into max_error.upper
    std::optional<double> periodic_residual;
};

struct ShadowCheck {
    enum class Status { Accepted, Rejected, Undecided };
    Status status{Status::Undecided};
    ShadowCertificate cert;
    std::int64_t worst_index{0};
};

/// d(x_j, T^j x) < eps over the window (negative indices via the inverse).
/// Periodic trajectories are checked over `periods_checked` repetitions.
ShadowCheck verify_shadowing(const OperatorDescriptor& T, const Pseudotrajectory& pt,
                             const CoordinateVector& x, double eps, int periods_checked = 3);

/// Forward-shadow a finite trajectory over N_0 through a hyperbolic
/// splitting: the M-part of x_0 is kept (contraction absorbs forward errors),
/// the N-part is corrected by the backward defect series truncated at
/// `n_tail` with the geometric tail bound folded into the certificate.
/// Fails when the tail bound alone exceeds eps.
struct ShadowResult {
    bool ok{false};
    std::string error;
    ShadowCertificate cert;
};
ShadowResult shadow_hyperbolic_split(const OperatorDescriptor& T, const HyperbolicSplitting& split,
                                     const Pseudotrajectory& pt, double eps, int n_tail = 128);

/// Periodic shadow from the double defect series; asserts T^p x = x up to the
/// reported residual and certifies sup_n d(x_n, T^n x) with tail bounds.
ShadowResult construct_periodic_shadow(const OperatorDescriptor& T,
                                       const HyperbolicSplitting& split,
                                       const Pseudotrajectory& pt, double eps,
                                       int truncation = 256);

/// Least-squares shadow of a finite chain on a finite-dimensional model:
/// minimizes sum_j ||x_j - T^j x||^2 over x supported on a window via the
/// normal equations, re-verifies against eps, and reports the empirical
/// linearity factor (achieved sup error / chain delta).
struct LeastSquaresShadow {
    bool ok{false};
    CoordinateVector point;
    double sup_error{0.0};
    double empirical_linearity{0.0};
    std::string error;
};
LeastSquaresShadow finite_shadow_least_squares(const OperatorDescriptor& T,
                                               std::span<const CoordinateVector> chain_points,
                                               double chain_delta, double eps);

/// Solver contract consumed by the finite-to-infinite bootstrap: delta-chains
/// are eps-shadowed whenever delta <= eps / linearity.
struct FiniteShadowSolver {
    std::function<std::optional<CoordinateVector>(std::span<const CoordinateVector>, double eps)>
        solve;
    double linearity{4.0};
    std::string name;
};

FiniteShadowSolver make_least_squares_solver(const OperatorDescriptor& T, double linearity);
FiniteShadowSolver make_hyperbolic_solver(const OperatorDescriptor& T,
                                          const HyperbolicSplitting& split);

/// Stagewise bootstrap from finite shadowing to a two-sided eps-shadow: blends
/// finite shadows of growing windows into pseudotrajectories with vanishing
/// defects, then runs the stage induction with the certified bounds
///   stage defects < delta/2^{k-1},  closeness < eps/2^k,
///   gaps ||v_k - v_{k+1}|| < eps/2^{k+2},
/// aborting on the first violated bound. The input pseudotrajectory is a
/// Z-window with zero extension (so its defects vanish off the window).
struct BootstrapStage {
    std::int64_t m_k{0};
    CoordinateVector v_k;
    double stage_shadow_error{0.0};  // sup over the stage window
    double gap_to_prev{0.0};         // ||v_{k-1} - v_k||, 0 for the first stage
    double gap_bound{0.0};
};
struct BootstrapResult {
    bool ok{false};
    std::string error;
    double delta{0.0};
    int p{0};
    std::int64_t blend_m{0};
    std::vector<BootstrapStage> stages;
    CoordinateVector limit_point;
    ShadowCheck final_check;
};
BootstrapResult finite_to_infinite_shadow(const OperatorDescriptor& T,
                                          const FiniteShadowSolver& solver,
                                          const Pseudotrajectory& pt, double eps, int stages);

/// Shadowing classification for weighted shifts on the plain l^p / c0 spaces
/// from the exact geometric-mean limits of the weight cycles.
struct ShadowingClassification {
    Trilean positive_shadowing{Trilean::Undecided};
    Trilean generalized_hyperbolic{Trilean::Undecided};
    Trilean hyperbolic{Trilean::Undecided};
    Trilean periodic_shadowing{Trilean::Undecided};
    std::string matched_condition;  // a / b / A / B / C / expansive-splitting / none
    GmLimits forward;
    GmLimits backward;  // bilateral only
    std::string note;
};
ShadowingClassification classify_shadowing(const OperatorDescriptor& T);

}  // namespace lindyn

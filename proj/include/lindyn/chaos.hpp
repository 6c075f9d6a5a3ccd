#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lindyn/shadowing.hpp"

namespace lindyn {

struct DensityEstimate {
    std::vector<std::pair<std::int64_t, double>> checkpoints;  // (n, card(I cap [1,n]) / n)
    double running_max{0.0};
    std::int64_t achieved_at{0};
    std::int64_t horizon{0};
};

/// Exact counting densities at the checkpoints; running_max estimates the
/// upper density from below.
DensityEstimate upper_density(const std::function<bool(std::int64_t)>& indicator,
                              std::int64_t horizon, const std::vector<std::int64_t>& checkpoints);

std::vector<std::int64_t> default_checkpoints(std::int64_t horizon);

/// Return-set search N_T(A, B) for balls A, B around finitely supported
/// centers: for each n the witness search tries the exact image of the center
/// plus single-coordinate corrections pulled back through the n-th image
/// (exact for diagonal-like coordinate actions). Absence of a witness is
/// reported as not-witnessed, never as proof.
struct ReturnSetResult {
    std::vector<std::int64_t> witnessed;
    bool cofinite_flag{false};
    std::int64_t cofinite_from{0};
    std::string note;
};
ReturnSetResult return_set(const OperatorDescriptor& T, const CoordinateVector& center_a,
                           double radius_a, const CoordinateVector& center_b, double radius_b,
                           std::int64_t horizon);

/// Orbit statistics for the distributional-chaos detector: I collects the
/// indices with d(T^n x, 0) < sigma, J those with ||T^n x||_m > Lambda.
struct DistributionalReport {
    DensityEstimate small_density;  // I
    DensityEstimate large_density;  // J
    double sigma{0.0};
    double lambda_threshold{0.0};
    int m{1};
    std::int64_t horizon{0};
    bool truncated{false};  // orbit scan stopped early on numeric overflow
    bool irregular_at_level{false};
    std::string note;
    // Per-n trace (d(T^n x, 0), ||T^n x||_m, in_I, in_J), filled on request.
    struct TraceRow {
        std::int64_t n{0};
        double dist{0.0};
        double norm_m{0.0};
        bool in_i{false};
        bool in_j{false};
    };
    std::vector<TraceRow> trace;
};

DistributionalReport detect_distributionally_irregular(const OperatorDescriptor& T,
                                                       const CoordinateVector& x,
                                                       std::int64_t horizon, double sigma,
                                                       double lambda_threshold, int m,
                                                       double density_target = 0.95,
                                                       bool collect_trace = false);

/// Dense nonnegative vector stored by log2-magnitudes (for orbit scans of
/// coordinate actions far beyond the double range).
struct LogDenseVector {
    std::vector<double> log2mag;  // index q >= 0; -inf entries are zeros
};

/// Block-plateau vector: |x_q| = 2^{-q} * level(q) with level(q) given by
/// alternating plateaus [b_i, b_{i+1}) at the two prescribed log2-levels
/// (small first). Under a constant-|weight| backward shift the orbit norm at
/// time n tracks level(n), which realizes the alternating decay/growth
/// pattern of a distributionally irregular vector.
LogDenseVector block_plateau_vector(const std::vector<std::int64_t>& boundaries,
                                    double small_log2_level, double large_log2_level,
                                    std::int64_t size);

/// Distributional report for x in log-dense form under a constant-|weight|
/// scaled backward shift on l^p: norms evaluated by log-domain summation, no
/// overflow up to arbitrary horizons.
DistributionalReport detect_distributionally_irregular_logdense(
    const OperatorDescriptor& T, const LogDenseVector& x, std::int64_t horizon, double sigma,
    double lambda_threshold, int m, double density_target = 0.95);

/// Condition (I) probe: for each battery vector and each delta, attempt a
/// certified chain to zero (negative-series recipe or staircase).
struct ConditionIReport {
    struct Item {
        std::string vector_desc;
        double delta{0.0};
        bool witnessed{false};
        std::string how;
    };
    std::vector<Item> items;
    bool witnessed_all{false};
};
ConditionIReport check_condition_I(const OperatorDescriptor& T,
                                   const std::vector<CoordinateVector>& battery,
                                   const std::vector<double>& delta_schedule);

/// Condition (II) / (II') probe: search chains from 0 to a vector whose orbit
/// stays gamma-far from 0 on a large-density index set.
struct ConditionIIReport {
    bool witnessed{false};
    double gamma{0.0};
    double delta{0.0};
    std::string x_desc;
    double density{0.0};
    std::optional<Chain> chain;
    std::string note;
};
ConditionIIReport check_condition_II(const OperatorDescriptor& T, double gamma,
                                     const std::vector<double>& delta_schedule,
                                     std::int64_t horizon, bool banach_mode);

/// Closes an eta-loop at y into a periodic pseudotrajectory, shadows it, and
/// snaps the shadow to the exact period-k point of the shift; the multiples nk
/// then witness dens >= 1/k for the level set {j : ||T^j x|| >= 1}.
struct ChainToDensityResult {
    bool ok{false};
    std::string error;
    int k{0};
    CoordinateVector point;      // exact period-k point
    double distance_to_y{0.0};   // ||y - x|| (= ||y - T^{nk} x|| for every n)
    double density_lower{0.0};   // certified at the horizon checkpoints
    DensityEstimate density;
    std::int64_t horizon{0};
};
ChainToDensityResult chain_to_density(const OperatorDescriptor& T, const Chain& loop_y,
                                      std::int64_t horizon);

}  // namespace lindyn

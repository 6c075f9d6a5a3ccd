#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lindyn/asymptotics.hpp"
#include "lindyn/core.hpp"
#include "lindyn/weights.hpp"

namespace lindyn {

enum class IndexSet { Unilateral, Bilateral };

/// Köthe matrix given by a closed-form generator for a_{j,k}, or an explicit
/// finite table extended constantly in both directions.
enum class KoetheForm { Ones, KPowJ, JPowK, ExpNegJOverK, LogPowK, Table };

struct KoetheMatrix {
    KoetheForm form{KoetheForm::Ones};
    // Table rows indexed by j starting at 1; each row lists a_{j,1..K0}.
    std::vector<std::vector<double>> table;

    double entry(std::int64_t j, int k) const;

    /// Growth of j -> a_{j,k} for fixed k.
    Growth growth_in_j(int k) const;

    /// Probe of monotonicity a_{j,k} <= a_{j,k+1}. Returns the first violating
    /// (j, k) if any. The literal (log(j+1))^k generator violates it at j = 1.
    std::optional<std::pair<std::int64_t, int>> monotonicity_violation(std::int64_t j_probe,
                                                                       int k_probe) const;

    void validate(int k_probe) const;
    std::string render() const;
};

/// Diagonal weight family v for the weighted-l^p models; the implemented
/// convention is  ||x||^p = sum |x_j|^p v_j  (so ||e_n|| = v_n^{1/p}), and for
/// sup-type spaces  ||x|| = sup |x_j| v_j. Reports state this convention.
enum class DiagFamily { Ones, Dirichlet, Bergman, Table };

struct DiagWeights {
    DiagFamily family{DiagFamily::Ones};
    std::vector<double> table;       // values from table_start upward
    double table_tail{1.0};          // constant extension
    std::int64_t table_start{0};

    double value(std::int64_t n) const;
    Growth growth() const;
    std::string render() const;
};

/// A sequence space over N or Z with its (truncated) seminorm family.
/// Single-norm sources (Unit/Diag) are Banach spaces and use the norm metric;
/// Köthe sources are genuine Fréchet spaces and use the canonical metric with
/// the seminorm family evaluated up to k_max and a 2^-k_max tail bound.
struct SpaceSpec {
    enum class Source { Unit, Diag, Koethe };

    IndexSet index_set{IndexSet::Unilateral};
    std::int64_t origin{1};  // smallest index (unilateral only)
    double p{2.0};           // >= 1, or 0 for sup-type (c0 / lambda_0)
    int k_max{20};
    bool real_only{false};
    std::optional<std::int64_t> truncation_dim;  // finite-dimensional marker

    Source source{Source::Unit};
    DiagWeights diag;
    KoetheMatrix koethe;

    /// When set, the seminorms are the phi_v-transported ones for this shift
    /// weight: ||e_n||'_k = |v_n| * ||e_n||_k with v from the conjugacy.
    std::shared_ptr<const WeightSpec> transport;

    static SpaceSpec lp(double p, IndexSet ix = IndexSet::Unilateral, std::int64_t origin = 1);
    static SpaceSpec c0(IndexSet ix = IndexSet::Unilateral, std::int64_t origin = 1);
    static SpaceSpec weighted_l2(DiagFamily family, std::int64_t origin = 0);
    static SpaceSpec koethe_space(double p, KoetheForm form, int k_max = 20);
    static SpaceSpec finite(std::int64_t dim, double p = 2.0);

    bool single_norm() const { return source != Source::Koethe; }
    int levels() const { return single_norm() ? 1 : k_max; }
    bool sup_type() const { return p == 0.0; }
    bool in_index_set(std::int64_t n) const;

    double log_transport_multiplier(std::int64_t n) const;  // log |v_n|, 0 if none
    double log_canonical_norm(std::int64_t n, int k) const;  // -inf when the seminorm vanishes
    double canonical_norm(std::int64_t n, int k) const;

    /// Growth of n -> ||e_{+-n}||_k along the chosen direction.
    Growth canonical_growth(int k, bool negative_direction) const;

    void validate() const;
    std::string render() const;
    bool operator==(const SpaceSpec& o) const;
};

/// Exact finite-support evaluation of the k-th seminorm.
double seminorm_eval(const SpaceSpec& space, const CoordinateVector& x, int k);

/// Canonical-metric distance as a certified interval. Single-norm spaces give
/// the exact norm distance as a degenerate interval; Köthe spaces sum the
/// first k_max terms of sum 2^-k min(1, ||x-y||_k) and add the 2^-k_max tail.
Interval frechet_distance(const SpaceSpec& space, const CoordinateVector& x,
                          const CoordinateVector& y);

/// Seminorm / metric over a direct sum: block b of the vector lives in
/// components[b]; the block seminorms combine by the common p.
double seminorm_eval(const std::vector<SpaceSpec>& components, const CoordinateVector& x, int k);
Interval frechet_distance(const std::vector<SpaceSpec>& components, const CoordinateVector& x,
                          const CoordinateVector& y);

struct NormSequence {
    std::vector<double> values;
    Growth tag;
    std::string tag_text;
};

/// ||e_n||_k for n in [lo, hi] plus the term-asymptotics tag of the generator.
NormSequence canonical_norm_sequence(const SpaceSpec& space, int k, std::int64_t lo,
                                     std::int64_t hi);

/// The space X_v carrying the transported seminorms for the weight w, so that
/// classifying the unweighted shift on the result is equivalent to classifying
/// B_w on the input space.
SpaceSpec transport_conjugacy(const WeightSpec& w, const SpaceSpec& space);

}  // namespace lindyn

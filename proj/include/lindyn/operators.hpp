#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lindyn/spaces.hpp"

namespace lindyn {

struct OperatorDescriptor;
using OpPtr = std::shared_ptr<const OperatorDescriptor>;

/// Algebraic tree of operators. Every node is immutable after construction;
/// apply() is exact on finitely supported vectors for every kind.
struct OperatorDescriptor {
    struct Shift {
        WeightSpec w;  // backward shift; unilateral or bilateral per ambient
    };
    struct Diagonal {
        bool is_scalar{true};
        Scalar scalar{1.0, 0.0};
        std::vector<Scalar> table;
        Scalar table_tail{1.0, 0.0};
        std::int64_t table_start{0};
        Scalar value(std::int64_t n) const;
    };
    struct ScalarMultiple {
        Scalar lambda;
        OpPtr child;
    };
    struct Power {
        int n;
        OpPtr child;
    };
    struct Inverse {
        OpPtr child;
    };
    struct DirectSum {
        std::vector<OpPtr> children;  // child i acts on block range assigned to it
    };
    struct Matrix {
        Eigen::MatrixXcd m;
    };

    using Node = std::variant<Shift, Diagonal, ScalarMultiple, Power, Inverse, DirectSum, Matrix>;

    Node node;
    std::vector<SpaceSpec> ambient;  // flattened component spaces (one per block)

    static OperatorDescriptor backward_shift(WeightSpec w, SpaceSpec space);
    static OperatorDescriptor diagonal(Scalar lambda, SpaceSpec space);
    static OperatorDescriptor diagonal_table(std::vector<Scalar> values, Scalar tail,
                                             SpaceSpec space);
    static OperatorDescriptor matrix(Eigen::MatrixXcd m, double p = 2.0);
    static OperatorDescriptor identity(SpaceSpec space) {
        return diagonal(Scalar{1.0, 0.0}, std::move(space));
    }

    const SpaceSpec& space() const;  // single-component ambient, throws otherwise
    std::string render() const;
    std::string kind_name() const;
};

/// Exact image of a finitely supported vector.
CoordinateVector apply(const OperatorDescriptor& T, const CoordinateVector& x);

/// x -> T^n x (n may be negative when T is invertible).
CoordinateVector iterate(const OperatorDescriptor& T, CoordinateVector x, std::int64_t n);

bool is_invertible(const OperatorDescriptor& T);

enum class TransformKind { PowerOp, Rotate, InverseOp, DirectSumWith };
struct Transform {
    TransformKind kind;
    int power{1};
    Scalar rotation{1.0, 0.0};
    std::optional<OperatorDescriptor> other;  // DirectSumWith

    static Transform power_of(int n) { return {TransformKind::PowerOp, n, {1.0, 0.0}, {}}; }
    static Transform rotate(Scalar lambda) { return {TransformKind::Rotate, 1, lambda, {}}; }
    static Transform inverse() { return {TransformKind::InverseOp, 1, {1.0, 0.0}, {}}; }
    static Transform direct_sum_with(OperatorDescriptor u);
};

/// Algebraic wrapping; rotate requires |lambda| = 1 (tolerance 1e-12) and
/// inverse requires an invertible node.
OperatorDescriptor transform(const OperatorDescriptor& T, const Transform& op);

/// Continuity of B_w on a Köthe space: for each n, search m > n with
/// sup_i |w_{i+1}| a_{i,n} / a_{i+1,m} finite, deciding tails by term
/// asymptotics.
struct ContinuityVerdict {
    Trilean continuous{Trilean::Undecided};
    std::string witness;  // (n, m, sup) per n, or the divergent direction
};
ContinuityVerdict continuity_check_koethe(const WeightSpec& w, const KoetheMatrix& A, int k_max);

/// Hyperbolic splitting X = M (+) N with certified constants for shifts and
/// estimated ones (power iteration) for finite matrices:
///   ||T^n y|| <= beta t^n ||y||  (y in M),   ||S^n z|| <= beta t^n ||z||  (z in N),
/// projections bounded by alpha; c is the uniform constant of the expansive
/// variant. For coordinate splittings alpha = c = 1.
struct HyperbolicSplitting {
    enum class Kind { CoordThreshold, IndexSets };
    Kind kind{Kind::CoordThreshold};
    std::int64_t split_at{0};  // M = {index < split_at}; N = {index >= split_at}
    std::vector<std::int64_t> m_indices;  // IndexSets variant
    double alpha{1.0};
    double beta{1.0};
    double t{0.5};
    double c{1.0};
    bool estimated{false};

    bool in_m(std::int64_t index) const;
};

/// Splitting for a weighted shift from its exact cycle data. Fails (domain
/// error) when no geometric-mean condition separates the two sides.
HyperbolicSplitting make_shift_splitting(const WeightSpec& w, const SpaceSpec& space);

/// Splitting for a finite matrix with the given contracting index set;
/// constants estimated by power iteration and sampling, flagged `estimated`.
HyperbolicSplitting make_matrix_splitting(const Eigen::MatrixXcd& m,
                                          std::vector<std::int64_t> m_indices);

CoordinateVector project_m(const HyperbolicSplitting& s, const CoordinateVector& x);
CoordinateVector project_n(const HyperbolicSplitting& s, const CoordinateVector& x);

/// The backward map S = (T|_N)^{-1} restricted to N (a right inverse of T on
/// the expanding side). Supported for shifts, diagonals and matrices.
CoordinateVector apply_backward(const OperatorDescriptor& T, const HyperbolicSplitting& s,
                                const CoordinateVector& z);

/// Growth class of the plain weight values w_n (not products).
Growth value_growth(const WeightSpec& w);

}  // namespace lindyn

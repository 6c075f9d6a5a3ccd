#pragma once

#include <string>
#include <vector>

#include "lindyn/core.hpp"

namespace lindyn {

/// Multiplication-operator demo on the entire-functions model. Polynomials
/// are dense coefficient lists; the computable majorant seminorm
/// q_k(f) = sum |a_n| k^n stands in for the disk sup norm (it dominates it and
/// induces the same topology on polynomials) - every certificate below is
/// stated for q.
struct EntireDemoResult {
    bool ok{false};
    std::string error;
    Scalar lambda;
    int ell{0};
    double delta{0.0};
    int certified_steps{0};  // steps with both certificates below their bounds
    std::vector<double> cond_a;  // q_ell(lambda^j g - f_j), bound delta/(2|lambda|)
    std::vector<double> cond_b;  // q_ell(lambda f_{j-1} - f_j), bound delta/2
    struct Row {
        int horizon{0};
        int best_poly_degree{0};
        double error{0.0};  // inf over degree-bounded shadows of sup_j q_1(f_j - lambda^j f)
    };
    std::vector<Row> growth_table;
    std::string note;
};

/// Builds the inductive pseudotrajectory f_{k+1} := lambda f_k + p_k toward
/// lambda^j g for g(z) = sum_{n>=1} (z/ell)^n / n^2 (radius of convergence
/// exactly ell), certifies the two step inequalities on the majorant seminorm,
/// and tabulates the least-squares error of degree-bounded shadows against
/// growing horizons. Requires |lambda| > 1.
EntireDemoResult entire_demo(Scalar lambda, int ell, double delta, int horizon,
                             const std::vector<int>& table_horizons = {10, 20, 30},
                             int shadow_degree = 8, int max_degree = 1 << 17);

}  // namespace lindyn

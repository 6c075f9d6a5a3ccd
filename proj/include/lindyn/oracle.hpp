#pragma once

#include "lindyn/chain.hpp"

namespace lindyn {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Result of the grid-BFS chain oracle. When a chain is found it is verified
/// at delta; when none is found, the absence claim is certified for the
/// smaller threshold absence_delta = delta - (1 + ||T||) (sqrt(d)/2) h: any
/// chain at that threshold with points inside the box would snap onto a grid
/// path the BFS must have seen. The band between the two thresholds is
/// reported as such.
struct OracleResult {
    bool found{false};
    Chain chain;
    double absence_delta{0.0};
    std::string note;
    std::size_t nodes_explored{0};
};

/// BFS over the uniform grid of step `grid_step` in the box [-box_radius,
/// box_radius]^d (d <= 3), edges u -> v iff ||Tu - v|| <= delta. Endpoints are
/// snapped to the grid; chains from a point to itself have length >= 1.
/// Requires grid_step <= delta/2 and a real matrix operator.
OracleResult brute_force_chain_search(const OperatorDescriptor& T, const CoordinateVector& x,
                                      const CoordinateVector& y, double delta, double box_radius,
                                      double grid_step, std::size_t node_budget = 10'000'000);

}  // namespace lindyn

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lindyn/chaos.hpp"

using namespace lindyn;

namespace {

OperatorDescriptor scalar_diag(double v) {
    return OperatorDescriptor::diagonal({v, 0.0}, SpaceSpec::lp(2.0));
}

OperatorDescriptor doubled_shift(std::int64_t origin = 1) {
    return OperatorDescriptor::backward_shift(
        WeightSpec::constant({2.0, 0.0}), SpaceSpec::lp(2.0, IndexSet::Unilateral, origin));
}

}  // namespace

TEST_CASE("upper densities count exactly at checkpoints") {
    const auto cps = default_checkpoints(10000);
    const auto evens = upper_density([](std::int64_t n) { return n % 2 == 0; }, 10000, cps);
    CHECK(evens.running_max == doctest::Approx(0.5));
    CHECK(upper_density([](std::int64_t) { return true; }, 10000, cps).running_max == 1.0);
    const auto quarters = upper_density([](std::int64_t n) { return n % 4 == 0; }, 10000, cps);
    CHECK(quarters.running_max == doctest::Approx(0.25));
}

TEST_CASE("upper density subadditivity over unions") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> coin(0, 4);
    std::vector<bool> a(10001), b(10001);
    for (std::size_t i = 1; i <= 10000; ++i) {
        a[i] = coin(rng) == 0;
        b[i] = coin(rng) <= 1;
    }
    const auto cps = default_checkpoints(10000);
    const auto da = upper_density([&](std::int64_t n) { return a[static_cast<std::size_t>(n)]; },
                                  10000, cps);
    const auto db = upper_density([&](std::int64_t n) { return b[static_cast<std::size_t>(n)]; },
                                  10000, cps);
    const auto du = upper_density(
        [&](std::int64_t n) {
            return a[static_cast<std::size_t>(n)] || b[static_cast<std::size_t>(n)];
        },
        10000, cps);
    for (std::size_t i = 0; i < cps.size(); ++i)
        CHECK(du.checkpoints[i].second <=
              da.checkpoints[i].second + db.checkpoints[i].second + 1e-12);
}

TEST_CASE("return sets witness the fixed point and the mixing shift") {
    // 0 in A = B: every n is witnessed.
    const auto half = scalar_diag(0.5);
    const auto all = return_set(half, {}, 0.1, {}, 0.1, 64);
    CHECK(all.witnessed.size() == 65);
    CHECK(all.cofinite_from == 0);

    // Mixing doubled shift: cofinite from a small index.
    const auto r = return_set(doubled_shift(), CoordinateVector::unit(1), 0.5,
                              CoordinateVector::unit(1), 0.5, 64);
    CHECK(r.cofinite_flag);
    CHECK(r.cofinite_from <= 2);

    // Contraction: only n = 0 can be witnessed away from zero.
    const auto only0 = return_set(half, CoordinateVector::unit(1), 0.1,
                                  CoordinateVector::unit(1), 0.1, 64);
    CHECK(only0.witnessed == std::vector<std::int64_t>{0});
}

TEST_CASE("distributional report on contractions and dilations") {
    const auto half = scalar_diag(0.5);
    const auto r1 = detect_distributionally_irregular(half, CoordinateVector::unit(1), 2000,
                                                      1e-3, 1e3, 1);
    CHECK(r1.large_density.running_max == 0.0);
    CHECK(!r1.irregular_at_level);

    const auto two = scalar_diag(2.0);
    const auto r2 = detect_distributionally_irregular(two, CoordinateVector::unit(1), 500,
                                                      1e-3, 1e3, 1);
    CHECK(r2.small_density.running_max == 0.0);
    CHECK(!r2.irregular_at_level);

    // I and J disjoint; counting identity at each checkpoint.
    for (std::size_t i = 0; i < r1.small_density.checkpoints.size(); ++i)
        CHECK(r1.small_density.checkpoints[i].second + r1.large_density.checkpoints[i].second <=
              1.0 + 1e-12);
}

TEST_CASE("block plateau vector alternates orbit regimes") {
    const auto T0 = doubled_shift(0);
    const LogDenseVector x =
        block_plateau_vector({4, 40, 1000}, std::log2(1e-4), std::log2(1e4), 2200);
    const auto rep = detect_distributionally_irregular_logdense(T0, x, 2000, 1e-3, 1e3, 1, 0.9);
    CHECK(rep.small_density.running_max >= 0.9);
    CHECK(rep.large_density.running_max >= 0.9);
}

TEST_CASE("condition (I) battery") {
    const std::vector<CoordinateVector> battery{CoordinateVector::unit(1),
                                                CoordinateVector::unit(2)};
    const std::vector<double> deltas{0.5, 0.1};
    const auto half = check_condition_I(scalar_diag(0.5), battery, deltas);
    CHECK(half.witnessed_all);

    const auto B = OperatorDescriptor::backward_shift(WeightSpec::constant({1.0, 0.0}),
                                                      SpaceSpec::lp(2.0));
    CHECK(check_condition_I(B, battery, deltas).witnessed_all);

    const auto two = check_condition_I(scalar_diag(2.0), battery, {0.05});
    CHECK(!two.witnessed_all);
}

TEST_CASE("condition (II) battery") {
    const auto half = check_condition_II(scalar_diag(0.5), 1.0, {0.5, 0.1}, 4000, false);
    CHECK(!half.witnessed);

    const auto two = check_condition_II(scalar_diag(2.0), 1.0, {0.5, 0.1}, 4000, false);
    CHECK(two.witnessed);
    CHECK(two.density >= 0.95);

    const auto shift = check_condition_II(doubled_shift(), 0.125, {0.25}, 4000, true);
    CHECK(shift.witnessed);
}

TEST_CASE("chain_to_density on a near-exact cycle and on a built loop") {
    const auto T = doubled_shift();
    // Truncated fixed point of the doubled shift, scaled to norm >= 2.
    CoordinateVector y;
    for (std::int64_t q = 1; q <= 40; ++q)
        y.set({0, q}, Scalar{4.0 * std::ldexp(1.0, -static_cast<int>(q)), 0.0});
    REQUIRE(seminorm_eval(T.ambient, y, 1) >= 2.0);
    const auto cycle = verify_chain(T, {y, y}, 0.1);
    REQUIRE(cycle.status == ChainCheck::Status::Accepted);
    const auto r = chain_to_density(T, *cycle.chain, 2000);
    REQUIRE(r.ok);
    CHECK(r.k == 1);
    CHECK(r.distance_to_y < 1.0);
    CHECK(r.density.running_max >= 1.0 - 1e-12);

    // Documented failure path: a contraction admits no eta-loop at ||y|| >= 2.
    const auto half = scalar_diag(0.5);
    const CoordinateVector y2 = Scalar{2.0, 0.0} * CoordinateVector::unit(1);
    const auto no_loop = verify_chain(half, {y2, y2}, 0.1);
    CHECK(no_loop.status == ChainCheck::Status::Rejected);
}

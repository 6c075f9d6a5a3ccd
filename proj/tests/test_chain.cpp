#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lindyn/chain.hpp"
#include "lindyn/oracle.hpp"

using namespace lindyn;

namespace {

OperatorDescriptor scalar_1d(double v) {
    Eigen::MatrixXcd m(1, 1);
    m << Scalar{v, 0.0};
    return OperatorDescriptor::matrix(m);
}

OperatorDescriptor unweighted(SpaceSpec sp) {
    const WeightDomain d = sp.index_set == IndexSet::Bilateral ? WeightDomain::Bilateral
                                                               : WeightDomain::Unilateral;
    return OperatorDescriptor::backward_shift(WeightSpec::constant({1.0, 0.0}, d), std::move(sp));
}

CoordinateVector real1(double v) { return Scalar{v, 0.0} * CoordinateVector::unit(0); }

}  // namespace

TEST_CASE("verify_chain on elementary examples") {
    const auto B = unweighted(SpaceSpec::lp(2.0));
    CoordinateVector x = CoordinateVector::unit(4) + CoordinateVector::unit(2);
    std::vector<CoordinateVector> traj{x, apply(B, x), iterate(B, x, 2)};
    const auto ok = verify_chain(B, traj, 1e-9);
    REQUIRE(ok.status == ChainCheck::Status::Accepted);
    for (const auto& e : ok.chain->step_errors) CHECK(e.upper == 0.0);

    const auto two = scalar_1d(2.0);
    const auto good = verify_chain(two, {real1(1.0), real1(2.05)}, 0.1);
    REQUIRE(good.status == ChainCheck::Status::Accepted);
    CHECK(good.chain->step_errors[0].upper == doctest::Approx(0.05));
    const auto bad = verify_chain(two, {real1(1.0), real1(2.05)}, 0.01);
    CHECK(bad.status == ChainCheck::Status::Rejected);
    CHECK(bad.fail_index == 0);

    CHECK_THROWS_AS(verify_chain(two, {}, 0.1), std::domain_error);
}

TEST_CASE("series classifier on the function-space models") {
    const auto hardy = classify_chain_recurrence(unweighted(SpaceSpec::weighted_l2(DiagFamily::Ones)));
    CHECK(hardy.status == ChainStatus::ChainRecurrent);
    CHECK(hardy.all_k_certified);

    const auto entire =
        classify_chain_recurrence(unweighted(SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ)));
    CHECK(entire.status == ChainStatus::NotChainRecurrent);
    CHECK(entire.note.find("k = 2") != std::string::npos);

    const auto logsp =
        classify_chain_recurrence(unweighted(SpaceSpec::koethe_space(2.0, KoetheForm::LogPowK)));
    CHECK(logsp.status == ChainStatus::ChainRecurrent);
    CHECK(logsp.all_k_certified);
}

TEST_CASE("numeric partial-sum fallback for irregular weights") {
    WeightSpec wd = WeightSpec::constant({2.0, 0.0});
    wd.irregular = true;  // asymptotics withheld; evaluation still defined
    const auto div = classify_chain_recurrence(
        OperatorDescriptor::backward_shift(wd, SpaceSpec::lp(2.0)));
    CHECK(div.status == ChainStatus::ChainRecurrent);
    CHECK(div.evidence[0].method == "numeric");

    WeightSpec wu = WeightSpec::constant({1.0, 0.0});
    wu.irregular = true;
    const auto und = classify_chain_recurrence(
        OperatorDescriptor::backward_shift(wu, SpaceSpec::lp(2.0)));
    CHECK(und.status == ChainStatus::Undecided);
}

TEST_CASE("diagonal and algebraic classification") {
    const auto half = OperatorDescriptor::diagonal({0.5, 0.0}, SpaceSpec::lp(2.0));
    CHECK(classify_chain_recurrence(half).status == ChainStatus::NotChainRecurrent);
    const auto rot = OperatorDescriptor::diagonal({0.0, 1.0}, SpaceSpec::lp(2.0));
    CHECK(classify_chain_recurrence(rot).status == ChainStatus::ChainRecurrent);

    // Scalar multiples fold into the shift weights.
    const auto twoB = transform(unweighted(SpaceSpec::lp(2.0)),
                                Transform::rotate({0.0, 1.0}));
    CHECK(classify_chain_recurrence(twoB).status == ChainStatus::ChainRecurrent);

    const auto sum_cr = transform(unweighted(SpaceSpec::weighted_l2(DiagFamily::Ones)),
                                  Transform::direct_sum_with(
                                      unweighted(SpaceSpec::weighted_l2(DiagFamily::Dirichlet))));
    CHECK(classify_chain_recurrence(sum_cr).status == ChainStatus::ChainRecurrent);
    const auto sum_not = transform(unweighted(SpaceSpec::weighted_l2(DiagFamily::Ones)),
                                   Transform::direct_sum_with(
                                       unweighted(SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ))));
    CHECK(classify_chain_recurrence(sum_not).status == ChainStatus::NotChainRecurrent);

    CHECK_THROWS_AS(classify_chain_recurrence(scalar_1d(2.0)), std::domain_error);
}

TEST_CASE("transitivity companion test") {
    CHECK(transitivity_test(unweighted(SpaceSpec::weighted_l2(DiagFamily::Bergman))).transitive ==
          Trilean::Yes);
    CHECK(transitivity_test(unweighted(SpaceSpec::weighted_l2(DiagFamily::Ones))).transitive ==
          Trilean::No);
    CHECK(transitivity_test(unweighted(SpaceSpec::koethe_space(2.0, KoetheForm::LogPowK)))
              .transitive == Trilean::No);
    // Derivative model: transitive on all three non-normable models.
    for (KoetheForm f : {KoetheForm::KPowJ, KoetheForm::JPowK, KoetheForm::ExpNegJOverK}) {
        const auto D = OperatorDescriptor::backward_shift(WeightSpec::ramp(),
                                                          SpaceSpec::koethe_space(2.0, f));
        CHECK(transitivity_test(D).transitive == Trilean::Yes);
    }
}

TEST_CASE("series chain from zero to a canonical vector") {
    const auto B = unweighted(SpaceSpec::lp(2.0));
    const double delta = 0.5;
    const auto r = build_chain_zero_to_e(B, 1, delta);
    REQUIRE(r.ok);
    // Independent smallest-m search: terms are 1, threshold 2/delta = 4.
    std::int64_t m = 0;
    double t = 0.0;
    while (t <= 2.0 / delta) t += 1.0, ++m;
    CHECK(m == 5);
    CHECK(r.chain.points.size() == static_cast<std::size_t>(m + 2));
    for (std::int64_t j = 0; j < m; ++j)
        CHECK(r.chain.step_errors[static_cast<std::size_t>(j)].upper == doctest::Approx(0.2));
    CHECK(r.chain.step_errors.back().upper == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.chain.points.back() == CoordinateVector::unit(1));

    // Minimal chain when delta is generous: smallest admissible m is 1.
    const auto wide = build_chain_zero_to_e(B, 1, 2.5);
    REQUIRE(wide.ok);
    CHECK(wide.chain.points.size() == 3);
}

TEST_CASE("degenerate zero-seminorm branch uses the exact trajectory chain") {
    KoetheMatrix km;
    km.form = KoetheForm::Table;
    km.table = {{1, 1, 1}, {0, 1, 1}, {0, 0, 1}};
    SpaceSpec sp;
    sp.index_set = IndexSet::Unilateral;
    sp.origin = 1;
    sp.p = 2.0;
    sp.k_max = 6;
    sp.source = SpaceSpec::Source::Koethe;
    sp.koethe = km;
    sp.validate();
    const auto B = unweighted(sp);
    const auto r = build_chain_zero_to_e(B, 1, 0.6);
    REQUIRE(r.ok);
    CHECK(r.chain.points.front().empty());
    CHECK(r.chain.points.back() == CoordinateVector::unit(1));
    // Interior steps are exact (the chain rides a true trajectory).
    for (std::size_t j = 1; j < r.chain.step_errors.size(); ++j)
        CHECK(r.chain.step_errors[j].upper == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("negative-series chain lands exactly at zero") {
    const auto B = unweighted(SpaceSpec::lp(2.0, IndexSet::Bilateral));
    const double delta = 0.5;
    const auto r = build_chain_e_to_zero(B, 1, delta);
    REQUIRE(r.ok);
    CHECK(r.chain.points.front() == CoordinateVector::unit(-1));
    CHECK(r.chain.points.back().empty());
    // Recompute the recipe independently: x_j = B x_{j-1} - e_{-1-j} / t.
    const std::int64_t m = 5;  // terms are 1, threshold 4
    CHECK(r.chain.points.size() == static_cast<std::size_t>(m + 1));
    std::vector<CoordinateVector> expect{CoordinateVector::unit(-1)};
    const double t = 5.0;
    for (std::int64_t j = 1; j <= m; ++j) {
        CoordinateVector nxt = apply(B, expect.back());
        nxt -= Scalar{1.0 / t, 0.0} * CoordinateVector::unit(-1 - j);
        expect.push_back(nxt);
    }
    for (std::size_t j = 0; j < expect.size(); ++j) {
        const CoordinateVector diff = expect[j] - r.chain.points[j];
        CHECK(seminorm_eval(B.ambient, diff, 1) <= 1e-12);
    }
}

TEST_CASE("bounded-orbit staircase") {
    const auto half = scalar_1d(0.5);
    const auto r = build_chain_to_zero_staircase(half, real1(1.0), 0.3);
    REQUIRE(r.ok);
    CHECK(r.chain.length() == 3);  // C = 1/2, k = ceil(C/delta) + 1
    CHECK(r.chain.points.back().empty());

    const auto trivial = build_chain_to_zero_staircase(half, {}, 0.3);
    REQUIRE(trivial.ok);
    CHECK(trivial.chain.length() == 1);

    const auto two = scalar_1d(2.0);
    const auto fail = build_chain_to_zero_staircase(two, real1(1.0), 0.01, 2000);
    CHECK(!fail.ok);
    CHECK(fail.error.find("unbounded") != std::string::npos);
}

TEST_CASE("interpolation blends loop chains") {
    const auto minus = scalar_1d(-1.0);
    Chain loop_x, loop_y;
    {
        const auto cx = verify_chain(minus, {real1(1.0), real1(-1.0), real1(1.0)}, 0.125);
        const auto cy = verify_chain(minus, {real1(-1.0), real1(1.0), real1(-1.0)}, 0.125);
        REQUIRE(cx.status == ChainCheck::Status::Accepted);
        REQUIRE(cy.status == ChainCheck::Status::Accepted);
        loop_x = *cx.chain;
        loop_y = *cy.chain;
    }
    const auto r = interpolation_chain(minus, loop_x, loop_x, 0.5);
    REQUIRE(r.ok);  // x = y degenerate case re-certifies
    const auto r2 = interpolation_chain(minus, loop_x, loop_y, 0.5);
    REQUIRE(r2.ok);
    CHECK(r2.chain.points.front() == real1(1.0));
    CHECK(r2.chain.points.back() == real1(-1.0));

    // Loops through zero on the Hardy model, composed and blended.
    const auto B = unweighted(SpaceSpec::lp(2.0));
    const double delta = 0.4;
    auto loop_of = [&](double scale) {
        const CoordinateVector pt = Scalar{scale, 0.0} * CoordinateVector::unit(1);
        auto down = build_chain_to_zero(B, pt, delta / 4.0);
        REQUIRE(down.ok);
        auto up = build_chain_zero_to_e(B, 1, delta / (4.0 * scale));
        REQUIRE(up.ok);
        std::vector<CoordinateVector> pts = down.chain.points;
        for (std::size_t i = 1; i < up.chain.points.size(); ++i)
            pts.push_back(Scalar{scale, 0.0} * up.chain.points[i]);
        auto chk = verify_chain(B, pts, delta / 4.0);
        REQUIRE(chk.status == ChainCheck::Status::Accepted);
        return *chk.chain;
    };
    const auto blended = interpolation_chain(B, loop_of(1.0), loop_of(2.0), delta);
    REQUIRE(blended.ok);
    CHECK(blended.chain.points.front() == CoordinateVector::unit(1));
}

TEST_CASE("built chains re-verify at their delta") {
    const auto bi = unweighted(SpaceSpec::lp(2.0, IndexSet::Bilateral));
    for (double d : {0.5, 0.1}) {
        for (std::int64_t i = 1; i <= 3; ++i) {
            const auto a = build_chain_zero_to_e(bi, i, d);
            REQUIRE(a.ok);
            CHECK(verify_chain(bi, a.chain.points, d).status == ChainCheck::Status::Accepted);
            const auto b = build_chain_e_to_zero(bi, i, d);
            REQUIRE(b.ok);
            CHECK(verify_chain(bi, b.chain.points, d).status == ChainCheck::Status::Accepted);
        }
    }
}

TEST_CASE("grid oracle on elementary instances") {
    const auto id1 = scalar_1d(1.0);
    const auto r = brute_force_chain_search(id1, real1(0.0), real1(0.35), 0.1, 4.0, 0.05);
    REQUIRE(r.found);
    CHECK(r.chain.length() == 4);

    const auto two = scalar_1d(2.0);
    const auto absent = brute_force_chain_search(two, real1(1.0), real1(1.0), 0.05, 4.0, 0.025);
    CHECK(!absent.found);
    CHECK(absent.absence_delta < 0.05);
    CHECK(absent.absence_delta > 0.0);

    CHECK_THROWS_AS(brute_force_chain_search(two, real1(0.0), real1(0.0), 0.05, 4.0, 0.05),
                    std::domain_error);  // grid_step > delta/2
    CHECK_THROWS_AS(
        brute_force_chain_search(two, real1(0.0), real1(0.0), 0.05, 4.0, 0.005, 100),
        ResourceError);
}

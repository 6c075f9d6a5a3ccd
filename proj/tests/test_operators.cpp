#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lindyn/operators.hpp"

using namespace lindyn;

namespace {

OperatorDescriptor plain_shift(double wv = 1.0, IndexSet ix = IndexSet::Unilateral) {
    const WeightDomain d =
        ix == IndexSet::Bilateral ? WeightDomain::Bilateral : WeightDomain::Unilateral;
    return OperatorDescriptor::backward_shift(WeightSpec::constant({wv, 0.0}, d),
                                              SpaceSpec::lp(2.0, ix));
}

}  // namespace

TEST_CASE("backward shift kills the bottom canonical vector") {
    const auto B = plain_shift();
    CHECK(apply(B, CoordinateVector::unit(1)).empty());
    const auto Bw = plain_shift(2.0);
    const CoordinateVector img = apply(Bw, CoordinateVector::unit(3));
    CHECK(img.at(2) == Scalar{2.0, 0.0});
    CHECK(img.support_size() == 1);
}

TEST_CASE("direct sums act blockwise") {
    const auto two = OperatorDescriptor::diagonal({2.0, 0.0}, SpaceSpec::lp(2.0));
    const auto half = OperatorDescriptor::diagonal({0.5, 0.0}, SpaceSpec::lp(2.0));
    const auto sum = transform(two, Transform::direct_sum_with(half));
    CoordinateVector x;
    x.set({0, 1}, Scalar{1.0, 0.0});
    x.set({1, 1}, Scalar{1.0, 0.0});
    const CoordinateVector y = apply(sum, x);
    CHECK(y.at({0, 1}) == Scalar{2.0, 0.0});
    CHECK(y.at({1, 1}) == Scalar{0.5, 0.0});
}

TEST_CASE("weight products are exact in log form") {
    CHECK(weight_product(WeightSpec::constant({2.0, 0.0}), 1, 4).abs() == doctest::Approx(32.0));
    const WeightSpec cyc = WeightSpec::unilateral_cycle({{3.0, 0.0}, {1.0 / 3.0, 0.0}});
    CHECK(weight_product(cyc, 1, 1).abs() == doctest::Approx(1.0));
    // Expansive negative tail a = 2, window w_{-3}..w_0: four factors of 2.
    const WeightSpec cor = WeightSpec::bilateral_cycles({{2.0, 0.0}}, {{0.5, 0.0}});
    CHECK(weight_product(cor, -3, 3).abs() == doctest::Approx(16.0));
}

TEST_CASE("weight product multiplicativity over split windows") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::int64_t> pick(-6, 6);
    std::uniform_int_distribution<std::int64_t> len(0, 9);
    const WeightSpec w = WeightSpec::bilateral_cycles({{2.0, 0.0}, {0.25, 0.0}},
                                                      {{0.5, 0.0}, {3.0, 0.0}},
                                                      {{1.5, 0.0}}, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::int64_t k = pick(rng), n = len(rng), m = len(rng);
        const LogMag whole = weight_product(w, k, n + m + 1);
        const LogMag split = weight_product(w, k, n) * weight_product(w, k + n + 1, m);
        CHECK(whole.log_mag == doctest::Approx(split.log_mag).epsilon(1e-10));
    }
}

TEST_CASE("geometric-mean limits of eventually periodic weights") {
    const auto half = gm_limits(WeightSpec::constant({0.5, 0.0}), GmSide::Unilateral);
    CHECK(*half.limsup_gm == doctest::Approx(0.5));
    CHECK(*half.liminf_gm == doctest::Approx(0.5));
    const auto two = gm_limits(WeightSpec::constant({2.0, 0.0}), GmSide::Unilateral);
    CHECK(*two.limsup_gm == doctest::Approx(2.0));
    const auto cyc =
        gm_limits(WeightSpec::unilateral_cycle({{2.0, 0.0}, {0.5, 0.0}}), GmSide::Unilateral);
    CHECK(*cyc.limsup_gm == doctest::Approx(1.0));

    const WeightSpec bil = WeightSpec::bilateral_cycles({{0.5, 0.0}}, {{2.0, 0.0}});
    CHECK(*gm_limits(bil, GmSide::BilateralAllK).limsup_gm == doctest::Approx(2.0));
    CHECK(*gm_limits(bil, GmSide::BilateralAllK).liminf_gm == doctest::Approx(0.5));
    CHECK(*gm_limits(bil, GmSide::BilateralNeg).limsup_gm == doctest::Approx(0.5));

    // Unimodular rescaling leaves every magnitude limit unchanged.
    const WeightSpec rot = bil.scaled(std::polar(1.0, 0.7));
    CHECK(*gm_limits(rot, GmSide::BilateralAllK).limsup_gm == doctest::Approx(2.0));

    const auto ramp = gm_limits(WeightSpec::ramp(), GmSide::Unilateral);
    CHECK(*ramp.limsup_gm == kInf);
    WeightSpec irr = WeightSpec::constant({2.0, 0.0});
    irr.irregular = true;
    CHECK(!gm_limits(irr, GmSide::Unilateral).limsup_gm);
}

TEST_CASE("transform algebra") {
    const auto B = plain_shift();
    const auto same = transform(B, Transform::power_of(1));
    const CoordinateVector probe = CoordinateVector::unit(4);
    CHECK(apply(same, probe) == apply(B, probe));

    const auto rot = transform(B, Transform::rotate({0.0, 1.0}));
    const CoordinateVector img = apply(rot, CoordinateVector::unit(2));
    CHECK(img.at(1) == Scalar{0.0, 1.0});

    const auto bil = plain_shift(1.0, IndexSet::Bilateral);
    const auto inv = transform(bil, Transform::inverse());
    CHECK(apply(inv, CoordinateVector::unit(0)).at(1) == Scalar{1.0, 0.0});

    CHECK_THROWS_AS(transform(B, Transform::rotate({2.0, 0.0})), std::domain_error);
    CHECK_THROWS_AS(transform(B, Transform::inverse()), std::domain_error);
    CHECK_THROWS_AS(transform(B, Transform::power_of(0)), std::domain_error);
}

TEST_CASE("powers compose with repeated application") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto T = plain_shift(1.7, IndexSet::Bilateral);
    for (int n = 1; n <= 4; ++n) {
        const auto Tn = transform(T, Transform::power_of(n));
        for (int trial = 0; trial < 10; ++trial) {
            CoordinateVector x;
            std::uniform_int_distribution<std::int64_t> idx(-5, 5);
            for (int i = 0; i < 3; ++i) x.add({0, idx(rng)}, Scalar{g(rng), g(rng)});
            CHECK(apply(Tn, x) == iterate(T, x, n));
        }
    }
}

TEST_CASE("continuity of weighted shifts on Koethe spaces") {
    // The derivative-operator model: w_n = n on the k^j matrix.
    KoetheMatrix entire;
    entire.form = KoetheForm::KPowJ;
    const auto deriv = continuity_check_koethe(WeightSpec::ramp(), entire, 10);
    CHECK(deriv.continuous == Trilean::Yes);

    KoetheMatrix ones;
    ones.form = KoetheForm::Ones;
    const auto flat = continuity_check_koethe(WeightSpec::constant({1.0, 0.0}), ones, 10);
    CHECK(flat.continuous == Trilean::Yes);
    CHECK(flat.witness.find("sup~1") != std::string::npos);

    WeightSpec spiky = WeightSpec::unilateral_cycle({{1.0, 0.0}}, {{4.0, 0.0}, {16.0, 0.0}}, 1);
    spiky.irregular = true;
    const auto und = continuity_check_koethe(spiky, entire, 10);
    CHECK(und.continuous == Trilean::Undecided);

    // The ramp weight is too strong for the log-power matrix.
    KoetheMatrix logm;
    logm.form = KoetheForm::LogPowK;
    const auto no = continuity_check_koethe(WeightSpec::ramp(), logm, 10);
    CHECK(no.continuous == Trilean::No);
}

TEST_CASE("shift splittings satisfy the sampled contraction inequalities") {
    const WeightSpec w = WeightSpec::bilateral_cycles({{0.5, 0.0}}, {{2.0, 0.0}});
    const SpaceSpec sp = SpaceSpec::lp(2.0, IndexSet::Bilateral);
    const HyperbolicSplitting s = make_shift_splitting(w, sp);
    CHECK(s.alpha == 1.0);
    CHECK(s.c == 1.0);
    CHECK(s.t == doctest::Approx(0.5));
    CHECK(s.beta == doctest::Approx(1.0));
    const auto T = OperatorDescriptor::backward_shift(w, sp);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        CoordinateVector y, z;
        std::uniform_int_distribution<std::int64_t> neg(-9, -1), pos(0, 9);
        for (int i = 0; i < 3; ++i) {
            y.add({0, neg(rng)}, Scalar{g(rng), 0.0});
            z.add({0, pos(rng)}, Scalar{g(rng), 0.0});
        }
        CoordinateVector ty = y, sz = z;
        for (int n = 1; n <= 12; ++n) {
            ty = apply(T, ty);
            sz = apply_backward(T, s, sz);
            const double bound = s.beta * std::pow(s.t, n);
            CHECK(seminorm_eval(sp, ty, 1) <= bound * seminorm_eval(sp, y, 1) * (1 + 1e-9));
            CHECK(seminorm_eval(sp, sz, 1) <= bound * seminorm_eval(sp, z, 1) * (1 + 1e-9));
        }
    }
}

TEST_CASE("matrix splittings are estimated by power iteration") {
    Eigen::MatrixXcd m(2, 2);
    m << Scalar{0.5, 0.0}, Scalar{0.1, 0.0}, Scalar{0.0, 0.0}, Scalar{2.0, 0.0};
    const HyperbolicSplitting s = make_matrix_splitting(m, {0});
    CHECK(s.estimated);
    CHECK(s.t < 1.0);
    CHECK(s.t >= 0.5);
    CHECK(s.beta >= 1.0);
}

TEST_CASE("operator rendering names the structure") {
    const auto cor = OperatorDescriptor::backward_shift(
        WeightSpec::bilateral_cycles({{2.0, 0.0}}, {{0.5, 0.0}}),
        SpaceSpec::lp(2.0, IndexSet::Bilateral));
    const std::string r = cor.render();
    CHECK(r.find("bilateral_shift") != std::string::npos);
    CHECK(r.find("tail- = [2]") != std::string::npos);
    CHECK(r.find("tail+ = [0.5]") != std::string::npos);
}

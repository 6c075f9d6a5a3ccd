#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lindyn/spaces.hpp"

using namespace lindyn;

namespace {

CoordinateVector random_vector(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi,
                               int entries) {
    std::uniform_int_distribution<std::int64_t> idx(lo, hi);
    std::normal_distribution<double> g(0.0, 1.0);
    CoordinateVector v;
    for (int i = 0; i < entries; ++i) v.add({0, idx(rng)}, Scalar{g(rng), g(rng)});
    return v;
}

}  // namespace

TEST_CASE("seminorm evaluation on canonical examples") {
    const SpaceSpec entire = SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ);
    CHECK(seminorm_eval(entire, {}, 2) == 0.0);
    CHECK(seminorm_eval(entire, CoordinateVector::unit(3), 2) == doctest::Approx(8.0));

    const SpaceSpec dirichlet = SpaceSpec::weighted_l2(DiagFamily::Dirichlet);
    // v = (1,1,2,3,...) under ||a||^2 = sum |a_n|^2 v_n, so ||e_5|| = sqrt(5).
    CHECK(seminorm_eval(dirichlet, CoordinateVector::unit(5), 1) ==
          doctest::Approx(std::sqrt(5.0)));
    CHECK(dirichlet.canonical_norm(5, 1) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("seminorm domain errors") {
    const SpaceSpec l2 = SpaceSpec::lp(2.0);
    CHECK_THROWS_AS(seminorm_eval(l2, CoordinateVector::unit(0), 1), std::domain_error);
    const SpaceSpec entire = SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ);
    CHECK_THROWS_AS(entire.canonical_norm(1, entire.k_max + 1), std::domain_error);
}

TEST_CASE("canonical metric intervals") {
    const SpaceSpec entire = SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ);
    const Interval zero = frechet_distance(entire, {}, {});
    CHECK(zero.lower == 0.0);
    CHECK(zero.upper == doctest::Approx(std::ldexp(1.0, -entire.k_max)));

    const SpaceSpec l2 = SpaceSpec::lp(2.0);
    const Interval one = frechet_distance(l2, CoordinateVector::unit(1), {});
    CHECK(one.lower == 1.0);
    CHECK(one.upper == 1.0);

    // A Fréchet space with all levels equal: d(x, 0) has the geometric-sum lower.
    const SpaceSpec ones = SpaceSpec::koethe_space(2.0, KoetheForm::Ones);
    const CoordinateVector x = Scalar{0.5, 0.0} * CoordinateVector::unit(1);
    const Interval d = frechet_distance(ones, x, {});
    CHECK(d.lower == doctest::Approx(0.5 * (1.0 - std::ldexp(1.0, -ones.k_max))));
}

TEST_CASE("canonical norm sequences carry asymptotics tags") {
    const NormSequence plain = canonical_norm_sequence(SpaceSpec::lp(2.0), 1, 1, 5);
    CHECK(plain.values == std::vector<double>{1, 1, 1, 1, 1});
    CHECK(plain.tag_text == "constant");

    const NormSequence geo =
        canonical_norm_sequence(SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ), 2, 1, 4);
    CHECK(geo.values == std::vector<double>{2, 4, 8, 16});
    CHECK(geo.tag.rate == doctest::Approx(std::log(2.0)));

    const NormSequence logs =
        canonical_norm_sequence(SpaceSpec::koethe_space(2.0, KoetheForm::LogPowK), 2, 1, 3);
    CHECK(logs.values[0] == doctest::Approx(std::pow(std::log(2.0), 2)));
    CHECK(logs.values[1] == doctest::Approx(std::pow(std::log(3.0), 2)));
    CHECK(logs.values[2] == doctest::Approx(std::pow(std::log(4.0), 2)));
    CHECK(logs.tag.logpow == doctest::Approx(2.0));
}

TEST_CASE("seminorm family monotone in k where the matrix is monotone") {
    std::mt19937_64 rng(11);
    for (KoetheForm form : {KoetheForm::Ones, KoetheForm::KPowJ, KoetheForm::JPowK,
                            KoetheForm::ExpNegJOverK}) {
        const SpaceSpec sp = SpaceSpec::koethe_space(2.0, form, 8);
        CHECK(!sp.koethe.monotonicity_violation(16, 8));
        for (int trial = 0; trial < 20; ++trial) {
            const CoordinateVector x = random_vector(rng, 1, 12, 3);
            for (int k = 1; k < sp.levels(); ++k)
                CHECK(seminorm_eval(sp, x, k) <= seminorm_eval(sp, x, k + 1) * (1 + 1e-12));
        }
    }
    // The literal log-power generator fails the monotone invariant at j = 1
    // (log 2 < 1); the probe reports it rather than papering over it.
    const SpaceSpec logsp = SpaceSpec::koethe_space(2.0, KoetheForm::LogPowK, 8);
    const auto viol = logsp.koethe.monotonicity_violation(4, 4);
    REQUIRE(viol.has_value());
    CHECK(viol->first == 1);
}

TEST_CASE("seminorm triangle inequality and homogeneity") {
    std::mt19937_64 rng(12);
    const SpaceSpec sp = SpaceSpec::koethe_space(2.0, KoetheForm::JPowK, 6);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const CoordinateVector x = random_vector(rng, 1, 10, 3);
        const CoordinateVector y = random_vector(rng, 1, 10, 3);
        const Scalar c{g(rng), g(rng)};
        for (int k = 1; k <= sp.levels(); ++k) {
            CHECK(seminorm_eval(sp, x + y, k) <=
                  (seminorm_eval(sp, x, k) + seminorm_eval(sp, y, k)) * (1 + 1e-12) + 1e-15);
            CHECK(seminorm_eval(sp, c * x, k) ==
                  doctest::Approx(std::abs(c) * seminorm_eval(sp, x, k)));
        }
    }
}

TEST_CASE("metric translation invariance and unit cap") {
    std::mt19937_64 rng(13);
    const SpaceSpec sp = SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ, 10);
    for (int trial = 0; trial < 30; ++trial) {
        const CoordinateVector x = random_vector(rng, 1, 8, 2);
        const CoordinateVector y = random_vector(rng, 1, 8, 2);
        const CoordinateVector z = random_vector(rng, 1, 8, 2);
        const Interval a = frechet_distance(sp, x, y);
        const Interval b = frechet_distance(sp, x + z, y + z);
        CHECK(a.lower == doctest::Approx(b.lower).epsilon(1e-12));
        CHECK(a.upper == doctest::Approx(b.upper).epsilon(1e-12));
        CHECK(a.lower <= 1.0);
    }
}

TEST_CASE("transported seminorms follow the conjugacy weights exactly") {
    // w == 1: identity transport.
    const SpaceSpec l2 = SpaceSpec::lp(2.0);
    const SpaceSpec id = transport_conjugacy(WeightSpec::constant({1.0, 0.0}), l2);
    for (std::int64_t n = 1; n <= 10; ++n)
        CHECK(id.canonical_norm(n, 1) == doctest::Approx(l2.canonical_norm(n, 1)));

    // w == 2 unilateral: ||e_n||' = 2^-n.
    const SpaceSpec two = transport_conjugacy(WeightSpec::constant({2.0, 0.0}), l2);
    for (std::int64_t n = 1; n <= 20; ++n)
        CHECK(two.canonical_norm(n, 1) == doctest::Approx(std::ldexp(1.0, -static_cast<int>(n))));

    // Bilateral expansive/contractive cycles: ||e_{-n}||' = ||e_n||' = a^n.
    const double a = 2.0;
    const SpaceSpec bil = transport_conjugacy(
        WeightSpec::bilateral_cycles({{a, 0.0}}, {{1.0 / a, 0.0}}),
        SpaceSpec::lp(2.0, IndexSet::Bilateral));
    for (std::int64_t n = 1; n <= 12; ++n) {
        CHECK(bil.canonical_norm(n, 1) == doctest::Approx(std::pow(a, static_cast<double>(n))));
        CHECK(bil.canonical_norm(-n, 1) == doctest::Approx(std::pow(a, static_cast<double>(n))));
    }

    // ||phi_v(e_n)||_k = |v_n| ||e_n||_k over a window, by construction.
    const SpaceSpec entire = SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ, 6);
    const WeightSpec w = WeightSpec::unilateral_cycle({{3.0, 0.0}, {0.5, 0.0}});
    const SpaceSpec tr = transport_conjugacy(w, entire);
    for (std::int64_t n = 1; n <= 10; ++n) {
        const LogMag prod = weight_product(w, 1, n - 1);
        for (int k = 1; k <= 6; ++k)
            CHECK(tr.canonical_norm(n, k) ==
                  doctest::Approx(entire.canonical_norm(n, k) / prod.abs()));
    }
}

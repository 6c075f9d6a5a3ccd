#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "lindyn/shadowing.hpp"

using namespace lindyn;

namespace {

OperatorDescriptor scalar_1d(double v) {
    Eigen::MatrixXcd m(1, 1);
    m << Scalar{v, 0.0};
    return OperatorDescriptor::matrix(m);
}

OperatorDescriptor condition_c() {
    return OperatorDescriptor::backward_shift(
        WeightSpec::bilateral_cycles({{0.5, 0.0}}, {{2.0, 0.0}}),
        SpaceSpec::lp(2.0, IndexSet::Bilateral));
}

CoordinateVector real1(double v) { return Scalar{v, 0.0} * CoordinateVector::unit(0); }

}  // namespace

TEST_CASE("generated pseudotrajectories certify their step budget") {
    const auto T = condition_c();
    Pseudotrajectory tiny = generate_pseudotrajectory(T, CoordinateVector::unit(0), 1e-9, 20, 1,
                                                      PtMode::UniformNoise);
    for (const auto& e : tiny.step_errors) CHECK(e.upper <= 1e-9);

    // Adversarial drift on the doubling map unrolls to 0, 1, 3, 7, 15.
    Pseudotrajectory drift =
        generate_pseudotrajectory(scalar_1d(2.0), {}, 1.0, 4, 3, PtMode::AdversarialDrift);
    const std::vector<double> expect{0.0, 1.0, 3.0, 7.0, 15.0};
    for (std::size_t j = 0; j < expect.size(); ++j)
        CHECK(std::abs(drift.points[j].at(0).real() - expect[j]) <= 2e-5);

    // Periodic mode certifies the wrap-around step as well.
    Pseudotrajectory per =
        generate_pseudotrajectory(T, {}, 0.01, 0, 5, PtMode::Periodic, 3, false, 30);
    REQUIRE(per.period);
    CHECK(per.step_errors.size() == 3);
    for (const auto& e : per.step_errors) CHECK(e.upper <= 0.01);
}

TEST_CASE("verify_shadowing acceptance and rejection") {
    const auto T = condition_c();
    CoordinateVector x = CoordinateVector::unit(2) + CoordinateVector::unit(-3);
    Pseudotrajectory exact;
    exact.points = {x, apply(T, x), iterate(T, x, 2)};
    exact.delta = 1e-12;
    const auto ok = verify_shadowing(T, exact, x, 0.5);
    CHECK(ok.status == ShadowCheck::Status::Accepted);
    CHECK(ok.cert.max_error.upper == 0.0);

    const CoordinateVector off = x + Scalar{5.0, 0.0} * CoordinateVector::unit(0);
    const auto bad = verify_shadowing(T, exact, off, 0.5);
    CHECK(bad.status == ShadowCheck::Status::Rejected);
    CHECK(bad.worst_index == 0);
}

TEST_CASE("hyperbolic forward shadow of the dilation has the geometric closed form") {
    const auto two = scalar_1d(2.0);
    const HyperbolicSplitting split =
        make_matrix_splitting(std::get<OperatorDescriptor::Matrix>(two.node).m, {});
    const double delta = 0.01;
    Pseudotrajectory pt;
    pt.points.push_back(real1(1.0));
    for (int j = 0; j < 50; ++j)
        pt.points.push_back(apply(two, pt.points.back()) + real1(delta));
    pt.delta = delta;
    const ShadowResult r = shadow_hyperbolic_split(two, split, pt, 0.1);
    REQUIRE(r.ok);
    // x = x_0 + sum_{j>=1} 2^{-j} delta = x_0 + delta up to the truncation tail.
    CHECK(std::abs(r.cert.point.at(0).real() - (1.0 + delta)) <= 1e-9);

    Pseudotrajectory zeros;
    zeros.points.assign(10, {});
    const ShadowResult z = shadow_hyperbolic_split(two, split, zeros, 0.1);
    REQUIRE(z.ok);
    CHECK(z.cert.point.empty());
    CHECK(z.cert.max_error.upper <= 1e-15);
}

TEST_CASE("condition-(C) forward shadow certifies within the theorem bound") {
    const auto T = condition_c();
    const auto* sh = std::get_if<OperatorDescriptor::Shift>(&T.node);
    const HyperbolicSplitting split = make_shift_splitting(sh->w, T.space());
    const double delta = 1e-3;
    Pseudotrajectory pt =
        generate_pseudotrajectory(T, CoordinateVector::unit(0), delta, 100, 11, PtMode::UniformNoise);
    const double eps = 3.0 * split.alpha * split.beta * delta / (1.0 - split.t) + 1e-6;
    const ShadowResult r = shadow_hyperbolic_split(T, split, pt, eps);
    REQUIRE(r.ok);
    const auto recheck = verify_shadowing(T, pt, r.cert.point, eps);
    CHECK(recheck.status == ShadowCheck::Status::Accepted);
}

TEST_CASE("periodic shadow against the direct fixed-point oracle") {
    // Pure dilation, period 1, constant trajectory c: the shadow is the fixed
    // point 0 (oracle: the unique solution of z = T z).
    const auto two = scalar_1d(2.0);
    const HyperbolicSplitting split = make_matrix_splitting(
        std::get<OperatorDescriptor::Matrix>(two.node).m, {});
    Pseudotrajectory pt;
    pt.points = {real1(0.05)};
    pt.period = 1;
    pt.delta = 0.05;
    const ShadowResult r = construct_periodic_shadow(two, split, pt, 0.4);
    REQUIRE(r.ok);
    CHECK(std::abs(r.cert.point.at(0)) <= 1e-12);
    REQUIRE(r.cert.periodic_residual);
    CHECK(*r.cert.periodic_residual <= 1e-12);

    // diag(1/2, 2): compare the series construction with an independent dense
    // solve of (I - T^p) x0 = sum T^{p-1-j} y_j.
    Eigen::MatrixXcd m(2, 2);
    m << Scalar{0.5, 0.0}, Scalar{0.0, 0.0}, Scalar{0.0, 0.0}, Scalar{2.0, 0.0};
    const auto hyp = OperatorDescriptor::matrix(m);
    const HyperbolicSplitting hsplit = make_matrix_splitting(m, {0});
    const int p = 5;
    Pseudotrajectory ppt = generate_pseudotrajectory(hyp, {}, 0.01, 0, 21, PtMode::Periodic, p);
    const ShadowResult series = construct_periodic_shadow(hyp, hsplit, ppt, 0.5);
    REQUIRE(series.ok);

    Eigen::MatrixXcd tp = Eigen::MatrixXcd::Identity(2, 2);
    for (int i = 0; i < p; ++i) tp = m * tp;
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(2);
    for (int j = 0; j < p; ++j) {
        const CoordinateVector& xj = ppt.points[static_cast<std::size_t>(j)];
        const CoordinateVector& xn =
            j + 1 < p ? ppt.points[static_cast<std::size_t>(j + 1)] : ppt.points[0];
        CoordinateVector y = xn - apply(hyp, xj);
        CoordinateVector ty = iterate(hyp, y, p - 1 - j);
        for (const auto& [c, v] : ty.entries()) b[static_cast<Eigen::Index>(c.index)] += v;
    }
    Eigen::VectorXcd oracle =
        (Eigen::MatrixXcd::Identity(2, 2) - tp).fullPivLu().solve(b);
    CHECK(std::abs(series.cert.point.at(0) - oracle[0]) <= 1e-8);
    CHECK(std::abs(series.cert.point.at(1) - oracle[1]) <= 1e-8);
}

TEST_CASE("least-squares shadow recovers exact trajectories and cross-checks") {
    Eigen::MatrixXcd m(2, 2);
    m << Scalar{0.5, 0.0}, Scalar{0.0, 0.0}, Scalar{0.0, 0.0}, Scalar{2.0, 0.0};
    const auto hyp = OperatorDescriptor::matrix(m);

    CoordinateVector x0;
    x0.set({0, 0}, Scalar{0.3, 0.0});
    x0.set({0, 1}, Scalar{-0.2, 0.0});
    std::vector<CoordinateVector> traj{x0};
    for (int j = 0; j < 12; ++j) traj.push_back(apply(hyp, traj.back()));
    const auto exact = finite_shadow_least_squares(hyp, traj, 0.0, 1e-6);
    REQUIRE(exact.ok);
    CHECK(exact.sup_error <= 1e-9);

    // Random delta-chain: least squares agrees with the splitting formula.
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    const double delta = 1e-4;
    std::vector<CoordinateVector> chain{{}};
    for (int j = 0; j < 20; ++j) {
        CoordinateVector nxt = apply(hyp, chain.back());
        CoordinateVector noise;
        noise.set({0, 0}, Scalar{g(rng), 0.0});
        noise.set({0, 1}, Scalar{g(rng), 0.0});
        noise *= Scalar{delta / (2.0 * seminorm_eval(hyp.ambient, noise, 1)), 0.0};
        chain.push_back(nxt + noise);
    }
    const auto ls = finite_shadow_least_squares(hyp, chain, delta, 0.1);
    REQUIRE(ls.ok);
    CHECK(ls.sup_error <= 8.0 * delta);
    const HyperbolicSplitting split = make_matrix_splitting(m, {0});
    Pseudotrajectory pt;
    pt.points = chain;
    pt.delta = delta;
    const ShadowResult hy = shadow_hyperbolic_split(hyp, split, pt, 0.1);
    REQUIRE(hy.ok);
    const CoordinateVector diff = hy.cert.point - ls.point;
    CHECK(seminorm_eval(hyp.ambient, diff, 1) <= 1e-6);
}

TEST_CASE("bootstrap matches the closed-form dilation shadow") {
    const auto two = scalar_1d(2.0);
    const auto solver = make_least_squares_solver(two, 6.0);
    const double eps = 0.1;

    Pseudotrajectory zeros;
    zeros.start_index = -10;
    zeros.points.assign(21, {});
    const BootstrapResult z = finite_to_infinite_shadow(two, solver, zeros, eps, 3);
    REQUIRE(z.ok);
    for (const auto& st : z.stages) CHECK(seminorm_eval(two.ambient, st.v_k, 1) <= 1e-12);

    const double delta = eps / (4.0 * solver.linearity);
    Pseudotrajectory pt;
    pt.start_index = -8;
    for (int j = -8; j <= 8; ++j)
        pt.points.push_back(real1(delta / 3.0 * ((j % 3) - 1)));
    const BootstrapResult r = finite_to_infinite_shadow(two, solver, pt, eps, 4);
    REQUIRE(r.ok);
    CHECK(r.final_check.status == ShadowCheck::Status::Accepted);

    // Closed-form comparison: the two-sided dilation shadow of the window.
    const HyperbolicSplitting split = make_matrix_splitting(
        std::get<OperatorDescriptor::Matrix>(two.node).m, {});
    Pseudotrajectory fwd;
    fwd.points.assign(pt.points.begin() + 8, pt.points.end());  // indices >= 0
    const ShadowResult hy = shadow_hyperbolic_split(two, split, fwd, eps);
    REQUIRE(hy.ok);
    const CoordinateVector diff = hy.cert.point - r.limit_point;
    CHECK(seminorm_eval(two.ambient, diff, 1) <= eps / 4.0);
}

TEST_CASE("shadowing classification rejects out-of-scope inputs") {
    const auto ramp = OperatorDescriptor::backward_shift(
        WeightSpec::ramp(), SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ));
    CHECK_THROWS_AS(classify_shadowing(ramp), std::domain_error);

    WeightSpec irr = WeightSpec::constant({2.0, 0.0});
    irr.irregular = true;
    const auto und =
        classify_shadowing(OperatorDescriptor::backward_shift(irr, SpaceSpec::lp(2.0)));
    CHECK(und.positive_shadowing == Trilean::Undecided);

    // Unit-circle cycle mean: no shadowing for the unilateral shift.
    const auto flat = classify_shadowing(OperatorDescriptor::backward_shift(
        WeightSpec::unilateral_cycle({{2.0, 0.0}, {0.5, 0.0}}), SpaceSpec::lp(2.0)));
    CHECK(flat.positive_shadowing == Trilean::No);
    CHECK(flat.periodic_shadowing == Trilean::No);
    CHECK(flat.matched_condition == "none");
}

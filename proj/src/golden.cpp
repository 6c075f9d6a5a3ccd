#include "lindyn/golden.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "lindyn/chaos.hpp"
#include "lindyn/entire.hpp"
#include "lindyn/oracle.hpp"

namespace lindyn {

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
    bool pass{true};
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail << "FAIL: " << what << "; ";
        }
    }
};

OperatorDescriptor shift_on(SpaceSpec sp, WeightSpec w) {
    return OperatorDescriptor::backward_shift(std::move(w), std::move(sp));
}

OperatorDescriptor unweighted_on(SpaceSpec sp) {
    const WeightDomain d = sp.index_set == IndexSet::Bilateral ? WeightDomain::Bilateral
                                                               : WeightDomain::Unilateral;
    return shift_on(std::move(sp), WeightSpec::constant({1.0, 0.0}, d));
}

OperatorDescriptor condition_c_shift() {
    return shift_on(SpaceSpec::lp(2.0, IndexSet::Bilateral),
                    WeightSpec::bilateral_cycles({{0.5, 0.0}}, {{2.0, 0.0}}));
}

OperatorDescriptor corollary_56_shift(double a) {
    return shift_on(SpaceSpec::lp(2.0, IndexSet::Bilateral),
                    WeightSpec::bilateral_cycles({{a, 0.0}}, {{1.0 / a, 0.0}}));
}

// --------------------------------------------------------------------------
// Criterion 1: golden classification table

void criterion_1(Check& c) {
    auto hardy = unweighted_on(SpaceSpec::weighted_l2(DiagFamily::Ones));
    auto dirichlet = unweighted_on(SpaceSpec::weighted_l2(DiagFamily::Dirichlet));
    auto bergman = unweighted_on(SpaceSpec::weighted_l2(DiagFamily::Bergman));
    auto entire_model = unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ));
    auto rapid = unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::JPowK));
    auto disc = unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::ExpNegJOverK));
    auto logspace = unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::LogPowK));

    auto row = [&](const std::string& name, const OperatorDescriptor& op, ChainStatus cr,
                   Trilean tr) {
        const ChainVerdict v = classify_chain_recurrence(op);
        c.expect(v.status == cr, name + " chain recurrence = " + to_string(v.status) +
                                     " expected " + to_string(cr));
        const TransitivityVerdict t = transitivity_test(op);
        c.expect(t.transitive == tr, name + " transitivity = " + to_string(t.transitive));
    };
    row("Hardy", hardy, ChainStatus::ChainRecurrent, Trilean::No);
    row("Dirichlet", dirichlet, ChainStatus::ChainRecurrent, Trilean::No);
    row("Bergman", bergman, ChainStatus::ChainRecurrent, Trilean::Yes);
    row("entire-functions model", entire_model, ChainStatus::NotChainRecurrent, Trilean::No);
    row("rapidly-decreasing model", rapid, ChainStatus::NotChainRecurrent, Trilean::No);
    row("disc model", disc, ChainStatus::ChainRecurrent, Trilean::Yes);
    row("log-weight model", logspace, ChainStatus::ChainRecurrent, Trilean::No);
}

// --------------------------------------------------------------------------
// Criterion 2: golden shadowing table

void criterion_2(Check& c) {
    auto uni = [&](double wv) {
        return shift_on(SpaceSpec::lp(2.0), WeightSpec::constant({wv, 0.0}));
    };
    {
        const auto r = classify_shadowing(uni(0.5));
        c.expect(r.matched_condition == "a" && r.positive_shadowing == Trilean::Yes,
                 "w=1/2 matches (a), got " + r.matched_condition);
        c.expect(r.hyperbolic == Trilean::Yes, "w=1/2 hyperbolic");
    }
    {
        const auto r = classify_shadowing(uni(2.0));
        c.expect(r.matched_condition == "b" && r.positive_shadowing == Trilean::Yes,
                 "w=2 matches (b), got " + r.matched_condition);
    }
    {
        const auto r = classify_shadowing(condition_c_shift());
        c.expect(r.matched_condition == "C", "bilateral (1/2 | 2) matches (C), got " +
                                                 r.matched_condition);
        c.expect(r.generalized_hyperbolic == Trilean::Yes && r.hyperbolic == Trilean::No,
                 "condition (C): generalized hyperbolic but not hyperbolic");
        c.expect(r.positive_shadowing == Trilean::Yes, "condition (C): shadowing");
        c.expect(r.periodic_shadowing == Trilean::Yes, "condition (C): periodic shadowing");
    }
    {
        const auto r = classify_shadowing(corollary_56_shift(2.0));
        c.expect(r.positive_shadowing == Trilean::No, "expansive-splitting weight: shadowing NO");
        c.expect(r.periodic_shadowing == Trilean::Yes,
                 "expansive-splitting weight: periodic shadowing YES");
        c.expect(r.matched_condition == "expansive-splitting",
                 "matched condition, got " + r.matched_condition);
    }
}

// --------------------------------------------------------------------------
// Criterion 3: periodic shadow quantitative bound

void criterion_3(Check& c) {
    const OperatorDescriptor T = condition_c_shift();
    const auto* sh = std::get_if<OperatorDescriptor::Shift>(&T.node);
    const HyperbolicSplitting split = make_shift_splitting(sh->w, T.space());
    const double eps = 0.1;
    const double delta = (1.0 - split.t) * eps / (3.0 * split.alpha * split.beta);
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const int p = 1 + static_cast<int>(seed % 10);
        Pseudotrajectory pt = generate_pseudotrajectory(T, {}, delta, 0, seed, PtMode::Periodic,
                                                        p, false, 100);
        for (const auto& e : pt.step_errors)
            if (e.upper > delta) ++failures;
        ShadowResult r = construct_periodic_shadow(T, split, pt, eps);
        if (!r.ok || r.cert.max_error.upper >= eps ||
            !r.cert.periodic_residual || *r.cert.periodic_residual >= 1e-8) {
            ++failures;
            c.detail << "seed " << seed << " p " << p << ": "
                     << (r.ok ? "bound" : r.error) << "; ";
        }
    }
    c.expect(failures == 0, std::to_string(failures) + " seeded periodic runs failed");
}

// --------------------------------------------------------------------------
// Criterion 4: bootstrap stage bounds

Pseudotrajectory small_z_window_pt(const OperatorDescriptor& T, double radius,
                                   std::int64_t half_window, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const SpaceSpec& sp = T.ambient[0];
    Pseudotrajectory pt;
    pt.start_index = -half_window;
    for (std::int64_t j = -half_window; j <= half_window; ++j) {
        CoordinateVector v;
        const std::int64_t dim_hi =
            sp.truncation_dim ? sp.origin + *sp.truncation_dim - 1 : 20;
        const std::int64_t dim_lo = sp.index_set == IndexSet::Bilateral ? -20 : sp.origin;
        std::uniform_int_distribution<std::int64_t> span(dim_lo, dim_hi);
        for (int i = 0; i < 2; ++i) v.add({0, span(rng)}, Scalar{gauss(rng), gauss(rng)});
        const double nv = seminorm_eval(T.ambient, v, 1);
        if (nv > 0.0) v *= Scalar{radius / nv, 0.0};
        pt.points.push_back(v);
    }
    for (std::size_t j = 0; j + 1 < pt.points.size(); ++j)
        pt.step_errors.push_back(
            frechet_distance(T.ambient, apply(T, pt.points[j]), pt.points[j + 1]));
    return pt;
}

void criterion_4(Check& c) {
    const double eps = 0.1;
    struct Item {
        std::string name;
        OperatorDescriptor op;
        FiniteShadowSolver solver;
    };
    std::vector<Item> battery;
    {
        Eigen::MatrixXcd m(2, 2);
        m << Scalar{0.5, 0.0}, Scalar{0.0, 0.0}, Scalar{0.0, 0.0}, Scalar{2.0, 0.0};
        OperatorDescriptor diag = OperatorDescriptor::matrix(m);
        battery.push_back({"diag(1/2,2)", diag, make_least_squares_solver(diag, 8.0)});
    }
    {
        OperatorDescriptor cshift = condition_c_shift();
        const auto* sh = std::get_if<OperatorDescriptor::Shift>(&cshift.node);
        const HyperbolicSplitting split = make_shift_splitting(sh->w, cshift.space());
        battery.push_back({"condition-(C) shift", cshift, make_hyperbolic_solver(cshift, split)});
    }
    for (auto& item : battery) {
        const double delta = eps / (4.0 * item.solver.linearity);
        const double gain = 3.0;  // 1 + ||T|| for the battery members
        Pseudotrajectory pt = small_z_window_pt(item.op, delta / gain, 20, 7);
        BootstrapResult r = finite_to_infinite_shadow(item.op, item.solver, pt, eps, 5);
        c.expect(r.ok, item.name + ": " + (r.ok ? "" : r.error));
        if (!r.ok) continue;
        for (std::size_t k = 1; k < r.stages.size(); ++k) {
            const auto& st = r.stages[k];
            c.expect(st.gap_to_prev < st.gap_bound + 1e-12,
                     item.name + " stage " + std::to_string(k + 1) + " gap " +
                         std::to_string(st.gap_to_prev) + " bound " +
                         std::to_string(st.gap_bound));
        }
        c.expect(r.final_check.status == ShadowCheck::Status::Accepted,
                 item.name + ": final point eps-shadows the window");
    }
}

// --------------------------------------------------------------------------
// Criterion 5: chain constructors re-verify

void criterion_5(Check& c) {
    const OperatorDescriptor uni = unweighted_on(SpaceSpec::lp(2.0));
    const OperatorDescriptor bi = unweighted_on(SpaceSpec::lp(2.0, IndexSet::Bilateral));
    const std::vector<double> deltas{0.5, 0.1, 0.02};
    for (std::int64_t i = 1; i <= 5; ++i) {
        for (double d : deltas) {
            auto r1 = build_chain_zero_to_e(uni, i, d);
            c.expect(r1.ok, "unilateral 0->e_" + std::to_string(i) + " at " + std::to_string(d) +
                                (r1.ok ? "" : ": " + r1.error));
            if (r1.ok) {
                auto chk = verify_chain(uni, r1.chain.points, d);
                c.expect(chk.status == ChainCheck::Status::Accepted, "re-verify unilateral chain");
            }
            auto r2 = build_chain_zero_to_e(bi, i, d);
            c.expect(r2.ok, "bilateral 0->e_" + std::to_string(i));
            auto r3 = build_chain_e_to_zero(bi, i, d);
            c.expect(r3.ok, "bilateral e_{-" + std::to_string(i) + "}->0 at " + std::to_string(d) +
                                (r3.ok ? "" : ": " + r3.error));
            if (r3.ok) {
                auto chk = verify_chain(bi, r3.chain.points, d);
                c.expect(chk.status == ChainCheck::Status::Accepted, "re-verify bilateral chain");
            }
        }
    }
}

// --------------------------------------------------------------------------
// Criterion 6: oracle concordance

void criterion_6(Check& c) {
    const double delta = 0.05, box = 4.0, h = 0.025;
    auto mat1 = [](double v) {
        Eigen::MatrixXcd m(1, 1);
        m << Scalar{v, 0.0};
        return OperatorDescriptor::matrix(m);
    };
    Eigen::MatrixXcd rot(2, 2);
    rot << Scalar{0.0, 0.0}, Scalar{-1.0, 0.0}, Scalar{1.0, 0.0}, Scalar{0.0, 0.0};
    Eigen::MatrixXcd hyp(2, 2);
    hyp << Scalar{0.5, 0.0}, Scalar{0.0, 0.0}, Scalar{0.0, 0.0}, Scalar{2.0, 0.0};

    auto far1 = CoordinateVector::unit(0);  // x = 1
    CoordinateVector far2 = CoordinateVector::unit(0);
    far2.set({0, 1}, Scalar{1.0, 0.0});  // (1, 1)
    const CoordinateVector zero{};

    {
        auto r = brute_force_chain_search(mat1(2.0), far1, far1, delta, box, h);
        c.expect(!r.found, "2*id: no return chain away from 0");
        auto r0 = brute_force_chain_search(mat1(2.0), zero, zero, delta, box, h);
        c.expect(r0.found, "2*id: trivial chain at 0");
    }
    {
        auto r = brute_force_chain_search(mat1(0.5), far1, far1, delta, box, h);
        c.expect(!r.found, "id/2: no return chain away from 0");
        auto r0 = brute_force_chain_search(mat1(0.5), zero, zero, delta, box, h);
        c.expect(r0.found, "id/2: trivial chain at 0");
    }
    {
        auto rot_op = OperatorDescriptor::matrix(rot);
        CoordinateVector p1 = CoordinateVector::unit(0);
        auto r = brute_force_chain_search(rot_op, p1, p1, delta, box, h);
        c.expect(r.found && r.chain.length() == 4, "rotation: period-4 return chain");
        CoordinateVector p2;
        p2.set({0, 0}, Scalar{0.5, 0.0});
        p2.set({0, 1}, Scalar{-0.75, 0.0});
        auto r2 = brute_force_chain_search(rot_op, p2, p2, delta, box, h);
        c.expect(r2.found, "rotation: return chain from a generic grid point");
    }
    {
        auto hyp_op = OperatorDescriptor::matrix(hyp);
        auto r = brute_force_chain_search(hyp_op, far2, far2, delta, box, h);
        c.expect(!r.found, "diag(1/2,2): no return chain away from 0");
        auto r0 = brute_force_chain_search(hyp_op, zero, zero, delta, box, h);
        c.expect(r0.found, "diag(1/2,2): trivial chain at 0");
    }
}

// --------------------------------------------------------------------------
// Criterion 7: invariance suite

void criterion_7(Check& c) {
    std::vector<std::pair<std::string, OperatorDescriptor>> battery;
    battery.push_back({"B Hardy", unweighted_on(SpaceSpec::weighted_l2(DiagFamily::Ones))});
    battery.push_back({"B Dirichlet", unweighted_on(SpaceSpec::weighted_l2(DiagFamily::Dirichlet))});
    battery.push_back({"B Bergman", unweighted_on(SpaceSpec::weighted_l2(DiagFamily::Bergman))});
    battery.push_back({"B entire", unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ))});
    battery.push_back({"B rapid", unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::JPowK))});
    battery.push_back({"B disc", unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::ExpNegJOverK))});
    battery.push_back({"B log", unweighted_on(SpaceSpec::koethe_space(2.0, KoetheForm::LogPowK))});
    battery.push_back({"B bilateral", unweighted_on(SpaceSpec::lp(2.0, IndexSet::Bilateral))});
    battery.push_back({"condition-C", condition_c_shift()});
    battery.push_back({"expansive", corollary_56_shift(2.0)});
    battery.push_back({"diag 1/2", OperatorDescriptor::diagonal({0.5, 0.0}, SpaceSpec::lp(2.0))});
    battery.push_back({"diag i", OperatorDescriptor::diagonal({0.0, 1.0}, SpaceSpec::lp(2.0))});
    c.expect(battery.size() == 12, "battery size");

    int violations = 0;
    for (const auto& [name, op] : battery) {
        const ChainStatus base = classify_chain_recurrence(op).status;
        auto check = [&](const std::string& tn, const OperatorDescriptor& t) {
            const ChainStatus s = classify_chain_recurrence(t).status;
            if (s != base) {
                ++violations;
                c.detail << name << " under " << tn << ": " << to_string(s) << " vs "
                         << to_string(base) << "; ";
            }
        };
        check("rotate(i)", transform(op, Transform::rotate({0.0, 1.0})));
        check("rotate(-1)", transform(op, Transform::rotate({-1.0, 0.0})));
        check("power 2", transform(op, Transform::power_of(2)));
        check("power 3", transform(op, Transform::power_of(3)));
        if (is_invertible(op)) check("inverse", transform(op, Transform::inverse()));
        check("direct sum with self", transform(op, Transform::direct_sum_with(op)));
    }

    // Oracle side: reachability verdicts invariant under rotation, powers and
    // inverses on the matrix battery.
    const double delta = 0.05, box = 4.0, h = 0.025;
    auto dense_of = [](const OperatorDescriptor& t) {
        return std::get<OperatorDescriptor::Matrix>(t.node).m;
    };
    std::vector<Eigen::MatrixXcd> mats;
    {
        Eigen::MatrixXcd m1(1, 1), m2(1, 1), r(2, 2), hyp(2, 2);
        m1 << Scalar{2.0, 0.0};
        m2 << Scalar{0.5, 0.0};
        r << Scalar{0.0, 0.0}, Scalar{-1.0, 0.0}, Scalar{1.0, 0.0}, Scalar{0.0, 0.0};
        hyp << Scalar{0.5, 0.0}, Scalar{0.0, 0.0}, Scalar{0.0, 0.0}, Scalar{2.0, 0.0};
        mats = {m1, m2, r, hyp};
    }
    for (const auto& m : mats) {
        CoordinateVector probe = CoordinateVector::unit(0);
        if (m.rows() > 1) probe.set({0, 1}, Scalar{1.0, 0.0});
        auto verdict = [&](const Eigen::MatrixXcd& mm) {
            return brute_force_chain_search(OperatorDescriptor::matrix(mm), probe, probe, delta,
                                            box, h)
                .found;
        };
        const bool base = verdict(m);
        if (verdict(-m) != base) ++violations;
        if (verdict(m * m) != base) ++violations;
        if (verdict(m * m * m) != base) ++violations;
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
        if (lu.isInvertible() && verdict(lu.inverse()) != base) ++violations;
        (void)dense_of;
    }
    c.expect(violations == 0, std::to_string(violations) + " invariance violations");
}

// --------------------------------------------------------------------------
// Criterion 8: contraction bound

void criterion_8(Check& c) {
    SpaceSpec sp = SpaceSpec::koethe_space(2.0, KoetheForm::KPowJ, 40);
    const OperatorDescriptor T = OperatorDescriptor::diagonal({0.5, 0.0}, sp);
    const double delta = 0.01;
    const double eps = delta / (1.0 - 0.5) + 1e-9;
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Pseudotrajectory pt = generate_pseudotrajectory(T, CoordinateVector::unit(1), delta, 40,
                                                        seed, PtMode::UniformNoise, 1,
                                                        /*per_seminorm=*/true, 60);
        ShadowCheck chk = verify_shadowing(T, pt, pt.points[0], eps);
        if (chk.status != ShadowCheck::Status::Accepted) {
            ++failures;
            if (failures < 4)
                c.detail << "seed " << seed << " worst " << chk.cert.max_error.upper << "; ";
        }
    }
    c.expect(failures == 0, std::to_string(failures) + " of 100 contraction-bound runs failed");
}

// --------------------------------------------------------------------------
// Criterion 9: chaos pipeline

void criterion_9(Check& c) {
    // chain_to_density on the doubled backward shift.
    const OperatorDescriptor T = shift_on(SpaceSpec::lp(2.0), WeightSpec::constant({2.0, 0.0}));
    const double eta = 0.1;
    const CoordinateVector y = Scalar{2.0, 0.0} * CoordinateVector::unit(1);

    auto down = build_chain_to_zero(T, y, eta);
    c.expect(down.ok, "staircase y->0: " + down.error);
    auto up = build_chain_zero_to_e(T, 1, eta / 2.0);
    c.expect(up.ok, "series chain 0->e_1: " + up.error);
    if (!down.ok || !up.ok) return;
    std::vector<CoordinateVector> loop_pts = down.chain.points;
    for (std::size_t i = 1; i < up.chain.points.size(); ++i)
        loop_pts.push_back(Scalar{2.0, 0.0} * up.chain.points[i]);
    ChainCheck loop = verify_chain(T, loop_pts, eta);
    c.expect(loop.status == ChainCheck::Status::Accepted, "loop chain certifies at eta");
    if (loop.status != ChainCheck::Status::Accepted) return;

    ChainToDensityResult r = chain_to_density(T, *loop.chain, 10000);
    c.expect(r.ok, "chain_to_density: " + r.error);
    if (r.ok) {
        c.expect(r.density.running_max >= r.density_lower - 1e-12,
                 "measured density " + std::to_string(r.density.running_max) + " >= 1/k = " +
                     std::to_string(r.density_lower));
        c.expect(r.distance_to_y < 1.0, "shadow within 1 of y");
    }

    // Distributionally irregular block vector at horizon 1e5.
    const OperatorDescriptor T0 =
        shift_on(SpaceSpec::lp(2.0, IndexSet::Unilateral, 0), WeightSpec::constant({2.0, 0.0}));
    const std::vector<std::int64_t> bounds{8, 200, 5000};
    LogDenseVector x = block_plateau_vector(bounds, std::log2(1e-4), std::log2(1e4), 100100);
    DistributionalReport rep =
        detect_distributionally_irregular_logdense(T0, x, 100000, 1e-3, 1e3, 1);
    c.expect(rep.small_density.running_max >= 0.95,
             "small density " + std::to_string(rep.small_density.running_max));
    c.expect(rep.large_density.running_max >= 0.95,
             "large density " + std::to_string(rep.large_density.running_max));
}

// --------------------------------------------------------------------------
// Criterion 10: negative controls

void criterion_10(Check& c) {
    EntireDemoResult demo = entire_demo({2.0, 0.0}, 2, 0.1, 30);
    c.expect(demo.ok, "entire demo: " + demo.error);
    if (demo.ok) {
        c.expect(demo.certified_steps >= 10, "step certificates through horizon 10");
        double e10 = 0.0, e30 = 0.0;
        for (const auto& row : demo.growth_table) {
            if (row.horizon == 10) e10 = row.error;
            if (row.horizon == 30) e30 = row.error;
        }
        c.expect(e10 > 0.0 && e30 >= 2.0 * e10,
                 "error growth " + std::to_string(e10) + " -> " + std::to_string(e30));
    }

    Eigen::MatrixXcd id1(1, 1);
    id1 << Scalar{1.0, 0.0};
    const OperatorDescriptor idop = OperatorDescriptor::matrix(id1);
    const double delta = 0.01;
    std::vector<CoordinateVector> chain;
    for (int j = 0; j <= 120; ++j)
        chain.push_back(Scalar{delta * j, 0.0} * CoordinateVector::unit(0));
    LeastSquaresShadow ls = finite_shadow_least_squares(idop, chain, delta, 10.0 * delta);
    c.expect(!ls.ok, "identity least squares fails for long chains (sup " +
                         std::to_string(ls.sup_error) + ")");
}

CriterionResult run_one(int id, const std::string& name, const std::function<void(Check&)>& f) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    const auto t0 = Clock::now();
    Check c;
    try {
        f(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail << "exception: " << e.what();
    }
    r.pass = c.pass;
    r.detail = c.detail.str();
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance() {
    std::vector<CriterionResult> out;
    out.push_back(run_one(1, "golden classification table", criterion_1));
    out.push_back(run_one(2, "golden shadowing table", criterion_2));
    out.push_back(run_one(3, "periodic shadow quantitative bound", criterion_3));
    out.push_back(run_one(4, "bootstrap stage bounds", criterion_4));
    out.push_back(run_one(5, "chain constructors re-verify", criterion_5));
    out.push_back(run_one(6, "grid oracle concordance", criterion_6));
    out.push_back(run_one(7, "invariance suite", criterion_7));
    out.push_back(run_one(8, "contraction shadowing bound", criterion_8));
    out.push_back(run_one(9, "chaos pipeline", criterion_9));
    out.push_back(run_one(10, "negative controls", criterion_10));
    return out;
}

std::string acceptance_csv(const std::vector<CriterionResult>& results) {
    std::ostringstream os;
    os << "criterion,name,pass,seconds,detail\n";
    for (const auto& r : results) {
        std::string d = r.detail;
        for (auto& ch : d)
            if (ch == ',' || ch == '\n') ch = ';';
        os << r.id << "," << r.name << "," << (r.pass ? "pass" : "FAIL") << "," << r.seconds
           << "," << d << "\n";
    }
    return os.str();
}

}  // namespace lindyn

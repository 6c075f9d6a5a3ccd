#include "lindyn/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lindyn/chaos.hpp"
#include "lindyn/entire.hpp"
#include "lindyn/oracle.hpp"

namespace lindyn {

namespace {

using nlohmann::json;

Scalar scalar_from(const json& j) {
    if (j.is_number()) return Scalar{j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2)
        return Scalar{j[0].get<double>(), j[1].get<double>()};
    throw std::invalid_argument("config: scalar must be a number or [re, im]");
}

json scalar_to(const Scalar& s) {
    if (s.imag() == 0.0) return json(s.real());
    return json::array({s.real(), s.imag()});
}

std::vector<Scalar> scalars_from(const json& j) {
    std::vector<Scalar> v;
    for (const auto& e : j) v.push_back(scalar_from(e));
    return v;
}

KoetheForm koethe_form_from(const std::string& s) {
    if (s == "ones") return KoetheForm::Ones;
    if (s == "k_pow_j") return KoetheForm::KPowJ;
    if (s == "j_pow_k") return KoetheForm::JPowK;
    if (s == "exp_neg_j_over_k") return KoetheForm::ExpNegJOverK;
    if (s == "log_pow_k") return KoetheForm::LogPowK;
    if (s == "table") return KoetheForm::Table;
    throw std::invalid_argument("config: unknown Koethe form " + s);
}

const char* koethe_form_name(KoetheForm f) {
    switch (f) {
        case KoetheForm::Ones: return "ones";
        case KoetheForm::KPowJ: return "k_pow_j";
        case KoetheForm::JPowK: return "j_pow_k";
        case KoetheForm::ExpNegJOverK: return "exp_neg_j_over_k";
        case KoetheForm::LogPowK: return "log_pow_k";
        case KoetheForm::Table: return "table";
    }
    return "?";
}

DiagFamily diag_family_from(const std::string& s) {
    if (s == "ones") return DiagFamily::Ones;
    if (s == "dirichlet") return DiagFamily::Dirichlet;
    if (s == "bergman") return DiagFamily::Bergman;
    if (s == "table") return DiagFamily::Table;
    throw std::invalid_argument("config: unknown weight family " + s);
}

const char* diag_family_name(DiagFamily f) {
    switch (f) {
        case DiagFamily::Ones: return "ones";
        case DiagFamily::Dirichlet: return "dirichlet";
        case DiagFamily::Bergman: return "bergman";
        case DiagFamily::Table: return "table";
    }
    return "?";
}

SpaceSpec space_from(const json& j) {
    SpaceSpec s;
    const std::string ix = j.value("index_set", "unilateral");
    s.index_set = ix == "bilateral" ? IndexSet::Bilateral : IndexSet::Unilateral;
    s.p = j.value("p", 2.0);
    s.origin = j.value("origin", s.index_set == IndexSet::Bilateral ? 0 : 1);
    s.k_max = j.value("k_max", 20);
    s.real_only = j.value("real_only", false);
    if (j.contains("dim")) s.truncation_dim = j["dim"].get<std::int64_t>();
    const json sem = j.value("seminorms", json{{"kind", "unit"}});
    const std::string kind = sem.value("kind", "unit");
    if (kind == "unit") {
        s.source = SpaceSpec::Source::Unit;
    } else if (kind == "weighted") {
        s.source = SpaceSpec::Source::Diag;
        s.diag.family = diag_family_from(sem.value("family", "ones"));
        if (s.diag.family == DiagFamily::Table) {
            for (const auto& v : sem.value("table", json::array()))
                s.diag.table.push_back(v.get<double>());
            s.diag.table_tail = sem.value("tail", 1.0);
            s.diag.table_start = sem.value("start", s.origin);
        }
    } else if (kind == "koethe") {
        s.source = SpaceSpec::Source::Koethe;
        s.koethe.form = koethe_form_from(sem.value("form", "ones"));
        if (s.koethe.form == KoetheForm::Table)
            for (const auto& row : sem.value("table", json::array())) {
                std::vector<double> r;
                for (const auto& v : row) r.push_back(v.get<double>());
                s.koethe.table.push_back(std::move(r));
            }
    } else {
        throw std::invalid_argument("config: unknown seminorm kind " + kind);
    }
    s.validate();
    return s;
}

json space_to(const SpaceSpec& s) {
    json j;
    j["index_set"] = s.index_set == IndexSet::Bilateral ? "bilateral" : "unilateral";
    j["p"] = s.p;
    j["origin"] = s.origin;
    j["k_max"] = s.k_max;
    if (s.real_only) j["real_only"] = true;
    if (s.truncation_dim) j["dim"] = *s.truncation_dim;
    json sem;
    switch (s.source) {
        case SpaceSpec::Source::Unit: sem["kind"] = "unit"; break;
        case SpaceSpec::Source::Diag:
            sem["kind"] = "weighted";
            sem["family"] = diag_family_name(s.diag.family);
            if (s.diag.family == DiagFamily::Table) {
                sem["table"] = s.diag.table;
                sem["tail"] = s.diag.table_tail;
                sem["start"] = s.diag.table_start;
            }
            break;
        case SpaceSpec::Source::Koethe:
            sem["kind"] = "koethe";
            sem["form"] = koethe_form_name(s.koethe.form);
            if (s.koethe.form == KoetheForm::Table) sem["table"] = s.koethe.table;
            break;
    }
    j["seminorms"] = sem;
    return j;
}

WeightSpec weights_from(const json& j, WeightDomain domain) {
    if (j.value("ramp", false)) {
        WeightSpec w = WeightSpec::ramp();
        if (j.contains("scale")) w = w.scaled(scalar_from(j["scale"]));
        return w;
    }
    WeightSpec w;
    w.domain = domain;
    w.prefix = scalars_from(j.value("prefix", json::array()));
    w.prefix_start = j.value("prefix_start", 1);
    w.tail_pos = scalars_from(j.value("tail_pos", json::array({1.0})));
    if (domain == WeightDomain::Bilateral)
        w.tail_neg = scalars_from(j.value("tail_neg", json::array({1.0})));
    if (j.contains("scale")) w.scale = scalar_from(j["scale"]);
    w.irregular = j.value("irregular", false);
    w.validate();
    return w;
}

OperatorDescriptor operator_from(const json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "backward_shift") {
        SpaceSpec sp = space_from(j.at("space"));
        const WeightDomain dom = sp.index_set == IndexSet::Bilateral ? WeightDomain::Bilateral
                                                                     : WeightDomain::Unilateral;
        WeightSpec w = j.contains("weights") ? weights_from(j["weights"], dom)
                                             : WeightSpec::constant({1.0, 0.0}, dom);
        return OperatorDescriptor::backward_shift(std::move(w), std::move(sp));
    }
    if (kind == "diagonal") {
        SpaceSpec sp = space_from(j.at("space"));
        if (j.contains("table")) {
            return OperatorDescriptor::diagonal_table(scalars_from(j["table"]),
                                                      scalar_from(j.value("tail", json(1.0))),
                                                      std::move(sp));
        }
        return OperatorDescriptor::diagonal(scalar_from(j.at("lambda")), std::move(sp));
    }
    if (kind == "scalar_multiple") {
        OperatorDescriptor child = operator_from(j.at("child"));
        OperatorDescriptor out;
        out.ambient = child.ambient;
        out.node = OperatorDescriptor::ScalarMultiple{
            scalar_from(j.at("lambda")), std::make_shared<OperatorDescriptor>(std::move(child))};
        return out;
    }
    if (kind == "power") {
        OperatorDescriptor child = operator_from(j.at("child"));
        return transform(child, Transform::power_of(j.at("n").get<int>()));
    }
    if (kind == "inverse") {
        OperatorDescriptor child = operator_from(j.at("child"));
        return transform(child, Transform::inverse());
    }
    if (kind == "direct_sum") {
        const auto& arr = j.at("children");
        if (arr.empty()) throw std::invalid_argument("config: empty direct sum");
        OperatorDescriptor acc = operator_from(arr[0]);
        for (std::size_t i = 1; i < arr.size(); ++i)
            acc = transform(acc, Transform::direct_sum_with(operator_from(arr[i])));
        return acc;
    }
    if (kind == "matrix") {
        const auto& rows = j.at("rows");
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXcd m(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c)
                m(r, c) = scalar_from(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        return OperatorDescriptor::matrix(std::move(m), j.value("p", 2.0));
    }
    throw std::invalid_argument("config: unknown operator kind " + kind);
}

json weights_to(const WeightSpec& w) {
    json j;
    if (w.kind == WeightSpec::Kind::Ramp) {
        j["ramp"] = true;
    } else {
        json pre = json::array(), tp = json::array(), tn = json::array();
        for (const auto& c : w.prefix) pre.push_back(scalar_to(c));
        for (const auto& c : w.tail_pos) tp.push_back(scalar_to(c));
        for (const auto& c : w.tail_neg) tn.push_back(scalar_to(c));
        j["prefix"] = pre;
        j["prefix_start"] = w.prefix_start;
        j["tail_pos"] = tp;
        if (w.domain == WeightDomain::Bilateral) j["tail_neg"] = tn;
    }
    if (w.scale != Scalar{1.0, 0.0}) j["scale"] = scalar_to(w.scale);
    if (w.irregular) j["irregular"] = true;
    return j;
}

json operator_to(const OperatorDescriptor& t) {
    return std::visit(
        [&](const auto& n) -> json {
            using N = std::decay_t<decltype(n)>;
            json j;
            if constexpr (std::is_same_v<N, OperatorDescriptor::Shift>) {
                j["kind"] = "backward_shift";
                j["space"] = space_to(t.space());
                j["weights"] = weights_to(n.w);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Diagonal>) {
                j["kind"] = "diagonal";
                j["space"] = space_to(t.space());
                if (n.is_scalar) {
                    j["lambda"] = scalar_to(n.scalar);
                } else {
                    json tab = json::array();
                    for (const auto& c : n.table) tab.push_back(scalar_to(c));
                    j["table"] = tab;
                    j["tail"] = scalar_to(n.table_tail);
                }
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::ScalarMultiple>) {
                j["kind"] = "scalar_multiple";
                j["lambda"] = scalar_to(n.lambda);
                j["child"] = operator_to(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Power>) {
                j["kind"] = "power";
                j["n"] = n.n;
                j["child"] = operator_to(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Inverse>) {
                j["kind"] = "inverse";
                j["child"] = operator_to(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::DirectSum>) {
                j["kind"] = "direct_sum";
                json ch = json::array();
                for (const auto& c : n.children) ch.push_back(operator_to(*c));
                j["children"] = ch;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Matrix>) {
                j["kind"] = "matrix";
                json rows = json::array();
                for (Eigen::Index r = 0; r < n.m.rows(); ++r) {
                    json row = json::array();
                    for (Eigen::Index c = 0; c < n.m.cols(); ++c) row.push_back(scalar_to(n.m(r, c)));
                    rows.push_back(row);
                }
                j["rows"] = rows;
            }
            return j;
        },
        t.node);
}

}  // namespace

SpaceSpec space_from_json_text(const std::string& text) { return space_from(json::parse(text)); }

OperatorDescriptor operator_from_json_text(const std::string& text) {
    return operator_from(json::parse(text));
}

std::string space_to_json_text(const SpaceSpec& s) { return space_to(s).dump(); }

std::string operator_to_json_text(const OperatorDescriptor& t) { return operator_to(t).dump(); }

ExperimentConfig parse_experiment(const std::string& text, std::uint64_t seed_override,
                                  int k_max_override, std::int64_t budget_override) {
    json j = json::parse(text);
    ExperimentConfig cfg;
    cfg.command = j.at("command").get<std::string>();
    json op = j.at("operator");
    if (k_max_override > 0) {
        // Applies to every nested space block.
        std::function<void(json&)> patch = [&](json& node) {
            if (node.contains("space")) node["space"]["k_max"] = k_max_override;
            if (node.contains("child")) patch(node["child"]);
            if (node.contains("children"))
                for (auto& c : node["children"]) patch(c);
        };
        patch(op);
    }
    cfg.op = operator_from(op);
    cfg.seed = seed_override ? seed_override : j.value("seed", 1);
    cfg.budget_terms = budget_override ? budget_override : j.value("budget_terms", 1'000'000);
    cfg.params_json = j.value("params", json::object()).dump();

    json canon;
    canon["command"] = cfg.command;
    canon["operator"] = operator_to(cfg.op);
    canon["seed"] = cfg.seed;
    canon["budget_terms"] = cfg.budget_terms;
    canon["params"] = json::parse(cfg.params_json);
    cfg.canonical = canon.dump();
    return cfg;
}

// ---------------------------------------------------------------------------
// Serializations

std::string chain_to_text(const Chain& chain, const OperatorDescriptor& T) {
    std::ostringstream os;
    os << "# chain operator=" << T.render() << " delta=" << chain.delta
       << " length=" << chain.length() << "\n";
    for (const auto& p : chain.points) {
        bool first = true;
        for (const auto& [c, v] : p.entries()) {
            if (!first) os << " ";
            first = false;
            if (c.block != 0) os << c.block << "/";
            os << c.index << ":" << v.real();
            if (v.imag() != 0.0) os << (v.imag() < 0 ? "" : "+") << v.imag() << "i";
        }
        if (first) os << "0:0";
        os << "\n";
    }
    return os.str();
}

std::string certificate_to_text(const ShadowCertificate& cert, const OperatorDescriptor& T) {
    std::ostringstream os;
    os << "# shadow operator=" << T.render() << " eps=" << cert.epsilon << "\n";
    bool first = true;
    for (const auto& [c, v] : cert.point.entries()) {
        if (!first) os << " ";
        first = false;
        os << c.index << ":" << v.real();
        if (v.imag() != 0.0) os << (v.imag() < 0 ? "" : "+") << v.imag() << "i";
    }
    if (first) os << "0:0";
    os << "\n";
    os << "# window=[" << cert.window_lo << "," << cert.window_hi << "]"
       << " max_error=[" << cert.max_error.lower << "," << cert.max_error.upper << "]"
       << " tail_bound=" << cert.tail_bound;
    if (cert.periodic_residual) os << " periodic_residual=" << *cert.periodic_residual;
    os << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Experiment runner

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
}

json trilean_json(Trilean t) { return json(std::string(to_string(t))); }

int run_classify(const ExperimentConfig& cfg, json& report) {
    const ChainVerdict cv = classify_chain_recurrence(cfg.op);
    report["chain_recurrence"] = {{"status", to_string(cv.status)},
                                  {"all_k_certified", cv.all_k_certified},
                                  {"note", cv.note}};
    json ev = json::array();
    for (const auto& e : cv.evidence)
        ev.push_back({{"k", e.k},
                      {"side", e.side},
                      {"class", to_string(e.cls)},
                      {"method", e.method},
                      {"growth", e.term_growth.describe()},
                      {"partial_sum", e.partial_sum}});
    report["chain_recurrence"]["evidence"] = ev;

    bool undecided = cv.status == ChainStatus::Undecided;
    try {
        const TransitivityVerdict tv = transitivity_test(cfg.op);
        report["transitivity"] = {{"status", to_string(tv.transitive)},
                                  {"evidence", tv.evidence}};
        undecided = undecided && tv.transitive == Trilean::Undecided;
    } catch (const std::domain_error& e) {
        report["transitivity"] = {{"status", "not-applicable"}, {"evidence", e.what()}};
    }
    try {
        const ShadowingClassification sc = classify_shadowing(cfg.op);
        report["shadowing"] = {{"positive_shadowing", trilean_json(sc.positive_shadowing)},
                               {"generalized_hyperbolic", trilean_json(sc.generalized_hyperbolic)},
                               {"hyperbolic", trilean_json(sc.hyperbolic)},
                               {"periodic_shadowing", trilean_json(sc.periodic_shadowing)},
                               {"matched_condition", sc.matched_condition},
                               {"note", sc.note}};
    } catch (const std::domain_error& e) {
        report["shadowing"] = {{"matched_condition", "not-applicable"}, {"note", e.what()}};
    }
    return undecided ? 3 : 0;
}

int run_chain(const ExperimentConfig& cfg, const std::filesystem::path& out, json& report) {
    const json params = json::parse(cfg.params_json);
    const double delta = params.value("delta", 0.5);
    const std::int64_t i = params.value("i", 1);
    const std::string dir = params.value("direction", "zero_to_e");
    ChainBuildResult r = dir == "e_to_zero" ? build_chain_e_to_zero(cfg.op, i, delta)
                                            : build_chain_zero_to_e(cfg.op, i, delta);
    report["direction"] = dir;
    report["delta"] = delta;
    report["i"] = i;
    if (!r.ok) {
        report["ok"] = false;
        report["error"] = r.error;
        return 3;
    }
    const std::string text = chain_to_text(r.chain, cfg.op);
    const std::string hash = to_hex(fnv1a(text));
    write_file(out / ("chain-" + hash + ".txt"), text);
    report["ok"] = true;
    report["chain_hash"] = hash;
    report["length"] = r.chain.length();
    json errs = json::array();
    for (const auto& e : r.chain.step_errors) errs.push_back({e.lower, e.upper});
    report["step_errors"] = errs;
    return 0;
}

int run_shadow(const ExperimentConfig& cfg, const std::filesystem::path& out, json& report) {
    const json params = json::parse(cfg.params_json);
    const double delta = params.value("delta", 0.01);
    const double eps = params.value("eps", 0.1);
    const std::int64_t horizon = params.value("horizon", 50);
    const std::string mode_s = params.value("mode", "noise");
    const int period = params.value("period", 4);
    const PtMode mode = mode_s == "drift" ? PtMode::AdversarialDrift
                                          : mode_s == "periodic" ? PtMode::Periodic
                                                                 : PtMode::UniformNoise;
    Pseudotrajectory pt = generate_pseudotrajectory(cfg.op, {}, delta, horizon, cfg.seed, mode,
                                                    period);
    report["delta"] = delta;
    report["eps"] = eps;
    report["mode"] = mode_s;
    report["provenance"] = pt.provenance;

    const auto* sh = std::get_if<OperatorDescriptor::Shift>(&cfg.op.node);
    HyperbolicSplitting split;
    if (sh) {
        split = make_shift_splitting(sh->w, cfg.op.space());
    } else if (const auto* mat = std::get_if<OperatorDescriptor::Matrix>(&cfg.op.node)) {
        std::vector<std::int64_t> m_idx;
        for (Eigen::Index q = 0; q < mat->m.rows(); ++q)
            if (std::abs(mat->m(q, q)) < 1.0) m_idx.push_back(q);
        split = make_matrix_splitting(mat->m, m_idx);
    } else {
        report["error"] = "no splitting construction for " + cfg.op.kind_name();
        return 3;
    }
    report["splitting"] = {{"alpha", split.alpha},
                           {"beta", split.beta},
                           {"t", split.t},
                           {"estimated", split.estimated}};
    ShadowResult r = mode == PtMode::Periodic
                         ? construct_periodic_shadow(cfg.op, split, pt, eps)
                         : shadow_hyperbolic_split(cfg.op, split, pt, eps);
    report["ok"] = r.ok;
    if (!r.ok) {
        report["error"] = r.error;
        return 3;
    }
    const std::string text = certificate_to_text(r.cert, cfg.op);
    write_file(out / ("certificate-" + to_hex(fnv1a(text)) + ".txt"), text);
    report["max_error"] = {r.cert.max_error.lower, r.cert.max_error.upper};
    if (r.cert.periodic_residual) report["periodic_residual"] = *r.cert.periodic_residual;
    return 0;
}

int run_chaos(const ExperimentConfig& cfg, const std::filesystem::path& out, json& report) {
    const json params = json::parse(cfg.params_json);
    const std::int64_t horizon = params.value("horizon", 10000);
    const double sigma = params.value("sigma", 1e-3);
    const double lambda = params.value("lambda", 1e3);
    const int m = params.value("m", 1);

    CoordinateVector x;
    if (params.contains("x"))
        for (const auto& e : params["x"])
            x.set({0, e[0].get<std::int64_t>()}, scalar_from(e[1]));
    else
        x = CoordinateVector::unit(cfg.op.ambient[0].index_set == IndexSet::Bilateral
                                       ? 0
                                       : cfg.op.ambient[0].origin);

    DistributionalReport dr = detect_distributionally_irregular(cfg.op, x, horizon, sigma, lambda,
                                                                m, 0.95, /*collect_trace=*/true);
    report["small_density"] = dr.small_density.running_max;
    report["large_density"] = dr.large_density.running_max;
    report["irregular_at_level"] = dr.irregular_at_level;
    report["truncated"] = dr.truncated;

    // Per-step orbit table plus a summary block of checkpoint densities.
    std::ostringstream csv;
    csv << "n,dist_to_zero,norm_m,in_I,in_J\n";
    for (const auto& row : dr.trace)
        csv << row.n << "," << row.dist << "," << row.norm_m << "," << (row.in_i ? 1 : 0) << ","
            << (row.in_j ? 1 : 0) << "\n";
    csv << "# summary checkpoints: n,small_density,large_density\n";
    for (std::size_t i = 0; i < dr.small_density.checkpoints.size(); ++i)
        csv << "# " << dr.small_density.checkpoints[i].first << ","
            << dr.small_density.checkpoints[i].second << ","
            << dr.large_density.checkpoints[i].second << "\n";
    write_file(out / "orbit.csv", csv.str());
    return 0;
}

int run_invariance(const ExperimentConfig& cfg, json& report) {
    const ChainVerdict base = classify_chain_recurrence(cfg.op);
    json rows = json::array();
    bool all_agree = true;
    auto check = [&](const std::string& name, const OperatorDescriptor& t) {
        const ChainVerdict v = classify_chain_recurrence(t);
        const bool agree = v.status == base.status;
        all_agree = all_agree && agree;
        rows.push_back({{"transform", name}, {"status", to_string(v.status)}, {"agree", agree}});
    };
    check("rotate(-1)", transform(cfg.op, Transform::rotate({-1.0, 0.0})));
    check("rotate(i)", transform(cfg.op, Transform::rotate({0.0, 1.0})));
    check("power(2)", transform(cfg.op, Transform::power_of(2)));
    check("power(3)", transform(cfg.op, Transform::power_of(3)));
    if (is_invertible(cfg.op)) check("inverse", transform(cfg.op, Transform::inverse()));
    check("direct_sum(self)", transform(cfg.op, Transform::direct_sum_with(cfg.op)));
    report["base_status"] = to_string(base.status);
    report["transforms"] = rows;
    report["all_agree"] = all_agree;
    return all_agree ? 0 : 3;
}

int run_demo_entire(const ExperimentConfig& cfg, const std::filesystem::path& out, json& report) {
    const json params = json::parse(cfg.params_json);
    const Scalar lambda = params.contains("lambda") ? scalar_from(params["lambda"]) : Scalar{2.0, 0.0};
    const int ell = params.value("ell", 2);
    const double delta = params.value("delta", 0.1);
    const int horizon = params.value("horizon", 30);
    EntireDemoResult r = entire_demo(lambda, ell, delta, horizon);
    report["ok"] = r.ok;
    report["certified_steps"] = r.certified_steps;
    report["note"] = r.note;
    if (!r.ok) {
        report["error"] = r.error;
        return 3;
    }
    std::ostringstream csv;
    csv << "horizon,best_poly_degree,error\n";
    for (const auto& row : r.growth_table)
        csv << row.horizon << "," << row.best_poly_degree << "," << row.error << "\n";
    write_file(out / "error_growth.csv", csv.str());
    json table = json::array();
    for (const auto& row : r.growth_table)
        table.push_back({{"horizon", row.horizon}, {"degree", row.best_poly_degree},
                         {"error", row.error}});
    report["growth_table"] = table;
    return 0;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    const std::filesystem::path out(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);

    json report;
    report["toolkit_version"] = std::string(kVersion);
    report["config_hash"] = to_hex(fnv1a(cfg.canonical));
    report["command"] = cfg.command;
    report["operator"] = cfg.op.render();
    report["seed"] = cfg.seed;

    int code = 0;
    try {
        if (cfg.command == "classify")
            code = run_classify(cfg, report);
        else if (cfg.command == "chain")
            code = run_chain(cfg, out, report);
        else if (cfg.command == "shadow")
            code = run_shadow(cfg, out, report);
        else if (cfg.command == "chaos")
            code = run_chaos(cfg, out, report);
        else if (cfg.command == "invariance-suite")
            code = run_invariance(cfg, report);
        else if (cfg.command == "demo-entire")
            code = run_demo_entire(cfg, out, report);
        else
            throw std::invalid_argument("unknown command " + cfg.command);
    } catch (const ResourceError& e) {
        report["error"] = e.what();
        code = 4;
    } catch (const std::invalid_argument& e) {
        report["error"] = e.what();
        code = 2;
    } catch (const std::domain_error& e) {
        report["error"] = e.what();
        code = 2;
    }
    report["exit_code"] = code;
    write_file(out / "report.json", report.dump(2) + "\n");
    return code;
}

}  // namespace lindyn

#include "lindyn/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindyn {

std::int64_t CoordinateVector::min_index() const {
    if (entries_.empty()) return 0;
    std::int64_t m = entries_.front().first.index;
    for (const auto& [c, v] : entries_) m = std::min(m, c.index);
    return m;
}

std::int64_t CoordinateVector::max_index() const {
    if (entries_.empty()) return 0;
    std::int64_t m = entries_.front().first.index;
    for (const auto& [c, v] : entries_) m = std::max(m, c.index);
    return m;
}

std::int32_t CoordinateVector::max_block() const {
    std::int32_t m = 0;
    for (const auto& [c, v] : entries_) m = std::max(m, c.block);
    return m;
}

std::string to_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

// ---------------------------------------------------------------------------
// KoetheMatrix

double KoetheMatrix::entry(std::int64_t j, int k) const {
    if (j < 1 || k < 1) throw std::domain_error("KoetheMatrix: indices start at 1");
    const auto jd = static_cast<double>(j);
    const auto kd = static_cast<double>(k);
    switch (form) {
        case KoetheForm::Ones: return 1.0;
        case KoetheForm::KPowJ: return std::pow(kd, jd);
        case KoetheForm::JPowK: return std::pow(jd, kd);
        case KoetheForm::ExpNegJOverK: return std::exp(-jd / kd);
        case KoetheForm::LogPowK: return std::pow(std::log(jd + 1.0), kd);
        case KoetheForm::Table: {
            if (table.empty()) throw std::domain_error("KoetheMatrix: empty table");
            const auto& row = table[static_cast<std::size_t>(
                std::min<std::int64_t>(j, static_cast<std::int64_t>(table.size())) - 1)];
            const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), row.size());
            return row[kk - 1];
        }
    }
    throw std::logic_error("KoetheMatrix: unknown form");
}

Growth KoetheMatrix::growth_in_j(int k) const {
    switch (form) {
        case KoetheForm::Ones: return Growth::constant();
        case KoetheForm::KPowJ:
            return k == 1 ? Growth::constant() : Growth::geometric(std::log(static_cast<double>(k)));
        case KoetheForm::JPowK: return Growth::polynomial(static_cast<double>(k));
        case KoetheForm::ExpNegJOverK: return Growth::geometric(-1.0 / static_cast<double>(k));
        case KoetheForm::LogPowK: return Growth::logarithmic(static_cast<double>(k));
        case KoetheForm::Table: {
            // Constant tail; zero tails are reported through the norm itself.
            return Growth::constant();
        }
    }
    return Growth::unknown();
}

std::optional<std::pair<std::int64_t, int>> KoetheMatrix::monotonicity_violation(
    std::int64_t j_probe, int k_probe) const {
    for (std::int64_t j = 1; j <= j_probe; ++j)
        for (int k = 1; k < k_probe; ++k)
            if (entry(j, k) > entry(j, k + 1) * (1.0 + 1e-15))
                return std::make_pair(j, k);
    return std::nullopt;
}

void KoetheMatrix::validate(int k_probe) const {
    if (form == KoetheForm::Table) {
        if (table.empty() || table[0].empty())
            throw std::domain_error("KoetheMatrix: empty table");
        for (const auto& row : table) {
            if (row.size() != table[0].size())
                throw std::domain_error("KoetheMatrix: ragged table");
            bool positive = false;
            for (double v : row) {
                if (v < 0.0) throw std::domain_error("KoetheMatrix: negative entry");
                positive = positive || v > 0.0;
            }
            if (!positive)
                throw std::domain_error("KoetheMatrix: a row with no positive entry");
        }
    }
    (void)k_probe;
}

std::string KoetheMatrix::render() const {
    switch (form) {
        case KoetheForm::Ones: return "a_{j,k} = 1";
        case KoetheForm::KPowJ: return "a_{j,k} = k^j";
        case KoetheForm::JPowK: return "a_{j,k} = j^k";
        case KoetheForm::ExpNegJOverK: return "a_{j,k} = e^{-j/k}";
        case KoetheForm::LogPowK: return "a_{j,k} = (log(j+1))^k";
        case KoetheForm::Table: return "explicit table (" + std::to_string(table.size()) + " rows)";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// DiagWeights

double DiagWeights::value(std::int64_t n) const {
    switch (family) {
        case DiagFamily::Ones: return 1.0;
        case DiagFamily::Dirichlet: return static_cast<double>(std::max<std::int64_t>(n, 1));
        case DiagFamily::Bergman: return 1.0 / static_cast<double>(n + 1);
        case DiagFamily::Table: {
            const std::int64_t off = n - table_start;
            if (off < 0) throw std::domain_error("DiagWeights: index below the table start");
            if (off < static_cast<std::int64_t>(table.size()))
                return table[static_cast<std::size_t>(off)];
            return table_tail;
        }
    }
    throw std::logic_error("DiagWeights: unknown family");
}

Growth DiagWeights::growth() const {
    switch (family) {
        case DiagFamily::Ones: return Growth::constant();
        case DiagFamily::Dirichlet: return Growth::polynomial(1.0);
        case DiagFamily::Bergman: return Growth::polynomial(-1.0);
        case DiagFamily::Table: return Growth::constant();
    }
    return Growth::unknown();
}

std::string DiagWeights::render() const {
    switch (family) {
        case DiagFamily::Ones: return "v_n = 1";
        case DiagFamily::Dirichlet: return "v = (1,1,2,3,...)";
        case DiagFamily::Bergman: return "v_n = 1/(n+1)";
        case DiagFamily::Table: return "explicit table";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SpaceSpec

SpaceSpec SpaceSpec::lp(double p, IndexSet ix, std::int64_t origin) {
    SpaceSpec s;
    s.index_set = ix;
    s.origin = origin;
    s.p = p;
    s.source = Source::Unit;
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::c0(IndexSet ix, std::int64_t origin) {
    SpaceSpec s;
    s.index_set = ix;
    s.origin = origin;
    s.p = 0.0;
    s.source = Source::Unit;
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::weighted_l2(DiagFamily family, std::int64_t origin) {
    SpaceSpec s;
    s.index_set = IndexSet::Unilateral;
    s.origin = origin;
    s.p = 2.0;
    s.source = Source::Diag;
    s.diag.family = family;
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::koethe_space(double p, KoetheForm form, int k_max) {
    SpaceSpec s;
    s.index_set = IndexSet::Unilateral;
    s.origin = 1;
    s.p = p;
    s.k_max = k_max;
    s.source = Source::Koethe;
    s.koethe.form = form;
    s.validate();
    return s;
}

SpaceSpec SpaceSpec::finite(std::int64_t dim, double p) {
    SpaceSpec s;
    s.index_set = IndexSet::Unilateral;
    s.origin = 0;
    s.p = p;
    s.source = Source::Unit;
    s.truncation_dim = dim;
    s.validate();
    return s;
}

bool SpaceSpec::in_index_set(std::int64_t n) const {
    if (index_set == IndexSet::Bilateral) return true;
    if (n < origin) return false;
    if (truncation_dim && n >= origin + *truncation_dim) return false;
    return true;
}

double SpaceSpec::log_transport_multiplier(std::int64_t n) const {
    if (!transport) return 0.0;
    const WeightSpec& w = *transport;
    if (n == 0) return 0.0;
    if (n > 0) {
        // v_n = 1 / (w_1 ... w_n)
        const LogMag prod = weight_product(w, 1, n - 1);
        if (prod.zero) throw std::domain_error("transport: zero weight product");
        return -prod.log_mag;
    }
    // v_{-n} = w_{-n+1} ... w_0
    const LogMag prod = weight_product(w, n + 1, -n - 1);
    if (prod.zero) throw std::domain_error("transport: zero weight product");
    return prod.log_mag;
}

double SpaceSpec::log_canonical_norm(std::int64_t n, int k) const {
    if (!in_index_set(n)) throw std::domain_error("space: index outside the index set");
    if (k < 1 || k > levels()) throw std::domain_error("space: seminorm level out of range");
    double base;
    switch (source) {
        case Source::Unit: base = 0.0; break;
        case Source::Diag: {
            const double v = diag.value(n);
            if (v == 0.0) return -kInf;
            base = sup_type() ? std::log(v) : std::log(v) / p;
            break;
        }
        case Source::Koethe: {
            const std::int64_t j = index_set == IndexSet::Bilateral ? std::max<std::int64_t>(
                                                                          std::abs(n), 1)
                                                                    : n;
            const double a = koethe.entry(j, k);
            if (a == 0.0) return -kInf;
            base = std::log(a);
            break;
        }
        default: throw std::logic_error("space: unknown source");
    }
    return base + log_transport_multiplier(n);
}

double SpaceSpec::canonical_norm(std::int64_t n, int k) const {
    const double l = log_canonical_norm(n, k);
    return l == -kInf ? 0.0 : std::exp(l);
}

Growth SpaceSpec::canonical_growth(int k, bool negative_direction) const {
    Growth base = Growth::constant();
    switch (source) {
        case Source::Unit: base = Growth::constant(); break;
        case Source::Diag:
            base = sup_type() ? diag.growth()
                              : Growth{true, 0.0, 0.0, diag.growth().poly / p, 0.0};
            break;
        case Source::Koethe: base = koethe.growth_in_j(k); break;
    }
    if (transport) {
        // ||e_n||' = |v_n| ||e_n||:  v_n = 1/(w_1..w_n),  v_{-n} = w_{-n+1}..w_0.
        const Growth fw = forward_product_growth(*transport);
        if (negative_direction) {
            base = base * backward_product_growth(*transport);
        } else {
            base = base * fw.inverse();
        }
    }
    return base;
}

void SpaceSpec::validate() const {
    if (p != 0.0 && p < 1.0) throw std::domain_error("space: p must be >= 1 or 0 (sup-type)");
    if (k_max < 1) throw std::domain_error("space: k_max must be positive");
    if (index_set == IndexSet::Unilateral && origin != 0 && origin != 1)
        throw std::domain_error("space: unilateral origin must be 0 or 1");
    if (truncation_dim && *truncation_dim < 1)
        throw std::domain_error("space: empty truncation");
    if (source == Source::Koethe) {
        koethe.validate(k_max);
        if (truncation_dim) throw std::domain_error("space: truncated Koethe space unsupported");
    }
}

std::string SpaceSpec::render() const {
    std::ostringstream os;
    if (truncation_dim) os << "R^" << *truncation_dim << "-truncated ";
    switch (source) {
        case Source::Unit:
            os << (sup_type() ? "c0" : "l^" + std::to_string(p));
            break;
        case Source::Diag:
            os << (sup_type() ? "c0(v)" : "l^" + std::to_string(p) + "(v)") << " with "
               << diag.render();
            break;
        case Source::Koethe:
            os << (sup_type() ? "lambda_0(A)" : "lambda_" + std::to_string(p) + "(A)") << " with "
               << koethe.render() << ", K_max = " << k_max;
            break;
    }
    os << (index_set == IndexSet::Bilateral ? " over Z" : " over N");
    if (index_set == IndexSet::Unilateral) os << " from " << origin;
    if (transport) os << " transported by " << transport->render();
    return os.str();
}

bool SpaceSpec::operator==(const SpaceSpec& o) const { return render() == o.render(); }

// ---------------------------------------------------------------------------
// Seminorms and metric

namespace {

double seminorm_single(const SpaceSpec& space, const CoordinateVector& x, int k) {
    if (space.sup_type()) {
        double m = 0.0;
        for (const auto& [c, v] : x.entries())
            m = std::max(m, std::abs(v) * space.canonical_norm(c.index, k));
        return m;
    }
    double acc = 0.0;
    for (const auto& [c, v] : x.entries())
        acc += std::pow(std::abs(v) * space.canonical_norm(c.index, k), space.p);
    return std::pow(acc, 1.0 / space.p);
}

}  // namespace

double seminorm_eval(const SpaceSpec& space, const CoordinateVector& x, int k) {
    for (const auto& [c, v] : x.entries()) {
        if (c.block != 0) throw std::domain_error("seminorm: block vector in a plain space");
        if (!space.in_index_set(c.index))
            throw std::domain_error("seminorm: coordinate outside the index set");
    }
    return seminorm_single(space, x, k);
}

double seminorm_eval(const std::vector<SpaceSpec>& components, const CoordinateVector& x, int k) {
    if (components.empty()) throw std::domain_error("seminorm: no components");
    if (components.size() == 1) return seminorm_eval(components[0], x, k);
    const double p = components[0].p;
    std::vector<CoordinateVector> parts(components.size());
    for (const auto& [c, v] : x.entries()) {
        if (c.block < 0 || static_cast<std::size_t>(c.block) >= components.size())
            throw std::domain_error("seminorm: block outside the direct sum");
        parts[static_cast<std::size_t>(c.block)].set({0, c.index}, v);
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < components.size(); ++b) {
        const int kk = std::min(k, components[b].levels());
        const double s = seminorm_eval(components[b], parts[b], kk);
        if (p == 0.0)
            acc = std::max(acc, s);
        else
            acc += std::pow(s, p);
    }
    return p == 0.0 ? acc : std::pow(acc, 1.0 / p);
}

namespace {

Interval metric_from_levels(bool single, int k_max, const std::vector<double>& level_norms) {
    if (single) return Interval::exact(level_norms.at(0));
    double lower = 0.0;
    for (int k = 1; k <= k_max; ++k)
        lower += std::ldexp(std::min(1.0, level_norms[static_cast<std::size_t>(k - 1)]), -k);
    return {lower, lower + std::ldexp(1.0, -k_max)};
}

}  // namespace

Interval frechet_distance(const SpaceSpec& space, const CoordinateVector& x,
                          const CoordinateVector& y) {
    const CoordinateVector d = x - y;
    std::vector<double> norms;
    norms.reserve(static_cast<std::size_t>(space.levels()));
    for (int k = 1; k <= space.levels(); ++k) norms.push_back(seminorm_eval(space, d, k));
    return metric_from_levels(space.single_norm(), space.k_max, norms);
}

Interval frechet_distance(const std::vector<SpaceSpec>& components, const CoordinateVector& x,
                          const CoordinateVector& y) {
    if (components.size() == 1) return frechet_distance(components[0], x, y);
    const CoordinateVector d = x - y;
    bool single = true;
    int k_max = 1;
    for (const auto& s : components) {
        single = single && s.single_norm();
        k_max = std::max(k_max, s.levels());
    }
    std::vector<double> norms;
    for (int k = 1; k <= (single ? 1 : k_max); ++k) norms.push_back(seminorm_eval(components, d, k));
    return metric_from_levels(single, k_max, norms);
}

NormSequence canonical_norm_sequence(const SpaceSpec& space, int k, std::int64_t lo,
                                     std::int64_t hi) {
    if (lo > hi) throw std::domain_error("canonical_norm_sequence: empty range");
    NormSequence out;
    out.values.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t n = lo; n <= hi; ++n) out.values.push_back(space.canonical_norm(n, k));
    out.tag = space.canonical_growth(k, lo < 0);
    out.tag_text = out.tag.describe();
    if (space.source == SpaceSpec::Source::Koethe && space.koethe.form == KoetheForm::Table)
        out.tag_text = "constant tail (table)";
    return out;
}

SpaceSpec transport_conjugacy(const WeightSpec& w, const SpaceSpec& space) {
    if (space.transport) throw std::domain_error("transport: space already transported");
    if ((w.domain == WeightDomain::Bilateral) != (space.index_set == IndexSet::Bilateral))
        throw std::domain_error("transport: weight domain does not match the index set");
    SpaceSpec out = space;
    out.transport = std::make_shared<WeightSpec>(w);
    return out;
}

}  // namespace lindyn

#include "lindyn/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lindyn {

namespace {

constexpr std::int64_t kSeriesBudgetTerms = 1'000'000;
constexpr double kSeriesThreshold = 1e6;

struct ShiftView {
    WeightSpec w;
    SpaceSpec space;
};

std::optional<ShiftView> as_shift(const OperatorDescriptor& T) {
    if (const auto* s = std::get_if<OperatorDescriptor::Shift>(&T.node))
        return ShiftView{s->w, T.space()};
    if (const auto* m = std::get_if<OperatorDescriptor::ScalarMultiple>(&T.node)) {
        auto inner = as_shift(*m->child);
        if (!inner) return std::nullopt;
        return ShiftView{inner->w.scaled(m->lambda), inner->space};
    }
    return std::nullopt;
}

// log of the conjugacy multiplier v_n (with phase):
//   v_0 = 1, v_n = 1/(w_1...w_n), v_{-n} = w_{-n+1}...w_0.
LogMag conjugacy_v(const WeightSpec& w, std::int64_t n) {
    if (n == 0) return LogMag::one();
    if (n > 0) return weight_product(w, 1, n - 1).inverse();
    return weight_product(w, n + 1, -n - 1);
}

// ---------------------------------------------------------------------------
// Series terms for the chain-recurrence criterion.

struct SeriesSide {
    const WeightSpec& w;
    const SpaceSpec& space;
    bool negative;  // negative side of a bilateral shift
};

double log_term(const SeriesSide& s, std::int64_t n, int k) {
    // positive:  u_n = |w_1...w_n| / ||e_n||_k
    // negative:  u_n = 1 / (|w_{-n+1}...w_0| ||e_{-n}||_k)
    if (!s.negative) {
        const LogMag p = weight_product(s.w, 1, n - 1);
        const double ln = s.space.log_canonical_norm(n, k);
        if (ln == -kInf) return kInf;  // convention c/0 = infinity
        return p.log_mag - ln;
    }
    const LogMag p = weight_product(s.w, -n + 1, n - 1);
    const double ln = s.space.log_canonical_norm(-n, k);
    if (ln == -kInf) return kInf;
    return -(p.log_mag + ln);
}

Growth term_growth(const SeriesSide& s, int k) {
    if (!s.negative)
        return forward_product_growth(s.w) / s.space.canonical_growth(k, false);
    return (backward_product_growth(s.w) * s.space.canonical_growth(k, true)).inverse();
}

bool side_has_zero_norm(const SeriesSide& s, int k) {
    const SpaceSpec& sp = s.space;
    auto probe = [&](std::int64_t n) { return sp.log_canonical_norm(n, k) == -kInf; };
    if (sp.source == SpaceSpec::Source::Koethe && sp.koethe.form == KoetheForm::Table) {
        const auto rows = static_cast<std::int64_t>(sp.koethe.table.size());
        for (std::int64_t j = 1; j <= rows + 1; ++j)
            if (probe(s.negative ? -j : j)) return true;
    }
    if (sp.source == SpaceSpec::Source::Diag && sp.diag.family == DiagFamily::Table) {
        const auto rows = static_cast<std::int64_t>(sp.diag.table.size());
        for (std::int64_t j = std::max<std::int64_t>(sp.origin, 1); j <= rows + 1; ++j)
            if (probe(s.negative ? -j : j)) return true;
    }
    return false;
}

SeriesEvidence classify_side_at_level(const SeriesSide& s, int k) {
    SeriesEvidence ev;
    ev.k = k;
    ev.side = s.negative ? "negative" : "positive";
    if (side_has_zero_norm(s, k)) {
        ev.cls = SeriesClass::Divergent;
        ev.method = "degenerate-zero-norm";
        ev.term_growth = Growth::unknown();
        return ev;
    }
    ev.term_growth = term_growth(s, k);
    ev.cls = classify_series(ev.term_growth);
    ev.method = "asymptotic";
    if (ev.cls != SeriesClass::Undecided) return ev;

    // Numeric fallback: partial sums to the term budget against the threshold.
    ev.method = "numeric";
    const std::int64_t start = std::max<std::int64_t>(
        1, s.negative || s.space.index_set == IndexSet::Bilateral ? 1 : s.space.origin);
    double sum = 0.0;
    for (std::int64_t n = std::max<std::int64_t>(start, 1); n <= kSeriesBudgetTerms; ++n) {
        const double lt = log_term(s, n, k);
        sum += lt == kInf ? kInf : std::exp(lt);
        if (sum > kSeriesThreshold) {
            ev.cls = SeriesClass::Divergent;
            ev.partial_sum = sum;
            return ev;
        }
    }
    ev.partial_sum = sum;
    ev.cls = SeriesClass::Undecided;
    return ev;
}

// k-free part of the term growth (weight products and transport); the level
// dependence is the base generator's growth.
Growth base_form_growth(const SpaceSpec& sp, int k) {
    return sp.source == SpaceSpec::Source::Koethe ? sp.koethe.growth_in_j(k) : Growth::constant();
}

struct AllKAnalysis {
    bool known{true};
    bool divergent_all_k{false};
    std::optional<int> convergent_witness_k;
    bool to_infinity_all_k{false};
    std::optional<int> bounded_witness_k;  // level where terms fail to blow up
};

AllKAnalysis analyze_all_k(const SeriesSide& s) {
    AllKAnalysis out;
    const Growth g1 = term_growth(s, 1);
    if (!g1.known) {
        out.known = false;
        return out;
    }
    const Growth extra = g1 * base_form_growth(s.space, 1);
    const KoetheForm form = s.space.source == SpaceSpec::Source::Koethe ? s.space.koethe.form
                                                                        : KoetheForm::Ones;
    auto at = [&](int k) { return extra / base_form_growth(s.space, k); };

    auto search_witness = [&](auto pred, int from, int budget) -> std::optional<int> {
        for (int k = std::max(1, from); k <= from + budget; ++k)
            if (pred(at(k))) return k;
        return std::nullopt;
    };
    auto conv = [](const Growth& g) { return classify_series(g) == SeriesClass::Convergent; };
    auto not_blowing = [](const Growth& g) { return sequence_limit(g) != SeqLimit::Infinity; };

    switch (form) {
        case KoetheForm::Ones:
        case KoetheForm::Table: {
            const int k_stable = form == KoetheForm::Table && !s.space.koethe.table.empty()
                                     ? static_cast<int>(s.space.koethe.table[0].size())
                                     : 1;
            bool div = true, blow = true;
            for (int k = 1; k <= k_stable; ++k) {
                div = div && classify_series(at(k)) == SeriesClass::Divergent;
                blow = blow && sequence_limit(at(k)) == SeqLimit::Infinity;
                if (conv(at(k))) out.convergent_witness_k = k;
                if (not_blowing(at(k))) out.bounded_witness_k = k;
            }
            out.divergent_all_k = div;
            out.to_infinity_all_k = blow;
            return out;
        }
        case KoetheForm::KPowJ: {
            if (extra.factorial > kLogTol) {
                out.divergent_all_k = out.to_infinity_all_k = true;
                return out;
            }
            const int guess = static_cast<int>(std::ceil(std::exp(std::max(0.0, extra.rate))));
            out.convergent_witness_k = search_witness(conv, std::max(2, guess), guess + 64);
            out.bounded_witness_k = search_witness(not_blowing, std::max(2, guess), guess + 64);
            return out;
        }
        case KoetheForm::JPowK: {
            if (extra.factorial > kLogTol || extra.rate > kLogTol) {
                out.divergent_all_k = out.to_infinity_all_k = true;
                return out;
            }
            const int guess = static_cast<int>(std::ceil(std::max(0.0, extra.poly))) + 2;
            out.convergent_witness_k = search_witness(conv, 1, guess + 64);
            out.bounded_witness_k = search_witness(not_blowing, 1, guess + 64);
            return out;
        }
        case KoetheForm::ExpNegJOverK: {
            if (extra.factorial > kLogTol || extra.rate >= -kLogTol) {
                out.divergent_all_k = out.to_infinity_all_k = true;
                return out;
            }
            const int guess = static_cast<int>(std::ceil(-1.0 / extra.rate)) + 1;
            out.convergent_witness_k = search_witness(conv, guess, 64);
            out.bounded_witness_k = search_witness(not_blowing, guess, 64);
            return out;
        }
        case KoetheForm::LogPowK: {
            const bool dominant =
                extra.factorial > kLogTol || extra.rate > kLogTol || extra.poly > -1.0 + kLogTol;
            if (dominant) out.divergent_all_k = true;
            const bool blow =
                extra.factorial > kLogTol || extra.rate > kLogTol || extra.poly > kLogTol;
            if (blow) out.to_infinity_all_k = true;
            if (!dominant)
                out.convergent_witness_k =
                    search_witness(conv, static_cast<int>(std::ceil(extra.logpow)) + 2, 64);
            if (!blow)
                out.bounded_witness_k =
                    search_witness(not_blowing, static_cast<int>(std::ceil(extra.logpow)) + 2, 64);
            return out;
        }
    }
    out.known = false;
    return out;
}

ChainVerdict classify_shift_cr(const WeightSpec& w, const SpaceSpec& space) {
    if (space.truncation_dim)
        throw std::domain_error(
            "classify_chain_recurrence: truncated space; use the finite-dimensional oracle");
    ChainVerdict out;
    std::vector<SeriesSide> sides;
    sides.push_back({w, space, false});
    if (space.index_set == IndexSet::Bilateral) sides.push_back({w, space, true});

    bool any_undecided = false;
    bool all_k_ok = true;
    std::ostringstream note;
    for (const auto& side : sides) {
        for (int k = 1; k <= space.levels(); ++k) {
            SeriesEvidence ev = classify_side_at_level(side, k);
            out.evidence.push_back(ev);
            if (ev.cls == SeriesClass::Convergent) {
                out.status = ChainStatus::NotChainRecurrent;
                out.note = "convergent series at level k = " + std::to_string(k) + " (" +
                           ev.side + " side)";
                return out;
            }
            if (ev.cls == SeriesClass::Undecided) any_undecided = true;
        }
        const AllKAnalysis ext = analyze_all_k(side);
        if (ext.known && ext.convergent_witness_k) {
            SeriesEvidence ev;
            ev.k = *ext.convergent_witness_k;
            ev.side = side.negative ? "negative" : "positive";
            ev.cls = SeriesClass::Convergent;
            ev.method = "asymptotic (level beyond K_max)";
            ev.term_growth = term_growth(side, ev.k);
            out.evidence.push_back(ev);
            out.status = ChainStatus::NotChainRecurrent;
            out.note = "convergent series at level k = " + std::to_string(ev.k) +
                       " beyond the K_max cap";
            return out;
        }
        all_k_ok = all_k_ok && ext.known && ext.divergent_all_k;
    }
    if (any_undecided) {
        out.status = ChainStatus::Undecided;
        out.note = "series class undecidable from term asymptotics and numeric budget";
        return out;
    }
    out.status = ChainStatus::ChainRecurrent;
    out.all_k_certified = all_k_ok;
    out.note = all_k_ok ? "divergence certified for every seminorm level"
                        : "divergence certified up to the K_max cap of " +
                              std::to_string(space.levels()) + " levels";
    return out;
}

ChainVerdict verdict_with(ChainStatus st, const std::string& note) {
    ChainVerdict v;
    v.status = st;
    v.note = note;
    v.all_k_certified = st != ChainStatus::Undecided;
    return v;
}

bool unimodular(Scalar z) { return std::abs(std::abs(z) - 1.0) <= kLogTol; }

ChainVerdict classify_diagonal_cr(const OperatorDescriptor::Diagonal& d) {
    if (d.is_scalar) {
        if (unimodular(d.scalar))
            return verdict_with(ChainStatus::ChainRecurrent,
                                "unimodular scalar multiple of the identity");
        return verdict_with(ChainStatus::NotChainRecurrent,
                            std::abs(d.scalar) < 1.0
                                ? "norm-contracting diagonal: no chain returns past the gap"
                                : "norm-expanding diagonal: no chain returns past the gap");
    }
    for (std::size_t q = 0; q < d.table.size(); ++q)
        if (!unimodular(d.table[q]))
            return verdict_with(ChainStatus::NotChainRecurrent,
                                "coordinate " + std::to_string(q + static_cast<std::size_t>(0)) +
                                    " seminorm is strictly contracted/expanded");
    if (!unimodular(d.table_tail))
        return verdict_with(ChainStatus::NotChainRecurrent,
                            "tail coordinates are strictly contracted/expanded");
    // Unimodular diagonal: finite-support vectors return along a simultaneous
    // phase-approximation subsequence, and such vectors are dense.
    return verdict_with(ChainStatus::ChainRecurrent, "unimodular diagonal");
}

Scalar principal_root(Scalar z, int n) { return std::pow(z, 1.0 / static_cast<double>(n)); }

}  // namespace

const char* to_string(ChainStatus s) {
    switch (s) {
        case ChainStatus::ChainRecurrent: return "ChainRecurrent";
        case ChainStatus::NotChainRecurrent: return "NotChainRecurrent";
        default: return "Undecided";
    }
}

ChainVerdict classify_chain_recurrence(const OperatorDescriptor& T) {
    return std::visit(
        [&](const auto& n) -> ChainVerdict {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OperatorDescriptor::Shift>) {
                return classify_shift_cr(n.w, T.space());
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Diagonal>) {
                return classify_diagonal_cr(n);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::ScalarMultiple>) {
                const OperatorDescriptor& child = *n.child;
                if (auto sv = as_shift(T)) return classify_shift_cr(sv->w, sv->space);
                if (const auto* d = std::get_if<OperatorDescriptor::Diagonal>(&child.node)) {
                    OperatorDescriptor::Diagonal scaled = *d;
                    scaled.scalar *= n.lambda;
                    for (auto& v : scaled.table) v *= n.lambda;
                    scaled.table_tail *= n.lambda;
                    return classify_diagonal_cr(scaled);
                }
                if (const auto* p = std::get_if<OperatorDescriptor::Power>(&child.node)) {
                    // lambda T^n and (lambda^{1/n} T)^n share the chain
                    // recurrent set; recurse on the rescaled base.
                    OperatorDescriptor base = *p->child;
                    OperatorDescriptor wrapped;
                    wrapped.node = OperatorDescriptor::ScalarMultiple{
                        principal_root(n.lambda, p->n), std::make_shared<OperatorDescriptor>(base)};
                    wrapped.ambient = base.ambient;
                    return classify_chain_recurrence(wrapped);
                }
                if (const auto* inv = std::get_if<OperatorDescriptor::Inverse>(&child.node)) {
                    OperatorDescriptor wrapped;
                    wrapped.node = OperatorDescriptor::ScalarMultiple{Scalar{1.0, 0.0} / n.lambda,
                                                                      inv->child};
                    wrapped.ambient = inv->child->ambient;
                    return classify_chain_recurrence(wrapped);
                }
                if (const auto* ds = std::get_if<OperatorDescriptor::DirectSum>(&child.node)) {
                    OperatorDescriptor dist;
                    OperatorDescriptor::DirectSum sum;
                    for (const auto& c : ds->children) {
                        auto wrapped = std::make_shared<OperatorDescriptor>();
                        wrapped->node = OperatorDescriptor::ScalarMultiple{n.lambda, c};
                        wrapped->ambient = c->ambient;
                        sum.children.push_back(std::move(wrapped));
                    }
                    dist.node = std::move(sum);
                    dist.ambient = T.ambient;
                    return classify_chain_recurrence(dist);
                }
                if (unimodular(n.lambda)) return classify_chain_recurrence(child);
                throw std::domain_error(
                    "classify_chain_recurrence: unsupported operator kind scalar_multiple of " +
                    child.kind_name());
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Power>) {
                return classify_chain_recurrence(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Inverse>) {
                return classify_chain_recurrence(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::DirectSum>) {
                ChainVerdict out;
                out.status = ChainStatus::ChainRecurrent;
                out.all_k_certified = true;
                for (std::size_t i = 0; i < n.children.size(); ++i) {
                    ChainVerdict cv = classify_chain_recurrence(*n.children[i]);
                    for (auto& ev : cv.evidence) {
                        ev.side = "block " + std::to_string(i) + " " + ev.side;
                        out.evidence.push_back(ev);
                    }
                    if (cv.status == ChainStatus::NotChainRecurrent) {
                        out.status = ChainStatus::NotChainRecurrent;
                        out.note = "block " + std::to_string(i) + ": " + cv.note;
                        return out;
                    }
                    if (cv.status == ChainStatus::Undecided) out.status = ChainStatus::Undecided;
                    out.all_k_certified = out.all_k_certified && cv.all_k_certified;
                }
                if (out.note.empty()) out.note = "all direct summands classified";
                return out;
            } else {
                throw std::domain_error("classify_chain_recurrence: unsupported operator kind " +
                                        T.kind_name());
            }
        },
        T.node);
}

// ---------------------------------------------------------------------------
// Transitivity companion test

TransitivityVerdict transitivity_test(const OperatorDescriptor& T, std::int64_t j_window) {
    auto sv = as_shift(T);
    if (!sv)
        throw std::domain_error("transitivity_test: unsupported operator kind " + T.kind_name());
    const WeightSpec& w = sv->w;
    const SpaceSpec& sp = sv->space;
    TransitivityVerdict out;
    std::ostringstream ev;

    // Positive side: t_n = |w_1...w_n| / ||e_n||_k must tend to infinity for
    // every level (the displayed quantity is its reciprocal).
    SeriesSide pos{w, sp, false};
    bool unknown = false;
    for (int k = 1; k <= sp.levels(); ++k) {
        const SeqLimit lim = sequence_limit(term_growth(pos, k));
        if (lim == SeqLimit::Zero || lim == SeqLimit::BoundedPositive) {
            out.transitive = Trilean::No;
            out.evidence = "level k = " + std::to_string(k) +
                           ": the canonical-vector quantity is bounded below (" +
                           term_growth(pos, k).describe() + ")";
            return out;
        }
        if (lim == SeqLimit::Undecided) unknown = true;
    }
    const AllKAnalysis ext = analyze_all_k(pos);
    if (ext.known && ext.bounded_witness_k) {
        out.transitive = Trilean::No;
        out.evidence = "level k = " + std::to_string(*ext.bounded_witness_k) +
                       " (beyond K_max): the canonical-vector quantity is bounded below";
        return out;
    }
    unknown = unknown || !ext.known || !ext.to_infinity_all_k;

    if (sp.index_set == IndexSet::Bilateral) {
        // Backward quantity |w_{j+1-n} ... w_j| ||e_{j-n}||_k must tend to 0.
        for (int k = 1; k <= sp.levels(); ++k) {
            const Growth g = backward_product_growth(w) * sp.canonical_growth(k, true);
            const SeqLimit lim = sequence_limit(g);
            if (lim == SeqLimit::Infinity || lim == SeqLimit::BoundedPositive) {
                out.transitive = Trilean::No;
                out.evidence = "level k = " + std::to_string(k) +
                               ": the backward quantity is bounded below (" + g.describe() + ")";
                return out;
            }
            if (lim == SeqLimit::Undecided) unknown = true;
        }
        ev << "backward quantity certified to vanish; j probed over |j| <= " << j_window << "; ";
    }

    if (!unknown) {
        out.transitive = Trilean::Yes;
        // Record a numeric witness index when one is reachable cheaply.
        for (std::int64_t n = std::max<std::int64_t>(1, sp.origin), found = 0;
             n <= 200000 && !found; n = n < 64 ? n + 1 : n + n / 8) {
            double worst = -kInf;
            for (int k = 1; k <= sp.levels(); ++k) worst = std::max(worst, -log_term(pos, n, k));
            if (worst < std::log(1e-9)) {
                ev << "witness n = " << n << " with all level quantities below 1e-9";
                found = 1;
            }
        }
        out.evidence = ev.str();
        return out;
    }

    // Numeric search within budget.
    for (std::int64_t n = std::max<std::int64_t>(1, sp.origin); n <= 200000;
         n = n < 64 ? n + 1 : n + n / 8) {
        double worst = -kInf;
        for (int k = 1; k <= sp.levels(); ++k) worst = std::max(worst, -log_term(pos, n, k));
        if (worst < std::log(1e-9)) {
            out.transitive = Trilean::Yes;
            out.evidence = "numeric witness n = " + std::to_string(n);
            return out;
        }
    }
    out.transitive = Trilean::Undecided;
    out.evidence = "no subsequence witnessed within budget and asymptotics unclassifiable";
    return out;
}

// ---------------------------------------------------------------------------
// verify_chain

ChainCheck verify_chain(const OperatorDescriptor& T, const std::vector<CoordinateVector>& points,
                        double delta) {
    if (points.size() < 2) throw std::domain_error("verify_chain: need at least two points");
    if (delta <= 0.0) throw std::domain_error("verify_chain: delta must be positive");
    ChainCheck out;
    Chain chain;
    chain.points = points;
    chain.delta = delta;
    bool undecided = false;
    std::size_t undecided_at = 0;
    Interval undecided_iv;
    for (std::size_t j = 0; j + 1 < points.size(); ++j) {
        const CoordinateVector image = apply(T, points[j]);
        const Interval d = frechet_distance(T.ambient, image, points[j + 1]);
        chain.step_errors.push_back(d);
        switch (d.le(delta)) {
            case Trilean::Yes: break;
            case Trilean::No:
                out.status = ChainCheck::Status::Rejected;
                out.fail_index = j;
                out.fail_interval = d;
                return out;
            case Trilean::Undecided:
                if (!undecided) {
                    undecided = true;
                    undecided_at = j;
                    undecided_iv = d;
                }
                break;
        }
    }
    if (undecided) {
        out.status = ChainCheck::Status::Undecided;
        out.fail_index = undecided_at;
        out.fail_interval = undecided_iv;
        return out;
    }
    out.status = ChainCheck::Status::Accepted;
    out.chain = std::move(chain);
    return out;
}

// ---------------------------------------------------------------------------
// Chain builders

int metric_threshold_level(const SpaceSpec& space, double delta) {
    if (delta <= 0.0) throw std::domain_error("metric threshold: delta must be positive");
    if (space.single_norm()) return 1;
    const int l = std::max(1, static_cast<int>(std::ceil(std::log2(2.0 / delta))));
    if (l > space.k_max)
        throw std::domain_error(
            "metric threshold: delta below the 2^-K_max metric resolution of the space");
    return l;
}

namespace {

ChainBuildResult fail(std::string msg) {
    ChainBuildResult r;
    r.error = std::move(msg);
    return r;
}

ChainBuildResult certify(const OperatorDescriptor& T, std::vector<CoordinateVector> points,
                         double delta) {
    ChainCheck check = verify_chain(T, points, delta);
    if (check.status != ChainCheck::Status::Accepted)
        return fail("constructed chain failed certification at step " +
                    std::to_string(check.fail_index) + " with interval [" +
                    std::to_string(check.fail_interval.lower) + ", " +
                    std::to_string(check.fail_interval.upper) + "]");
    ChainBuildResult r;
    r.ok = true;
    r.chain = std::move(*check.chain);
    return r;
}

// phi_v(z) / v_ref for a vector z given as (index, coefficient) pairs.
CoordinateVector map_from_conjugate(const WeightSpec& w, const CoordinateVector& z,
                                    std::int64_t ref_index) {
    const LogMag vref = conjugacy_v(w, ref_index);
    CoordinateVector out;
    for (const auto& [c, val] : z.entries()) {
        const LogMag ratio = conjugacy_v(w, c.index) * vref.inverse();
        out.set(c, val * ratio.value());
    }
    return out;
}

std::optional<std::int64_t> find_zero_norm(const SpaceSpec& sp, int k, std::int64_t from,
                                           std::int64_t probe, bool negative) {
    for (std::int64_t n = from; n < from + probe; ++n) {
        const std::int64_t idx = negative ? -n : n;
        if (!sp.in_index_set(idx)) break;
        if (sp.log_canonical_norm(idx, k) == -kInf) return n;
    }
    return std::nullopt;
}

}  // namespace

ChainBuildResult build_chain_zero_to_e(const OperatorDescriptor& T, std::int64_t i, double delta,
                                       std::int64_t m_budget) {
    auto sv = as_shift(T);
    if (!sv) throw std::domain_error("build_chain_zero_to_e: shift descriptor required");
    const WeightSpec& w = sv->w;
    const SpaceSpec& sp = sv->space;
    if (sp.truncation_dim) throw std::domain_error("build_chain_zero_to_e: truncated space");
    if (i < std::max<std::int64_t>(1, sp.origin) || !sp.in_index_set(i))
        throw std::domain_error("build_chain_zero_to_e: target index must be positive");

    const int ell = metric_threshold_level(sp, delta);
    const double abs_v_i = std::exp(conjugacy_v(w, i).log_mag);
    const double threshold = 2.0 / (delta * abs_v_i);

    std::string last_error = "no admissible seminorm level";
    for (int k = ell; k <= sp.levels(); ++k) {
        // Degenerate branch: a vanishing seminorm past i gives an exact
        // trajectory chain entering through a zero-norm vector.
        if (auto nz = find_zero_norm(sp, k, i + 1, 512, false)) {
            std::vector<CoordinateVector> points;
            points.push_back({});
            for (std::int64_t q = *nz; q >= i; --q)
                points.push_back(map_from_conjugate(w, CoordinateVector::unit(q), i));
            auto r = certify(T, std::move(points), delta);
            if (r.ok) return r;
            last_error = r.error;
            continue;
        }

        // Main branch: smallest m with the partial series sum past the
        // threshold, then the telescoping point recipe.
        double t = 0.0;
        std::int64_t m = 0;
        SeriesSide side{w, sp, false};
        while (t <= threshold && m < m_budget) {
            ++m;
            t += std::exp(-conjugacy_v(w, i + m).log_mag - sp.log_canonical_norm(i + m, k));
        }
        if (t <= threshold)
            return fail("series insufficient within budget: partial sum " + std::to_string(t) +
                        " at level k = " + std::to_string(k) + " after " + std::to_string(m) +
                        " terms");
        (void)side;

        std::vector<CoordinateVector> points;
        points.push_back({});
        CoordinateVector z;  // running point in the conjugate space
        for (std::int64_t j = 0; j < m; ++j) {
            // backward shift of z (unweighted in the conjugate space)
            CoordinateVector shifted;
            for (const auto& [c, val] : z.entries()) shifted.set({c.block, c.index - 1}, val);
            const std::int64_t q = i + m - j;
            const double lnq = conjugacy_v(w, q).log_mag + sp.log_canonical_norm(q, k);
            shifted.add({0, q}, std::exp(-lnq) / t);
            z = std::move(shifted);
            points.push_back(map_from_conjugate(w, z, i));
        }
        points.push_back(CoordinateVector::unit(i));
        auto r = certify(T, std::move(points), delta);
        if (r.ok) return r;
        last_error = r.error;
    }
    return fail(last_error);
}

ChainBuildResult build_chain_e_to_zero(const OperatorDescriptor& T, std::int64_t i, double delta,
                                       std::int64_t m_budget) {
    auto sv = as_shift(T);
    if (!sv) throw std::domain_error("build_chain_e_to_zero: shift descriptor required");
    const WeightSpec& w = sv->w;
    const SpaceSpec& sp = sv->space;
    if (sp.index_set != IndexSet::Bilateral)
        throw std::domain_error(
            "build_chain_e_to_zero: bilateral shift required (use the staircase for bounded "
            "orbits)");
    if (i < 1) throw std::domain_error("build_chain_e_to_zero: index must be positive");

    const int ell = metric_threshold_level(sp, delta);
    const double abs_v_mi = std::exp(conjugacy_v(w, -i).log_mag);
    const double threshold = 2.0 / (delta * abs_v_mi);

    std::string last_error = "no admissible seminorm level";
    for (int k = ell; k <= sp.levels(); ++k) {
        if (auto nz = find_zero_norm(sp, k, i + 1, 512, true)) {
            std::vector<CoordinateVector> points;
            for (std::int64_t q = i; q < *nz; ++q)
                points.push_back(map_from_conjugate(w, CoordinateVector::unit(-q), -i));
            points.push_back({});
            auto r = certify(T, std::move(points), delta);
            if (r.ok) return r;
            last_error = r.error;
            continue;
        }

        std::vector<double> partial;  // partial sums of 1/||e_{-n}||'_k
        double t = 0.0;
        std::int64_t m = 0;
        while (t <= threshold && m < m_budget) {
            ++m;
            t += std::exp(-conjugacy_v(w, -(i + m)).log_mag - sp.log_canonical_norm(-(i + m), k));
            partial.push_back(t);
        }
        if (t <= threshold)
            return fail("series insufficient within budget: partial sum " + std::to_string(t) +
                        " at level k = " + std::to_string(k) + " after " + std::to_string(m) +
                        " terms");

        // z_j = (1 - partial_j / t) e_{-i-j}; the final coefficient vanishes exactly.
        std::vector<CoordinateVector> points;
        points.push_back(CoordinateVector::unit(-i));
        for (std::int64_t j = 1; j <= m; ++j) {
            const double coeff = 1.0 - partial[static_cast<std::size_t>(j - 1)] / t;
            CoordinateVector z;
            if (j < m && coeff != 0.0) z.set({0, -(i + j)}, coeff);
            points.push_back(map_from_conjugate(w, z, -i));
        }
        auto r = certify(T, std::move(points), delta);
        if (r.ok) return r;
        last_error = r.error;
    }
    return fail(last_error);
}

ChainBuildResult build_chain_to_zero_staircase(const OperatorDescriptor& T,
                                               const CoordinateVector& x, double delta,
                                               std::int64_t step_budget) {
    if (x.empty()) {
        std::vector<CoordinateVector> points{{}, {}};
        return certify(T, std::move(points), delta);
    }
    const auto& components = T.ambient;
    bool single = true;
    int ell = 1;
    for (const auto& s : components) single = single && s.single_norm();
    if (!single) {
        int km = 1;
        for (const auto& s : components) km = std::max(km, s.levels());
        SpaceSpec probe = components[0];
        ell = metric_threshold_level(probe, delta);
    }

    // Orbit norms over [1, K+1]; K adapts until the grid is fine enough.
    std::vector<CoordinateVector> orbit{x};
    std::vector<double> norms;  // max seminorm over levels <= ell, j >= 1
    auto extend_to = [&](std::int64_t j_hi) {
        while (static_cast<std::int64_t>(orbit.size()) <= j_hi) {
            orbit.push_back(apply(T, orbit.back()));
            double m = 0.0;
            for (int kk = 1; kk <= ell; ++kk)
                m = std::max(m, seminorm_eval(components, orbit.back(), kk));
            norms.push_back(m);
        }
    };
    std::int64_t K = 1;
    for (;;) {
        extend_to(K + 1);
        const double C = *std::max_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(K) + 1);
        const std::int64_t K2 =
            single ? static_cast<std::int64_t>(std::ceil(C / delta)) + 1
                   : static_cast<std::int64_t>(std::ceil(2.0 * C / delta)) + 1;
        if (K2 <= K) break;
        if (K2 > step_budget)
            return fail("unbounded observed orbit: required staircase length " +
                        std::to_string(K2) + " exceeds the budget (C = " + std::to_string(C) + ")");
        K = K2;
    }

    std::vector<CoordinateVector> points;
    points.reserve(static_cast<std::size_t>(K) + 1);
    for (std::int64_t j = 0; j <= K; ++j) {
        const double tj = 1.0 - static_cast<double>(j) / static_cast<double>(K);
        points.push_back(Scalar{tj, 0.0} * orbit[static_cast<std::size_t>(j)]);
    }
    return certify(T, std::move(points), delta);
}

ChainBuildResult build_chain_to_zero(const OperatorDescriptor& T, const CoordinateVector& x,
                                     double delta) {
    if (auto sv = as_shift(T); sv && sv->space.index_set == IndexSet::Bilateral &&
                               x.support_size() == 1 && x.entries()[0].first.index < 0 &&
                               x.entries()[0].second == Scalar{1.0, 0.0}) {
        auto r = build_chain_e_to_zero(T, -x.entries()[0].first.index, delta);
        if (r.ok) return r;
    }
    return build_chain_to_zero_staircase(T, x, delta);
}

ChainBuildResult interpolation_chain(const OperatorDescriptor& T, const Chain& loop_x,
                                     const Chain& loop_y, double delta) {
    auto is_loop = [](const Chain& c) {
        return !c.points.empty() && c.points.front() == c.points.back();
    };
    if (!is_loop(loop_x) || !is_loop(loop_y))
        throw std::domain_error("interpolation_chain: inputs must be loops (x -> x, y -> y)");
    if (loop_x.delta > delta / 4.0 + 1e-15 || loop_y.delta > delta / 4.0 + 1e-15)
        throw std::domain_error("interpolation_chain: inputs must be delta/4-chains");

    const auto r = static_cast<std::int64_t>(loop_x.length());
    const auto s = static_cast<std::int64_t>(loop_y.length());
    if (r == 0 || s == 0) throw std::domain_error("interpolation_chain: empty loop");

    const auto& components = T.ambient;
    bool single = true;
    for (const auto& sp : components) single = single && sp.single_norm();
    const int ell = single ? 1 : metric_threshold_level(components[0], delta / 4.0);

    double cmax = 0.0;
    for (const auto& c : {std::cref(loop_x), std::cref(loop_y)})
        for (const auto& p : c.get().points)
            for (int kk = 1; kk <= ell; ++kk)
                cmax = std::max(cmax, seminorm_eval(components, p, kk));

    const double needed = single ? 4.0 * cmax / delta : 8.0 * cmax / delta;
    const std::int64_t k0 = std::lcm(r, s);
    std::int64_t k = k0 * std::max<std::int64_t>(
                              1, static_cast<std::int64_t>(std::ceil(needed / static_cast<double>(k0))) + 1);
    std::string last;
    for (int attempt = 0; attempt < 4; ++attempt, k *= 2) {
        std::vector<CoordinateVector> points;
        points.reserve(static_cast<std::size_t>(k) + 1);
        for (std::int64_t j = 0; j <= k; ++j) {
            const double u = static_cast<double>(j) / static_cast<double>(k);
            CoordinateVector z = Scalar{1.0 - u, 0.0} * loop_x.points[static_cast<std::size_t>(j % r)];
            z += Scalar{u, 0.0} * loop_y.points[static_cast<std::size_t>(j % s)];
            points.push_back(std::move(z));
        }
        auto res = certify(T, std::move(points), delta);
        if (res.ok) return res;
        last = res.error;
    }
    return fail("interpolation failed with cross-term bound " + std::to_string(cmax) +
                " and lcm length " + std::to_string(k0) + ": " + last);
}

}  // namespace lindyn

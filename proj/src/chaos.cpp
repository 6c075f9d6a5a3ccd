#include "lindyn/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindyn {

namespace {

constexpr double kOverflowGuard = 1e300;

struct ShiftView {
    WeightSpec w;
    SpaceSpec space;
};

std::optional<ShiftView> as_scaled_shift(const OperatorDescriptor& T) {
    if (const auto* s = std::get_if<OperatorDescriptor::Shift>(&T.node))
        return ShiftView{s->w, T.space()};
    if (const auto* m = std::get_if<OperatorDescriptor::ScalarMultiple>(&T.node)) {
        auto inner = as_scaled_shift(*m->child);
        if (!inner) return std::nullopt;
        return ShiftView{inner->w.scaled(m->lambda), inner->space};
    }
    return std::nullopt;
}

}  // namespace

std::vector<std::int64_t> default_checkpoints(std::int64_t horizon) {
    std::vector<std::int64_t> cps;
    for (std::int64_t n = 1; n < horizon; n = std::max(n + 1, n + n / 8)) cps.push_back(n);
    cps.push_back(horizon);
    return cps;
}

DensityEstimate upper_density(const std::function<bool(std::int64_t)>& indicator,
                              std::int64_t horizon, const std::vector<std::int64_t>& checkpoints) {
    if (horizon < 1) throw std::domain_error("upper_density: horizon must be >= 1");
    DensityEstimate out;
    out.horizon = horizon;
    std::size_t cp = 0;
    std::int64_t count = 0;
    for (std::int64_t n = 1; n <= horizon && cp < checkpoints.size(); ++n) {
        if (indicator(n)) ++count;
        if (n == checkpoints[cp]) {
            const double d = static_cast<double>(count) / static_cast<double>(n);
            out.checkpoints.push_back({n, d});
            if (d > out.running_max) {
                out.running_max = d;
                out.achieved_at = n;
            }
            ++cp;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Return sets

namespace {

// Best-effort preimage of v under T^n for coordinate-like actions; the result
// is only used as a witness candidate and is validated by direct evaluation.
std::optional<CoordinateVector> pullback(const OperatorDescriptor& T, std::int64_t n,
                                         const CoordinateVector& v) {
    try {
        if (const auto* sh = std::get_if<OperatorDescriptor::Shift>(&T.node)) {
            CoordinateVector u;
            for (const auto& [c, val] : v.entries()) {
                const LogMag prod = weight_product(sh->w, c.index + 1, n - 1);
                if (prod.zero) return std::nullopt;
                u.set({c.block, c.index + n}, val / prod.value());
            }
            return u;
        }
        if (const auto* d = std::get_if<OperatorDescriptor::Diagonal>(&T.node)) {
            CoordinateVector u;
            for (const auto& [c, val] : v.entries()) {
                Scalar dn{1.0, 0.0};
                for (std::int64_t i = 0; i < n; ++i) dn *= d->value(c.index);
                if (dn == Scalar{0.0, 0.0}) return std::nullopt;
                u.set(c, val / dn);
            }
            return u;
        }
        if (const auto* sm = std::get_if<OperatorDescriptor::ScalarMultiple>(&T.node)) {
            auto inner = pullback(*sm->child, n, v);
            if (!inner) return std::nullopt;
            Scalar ln{1.0, 0.0};
            for (std::int64_t i = 0; i < n; ++i) ln *= sm->lambda;
            *inner *= Scalar{1.0, 0.0} / ln;
            return inner;
        }
        if (std::get_if<OperatorDescriptor::Matrix>(&T.node)) {
            CoordinateVector u = v;
            for (std::int64_t i = 0; i < n; ++i) u = iterate(T, u, -1);
            return u;
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

ReturnSetResult return_set(const OperatorDescriptor& T, const CoordinateVector& center_a,
                           double radius_a, const CoordinateVector& center_b, double radius_b,
                           std::int64_t horizon) {
    ReturnSetResult out;
    const auto& components = T.ambient;
    std::vector<bool> hit(static_cast<std::size_t>(horizon) + 1, false);
    CoordinateVector img = center_a;
    for (std::int64_t n = 0; n <= horizon; ++n) {
        bool witnessed = frechet_distance(components, img, center_b).upper <= radius_b;
        if (!witnessed) {
            // One corrective step: aim the ball slice at the target center.
            if (auto u = pullback(T, n, center_b - img)) {
                double un = seminorm_eval(components, *u, 1);
                if (un > radius_a && un > 0.0) *u *= Scalar{radius_a / un, 0.0};
                if (!u->empty()) {
                    const CoordinateVector cand = img + iterate(T, *u, n);
                    witnessed = frechet_distance(components, cand, center_b).upper <= radius_b;
                }
            }
        }
        hit[static_cast<std::size_t>(n)] = witnessed;
        if (witnessed) out.witnessed.push_back(n);
        if (n < horizon) {
            img = apply(T, img);
            for (const auto& [c, v] : img.entries())
                if (std::abs(v) > kOverflowGuard) {
                    out.note = "orbit scan truncated at n = " + std::to_string(n);
                    horizon = n;
                    break;
                }
        }
    }
    std::int64_t n0 = horizon + 1;
    for (std::int64_t n = horizon; n >= 0 && hit[static_cast<std::size_t>(n)]; --n) n0 = n;
    out.cofinite_flag = n0 <= horizon;
    out.cofinite_from = n0;
    return out;
}

// ---------------------------------------------------------------------------
// Distributional reports

DistributionalReport detect_distributionally_irregular(const OperatorDescriptor& T,
                                                       const CoordinateVector& x,
                                                       std::int64_t horizon, double sigma,
                                                       double lambda_threshold, int m,
                                                       double density_target, bool collect_trace) {
    DistributionalReport out;
    out.sigma = sigma;
    out.lambda_threshold = lambda_threshold;
    out.m = m;
    out.horizon = horizon;
    const auto& components = T.ambient;
    const int level = std::min(m, components[0].levels());

    std::vector<bool> in_i(static_cast<std::size_t>(horizon) + 1, false);
    std::vector<bool> in_j(static_cast<std::size_t>(horizon) + 1, false);
    CoordinateVector orbit = x;
    std::int64_t reached = horizon;
    for (std::int64_t n = 1; n <= horizon; ++n) {
        orbit = apply(T, orbit);
        bool overflow = false;
        for (const auto& [c, v] : orbit.entries()) overflow = overflow || std::abs(v) > kOverflowGuard;
        if (overflow) {
            out.truncated = true;
            out.note = "orbit exceeded the numeric range at n = " + std::to_string(n);
            reached = n - 1;
            break;
        }
        const double dist = frechet_distance(components, orbit, {}).upper;
        const double nm = seminorm_eval(components, orbit, level);
        in_i[static_cast<std::size_t>(n)] = dist < sigma;
        in_j[static_cast<std::size_t>(n)] = nm > lambda_threshold;
        if (collect_trace)
            out.trace.push_back({n, dist, nm, in_i[static_cast<std::size_t>(n)],
                                 in_j[static_cast<std::size_t>(n)]});
    }
    const auto cps = default_checkpoints(reached > 0 ? reached : 1);
    out.small_density = upper_density([&](std::int64_t n) { return in_i[static_cast<std::size_t>(n)]; },
                                      reached > 0 ? reached : 1, cps);
    out.large_density = upper_density([&](std::int64_t n) { return in_j[static_cast<std::size_t>(n)]; },
                                      reached > 0 ? reached : 1, cps);
    out.irregular_at_level = out.small_density.running_max >= density_target &&
                             out.large_density.running_max >= density_target;
    return out;
}

LogDenseVector block_plateau_vector(const std::vector<std::int64_t>& boundaries,
                                    double small_log2_level, double large_log2_level,
                                    std::int64_t size) {
    LogDenseVector v;
    v.log2mag.resize(static_cast<std::size_t>(size));
    for (std::int64_t q = 0; q < size; ++q) {
        std::size_t block = 0;
        while (block < boundaries.size() && q >= boundaries[block]) ++block;
        const double level = (block % 2 == 0) ? small_log2_level : large_log2_level;
        v.log2mag[static_cast<std::size_t>(q)] = -static_cast<double>(q) + level;
    }
    return v;
}

DistributionalReport detect_distributionally_irregular_logdense(
    const OperatorDescriptor& T, const LogDenseVector& x, std::int64_t horizon, double sigma,
    double lambda_threshold, int m, double density_target) {
    auto sv = as_scaled_shift(T);
    if (!sv) throw std::domain_error("logdense orbit scan: scaled backward shift required");
    const WeightSpec& w = sv->w;
    const SpaceSpec& sp = sv->space;
    if (sp.source != SpaceSpec::Source::Unit || sp.sup_type())
        throw std::domain_error("logdense orbit scan: plain l^p space required");
    if (w.kind != WeightSpec::Kind::PrefixCycle || !w.prefix.empty() || w.tail_pos.size() != 1)
        throw std::domain_error("logdense orbit scan: constant-|weight| shift required");
    const double logc = std::log2(std::abs(w.at(1)));
    const double p = sp.p;

    DistributionalReport out;
    out.sigma = sigma;
    out.lambda_threshold = lambda_threshold;
    out.m = m;
    out.horizon = horizon;

    const auto size = static_cast<std::int64_t>(x.log2mag.size());
    if (size <= horizon)
        throw std::domain_error("logdense orbit scan: vector shorter than the horizon");

    // log2 ||T^n x||^p = logsumexp_q p*(n*logc + log2mag[q+n] ) over q >= 0,
    // windowed where the terms drop 64 bits below the running head.
    auto log2norm = [&](std::int64_t n) {
        double head = -kInf;
        double sum = 0.0;
        for (std::int64_t q = 0; q + n < size; ++q) {
            const double term =
                p * (static_cast<double>(n) * logc + x.log2mag[static_cast<std::size_t>(q + n)]);
            if (term == -kInf) continue;
            if (head == -kInf) {
                head = term;
                sum = 1.0;
                continue;
            }
            if (term > head) {
                sum = sum * std::exp2(head - term) + 1.0;
                head = term;
            } else {
                if (term < head - 64.0 && q > 8) break;
                sum += std::exp2(term - head);
            }
        }
        if (head == -kInf) return -kInf;
        return (head + std::log2(sum)) / p;
    };

    std::vector<bool> in_i(static_cast<std::size_t>(horizon) + 1, false);
    std::vector<bool> in_j(static_cast<std::size_t>(horizon) + 1, false);
    const double lsig = std::log2(sigma), llam = std::log2(lambda_threshold);
    for (std::int64_t n = 1; n <= horizon; ++n) {
        const double ln = log2norm(n);
        in_i[static_cast<std::size_t>(n)] = ln < lsig;
        in_j[static_cast<std::size_t>(n)] = ln > llam;
    }
    const auto cps = default_checkpoints(horizon);
    out.small_density = upper_density(
        [&](std::int64_t n) { return in_i[static_cast<std::size_t>(n)]; }, horizon, cps);
    out.large_density = upper_density(
        [&](std::int64_t n) { return in_j[static_cast<std::size_t>(n)]; }, horizon, cps);
    out.irregular_at_level = out.small_density.running_max >= density_target &&
                             out.large_density.running_max >= density_target;
    return out;
}

// ---------------------------------------------------------------------------
// Conditions (I) and (II)

ConditionIReport check_condition_I(const OperatorDescriptor& T,
                                   const std::vector<CoordinateVector>& battery,
                                   const std::vector<double>& delta_schedule) {
    ConditionIReport out;
    out.witnessed_all = true;
    for (const auto& x : battery) {
        for (double delta : delta_schedule) {
            ConditionIReport::Item item;
            {
                std::ostringstream os;
                os << "support " << x.support_size() << " [";
                for (const auto& [c, v] : x.entries()) os << c.index << " ";
                os << "]";
                item.vector_desc = os.str();
            }
            item.delta = delta;
            auto r = build_chain_to_zero(T, x, delta);
            item.witnessed = r.ok;
            item.how = r.ok ? (x.support_size() == 1 && x.entries()[0].first.index < 0
                                   ? "negative-series recipe or staircase"
                                   : "bounded-orbit staircase")
                            : r.error;
            out.witnessed_all = out.witnessed_all && item.witnessed;
            out.items.push_back(std::move(item));
        }
    }
    return out;
}

namespace {

// Orbit norm in log space for scaled shifts / scalar diagonals: exact and
// overflow-free. Falls back to direct application otherwise.
class OrbitScanner {
public:
    OrbitScanner(const OperatorDescriptor& T, CoordinateVector x)
        : T_(T), x_(std::move(x)), direct_(x_) {
        if (auto sv = as_scaled_shift(T)) {
            shift_ = sv;
            for (const auto& [c, v] : x_.entries())
                logs_.push_back({c.index, std::log(std::abs(v))});
        } else if (const auto* d = std::get_if<OperatorDescriptor::Diagonal>(&T.node);
                   d && d->is_scalar) {
            diag_log_ = std::log(std::abs(d->scalar));
            base_norm_ = seminorm_eval(T.ambient, x_, 1);
        }
    }

    // log ||T^n x|| at level 1 (single-norm ambients).
    double log_norm(std::int64_t n) {
        if (diag_log_) return std::log(base_norm_) + *diag_log_ * static_cast<double>(n);
        if (shift_) {
            const double p = shift_->space.p == 0.0 ? kInf : shift_->space.p;
            double head = -kInf, sum = 0.0;
            for (const auto& [q, lv] : logs_) {
                const std::int64_t tgt = q - n;
                if (shift_->space.index_set == IndexSet::Unilateral && tgt < shift_->space.origin)
                    continue;
                const LogMag prod = weight_product(shift_->w, tgt + 1, n - 1);
                const double term = lv + prod.log_mag;
                if (p == kInf) {
                    head = std::max(head, term);
                    continue;
                }
                if (term > head) {
                    sum = head == -kInf ? 1.0 : sum * std::exp(p * (head - term)) + 1.0;
                    head = term;
                } else {
                    sum += std::exp(p * (term - head));
                }
            }
            if (head == -kInf) return -kInf;
            return p == kInf ? head : head + std::log(sum) / p;
        }
        // direct fallback
        while (step_ < n) {
            direct_ = apply(T_, direct_);
            ++step_;
        }
        const double v = seminorm_eval(T_.ambient, direct_, 1);
        return v == 0.0 ? -kInf : std::log(v);
    }

private:
    const OperatorDescriptor& T_;
    CoordinateVector x_;
    CoordinateVector direct_;
    std::int64_t step_{0};
    std::optional<ShiftView> shift_;
    std::vector<std::pair<std::int64_t, double>> logs_;
    std::optional<double> diag_log_;
    double base_norm_{0.0};
};

}  // namespace

ConditionIIReport check_condition_II(const OperatorDescriptor& T, double gamma,
                                     const std::vector<double>& delta_schedule,
                                     std::int64_t horizon, bool banach_mode) {
    if (gamma <= 0.0) throw std::domain_error("check_condition_II: gamma must be positive");
    ConditionIIReport out;
    out.gamma = gamma;
    const auto& components = T.ambient;
    const SpaceSpec& sp = components[0];
    const double target = banach_mode ? gamma : 0.95;

    for (double delta : delta_schedule) {
        // Candidate endpoints x with a certified delta-chain 0 -> x.
        std::vector<std::pair<CoordinateVector, std::string>> candidates;
        const std::int64_t q0 = sp.index_set == IndexSet::Bilateral ? 0 : sp.origin;
        for (std::int64_t q = q0; q < q0 + 3; ++q) {
            if (!sp.in_index_set(q)) continue;
            CoordinateVector e = CoordinateVector::unit(q);
            const double nv = seminorm_eval(components, e, 1);
            if (nv > 0.0)
                candidates.push_back({Scalar{delta / (2.0 * nv), 0.0} * e,
                                      "delta/2-scaled canonical direction " + std::to_string(q)});
        }
        for (std::int64_t i = std::max<std::int64_t>(1, q0); i <= std::max<std::int64_t>(1, q0) + 2;
             ++i) {
            try {
                auto r = build_chain_zero_to_e(T, i, delta);
                if (r.ok)
                    candidates.push_back(
                        {r.chain.points.back(), "series chain endpoint e_" + std::to_string(i)});
            } catch (const std::exception&) {
            }
        }
        // Trajectory-tail trick: restart a chain at a point that has drifted
        // delta-close to 0.
        for (std::int64_t q = q0; q < q0 + 2; ++q) {
            if (!sp.in_index_set(q)) continue;
            CoordinateVector y = CoordinateVector::unit(q);
            for (std::int64_t n = 1; n <= 64; ++n) {
                y = apply(T, y);
                if (frechet_distance(components, y, {}).upper < delta) {
                    if (!y.empty())
                        candidates.push_back({y, "orbit tail T^" + std::to_string(n) + " e_" +
                                                     std::to_string(q)});
                    break;
                }
            }
        }

        for (auto& [x, desc] : candidates) {
            std::optional<Chain> chain;
            ChainCheck chk = verify_chain(T, {CoordinateVector{}, x}, delta);
            if (chk.status == ChainCheck::Status::Accepted) {
                chain = *chk.chain;
            } else if (x.support_size() == 1 && x.entries()[0].second == Scalar{1.0, 0.0}) {
                try {
                    auto r = build_chain_zero_to_e(T, x.entries()[0].first.index, delta);
                    if (r.ok) chain = r.chain;
                } catch (const std::exception&) {
                }
            }
            if (!chain) continue;

            OrbitScanner scan(T, x);
            const double lgam = std::log(gamma);
            const auto cps = default_checkpoints(horizon);
            DensityEstimate de = upper_density(
                [&](std::int64_t n) { return scan.log_norm(n) >= lgam; }, horizon, cps);
            if (de.running_max >= target) {
                out.witnessed = true;
                out.delta = delta;
                out.x_desc = desc;
                out.density = de.running_max;
                out.chain = chain;
                return out;
            }
        }
    }
    out.note = "no battery candidate reached the density target";
    return out;
}

// ---------------------------------------------------------------------------
// chain_to_density

namespace {

// Exact period-k point of a (possibly scaled) shift determined by a base
// block on [0, k): z_{q + rk} = z_q / (w_{q+1} ... w_{q+rk}). Materializes to
// a window with a certified geometric tail.
struct PeriodicPoint {
    const WeightSpec& w;
    std::vector<Scalar> base;  // indices 0..k-1
    int k;

    Scalar eval(std::int64_t q) const {
        std::int64_t b = q % k;
        if (b < 0) b += k;
        const Scalar zb = base[static_cast<std::size_t>(b)];
        if (q == b || zb == Scalar{0.0, 0.0}) return zb;
        if (q > b) {
            const LogMag prod = weight_product(w, b + 1, q - b - 1);
            return zb / prod.value();
        }
        const LogMag prod = weight_product(w, q + 1, b - q - 1);
        return zb * prod.value();
    }
};

}  // namespace

ChainToDensityResult chain_to_density(const OperatorDescriptor& T, const Chain& loop_y,
                                      std::int64_t horizon) {
    ChainToDensityResult out;
    out.horizon = horizon;
    auto sv = as_scaled_shift(T);
    if (!sv) {
        out.error = "scaled backward shift required";
        return out;
    }
    if (loop_y.points.empty() || !(loop_y.points.front() == loop_y.points.back())) {
        out.error = "loop chain y -> y required";
        return out;
    }
    const auto& components = T.ambient;
    const SpaceSpec& sp = sv->space;
    if (!sp.single_norm()) {
        out.error = "Banach sequence space required";
        return out;
    }
    const CoordinateVector& y = loop_y.points.front();
    if (seminorm_eval(components, y, 1) < 2.0 - 1e-12) {
        out.error = "||y|| >= 2 required";
        return out;
    }
    const int k = static_cast<int>(loop_y.length());
    out.k = k;

    HyperbolicSplitting split;
    try {
        split = make_shift_splitting(sv->w, sp);
    } catch (const std::exception& e) {
        out.error = std::string("no hyperbolic splitting: ") + e.what();
        return out;
    }

    Pseudotrajectory pt;
    pt.points.assign(loop_y.points.begin(), loop_y.points.end() - 1);
    pt.period = k;
    pt.delta = loop_y.delta;
    pt.provenance = "closed loop chain";
    ShadowResult shadow = construct_periodic_shadow(T, split, pt, 1.0);
    if (!shadow.ok) {
        out.error = "periodic shadow failed: " + shadow.error;
        return out;
    }

    // Snap the shadow to the exact period-k point with the same base block.
    PeriodicPoint z{sv->w, std::vector<Scalar>(static_cast<std::size_t>(k), Scalar{0.0, 0.0}), k};
    for (int q = 0; q < k; ++q) z.base[static_cast<std::size_t>(q)] = shadow.cert.point.at(q);

    // Materialize on a window covering the base block plus decay room.
    const std::int64_t wlo = sp.index_set == IndexSet::Bilateral
                                 ? std::min<std::int64_t>(-8 * k, -64)
                                 : sp.origin;
    const std::int64_t whi = std::max<std::int64_t>(8 * k, 64);
    CoordinateVector zfin;
    for (std::int64_t q = wlo; q <= whi; ++q) {
        const Scalar v = z.eval(q);
        if (v != Scalar{0.0, 0.0}) zfin.set({0, q}, v);
    }
    // Geometric tail of the materialization: ratios per period block on each
    // side are the cycle products, bounded away from 1 by the splitting.
    double tail = 0.0;
    {
        const double p = sp.p;
        double up = 0.0;
        for (std::int64_t q = whi + 1; q <= whi + k; ++q) up += std::pow(std::abs(z.eval(q)), p);
        const double ratio_up = std::pow(split.t, p * k);
        tail += up / std::max(1e-300, 1.0 - ratio_up);
        if (sp.index_set == IndexSet::Bilateral) {
            double dn = 0.0;
            for (std::int64_t q = wlo - k; q <= wlo - 1; ++q)
                dn += std::pow(std::abs(z.eval(q)), p);
            tail += dn / std::max(1e-300, 1.0 - ratio_up);
        }
        tail = std::pow(tail, 1.0 / p);
    }

    out.point = zfin;
    const double dist_fin = seminorm_eval(components, zfin - y, 1);
    out.distance_to_y = dist_fin + tail;
    if (out.distance_to_y >= 1.0) {
        out.error = "distance to y is " + std::to_string(out.distance_to_y) +
                    "; the eta of the loop chain is too coarse for the eps = 1 association";
        return out;
    }

    // Residues whose orbit norm certifies >= 1 (residue 0 does by the bound
    // ||z|| >= ||y|| - 1 >= 1).
    std::vector<bool> qualifies(static_cast<std::size_t>(k), false);
    CoordinateVector it = zfin;
    const double gain = std::max(1.0, sv->w.sup_abs());
    for (int j = 0; j < k; ++j) {
        const double lower = seminorm_eval(components, it, 1) -
                             tail * std::pow(gain, static_cast<double>(j));
        qualifies[static_cast<std::size_t>(j)] = lower >= 1.0;
        it = apply(T, it);
    }
    if (!qualifies[0]) {
        out.error = "residue 0 failed the level certificate";
        return out;
    }

    const auto cps = default_checkpoints(horizon);
    out.density = upper_density(
        [&](std::int64_t n) { return qualifies[static_cast<std::size_t>(n % k)]; }, horizon, cps);
    out.density_lower = 1.0 / static_cast<double>(k);
    out.ok = true;
    return out;
}

}  // namespace lindyn

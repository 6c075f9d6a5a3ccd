#include "lindyn/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindyn {

namespace {

double log_abs(Scalar z) { return std::log(std::abs(z)); }

/// Sum of log|c| over a cycle window [start, start+len) read with wraparound.
double cycle_window_log(const std::vector<Scalar>& cycle, std::size_t start, std::size_t len) {
    double s = 0.0;
    const std::size_t L = cycle.size();
    for (std::size_t i = 0; i < len; ++i) s += log_abs(cycle[(start + i) % L]);
    return s;
}

/// Max excess sum(log|w|) - len*rate over nonempty windows of length < 2L
/// inside a pure cycle region. Full cycles contribute cycle_sum - L*rate <= 0
/// whenever rate >= cycle mean, so this bounds all window lengths.
double cycle_partial_excess(const std::vector<Scalar>& cycle, double rate) {
    if (cycle.empty()) return 0.0;
    const std::size_t L = cycle.size();
    double best = 0.0;
    for (std::size_t s = 0; s < L; ++s) {
        double acc = 0.0;
        for (std::size_t len = 1; len < 2 * L + 1; ++len) {
            acc += log_abs(cycle[(s + len - 1) % L]);
            best = std::max(best, acc - static_cast<double>(len) * rate);
        }
    }
    return best;
}

}  // namespace

WeightSpec WeightSpec::constant(Scalar c, WeightDomain d) {
    WeightSpec w;
    w.domain = d;
    w.tail_pos = {c};
    if (d == WeightDomain::Bilateral) w.tail_neg = {c};
    w.validate();
    return w;
}

WeightSpec WeightSpec::unilateral_cycle(std::vector<Scalar> cycle, std::vector<Scalar> prefix,
                                        std::int64_t prefix_start) {
    WeightSpec w;
    w.domain = WeightDomain::Unilateral;
    w.tail_pos = std::move(cycle);
    w.prefix = std::move(prefix);
    w.prefix_start = prefix_start;
    w.validate();
    return w;
}

WeightSpec WeightSpec::bilateral_cycles(std::vector<Scalar> neg, std::vector<Scalar> pos,
                                        std::vector<Scalar> prefix, std::int64_t prefix_start) {
    WeightSpec w;
    w.domain = WeightDomain::Bilateral;
    w.tail_neg = std::move(neg);
    w.tail_pos = std::move(pos);
    w.prefix = std::move(prefix);
    w.prefix_start = prefix_start;
    w.validate();
    return w;
}

WeightSpec WeightSpec::ramp() {
    WeightSpec w;
    w.domain = WeightDomain::Unilateral;
    w.kind = Kind::Ramp;
    w.validate();
    return w;
}

std::int64_t WeightSpec::min_index() const {
    if (domain == WeightDomain::Bilateral) return std::numeric_limits<std::int64_t>::min() / 2;
    return 1;
}

Scalar WeightSpec::at(std::int64_t n) const {
    if (kind == Kind::Ramp) {
        if (n < 1) throw std::domain_error("WeightSpec: ramp weight index below 1");
        return scale * static_cast<double>(n);
    }
    if (domain == WeightDomain::Unilateral && n < 1)
        throw std::domain_error("WeightSpec: index below the unilateral domain");
    const std::int64_t pe = prefix.empty() ? prefix_start - 1 : prefix_end();
    if (!prefix.empty() && n >= prefix_start && n <= pe)
        return scale * prefix[static_cast<std::size_t>(n - prefix_start)];
    if (n > pe) {
        const std::int64_t off = n - pe - 1;
        return scale * tail_pos[static_cast<std::size_t>(off % static_cast<std::int64_t>(tail_pos.size()))];
    }
    const std::int64_t off = (prefix_start - 1) - n;
    return scale * tail_neg[static_cast<std::size_t>(off % static_cast<std::int64_t>(tail_neg.size()))];
}

bool WeightSpec::inf_positive() const {
    // Prefix + cycles take finitely many nonzero values; the ramp starts at 1.
    return true;
}

double WeightSpec::sup_abs() const {
    if (kind == Kind::Ramp) return kInf;
    double m = 0.0;
    for (const auto& v : prefix) m = std::max(m, std::abs(v));
    for (const auto& v : tail_pos) m = std::max(m, std::abs(v));
    for (const auto& v : tail_neg) m = std::max(m, std::abs(v));
    return m * std::abs(scale);
}

WeightSpec WeightSpec::scaled(Scalar s) const {
    if (s == Scalar{0.0, 0.0}) throw std::domain_error("WeightSpec: zero scale");
    WeightSpec w = *this;
    w.scale *= s;
    return w;
}

void WeightSpec::validate() const {
    auto check_nonzero = [](const std::vector<Scalar>& v, const char* what) {
        for (const auto& c : v)
            if (c == Scalar{0.0, 0.0})
                throw std::domain_error(std::string("WeightSpec: zero weight in ") + what);
    };
    if (scale == Scalar{0.0, 0.0}) throw std::domain_error("WeightSpec: zero scale");
    check_nonzero(prefix, "prefix");
    check_nonzero(tail_pos, "tail_pos");
    check_nonzero(tail_neg, "tail_neg");
    if (kind == Kind::Ramp) {
        if (domain != WeightDomain::Unilateral)
            throw std::domain_error("WeightSpec: ramp weights are unilateral");
        return;
    }
    if (tail_pos.empty()) throw std::domain_error("WeightSpec: missing positive tail cycle");
    if (domain == WeightDomain::Bilateral && tail_neg.empty())
        throw std::domain_error("WeightSpec: bilateral weights need a negative tail cycle");
    if (domain == WeightDomain::Unilateral && !prefix.empty() && prefix_start != 1)
        throw std::domain_error("WeightSpec: unilateral prefix must start at index 1");
}

std::string WeightSpec::render() const {
    std::ostringstream os;
    auto list = [&os](const std::vector<Scalar>& v) {
        os << "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ", ";
            if (v[i].imag() == 0.0)
                os << v[i].real();
            else
                os << v[i].real() << (v[i].imag() < 0 ? "-" : "+") << std::abs(v[i].imag()) << "i";
        }
        os << "]";
    };
    if (kind == Kind::Ramp) {
        os << "ramp w_n = n";
    } else {
        if (domain == WeightDomain::Bilateral) {
            os << "tail- = ";
            list(tail_neg);
            os << " ";
        }
        os << "prefix = ";
        list(prefix);
        os << " tail+ = ";
        list(tail_pos);
    }
    if (scale != Scalar{1.0, 0.0}) os << " scale = " << std::abs(scale);
    if (irregular) os << " (irregular)";
    return os.str();
}

LogMag weight_product(const WeightSpec& w, std::int64_t k, std::int64_t n) {
    if (n < 0) throw std::domain_error("weight_product: negative window length");
    const std::int64_t hi = k + n;
    if (w.kind == WeightSpec::Kind::Ramp) {
        if (k < 1) throw std::domain_error("weight_product: ramp index below 1");
        // product = (k+n)! / (k-1)!
        LogMag r{false, std::lgamma(static_cast<double>(hi) + 1.0) -
                            std::lgamma(static_cast<double>(k)),
                 0.0};
        return r * LogMag::from(w.scale).pow(n + 1);
    }
    if (w.domain == WeightDomain::Unilateral && k < w.min_index())
        throw std::domain_error("weight_product: window below the unilateral domain");

    LogMag acc = LogMag::from(w.scale).pow(n + 1);
    const std::int64_t pe = w.prefix.empty() ? w.prefix_start - 1 : w.prefix_end();
    const std::int64_t ps = w.prefix_start;

    // Prefix overlap, multiplied literally.
    for (std::int64_t i = std::max(k, ps); i <= std::min(hi, pe); ++i)
        acc = acc * LogMag::from(w.prefix[static_cast<std::size_t>(i - ps)]);

    // Positive-tail overlap [max(k, pe+1), hi]: whole cycles + remainder.
    if (hi > pe) {
        const std::int64_t lo = std::max(k, pe + 1);
        const std::int64_t count = hi - lo + 1;
        if (count > 0) {
            const auto L = static_cast<std::int64_t>(w.tail_pos.size());
            const std::int64_t phase = (lo - pe - 1) % L;
            const std::int64_t cycles = count / L;
            const std::int64_t rem = count % L;
            if (cycles > 0) {
                double cyc_log = 0.0, cyc_phase = 0.0;
                for (const auto& c : w.tail_pos) {
                    cyc_log += log_abs(c);
                    cyc_phase += std::arg(c);
                }
                acc = acc * LogMag{false, cyc_log * static_cast<double>(cycles),
                                   cyc_phase * static_cast<double>(cycles)};
            }
            for (std::int64_t i = 0; i < rem; ++i)
                acc = acc * LogMag::from(
                                w.tail_pos[static_cast<std::size_t>((phase + cycles * L + i) % L)]);
        }
    }

    // Negative-tail overlap [k, min(hi, ps-1)] (bilateral only).
    if (k < ps) {
        const std::int64_t hi2 = std::min(hi, ps - 1);
        const std::int64_t count = hi2 - k + 1;
        if (count > 0) {
            const auto L = static_cast<std::int64_t>(w.tail_neg.size());
            const std::int64_t cycles = count / L;
            const std::int64_t rem = count % L;
            if (cycles > 0) {
                double cyc_log = 0.0, cyc_phase = 0.0;
                for (const auto& c : w.tail_neg) {
                    cyc_log += log_abs(c);
                    cyc_phase += std::arg(c);
                }
                acc = acc * LogMag{false, cyc_log * static_cast<double>(cycles),
                                   cyc_phase * static_cast<double>(cycles)};
            }
            // Remainder taken at the window's bottom end.
            for (std::int64_t i = 0; i < rem; ++i) {
                const std::int64_t idx = hi2 - cycles * L - i;
                acc = acc * LogMag::from(w.tail_neg[static_cast<std::size_t>((ps - 1 - idx) % L)]);
            }
        }
    }
    return acc;
}

double cycle_log_gm(const std::vector<Scalar>& cycle) {
    double s = 0.0;
    for (const auto& c : cycle) s += log_abs(c);
    return s / static_cast<double>(cycle.size());
}

GmLimits gm_limits(const WeightSpec& w, GmSide side) {
    GmLimits out;
    if (w.irregular) {
        out.achieving_window = "irregular tail: no limit value";
        return out;
    }
    if (w.kind == WeightSpec::Kind::Ramp) {
        out.limsup_gm = kInf;
        out.liminf_gm = kInf;
        out.achieving_window = "ramp weights: factorial product growth";
        return out;
    }
    const double ls = std::log(std::abs(w.scale));
    const double gp = w.tail_pos.empty() ? 0.0 : std::exp(cycle_log_gm(w.tail_pos) + ls);
    const double gn = w.tail_neg.empty() ? 0.0 : std::exp(cycle_log_gm(w.tail_neg) + ls);
    switch (side) {
        case GmSide::Unilateral:
        case GmSide::BilateralPos:
            out.limsup_gm = gp;
            out.liminf_gm = gp;
            out.achieving_window = "positive tail cycle";
            break;
        case GmSide::BilateralNeg:
            if (w.domain != WeightDomain::Bilateral)
                throw std::domain_error("gm_limits: negative side of a unilateral weight");
            out.limsup_gm = gn;
            out.liminf_gm = gn;
            out.achieving_window = "negative tail cycle";
            break;
        case GmSide::BilateralAllK:
            if (w.domain != WeightDomain::Bilateral)
                throw std::domain_error("gm_limits: all-k side of a unilateral weight");
            out.limsup_gm = std::max(gp, gn);
            out.liminf_gm = std::min(gp, gn);
            out.achieving_window =
                "extremes over the two tail cycles (prefix-crossing windows interpolate)";
            break;
    }
    return out;
}

Growth forward_product_growth(const WeightSpec& w) {
    if (w.irregular) return Growth::unknown();
    if (w.kind == WeightSpec::Kind::Ramp) {
        Growth g = Growth::factorial_type(1.0);
        g.rate = std::log(std::abs(w.scale));
        return g;
    }
    return Growth::geometric(cycle_log_gm(w.tail_pos) + std::log(std::abs(w.scale)));
}

Growth backward_product_growth(const WeightSpec& w) {
    if (w.irregular) return Growth::unknown();
    if (w.domain != WeightDomain::Bilateral)
        throw std::domain_error("backward_product_growth: unilateral weight");
    return Growth::geometric(cycle_log_gm(w.tail_neg) + std::log(std::abs(w.scale)));
}

double product_distortion(const WeightSpec& w, GmSide side, double log_rate) {
    if (w.kind == WeightSpec::Kind::Ramp)
        throw std::domain_error("product_distortion: ramp weights have no geometric envelope");
    const double ls = std::log(std::abs(w.scale));
    const double rate = log_rate - ls;  // excess is invariant under uniform scaling

    // Any window decomposes into at most one stretch through the structural
    // region around the prefix plus pure-tail stretches; full tail cycles have
    // nonpositive excess when rate >= their mean, so the excesses below bound
    // every window.
    double excess = 0.0;
    const bool use_pos = side != GmSide::BilateralNeg;
    const bool use_neg =
        w.domain == WeightDomain::Bilateral && side != GmSide::Unilateral && side != GmSide::BilateralPos;
    if (use_pos && !w.tail_pos.empty()) excess += cycle_partial_excess(w.tail_pos, rate);
    if (use_neg && !w.tail_neg.empty()) excess += cycle_partial_excess(w.tail_neg, rate);

    if (!w.prefix.empty()) {
        const auto Lp = static_cast<std::int64_t>(std::max<std::size_t>(w.tail_pos.size(), 1));
        const auto Ln = static_cast<std::int64_t>(std::max<std::size_t>(w.tail_neg.size(), 1));
        const std::int64_t lo =
            w.domain == WeightDomain::Bilateral ? w.prefix_start - 2 * Ln : std::max<std::int64_t>(1, w.prefix_start);
        const std::int64_t hi = w.prefix_end() + 2 * Lp;
        double best = 0.0;
        for (std::int64_t a = lo; a <= hi; ++a) {
            double acc = 0.0;
            for (std::int64_t b = a; b <= hi; ++b) {
                acc += log_abs(w.at(b)) - ls;
                best = std::max(best, acc - static_cast<double>(b - a + 1) * rate);
            }
        }
        excess += best;
    }
    return std::exp(excess);
}

}  // namespace lindyn

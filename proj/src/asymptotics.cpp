#include "lindyn/asymptotics.hpp"

#include <sstream>

namespace lindyn {

namespace {
int sign_with_tol(double x, double tol) {
    if (x > tol) return 1;
    if (x < -tol) return -1;
    return 0;
}
}  // namespace

std::string Growth::describe() const {
    if (!known) return "irregular";
    std::ostringstream os;
    bool first = true;
    auto sep = [&] {
        if (!first) os << " * ";
        first = false;
    };
    if (factorial != 0.0) {
        sep();
        os << "(n!)^" << factorial;
    }
    if (rate != 0.0) {
        sep();
        os << "ratio " << std::exp(rate);
    }
    if (poly != 0.0) {
        sep();
        os << "n^" << poly;
    }
    if (logpow != 0.0) {
        sep();
        os << "(log n)^" << logpow;
    }
    if (first) os << "constant";
    return os.str();
}

const char* to_string(SeriesClass c) {
    switch (c) {
        case SeriesClass::Divergent: return "divergent";
        case SeriesClass::Convergent: return "convergent";
        default: return "undecided";
    }
}

const char* to_string(SeqLimit l) {
    switch (l) {
        case SeqLimit::Zero: return "to-zero";
        case SeqLimit::Infinity: return "to-infinity";
        case SeqLimit::BoundedPositive: return "bounded-positive";
        default: return "undecided";
    }
}

SeriesClass classify_series(const Growth& g) {
    if (!g.known) return SeriesClass::Undecided;
    switch (sign_with_tol(g.factorial, kLogTol)) {
        case 1: return SeriesClass::Divergent;
        case -1: return SeriesClass::Convergent;
        default: break;
    }
    switch (sign_with_tol(g.rate, kLogTol)) {
        case 1: return SeriesClass::Divergent;
        case -1: return SeriesClass::Convergent;
        default: break;
    }
    // Geometric part is 1: p-series / Bertrand rules.
    switch (sign_with_tol(g.poly + 1.0, kLogTol)) {
        case 1: return SeriesClass::Divergent;
        case -1: return SeriesClass::Convergent;
        default: break;
    }
    // u_n ~ (log n)^logpow / n: divergent iff logpow >= -1.
    return g.logpow >= -1.0 - kLogTol ? SeriesClass::Divergent : SeriesClass::Convergent;
}

SeqLimit sequence_limit(const Growth& g) {
    if (!g.known) return SeqLimit::Undecided;
    for (double part : {g.factorial, g.rate, g.poly, g.logpow}) {
        switch (sign_with_tol(part, kLogTol)) {
            case 1: return SeqLimit::Infinity;
            case -1: return SeqLimit::Zero;
            default: continue;
        }
    }
    return SeqLimit::BoundedPositive;
}

}  // namespace lindyn

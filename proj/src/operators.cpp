#include "lindyn/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lindyn {

namespace {

Eigen::FullPivLU<Eigen::MatrixXcd> lu_of(const Eigen::MatrixXcd& m) {
    return Eigen::FullPivLU<Eigen::MatrixXcd>(m);
}

}  // namespace

Scalar OperatorDescriptor::Diagonal::value(std::int64_t n) const {
    if (is_scalar) return scalar;
    const std::int64_t off = n - table_start;
    if (off >= 0 && off < static_cast<std::int64_t>(table.size()))
        return table[static_cast<std::size_t>(off)];
    return table_tail;
}

OperatorDescriptor OperatorDescriptor::backward_shift(WeightSpec w, SpaceSpec space) {
    w.validate();
    space.validate();
    const bool bw = w.domain == WeightDomain::Bilateral;
    const bool bs = space.index_set == IndexSet::Bilateral;
    if (bw != bs) throw std::domain_error("shift: weight domain does not match the space");
    OperatorDescriptor t;
    t.node = Shift{std::move(w)};
    t.ambient = {std::move(space)};
    return t;
}

OperatorDescriptor OperatorDescriptor::diagonal(Scalar lambda, SpaceSpec space) {
    OperatorDescriptor t;
    Diagonal d;
    d.is_scalar = true;
    d.scalar = lambda;
    t.node = d;
    t.ambient = {std::move(space)};
    return t;
}

OperatorDescriptor OperatorDescriptor::diagonal_table(std::vector<Scalar> values, Scalar tail,
                                                      SpaceSpec space) {
    OperatorDescriptor t;
    Diagonal d;
    d.is_scalar = false;
    d.table = std::move(values);
    d.table_tail = tail;
    d.table_start = space.index_set == IndexSet::Bilateral ? 0 : space.origin;
    t.node = d;
    t.ambient = {std::move(space)};
    return t;
}

OperatorDescriptor OperatorDescriptor::matrix(Eigen::MatrixXcd m, double p) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw std::domain_error("matrix: square nonempty matrix required");
    OperatorDescriptor t;
    const auto dim = static_cast<std::int64_t>(m.rows());
    t.node = Matrix{std::move(m)};
    t.ambient = {SpaceSpec::finite(dim, p)};
    return t;
}

const SpaceSpec& OperatorDescriptor::space() const {
    if (ambient.size() != 1)
        throw std::domain_error("operator: single-component ambient expected");
    return ambient[0];
}

std::string OperatorDescriptor::kind_name() const {
    return std::visit(
        [](const auto& n) -> std::string {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Shift>) return "shift";
            if constexpr (std::is_same_v<T, Diagonal>) return "diagonal";
            if constexpr (std::is_same_v<T, ScalarMultiple>) return "scalar_multiple";
            if constexpr (std::is_same_v<T, Power>) return "power";
            if constexpr (std::is_same_v<T, Inverse>) return "inverse";
            if constexpr (std::is_same_v<T, DirectSum>) return "direct_sum";
            if constexpr (std::is_same_v<T, Matrix>) return "matrix";
        },
        node);
}

std::string OperatorDescriptor::render() const {
    std::ostringstream os;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Shift>) {
                os << (n.w.domain == WeightDomain::Bilateral ? "bilateral_shift "
                                                             : "unilateral_shift ")
                   << n.w.render();
            } else if constexpr (std::is_same_v<T, Diagonal>) {
                if (n.is_scalar)
                    os << "diagonal lambda = " << n.scalar.real()
                       << (n.scalar.imag() != 0.0 ? "+i*" + std::to_string(n.scalar.imag()) : "");
                else
                    os << "diagonal table (" << n.table.size() << " entries)";
            } else if constexpr (std::is_same_v<T, ScalarMultiple>) {
                os << n.lambda.real();
                if (n.lambda.imag() != 0.0) os << "+i*" << n.lambda.imag();
                os << " * (" << n.child->render() << ")";
            } else if constexpr (std::is_same_v<T, Power>) {
                os << "(" << n.child->render() << ")^" << n.n;
            } else if constexpr (std::is_same_v<T, Inverse>) {
                os << "(" << n.child->render() << ")^-1";
            } else if constexpr (std::is_same_v<T, DirectSum>) {
                os << "direct_sum(";
                for (std::size_t i = 0; i < n.children.size(); ++i) {
                    if (i) os << ", ";
                    os << n.children[i]->render();
                }
                os << ")";
            } else if constexpr (std::is_same_v<T, Matrix>) {
                os << "matrix " << n.m.rows() << "x" << n.m.cols();
            }
        },
        node);
    return os.str();
}

// ---------------------------------------------------------------------------
// apply

namespace {

CoordinateVector apply_shift(const WeightSpec& w, const SpaceSpec& space,
                             const CoordinateVector& x) {
    CoordinateVector out;
    for (const auto& [c, v] : x.entries()) {
        const std::int64_t target = c.index - 1;
        if (space.index_set == IndexSet::Unilateral && target < space.origin) continue;
        if (space.truncation_dim && !space.in_index_set(target)) continue;
        out.add({c.block, target}, w.at(c.index) * v);
    }
    return out;
}

CoordinateVector apply_forward(const WeightSpec& w, const CoordinateVector& x) {
    CoordinateVector out;
    for (const auto& [c, v] : x.entries()) out.add({c.block, c.index + 1}, v / w.at(c.index + 1));
    return out;
}

CoordinateVector shift_blocks(const CoordinateVector& x, std::int32_t delta) {
    CoordinateVector out;
    for (const auto& [c, v] : x.entries())
        out.set({static_cast<std::int32_t>(c.block + delta), c.index}, v);
    return out;
}

CoordinateVector slice_blocks(const CoordinateVector& x, std::int32_t lo, std::int32_t hi) {
    CoordinateVector out;
    for (const auto& [c, v] : x.entries())
        if (c.block >= lo && c.block < hi) out.set(c, v);
    return out;
}

CoordinateVector apply_matrix(const Eigen::MatrixXcd& m, const CoordinateVector& x) {
    const auto dim = m.rows();
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    for (const auto& [c, val] : x.entries()) {
        if (c.index < 0 || c.index >= dim)
            throw std::domain_error("matrix apply: coordinate outside the dimension");
        v[static_cast<Eigen::Index>(c.index)] = val;
    }
    Eigen::VectorXcd r = m * v;
    CoordinateVector out;
    for (Eigen::Index i = 0; i < dim; ++i)
        if (r[i] != Scalar{0.0, 0.0}) out.set({x.empty() ? 0 : x.entries()[0].first.block, i}, r[i]);
    return out;
}

CoordinateVector apply_inverse_of(const OperatorDescriptor& T, const CoordinateVector& x);

CoordinateVector apply_node(const OperatorDescriptor& T, const CoordinateVector& x) {
    return std::visit(
        [&](const auto& n) -> CoordinateVector {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OperatorDescriptor::Shift>) {
                return apply_shift(n.w, T.space(), x);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Diagonal>) {
                CoordinateVector out;
                for (const auto& [c, v] : x.entries()) out.set(c, n.value(c.index) * v);
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::ScalarMultiple>) {
                CoordinateVector out = apply_node(*n.child, x);
                out *= n.lambda;
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Power>) {
                CoordinateVector out = x;
                for (int i = 0; i < n.n; ++i) out = apply_node(*n.child, out);
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Inverse>) {
                return apply_inverse_of(*n.child, x);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::DirectSum>) {
                CoordinateVector out;
                std::int32_t offset = 0;
                for (const auto& child : n.children) {
                    const auto width = static_cast<std::int32_t>(child->ambient.size());
                    CoordinateVector part =
                        shift_blocks(slice_blocks(x, offset, offset + width), -offset);
                    out += shift_blocks(apply_node(*child, part), offset);
                    offset += width;
                }
                if (x.max_block() >= offset)
                    throw std::domain_error("direct sum apply: block outside the sum");
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Matrix>) {
                return apply_matrix(n.m, x);
            }
        },
        T.node);
}

CoordinateVector apply_inverse_of(const OperatorDescriptor& T, const CoordinateVector& x) {
    if (!is_invertible(T)) throw std::domain_error("inverse: operator is not invertible");
    return std::visit(
        [&](const auto& n) -> CoordinateVector {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OperatorDescriptor::Shift>) {
                return apply_forward(n.w, x);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Diagonal>) {
                CoordinateVector out;
                for (const auto& [c, v] : x.entries()) out.set(c, v / n.value(c.index));
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::ScalarMultiple>) {
                CoordinateVector out = apply_inverse_of(*n.child, x);
                out *= Scalar{1.0, 0.0} / n.lambda;
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Power>) {
                CoordinateVector out = x;
                for (int i = 0; i < n.n; ++i) out = apply_inverse_of(*n.child, out);
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Inverse>) {
                return apply_node(*n.child, x);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::DirectSum>) {
                CoordinateVector out;
                std::int32_t offset = 0;
                for (const auto& child : n.children) {
                    const auto width = static_cast<std::int32_t>(child->ambient.size());
                    CoordinateVector part =
                        shift_blocks(slice_blocks(x, offset, offset + width), -offset);
                    out += shift_blocks(apply_inverse_of(*child, part), offset);
                    offset += width;
                }
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Matrix>) {
                const auto dim = n.m.rows();
                Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
                for (const auto& [c, val] : x.entries())
                    v[static_cast<Eigen::Index>(c.index)] = val;
                Eigen::VectorXcd r = lu_of(n.m).solve(v);
                CoordinateVector out;
                for (Eigen::Index i = 0; i < dim; ++i)
                    if (std::abs(r[i]) > 0.0) out.set({0, i}, r[i]);
                return out;
            }
        },
        T.node);
}

}  // namespace

CoordinateVector apply(const OperatorDescriptor& T, const CoordinateVector& x) {
    return apply_node(T, x);
}

CoordinateVector iterate(const OperatorDescriptor& T, CoordinateVector x, std::int64_t n) {
    if (n >= 0) {
        for (std::int64_t i = 0; i < n; ++i) x = apply_node(T, x);
    } else {
        for (std::int64_t i = 0; i < -n; ++i) x = apply_inverse_of(T, x);
    }
    return x;
}

bool is_invertible(const OperatorDescriptor& T) {
    return std::visit(
        [&](const auto& n) -> bool {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OperatorDescriptor::Shift>) {
                return n.w.domain == WeightDomain::Bilateral && n.w.inf_positive();
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Diagonal>) {
                if (n.is_scalar) return n.scalar != Scalar{0.0, 0.0};
                if (n.table_tail == Scalar{0.0, 0.0}) return false;
                return std::none_of(n.table.begin(), n.table.end(),
                                    [](Scalar v) { return v == Scalar{0.0, 0.0}; });
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::ScalarMultiple>) {
                return n.lambda != Scalar{0.0, 0.0} && is_invertible(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Power>) {
                return is_invertible(*n.child);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Inverse>) {
                return true;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::DirectSum>) {
                return std::all_of(n.children.begin(), n.children.end(),
                                   [](const OpPtr& c) { return is_invertible(*c); });
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Matrix>) {
                return lu_of(n.m).isInvertible();
            }
        },
        T.node);
}

Transform Transform::direct_sum_with(OperatorDescriptor u) {
    Transform t{TransformKind::DirectSumWith, 1, {1.0, 0.0}, {}};
    t.other = std::move(u);
    return t;
}

OperatorDescriptor transform(const OperatorDescriptor& T, const Transform& op) {
    OperatorDescriptor out;
    switch (op.kind) {
        case TransformKind::PowerOp: {
            if (op.power < 1) throw std::domain_error("transform: power exponent must be >= 1");
            if (op.power == 1) return T;
            out.node = OperatorDescriptor::Power{op.power, std::make_shared<OperatorDescriptor>(T)};
            out.ambient = T.ambient;
            return out;
        }
        case TransformKind::Rotate: {
            if (std::abs(std::abs(op.rotation) - 1.0) > 1e-12)
                throw std::domain_error("transform: rotate requires |lambda| = 1");
            out.node = OperatorDescriptor::ScalarMultiple{op.rotation,
                                                          std::make_shared<OperatorDescriptor>(T)};
            out.ambient = T.ambient;
            return out;
        }
        case TransformKind::InverseOp: {
            if (!is_invertible(T)) throw std::domain_error("transform: operator is not invertible");
            out.node = OperatorDescriptor::Inverse{std::make_shared<OperatorDescriptor>(T)};
            out.ambient = T.ambient;
            return out;
        }
        case TransformKind::DirectSumWith: {
            OperatorDescriptor::DirectSum ds;
            ds.children = {std::make_shared<OperatorDescriptor>(T),
                           std::make_shared<OperatorDescriptor>(*op.other)};
            out.node = std::move(ds);
            out.ambient = T.ambient;
            for (const auto& s : op.other->ambient) out.ambient.push_back(s);
            return out;
        }
    }
    throw std::logic_error("transform: unknown kind");
}

// ---------------------------------------------------------------------------
// Continuity on Köthe spaces

namespace {

Growth koethe_ratio_growth(const KoetheMatrix& A, int n, int m) {
    // growth in i of a_{i,n} / a_{i+1,m}
    switch (A.form) {
        case KoetheForm::Ones: return Growth::constant();
        case KoetheForm::KPowJ:
            return Growth::geometric(std::log(static_cast<double>(n)) -
                                     std::log(static_cast<double>(m)));
        case KoetheForm::JPowK: return Growth::polynomial(static_cast<double>(n - m));
        case KoetheForm::ExpNegJOverK:
            return Growth::geometric(1.0 / static_cast<double>(m) - 1.0 / static_cast<double>(n));
        case KoetheForm::LogPowK: return Growth::logarithmic(static_cast<double>(n - m));
        case KoetheForm::Table: return Growth::constant();
    }
    return Growth::unknown();
}

}  // namespace

Growth value_growth(const WeightSpec& w) {
    if (w.irregular) return Growth::unknown();
    if (w.kind == WeightSpec::Kind::Ramp) return Growth::polynomial(1.0);
    return Growth::constant();
}

ContinuityVerdict continuity_check_koethe(const WeightSpec& w, const KoetheMatrix& A, int k_max) {
    if (w.domain != WeightDomain::Unilateral)
        throw std::domain_error("continuity check: unilateral setting required");
    ContinuityVerdict out;
    const Growth wg = value_growth(w);
    if (!wg.known) {
        out.continuous = Trilean::Undecided;
        out.witness = "weight asymptotics unclassifiable";
        return out;
    }
    std::ostringstream note;
    // For every form, enlarging m only shrinks the ratio, so it suffices to
    // find one admissible m per n (searched past k_max when the cap is tight).
    for (int n = 1; n <= k_max; ++n) {
        bool found = false;
        const int m_hi = std::max(2 * k_max, n + 64);
        for (int m = n + 1; m <= m_hi; ++m) {
            const Growth u = wg * koethe_ratio_growth(A, n, m);
            const SeqLimit lim = sequence_limit(u);
            if (lim == SeqLimit::Zero || lim == SeqLimit::BoundedPositive) {
                double sup = 0.0;
                for (std::int64_t i = 1; i <= 400; ++i) {
                    const double ai1 = A.entry(i + 1, m);
                    if (ai1 == 0.0) {
                        sup = kInf;
                        break;
                    }
                    sup = std::max(sup, std::abs(w.at(i + 1)) * A.entry(i, n) / ai1);
                }
                if (sup == kInf) continue;
                note << "n=" << n << " -> m=" << m << " sup~" << sup
                     << (m > k_max ? " (beyond K_max)" : "") << "; ";
                found = true;
                break;
            }
            if (lim == SeqLimit::Undecided) {
                out.continuous = Trilean::Undecided;
                out.witness = "unclassifiable ratio asymptotics at n=" + std::to_string(n);
                return out;
            }
        }
        if (!found) {
            // The ratio growth is monotone in m for every supported form; if
            // the far end of the search still diverges, no m works.
            out.continuous = Trilean::No;
            out.witness = "divergent subsequence: n=" + std::to_string(n) +
                          ", sup_i |w_{i+1}| a_{i,n}/a_{i+1,m} = inf for every m";
            return out;
        }
    }
    out.continuous = Trilean::Yes;
    out.witness = note.str();
    return out;
}

// ---------------------------------------------------------------------------
// Hyperbolic splittings

bool HyperbolicSplitting::in_m(std::int64_t index) const {
    if (kind == Kind::CoordThreshold) return index < split_at;
    return std::find(m_indices.begin(), m_indices.end(), index) != m_indices.end();
}

HyperbolicSplitting make_shift_splitting(const WeightSpec& w, const SpaceSpec& space) {
    HyperbolicSplitting s;
    s.kind = HyperbolicSplitting::Kind::CoordThreshold;
    s.alpha = 1.0;
    s.c = 1.0;

    auto inverted = [](const WeightSpec& v) {
        WeightSpec r = v;
        auto inv = [](std::vector<Scalar>& xs) {
            for (auto& x : xs) x = Scalar{1.0, 0.0} / x;
        };
        inv(r.prefix);
        inv(r.tail_pos);
        inv(r.tail_neg);
        r.scale = Scalar{1.0, 0.0} / r.scale;
        return r;
    };

    if (w.domain == WeightDomain::Unilateral) {
        const auto gm = gm_limits(w, GmSide::Unilateral);
        if (!gm.limsup_gm) throw std::domain_error("splitting: irregular weights");
        const double g = *gm.limsup_gm;
        if (g < 1.0 - kLogTol) {
            // Pure contraction: M is the whole space.
            s.split_at = std::numeric_limits<std::int64_t>::max() / 2;
            s.t = g;
            s.beta = product_distortion(w, GmSide::Unilateral, std::log(g));
        } else if (g > 1.0 + kLogTol) {
            // Pure dilation: N is the whole space, S the forward shift.
            s.split_at = space.origin;
            s.t = 1.0 / g;
            s.beta = product_distortion(inverted(w), GmSide::Unilateral, std::log(s.t));
        } else {
            throw std::domain_error("splitting: geometric mean on the unit circle");
        }
        return s;
    }

    const auto gn = gm_limits(w, GmSide::BilateralNeg);
    const auto gp = gm_limits(w, GmSide::BilateralPos);
    if (!gn.limsup_gm || !gp.limsup_gm) throw std::domain_error("splitting: irregular weights");
    if (*gn.limsup_gm < 1.0 - kLogTol && *gp.liminf_gm > 1.0 + kLogTol) {
        // Condition (C): negative coordinates contract forward, nonnegative
        // ones contract backward.
        s.split_at = 0;
        s.t = std::max(*gn.limsup_gm, 1.0 / *gp.liminf_gm);
        const double bm = product_distortion(w, GmSide::BilateralNeg, std::log(s.t));
        const double bn = product_distortion(inverted(w), GmSide::BilateralPos, std::log(s.t));
        s.beta = std::max(bm, bn);
        return s;
    }
    if (*gn.limsup_gm < 1.0 - kLogTol && *gp.limsup_gm < 1.0 - kLogTol) {
        s.split_at = std::numeric_limits<std::int64_t>::max() / 2;
        s.t = std::max(*gn.limsup_gm, *gp.limsup_gm);
        s.beta = product_distortion(w, GmSide::BilateralAllK, std::log(s.t));
        return s;
    }
    if (*gn.liminf_gm > 1.0 + kLogTol && *gp.liminf_gm > 1.0 + kLogTol) {
        s.split_at = std::numeric_limits<std::int64_t>::min() / 2;
        s.t = 1.0 / std::min(*gn.liminf_gm, *gp.liminf_gm);
        s.beta = product_distortion(inverted(w), GmSide::BilateralAllK, std::log(s.t));
        return s;
    }
    throw std::domain_error("splitting: weight cycles do not separate from the unit circle");
}

HyperbolicSplitting make_matrix_splitting(const Eigen::MatrixXcd& m,
                                          std::vector<std::int64_t> m_indices) {
    HyperbolicSplitting s;
    s.kind = HyperbolicSplitting::Kind::IndexSets;
    s.m_indices = std::move(m_indices);
    s.estimated = true;
    s.alpha = 1.0;
    s.c = 1.0;

    const auto dim = m.rows();
    std::vector<std::int64_t> n_idx;
    for (std::int64_t i = 0; i < dim; ++i)
        if (!s.in_m(i)) n_idx.push_back(i);

    auto submatrix = [&](const std::vector<std::int64_t>& idx) {
        Eigen::MatrixXcd sub(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c2 = 0; c2 < idx.size(); ++c2)
                sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c2)) =
                    m(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c2]));
        return sub;
    };
    auto spectral_radius_est = [](const Eigen::MatrixXcd& a) {
        if (a.rows() == 0) return 0.0;
        return a.eigenvalues().cwiseAbs().maxCoeff();
    };

    double tm = 0.0, tn = 0.0;
    Eigen::MatrixXcd mm, nn;
    if (!s.m_indices.empty()) {
        mm = submatrix(s.m_indices);
        tm = spectral_radius_est(mm);
    }
    if (!n_idx.empty()) {
        nn = submatrix(n_idx);
        const auto lu = lu_of(nn);
        if (!lu.isInvertible())
            throw std::domain_error("splitting: expanding block is not invertible");
        tn = spectral_radius_est(lu.inverse());
    }
    s.t = std::min(0.999, std::max({tm, tn, 1e-6}) * 1.0000001);
    if (std::max(tm, tn) >= 1.0)
        throw std::domain_error("splitting: block spectral radius reaches 1");

    // beta sampled over powers; the certificates this feeds are re-verified.
    double beta = 1.0;
    auto probe = [&](const Eigen::MatrixXcd& a) {
        if (a.rows() == 0) return;
        Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
        double tp = 1.0;
        for (int n = 1; n <= 80; ++n) {
            pw = a * pw;
            tp *= s.t;
            beta = std::max(beta, pw.operatorNorm() / tp);
        }
    };
    probe(mm);
    if (nn.rows() > 0) probe(lu_of(nn).inverse());
    s.beta = beta * 1.0000001;
    return s;
}

CoordinateVector project_m(const HyperbolicSplitting& s, const CoordinateVector& x) {
    CoordinateVector out;
    for (const auto& [c, v] : x.entries())
        if (s.in_m(c.index)) out.set(c, v);
    return out;
}

CoordinateVector project_n(const HyperbolicSplitting& s, const CoordinateVector& x) {
    CoordinateVector out;
    for (const auto& [c, v] : x.entries())
        if (!s.in_m(c.index)) out.set(c, v);
    return out;
}

CoordinateVector apply_backward(const OperatorDescriptor& T, const HyperbolicSplitting& s,
                                const CoordinateVector& z) {
    return std::visit(
        [&](const auto& n) -> CoordinateVector {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, OperatorDescriptor::Shift>) {
                return apply_forward(n.w, z);
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Diagonal>) {
                CoordinateVector out;
                for (const auto& [c, v] : z.entries()) out.set(c, v / n.value(c.index));
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::ScalarMultiple>) {
                CoordinateVector out = apply_backward(*n.child, s, z);
                out *= Scalar{1.0, 0.0} / n.lambda;
                return out;
            } else if constexpr (std::is_same_v<N, OperatorDescriptor::Matrix>) {
                // Solve on the expanding index set.
                std::vector<std::int64_t> n_idx;
                for (std::int64_t i = 0; i < static_cast<std::int64_t>(n.m.rows()); ++i)
                    if (!s.in_m(i)) n_idx.push_back(i);
                Eigen::MatrixXcd sub(n_idx.size(), n_idx.size());
                Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_idx.size()));
                for (std::size_t r = 0; r < n_idx.size(); ++r) {
                    for (std::size_t c2 = 0; c2 < n_idx.size(); ++c2)
                        sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c2)) =
                            n.m(static_cast<Eigen::Index>(n_idx[r]),
                                static_cast<Eigen::Index>(n_idx[c2]));
                    rhs[static_cast<Eigen::Index>(r)] = z.at(n_idx[r]);
                }
                Eigen::VectorXcd sol = lu_of(sub).solve(rhs);
                CoordinateVector out;
                for (std::size_t r = 0; r < n_idx.size(); ++r)
                    if (sol[static_cast<Eigen::Index>(r)] != Scalar{0.0, 0.0})
                        out.set({0, n_idx[r]}, sol[static_cast<Eigen::Index>(r)]);
                return out;
            } else {
                throw std::domain_error("apply_backward: unsupported operator kind " +
                                        T.kind_name());
            }
        },
        T.node);
}

}  // namespace lindyn

// Copyright 2026 The qshannon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qshannon/typicality.hpp"

namespace qshannon {

/// Block compression scheme built on a projector Pi of rank K: the encoder maps
/// sigma to Pi sigma Pi + (1 - Tr sigma Pi)/K 1_K on the code space im Pi, and the
/// decoder embeds the code space back.
class CompressionScheme {
   public:
    CompressionScheme(TypicalProjector projector, bool fallback = false)
        : projector_(std::move(projector)), fallback_(fallback) {
        if (projector_.empty()) {
            throw Error(ErrorKind::DomainError, "compression needs a nonempty projector");
        }
        code_dim_ = projector_.trace();
        log2_code_dim_ = projector_.log2_trace();
    }

    const TypicalProjector &projector() const {
        return projector_;
    }
    std::size_t n() const {
        return projector_.n();
    }
    std::size_t d() const {
        return projector_.d();
    }
    double code_dim() const {
        return code_dim_;
    }
    double rate() const {
        return std::max(0.0, log2_code_dim_ / static_cast<double>(n()));
    }
    /// Set when no sequence was typical and the scheme fell back to one top sequence.
    bool fallback() const {
        return fallback_;
    }

    /// Isometry from the code space into the block space.
    Matrix embedding() const {
        return projector_.range_basis();
    }

    KrausChannel encoder() const {
        Matrix v = embedding();
        const auto dim = v.rows();
        const auto k = v.cols();
        if (static_cast<double>(k) * static_cast<double>(dim - k) > 65536.0) {
            throw Error(ErrorKind::InfeasibleScale, "encoder has too many Kraus operators");
        }
        std::vector<Matrix> ops;
        ops.emplace_back(v.adjoint());
        Matrix comp = complement_basis(v);
        const double scale = 1.0 / std::sqrt(static_cast<double>(k));
        for (Eigen::Index l = 0; l < comp.cols(); ++l) {
            for (Eigen::Index j = 0; j < k; ++j) {
                Matrix op = Matrix::Zero(k, dim);
                op.row(j) = scale * comp.col(l).adjoint();
                ops.push_back(op);
            }
        }
        return KrausChannel(std::move(ops));
    }

    KrausChannel decoder() const {
        return KrausChannel({embedding()});
    }

   private:
    static Matrix complement_basis(const Matrix &v) {
        const auto dim = v.rows();
        Matrix p = Matrix::Identity(dim, dim) - v * v.adjoint();
        return support_basis((p + p.adjoint()) * 0.5);
    }

    TypicalProjector projector_;
    bool fallback_ = false;
    double code_dim_ = 0;
    double log2_code_dim_ = 0;
};

inline CompressionScheme schumacher_scheme(const Matrix &rho, std::size_t n, double alpha) {
    if (alpha <= 0) {
        throw Error(ErrorKind::DomainError, "alpha must be positive");
    }
    TypicalProjector p = variance_typical_projector(rho, n, alpha);
    if (!p.empty()) {
        return CompressionScheme(std::move(p));
    }
    Counts top(static_cast<std::size_t>(rho.rows()), 0);
    top[0] = n;
    return CompressionScheme(TypicalProjector(n, top.size(), p.classes(), {{top}}), true);
}

inline CompressionScheme schumacher_scheme(const DensityOperator &rho, std::size_t n, double alpha) {
    return schumacher_scheme(rho.matrix(), n, alpha);
}

inline CompressionScheme jhhh_scheme(const Matrix &basis, std::size_t n, double rate) {
    return CompressionScheme(jhhh_projector(basis, n, rate));
}

/// Scheme on the K most probable eigen-sequences of rho^{(x)n} (ties broken lexicographically).
inline CompressionScheme truncation_scheme(const Matrix &rho, std::size_t n, double k) {
    Spectrum s = detail::clamped_spectrum(rho);
    if (k < 1) {
        throw Error(ErrorKind::DomainError, "code dimension must be at least one");
    }
    auto all = enumerate_types(n, s.dim());
    std::vector<std::pair<double, Counts>> ranked;
    for (auto &c : all) {
        ranked.emplace_back(log2_sequence_weight(c, s.values), c);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
    std::vector<JointType> types;
    std::optional<TypicalProjector::Partial> partial;
    double left = k;
    for (const auto &r : ranked) {
        if (left <= 0) {
            break;
        }
        const double size = std::exp2(log2_multinomial(r.second));
        if (std::round(size) <= left) {
            types.push_back({r.second});
            left -= std::round(size);
        } else {
            partial = TypicalProjector::Partial{{r.second}, std::floor(left)};
            left = 0;
        }
    }
    return CompressionScheme(TypicalProjector(n, s.dim(), detail::single_class(s.vectors, n), types, partial));
}

struct SchemeFidelities {
    double f_bar = 0;
    double d_bar = 0;
    double f_e = 0;
    bool symbolic = false;
};

enum class EvalPath { Auto, Dense, Symbolic };

namespace detail {

// Fidelity and half trace distance of a pure product state with <v|Pi|v> = t
// under the composite scheme, whose code space has dimension k.
inline std::pair<double, double> pure_scheme_terms(double t, double k) {
    t = std::clamp(t, 0.0, 1.0);
    const double c = (1.0 - t) / k;
    const double f = t * t + t * (1.0 - t) / k;
    const double tr = c - 1.0 + t;
    const double norm = (k - 1.0) * c + std::sqrt(tr * tr + 4.0 * (1.0 - t) * (c + t));
    return {f, 0.5 * norm};
}

inline bool diagonal_in_basis(const Matrix &rho, const Matrix &basis) {
    Matrix m = basis.adjoint() * rho * basis;
    m.diagonal().setZero();
    return m.cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace detail

/// Average fidelity, average distortion and entanglement fidelity of the scheme on the
/// i.i.d. source given by a pure-state ensemble.
inline SchemeFidelities scheme_fidelities(const CompressionScheme &scheme, const Ensemble &ens,
                                          EvalPath path = EvalPath::Auto) {
    const std::size_t n = scheme.n();
    const TypicalProjector &proj = scheme.projector();
    if (ens.dim() != scheme.d()) {
        throw Error(ErrorKind::DimMismatch, "ensemble and scheme differ in dimension");
    }
    std::vector<Vector> members;
    for (const auto &s : ens.states) {
        members.push_back(pure_state_vector(s));
    }
    const double k = scheme.code_dim();
    const double members_pow = std::pow(static_cast<double>(members.size()), static_cast<double>(n));
    const double dim_pow = std::pow(static_cast<double>(scheme.d()), static_cast<double>(n));
    const bool dense_ok = dim_pow <= static_cast<double>(kDenseDimLimit) && members_pow <= 2e5;
    const bool single = proj.classes().size() == 1;
    if (path == EvalPath::Auto) {
        path = dense_ok ? EvalPath::Dense : EvalPath::Symbolic;
    }
    SchemeFidelities out;
    const Matrix rho = ens.average().matrix();

    if (path == EvalPath::Dense) {
        if (!dense_ok) {
            throw Error(ErrorKind::ScaleError, "block too large for dense evaluation");
        }
        Matrix b = proj.range_basis();
        std::vector<std::size_t> idx(n, 0);
        const auto total = static_cast<std::size_t>(std::llround(members_pow));
        for (std::size_t s = 0; s < total; ++s) {
            std::size_t r = s;
            double prob = 1;
            for (std::size_t p = n; p-- > 0;) {
                idx[p] = r % members.size();
                r /= members.size();
                prob *= ens.probs[idx[p]];
            }
            if (prob == 0) {
                continue;
            }
            Vector v = members[idx[0]];
            for (std::size_t p = 1; p < n; ++p) {
                v = tensor_product(v, members[idx[p]]);
            }
            const double t = (b.adjoint() * v).squaredNorm();
            auto [f, dist] = detail::pure_scheme_terms(t, k);
            out.f_bar += prob * f;
            out.d_bar += prob * dist;
        }
        std::vector<Matrix> rhos(n, rho);
        Matrix x = apply_product(rhos, b);
        const double m = (b.adjoint() * x).trace().real();
        const double off = x.squaredNorm() - (b.adjoint() * x).squaredNorm();
        out.f_e = m * m + std::max(0.0, off) / k;
    } else {
        if (!single) {
            throw Error(ErrorKind::ScaleError, "symbolic evaluation needs a single position class");
        }
        const Matrix &basis = proj.classes()[0].basis;
        // group ensemble members by their pinched weights
        std::vector<RealVector> group_w;
        std::vector<double> group_p;
        for (std::size_t i = 0; i < members.size(); ++i) {
            RealVector w = pinched_weights(members[i] * members[i].adjoint(), basis);
            bool found = false;
            for (std::size_t g = 0; g < group_w.size(); ++g) {
                if ((group_w[g] - w).cwiseAbs().maxCoeff() <= 1e-14) {
                    group_p[g] += ens.probs[i];
                    found = true;
                    break;
                }
            }
            if (!found) {
                group_w.push_back(w);
                group_p.push_back(ens.probs[i]);
            }
        }
        if (number_of_types(n, group_w.size()) > 5e4) {
            throw Error(ErrorKind::ScaleError, "too many ensemble types for symbolic evaluation");
        }
        // Members that are basis vectors turn every word into one basis sequence; a partial
        // type class then retains the fraction count/|T| of the equally likely words of its type.
        std::vector<std::size_t> hot;
        for (const auto &w : group_w) {
            Eigen::Index i = 0;
            if (std::abs(w.maxCoeff(&i) - 1.0) > 1e-12) {
                hot.clear();
                break;
            }
            hot.push_back(static_cast<std::size_t>(i));
        }
        const bool by_counting = proj.partial() && proj.partial()->count > 0 && hot.size() == group_w.size();
        for (const auto &gt : enumerate_types(n, group_w.size())) {
            double lp = log2_multinomial(gt);
            for (std::size_t g = 0; g < gt.size(); ++g) {
                if (gt[g] > 0) {
                    lp += group_p[g] > 0 ? static_cast<double>(gt[g]) * std::log2(group_p[g]) : -kInfinity;
                }
            }
            const double prob = std::exp2(lp);
            if (prob == 0) {
                continue;
            }
            if (by_counting) {
                Counts seq(scheme.d(), 0);
                for (std::size_t g = 0; g < gt.size(); ++g) {
                    seq[hot[g]] += gt[g];
                }
                double kept = proj.contains_type({seq}) ? 1.0 : 0.0;
                if (JointType{seq} == proj.partial()->type) {
                    kept = proj.partial()->count / std::exp2(log2_multinomial(seq));
                }
                const auto in = detail::pure_scheme_terms(1.0, k);
                const auto out_terms = detail::pure_scheme_terms(0.0, k);
                out.f_bar += prob * (kept * in.first + (1.0 - kept) * out_terms.first);
                out.d_bar += prob * (kept * in.second + (1.0 - kept) * out_terms.second);
                continue;
            }
            std::vector<RealVector> pw;
            for (std::size_t g = 0; g < gt.size(); ++g) {
                for (std::size_t c = 0; c < gt[g]; ++c) {
                    pw.push_back(group_w[g]);
                }
            }
            auto [f, dist] = detail::pure_scheme_terms(proj.mass(pw), k);
            out.f_bar += prob * f;
            out.d_bar += prob * dist;
        }
        if (!detail::diagonal_in_basis(rho, basis)) {
            throw Error(ErrorKind::ScaleError, "entanglement fidelity of a non-diagonal source needs the dense path");
        }
        const double m = proj.mass(rho);
        out.f_e = m * m;
        out.symbolic = true;
    }
    out.f_bar = std::clamp(out.f_bar, 0.0, 1.0);
    out.d_bar = std::clamp(out.d_bar, 0.0, 1.0);
    out.f_e = std::clamp(out.f_e, 0.0, 1.0);
    return out;
}

/// Entanglement fidelity for the i.i.d. source rho, which must be diagonal in the projector basis.
inline double scheme_entanglement_fidelity(const CompressionScheme &scheme, const Matrix &rho) {
    const TypicalProjector &proj = scheme.projector();
    if (proj.classes().size() != 1 || !detail::diagonal_in_basis(rho, proj.classes()[0].basis)) {
        throw Error(ErrorKind::ScaleError, "source is not diagonal in the projector basis");
    }
    const double m = proj.mass(rho);
    return m * m;
}

/// 1 - 4 N e^{-2 mu^2 alpha^2}.
inline double schumacher_fidelity_bound(const Matrix &rho, double alpha) {
    const double mu = variance_mu(rho);
    return 1.0 - 4.0 * static_cast<double>(variance_rank(rho)) * std::exp(-2.0 * mu * mu * alpha * alpha);
}

/// H(rho) + K d alpha / sqrt(n).
inline double schumacher_rate_bound(const Matrix &rho, std::size_t n, double alpha) {
    return von_neumann_entropy(rho) +
           kTypicalK * static_cast<double>(rho.rows()) * alpha / std::sqrt(static_cast<double>(n));
}

/// 1 - 2 (n+1)^d 2^{-n min_{H(nu) >= R} D(nu||rho)} for a source diagonal in the scheme basis.
inline double jhhh_fidelity_bound(const Matrix &rho, std::size_t n, double rate) {
    auto q = spectrum_as_distribution(rho);
    const double dmin = min_divergence_entropy_constrained(q, rate, EntropySide::AtLeast).value;
    const double nn = static_cast<double>(n);
    if (dmin == kInfinity) {
        return 1.0;
    }
    return 1.0 - 2.0 * std::exp2(static_cast<double>(rho.rows()) * std::log2(nn + 1.0) - nn * dmin);
}

/// log2 of the dimension lower bound for any block code of average fidelity at least
/// 1 - lambda; -inf when the prefactor is not positive.
inline double strong_converse_log2_dim_bound(const Matrix &rho, std::size_t n, double lambda, double alpha) {
    if (!(lambda > 0 && lambda < 1)) {
        throw Error(ErrorKind::DomainError, "lambda must lie in (0,1)");
    }
    if (alpha <= 0) {
        throw Error(ErrorKind::DomainError, "alpha must be positive");
    }
    const double mu = variance_mu(rho);
    const double pre = 1.0 - lambda - 4.0 * std::sqrt(static_cast<double>(variance_rank(rho))) * std::exp(-mu * mu * alpha * alpha);
    if (pre <= 0) {
        return -kInfinity;
    }
    const double nn = static_cast<double>(n);
    return std::log2(pre) + nn * von_neumann_entropy(rho) -
           kTypicalK * static_cast<double>(rho.rows()) * alpha * std::sqrt(nn);
}

inline double strong_converse_dim_bound(const Matrix &rho, std::size_t n, double lambda, double alpha) {
    const double l = strong_converse_log2_dim_bound(rho, n, lambda, alpha);
    return l == -kInfinity ? 0.0 : std::exp2(l);
}

/// Best bound over alpha on a grid of step 0.01 in (0, 20].
inline std::pair<double, double> strong_converse_best_log2_dim_bound(const Matrix &rho, std::size_t n, double lambda) {
    double best = -kInfinity;
    double best_alpha = 0.01;
    for (int i = 1; i <= 2000; ++i) {
        const double a = 0.01 * i;
        const double l = strong_converse_log2_dim_bound(rho, n, lambda, a);
        if (l > best) {
            best = l;
            best_alpha = a;
        }
    }
    return {best, best_alpha};
}

}  // namespace qshannon

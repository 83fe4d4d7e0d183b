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

#include <cmath>
#include <limits>

#include "qshannon/typicality.hpp"

namespace qshannon {

using Sequence = std::vector<std::size_t>;

/// Sequence of per-position cq channels with a common output dimension.
class BlockCqChannel {
   public:
    BlockCqChannel() = default;
    explicit BlockCqChannel(std::vector<CqChannel> per_position) : per_position_(std::move(per_position)) {
        if (per_position_.empty()) {
            throw Error(ErrorKind::BadShape, "block channel needs at least one position");
        }
        for (const auto &w : per_position_) {
            if (w.dim() != per_position_[0].dim()) {
                throw Error(ErrorKind::DimMismatch, "positions differ in output dimension");
            }
        }
    }

    static BlockCqChannel stationary(const CqChannel &w, std::size_t n) {
        return BlockCqChannel(std::vector<CqChannel>(n, w));
    }

    std::size_t n() const {
        return per_position_.size();
    }
    std::size_t dim() const {
        return per_position_.at(0).dim();
    }
    const CqChannel &at(std::size_t i) const {
        return per_position_.at(i);
    }

    std::size_t output_dim() const {
        const double dim = std::pow(static_cast<double>(dim_one()), static_cast<double>(n()));
        if (dim > static_cast<double>(kDenseDimLimit)) {
            throw Error(ErrorKind::InfeasibleScale, "block output dimension exceeds the dense limit");
        }
        return static_cast<std::size_t>(std::llround(dim));
    }

    std::vector<Matrix> output_factors(const Sequence &xn) const {
        if (xn.size() != n()) {
            throw Error(ErrorKind::SizeMismatch, "input sequence has the wrong length");
        }
        std::vector<Matrix> f;
        for (std::size_t i = 0; i < n(); ++i) {
            if (xn[i] >= per_position_[i].size()) {
                throw Error(ErrorKind::DomainError, "input letter outside the alphabet");
            }
            f.push_back(per_position_[i][xn[i]].matrix());
        }
        return f;
    }

   private:
    std::size_t dim_one() const {
        return per_position_.at(0).dim();
    }
    std::vector<CqChannel> per_position_;
};

/// Product state W_{x_1} (x) ... (x) W_{x_n}, with a vector shortcut when every factor is pure.
class ProductState {
   public:
    explicit ProductState(std::vector<Matrix> factors) : factors_(std::move(factors)) {
        bool all_pure = true;
        std::vector<Vector> vecs;
        for (const auto &f : factors_) {
            Spectrum s = eig_hermitian(f);
            if (s.values.size() > 1 && s.values(1) > kRankTol) {
                all_pure = false;
                break;
            }
            vecs.push_back(s.vectors.col(0));
        }
        if (all_pure) {
            Vector v = vecs[0];
            for (std::size_t i = 1; i < vecs.size(); ++i) {
                v = tensor_product(v, vecs[i]);
            }
            pure_ = v;
        }
    }

    const std::vector<Matrix> &factors() const {
        return factors_;
    }

    /// Tr(F^dagger rho F).
    double expectation(const Matrix &f) const {
        if (f.cols() == 0) {
            return 0.0;
        }
        if (pure_) {
            return (pure_->adjoint() * f).squaredNorm();
        }
        return f.conjugate().cwiseProduct(apply_product(factors_, f)).sum().real();
    }

    /// Tr(rho B), contracting one tensor factor at a time.
    double trace_against(const Matrix &b) const {
        if (pure_) {
            return (pure_->adjoint() * b * (*pure_))(0, 0).real();
        }
        Matrix cur;
        const Matrix *src = &b;
        for (const auto &f : factors_) {
            const Eigen::Index d = f.rows();
            const Eigen::Index r = src->rows() / d;
            Matrix next = Matrix::Zero(r, r);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    if (f(i, j) != cdouble(0.0)) {
                        next.noalias() += f(i, j) * src->block(j * r, i * r, r, r);
                    }
                }
            }
            cur.swap(next);
            src = &cur;
        }
        return (*src)(0, 0).real();
    }

    Matrix dense() const {
        if (pure_) {
            return (*pure_) * pure_->adjoint();
        }
        Matrix m = factors_[0];
        for (std::size_t i = 1; i < factors_.size(); ++i) {
            m = tensor_product(m, factors_[i]);
        }
        return m;
    }

   private:
    std::vector<Matrix> factors_;
    std::optional<Vector> pure_;
};

/// Block code with decoder elements D_m = F_m F_m^dagger.
struct BlockCode {
    std::vector<Sequence> codebook;
    std::vector<Matrix> decoder_factors;
    std::size_t n = 0;
    std::size_t output_dim = 0;
    bool projector_decoders = false;

    // Construction record.
    double lambda = 0;
    double eta = 0;
    double delta = 0;
    std::vector<double> projector_traces;  // trace of the typical projector behind each D_m
    std::size_t candidates = 0;
    std::size_t failed_extensions = 0;
    double certificate_min = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const {
        return codebook.size();
    }
    double log2_size() const {
        return size() == 0 ? -kInfinity : std::log2(static_cast<double>(size()));
    }
    double rate() const {
        return size() == 0 ? 0.0 : log2_size() / static_cast<double>(n);
    }
    HermitianMatrix decoder_element(std::size_t m) const {
        return decoder_factors.at(m) * decoder_factors.at(m).adjoint();
    }
    double decoder_trace(std::size_t m) const {
        return decoder_factors.at(m).squaredNorm();
    }
    SubPovm sub_povm() const {
        std::vector<HermitianMatrix> e;
        for (std::size_t m = 0; m < size(); ++m) {
            e.push_back(decoder_element(m));
        }
        return SubPovm(std::move(e));
    }
};

enum class ErrorMode { Max, Average };

/// 1 - Tr(W_{f(m)} D_m) for every message.
inline std::vector<double> message_errors(const BlockCode &code, const BlockCqChannel &ch) {
    if (ch.n() != code.n) {
        throw Error(ErrorKind::DimMismatch, "code and channel differ in block length");
    }
    if (ch.output_dim() != code.output_dim) {
        throw Error(ErrorKind::DimMismatch, "code and channel differ in output dimension");
    }
    std::vector<double> e;
    for (std::size_t m = 0; m < code.size(); ++m) {
        ProductState rho(ch.output_factors(code.codebook[m]));
        e.push_back(std::clamp(1.0 - rho.expectation(code.decoder_factors[m]), 0.0, 1.0));
    }
    return e;
}

inline double error_probability(const BlockCode &code, const BlockCqChannel &ch, ErrorMode mode) {
    auto e = message_errors(code, ch);
    if (e.empty()) {
        return 0.0;
    }
    if (mode == ErrorMode::Max) {
        return *std::max_element(e.begin(), e.end());
    }
    return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

namespace detail {

// Accumulated decoder mass B = G G^dagger with cached eigendecomposition B = V diag(l) V^dagger.
class DecoderMass {
   public:
    explicit DecoderMass(Eigen::Index dim, bool projector) : dim_(dim), projector_(projector) {
        g_ = Matrix::Zero(dim, 0);
        v_ = Matrix::Zero(dim, 0);
    }

    const Matrix &factor() const {
        return g_;
    }

    void add(const Matrix &f) {
        Matrix next(dim_, g_.cols() + f.cols());
        next << g_, f;
        g_.swap(next);
        if (dim_ <= kDenseMassLimit) {
            if (dense_.size() == 0) {
                dense_ = Matrix::Zero(dim_, dim_);
            }
            dense_.noalias() += f * f.adjoint();
        }
        stale_ = true;
    }

    /// Tr(rho B).
    double expectation(const ProductState &rho) const {
        if (g_.cols() == 0) {
            return 0.0;
        }
        if (dense_.size() == 0 || g_.cols() * static_cast<Eigen::Index>(rho.factors().size()) < dim_) {
            return rho.expectation(g_);
        }
        return rho.trace_against(dense_);
    }

    /// sqrt(1 - B) applied to the columns of q.
    Matrix apply_sqrt_complement(const Matrix &q) {
        if (stale_) {
            refresh();
            stale_ = false;
        }
        if (v_.cols() == 0) {
            return q;
        }
        Matrix coeff = v_.adjoint() * q;
        for (Eigen::Index k = 0; k < coeff.rows(); ++k) {
            const double l = std::clamp(l_(k), 0.0, 1.0);
            coeff.row(k) *= (1.0 - std::sqrt(1.0 - l));
        }
        return q - v_ * coeff;
    }

   private:
    void refresh() {
        if (projector_) {
            // B is a projector whose range is spanned by the factor
            v_ = g_.cols() == 0 ? Matrix::Zero(dim_, 0) : column_span_basis(g_);
            l_ = RealVector::Ones(v_.cols());
            return;
        }
        if (g_.cols() <= dim_) {
            Spectrum s = eig_hermitian(g_.adjoint() * g_);
            std::vector<Eigen::Index> keep;
            for (Eigen::Index k = 0; k < s.values.size(); ++k) {
                if (s.values(k) > 1e-13) {
                    keep.push_back(k);
                }
            }
            v_.resize(dim_, static_cast<Eigen::Index>(keep.size()));
            l_.resize(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i) {
                const auto k = keep[i];
                const auto ii = static_cast<Eigen::Index>(i);
                v_.col(ii) = g_ * s.vectors.col(k) / std::sqrt(s.values(k));
                l_(ii) = s.values(k);
            }
        } else {
            Spectrum s = eig_hermitian(g_ * g_.adjoint());
            v_ = s.vectors;
            l_ = s.values;
        }
    }

    static constexpr Eigen::Index kDenseMassLimit = 2048;

    Eigen::Index dim_;
    Matrix dense_;
    bool stale_ = false;
    bool projector_;
    Matrix g_;
    Matrix v_;
    RealVector l_;
};

}  // namespace detail

/// Single greedy pass over the candidates in the given order. A candidate x^n with
/// Tr(W_{x^n} B) < eta is added with decoder sqrt(1-B) Pi(x^n) sqrt(1-B), or with the support
/// projector of that operator when projector_decoders is set.
inline BlockCode greedy_pass(const BlockCqChannel &ch, const std::vector<Sequence> &candidates,
                             const std::function<TypicalProjector(const Sequence &)> &decoder_projector, double lambda,
                             double eta, bool projector_decoders) {
    if (!(lambda > 0 && lambda < 1)) {
        throw Error(ErrorKind::DomainError, "lambda must lie in (0,1)");
    }
    BlockCode code;
    code.n = ch.n();
    code.output_dim = ch.output_dim();
    code.projector_decoders = projector_decoders;
    code.lambda = lambda;
    code.eta = eta;
    code.candidates = candidates.size();
    const auto dim = static_cast<Eigen::Index>(code.output_dim);
    detail::DecoderMass mass(dim, projector_decoders);
    for (const auto &xn : candidates) {
        ProductState rho(ch.output_factors(xn));
        if (mass.expectation(rho) >= eta) {
            continue;
        }
        TypicalProjector pi = decoder_projector(xn);
        Matrix q = pi.range_basis();
        Matrix f = mass.apply_sqrt_complement(q);
        if (projector_decoders) {
            f = f.cols() == 0 ? f : column_span_basis(f);
        }
        if (rho.expectation(f) < 1.0 - lambda) {
            ++code.failed_extensions;
            continue;
        }
        code.codebook.push_back(xn);
        code.decoder_factors.push_back(f);
        code.projector_traces.push_back(pi.trace());
        mass.add(f);
    }
    double cert = kInfinity;
    for (const auto &xn : candidates) {
        ProductState rho(ch.output_factors(xn));
        cert = std::min(cert, mass.expectation(rho));
    }
    code.certificate_min = candidates.empty() ? kInfinity : cert;
    const double worst = error_probability(code, ch, ErrorMode::Max);
    if (worst > lambda + 1e-9) {
        throw Error(ErrorKind::LambdaViolated, "constructed code exceeds its error level");
    }
    return code;
}

/// All input sequences with positive probability under the per-position distributions,
/// in lexicographic order.
inline std::vector<Sequence> supported_sequences(const std::vector<Distribution> &p) {
    double count = 1;
    std::vector<std::vector<std::size_t>> support(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t x = 0; x < p[i].size(); ++x) {
            if (p[i][x] > 0) {
                support[i].push_back(x);
            }
        }
        count *= static_cast<double>(support[i].size());
    }
    if (count > 2e5) {
        throw Error(ErrorKind::InfeasibleScale, "too many candidate sequences");
    }
    std::vector<Sequence> out;
    if (count == 0) {
        return out;
    }
    std::vector<std::size_t> idx(p.size(), 0);
    while (true) {
        Sequence s(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            s[i] = support[i][idx[i]];
        }
        out.push_back(s);
        std::size_t k = p.size();
        while (k > 0) {
            --k;
            if (++idx[k] < support[k].size()) {
                break;
            }
            idx[k] = 0;
            if (k == 0) {
                return out;
            }
        }
        if (p.empty()) {
            return out;
        }
    }
}

/// Sequences of the given type, in lexicographic order.
inline std::vector<Sequence> type_class_sequences(const Counts &type) {
    Sequence s;
    for (std::size_t x = 0; x < type.size(); ++x) {
        s.insert(s.end(), type[x], x);
    }
    if (std::exp2(log2_multinomial(type)) > 2e5) {
        throw Error(ErrorKind::InfeasibleScale, "type class too large to enumerate");
    }
    std::vector<Sequence> out;
    do {
        out.push_back(s);
    } while (std::next_permutation(s.begin(), s.end()));
    return out;
}

inline double sequence_probability(const Sequence &xn, const std::vector<Distribution> &p) {
    double r = 1;
    for (std::size_t i = 0; i < xn.size(); ++i) {
        r *= p.at(i).at(xn[i]);
    }
    return r;
}

/// min{1 - lambda, lambda^2/32}.
inline double greedy_eta(double lambda) {
    return std::min(1.0 - lambda, lambda * lambda / 32.0);
}

struct GreedyOptions {
    bool projector_decoders = false;
    /// Restrict candidates to |H(W_{x^n}) - sum_i H(W_i|P_i)| <= delta sqrt(n).
    bool entropy_window = true;
};

/// Entropy constant of the greedy decoders: max{sqrt(2 K_d / lambda), sqrt(2/tau) log d}.
inline double greedy_delta(double lambda, double tau, std::size_t d) {
    return std::max(std::sqrt(2.0 * entropy_typical_variance_constant(d) / lambda),
                    std::sqrt(2.0 / tau) * std::log2(static_cast<double>(d)));
}

inline BlockCode greedy_maximal_code(const BlockCqChannel &ch, const std::vector<Distribution> &p,
                                     std::vector<Sequence> candidates, double lambda, GreedyOptions opt = {}) {
    if (p.size() != ch.n()) {
        throw Error(ErrorKind::SizeMismatch, "need one input distribution per position");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        require_distribution(p[i], ch.at(i).size());
    }
    ch.output_dim();
    double tau = 0;
    for (const auto &xn : candidates) {
        const double w = sequence_probability(xn, p);
        if (w <= 0) {
            throw Error(ErrorKind::DomainError, "candidate sequence has zero probability");
        }
        tau += w;
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const std::size_t n = ch.n();
    const double delta = tau > 0 ? greedy_delta(lambda, std::min(1.0, tau), ch.dim()) : 0.0;
    if (opt.entropy_window) {
        double h_cond = 0;
        for (std::size_t i = 0; i < n; ++i) {
            h_cond += conditional_output_entropy(p[i], ch.at(i));
        }
        const double window = delta * std::sqrt(static_cast<double>(n));
        std::vector<Sequence> kept;
        for (const auto &xn : candidates) {
            double h = 0;
            for (std::size_t i = 0; i < n; ++i) {
                h += von_neumann_entropy(ch.at(i)[xn[i]]);
            }
            if (std::abs(h - h_cond) <= window + 1e-9) {
                kept.push_back(xn);
            }
        }
        candidates.swap(kept);
    }
    auto decoder = [&](const Sequence &xn) { return entropy_typical_projector(ch.output_factors(xn), delta); };
    BlockCode code = greedy_pass(ch, candidates, decoder, lambda, greedy_eta(lambda), opt.projector_decoders);
    code.delta = delta;
    return code;
}

inline BlockCode greedy_maximal_code(const BlockCqChannel &ch, const std::vector<Distribution> &p, double lambda,
                                     GreedyOptions opt = {}) {
    return greedy_maximal_code(ch, p, supported_sequences(p), lambda, opt);
}

/// Codewords from the type class of P, decoders from the conditional variance-typical
/// projector with delta = sqrt(2 a d / lambda).
inline BlockCode constant_composition_code(const CqChannel &w, const TypeVector &type, double lambda,
                                           bool projector_decoders = false) {
    if (type.alphabet_size() != w.size()) {
        throw Error(ErrorKind::SizeMismatch, "type and channel alphabets differ");
    }
    const std::size_t n = type.n();
    BlockCqChannel ch = BlockCqChannel::stationary(w, n);
    const double a = static_cast<double>(w.size());
    const double d = static_cast<double>(w.dim());
    const double delta = std::sqrt(2.0 * a * d / lambda);
    auto decoder = [&](const Sequence &xn) { return conditional_variance_typical_projector(w, xn, delta); };
    BlockCode code = greedy_pass(ch, type_class_sequences(type.counts), decoder, lambda, greedy_eta(lambda), projector_decoders);
    code.delta = delta;
    return code;
}

/// log2 of nH(W|P) + (K d sqrt(a) delta + K a sqrt(2a) log d) sqrt(n).
inline double cc_decoder_log2_trace_bound(const CqChannel &w, const TypeVector &type, double lambda) {
    const double a = static_cast<double>(w.size());
    const double d = static_cast<double>(w.dim());
    const double n = static_cast<double>(type.n());
    const double delta = std::sqrt(2.0 * a * d / lambda);
    return n * conditional_output_entropy(type.distribution(), w) +
           (kTypicalK * d * std::sqrt(a) * delta + kTypicalK * a * std::sqrt(2.0 * a) * std::log2(d)) * std::sqrt(n);
}

/// Upper bound on log2 |M| for constant composition (n, lambda)-codes of type P:
/// n I(P;W) + (K d sqrt(a) delta + K d delta) sqrt(n) + log2(4/(1-lambda)), delta = sqrt(32 a d)/(1-lambda).
inline double converse_rate_bound(const CqChannel &w, const TypeVector &type, double lambda) {
    if (!(lambda > 0 && lambda < 1)) {
        throw Error(ErrorKind::DomainError, "lambda must lie in (0,1)");
    }
    const double a = static_cast<double>(w.size());
    const double d = static_cast<double>(w.dim());
    const double n = static_cast<double>(type.n());
    const double delta = std::sqrt(32.0 * a * d) / (1.0 - lambda);
    return n * holevo_information(type.distribution(), w) +
           (kTypicalK * d * std::sqrt(a) * delta + kTypicalK * d * delta) * std::sqrt(n) + std::log2(4.0 / (1.0 - lambda));
}

struct ProjectedDecoderAudit {
    double delta = 0;
    double max_error = 0;         // of the projected code; at most (1+lambda)/2
    double min_trace = 0;         // smallest Tr D'_m
    double total_trace = 0;       // sum of Tr D'_m, at most Tr Pi
    double projector_trace = 0;   // Tr Pi_{V,PW,delta}
};

/// Replaces every decoder element by Pi D_m Pi with Pi the variance-typical projector of PW.
inline ProjectedDecoderAudit projected_decoder_audit(const BlockCode &code, const CqChannel &w, const TypeVector &type,
                                                     double lambda) {
    const double a = static_cast<double>(w.size());
    const double d = static_cast<double>(w.dim());
    ProjectedDecoderAudit r;
    r.delta = std::sqrt(32.0 * a * d) / (1.0 - lambda);
    TypicalProjector pi = variance_typical_projector(output_average(type.distribution(), w), type.n(), r.delta);
    Matrix q = pi.range_basis();
    r.projector_trace = static_cast<double>(q.cols());
    BlockCqChannel ch = BlockCqChannel::stationary(w, type.n());
    r.min_trace = kInfinity;
    for (std::size_t m = 0; m < code.size(); ++m) {
        Matrix f = q * (q.adjoint() * code.decoder_factors[m]);
        ProductState rho(ch.output_factors(code.codebook[m]));
        r.max_error = std::max(r.max_error, 1.0 - rho.expectation(f));
        const double t = f.squaredNorm();
        r.min_trace = std::min(r.min_trace, t);
        r.total_trace += t;
    }
    return r;
}

/// Disjoint codebooks from repeated greedy codes on the remainder of the
/// variance-typical set T_{V,P,alpha}, alpha = sqrt(2a/eta), until its mass is below eta/2.
struct CodePartition {
    std::vector<BlockCode> codes;
    double alpha = 0;
    double typical_mass = 0;
    double uncovered_mass = 0;  // P^n mass outside all codebooks
};

inline CodePartition code_partition(const CqChannel &w, const Distribution &p, std::size_t n, double lambda, double eta,
                                    bool projector_decoders = false) {
    if (!(eta > 0 && eta <= 1)) {
        throw Error(ErrorKind::DomainError, "eta must lie in (0,1]");
    }
    require_distribution(p, w.size());
    CodePartition out;
    const double a = static_cast<double>(w.size());
    out.alpha = std::sqrt(2.0 * a / eta);
    SequenceSet typical = variance_typical_set(p, n, out.alpha);
    out.typical_mass = typical.mass();
    std::vector<Distribution> pn(n, p);
    std::vector<Sequence> remaining;
    for (const auto &xn : supported_sequences(pn)) {
        if (typical.contains(xn)) {
            remaining.push_back(xn);
        }
    }
    BlockCqChannel ch = BlockCqChannel::stationary(w, n);
    auto mass_of = [&](const std::vector<Sequence> &s) {
        double m = 0;
        for (const auto &xn : s) {
            m += sequence_probability(xn, pn);
        }
        return m;
    };
    GreedyOptions opt;
    opt.projector_decoders = projector_decoders;
    opt.entropy_window = false;
    while (!remaining.empty() && mass_of(remaining) >= eta / 2.0) {
        BlockCode c = greedy_maximal_code(ch, pn, remaining, lambda, opt);
        if (c.size() == 0) {
            break;
        }
        std::set<Sequence> used(c.codebook.begin(), c.codebook.end());
        std::vector<Sequence> rest;
        for (const auto &xn : remaining) {
            if (!used.count(xn)) {
                rest.push_back(xn);
            }
        }
        remaining.swap(rest);
        out.codes.push_back(std::move(c));
    }
    double covered = 0;
    for (const auto &c : out.codes) {
        covered += mass_of(c.codebook);
    }
    out.uncovered_mass = std::max(0.0, 1.0 - covered);
    return out;
}

/// Classical source X with quantum side information: for each x a list of (probability, state).
struct CqSource {
    std::vector<std::vector<double>> probs;
    std::vector<std::vector<DensityOperator>> states;

    std::size_t alphabet() const {
        return probs.size();
    }
    Distribution marginal() const {
        Distribution p;
        for (const auto &row : probs) {
            p.push_back(std::accumulate(row.begin(), row.end(), 0.0));
        }
        return p;
    }
    /// W_x = sum_pi P(x, pi) pi / P_X(x); letters of zero mass map to the maximally mixed state.
    CqChannel conditional_channel() const {
        std::vector<DensityOperator> out;
        const std::size_t d = states.at(0).at(0).dim();
        for (std::size_t x = 0; x < probs.size(); ++x) {
            const double px = std::accumulate(probs[x].begin(), probs[x].end(), 0.0);
            if (px <= 0) {
                out.push_back(DensityOperator::maximally_mixed(d));
                continue;
            }
            Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            for (std::size_t k = 0; k < probs[x].size(); ++k) {
                m += probs[x][k] * states[x][k].matrix();
            }
            out.push_back(DensityOperator::trusted(m / px));
        }
        return CqChannel(std::move(out));
    }
    /// H(X|Y) of the joint state sum_x P_X(x) [x] (x) W_x.
    double conditional_entropy_x_given_y() const {
        return shannon_entropy(marginal()) - holevo_information(marginal(), conditional_channel());
    }
};

struct RateSlicingScheme {
    CodePartition partition;
    std::map<Sequence, std::pair<std::size_t, std::size_t>> index;  // x^n -> (code, message)
    std::size_t messages = 0;                                        // codes plus the don't-know symbol
    double average_error = 0;
    double distortion = -1;  // trace-norm distortion of the modified decoder, when evaluated
    double distortion_bound = 0;

    double rate() const {
        return std::log2(static_cast<double>(messages)) / static_cast<double>(partition.codes.empty() ? 1 : partition.codes[0].n);
    }
    std::size_t encode(const Sequence &xn) const {
        auto it = index.find(xn);
        return it == index.end() ? partition.codes.size() : it->second.first;
    }
};

/// Compressor x^n -> index of the codebook containing x^n (or a don't-know symbol) and
/// decoders from the code partition of the channel x -> W_x with lambda = eta = lambda_bar / 2.
inline RateSlicingScheme rate_slicing_scheme(const CqSource &src, std::size_t n, double lambda_bar,
                                             bool evaluate_distortion = true) {
    if (!(lambda_bar > 0 && lambda_bar < 1)) {
        throw Error(ErrorKind::DomainError, "lambda must lie in (0,1)");
    }
    RateSlicingScheme s;
    const Distribution px = src.marginal();
    CqChannel w = src.conditional_channel();
    s.partition = code_partition(w, px, n, lambda_bar / 2.0, lambda_bar / 2.0);
    for (std::size_t c = 0; c < s.partition.codes.size(); ++c) {
        for (std::size_t m = 0; m < s.partition.codes[c].size(); ++m) {
            s.index[s.partition.codes[c].codebook[m]] = {c, m};
        }
    }
    s.messages = s.partition.codes.size() + 1;
    std::vector<Distribution> pn(n, px);
    BlockCqChannel ch = BlockCqChannel::stationary(w, n);
    double err = s.partition.uncovered_mass;
    for (const auto &code : s.partition.codes) {
        auto e = message_errors(code, ch);
        for (std::size_t m = 0; m < code.size(); ++m) {
            err += sequence_probability(code.codebook[m], pn) * e[m];
        }
    }
    s.average_error = std::clamp(err, 0.0, 1.0);
    s.distortion_bound = std::sqrt(8.0 * lambda_bar) + lambda_bar;
    if (!evaluate_distortion) {
        return s;
    }
    // enumerate joint sequences of (x, pi) pairs
    std::vector<std::pair<std::size_t, std::size_t>> outcomes;
    for (std::size_t x = 0; x < src.alphabet(); ++x) {
        for (std::size_t k = 0; k < src.probs[x].size(); ++k) {
            if (src.probs[x][k] > 0) {
                outcomes.emplace_back(x, k);
            }
        }
    }
    const double total = std::pow(static_cast<double>(outcomes.size()), static_cast<double>(n));
    if (total > 2e4) {
        throw Error(ErrorKind::InfeasibleScale, "too many joint sequences for the distortion evaluation");
    }
    std::vector<std::vector<HermitianMatrix>> roots(s.partition.codes.size());
    for (std::size_t c = 0; c < s.partition.codes.size(); ++c) {
        for (std::size_t m = 0; m < s.partition.codes[c].size(); ++m) {
            roots[c].push_back(matrix_sqrt(s.partition.codes[c].decoder_element(m)));
        }
    }
    const auto count = static_cast<std::size_t>(std::llround(total));
    double dist = 0;
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t r = idx;
        Sequence xn(n);
        double prob = 1;
        std::vector<Matrix> factors(n);
        for (std::size_t p = n; p-- > 0;) {
            const auto &o = outcomes[r % outcomes.size()];
            r /= outcomes.size();
            xn[p] = o.first;
            prob *= src.probs[o.first][o.second];
            factors[p] = src.states[o.first][o.second].matrix();
        }
        auto it = s.index.find(xn);
        if (it == s.index.end()) {
            dist += prob * 2.0;
            continue;
        }
        Matrix rho = factors[0];
        for (std::size_t p = 1; p < n; ++p) {
            rho = tensor_product(rho, factors[p]);
        }
        const auto [c, m] = it->second;
        double norm = trace_norm(rho - roots[c][m] * rho * roots[c][m]);
        double used = 0;
        for (std::size_t k = 0; k < roots[c].size(); ++k) {
            const double t = std::max(0.0, trace_of_product(rho, s.partition.codes[c].decoder_element(k)).real());
            used += t;
            if (k != m) {
                norm += t;
            }
        }
        norm += std::max(0.0, 1.0 - used);
        dist += prob * norm;
    }
    s.distortion = dist;
    return s;
}

/// Tr(rho S) log(Tr(rho S)/Tr(sigma S)) + Tr(rho D) log(Tr(rho D)/Tr(sigma D)) with D = 1 - S.
inline double two_outcome_divergence_bound(const Matrix &rho, const Matrix &sigma, const HermitianMatrix &s) {
    require_hermitian(s, "operator");
    RealVector ev = eigenvalues_hermitian(s);
    if (ev.minCoeff() < -kTol || ev.maxCoeff() > 1.0 + kTol) {
        throw Error(ErrorKind::OperatorOutOfRange, "operator must satisfy 0 <= S <= 1");
    }
    const double a = std::clamp(trace_of_product(rho, s).real(), 0.0, 1.0);
    const double b = std::clamp(trace_of_product(sigma, s).real(), 0.0, 1.0);
    return kl_divergence({a, 1.0 - a}, {b, 1.0 - b});
}

// Reliability exponents.

namespace detail {

inline std::vector<std::vector<double>> letter_spectra(const CqChannel &w) {
    std::vector<std::vector<double>> q;
    for (const auto &wx : w.outputs()) {
        q.push_back(spectrum_as_distribution(wx.matrix()));
    }
    return q;
}

}  // namespace detail

/// inf{D(V||W|P) : H(V|P) > L}; the minimizer tilts every W_x in its eigenbasis by a common power.
inline double exponent_individual(const CqChannel &w, const Distribution &p, double level) {
    require_distribution(p, w.size());
    auto q = detail::letter_spectra(w);
    double hmin = 0;
    double hmax = 0;
    for (std::size_t x = 0; x < q.size(); ++x) {
        if (p[x] <= 0) {
            continue;
        }
        hmin += p[x] * shannon_entropy(q[x]);
        std::size_t supp = 0;
        for (double v : q[x]) {
            supp += v > 0 ? 1 : 0;
        }
        hmax += p[x] * std::log2(static_cast<double>(supp));
    }
    if (level < hmin) {
        return 0.0;
    }
    if (level >= hmax - 1e-12) {
        return kInfinity;
    }
    auto cond_entropy = [&](double beta) {
        double h = 0;
        for (std::size_t x = 0; x < q.size(); ++x) {
            if (p[x] > 0) {
                h += p[x] * shannon_entropy(detail::tilted(q[x], beta));
            }
        }
        return h;
    };
    const double beta = detail::bisect_decreasing(cond_entropy, 0.0, 1.0, level);
    double dv = 0;
    for (std::size_t x = 0; x < q.size(); ++x) {
        if (p[x] > 0) {
            dv += p[x] * kl_divergence(detail::tilted(q[x], beta), q[x]);
        }
    }
    return dv;
}

/// min{D(rho||PW) : H(rho) <= L'}.
inline double exponent_collective(const CqChannel &w, const Distribution &p, double level) {
    require_distribution(p, w.size());
    return min_divergence_entropy_constrained(spectrum_as_distribution(output_average(p, w)), level, EntropySide::AtMost).value;
}

/// max over L of min{mu_i(L), mu_c(L+R)/2}. Taking L' = L + R loses nothing since mu_c is
/// nonincreasing, and the objective's two terms move in opposite directions in L.
inline double greedy_exponent(const CqChannel &w, const Distribution &p, double rate) {
    require_distribution(p, w.size());
    const double hcond = conditional_output_entropy(p, w);
    const double hout = von_neumann_entropy(output_average(p, w));
    if (rate >= hout - hcond) {
        return 0.0;
    }
    auto g = [&](double l) { return std::min(exponent_individual(w, p, l), 0.5 * exponent_collective(w, p, l + rate)); };
    double lo = hcond;
    double hi = hout - rate;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (exponent_individual(w, p, mid) < 0.5 * exponent_collective(w, p, mid + rate)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::max(g(lo), g(hi));
}

struct SpherePacking {
    double value = 0;      // E_sp(R, P) estimate
    double divergence = 0; // D(V||W|P) of the reported V
    double information = 0;// I(P;V) of the reported V
    bool upper_estimate = false;
};

namespace detail {

// Classical channel matrix rows w[x] over a common output alphabet.
inline SpherePacking classical_sphere_packing(const std::vector<std::vector<double>> &w, const Distribution &p, double rate) {
    SpherePacking r;
    const std::size_t a = w.size();
    const std::size_t b = w.at(0).size();
    auto mutual = [&](const std::vector<std::vector<double>> &v) {
        std::vector<double> q(b, 0.0);
        for (std::size_t x = 0; x < a; ++x) {
            for (std::size_t y = 0; y < b; ++y) {
                q[y] += p[x] * v[x][y];
            }
        }
        double i = 0;
        for (std::size_t x = 0; x < a; ++x) {
            if (p[x] > 0) {
                i += p[x] * kl_divergence(v[x], q);
            }
        }
        return i;
    };
    auto divergence = [&](const std::vector<std::vector<double>> &v) {
        double dv = 0;
        for (std::size_t x = 0; x < a; ++x) {
            if (p[x] > 0) {
                dv += p[x] * kl_divergence(v[x], w[x]);
            }
        }
        return dv;
    };
    const double iw = mutual(w);
    if (rate >= iw) {
        r.information = iw;
        return r;
    }
    // V_x ~ W_x^{1/(1+s)} Q^{s/(1+s)}, Q = PV, alternating until stationary.
    std::vector<double> qprev;
    auto solve = [&](double s, std::vector<double> &q) {
        std::vector<std::vector<double>> v(a, std::vector<double>(b, 0.0));
        for (int it = 0; it < 20000; ++it) {
            for (std::size_t x = 0; x < a; ++x) {
                double total = 0;
                for (std::size_t y = 0; y < b; ++y) {
                    const double val = (w[x][y] > 0 && q[y] > 0) ? std::exp2((std::log2(w[x][y]) + s * std::log2(q[y])) / (1.0 + s)) : 0.0;
                    v[x][y] = val;
                    total += val;
                }
                if (total > 0) {
                    for (auto &y : v[x]) {
                        y /= total;
                    }
                }
            }
            std::vector<double> qn(b, 0.0);
            for (std::size_t x = 0; x < a; ++x) {
                for (std::size_t y = 0; y < b; ++y) {
                    qn[y] += p[x] * v[x][y];
                }
            }
            double change = 0;
            for (std::size_t y = 0; y < b; ++y) {
                change = std::max(change, std::abs(qn[y] - q[y]));
            }
            q = qn;
            if (change < 1e-15) {
                break;
            }
        }
        return v;
    };
    // zero rate: V_x = Q for all x with Q ~ prod_x W_x^{P(x)}
    std::vector<double> q0(b, 0.0);
    double z = 0;
    for (std::size_t y = 0; y < b; ++y) {
        double lg = 0;
        bool ok = true;
        for (std::size_t x = 0; x < a; ++x) {
            if (p[x] > 0) {
                if (w[x][y] <= 0) {
                    ok = false;
                    break;
                }
                lg += p[x] * std::log2(w[x][y]);
            }
        }
        q0[y] = ok ? std::exp2(lg) : 0.0;
        z += q0[y];
    }
    const double e0 = z > 0 ? -std::log2(z) : kInfinity;
    if (rate <= 1e-12) {
        r.value = e0;
        r.divergence = e0;
        return r;
    }
    std::vector<double> q(b, 0.0);
    for (std::size_t x = 0; x < a; ++x) {
        for (std::size_t y = 0; y < b; ++y) {
            q[y] += p[x] * w[x][y];
        }
    }
    auto info_at = [&](double s, std::vector<std::vector<double>> &v) {
        std::vector<double> qq = q;
        v = solve(s, qq);
        return mutual(v);
    };
    std::vector<std::vector<double>> v;
    double lo = 0;
    double hi = 1;
    while (info_at(hi, v) > rate && hi < 1e8) {
        lo = hi;
        hi *= 2;
    }
    if (info_at(hi, v) > rate) {
        r.value = e0;
        r.divergence = e0;
        return r;
    }
    for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (info_at(mid, v) > rate) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    info_at(hi, v);
    r.divergence = divergence(v);
    r.information = mutual(v);
    r.value = r.divergence;
    return r;
}

// Common eigenbasis when all outputs commute, else nullopt.
inline std::optional<Matrix> common_eigenbasis(const CqChannel &w) {
    const auto d = static_cast<Eigen::Index>(w.dim());
    Matrix mix = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < w.size(); ++x) {
        for (std::size_t y = x + 1; y < w.size(); ++y) {
            Matrix c = w[x].matrix() * w[y].matrix() - w[y].matrix() * w[x].matrix();
            if (c.cwiseAbs().maxCoeff() > 1e-9) {
                return std::nullopt;
            }
        }
        mix += (1.0 + 0.7390851332151607 * static_cast<double>(x) + 0.1 * static_cast<double>(x * x)) * w[x].matrix();
    }
    Matrix basis = eig_hermitian(mix).vectors;
    for (std::size_t x = 0; x < w.size(); ++x) {
        Matrix m = basis.adjoint() * w[x].matrix() * basis;
        m.diagonal().setZero();
        if (m.cwiseAbs().maxCoeff() > 1e-9) {
            return std::nullopt;
        }
    }
    return basis;
}

}  // namespace detail

/// min{D(V||W|P) : I(P;V) <= R}. Exact by classical reduction when the W_x commute; otherwise
/// searched over V_x = (1-t) W_x + t sigma_x for a fixed list of sigma choices and flagged as
/// an upper estimate.
inline SpherePacking sphere_packing_exponent(const CqChannel &w, const Distribution &p, double rate) {
    require_distribution(p, w.size());
    const double iw = holevo_information(p, w);
    if (rate >= iw) {
        SpherePacking r;
        r.information = iw;
        return r;
    }
    if (auto basis = detail::common_eigenbasis(w)) {
        std::vector<std::vector<double>> rows;
        for (std::size_t x = 0; x < w.size(); ++x) {
            RealVector diag = pinched_weights(w[x].matrix(), *basis);
            rows.emplace_back(diag.data(), diag.data() + diag.size());
        }
        return detail::classical_sphere_packing(rows, p, rate);
    }
    SpherePacking best;
    best.value = kInfinity;
    best.upper_estimate = true;
    bool all_pure = true;
    for (const auto &wx : w.outputs()) {
        RealVector ev = eigenvalues_hermitian(wx.matrix());
        all_pure = all_pure && (ev.size() < 2 || ev(1) <= kRankTol);
    }
    if (all_pure) {
        // every V != W has infinite divergence
        best.upper_estimate = false;
        return best;
    }
    const auto d = static_cast<Eigen::Index>(w.dim());
    std::vector<std::vector<Matrix>> families;
    auto common = [&](const Matrix &sigma) { return std::vector<Matrix>(w.size(), sigma); };
    families.push_back(common(output_average(p, w)));
    families.push_back(common(Matrix::Identity(d, d) / static_cast<double>(d)));
    for (std::size_t x = 0; x < w.size(); ++x) {
        families.push_back(common(w[x].matrix()));
    }
    {
        std::vector<Matrix> own;
        for (const auto &wx : w.outputs()) {
            Matrix s = support_projector(wx.matrix());
            own.push_back(s / s.trace().real());
        }
        families.push_back(own);
    }
    for (const auto &sigma : families) {
        auto channel_at = [&](double t) {
            std::vector<DensityOperator> v;
            for (std::size_t x = 0; x < w.size(); ++x) {
                v.push_back(DensityOperator::trusted((1.0 - t) * w[x].matrix() + t * sigma[x]));
            }
            return CqChannel(std::move(v));
        };
        auto div_at = [&](const CqChannel &v) {
            double dv = 0;
            for (std::size_t x = 0; x < w.size(); ++x) {
                if (p[x] > 0) {
                    dv += p[x] * relative_entropy(v[x].matrix(), w[x].matrix());
                }
            }
            return dv;
        };
        double prev = 0;
        double found = -1;
        const int grid = 200;
        for (int k = 1; k <= grid; ++k) {
            const double t = static_cast<double>(k) / grid;
            if (holevo_information(p, channel_at(t)) <= rate) {
                double lo = prev;
                double hi = t;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (holevo_information(p, channel_at(mid)) <= rate) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                found = hi;
                break;
            }
            prev = t;
        }
        if (found < 0) {
            continue;
        }
        CqChannel v = channel_at(found);
        const double dv = div_at(v);
        if (dv < best.value) {
            best.value = dv;
            best.divergence = dv;
            best.information = holevo_information(p, v);
        }
    }
    return best;
}

}  // namespace qshannon

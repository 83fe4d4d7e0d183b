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

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "qshannon/entropy.hpp"

namespace qshannon {

/// 2 log2(e) / e, the constant in the variance-typical size and weight bounds.
inline const double kTypicalK = 2.0 * (1.0 / std::log(2.0)) / std::exp(1.0);

using Counts = std::vector<std::size_t>;
/// One composition per position class.
using JointType = std::vector<Counts>;

struct TypeVector {
    Counts counts;

    TypeVector() = default;
    explicit TypeVector(Counts c) : counts(std::move(c)) {
    }

    std::size_t n() const {
        return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    }
    std::size_t alphabet_size() const {
        return counts.size();
    }
    Distribution distribution() const {
        Distribution p(counts.size());
        const double nn = static_cast<double>(n());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            p[i] = nn > 0 ? static_cast<double>(counts[i]) / nn : 0.0;
        }
        return p;
    }

    static TypeVector of(const std::vector<std::size_t> &sequence, std::size_t alphabet) {
        Counts c(alphabet, 0);
        for (std::size_t s : sequence) {
            c.at(s) += 1;
        }
        return TypeVector(c);
    }

    /// Parses "a:b:..." into counts.
    static TypeVector parse(const std::string &text) {
        Counts c;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t next = text.find(':', pos);
            if (next == std::string::npos) {
                next = text.size();
            }
            const std::string part = text.substr(pos, next - pos);
            if (part.empty()) {
                throw Error(ErrorKind::ConfigError, "malformed type '" + text + "'");
            }
            c.push_back(static_cast<std::size_t>(std::stoul(part)));
            pos = next + 1;
        }
        return TypeVector(c);
    }
};

inline double log2_factorial(std::size_t n) {
    return std::lgamma(static_cast<double>(n) + 1.0) / std::log(2.0);
}

inline double log2_multinomial(const Counts &c) {
    std::size_t n = 0;
    double r = 0;
    for (std::size_t k : c) {
        n += k;
        r -= log2_factorial(k);
    }
    return r + log2_factorial(n);
}

/// Exact multinomial coefficient, or nullopt on overflow of 127 bits.
inline std::optional<unsigned __int128> multinomial_exact(const Counts &c) {
    const unsigned __int128 limit = (static_cast<unsigned __int128>(1) << 126);
    unsigned __int128 r = 1;
    std::size_t total = 0;
    for (std::size_t k : c) {
        // multiply by binomial(total + k, k), built incrementally so every step is integral
        for (std::size_t i = 1; i <= k; ++i) {
            const unsigned __int128 num = total + i;
            if (r > limit / num) {
                return std::nullopt;
            }
            r = r * num / i;
        }
        total += k;
    }
    return r;
}

/// All compositions of n into d parts, lexicographic in the counts.
inline std::vector<Counts> enumerate_types(std::size_t n, std::size_t d) {
    std::vector<Counts> out;
    if (d == 0) {
        return out;
    }
    Counts cur(d, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t k, std::size_t left) {
        if (k + 1 == d) {
            cur[k] = left;
            out.push_back(cur);
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            cur[k] = c;
            rec(k + 1, left - c);
        }
    };
    rec(0, n);
    return out;
}

/// Number of compositions of n into d parts.
inline double number_of_types(std::size_t n, std::size_t d) {
    return std::round(std::exp2(log2_multinomial({n, d - 1})));
}

inline double type_entropy(const Counts &c) {
    std::size_t n = std::accumulate(c.begin(), c.end(), std::size_t{0});
    if (n == 0) {
        return 0.0;
    }
    double h = 0;
    for (std::size_t k : c) {
        h -= xlogx(static_cast<double>(k) / static_cast<double>(n));
    }
    return h;
}

/// Diagonal of basis^dagger sigma basis.
inline RealVector pinched_weights(const Matrix &sigma, const Matrix &basis) {
    RealVector w(basis.cols());
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        w(j) = std::max(0.0, (basis.col(j).adjoint() * sigma * basis.col(j))(0, 0).real());
    }
    return w;
}

inline double log2_sequence_weight(const Counts &c, const RealVector &w) {
    double r = 0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] == 0) {
            continue;
        }
        if (w(static_cast<Eigen::Index>(j)) <= 0) {
            return -kInfinity;
        }
        r += static_cast<double>(c[j]) * std::log2(w(static_cast<Eigen::Index>(j)));
    }
    return r;
}

struct PositionClass {
    Matrix basis;  // d x d unitary, columns are the basis vectors
    std::vector<std::size_t> positions;
};

/// Projector sum over retained index sequences of pi_{j_1} (x) ... (x) pi_{j_n}, where the
/// basis at each position is that of its class and the retained set is a union of joint
/// type classes (plus optionally the lexicographically first `count` sequences of one
/// further type, for single-class projectors).
class TypicalProjector {
   public:
    struct Partial {
        JointType type;
        double count;  // integer valued; may exceed 64 bits
    };

    TypicalProjector() = default;

    TypicalProjector(std::size_t n, std::size_t d, std::vector<PositionClass> classes, std::vector<JointType> types,
                     std::optional<Partial> partial = std::nullopt)
        : n_(n), d_(d), classes_(std::move(classes)), types_(std::move(types)), partial_(std::move(partial)) {
        class_of_.assign(n_, classes_.size());
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            if (static_cast<std::size_t>(classes_[c].basis.rows()) != d_ ||
                static_cast<std::size_t>(classes_[c].basis.cols()) != d_) {
                throw Error(ErrorKind::DimMismatch, "class basis has the wrong dimension");
            }
            for (std::size_t p : classes_[c].positions) {
                if (p >= n_ || class_of_[p] != classes_.size()) {
                    throw Error(ErrorKind::BadShape, "positions must partition 0..n-1");
                }
                class_of_[p] = c;
            }
        }
        for (std::size_t p = 0; p < n_; ++p) {
            if (class_of_[p] == classes_.size()) {
                throw Error(ErrorKind::BadShape, "positions must partition 0..n-1");
            }
        }
        auto check = [&](const JointType &jt) {
            if (jt.size() != classes_.size()) {
                throw Error(ErrorKind::BadShape, "joint type has the wrong number of classes");
            }
            for (std::size_t c = 0; c < jt.size(); ++c) {
                if (jt[c].size() != d_ || std::accumulate(jt[c].begin(), jt[c].end(), std::size_t{0}) != classes_[c].positions.size()) {
                    throw Error(ErrorKind::BadShape, "joint type does not match its class");
                }
            }
        };
        for (const auto &jt : types_) {
            check(jt);
        }
        std::sort(types_.begin(), types_.end());
        types_.erase(std::unique(types_.begin(), types_.end()), types_.end());
        type_set_ = std::set<JointType>(types_.begin(), types_.end());
        if (partial_) {
            check(partial_->type);
            if (classes_.size() != 1) {
                throw Error(ErrorKind::BadShape, "partial type classes need a single position class");
            }
            if (type_set_.count(partial_->type)) {
                throw Error(ErrorKind::BadShape, "partial type is already fully retained");
            }
        }
    }

    std::size_t n() const {
        return n_;
    }
    std::size_t d() const {
        return d_;
    }
    const std::vector<PositionClass> &classes() const {
        return classes_;
    }
    const std::vector<JointType> &types() const {
        return types_;
    }
    const std::optional<Partial> &partial() const {
        return partial_;
    }
    bool empty() const {
        return types_.empty() && (!partial_ || partial_->count == 0);
    }
    bool contains_type(const JointType &jt) const {
        return type_set_.count(jt) > 0;
    }

    JointType joint_type_of(const std::vector<std::size_t> &seq) const {
        JointType jt(classes_.size(), Counts(d_, 0));
        for (std::size_t p = 0; p < n_; ++p) {
            jt[class_of_[p]].at(seq.at(p)) += 1;
        }
        return jt;
    }

    static double log2_type_size(const JointType &jt) {
        double r = 0;
        for (const auto &c : jt) {
            r += log2_multinomial(c);
        }
        return r;
    }

    /// log2 of the trace (number of retained sequences); -inf when empty.
    double log2_trace() const {
        std::vector<double> terms;
        for (const auto &jt : types_) {
            terms.push_back(log2_type_size(jt));
        }
        if (partial_ && partial_->count > 0) {
            terms.push_back(std::log2(partial_->count));
        }
        return log2_sum_exp2(terms);
    }

    /// Trace, computed with exact integer arithmetic whenever it fits in 127 bits.
    double trace() const {
        unsigned __int128 total = 0;
        bool exact = true;
        for (const auto &jt : types_) {
            unsigned __int128 size = 1;
            for (const auto &c : jt) {
                auto m = multinomial_exact(c);
                if (!m || (*m > 0 && size > (static_cast<unsigned __int128>(1) << 126) / *m)) {
                    exact = false;
                    break;
                }
                size *= *m;
            }
            if (!exact) {
                break;
            }
            total += size;
            if (total > (static_cast<unsigned __int128>(1) << 126)) {
                exact = false;
                break;
            }
        }
        if (!exact) {
            return std::exp2(log2_trace());
        }
        if (partial_) {
            return static_cast<double>(total) + partial_->count;
        }
        return static_cast<double>(total);
    }

    /// Per-class pinched weights of sigma in the class bases.
    std::vector<RealVector> class_weights(const Matrix &sigma) const {
        std::vector<RealVector> w;
        for (const auto &c : classes_) {
            w.push_back(pinched_weights(sigma, c.basis));
        }
        return w;
    }

    /// log2 of the pinched weight of any sequence of joint type jt under sigma^{(x)n}.
    double log2_weight(const JointType &jt, const std::vector<RealVector> &class_w) const {
        double r = 0;
        for (std::size_t c = 0; c < jt.size(); ++c) {
            r += log2_sequence_weight(jt[c], class_w[c]);
        }
        return r;
    }

    /// Tr(sigma_1 (x) ... (x) sigma_n Pi) from pinched weights per position.
    double mass(const std::vector<RealVector> &position_weights) const {
        if (position_weights.size() != n_) {
            throw Error(ErrorKind::SizeMismatch, "need one weight vector per position");
        }
        if (empty()) {
            return 0.0;
        }
        std::vector<std::map<Counts, double>> dist;
        bool iid_single = classes_.size() == 1;
        for (const auto &cls : classes_) {
            std::vector<const RealVector *> w;
            for (std::size_t p : cls.positions) {
                w.push_back(&position_weights[p]);
            }
            dist.push_back(class_distribution(w));
            for (std::size_t k = 1; k < w.size(); ++k) {
                if (*w[k] != *w[0]) {
                    iid_single = false;
                }
            }
        }
        double m = 0;
        for (const auto &jt : types_) {
            double t = 1;
            for (std::size_t c = 0; c < jt.size(); ++c) {
                auto it = dist[c].find(jt[c]);
                t *= it == dist[c].end() ? 0.0 : it->second;
            }
            m += t;
        }
        if (partial_ && partial_->count > 0) {
            if (!iid_single) {
                throw Error(ErrorKind::ScaleError, "partial type classes need identical position weights");
            }
            const double lw = log2_sequence_weight(partial_->type[0], position_weights[0]);
            m += partial_->count * std::exp2(lw);
        }
        return std::clamp(m, 0.0, 1.0);
    }

    double mass(const std::vector<Matrix> &position_states) const {
        std::vector<RealVector> w;
        for (std::size_t p = 0; p < n_; ++p) {
            w.push_back(pinched_weights(position_states.at(p), classes_[class_of_[p]].basis));
        }
        return mass(w);
    }

    /// Tr(sigma^{(x)n} Pi).
    double mass(const Matrix &sigma) const {
        return mass(std::vector<Matrix>(n_, sigma));
    }

    std::size_t class_of(std::size_t position) const {
        return class_of_.at(position);
    }

    std::size_t dense_dim() const {
        const double dim = std::pow(static_cast<double>(d_), static_cast<double>(n_));
        if (dim > static_cast<double>(kDenseDimLimit)) {
            throw Error(ErrorKind::InfeasibleScale, "dense form exceeds the dimension limit");
        }
        return static_cast<std::size_t>(std::llround(dim));
    }

    /// Retained index sequences in lexicographic order (small n only).
    std::vector<std::vector<std::size_t>> sequences() const {
        const std::size_t dim = dense_dim();
        std::vector<std::vector<std::size_t>> out;
        double partial_left = partial_ ? partial_->count : 0;
        std::vector<std::size_t> seq(n_, 0);
        for (std::size_t idx = 0; idx < dim; ++idx) {
            std::size_t r = idx;
            for (std::size_t p = n_; p-- > 0;) {
                seq[p] = r % d_;
                r /= d_;
            }
            JointType jt = joint_type_of(seq);
            if (type_set_.count(jt)) {
                out.push_back(seq);
            } else if (partial_left > 0 && jt == partial_->type) {
                out.push_back(seq);
                --partial_left;
            }
        }
        return out;
    }

    Vector product_vector(const std::vector<std::size_t> &seq) const {
        Vector v = classes_[class_of_[0]].basis.col(static_cast<Eigen::Index>(seq[0]));
        for (std::size_t p = 1; p < n_; ++p) {
            v = tensor_product(v, Vector(classes_[class_of_[p]].basis.col(static_cast<Eigen::Index>(seq[p]))));
        }
        return v;
    }

    /// Orthonormal columns spanning the range.
    Matrix range_basis() const {
        const std::size_t dim = dense_dim();
        auto seqs = sequences();
        Matrix b(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(seqs.size()));
        for (std::size_t k = 0; k < seqs.size(); ++k) {
            b.col(static_cast<Eigen::Index>(k)) = product_vector(seqs[k]);
        }
        return b;
    }

    HermitianMatrix dense() const {
        Matrix b = range_basis();
        return b * b.adjoint();
    }

   private:
    static double log2_sum_exp2(const std::vector<double> &terms) {
        double mx = -kInfinity;
        for (double t : terms) {
            mx = std::max(mx, t);
        }
        if (mx == -kInfinity) {
            return -kInfinity;
        }
        double s = 0;
        for (double t : terms) {
            s += std::exp2(t - mx);
        }
        return mx + std::log2(s);
    }

    // Distribution over compositions of the class positions.
    std::map<Counts, double> class_distribution(const std::vector<const RealVector *> &w) const {
        std::vector<std::pair<const RealVector *, std::size_t>> groups;
        for (const RealVector *x : w) {
            bool found = false;
            for (auto &g : groups) {
                if (*g.first == *x) {
                    ++g.second;
                    found = true;
                    break;
                }
            }
            if (!found) {
                groups.emplace_back(x, 1);
            }
        }
        std::map<Counts, double> acc;
        acc[Counts(d_, 0)] = 1.0;
        for (const auto &g : groups) {
            std::map<Counts, double> part;
            for (const auto &c : enumerate_types(g.second, d_)) {
                const double lw = log2_sequence_weight(c, *g.first);
                if (lw == -kInfinity) {
                    continue;
                }
                const double p = std::exp2(log2_multinomial(c) + lw);
                if (p > 0) {
                    part[c] = p;
                }
            }
            std::map<Counts, double> next;
            for (const auto &a : acc) {
                for (const auto &b : part) {
                    Counts s = a.first;
                    for (std::size_t j = 0; j < d_; ++j) {
                        s[j] += b.first[j];
                    }
                    next[s] += a.second * b.second;
                }
            }
            acc.swap(next);
        }
        return acc;
    }

    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<PositionClass> classes_;
    std::vector<std::size_t> class_of_;
    std::vector<JointType> types_;
    std::set<JointType> type_set_;
    std::optional<Partial> partial_;
};

namespace detail {

inline constexpr double kCountTol = 1e-9;
inline constexpr double kJointTypeLimit = 5e6;

inline std::vector<PositionClass> single_class(const Matrix &basis, std::size_t n) {
    PositionClass c;
    c.basis = basis;
    c.positions.resize(n);
    std::iota(c.positions.begin(), c.positions.end(), std::size_t{0});
    return {c};
}

// Cartesian product of per-class candidate compositions, filtered by pred.
template <class Pred>
std::vector<JointType> joint_types(const std::vector<std::vector<Counts>> &per_class, Pred pred) {
    double total = 1;
    for (const auto &v : per_class) {
        total *= static_cast<double>(v.size());
    }
    if (total > kJointTypeLimit) {
        throw Error(ErrorKind::InfeasibleScale, "too many joint type classes");
    }
    std::vector<JointType> out;
    if (per_class.empty()) {
        JointType jt;
        if (pred(jt)) {
            out.push_back(jt);
        }
        return out;
    }
    for (const auto &v : per_class) {
        if (v.empty()) {
            return out;
        }
    }
    std::vector<std::size_t> idx(per_class.size(), 0);
    JointType jt(per_class.size());
    while (true) {
        for (std::size_t c = 0; c < per_class.size(); ++c) {
            jt[c] = per_class[c][idx[c]];
        }
        if (pred(jt)) {
            out.push_back(jt);
        }
        std::size_t k = per_class.size();
        while (k > 0) {
            --k;
            if (++idx[k] < per_class[k].size()) {
                break;
            }
            idx[k] = 0;
            if (k == 0) {
                return out;
            }
        }
    }
}

inline std::vector<Counts> variance_typical_counts(const RealVector &q, std::size_t n, double alpha) {
    std::vector<Counts> out;
    const double sn = std::sqrt(static_cast<double>(n));
    for (const auto &c : enumerate_types(n, static_cast<std::size_t>(q.size()))) {
        bool ok = true;
        for (std::size_t j = 0; j < c.size() && ok; ++j) {
            const double qj = std::clamp(q(static_cast<Eigen::Index>(j)), 0.0, 1.0);
            const double window = alpha * std::sqrt(qj * (1.0 - qj)) * sn;
            ok = std::abs(static_cast<double>(c[j]) - static_cast<double>(n) * qj) <= window + kCountTol * std::max<double>(1.0, static_cast<double>(n));
        }
        if (ok) {
            out.push_back(c);
        }
    }
    return out;
}

inline Spectrum clamped_spectrum(const Matrix &rho) {
    Spectrum s = eig_hermitian(rho);
    for (Eigen::Index j = 0; j < s.values.size(); ++j) {
        s.values(j) = std::max(0.0, s.values(j));
    }
    return s;
}

// Groups positions by (approximately) equal operators; returns class index per position.
inline std::vector<std::size_t> group_equal(const std::vector<Matrix> &ops, std::vector<std::size_t> &representatives) {
    std::vector<std::size_t> cls(ops.size());
    representatives.clear();
    for (std::size_t i = 0; i < ops.size(); ++i) {
        bool found = false;
        for (std::size_t r = 0; r < representatives.size(); ++r) {
            const Matrix &o = ops[representatives[r]];
            if (o.rows() == ops[i].rows() && (o - ops[i]).cwiseAbs().maxCoeff() <= 1e-12) {
                cls[i] = r;
                found = true;
                break;
            }
        }
        if (!found) {
            cls[i] = representatives.size();
            representatives.push_back(i);
        }
    }
    return cls;
}

}  // namespace detail

/// Classical sequence set given by a union of type classes, with mass under P^n.
class SequenceSet {
   public:
    SequenceSet(Distribution p, TypicalProjector proj) : p_(std::move(p)), proj_(std::move(proj)) {
    }

    bool contains(const std::vector<std::size_t> &seq) const {
        if (seq.size() != proj_.n()) {
            return false;
        }
        return proj_.contains_type(proj_.joint_type_of(seq));
    }
    double cardinality() const {
        return proj_.trace();
    }
    double log2_cardinality() const {
        return proj_.log2_trace();
    }
    double mass() const {
        RealVector w(static_cast<Eigen::Index>(p_.size()));
        for (std::size_t i = 0; i < p_.size(); ++i) {
            w(static_cast<Eigen::Index>(i)) = p_[i];
        }
        return proj_.mass(std::vector<RealVector>(proj_.n(), w));
    }
    const std::vector<JointType> &types() const {
        return proj_.types();
    }
    const TypicalProjector &as_projector() const {
        return proj_;
    }

   private:
    Distribution p_;
    TypicalProjector proj_;
};

/// Sequences with |N(x|x^n) - n P(x)| <= alpha sqrt(P(x)(1-P(x))) sqrt(n) for every x.
inline SequenceSet variance_typical_set(const Distribution &p, std::size_t n, double alpha) {
    if (alpha < 0) {
        throw Error(ErrorKind::DomainError, "alpha must be nonnegative");
    }
    require_distribution(p, p.size());
    RealVector q(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
        q(static_cast<Eigen::Index>(i)) = p[i];
    }
    auto counts = detail::variance_typical_counts(q, n, alpha);
    std::vector<JointType> types;
    for (auto &c : counts) {
        types.push_back({c});
    }
    const auto a = static_cast<Eigen::Index>(p.size());
    return SequenceSet(p, TypicalProjector(n, p.size(), detail::single_class(Matrix::Identity(a, a), n), types));
}

/// mu(rho): smallest nonzero eigenvalue of sqrt(rho(1-rho)); 0 when there is none.
inline double variance_mu(const Matrix &rho) {
    RealVector q = detail::clamped_spectrum(rho).values;
    double mu = kInfinity;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double s = std::sqrt(std::max(0.0, q(j) * (1.0 - q(j))));
        if (s > kRankTol) {
            mu = std::min(mu, s);
        }
    }
    return mu == kInfinity ? 0.0 : mu;
}

/// N(rho): rank of sqrt(rho(1-rho)).
inline std::size_t variance_rank(const Matrix &rho) {
    RealVector q = detail::clamped_spectrum(rho).values;
    std::size_t r = 0;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
        if (std::sqrt(std::max(0.0, q(j) * (1.0 - q(j)))) > kRankTol) {
            ++r;
        }
    }
    return r;
}

inline TypicalProjector variance_typical_projector(const Matrix &rho, std::size_t n, double alpha) {
    if (alpha < 0) {
        throw Error(ErrorKind::DomainError, "alpha must be nonnegative");
    }
    Spectrum s = detail::clamped_spectrum(rho);
    std::vector<JointType> types;
    for (auto &c : detail::variance_typical_counts(s.values, n, alpha)) {
        types.push_back({c});
    }
    return TypicalProjector(n, s.dim(), detail::single_class(s.vectors, n), types);
}

inline TypicalProjector variance_typical_projector(const DensityOperator &rho, std::size_t n, double alpha) {
    return variance_typical_projector(rho.matrix(), n, alpha);
}

/// Sequences j^n with |sum_i -log q_{j_i|i} - sum_i H(rho_i)| <= delta sqrt(n), each position in
/// the eigenbasis of its own state. Identical states share a position class.
inline TypicalProjector entropy_typical_projector(const std::vector<Matrix> &rhos, double delta) {
    if (rhos.empty()) {
        throw Error(ErrorKind::BadShape, "need at least one position");
    }
    const std::size_t n = rhos.size();
    const std::size_t d = static_cast<std::size_t>(rhos[0].rows());
    std::vector<std::size_t> reps;
    auto cls = detail::group_equal(rhos, reps);
    std::vector<PositionClass> classes(reps.size());
    std::vector<RealVector> q(reps.size());
    double htotal = 0;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        Spectrum s = detail::clamped_spectrum(rhos[reps[r]]);
        classes[r].basis = s.vectors;
        q[r] = s.values;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(rhos[i].rows()) != d) {
            throw Error(ErrorKind::DimMismatch, "positions differ in dimension");
        }
        classes[cls[i]].positions.push_back(i);
        htotal += entropy_of_spectrum(q[cls[i]]);
    }
    std::vector<std::vector<Counts>> per_class;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        std::vector<Counts> ok;
        for (auto &c : enumerate_types(classes[r].positions.size(), d)) {
            if (log2_sequence_weight(c, q[r]) > -kInfinity) {
                ok.push_back(c);
            }
        }
        per_class.push_back(std::move(ok));
    }
    const double window = delta * std::sqrt(static_cast<double>(n));
    auto types = detail::joint_types(per_class, [&](const JointType &jt) {
        double surprisal = 0;
        for (std::size_t c = 0; c < jt.size(); ++c) {
            surprisal -= log2_sequence_weight(jt[c], q[c]);
        }
        return std::abs(surprisal - htotal) <= window + 1e-9;
    });
    return TypicalProjector(n, d, std::move(classes), std::move(types));
}

inline TypicalProjector entropy_typical_projector(const std::vector<DensityOperator> &rhos, double delta) {
    std::vector<Matrix> m;
    for (const auto &r : rhos) {
        m.push_back(r.matrix());
    }
    return entropy_typical_projector(m, delta);
}

/// max{(log 3)^2, (log d)^2}, the variance constant of the entropy-typical mass bound.
inline double entropy_typical_variance_constant(std::size_t d) {
    const double l3 = std::log2(3.0);
    const double ld = std::log2(static_cast<double>(d));
    return std::max(l3 * l3, ld * ld);
}

/// |N(j|j^n) - n q_j| <= delta sqrt(n) in the eigenbasis of rho.
inline TypicalProjector constant_typical_projector(const Matrix &rho, std::size_t n, double delta) {
    Spectrum s = detail::clamped_spectrum(rho);
    std::vector<JointType> types;
    const double window = delta * std::sqrt(static_cast<double>(n));
    for (auto &c : enumerate_types(n, s.dim())) {
        bool ok = true;
        for (std::size_t j = 0; j < c.size() && ok; ++j) {
            ok = std::abs(static_cast<double>(c[j]) - static_cast<double>(n) * s.values(static_cast<Eigen::Index>(j))) <=
                 window + detail::kCountTol * std::max<double>(1.0, static_cast<double>(n));
        }
        if (ok) {
            types.push_back({c});
        }
    }
    return TypicalProjector(n, s.dim(), detail::single_class(s.vectors, n), types);
}

/// (n+1)^d exp(n H + n d eta(delta/sqrt(n))) with eta(x) = -x log x, as log2.
inline double constant_typical_log2_size_bound(const Matrix &rho, std::size_t n, double delta) {
    const double d = static_cast<double>(rho.rows());
    const double nn = static_cast<double>(n);
    const double x = delta / std::sqrt(nn);
    return d * std::log2(nn + 1.0) + nn * von_neumann_entropy(rho) + nn * d * (-xlogx(x));
}

namespace detail {

inline Matrix checked_basis(const Matrix &basis) {
    require_square(basis, "basis");
    const auto d = basis.rows();
    if ((basis.adjoint() * basis - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8) {
        throw Error(ErrorKind::DomainError, "basis must be unitary");
    }
    return basis;
}

inline RealVector diagonal_in(const Matrix &nu, const Matrix &basis) {
    Matrix m = basis.adjoint() * nu * basis;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j && std::abs(m(i, j)) > 1e-9) {
                throw Error(ErrorKind::DomainError, "operator is not diagonal in the given basis");
            }
        }
    }
    return m.diagonal().real();
}

inline std::optional<Counts> exact_counts(const RealVector &nu, std::size_t n) {
    Counts c(static_cast<std::size_t>(nu.size()));
    std::size_t total = 0;
    for (Eigen::Index j = 0; j < nu.size(); ++j) {
        const double x = nu(j) * static_cast<double>(n);
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-9 * std::max<double>(1.0, static_cast<double>(n)) || r < 0) {
            return std::nullopt;
        }
        c[static_cast<std::size_t>(j)] = static_cast<std::size_t>(r);
        total += c[static_cast<std::size_t>(j)];
    }
    if (total != n) {
        return std::nullopt;
    }
    return c;
}

}  // namespace detail

/// Exact type projector of nu in the given basis, in which nu must be diagonal.
/// Empty when n nu is not integral.
inline TypicalProjector exact_type_projector(const Matrix &nu, std::size_t n, const Matrix &basis) {
    Matrix b = detail::checked_basis(basis);
    RealVector diag = detail::diagonal_in(nu, b);
    std::vector<JointType> types;
    if (auto c = detail::exact_counts(diag, n)) {
        types.push_back({*c});
    }
    return TypicalProjector(n, static_cast<std::size_t>(b.rows()), detail::single_class(b, n), types);
}

inline TypicalProjector exact_type_projector(const Matrix &nu, std::size_t n) {
    return exact_type_projector(nu, n, eig_hermitian(nu).vectors);
}

namespace detail {

inline std::vector<PositionClass> letter_classes(const std::vector<Matrix> &bases, const std::vector<std::size_t> &xn,
                                                 std::vector<std::size_t> &letters) {
    std::vector<PositionClass> classes;
    letters.clear();
    std::vector<std::size_t> slot(bases.size(), bases.size());
    for (std::size_t i = 0; i < xn.size(); ++i) {
        const std::size_t x = xn[i];
        if (x >= bases.size()) {
            throw Error(ErrorKind::DomainError, "input letter outside the alphabet");
        }
        if (slot[x] == bases.size()) {
            slot[x] = classes.size();
            classes.push_back(PositionClass{bases[x], {}});
            letters.push_back(x);
        }
        classes[slot[x]].positions.push_back(i);
    }
    return classes;
}

}  // namespace detail

/// Exact conditional type projector: in the block of positions carrying letter x, the
/// exact type of V_x in its eigenbasis.
inline TypicalProjector exact_cond_type_projector(const CqChannel &v, const std::vector<std::size_t> &xn) {
    std::vector<Matrix> bases;
    std::vector<RealVector> spectra;
    for (const auto &vx : v.outputs()) {
        Spectrum s = detail::clamped_spectrum(vx.matrix());
        bases.push_back(s.vectors);
        spectra.push_back(s.values);
    }
    std::vector<std::size_t> letters;
    auto classes = detail::letter_classes(bases, xn, letters);
    JointType jt;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        auto counts = detail::exact_counts(spectra[letters[c]], classes[c].positions.size());
        if (!counts) {
            return TypicalProjector(xn.size(), v.dim(), std::move(classes), {});
        }
        jt.push_back(*counts);
    }
    return TypicalProjector(xn.size(), v.dim(), std::move(classes), {jt});
}

enum class EntropySide { AtMost, AtLeast };

/// Union of exact types in the eigenbasis of rho with H(type) <= L (or >= L).
inline TypicalProjector bounded_entropy_projector(const Matrix &rho, std::size_t n, double level, EntropySide side) {
    if (level < 0) {
        throw Error(ErrorKind::DomainError, "entropy level must be nonnegative");
    }
    Spectrum s = detail::clamped_spectrum(rho);
    std::vector<JointType> types;
    for (auto &c : enumerate_types(n, s.dim())) {
        const double h = type_entropy(c);
        if (side == EntropySide::AtMost ? h <= level + 1e-12 : h >= level - 1e-12) {
            types.push_back({c});
        }
    }
    return TypicalProjector(n, s.dim(), detail::single_class(s.vectors, n), types);
}

/// Channel version: per-letter blocks in the eigenbases of W_x, retaining joint types whose
/// empirical conditional entropy H(V|P) is on the chosen side of L.
inline TypicalProjector conditional_bounded_entropy_projector(const CqChannel &w, const std::vector<std::size_t> &xn,
                                                             double level, EntropySide side) {
    std::vector<Matrix> bases;
    for (const auto &wx : w.outputs()) {
        bases.push_back(detail::clamped_spectrum(wx.matrix()).vectors);
    }
    std::vector<std::size_t> letters;
    auto classes = detail::letter_classes(bases, xn, letters);
    std::vector<std::vector<Counts>> per_class;
    for (const auto &c : classes) {
        per_class.push_back(enumerate_types(c.positions.size(), w.dim()));
    }
    const double n = static_cast<double>(xn.size());
    auto types = detail::joint_types(per_class, [&](const JointType &jt) {
        double h = 0;
        for (std::size_t c = 0; c < jt.size(); ++c) {
            h += static_cast<double>(classes[c].positions.size()) / n * type_entropy(jt[c]);
        }
        return side == EntropySide::AtMost ? h <= level + 1e-12 : h >= level - 1e-12;
    });
    return TypicalProjector(xn.size(), w.dim(), std::move(classes), std::move(types));
}

/// Tensor product over letters x of the variance-typical projector of W_x with constant delta
/// on the positions carrying x.
inline TypicalProjector conditional_variance_typical_projector(const CqChannel &w, const std::vector<std::size_t> &xn,
                                                              double delta) {
    std::vector<Matrix> bases;
    std::vector<RealVector> spectra;
    for (const auto &wx : w.outputs()) {
        Spectrum s = detail::clamped_spectrum(wx.matrix());
        bases.push_back(s.vectors);
        spectra.push_back(s.values);
    }
    std::vector<std::size_t> letters;
    auto classes = detail::letter_classes(bases, xn, letters);
    std::vector<std::vector<Counts>> per_class;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        per_class.push_back(detail::variance_typical_counts(spectra[letters[c]], classes[c].positions.size(), delta));
    }
    auto types = detail::joint_types(per_class, [](const JointType &) { return true; });
    return TypicalProjector(xn.size(), w.dim(), std::move(classes), std::move(types));
}

/// Union of basis-diagonal exact types nu with H(nu) <= R.
inline TypicalProjector jhhh_projector(const Matrix &basis, std::size_t n, double rate) {
    if (rate < 0) {
        throw Error(ErrorKind::DomainError, "rate must be nonnegative");
    }
    Matrix b = detail::checked_basis(basis);
    std::vector<JointType> types;
    for (auto &c : enumerate_types(n, static_cast<std::size_t>(b.rows()))) {
        if (type_entropy(c) <= rate + 1e-12) {
            types.push_back({c});
        }
    }
    return TypicalProjector(n, static_cast<std::size_t>(b.rows()), detail::single_class(b, n), types);
}

// Divergence minimization over distributions with an entropy constraint.

namespace detail {

// nu proportional to q^beta on the support of q.
inline std::vector<double> tilted(const std::vector<double> &q, double beta) {
    double mx = -kInfinity;
    for (double x : q) {
        if (x > 0) {
            mx = std::max(mx, beta * std::log2(x));
        }
    }
    std::vector<double> nu(q.size(), 0.0);
    double s = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] > 0) {
            nu[i] = std::exp2(beta * std::log2(q[i]) - mx);
            s += nu[i];
        }
    }
    for (auto &x : nu) {
        x /= s;
    }
    return nu;
}

template <class F>
double bisect_decreasing(F f, double lo, double hi, double target) {
    // f decreasing on [lo, hi]; returns x with f(x) ~ target.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

struct ConstrainedDivergence {
    double value = 0;         // kInfinity when infeasible
    std::vector<double> arg;  // minimizer when finite
};

/// min D(nu||q) over distributions nu with H(nu) <= L (AtMost) or H(nu) >= L (AtLeast).
/// The minimizer lies on the tilted family nu ~ q^beta (or, below the entropy of the
/// uniform distribution on argmax q, on that argmax set).
inline ConstrainedDivergence min_divergence_entropy_constrained(const std::vector<double> &q, double level, EntropySide side) {
    ConstrainedDivergence r;
    const double hq = shannon_entropy(q);
    std::size_t support = 0;
    double qmax = 0;
    for (double x : q) {
        support += x > 0 ? 1 : 0;
        qmax = std::max(qmax, x);
    }
    if (side == EntropySide::AtMost) {
        if (hq <= level) {
            r.arg = q;
            return r;
        }
        if (level < 0) {
            r.value = kInfinity;
            return r;
        }
        std::size_t m = 0;
        for (double x : q) {
            m += (x >= qmax * (1 - 1e-12)) ? 1 : 0;
        }
        if (level <= std::log2(static_cast<double>(m)) + 1e-15) {
            r.value = std::max(0.0, -level - std::log2(qmax));
            r.arg.assign(q.size(), 0.0);
            // any distribution on the argmax set with entropy L attains this value
            std::size_t first = 0;
            while (q[first] < qmax * (1 - 1e-12)) {
                ++first;
            }
            r.arg[first] = 1.0;
            return r;
        }
        double hi = 2.0;
        while (shannon_entropy(detail::tilted(q, hi)) > level && hi < 1e12) {
            hi *= 2.0;
        }
        const double beta = detail::bisect_decreasing([&](double b) { return shannon_entropy(detail::tilted(q, b)); }, 1.0, hi, level);
        r.arg = detail::tilted(q, beta);
    } else {
        if (hq >= level) {
            r.arg = q;
            return r;
        }
        if (level > std::log2(static_cast<double>(support)) + 1e-15) {
            r.value = kInfinity;
            return r;
        }
        const double beta = detail::bisect_decreasing([&](double b) { return shannon_entropy(detail::tilted(q, b)); }, 0.0, 1.0, level);
        r.arg = detail::tilted(q, beta);
    }
    r.value = kl_divergence(r.arg, q);
    return r;
}

inline std::vector<double> spectrum_as_distribution(const Matrix &rho) {
    RealVector v = detail::clamped_spectrum(rho).values;
    return std::vector<double>(v.data(), v.data() + v.size());
}

/// Shadow trace bound (eta - sqrt(8 lambda))/mu2, or (eta - lambda)/mu2 when rho and Lambda commute.
inline double shadow_bound(double eta, double lambda, double mu2, bool commuting) {
    if (eta < 0 || eta > 1 + kTol) {
        throw Error(ErrorKind::DomainError, "eta must lie in [0,1]");
    }
    const double loss = commuting ? lambda : std::sqrt(8.0 * lambda);
    return (eta - loss) / mu2;
}

/// 0 <= B <= 1 and Tr(rho B) >= eta.
inline bool verify_shadow(const HermitianMatrix &b, const Matrix &rho, double eta) {
    if (b.rows() != rho.rows()) {
        throw Error(ErrorKind::DimMismatch, "shadow and state differ in dimension");
    }
    if (hermitian_defect(b) > kTol) {
        return false;
    }
    RealVector ev = eigenvalues_hermitian(b);
    if (ev.minCoeff() < -kTol || ev.maxCoeff() > 1 + kTol) {
        return false;
    }
    return trace_of_product(rho, b).real() >= eta - kTol;
}

/// Projector onto the span of all vectors A_(I) psi, psi in range(Pi), with I ranging over
/// position subsets of size l and A over matrix units on those positions.
inline HermitianMatrix blow_up(const HermitianMatrix &pi, std::size_t l, const std::vector<std::size_t> &factor_dims) {
    require_hermitian(pi, "projector");
    if (product_of(factor_dims) != static_cast<std::size_t>(pi.rows())) {
        throw Error(ErrorKind::DimMismatch, "factor dimensions do not match the projector");
    }
    if (l == 0) {
        return pi;
    }
    const std::size_t n = factor_dims.size();
    l = std::min(l, n);
    Matrix range = column_span_basis(pi);
    double work = static_cast<double>(pi.rows()) * static_cast<double>(range.cols());
    {
        double subsets = 1;
        for (std::size_t i = 0; i < l; ++i) {
            subsets = subsets * static_cast<double>(n - i) / static_cast<double>(i + 1);
        }
        double units = 1;
        for (std::size_t i = 0; i < l; ++i) {
            units *= static_cast<double>(factor_dims[i] * factor_dims[i]);
        }
        work *= subsets * units;
    }
    if (work > 2e8) {
        throw Error(ErrorKind::TooLarge, "blow-up is too large to compute densely");
    }
    std::vector<std::size_t> strides(n);
    std::size_t s = 1;
    for (std::size_t k = n; k-- > 0;) {
        strides[k] = s;
        s *= factor_dims[k];
    }
    const auto dim = pi.rows();
    std::vector<Vector> vecs;
    std::vector<std::size_t> subset(l);
    std::iota(subset.begin(), subset.end(), std::size_t{0});
    while (true) {
        // For this subset, map every full index i to the pair (value on I, index with I zeroed).
        // E_{ab} at I sends basis vector |rest, b> to |rest, a>, so the span is reached by
        // moving the slice with I-value b to I-value a, for all pairs (a, b).
        std::size_t block = 1;
        for (std::size_t f : subset) {
            block *= factor_dims[f];
        }
        std::vector<std::size_t> sub_offsets(block, 0);
        for (std::size_t v = 0; v < block; ++v) {
            std::size_t r = v;
            std::size_t off = 0;
            for (std::size_t k = l; k-- > 0;) {
                const std::size_t f = subset[k];
                off += (r % factor_dims[f]) * strides[f];
                r /= factor_dims[f];
            }
            sub_offsets[v] = off;
        }
        std::vector<std::size_t> rest;
        for (Eigen::Index i = 0; i < dim; ++i) {
            std::size_t ii = static_cast<std::size_t>(i);
            bool zero_on_subset = true;
            for (std::size_t f : subset) {
                if ((ii / strides[f]) % factor_dims[f] != 0) {
                    zero_on_subset = false;
                    break;
                }
            }
            if (zero_on_subset) {
                rest.push_back(ii);
            }
        }
        for (Eigen::Index c = 0; c < range.cols(); ++c) {
            for (std::size_t a = 0; a < block; ++a) {
                for (std::size_t b = 0; b < block; ++b) {
                    Vector v = Vector::Zero(dim);
                    for (std::size_t r : rest) {
                        v(static_cast<Eigen::Index>(r + sub_offsets[a])) = range(static_cast<Eigen::Index>(r + sub_offsets[b]), c);
                    }
                    if (v.norm() > 1e-12) {
                        vecs.push_back(v);
                    }
                }
            }
        }
        // next subset in lexicographic order
        std::size_t k = l;
        while (k > 0) {
            --k;
            if (subset[k] < n - l + k) {
                ++subset[k];
                for (std::size_t j = k + 1; j < l; ++j) {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
            if (k == 0) {
                k = l + 1;
                break;
            }
        }
        if (k == l + 1 || l == 0) {
            break;
        }
    }
    Matrix stacked(dim, static_cast<Eigen::Index>(vecs.size()) + range.cols());
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        stacked.col(static_cast<Eigen::Index>(i)) = vecs[i];
    }
    stacked.rightCols(range.cols()) = range;
    Matrix basis = column_span_basis(stacked);
    return basis * basis.adjoint();
}

inline HermitianMatrix blow_up(const TypicalProjector &pi, std::size_t l) {
    return blow_up(pi.dense(), l, std::vector<std::size_t>(pi.n(), pi.d()));
}

}  // namespace qshannon

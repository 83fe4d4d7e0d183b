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

#include <string>
#include <vector>

#include "qshannon/quantum_objects.hpp"

namespace qshannon {

using Distribution = std::vector<double>;
using FactorSet = std::vector<std::size_t>;

inline void require_distribution(const Distribution &p, std::size_t size, const char *what = "distribution") {
    if (p.size() != size) {
        throw Error(ErrorKind::SizeMismatch, std::string(what) + " has the wrong number of entries");
    }
    double total = 0;
    for (double q : p) {
        if (q < -kTol || !std::isfinite(q)) {
            throw Error(ErrorKind::DomainError, std::string(what) + " has a negative entry");
        }
        total += q;
    }
    if (std::abs(total - 1.0) > kTol) {
        throw Error(ErrorKind::DomainError, std::string(what) + " does not sum to one");
    }
}

inline double shannon_entropy(const std::vector<double> &p) {
    double h = 0;
    for (double q : p) {
        h -= xlogx(q);
    }
    return h;
}

inline double shannon_entropy(const RealVector &p) {
    double h = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        h -= xlogx(p(i));
    }
    return h;
}

/// Classical divergence in bits; kInfinity if p is not absolutely continuous w.r.t. q.
inline double kl_divergence(const std::vector<double> &p, const std::vector<double> &q) {
    double d = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) {
            continue;
        }
        if (q[i] <= 0) {
            return kInfinity;
        }
        d += p[i] * std::log2(p[i] / q[i]);
    }
    return std::max(d, 0.0);
}

inline double binary_entropy(double x) {
    if (x < -kTol || x > 1.0 + kTol) {
        throw Error(ErrorKind::DomainError, "binary entropy argument outside [0,1]");
    }
    x = std::clamp(x, 0.0, 1.0);
    return -xlogx(x) - xlogx(1.0 - x);
}

/// -theta log(theta/d), valid for 0 <= theta <= 1/2.
inline double fannes_bound(double theta, std::size_t d) {
    if (theta < 0.0 || theta > 0.5 || d == 0) {
        throw Error(ErrorKind::ThetaOutOfRange, "need 0 <= theta <= 1/2");
    }
    if (theta == 0.0) {
        return 0.0;
    }
    return -theta * std::log2(theta / static_cast<double>(d));
}

inline double entropy_of_spectrum(const RealVector &ev) {
    double h = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > 0) {
            h -= xlogx(ev(i));
        }
    }
    return std::max(h, 0.0);
}

inline double von_neumann_entropy(const Matrix &rho) {
    return entropy_of_spectrum(eigenvalues_hermitian(rho));
}

inline double von_neumann_entropy(const DensityOperator &rho) {
    return von_neumann_entropy(rho.matrix());
}

/// True when every eigenvector of rho with eigenvalue above kRankTol lies in supp(sigma)
/// up to a projection residual of 1e-7.
inline bool support_contained(const Matrix &rho, const Matrix &sigma) {
    Matrix ps = support_projector(sigma);
    Matrix br = support_basis(rho);
    if (br.cols() == 0) {
        return true;
    }
    Matrix residual = br - ps * br;
    for (Eigen::Index j = 0; j < residual.cols(); ++j) {
        if (residual.col(j).norm() > 1e-7) {
            return false;
        }
    }
    return true;
}

inline double relative_entropy(const Matrix &rho, const Matrix &sigma) {
    if (rho.rows() != sigma.rows()) {
        throw Error(ErrorKind::DimMismatch, "relative entropy of operators with different dimensions");
    }
    if (!support_contained(rho, sigma)) {
        return kInfinity;
    }
    const double neg_h = -von_neumann_entropy(rho);
    const double cross = trace_of_product(rho, matrix_log2(sigma)).real();
    return std::max(neg_h - cross, 0.0);
}

inline double relative_entropy(const DensityOperator &rho, const DensityOperator &sigma) {
    return relative_entropy(rho.matrix(), sigma.matrix());
}

/// State on a tensor product of factors, some of which are declared classical.
class MultipartiteState {
   public:
    MultipartiteState() = default;

    MultipartiteState(DensityOperator state, std::vector<std::size_t> factor_dims, std::vector<std::string> labels = {},
                      std::vector<bool> classical = {})
        : state_(std::move(state)), dims_(std::move(factor_dims)), labels_(std::move(labels)), classical_(std::move(classical)) {
        if (product_of(dims_) != state_.dim()) {
            throw Error(ErrorKind::DimMismatch, "factor dimensions do not match the state");
        }
        if (labels_.empty()) {
            for (std::size_t k = 0; k < dims_.size(); ++k) {
                labels_.push_back("A" + std::to_string(k + 1));
            }
        }
        if (classical_.empty()) {
            classical_.assign(dims_.size(), false);
        }
        if (labels_.size() != dims_.size() || classical_.size() != dims_.size()) {
            throw Error(ErrorKind::SizeMismatch, "one label and one classical flag per factor");
        }
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            if (classical_[k] && !factor_is_diagonal(k)) {
                throw Error(ErrorKind::DomainError, "factor " + labels_[k] + " is flagged classical but has coherences");
            }
        }
    }

    const DensityOperator &state() const {
        return state_;
    }
    const std::vector<std::size_t> &factor_dims() const {
        return dims_;
    }
    const std::vector<std::string> &labels() const {
        return labels_;
    }
    const std::vector<bool> &classical_flags() const {
        return classical_;
    }
    std::size_t num_factors() const {
        return dims_.size();
    }

    Matrix reduced(const FactorSet &keep) const {
        return partial_trace(state_.matrix(), dims_, keep);
    }

   private:
    bool factor_is_diagonal(std::size_t k) const {
        std::size_t stride = 1;
        for (std::size_t f = k + 1; f < dims_.size(); ++f) {
            stride *= dims_[f];
        }
        const Matrix &m = state_.matrix();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const std::size_t ik = (static_cast<std::size_t>(i) / stride) % dims_[k];
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                const std::size_t jk = (static_cast<std::size_t>(j) / stride) % dims_[k];
                if (ik != jk && std::abs(m(i, j)) > kTol) {
                    return false;
                }
            }
        }
        return true;
    }

    DensityOperator state_;
    std::vector<std::size_t> dims_;
    std::vector<std::string> labels_;
    std::vector<bool> classical_;
};

namespace detail {

inline FactorSet set_union(const std::vector<const FactorSet *> &sets, std::size_t nfactors) {
    std::vector<bool> seen(nfactors, false);
    FactorSet u;
    for (const FactorSet *s : sets) {
        for (std::size_t f : *s) {
            if (f >= nfactors) {
                throw Error(ErrorKind::DimMismatch, "factor index out of range");
            }
            if (seen[f]) {
                throw Error(ErrorKind::OverlappingSets, "factor sets must be disjoint");
            }
            seen[f] = true;
            u.push_back(f);
        }
    }
    std::sort(u.begin(), u.end());
    return u;
}

}  // namespace detail

inline double subsystem_entropy(const MultipartiteState &m, const FactorSet &j) {
    FactorSet u = detail::set_union({&j}, m.num_factors());
    if (u.empty()) {
        return 0.0;
    }
    return von_neumann_entropy(m.reduced(u));
}

/// H(J|K) = H(JK) - H(K).
inline double conditional_entropy(const MultipartiteState &m, const FactorSet &j, const FactorSet &k) {
    FactorSet jk = detail::set_union({&j, &k}, m.num_factors());
    return subsystem_entropy(m, jk) - subsystem_entropy(m, k);
}

/// I(J ^ K) = H(J) + H(K) - H(JK).
inline double mutual_information(const MultipartiteState &m, const FactorSet &j, const FactorSet &k) {
    FactorSet jk = detail::set_union({&j, &k}, m.num_factors());
    return subsystem_entropy(m, j) + subsystem_entropy(m, k) - subsystem_entropy(m, jk);
}

/// I(J ^ K | L) = H(JL) + H(KL) - H(JKL) - H(L).
inline double conditional_mutual_information(const MultipartiteState &m, const FactorSet &j, const FactorSet &k,
                                             const FactorSet &l) {
    FactorSet jkl = detail::set_union({&j, &k, &l}, m.num_factors());
    FactorSet jl = detail::set_union({&j, &l}, m.num_factors());
    FactorSet kl = detail::set_union({&k, &l}, m.num_factors());
    return subsystem_entropy(m, jl) + subsystem_entropy(m, kl) - subsystem_entropy(m, jkl) - subsystem_entropy(m, l);
}

/// Finite classical-quantum channel x -> W_x.
class CqChannel {
   public:
    CqChannel() = default;

    explicit CqChannel(std::vector<DensityOperator> outputs, std::vector<std::string> alphabet = {})
        : outputs_(std::move(outputs)), alphabet_(std::move(alphabet)) {
        if (outputs_.empty()) {
            throw Error(ErrorKind::BadShape, "channel needs at least one input letter");
        }
        for (const auto &w : outputs_) {
            if (w.dim() != outputs_[0].dim()) {
                throw Error(ErrorKind::DimMismatch, "channel outputs differ in dimension");
            }
        }
        if (alphabet_.empty()) {
            for (std::size_t x = 0; x < outputs_.size(); ++x) {
                alphabet_.push_back(std::to_string(x));
            }
        }
        if (alphabet_.size() != outputs_.size()) {
            throw Error(ErrorKind::SizeMismatch, "one label per input letter");
        }
    }

    std::size_t size() const {
        return outputs_.size();
    }
    std::size_t dim() const {
        return outputs_.at(0).dim();
    }
    const DensityOperator &operator[](std::size_t x) const {
        return outputs_.at(x);
    }
    const std::vector<DensityOperator> &outputs() const {
        return outputs_;
    }
    const std::vector<std::string> &alphabet() const {
        return alphabet_;
    }

   private:
    std::vector<DensityOperator> outputs_;
    std::vector<std::string> alphabet_;
};

/// Output state PW = sum_x P(x) W_x.
inline Matrix output_average(const Distribution &p, const CqChannel &w) {
    require_distribution(p, w.size(), "input distribution");
    const auto d = static_cast<Eigen::Index>(w.dim());
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < w.size(); ++x) {
        m += p[x] * w[x].matrix();
    }
    return m;
}

/// H(W|P) = sum_x P(x) H(W_x).
inline double conditional_output_entropy(const Distribution &p, const CqChannel &w) {
    require_distribution(p, w.size(), "input distribution");
    double h = 0;
    for (std::size_t x = 0; x < w.size(); ++x) {
        if (p[x] > 0) {
            h += p[x] * von_neumann_entropy(w[x]);
        }
    }
    return h;
}

inline double holevo_information(const Distribution &p, const CqChannel &w) {
    const double v = von_neumann_entropy(output_average(p, w)) - conditional_output_entropy(p, w);
    return std::max(v, 0.0);
}

/// gamma = sum_x P(x) [x] (x) W_x with the input register flagged classical.
inline MultipartiteState channel_state(const Distribution &p, const CqChannel &w) {
    require_distribution(p, w.size(), "input distribution");
    const auto a = static_cast<Eigen::Index>(w.size());
    const auto d = static_cast<Eigen::Index>(w.dim());
    Matrix g = Matrix::Zero(a * d, a * d);
    for (Eigen::Index x = 0; x < a; ++x) {
        g.block(x * d, x * d, d, d) = p[static_cast<std::size_t>(x)] * w[static_cast<std::size_t>(x)].matrix();
    }
    return MultipartiteState(DensityOperator::trusted(g, {w.size(), w.dim()}), {w.size(), w.dim()}, {"X", "Y"}, {true, false});
}

/// Joint state of (system, reference) after the channel acts on the system half of the purification.
inline Matrix channel_reference_state(const DensityOperator &rho, const KrausChannel &ch) {
    if (ch.dim_in() != rho.dim()) {
        throw Error(ErrorKind::DimMismatch, "channel input dimension does not match the state");
    }
    Matrix s = matrix_sqrt(rho.matrix());
    const auto dout = static_cast<Eigen::Index>(ch.dim_out());
    const auto d = s.rows();
    Matrix out = Matrix::Zero(dout * d, dout * d);
    for (const auto &k : ch.ops()) {
        Matrix c = k * s;
        Vector v(dout * d);
        for (Eigen::Index a = 0; a < dout; ++a) {
            for (Eigen::Index b = 0; b < d; ++b) {
                v(a * d + b) = c(a, b);
            }
        }
        out.noalias() += v * v.adjoint();
    }
    return out;
}

inline double entropy_exchange(const DensityOperator &rho, const KrausChannel &ch) {
    if (ch.dim_in() != rho.dim() || ch.dim_out() != rho.dim()) {
        throw Error(ErrorKind::DimMismatch, "entropy exchange needs an endo-channel on the state space");
    }
    return von_neumann_entropy(channel_reference_state(rho, ch));
}

inline double coherent_information(const DensityOperator &rho, const KrausChannel &ch) {
    return von_neumann_entropy(apply_channel(ch, rho.matrix())) - entropy_exchange(rho, ch);
}

/// Mutual information of a classical joint distribution given as a matrix p(x, y).
inline double classical_mutual_information(const Eigen::MatrixXd &joint) {
    Eigen::VectorXd px = joint.rowwise().sum();
    Eigen::RowVectorXd py = joint.colwise().sum();
    double i = 0;
    for (Eigen::Index x = 0; x < joint.rows(); ++x) {
        for (Eigen::Index y = 0; y < joint.cols(); ++y) {
            const double q = joint(x, y);
            if (q > 0) {
                i += q * std::log2(q / (px(x) * py(y)));
            }
        }
    }
    return std::max(i, 0.0);
}

/// Joint distribution P(x) Tr(W_x E_y) induced by measuring the channel outputs.
inline Eigen::MatrixXd induced_joint_distribution(const Distribution &p, const CqChannel &w, const Povm &e) {
    require_distribution(p, w.size(), "input distribution");
    if (e.dim() != w.dim()) {
        throw Error(ErrorKind::DimMismatch, "measurement and channel outputs differ in dimension");
    }
    Eigen::MatrixXd j(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(e.size()));
    for (std::size_t x = 0; x < w.size(); ++x) {
        for (std::size_t y = 0; y < e.size(); ++y) {
            j(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
                std::max(0.0, p[x] * trace_of_product(w[x].matrix(), e.elements()[y]).real());
        }
    }
    return j;
}

/// Smallest H(A|B) seen over random separable two-qubit-like states sum_k p_k a_k (x) b_k.
/// Exploratory only: the nonnegativity for separable states is not asserted anywhere.
inline double separable_conditional_entropy_probe(std::size_t trials, std::size_t da, std::size_t db, Rng &rng) {
    double worst = kInfinity;
    std::uniform_int_distribution<std::size_t> terms(1, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t k = terms(rng);
        std::vector<double> w(k);
        double total = 0;
        for (auto &x : w) {
            x = u(rng) + 1e-3;
            total += x;
        }
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(da * db), static_cast<Eigen::Index>(da * db));
        for (std::size_t i = 0; i < k; ++i) {
            m += (w[i] / total) * tensor_product(random_density(da, 1 + rng() % da, rng).matrix(),
                                                 random_density(db, 1 + rng() % db, rng).matrix());
        }
        MultipartiteState s(DensityOperator::trusted(m, {da, db}), {da, db});
        worst = std::min(worst, conditional_entropy(s, {0}, {1}));
    }
    return worst;
}

}  // namespace qshannon

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

#include <random>
#include <utility>
#include <vector>

#include "qshannon/linalg.hpp"

namespace qshannon {

using Rng = std::mt19937_64;

class DensityOperator {
   public:
    DensityOperator() : m_(Matrix::Identity(1, 1)), factor_dims_{1} {
    }

    explicit DensityOperator(const Matrix &m, std::vector<std::size_t> factor_dims = {}) {
        require_hermitian(m, "density operator");
        if (std::abs(m.trace().real() - 1.0) > kTol) {
            throw Error(ErrorKind::DomainError, "density operator must have unit trace");
        }
        m_ = (m + m.adjoint()) * 0.5;
        if (min_eigenvalue(m_) < -kTol) {
            throw Error(ErrorKind::NotPSD, "density operator is not positive semidefinite");
        }
        set_factor_dims(std::move(factor_dims));
    }

    /// Skips the positivity check; for operators that are states by construction.
    static DensityOperator trusted(Matrix m, std::vector<std::size_t> factor_dims = {}) {
        DensityOperator r;
        r.m_ = std::move(m);
        r.set_factor_dims(std::move(factor_dims));
        return r;
    }

    static DensityOperator pure(const Vector &v) {
        Vector u = v / v.norm();
        return trusted(u * u.adjoint());
    }

    static DensityOperator diagonal(const std::vector<double> &p) {
        RealVector v(static_cast<Eigen::Index>(p.size()));
        for (std::size_t i = 0; i < p.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = p[i];
        }
        return DensityOperator(Matrix(v.cast<cdouble>().asDiagonal()));
    }

    static DensityOperator maximally_mixed(std::size_t d) {
        return trusted(Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) / static_cast<double>(d));
    }

    const Matrix &matrix() const {
        return m_;
    }
    std::size_t dim() const {
        return static_cast<std::size_t>(m_.rows());
    }
    const std::vector<std::size_t> &factor_dims() const {
        return factor_dims_;
    }

   private:
    void set_factor_dims(std::vector<std::size_t> dims) {
        if (dims.empty()) {
            dims = {static_cast<std::size_t>(m_.rows())};
        }
        if (product_of(dims) != static_cast<std::size_t>(m_.rows())) {
            throw Error(ErrorKind::DimMismatch, "factor dimensions do not match the state");
        }
        factor_dims_ = std::move(dims);
    }

    Matrix m_;
    std::vector<std::size_t> factor_dims_;
};

inline DensityOperator tensor_product(const DensityOperator &a, const DensityOperator &b) {
    std::vector<std::size_t> dims = a.factor_dims();
    dims.insert(dims.end(), b.factor_dims().begin(), b.factor_dims().end());
    return DensityOperator::trusted(tensor_product(a.matrix(), b.matrix()), dims);
}

class KrausChannel {
   public:
    KrausChannel() = default;

    explicit KrausChannel(std::vector<Matrix> ops) : ops_(std::move(ops)) {
        if (ops_.empty()) {
            throw Error(ErrorKind::BadShape, "channel needs at least one Kraus operator");
        }
        const Eigen::Index din = ops_[0].cols();
        const Eigen::Index dout = ops_[0].rows();
        Matrix s = Matrix::Zero(din, din);
        for (const auto &k : ops_) {
            if (k.cols() != din || k.rows() != dout) {
                throw Error(ErrorKind::DimMismatch, "Kraus operators differ in shape");
            }
            s += k.adjoint() * k;
        }
        if ((s - Matrix::Identity(din, din)).cwiseAbs().maxCoeff() > kCompletenessTol) {
            throw Error(ErrorKind::DomainError, "Kraus operators are not trace preserving");
        }
    }

    static KrausChannel identity(std::size_t d) {
        return KrausChannel({Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))});
    }

    static KrausChannel unitary(const Matrix &u) {
        return KrausChannel({u});
    }

    /// Kraus operators E_ij / sqrt(d) over all matrix units; maps every state to 1/d.
    static KrausChannel fully_depolarizing(std::size_t d) {
        std::vector<Matrix> ops;
        const auto dd = static_cast<Eigen::Index>(d);
        for (Eigen::Index i = 0; i < dd; ++i) {
            for (Eigen::Index j = 0; j < dd; ++j) {
                Matrix e = Matrix::Zero(dd, dd);
                e(i, j) = 1.0 / std::sqrt(static_cast<double>(d));
                ops.push_back(e);
            }
        }
        return KrausChannel(std::move(ops));
    }

    const std::vector<Matrix> &ops() const {
        return ops_;
    }
    std::size_t dim_in() const {
        return static_cast<std::size_t>(ops_.at(0).cols());
    }
    std::size_t dim_out() const {
        return static_cast<std::size_t>(ops_.at(0).rows());
    }

   private:
    std::vector<Matrix> ops_;
};

inline KrausChannel tensor_product(const KrausChannel &a, const KrausChannel &b) {
    std::vector<Matrix> ops;
    for (const auto &x : a.ops()) {
        for (const auto &y : b.ops()) {
            ops.push_back(tensor_product(x, y));
        }
    }
    return KrausChannel(std::move(ops));
}

inline KrausChannel compose(const KrausChannel &second, const KrausChannel &first) {
    if (first.dim_out() != second.dim_in()) {
        throw Error(ErrorKind::DimMismatch, "channel composition dimension mismatch");
    }
    std::vector<Matrix> ops;
    for (const auto &b : second.ops()) {
        for (const auto &a : first.ops()) {
            ops.push_back(b * a);
        }
    }
    return KrausChannel(std::move(ops));
}

inline void require_povm_elements(const std::vector<HermitianMatrix> &elements) {
    if (elements.empty()) {
        throw Error(ErrorKind::BadShape, "measurement needs at least one element");
    }
    for (const auto &e : elements) {
        if (e.rows() != elements[0].rows() || e.cols() != elements[0].cols()) {
            throw Error(ErrorKind::DimMismatch, "measurement elements differ in dimension");
        }
        require_psd(e, "measurement element");
    }
}

inline Matrix sum_of(const std::vector<HermitianMatrix> &elements) {
    Matrix s = Matrix::Zero(elements.at(0).rows(), elements.at(0).cols());
    for (const auto &e : elements) {
        s += e;
    }
    return s;
}

class Povm {
   public:
    Povm() = default;
    explicit Povm(std::vector<HermitianMatrix> elements) : elements_(std::move(elements)) {
        require_povm_elements(elements_);
        const Eigen::Index d = elements_[0].rows();
        if ((sum_of(elements_) - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kCompletenessTol) {
            throw Error(ErrorKind::DomainError, "measurement elements do not sum to the identity");
        }
    }
    const std::vector<HermitianMatrix> &elements() const {
        return elements_;
    }
    std::size_t size() const {
        return elements_.size();
    }
    std::size_t dim() const {
        return static_cast<std::size_t>(elements_.at(0).rows());
    }

   private:
    std::vector<HermitianMatrix> elements_;
};

/// Elements with sum at most the identity. completed() appends the remainder
/// as the last element, at index size().
class SubPovm {
   public:
    SubPovm() = default;
    explicit SubPovm(std::vector<HermitianMatrix> elements) : elements_(std::move(elements)) {
        require_povm_elements(elements_);
        const Eigen::Index d = elements_[0].rows();
        if (min_eigenvalue(Matrix::Identity(d, d) - sum_of(elements_)) < -kCompletenessTol) {
            throw Error(ErrorKind::DomainError, "measurement elements exceed the identity");
        }
    }
    const std::vector<HermitianMatrix> &elements() const {
        return elements_;
    }
    std::size_t size() const {
        return elements_.size();
    }
    Povm completed() const {
        std::vector<HermitianMatrix> e = elements_;
        const Eigen::Index d = e[0].rows();
        Matrix rest = Matrix::Identity(d, d) - sum_of(e);
        e.push_back((rest + rest.adjoint()) * 0.5);
        return Povm(std::move(e));
    }

   private:
    std::vector<HermitianMatrix> elements_;
};

struct Ensemble {
    std::vector<DensityOperator> states;
    std::vector<double> probs;

    Ensemble() = default;
    Ensemble(std::vector<DensityOperator> s, std::vector<double> p) : states(std::move(s)), probs(std::move(p)) {
        if (states.size() != probs.size() || states.empty()) {
            throw Error(ErrorKind::SizeMismatch, "ensemble needs one probability per state");
        }
        double total = 0;
        for (double q : probs) {
            if (q < 0) {
                throw Error(ErrorKind::DomainError, "negative probability");
            }
            total += q;
        }
        if (std::abs(total - 1.0) > kTol) {
            throw Error(ErrorKind::DomainError, "probabilities must sum to one");
        }
        for (const auto &s : states) {
            if (s.dim() != states[0].dim()) {
                throw Error(ErrorKind::DimMismatch, "ensemble states differ in dimension");
            }
        }
    }

    std::size_t dim() const {
        return states.at(0).dim();
    }

    DensityOperator average() const {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
        for (std::size_t i = 0; i < states.size(); ++i) {
            m += probs[i] * states[i].matrix();
        }
        return DensityOperator::trusted(m, states[0].factor_dims());
    }

    bool all_pure() const {
        for (const auto &s : states) {
            RealVector ev = eigenvalues_hermitian(s.matrix());
            if (ev.size() > 1 && ev(1) > kRankTol) {
                return false;
            }
        }
        return true;
    }
};

/// Unit vector spanning the range of a rank-one state.
inline Vector pure_state_vector(const DensityOperator &rho) {
    Spectrum s = eig_hermitian(rho.matrix());
    if (s.values.size() > 1 && s.values(1) > kRankTol) {
        throw Error(ErrorKind::NotPure, "state is not pure");
    }
    return s.vectors.col(0);
}

inline double fidelity_pure(const DensityOperator &rho, const DensityOperator &sigma) {
    if (rho.dim() != sigma.dim()) {
        throw Error(ErrorKind::DimMismatch, "fidelity of states with different dimensions");
    }
    RealVector ev = eigenvalues_hermitian(rho.matrix());
    if (ev.size() > 1 && ev(1) > kRankTol) {
        throw Error(ErrorKind::NotPure, "first argument of fidelity_pure must be pure");
    }
    return std::clamp(trace_of_product(rho.matrix(), sigma.matrix()).real(), 0.0, 1.0);
}

inline double trace_distance(const DensityOperator &rho, const DensityOperator &sigma) {
    if (rho.dim() != sigma.dim()) {
        throw Error(ErrorKind::DimMismatch, "trace distance of states with different dimensions");
    }
    return 0.5 * trace_norm(rho.matrix() - sigma.matrix());
}

inline void require_effect(const HermitianMatrix &x) {
    require_hermitian(x, "operator");
    RealVector ev = eigenvalues_hermitian(x);
    if (ev.minCoeff() < -kTol || ev.maxCoeff() > 1.0 + kTol) {
        throw Error(ErrorKind::OperatorOutOfRange, "operator must satisfy 0 <= X <= 1");
    }
}

/// ||rho - sqrt(X) rho sqrt(X)||_1 for 0 <= X <= 1 with 1 - Tr(rho X) <= lambda.
inline double tender_residual(const DensityOperator &rho, const HermitianMatrix &x, double lambda) {
    if (x.rows() != static_cast<Eigen::Index>(rho.dim())) {
        throw Error(ErrorKind::DimMismatch, "operator and state differ in dimension");
    }
    require_effect(x);
    const double miss = 1.0 - trace_of_product(rho.matrix(), x).real();
    if (lambda > 1.0 + kTol || miss > lambda + kTol) {
        throw Error(ErrorKind::LambdaViolated, "need 1 - Tr(rho X) <= lambda <= 1");
    }
    Matrix r = matrix_sqrt(x);
    return trace_norm(rho.matrix() - r * rho.matrix() * r);
}

inline KrausChannel povm_interior(const Povm &povm) {
    std::vector<Matrix> ops;
    for (const auto &e : povm.elements()) {
        ops.push_back(matrix_sqrt(e));
    }
    return KrausChannel(std::move(ops));
}

/// Output factors are (outcome register, system): rho -> sum_b [b] (x) sqrt(D_b) rho sqrt(D_b).
inline KrausChannel povm_total(const Povm &povm) {
    const auto nb = static_cast<Eigen::Index>(povm.size());
    const auto d = static_cast<Eigen::Index>(povm.dim());
    std::vector<Matrix> ops;
    for (Eigen::Index b = 0; b < nb; ++b) {
        Matrix k = Matrix::Zero(nb * d, d);
        k.block(b * d, 0, d, d) = matrix_sqrt(povm.elements()[static_cast<std::size_t>(b)]);
        ops.push_back(k);
    }
    return KrausChannel(std::move(ops));
}

inline Matrix apply_channel(const KrausChannel &ch, const Matrix &m) {
    if (static_cast<std::size_t>(m.rows()) != ch.dim_in()) {
        throw Error(ErrorKind::DimMismatch, "channel input dimension does not match");
    }
    const auto dout = static_cast<Eigen::Index>(ch.dim_out());
    Matrix r = Matrix::Zero(dout, dout);
    for (const auto &k : ch.ops()) {
        r.noalias() += k * m * k.adjoint();
    }
    return r;
}

inline DensityOperator apply_channel(const KrausChannel &ch, const DensityOperator &rho) {
    Matrix r = apply_channel(ch, rho.matrix());
    return DensityOperator::trusted((r + r.adjoint()) * 0.5);
}

/// Adjoint (Heisenberg picture) action X -> sum K^dagger X K.
inline Matrix apply_adjoint(const KrausChannel &ch, const Matrix &x) {
    const auto din = static_cast<Eigen::Index>(ch.dim_in());
    Matrix r = Matrix::Zero(din, din);
    for (const auto &k : ch.ops()) {
        r.noalias() += k.adjoint() * x * k;
    }
    return r;
}

/// The vector (sqrt(rho) (x) 1) sum_i |i>|i>, which equals sum_j sqrt(q_j) |phi_j>|conj(phi_j)>
/// for any eigenbasis of rho. Factors are (system, reference).
inline Vector purification_vector(const DensityOperator &rho) {
    Matrix s = matrix_sqrt(rho.matrix());
    const auto d = s.rows();
    Vector v(d * d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            v(a * d + b) = s(a, b);
        }
    }
    return v;
}

inline DensityOperator purify(const DensityOperator &rho) {
    Vector v = purification_vector(rho);
    return DensityOperator::trusted(v * v.adjoint(), {rho.dim(), rho.dim()});
}

/// <psi|(phi (x) id)(psi psi^dagger)|psi> for the purification above.
inline double entanglement_fidelity(const DensityOperator &rho, const KrausChannel &ch) {
    if (ch.dim_in() != rho.dim() || ch.dim_out() != rho.dim()) {
        throw Error(ErrorKind::DimMismatch, "entanglement fidelity needs an endo-channel on the state space");
    }
    // With psi written as a d x d coefficient matrix S, (K (x) 1) psi has coefficients K S.
    Matrix s = matrix_sqrt(rho.matrix());
    double f = 0;
    for (const auto &k : ch.ops()) {
        f += std::norm((s.adjoint() * k * s).trace());
    }
    return std::clamp(f, 0.0, 1.0);
}

/// Stacked Kraus blocks; output factors are (environment, system).
inline Matrix stinespring_isometry(const KrausChannel &ch) {
    const auto dout = static_cast<Eigen::Index>(ch.dim_out());
    const auto din = static_cast<Eigen::Index>(ch.dim_in());
    const auto k = static_cast<Eigen::Index>(ch.ops().size());
    Matrix v(k * dout, din);
    for (Eigen::Index i = 0; i < k; ++i) {
        v.block(i * dout, 0, dout, din) = ch.ops()[static_cast<std::size_t>(i)];
    }
    return v;
}

// Random instances. All samplers draw from the supplied generator only.

inline Matrix random_gaussian_matrix(std::size_t rows, std::size_t cols, Rng &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double re = g(rng);
            const double im = g(rng);
            m(i, j) = cdouble(re, im);
        }
    }
    return m;
}

inline Vector random_pure_vector(std::size_t dim, Rng &rng) {
    Matrix g = random_gaussian_matrix(dim, 1, rng);
    Vector v = g.col(0);
    return v / v.norm();
}

inline DensityOperator random_pure(std::size_t dim, Rng &rng) {
    return DensityOperator::pure(random_pure_vector(dim, rng));
}

/// Partial trace of a Gaussian random pure state on dim x rank.
inline DensityOperator random_density(std::size_t dim, std::size_t rank, Rng &rng) {
    if (dim == 0 || rank == 0 || rank > dim) {
        throw Error(ErrorKind::BadShape, "need 1 <= rank <= dim");
    }
    Matrix g = random_gaussian_matrix(dim, rank, rng);
    Matrix m = g * g.adjoint();
    m /= m.trace().real();
    return DensityOperator::trusted((m + m.adjoint()) * 0.5);
}

inline DensityOperator random_density(std::size_t dim, std::size_t rank, std::uint64_t seed) {
    Rng rng(seed);
    return random_density(dim, rank, rng);
}

inline Matrix random_isometry(std::size_t rows, std::size_t cols, Rng &rng) {
    if (rows < cols || cols == 0) {
        throw Error(ErrorKind::BadShape, "isometry needs rows >= cols >= 1");
    }
    Matrix g = random_gaussian_matrix(rows, cols, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    // Fix column phases so the distribution does not depend on QR sign conventions.
    Matrix r = qr.matrixQR().topRows(static_cast<Eigen::Index>(cols)).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const cdouble d = r(j, j);
        if (std::abs(d) > 0) {
            q.col(j) *= d / std::abs(d);
        }
    }
    return q;
}

inline Matrix random_unitary(std::size_t dim, Rng &rng) {
    return random_isometry(dim, dim, rng);
}

/// QR-orthonormalized Gaussian isometry sliced into kraus_count blocks.
inline KrausChannel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t kraus_count, Rng &rng) {
    if (dim_in == 0 || dim_out == 0 || kraus_count == 0 || dim_out * kraus_count < dim_in) {
        throw Error(ErrorKind::BadShape, "need dim_out * kraus_count >= dim_in >= 1");
    }
    Matrix v = random_isometry(dim_out * kraus_count, dim_in, rng);
    std::vector<Matrix> ops;
    const auto dout = static_cast<Eigen::Index>(dim_out);
    for (std::size_t k = 0; k < kraus_count; ++k) {
        ops.push_back(v.block(static_cast<Eigen::Index>(k) * dout, 0, dout, static_cast<Eigen::Index>(dim_in)));
    }
    return KrausChannel(std::move(ops));
}

inline KrausChannel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t kraus_count, std::uint64_t seed) {
    Rng rng(seed);
    return random_channel(dim_in, dim_out, kraus_count, rng);
}

inline Povm random_povm(std::size_t dim, std::size_t outcomes, Rng &rng) {
    if (dim == 0 || outcomes == 0) {
        throw Error(ErrorKind::BadShape, "need dim >= 1 and outcomes >= 1");
    }
    std::vector<Matrix> g;
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix s = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < outcomes; ++i) {
        Matrix a = random_gaussian_matrix(dim, dim, rng);
        g.push_back(a * a.adjoint());
        s += g.back();
    }
    Matrix w = spectral_function(s, [](double x) { return 1.0 / std::sqrt(x); });
    std::vector<HermitianMatrix> e;
    for (auto &gi : g) {
        Matrix m = w * gi * w;
        e.push_back((m + m.adjoint()) * 0.5);
    }
    // Absorb rounding so the elements sum to the identity to machine precision.
    Matrix rest = Matrix::Identity(d, d) - sum_of(e);
    e.back() += (rest + rest.adjoint()) * 0.5;
    return Povm(std::move(e));
}

inline Povm random_povm(std::size_t dim, std::size_t outcomes, std::uint64_t seed) {
    Rng rng(seed);
    return random_povm(dim, outcomes, rng);
}

/// Rank-r projector onto a Haar-random subspace.
inline HermitianMatrix random_projector(std::size_t dim, std::size_t rank, Rng &rng) {
    if (rank == 0) {
        return Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    }
    Matrix v = random_isometry(dim, rank, rng);
    return v * v.adjoint();
}

inline Povm projective_measurement(const Matrix &basis) {
    std::vector<HermitianMatrix> e;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        e.push_back(basis.col(j) * basis.col(j).adjoint());
    }
    return Povm(std::move(e));
}

}  // namespace qshannon

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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <vector>

#include "qshannon/error.hpp"

namespace qshannon {

using cdouble = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Complex square matrices that are expected to be Hermitian. Checks are
/// done by the functions that require the property.
using HermitianMatrix = Matrix;

/// Sorted spectral decomposition M = V diag(values) V^dagger.
struct Spectrum {
    RealVector values;  // descending
    Matrix vectors;     // orthonormal columns

    std::size_t dim() const {
        return static_cast<std::size_t>(values.size());
    }
    Matrix reconstruct() const {
        return vectors * values.cast<cdouble>().asDiagonal() * vectors.adjoint();
    }
};

inline double log2_safe(double x) {
    return std::log2(x);
}

/// x log2 x with the convention 0 log 0 = 0.
inline double xlogx(double x) {
    return x <= 0.0 ? 0.0 : x * std::log2(x);
}

inline double hermitian_defect(const Matrix &m) {
    if (m.rows() != m.cols()) {
        return kInfinity;
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_square(const Matrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorKind::DimMismatch, std::string(what) + " must be a nonempty square matrix");
    }
}

inline void require_hermitian(const Matrix &m, const char *what = "matrix") {
    require_square(m, what);
    if (hermitian_defect(m) > kTol) {
        throw Error(ErrorKind::NonHermitian, std::string(what) + " is not Hermitian");
    }
}

inline Spectrum eig_hermitian(const Matrix &m) {
    require_hermitian(m);
    Matrix h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::DomainError, "eigensolver failed");
    }
    const Eigen::Index d = h.rows();
    Spectrum s;
    s.values.resize(d);
    s.vectors.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        s.values(k) = solver.eigenvalues()(d - 1 - k);
        s.vectors.col(k) = solver.eigenvectors().col(d - 1 - k);
    }
#ifndef NDEBUG
    if ((s.reconstruct() - h).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
        throw Error(ErrorKind::DomainError, "spectrum does not reconstruct its input");
    }
#endif
    return s;
}

inline RealVector eigenvalues_hermitian(const Matrix &m) {
    require_hermitian(m);
    Matrix h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    RealVector v = solver.eigenvalues().reverse();
    return v;
}

inline Matrix from_spectrum(const Matrix &vectors, const RealVector &values) {
    return vectors * values.cast<cdouble>().asDiagonal() * vectors.adjoint();
}

/// Applies f to every eigenvalue. Throws DomainError when f returns a
/// non-finite value.
inline HermitianMatrix spectral_function(const HermitianMatrix &m, const std::function<double(double)> &f) {
    Spectrum s = eig_hermitian(m);
    RealVector fv(s.values.size());
    for (Eigen::Index k = 0; k < fv.size(); ++k) {
        fv(k) = f(s.values(k));
        if (!std::isfinite(fv(k))) {
            throw Error(ErrorKind::DomainError, "function undefined on the spectrum");
        }
    }
    return from_spectrum(s.vectors, fv);
}

inline HermitianMatrix matrix_sqrt(const HermitianMatrix &m) {
    return spectral_function(m, [](double x) {
        if (x < -kTol) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return std::sqrt(std::max(x, 0.0));
    });
}

/// Base-2 logarithm on the support; the kernel maps to zero.
inline HermitianMatrix matrix_log2(const HermitianMatrix &m) {
    return spectral_function(m, [](double x) {
        if (x < -kTol) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return x <= kRankTol ? 0.0 : std::log2(x);
    });
}

inline Matrix tensor_product(const Matrix &a, const Matrix &b) {
    Matrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return r;
}

inline Matrix tensor_product(const std::vector<Matrix> &factors) {
    if (factors.empty()) {
        return Matrix::Identity(1, 1);
    }
    Matrix r = factors[0];
    for (std::size_t k = 1; k < factors.size(); ++k) {
        r = tensor_product(r, factors[k]);
    }
    return r;
}

inline Vector tensor_product(const Vector &a, const Vector &b) {
    Vector r(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        r.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return r;
}

inline std::size_t product_of(const std::vector<std::size_t> &dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

namespace detail {

// Offsets of all multi-indices over the factors in `which`, in row-major
// order of those factors, inside the full row-major index space.
inline std::vector<std::size_t> subsystem_offsets(const std::vector<std::size_t> &dims,
                                                  const std::vector<std::size_t> &which) {
    std::vector<std::size_t> strides(dims.size());
    std::size_t s = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
        strides[k] = s;
        s *= dims[k];
    }
    std::vector<std::size_t> offsets{0};
    for (std::size_t f : which) {
        std::vector<std::size_t> next;
        next.reserve(offsets.size() * dims[f]);
        for (std::size_t o : offsets) {
            for (std::size_t i = 0; i < dims[f]; ++i) {
                next.push_back(o + i * strides[f]);
            }
        }
        offsets.swap(next);
    }
    return offsets;
}

inline std::vector<std::size_t> normalized_subset(const std::vector<std::size_t> &keep, std::size_t nfactors) {
    std::vector<std::size_t> k = keep;
    std::sort(k.begin(), k.end());
    if (std::adjacent_find(k.begin(), k.end()) != k.end()) {
        throw Error(ErrorKind::DimMismatch, "repeated factor index");
    }
    for (std::size_t f : k) {
        if (f >= nfactors) {
            throw Error(ErrorKind::DimMismatch, "factor index out of range");
        }
    }
    return k;
}

}  // namespace detail

/// Reduced matrix on the factors in `keep` (kept in ascending order).
inline Matrix partial_trace(const Matrix &m, const std::vector<std::size_t> &factor_dims,
                            const std::vector<std::size_t> &keep) {
    require_square(m, "partial_trace input");
    if (product_of(factor_dims) != static_cast<std::size_t>(m.rows())) {
        throw Error(ErrorKind::DimMismatch, "factor dimensions do not match the matrix");
    }
    std::vector<std::size_t> k = detail::normalized_subset(keep, factor_dims.size());
    std::vector<std::size_t> traced;
    for (std::size_t f = 0; f < factor_dims.size(); ++f) {
        if (!std::binary_search(k.begin(), k.end(), f)) {
            traced.push_back(f);
        }
    }
    auto ko = detail::subsystem_offsets(factor_dims, k);
    auto to = detail::subsystem_offsets(factor_dims, traced);
    const auto dk = static_cast<Eigen::Index>(ko.size());
    Matrix r = Matrix::Zero(dk, dk);
    for (Eigen::Index a = 0; a < dk; ++a) {
        for (Eigen::Index b = 0; b < dk; ++b) {
            cdouble acc = 0;
            for (std::size_t t : to) {
                acc += m(static_cast<Eigen::Index>(ko[a] + t), static_cast<Eigen::Index>(ko[b] + t));
            }
            r(a, b) = acc;
        }
    }
    return r;
}

/// Reorders tensor factors of a vector: result factor k is input factor perm[k].
inline Vector permute_factors(const Vector &v, const std::vector<std::size_t> &dims, const std::vector<std::size_t> &perm) {
    std::vector<std::size_t> out_dims;
    for (std::size_t p : perm) {
        out_dims.push_back(dims[p]);
    }
    auto offsets = detail::subsystem_offsets(dims, perm);
    Vector r(v.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        r(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(offsets[i]));
    }
    return r;
}

inline double trace_norm(const HermitianMatrix &m) {
    return eigenvalues_hermitian(m).cwiseAbs().sum();
}

inline double operator_norm(const HermitianMatrix &m) {
    return eigenvalues_hermitian(m).cwiseAbs().maxCoeff();
}

inline double min_eigenvalue(const HermitianMatrix &m) {
    return eigenvalues_hermitian(m).minCoeff();
}

inline bool is_psd(const HermitianMatrix &m, double tol = kTol) {
    return hermitian_defect(m) <= tol && min_eigenvalue(m) >= -tol;
}

inline void require_psd(const HermitianMatrix &m, const char *what = "matrix") {
    require_hermitian(m, what);
    if (min_eigenvalue(m) < -kTol) {
        throw Error(ErrorKind::NotPSD, std::string(what) + " is not positive semidefinite");
    }
}

/// Orthonormal basis (columns) of the span of eigenvectors with eigenvalue above kRankTol.
inline Matrix support_basis(const HermitianMatrix &m) {
    require_psd(m, "support argument");
    Spectrum s = eig_hermitian(m);
    Eigen::Index r = 0;
    while (r < s.values.size() && s.values(r) > kRankTol) {
        ++r;
    }
    return s.vectors.leftCols(r);
}

inline HermitianMatrix support_projector(const HermitianMatrix &m) {
    Matrix b = support_basis(m);
    return b * b.adjoint();
}

inline std::size_t rank_of(const HermitianMatrix &m) {
    return static_cast<std::size_t>(support_basis(m).cols());
}

/// Projector onto the span of the columns of `cols` (numerical rank cutoff kRankTol on singular values squared).
inline Matrix column_span_basis(const Matrix &cols) {
    if (cols.cols() == 0) {
        return Matrix(cols.rows(), 0);
    }
    Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
    Eigen::Index r = 0;
    const double top = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    while (r < svd.singularValues().size() && svd.singularValues()(r) > std::max(1e-7, 1e-9 * top)) {
        ++r;
    }
    return svd.matrixU().leftCols(r);
}

inline HermitianMatrix least_common_support(const std::vector<HermitianMatrix> &ms) {
    if (ms.empty()) {
        throw Error(ErrorKind::DimMismatch, "least_common_support needs at least one operator");
    }
    const Eigen::Index d = ms[0].rows();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto &m : ms) {
        if (m.rows() != d || m.cols() != d) {
            throw Error(ErrorKind::DimMismatch, "operators differ in dimension");
        }
        sum += support_projector(m);
    }
    return support_projector(sum);
}

inline bool is_projector(const HermitianMatrix &m, double tol = kTol) {
    return hermitian_defect(m) <= tol && (m * m - m).cwiseAbs().maxCoeff() <= tol;
}

inline double real_trace(const Matrix &m) {
    return m.trace().real();
}

/// Tr(a b) without forming the product.
inline cdouble trace_of_product(const Matrix &a, const Matrix &b) {
    return (a.transpose().array() * b.array()).sum();
}

/// (A_1 (x) ... (x) A_n) applied to every column, one tensor axis at a time.
/// The A_k are square of the factor dimensions.
inline Matrix apply_product(const std::vector<Matrix> &ops, const Matrix &cols) {
    std::vector<std::size_t> dims;
    for (const auto &a : ops) {
        require_square(a, "factor operator");
        dims.push_back(static_cast<std::size_t>(a.rows()));
    }
    if (product_of(dims) != static_cast<std::size_t>(cols.rows())) {
        throw Error(ErrorKind::DimMismatch, "factor operators do not match the vector length");
    }
    Matrix cur = cols;
    std::size_t inner = static_cast<std::size_t>(cols.rows());
    std::size_t outer = 1;
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const std::size_t dk = dims[k];
        inner /= dk;
        if (!ops[k].isIdentity(0.0)) {
            Matrix next = Matrix::Zero(cur.rows(), cur.cols());
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t a = 0; a < dk; ++a) {
                    for (std::size_t b = 0; b < dk; ++b) {
                        const cdouble c = ops[k](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                        if (c == cdouble(0.0)) {
                            continue;
                        }
                        const auto ra = static_cast<Eigen::Index>((o * dk + a) * inner);
                        const auto rb = static_cast<Eigen::Index>((o * dk + b) * inner);
                        next.middleRows(ra, static_cast<Eigen::Index>(inner)) += c * cur.middleRows(rb, static_cast<Eigen::Index>(inner));
                    }
                }
            }
            cur.swap(next);
        }
        outer *= dk;
    }
    return cur;
}

}  // namespace qshannon

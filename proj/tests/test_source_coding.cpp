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

#include <gtest/gtest.h>

#include <map>

#include "oracles.hpp"
#include "qshannon/json_io.hpp"
#include "qshannon/source_coding.hpp"

using namespace qshannon;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

struct DenseFidelities {
    double f_bar = 0;
    double d_bar = 0;
    double f_e = 0;
};

// Direct evaluation of decoder o encoder on every source word.
DenseFidelities dense_oracle(const CompressionScheme &scheme, const Ensemble &ens) {
    const std::size_t n = scheme.n();
    const KrausChannel dec = scheme.decoder();
    const KrausChannel enc = scheme.encoder();
    std::vector<Matrix> kraus;
    for (const auto &d : dec.ops()) {
        for (const auto &e : enc.ops()) {
            kraus.push_back(d * e);
        }
    }
    auto apply = [&](const Matrix &m) {
        Matrix out = Matrix::Zero(m.rows(), m.cols());
        for (const auto &k : kraus) {
            out += k * m * k.adjoint();
        }
        return out;
    };
    DenseFidelities r;
    const std::size_t a = ens.states.size();
    std::size_t words = 1;
    for (std::size_t i = 0; i < n; ++i) {
        words *= a;
    }
    for (std::size_t w = 0; w < words; ++w) {
        std::size_t rem = w;
        Matrix psi = Matrix::Identity(1, 1);
        double p = 1;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t x = rem % a;
            rem /= a;
            psi = oracle::kron(psi, ens.states[x].matrix());
            p *= ens.probs[x];
        }
        Matrix out = apply(psi);
        r.f_bar += p * (psi * out).trace().real();
        r.d_bar += p * 0.5 * oracle::trace_norm(psi - out);
    }
    Matrix rho = ens.average().matrix();
    Matrix big = Matrix::Identity(1, 1);
    for (std::size_t i = 0; i < n; ++i) {
        big = oracle::kron(big, rho);
    }
    for (const auto &k : kraus) {
        r.f_e += std::norm((big * k).trace());
    }
    return r;
}

Ensemble random_pure_ensemble(std::size_t members, Rng &rng) {
    std::vector<DensityOperator> s;
    std::vector<double> p;
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double total = 0;
    for (std::size_t i = 0; i < members; ++i) {
        s.push_back(random_pure(2, rng));
        p.push_back(u(rng));
        total += p.back();
    }
    for (auto &x : p) {
        x /= total;
    }
    return Ensemble(s, p);
}

Ensemble diag09() {
    return ensemble_from_json(load_json_file(std::string(QSHANNON_DATA_DIR) + "/source_diag09.json"));
}

}  // namespace

TEST(Schumacher, PureSourceHasRateZero) {
    Vector v = Vector::Zero(2);
    v(0) = v(1) = 1.0 / std::sqrt(2.0);
    auto pure = DensityOperator::pure(v);
    for (double alpha : {0.5, 4.0}) {
        CompressionScheme s = schumacher_scheme(pure.matrix(), 64, alpha);
        EXPECT_EQ(s.code_dim(), 1.0);
        EXPECT_EQ(s.rate(), 0.0);
        Ensemble e({pure}, {1.0});
        EXPECT_NEAR(scheme_fidelities(s, e).f_e, 1.0, 1e-12);
    }
}

TEST(Schumacher, EncoderTracePreserving) {
    CompressionScheme s = schumacher_scheme(diag2(0.7, 0.3), 4, 1.0);
    auto enc = s.encoder();
    Matrix sum = Matrix::Zero(16, 16);
    for (const auto &k : enc.ops()) {
        sum += k.adjoint() * k;
    }
    EXPECT_LT((sum - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Schumacher, ClosedFormsMatchDenseEvaluation) {
    Rng rng(400);
    for (int t = 0; t < 12; ++t) {
        Ensemble e = random_pure_ensemble(2 + static_cast<std::size_t>(t % 2), rng);
        const std::size_t n = 1 + static_cast<std::size_t>(t % 4);
        CompressionScheme s = schumacher_scheme(e.average().matrix(), n, 0.3 + 0.2 * (t % 3));
        SchemeFidelities lib = scheme_fidelities(s, e, EvalPath::Dense);
        DenseFidelities o = dense_oracle(s, e);
        EXPECT_NEAR(lib.f_bar, o.f_bar, 1e-9);
        EXPECT_NEAR(lib.d_bar, o.d_bar, 1e-9);
        EXPECT_NEAR(lib.f_e, o.f_e, 1e-9);
        EXPECT_NEAR(scheme_entanglement_fidelity(s, e.average().matrix()), o.f_e, 1e-9);
    }
}

TEST(Schumacher, SymbolicMatchesDenseOnDiagonalSource) {
    Ensemble e = diag09();
    for (std::size_t n : {2u, 4u, 6u}) {
        CompressionScheme s = schumacher_scheme(e.average().matrix(), n, 0.5);
        SchemeFidelities a = scheme_fidelities(s, e, EvalPath::Dense);
        SchemeFidelities b = scheme_fidelities(s, e, EvalPath::Symbolic);
        EXPECT_TRUE(b.symbolic);
        EXPECT_NEAR(a.f_bar, b.f_bar, 1e-10);
        EXPECT_NEAR(a.d_bar, b.d_bar, 1e-10);
        EXPECT_NEAR(a.f_e, b.f_e, 1e-10);
    }
}

TEST(Criteria, ChainOnRandomEnsembles) {
    Rng rng(401);
    for (int t = 0; t < 30; ++t) {
        Ensemble e = random_pure_ensemble(2 + static_cast<std::size_t>(t % 3), rng);
        const std::size_t n = 1 + static_cast<std::size_t>(t % 4);
        CompressionScheme s = schumacher_scheme(e.average().matrix(), n, 0.2 + 0.3 * (t % 4));
        SchemeFidelities f = scheme_fidelities(s, e);
        EXPECT_GE(f.f_bar, -1e-12);
        EXPECT_LE(f.f_bar, 1 + 1e-12);
        EXPECT_LE(f.d_bar * f.d_bar, 1.0 - f.f_bar + 1e-9);
        EXPECT_LE(1.0 - f.f_bar, f.d_bar + 1e-9);
        EXPECT_LE(1.0 - f.f_bar, 1.0 - f.f_e + 1e-9);
    }
}

TEST(Criteria, IdentitySchemeAndOrthogonalEnsemble) {
    // alpha large enough that every sequence is typical: identity scheme
    Ensemble e = diag09();
    CompressionScheme s = schumacher_scheme(e.average().matrix(), 3, 100.0);
    SchemeFidelities f = scheme_fidelities(s, e);
    EXPECT_NEAR(f.f_bar, 1.0, 1e-12);
    EXPECT_NEAR(f.d_bar, 0.0, 1e-12);
    EXPECT_NEAR(f.f_e, 1.0, 1e-12);
    CompressionScheme one = schumacher_scheme(e.average().matrix(), 1, 100.0);
    EXPECT_NEAR(scheme_fidelities(one, e).f_bar, 1.0, 1e-12);
}

TEST(Schumacher, ClassicalSpecialization) {
    Ensemble e = diag09();
    for (std::size_t n : {16u, 64u, 256u}) {
        CompressionScheme s = schumacher_scheme(e.average().matrix(), n, 2.0);
        SchemeFidelities f = scheme_fidelities(s, e);
        // retained-set probability by binomial sums
        double mass = 0;
        for (std::size_t k = 0; k <= n; ++k) {
            if (std::abs(k - 0.9 * n) <= 2.0 * std::sqrt(0.09 * n) + 1e-9 * n) {
                mass += std::exp((std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) +
                                 k * std::log(0.9) + (n - k) * std::log(0.1));
            }
        }
        EXPECT_NEAR(f.f_bar, mass, 1e-10);
    }
}

TEST(Schumacher, TheoremBoundsAndTrend) {
    Ensemble e = diag09();
    Matrix rho = e.average().matrix();
    const double h = oracle::binary_entropy(0.9);
    std::map<std::size_t, std::pair<double, double>> seen;
    for (std::size_t n : {64u, 256u, 1024u}) {
        CompressionScheme s = schumacher_scheme(rho, n, 4.0);
        SchemeFidelities f = scheme_fidelities(s, e);
        EXPECT_TRUE(f.symbolic || n == 64u);
        const double bound = 1.0 - 4.0 * 2.0 * std::exp(-2.0 * 0.09 * 16.0);
        EXPECT_NEAR(schumacher_fidelity_bound(rho, 4.0), bound, 1e-12);
        EXPECT_GE(f.f_e, bound - 1e-9);
        EXPECT_LE(s.rate(), h + kTypicalK * 2.0 * 4.0 / std::sqrt(static_cast<double>(n)) + 1e-12);
        EXPECT_NEAR(schumacher_rate_bound(rho, n, 4.0), h + kTypicalK * 2.0 * 4.0 / std::sqrt(static_cast<double>(n)), 1e-12);
        seen[n] = {f.f_e, s.rate()};
    }
    // with alpha fixed the typical mass is nearly flat in n; only the endpoints are ordered
    EXPECT_GT(seen[1024].first, seen[64].first);
    EXPECT_LT(seen[1024].second - h, seen[64].second - h);
    EXPECT_LT(seen[1024].second - h, seen[256].second - h);
}

TEST(Jhhh, UniversalFidelityBound) {
    Matrix basis = Matrix::Identity(2, 2);
    Matrix rho = diag2(0.8, 0.2);
    Ensemble e({DensityOperator::pure(Vector::Unit(2, 0)), DensityOperator::pure(Vector::Unit(2, 1))}, {0.8, 0.2});
    const double rate = 0.95;
    const std::size_t n = 200;
    ASSERT_GT(rate, oracle::binary_entropy(0.8));
    CompressionScheme s = jhhh_scheme(basis, n, rate);
    SchemeFidelities f = scheme_fidelities(s, e);
    // min D over H(nu) >= R by grid
    double dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 512 * 200; ++i) {
        const double t = i / (512.0 * 200);
        if (oracle::binary_entropy(t) >= rate) {
            dmin = std::min(dmin, oracle::kl({t, 1 - t}, {0.8, 0.2}));
        }
    }
    const double bound = 1.0 - 2.0 * std::pow(n + 1.0, 2.0) * std::exp2(-double(n) * dmin);
    ASSERT_GT(bound, 0.95);
    EXPECT_NEAR((1.0 - jhhh_fidelity_bound(rho, n, rate)) / (1.0 - bound), 1.0, 1e-3);
    EXPECT_GE(f.f_e, bound - 1e-6);
    EXPECT_LE(s.rate(), rate + 1e-12);
}

TEST(Jhhh, FullRateIsPerfectAndZeroRateDegrades) {
    Matrix basis = Matrix::Identity(2, 2);
    Ensemble e({DensityOperator::pure(Vector::Unit(2, 0)), DensityOperator::pure(Vector::Unit(2, 1))}, {0.8, 0.2});
    EXPECT_NEAR(scheme_fidelities(jhhh_scheme(basis, 30, 1.0), e).f_e, 1.0, 1e-12);
    double prev = 2;
    for (std::size_t n : {20u, 40u, 80u}) {
        const double fe = scheme_fidelities(jhhh_scheme(basis, n, 0.0), e).f_e;
        EXPECT_LT(fe, prev);
        prev = fe;
    }
    EXPECT_LT(prev, 1e-7);
}

TEST(StrongConverse, TrivialCases) {
    Matrix rho = diag2(0.9, 0.1);
    EXPECT_EQ(strong_converse_dim_bound(rho, 64, 0.999999, 1.0), 0.0);
    Matrix pure = diag2(1.0, 0.0);
    for (double alpha : {0.1, 1.0, 5.0}) {
        EXPECT_LE(strong_converse_dim_bound(pure, 64, 0.1, alpha), 1.0);
    }
    EXPECT_THROW(strong_converse_dim_bound(rho, 64, 1.0, 1.0), Error);
}

TEST(StrongConverse, TruncationCodesSatisfyInequality) {
    Ensemble e = diag09();
    Matrix rho = e.average().matrix();
    const double h = oracle::binary_entropy(0.9);
    for (std::size_t n : {64u, 256u}) {
        const double k = std::ceil(std::exp2(0.8 * n * h));
        CompressionScheme s = truncation_scheme(rho, n, k);
        EXPECT_NEAR(s.code_dim() / k, 1.0, 1e-9);
        const double fbar = scheme_fidelities(s, e).f_bar;
        const double lambda = std::clamp(1.0 - fbar, 1e-12, 1.0 - 1e-12);
        auto best = strong_converse_best_log2_dim_bound(rho, n, lambda);
        EXPECT_GE(std::log2(k), best.first - 1e-9);
    }
    // a code at the entropy rate with good fidelity gives a nonvacuous bound that still holds
    const std::size_t n = 1024;
    CompressionScheme s = schumacher_scheme(rho, n, 4.0);
    const double fbar = scheme_fidelities(s, e).f_bar;
    auto best = strong_converse_best_log2_dim_bound(rho, n, 1.0 - fbar + 0.05);
    EXPECT_GT(best.first, 0.0);
    EXPECT_GE(std::log2(s.code_dim()), best.first);
}

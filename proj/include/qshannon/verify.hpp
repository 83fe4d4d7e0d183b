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

#include "qshannon/capacity.hpp"
#include "qshannon/entropy.hpp"

namespace qshannon {

/// Worst violation of one inequality over a batch of random instances (0 when it always holds).
struct CheckResult {
    std::string name;
    std::size_t trials = 0;
    double max_violation = 0;
    double tolerance = 1e-8;

    bool passed() const {
        return max_violation <= tolerance;
    }
    void record(double violation) {
        ++trials;
        max_violation = std::max(max_violation, violation);
    }
};

inline const std::vector<std::string> &verify_suite_names() {
    static const std::vector<std::string> names{"fidelity", "tender", "entropy", "holevo", "coherent"};
    return names;
}

namespace detail {

inline Matrix random_basis(std::size_t d, Rng &rng) {
    return random_unitary(d, rng);
}

inline DensityOperator pinch(const DensityOperator &rho, const Matrix &basis) {
    Matrix diag = basis.adjoint() * rho.matrix() * basis;
    Matrix out = Matrix::Zero(diag.rows(), diag.cols());
    out.diagonal() = diag.diagonal();
    return DensityOperator::trusted(basis * out * basis.adjoint());
}

inline std::size_t random_dim(Rng &rng) {
    return std::uniform_int_distribution<std::size_t>(2, 4)(rng);
}

inline std::vector<CheckResult> fidelity_suite(std::size_t trials, Rng &rng) {
    CheckResult pp{"pure_pure_identity", 0, 0, 1e-9};
    CheckResult pm{"pure_mixed_sandwich", 0, 0, 1e-9};
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t d = random_dim(rng);
        DensityOperator a = random_pure(d, rng);
        DensityOperator b = random_pure(d, rng);
        const double f = fidelity_pure(a, b);
        const double dist = trace_distance(a, b);
        pp.record(std::abs((1.0 - f) - dist * dist));
        DensityOperator s = random_density(d, std::uniform_int_distribution<std::size_t>(1, d)(rng), rng);
        const double f2 = fidelity_pure(a, s);
        const double d2 = trace_distance(a, s);
        pm.record(std::max({0.0, (1.0 - f2) - d2, d2 * d2 - (1.0 - f2)}));
    }
    return {pp, pm};
}

inline std::vector<CheckResult> tender_suite(std::size_t trials, Rng &rng) {
    CheckResult op{"tender_operator", 0, 0, 1e-9};
    CheckResult meas{"tender_measurement", 0, 0, 1e-9};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t d = random_dim(rng);
        DensityOperator rho = random_density(d, d, rng);
        Matrix u = random_basis(d, rng);
        RealVector ev(static_cast<Eigen::Index>(d));
        for (Eigen::Index k = 0; k < ev.size(); ++k) {
            ev(k) = unit(rng);
        }
        HermitianMatrix x = from_spectrum(u, ev);
        const double lambda = std::clamp(1.0 - trace_of_product(rho.matrix(), x).real(), 0.0, 1.0);
        op.record(tender_residual(rho, x, lambda) - std::sqrt(8.0 * lambda));

        // nearly distinguishable family identified by a slightly rotated basis measurement
        Matrix basis = random_basis(d, rng);
        const double eps = 0.2 * unit(rng);
        std::vector<DensityOperator> family;
        for (std::size_t a = 0; a < d; ++a) {
            Matrix m = (1.0 - eps) * basis.col(static_cast<Eigen::Index>(a)) * basis.col(static_cast<Eigen::Index>(a)).adjoint() +
                       eps * random_density(d, d, rng).matrix();
            family.push_back(DensityOperator::trusted(m));
        }
        Matrix gen = random_gaussian_matrix(d, d, rng);
        Spectrum h = eig_hermitian(0.05 * unit(rng) * (gen + gen.adjoint()));
        Vector phases = (h.values.cast<cdouble>() * cdouble(0, 1)).array().exp().matrix();
        Matrix small_rotation = h.vectors * phases.asDiagonal() * h.vectors.adjoint();
        Povm paired = projective_measurement(small_rotation * basis);
        double lam = 0;
        for (std::size_t a = 0; a < d; ++a) {
            lam = std::max(lam, 1.0 - trace_of_product(family[a].matrix(), paired.elements()[a]).real());
        }
        KrausChannel interior = povm_interior(paired);
        double worst = -kInfinity;
        for (std::size_t a = 0; a < d; ++a) {
            const double r = trace_norm(family[a].matrix() - apply_channel(interior, family[a].matrix()));
            worst = std::max(worst, r - (std::sqrt(8.0 * lam) + lam));
        }
        meas.record(worst);
    }
    return {op, meas};
}

inline std::vector<CheckResult> entropy_suite(std::size_t trials, Rng &rng) {
    CheckResult klein{"klein"};
    CheckResult mono{"monotonicity"};
    CheckResult ssa{"strong_subadditivity"};
    CheckResult tri{"triangle"};
    CheckResult sub{"subadditivity"};
    CheckResult pure{"pure_common_state"};
    CheckResult fannes{"fannes"};
    CheckResult pinching{"pinching_increase"};
    CheckResult info2{"information_upper_bound"};
    CheckResult cond{"classical_conditional_positive"};
    CheckResult infosub{"information_subadditivity"};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t d = random_dim(rng);
        DensityOperator rho = random_density(d, d, rng);
        DensityOperator sigma = random_density(d, d, rng);
        const Matrix diff = rho.matrix() - sigma.matrix();
        klein.record(0.5 * (diff * diff).trace().real() - relative_entropy(rho, sigma));

        KrausChannel ch = random_channel(d, 2, 3, rng);
        mono.record(relative_entropy(apply_channel(ch, rho.matrix()), apply_channel(ch, sigma.matrix())) -
                    relative_entropy(rho, sigma));

        MultipartiteState three(random_density(8, 8, rng), {2, 2, 2});
        ssa.record(subsystem_entropy(three, {0, 1, 2}) + subsystem_entropy(three, {1}) - subsystem_entropy(three, {0, 1}) -
                   subsystem_entropy(three, {1, 2}));

        MultipartiteState two(random_density(6, std::uniform_int_distribution<std::size_t>(1, 6)(rng), rng), {2, 3});
        const double ha = subsystem_entropy(two, {0});
        const double hb = subsystem_entropy(two, {1});
        const double hab = subsystem_entropy(two, {0, 1});
        tri.record(std::abs(ha - hb) - hab);
        sub.record(hab - ha - hb);
        info2.record(mutual_information(two, {0}, {1}) - 2.0 * std::min(ha, hb));

        MultipartiteState pr(random_pure(6, rng), {2, 3});
        pure.record(std::abs(subsystem_entropy(pr, {0}) - subsystem_entropy(pr, {1})));

        const double eps = 0.15 * unit(rng);
        DensityOperator close = DensityOperator::trusted((1.0 - eps) * rho.matrix() + eps * sigma.matrix());
        const double theta = trace_norm(rho.matrix() - close.matrix());
        fannes.record(std::abs(von_neumann_entropy(rho) - von_neumann_entropy(close)) - fannes_bound(theta, d));

        pinching.record(von_neumann_entropy(rho) - von_neumann_entropy(pinch(rho, random_basis(d, rng))));

        // cq state with classical first factor
        const std::size_t a = 2;
        Distribution p{unit(rng) + 1e-3, unit(rng) + 1e-3};
        const double s = p[0] + p[1];
        p[0] /= s;
        p[1] /= s;
        std::vector<DensityOperator> outs;
        for (std::size_t x = 0; x < a; ++x) {
            outs.push_back(random_density(2, 2, rng));
        }
        CqChannel w(outs);
        MultipartiteState gamma = channel_state(p, w);
        cond.record(-conditional_entropy(gamma, {0}, {1}));

        // two uses of w with a correlated input pair
        Distribution joint(4);
        double js = 0;
        for (auto &v : joint) {
            v = unit(rng) + 1e-3;
            js += v;
        }
        Matrix g = Matrix::Zero(16, 16);
        for (std::size_t x1 = 0; x1 < 2; ++x1) {
            for (std::size_t x2 = 0; x2 < 2; ++x2) {
                Vector e = Vector::Zero(4);
                e(static_cast<Eigen::Index>(2 * x1 + x2)) = 1;
                Matrix reg = e * e.adjoint();
                g += (joint[2 * x1 + x2] / js) * tensor_product(reg, tensor_product(w[x1].matrix(), w[x2].matrix()));
            }
        }
        MultipartiteState pairs(DensityOperator::trusted(g), {2, 2, 2, 2});
        infosub.record(mutual_information(pairs, {0, 1}, {2, 3}) - mutual_information(pairs, {0}, {2}) -
                       mutual_information(pairs, {1}, {3}));
    }
    return {klein, mono, ssa, tri, sub, pure, fannes, pinching, info2, cond, infosub};
}

inline std::vector<CheckResult> holevo_suite(std::size_t trials, Rng &rng) {
    CheckResult hb{"holevo_bound"};
    CheckResult conc{"holevo_concavity"};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t d = random_dim(rng);
        const std::size_t a = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
        std::vector<DensityOperator> outs;
        for (std::size_t x = 0; x < a; ++x) {
            outs.push_back(random_density(d, std::uniform_int_distribution<std::size_t>(1, d)(rng), rng));
        }
        CqChannel w(outs);
        auto draw = [&]() {
            Distribution p(a);
            double s = 0;
            for (auto &v : p) {
                v = unit(rng) + 1e-6;
                s += v;
            }
            for (auto &v : p) {
                v /= s;
            }
            return p;
        };
        Distribution p = draw();
        Povm e = random_povm(d, std::uniform_int_distribution<std::size_t>(2, 5)(rng), rng);
        hb.record(classical_mutual_information(induced_joint_distribution(p, w, e)) - holevo_information(p, w));
        Distribution q = draw();
        Distribution mid(a);
        for (std::size_t x = 0; x < a; ++x) {
            mid[x] = 0.5 * (p[x] + q[x]);
        }
        conc.record(0.5 * (holevo_information(p, w) + holevo_information(q, w)) - holevo_information(mid, w));
    }
    return {hb, conc};
}

inline std::vector<CheckResult> coherent_suite(std::size_t trials, Rng &rng) {
    CheckResult weak{"weak_subadditivity"};
    CheckResult upper{"coherent_below_output_entropy"};
    CheckResult env{"exchange_equals_environment"};
    for (std::size_t t = 0; t < trials; ++t) {
        DensityOperator rho = random_density(4, std::uniform_int_distribution<std::size_t>(1, 4)(rng), rng);
        KrausChannel p1 = random_channel(2, 2, std::uniform_int_distribution<std::size_t>(1, 3)(rng), rng);
        KrausChannel p2 = random_channel(2, 2, std::uniform_int_distribution<std::size_t>(1, 3)(rng), rng);
        weak.record(-coherent_info_subadditivity_gap(rho, 2, 2, p1, p2));
        DensityOperator r1 = DensityOperator::trusted(partial_trace(rho.matrix(), {2, 2}, {0}));
        upper.record(coherent_information(r1, p1) - von_neumann_entropy(apply_channel(p1, r1.matrix())));
        Matrix v = stinespring_isometry(p1);
        const std::size_t k = p1.ops().size();
        Matrix out = v * r1.matrix() * v.adjoint();
        const Matrix environment = partial_trace(out, {k, 2}, {0});
        env.record(std::abs(entropy_exchange(r1, p1) - von_neumann_entropy(environment)));
    }
    return {weak, upper, env};
}

}  // namespace detail

/// Runs a named property suite; trials = 0 yields checks with no recorded instances.
inline std::vector<CheckResult> run_verify_suite(const std::string &suite, std::size_t trials, std::uint64_t seed) {
    Rng rng(seed);
    if (suite == "fidelity") {
        return detail::fidelity_suite(trials, rng);
    }
    if (suite == "tender") {
        return detail::tender_suite(trials, rng);
    }
    if (suite == "entropy") {
        return detail::entropy_suite(trials, rng);
    }
    if (suite == "holevo") {
        return detail::holevo_suite(trials, rng);
    }
    if (suite == "coherent") {
        return detail::coherent_suite(trials, rng);
    }
    throw Error(ErrorKind::ConfigError, "unknown verify suite '" + suite + "'");
}

}  // namespace qshannon

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

#include "oracles.hpp"
#include "qshannon/json_io.hpp"

using namespace qshannon;

namespace {

std::string data(const std::string &name) {
    return std::string(QSHANNON_DATA_DIR) + "/" + name;
}

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST(VonNeumann, Basics) {
    EXPECT_NEAR(von_neumann_entropy(DensityOperator::pure(Vector::Unit(3, 1))), 0.0, 1e-12);
    EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed(2)), 1.0, 1e-12);
    Rng rng(200);
    for (int t = 0; t < 50; ++t) {
        auto rho = random_density(4, 3, rng);
        EXPECT_NEAR(von_neumann_entropy(rho), oracle::entropy_bits(rho.matrix()), 1e-9);
    }
}

TEST(VonNeumann, ClonedWheelAverageIsThreeHalves) {
    Ensemble e = ensemble_from_json(load_json_file(data("cloned_wheel.json")));
    EXPECT_NEAR(von_neumann_entropy(e.average()), 1.5, 1e-12);
    auto ev = oracle::eigenvalues(e.average().matrix());
    EXPECT_NEAR(ev[0], 0.5, 1e-12);
    EXPECT_NEAR(ev[1], 0.25, 1e-12);
    EXPECT_NEAR(ev[2], 0.25, 1e-12);
    EXPECT_NEAR(ev[3], 0.0, 1e-12);
}

TEST(RelativeEntropy, Basics) {
    auto z = DensityOperator::pure(Vector::Unit(2, 0));
    auto o = DensityOperator::pure(Vector::Unit(2, 1));
    EXPECT_NEAR(relative_entropy(z, z), 0.0, 1e-12);
    EXPECT_EQ(relative_entropy(z, o), kInfinity);
    EXPECT_NEAR(relative_entropy(diag2(0.9, 0.1), diag2(0.5, 0.5)), oracle::kl({0.9, 0.1}, {0.5, 0.5}), 1e-12);
}

TEST(RelativeEntropy, MatchesOracleAndKlein) {
    Rng rng(201);
    for (int t = 0; t < 500; ++t) {
        auto r = random_density(3, 3, rng);
        auto s = random_density(3, 3, rng);
        const double d = relative_entropy(r, s);
        if (t < 50) {
            EXPECT_NEAR(d, oracle::relative_entropy(r.matrix(), s.matrix()), 1e-7);
        }
        Matrix diff = r.matrix() - s.matrix();
        // Klein in bits: D >= (log2 e / 2) Tr(rho - sigma)^2 >= Tr(rho - sigma)^2 / 2
        EXPECT_GE(d - 0.5 * (diff * diff).trace().real(), -1e-8);
    }
}

TEST(Multipartite, ProductHasZeroInformation) {
    Rng rng(202);
    auto a = random_density(2, 2, rng);
    auto b = random_density(3, 2, rng);
    MultipartiteState m(tensor_product(a, b), {2, 3});
    EXPECT_NEAR(mutual_information(m, {0}, {1}), 0.0, 1e-9);
    EXPECT_NEAR(subsystem_entropy(m, {0}), von_neumann_entropy(a), 1e-9);
}

TEST(Multipartite, EprSourceAverage) {
    Ensemble e = ensemble_from_json(load_json_file(data("epr_source.json")));
    MultipartiteState m(e.average(), {2, 2});
    EXPECT_NEAR(subsystem_entropy(m, {0, 1}), 1.0, 1e-12);
    EXPECT_NEAR(subsystem_entropy(m, {0}), 1.0, 1e-12);
    EXPECT_NEAR(subsystem_entropy(m, {1}), 1.0, 1e-12);
    EXPECT_NEAR(conditional_entropy(m, {0}, {1}), 0.0, 1e-12);
}

TEST(Multipartite, RejectsOverlapAndBadClassicalFlag) {
    MultipartiteState m(DensityOperator::maximally_mixed(4), {2, 2});
    EXPECT_THROW(mutual_information(m, {0}, {0}), Error);
    Vector plus = Vector::Ones(2) / std::sqrt(2.0);
    EXPECT_THROW(MultipartiteState(tensor_product(DensityOperator::pure(plus), DensityOperator::maximally_mixed(2)), {2, 2}, {},
                                   {true, false}),
                 Error);
}

TEST(Multipartite, StrongSubadditivityAndOracle) {
    Rng rng(203);
    for (int t = 0; t < 200; ++t) {
        auto rho = random_density(8, 1 + static_cast<std::size_t>(t % 8), rng);
        MultipartiteState m(rho, {2, 2, 2});
        EXPECT_GE(conditional_mutual_information(m, {0}, {2}, {1}), -1e-8);
        if (t < 20) {
            const double h12 = oracle::entropy_bits(oracle::partial_trace(rho.matrix(), {2, 2, 2}, {0, 1}));
            EXPECT_NEAR(subsystem_entropy(m, {0, 1}), h12, 1e-9);
        }
    }
}

TEST(Multipartite, TriangleAndPureCommonState) {
    Rng rng(204);
    for (int t = 0; t < 100; ++t) {
        auto rho = random_density(6, 1 + static_cast<std::size_t>(t % 6), rng);
        MultipartiteState m(rho, {2, 3});
        const double ha = subsystem_entropy(m, {0});
        const double hb = subsystem_entropy(m, {1});
        EXPECT_LE(std::abs(ha - hb), subsystem_entropy(m, {0, 1}) + 1e-8);
        EXPECT_LE(mutual_information(m, {0}, {1}), 2.0 * std::min(ha, hb) + 1e-8);
        MultipartiteState p(random_pure(6, rng), {2, 3});
        EXPECT_NEAR(subsystem_entropy(p, {0}), subsystem_entropy(p, {1}), 1e-8);
    }
}

TEST(Multipartite, ConditionalEntropyNonnegativeWithClassicalFactor) {
    Rng rng(205);
    for (int t = 0; t < 100; ++t) {
        Distribution p{0.2, 0.5, 0.3};
        CqChannel w({random_density(2, 2, rng), random_density(2, 1, rng), random_density(2, 2, rng)});
        MultipartiteState g = channel_state(p, w);
        EXPECT_GE(conditional_entropy(g, {0}, {1}), -1e-8);
        EXPECT_GE(conditional_entropy(g, {1}, {0}), -1e-8);
    }
}

TEST(Channel, ChannelStateMarginalsAndHolevo) {
    Rng rng(206);
    CqChannel w({random_density(3, 2, rng), random_density(3, 3, rng)});
    Distribution p{0.4, 0.6};
    MultipartiteState g = channel_state(p, w);
    Matrix marg = g.reduced({1});
    EXPECT_LT((marg - output_average(p, w)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(mutual_information(g, {0}, {1}), holevo_information(p, w), 1e-10);

    MultipartiteState point = channel_state({1.0, 0.0}, w);
    Matrix expect = Matrix::Zero(6, 6);
    expect.topLeftCorner(3, 3) = w[0].matrix();
    EXPECT_LT((point.state().matrix() - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(channel_state({1.0}, w), Error);
}

TEST(Holevo, BscEmbeddedMatchesClassicalFormula) {
    CqChannel w = cq_channel_from_json(load_json_file(data("bsc01.json")));
    EXPECT_NEAR(holevo_information({0.5, 0.5}, w), 1.0 - oracle::binary_entropy(0.1), 1e-12);
    EXPECT_NEAR(holevo_information({0.5, 0.5}, w), 0.531004406, 1e-6);
}

TEST(Holevo, IdenticalOutputsAndPureQubitPair) {
    CqChannel same = cq_channel_from_json(load_json_file(data("identical.json")));
    EXPECT_NEAR(holevo_information({0.5, 0.5}, same), 0.0, 1e-12);
    CqChannel pq = cq_channel_from_json(load_json_file(data("pure_qubit.json")));
    const double l = (1.0 + 1.0 / std::sqrt(2.0)) / 2.0;
    EXPECT_NEAR(holevo_information({0.5, 0.5}, pq), oracle::shannon({l, 1.0 - l}), 1e-12);
}

TEST(Holevo, BoundOnRandomMeasurements) {
    Rng rng(207);
    for (int t = 0; t < 200; ++t) {
        CqChannel w({random_density(2, 2, rng), random_density(2, 1, rng), random_density(2, 2, rng)});
        std::uniform_real_distribution<double> u(0.05, 1.0);
        Distribution p{u(rng), u(rng), u(rng)};
        const double s = p[0] + p[1] + p[2];
        for (auto &x : p) {
            x /= s;
        }
        Povm e = random_povm(2, 3, rng);
        Eigen::MatrixXd j = induced_joint_distribution(p, w, e);
        std::vector<std::vector<double>> jv(3, std::vector<double>(3));
        for (int x = 0; x < 3; ++x) {
            for (int y = 0; y < 3; ++y) {
                jv[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = j(x, y);
            }
        }
        const double mi = classical_mutual_information(j);
        EXPECT_NEAR(mi, oracle::mutual_information(jv), 1e-12);
        EXPECT_LE(mi, holevo_information(p, w) + 1e-8);
    }
}

TEST(Exchange, IdentityUnitaryAndStinespringRoute) {
    Rng rng(208);
    auto rho = random_density(3, 3, rng);
    EXPECT_NEAR(entropy_exchange(rho, KrausChannel::identity(3)), 0.0, 1e-9);
    EXPECT_NEAR(entropy_exchange(rho, KrausChannel::unitary(random_unitary(3, rng))), 0.0, 1e-9);
    EXPECT_NEAR(coherent_information(rho, KrausChannel::identity(3)), von_neumann_entropy(rho), 1e-9);
    for (int t = 0; t < 100; ++t) {
        auto r = random_density(2, 2, rng);
        auto ch = random_channel(2, 2, 3, rng);
        Matrix v = stinespring_isometry(ch);
        Matrix big = v * r.matrix() * v.adjoint();
        const double env = oracle::entropy_bits(oracle::partial_trace(big, {3, 2}, {0}));
        EXPECT_NEAR(entropy_exchange(r, ch), env, 1e-8);
    }
}

TEST(Exchange, DepolarizingAndCoherentUpperBound) {
    auto half = DensityOperator::maximally_mixed(2);
    auto dep = KrausChannel::fully_depolarizing(2);
    // output 1/2 and reference-system state 1/4: I_e = 1 - 2
    EXPECT_NEAR(entropy_exchange(half, dep), 2.0, 1e-9);
    EXPECT_NEAR(coherent_information(half, dep), -1.0, 1e-9);
    Rng rng(209);
    for (int t = 0; t < 100; ++t) {
        auto r = random_density(3, 3, rng);
        auto ch = random_channel(3, 3, 2, rng);
        EXPECT_LE(coherent_information(r, ch), von_neumann_entropy(apply_channel(ch, r)) + 1e-9);
    }
}

TEST(Exchange, QuantumFanoChain) {
    Rng rng(210);
    for (int t = 0; t < 100; ++t) {
        auto r = random_density(3, 3, rng);
        auto phi = random_channel(3, 3, 1 + static_cast<std::size_t>(t % 3), rng);
        auto psi = random_channel(3, 3, 1 + static_cast<std::size_t>(t % 2), rng);
        const double fe = entanglement_fidelity(r, compose(psi, phi));
        EXPECT_LE(von_neumann_entropy(r), coherent_information(r, phi) + 2.0 + 4.0 * (1.0 - fe) * std::log2(3.0) + 1e-9);
    }
}

TEST(Fannes, BoundAndBinaryEntropy) {
    EXPECT_EQ(fannes_bound(0.0, 4), 0.0);
    EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
    EXPECT_THROW(fannes_bound(0.6, 2), Error);
    EXPECT_THROW(fannes_bound(-0.1, 2), Error);
    Rng rng(211);
    for (int t = 0; t < 500; ++t) {
        auto r = random_density(3, 3, rng);
        auto n = random_density(3, 3, rng);
        const double eps = 0.3 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        Matrix s = (1.0 - eps) * r.matrix() + eps * n.matrix();
        const double theta = trace_norm(r.matrix() - s);
        ASSERT_LE(theta, 0.5);
        EXPECT_LE(std::abs(von_neumann_entropy(r.matrix()) - von_neumann_entropy(s)), fannes_bound(theta, 3) + 1e-9);
    }
}

TEST(Pinching, EntropyIncreases) {
    Rng rng(212);
    for (int t = 0; t < 100; ++t) {
        auto r = random_density(4, 2, rng);
        Povm p = projective_measurement(random_unitary(4, rng));
        Matrix pinched = apply_channel(povm_interior(p), r.matrix());
        EXPECT_GE(von_neumann_entropy(pinched) - von_neumann_entropy(r), -1e-8);
    }
}

TEST(Monotonicity, RelativeEntropyUnderChannels) {
    Rng rng(213);
    for (int t = 0; t < 200; ++t) {
        auto r = random_density(3, 3, rng);
        auto s = random_density(3, 3, rng);
        auto ch = random_channel(3, 2, 2, rng);
        EXPECT_LE(relative_entropy(apply_channel(ch, r), apply_channel(ch, s)), relative_entropy(r, s) + 1e-8);
    }
}

TEST(InformationSubadditivity, ProductChannelStates) {
    Rng rng(214);
    for (int t = 0; t < 50; ++t) {
        CqChannel w1({random_density(2, 2, rng), random_density(2, 1, rng)});
        CqChannel w2({random_density(2, 2, rng), random_density(2, 2, rng)});
        // correlated input pair (x1, x2)
        std::vector<double> pj{0.4, 0.1, 0.2, 0.3};
        Matrix g = Matrix::Zero(16, 16);
        for (std::size_t x1 = 0; x1 < 2; ++x1) {
            for (std::size_t x2 = 0; x2 < 2; ++x2) {
                Matrix reg = Matrix::Zero(4, 4);
                reg(static_cast<Eigen::Index>(x1 * 2 + x2), static_cast<Eigen::Index>(x1 * 2 + x2)) = 1;
                g += pj[x1 * 2 + x2] * tensor_product(reg, tensor_product(w1[x1].matrix(), w2[x2].matrix()));
            }
        }
        // factors: X1 X2 Y1 Y2 (register as two bits)
        MultipartiteState m(DensityOperator::trusted(g), {2, 2, 2, 2}, {}, {true, true, false, false});
        const double joint = mutual_information(m, {0, 1}, {2, 3});
        EXPECT_LE(joint, mutual_information(m, {0}, {2}) + mutual_information(m, {1}, {3}) + 1e-8);
    }
}

TEST(Fano, ClassicalChannelWithGuessing) {
    Rng rng(215);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        // classical 3x3 channel embedded diagonally, guess = output letter
        std::vector<DensityOperator> outs;
        for (int x = 0; x < 3; ++x) {
            std::vector<double> row{u(rng) + 0.01, u(rng) + 0.01, u(rng) + 0.01};
            row[static_cast<std::size_t>(x)] += 2.0;
            const double s = row[0] + row[1] + row[2];
            for (auto &v : row) {
                v /= s;
            }
            outs.push_back(DensityOperator::diagonal(row));
        }
        CqChannel w(outs);
        Distribution p{1.0 / 3, 1.0 / 3, 1.0 / 3};
        double pe = 0;
        for (std::size_t x = 0; x < 3; ++x) {
            pe += p[x] * (1.0 - w[x].matrix()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)).real());
        }
        MultipartiteState g = channel_state(p, w);
        EXPECT_LE(conditional_entropy(g, {0}, {1}), binary_entropy(pe) + pe * std::log2(2.0) + 1e-9);
    }
}

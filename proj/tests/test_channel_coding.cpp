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

#include <set>

#include "oracles.hpp"
#include "qshannon/channel_coding.hpp"
#include "qshannon/json_io.hpp"

using namespace qshannon;

namespace {

std::string data(const std::string &name) {
    return std::string(QSHANNON_DATA_DIR) + "/" + name;
}

CqChannel load_channel(const std::string &name) {
    return cq_channel_from_json(load_json_file(data(name)));
}

CqChannel bsc(double e) {
    return CqChannel({DensityOperator::diagonal({1 - e, e}), DensityOperator::diagonal({e, 1 - e})});
}

CqChannel identical_outputs() {
    return CqChannel({DensityOperator::pure(Vector::Unit(2, 0)), DensityOperator::pure(Vector::Unit(2, 0))});
}

oracle::CMat dense_output(const CqChannel &w, const Sequence &xn) {
    oracle::CMat m = oracle::CMat::Identity(1, 1);
    for (std::size_t x : xn) {
        m = oracle::kron(m, w[x].matrix());
    }
    return m;
}

// Errors 1 - Tr(W_{x^n(m)} D_m) with every operator formed densely.
std::vector<double> dense_errors(const BlockCode &code, const CqChannel &w) {
    std::vector<double> out;
    for (std::size_t m = 0; m < code.size(); ++m) {
        const oracle::CMat &f = code.decoder_factors[m];
        out.push_back(1.0 - (f.adjoint() * dense_output(w, code.codebook[m]) * f).trace().real());
    }
    return out;
}

oracle::CMat dense_decoder_sum(const BlockCode &code) {
    const auto dim = static_cast<Eigen::Index>(code.output_dim);
    oracle::CMat b = oracle::CMat::Zero(dim, dim);
    for (const auto &f : code.decoder_factors) {
        b += f * f.adjoint();
    }
    return b;
}

// Sum of D_m = G G^dagger with G = [F_1 ... F_M]; its nonzero spectrum is that of G^dagger G.
void expect_valid_subpovm(const BlockCode &code) {
    Eigen::Index cols = 0;
    for (const auto &f : code.decoder_factors) {
        cols += f.cols();
    }
    oracle::CMat g(static_cast<Eigen::Index>(code.output_dim), cols);
    cols = 0;
    for (const auto &f : code.decoder_factors) {
        g.middleCols(cols, f.cols()) = f;
        cols += f.cols();
    }
    for (double v : oracle::eigenvalues(g.adjoint() * g)) {
        EXPECT_LE(v, 1.0 + 1e-8);
        EXPECT_GE(v, -1e-8);
    }
    for (const auto &xn : code.codebook) {
        EXPECT_EQ(xn.size(), code.n);
    }
}

std::vector<std::vector<double>> grid_rows(double step) {
    std::vector<std::vector<double>> out;
    const int k = static_cast<int>(std::lround(1.0 / step));
    for (int i = 0; i <= k; ++i) {
        const double v = i * step;
        out.push_back({v, 1.0 - v});
    }
    return out;
}

}  // namespace

TEST(ErrorProbability, OrthogonalOutputsDecodePerfectly) {
    CqChannel w = bsc(0.0);
    BlockCode code;
    code.n = 2;
    code.output_dim = 4;
    code.codebook = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int k = 0; k < 4; ++k) {
        code.decoder_factors.push_back(Matrix(Vector::Unit(4, k)));
    }
    auto ch = BlockCqChannel::stationary(w, 2);
    EXPECT_NEAR(error_probability(code, ch, ErrorMode::Max), 0.0, 1e-14);
    EXPECT_NEAR(error_probability(code, ch, ErrorMode::Average), 0.0, 1e-14);
}

TEST(ErrorProbability, SingleMessageIdentityDecoder) {
    CqChannel w = load_channel("pure_qubit.json");
    BlockCode code;
    code.n = 3;
    code.output_dim = 8;
    code.codebook = {{0, 1, 1}};
    code.decoder_factors = {Matrix::Identity(8, 8)};
    EXPECT_NEAR(error_probability(code, BlockCqChannel::stationary(w, 3), ErrorMode::Max), 0.0, 1e-12);
}

TEST(ErrorProbability, RandomCodeMatchesBruteForce) {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<DensityOperator> outs;
        for (int x = 0; x < 3; ++x) {
            outs.push_back(random_density(2, 2, rng));
        }
        CqChannel w(outs);
        Povm dec = random_povm(8, 5, rng);
        BlockCode code;
        code.n = 3;
        code.output_dim = 8;
        std::uniform_int_distribution<std::size_t> letter(0, 2);
        for (std::size_t m = 0; m < 4; ++m) {
            code.codebook.push_back({letter(rng), letter(rng), letter(rng)});
            code.decoder_factors.push_back(matrix_sqrt(dec.elements()[m]));
        }
        auto e = message_errors(code, BlockCqChannel::stationary(w, 3));
        double worst = 0;
        double avg = 0;
        for (std::size_t m = 0; m < 4; ++m) {
            const oracle::CMat wx = dense_output(w, code.codebook[m]);
            const double ref = 1.0 - (wx * dec.elements()[m]).trace().real();
            EXPECT_NEAR(e[m], ref, 1e-10);
            worst = std::max(worst, ref);
            avg += ref / 4.0;
        }
        EXPECT_NEAR(error_probability(code, BlockCqChannel::stationary(w, 3), ErrorMode::Max), worst, 1e-10);
        EXPECT_NEAR(error_probability(code, BlockCqChannel::stationary(w, 3), ErrorMode::Average), avg, 1e-10);
    }
}

TEST(ErrorProbability, RejectsMismatchedChannel) {
    BlockCode code;
    code.n = 2;
    code.output_dim = 4;
    code.codebook = {{0, 0}};
    code.decoder_factors = {Matrix::Identity(4, 4)};
    EXPECT_THROW(error_probability(code, BlockCqChannel::stationary(bsc(0.1), 3), ErrorMode::Max), Error);
    CqChannel qutrit({DensityOperator::maximally_mixed(3)});
    EXPECT_THROW(error_probability(code, BlockCqChannel::stationary(qutrit, 2), ErrorMode::Max), Error);
}

TEST(Greedy, OrthogonalOutputsUseEverySequence) {
    CqChannel w = bsc(0.0);
    auto ch = BlockCqChannel::stationary(w, 4);
    BlockCode code = greedy_maximal_code(ch, std::vector<Distribution>(4, {0.5, 0.5}), 0.1);
    EXPECT_EQ(code.size(), 16u);
    for (double e : dense_errors(code, w)) {
        EXPECT_LE(e, 1e-10);
    }
}

TEST(Greedy, IdenticalOutputsGiveOneMessage) {
    CqChannel w = identical_outputs();
    for (std::size_t n : {2u, 4u, 6u}) {
        auto ch = BlockCqChannel::stationary(w, n);
        BlockCode code = greedy_maximal_code(ch, std::vector<Distribution>(n, {0.5, 0.5}), 0.3);
        EXPECT_EQ(code.size(), 1u) << n;
    }
}

TEST(Greedy, PureQubitChannel) {
    CqChannel w = load_channel("pure_qubit.json");
    double prev_rate = -1;
    for (std::size_t n : {6u, 8u, 10u}) {
        auto ch = BlockCqChannel::stationary(w, n);
        BlockCode code = greedy_maximal_code(ch, std::vector<Distribution>(n, {0.5, 0.5}), 0.3);
        ASSERT_GE(code.size(), 1u);
        for (double e : dense_errors(code, w)) {
            EXPECT_LE(e, 0.3 + 1e-9) << n;
        }
        expect_valid_subpovm(code);
        for (std::size_t m = 0; m < code.size(); ++m) {
            EXPECT_LE(code.decoder_trace(m), code.projector_traces[m] + 1e-8);
        }
        EXPECT_GE(code.certificate_min, code.eta - 1e-12);
        EXPECT_GE(code.rate(), prev_rate - 1e-12) << n;
        prev_rate = code.rate();
    }
}

TEST(Greedy, TerminationCertificateHoldsOnAllCandidates) {
    CqChannel w = load_channel("pure_qubit.json");
    const std::size_t n = 6;
    std::vector<Distribution> p(n, {0.5, 0.5});
    GreedyOptions opt;
    opt.entropy_window = false;
    BlockCode code = greedy_maximal_code(BlockCqChannel::stationary(w, n), p, 0.3, opt);
    const oracle::CMat b = dense_decoder_sum(code);
    const std::set<Sequence> used(code.codebook.begin(), code.codebook.end());
    std::size_t rejected = 0;
    for (const auto &xn : supported_sequences(p)) {
        if (used.count(xn)) {
            continue;
        }
        ++rejected;
        EXPECT_GE((dense_output(w, xn) * b).trace().real(), code.eta - 1e-10);
    }
    EXPECT_GT(rejected, 0u);
}

TEST(Greedy, ProjectorDecodersAreProjectors) {
    CqChannel w = bsc(0.05);
    const std::size_t n = 6;
    GreedyOptions opt;
    opt.projector_decoders = true;
    auto ch = BlockCqChannel::stationary(w, n);
    BlockCode code = greedy_maximal_code(ch, std::vector<Distribution>(n, {0.5, 0.5}), 0.3, opt);
    ASSERT_GE(code.size(), 1u);
    for (std::size_t m = 0; m < code.size(); ++m) {
        EXPECT_TRUE(is_projector(code.decoder_element(m), 1e-8));
    }
    for (double e : dense_errors(code, w)) {
        EXPECT_LE(e, 0.3 + 1e-9);
    }
    expect_valid_subpovm(code);
}

TEST(Greedy, InducedClassicalChannelRespectsHolevoBound) {
    for (const auto &w : {load_channel("pure_qubit.json"), bsc(0.05), bsc(0.0)}) {
        const std::size_t n = 4;
        GreedyOptions opt;
        opt.entropy_window = false;
        BlockCode code = greedy_maximal_code(BlockCqChannel::stationary(w, n), std::vector<Distribution>(n, {0.5, 0.5}), 0.3, opt);
        const std::size_t m = code.size();
        const double pm = 1.0 / static_cast<double>(m);
        const oracle::CMat b = dense_decoder_sum(code);
        std::vector<std::vector<double>> joint(m, std::vector<double>(m + 1, 0.0));
        std::vector<DensityOperator> outs;
        for (std::size_t i = 0; i < m; ++i) {
            const oracle::CMat wx = dense_output(w, code.codebook[i]);
            outs.push_back(DensityOperator::trusted(wx));
            for (std::size_t j = 0; j < m; ++j) {
                joint[i][j] = pm * (wx * code.decoder_element(j)).trace().real();
            }
            joint[i][m] = pm * (1.0 - (wx * b).trace().real());
        }
        const double chi = holevo_information(Distribution(m, pm), CqChannel(outs));
        EXPECT_LE(oracle::mutual_information(joint), chi + 1e-8);
    }
}

TEST(Greedy, RejectsBadArguments) {
    CqChannel w = bsc(0.1);
    auto ch = BlockCqChannel::stationary(w, 3);
    EXPECT_THROW(greedy_maximal_code(ch, std::vector<Distribution>(3, {0.5, 0.5}), 0.0), Error);
    EXPECT_THROW(greedy_maximal_code(ch, std::vector<Distribution>(2, {0.5, 0.5}), 0.3), Error);
    EXPECT_THROW(greedy_maximal_code(ch, std::vector<Distribution>(3, {1.0, 0.0}), {{0, 0, 1}}, 0.3), Error);
    auto big = BlockCqChannel::stationary(w, 13);
    EXPECT_THROW(big.output_dim(), Error);
}

TEST(ConstantComposition, NoiselessChannelTakesTheWholeTypeClass) {
    BlockCode code = constant_composition_code(bsc(0.0), TypeVector{{4, 4}}, 0.3);
    EXPECT_EQ(code.size(), 70u);
    EXPECT_NEAR(code.log2_size(), std::log2(oracle::choose(8, 4)), 1e-12);
    for (double e : dense_errors(code, bsc(0.0))) {
        EXPECT_LE(e, 1e-10);
    }
}

TEST(ConstantComposition, CodewordsHaveTheTypeAndMeetTheErrorLevel) {
    for (const auto &w : {load_channel("pure_qubit.json"), bsc(0.02)}) {
        TypeVector type{{4, 4}};
        BlockCode code = constant_composition_code(w, type, 0.3);
        ASSERT_GE(code.size(), 1u);
        for (const auto &xn : code.codebook) {
            EXPECT_EQ(std::count(xn.begin(), xn.end(), 0u), 4);
        }
        for (double e : dense_errors(code, w)) {
            EXPECT_LE(e, 0.3 + 1e-9);
        }
        expect_valid_subpovm(code);
        const double bound = cc_decoder_log2_trace_bound(w, type, 0.3);
        for (std::size_t m = 0; m < code.size(); ++m) {
            EXPECT_LE(std::log2(code.decoder_trace(m)), bound);
        }
        EXPECT_LE(code.log2_size(), converse_rate_bound(w, type, 0.3));
    }
}

TEST(Converse, ZeroCapacityChannelKeepsOnlyTheSqrtTerm) {
    CqChannel w = identical_outputs();
    const double lambda = 0.2;
    const double delta = std::sqrt(32.0 * 2 * 2) / (1 - lambda);
    for (std::size_t n : {4u, 16u, 64u}) {
        const double expected = (kTypicalK * 2 * std::sqrt(2.0) * delta + kTypicalK * 2 * delta) * std::sqrt(double(n)) +
                                std::log2(4.0 / (1 - lambda));
        EXPECT_NEAR(converse_rate_bound(w, TypeVector{{n / 2, n / 2}}, lambda), expected, 1e-9);
    }
}

TEST(Converse, PerLetterBoundApproachesCapacity) {
    CqChannel w = bsc(0.1);
    const double c = 1.0 - oracle::binary_entropy(0.1);
    double prev_gap = kInfinity;
    for (std::size_t n : {8u, 12u, 16u, 1024u, 65536u}) {
        const double gap = converse_rate_bound(w, TypeVector{{n / 2, n / 2}}, 0.3) / double(n) - c;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_THROW(converse_rate_bound(w, TypeVector{{2, 2}}, 1.0), Error);
}

TEST(Converse, GreedyCodesRespectTheBoundPerComposition) {
    for (const auto &w : {load_channel("pure_qubit.json"), bsc(0.0), bsc(0.1)}) {
        for (std::size_t n : {4u, 6u}) {
            BlockCode code = greedy_maximal_code(BlockCqChannel::stationary(w, n), std::vector<Distribution>(n, {0.5, 0.5}), 0.3);
            std::map<std::size_t, std::size_t> per_type;
            for (const auto &xn : code.codebook) {
                ++per_type[static_cast<std::size_t>(std::count(xn.begin(), xn.end(), 0u))];
            }
            for (const auto &[zeros, count] : per_type) {
                TypeVector t{{zeros, n - zeros}};
                EXPECT_LE(std::log2(double(count)), converse_rate_bound(w, t, 0.3));
            }
        }
    }
}

TEST(Converse, ProjectedDecoderAudit) {
    CqChannel w = bsc(0.0);
    TypeVector type{{3, 3}};
    BlockCode code = constant_composition_code(w, type, 0.3);
    auto audit = projected_decoder_audit(code, w, type, 0.3);
    EXPECT_LE(audit.max_error, (1 + 0.3) / 2 + 1e-9);
    EXPECT_LE(audit.total_trace, audit.projector_trace + 1e-8);
    EXPECT_GT(audit.min_trace, 0.0);
}

TEST(CodePartition, NoiselessBitGivesOneCode) {
    auto part = code_partition(bsc(0.0), {0.5, 0.5}, 6, 0.3, 0.3);
    ASSERT_EQ(part.codes.size(), 1u);
    EXPECT_EQ(part.codes[0].size(), 64u);
    EXPECT_NEAR(part.uncovered_mass, 0.0, 1e-12);
}

TEST(CodePartition, DisjointAndMassAccounted) {
    for (const auto &w : {load_channel("pure_qubit.json"), identical_outputs()}) {
        const std::size_t n = 6;
        const double eta = 0.3;
        auto part = code_partition(w, {0.5, 0.5}, n, 0.3, eta);
        std::set<Sequence> seen;
        double covered = 0;
        for (const auto &c : part.codes) {
            for (const auto &xn : c.codebook) {
                EXPECT_TRUE(seen.insert(xn).second);
                covered += std::pow(0.5, double(n));
            }
            for (double e : dense_errors(c, w)) {
                EXPECT_LE(e, 0.3 + 1e-9);
            }
        }
        EXPECT_NEAR(part.uncovered_mass, 1.0 - covered, 1e-12);
        EXPECT_LT(part.uncovered_mass, eta);
    }
}

TEST(CodePartition, ZeroCapacityUsesSingletons) {
    auto part = code_partition(identical_outputs(), {0.5, 0.5}, 6, 0.3, 0.3);
    std::size_t total = 0;
    for (const auto &c : part.codes) {
        EXPECT_EQ(c.size(), 1u);
        ++total;
    }
    EXPECT_LE(total, 64u);
    EXPECT_GE(double(total), (1.0 - 0.3) * 64);
}

TEST(RateSlicing, IndependentSideInformationIsClassicalCoding) {
    CqSource src;
    src.probs = {{0.5}, {0.5}};
    src.states = {{DensityOperator::maximally_mixed(2)}, {DensityOperator::maximally_mixed(2)}};
    auto s = rate_slicing_scheme(src, 6, 0.4);
    for (const auto &c : s.partition.codes) {
        EXPECT_EQ(c.size(), 1u);
    }
    EXPECT_LE(s.average_error, 0.4 + 1e-12);
    EXPECT_GT(s.rate(), 0.5);
    EXPECT_LE(s.distortion, s.distortion_bound + 1e-9);
}

TEST(RateSlicing, OrthogonalSideInformationSendsOnlyTheCodebook) {
    CqSource src;
    src.probs = {{0.5}, {0.5}};
    src.states = {{DensityOperator::pure(Vector::Unit(2, 0))}, {DensityOperator::pure(Vector::Unit(2, 1))}};
    EXPECT_NEAR(src.conditional_entropy_x_given_y(), 0.0, 1e-12);
    auto s = rate_slicing_scheme(src, 6, 0.4);
    EXPECT_EQ(s.partition.codes.size(), 1u);
    EXPECT_EQ(s.messages, 2u);
    EXPECT_NEAR(s.average_error, 0.0, 1e-12);
    EXPECT_LE(s.distortion, s.distortion_bound + 1e-9);
    EXPECT_NEAR(s.distortion, 0.0, 1e-9);
}

TEST(RateSlicing, DistortionWithinBoundOnNoisySideInformation) {
    CqSource src;
    Vector plus(2);
    plus << std::sqrt(0.5), std::sqrt(0.5);
    src.probs = {{0.4, 0.1}, {0.5}};
    src.states = {{DensityOperator::pure(Vector::Unit(2, 0)), DensityOperator::pure(Vector::Unit(2, 1))},
                  {DensityOperator::pure(plus)}};
    auto s = rate_slicing_scheme(src, 6, 0.4);
    EXPECT_LE(s.average_error, 0.4 + 1e-9);
    ASSERT_GE(s.distortion, 0.0);
    EXPECT_LE(s.distortion, s.distortion_bound + 1e-9);
}

TEST(TwoOutcomeDivergence, Basics) {
    Rng rng(8);
    auto rho = random_density(3, 3, rng);
    auto sigma = random_density(3, 3, rng);
    EXPECT_NEAR(two_outcome_divergence_bound(rho.matrix(), sigma.matrix(), Matrix::Identity(3, 3)), 0.0, 1e-12);
    auto s = random_povm(3, 2, rng).elements()[0];
    EXPECT_NEAR(two_outcome_divergence_bound(rho.matrix(), rho.matrix(), s), 0.0, 1e-12);
    EXPECT_THROW(two_outcome_divergence_bound(rho.matrix(), sigma.matrix(), 2.0 * Matrix::Identity(3, 3)), Error);
}

TEST(TwoOutcomeDivergence, BelowRelativeEntropy) {
    Rng rng(9);
    for (int t = 0; t < 500; ++t) {
        const std::size_t d = 2 + t % 3;
        auto rho = random_density(d, d, rng);
        auto sigma = random_density(d, d, rng);
        auto s = random_povm(d, 2, rng).elements()[0];
        EXPECT_LE(two_outcome_divergence_bound(rho.matrix(), sigma.matrix(), s),
                  oracle::relative_entropy(rho.matrix(), sigma.matrix()) + 1e-9);
    }
}

TEST(Exponents, IndividualMatchesClassicalGrid) {
    CqChannel w = bsc(0.1);
    const Distribution p{0.3, 0.7};
    const auto rows = grid_rows(1e-3);
    for (double level : {0.5, 0.7, 0.9}) {
        double best = kInfinity;
        for (const auto &v0 : rows) {
            for (const auto &v1 : rows) {
                if (0.3 * oracle::shannon(v0) + 0.7 * oracle::shannon(v1) >= level) {
                    best = std::min(best, 0.3 * oracle::kl(v0, {0.9, 0.1}) + 0.7 * oracle::kl(v1, {0.1, 0.9}));
                }
            }
        }
        const double e = exponent_individual(w, p, level);
        EXPECT_LE(e, best + 1e-9);
        EXPECT_NEAR(e, best, 2e-3) << level;
    }
    EXPECT_EQ(exponent_individual(w, p, 0.2), 0.0);
    EXPECT_EQ(exponent_individual(bsc(0.0), {0.5, 0.5}, 0.1), kInfinity);
}

TEST(Exponents, CollectiveMatchesClassicalGrid) {
    CqChannel w = bsc(0.1);
    const Distribution p{0.3, 0.7};
    const std::vector<double> avg{0.3 * 0.9 + 0.7 * 0.1, 0.3 * 0.1 + 0.7 * 0.9};
    for (double level : {0.2, 0.5, 0.8}) {
        double best = kInfinity;
        for (const auto &r : grid_rows(1e-5)) {
            if (oracle::shannon(r) <= level) {
                best = std::min(best, oracle::kl(r, avg));
            }
        }
        EXPECT_NEAR(exponent_collective(w, p, level), best, 1e-4) << level;
    }
}

TEST(Exponents, GreedyExponentShape) {
    for (const auto &w : {load_channel("pure_qubit.json"), bsc(0.1)}) {
        const Distribution p{0.5, 0.5};
        const double i = holevo_information(p, w);
        for (double r = 0.0; r < i - 0.05; r += 0.05) {
            EXPECT_GT(greedy_exponent(w, p, r), 0.0) << r;
        }
        EXPECT_EQ(greedy_exponent(w, p, i + 0.01), 0.0);
        EXPECT_EQ(greedy_exponent(w, p, 1.0), 0.0);
    }
    for (double r : {0.01, 0.3, 1.0}) {
        EXPECT_EQ(greedy_exponent(identical_outputs(), {0.5, 0.5}, r), 0.0);
    }
}

TEST(Exponents, NoiselessBitGreedyExponentIsHalfTheCollectiveValue) {
    CqChannel w = bsc(0.0);
    const Distribution p{0.5, 0.5};
    // conditional entropies vanish, so the individual term is infinite above 0 and
    // the optimum sits at L = 0 with the collective term at L' = R
    double best = kInfinity;
    for (const auto &r : grid_rows(1e-5)) {
        if (oracle::shannon(r) <= 0.5) {
            best = std::min(best, oracle::kl(r, {0.5, 0.5}));
        }
    }
    EXPECT_NEAR(greedy_exponent(w, p, 0.5), 0.5 * best, 1e-4);
}

TEST(Exponents, SpherePackingMatchesClassicalGridForBsc) {
    CqChannel w = bsc(0.1);
    const Distribution p{0.5, 0.5};
    const auto rows = grid_rows(1e-3);
    for (double rate : {0.0, 0.1, 0.25, 0.4}) {
        double best = kInfinity;
        for (const auto &v0 : rows) {
            for (const auto &v1 : rows) {
                const double info = oracle::mutual_information({{0.5 * v0[0], 0.5 * v0[1]}, {0.5 * v1[0], 0.5 * v1[1]}});
                if (info <= rate) {
                    best = std::min(best, 0.5 * oracle::kl(v0, {0.9, 0.1}) + 0.5 * oracle::kl(v1, {0.1, 0.9}));
                }
            }
        }
        auto sp = sphere_packing_exponent(w, p, rate);
        EXPECT_FALSE(sp.upper_estimate);
        EXPECT_NEAR(sp.value, best, 2e-3) << rate;
        EXPECT_LE(sp.information, rate + 1e-6);
    }
}

TEST(Exponents, SpherePackingAtZeroRateUsesConstantOutputs) {
    CqChannel w = bsc(0.2);
    const Distribution p{0.5, 0.5};
    double best = kInfinity;
    for (const auto &s : grid_rows(1e-5)) {
        best = std::min(best, 0.5 * oracle::kl(s, {0.8, 0.2}) + 0.5 * oracle::kl(s, {0.2, 0.8}));
    }
    EXPECT_NEAR(sphere_packing_exponent(w, p, 0.0).value, best, 2e-3);
}

TEST(Exponents, SpherePackingNonincreasingAndZeroAtCapacity) {
    CqChannel noisy({DensityOperator::trusted(0.8 * DensityOperator::pure(Vector::Unit(2, 0)).matrix() + 0.1 * Matrix::Identity(2, 2)),
                     DensityOperator::trusted(0.8 * load_channel("pure_qubit.json")[1].matrix() + 0.1 * Matrix::Identity(2, 2))});
    for (const auto &w : {bsc(0.1), noisy}) {
        const Distribution p{0.5, 0.5};
        const double i = holevo_information(p, w);
        double prev = kInfinity;
        for (double r = 0.0; r <= i + 1e-12; r += i / 10.0) {
            const double v = sphere_packing_exponent(w, p, r).value;
            EXPECT_LE(v, prev + 1e-9) << r;
            prev = v;
        }
        EXPECT_EQ(sphere_packing_exponent(w, p, i).value, 0.0);
        EXPECT_EQ(sphere_packing_exponent(w, p, i + 0.1).value, 0.0);
    }
    EXPECT_TRUE(sphere_packing_exponent(noisy, {0.5, 0.5}, 0.05).upper_estimate);
}

TEST(Exponents, PureChannelSpherePackingIsInfiniteBelowCapacity) {
    CqChannel w = load_channel("pure_qubit.json");
    EXPECT_EQ(sphere_packing_exponent(w, {0.5, 0.5}, 0.1).value, kInfinity);
}

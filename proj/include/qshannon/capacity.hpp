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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qshannon/entropy.hpp"

namespace qshannon {

// Holevo capacity.

struct HolevoOptimum {
    Distribution p;
    double capacity = 0;
    double gap = 0;  // max_x D(W_x || PW) - I(P;W)
    std::size_t iterations = 0;
    bool converged = false;
};

/// D(W_x || PW) for every letter.
inline std::vector<double> letter_divergences(const Distribution &p, const CqChannel &w) {
    Matrix avg = output_average(p, w);
    std::vector<double> out;
    for (std::size_t x = 0; x < w.size(); ++x) {
        out.push_back(relative_entropy(w[x].matrix(), avg));
    }
    return out;
}

/// Product-state capacity C^(1) = max_P I(P;W) by the multiplicative update
/// P'(x) ~ P(x) 2^{D(W_x||PW)}, halving the step whenever I would decrease.
inline HolevoOptimum optimize_holevo(const CqChannel &w, double tol = 1e-9, std::size_t max_iter = 200000) {
    if (!(tol > 0)) {
        throw Error(ErrorKind::DomainError, "tolerance must be positive");
    }
    HolevoOptimum r;
    r.p.assign(w.size(), 1.0 / static_cast<double>(w.size()));
    double info = holevo_information(r.p, w);
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        auto div = letter_divergences(r.p, w);
        r.gap = *std::max_element(div.begin(), div.end()) - info;
        if (r.gap <= tol) {
            r.converged = true;
            break;
        }
        Distribution next(w.size());
        double total = 0;
        const double shift = *std::max_element(div.begin(), div.end());
        for (std::size_t x = 0; x < w.size(); ++x) {
            next[x] = r.p[x] * std::exp2(div[x] - shift);
            total += next[x];
        }
        for (auto &v : next) {
            v /= total;
        }
        double step = 1.0;
        Distribution trial = next;
        double trial_info = holevo_information(trial, w);
        while (trial_info < info && step > 1e-12) {
            step *= 0.5;
            for (std::size_t x = 0; x < w.size(); ++x) {
                trial[x] = (1.0 - step) * r.p[x] + step * next[x];
            }
            trial_info = holevo_information(trial, w);
        }
        if (trial_info < info) {
            break;
        }
        r.p = trial;
        info = trial_info;
    }
    r.capacity = info;
    if (!r.converged) {
        auto div = letter_divergences(r.p, w);
        r.gap = *std::max_element(div.begin(), div.end()) - info;
        r.converged = r.gap <= tol;
    }
    return r;
}

// Rate polytopes.

enum class Sense { AtMost, AtLeast };

struct RateConstraint {
    std::vector<std::size_t> subset;  // sorted, 0-based
    Sense sense = Sense::AtMost;
    double bound = 0;
};

/// H-representation: each constraint bounds R(J) = sum_{i in J} R_i; rates are nonnegative.
struct RatePolytope {
    std::size_t s = 0;
    std::vector<RateConstraint> constraints;

    double sum_over(const std::vector<double> &r, const std::vector<std::size_t> &subset) const {
        double v = 0;
        for (std::size_t i : subset) {
            v += r.at(i);
        }
        return v;
    }

    /// Smallest constraint slack, nonnegativity included.
    double min_slack(const std::vector<double> &r) const {
        if (r.size() != s) {
            throw Error(ErrorKind::SizeMismatch, "rate tuple has the wrong length");
        }
        double slack = kInfinity;
        for (double v : r) {
            slack = std::min(slack, v);
        }
        for (const auto &c : constraints) {
            const double v = sum_over(r, c.subset);
            slack = std::min(slack, c.sense == Sense::AtMost ? c.bound - v : v - c.bound);
        }
        return slack;
    }

    bool contains(const std::vector<double> &r, double tol = 1e-9) const {
        return min_slack(r) >= -tol;
    }

    const RateConstraint *find(const std::vector<std::size_t> &subset) const {
        for (const auto &c : constraints) {
            if (c.subset == subset) {
                return &c;
            }
        }
        return nullptr;
    }

    double bound_of(const std::vector<std::size_t> &subset) const {
        const RateConstraint *c = find(subset);
        if (c == nullptr) {
            throw Error(ErrorKind::DomainError, "no constraint for the requested subset");
        }
        return c->bound;
    }
};

/// Nonempty subsets of {0..s-1} in order of their bitmask.
inline std::vector<std::vector<std::size_t>> nonempty_subsets(std::size_t s) {
    if (s > 20) {
        throw Error(ErrorKind::InfeasibleScale, "too many parties");
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t mask = 1; mask < (std::size_t{1} << s); ++mask) {
        std::vector<std::size_t> j;
        for (std::size_t i = 0; i < s; ++i) {
            if (mask & (std::size_t{1} << i)) {
                j.push_back(i);
            }
        }
        out.push_back(j);
    }
    return out;
}

inline std::vector<std::size_t> complement_of(const std::vector<std::size_t> &j, std::size_t s) {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i < s; ++i) {
        if (std::find(j.begin(), j.end(), i) == j.end()) {
            c.push_back(i);
        }
    }
    return c;
}

/// Vertices of a polytope with s <= 3 from intersections of s tight constraints
/// (nonnegativity included).
inline std::vector<std::vector<double>> vertices(const RatePolytope &poly, double tol = 1e-9) {
    const std::size_t s = poly.s;
    if (s == 0 || s > 3) {
        throw Error(ErrorKind::InfeasibleScale, "vertex enumeration supports 1 to 3 parties");
    }
    std::vector<std::pair<Eigen::VectorXd, double>> planes;
    for (std::size_t i = 0; i < s; ++i) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
        a(static_cast<Eigen::Index>(i)) = 1;
        planes.emplace_back(a, 0.0);
    }
    for (const auto &c : poly.constraints) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
        for (std::size_t i : c.subset) {
            a(static_cast<Eigen::Index>(i)) = 1;
        }
        planes.emplace_back(a, c.bound);
    }
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> pick(s);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
        if (depth == s) {
            Eigen::MatrixXd a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
            Eigen::VectorXd b(static_cast<Eigen::Index>(s));
            for (std::size_t k = 0; k < s; ++k) {
                a.row(static_cast<Eigen::Index>(k)) = planes[pick[k]].first.transpose();
                b(static_cast<Eigen::Index>(k)) = planes[pick[k]].second;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (lu.rank() < static_cast<Eigen::Index>(s)) {
                return;
            }
            Eigen::VectorXd x = lu.solve(b);
            std::vector<double> v(x.data(), x.data() + x.size());
            if (!poly.contains(v, tol)) {
                return;
            }
            for (const auto &u : out) {
                double diff = 0;
                for (std::size_t i = 0; i < s; ++i) {
                    diff = std::max(diff, std::abs(u[i] - v[i]));
                }
                if (diff <= 1e-9) {
                    return;
                }
            }
            out.push_back(v);
            return;
        }
        for (std::size_t k = start; k < planes.size(); ++k) {
            pick[depth] = k;
            rec(depth + 1, k + 1);
        }
    };
    rec(0, 0);
    std::sort(out.begin(), out.end());
    return out;
}

// Multiple access channels.

/// cq channel with s senders; outputs indexed by the row-major flattening of (x_1, ..., x_s).
class MultiwayCqChannel {
   public:
    MultiwayCqChannel(std::vector<std::size_t> alphabets, std::vector<DensityOperator> outputs)
        : alphabets_(std::move(alphabets)), outputs_(std::move(outputs)) {
        if (alphabets_.empty()) {
            throw Error(ErrorKind::BadShape, "need at least one sender");
        }
        if (product_of(alphabets_) != outputs_.size()) {
            throw Error(ErrorKind::SizeMismatch, "one output per input tuple");
        }
        for (const auto &o : outputs_) {
            if (o.dim() != outputs_.at(0).dim()) {
                throw Error(ErrorKind::DimMismatch, "outputs differ in dimension");
            }
        }
    }

    std::size_t senders() const {
        return alphabets_.size();
    }
    const std::vector<std::size_t> &alphabets() const {
        return alphabets_;
    }
    std::size_t dim() const {
        return outputs_.at(0).dim();
    }
    const DensityOperator &output(const std::vector<std::size_t> &x) const {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            idx = idx * alphabets_[i] + x[i];
        }
        return outputs_.at(idx);
    }
    const std::vector<DensityOperator> &outputs() const {
        return outputs_;
    }

   private:
    std::vector<std::size_t> alphabets_;
    std::vector<DensityOperator> outputs_;
};

/// gamma = sum_x P_1(x_1)...P_s(x_s) [x_1] (x) ... (x) [x_s] (x) W_x.
inline MultipartiteState mac_channel_state(const MultiwayCqChannel &w, const std::vector<Distribution> &ps) {
    const std::size_t s = w.senders();
    if (ps.size() != s) {
        throw Error(ErrorKind::SizeMismatch, "one input distribution per sender");
    }
    for (std::size_t i = 0; i < s; ++i) {
        require_distribution(ps[i], w.alphabets()[i], "input distribution");
    }
    const std::size_t a = product_of(w.alphabets());
    const auto d = static_cast<Eigen::Index>(w.dim());
    const auto total = static_cast<Eigen::Index>(a) * d;
    Matrix g = Matrix::Zero(total, total);
    std::vector<std::size_t> x(s, 0);
    for (std::size_t idx = 0; idx < a; ++idx) {
        std::size_t r = idx;
        double prob = 1;
        for (std::size_t i = s; i-- > 0;) {
            x[i] = r % w.alphabets()[i];
            r /= w.alphabets()[i];
            prob *= ps[i][x[i]];
        }
        const auto off = static_cast<Eigen::Index>(idx) * d;
        g.block(off, off, d, d) = prob * w.output(x).matrix();
    }
    std::vector<std::size_t> dims = w.alphabets();
    dims.push_back(w.dim());
    std::vector<std::string> labels;
    std::vector<bool> flags;
    for (std::size_t i = 0; i < s; ++i) {
        labels.push_back("X" + std::to_string(i + 1));
        flags.push_back(true);
    }
    labels.push_back("Y");
    flags.push_back(false);
    return MultipartiteState(DensityOperator::trusted(g, dims), dims, labels, flags);
}

/// R(J) <= I(X(J) ^ Y | X(J^c)) for every nonempty J.
inline RatePolytope mac_outer_region(const MultiwayCqChannel &w, const std::vector<Distribution> &ps) {
    MultipartiteState gamma = mac_channel_state(w, ps);
    const std::size_t s = w.senders();
    RatePolytope poly;
    poly.s = s;
    const FactorSet y{s};
    for (const auto &j : nonempty_subsets(s)) {
        const double v = conditional_mutual_information(gamma, j, y, complement_of(j, s));
        poly.constraints.push_back({j, Sense::AtMost, std::max(0.0, v)});
    }
    return poly;
}

/// Time sharing: constraint values sum_u q_u I_{gamma_u}. The number of channel states is capped
/// at s, which suffices for a single receiver.
inline RatePolytope mac_time_sharing_region(const MultiwayCqChannel &w, const std::vector<std::vector<Distribution>> &inputs,
                                            const std::vector<double> &weights) {
    if (inputs.empty() || inputs.size() != weights.size()) {
        throw Error(ErrorKind::SizeMismatch, "one weight per channel state");
    }
    if (inputs.size() > w.senders()) {
        throw Error(ErrorKind::SizeMismatch, "more channel states than senders");
    }
    require_distribution(weights, weights.size(), "time-sharing weights");
    RatePolytope out;
    out.s = w.senders();
    for (std::size_t u = 0; u < inputs.size(); ++u) {
        RatePolytope part = mac_outer_region(w, inputs[u]);
        if (out.constraints.empty()) {
            out.constraints = part.constraints;
            for (auto &c : out.constraints) {
                c.bound = 0;
            }
        }
        for (std::size_t k = 0; k < part.constraints.size(); ++k) {
            out.constraints[k].bound += weights[u] * part.constraints[k].bound;
        }
    }
    return out;
}

// Multiple sources.

/// R(J) >= H(X(J) | X(J^c) Y) over the classically flagged factors; the remaining factors form Y.
inline RatePolytope source_region_constraints(const MultipartiteState &m) {
    FactorSet xs;
    FactorSet ys;
    for (std::size_t k = 0; k < m.num_factors(); ++k) {
        (m.classical_flags()[k] ? xs : ys).push_back(k);
    }
    if (xs.empty()) {
        throw Error(ErrorKind::FlagMissing, "no factor is flagged classical");
    }
    RatePolytope poly;
    poly.s = xs.size();
    for (const auto &j : nonempty_subsets(xs.size())) {
        FactorSet fj;
        FactorSet cond = ys;
        for (std::size_t i : j) {
            fj.push_back(xs[i]);
        }
        for (std::size_t i : complement_of(j, xs.size())) {
            cond.push_back(xs[i]);
        }
        std::sort(cond.begin(), cond.end());
        poly.constraints.push_back({j, Sense::AtLeast, conditional_entropy(m, fj, cond)});
    }
    return poly;
}

/// R_{pi(i)} = H(X_{pi(i)} | Y X_{pi(1)} ... X_{pi(i-1)}), read off the lower constraints by the chain rule.
inline std::vector<double> corner_points(const RatePolytope &poly, const std::vector<std::size_t> &perm) {
    const std::size_t s = poly.s;
    std::vector<std::size_t> check = perm;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < s; ++i) {
        if (check.size() != s || check[i] != i) {
            throw Error(ErrorKind::DomainError, "not a permutation of the parties");
        }
    }
    std::vector<double> r(s, 0.0);
    double next = 0;  // b({pi(i+1), ..., pi(s)})
    for (std::size_t i = s; i-- > 0;) {
        std::vector<std::size_t> tail(perm.begin() + static_cast<std::ptrdiff_t>(i), perm.end());
        std::sort(tail.begin(), tail.end());
        const double b = poly.bound_of(tail);
        r[perm[i]] = b - next;
        next = b;
    }
    return r;
}

inline std::vector<std::vector<double>> all_corner_points(const RatePolytope &poly) {
    std::vector<std::size_t> perm(poly.s);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<double>> out;
    do {
        out.push_back(corner_points(poly, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

/// Average-fidelity lower bounds for a quantum multiple source with average state m:
/// R(all) >= H(A), R_i >= H(A_i | A_rest).
inline RatePolytope multi_source_bounds(const MultipartiteState &m) {
    const std::size_t s = m.num_factors();
    RatePolytope poly;
    poly.s = s;
    FactorSet all(s);
    std::iota(all.begin(), all.end(), 0);
    if (s > 1) {
        for (std::size_t i = 0; i < s; ++i) {
            poly.constraints.push_back({{i}, Sense::AtLeast, conditional_entropy(m, {i}, complement_of({i}, s))});
        }
    }
    poly.constraints.push_back({all, Sense::AtLeast, subsystem_entropy(m, all)});
    return poly;
}

/// Entanglement-fidelity lower bounds: R(I) >= H(A(I) | A(I^c)) for every nonempty I.
inline RatePolytope coherent_info_bounds(const MultipartiteState &m) {
    const std::size_t s = m.num_factors();
    RatePolytope poly;
    poly.s = s;
    for (const auto &j : nonempty_subsets(s)) {
        poly.constraints.push_back({j, Sense::AtLeast, conditional_entropy(m, j, complement_of(j, s))});
    }
    return poly;
}

/// I_e(rho_1; phi_1) + H(rho_2) - I_e(rho; phi_1 (x) phi_2) for a bipartite rho; nonnegative.
inline double coherent_info_subadditivity_gap(const DensityOperator &rho, std::size_t d1, std::size_t d2,
                                              const KrausChannel &phi1, const KrausChannel &phi2) {
    if (d1 * d2 != rho.dim()) {
        throw Error(ErrorKind::DimMismatch, "factor dimensions do not match the state");
    }
    const Matrix rho1 = partial_trace(rho.matrix(), {d1, d2}, {0});
    const Matrix rho2 = partial_trace(rho.matrix(), {d1, d2}, {1});
    const double joint = coherent_information(rho, tensor_product(phi1, phi2));
    return coherent_information(DensityOperator::trusted(rho1), phi1) + von_neumann_entropy(rho2) - joint;
}

/// For an ensemble of pure bipartite states related by unitaries acting on party i alone, sending
/// messages through the ensemble is superdense coding with party i's qubits, hence
/// R_i >= chi / 2 = H(average) / 2. The bound is added for every party where the condition holds.
inline RatePolytope superdense_bounds(const std::vector<DensityOperator> &states, const std::vector<double> &probs,
                                      std::size_t d1, std::size_t d2) {
    if (states.empty() || states.size() != probs.size()) {
        throw Error(ErrorKind::SizeMismatch, "one probability per state");
    }
    require_distribution(probs, probs.size());
    Matrix avg = Matrix::Zero(static_cast<Eigen::Index>(d1 * d2), static_cast<Eigen::Index>(d1 * d2));
    for (std::size_t k = 0; k < states.size(); ++k) {
        if (states[k].dim() != d1 * d2) {
            throw Error(ErrorKind::DimMismatch, "state dimension does not match the factors");
        }
        RealVector ev = eigenvalues_hermitian(states[k].matrix());
        if (ev.size() > 1 && ev(1) > kRankTol) {
            throw Error(ErrorKind::NotPure, "ensemble members must be pure");
        }
        avg += probs[k] * states[k].matrix();
    }
    const double chi = von_neumann_entropy(avg);
    RatePolytope poly;
    poly.s = 2;
    for (std::size_t party = 0; party < 2; ++party) {
        // pure states with equal marginals on the other party differ by a unitary on this one
        const std::size_t other = 1 - party;
        const Matrix ref = partial_trace(states[0].matrix(), {d1, d2}, {other});
        bool related = true;
        for (const auto &st : states) {
            related = related && (partial_trace(st.matrix(), {d1, d2}, {other}) - ref).cwiseAbs().maxCoeff() <= 1e-9;
        }
        if (related) {
            poly.constraints.push_back({{party}, Sense::AtLeast, chi / 2.0});
        }
    }
    return poly;
}

}  // namespace qshannon

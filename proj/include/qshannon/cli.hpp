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

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qshannon/json_io.hpp"
#include "qshannon/source_coding.hpp"
#include "qshannon/verify.hpp"

namespace qshannon::cli {

inline std::string fmt(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::ostringstream s;
    s << std::setprecision(12) << x;
    return s.str();
}

inline std::vector<double> parse_list(const std::string &text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception &) {
            throw Error(ErrorKind::ConfigError, "bad number '" + item + "' in list");
        }
    }
    return out;
}

inline std::string subset_label(const std::vector<std::size_t> &j) {
    std::string s;
    for (std::size_t i : j) {
        s += (s.empty() ? "" : " ") + std::to_string(i + 1);
    }
    return "{" + s + "}";
}

inline void write_json_file(const std::string &path, const Json &j) {
    std::ofstream f(path);
    if (!f) {
        throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
    }
    f << j.dump(2) << "\n";
}

struct EntropyArgs {
    std::string state;
};

inline int cmd_entropy(const EntropyArgs &a, std::ostream &out) {
    Json j = load_json_file(a.state);
    Ensemble e = ensemble_from_json(j);
    DensityOperator avg = e.average();
    std::vector<std::size_t> dims = j.contains("dims") ? json_field<std::vector<std::size_t>>(j, "dims")
                                                       : std::vector<std::size_t>{avg.dim()};
    MultipartiteState m(avg, dims);
    out << "quantity,value\n";
    FactorSet all(dims.size());
    std::iota(all.begin(), all.end(), 0);
    out << "H," << fmt(subsystem_entropy(m, all)) << "\n";
    double mixed = 0;
    for (std::size_t k = 0; k < e.states.size(); ++k) {
        mixed += e.probs[k] * von_neumann_entropy(e.states[k]);
    }
    out << "chi," << fmt(std::max(0.0, subsystem_entropy(m, all) - mixed)) << "\n";
    if (dims.size() > 1) {
        for (std::size_t k = 0; k < dims.size(); ++k) {
            out << "H(A" << k + 1 << ")," << fmt(subsystem_entropy(m, {k})) << "\n";
        }
        for (std::size_t k = 0; k < dims.size(); ++k) {
            out << "H(A" << k + 1 << "|rest)," << fmt(conditional_entropy(m, {k}, complement_of({k}, dims.size()))) << "\n";
        }
        if (dims.size() == 2) {
            out << "I(A1^A2)," << fmt(mutual_information(m, {0}, {1})) << "\n";
        }
    }
    return 0;
}

struct CompressArgs {
    std::string source;
    std::string ns = "64,256,1024";
    double alpha = 4.0;
};

inline int cmd_compress(const CompressArgs &a, std::ostream &out) {
    Ensemble e = ensemble_from_json(load_json_file(a.source));
    const Matrix rho = e.average().matrix();
    out << "n,alpha,rate,F_bar,D_bar,F_e,bound_Fe,bound_rate\n";
    for (double nv : parse_list(a.ns)) {
        if (nv < 1 || nv != std::floor(nv)) {
            throw Error(ErrorKind::ConfigError, "block lengths must be positive integers");
        }
        const auto n = static_cast<std::size_t>(nv);
        CompressionScheme scheme = schumacher_scheme(rho, n, a.alpha);
        SchemeFidelities f = scheme_fidelities(scheme, e);
        out << n << "," << fmt(a.alpha) << "," << fmt(scheme.rate()) << "," << fmt(f.f_bar) << "," << fmt(f.d_bar) << ","
            << fmt(f.f_e) << "," << fmt(schumacher_fidelity_bound(rho, a.alpha)) << ","
            << fmt(schumacher_rate_bound(rho, n, a.alpha)) << "\n";
    }
    return 0;
}

struct ChannelCodeArgs {
    std::string channel;
    std::size_t n = 6;
    double lambda = 0.3;
    std::string mode = "greedy";
    std::string type;
    bool projector = false;
    std::string code_out;
};

/// log2 of sum over the codebook's compositions of the constant-composition bound.
inline double composition_converse_log2(const BlockCode &code, const CqChannel &w, double lambda) {
    std::map<Counts, bool> seen;
    std::vector<double> terms;
    for (const auto &xn : code.codebook) {
        TypeVector t = TypeVector::of(xn, w.size());
        if (seen.emplace(t.counts, true).second) {
            terms.push_back(converse_rate_bound(w, t, lambda));
        }
    }
    if (terms.empty()) {
        return -kInfinity;
    }
    const double mx = *std::max_element(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms) {
        s += std::exp2(t - mx);
    }
    return mx + std::log2(s);
}

inline int cmd_channel_code(const ChannelCodeArgs &a, std::ostream &out) {
    Json j = load_json_file(a.channel);
    CqChannel w = cq_channel_from_json(j);
    BlockCode code;
    if (a.mode == "greedy") {
        Distribution p = default_input(j, w.size());
        GreedyOptions opt;
        opt.projector_decoders = a.projector;
        code = greedy_maximal_code(BlockCqChannel::stationary(w, a.n), std::vector<Distribution>(a.n, p), a.lambda, opt);
    } else if (a.mode == "cc") {
        if (a.type.empty()) {
            throw Error(ErrorKind::ConfigError, "--mode cc needs --type");
        }
        TypeVector t = TypeVector::parse(a.type);
        if (t.n() != a.n) {
            throw Error(ErrorKind::ConfigError, "type counts must sum to n");
        }
        code = constant_composition_code(w, t, a.lambda, a.projector);
    } else {
        throw Error(ErrorKind::ConfigError, "unknown mode '" + a.mode + "'");
    }
    BlockCqChannel ch = BlockCqChannel::stationary(w, a.n);
    const double max_err = error_probability(code, ch, ErrorMode::Max);
    const double avg_err = error_probability(code, ch, ErrorMode::Average);
    const double conv = composition_converse_log2(code, w, a.lambda) / static_cast<double>(a.n);
    if (!a.code_out.empty()) {
        write_json_file(a.code_out, code_to_json(code));
    }
    out << "n,messages,rate,max_err,avg_err,converse_bound\n";
    out << a.n << "," << code.size() << "," << fmt(code.rate()) << "," << fmt(max_err) << "," << fmt(avg_err) << ","
        << fmt(conv) << "\n";
    return max_err <= a.lambda + 1e-9 ? 0 : 1;
}

struct CapacityArgs {
    std::string channel;
    double tol = 1e-9;
};

inline int cmd_capacity(const CapacityArgs &a, std::ostream &out) {
    CqChannel w = cq_channel_from_json(load_json_file(a.channel));
    HolevoOptimum o = optimize_holevo(w, a.tol);
    out << "quantity,value\n";
    out << "C," << fmt(o.capacity) << "\n";
    out << "gap," << fmt(o.gap) << "\n";
    out << "iterations," << o.iterations << "\n";
    out << "converged," << (o.converged ? 1 : 0) << "\n";
    for (std::size_t x = 0; x < w.size(); ++x) {
        out << "P(" << w.alphabet()[x] << ")," << fmt(o.p[x]) << "\n";
    }
    return o.converged ? 0 : 1;
}

struct MacArgs {
    std::string channel;
    std::string json_out;
};

inline int cmd_mac_region(const MacArgs &a, std::ostream &out) {
    Json j = load_json_file(a.channel);
    MultiwayCqChannel w = mac_from_json(j);
    RatePolytope poly = mac_outer_region(w, mac_inputs_from_json(j, w));
    if (!a.json_out.empty()) {
        write_json_file(a.json_out, polytope_to_json(poly));
    }
    out << "kind,subset,sense,value\n";
    for (const auto &c : poly.constraints) {
        out << "constraint," << subset_label(c.subset) << "," << (c.sense == Sense::AtMost ? "<=" : ">=") << "," << fmt(c.bound)
            << "\n";
    }
    if (poly.s <= 3) {
        for (const auto &v : vertices(poly)) {
            std::string t;
            for (double x : v) {
                t += (t.empty() ? "" : ":") + fmt(x);
            }
            out << "vertex,,," << t << "\n";
        }
    }
    return 0;
}

struct ReliabilityArgs {
    std::string channel;
    std::string rates = "0,0.1,0.2,0.3,0.4,0.5";
};

inline int cmd_reliability(const ReliabilityArgs &a, std::ostream &out) {
    Json j = load_json_file(a.channel);
    CqChannel w = cq_channel_from_json(j);
    Distribution p = default_input(j, w.size());
    const double info = holevo_information(p, w);
    out << "R,I,E_g,E_sp,E_sp_upper_estimate\n";
    for (double r : parse_list(a.rates)) {
        SpherePacking sp = sphere_packing_exponent(w, p, r);
        out << fmt(r) << "," << fmt(info) << "," << fmt(greedy_exponent(w, p, r)) << "," << fmt(sp.value) << ","
            << (sp.upper_estimate ? 1 : 0) << "\n";
    }
    return 0;
}

struct VerifyArgs {
    std::string suite;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
};

inline int cmd_verify(const VerifyArgs &a, std::ostream &out) {
    std::vector<std::string> suites;
    if (a.suite == "all") {
        suites = verify_suite_names();
    } else {
        suites.push_back(a.suite);
    }
    out << "suite,check,trials,max_violation,tolerance,status\n";
    bool ok = true;
    if (a.trials == 0) {
        return 0;
    }
    for (std::size_t k = 0; k < suites.size(); ++k) {
        for (const auto &c : run_verify_suite(suites[k], a.trials, a.seed)) {
            ok = ok && c.passed();
            out << suites[k] << "," << c.name << "," << c.trials << "," << fmt(c.max_violation) << "," << fmt(c.tolerance) << ","
                << (c.passed() ? "PASS" : "FAIL") << "\n";
        }
    }
    return ok ? 0 : 1;
}

/// Runs the command line (without the program name); returns the exit status.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"qshannon: quantum Shannon theory experiments"};
    app.require_subcommand(1);

    EntropyArgs ea;
    auto *entropy = app.add_subcommand("entropy", "entropies of an ensemble's average state");
    entropy->add_option("--state", ea.state, "ensemble JSON")->required();

    CompressArgs ca;
    auto *compress = app.add_subcommand("compress", "typical-subspace compression of a pure-state source");
    compress->add_option("--source", ca.source, "ensemble JSON")->required();
    compress->add_option("--n", ca.ns, "comma-separated block lengths");
    compress->add_option("--alpha", ca.alpha, "typicality constant")->check(CLI::PositiveNumber);

    ChannelCodeArgs cc;
    auto *code = app.add_subcommand("channel-code", "construct and evaluate a cq block code");
    code->add_option("--channel", cc.channel, "cq channel JSON")->required();
    code->add_option("--n", cc.n, "block length")->check(CLI::Range(1, 64));
    code->add_option("--lambda", cc.lambda, "maximal error")->check(CLI::Range(0.0, 1.0));
    code->add_option("--mode", cc.mode, "greedy or cc")->check(CLI::IsMember({"greedy", "cc"}));
    code->add_option("--type", cc.type, "composition counts a:b:...");
    code->add_flag("--projector", cc.projector, "use projector decoders");
    code->add_option("--code-out", cc.code_out, "write the code as JSON");

    CapacityArgs pa;
    auto *cap = app.add_subcommand("capacity", "product-state capacity");
    cap->add_option("--channel", pa.channel, "cq channel JSON")->required();
    cap->add_option("--tol", pa.tol, "optimality gap")->check(CLI::PositiveNumber);

    MacArgs ma;
    auto *mac = app.add_subcommand("mac-region", "outer bound region of a multiple access channel");
    mac->add_option("--channel", ma.channel, "MAC JSON")->required();
    mac->add_option("--json-out", ma.json_out, "write the constraints as JSON");

    ReliabilityArgs ra;
    auto *rel = app.add_subcommand("reliability", "greedy and sphere-packing exponents");
    rel->add_option("--channel", ra.channel, "cq channel JSON")->required();
    rel->add_option("--rates", ra.rates, "comma-separated rates");

    VerifyArgs va;
    auto *ver = app.add_subcommand("verify", "randomized property suites");
    ver->add_option("--suite", va.suite, "suite name or all")->required();
    ver->add_option("--trials", va.trials, "instances per check");
    ver->add_option("--seed", va.seed, "random seed")->required();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (entropy->parsed()) {
            return cmd_entropy(ea, out);
        }
        if (compress->parsed()) {
            return cmd_compress(ca, out);
        }
        if (code->parsed()) {
            return cmd_channel_code(cc, out);
        }
        if (cap->parsed()) {
            return cmd_capacity(pa, out);
        }
        if (mac->parsed()) {
            return cmd_mac_region(ma, out);
        }
        if (rel->parsed()) {
            return cmd_reliability(ra, out);
        }
        if (ver->parsed()) {
            if (va.suite != "all") {
                const auto &names = verify_suite_names();
                if (std::find(names.begin(), names.end(), va.suite) == names.end()) {
                    throw Error(ErrorKind::ConfigError, "unknown verify suite '" + va.suite + "'");
                }
            }
            return cmd_verify(va, out);
        }
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace qshannon::cli

#pragma once

// Experiment configuration and the pipelines behind the command-line tool.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bootperc/discretise.hpp"
#include "bootperc/errors.hpp"
#include "bootperc/exposure.hpp"
#include "bootperc/graphgen.hpp"
#include "bootperc/odeflow.hpp"
#include "bootperc/percolation.hpp"
#include "bootperc/stats.hpp"
#include "bootperc/theory.hpp"
#include "bootperc/weights.hpp"

namespace bootperc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Logging, controlled by BOOTPERC_LOG in {error, info, debug}

enum class LogLevel { error = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
    const char* env = std::getenv("BOOTPERC_LOG");
    if (!env) return LogLevel::info;
    const std::string s(env);
    if (s == "error") return LogLevel::error;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
}

inline void log(LogLevel level, const std::string& msg) {
    static std::mutex mu;
    if (level > log_level()) return;
    std::lock_guard lock(mu);
    std::cerr << "[bootperc] " << msg << '\n';
}

// ---------------------------------------------------------------------------
// Configuration

struct ModelSpec {
    std::string kind = "point_mass";  // point_mass | mixture | power_law
    double d = 10.0;
    std::vector<double> values;
    std::vector<double> probs;
    double beta = 2.5;
    double x0 = 1.0;
    std::optional<double> zeta;  // cap the explicit sequence at n^zeta
};

struct ExperimentConfig {
    std::string experiment = "lln";
    std::uint64_t seed = 1;
    std::size_t replicates = 20;
    std::size_t threads = 1;
    std::size_t n = 10000;
    int r = 2;
    ModelSpec model;
    std::optional<double> p = 0.2;           // Bernoulli seed probability
    std::optional<double> a_exponent;        // seeds with probability n^e / n
    std::vector<double> scan_exponents{0.2, 0.25, 0.3, 0.3333333333333333, 0.4, 0.45, 0.5, 0.55};
    double gamma = 0.1;
    std::size_t ell = 10;
    double kernel_c = 0.0;                   // 0: n^{zeta/2}
    std::size_t stride = 10;
    double root_tol = 1e-12;
    double scan_step = 1e-4;
    double ode_h = 1e-4;
    double ode_eps = 1e-8;
    std::string out_dir = "out";
};

inline json model_to_json(const ModelSpec& m) {
    json j{{"kind", m.kind}};
    if (m.kind == "point_mass") j["d"] = m.d;
    if (m.kind == "mixture") {
        j["values"] = m.values;
        j["probs"] = m.probs;
    }
    if (m.kind == "power_law") {
        j["beta"] = m.beta;
        j["x0"] = m.x0;
        if (m.zeta) j["zeta"] = *m.zeta;
    }
    return j;
}

inline json to_json(const ExperimentConfig& c) {
    json seeding;
    if (c.p) seeding["p"] = *c.p;
    if (c.a_exponent) seeding["a_exponent"] = *c.a_exponent;
    return {{"experiment", c.experiment},
            {"seed", c.seed},
            {"replicates", c.replicates},
            {"threads", c.threads},
            {"n", c.n},
            {"r", c.r},
            {"model", model_to_json(c.model)},
            {"seeding", seeding},
            {"scan", {{"exponents", c.scan_exponents}}},
            {"discretisation", {{"gamma", c.gamma}, {"ell", c.ell}}},
            {"kernel", {{"C", c.kernel_c}}},
            {"trajectory", {{"stride", c.stride}}},
            {"tolerances",
             {{"root", c.root_tol}, {"scan_step", c.scan_step}, {"ode_h", c.ode_h}, {"ode_eps", c.ode_eps}}},
            {"output", {{"dir", c.out_dir}}}};
}

namespace detail {

inline void config_check(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

template <class T>
void read_opt(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
    using detail::config_check;
    static const std::vector<std::string> kinds{"generate", "percolate", "lln", "scan",
                                                "trajectory", "sandwich", "kernel", "theory"};
    config_check(std::find(kinds.begin(), kinds.end(), c.experiment) != kinds.end(),
                 "unknown experiment '" + c.experiment + "'");
    config_check(c.n >= 1 && c.n <= 0xFFFFFFFFull, "n must lie in [1, 2^32)");
    config_check(c.r >= 2, "activation threshold r must be at least 2");
    config_check(c.replicates >= 1, "replicates must be at least 1");
    config_check(c.threads >= 1, "threads must be at least 1");
    config_check(c.p.has_value() != c.a_exponent.has_value(), "seeding needs exactly one of 'p' and 'a_exponent'");
    if (c.p) config_check(*c.p >= 0.0 && *c.p <= 1.0, "seeding.p must lie in [0, 1]");
    if (c.a_exponent) config_check(*c.a_exponent >= 0.0 && *c.a_exponent <= 1.0, "a_exponent must lie in [0, 1]");
    const auto& m = c.model;
    if (m.kind == "point_mass") {
        config_check(m.d > 0.0, "model.d must be positive");
    } else if (m.kind == "mixture") {
        config_check(!m.values.empty() && m.values.size() == m.probs.size(), "mixture needs matching values/probs");
        double s = 0.0;
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            config_check(m.values[i] > 0.0 && m.probs[i] >= 0.0, "mixture values must be positive, probs >= 0");
            s += m.probs[i];
        }
        config_check(std::abs(s - 1.0) < 1e-9, "mixture probabilities must sum to 1");
    } else if (m.kind == "power_law") {
        config_check(m.beta > 2.0, "power law needs beta > 2");
        config_check(m.x0 > 0.0, "power law needs x0 > 0");
        if (m.zeta) config_check(*m.zeta > 0.0 && *m.zeta <= 1.0, "zeta must lie in (0, 1]");
    } else {
        config_check(false, "unknown model kind '" + m.kind + "'");
    }
    config_check(c.gamma > 0.0 && c.gamma < 1.0, "discretisation.gamma must lie in (0, 1)");
    config_check(c.ell >= 1, "discretisation.ell must be at least 1");
    config_check(c.root_tol > 0.0 && c.scan_step > 0.0 && c.ode_h > 0.0 && c.ode_eps > 0.0,
                 "tolerances must be positive");
    config_check(c.stride >= 1, "trajectory.stride must be at least 1");
}

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        detail::read_opt(j, "experiment", c.experiment);
        detail::read_opt(j, "seed", c.seed);
        detail::read_opt(j, "replicates", c.replicates);
        detail::read_opt(j, "threads", c.threads);
        detail::read_opt(j, "n", c.n);
        detail::read_opt(j, "r", c.r);
        if (j.contains("model")) {
            const auto& m = j.at("model");
            detail::read_opt(m, "kind", c.model.kind);
            detail::read_opt(m, "d", c.model.d);
            detail::read_opt(m, "values", c.model.values);
            detail::read_opt(m, "probs", c.model.probs);
            detail::read_opt(m, "beta", c.model.beta);
            detail::read_opt(m, "x0", c.model.x0);
            if (m.contains("zeta")) c.model.zeta = m.at("zeta").get<double>();
        }
        if (j.contains("seeding")) {
            const auto& s = j.at("seeding");
            c.p.reset();
            if (s.contains("p")) c.p = s.at("p").get<double>();
            if (s.contains("a_exponent")) c.a_exponent = s.at("a_exponent").get<double>();
        }
        if (j.contains("scan")) detail::read_opt(j.at("scan"), "exponents", c.scan_exponents);
        if (j.contains("discretisation")) {
            detail::read_opt(j.at("discretisation"), "gamma", c.gamma);
            detail::read_opt(j.at("discretisation"), "ell", c.ell);
        }
        if (j.contains("kernel")) detail::read_opt(j.at("kernel"), "C", c.kernel_c);
        if (j.contains("trajectory")) detail::read_opt(j.at("trajectory"), "stride", c.stride);
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            detail::read_opt(t, "root", c.root_tol);
            detail::read_opt(t, "scan_step", c.scan_step);
            detail::read_opt(t, "ode_h", c.ode_h);
            detail::read_opt(t, "ode_eps", c.ode_eps);
        }
        if (j.contains("output")) detail::read_opt(j.at("output"), "dir", c.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Model helpers

inline WeightDistribution make_distribution(const ModelSpec& m) {
    if (m.kind == "point_mass") return WeightDistribution::point_mass(m.d);
    if (m.kind == "mixture") return WeightDistribution::mixture(m.values, m.probs);
    return WeightDistribution::power_law(m.beta, m.x0);
}

inline WeightSequence make_sequence(const ModelSpec& m, std::size_t n) {
    if (m.kind == "point_mass") return make_point_mass(m.d, n);
    if (m.kind == "mixture") return make_mixture_sequence(make_distribution(m), n);
    if (m.zeta) return make_power_law_capped(n, m.x0, m.beta, *m.zeta);
    return make_power_law(n, m.x0, m.beta);
}

inline double seed_probability(const ExperimentConfig& c, std::optional<double> exponent = std::nullopt) {
    const double nn = static_cast<double>(c.n);
    if (exponent) return std::min(1.0, std::pow(nn, *exponent) / nn);
    if (c.a_exponent) return std::min(1.0, std::pow(nn, *c.a_exponent) / nn);
    return *c.p;
}

/// Theory prediction for the configured model: (fixed point, predicted fraction).
struct Prediction {
    FixedPointResult fp;
    double fraction = 0.0;
    double p = 0.0;
};

inline Prediction predict(const ExperimentConfig& c) {
    const auto dist = make_distribution(c.model);
    Prediction out;
    out.p = c.a_exponent ? 0.0 : *c.p;
    out.fp = solve_fixed_point(dist.size_biased(), out.p, c.r, c.root_tol, c.scan_step);
    out.fraction = final_fraction(dist, out.fp.y_hat, out.p, c.r);
    return out;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to slot i so the output does not depend on scheduling.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name,
                              std::ios::openmode mode = std::ios::out) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name, mode);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

inline void write_json(const std::filesystem::path& dir, const std::string& name, const json& j) {
    auto os = open_out(dir, name);
    os << j.dump(2) << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each writes its files under c.out_dir and returns a JSON summary.

inline json cmd_generate(const ExperimentConfig& c) {
    const auto ws = make_sequence(c.model, c.n);
    auto rng = Rng::stream(c.seed, 0);
    const auto g = sample_chung_lu(ws, rng);
    if (!g.check_structure()) throw InvariantViolation("generated graph failed the structural scan");
    {
        auto os = detail::open_out(c.out_dir, "weights.csv");
        write_weights_csv(os, ws);
    }
    {
        auto os = detail::open_out(c.out_dir, "edges.csv");
        write_edge_list_csv(os, g);
    }
    {
        auto os = detail::open_out(c.out_dir, "graph.clg", std::ios::out | std::ios::binary);
        write_binary(os, g);
    }
    json s{{"n", g.num_vertices()}, {"m", g.num_edges()}, {"mean_degree", g.mean_degree()}};
    const auto ed = expected_degrees(ws.weights(), ws.total_weight());
    s["expected_mean_degree"] = detail::compensated_sum(ed) / static_cast<double>(ws.size());
    detail::write_json(c.out_dir, "generate.json", s);
    return s;
}

struct ReplicateOutcome {
    std::size_t initial = 0;
    std::size_t final_size = 0;
    std::size_t rounds = 0;
    std::size_t edges = 0;
};

/// Sample CL(w), seed with probability q, percolate, verify the certificate.
inline ReplicateOutcome percolate_once(const WeightSequence& ws, double q, int r, Rng& rng, bool verify) {
    const auto g = sample_chung_lu(ws, rng);
    const auto seeds = seed_bernoulli(ws.size(), q, rng);
    const auto res = run_bootstrap(g, seeds, r);
    if (verify && !verify_fixed_point(g, seeds, res, r))
        throw InvariantViolation("percolation result failed the fixed-point certificate");
    return {res.initial_size, res.final_size, res.rounds, g.num_edges()};
}

inline std::vector<ReplicateOutcome> run_replicates(const ExperimentConfig& c, const WeightSequence& ws, double q,
                                                    std::uint64_t stream_offset = 0) {
    std::vector<ReplicateOutcome> out(c.replicates);
    parallel_for(c.replicates, c.threads, [&](std::size_t i) {
        auto rng = Rng::stream(c.seed, stream_offset + i);
        out[i] = percolate_once(ws, q, c.r, rng, true);
        log(LogLevel::debug, "replicate " + std::to_string(i) + ": |A_f| = " + std::to_string(out[i].final_size));
    });
    return out;
}

inline json cmd_percolate(const ExperimentConfig& c) {
    const auto ws = make_sequence(c.model, c.n);
    const auto res = run_replicates(c, ws, seed_probability(c));
    auto os = detail::open_out(c.out_dir, "percolate.csv");
    os << "replicate,edges,A0,Af,rounds\n";
    for (std::size_t i = 0; i < res.size(); ++i)
        os << i << ',' << res[i].edges << ',' << res[i].initial << ',' << res[i].final_size << ',' << res[i].rounds
           << '\n';
    json s{{"replicates", res.size()}, {"certificates", "ok"}};
    detail::write_json(c.out_dir, "percolate.json", s);
    return s;
}

inline json cmd_theory(const ExperimentConfig& c) {
    const auto pr = predict(c);
    json inputs{{"model", model_to_json(c.model)}, {"p", pr.p}, {"r", c.r}};
    json rec = theory_record(inputs, pr.fp, pr.fraction);
    if (pr.fp.y_hat > 0.0 && pr.p < 1.0) {
        const auto dc = check_derivative_condition(make_distribution(c.model).size_biased(), pr.fp.y_hat, pr.p, c.r);
        rec["exceptional_gap"] = dc.exceptional_gap;
    }
    if (c.model.kind == "power_law" && c.model.zeta) {
        const auto cd = critical_density(static_cast<double>(c.n), c.r, c.model.beta, *c.model.zeta);
        rec["critical_exponent"] = cd.exponent;
        rec["a_c"] = cd.a_c;
        rec["zeta_in_range"] = cd.zeta_in_range;
        if (!cd.warning.empty()) log(LogLevel::info, cd.warning);
    }
    detail::write_json(c.out_dir, "theory.json", rec);
    return rec;
}

inline json cmd_lln(const ExperimentConfig& c) {
    const auto ws = make_sequence(c.model, c.n);
    const auto res = run_replicates(c, ws, seed_probability(c));
    const auto pr = predict(c);
    std::vector<double> frac;
    {
        auto os = detail::open_out(c.out_dir, "lln.csv");
        os << "replicate,A0,Af,fraction\n";
        os.precision(10);
        for (std::size_t i = 0; i < res.size(); ++i) {
            frac.push_back(static_cast<double>(res[i].final_size) / static_cast<double>(c.n));
            os << i << ',' << res[i].initial << ',' << res[i].final_size << ',' << frac.back() << '\n';
        }
    }
    const auto s = summarize(frac);
    json out{{"mean_fraction", s.mean}, {"sd_fraction", s.sd}, {"prediction", pr.fraction},
             {"stable", pr.fp.stable}, {"y_hat", pr.fp.y_hat}};
    if (pr.fp.stable) {
        out["gap"] = std::abs(s.mean - pr.fraction);
    } else {
        out["gap"] = nullptr;
        log(LogLevel::info, "fixed point is not stable; comparison skipped");
    }
    json inputs{{"model", model_to_json(c.model)}, {"p", pr.p}, {"r", c.r}};
    detail::write_json(c.out_dir, "theory.json", theory_record(inputs, pr.fp, pr.fraction));
    detail::write_json(c.out_dir, "lln.json", out);
    return out;
}

inline json cmd_scan(const ExperimentConfig& c) {
    if (c.model.kind != "power_law") throw ConfigError("scan needs a power-law model");
    const auto ws = make_sequence(c.model, c.n);
    const double zeta = c.model.zeta.value_or(1.0 / (c.model.beta - 1.0));
    const auto cd = critical_density(static_cast<double>(c.n), c.r, c.model.beta, zeta);
    if (!cd.warning.empty()) log(LogLevel::info, cd.warning);
    const auto fp = powerlaw_fixed_point(c.model.beta, c.model.x0, c.r, c.root_tol, c.scan_step);
    const double pred = fp.zero_root ? 0.0 : powerlaw_fraction(c.model.beta, c.model.x0, fp.y_hat, c.r);
    auto os = detail::open_out(c.out_dir, "scan.csv");
    os << "exponent,a,mean_ratio,mean_fraction\n";
    os.precision(10);
    json rows = json::array();
    for (std::size_t e = 0; e < c.scan_exponents.size(); ++e) {
        const double ex = c.scan_exponents[e];
        const auto res = run_replicates(c, ws, seed_probability(c, ex), e * c.replicates);
        std::vector<double> ratio, frac;
        for (const auto& r : res) {
            ratio.push_back(r.initial ? static_cast<double>(r.final_size) / static_cast<double>(r.initial) : 1.0);
            frac.push_back(static_cast<double>(r.final_size) / static_cast<double>(c.n));
        }
        const double a = std::pow(static_cast<double>(c.n), ex);
        const auto sr = summarize(ratio), sf = summarize(frac);
        os << ex << ',' << a << ',' << sr.mean << ',' << sf.mean << '\n';
        rows.push_back({{"exponent", ex}, {"a", a}, {"ratios", ratio}, {"fractions", frac}});
    }
    json out{{"critical_exponent", cd.exponent}, {"a_c", cd.a_c}, {"prediction", pred}, {"rows", rows}};
    detail::write_json(c.out_dir, "scan.json", out);
    return out;
}

inline json cmd_trajectory(const ExperimentConfig& c) {
    if (c.model.kind == "power_law")
        throw std::invalid_argument("trajectory needs a finitary model (point_mass or mixture)");
    if (!c.p) throw ConfigError("trajectory needs seeding.p");
    const auto dist = make_distribution(c.model);
    const auto D = Discretisation::exact(dist);
    const double p = *c.p;
    IntegrateOptions opt;
    opt.h = c.ode_h;
    opt.eps_rel = c.ode_eps;
    const auto sol = integrate(D, p, c.r, opt);
    const auto ws = make_mixture_sequence(dist, c.n);
    // class counts of the deterministic sequence
    std::vector<std::uint64_t> counts(D.num_classes(), 0);
    for (double w : ws.weights())
        counts[static_cast<std::size_t>(std::lower_bound(D.levels.begin(), D.levels.end(), w) - D.levels.begin())]++;
    const double nn = static_cast<double>(c.n);
    std::vector<DeviationReport> reps(c.replicates);
    std::vector<std::uint64_t> finals(c.replicates);
    PercolationTrajectory first;
    parallel_for(c.replicates, c.threads, [&](std::size_t i) {
        auto rng = Rng::stream(c.seed, i);
        const auto in = exposure_input(D.levels, counts, p, ws.total_weight(), c.r, rng);
        auto tr = run_sequential_exposure(in, rng, c.stride);
        reps[i] = deviation_report(tr, sol, nn);
        finals[i] = tr.final_count;
        if (i == 0) first = std::move(tr);
    });
    {
        auto os = detail::open_out(c.out_dir, "trajectory.csv");
        write_trajectory_csv(os, first);
    }
    {
        auto os = detail::open_out(c.out_dir, "ode.csv");
        write_ode_csv(os, sol, 100);
    }
    {
        // replicate 0 rescaled next to the fluid limit at t/n
        auto os = detail::open_out(c.out_dir, "joined.csv");
        const auto& L = sol.layout;
        os << "t,tau,u_n,nu,w_U_n,mu_U";
        for (std::size_t i = 0; i < L.classes; ++i)
            for (int j = 0; j < L.r; ++j) os << ",c_" << i + 1 << '_' << j << "_n,gamma_" << i + 1 << '_' << j;
        os << '\n';
        os.precision(10);
        for (std::size_t k = 0; k < first.records(); ++k) {
            const double tau = static_cast<double>(first.t[k]) / nn;
            if (tau > sol.tau.back()) break;
            const auto s = sol.interpolate(tau);
            os << first.t[k] << ',' << tau << ',' << static_cast<double>(first.u[k]) / nn << ',' << s[L.nu()] << ','
               << first.w_u[k] / nn << ',' << s[L.mu()];
            for (std::size_t i = 0; i < L.classes; ++i)
                for (int j = 0; j < L.r; ++j)
                    os << ',' << static_cast<double>(first.count(k, i, j)) / nn << ',' << s[L.gamma(i, j)];
            os << '\n';
        }
    }
    auto os = detail::open_out(c.out_dir, "deviations.csv");
    os << "replicate,final,dev_u,dev_w_U,dev_c,dev_max,truncated\n";
    os.precision(10);
    std::vector<double> mx;
    for (std::size_t i = 0; i < reps.size(); ++i) {
        os << i << ',' << finals[i] << ',' << reps[i].u << ',' << reps[i].w_u << ',' << reps[i].c << ','
           << reps[i].max() << ',' << reps[i].truncated << '\n';
        mx.push_back(reps[i].max());
    }
    const auto s = summarize(mx);
    json out{{"median_max_deviation", s.median}, {"max_deviation", s.max}, {"tau_hat", sol.tau_hat},
             {"alpha", sol.alpha_hat}, {"ratio_blowup", sol.ratio_blowup}, {"domain_exit", sol.domain_exit}};
    detail::write_json(c.out_dir, "trajectory.json", out);
    return out;
}

inline json cmd_sandwich(const ExperimentConfig& c) {
    if (!c.p) throw ConfigError("sandwich needs seeding.p");
    const auto ws = make_sequence(c.model, c.n);
    const auto dist = make_distribution(c.model);
    const auto res = sandwich_experiment(ws, dist, c.gamma, c.ell, *c.p, c.r, c.replicates, c.seed);
    {
        auto os = detail::open_out(c.out_dir, "sandwich.csv");
        os << "replicate,minus,base,plus\n";
        for (std::size_t i = 0; i < res.base.size(); ++i)
            os << i << ',' << res.minus[i] << ',' << res.base[i] << ',' << res.plus[i] << '\n';
    }
    json dec = json::array();
    for (const auto& d : res.deciles)
        dec.push_back({{"level", d.level}, {"x", d.x}, {"cdf_base", d.cdf_base}, {"cdf_plus", d.cdf_plus},
                       {"sigma", d.sigma}, {"ok", d.ok}});
    json out{{"gamma", res.partition.gamma},
             {"gamma_snapped", res.partition.gamma_snapped},
             {"c_gamma", res.partition.c_gamma},
             {"subgraph_failures", res.subgraph_failures},
             {"lower_failures", res.lower_failures},
             {"lower_bound_vacuous_runs", res.vacuous_runs},
             {"dominance_ok", res.dominance_ok},
             {"deciles", dec},
             {"n_plus", res.n_plus},
             {"bonferroni",
              {{"checked", res.bonferroni.checked},
               {"violations", res.bonferroni.violations},
               {"worst_margin", res.bonferroni.checked ? json(res.bonferroni.worst_margin) : json(nullptr)},
               {"asserted", res.bonferroni.asserted}}}};
    detail::write_json(c.out_dir, "sandwich.json", out);
    if (!res.coupled_ok()) throw InvariantViolation("coupled lower side violated: " + out.dump());
    if (res.bonferroni.asserted && res.bonferroni.violations > 0)
        throw InvariantViolation("edge inequality of the upper coupling fails at n >= 10^4");
    return out;
}

struct KernelOutcome {
    std::size_t kernel_size = 0;
    std::size_t kernel_infected = 0;
    double fraction = 1.0;
    bool vacuous = false;
};

/// Frozen-vertex percolation: only kernel vertices (weight >= C) and seeds may
/// be infected.
inline KernelOutcome kernel_once(const WeightSequence& ws, double C, double q, int r, Rng& rng) {
    const auto g = sample_chung_lu(ws, rng);
    const auto seeds = seed_bernoulli(ws.size(), q, rng);
    std::vector<std::uint8_t> frozen(ws.size(), 0);
    KernelOutcome out;
    for (std::size_t v = 0; v < ws.size(); ++v) {
        frozen[v] = ws[v] < C;
        out.kernel_size += !frozen[v];
    }
    const auto res = run_bootstrap(g, seeds, r, frozen);
    if (!verify_fixed_point(g, seeds, res, r, frozen))
        throw InvariantViolation("frozen percolation failed the fixed-point certificate");
    for (std::size_t v = 0; v < ws.size(); ++v) out.kernel_infected += !frozen[v] && res.infected[v];
    out.vacuous = out.kernel_size == 0;
    out.fraction = out.vacuous ? 1.0 : static_cast<double>(out.kernel_infected) / static_cast<double>(out.kernel_size);
    return out;
}

inline json cmd_kernel(const ExperimentConfig& c) {
    if (c.model.kind != "power_law") throw ConfigError("kernel needs a power-law model");
    const auto ws = make_sequence(c.model, c.n);
    const double zeta = c.model.zeta.value_or(1.0 / (c.model.beta - 1.0));
    const double C = c.kernel_c > 0.0 ? c.kernel_c : std::pow(static_cast<double>(c.n), zeta / 2.0);
    const double q = seed_probability(c);
    std::vector<KernelOutcome> res(c.replicates);
    parallel_for(c.replicates, c.threads, [&](std::size_t i) {
        auto rng = Rng::stream(c.seed, i);
        res[i] = kernel_once(ws, C, q, c.r, rng);
    });
    auto os = detail::open_out(c.out_dir, "kernel.csv");
    os << "replicate,kernel_size,kernel_infected,fraction\n";
    os.precision(10);
    std::vector<double> fr;
    for (std::size_t i = 0; i < res.size(); ++i) {
        os << i << ',' << res[i].kernel_size << ',' << res[i].kernel_infected << ',' << res[i].fraction << '\n';
        fr.push_back(res[i].fraction);
    }
    json out{{"C", C}, {"vacuous", res.front().vacuous}, {"fractions", fr}};
    detail::write_json(c.out_dir, "kernel.json", out);
    return out;
}

inline json run_experiment(const ExperimentConfig& c) {
    log(LogLevel::info, "running '" + c.experiment + "' with n=" + std::to_string(c.n));
    if (c.experiment == "generate") return cmd_generate(c);
    if (c.experiment == "percolate") return cmd_percolate(c);
    if (c.experiment == "lln") return cmd_lln(c);
    if (c.experiment == "scan") return cmd_scan(c);
    if (c.experiment == "trajectory") return cmd_trajectory(c);
    if (c.experiment == "sandwich") return cmd_sandwich(c);
    if (c.experiment == "kernel") return cmd_kernel(c);
    return cmd_theory(c);
}

}  // namespace bootperc

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperdisc/aggregation.hpp"
#include "hyperdisc/agents.hpp"
#include "hyperdisc/hazard.hpp"
#include "hyperdisc/ladder.hpp"
#include "hyperdisc/pathworld.hpp"

namespace hyperdisc {

enum class EvalMode { Analytic, MonteCarlo };
enum class TrainSource { Analytic, Td };

inline const char* to_string(EvalMode m) {
    return m == EvalMode::Analytic ? "analytic" : "monte_carlo";
}

struct ExperimentConfig {
    std::string id = "pathworld";
    // ladder
    double gamma_max = 0.9999;
    int n_gamma = 100;
    double ladder_k = 0.05;
    // agent and environment hazard priors
    PriorKind agent_kind = PriorKind::Exponential;
    double agent_k = 0.05;
    PriorKind env_kind = PriorKind::Exponential;
    double env_k = 0.05;
    int n_paths = 15;
    std::uint64_t seed = 1;
    EvalMode mode = EvalMode::Analytic;
    TrainSource train = TrainSource::Analytic;
    long mc_episodes = 0; // required in MonteCarlo mode
    WeightForm form = WeightForm::ExponentFolded;
    RiemannRule rule = RiemannRule::Lower;
    int sweeps = 300; // TD training budget (documented step budget)
    std::string out_dir = ".";

    HazardPrior agent_prior() const { return make_prior(agent_kind, agent_k); }
    HazardPrior env_prior() const { return make_prior(env_kind, env_k); }

    std::string canonical_string() const {
        std::ostringstream os;
        os.precision(17);
        os << "id=" << id << ";gamma_max=" << gamma_max << ";n_gamma=" << n_gamma
           << ";ladder_k=" << ladder_k << ";agent=" << to_string(agent_kind) << ':' << agent_k
           << ";env=" << to_string(env_kind) << ':' << env_k << ";n_paths=" << n_paths
           << ";seed=" << seed << ";mode=" << to_string(mode)
           << ";train=" << (train == TrainSource::Analytic ? "analytic" : "td")
           << ";mc_episodes=" << mc_episodes
           << ";form=" << (form == WeightForm::ExponentFolded ? "folded" : "explicit")
           << ";rule=" << (rule == RiemannRule::Lower ? "lower" : "midpoint")
           << ";sweeps=" << sweeps;
        return os.str();
    }

    std::uint64_t hash() const {
        // FNV-1a 64
        std::uint64_t h = 14695981039346656037ull;
        for (const char c : canonical_string()) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 1099511628211ull;
        }
        return h;
    }

    static HazardPrior make_prior(PriorKind kind, double k) {
        switch (kind) {
            case PriorKind::Delta: return HazardPrior::delta(k);
            case PriorKind::Exponential: return HazardPrior::exponential(k);
            case PriorKind::Uniform: return HazardPrior::uniform(k);
        }
        throw std::logic_error("unreachable");
    }
};

/// Parse key=value lines ('#' comments allowed) into a config, starting from
/// the given defaults. Unknown keys are rejected.
inline ExperimentConfig parse_config_text(const std::string& text,
                                          ExperimentConfig config = {}) {
    const auto parse_prior_kind = [](const std::string& v) {
        if (v == "delta") return PriorKind::Delta;
        if (v == "exponential") return PriorKind::Exponential;
        if (v == "uniform") return PriorKind::Uniform;
        throw std::invalid_argument("unknown prior kind: " + v);
    };
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "id") config.id = value;
        else if (key == "gamma_max") config.gamma_max = std::stod(value);
        else if (key == "n_gamma") config.n_gamma = std::stoi(value);
        else if (key == "ladder_k") config.ladder_k = std::stod(value);
        else if (key == "agent_kind") config.agent_kind = parse_prior_kind(value);
        else if (key == "agent_k") config.agent_k = std::stod(value);
        else if (key == "env_kind") config.env_kind = parse_prior_kind(value);
        else if (key == "env_k") config.env_k = std::stod(value);
        else if (key == "n_paths") config.n_paths = std::stoi(value);
        else if (key == "seed") config.seed = std::stoull(value);
        else if (key == "mode")
            config.mode = value == "analytic" ? EvalMode::Analytic : EvalMode::MonteCarlo;
        else if (key == "train")
            config.train = value == "td" ? TrainSource::Td : TrainSource::Analytic;
        else if (key == "mc_episodes") config.mc_episodes = std::stol(value);
        else if (key == "form")
            config.form = value == "explicit" ? WeightForm::ExplicitWeight
                                              : WeightForm::ExponentFolded;
        else if (key == "rule")
            config.rule = value == "midpoint" ? RiemannRule::Midpoint : RiemannRule::Lower;
        else if (key == "sweeps") config.sweeps = std::stoi(value);
        else if (key == "out_dir") config.out_dir = value;
        else throw std::invalid_argument("unknown config key: " + key);
    }
    return config;
}

struct PathResult {
    int path = 0;
    double estimate = 0.0;
    double true_value = 0.0;
    double squared_error = 0.0;
    double std_error = 0.0; // Monte-Carlo only
};

struct ExperimentResult {
    std::vector<PathResult> paths;
    double mse = 0.0;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string mode;
    double wall_seconds = 0.0;
    bool converged = true; // false if TD heads missed their residual threshold
};

// ---------------------------------------------------------------------------
// Value profile
// ---------------------------------------------------------------------------

namespace detail {

/// Per-path value estimates under the agent's discounting scheme. Delta
/// (single-gamma) agents evaluate the exact closed form; the others aggregate
/// per-gamma values over the ladder.
inline std::vector<double> agent_estimates(const ExperimentConfig& config, bool* converged) {
    const int n = config.n_paths;
    std::vector<double> est(static_cast<std::size_t>(n) + 1, 0.0);

    if (config.agent_kind == PriorKind::Delta && config.train == TrainSource::Analytic) {
        for (int i = 1; i <= n; ++i)
            est[static_cast<std::size_t>(i)] =
                std::exp(-config.agent_k * pathworld_length(i)) * pathworld_reward(i);
        return est;
    }

    const double ladder_k =
        config.agent_kind == PriorKind::Exponential ? config.agent_k : config.ladder_k;
    const GammaLadder ladder = build_ladder(config.gamma_max, config.n_gamma, ladder_k);
    const AggregationWeights weights =
        riemann_weights(ladder, config.agent_prior(), config.form, config.rule);

    if (config.train == TrainSource::Analytic) {
        for (int i = 1; i <= n; ++i) {
            const double t = pathworld_length(i);
            const double r = pathworld_reward(i);
            est[static_cast<std::size_t>(i)] =
                aggregate_fn([&](double g) { return std::pow(g, t) * r; }, weights);
        }
        return est;
    }

    // TD source: train the multi-horizon table on the hazard-free Pathworld
    PathworldConfig pw;
    pw.n_paths = n;
    const Mdp mdp = pathworld_build(pw);
    MultiHorizonTable table(ladder, mdp.n_states, mdp.n_actions, mdp.r_max);
    train_sweeps(table, mdp, config.sweeps);
    for (int i = 1; i <= n; ++i) {
        const auto heads = table.head_values(0, i - 1);
        for (std::size_t h = 0; h < heads.size(); ++h) {
            const double expected =
                std::pow(ladder.gammas[h], pathworld_length(i)) * pathworld_reward(i);
            if (std::fabs(heads[h] - expected) > 1e-3 && converged) *converged = false;
        }
        est[static_cast<std::size_t>(i)] = aggregate(heads, weights);
    }
    return est;
}

} // namespace detail

/// Estimate per-path values under the agent's prior (trained with no hazard)
/// and score them against the true hazard-weighted returns of the
/// environment prior.
inline ExperimentResult run_value_profile(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    if (config.mode == EvalMode::MonteCarlo && config.mc_episodes <= 0)
        throw config_error("monte_carlo mode requires mc_episodes > 0");

    ExperimentResult result;
    result.config_hash = config.hash();
    result.seed = config.seed;
    result.mode = to_string(config.mode);

    const std::vector<double> estimates = detail::agent_estimates(config, &result.converged);
    const HazardPrior env = config.env_prior();

    double sq_sum = 0.0;
    for (int i = 1; i <= config.n_paths; ++i) {
        PathResult pr;
        pr.path = i;
        pr.estimate = estimates[static_cast<std::size_t>(i)];
        if (config.mode == EvalMode::Analytic) {
            pr.true_value = pathworld_true_value(env, i);
        } else {
            // seeded rollouts; episode e of path i draws from seed + i * 1e9 + e
            PathworldConfig pw;
            pw.n_paths = config.n_paths;
            const Mdp mdp = pathworld_build(pw);
            std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(i) * 1000000007ull);
            double total = 0.0, total_sq = 0.0;
            for (long e = 0; e < config.mc_episodes; ++e) {
                const double lambda = sample_hazard(env, rng);
                const int action = i - 1;
                const auto ep = simulate_episode(
                    mdp, [action](int, std::mt19937_64&) { return action; }, lambda, 0, rng);
                const double ret = ep.undiscounted_return();
                total += ret;
                total_sq += ret * ret;
            }
            const double mean = total / static_cast<double>(config.mc_episodes);
            const double var =
                (total_sq / static_cast<double>(config.mc_episodes) - mean * mean) /
                static_cast<double>(config.mc_episodes);
            pr.true_value = mean;
            pr.std_error = var > 0.0 ? std::sqrt(var) : 0.0;
        }
        pr.squared_error = (pr.estimate - pr.true_value) * (pr.estimate - pr.true_value);
        sq_sum += pr.squared_error;
        result.paths.push_back(pr);
    }
    result.mse = sq_sum / static_cast<double>(config.n_paths);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct AgentVariant {
    std::string label;
    PriorKind kind = PriorKind::Exponential;
    double k = 0.05;

    static AgentVariant hyperbolic(double k) {
        std::ostringstream os;
        os << "hyperbolic_k=" << k;
        return {os.str(), PriorKind::Exponential, k};
    }
    static AgentVariant single_gamma(double gamma) {
        std::ostringstream os;
        os << "gamma=" << gamma;
        return {os.str(), PriorKind::Delta, -std::log(gamma)};
    }
};

struct SweepEntry {
    AgentVariant agent;
    ExperimentResult result;
};

inline std::vector<SweepEntry> run_mismatch_sweep(const ExperimentConfig& base,
                                                  const std::vector<AgentVariant>& agents) {
    std::vector<SweepEntry> out;
    for (const auto& agent : agents) {
        ExperimentConfig c = base;
        c.agent_kind = agent.kind;
        c.agent_k = agent.k;
        out.push_back({agent, run_value_profile(c)});
    }
    return out;
}

struct TruncationEntry {
    double gamma_max = 0.0;
    ExperimentResult result;
};

inline std::vector<TruncationEntry> run_truncation_study(const ExperimentConfig& base,
                                                         const std::vector<double>& gamma_maxes) {
    std::vector<TruncationEntry> out;
    for (const double gm : gamma_maxes) {
        ExperimentConfig c = base;
        c.gamma_max = gm;
        out.push_back({gm, run_value_profile(c)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Path-count calibration
// ---------------------------------------------------------------------------

enum class TargetTable { Table2, Table3, Table4, Table6 };

struct CalibrationSweepPoint {
    int n_paths = 0;
    double total_abs_deviation = 0.0;
    std::vector<double> model_mses;
};

struct CalibrationResult {
    int recommended_n_paths = 0;
    bool ok = true;
    std::vector<CalibrationSweepPoint> sweep;
    std::vector<double> reference_mses;
};

/// Sweep n_paths over [5, 15] against a stored reference MSE column and return the
/// count minimizing total absolute deviation. Deterministic (analytic mode).
inline CalibrationResult calibrate_paths(TargetTable target, const ExperimentConfig& base = {}) {
    struct Row {
        AgentVariant agent;
        double reference;
    };
    std::vector<Row> rows;
    ExperimentConfig proto = base;
    proto.mode = EvalMode::Analytic;
    proto.train = TrainSource::Analytic;
    proto.env_kind = PriorKind::Exponential;
    proto.env_k = 0.05;
    std::vector<double> gamma_max_sweep;

    switch (target) {
        case TargetTable::Table2:
            rows = {{AgentVariant::hyperbolic(0.05), 0.002},
                    {AgentVariant::single_gamma(0.975), 0.566},
                    {AgentVariant::single_gamma(0.95), 1.461},
                    {AgentVariant::single_gamma(0.9), 2.253},
                    {AgentVariant::single_gamma(0.99), 2.288},
                    {AgentVariant::single_gamma(0.75), 2.809}};
            break;
        case TargetTable::Table3:
            rows = {{AgentVariant::hyperbolic(0.05), 0.002},
                    {AgentVariant::hyperbolic(0.1), 0.493},
                    {AgentVariant::hyperbolic(0.025), 0.814},
                    {AgentVariant::hyperbolic(0.2), 1.281}};
            break;
        case TargetTable::Table4:
            proto.env_kind = PriorKind::Uniform;
            proto.env_k = 0.1; // uniform with the same mean hazard 0.05
            rows = {{AgentVariant::hyperbolic(0.05), 0.235},
                    {AgentVariant::single_gamma(0.975), 0.266},
                    {AgentVariant::single_gamma(0.95), 0.470},
                    {AgentVariant::single_gamma(0.99), 4.029}};
            break;
        case TargetTable::Table6:
            rows = {{AgentVariant::hyperbolic(0.05), 0.0}};
            gamma_max_sweep = {0.999, 0.9999, 0.99, 0.95, 0.9};
            break;
    }
    const std::vector<double> table6_reference = {0.002, 0.003, 0.233, 1.638, 2.281};

    CalibrationResult result;
    for (const Row& row : rows) result.reference_mses.push_back(row.reference);
    if (target == TargetTable::Table6) result.reference_mses = table6_reference;

    double best_dev = 0.0;
    for (int n = 5; n <= 15; ++n) {
        CalibrationSweepPoint point;
        point.n_paths = n;
        ExperimentConfig c = proto;
        c.n_paths = n;
        if (target == TargetTable::Table6) {
            c.agent_kind = rows[0].agent.kind;
            c.agent_k = rows[0].agent.k;
            c.n_gamma = 10000; // quadrature error must not mask the truncation trend
            for (std::size_t g = 0; g < gamma_max_sweep.size(); ++g) {
                c.gamma_max = gamma_max_sweep[g];
                const double mse = run_value_profile(c).mse;
                point.model_mses.push_back(mse);
                point.total_abs_deviation += std::fabs(mse - table6_reference[g]);
            }
        } else {
            for (const Row& row : rows) {
                c.agent_kind = row.agent.kind;
                c.agent_k = row.agent.k;
                const double mse = run_value_profile(c).mse;
                point.model_mses.push_back(mse);
                point.total_abs_deviation += std::fabs(mse - row.reference);
            }
        }
        result.sweep.push_back(point);
        if (result.recommended_n_paths == 0 || point.total_abs_deviation < best_dev) {
            best_dev = point.total_abs_deviation;
            result.recommended_n_paths = n;
        }
    }

    // calibration fails if no candidate lands within 2x of every table value
    bool any_ok = false;
    for (const auto& point : result.sweep) {
        bool all = true;
        for (std::size_t i = 0; i < point.model_mses.size(); ++i) {
            const double ref = result.reference_mses[i];
            if (ref <= 0.0) continue;
            const double ratio = point.model_mses[i] / ref;
            if (ratio > 2.0 && point.model_mses[i] - ref > 0.01) all = false;
            if (ratio < 0.5 && ref - point.model_mses[i] > 0.01) all = false;
        }
        if (all) any_ok = true;
    }
    result.ok = any_ok;
    return result;
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

} // namespace detail

/// Columns: path, estimate, true_value, squared_error, std_error, mse,
/// config_hash, mode, seed. Every row carries the run metadata so artifacts
/// stay traceable when concatenated.
inline void write_result_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "path,estimate,true_value,squared_error,std_error,mse,config_hash,mode,seed\n";
    for (const auto& pr : result.paths) {
        os << pr.path << ',' << detail::fmt(pr.estimate) << ',' << detail::fmt(pr.true_value)
           << ',' << detail::fmt(pr.squared_error) << ',' << detail::fmt(pr.std_error) << ','
           << detail::fmt(result.mse) << ',' << result.config_hash << ',' << result.mode << ','
           << result.seed << '\n';
    }
}

/// Columns: t, d, d_hat, abs_error.
inline void write_curve_csv(const std::vector<double>& d_hat, const DiscountSpec& reference,
                            const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "t,d,d_hat,abs_error\n";
    for (std::size_t t = 0; t < d_hat.size(); ++t) {
        const double d = discount_value(reference, static_cast<double>(t));
        os << t << ',' << detail::fmt(d) << ',' << detail::fmt(d_hat[t]) << ','
           << detail::fmt(std::fabs(d - d_hat[t])) << '\n';
    }
}

} // namespace hyperdisc

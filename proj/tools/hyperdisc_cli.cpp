// Command-line front end: ladder inspection, discount-curve export, the
// Pathworld value-profile experiment and its sweeps, gridworld replay
// training, and path-count calibration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperdisc/aggregation.hpp"
#include "hyperdisc/agents.hpp"
#include "hyperdisc/experiment.hpp"
#include "hyperdisc/hazard.hpp"
#include "hyperdisc/ladder.hpp"
#include "hyperdisc/mdp.hpp"
#include "hyperdisc/pathworld.hpp"

namespace hd = hyperdisc;

namespace {

hd::PriorKind parse_kind(const std::string& s) {
    if (s == "delta") return hd::PriorKind::Delta;
    if (s == "exponential") return hd::PriorKind::Exponential;
    if (s == "uniform") return hd::PriorKind::Uniform;
    throw CLI::ValidationError("prior must be delta | exponential | uniform");
}

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

struct LadderOpts {
    double gamma_max = 0.9999;
    int n_gamma = 100;
    double k = 0.05;
    std::string preset;

    void attach(CLI::App* cmd) {
        cmd->add_option("--gamma-max", gamma_max, "largest discount factor")->capture_default_str();
        cmd->add_option("--n-gamma", n_gamma, "number of ladder intervals")->capture_default_str();
        cmd->add_option("--k", k, "ladder curvature parameter")->capture_default_str();
        cmd->add_option("--preset", preset, "named ladder preset: compact (10 / 0.99 / 0.01)");
    }
    hd::GammaLadder build() {
        if (preset == "compact") {
            n_gamma = 10;
            gamma_max = 0.99;
            k = 0.01;
        } else if (!preset.empty()) {
            throw CLI::ValidationError("unknown preset: " + preset);
        }
        return hd::build_ladder(gamma_max, n_gamma, k);
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-horizon discounting toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::string mode = "analytic";
    app.add_option("--config", config_path, "key=value config file (flags override it)");
    app.add_option("--out-dir", out_dir, "artifact directory")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--mode", mode, "true-value source: analytic | monte_carlo")
        ->capture_default_str();

    const auto base_config = [&]() {
        hd::ExperimentConfig c;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw CLI::ValidationError("cannot read config file " + config_path);
            std::stringstream buf;
            buf << is.rdbuf();
            c = hd::parse_config_text(buf.str());
        }
        c.seed = seed;
        c.out_dir = out_dir;
        c.mode = mode == "monte_carlo" ? hd::EvalMode::MonteCarlo : hd::EvalMode::Analytic;
        return c;
    };

    // ladder ---------------------------------------------------------------
    auto* ladder_cmd = app.add_subcommand("ladder", "print a gamma ladder");
    LadderOpts ladder_opts;
    ladder_opts.attach(ladder_cmd);
    ladder_cmd->callback([&] {
        const hd::GammaLadder l = ladder_opts.build();
        std::cout << l.to_config_text() << "b=" << l.b << "\n" << l.gammas_csv_row() << "\n";
    });

    // curve ----------------------------------------------------------------
    auto* curve_cmd = app.add_subcommand("curve", "export an approximated discount curve");
    LadderOpts curve_ladder;
    curve_ladder.attach(curve_cmd);
    std::string curve_prior = "exponential";
    double curve_prior_k = 0.05;
    int horizon = 200;
    std::string form = "folded", rule = "lower";
    curve_cmd->add_option("--prior", curve_prior, "hazard prior kind")->capture_default_str();
    curve_cmd->add_option("--prior-k", curve_prior_k, "hazard prior parameter")
        ->capture_default_str();
    curve_cmd->add_option("--horizon", horizon, "largest t")->capture_default_str();
    curve_cmd->add_option("--form", form, "folded | explicit")->capture_default_str();
    curve_cmd->add_option("--rule", rule, "lower | midpoint")->capture_default_str();
    curve_cmd->callback([&] {
        const hd::GammaLadder l = curve_ladder.build();
        const hd::HazardPrior prior =
            hd::ExperimentConfig::make_prior(parse_kind(curve_prior), curve_prior_k);
        const auto curve = hd::discount_curve(
            l, prior, horizon,
            form == "explicit" ? hd::WeightForm::ExplicitWeight : hd::WeightForm::ExponentFolded,
            rule == "midpoint" ? hd::RiemannRule::Midpoint : hd::RiemannRule::Lower);
        const std::string path = out_path(out_dir, "curve.csv");
        hd::write_curve_csv(curve, hd::discount_for_prior(prior), path);
        std::cout << "wrote " << path << "\n";
    });

    // pathworld ------------------------------------------------------------
    auto* pw_cmd = app.add_subcommand("pathworld", "value-profile experiment");
    std::string agent_kind = "exponential", env_kind = "exponential", train = "analytic";
    double agent_k = 0.05, env_k = 0.05;
    int n_paths = 15;
    long mc_episodes = 100000;
    LadderOpts pw_ladder;
    pw_ladder.attach(pw_cmd);
    pw_cmd->add_option("--agent-prior", agent_kind, "agent hazard prior")->capture_default_str();
    pw_cmd->add_option("--agent-k", agent_k, "agent prior parameter")->capture_default_str();
    pw_cmd->add_option("--env-prior", env_kind, "environment hazard prior")
        ->capture_default_str();
    pw_cmd->add_option("--env-k", env_k, "environment prior parameter")->capture_default_str();
    pw_cmd->add_option("--n-paths", n_paths, "number of paths")->capture_default_str();
    pw_cmd->add_option("--train", train, "estimate source: analytic | td")
        ->capture_default_str();
    pw_cmd->add_option("--mc-episodes", mc_episodes, "episodes per path in monte_carlo mode")
        ->capture_default_str();
    pw_cmd->callback([&] {
        hd::ExperimentConfig c = base_config();
        c.gamma_max = pw_ladder.gamma_max;
        c.n_gamma = pw_ladder.n_gamma;
        c.ladder_k = pw_ladder.k;
        c.agent_kind = parse_kind(agent_kind);
        c.agent_k = agent_k;
        c.env_kind = parse_kind(env_kind);
        c.env_k = env_k;
        c.n_paths = n_paths;
        c.train = train == "td" ? hd::TrainSource::Td : hd::TrainSource::Analytic;
        c.mc_episodes = mc_episodes;
        const hd::ExperimentResult r = hd::run_value_profile(c);
        const std::string path = out_path(out_dir, "pathworld.csv");
        hd::write_result_csv(r, path);
        std::printf("mse=%.6f  hash=%llu  wrote %s\n", r.mse,
                    static_cast<unsigned long long>(r.config_hash), path.c_str());
        if (!r.converged) std::puts("warning: TD heads missed the residual threshold");
    });

    // mismatch -------------------------------------------------------------
    auto* mm_cmd = app.add_subcommand("mismatch", "agent-vs-environment mismatch sweep");
    std::vector<double> mm_gammas = {0.75, 0.9, 0.95, 0.975, 0.99};
    std::vector<double> mm_ks = {0.05};
    std::string mm_env_kind = "exponential";
    double mm_env_k = 0.05;
    int mm_paths = 15;
    mm_cmd->add_option("--gammas", mm_gammas, "single-gamma agents to score")
        ->capture_default_str();
    mm_cmd->add_option("--ks", mm_ks, "hyperbolic agents (coefficient k) to score")
        ->capture_default_str();
    mm_cmd->add_option("--env-prior", mm_env_kind, "environment hazard prior")
        ->capture_default_str();
    mm_cmd->add_option("--env-k", mm_env_k, "environment prior parameter")
        ->capture_default_str();
    mm_cmd->add_option("--n-paths", mm_paths, "number of paths")->capture_default_str();
    mm_cmd->callback([&] {
        hd::ExperimentConfig c = base_config();
        c.env_kind = parse_kind(mm_env_kind);
        c.env_k = mm_env_k;
        c.n_paths = mm_paths;
        std::vector<hd::AgentVariant> agents;
        for (double k : mm_ks) agents.push_back(hd::AgentVariant::hyperbolic(k));
        for (double g : mm_gammas) agents.push_back(hd::AgentVariant::single_gamma(g));
        const auto sweep = hd::run_mismatch_sweep(c, agents);
        const std::string path = out_path(out_dir, "mismatch.csv");
        std::ofstream os(path);
        os << "agent,mse,config_hash,mode,seed\n";
        for (const auto& e : sweep) {
            os << e.agent.label << ',' << e.result.mse << ',' << e.result.config_hash << ','
               << e.result.mode << ',' << e.result.seed << '\n';
            std::printf("%-18s mse=%.6f\n", e.agent.label.c_str(), e.result.mse);
        }
        std::cout << "wrote " << path << "\n";
    });

    // truncation -----------------------------------------------------------
    auto* tr_cmd = app.add_subcommand("truncation", "gamma_max truncation study");
    std::vector<double> tr_gamma_maxes = {0.9, 0.95, 0.99, 0.999, 0.9999};
    int tr_n_gamma = 10000;
    tr_cmd->add_option("--gamma-maxes", tr_gamma_maxes, "gamma_max values to score")
        ->capture_default_str();
    tr_cmd->add_option("--n-gamma", tr_n_gamma, "ladder intervals (high, so quadrature noise stays out)")
        ->capture_default_str();
    tr_cmd->callback([&] {
        hd::ExperimentConfig c = base_config();
        c.n_gamma = tr_n_gamma;
        const auto sweep = hd::run_truncation_study(c, tr_gamma_maxes);
        const std::string path = out_path(out_dir, "truncation.csv");
        std::ofstream os(path);
        os << "gamma_max,mse,config_hash,mode,seed\n";
        for (const auto& e : sweep) {
            os << e.gamma_max << ',' << e.result.mse << ',' << e.result.config_hash << ','
               << e.result.mode << ',' << e.result.seed << '\n';
            std::printf("gamma_max=%-8g mse=%.6f\n", e.gamma_max, e.result.mse);
        }
        std::cout << "wrote " << path << "\n";
    });

    // gridworld ------------------------------------------------------------
    auto* gw_cmd = app.add_subcommand("gridworld", "replay training on a hazardous gridworld");
    std::string scheme = "mean";
    int gw_steps = 40000;
    bool audit = false;
    LadderOpts gw_ladder;
    gw_ladder.preset = "compact";
    gw_ladder.attach(gw_cmd);
    gw_cmd->add_option("--scheme", scheme, "priority scheme: mean | largest")
        ->capture_default_str();
    gw_cmd->add_option("--steps", gw_steps, "environment steps")->capture_default_str();
    gw_cmd->add_flag("--audit", audit, "log sampled priorities for the first batches");
    gw_cmd->callback([&] {
        const hd::Mdp grid = hd::gridworld_build(5, 5, 4, 4, {{2, 2}, {3, 2}, {2, 3}}, 0.9);
        const hd::GammaLadder l = gw_ladder.build();
        hd::ReplayConfig rc;
        rc.steps = gw_steps;
        rc.seed = seed;
        rc.log_audit = audit;
        rc.alpha = 0.1;
        rc.alpha_final = 0.001;
        rc.random_start = true;
        const auto res = hd::train_with_replay(
            grid, l,
            scheme == "largest" ? hd::PriorityScheme::LargestGammaTd : hd::PriorityScheme::MeanTd,
            rc);
        const std::string path = out_path(out_dir, "gridworld_curve.csv");
        std::ofstream os(path);
        os << "step,mean_return,scheme,seed\n";
        for (const auto& p : res.curve) {
            os << p.step << ',' << p.mean_return << ',' << scheme << ',' << seed << '\n';
            std::printf("step=%-7d mean_return=%.4f\n", p.step, p.mean_return);
        }
        std::cout << "wrote " << path << "\n";
        if (audit) {
            const std::string apath = out_path(out_dir, "gridworld_audit.csv");
            std::ofstream as(apath);
            as << "step,buffer_index,priority\n";
            for (const auto& a : res.audit)
                as << a.step << ',' << a.buffer_index << ',' << a.priority << '\n';
            std::cout << "wrote " << apath << "\n";
        }
    });

    // calibrate ------------------------------------------------------------
    auto* cal_cmd = app.add_subcommand("calibrate", "sweep n_paths against reference MSE columns");
    int table = 2;
    cal_cmd->add_option("--table", table, "reference column: 2 | 3 | 4 | 6")
        ->capture_default_str();
    cal_cmd->callback([&] {
        hd::TargetTable target;
        switch (table) {
            case 2: target = hd::TargetTable::Table2; break;
            case 3: target = hd::TargetTable::Table3; break;
            case 4: target = hd::TargetTable::Table4; break;
            case 6: target = hd::TargetTable::Table6; break;
            default: throw CLI::ValidationError("table must be 2, 3, 4 or 6");
        }
        const hd::CalibrationResult r = hd::calibrate_paths(target);
        for (const auto& p : r.sweep)
            std::printf("n_paths=%-3d total_abs_deviation=%.4f\n", p.n_paths,
                        p.total_abs_deviation);
        std::printf("recommended n_paths=%d (%s)\n", r.recommended_n_paths,
                    r.ok ? "within tolerance" : "NO candidate matches the reference column");
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

#include "robirl/bounds.hpp"
#include "robirl/continuous.hpp"
#include "robirl/environments.hpp"
#include "robirl/errors.hpp"
#include "robirl/experiment.hpp"
#include "robirl/feasibility.hpp"
#include "robirl/irl.hpp"
#include "robirl/json_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using namespace robirl;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    std::optional<int> threads;
};

void write_output(const Globals& g, const std::string& text) {
    if (g.out.empty())
        std::cout << text;
    else
        write_text_file(g.out, text);
}

Json config_or_empty(const Globals& g) { return g.config.empty() ? Json::object() : read_json_file(g.config); }

// Either a preset name or a path to an MDP JSON file.
TabularMdp load_mdp(const std::string& spec, int size, double eps) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), spec) != names.end()) {
        if (spec == "constructive") return make_constructive(eps);
        return make_noisy(make_preset(spec, size), eps);
    }
    auto m = mdp_from_json(read_json_file(spec));
    return eps > 0.0 ? make_noisy(m, eps) : m;
}

Json solution_json(const SoftSolution& s) {
    return {{"kind", "soft"},
            {"v", vector_to_json(s.v_soft)},
            {"q", matrix_to_json(s.q_soft)},
            {"policy", policy_to_json(s.policy)},
            {"iterations", s.iterations}};
}

Json solution_json(const HardSolution& s) {
    return {{"kind", "hard"},
            {"v", vector_to_json(s.v_star)},
            {"q", matrix_to_json(s.q_star)},
            {"policy", policy_to_json(s.policy)},
            {"iterations", s.iterations}};
}

Json solution_json(const TwoPlayerSolution& s) {
    return {{"kind", "two-player"},
            {"v", vector_to_json(s.v)},
            {"q_player", matrix_to_json(s.q_player)},
            {"q_opponent", matrix_to_json(s.q_opponent)},
            {"player", policy_to_json(s.player)},
            {"opponent", policy_to_json(s.opponent)},
            {"iterations", s.iterations}};
}

// The irl block of an experiment config, parsed with the same validation.
IrlConfig irl_config(const Json& j) {
    Json wrapped = Json::object();
    if (j.contains("irl")) wrapped["irl"] = j.at("irl");
    return ExperimentConfig::from_json(wrapped).irl;
}

struct IrlArgs {
    std::string learner;
    std::string target;
    std::string expert;
    int size = 5;
    double eps_l = 0.0;
    double eps_e = 0.0;
    double alpha = 1.0;
};

int run_irl(const Globals& g, const IrlArgs& a, bool robust) {
    const Json cfg_json = config_or_empty(g);
    IrlConfig cfg = irl_config(cfg_json);
    cfg.record_theta = false;
    TabularMdp learner = load_mdp(a.learner, a.size, a.eps_l);
    OccupancyMeasure target;
    if (!a.target.empty()) {
        target = occupancy_from_json(read_json_file(a.target));
    } else {
        const std::string expert_spec = a.expert.empty() ? a.learner : a.expert;
        TabularMdp expert = load_mdp(expert_spec, a.size, a.eps_e);
        target = state_occupancy(expert, value_iteration(expert, cfg.solver_options()).policy, cfg.inner_tol);
    }
    const Matrix features = learner.reward() ? learner.reward()->features
                                             : Matrix(Matrix::Identity(learner.n_states(), learner.n_states()));
    cfg.on_step = [](const IrlStepInfo& info) {
        std::cerr << Json{{"step", info.step}, {"grad_norm", info.grad_norm}, {"l1_mismatch", info.l1_mismatch}}.dump()
                  << std::endl;
    };
    IrlResult res = robust ? robust_mce_irl(learner, target, a.alpha, features, cfg)
                           : mce_irl(learner, target, features, cfg);
    Json out{{"theta", vector_to_json(res.theta)},
             {"policy", policy_to_json(res.policy)},
             {"final_l1_mismatch", res.final_l1_mismatch},
             {"steps_run", res.steps_run}};
    if (robust) {
        out["alpha"] = a.alpha;
        out["player_l1_mismatch"] = res.player_l1_mismatch;
        if (res.opponent) out["opponent"] = policy_to_json(*res.opponent);
    }
    if (learner.reward()) out["return"] = expected_return(learner, res.policy);
    write_output(g, out.dump(2) + "\n");
    return 0;
}

double get_or(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

BoundInputs bound_inputs(const Json& j) {
    BoundInputs in;
    in.gamma = j.at("gamma").get<double>();
    in.n_actions = j.at("n_actions").get<int>();
    in.d_dyn = get_or(j, "d_dyn", 0.0);
    if (j.contains("rewards")) {
        in = BoundInputs::from_rewards(in.gamma, vector_from_json(j.at("rewards")), in.n_actions, in.d_dyn);
    } else {
        in.r_min = j.at("r_min").get<double>();
        in.r_max = j.at("r_max").get<double>();
        in.r_abs_max = std::max(std::abs(in.r_min), std::abs(in.r_max));
    }
    if (j.contains("alpha")) in.alpha = j.at("alpha").get<double>();
    if (j.contains("d_pol")) in.d_pol = j.at("d_pol").get<double>();
    return in;
}

Json breakdown_json(const BoundBreakdown& b) {
    Json terms = Json::array();
    for (const auto& [name, v] : b.terms) terms.push_back({{"name", name}, {"value", v}});
    return {{"value", b.value}, {"terms", terms}};
}

Json evaluate_bound(const std::string& name, const Json& j) {
    if (name == "corollary-alpha")
        return {{"value", corollary_alpha_choice(j.at("d_dyn_expert_learner").get<double>(),
                                                 j.at("d_dyn_expert_tstar").get<double>())}};
    const BoundInputs in = bound_inputs(j);
    if (name == "kappa") return {{"value", kappa(in)}};
    if (name == "lemma1") return {{"value", lemma1_pol_bound(in)}};
    if (name == "thm1") return {{"value", thm1_gap_bound(in)}};
    if (name == "soft-expert") return {{"value", soft_expert_gap_bound(in)}};
    if (name == "robust") return {{"value", robust_gap_bound(in)}};
    if (name == "reward-transfer-simplified") return {{"value", reward_transfer_bound_simplified(in)}};
    if (name == "reward-transfer") {
        TransferInputs tr{get_or(j, "d_dyn_learner_expert", in.d_dyn), get_or(j, "d_dyn_train_learner", 0.0),
                          get_or(j, "kappa_train", 0.0), get_or(j, "d_pol_term", 0.0)};
        return breakdown_json(reward_transfer_bound(in, tr));
    }
    if (name == "infeasible") {
        InfeasibleInputs inf{get_or(j, "d_dyn_expert_learner", in.d_dyn), get_or(j, "d_dyn_expert_tstar", 0.0),
                             get_or(j, "d_pol_expert_player", 0.0)};
        return breakdown_json(infeasible_gap_bound(in, inf));
    }
    throw ConfigError("unknown bound '" + name + "'");
}

struct ReirlSweep {
    double eps_e = 0.2;
    double eps_l = 0.0;
    std::vector<double> alphas{0.85};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    cont::ReirlConfig cfg;
    int horizon = 200;
    int n_demos = 100;
    int n_eval = 200;
};

ReirlSweep reirl_sweep(const Json& j) {
    static const std::vector<std::string> known{"eps_E", "eps_L", "alpha", "seeds", "N_theta", "N_pi", "n_traj",
                                                "horizon", "lr", "theta_lr", "n_outer", "n_demos", "n_eval"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ConfigError("unknown reirl config key '" + k + "'");
    ReirlSweep s;
    try {
        s.eps_e = get_or(j, "eps_E", s.eps_e);
        s.eps_l = get_or(j, "eps_L", s.eps_l);
        if (j.contains("alpha"))
            s.alphas = j.at("alpha").is_array() ? j.at("alpha").get<std::vector<double>>()
                                                : std::vector<double>{j.at("alpha").get<double>()};
        if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        s.cfg.n_theta = j.value("N_theta", s.cfg.n_theta);
        s.cfg.pg.n_updates = j.value("N_pi", s.cfg.pg.n_updates);
        s.cfg.pg.n_traj = j.value("n_traj", s.cfg.pg.n_traj);
        s.cfg.pg.lr = j.value("lr", s.cfg.pg.lr);
        s.cfg.theta_lr = j.value("theta_lr", s.cfg.theta_lr);
        s.cfg.n_outer = j.value("n_outer", s.cfg.n_outer);
        s.horizon = j.value("horizon", s.horizon);
        s.n_demos = j.value("n_demos", s.n_demos);
        s.n_eval = j.value("n_eval", s.n_eval);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("reirl config: ") + e.what());
    }
    if (s.eps_e < 0 || s.eps_e > 1 || s.eps_l < 0 || s.eps_l > 1) throw ConfigError("eps_E and eps_L must be in [0,1]");
    for (double a : s.alphas)
        if (a <= 0 || a > 1) throw ConfigError("alpha must be in (0,1]");
    if (s.seeds.empty() || s.horizon < 1 || s.n_demos < 1 || s.n_eval < 1 || s.cfg.n_theta < 1 ||
        s.cfg.pg.n_updates < 1 || s.cfg.pg.n_traj < 1 || s.cfg.n_outer < 1 || s.cfg.pg.lr <= 0)
        throw ConfigError("reirl sizes and rates must be positive");
    return s;
}

int run_reirl(const Globals& g) {
    ReirlSweep s = reirl_sweep(config_or_empty(g));
    if (g.seed) s.seeds = {*g.seed};
    if (g.threads) s.cfg.pg.n_workers = *g.threads;
    const cont::GaussianGridEnv expert_env{s.eps_e, s.horizon, 0.99}, learner_env{s.eps_l, s.horizon, 0.99};
    const auto expert = cont::expert_policy();
    std::ostringstream csv;
    csv << "seed,method,eps_E,eps_L,alpha,mean_return,sd_return\n";
    Json rows = Json::array();
    auto emit = [&](std::uint64_t seed, const std::string& method, double alpha, const cont::ReturnStats& r) {
        csv << seed << ',' << method << ',' << format_number(s.eps_e) << ',' << format_number(s.eps_l) << ','
            << format_number(alpha) << ',' << format_number(r.mean) << ',' << format_number(r.sd) << '\n';
        rows.push_back({{"seed", seed}, {"method", method}, {"eps_E", s.eps_e}, {"eps_L", s.eps_l},
                        {"alpha", alpha}, {"mean_return", r.mean}, {"sd_return", r.sd}});
    };
    for (std::uint64_t seed : s.seeds) {
        const cont::Vec7 target = cont::expert_feature_mean(expert_env, expert, s.n_demos, 1000 + seed);
        cont::ReirlConfig standard = s.cfg;
        standard.two_player = false;
        auto eval = [&](const cont::ReirlResult& r) { return cont::evaluate_continuous(learner_env, r.player, s.n_eval, 99); };
        emit(seed, "standard", 1.0, eval(cont::relative_entropy_irl(learner_env, target, 1.0, standard, seed)));
        for (double a : s.alphas)
            emit(seed, "robust", a, eval(cont::relative_entropy_irl(learner_env, target, a, s.cfg, seed)));
    }
    write_output(g, parse_format(g.format) == ResultFormat::kJson ? rows.dump(2) + "\n" : csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust maximum causal entropy IRL under transition dynamics mismatch"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--seed", g.seed, "Seed override");
    app.add_option("--out", g.out, "Output path (default stdout)");
    app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* env = app.add_subcommand("env", "Environment tools");
    env->require_subcommand(1);
    auto* env_make = env->add_subcommand("make", "Emit a preset MDP as JSON");
    std::string preset;
    int size = 10;
    double eps = 0.0;
    env_make->add_option("preset", preset, "Preset name")->required()->check(CLI::IsMember(preset_names()));
    env_make->add_option("--size", size, "Grid side length")->check(CLI::Range(3, 1000));
    env_make->add_option("--eps", eps, "Uniform transition noise")->check(CLI::Range(0.0, 1.0));

    auto* solve = app.add_subcommand("solve", "Solve an MDP (hard, soft or two-player)");
    std::string mdp_spec, kind = "soft";
    double alpha = 1.0;
    solve->add_option("mdp", mdp_spec, "Preset name or MDP JSON path")->required();
    solve->add_option("--kind", kind)->check(CLI::IsMember({"hard", "soft", "two-player"}));
    solve->add_option("--alpha", alpha, "Player control probability")->check(CLI::Range(0.0, 1.0));
    solve->add_option("--size", size);
    solve->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));

    IrlArgs irl_args;
    auto add_irl = [&](CLI::App* cmd) {
        cmd->add_option("learner", irl_args.learner, "Learner MDP: preset name or JSON path")->required();
        cmd->add_option("--target", irl_args.target, "Occupancy JSON (array or {rho})");
        cmd->add_option("--expert", irl_args.expert, "Expert MDP used to build the target when --target is absent");
        cmd->add_option("--size", irl_args.size);
        cmd->add_option("--eps-l", irl_args.eps_l)->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--eps-e", irl_args.eps_e)->check(CLI::Range(0.0, 1.0));
    };
    auto* irl = app.add_subcommand("irl", "MCE IRL by occupancy matching");
    add_irl(irl);
    auto* robust = app.add_subcommand("robust-irl", "Robust MCE IRL against an action-robust opponent");
    add_irl(robust);
    robust->add_option("--alpha", irl_args.alpha)->required()->check(CLI::Range(0.0, 1.0));

    auto* feas = app.add_subcommand("feasibility", "Check whether a learner can match an occupancy");
    std::string feas_target;
    feas->add_option("mdp", mdp_spec)->required();
    feas->add_option("target", feas_target, "Occupancy JSON")->required();
    feas->add_option("--size", size);
    feas->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));

    auto* bounds = app.add_subcommand("bounds", "Evaluate a performance-gap formula");
    std::string formula, inputs_path;
    bounds->add_option("formula", formula)
        ->required()
        ->check(CLI::IsMember({"kappa", "lemma1", "thm1", "soft-expert", "robust", "reward-transfer",
                               "reward-transfer-simplified", "infeasible", "corollary-alpha"}));
    bounds->add_option("--inputs", inputs_path, "JSON inputs (defaults to --config)");

    auto* exp = app.add_subcommand("experiment", "Run an (eps_E, eps_L, alpha) sweep");
    bool paper_scale = false, soft_expert = false;
    exp->add_flag("--paper-scale", paper_scale, "10x10 grid with Monte Carlo evaluation");
    exp->add_flag("--soft-expert", soft_expert, "Use the soft-optimal expert");

    app.add_subcommand("reirl", "Continuous robust relative-entropy IRL sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (env_make->parsed()) {
            TabularMdp m = preset == "constructive"
                               ? make_constructive(eps)
                               : make_noisy(make_preset(preset, size, g.seed.value_or(0)), eps);
            write_output(g, mdp_to_json(m).dump(2) + "\n");
            return 0;
        }
        if (solve->parsed()) {
            TabularMdp m = load_mdp(mdp_spec, size, eps);
            Json out = kind == "hard"   ? solution_json(value_iteration(m))
                       : kind == "soft" ? solution_json(soft_value_iteration(m))
                                        : solution_json(two_player_soft_vi(m, alpha));
            write_output(g, out.dump(2) + "\n");
            return 0;
        }
        if (irl->parsed()) return run_irl(g, irl_args, false);
        if (robust->parsed()) return run_irl(g, irl_args, true);
        if (feas->parsed()) {
            TabularMdp m = load_mdp(mdp_spec, size, eps);
            FlowSystem fs = check_feasibility(m, occupancy_from_json(read_json_file(feas_target)));
            MatchingResult w = solve_matching_policy(fs);
            Json out{{"rank_t", fs.rank_t},
                     {"rank_augmented", fs.rank_augmented},
                     {"feasible", fs.feasible},
                     {"full_rank", fs.full_rank},
                     {"witness_residual", w.residual},
                     {"witness_min_entry", w.min_entry},
                     {"witness_policy", w.ok() ? policy_to_json(*w.policy) : Json(nullptr)}};
            write_output(g, out.dump(2) + "\n");
            return 0;
        }
        if (bounds->parsed()) {
            const std::string path = inputs_path.empty() ? g.config : inputs_path;
            if (path.empty()) throw ConfigError("bounds needs --inputs or --config");
            Json out;
            try {
                out = evaluate_bound(formula, read_json_file(path));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("bound inputs: ") + e.what());
            }
            out["formula"] = formula;
            write_output(g, out.dump(2) + "\n");
            return 0;
        }
        if (exp->parsed()) {
            Json j = config_or_empty(g);
            if (paper_scale) j["paper_scale"] = true;
            if (soft_expert) j["soft_expert"] = true;
            ExperimentConfig cfg = ExperimentConfig::from_json(j);
            if (g.seed) cfg.seeds = {*g.seed};
            if (g.threads) cfg.threads = *g.threads;
            cfg.validate();
            const auto rows = run_experiment(cfg);
            const std::string text = format_results(rows, parse_format(g.format));
            write_output(g, text);
            for (const auto& r : rows)
                if (!r.error.empty()) return 1;
            return 0;
        }
        return run_reirl(g);
    } catch (const ConfigError& e) {
        std::cerr << Json{{"error", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", "runtime"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
}

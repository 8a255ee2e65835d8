#pragma once

#include "robirl/irl.hpp"
#include "robirl/json_io.hpp"
#include "robirl/mdp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robirl {

struct EvalMode {
    bool monte_carlo = false;
    int n_per_state = 1000;
    int horizon = 1000;
};

struct ExperimentConfig {
    std::string env_preset = "grid-1";
    int grid_size = 5;
    std::uint64_t env_seed = 0; // ObjectWorld layout
    std::vector<double> eps_e_grid{0.0, 0.05, 0.1, 0.15, 0.2};
    std::vector<double> eps_l_grid{0.0, 0.05, 0.1};
    std::vector<double> alpha_grid{0.8, 0.85, 0.9, 0.95};
    std::vector<std::string> methods{"mce", "robust", "ideal"};
    std::vector<std::uint64_t> seeds{0};
    EvalMode eval;
    IrlConfig irl = IrlConfig::gridworld();
    bool soft_expert = false;
    bool record_wall_time = false;
    int threads = 1;

    /// Unknown keys and bad values raise ConfigError.
    static ExperimentConfig from_json(const Json& j);
    Json to_json() const;
    void validate() const;
    /// 10x10 grid with Monte Carlo evaluation.
    void apply_paper_scale();
};

/**
 * CSV header order: env, eps_e, eps_l, alpha, method, seed, return_mean,
 * return_sd, d_dyn, thm1_bound, l1_mismatch, wall_ms, best_alpha, error.
 */
struct ResultRow {
    std::string env;
    double eps_e = 0.0;
    double eps_l = 0.0;
    std::optional<double> alpha;
    std::string method;
    std::uint64_t seed = 0;
    double return_mean = 0.0;
    double return_sd = 0.0;
    double d_dyn = 0.0;
    double thm1_bound = 0.0;
    double l1_mismatch = 0.0;
    double wall_ms = 0.0;
    bool best_alpha = false; // best robust alpha within its (env, eps_e, eps_l, seed) cell
    std::string error;

    bool operator==(const ResultRow&) const = default;
};

struct ReturnEstimate {
    double mean = 0.0;
    double sd = 0.0;
};

/// Exact: (expected_return, 0). Monte Carlo: n_per_state*|S| rollouts from P0, discounted, truncated.
ReturnEstimate evaluate_policy(const TabularMdp& mdp, const StochasticPolicy& policy, const EvalMode& mode,
                               std::uint64_t seed = 0);

/// Expert MDP at eps_e or learner MDP at eps_l for a named preset.
TabularMdp build_environment(const ExperimentConfig& cfg, double eps);

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

void sort_rows(std::vector<ResultRow>& rows);
void mark_best_alpha(std::vector<ResultRow>& rows);

enum class ResultFormat { kCsv, kJson };
ResultFormat parse_format(const std::string& name);

std::string format_results(std::vector<ResultRow> rows, ResultFormat format);
std::vector<ResultRow> parse_results(const std::string& text, ResultFormat format);
void emit_results(const std::vector<ResultRow>& rows, const std::string& path, ResultFormat format);

/// printf("%.12g")
std::string format_number(double x);

} // namespace robirl
